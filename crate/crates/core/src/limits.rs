//! Resource caps shared by the solver and the checkers.

/// Configurable budgets. The defaults are sized for desk-scale instances.
#[derive(Clone, Debug)]
pub struct Limits {
    /// Largest admissible product-grid size.
    pub grid_cap: usize,
    /// Simplex pivot budget, enforced in float mode only (exact pivoting
    /// with Bland's rule terminates on its own).
    pub pivot_cap: usize,
    /// Cost-evaluation budget for the brute-force monotonicity search.
    pub brute_force_cap: u64,
    /// Largest witness expansion (number of listed points) accepted when
    /// clearing denominators.
    pub witness_cap: usize,
    /// Dump simplex tableaus to stderr while pivoting.
    pub lp_trace: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            grid_cap: 1_000_000,
            pivot_cap: 1_000_000,
            brute_force_cap: 10_000_000,
            witness_cap: 100_000,
            lp_trace: false,
        }
    }
}

impl Limits {
    pub fn with_grid_cap(mut self, grid_cap: usize) -> Self {
        self.grid_cap = grid_cap;
        self
    }
}
