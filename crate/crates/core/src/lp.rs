//! Dense two-phase primal simplex with Bland's rule.
//!
//! Small by design: equality constraints are handled natively, redundant
//! rows are tolerated (their artificial stays basic at level zero and the
//! row receives a zero multiplier), optima come with dual multipliers, and
//! infeasible systems come with a Farkas certificate that verifies by
//! direct multiplication.

use std::cmp::Ordering;

use thiserror::Error;

use crate::limits::Limits;
use crate::scalar::{cmp, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }
}

/// Per-variable lower bound: zero or unbounded below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S> Constraint<S> {
    pub fn new(coeffs: Vec<S>, relation: Relation, rhs: S) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<S> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
    pub bounds: Vec<VarBound>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LpError {
    #[error("constraint {row} has {got} coefficients, expected {expected}")]
    DimensionMismatch {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("objective has {got} coefficients for {expected} variable bounds")]
    ObjectiveMismatch { got: usize, expected: usize },
    #[error("constraint {row} has a non-finite coefficient or right-hand side")]
    NonFiniteData { row: usize },
    #[error("simplex pivot budget of {0} exceeded")]
    IterationLimit(usize),
}

/// Primal and dual solution at an optimum. The duals are one multiplier per
/// constraint, signed so that `dual . rhs = objective_value` and
/// complementary slackness holds (a nonzero multiplier means a tight row).
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<S> {
    pub primal: Vec<S>,
    pub dual: Vec<S>,
    pub objective_value: S,
}

/// Infeasibility certificate: row multipliers `y` with sign pattern matching
/// the relations (`<=` rows nonpositive, `>=` rows nonnegative), `y^T A <= 0`
/// on nonnegative variables, `y^T A = 0` on free variables, and `y^T b > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate<S> {
    pub row_multipliers: Vec<S>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FarkasError {
    #[error("multiplier {row} has the wrong sign for its relation")]
    WrongSign { row: usize },
    #[error("aggregated coefficient of variable {var} is positive")]
    PositiveCombination { var: usize },
    #[error("aggregated coefficient of free variable {var} is nonzero")]
    FreeCombinationNonZero { var: usize },
    #[error("aggregated right-hand side is not positive")]
    RhsNotPositive,
    #[error("certificate has {got} multipliers for {expected} constraints")]
    LengthMismatch { got: usize, expected: usize },
}

impl<S: Scalar> FarkasCertificate<S> {
    /// Check the certificate against the constraint system by direct
    /// multiplication.
    pub fn verify(
        &self,
        constraints: &[Constraint<S>],
        bounds: &[VarBound],
    ) -> Result<(), FarkasError> {
        if self.row_multipliers.len() != constraints.len() {
            return Err(FarkasError::LengthMismatch {
                got: self.row_multipliers.len(),
                expected: constraints.len(),
            });
        }
        let tol = S::eq_tol();
        for (row, (y, c)) in self.row_multipliers.iter().zip(constraints).enumerate() {
            let bad = match c.relation {
                Relation::Le => cmp(y, &tol) == Ordering::Greater,
                Relation::Ge => cmp(&(-y.clone()), &tol) == Ordering::Greater,
                Relation::Eq => false,
            };
            if bad {
                return Err(FarkasError::WrongSign { row });
            }
        }
        let nvars = bounds.len();
        for var in 0..nvars {
            let mut combined = S::zero();
            for (y, c) in self.row_multipliers.iter().zip(constraints) {
                combined = combined + y.clone() * c.coeffs[var].clone();
            }
            match bounds[var] {
                VarBound::NonNegative => {
                    if cmp(&combined, &tol) == Ordering::Greater {
                        return Err(FarkasError::PositiveCombination { var });
                    }
                }
                VarBound::Free => {
                    if cmp(&combined.abs(), &tol) == Ordering::Greater {
                        return Err(FarkasError::FreeCombinationNonZero { var });
                    }
                }
            }
        }
        let mut agg_rhs = S::zero();
        for (y, c) in self.row_multipliers.iter().zip(constraints) {
            agg_rhs = agg_rhs + y.clone() * c.rhs.clone();
        }
        if cmp(&agg_rhs, &S::eq_tol()) != Ordering::Greater {
            return Err(FarkasError::RhsNotPositive);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(LpSolution<S>),
    Infeasible(FarkasCertificate<S>),
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility<S> {
    Feasible(Vec<S>),
    Infeasible(FarkasCertificate<S>),
}

/// Solve a linear program, reporting an optimum with duals, an infeasibility
/// certificate, or unboundedness.
pub fn solve_lp<S: Scalar>(lp: &LinearProgram<S>, limits: &Limits) -> Result<LpOutcome<S>, LpError> {
    validate(lp)?;
    let minimize = match lp.sense {
        Sense::Minimize => lp.objective.clone(),
        Sense::Maximize => lp.objective.iter().map(|c| -c.clone()).collect(),
    };
    let mut tab = Tableau::build(&minimize, &lp.constraints, &lp.bounds, limits);
    tab.run_phase1()?;
    if !tab.phase1_feasible() {
        return Ok(LpOutcome::Infeasible(tab.farkas()));
    }
    tab.enter_phase2();
    if !tab.run_phase2()? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut solution = tab.extract_solution(lp.bounds.len());
    if lp.sense == Sense::Maximize {
        solution.objective_value = -solution.objective_value;
        solution.dual = solution.dual.into_iter().map(|y| -y).collect();
    }
    Ok(LpOutcome::Optimal(solution))
}

/// Decide feasibility of a constraint system, returning a satisfying point
/// or a verifying Farkas certificate.
pub fn check_feasibility<S: Scalar>(
    constraints: &[Constraint<S>],
    bounds: &[VarBound],
    limits: &Limits,
) -> Result<Feasibility<S>, LpError> {
    let lp = LinearProgram {
        sense: Sense::Minimize,
        objective: vec![S::zero(); bounds.len()],
        constraints: constraints.to_vec(),
        bounds: bounds.to_vec(),
    };
    validate(&lp)?;
    let mut tab = Tableau::build(&lp.objective, constraints, bounds, limits);
    tab.run_phase1()?;
    if !tab.phase1_feasible() {
        return Ok(Feasibility::Infeasible(tab.farkas()));
    }
    Ok(Feasibility::Feasible(tab.primal_point(bounds.len())))
}

fn validate<S: Scalar>(lp: &LinearProgram<S>) -> Result<(), LpError> {
    let nvars = lp.bounds.len();
    if lp.objective.len() != nvars {
        return Err(LpError::ObjectiveMismatch {
            got: lp.objective.len(),
            expected: nvars,
        });
    }
    for (row, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != nvars {
            return Err(LpError::DimensionMismatch {
                row,
                got: c.coeffs.len(),
                expected: nvars,
            });
        }
        if !c.rhs.is_finite_value() || c.coeffs.iter().any(|a| !a.is_finite_value()) {
            return Err(LpError::NonFiniteData { row });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
enum ColKind {
    /// Structural column for an original variable; `negated` marks the
    /// negative half of a split free variable.
    Structural { var: usize, negated: bool },
    Slack,
    Artificial,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    cost_row: Vec<S>,
    col_kind: Vec<ColKind>,
    /// Per row: the column that started out as that row's unit vector.
    id_col: Vec<usize>,
    row_flipped: Vec<bool>,
    /// Phase-1 objective of each column (1 on artificials).
    phase1_costs: Vec<S>,
    /// Standard-form minimization objective for phase 2.
    phase2_costs: Vec<S>,
    in_phase2: bool,
    pivots: usize,
    pivot_cap: Option<usize>,
    trace: bool,
}

impl<S: Scalar> Tableau<S> {
    fn build(
        minimize: &[S],
        constraints: &[Constraint<S>],
        bounds: &[VarBound],
        limits: &Limits,
    ) -> Self {
        let m = constraints.len();

        // Structural columns: free variables are split into two halves.
        let mut col_kind = Vec::new();
        let mut phase2_costs = Vec::new();
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(bounds.len());
        for (var, bound) in bounds.iter().enumerate() {
            let pos = col_kind.len();
            col_kind.push(ColKind::Structural { var, negated: false });
            phase2_costs.push(minimize[var].clone());
            let neg = match bound {
                VarBound::Free => {
                    col_kind.push(ColKind::Structural { var, negated: true });
                    phase2_costs.push(-minimize[var].clone());
                    Some(pos + 1)
                }
                VarBound::NonNegative => None,
            };
            var_cols.push((pos, neg));
        }
        let nstructural = col_kind.len();

        // Normalize rows to nonnegative right-hand sides.
        let mut row_flipped = vec![false; m];
        let mut relations = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, c) in constraints.iter().enumerate() {
            if cmp(&c.rhs, &S::zero()) == Ordering::Less {
                row_flipped[i] = true;
                relations.push(c.relation.flipped());
                rhs.push(-c.rhs.clone());
            } else {
                relations.push(c.relation);
                rhs.push(c.rhs.clone());
            }
        }

        let n_slacks = relations
            .iter()
            .filter(|r| !matches!(r, Relation::Eq))
            .count();
        let n_artificials = relations
            .iter()
            .filter(|r| !matches!(r, Relation::Le))
            .count();
        let ncols = nstructural + n_slacks + n_artificials;

        let mut rows = vec![vec![S::zero(); ncols]; m];
        for (i, c) in constraints.iter().enumerate() {
            for (var, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let signed = if row_flipped[i] { -a.clone() } else { a.clone() };
                let (pos, neg) = var_cols[var];
                rows[i][pos] = signed.clone();
                if let Some(neg) = neg {
                    rows[i][neg] = -signed;
                }
            }
        }

        let mut basis = vec![usize::MAX; m];
        let mut id_col = vec![usize::MAX; m];
        let mut next = nstructural;
        for (i, rel) in relations.iter().enumerate() {
            match rel {
                Relation::Le => {
                    col_kind.push(ColKind::Slack);
                    rows[i][next] = S::one();
                    basis[i] = next;
                    id_col[i] = next;
                    next += 1;
                }
                Relation::Ge => {
                    col_kind.push(ColKind::Slack);
                    rows[i][next] = -S::one();
                    next += 1;
                }
                Relation::Eq => {}
            }
        }
        for (i, rel) in relations.iter().enumerate() {
            if matches!(rel, Relation::Le) {
                continue;
            }
            col_kind.push(ColKind::Artificial);
            rows[i][next] = S::one();
            basis[i] = next;
            id_col[i] = next;
            next += 1;
        }
        debug_assert_eq!(next, ncols);

        phase2_costs.resize(ncols, S::zero());
        let phase1_costs: Vec<S> = col_kind
            .iter()
            .map(|k| match k {
                ColKind::Artificial => S::one(),
                _ => S::zero(),
            })
            .collect();

        // Price the basic artificials out of the phase-1 cost row.
        let mut cost_row = phase1_costs.clone();
        for (i, &b) in basis.iter().enumerate() {
            if matches!(col_kind[b], ColKind::Artificial) {
                for j in 0..ncols {
                    if !rows[i][j].is_zero() {
                        cost_row[j] = cost_row[j].clone() - rows[i][j].clone();
                    }
                }
            }
        }

        Tableau {
            rows,
            rhs,
            basis,
            cost_row,
            col_kind,
            id_col,
            row_flipped,
            phase1_costs,
            phase2_costs,
            in_phase2: false,
            pivots: 0,
            pivot_cap: if S::EXACT { None } else { Some(limits.pivot_cap) },
            trace: limits.lp_trace,
        }
    }

    fn ncols(&self) -> usize {
        self.col_kind.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot_val = self.rows[row][col].clone();
        debug_assert!(!pivot_val.is_zero());
        for j in 0..self.ncols() {
            self.rows[row][j] = self.rows[row][j].clone() / pivot_val.clone();
        }
        self.rhs[row] = self.rhs[row].clone() / pivot_val;

        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for j in 0..self.ncols() {
                if !self.rows[row][j].is_zero() {
                    self.rows[r][j] =
                        self.rows[r][j].clone() - factor.clone() * self.rows[row][j].clone();
                }
            }
            self.rhs[r] = self.rhs[r].clone() - factor * self.rhs[row].clone();
        }
        if !self.cost_row[col].is_zero() {
            let factor = self.cost_row[col].clone();
            for j in 0..self.ncols() {
                if !self.rows[row][j].is_zero() {
                    self.cost_row[j] =
                        self.cost_row[j].clone() - factor.clone() * self.rows[row][j].clone();
                }
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Bland's rule: entering column is the lowest-index column with a
    /// negative reduced cost; leaving row minimizes the ratio, ties broken
    /// by the lowest basic column index. Returns `Ok(true)` at an optimum
    /// and `Ok(false)` when the objective is unbounded below.
    fn pivot_loop(&mut self) -> Result<bool, LpError> {
        let neg_tol = -S::pivot_tol();
        loop {
            if let Some(cap) = self.pivot_cap {
                if self.pivots >= cap {
                    return Err(LpError::IterationLimit(cap));
                }
            }
            if self.trace {
                self.dump();
            }
            let entering = (0..self.ncols()).find(|&j| {
                !matches!(self.col_kind[j], ColKind::Artificial)
                    && cmp(&self.cost_row[j], &neg_tol) == Ordering::Less
            });
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let entry = &self.rows[i][col];
                if cmp(entry, &S::pivot_tol()) != Ordering::Greater {
                    continue;
                }
                let ratio = self.rhs[i].clone() / entry.clone();
                let better = match &leave {
                    None => true,
                    Some((best_row, best_ratio)) => match cmp(&ratio, best_ratio) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*best_row],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(false),
            }
        }
    }

    fn run_phase1(&mut self) -> Result<(), LpError> {
        // Phase 1 minimizes the artificial mass, which is bounded below by
        // zero; an unbounded report can only be float noise and is treated
        // as convergence.
        let _ = self.pivot_loop()?;
        Ok(())
    }

    fn phase1_objective(&self) -> S {
        let mut total = S::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if matches!(self.col_kind[b], ColKind::Artificial) {
                total = total + self.rhs[i].clone();
            }
        }
        total
    }

    fn phase1_feasible(&self) -> bool {
        self.phase1_objective().le_within(&S::zero(), &S::eq_tol())
    }

    /// Farkas multipliers from the phase-1 optimum, mapped back to the
    /// original row orientation.
    fn farkas(&self) -> FarkasCertificate<S> {
        let mut y = Vec::with_capacity(self.rows.len());
        for i in 0..self.rows.len() {
            let id = self.id_col[i];
            let mult = self.phase1_costs[id].clone() - self.cost_row[id].clone();
            y.push(if self.row_flipped[i] { -mult } else { mult });
        }
        FarkasCertificate { row_multipliers: y }
    }

    /// Drive remaining artificials out of the basis (or recognize their rows
    /// as redundant) and install the phase-2 objective.
    fn enter_phase2(&mut self) {
        for i in 0..self.rows.len() {
            if !matches!(self.col_kind[self.basis[i]], ColKind::Artificial) {
                continue;
            }
            let col = (0..self.ncols()).find(|&j| {
                !matches!(self.col_kind[j], ColKind::Artificial)
                    && cmp(&self.rows[i][j].abs(), &S::pivot_tol()) == Ordering::Greater
            });
            if let Some(col) = col {
                // The row's basic value is (near) zero, so this degenerate
                // pivot preserves feasibility regardless of the entry sign.
                self.pivot(i, col);
            }
            // No eligible column: the row is redundant. Its artificial stays
            // basic at zero and the row's multiplier comes out as zero.
        }
        self.cost_row = self.phase2_costs.clone();
        for i in 0..self.rows.len() {
            let cb = self.phase2_costs[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.ncols() {
                if !self.rows[i][j].is_zero() {
                    self.cost_row[j] = self.cost_row[j].clone() - cb.clone() * self.rows[i][j].clone();
                }
            }
        }
        self.in_phase2 = true;
    }

    /// Returns false when the objective is unbounded below.
    fn run_phase2(&mut self) -> Result<bool, LpError> {
        self.pivot_loop()
    }

    fn primal_point(&self, nvars: usize) -> Vec<S> {
        let mut x = vec![S::zero(); nvars];
        for (i, &b) in self.basis.iter().enumerate() {
            if let ColKind::Structural { var, negated } = self.col_kind[b] {
                let v = self.rhs[i].clone();
                x[var] = if negated {
                    x[var].clone() - v
                } else {
                    x[var].clone() + v
                };
            }
        }
        x
    }

    fn extract_solution(&self, nvars: usize) -> LpSolution<S> {
        let primal = self.primal_point(nvars);
        let mut objective_value = S::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let c = &self.phase2_costs[b];
            if !c.is_zero() {
                objective_value = objective_value + c.clone() * self.rhs[i].clone();
            }
        }
        let mut dual = Vec::with_capacity(self.rows.len());
        for i in 0..self.rows.len() {
            let id = self.id_col[i];
            // Identity columns carry zero phase-2 cost, so the multiplier is
            // the negated reduced cost.
            let mult = -self.cost_row[id].clone();
            dual.push(if self.row_flipped[i] { -mult } else { mult });
        }
        LpSolution {
            primal,
            dual,
            objective_value,
        }
    }

    fn dump(&self) {
        eprintln!("-- tableau after {} pivots --", self.pivots);
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            eprintln!("  [{}] {} | {}", self.basis[i], cells.join(" "), self.rhs[i]);
        }
        let costs: Vec<String> = self.cost_row.iter().map(|v| v.to_string()).collect();
        eprintln!("  z: {}", costs.join(" "));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn minimize_with_lower_bound_constraint() {
        // minimize x subject to x >= 1, x >= 0
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(1)],
            constraints: vec![Constraint::new(vec![r(1)], Relation::Ge, r(1))],
            bounds: vec![VarBound::NonNegative],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.primal, vec![r(1)]);
                assert_eq!(sol.objective_value, r(1));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn maximize_reports_tight_constraint_duals() {
        // maximize x subject to x <= 3 and x <= 2: the binding row carries
        // the dual, the slack row's multiplier is zero.
        let lp = LinearProgram {
            sense: Sense::Maximize,
            objective: vec![r(1)],
            constraints: vec![
                Constraint::new(vec![r(1)], Relation::Le, r(3)),
                Constraint::new(vec![r(1)], Relation::Le, r(2)),
            ],
            bounds: vec![VarBound::NonNegative],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.primal, vec![r(2)]);
                assert_eq!(sol.objective_value, r(2));
                assert_eq!(sol.dual[0], r(0));
                assert_eq!(sol.dual[1], r(1));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_yield_verifying_certificate() {
        // x <= 1 and x >= 2
        let constraints = vec![
            Constraint::new(vec![r(1)], Relation::Le, r(1)),
            Constraint::new(vec![r(1)], Relation::Ge, r(2)),
        ];
        let bounds = vec![VarBound::NonNegative];
        match check_feasibility(&constraints, &bounds, &limits()).unwrap() {
            Feasibility::Infeasible(cert) => {
                cert.verify(&constraints, &bounds).unwrap();
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn equality_pair_feasible_and_infeasible() {
        let bounds = vec![VarBound::Free];
        let feasible = vec![
            Constraint::new(vec![r(1)], Relation::Eq, r(1)),
            Constraint::new(vec![r(1)], Relation::Le, r(2)),
        ];
        match check_feasibility(&feasible, &bounds, &limits()).unwrap() {
            Feasibility::Feasible(x) => assert_eq!(x, vec![r(1)]),
            other => panic!("expected feasible, got {other:?}"),
        }

        let infeasible = vec![
            Constraint::new(vec![r(1)], Relation::Eq, r(1)),
            Constraint::new(vec![r(1)], Relation::Eq, r(2)),
        ];
        match check_feasibility(&infeasible, &bounds, &limits()).unwrap() {
            Feasibility::Infeasible(cert) => cert.verify(&infeasible, &bounds).unwrap(),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_minimization_is_detected() {
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(-1)],
            constraints: vec![Constraint::new(vec![r(-1)], Relation::Le, r(0))],
            bounds: vec![VarBound::NonNegative],
        };
        assert_eq!(solve_lp(&lp, &limits()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equality_rows_are_tolerated() {
        // x + y = 1 stated twice plus its double; duals of redundant rows
        // come out zero and strong duality still holds.
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(2), r(3)],
            constraints: vec![
                Constraint::new(vec![r(1), r(1)], Relation::Eq, r(1)),
                Constraint::new(vec![r(1), r(1)], Relation::Eq, r(1)),
                Constraint::new(vec![r(2), r(2)], Relation::Eq, r(2)),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.objective_value, r(2));
                assert_eq!(sol.primal, vec![r(1), r(0)]);
                let dual_obj: Rational = sol
                    .dual
                    .iter()
                    .zip(&lp.constraints)
                    .map(|(y, c)| y.clone() * c.rhs.clone())
                    .fold(r(0), |a, b| a + b);
                assert_eq!(dual_obj, r(2));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(1)],
            constraints: vec![Constraint::new(vec![r(1), r(2)], Relation::Le, r(1))],
            bounds: vec![VarBound::NonNegative],
        };
        assert!(matches!(
            solve_lp(&lp, &limits()),
            Err(LpError::DimensionMismatch { row: 0, .. })
        ));
    }

    #[test]
    fn complementary_slackness_at_optimum() {
        // minimize x + y subject to x + 2y >= 4, 3x + y >= 3.
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(1), r(1)],
            constraints: vec![
                Constraint::new(vec![r(1), r(2)], Relation::Ge, r(4)),
                Constraint::new(vec![r(3), r(1)], Relation::Ge, r(3)),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                for (y, c) in sol.dual.iter().zip(&lp.constraints) {
                    if !y.is_zero() {
                        let lhs: Rational = c
                            .coeffs
                            .iter()
                            .zip(&sol.primal)
                            .map(|(a, x)| a.clone() * x.clone())
                            .fold(r(0), |a, b| a + b);
                        assert_eq!(lhs, c.rhs, "nonzero multiplier on a slack row");
                    }
                }
                let dual_obj: Rational = sol
                    .dual
                    .iter()
                    .zip(&lp.constraints)
                    .map(|(y, c)| y.clone() * c.rhs.clone())
                    .fold(r(0), |a, b| a + b);
                assert_eq!(dual_obj, sol.objective_value);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn beale_cycling_example_terminates_at_the_optimum() {
        // The classic degenerate program that cycles under largest-
        // coefficient pivoting. Bland's rule must terminate at -1/20
        // (value confirmed against an independent solver).
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![
                r(0),
                r(0),
                r(0),
                Rational::from_ratio(-3, 4),
                r(150),
                Rational::from_ratio(-1, 50),
                r(6),
            ],
            constraints: vec![
                Constraint::new(
                    vec![
                        r(1),
                        r(0),
                        r(0),
                        Rational::from_ratio(1, 4),
                        r(-60),
                        Rational::from_ratio(-1, 25),
                        r(9),
                    ],
                    Relation::Eq,
                    r(0),
                ),
                Constraint::new(
                    vec![
                        r(0),
                        r(1),
                        r(0),
                        Rational::from_ratio(1, 2),
                        r(-90),
                        Rational::from_ratio(-1, 50),
                        r(3),
                    ],
                    Relation::Eq,
                    r(0),
                ),
                Constraint::new(
                    vec![r(0), r(0), r(1), r(0), r(0), r(1), r(0)],
                    Relation::Eq,
                    r(1),
                ),
            ],
            bounds: vec![VarBound::NonNegative; 7],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.objective_value, Rational::from_ratio(-1, 20));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn negative_right_hand_sides_keep_duals_consistent() {
        // Rows that get sign-normalized internally must still report
        // multipliers against the original orientation.
        let lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(1), r(2)],
            constraints: vec![
                Constraint::new(vec![r(-1), r(-1)], Relation::Le, r(-3)),
                Constraint::new(vec![r(-1), r(1)], Relation::Ge, r(-2)),
                Constraint::new(vec![r(1), r(-1)], Relation::Eq, r(-1)),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                // x - y = -1 and x + y >= 3 give x = 1, y = 2.
                assert_eq!(sol.primal, vec![r(1), r(2)]);
                assert_eq!(sol.objective_value, r(5));
                let dual_obj: Rational = sol
                    .dual
                    .iter()
                    .zip(&lp.constraints)
                    .map(|(y, c)| y.clone() * c.rhs.clone())
                    .fold(r(0), |a, b| a + b);
                assert_eq!(dual_obj, r(5));
                // Sign pattern: <= rows carry nonpositive multipliers.
                assert!(sol.dual[0] <= r(0));
            }
            other => panic!("expected optimal, got {other:?}"),
        }

        // Same system made contradictory; the certificate must verify
        // against the original rows.
        let infeasible = vec![
            Constraint::new(vec![r(-1), r(-1)], Relation::Ge, r(-1)),
            Constraint::new(vec![r(1), r(1)], Relation::Ge, r(2)),
        ];
        let bounds = vec![VarBound::NonNegative; 2];
        match check_feasibility(&infeasible, &bounds, &limits()).unwrap() {
            Feasibility::Infeasible(cert) => cert.verify(&infeasible, &bounds).unwrap(),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn maximize_with_equality_and_free_variable_duals() {
        // maximize x + y with y free, x + y = 2, x <= 1.
        let lp = LinearProgram {
            sense: Sense::Maximize,
            objective: vec![r(1), r(1)],
            constraints: vec![
                Constraint::new(vec![r(1), r(1)], Relation::Eq, r(2)),
                Constraint::new(vec![r(1), r(0)], Relation::Le, r(1)),
            ],
            bounds: vec![VarBound::NonNegative, VarBound::Free],
        };
        match solve_lp(&lp, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.objective_value, r(2));
                // Dual feasibility for the free variable's column pins the
                // equality multiplier at 1; strong duality then zeroes the
                // inequality multiplier.
                assert_eq!(sol.dual, vec![r(1), r(0)]);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn pivot_budget_applies_to_float_mode_only() {
        let limits = Limits {
            pivot_cap: 1,
            ..Limits::default()
        };
        let float_lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![-1.0, -1.0],
            constraints: vec![
                Constraint::new(vec![1.0, 0.0], Relation::Le, 1.0),
                Constraint::new(vec![0.0, 1.0], Relation::Le, 1.0),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        assert!(matches!(
            solve_lp(&float_lp, &limits),
            Err(LpError::IterationLimit(1))
        ));

        // Exact pivoting terminates on its own and ignores the budget.
        let exact_lp = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(-1), r(-1)],
            constraints: vec![
                Constraint::new(vec![r(1), r(0)], Relation::Le, r(1)),
                Constraint::new(vec![r(0), r(1)], Relation::Le, r(1)),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        match solve_lp(&exact_lp, &limits).unwrap() {
            LpOutcome::Optimal(sol) => assert_eq!(sol.objective_value, r(-2)),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn float_and_rational_agree_on_a_small_lp() {
        let lpr = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![Rational::from_ratio(3, 2), r(1)],
            constraints: vec![
                Constraint::new(vec![r(1), r(1)], Relation::Ge, r(2)),
                Constraint::new(vec![r(1), r(-1)], Relation::Le, r(1)),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        let lpf = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![1.5, 1.0],
            constraints: vec![
                Constraint::new(vec![1.0, 1.0], Relation::Ge, 2.0),
                Constraint::new(vec![1.0, -1.0], Relation::Le, 1.0),
            ],
            bounds: vec![VarBound::NonNegative; 2],
        };
        let vr = match solve_lp(&lpr, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => sol.objective_value.to_f64(),
            other => panic!("{other:?}"),
        };
        let vf = match solve_lp(&lpf, &limits()).unwrap() {
            LpOutcome::Optimal(sol) => sol.objective_value,
            other => panic!("{other:?}"),
        };
        assert!((vr - vf).abs() <= 1e-9);
    }
}
