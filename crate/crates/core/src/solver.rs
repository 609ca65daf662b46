//! The multi-marginal transport problem as a linear program over the
//! product grid, in both directions: the primal over cell masses and the
//! explicit potential maximization.

use thiserror::Error;

use crate::instance::{CostError, Instance, ValidationIssue};
use crate::limits::Limits;
use crate::lp::{
    solve_lp, Constraint, LinearProgram, LpError, LpOutcome, Relation, Sense, VarBound,
};
use crate::plan::TransportPlan;
use crate::scalar::Scalar;
use crate::splitting::normalize_at_base;
use crate::tuple::{Potential, SplittingTuple, TupleDomain};

/// Optimal plan and certifying potentials for one instance.
#[derive(Clone, Debug)]
pub struct SolveResult<S> {
    pub optimal_plan: TransportPlan<S>,
    pub optimal_value: S,
    /// Dual potentials feasible on the whole grid, normalized at the plan's
    /// lexicographically smallest support point.
    pub dual_tuple: SplittingTuple<S>,
    /// Primal value minus the dual tuple's marginal value.
    pub gap: S,
}

#[derive(Clone, Debug, Error)]
pub enum SolveError {
    #[error("invalid instance: {}", format_issues(.0))]
    InvalidInstance(Vec<ValidationIssue>),
    #[error("product grid has {size} cells, exceeding the cap of {cap}")]
    GridTooLarge { size: usize, cap: usize },
    #[error("product grid size overflows")]
    GridOverflow,
    #[error("marginal system is infeasible, which valid marginals exclude")]
    UnexpectedInfeasible,
    #[error("transport program reported unbounded, which nonnegative costs exclude")]
    UnexpectedUnbounded,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn checked_instance<S: Scalar>(
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<usize, SolveError> {
    let issues = instance.validate();
    if !issues.is_empty() {
        return Err(SolveError::InvalidInstance(issues));
    }
    let size = instance.grid_size().ok_or(SolveError::GridOverflow)?;
    if size > limits.grid_cap {
        return Err(SolveError::GridTooLarge {
            size,
            cap: limits.grid_cap,
        });
    }
    Ok(size)
}

/// Minimize total cost over plans with the prescribed marginals.
///
/// Variables are grid cells in lexicographic order; for every axis and point
/// there is one marginal equality row. The per-axis total-mass redundancy is
/// left in place, the LP kernel absorbs it. The dual potentials are read off
/// the marginal rows' multipliers.
pub fn solve_primal<S: Scalar>(
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<SolveResult<S>, SolveError> {
    let grid_size = checked_instance(instance, limits)?;
    let d = instance.dimension();
    let sizes = instance.sizes();

    let cells: Vec<Vec<usize>> = instance.grid().collect();
    debug_assert_eq!(cells.len(), grid_size);
    let mut objective = Vec::with_capacity(grid_size);
    for cell in &cells {
        objective.push(instance.cost_at(cell)?);
    }

    let mut constraints = Vec::new();
    let mut row_of = Vec::new();
    for axis in 0..d {
        for point in 0..sizes[axis] {
            let mut coeffs = vec![S::zero(); grid_size];
            for (var, cell) in cells.iter().enumerate() {
                if cell[axis] == point {
                    coeffs[var] = S::one();
                }
            }
            constraints.push(Constraint::new(
                coeffs,
                Relation::Eq,
                instance.marginals[axis].weights[point].clone(),
            ));
            row_of.push((axis, point));
        }
    }

    let lp = LinearProgram {
        sense: Sense::Minimize,
        objective,
        constraints,
        bounds: vec![VarBound::NonNegative; grid_size],
    };
    let solution = match solve_lp(&lp, limits)? {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible(_) => return Err(SolveError::UnexpectedInfeasible),
        LpOutcome::Unbounded => return Err(SolveError::UnexpectedUnbounded),
    };

    let optimal_plan = TransportPlan::from_entries(
        cells
            .iter()
            .zip(&solution.primal)
            .map(|(cell, mass)| (cell.clone(), mass.clone())),
    );

    let mut potentials: Vec<Vec<Potential<S>>> = sizes
        .iter()
        .map(|&n| vec![Potential::Finite(S::zero()); n])
        .collect();
    for ((axis, point), mult) in row_of.iter().zip(&solution.dual) {
        potentials[*axis][*point] = Potential::Finite(mult.clone());
    }
    let mut dual_tuple = SplittingTuple {
        potentials,
        domain: TupleDomain::OnAmbient,
    };
    // Fix the constant ambiguity left by the redundant total-mass rows.
    if let Some(base) = optimal_plan.as_measure().support().lex_min() {
        if let Ok(normalized) = normalize_at_base(&dual_tuple, base, instance) {
            dual_tuple = normalized;
        }
    }

    let dual_value = dual_tuple
        .marginal_value(&instance.marginals)
        .unwrap_or_else(S::zero);
    let gap = solution.objective_value.clone() - dual_value;

    Ok(SolveResult {
        optimal_plan,
        optimal_value: solution.objective_value,
        dual_tuple,
        gap,
    })
}

/// Maximize the summed potential integrals subject to the potentials
/// summing to at most the cost on every grid cell.
pub fn solve_dual<S: Scalar>(
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<(SplittingTuple<S>, S), SolveError> {
    checked_instance(instance, limits)?;
    let d = instance.dimension();
    let sizes = instance.sizes();

    let mut var_of = Vec::new();
    let mut objective = Vec::new();
    for axis in 0..d {
        for point in 0..sizes[axis] {
            var_of.push((axis, point));
            objective.push(instance.marginals[axis].weights[point].clone());
        }
    }
    let nvars = var_of.len();

    let mut constraints = Vec::new();
    for cell in instance.grid() {
        let mut coeffs = vec![S::zero(); nvars];
        for (var, (axis, point)) in var_of.iter().enumerate() {
            if cell[*axis] == *point {
                coeffs[var] = S::one();
            }
        }
        constraints.push(Constraint::new(coeffs, Relation::Le, instance.cost_at(&cell)?));
    }

    let lp = LinearProgram {
        sense: Sense::Maximize,
        objective,
        constraints,
        bounds: vec![VarBound::Free; nvars],
    };
    let solution = match solve_lp(&lp, limits)? {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible(_) => return Err(SolveError::UnexpectedInfeasible),
        LpOutcome::Unbounded => return Err(SolveError::UnexpectedUnbounded),
    };

    let mut potentials: Vec<Vec<Potential<S>>> = sizes
        .iter()
        .map(|&n| vec![Potential::Finite(S::zero()); n])
        .collect();
    for ((axis, point), value) in var_of.iter().zip(&solution.primal) {
        potentials[*axis][*point] = Potential::Finite(value.clone());
    }
    Ok((
        SplittingTuple {
            potentials,
            domain: TupleDomain::OnAmbient,
        },
        solution.objective_value,
    ))
}

/// Primal minimum minus dual maximum; zero under strong duality.
pub fn duality_gap<S: Scalar>(instance: &Instance<S>, limits: &Limits) -> Result<S, SolveError> {
    let primal = solve_primal(instance, limits)?;
    let (_, dual_value) = solve_dual(instance, limits)?;
    Ok(primal.optimal_value - dual_value)
}
