//! Construction, extension, normalization, and verification of potential
//! tuples attached to a support set.

use thiserror::Error;

use crate::instance::{index_product, CostError, Instance};
use crate::limits::Limits;
use crate::monotone::{check_monotone_exact, MonotoneError, MonotonicityResult};
use crate::plan::SupportSet;
use crate::scalar::{cmp, min_of, Scalar};
use crate::tuple::{Potential, SplittingTuple, TupleDomain};
use crate::witness::RearrangementWitness;

#[derive(Clone, Debug, Error)]
pub enum SplittingError<S> {
    #[error("support set is not cyclically monotone")]
    NotMonotone(RearrangementWitness<S>),
    #[error("input tuple is not splitting on its domain ({} violations)", .0.violations.len())]
    InputNotSplitting(TupleReport<S>),
    #[error("base point {base:?} is not in the support set (potentials do not meet the cost there)")]
    BasePointNotInG { base: Vec<usize> },
    #[error("potential of axis {axis} is -inf at the base point")]
    InfinitePotentialAtBase { axis: usize },
    #[error("tuple shape does not match the instance spaces")]
    ShapeMismatch,
    #[error("base point {base:?} does not fit the instance")]
    BadBasePoint { base: Vec<usize> },
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// One violated cell found by [`verify_tuple`].
#[derive(Clone, Debug, PartialEq)]
pub enum TupleViolation<S> {
    /// Potential sum exceeds the cost: `excess = sum - cost > 0`.
    Inequality { cell: Vec<usize>, excess: S },
    /// Potential sum misses the cost on a support cell by `deviation`.
    Equality { cell: Vec<usize>, deviation: S },
    /// A `-inf` potential meets a support cell, so equality cannot hold.
    EqualityUndefined { cell: Vec<usize> },
}

/// Exhaustive check report; empty means the tuple is splitting on the
/// requested domain.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleReport<S> {
    pub violations: Vec<TupleViolation<S>>,
}

impl<S> TupleReport<S> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn tuple_matches_instance<S: Scalar>(tuple: &SplittingTuple<S>, instance: &Instance<S>) -> bool {
    tuple.dimension() == instance.dimension()
        && tuple
            .potentials
            .iter()
            .zip(&instance.spaces)
            .all(|(pots, space)| pots.len() == space.size())
}

/// Certifying potentials for a finite monotone support set, valid on the
/// product of its projections. Refuses non-monotone sets with a witness.
pub fn splitting_for_finite<S: Scalar>(
    gamma: &SupportSet,
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<SplittingTuple<S>, SplittingError<S>> {
    let verdict = check_monotone_exact(gamma, instance, limits)?;
    match verdict.result {
        MonotonicityResult::Monotone(tuple) => Ok(tuple),
        MonotonicityResult::Violated(witness) => Err(SplittingError::NotMonotone(witness)),
    }
}

/// Extend a tuple that is splitting on its finite domain to one valid on
/// the whole product grid, one axis at a time: each potential is replaced
/// by the cell-wise minimum of the cost minus the other potentials, taken
/// over all cells where those are finite. Equalities on the support set are
/// preserved and no `-inf` values remain.
pub fn extend_by_inf_convolution<S: Scalar>(
    tuple: &SplittingTuple<S>,
    gamma: &SupportSet,
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<SplittingTuple<S>, SplittingError<S>> {
    if !tuple_matches_instance(tuple, instance) {
        return Err(SplittingError::ShapeMismatch);
    }
    crate::monotone::validate_gamma(gamma, instance)?;
    let grid_size = instance.grid_size().unwrap_or(usize::MAX);
    if grid_size > limits.grid_cap {
        return Err(MonotoneError::GridTooLarge {
            size: grid_size,
            cap: limits.grid_cap,
        }
        .into());
    }
    let input_report = verify_tuple(tuple, gamma, instance, TupleDomain::OnAmbient);
    if !input_report.is_ok() {
        return Err(SplittingError::InputNotSplitting(input_report));
    }

    let d = instance.dimension();
    let sizes = instance.sizes();
    let mut pots = tuple.potentials.clone();

    for axis in 0..d {
        // Index choices for the minimization: already-updated axes range
        // over their whole space, not-yet-updated axes over their finite
        // domain.
        let choices: Vec<Vec<usize>> = (0..d)
            .filter(|&j| j != axis)
            .map(|j| {
                if j < axis {
                    (0..sizes[j]).collect()
                } else {
                    (0..sizes[j])
                        .filter(|&p| !pots[j][p].is_neg_inf())
                        .collect()
                }
            })
            .collect();
        if choices.iter().any(Vec::is_empty) {
            // An all-minus-infinity axis cannot carry equality on a
            // nonempty support set, which the input check already rejected.
            return Err(SplittingError::ShapeMismatch);
        }
        let mut updated = Vec::with_capacity(sizes[axis]);
        for point in 0..sizes[axis] {
            let mut best: Option<S> = None;
            for rest in index_product(&choices) {
                let mut cell = Vec::with_capacity(d);
                let mut rest_iter = rest.iter();
                let mut others = S::zero();
                for j in 0..d {
                    if j == axis {
                        cell.push(point);
                    } else {
                        let idx = *rest_iter.next().expect("one index per other axis");
                        cell.push(idx);
                        others = others
                            + pots[j][idx]
                                .finite()
                                .expect("restricted to finite domain")
                                .clone();
                    }
                }
                let value = instance.cost_at(&cell)? - others;
                best = Some(match best {
                    None => value,
                    Some(b) => min_of(b, value),
                });
            }
            updated.push(Potential::Finite(best.expect("nonempty index product")));
        }
        pots[axis] = updated;
    }

    Ok(SplittingTuple {
        potentials: pots,
        domain: TupleDomain::OnAmbient,
    })
}

/// Shift the potentials so the first one carries the whole cost at the base
/// point and the others vanish there. Cell sums are unchanged, so splitting
/// domains and equalities are preserved; for tuples valid on the whole grid
/// this also bounds each potential by the cost along the base axes.
pub fn normalize_at_base<S: Scalar>(
    tuple: &SplittingTuple<S>,
    base: &[usize],
    instance: &Instance<S>,
) -> Result<SplittingTuple<S>, SplittingError<S>> {
    if !tuple_matches_instance(tuple, instance) {
        return Err(SplittingError::ShapeMismatch);
    }
    let sizes = instance.sizes();
    if base.len() != sizes.len() || base.iter().zip(&sizes).any(|(&b, &n)| b >= n) {
        return Err(SplittingError::BadBasePoint {
            base: base.to_vec(),
        });
    }
    let d = tuple.dimension();
    let mut base_values = Vec::with_capacity(d);
    for (axis, &idx) in base.iter().enumerate() {
        match tuple.potentials[axis][idx].finite() {
            Some(v) => base_values.push(v.clone()),
            None => return Err(SplittingError::InfinitePotentialAtBase { axis }),
        }
    }
    let sum_at_base = base_values
        .iter()
        .fold(S::zero(), |acc, v| acc + v.clone());
    let cost_at_base = instance.cost_at(base)?;
    if !sum_at_base.approx_eq(&cost_at_base, &S::eq_tol()) {
        return Err(SplittingError::BasePointNotInG {
            base: base.to_vec(),
        });
    }

    let mut potentials = Vec::with_capacity(d);
    for (axis, pots) in tuple.potentials.iter().enumerate() {
        let offset = if axis == 0 {
            // Absorb the other base values into the first potential.
            base_values[1..]
                .iter()
                .fold(S::zero(), |acc, v| acc + v.clone())
        } else {
            -base_values[axis].clone()
        };
        potentials.push(pots.iter().map(|p| p.shift(&offset)).collect());
    }
    Ok(SplittingTuple {
        potentials,
        domain: tuple.domain,
    })
}

/// Exhaustively check the defining inequalities of a tuple on the chosen
/// domain and the equalities on the support set, reporting every violating
/// cell with its slack. A `-inf` potential satisfies any inequality and
/// violates any equality.
pub fn verify_tuple<S: Scalar>(
    tuple: &SplittingTuple<S>,
    gamma: &SupportSet,
    instance: &Instance<S>,
    domain: TupleDomain,
) -> TupleReport<S> {
    let mut violations = Vec::new();
    if !tuple_matches_instance(tuple, instance) {
        // Without matching shapes there is nothing meaningful to scan.
        return TupleReport {
            violations: vec![TupleViolation::EqualityUndefined { cell: vec![] }],
        };
    }
    let tol = S::eq_tol();
    let cells: Vec<Vec<usize>> = match domain {
        TupleDomain::OnAmbient => instance.grid().collect(),
        TupleDomain::OnProjections => {
            let proj = gamma.projections(instance.dimension());
            index_product(&proj).collect()
        }
    };
    for cell in cells {
        let Ok(cost) = instance.cost_at(&cell) else {
            continue;
        };
        if let Some(sum) = tuple.sum_at(&cell) {
            let excess = sum - cost;
            if cmp(&excess, &tol) == std::cmp::Ordering::Greater {
                violations.push(TupleViolation::Inequality { cell, excess });
            }
        }
    }
    for cell in gamma.iter() {
        let Ok(cost) = instance.cost_at(cell) else {
            continue;
        };
        match tuple.sum_at(cell) {
            None => violations.push(TupleViolation::EqualityUndefined { cell: cell.clone() }),
            Some(sum) => {
                let deviation = sum - cost;
                if cmp(&deviation.abs(), &tol) == std::cmp::Ordering::Greater {
                    violations.push(TupleViolation::Equality {
                        cell: cell.clone(),
                        deviation,
                    });
                }
            }
        }
    }
    TupleReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{BuiltinCost, CostSpec, Marginal, Point, Space};
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn quadratic_instance(d: usize, n: usize) -> Instance<Rational> {
        let space = || Space {
            points: (0..n)
                .map(|j| Point::with_coord(j.to_string(), vec![Rational::from_int(j as i64)]))
                .collect(),
        };
        Instance {
            spaces: (0..d).map(|_| space()).collect(),
            marginals: (0..d)
                .map(|space_id| Marginal {
                    space_id,
                    weights: vec![r(1, n as i64); n],
                })
                .collect(),
            cost: CostSpec::Builtin(BuiltinCost::PairwiseQuadratic),
        }
    }

    #[test]
    fn zero_tuple_verifies_on_diagonal_support() {
        let inst = quadratic_instance(2, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 0], vec![1, 1]]);
        let tuple = SplittingTuple::zeros(&inst.sizes());
        assert!(verify_tuple(&tuple, &gamma, &inst, TupleDomain::OnAmbient).is_ok());
    }

    #[test]
    fn zero_tuple_fails_equality_on_costly_cell() {
        let inst = quadratic_instance(2, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 1]]);
        let tuple = SplittingTuple::zeros(&inst.sizes());
        let report = verify_tuple(&tuple, &gamma, &inst, TupleDomain::OnAmbient);
        assert_eq!(
            report.violations,
            vec![TupleViolation::Equality {
                cell: vec![0, 1],
                deviation: Rational::from_int(-1),
            }]
        );
    }

    #[test]
    fn inflated_tuple_violates_exactly_the_tight_cells() {
        let inst = quadratic_instance(2, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 0], vec![1, 1]]);
        let mut tuple = SplittingTuple::zeros(&inst.sizes());
        // +1 on the first potential: cells with slack < 1 become violations.
        tuple.potentials[0] = tuple.potentials[0]
            .iter()
            .map(|p| p.shift(&Rational::from_int(1)))
            .collect();
        let report = verify_tuple(&tuple, &gamma, &inst, TupleDomain::OnAmbient);
        let violated: Vec<Vec<usize>> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                TupleViolation::Inequality { cell, .. } => Some(cell.clone()),
                _ => None,
            })
            .collect();
        // Slack was 0 on the diagonal and 1 on the antidiagonal.
        assert_eq!(violated, vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn pipeline_on_three_marginal_support() {
        let inst = quadratic_instance(3, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 0, 0], vec![1, 1, 0]]);
        let limits = Limits::default();
        let tuple = splitting_for_finite(&gamma, &inst, &limits).unwrap();
        assert_eq!(tuple.domain, TupleDomain::OnProjections);

        let extended = extend_by_inf_convolution(&tuple, &gamma, &inst, &limits).unwrap();
        assert_eq!(extended.domain, TupleDomain::OnAmbient);
        let report = verify_tuple(&extended, &gamma, &inst, TupleDomain::OnAmbient);
        assert!(report.is_ok(), "violations: {:?}", report.violations);

        let base = vec![0, 0, 0];
        let normalized = normalize_at_base(&extended, &base, &inst).unwrap();
        assert!(verify_tuple(&normalized, &gamma, &inst, TupleDomain::OnAmbient).is_ok());
        assert_eq!(
            normalized.potentials[0][0].finite().unwrap(),
            &inst.cost_at(&base).unwrap()
        );
        for axis in 1..3 {
            assert_eq!(
                normalized.potentials[axis][0].finite().unwrap(),
                &Rational::from_int(0)
            );
        }
        // Per-axis cost bounds along the base point.
        for axis in 0..3 {
            for point in 0..2 {
                let mut cell = base.clone();
                cell[axis] = point;
                assert!(
                    normalized.potentials[axis][point].finite().unwrap()
                        <= &inst.cost_at(&cell).unwrap()
                );
            }
        }
    }

    #[test]
    fn extension_of_zero_tuple_is_zero_on_quadratic_cube() {
        // Every fiber of the pairwise-quadratic cost attains zero at equal
        // coordinates, so extending the zero tuple returns zero potentials.
        let inst = quadratic_instance(3, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 0, 0], vec![1, 1, 1]]);
        let zero = SplittingTuple::zeros(&inst.sizes());
        let extended =
            extend_by_inf_convolution(&zero, &gamma, &inst, &Limits::default()).unwrap();
        for pots in &extended.potentials {
            for p in pots {
                assert_eq!(p.finite().unwrap(), &Rational::from_int(0));
            }
        }
    }

    #[test]
    fn extension_is_idempotent_and_pointwise_nondecreasing() {
        let inst = quadratic_instance(3, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 0, 0], vec![1, 1, 0]]);
        let limits = Limits::default();
        let tuple = splitting_for_finite(&gamma, &inst, &limits).unwrap();
        let once = extend_by_inf_convolution(&tuple, &gamma, &inst, &limits).unwrap();
        let twice = extend_by_inf_convolution(&once, &gamma, &inst, &limits).unwrap();
        assert_eq!(once, twice);
        for (before, after) in tuple.potentials.iter().zip(&once.potentials) {
            for (b, a) in before.iter().zip(after) {
                if let Some(b) = b.finite() {
                    assert!(a.finite().unwrap() >= b);
                }
            }
        }
    }

    #[test]
    fn normalization_requires_base_in_support() {
        let inst = quadratic_instance(2, 2);
        let tuple = SplittingTuple::zeros(&inst.sizes());
        // Sum of potentials is 0 but the cost at (0,1) is 1.
        assert!(matches!(
            normalize_at_base(&tuple, &[0, 1], &inst),
            Err(SplittingError::BasePointNotInG { .. })
        ));
        assert!(normalize_at_base(&tuple, &[0, 0], &inst).is_ok());
    }

    #[test]
    fn normalization_preserves_cell_sums() {
        let inst = quadratic_instance(3, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 0, 0], vec![1, 1, 0]]);
        let limits = Limits::default();
        let tuple = splitting_for_finite(&gamma, &inst, &limits).unwrap();
        let extended = extend_by_inf_convolution(&tuple, &gamma, &inst, &limits).unwrap();
        let normalized = normalize_at_base(&extended, &[1, 1, 0], &inst).unwrap();
        for cell in inst.grid() {
            assert_eq!(extended.sum_at(&cell), normalized.sum_at(&cell));
        }
    }

    #[test]
    fn non_splitting_input_is_rejected() {
        let inst = quadratic_instance(2, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 1]]);
        // Zero tuple misses the equality at (0,1).
        let tuple = SplittingTuple::zeros(&inst.sizes());
        assert!(matches!(
            extend_by_inf_convolution(&tuple, &gamma, &inst, &Limits::default()),
            Err(SplittingError::InputNotSplitting(_))
        ));
    }

    #[test]
    fn non_monotone_support_yields_witness_error() {
        let inst = quadratic_instance(2, 2);
        let gamma = SupportSet::from_points(vec![vec![0, 1], vec![1, 0]]);
        match splitting_for_finite(&gamma, &inst, &Limits::default()) {
            Err(SplittingError::NotMonotone(witness)) => {
                witness.verify(&gamma, &inst).unwrap();
            }
            other => panic!("expected witness error, got {other:?}"),
        }
    }
}
