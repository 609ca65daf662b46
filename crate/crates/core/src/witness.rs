//! Explicit refutations of cyclical monotonicity: a list of support points
//! together with coordinate permutations that strictly lower the total cost.

use thiserror::Error;

use crate::instance::{CostError, Instance};
use crate::plan::SupportSet;
use crate::scalar::{cmp, Scalar};

/// Points `x^(1)..x^(n)` drawn from a support set and permutations
/// `sigma_2..sigma_d` of `{0..n-1}` such that rearranging coordinates
/// `2..d` by them strictly lowers the summed cost.
#[derive(Clone, Debug, PartialEq)]
pub struct RearrangementWitness<S> {
    pub points: Vec<Vec<usize>>,
    /// One permutation per axis `2..=d`, 0-based over point slots.
    pub permutations: Vec<Vec<usize>>,
    pub cost_before: S,
    pub cost_after: S,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum WitnessCheckError {
    #[error("witness has no points")]
    Empty,
    #[error("witness lists {got} permutations for dimension {dimension}")]
    WrongPermutationCount { got: usize, dimension: usize },
    #[error("permutation {axis} is not a bijection on {{0..{n}}}")]
    NotAPermutation { axis: usize, n: usize },
    #[error("witness point {point:?} is not in the support set")]
    PointNotInSupport { point: Vec<usize> },
    #[error("stated cost_before {stated} differs from recomputed {recomputed}")]
    CostBeforeMismatch { stated: String, recomputed: String },
    #[error("stated cost_after {stated} differs from recomputed {recomputed}")]
    CostAfterMismatch { stated: String, recomputed: String },
    #[error("rearranged cost {after} does not strictly improve on {before}")]
    NotImproving { before: String, after: String },
    #[error(transparent)]
    Cost(#[from] CostError),
}

impl<S: Scalar> RearrangementWitness<S> {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// The `i`-th rearranged tuple `(x_1^(i), x_2^(sigma_2(i)), ...)`.
    pub fn rearranged_point(&self, i: usize) -> Vec<usize> {
        let d = self.points[0].len();
        let mut point = Vec::with_capacity(d);
        point.push(self.points[i][0]);
        for (axis, sigma) in self.permutations.iter().enumerate() {
            point.push(self.points[sigma[i]][axis + 1]);
        }
        point
    }

    /// Re-verify everything from scratch: membership, bijectivity, both cost
    /// sums, and strict improvement (beyond the float margin in float mode).
    pub fn verify(
        &self,
        gamma: &SupportSet,
        instance: &Instance<S>,
    ) -> Result<(), WitnessCheckError> {
        let n = self.n();
        if n == 0 {
            return Err(WitnessCheckError::Empty);
        }
        let d = instance.dimension();
        if self.permutations.len() + 1 != d {
            return Err(WitnessCheckError::WrongPermutationCount {
                got: self.permutations.len(),
                dimension: d,
            });
        }
        for (axis, sigma) in self.permutations.iter().enumerate() {
            let mut seen = vec![false; n];
            if sigma.len() != n {
                return Err(WitnessCheckError::NotAPermutation { axis: axis + 1, n });
            }
            for &s in sigma {
                if s >= n || seen[s] {
                    return Err(WitnessCheckError::NotAPermutation { axis: axis + 1, n });
                }
                seen[s] = true;
            }
        }
        for point in &self.points {
            if !gamma.contains(point) {
                return Err(WitnessCheckError::PointNotInSupport {
                    point: point.clone(),
                });
            }
        }
        let mut before = S::zero();
        for point in &self.points {
            before = before + instance.cost_at(point)?;
        }
        let mut after = S::zero();
        for i in 0..n {
            after = after + instance.cost_at(&self.rearranged_point(i))?;
        }
        if !before.approx_eq(&self.cost_before, &S::eq_tol()) {
            return Err(WitnessCheckError::CostBeforeMismatch {
                stated: self.cost_before.to_string(),
                recomputed: before.to_string(),
            });
        }
        if !after.approx_eq(&self.cost_after, &S::eq_tol()) {
            return Err(WitnessCheckError::CostAfterMismatch {
                stated: self.cost_after.to_string(),
                recomputed: after.to_string(),
            });
        }
        let margin = S::eq_tol();
        if cmp(&(before - margin), &after) != std::cmp::Ordering::Greater {
            return Err(WitnessCheckError::NotImproving {
                before: self.cost_before.to_string(),
                after: self.cost_after.to_string(),
            });
        }
        Ok(())
    }

    pub fn to_mode<T: Scalar>(&self) -> RearrangementWitness<T> {
        let conv = |v: &S| match v.to_rational() {
            Some(r) => T::from_rational(&r),
            None => T::from_int(0),
        };
        RearrangementWitness {
            points: self.points.clone(),
            permutations: self.permutations.clone(),
            cost_before: conv(&self.cost_before),
            cost_after: conv(&self.cost_after),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{BuiltinCost, CostSpec, Marginal, Point, Space};
    use crate::scalar::Rational;

    fn swap_instance() -> Instance<Rational> {
        let space = || Space {
            points: (0..2)
                .map(|j| Point::with_coord(j.to_string(), vec![Rational::from_int(j)]))
                .collect(),
        };
        Instance {
            spaces: vec![space(), space()],
            marginals: vec![
                Marginal {
                    space_id: 0,
                    weights: vec![Rational::from_ratio(1, 2); 2],
                },
                Marginal {
                    space_id: 1,
                    weights: vec![Rational::from_ratio(1, 2); 2],
                },
            ],
            cost: CostSpec::Builtin(BuiltinCost::PairwiseQuadratic),
        }
    }

    #[test]
    fn swap_witness_verifies() {
        let inst = swap_instance();
        let gamma = SupportSet::from_points(vec![vec![0, 1], vec![1, 0]]);
        let witness = RearrangementWitness {
            points: vec![vec![0, 1], vec![1, 0]],
            permutations: vec![vec![1, 0]],
            cost_before: Rational::from_int(2),
            cost_after: Rational::from_int(0),
        };
        witness.verify(&gamma, &inst).unwrap();
        assert_eq!(witness.rearranged_point(0), vec![0, 0]);
        assert_eq!(witness.rearranged_point(1), vec![1, 1]);
    }

    #[test]
    fn non_improving_witness_is_rejected() {
        let inst = swap_instance();
        let gamma = SupportSet::from_points(vec![vec![0, 0]]);
        let witness = RearrangementWitness {
            points: vec![vec![0, 0]],
            permutations: vec![vec![0]],
            cost_before: Rational::from_int(0),
            cost_after: Rational::from_int(0),
        };
        assert!(matches!(
            witness.verify(&gamma, &inst),
            Err(WitnessCheckError::NotImproving { .. })
        ));
    }

    #[test]
    fn tampered_costs_are_rejected() {
        let inst = swap_instance();
        let gamma = SupportSet::from_points(vec![vec![0, 1], vec![1, 0]]);
        let witness = RearrangementWitness {
            points: vec![vec![0, 1], vec![1, 0]],
            permutations: vec![vec![1, 0]],
            cost_before: Rational::from_int(3),
            cost_after: Rational::from_int(0),
        };
        assert!(matches!(
            witness.verify(&gamma, &inst),
            Err(WitnessCheckError::CostBeforeMismatch { .. })
        ));
    }
}
