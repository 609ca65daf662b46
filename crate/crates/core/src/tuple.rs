//! Potential tuples: one value per point of each factor space, summing to at
//! most the cost everywhere and to exactly the cost on a distinguished set.

use std::fmt;

use crate::scalar::Scalar;

/// A potential value in `[-inf, inf)`. Minus infinity is representable (it
/// marks points outside a tuple's certified domain) but never produced by
/// the construction pipeline on finite nonnegative costs.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential<S> {
    NegInf,
    Finite(S),
}

impl<S: Scalar> Potential<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Potential::NegInf => None,
            Potential::Finite(v) => Some(v),
        }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Potential::NegInf)
    }

    pub fn shift(&self, offset: &S) -> Potential<S> {
        match self {
            Potential::NegInf => Potential::NegInf,
            Potential::Finite(v) => Potential::Finite(v.clone() + offset.clone()),
        }
    }
}

impl<S: fmt::Display> fmt::Display for Potential<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::NegInf => f.write_str("-inf"),
            Potential::Finite(v) => v.fmt(f),
        }
    }
}

/// Where a tuple's defining inequality has been certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleDomain {
    /// On the product of the support projections only.
    OnProjections,
    /// On the whole ambient product grid.
    OnAmbient,
}

impl TupleDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            TupleDomain::OnProjections => "projections",
            TupleDomain::OnAmbient => "ambient",
        }
    }
}

/// One potential vector per factor space. `potentials[i]` has one entry per
/// point of space `i`; entries are `NegInf` outside the certified domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingTuple<S> {
    pub potentials: Vec<Vec<Potential<S>>>,
    pub domain: TupleDomain,
}

impl<S: Scalar> SplittingTuple<S> {
    /// All-zero tuple over the given space sizes, certified on ambient.
    pub fn zeros(sizes: &[usize]) -> Self {
        SplittingTuple {
            potentials: sizes
                .iter()
                .map(|&n| vec![Potential::Finite(S::zero()); n])
                .collect(),
            domain: TupleDomain::OnAmbient,
        }
    }

    /// Finite potentials at the listed per-axis indices, `NegInf` elsewhere.
    pub fn from_finite_on(
        sizes: &[usize],
        indices: &[Vec<usize>],
        values: &[Vec<S>],
        domain: TupleDomain,
    ) -> Self {
        let mut potentials: Vec<Vec<Potential<S>>> = sizes
            .iter()
            .map(|&n| vec![Potential::NegInf; n])
            .collect();
        for (axis, (idxs, vals)) in indices.iter().zip(values).enumerate() {
            for (&p, v) in idxs.iter().zip(vals) {
                potentials[axis][p] = Potential::Finite(v.clone());
            }
        }
        SplittingTuple { potentials, domain }
    }

    pub fn dimension(&self) -> usize {
        self.potentials.len()
    }

    /// Sum of the potentials at a grid cell; `None` when any entry is `-inf`.
    pub fn sum_at(&self, point: &[usize]) -> Option<S> {
        let mut total = S::zero();
        for (axis, &idx) in point.iter().enumerate() {
            total = total + self.potentials[axis][idx].finite()?.clone();
        }
        Some(total)
    }

    /// Integral of each potential against the matching marginal, summed.
    /// `None` when a `-inf` entry meets positive weight.
    pub fn marginal_value(&self, marginals: &[crate::instance::Marginal<S>]) -> Option<S> {
        let mut total = S::zero();
        for (pots, marginal) in self.potentials.iter().zip(marginals) {
            for (pot, w) in pots.iter().zip(&marginal.weights) {
                if w.is_zero() {
                    continue;
                }
                total = total + pot.finite()?.clone() * w.clone();
            }
        }
        Some(total)
    }

    pub fn to_mode<T: Scalar>(&self) -> SplittingTuple<T> {
        SplittingTuple {
            potentials: self
                .potentials
                .iter()
                .map(|pots| {
                    pots.iter()
                        .map(|p| match p {
                            Potential::NegInf => Potential::NegInf,
                            Potential::Finite(v) => Potential::Finite(match v.to_rational() {
                                Some(r) => T::from_rational(&r),
                                None => T::from_int(0),
                            }),
                        })
                        .collect()
                })
                .collect(),
            domain: self.domain,
        }
    }
}
