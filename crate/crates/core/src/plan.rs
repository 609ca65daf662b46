//! Transport plans, finitely supported measures on the product grid, and
//! their marginal projections.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::instance::{CostError, Instance};
use crate::scalar::{cmp, Scalar};

/// A finitely supported nonnegative measure on index tuples. No marginal or
/// total-mass constraints; [`TransportPlan`] layers those on top.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure<S> {
    masses: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> Measure<S> {
    pub fn empty() -> Self {
        Measure {
            masses: BTreeMap::new(),
        }
    }

    /// Build from (point, mass) pairs, accumulating duplicates and dropping
    /// dust within the support threshold of zero. Strictly negative masses
    /// are kept so that validation can report them.
    pub fn from_entries(entries: impl IntoIterator<Item = (Vec<usize>, S)>) -> Self {
        let mut masses: BTreeMap<Vec<usize>, S> = BTreeMap::new();
        for (point, mass) in entries {
            match masses.get_mut(&point) {
                Some(m) => *m = m.clone() + mass,
                None => {
                    masses.insert(point, mass);
                }
            }
        }
        let tol = S::support_tol();
        masses.retain(|_, m| {
            cmp(m, &tol) == std::cmp::Ordering::Greater
                || cmp(m, &(-tol.clone())) == std::cmp::Ordering::Less
        });
        Measure { masses }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &S)> {
        self.masses.iter()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn get(&self, point: &[usize]) -> Option<&S> {
        self.masses.get(point)
    }

    pub fn total_mass(&self) -> S {
        self.masses
            .values()
            .fold(S::zero(), |acc, m| acc + m.clone())
    }

    /// Axis-`k` marginal accumulated into a dense weight vector.
    pub fn marginal_weights(&self, axis: usize, size: usize) -> Vec<S> {
        let mut weights = vec![S::zero(); size];
        for (point, mass) in &self.masses {
            weights[point[axis]] = weights[point[axis]].clone() + mass.clone();
        }
        weights
    }

    pub fn support(&self) -> SupportSet {
        SupportSet {
            points: self.masses.keys().cloned().collect(),
        }
    }

    /// Integral of the instance cost against this measure.
    pub fn cost_integral(&self, instance: &Instance<S>) -> Result<S, CostError> {
        let mut total = S::zero();
        for (point, mass) in &self.masses {
            total = total + mass.clone() * instance.cost_at(point)?;
        }
        Ok(total)
    }

    pub fn scale(&self, factor: &S) -> Measure<S> {
        Measure {
            masses: self
                .masses
                .iter()
                .map(|(p, m)| (p.clone(), m.clone() * factor.clone()))
                .collect(),
        }
    }
}

/// Sparse probability measure on the product grid with prescribed marginals.
/// Entries with zero mass are absent by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan<S> {
    measure: Measure<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanIssue {
    WrongArity { point: Vec<usize>, expected: usize },
    IndexOutOfRange { point: Vec<usize>, axis: usize },
    NonPositiveMass { point: Vec<usize> },
    TotalMassNotOne { total: String },
    MarginalMismatch { axis: usize, point: usize, got: String, expected: String },
    NonFiniteMass { point: Vec<usize> },
}

impl fmt::Display for PlanIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanIssue::WrongArity { point, expected } => {
                write!(f, "entry {point:?} does not have {expected} indices")
            }
            PlanIssue::IndexOutOfRange { point, axis } => {
                write!(f, "entry {point:?} out of range on axis {axis}")
            }
            PlanIssue::NonPositiveMass { point } => {
                write!(f, "entry {point:?} has non-positive mass")
            }
            PlanIssue::TotalMassNotOne { total } => {
                write!(f, "total mass is {total}, expected 1")
            }
            PlanIssue::MarginalMismatch { axis, point, got, expected } => {
                write!(
                    f,
                    "axis-{axis} marginal at point {point} is {got}, instance prescribes {expected}"
                )
            }
            PlanIssue::NonFiniteMass { point } => {
                write!(f, "entry {point:?} has non-finite mass")
            }
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("invalid transport plan: {}", format_issues(.0))]
    InvalidPlan(Vec<PlanIssue>),
    #[error(transparent)]
    Cost(#[from] CostError),
}

fn format_issues(issues: &[PlanIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl<S: Scalar> TransportPlan<S> {
    /// Build a plan from raw entries. Dust below the support threshold is
    /// dropped; marginal invariants are checked by [`TransportPlan::validate`].
    pub fn from_entries(entries: impl IntoIterator<Item = (Vec<usize>, S)>) -> Self {
        TransportPlan {
            measure: Measure::from_entries(entries),
        }
    }

    pub fn as_measure(&self) -> &Measure<S> {
        &self.measure
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &S)> {
        self.measure.iter()
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn get(&self, point: &[usize]) -> Option<&S> {
        self.measure.get(point)
    }

    pub fn total_mass(&self) -> S {
        self.measure.total_mass()
    }

    /// All invariant violations of this plan against an instance.
    pub fn validate(&self, instance: &Instance<S>) -> Vec<PlanIssue> {
        let mut issues = Vec::new();
        let d = instance.dimension();
        let sizes = instance.sizes();
        for (point, mass) in self.measure.iter() {
            if point.len() != d {
                issues.push(PlanIssue::WrongArity {
                    point: point.clone(),
                    expected: d,
                });
                continue;
            }
            for (axis, &idx) in point.iter().enumerate() {
                if idx >= sizes[axis] {
                    issues.push(PlanIssue::IndexOutOfRange {
                        point: point.clone(),
                        axis,
                    });
                }
            }
            if !mass.is_finite_value() {
                issues.push(PlanIssue::NonFiniteMass {
                    point: point.clone(),
                });
            } else if cmp(mass, &S::zero()) != std::cmp::Ordering::Greater {
                issues.push(PlanIssue::NonPositiveMass {
                    point: point.clone(),
                });
            }
        }
        if !issues.is_empty() {
            return issues;
        }
        let total = self.total_mass();
        if !total.approx_eq(&S::one(), &S::sum_tol()) {
            issues.push(PlanIssue::TotalMassNotOne {
                total: total.to_string(),
            });
        }
        for (axis, marginal) in instance.marginals.iter().enumerate() {
            let got = self.measure.marginal_weights(axis, sizes[axis]);
            for (point, (g, e)) in got.iter().zip(&marginal.weights).enumerate() {
                if !g.approx_eq(e, &S::eq_tol()) {
                    issues.push(PlanIssue::MarginalMismatch {
                        axis,
                        point,
                        got: g.to_string(),
                        expected: e.to_string(),
                    });
                }
            }
        }
        issues
    }
}

/// The set of index tuples carrying positive mass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    pub points: BTreeSet<Vec<usize>>,
}

impl SupportSet {
    pub fn from_points(points: impl IntoIterator<Item = Vec<usize>>) -> Self {
        SupportSet {
            points: points.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, point: &[usize]) -> bool {
        self.points.contains(point)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.points.iter()
    }

    /// Lexicographically smallest point, the canonical base-point choice.
    pub fn lex_min(&self) -> Option<&Vec<usize>> {
        self.points.iter().next()
    }

    /// Per-axis projections, as sorted index lists.
    pub fn projections(&self, dimension: usize) -> Vec<Vec<usize>> {
        let mut proj = vec![BTreeSet::new(); dimension];
        for point in &self.points {
            for (axis, &idx) in point.iter().enumerate() {
                proj[axis].insert(idx);
            }
        }
        proj.into_iter().map(|s| s.into_iter().collect()).collect()
    }
}

/// Total cost of a plan: the cost integral against the plan's measure.
/// Rejects plans that violate the marginal invariants.
pub fn plan_cost<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
) -> Result<S, PlanError> {
    let issues = plan.validate(instance);
    if !issues.is_empty() {
        return Err(PlanError::InvalidPlan(issues));
    }
    Ok(plan.as_measure().cost_integral(instance)?)
}

/// Axis marginals of a plan. No validation; callers check separately.
pub fn marginals_of<S: Scalar>(
    plan: &TransportPlan<S>,
    instance: &Instance<S>,
) -> Vec<crate::instance::Marginal<S>> {
    instance
        .sizes()
        .iter()
        .enumerate()
        .map(|(axis, &size)| crate::instance::Marginal {
            space_id: axis,
            weights: plan.as_measure().marginal_weights(axis, size),
        })
        .collect()
}

/// Support of a plan: exactly the tuples with positive mass.
pub fn support_of<S: Scalar>(plan: &TransportPlan<S>) -> SupportSet {
    plan.as_measure().support()
}
