//! Problem instances: finite marked spaces, marginal distributions, and the
//! cost specification over the product grid.

use std::fmt;

use thiserror::Error;

use crate::scalar::{cmp, max_of, ArithmeticMode, Rational, Scalar};

/// A labelled point of a factor space, optionally carrying coordinates for
/// the builtin cost families.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    pub label: String,
    pub coord: Option<Vec<S>>,
}

impl<S> Point<S> {
    pub fn bare(label: impl Into<String>) -> Self {
        Point {
            label: label.into(),
            coord: None,
        }
    }

    pub fn with_coord(label: impl Into<String>, coord: Vec<S>) -> Self {
        Point {
            label: label.into(),
            coord: Some(coord),
        }
    }
}

/// One finite factor space.
#[derive(Clone, Debug, PartialEq)]
pub struct Space<S> {
    pub points: Vec<Point<S>>,
}

impl<S> Space<S> {
    pub fn size(&self) -> usize {
        self.points.len()
    }
}

/// Prescribed distribution on one factor space.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal<S> {
    pub space_id: usize,
    pub weights: Vec<S>,
}

/// Builtin cost families over point coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinCost<S> {
    /// Sum of squared pairwise distances between the selected coordinates.
    PairwiseQuadratic,
    /// Sum over pairs of 1 / max(distance, floor); the floor keeps the cost
    /// finite when coordinates coincide.
    Coulomb { floor: S },
    /// Product of per-axis weighted coordinate sums, plus a constant offset
    /// that must make the cost nonnegative on the whole grid.
    Product { weights: Option<Vec<S>>, offset: S },
}

impl<S> BuiltinCost<S> {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinCost::PairwiseQuadratic => "pairwise_quadratic",
            BuiltinCost::Coulomb { .. } => "coulomb",
            BuiltinCost::Product { .. } => "product",
        }
    }
}

/// Dense cost tensor in lexicographic (row-major) cell order.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTensor<S> {
    pub shape: Vec<usize>,
    pub values: Vec<S>,
}

impl<S> CostTensor<S> {
    pub fn flat_index(&self, point: &[usize]) -> Option<usize> {
        if point.len() != self.shape.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&p, &n) in point.iter().zip(&self.shape) {
            if p >= n {
                return None;
            }
            idx = idx * n + p;
        }
        Some(idx)
    }
}

/// Cost specification: an explicit tensor or a builtin formula.
#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec<S> {
    Tensor(CostTensor<S>),
    Builtin(BuiltinCost<S>),
}

/// A complete problem instance: `d` finite spaces, `d` marginals, one cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S> {
    pub spaces: Vec<Space<S>>,
    pub marginals: Vec<Marginal<S>>,
    pub cost: CostSpec<S>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CostError {
    #[error("point index {index} out of range on axis {axis} (size {size})")]
    IndexOutOfRange {
        axis: usize,
        index: usize,
        size: usize,
    },
    #[error("point has {got} indices, instance has {expected} axes")]
    WrongArity { got: usize, expected: usize },
    #[error("builtin cost `{0}` needs coordinates on every point")]
    MissingCoordinates(&'static str),
    #[error("coulomb with multi-dimensional coordinates needs float arithmetic")]
    IrrationalDistance,
}

/// One problem found by [`validate_instance`].
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue {
    NoSpaces,
    EmptySpace { axis: usize },
    DuplicateLabel { axis: usize, label: String },
    MarginalCountMismatch { got: usize, expected: usize },
    MarginalLengthMismatch { axis: usize, got: usize, expected: usize },
    MarginalSpaceIdMismatch { position: usize, space_id: usize },
    NegativeWeight { axis: usize, point: usize },
    MarginalSumNotOne { axis: usize, sum: String },
    TensorShapeMismatch { got: Vec<usize>, expected: Vec<usize> },
    NegativeCost { cell: Vec<usize>, value: String },
    NonFiniteCost { cell: Vec<usize> },
    MissingCoordinate { axis: usize, point: usize },
    CoordinateDimMismatch { axis: usize, point: usize, got: usize, expected: usize },
    NonPositiveCoulombFloor,
    ProductWeightLengthMismatch { got: usize, expected: usize },
    IrrationalCoulomb,
    NonFiniteValue { what: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NoSpaces => write!(f, "instance has no spaces"),
            ValidationIssue::EmptySpace { axis } => {
                write!(f, "space {axis} has no points")
            }
            ValidationIssue::DuplicateLabel { axis, label } => {
                write!(f, "space {axis} repeats point label `{label}`")
            }
            ValidationIssue::MarginalCountMismatch { got, expected } => {
                write!(f, "{got} marginals for {expected} spaces")
            }
            ValidationIssue::MarginalLengthMismatch { axis, got, expected } => {
                write!(f, "marginal {axis} has {got} weights for {expected} points")
            }
            ValidationIssue::MarginalSpaceIdMismatch { position, space_id } => {
                write!(f, "marginal at position {position} claims space {space_id}")
            }
            ValidationIssue::NegativeWeight { axis, point } => {
                write!(f, "marginal {axis} has a negative weight at point {point}")
            }
            ValidationIssue::MarginalSumNotOne { axis, sum } => {
                write!(f, "marginal {axis} sums to {sum}")
            }
            ValidationIssue::TensorShapeMismatch { got, expected } => {
                write!(f, "cost tensor shape {got:?} does not match spaces {expected:?}")
            }
            ValidationIssue::NegativeCost { cell, value } => {
                write!(f, "cost must be >= 0, found {value} at {cell:?}")
            }
            ValidationIssue::NonFiniteCost { cell } => {
                write!(f, "cost at {cell:?} is not finite")
            }
            ValidationIssue::MissingCoordinate { axis, point } => {
                write!(f, "point {point} of space {axis} lacks coordinates required by the builtin cost")
            }
            ValidationIssue::CoordinateDimMismatch { axis, point, got, expected } => {
                write!(f, "point {point} of space {axis} has {got}-dimensional coordinates, expected {expected}")
            }
            ValidationIssue::NonPositiveCoulombFloor => {
                write!(f, "coulomb floor must be > 0")
            }
            ValidationIssue::ProductWeightLengthMismatch { got, expected } => {
                write!(f, "product cost has {got} weights for {expected}-dimensional coordinates")
            }
            ValidationIssue::IrrationalCoulomb => {
                write!(f, "coulomb with multi-dimensional coordinates needs float arithmetic")
            }
            ValidationIssue::NonFiniteValue { what } => {
                write!(f, "{what} is not finite")
            }
        }
    }
}

impl<S: Scalar> Instance<S> {
    pub fn dimension(&self) -> usize {
        self.spaces.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.spaces.iter().map(Space::size).collect()
    }

    /// Number of cells of the product grid; `None` on overflow.
    pub fn grid_size(&self) -> Option<usize> {
        self.spaces
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.size()))
    }

    /// Lexicographic iterator over all product-grid cells.
    pub fn grid(&self) -> GridIter {
        GridIter::new(self.sizes())
    }

    pub fn arithmetic(&self) -> ArithmeticMode {
        S::mode()
    }

    /// Cost of one grid cell.
    pub fn cost_at(&self, point: &[usize]) -> Result<S, CostError> {
        cost_eval(self, point)
    }

    /// Convert all numeric payloads to another backend via exact rationals.
    /// Lossless from float to rational; rounds on the way down.
    pub fn to_mode<T: Scalar>(&self) -> Instance<T> {
        let conv = |v: &S| -> T {
            match v.to_rational() {
                Some(r) => T::from_rational(&r),
                None => T::from_int(0),
            }
        };
        Instance {
            spaces: self
                .spaces
                .iter()
                .map(|sp| Space {
                    points: sp
                        .points
                        .iter()
                        .map(|p| Point {
                            label: p.label.clone(),
                            coord: p.coord.as_ref().map(|c| c.iter().map(conv).collect()),
                        })
                        .collect(),
                })
                .collect(),
            marginals: self
                .marginals
                .iter()
                .map(|m| Marginal {
                    space_id: m.space_id,
                    weights: m.weights.iter().map(conv).collect(),
                })
                .collect(),
            cost: match &self.cost {
                CostSpec::Tensor(t) => CostSpec::Tensor(CostTensor {
                    shape: t.shape.clone(),
                    values: t.values.iter().map(conv).collect(),
                }),
                CostSpec::Builtin(b) => CostSpec::Builtin(match b {
                    BuiltinCost::PairwiseQuadratic => BuiltinCost::PairwiseQuadratic,
                    BuiltinCost::Coulomb { floor } => BuiltinCost::Coulomb { floor: conv(floor) },
                    BuiltinCost::Product { weights, offset } => BuiltinCost::Product {
                        weights: weights.as_ref().map(|w| w.iter().map(conv).collect()),
                        offset: conv(offset),
                    },
                }),
            },
        }
    }

    pub fn validate(&self) -> Vec<ValidationIssue> {
        validate_instance(self)
    }
}

/// Lexicographic odometer over a product grid.
#[derive(Clone, Debug)]
pub struct GridIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl GridIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.contains(&0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        GridIter { sizes, next }
    }
}

/// Lexicographic product of explicit per-axis index sets.
pub fn index_product(sets: &[Vec<usize>]) -> impl Iterator<Item = Vec<usize>> + '_ {
    GridIter::new(sets.iter().map(Vec::len).collect()).map(move |pos| {
        pos.iter()
            .zip(sets)
            .map(|(&k, set)| set[k])
            .collect()
    })
}

impl Iterator for GridIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        let mut bump = current.clone();
        let mut axis = self.sizes.len();
        loop {
            if axis == 0 {
                self.next = None;
                break;
            }
            axis -= 1;
            bump[axis] += 1;
            if bump[axis] < self.sizes[axis] {
                self.next = Some(bump);
                break;
            }
            bump[axis] = 0;
        }
        Some(current)
    }
}

fn coord_of<'a, S: Scalar>(
    instance: &'a Instance<S>,
    axis: usize,
    index: usize,
    name: &'static str,
) -> Result<&'a [S], CostError> {
    instance.spaces[axis].points[index]
        .coord
        .as_deref()
        .ok_or(CostError::MissingCoordinates(name))
}

fn squared_distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| {
            let diff = x.clone() - y.clone();
            acc + diff.clone() * diff
        })
}

/// Evaluate the instance cost at one grid cell. Deterministic; tensor costs
/// are lookups, builtin costs are evaluated from point coordinates.
pub fn cost_eval<S: Scalar>(instance: &Instance<S>, point: &[usize]) -> Result<S, CostError> {
    let d = instance.dimension();
    if point.len() != d {
        return Err(CostError::WrongArity {
            got: point.len(),
            expected: d,
        });
    }
    for (axis, (&idx, space)) in point.iter().zip(&instance.spaces).enumerate() {
        if idx >= space.size() {
            return Err(CostError::IndexOutOfRange {
                axis,
                index: idx,
                size: space.size(),
            });
        }
    }
    match &instance.cost {
        CostSpec::Tensor(t) => {
            let flat = t.flat_index(point).ok_or(CostError::WrongArity {
                got: point.len(),
                expected: t.shape.len(),
            })?;
            Ok(t.values[flat].clone())
        }
        CostSpec::Builtin(b) => builtin_eval(instance, b, point),
    }
}

fn builtin_eval<S: Scalar>(
    instance: &Instance<S>,
    cost: &BuiltinCost<S>,
    point: &[usize],
) -> Result<S, CostError> {
    let d = instance.dimension();
    match cost {
        BuiltinCost::PairwiseQuadratic => {
            let mut total = S::zero();
            for i in 0..d {
                let ci = coord_of(instance, i, point[i], "pairwise_quadratic")?;
                for j in (i + 1)..d {
                    let cj = coord_of(instance, j, point[j], "pairwise_quadratic")?;
                    total = total + squared_distance(ci, cj);
                }
            }
            Ok(total)
        }
        BuiltinCost::Coulomb { floor } => {
            let mut total = S::zero();
            for i in 0..d {
                let ci = coord_of(instance, i, point[i], "coulomb")?;
                for j in (i + 1)..d {
                    let cj = coord_of(instance, j, point[j], "coulomb")?;
                    let dist = if ci.len() == 1 {
                        (ci[0].clone() - cj[0].clone()).abs()
                    } else if S::EXACT {
                        return Err(CostError::IrrationalDistance);
                    } else {
                        let sq = squared_distance(ci, cj);
                        S::from_rational(
                            &Rational::from_float(sq.to_f64().sqrt())
                                .unwrap_or_else(num_traits::Zero::zero),
                        )
                    };
                    let denom = max_of(dist, floor.clone());
                    total = total + S::one() / denom;
                }
            }
            Ok(total)
        }
        BuiltinCost::Product { weights, offset } => {
            let mut prod = S::one();
            for i in 0..d {
                let ci = coord_of(instance, i, point[i], "product")?;
                let mut dot = S::zero();
                for (k, c) in ci.iter().enumerate() {
                    let w = match weights {
                        Some(w) => w.get(k).cloned().unwrap_or_else(S::zero),
                        None => S::one(),
                    };
                    dot = dot + w * c.clone();
                }
                prod = prod * dot;
            }
            Ok(prod + offset.clone())
        }
    }
}

/// Check every structural invariant of an instance, reporting all
/// violations instead of stopping at the first.
pub fn validate_instance<S: Scalar>(instance: &Instance<S>) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let d = instance.dimension();
    if d == 0 {
        issues.push(ValidationIssue::NoSpaces);
        return issues;
    }

    for (axis, space) in instance.spaces.iter().enumerate() {
        if space.size() == 0 {
            issues.push(ValidationIssue::EmptySpace { axis });
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &space.points {
            if !seen.insert(p.label.as_str()) {
                issues.push(ValidationIssue::DuplicateLabel {
                    axis,
                    label: p.label.clone(),
                });
            }
            if let Some(coord) = &p.coord {
                for c in coord {
                    if !c.is_finite_value() {
                        issues.push(ValidationIssue::NonFiniteValue {
                            what: format!("coordinate of `{}` in space {axis}", p.label),
                        });
                    }
                }
            }
        }
    }

    if instance.marginals.len() != d {
        issues.push(ValidationIssue::MarginalCountMismatch {
            got: instance.marginals.len(),
            expected: d,
        });
    }
    for (position, marginal) in instance.marginals.iter().enumerate() {
        if marginal.space_id != position {
            issues.push(ValidationIssue::MarginalSpaceIdMismatch {
                position,
                space_id: marginal.space_id,
            });
        }
        let Some(space) = instance.spaces.get(position) else {
            continue;
        };
        if marginal.weights.len() != space.size() {
            issues.push(ValidationIssue::MarginalLengthMismatch {
                axis: position,
                got: marginal.weights.len(),
                expected: space.size(),
            });
            continue;
        }
        let mut sum = S::zero();
        for (point, w) in marginal.weights.iter().enumerate() {
            if !w.is_finite_value() {
                issues.push(ValidationIssue::NonFiniteValue {
                    what: format!("weight {point} of marginal {position}"),
                });
                continue;
            }
            if cmp(w, &S::zero()) == std::cmp::Ordering::Less {
                issues.push(ValidationIssue::NegativeWeight {
                    axis: position,
                    point,
                });
            }
            sum = sum + w.clone();
        }
        if !sum.approx_eq(&S::one(), &S::sum_tol()) {
            issues.push(ValidationIssue::MarginalSumNotOne {
                axis: position,
                sum: sum.to_string(),
            });
        }
    }

    validate_cost(instance, &mut issues);
    issues
}

fn validate_cost<S: Scalar>(instance: &Instance<S>, issues: &mut Vec<ValidationIssue>) {
    let sizes = instance.sizes();
    match &instance.cost {
        CostSpec::Tensor(t) => {
            if t.shape != sizes || t.values.len() != sizes.iter().product::<usize>() {
                issues.push(ValidationIssue::TensorShapeMismatch {
                    got: t.shape.clone(),
                    expected: sizes,
                });
                return;
            }
            for (flat, v) in t.values.iter().enumerate() {
                if !v.is_finite_value() {
                    issues.push(ValidationIssue::NonFiniteCost {
                        cell: unflatten(flat, &t.shape),
                    });
                } else if cmp(v, &S::zero()) == std::cmp::Ordering::Less {
                    issues.push(ValidationIssue::NegativeCost {
                        cell: unflatten(flat, &t.shape),
                        value: v.to_string(),
                    });
                }
            }
        }
        CostSpec::Builtin(b) => {
            let mut coord_dim = None;
            for (axis, space) in instance.spaces.iter().enumerate() {
                for (point, p) in space.points.iter().enumerate() {
                    match &p.coord {
                        None => issues.push(ValidationIssue::MissingCoordinate { axis, point }),
                        Some(c) => match coord_dim {
                            None => coord_dim = Some(c.len()),
                            Some(dim) if c.len() != dim => {
                                issues.push(ValidationIssue::CoordinateDimMismatch {
                                    axis,
                                    point,
                                    got: c.len(),
                                    expected: dim,
                                });
                            }
                            _ => {}
                        },
                    }
                }
            }
            match b {
                BuiltinCost::Coulomb { floor } => {
                    if cmp(floor, &S::zero()) != std::cmp::Ordering::Greater {
                        issues.push(ValidationIssue::NonPositiveCoulombFloor);
                    }
                    if S::EXACT && coord_dim.is_some_and(|dim| dim > 1) {
                        issues.push(ValidationIssue::IrrationalCoulomb);
                    }
                }
                BuiltinCost::Product { weights, offset: _ } => {
                    if let (Some(w), Some(dim)) = (weights, coord_dim) {
                        if w.len() != dim {
                            issues.push(ValidationIssue::ProductWeightLengthMismatch {
                                got: w.len(),
                                expected: dim,
                            });
                        }
                    }
                }
                BuiltinCost::PairwiseQuadratic => {}
            }
            // Builtin non-negativity: quadratic and coulomb are nonnegative by
            // construction; product needs a grid sweep.
            if matches!(b, BuiltinCost::Product { .. })
                && issues.is_empty()
                && instance.grid_size().is_some()
            {
                for cell in instance.grid() {
                    if let Ok(v) = cost_eval(instance, &cell) {
                        if cmp(&v, &S::zero()) == std::cmp::Ordering::Less {
                            issues.push(ValidationIssue::NegativeCost {
                                cell,
                                value: v.to_string(),
                            });
                        }
                    }
                }
            }
        }
    }
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut cell = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        cell[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    cell
}
