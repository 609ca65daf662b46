//! Deciding cyclical monotonicity of a finite support set.
//!
//! The exact route poses the potential system {sum <= cost on the projection
//! product, equality on the set} as an LP feasibility problem: feasibility
//! yields certifying potentials, infeasibility yields Farkas multipliers
//! that convert into a pair of measures with equal marginals and strictly
//! improving cost, and from there into an explicit rearrangement witness.
//! The brute-force route searches short rearrangements directly; it can only
//! refute, never certify.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::instance::{index_product, CostError, Instance};
use crate::limits::Limits;
use crate::lp::{check_feasibility, Constraint, FarkasCertificate, Feasibility, LpError, Relation, VarBound};
use crate::plan::{Measure, SupportSet};
use crate::scalar::{cmp, Rational, Scalar};
use crate::tuple::{Potential, SplittingTuple, TupleDomain};
use crate::witness::RearrangementWitness;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMethod {
    Exact,
    BruteForce { n_max: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonotonicityResult<S> {
    /// Certifying potentials on the projection product.
    Monotone(SplittingTuple<S>),
    /// Explicit strictly improving rearrangement.
    Violated(RearrangementWitness<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityVerdict<S> {
    pub result: MonotonicityResult<S>,
    pub method: CheckMethod,
}

impl<S> MonotonicityVerdict<S> {
    pub fn is_monotone(&self) -> bool {
        matches!(self.result, MonotonicityResult::Monotone(_))
    }
}

/// Outcome of the truncated brute-force search: refutation or nothing.
#[derive(Clone, Debug, PartialEq)]
pub enum BruteForceOutcome<S> {
    Violated(RearrangementWitness<S>),
    Inconclusive,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MonotoneError {
    #[error("support set is empty")]
    EmptySupport,
    #[error("support point {point:?} does not fit the instance")]
    BadSupportPoint { point: Vec<usize> },
    #[error("projection product has {size} cells, exceeding the cap of {cap}")]
    GridTooLarge { size: usize, cap: usize },
    #[error("n_max must be at least 2, got {0}")]
    InvalidNMax(usize),
    #[error("brute-force budget of {0} cost evaluations exceeded")]
    BudgetExceeded(u64),
    #[error("certificate does not refute the potential system: {0}")]
    CertificateInvalid(String),
    #[error("measures do not share their marginals")]
    MarginalMismatch,
    #[error("measure masses are not finite rationals")]
    NonRationalInput,
    #[error("rearranged measure does not strictly improve the cost")]
    NotImproving,
    #[error("witness expansion needs {needed} points, exceeding the cap of {cap}")]
    WitnessTooLarge { needed: String, cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Row/variable layout of the potential feasibility system of one support
/// set, kept deterministic so Farkas multipliers can be interpreted later.
#[derive(Clone, Debug)]
pub struct SplittingSystem<S> {
    /// One free variable per (axis, point-in-projection).
    pub vars: Vec<(usize, usize)>,
    /// Cells of the projection product, lexicographic; one `<=` row each.
    pub ineq_cells: Vec<Vec<usize>>,
    /// Support points, lexicographic; one `=` row each, after the `<=` rows.
    pub eq_cells: Vec<Vec<usize>>,
    pub constraints: Vec<Constraint<S>>,
    pub bounds: Vec<VarBound>,
}

pub(crate) fn validate_gamma<S: Scalar>(
    gamma: &SupportSet,
    instance: &Instance<S>,
) -> Result<(), MonotoneError> {
    if gamma.is_empty() {
        return Err(MonotoneError::EmptySupport);
    }
    let sizes = instance.sizes();
    for point in gamma.iter() {
        if point.len() != sizes.len()
            || point.iter().zip(&sizes).any(|(&idx, &size)| idx >= size)
        {
            return Err(MonotoneError::BadSupportPoint {
                point: point.clone(),
            });
        }
    }
    Ok(())
}

/// Pose the potential system of a support set: one free variable per
/// projection point, `<=` rows over the projection product, `=` rows over
/// the set itself, in a fixed deterministic order.
pub fn splitting_system<S: Scalar>(
    gamma: &SupportSet,
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<SplittingSystem<S>, MonotoneError> {
    validate_gamma(gamma, instance)?;
    let d = instance.dimension();
    let projections = gamma.projections(d);
    let prod_size = projections
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
        .unwrap_or(usize::MAX);
    if prod_size > limits.grid_cap {
        return Err(MonotoneError::GridTooLarge {
            size: prod_size,
            cap: limits.grid_cap,
        });
    }

    let mut vars = Vec::new();
    let mut var_index = BTreeMap::new();
    for (axis, proj) in projections.iter().enumerate() {
        for &point in proj {
            var_index.insert((axis, point), vars.len());
            vars.push((axis, point));
        }
    }

    let row_coeffs = |cell: &[usize]| {
        let mut coeffs = vec![S::zero(); vars.len()];
        for (axis, &point) in cell.iter().enumerate() {
            coeffs[var_index[&(axis, point)]] = S::one();
        }
        coeffs
    };

    let mut constraints = Vec::new();
    let ineq_cells: Vec<Vec<usize>> = index_product(&projections).collect();
    for cell in &ineq_cells {
        constraints.push(Constraint::new(
            row_coeffs(cell),
            Relation::Le,
            instance.cost_at(cell)?,
        ));
    }
    let eq_cells: Vec<Vec<usize>> = gamma.iter().cloned().collect();
    for cell in &eq_cells {
        constraints.push(Constraint::new(
            row_coeffs(cell),
            Relation::Eq,
            instance.cost_at(cell)?,
        ));
    }

    let bounds = vec![VarBound::Free; vars.len()];
    Ok(SplittingSystem {
        vars,
        ineq_cells,
        eq_cells,
        constraints,
        bounds,
    })
}

fn tuple_from_point<S: Scalar>(
    system: &SplittingSystem<S>,
    instance: &Instance<S>,
    point: &[S],
) -> SplittingTuple<S> {
    let sizes = instance.sizes();
    let mut potentials: Vec<Vec<Potential<S>>> = sizes
        .iter()
        .map(|&n| vec![Potential::NegInf; n])
        .collect();
    for ((axis, pt), value) in system.vars.iter().zip(point) {
        potentials[*axis][*pt] = Potential::Finite(value.clone());
    }
    SplittingTuple {
        potentials,
        domain: TupleDomain::OnProjections,
    }
}

/// Decide monotonicity of a finite support set by LP feasibility of its
/// potential system, restricted to the product of the set's projections.
pub fn check_monotone_exact<S: Scalar>(
    gamma: &SupportSet,
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<MonotonicityVerdict<S>, MonotoneError> {
    let system = splitting_system(gamma, instance, limits)?;
    match check_feasibility(&system.constraints, &system.bounds, limits)? {
        Feasibility::Feasible(point) => Ok(MonotonicityVerdict {
            result: MonotonicityResult::Monotone(tuple_from_point(&system, instance, &point)),
            method: CheckMethod::Exact,
        }),
        Feasibility::Infeasible(certificate) => {
            if S::EXACT {
                let (alpha, alpha_prime) =
                    improving_pair_from_certificate(&certificate, gamma, instance, limits)?;
                let witness = extract_witness(&alpha, &alpha_prime, instance, limits)?;
                Ok(MonotonicityVerdict {
                    result: MonotonicityResult::Violated(witness),
                    method: CheckMethod::Exact,
                })
            } else {
                // Witness expansion needs exact integer multiplicities, so
                // rebuild the refutation in rational arithmetic (floats
                // convert exactly) and map the outcome back.
                let exact_instance = instance.to_mode::<Rational>();
                let verdict = check_monotone_exact::<Rational>(gamma, &exact_instance, limits)?;
                Ok(MonotonicityVerdict {
                    result: match verdict.result {
                        MonotonicityResult::Monotone(tuple) => {
                            MonotonicityResult::Monotone(tuple.to_mode::<S>())
                        }
                        MonotonicityResult::Violated(witness) => {
                            MonotonicityResult::Violated(witness.to_mode::<S>())
                        }
                    },
                    method: CheckMethod::Exact,
                })
            }
        }
    }
}

/// Search rearrangements of up to `n_max` support points (with repetition)
/// for a strict improvement. Finds short witnesses quickly but cannot
/// certify monotonicity.
pub fn check_monotone_bruteforce<S: Scalar>(
    gamma: &SupportSet,
    instance: &Instance<S>,
    n_max: usize,
    limits: &Limits,
) -> Result<BruteForceOutcome<S>, MonotoneError> {
    if n_max < 2 {
        return Err(MonotoneError::InvalidNMax(n_max));
    }
    validate_gamma(gamma, instance)?;
    let points: Vec<Vec<usize>> = gamma.iter().cloned().collect();
    let d = instance.dimension();
    let margin = S::eq_tol();
    let mut budget = limits.brute_force_cap;

    for n in 2..=n_max {
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        for selection in (0..points.len()).combinations_with_replacement(n) {
            let chosen: Vec<&Vec<usize>> = selection.iter().map(|&k| &points[k]).collect();
            let mut cost_before = S::zero();
            for p in &chosen {
                cost_before = cost_before + instance.cost_at(p)?;
            }
            for perm_tuple in std::iter::repeat_n(perms.iter(), d - 1).multi_cartesian_product()
            {
                if perm_tuple.iter().all(|sigma| is_identity(sigma)) {
                    continue;
                }
                if budget == 0 {
                    return Err(MonotoneError::BudgetExceeded(limits.brute_force_cap));
                }
                budget -= 1;
                let mut cost_after = S::zero();
                for i in 0..n {
                    let mut cell = Vec::with_capacity(d);
                    cell.push(chosen[i][0]);
                    for (axis, sigma) in perm_tuple.iter().enumerate() {
                        cell.push(chosen[sigma[i]][axis + 1]);
                    }
                    cost_after = cost_after + instance.cost_at(&cell)?;
                }
                if cmp(&(cost_before.clone() - margin.clone()), &cost_after)
                    == std::cmp::Ordering::Greater
                {
                    return Ok(BruteForceOutcome::Violated(RearrangementWitness {
                        points: chosen.into_iter().cloned().collect(),
                        permutations: perm_tuple.into_iter().cloned().collect(),
                        cost_before,
                        cost_after,
                    }));
                }
            }
        }
    }
    Ok(BruteForceOutcome::Inconclusive)
}

fn is_identity(sigma: &[usize]) -> bool {
    sigma.iter().enumerate().all(|(i, &s)| i == s)
}

/// Turn a Farkas certificate of the potential system into a pair of
/// measures `(alpha, alpha')`: `alpha` lives on the support set, `alpha'`
/// on the projection product, both share their marginals, and `alpha'` is
/// strictly cheaper. Both are normalized to total mass one.
pub fn improving_pair_from_certificate<S: Scalar>(
    certificate: &FarkasCertificate<S>,
    gamma: &SupportSet,
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<(Measure<S>, Measure<S>), MonotoneError> {
    let system = splitting_system(gamma, instance, limits)?;
    certificate
        .verify(&system.constraints, &system.bounds)
        .map_err(|e| MonotoneError::CertificateInvalid(e.to_string()))?;
    let n_ineq = system.ineq_cells.len();
    if certificate.row_multipliers.len() != system.constraints.len() {
        return Err(MonotoneError::CertificateInvalid(format!(
            "{} multipliers for {} rows",
            certificate.row_multipliers.len(),
            system.constraints.len()
        )));
    }

    let ineq_row_of: BTreeMap<&Vec<usize>, usize> = system
        .ineq_cells
        .iter()
        .enumerate()
        .map(|(row, cell)| (cell, row))
        .collect();

    // Equality multipliers: positive parts form alpha, negative parts fold
    // into the matching inequality row (same coefficient vector), keeping
    // the aggregated combination unchanged.
    let mut ineq_mult: Vec<S> = certificate.row_multipliers[..n_ineq].to_vec();
    let mut alpha_entries = Vec::new();
    for (k, cell) in system.eq_cells.iter().enumerate() {
        let y = certificate.row_multipliers[n_ineq + k].clone();
        match cmp(&y, &S::zero()) {
            std::cmp::Ordering::Greater => alpha_entries.push((cell.clone(), y)),
            std::cmp::Ordering::Less => {
                let row = ineq_row_of[cell];
                ineq_mult[row] = ineq_mult[row].clone() + y;
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    let mut alpha_prime_entries = Vec::new();
    for (row, cell) in system.ineq_cells.iter().enumerate() {
        let u = ineq_mult[row].clone();
        if cmp(&u, &S::zero()) == std::cmp::Ordering::Less {
            alpha_prime_entries.push((cell.clone(), -u));
        }
    }

    let alpha = Measure::from_entries(alpha_entries);
    let alpha_prime = Measure::from_entries(alpha_prime_entries);
    let mass = alpha.total_mass();
    if !(cmp(&mass, &S::zero()) == std::cmp::Ordering::Greater) {
        return Err(MonotoneError::CertificateInvalid(
            "equality multipliers carry no positive mass".into(),
        ));
    }
    // One common scale keeps the marginal identities exact.
    let inv = S::one() / mass;
    let alpha = alpha.scale(&inv);
    let alpha_prime = alpha_prime.scale(&inv);

    let sizes = instance.sizes();
    for (axis, &size) in sizes.iter().enumerate() {
        let a = alpha.marginal_weights(axis, size);
        let b = alpha_prime.marginal_weights(axis, size);
        for (x, y) in a.iter().zip(&b) {
            if !x.approx_eq(y, &S::eq_tol()) {
                return Err(MonotoneError::MarginalMismatch);
            }
        }
    }
    let cost_alpha = alpha.cost_integral(instance)?;
    let cost_prime = alpha_prime.cost_integral(instance)?;
    if cmp(&(cost_alpha - S::eq_tol()), &cost_prime) != std::cmp::Ordering::Greater {
        return Err(MonotoneError::CertificateInvalid(
            "rearranged measure is not strictly cheaper".into(),
        ));
    }
    Ok((alpha, alpha_prime))
}

/// Expand an improving pair of rational measures into an explicit witness:
/// clear denominators with the least common multiple `tau`, list the
/// `tau`-fold expansion of `alpha`, and match per-axis coordinate multisets
/// to build the permutations. The resulting sums reproduce `tau` times the
/// two integrals exactly.
pub fn extract_witness<S: Scalar>(
    alpha: &Measure<S>,
    alpha_prime: &Measure<S>,
    instance: &Instance<S>,
    limits: &Limits,
) -> Result<RearrangementWitness<S>, MonotoneError> {
    let to_rat = |m: &Measure<S>| -> Result<Vec<(Vec<usize>, Rational)>, MonotoneError> {
        m.iter()
            .map(|(p, v)| {
                v.to_rational()
                    .map(|r| (p.clone(), r))
                    .ok_or(MonotoneError::NonRationalInput)
            })
            .collect()
    };
    let alpha_rat = to_rat(alpha)?;
    let prime_rat = to_rat(alpha_prime)?;

    let d = instance.dimension();
    let sizes = instance.sizes();
    // Exact marginal equality of the rationalized measures.
    for axis in 0..d {
        let mut wa = vec![Rational::zero(); sizes[axis]];
        let mut wb = vec![Rational::zero(); sizes[axis]];
        for (p, v) in &alpha_rat {
            wa[p[axis]] += v.clone();
        }
        for (p, v) in &prime_rat {
            wb[p[axis]] += v.clone();
        }
        if wa != wb {
            return Err(MonotoneError::MarginalMismatch);
        }
    }

    let mut tau = BigInt::from(1);
    for (_, v) in alpha_rat.iter().chain(prime_rat.iter()) {
        tau = tau.lcm(v.denom());
    }

    let expansion_size = |entries: &[(Vec<usize>, Rational)]| -> BigInt {
        entries
            .iter()
            .map(|(_, v)| (v * Rational::from_integer(tau.clone())).to_integer())
            .fold(BigInt::zero(), |acc, m| acc + m)
    };
    let n_big = expansion_size(&alpha_rat);
    debug_assert_eq!(n_big, expansion_size(&prime_rat));
    if n_big > BigInt::from(limits.witness_cap) {
        return Err(MonotoneError::WitnessTooLarge {
            needed: n_big.to_string(),
            cap: limits.witness_cap,
        });
    }
    let n = n_big.to_usize().expect("checked against cap");
    if n == 0 {
        return Err(MonotoneError::NotImproving);
    }

    let expand = |entries: &[(Vec<usize>, Rational)]| -> Vec<Vec<usize>> {
        // Entries arrive lexicographically sorted from the measure map.
        let mut list = Vec::with_capacity(n);
        for (p, v) in entries {
            let mult = (v * Rational::from_integer(tau.clone()))
                .to_integer()
                .to_usize()
                .expect("multiplicity within expansion size");
            for _ in 0..mult {
                list.push(p.clone());
            }
        }
        list
    };
    let listed = expand(&alpha_rat);
    let target = expand(&prime_rat);

    // Lexicographically sorted expansions of measures with equal first-axis
    // marginals agree slot-by-slot on the first coordinate.
    debug_assert!(listed
        .iter()
        .zip(&target)
        .all(|(x, y)| x[0] == y[0]));

    // Per axis j >= 2: assign to target slot i the first unused listed slot
    // whose j-th coordinate matches (stable order by point index).
    let mut permutations = Vec::with_capacity(d - 1);
    for axis in 1..d {
        let mut slots_by_value: BTreeMap<usize, std::collections::VecDeque<usize>> =
            BTreeMap::new();
        for (slot, p) in listed.iter().enumerate() {
            slots_by_value.entry(p[axis]).or_default().push_back(slot);
        }
        let mut sigma = Vec::with_capacity(n);
        for y in &target {
            let slot = slots_by_value
                .get_mut(&y[axis])
                .and_then(|q| q.pop_front())
                .ok_or(MonotoneError::MarginalMismatch)?;
            sigma.push(slot);
        }
        permutations.push(sigma);
    }

    let mut cost_before = S::zero();
    for p in &listed {
        cost_before = cost_before + instance.cost_at(p)?;
    }
    let mut cost_after = S::zero();
    for y in &target {
        cost_after = cost_after + instance.cost_at(y)?;
    }
    if cmp(&(cost_before.clone() - S::eq_tol()), &cost_after) != std::cmp::Ordering::Greater {
        return Err(MonotoneError::NotImproving);
    }

    Ok(RearrangementWitness {
        points: listed,
        permutations,
        cost_before,
        cost_after,
    })
}
