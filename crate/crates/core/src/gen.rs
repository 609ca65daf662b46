//! Seeded instance generation and plan perturbation, used by the CLI and
//! the test harnesses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{BuiltinCost, CostSpec, CostTensor, Instance, Marginal, Point, Space};
use crate::plan::TransportPlan;
use crate::scalar::{cmp, Rational, Scalar};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GenError {
    #[error("unknown cost `{0}`")]
    UnknownCost(String),
    #[error("need at least 2 spaces, got {0}")]
    TooFewSpaces(usize),
    #[error("space sizes must be at least 1")]
    EmptySize,
}

/// Cost families [`gen_instance`] can produce.
pub const GEN_COSTS: &[&str] = &["random", "pairwise_quadratic", "coulomb", "product"];

/// Deterministically generate an instance: marginals are random rational
/// simplex points, coordinates are equispaced on `[0, 1]`, and the
/// `"random"` cost is a tensor of rationals with denominators at most 16.
pub fn gen_instance(sizes: &[usize], cost_name: &str, seed: u64) -> Result<Instance<Rational>, GenError> {
    if sizes.len() < 2 {
        return Err(GenError::TooFewSpaces(sizes.len()));
    }
    if sizes.contains(&0) {
        return Err(GenError::EmptySize);
    }
    if !GEN_COSTS.contains(&cost_name) {
        return Err(GenError::UnknownCost(cost_name.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let spaces: Vec<Space<Rational>> = sizes
        .iter()
        .map(|&n| Space {
            points: (0..n)
                .map(|j| {
                    let coord = if n == 1 {
                        Rational::from_int(0)
                    } else {
                        Rational::from_ratio(j as i64, (n - 1) as i64)
                    };
                    Point::with_coord(j.to_string(), vec![coord])
                })
                .collect(),
        })
        .collect();

    let marginals: Vec<Marginal<Rational>> = sizes
        .iter()
        .enumerate()
        .map(|(space_id, &n)| {
            let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=16)).collect();
            let total: i64 = raw.iter().sum();
            Marginal {
                space_id,
                weights: raw
                    .into_iter()
                    .map(|a| Rational::from_ratio(a, total))
                    .collect(),
            }
        })
        .collect();

    let cost = match cost_name {
        "random" => {
            let cells: usize = sizes.iter().product();
            let values = (0..cells)
                .map(|_| {
                    let denom = rng.gen_range(1..=16i64);
                    let numer = rng.gen_range(0..=3 * denom);
                    Rational::from_ratio(numer, denom)
                })
                .collect();
            CostSpec::Tensor(CostTensor {
                shape: sizes.to_vec(),
                values,
            })
        }
        "pairwise_quadratic" => CostSpec::Builtin(BuiltinCost::PairwiseQuadratic),
        "coulomb" => CostSpec::Builtin(BuiltinCost::Coulomb {
            floor: Rational::from_ratio(1, 1_000_000),
        }),
        "product" => CostSpec::Builtin(BuiltinCost::Product {
            weights: None,
            offset: Rational::from_int(0),
        }),
        _ => unreachable!("checked against GEN_COSTS"),
    };

    Ok(Instance {
        spaces,
        marginals,
        cost,
    })
}

/// Swap the partners of the two support atoms for which the exchange
/// increases cost the most: mass moves from `x, y` to `(x_1, y_2..y_d)` and
/// `(y_1, x_2..x_d)`. The result keeps all marginals and is strictly more
/// expensive, hence refutable. `None` when no strictly worsening swap
/// exists.
pub fn perturb_swap<S: Scalar>(
    plan: &TransportPlan<S>,
    instance: &Instance<S>,
) -> Option<TransportPlan<S>> {
    let atoms: Vec<(Vec<usize>, S)> = plan
        .iter()
        .map(|(p, m)| (p.clone(), m.clone()))
        .collect();
    let mut best: Option<(usize, usize, S)> = None;
    for i in 0..atoms.len() {
        for j in (i + 1)..atoms.len() {
            let (x, y) = (&atoms[i].0, &atoms[j].0);
            if x[1..] == y[1..] {
                continue;
            }
            let mut x_new = y.clone();
            x_new[0] = x[0];
            let mut y_new = x.clone();
            y_new[0] = y[0];
            let delta = instance.cost_at(&x_new).ok()?.clone()
                + instance.cost_at(&y_new).ok()?
                - instance.cost_at(x).ok()?
                - instance.cost_at(y).ok()?;
            if cmp(&delta, &S::eq_tol()) == std::cmp::Ordering::Greater
                && best
                    .as_ref()
                    .is_none_or(|(_, _, b)| cmp(&delta, b) == std::cmp::Ordering::Greater)
            {
                best = Some((i, j, delta));
            }
        }
    }
    let (i, j, _) = best?;
    let (x, y) = (atoms[i].0.clone(), atoms[j].0.clone());
    let moved = crate::scalar::min_of(atoms[i].1.clone(), atoms[j].1.clone());
    let mut x_new = y.clone();
    x_new[0] = x[0];
    let mut y_new = x.clone();
    y_new[0] = y[0];

    let mut entries: Vec<(Vec<usize>, S)> = Vec::with_capacity(atoms.len() + 2);
    for (k, (p, m)) in atoms.iter().enumerate() {
        let m = if k == i || k == j {
            m.clone() - moved.clone()
        } else {
            m.clone()
        };
        if cmp(&m, &S::support_tol()) == std::cmp::Ordering::Greater {
            entries.push((p.clone(), m));
        }
    }
    entries.push((x_new, moved.clone()));
    entries.push((y_new, moved));
    Some(TransportPlan::from_entries(entries))
}
