//! JSON encoding of every file format the toolkit reads or writes.
//!
//! Numeric slots accept either a JSON number or a `"p/q"` string; rational
//! payloads are always emitted as `"p/q"` strings so files round-trip
//! losslessly, float payloads as plain numbers. Emission uses
//! `serde_json`'s sorted object keys, which doubles as the canonical form
//! for instance digests.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::certify::{Certificate, CertificateVerdict};
use crate::instance::{BuiltinCost, CostSpec, CostTensor, Instance, Marginal, Point, Space};
use crate::monotone::{BruteForceOutcome, CheckMethod, MonotonicityResult, MonotonicityVerdict};
use crate::plan::{SupportSet, TransportPlan};
use crate::scalar::{ArithmeticMode, Rational, Scalar};
use crate::solver::SolveResult;
use crate::tuple::{Potential, SplittingTuple, TupleDomain};
use crate::witness::RearrangementWitness;

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{0}")]
pub struct JsonError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError(msg.into()))
}

// ---- scalars ----------------------------------------------------------

pub fn scalar_to_value<S: Scalar>(v: &S) -> Value {
    match S::mode() {
        ArithmeticMode::Rational => {
            let r = v.to_rational().expect("rational scalar is always finite");
            Value::String(format!("{}/{}", r.numer(), r.denom()))
        }
        ArithmeticMode::Float => json!(v.to_f64()),
    }
}

pub fn scalar_from_value<S: Scalar>(v: &Value) -> Result<S, JsonError> {
    match v {
        Value::String(s) => {
            let r = parse_ratio(s)?;
            Ok(S::from_rational(&r))
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(S::from_int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(S::from_rational(&Rational::from_integer(BigInt::from(u))))
            } else if let Some(f) = n.as_f64() {
                match Rational::from_float(f) {
                    Some(r) => Ok(S::from_rational(&r)),
                    None => err(format!("non-finite number {f}")),
                }
            } else {
                err(format!("unsupported number {n}"))
            }
        }
        other => err(format!("expected number or \"p/q\" string, got {other}")),
    }
}

fn parse_ratio(s: &str) -> Result<Rational, JsonError> {
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n = BigInt::from_str(numer).map_err(|_| JsonError(format!("bad numerator in `{s}`")))?;
    let d = BigInt::from_str(denom).map_err(|_| JsonError(format!("bad denominator in `{s}`")))?;
    if d.is_zero() {
        return err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational::new(n, d))
}

fn potential_to_value<S: Scalar>(p: &Potential<S>) -> Value {
    match p {
        Potential::NegInf => Value::String("-inf".into()),
        Potential::Finite(v) => scalar_to_value(v),
    }
}

fn potential_from_value<S: Scalar>(v: &Value) -> Result<Potential<S>, JsonError> {
    if v.as_str() == Some("-inf") {
        return Ok(Potential::NegInf);
    }
    Ok(Potential::Finite(scalar_from_value(v)?))
}

// ---- helpers -----------------------------------------------------------

fn get<'a>(obj: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value, JsonError> {
    obj.get(key)
        .ok_or_else(|| JsonError(format!("{what} is missing `{key}`")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, JsonError> {
    v.as_object()
        .ok_or_else(|| JsonError(format!("{what} must be a JSON object")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, JsonError> {
    v.as_array()
        .ok_or_else(|| JsonError(format!("{what} must be a JSON array")))
}

fn index_tuple(v: &Value, what: &str) -> Result<Vec<usize>, JsonError> {
    as_array(v, what)?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| JsonError(format!("{what} must hold nonnegative integers")))
        })
        .collect()
}

fn index_tuple_to_value(point: &[usize]) -> Value {
    Value::Array(point.iter().map(|&i| json!(i)).collect())
}

// ---- instance ----------------------------------------------------------

pub fn instance_to_value<S: Scalar>(instance: &Instance<S>) -> Value {
    let spaces: Vec<Value> = instance
        .spaces
        .iter()
        .map(|space| {
            let points: Vec<Value> = space
                .points
                .iter()
                .map(|p| {
                    let mut obj = Map::new();
                    obj.insert("label".into(), Value::String(p.label.clone()));
                    if let Some(coord) = &p.coord {
                        obj.insert(
                            "coord".into(),
                            Value::Array(coord.iter().map(scalar_to_value).collect()),
                        );
                    }
                    Value::Object(obj)
                })
                .collect();
            json!({ "points": points })
        })
        .collect();
    let marginals: Vec<Value> = instance
        .marginals
        .iter()
        .map(|m| Value::Array(m.weights.iter().map(scalar_to_value).collect()))
        .collect();
    let cost = match &instance.cost {
        CostSpec::Tensor(t) => json!({ "tensor": tensor_to_value(t, 0, &mut 0) }),
        CostSpec::Builtin(b) => {
            let params = match b {
                BuiltinCost::PairwiseQuadratic => json!({}),
                BuiltinCost::Coulomb { floor } => json!({ "floor": scalar_to_value(floor) }),
                BuiltinCost::Product { weights, offset } => {
                    let mut obj = Map::new();
                    if let Some(w) = weights {
                        obj.insert(
                            "weights".into(),
                            Value::Array(w.iter().map(scalar_to_value).collect()),
                        );
                    }
                    obj.insert("offset".into(), scalar_to_value(offset));
                    Value::Object(obj)
                }
            };
            json!({ "builtin": b.name(), "params": params })
        }
    };
    json!({
        "spaces": spaces,
        "marginals": marginals,
        "cost": cost,
        "arithmetic": S::mode().as_str(),
    })
}

fn tensor_to_value<S: Scalar>(t: &CostTensor<S>, depth: usize, cursor: &mut usize) -> Value {
    if depth == t.shape.len() {
        let v = scalar_to_value(&t.values[*cursor]);
        *cursor += 1;
        return v;
    }
    Value::Array(
        (0..t.shape[depth])
            .map(|_| tensor_to_value(t, depth + 1, cursor))
            .collect(),
    )
}

/// Arithmetic mode stated by an instance document, if any.
pub fn document_mode(v: &Value) -> Result<Option<ArithmeticMode>, JsonError> {
    match v.get("arithmetic") {
        None => Ok(None),
        Some(Value::String(s)) => ArithmeticMode::from_str(s)
            .map(Some)
            .map_err(JsonError),
        Some(other) => err(format!("`arithmetic` must be a string, got {other}")),
    }
}

pub fn instance_from_value<S: Scalar>(v: &Value) -> Result<Instance<S>, JsonError> {
    let obj = as_object(v, "instance")?;
    let mut spaces = Vec::new();
    for (axis, sv) in as_array(get(obj, "spaces", "instance")?, "spaces")?
        .iter()
        .enumerate()
    {
        let sobj = as_object(sv, "space")?;
        let mut points = Vec::new();
        for pv in as_array(get(sobj, "points", "space")?, "points")? {
            let pobj = as_object(pv, "point")?;
            let label = get(pobj, "label", "point")?
                .as_str()
                .ok_or_else(|| JsonError("point label must be a string".into()))?
                .to_string();
            let coord = match pobj.get("coord") {
                None | Some(Value::Null) => None,
                Some(cv) => Some(
                    as_array(cv, "coord")?
                        .iter()
                        .map(scalar_from_value)
                        .collect::<Result<Vec<S>, _>>()?,
                ),
            };
            points.push(Point { label, coord });
        }
        if points.is_empty() {
            return err(format!("space {axis} has no points"));
        }
        spaces.push(Space { points });
    }

    let mut marginals = Vec::new();
    for (axis, mv) in as_array(get(obj, "marginals", "instance")?, "marginals")?
        .iter()
        .enumerate()
    {
        let weights = as_array(mv, "marginal")?
            .iter()
            .map(scalar_from_value)
            .collect::<Result<Vec<S>, _>>()?;
        marginals.push(Marginal {
            space_id: axis,
            weights,
        });
    }

    let cost_obj = as_object(get(obj, "cost", "instance")?, "cost")?;
    let cost = if let Some(tv) = cost_obj.get("tensor") {
        let shape: Vec<usize> = spaces.iter().map(|s| s.points.len()).collect();
        let mut values = Vec::with_capacity(shape.iter().product());
        tensor_from_value(tv, &shape, 0, &mut values)?;
        CostSpec::Tensor(CostTensor { shape, values })
    } else if let Some(name) = cost_obj.get("builtin") {
        let name = name
            .as_str()
            .ok_or_else(|| JsonError("`builtin` must be a string".into()))?;
        let empty = Map::new();
        let params = match cost_obj.get("params") {
            None => &empty,
            Some(p) => as_object(p, "params")?,
        };
        let builtin = match name {
            "pairwise_quadratic" => BuiltinCost::PairwiseQuadratic,
            "coulomb" => {
                let floor = match params.get("floor") {
                    Some(fv) => scalar_from_value(fv)?,
                    None => S::from_ratio(1, 1_000_000),
                };
                BuiltinCost::Coulomb { floor }
            }
            "product" => {
                let weights = match params.get("weights") {
                    None => None,
                    Some(wv) => Some(
                        as_array(wv, "weights")?
                            .iter()
                            .map(scalar_from_value)
                            .collect::<Result<Vec<S>, _>>()?,
                    ),
                };
                let offset = match params.get("offset") {
                    Some(ov) => scalar_from_value(ov)?,
                    None => S::zero(),
                };
                BuiltinCost::Product { weights, offset }
            }
            other => return err(format!("unknown builtin cost `{other}`")),
        };
        CostSpec::Builtin(builtin)
    } else {
        return err("cost must carry `tensor` or `builtin`");
    };

    Ok(Instance {
        spaces,
        marginals,
        cost,
    })
}

fn tensor_from_value<S: Scalar>(
    v: &Value,
    shape: &[usize],
    depth: usize,
    out: &mut Vec<S>,
) -> Result<(), JsonError> {
    if depth == shape.len() {
        out.push(scalar_from_value(v)?);
        return Ok(());
    }
    let arr = as_array(v, "tensor level")?;
    if arr.len() != shape[depth] {
        return err(format!(
            "tensor level {depth} has {} entries, expected {}",
            arr.len(),
            shape[depth]
        ));
    }
    for sub in arr {
        tensor_from_value(sub, shape, depth + 1, out)?;
    }
    Ok(())
}

pub fn instance_to_string<S: Scalar>(instance: &Instance<S>) -> String {
    let mut s = serde_json::to_string_pretty(&instance_to_value(instance))
        .expect("serializable value");
    s.push('\n');
    s
}

// ---- plans and supports -------------------------------------------------

pub fn plan_to_value<S: Scalar>(plan: &TransportPlan<S>) -> Value {
    let entries: Vec<Value> = plan
        .iter()
        .map(|(point, mass)| {
            json!({
                "idx": index_tuple_to_value(point),
                "mass": scalar_to_value(mass),
            })
        })
        .collect();
    json!({ "entries": entries })
}

pub fn plan_from_value<S: Scalar>(v: &Value) -> Result<TransportPlan<S>, JsonError> {
    let obj = as_object(v, "plan")?;
    let mut entries = Vec::new();
    for ev in as_array(get(obj, "entries", "plan")?, "entries")? {
        let eobj = as_object(ev, "entry")?;
        let idx = index_tuple(get(eobj, "idx", "entry")?, "idx")?;
        let mass = scalar_from_value(get(eobj, "mass", "entry")?)?;
        entries.push((idx, mass));
    }
    Ok(TransportPlan::from_entries(entries))
}

pub fn support_to_value(support: &SupportSet) -> Value {
    json!({
        "points": support
            .iter()
            .map(|p| index_tuple_to_value(p))
            .collect::<Vec<Value>>()
    })
}

pub fn support_from_value(v: &Value) -> Result<SupportSet, JsonError> {
    let obj = as_object(v, "support")?;
    let points = as_array(get(obj, "points", "support")?, "points")?
        .iter()
        .map(|p| index_tuple(p, "support point"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SupportSet::from_points(points))
}

// ---- tuples, witnesses, certificates -------------------------------------

pub fn potentials_to_value<S: Scalar>(tuple: &SplittingTuple<S>) -> Value {
    Value::Array(
        tuple
            .potentials
            .iter()
            .map(|pots| Value::Array(pots.iter().map(potential_to_value).collect()))
            .collect(),
    )
}

pub fn tuple_to_value<S: Scalar>(tuple: &SplittingTuple<S>, base: Option<&[usize]>) -> Value {
    let mut obj = Map::new();
    obj.insert("potentials".into(), potentials_to_value(tuple));
    obj.insert(
        "domain".into(),
        Value::String(tuple.domain.as_str().into()),
    );
    if let Some(base) = base {
        obj.insert("base".into(), index_tuple_to_value(base));
    }
    Value::Object(obj)
}

pub fn tuple_from_value<S: Scalar>(v: &Value) -> Result<SplittingTuple<S>, JsonError> {
    let obj = as_object(v, "tuple")?;
    let potentials = potentials_from_value(get(obj, "potentials", "tuple")?)?;
    let domain = match get(obj, "domain", "tuple")?.as_str() {
        Some("ambient") => TupleDomain::OnAmbient,
        Some("projections") => TupleDomain::OnProjections,
        other => return err(format!("unknown tuple domain {other:?}")),
    };
    Ok(SplittingTuple { potentials, domain })
}

fn potentials_from_value<S: Scalar>(v: &Value) -> Result<Vec<Vec<Potential<S>>>, JsonError> {
    as_array(v, "potentials")?
        .iter()
        .map(|pv| {
            as_array(pv, "potential vector")?
                .iter()
                .map(potential_from_value)
                .collect()
        })
        .collect()
}

pub fn witness_to_value<S: Scalar>(witness: &RearrangementWitness<S>) -> Value {
    json!({
        "points": witness
            .points
            .iter()
            .map(|p| index_tuple_to_value(p))
            .collect::<Vec<Value>>(),
        "permutations": witness
            .permutations
            .iter()
            .map(|sigma| index_tuple_to_value(sigma))
            .collect::<Vec<Value>>(),
        "cost_before": scalar_to_value(&witness.cost_before),
        "cost_after": scalar_to_value(&witness.cost_after),
    })
}

pub fn witness_from_value<S: Scalar>(v: &Value) -> Result<RearrangementWitness<S>, JsonError> {
    let obj = as_object(v, "witness")?;
    Ok(RearrangementWitness {
        points: as_array(get(obj, "points", "witness")?, "points")?
            .iter()
            .map(|p| index_tuple(p, "witness point"))
            .collect::<Result<_, _>>()?,
        permutations: as_array(get(obj, "permutations", "witness")?, "permutations")?
            .iter()
            .map(|p| index_tuple(p, "permutation"))
            .collect::<Result<_, _>>()?,
        cost_before: scalar_from_value(get(obj, "cost_before", "witness")?)?,
        cost_after: scalar_from_value(get(obj, "cost_after", "witness")?)?,
    })
}

pub fn certificate_to_value<S: Scalar>(certificate: &Certificate<S>) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "hash".into(),
        Value::String(certificate.instance_hash.clone()),
    );
    obj.insert("value".into(), scalar_to_value(&certificate.plan_cost));
    match &certificate.verdict {
        CertificateVerdict::Optimal { tuple, base_point } => {
            obj.insert("verdict".into(), Value::String("optimal".into()));
            obj.insert("base".into(), index_tuple_to_value(base_point));
            obj.insert("potentials".into(), potentials_to_value(tuple));
        }
        CertificateVerdict::NotMonotone(witness) => {
            obj.insert("verdict".into(), Value::String("not_monotone".into()));
            obj.insert("witness".into(), witness_to_value(witness));
        }
    }
    Value::Object(obj)
}

pub fn certificate_from_value<S: Scalar>(v: &Value) -> Result<Certificate<S>, JsonError> {
    let obj = as_object(v, "certificate")?;
    let instance_hash = get(obj, "hash", "certificate")?
        .as_str()
        .ok_or_else(|| JsonError("certificate hash must be a string".into()))?
        .to_string();
    let plan_cost = scalar_from_value(get(obj, "value", "certificate")?)?;
    let verdict = match get(obj, "verdict", "certificate")?.as_str() {
        Some("optimal") => {
            let potentials = potentials_from_value(get(obj, "potentials", "certificate")?)?;
            let base_point = index_tuple(get(obj, "base", "certificate")?, "base")?;
            CertificateVerdict::Optimal {
                tuple: SplittingTuple {
                    potentials,
                    domain: TupleDomain::OnAmbient,
                },
                base_point,
            }
        }
        Some("not_monotone") => CertificateVerdict::NotMonotone(witness_from_value(get(
            obj,
            "witness",
            "certificate",
        )?)?),
        other => return err(format!("unknown certificate verdict {other:?}")),
    };
    Ok(Certificate {
        instance_hash,
        plan_cost,
        verdict,
    })
}

// ---- command outputs ------------------------------------------------------

pub fn solve_result_to_value<S: Scalar>(result: &SolveResult<S>) -> Value {
    json!({
        "value": scalar_to_value(&result.optimal_value),
        "plan": plan_to_value(&result.optimal_plan),
        "potentials": potentials_to_value(&result.dual_tuple),
        "gap": scalar_to_value(&result.gap),
    })
}

pub fn verdict_to_value<S: Scalar>(verdict: &MonotonicityVerdict<S>) -> Value {
    let method = match verdict.method {
        CheckMethod::Exact => json!("exact"),
        CheckMethod::BruteForce { n_max } => json!({ "brute_force": { "n_max": n_max } }),
    };
    match &verdict.result {
        MonotonicityResult::Monotone(tuple) => json!({
            "verdict": "monotone",
            "method": method,
            "tuple": tuple_to_value(tuple, None),
        }),
        MonotonicityResult::Violated(witness) => json!({
            "verdict": "violated",
            "method": method,
            "witness": witness_to_value(witness),
        }),
    }
}

pub fn brute_force_outcome_to_value<S: Scalar>(
    outcome: &BruteForceOutcome<S>,
    n_max: usize,
) -> Value {
    match outcome {
        BruteForceOutcome::Violated(witness) => json!({
            "verdict": "violated",
            "method": { "brute_force": { "n_max": n_max } },
            "witness": witness_to_value(witness),
        }),
        BruteForceOutcome::Inconclusive => json!({
            "verdict": "inconclusive",
            "method": { "brute_force": { "n_max": n_max } },
        }),
    }
}
