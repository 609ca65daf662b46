//! End-to-end optimality certification: bind a plan to an instance digest,
//! certifying potentials on the whole grid, and the attained cost — or to a
//! refuting rearrangement when the support is not monotone. Certificates
//! re-verify offline with nothing but weak duality.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instance::{CostError, Instance};
use crate::json;
use crate::limits::Limits;
use crate::monotone::{check_monotone_exact, MonotoneError, MonotonicityResult};
use crate::plan::{plan_cost, support_of, PlanError, TransportPlan};
use crate::scalar::Scalar;
use crate::splitting::{extend_by_inf_convolution, normalize_at_base, verify_tuple, SplittingError, TupleViolation};
use crate::tuple::{SplittingTuple, TupleDomain};
use crate::witness::{RearrangementWitness, WitnessCheckError};

/// Machine-checkable outcome of certifying one plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<S> {
    /// Digest of the canonical instance serialization.
    pub instance_hash: String,
    pub plan_cost: S,
    pub verdict: CertificateVerdict<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateVerdict<S> {
    Optimal {
        /// Feasible on the whole grid, equal to the cost on the support,
        /// normalized at the base point.
        tuple: SplittingTuple<S>,
        /// Lexicographically smallest support point.
        base_point: Vec<usize>,
    },
    NotMonotone(RearrangementWitness<S>),
}

impl<S> Certificate<S> {
    pub fn is_optimal(&self) -> bool {
        matches!(self.verdict, CertificateVerdict::Optimal { .. })
    }
}

#[derive(Clone, Debug, Error)]
pub enum CertifyError<S> {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error("splitting pipeline failed: {0}")]
    Splitting(SplittingError<S>),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("constructed tuple does not reproduce the plan cost ({plan_cost} vs {tuple_value})")]
    TupleValueMismatch { plan_cost: String, tuple_value: String },
}

impl<S> From<SplittingError<S>> for CertifyError<S> {
    fn from(e: SplittingError<S>) -> Self {
        CertifyError::Splitting(e)
    }
}

/// Digest of the canonical instance serialization (stable across
/// whitespace, key order, and representation details of the input file).
pub fn instance_hash<S: Scalar>(instance: &Instance<S>) -> String {
    let canonical = json::instance_to_value(instance).to_string();
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Certify a plan: monotone support yields an `Optimal` certificate whose
/// potentials are extended to the whole grid and normalized at the
/// lexicographically smallest support point; otherwise the refuting
/// witness is embedded.
pub fn certify_plan<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    limits: &Limits,
) -> Result<Certificate<S>, CertifyError<S>> {
    let cost = plan_cost(instance, plan)?;
    let gamma = support_of(plan);
    let verdict = check_monotone_exact(&gamma, instance, limits)?;
    match verdict.result {
        MonotonicityResult::Violated(witness) => Ok(Certificate {
            instance_hash: instance_hash(instance),
            plan_cost: cost,
            verdict: CertificateVerdict::NotMonotone(witness),
        }),
        MonotonicityResult::Monotone(tuple) => {
            let extended = extend_by_inf_convolution(&tuple, &gamma, instance, limits)?;
            let base_point = gamma.lex_min().expect("support is nonempty").clone();
            let tuple = normalize_at_base(&extended, &base_point, instance)?;
            let tuple_value = tuple
                .marginal_value(&instance.marginals)
                .expect("ambient tuple is finite");
            if !cost.approx_eq(&tuple_value, &S::eq_tol()) {
                return Err(CertifyError::TupleValueMismatch {
                    plan_cost: cost.to_string(),
                    tuple_value: tuple_value.to_string(),
                });
            }
            Ok(Certificate {
                instance_hash: instance_hash(instance),
                plan_cost: cost,
                verdict: CertificateVerdict::Optimal { tuple, base_point },
            })
        }
    }
}

/// One failed audit check.
#[derive(Clone, Debug, PartialEq)]
pub enum AuditFailure<S> {
    HashMismatch { stated: String, actual: String },
    PlanInvalid { issues: usize },
    InequalityViolated { cell: Vec<usize>, excess: S },
    EqualityViolated { cell: Vec<usize>, deviation: S },
    EqualityUndefined { cell: Vec<usize> },
    CostMismatch { stated: String, recomputed: String },
    TupleValueMismatch { plan_cost: String, tuple_value: String },
    DomainNotAmbient,
    BasePointNotCanonical { stated: Vec<usize>, expected: Vec<usize> },
    WitnessInvalid(WitnessCheckError),
}

impl<S: std::fmt::Display> std::fmt::Display for AuditFailure<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AuditFailure::HashMismatch { stated, actual } => {
                write!(f, "instance hash {stated} does not match {actual}")
            }
            AuditFailure::PlanInvalid { issues } => {
                write!(f, "plan violates {issues} invariant(s)")
            }
            AuditFailure::InequalityViolated { cell, excess } => {
                write!(f, "potentials exceed the cost at {cell:?} by {excess}")
            }
            AuditFailure::EqualityViolated { cell, deviation } => {
                write!(f, "potentials miss the cost at support cell {cell:?} by {deviation}")
            }
            AuditFailure::EqualityUndefined { cell } => {
                write!(f, "potentials are -inf at support cell {cell:?}")
            }
            AuditFailure::CostMismatch { stated, recomputed } => {
                write!(f, "stated plan cost {stated} differs from recomputed {recomputed}")
            }
            AuditFailure::TupleValueMismatch { plan_cost, tuple_value } => {
                write!(f, "plan cost {plan_cost} differs from potential value {tuple_value}")
            }
            AuditFailure::DomainNotAmbient => {
                write!(f, "certificate tuple is not certified on the whole grid")
            }
            AuditFailure::BasePointNotCanonical { stated, expected } => {
                write!(f, "base point {stated:?} is not the canonical {expected:?}")
            }
            AuditFailure::WitnessInvalid(e) => write!(f, "witness does not verify: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport<S> {
    pub failures: Vec<AuditFailure<S>>,
}

impl<S> AuditReport<S> {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-check a certificate without re-solving anything: instance digest,
/// plan invariants, the tuple inequality on the whole grid, equality on the
/// plan's support, and the cost identity. A clean audit of an `Optimal`
/// certificate is a complete optimality proof by weak duality; for a
/// `NotMonotone` certificate it re-verifies the witness.
pub fn audit_certificate<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    certificate: &Certificate<S>,
) -> AuditReport<S> {
    let mut failures = Vec::new();

    let actual_hash = instance_hash(instance);
    if certificate.instance_hash != actual_hash {
        failures.push(AuditFailure::HashMismatch {
            stated: certificate.instance_hash.clone(),
            actual: actual_hash,
        });
    }

    let plan_issues = plan.validate(instance);
    if !plan_issues.is_empty() {
        failures.push(AuditFailure::PlanInvalid {
            issues: plan_issues.len(),
        });
        return AuditReport { failures };
    }
    let recomputed = match plan.as_measure().cost_integral(instance) {
        Ok(v) => v,
        Err(_) => {
            failures.push(AuditFailure::PlanInvalid { issues: 1 });
            return AuditReport { failures };
        }
    };
    if !recomputed.approx_eq(&certificate.plan_cost, &S::eq_tol()) {
        failures.push(AuditFailure::CostMismatch {
            stated: certificate.plan_cost.to_string(),
            recomputed: recomputed.to_string(),
        });
    }

    let gamma = support_of(plan);
    match &certificate.verdict {
        CertificateVerdict::Optimal { tuple, base_point } => {
            if tuple.domain != TupleDomain::OnAmbient {
                failures.push(AuditFailure::DomainNotAmbient);
            }
            let expected_base = gamma.lex_min().cloned().unwrap_or_default();
            if base_point != &expected_base {
                failures.push(AuditFailure::BasePointNotCanonical {
                    stated: base_point.clone(),
                    expected: expected_base,
                });
            }
            let report = verify_tuple(tuple, &gamma, instance, TupleDomain::OnAmbient);
            for violation in report.violations {
                failures.push(match violation {
                    TupleViolation::Inequality { cell, excess } => {
                        AuditFailure::InequalityViolated { cell, excess }
                    }
                    TupleViolation::Equality { cell, deviation } => {
                        AuditFailure::EqualityViolated { cell, deviation }
                    }
                    TupleViolation::EqualityUndefined { cell } => {
                        AuditFailure::EqualityUndefined { cell }
                    }
                });
            }
            match tuple.marginal_value(&instance.marginals) {
                Some(tuple_value) => {
                    if !certificate.plan_cost.approx_eq(&tuple_value, &S::eq_tol()) {
                        failures.push(AuditFailure::TupleValueMismatch {
                            plan_cost: certificate.plan_cost.to_string(),
                            tuple_value: tuple_value.to_string(),
                        });
                    }
                }
                None => failures.push(AuditFailure::DomainNotAmbient),
            }
        }
        CertificateVerdict::NotMonotone(witness) => {
            if let Err(e) = witness.verify(&gamma, instance) {
                failures.push(AuditFailure::WitnessInvalid(e));
            }
        }
    }

    AuditReport { failures }
}
