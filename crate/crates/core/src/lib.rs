//! Discrete multi-marginal optimal transport toolkit.
//!
//! Solves the multi-marginal transport problem on finite product grids as a
//! linear program, decides cyclical monotonicity of support sets, builds
//! and extends dual potential tuples, and emits offline-verifiable
//! optimality certificates (or explicit rearrangement refutations).
//!
//! Everything is generic over the arithmetic backend: exact rationals for
//! certification, 64-bit floats for speed.

pub mod certify;
pub mod gen;
pub mod instance;
pub mod json;
pub mod limits;
pub mod lp;
pub mod monotone;
pub mod plan;
pub mod scalar;
pub mod solver;
pub mod splitting;
pub mod tuple;
pub mod witness;

pub use certify::{
    audit_certificate, certify_plan, instance_hash, AuditFailure, AuditReport, Certificate,
    CertificateVerdict, CertifyError,
};
pub use gen::{gen_instance, perturb_swap, GenError, GEN_COSTS};
pub use instance::{
    cost_eval, validate_instance, BuiltinCost, CostError, CostSpec, CostTensor, GridIter,
    Instance, Marginal, Point, Space, ValidationIssue,
};
pub use limits::Limits;
pub use lp::{
    check_feasibility, solve_lp, Constraint, FarkasCertificate, Feasibility, LinearProgram,
    LpError, LpOutcome, LpSolution, Relation, Sense, VarBound,
};
pub use monotone::{
    check_monotone_bruteforce, check_monotone_exact, extract_witness,
    improving_pair_from_certificate, splitting_system, BruteForceOutcome, CheckMethod,
    MonotoneError, MonotonicityResult, MonotonicityVerdict, SplittingSystem,
};
pub use plan::{
    marginals_of, plan_cost, support_of, Measure, PlanError, PlanIssue, SupportSet, TransportPlan,
};
pub use scalar::{ArithmeticMode, Rational, Scalar};
pub use solver::{duality_gap, solve_dual, solve_primal, SolveError, SolveResult};
pub use splitting::{
    extend_by_inf_convolution, normalize_at_base, splitting_for_finite, verify_tuple,
    SplittingError, TupleReport, TupleViolation,
};
pub use tuple::{Potential, SplittingTuple, TupleDomain};
pub use witness::{RearrangementWitness, WitnessCheckError};
