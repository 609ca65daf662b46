//! Batch harness: generate instances, solve them, certify the optima,
//! perturb the plans into strictly worse ones, and confirm refutation.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mmot_core::{
    audit_certificate, certify_plan, gen_instance, perturb_swap, solve_primal, support_of,
    CertificateVerdict, Instance, Limits, Scalar,
};

#[derive(Default)]
struct Tally {
    solved: usize,
    certified: usize,
    refuted: usize,
    /// Instances whose optimal plan admits no strictly worsening swap
    /// (single-atom supports, flat costs).
    no_perturbation: usize,
    failures: Vec<String>,
}

/// Run `count` seeded end-to-end rounds. Exit code 0 only when every
/// solve certifies and every attempted refutation verifies.
pub fn run_suite<S: Scalar>(seed: u64, count: usize, json: bool, limits: &Limits) -> Result<u8> {
    let mut shape_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();

    for index in 0..count {
        let d = shape_rng.gen_range(2..=3usize);
        let sizes: Vec<usize> = (0..d).map(|_| shape_rng.gen_range(2..=3usize)).collect();
        let generated = gen_instance(&sizes, "random", seed.wrapping_add(index as u64))
            .expect("generator arguments are in range");
        let instance: Instance<S> = generated.to_mode();

        if let Err(failure) = run_round(&instance, index, limits, &mut tally) {
            tally.failures.push(format!("instance {index}: {failure}"));
        }
        if !json {
            println!(
                "instance {index} (sizes {sizes:?}): solved={} certified={} refuted={}",
                tally.solved, tally.certified, tally.refuted
            );
        }
    }

    if json {
        println!(
            "{}",
            serde_json::json!({
                "count": count,
                "solved": tally.solved,
                "certified": tally.certified,
                "refuted": tally.refuted,
                "no_perturbation": tally.no_perturbation,
                "failures": tally.failures,
            })
        );
    } else {
        println!(
            "suite: {}/{count} solved, {} certified, {} refuted, {} without a worsening swap, {} failures",
            tally.solved,
            tally.certified,
            tally.refuted,
            tally.no_perturbation,
            tally.failures.len()
        );
        for failure in &tally.failures {
            println!("  - {failure}");
        }
    }
    Ok(if tally.failures.is_empty() { 0 } else { 1 })
}

fn run_round<S: Scalar>(
    instance: &Instance<S>,
    index: usize,
    limits: &Limits,
    tally: &mut Tally,
) -> Result<(), String> {
    let solved = solve_primal(instance, limits).map_err(|e| format!("solve: {e}"))?;
    tally.solved += 1;

    let certificate = certify_plan(instance, &solved.optimal_plan, limits)
        .map_err(|e| format!("certify: {e}"))?;
    if !certificate.is_optimal() {
        return Err("optimal plan was not certified".into());
    }
    let report = audit_certificate(instance, &solved.optimal_plan, &certificate);
    if !report.is_ok() {
        return Err(format!("audit failed with {} issues", report.failures.len()));
    }
    tally.certified += 1;

    let Some(perturbed) = perturb_swap(&solved.optimal_plan, instance) else {
        tally.no_perturbation += 1;
        return Ok(());
    };
    let _ = index;
    let refutation = certify_plan(instance, &perturbed, limits)
        .map_err(|e| format!("certify perturbed: {e}"))?;
    match &refutation.verdict {
        CertificateVerdict::NotMonotone(witness) => {
            witness
                .verify(&support_of(&perturbed), instance)
                .map_err(|e| format!("witness re-verification: {e}"))?;
            tally.refuted += 1;
            Ok(())
        }
        CertificateVerdict::Optimal { .. } => {
            Err("strictly worse plan was certified optimal".into())
        }
    }
}
