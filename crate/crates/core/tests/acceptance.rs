//! Acceptance suite. Each test covers one criterion at its stated
//! tolerance and prints one pass line; a failure panics with context.

use mmot_core::{
    audit_certificate, certify_plan, check_feasibility, check_monotone_exact, duality_gap,
    extend_by_inf_convolution, extract_witness, gen_instance, improving_pair_from_certificate,
    instance_hash, normalize_at_base, perturb_swap, plan_cost, solve_primal, splitting_for_finite,
    splitting_system, support_of, verify_tuple, CertificateVerdict, Feasibility, Instance, Limits,
    Potential, Rational, Scalar, SupportSet, TransportPlan, TupleDomain,
};
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// The 100 seeded instances shared by criteria 1, 3, 5, and 7:
/// d in {2,3,4}, every space size at most 4, random rational cost tensors.
fn criterion_instances() -> Vec<Instance<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    (0..100u64)
        .map(|k| {
            let d = rng.gen_range(2..=4usize);
            let sizes: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=4usize)).collect();
            gen_instance(&sizes, "random", 10_000 + k).unwrap()
        })
        .collect()
}

/// Greedy northwest-corner coupling of two marginals. For costs that are
/// submodular in the point order (the quadratic cost on increasing
/// coordinates is), this coupling is optimal and its support monotone.
fn northwest_coupling(inst: &Instance<Rational>) -> TransportPlan<Rational> {
    let mu = &inst.marginals[0].weights;
    let nu = &inst.marginals[1].weights;
    let mut entries = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let mut a = mu[0].clone();
    let mut b = nu[0].clone();
    loop {
        let m = if a <= b { a.clone() } else { b.clone() };
        if !m.is_zero() {
            entries.push((vec![i, j], m.clone()));
        }
        a -= m.clone();
        b -= m;
        let a_done = a.is_zero();
        let b_done = b.is_zero();
        if a_done && i + 1 < mu.len() {
            i += 1;
            a = mu[i].clone();
        } else if a_done {
            break;
        }
        if b_done && j + 1 < nu.len() {
            j += 1;
            b = nu[j].clone();
        } else if b_done && !a_done {
            continue;
        } else if b_done {
            break;
        }
    }
    TransportPlan::from_entries(entries)
}

/// The 50 handcrafted monotone supports of criterion 2: northwest-corner
/// couplings of two-marginal quadratic instances.
fn handcrafted_monotone_plans() -> Vec<(Instance<Rational>, TransportPlan<Rational>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    (0..50u64)
        .map(|k| {
            let sizes = vec![rng.gen_range(2..=4usize), rng.gen_range(2..=4usize)];
            let inst = gen_instance(&sizes, "pairwise_quadratic", 20_000 + k).unwrap();
            let plan = northwest_coupling(&inst);
            (inst, plan)
        })
        .collect()
}

/// Criterion 1: primal and dual optimal values coincide exactly in
/// rational arithmetic, and within 1e-9 in float arithmetic, on the 100
/// seeded instances.
#[test]
fn criterion_1_strong_duality() {
    let limits = Limits::default();
    for (k, inst) in criterion_instances().iter().enumerate() {
        let gap = duality_gap(inst, &limits).unwrap();
        assert!(gap.is_zero(), "instance {k}: rational gap {gap}");

        let float_inst: Instance<f64> = inst.to_mode();
        let float_gap = duality_gap(&float_inst, &limits).unwrap();
        assert!(
            float_gap.abs() <= 1e-9,
            "instance {k}: float gap {float_gap}"
        );
    }
    println!("criterion 1 (strong duality, 100 instances, rational exact / float 1e-9): PASS");
}

/// Criterion 2: plans whose support passes the exact monotonicity check
/// attain the LP optimum — on the solver's own plans and on 50 handcrafted
/// monotone couplings.
#[test]
fn criterion_2_monotone_plans_attain_the_optimum() {
    let limits = Limits::default();
    for (k, inst) in criterion_instances().iter().enumerate() {
        let solved = solve_primal(inst, &limits).unwrap();
        let verdict = check_monotone_exact(&support_of(&solved.optimal_plan), inst, &limits)
            .unwrap();
        assert!(verdict.is_monotone(), "instance {k}: solver support");
        assert_eq!(
            plan_cost(inst, &solved.optimal_plan).unwrap(),
            solved.optimal_value,
            "instance {k}"
        );
    }
    for (k, (inst, plan)) in handcrafted_monotone_plans().iter().enumerate() {
        assert!(plan.validate(inst).is_empty(), "handcrafted {k} invalid");
        let verdict = check_monotone_exact(&support_of(plan), inst, &limits).unwrap();
        assert!(verdict.is_monotone(), "handcrafted {k}: support not monotone");
        let solved = solve_primal(inst, &limits).unwrap();
        assert_eq!(
            plan_cost(inst, plan).unwrap(),
            solved.optimal_value,
            "handcrafted {k}: monotone coupling must attain the optimum"
        );
    }
    println!("criterion 2 (monotone supports attain the optimum, 100 solver + 50 handcrafted plans): PASS");
}

/// Criterion 3: the support of every LP-optimal plan passes the exact
/// monotonicity check.
#[test]
fn criterion_3_optimal_supports_are_monotone() {
    let limits = Limits::default();
    for (k, inst) in criterion_instances().iter().enumerate() {
        let solved = solve_primal(inst, &limits).unwrap();
        let verdict = check_monotone_exact(&support_of(&solved.optimal_plan), inst, &limits)
            .unwrap();
        assert!(verdict.is_monotone(), "instance {k}");
    }
    println!("criterion 3 (necessity: 100/100 optimal supports monotone): PASS");
}

/// Criterion 4: deliberately swapped plans are refuted with witnesses whose
/// recomputed costs strictly improve, and whose denominator-clearing
/// expansion reproduces the measure integrals exactly.
#[test]
fn criterion_4_witness_soundness() {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xdead);
    let mut refuted = 0usize;
    let mut seed = 0u64;
    while refuted < 50 {
        seed += 1;
        let d = rng.gen_range(2..=3usize);
        let sizes: Vec<usize> = (0..d).map(|_| rng.gen_range(2..=3usize)).collect();
        let inst = gen_instance(&sizes, "random", 30_000 + seed).unwrap();
        let solved = solve_primal(&inst, &limits).unwrap();
        let Some(swapped) = perturb_swap(&solved.optimal_plan, &inst) else {
            continue;
        };
        let gamma = support_of(&swapped);

        // Full certification path refutes the swapped plan.
        let cert = certify_plan(&inst, &swapped, &limits).unwrap();
        let CertificateVerdict::NotMonotone(witness) = &cert.verdict else {
            panic!("seed {seed}: swapped plan was not refuted");
        };
        witness.verify(&gamma, &inst).unwrap();

        // Decomposition identities, re-derived from the raw certificate.
        let system = splitting_system(&gamma, &inst, &limits).unwrap();
        let Feasibility::Infeasible(farkas) =
            check_feasibility(&system.constraints, &system.bounds, &limits).unwrap()
        else {
            panic!("seed {seed}: refuted support has a feasible system");
        };
        let (alpha, alpha_prime) =
            improving_pair_from_certificate(&farkas, &gamma, &inst, &limits).unwrap();
        let witness = extract_witness(&alpha, &alpha_prime, &inst, &limits).unwrap();
        witness.verify(&gamma, &inst).unwrap();

        // tau = lcm of all denominators appearing in the two measures.
        let mut tau = num_bigint::BigInt::from(1);
        for (_, mass) in alpha.iter().chain(alpha_prime.iter()) {
            tau = tau.lcm(mass.denom());
        }
        let tau = Rational::from_integer(tau);
        assert_eq!(
            witness.cost_before,
            alpha.cost_integral(&inst).unwrap() * tau.clone(),
            "seed {seed}: listed-point sum must equal tau times the alpha integral"
        );
        assert_eq!(
            witness.cost_after,
            alpha_prime.cost_integral(&inst).unwrap() * tau,
            "seed {seed}: rearranged sum must equal tau times the alpha' integral"
        );
        assert!(witness.cost_after < witness.cost_before);
        refuted += 1;
    }
    println!("criterion 4 (witness soundness and decomposition identities, 50 refutations): PASS");
}

/// Criterion 5: for every monotone support from criteria 2 and 3, the
/// extended and normalized tuple verifies on the whole grid with the
/// normalization anchors and per-axis cost bounds.
#[test]
fn criterion_5_extension_normalization_pipeline() {
    let limits = Limits::default();
    let mut pipelines = 0usize;
    let mut run = |inst: &Instance<Rational>, gamma: &SupportSet| {
        let tuple = splitting_for_finite(gamma, inst, &limits).unwrap();
        let extended = extend_by_inf_convolution(&tuple, gamma, inst, &limits).unwrap();
        let base = gamma.lex_min().unwrap().clone();
        let normalized = normalize_at_base(&extended, &base, inst).unwrap();

        let report = verify_tuple(&normalized, gamma, inst, TupleDomain::OnAmbient);
        assert!(report.is_ok(), "pipeline violations: {:?}", report.violations);

        let cost_at_base = inst.cost_at(&base).unwrap();
        assert_eq!(
            normalized.potentials[0][base[0]],
            Potential::Finite(cost_at_base),
            "first potential must carry the whole cost at the base point"
        );
        for axis in 1..inst.dimension() {
            assert_eq!(
                normalized.potentials[axis][base[axis]],
                Potential::Finite(Rational::zero()),
                "axis {axis} potential must vanish at the base point"
            );
        }
        // phi_i(x_i) <= cost along the base point, for every i and x_i.
        for (axis, pots) in normalized.potentials.iter().enumerate() {
            for (point, pot) in pots.iter().enumerate() {
                let mut cell = base.clone();
                cell[axis] = point;
                let bound = inst.cost_at(&cell).unwrap();
                assert!
                    (pot.finite().unwrap() <= &bound,
                    "axis {axis} point {point}: potential exceeds its cost bound");
            }
        }
        pipelines += 1;
    };

    for inst in &criterion_instances() {
        let solved = solve_primal(inst, &limits).unwrap();
        run(inst, &support_of(&solved.optimal_plan));
    }
    for (inst, plan) in &handcrafted_monotone_plans() {
        run(inst, &support_of(plan));
    }
    println!("criterion 5 (extension + normalization pipeline on {pipelines} monotone supports): PASS");
}

/// Classical two-marginal oracle: scan cyclic chains of length 2..=4 for a
/// violated cycle inequality. Complete on 4x4 grids because a minimal
/// violating cycle visits distinct first-axis points.
fn cycle_oracle_monotone(gamma: &SupportSet, inst: &Instance<Rational>, max_len: usize) -> bool {
    let points: Vec<&Vec<usize>> = gamma.iter().collect();
    let n = points.len();
    for len in 2..=max_len {
        let mut chain = vec![0usize; len];
        loop {
            let mut before = Rational::zero();
            let mut after = Rational::zero();
            for i in 0..len {
                let p = points[chain[i]];
                let q = points[chain[(i + 1) % len]];
                before += inst.cost_at(p).unwrap();
                after += inst.cost_at(&[p[0], q[1]]).unwrap();
            }
            if after < before {
                return false;
            }
            // Next chain in lexicographic order.
            let mut pos = len;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                chain[pos] += 1;
                if chain[pos] < n {
                    break;
                }
                chain[pos] = 0;
            }
            if pos == 0 && chain[0] == 0 {
                break;
            }
        }
    }
    true
}

/// Criterion 6: the exact checker agrees with the cycle-inequality oracle
/// on 50 random two-marginal 4x4 instances.
#[test]
fn criterion_6_two_marginal_regression() {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);
    let mut monotone_seen = 0usize;
    let mut violated_seen = 0usize;
    for k in 0..50u64 {
        let inst = gen_instance(&[4, 4], "random", 40_000 + k).unwrap();
        let mut points = Vec::new();
        while points.is_empty() {
            points = inst
                .grid()
                .filter(|_| rng.gen_bool(0.3))
                .collect::<Vec<_>>();
        }
        let gamma = SupportSet::from_points(points);
        let exact = check_monotone_exact(&gamma, &inst, &limits).unwrap();
        let oracle = cycle_oracle_monotone(&gamma, &inst, 4);
        assert_eq!(
            exact.is_monotone(),
            oracle,
            "instance {k}: checker and cycle oracle disagree"
        );
        if oracle {
            monotone_seen += 1;
        } else {
            violated_seen += 1;
        }
    }
    assert!(monotone_seen > 0 && violated_seen > 0, "degenerate sampling");
    println!(
        "criterion 6 (two-marginal regression, 50 instances: {monotone_seen} monotone / {violated_seen} violated, all agree): PASS"
    );
}

/// Criterion 7: optimal certificates audit cleanly, and bumping any single
/// potential entry by one, the stated value, the base point, or the
/// instance digest makes the audit fail.
#[test]
fn criterion_7_audit_independence() {
    let limits = Limits::default();
    let instances: Vec<Instance<Rational>> = criterion_instances().into_iter().take(20).collect();
    let mut perturbations = 0usize;
    for (k, inst) in instances.iter().enumerate() {
        let solved = solve_primal(inst, &limits).unwrap();
        let cert = certify_plan(inst, &solved.optimal_plan, &limits).unwrap();
        assert!(cert.is_optimal(), "instance {k}");
        let report = audit_certificate(inst, &solved.optimal_plan, &cert);
        assert!(report.is_ok(), "instance {k}: {:?}", report.failures);

        let CertificateVerdict::Optimal { tuple, base_point } = &cert.verdict else {
            unreachable!()
        };
        // Every single potential entry, bumped by +1.
        for axis in 0..tuple.potentials.len() {
            for point in 0..tuple.potentials[axis].len() {
                let mut tampered = cert.clone();
                let CertificateVerdict::Optimal { tuple, .. } = &mut tampered.verdict else {
                    unreachable!()
                };
                let v = tuple.potentials[axis][point].finite().unwrap().clone();
                tuple.potentials[axis][point] =
                    Potential::Finite(v + Rational::from_int(1));
                assert!(
                    !audit_certificate(inst, &solved.optimal_plan, &tampered).is_ok(),
                    "instance {k}: +1 at potential ({axis}, {point}) passed the audit"
                );
                perturbations += 1;
            }
        }
        // Stated value.
        let mut tampered = cert.clone();
        tampered.plan_cost = cert.plan_cost.clone() + Rational::from_int(1);
        assert!(!audit_certificate(inst, &solved.optimal_plan, &tampered).is_ok());
        perturbations += 1;
        // Base point.
        let mut tampered = cert.clone();
        if let CertificateVerdict::Optimal { base_point: b, .. } = &mut tampered.verdict {
            b[0] += 1;
        }
        assert!(!audit_certificate(inst, &solved.optimal_plan, &tampered).is_ok());
        perturbations += 1;
        // Instance digest.
        let mut tampered = cert.clone();
        let flipped = if cert.instance_hash.starts_with('0') { '1' } else { '0' };
        tampered.instance_hash = format!("{flipped}{}", &cert.instance_hash[1..]);
        assert!(!audit_certificate(inst, &solved.optimal_plan, &tampered).is_ok());
        perturbations += 1;

        // Unperturbed hash still matches, as a sanity check on the digest.
        assert_eq!(cert.instance_hash, instance_hash(inst));
        let _ = (tuple, base_point);
    }
    println!(
        "criterion 7 (audit independence: 20/20 clean audits, {perturbations} single-value perturbations all rejected): PASS"
    );
}

/// Criterion 8: the worked three-marginal example with the third marginal
/// pinned at its first point: the coupling family has one free parameter,
/// enumeration gives optimal value 1, and the certificate audits cleanly.
#[test]
fn criterion_8_worked_example() {
    let limits = Limits::default();
    let inst = {
        let mut inst = gen_instance(&[2, 2, 2], "pairwise_quadratic", 0).unwrap();
        for (axis, weights) in [
            vec![r(1, 2), r(1, 2)],
            vec![r(1, 2), r(1, 2)],
            vec![Rational::from_int(1), Rational::zero()],
        ]
        .into_iter()
        .enumerate()
        {
            inst.marginals[axis].weights = weights;
        }
        inst
    };

    // Brute-force oracle: couplings are a one-parameter family
    // t = mass(0,0,0) in [0, 1/2]; the cost is linear in t, so a grid
    // containing the endpoints finds the exact minimum.
    let mut oracle_best: Option<Rational> = None;
    for k in 0..=8 {
        let t = r(k, 16);
        let value = t.clone() * inst.cost_at(&[0, 0, 0]).unwrap()
            + (r(1, 2) - t.clone()) * inst.cost_at(&[0, 1, 0]).unwrap()
            + (r(1, 2) - t.clone()) * inst.cost_at(&[1, 0, 0]).unwrap()
            + t.clone() * inst.cost_at(&[1, 1, 0]).unwrap();
        oracle_best = Some(match oracle_best {
            None => value,
            Some(best) => best.min(value),
        });
    }
    assert_eq!(oracle_best.unwrap(), Rational::from_int(1));

    let solved = solve_primal(&inst, &limits).unwrap();
    assert_eq!(solved.optimal_value, Rational::from_int(1));
    assert!(solved.gap.is_zero());

    let cert = certify_plan(&inst, &solved.optimal_plan, &limits).unwrap();
    assert!(cert.is_optimal());
    assert_eq!(cert.plan_cost, Rational::from_int(1));
    let report = audit_certificate(&inst, &solved.optimal_plan, &cert);
    assert!(report.is_ok(), "failures: {:?}", report.failures);
    println!("criterion 8 (worked pinned-marginal example, optimum 1, certificate audits clean): PASS");
}
