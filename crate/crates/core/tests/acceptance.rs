//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them on success).
//!
//! Criteria 4 and 6 contain clauses that are mathematically unattainable
//! with the strict greedy thresholds this library implements (see the
//! assertion messages and README); those tests run everything attainable
//! first and then fail on the unattainable clause with a full explanation.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadvar_core::biorthogonal::{
    check_biortho, estimate_bounds_check, select_subsequence, AdversaryConfig, Candidate,
    SelectionConfig, WitnessStrategy,
};
use quadvar_core::dyadictree::{
    c0_upper_constant, equivalence_constants, gen1_transform, lus2_decompose,
    s2_equivalence_constants, sp_norm, validate_system, EquivalenceTarget, Node, SystemKind,
    TreeVector, ValidationConfig,
};
use quadvar_core::fixtures::rademacher_cell_bundle;
use quadvar_core::funcmodel::{FunctionModel, Interpolation, Jump};
use quadvar_core::intervals::{Interval, IntervalFamily};
use quadvar_core::synthesis::{build_tent_level, synthesize, SynthesisConfig};
use quadvar_core::varmeasure::{
    atomic_part, dist_bounds, estimate_cdf, GridPolicy, MeasureSpec, PiecewiseLinear,
};
use quadvar_core::varnorm::{
    domination_margin, dyadic_grid, mesh_constrained_var, v2_norm,
};

fn two_steps() -> FunctionModel {
    FunctionModel::step(vec![
        Jump { t: 0.25, left: 0.0, at: 1.0, right: 1.0 },
        Jump { t: 0.5, left: 1.0, at: 1.0, right: 2.0 },
    ])
    .unwrap()
}

fn square_cdf_measure(knots: usize) -> MeasureSpec {
    let xs: Vec<f64> = (0..=knots).map(|i| i as f64 / knots as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| x * x).collect();
    MeasureSpec::from_cdf(PiecewiseLinear::new(xs, ys).unwrap()).unwrap()
}

fn random_family(rng: &mut ChaCha8Rng, max_intervals: usize) -> IntervalFamily {
    let m = 1 + rng.gen_range(0..max_intervals);
    let mut pts: Vec<f64> = (0..2 * m).map(|_| rng.gen::<f64>()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut intervals = Vec::new();
    for pair in pts.chunks(2) {
        if pair.len() == 2 && pair[1] > pair[0] {
            intervals.push(Interval::closed(pair[0], pair[1]).unwrap());
        }
    }
    IntervalFamily::new(intervals).unwrap()
}

#[test]
fn criterion_1_rademacher_identities() {
    let start = Instant::now();
    for n in 0..=12u32 {
        let r = v2_norm(&FunctionModel::rademacher(n)).unwrap();
        assert!(
            (r.value - 1.0).abs() <= 1e-12,
            "variation norm of level {n} primitive: {}",
            r.value
        );
    }
    let lebesgue = MeasureSpec::lebesgue();
    for n in 0..=12u32 {
        let level = (n + 2).min(12);
        let report =
            domination_margin(&FunctionModel::rademacher(n), &lebesgue, 1.0, &dyadic_grid(level))
                .unwrap();
        assert!(
            report.margin <= 1e-12,
            "level {n} margin {} on grid 2^-{level}",
            report.margin
        );
    }
    // the finest requested grid
    for n in [6u32, 12] {
        let report =
            domination_margin(&FunctionModel::rademacher(n), &lebesgue, 1.0, &dyadic_grid(14))
                .unwrap();
        assert!(report.margin <= 1e-12, "level {n} margin {} at 2^-14", report.margin);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "criterion 1 took {elapsed:.2}s, budget 5s");
    println!("ACCEPTANCE 1 PASS: rademacher identities ({elapsed:.2}s)");
}

#[test]
fn criterion_2_jump_measure_example() {
    let f = two_steps();
    let part = atomic_part(&f).unwrap();
    assert_eq!(part.atoms, vec![(0.25, 1.0), (0.5, 1.0)]);
    assert_eq!(part.total(), 2.0);
    let bounds = dist_bounds(&f).unwrap();
    assert_eq!(bounds.lower, 2.0f64.sqrt());
    assert_eq!(bounds.upper, 3.0 * 2.0f64.sqrt());
    assert!(!bounds.approximate);
    println!("ACCEPTANCE 2 PASS: jump-measure example exact");
}

#[test]
fn criterion_3_oracle_equivalences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // (a) variation norm DP against subset brute force
    for round in 0..1000 {
        let n = if round < 100 { 17 + round % 2 } else { 4 + rng.gen_range(0..13) };
        let mut ts: Vec<f64> = (0..n - 2).map(|_| rng.gen::<f64>()).collect();
        ts.push(0.0);
        ts.push(1.0);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        let m = ts.len();
        let mut vals: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        vals[0] = 0.0;
        let f = FunctionModel::grid_sample(ts, vals.clone(), Interpolation::Linear).unwrap();
        let dp = v2_norm(&f).unwrap();

        let mut brute = 0.0f64;
        for mask in 0u32..(1u32 << m) {
            if mask.count_ones() < 2 {
                continue;
            }
            let mut sum = 0.0;
            let mut prev: Option<f64> = None;
            for (i, &v) in vals.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if let Some(p) = prev {
                        let d = v - p;
                        sum += d * d;
                    }
                    prev = Some(v);
                }
            }
            brute = brute.max(sum);
        }
        assert!(
            (dp.value - brute).abs() <= 1e-12 * brute.max(1.0),
            "round {round}: dp {} vs brute {brute}",
            dp.value
        );
        assert!((dp.reevaluate(&f).unwrap() - dp.value).abs() <= 1e-12 * dp.value.max(1.0));
    }

    // (b) S^p norm DP against maximal-antichain enumeration to depth 4
    fn maximal_antichains(node: Node, depth: usize) -> Vec<Vec<Node>> {
        if node.len() == depth {
            return vec![vec![node]];
        }
        let mut out = vec![vec![node]];
        let left = maximal_antichains(node.child(0), depth);
        let right = maximal_antichains(node.child(1), depth);
        for l in &left {
            for r in &right {
                let mut combined = l.clone();
                combined.extend(r.iter().copied());
                out.push(combined);
            }
        }
        out
    }
    let antichains = maximal_antichains(Node::root(), 4);
    for round in 0..300 {
        let mut x = TreeVector::new();
        for node in Node::all_up_to_depth(4) {
            if rng.gen::<f64>() < 0.7 {
                x.insert(node, rng.gen_range(-2.0..2.0));
            }
        }
        let dp = sp_norm(&x, 2.0).unwrap();
        let mut brute = 0.0f64;
        for a in &antichains {
            let sum: f64 = a.iter().map(|s| x.get(s) * x.get(s)).sum();
            brute = brute.max(sum);
        }
        let brute = brute.sqrt();
        assert!(
            (dp.value - brute).abs() <= 1e-12 * brute.max(1.0),
            "round {round}: sp dp {} vs brute {brute}",
            dp.value
        );
    }

    // (c) branch/antichain decomposition: inequality and maximality
    for round in 0..10_000 {
        let depth = rng.gen_range(0..=6);
        let mut alpha = TreeVector::new();
        let mut lambda = TreeVector::new();
        for node in Node::all_up_to_depth(depth) {
            if rng.gen::<f64>() < 0.85 {
                alpha.insert(node, rng.gen::<f64>());
            }
            if rng.gen::<f64>() < 0.85 {
                lambda.insert(node, rng.gen::<f64>());
            }
        }
        let d = lus2_decompose(&alpha, &lambda, depth).unwrap();
        assert!(
            d.lhs <= d.rhs + 1e-9,
            "round {round}: lhs {} > rhs {}",
            d.lhs,
            d.rhs
        );
        assert!(d.antichain_is_maximal(depth), "round {round}: antichain not maximal");
        // corollary with a branchwise cap
        let mut cap = 0.0f64;
        for leaf in Node::level(depth) {
            let mut sum = 0.0;
            for l in 0..=depth {
                sum += alpha.get(&leaf.truncate(l));
            }
            cap = cap.max(sum);
        }
        let lambda_sum: f64 = d.antichain.iter().map(|t| lambda.get(t)).sum();
        assert!(d.lhs <= cap * lambda_sum + 1e-9, "round {round}: corollary");
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "criterion 3 took {elapsed:.2}s, budget 60s");
    println!("ACCEPTANCE 3 PASS: oracle equivalences ({elapsed:.2}s)");
}

#[test]
fn criterion_4_synthesis_convergence() {
    let start = Instant::now();
    let targets: Vec<(&str, MeasureSpec)> = vec![
        ("lebesgue", MeasureSpec::lebesgue()),
        ("square_cdf", square_cdf_measure(256)),
    ];

    // telescoping equalities at every level point
    for (name, mu) in &targets {
        for n in 0..=6u32 {
            let tl = build_tent_level(mu, n).unwrap();
            let dev = tl.telescoping_deviation(mu).unwrap();
            assert!(dev <= 1e-12, "{name} level {n}: telescoping deviation {dev}");
        }
    }
    println!("ACCEPTANCE 4 (part): telescoping identities exact for both targets");

    // truncated synthesis
    let config = SynthesisConfig::default();
    let mut results = Vec::new();
    for (name, mu) in &targets {
        let out = synthesize(mu, 4, &config).unwrap();
        println!(
            "ACCEPTANCE 4 (part): {name} achieved levels {:?}, failure: {:?}",
            out.chosen_levels, out.certificate.failure
        );
        for row in &out.deviations {
            println!(
                "ACCEPTANCE 4 (part): {name} prefix {} delta {:.6} deviation {:.6}",
                row.levels, row.delta, row.max_deviation
            );
            assert!(
                row.max_deviation < 0.15,
                "{name}: prefix {} deviation {} out of bounds",
                row.levels,
                row.max_deviation
            );
        }
        // monotone improvement with 5% slack
        for w in out.deviations.windows(2) {
            assert!(
                w[1].max_deviation <= w[0].max_deviation * 1.05,
                "{name}: deviations not monotone"
            );
        }
        results.push((name, out));
    }

    // regression baselines for the achieved truncations (first-level
    // deviations are stable under the deterministic pipeline)
    let leb_dev = results[0].1.deviations[0].max_deviation;
    assert!(
        (leb_dev - 0.078125).abs() < 1e-9,
        "lebesgue first-prefix deviation drifted: {leb_dev}"
    );
    let sq_dev = results[1].1.deviations[0].max_deviation;
    assert!(
        (sq_dev - 0.0624988).abs() < 1e-5,
        "square-cdf first-prefix deviation drifted: {sq_dev}"
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "criterion 4 took {elapsed:.2}s, budget 120s");

    // The unattainable clause, asserted last and faithfully: four tent
    // levels under the strict scan threshold sqrt(delta_k) 2^-(k+3) min eps
    // would need levels near 20, 40 and 80 (sup norms below ~2^-10 after
    // the first stage), far beyond any representable tent level; the greedy
    // selection therefore reports failure instead of reaching K = 4.
    for (name, out) in &results {
        assert_eq!(
            out.chosen_levels.len(),
            4,
            "{name}: truncated synthesis reached only K = {} of 4. This clause is \
             unattainable: after choosing the first tent level the ladder value \
             shrinks to ~2^-10 and the stage-2 scan threshold to ~2^-10, while \
             available tent levels n <= 12 have sup norms >= 2^-6.5. See the \
             decisions ledger for the full analysis. Failure report: {:?}",
            out.chosen_levels.len(),
            out.certificate.failure
        );
    }
    println!("ACCEPTANCE 4 PASS ({elapsed:.2}s)");
}

#[test]
fn criterion_5_variation_measure_properties() {
    let whole = Interval::closed(0.0, 1.0).unwrap();
    let policy = GridPolicy::default();

    // scaling law, exact at the DP level
    let fixtures = vec![
        two_steps(),
        FunctionModel::rademacher(3),
        build_tent_level(&MeasureSpec::lebesgue(), 2).unwrap().model,
    ];
    for f in &fixtures {
        for lambda in [0.0, 0.5, -2.0, 3.25] {
            let scaled = FunctionModel::combo(vec![(lambda, f.clone())]).unwrap();
            for delta in [0.25, 0.0625] {
                let grid = policy.build(&scaled, 0.0, 1.0, delta).unwrap();
                let a = mesh_constrained_var(&scaled, &whole, delta, &grid).unwrap().value;
                let b = mesh_constrained_var(f, &whole, delta, &grid).unwrap().value;
                let expect = lambda * lambda * b;
                assert!(
                    (a - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                    "scaling {lambda} at {delta}: {a} vs {expect}"
                );
            }
        }
    }

    // measure norm below squared variation norm on all fixtures
    for f in &fixtures {
        let est = estimate_cdf(
            f,
            &dyadic_grid(6),
            &quadvar_core::varmeasure::default_ladder(),
            &policy,
        )
        .unwrap();
        let norm_sq = v2_norm(f).unwrap().value;
        assert!(
            est.norm_estimate() <= norm_sq + 1e-9,
            "measure norm {} above squared variation norm {norm_sq}",
            est.norm_estimate()
        );
    }

    // singular additivity for disjointly supported synthesized functions
    let mu1 = MeasureSpec::from_cdf(
        PiecewiseLinear::new(vec![0.0, 0.4, 1.0], vec![0.0, 1.0, 1.0]).unwrap(),
    )
    .unwrap();
    let mu2 = MeasureSpec::from_cdf(
        PiecewiseLinear::new(vec![0.0, 0.6, 1.0], vec![0.0, 0.0, 1.0]).unwrap(),
    )
    .unwrap();
    let config = SynthesisConfig::default();
    let f1 = synthesize(&mu1, 2, &config).unwrap();
    let f2 = synthesize(&mu2, 2, &config).unwrap();
    assert!(!f1.chosen_levels.is_empty() && !f2.chosen_levels.is_empty());
    let sum_model =
        FunctionModel::combo(vec![(1.0, f1.model.clone()), (1.0, f2.model.clone())]).unwrap();
    let delta = f1.deviations.last().unwrap().delta.min(f2.deviations.last().unwrap().delta);
    let ladder = vec![delta];
    let n1 = estimate_cdf(&f1.model, &[1.0], &ladder, &policy).unwrap().norm_estimate();
    let n2 = estimate_cdf(&f2.model, &[1.0], &ladder, &policy).unwrap().norm_estimate();
    let n12 = estimate_cdf(&sum_model, &[1.0], &ladder, &policy).unwrap().norm_estimate();
    assert!(
        (n12 - n1 - n2).abs() < 0.05,
        "singular additivity: {n12} vs {n1} + {n2}"
    );

    // piecewise-linear models have vanishing measure at delta 2^-10
    let gentle = {
        let ts: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| (2.0 * t - 0.7).min(0.9).max(0.0)).collect();
        let mut vals = vals;
        vals[0] = 0.0;
        FunctionModel::grid_sample(ts, vals, Interpolation::Linear).unwrap()
    };
    for f in [FunctionModel::identity(), FunctionModel::rademacher(2), gentle] {
        let ladder: Vec<f64> = (2..=10).map(|k| 2f64.powi(-k)).collect();
        let est = estimate_cdf(&f, &[1.0], &ladder, &policy).unwrap();
        assert!(
            est.norm_estimate() < 1e-2,
            "piecewise-linear measure norm {} not below 1e-2",
            est.norm_estimate()
        );
    }
    println!("ACCEPTANCE 5 PASS: variation-measure properties");
}

#[test]
fn criterion_6_biorthogonality() {
    let start = Instant::now();
    let pool: Vec<Candidate> = (1..=20u32)
        .map(|n| Candidate::plain(FunctionModel::rademacher(n)))
        .collect();
    let epsilons: Vec<f64> = (1..=8).map(|i| 2f64.powi(-i)).collect();
    let cert = select_subsequence(&pool, &epsilons, 4, &SelectionConfig::default()).unwrap();
    let indices = cert.chosen_indices();
    println!(
        "ACCEPTANCE 6 (part): selection achieved length {} with pool indices {:?} \
         (levels {:?}); failure: {:?}",
        cert.len(),
        indices,
        indices.iter().map(|&i| i + 1).collect::<Vec<_>>(),
        cert.failure
    );
    // regression baseline: the achieved prefix is deterministic
    assert_eq!(indices[..2.min(indices.len())], [0, 17], "achieved prefix drifted");

    // re-verification of the achieved certificate under adversarial trials
    let models: Vec<FunctionModel> = indices
        .iter()
        .map(|&i| pool[i].model.clone())
        .collect();
    let ladder = cert.ladder().unwrap();
    let budgets = cert.stage_budgets();
    let adversary = AdversaryConfig::from_models(&models, 10, 1 << 13);
    let strategy = WitnessStrategy::MeshClass(ladder);
    let witness = check_biortho(&models, &budgets, &strategy, &[], Some(&adversary)).unwrap();
    assert!(
        witness.pass,
        "achieved certificate must re-verify; worst defects {:?} vs budgets {:?}",
        witness.worst_per_class, budgets
    );
    println!("ACCEPTANCE 6 (part): achieved certificate re-verifies adversarially");

    // the seven estimate inequalities on 200 random draws, zero violations
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let member_norms: Vec<f64> = models
        .iter()
        .map(|m| v2_norm(m).unwrap().norm())
        .collect();
    let mut violations = 0usize;
    for draw in 0..200 {
        let fam = random_family(&mut rng, 6);
        let lambda: Vec<f64> = (0..models.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let all: Vec<usize> = (0..models.len()).collect();
        let subset_f: Vec<usize> = all
            .iter()
            .copied()
            .filter(|_| rng.gen::<bool>())
            .collect();
        let subset_f = if subset_f.is_empty() { vec![0] } else { subset_f };
        let check_ratio = draw < 20;
        let report = estimate_bounds_check(
            &models,
            &budgets,
            &strategy,
            &fam,
            &lambda,
            &subset_f,
            &all,
            1e-9,
            Some(&member_norms),
            check_ratio,
        )
        .unwrap();
        if report.violations() > 0 {
            violations += report.violations();
            for c in report.checks.iter().filter(|c| !c.pass) {
                println!("ACCEPTANCE 6 VIOLATION draw {draw}: {} lhs {} rhs {}", c.name, c.lhs, c.rhs);
            }
        }
    }
    assert_eq!(violations, 0, "estimate-lemma violations indicate a build bug");
    println!("ACCEPTANCE 6 (part): zero violations across 200 draws");

    let elapsed = start.elapsed().as_secs_f64();

    // The unattainable clause, asserted last and faithfully: a length-4
    // certificate from levels <= 20 with budgets 2^-i cannot exist. The
    // middle mesh classes are squeezed from both sides: class 2 must admit
    // up to 1/delta_2 intervals of the third function's amplitude
    // 2^(-n3/2), forcing n3 >= n2 + 11, while the class-3 budget forces
    // n2-scale Lipschitz terms below 2^-4, i.e. delta_2 <= 2^(-n2-8);
    // together n4 >= ~30 > 20. Packing third-level peak-to-zero intervals
    // realizes the violation, so no witness strategy rescues it.
    assert_eq!(
        cert.len(),
        4,
        "selection reached only {} of 4: after accepting levels 1 and 18 the \
         verified tail bound forces the next ladder value towards 2^-26, whose \
         evaluation grid exceeds any feasible size, and the stage-3 scan \
         threshold sqrt(delta_2) 2^-5 min(eps) ~ 2^-20 sits below every \
         remaining sup norm >= 2^-10 in the pool (see the failure report above \
         and the decisions ledger for the impossibility analysis)",
        cert.len()
    );
    println!("ACCEPTANCE 6 PASS ({elapsed:.2}s)");
}

#[test]
fn criterion_7_system_pipeline() {
    let start = Instant::now();
    let bundle = rademacher_cell_bundle(2, 14).unwrap();
    let cfg = ValidationConfig::default();

    let report = validate_system(&bundle, SystemKind::Generating, &cfg).unwrap();
    assert!(report.pass(), "generating validation failures: {:#?}", report.failures);
    println!(
        "ACCEPTANCE 7 (part): depth-2 generating bundle valid ({} checks)",
        report.checked
    );

    let eps_bio = bundle.bio_eps_sum();
    let transformed = gen1_transform(&bundle).unwrap();
    let expect_theta =
        bundle.constants.theta - (2.0 * bundle.constants.norm_cap + eps_bio) * eps_bio;
    assert!((transformed.constants.norm_cap - (bundle.constants.norm_cap + eps_bio)).abs() < 1e-12);
    assert!((transformed.constants.theta - expect_theta).abs() < 1e-12);

    let report = validate_system(&transformed, SystemKind::S2, &cfg).unwrap();
    assert!(report.pass(), "s2 validation failures: {:#?}", report.failures);
    println!(
        "ACCEPTANCE 7 (part): transformed bundle valid as S2 ({} checks)",
        report.checked
    );

    // equivalence constants on the transformed family
    let family: BTreeMap<Node, FunctionModel> = transformed
        .nodes
        .iter()
        .map(|(n, d)| (*n, d.func.clone()))
        .collect();
    let eps_tol_sum: f64 = transformed.tolerances.iter().sum();
    let (c_pred, big_c_pred) = s2_equivalence_constants(
        transformed.constants.norm_cap,
        transformed.constants.mass_cap,
        transformed.constants.theta,
        eps_tol_sum,
        eps_bio,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nodes: Vec<Node> = family.keys().copied().collect();
    let mut samples = Vec::new();
    for _ in 0..24 {
        let mut v = TreeVector::new();
        for node in &nodes {
            if rng.gen::<f64>() < 0.8 {
                let val = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                v.insert(*node, val * rng.gen_range(0.25..1.0));
            }
        }
        if !v.is_empty() {
            samples.push(v);
        }
    }
    let equiv = equivalence_constants(
        &family,
        EquivalenceTarget::S2,
        &samples,
        Some((c_pred, big_c_pred)),
    )
    .unwrap();
    println!(
        "ACCEPTANCE 7 (part): empirical [{:.4}, {:.4}] vs predicted [{:.4}, {:.4}]",
        equiv.c_hat, equiv.big_c_hat, c_pred, big_c_pred
    );
    assert!(c_pred > 0.0, "lower constant must be informative for this fixture");
    assert!(
        equiv.c_hat >= c_pred - 1e-2,
        "lower equivalence constant violated: {} < {}",
        equiv.c_hat,
        c_pred
    );
    assert!(
        equiv.big_c_hat <= big_c_pred + 1e-2,
        "upper equivalence constant violated: {} > {}",
        equiv.big_c_hat,
        big_c_pred
    );

    // flat-norm estimator against the domination constant on the selected
    // Rademacher family from the greedy selection
    let pool: Vec<Candidate> = (1..=20u32)
        .map(|n| Candidate::plain(FunctionModel::rademacher(n)))
        .collect();
    let epsilons: Vec<f64> = (1..=8).map(|i| 2f64.powi(-i)).collect();
    let cert = select_subsequence(&pool, &epsilons, 4, &SelectionConfig::default()).unwrap();
    let mut rad_family = BTreeMap::new();
    let mut chain = Node::root();
    for &idx in &cert.chosen_indices() {
        rad_family.insert(chain, pool[idx].model.clone());
        chain = chain.child(0);
    }
    let rad_nodes: Vec<Node> = rad_family.keys().copied().collect();
    let mut rad_samples = Vec::new();
    for _ in 0..16 {
        let mut v = TreeVector::new();
        for node in &rad_nodes {
            let val = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            v.insert(*node, val);
        }
        rad_samples.push(v);
    }
    // each selected primitive is (1, 0)-dominated by Lebesgue measure
    let eps_sel: f64 = cert.stage_budgets().iter().sum();
    let k_pred = c0_upper_constant(1.0, 1.0, 1.0, eps_sel);
    let rad_equiv =
        equivalence_constants(&rad_family, EquivalenceTarget::C0, &rad_samples, None).unwrap();
    println!(
        "ACCEPTANCE 7 (part): flat-norm estimator {:.4} vs bound {:.4}",
        rad_equiv.big_c_hat, k_pred
    );
    assert!(
        rad_equiv.big_c_hat <= k_pred + 1e-2,
        "flat-norm estimator {} exceeds bound {}",
        rad_equiv.big_c_hat,
        k_pred
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "criterion 7 took {elapsed:.2}s, budget 120s");
    println!("ACCEPTANCE 7 PASS ({elapsed:.2}s)");
}
