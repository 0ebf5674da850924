//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values once its assertions hold.

use std::time::Instant;

use fracbump::bump::bump_log_comparison;
use fracbump::dyadic::{construct_sparse_family, enumerate_cubes, sparsity_verify, DyadicLattice};
use fracbump::grid::{Domain, GridFunction};
use fracbump::operators::{adjoint_defect, commutator, sparse_domination_check};
use fracbump::orlicz::{bp_membership, luxemburg_norm_values, YoungFunction};
use fracbump::pins;
use fracbump::testbed::{
    band_limited_noise, result_to_json, run, trial_rng, Scenario, ScenarioKind,
};
use rand::Rng;

fn random_values(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = trial_rng(seed, 0);
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

#[test]
fn criterion_01_orlicz_engine() {
    let start = Instant::now();

    // Luxemburg norm with Power(p) against the discrete L^p average on 200
    // random (f, Q, p) instances.
    let mut rng = trial_rng(101, 0);
    for _ in 0..200 {
        let n = rng.gen_range(4..256);
        let p = rng.gen_range(1.1..6.0);
        let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let young = YoungFunction::power(p).unwrap();
        let lux = luxemburg_norm_values(&vals, &young);
        let oracle = (vals.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n as f64).powf(1.0 / p);
        assert!(
            (lux - oracle).abs() <= 1e-9 * oracle.max(1e-30),
            "n={n}, p={p}: {lux} vs {oracle}"
        );
    }

    // Round trip inverse(eval(t)) across families and four decades.
    let families = [
        YoungFunction::power(1.3).unwrap(),
        YoungFunction::power(2.0).unwrap(),
        YoungFunction::power_log(2.0, 1.0).unwrap(),
        YoungFunction::power_log(1.0, 2.0).unwrap(),
        YoungFunction::exp_minus_one(),
    ];
    for fam in &families {
        for k in 0..=24 {
            let t = 0.1 * (1e4f64).powf(k as f64 / 24.0);
            let t = if *fam == YoungFunction::exp_minus_one() {
                t.min(500.0)
            } else {
                t
            };
            let back = fam.inverse(fam.eval(t).unwrap()).unwrap();
            assert!((back - t).abs() <= 1e-10 * t, "{fam} at t={t}: {back}");
        }
    }

    // Young's inequality on 1e4 sampled pairs for every built-in
    // complementary pair. Power pairs use the closed-form conjugate;
    // exp-1 and power-log pairs are checked against the exact pointwise
    // Legendre supremum (their `complementary()` is an equivalent family by
    // construction).
    let grid: Vec<f64> = (0..100).map(|i| 100.0 * (i as f64 + 0.5) / 100.0).collect();
    for a in [
        YoungFunction::power(2.0).unwrap(),
        YoungFunction::power(3.5).unwrap(),
    ] {
        let conj = a.complementary().unwrap();
        for s in &grid {
            for t in &grid {
                let lhs = s * t;
                let rhs = a.eval(*s).unwrap() + conj.eval(*t).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12, "{a}: s={s}, t={t}");
            }
        }
    }
    for a in [
        YoungFunction::exp_minus_one(),
        YoungFunction::power_log(2.0, 1.0).unwrap(),
        YoungFunction::power_log(2.0, 3.5).unwrap(),
    ] {
        let conj_vals: Vec<f64> = grid.iter().map(|t| a.conjugate_at(*t)).collect();
        for s in &grid {
            let a_s = a.eval(*s).unwrap();
            for (t, conj_t) in grid.iter().zip(&conj_vals) {
                let lhs = s * t;
                let rhs = a_s + conj_t;
                assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-9, "{a}: s={s}, t={t}");
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 1 took {elapsed:.2}s");
    println!("PASS criterion 1: Orlicz engine (Luxemburg/power collapse, round trips, Young's inequality) in {elapsed:.2}s");
}

#[test]
fn criterion_02_bp_classifier_agrees_with_quadrature() {
    let p = 2.0;
    let delta = 0.5;
    let pp = p / (p - 1.0);
    // The log-bump proof's complementary family: t^p / (log(e+t))^{1 + p
    // delta / p'}.
    let paper_case = YoungFunction::power_log(p, -(1.0 + p * delta / pp)).unwrap();
    let instances: Vec<(YoungFunction, f64, Option<f64>, bool)> = vec![
        (YoungFunction::power(p - 0.5).unwrap(), p, None, true),
        (YoungFunction::power(p).unwrap(), p, None, false),
        (paper_case.clone(), p, None, true),
        (paper_case.clone(), p, Some(4.0), true),
        (YoungFunction::power_log(p, -1.0).unwrap(), p, None, false),
        (YoungFunction::power_log(2.0, 1.0).unwrap(), 4.0, None, true),
        (YoungFunction::exp_minus_one(), 10.0, None, false),
        (YoungFunction::power(3.0).unwrap(), 2.0, Some(4.0), false),
    ];
    for (young, pv, qv, expect_member) in &instances {
        let verdict = bp_membership(young, *pv, *qv).unwrap();
        assert_eq!(
            verdict.is_member(),
            *expect_member,
            "{young} vs B_({pv},{qv:?})"
        );
        assert_eq!(
            verdict.is_member(),
            verdict.diagnostics.convergent,
            "classifier/quadrature disagree for {young} vs B_({pv},{qv:?}): {:?}",
            verdict.diagnostics
        );
    }
    println!(
        "PASS criterion 2: B_p/B_(p,q) classifier agrees with quadrature on {} built-in instances",
        instances.len()
    );
}

#[test]
fn criterion_03_sparse_machinery() {
    // Stopping time certifies eta >= 1/2 on 100 random f per dimension.
    for (dim, n, tau) in [(1usize, 256usize, 4.0f64), (2, 64, 8.0)] {
        let d = Domain::new(dim, 1.0, n).unwrap();
        let lat = DyadicLattice::new(d);
        for trial in 0..100u64 {
            let mut rng = trial_rng(300 + dim as u64, trial);
            let heavy: Vec<f64> = (0..d.total_cells())
                .map(|_| {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    (1.0 - u).powf(-1.2) - 1.0
                })
                .collect();
            let f = GridFunction::from_values(d, heavy).unwrap();
            let fam = construct_sparse_family(&f, &lat, tau).unwrap();
            let eta = sparsity_verify(&fam).unwrap();
            assert!(eta >= 0.5, "dim {dim}, trial {trial}: eta {eta}");
        }
    }

    // Dyadic lattice definition properties, exhaustive at N <= 32.
    for n in [8usize, 16, 32] {
        for dim in [1usize, 2] {
            let d = Domain::new(dim, 1.0, n).unwrap();
            let lat = DyadicLattice::new(d);
            let all = enumerate_cubes(&lat, 1).unwrap();
            let root = lat.root();
            for q in &all {
                let addr = lat.address_of(q).unwrap();
                for c in lat.children(addr) {
                    let child = lat.cube(c).unwrap();
                    assert!(q.contains_cube(&child));
                }
                assert!(root.contains_cube(q));
            }
            for cell in 0..d.total_cells() {
                assert!(root.contains_cell(cell));
            }
        }
    }
    println!("PASS criterion 3: stopping-time families certify eta >= 1/2 (100 random f, 1D N=256 and 2D N=64); lattice properties exhaustive at N <= 32");
}

#[test]
fn criterion_04_sparse_domination() {
    let start = Instant::now();
    let d = Domain::new(1, 2.0, 128).unwrap();
    for m in [0u32, 1, 2] {
        let mut ratios = Vec::new();
        for trial in 0..100u64 {
            let mut rng = trial_rng(400 + m as u64, trial);
            let f = band_limited_noise(d, &mut rng, 0.5);
            let b = band_limited_noise(d, &mut rng, 1.0);
            let rep = sparse_domination_check(&f, &b, m, 0.5, 4.0).unwrap();
            assert!(rep.max_ratio.is_finite());
            ratios.push(rep.max_ratio);
        }
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let max = *sorted.last().unwrap();
        assert!(
            max <= pins::DOMINATION_SPREAD * median,
            "m={m}: max {max} vs median {median}"
        );
    }

    // Pointwise reduction inequality, exhaustive at N = 32.
    let d32 = Domain::new(1, 1.0, 32).unwrap();
    let lat = DyadicLattice::new(d32);
    let cubes = enumerate_cubes(&lat, 1).unwrap();
    let f = GridFunction::from_values(d32, random_values(401, 32, 0.0, 1.0)).unwrap();
    let b = GridFunction::from_values(d32, random_values(402, 32, -1.0, 1.0)).unwrap();
    for m in 1..=3u32 {
        for qq in &cubes {
            let cells = qq.cells();
            let n = cells.len() as f64;
            let bq = cells.iter().map(|&i| b.value(i)).sum::<f64>() / n;
            let avg_f = cells.iter().map(|&i| f.value(i).abs()).sum::<f64>() / n;
            let avg_bm = cells
                .iter()
                .map(|&i| (b.value(i) - bq).abs().powi(m as i32) * f.value(i).abs())
                .sum::<f64>()
                / n;
            for &x in &cells {
                let bx = (b.value(x) - bq).abs();
                let rhs = (m as f64 + 1.0) * (bx.powi(m as i32) * avg_f + avg_bm);
                for k in 0..=m {
                    let avg_bk = cells
                        .iter()
                        .map(|&i| (b.value(i) - bq).abs().powi(k as i32) * f.value(i).abs())
                        .sum::<f64>()
                        / n;
                    assert!(bx.powi((m - k) as i32) * avg_bk <= rhs * (1.0 + 1e-12));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "criterion 4 took {elapsed:.2}s");
    println!("PASS criterion 4: sparse domination f-independence (100 seeded pairs, m in 0..=2) and exhaustive pointwise reduction at N=32 in {elapsed:.2}s");
}

#[test]
fn criterion_05_adjoint_identity() {
    let d = Domain::new(1, 1.0, 32).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in 0..=3u32 {
        for trial in 0..13u64 {
            let mut rng = trial_rng(500 + m as u64, trial);
            let fv: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gv: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let bv: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = GridFunction::from_values(d, fv).unwrap();
            let g = GridFunction::from_values(d, gv).unwrap();
            let b = GridFunction::from_values(d, bv).unwrap();
            let defect = adjoint_defect(&f, &g, &b, m, 0.6).unwrap();
            assert!(defect <= 1e-12, "m={m}, trial {trial}: {defect}");
            worst = worst.max(defect);
            count += 1;
        }
    }
    println!("PASS criterion 5: adjoint identity defect <= 1e-12 on {count} instances (worst {worst:.2e})");
}

#[test]
fn criterion_06_closed_form_quadrature_convergence() {
    let mut errs_m0 = Vec::new();
    let mut errs_m1 = Vec::new();
    for n in [128usize, 256, 512] {
        let d = Domain::new(1, 4.0, n).unwrap();
        let f =
            GridFunction::from_fn(d, |x| if x[0] > 0.0 && x[0] < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let b = GridFunction::from_fn(d, |x| x[0]).unwrap();
        let idx = 3 * n / 4; // cell center 2 + h/2
        let x0 = d.cell_center(idx)[0];
        assert!(x0 > 2.0 && x0 < 2.0 + d.h());
        let out0 = commutator(&f, &b, 0, 0.5).unwrap();
        let oracle0 = 2.0 * (x0.sqrt() - (x0 - 1.0).sqrt());
        errs_m0.push((out0.value(idx) - oracle0).abs());
        let out1 = commutator(&f, &b, 1, 0.5).unwrap();
        let oracle1 = (2.0 / 3.0) * (x0.powf(1.5) - (x0 - 1.0).powf(1.5));
        errs_m1.push((out1.value(idx) - oracle1).abs());
    }
    assert!(errs_m0[2] <= 2e-3, "m=0 error at N=512: {}", errs_m0[2]);
    assert!(errs_m1[2] <= 2e-3, "m=1 error at N=512: {}", errs_m1[2]);
    let order = |e: &[f64]| -> f64 {
        let o1 = (e[0] / e[1]).log2();
        let o2 = (e[1] / e[2]).log2();
        o1.min(o2)
    };
    let (o0, o1) = (order(&errs_m0), order(&errs_m1));
    assert!(o0 >= 1.0, "m=0 observed order {o0}; errors {errs_m0:?}");
    assert!(o1 >= 1.0, "m=1 observed order {o1}; errors {errs_m1:?}");
    println!("PASS criterion 6: closed-form quadrature within 2e-3 at N=512 (m0 err {:.2e}, m1 err {:.2e}), observed orders {o0:.2}/{o1:.2}", errs_m0[2], errs_m1[2]);
}

fn sufficiency_scenario(mu: &str, nu: &str) -> Scenario {
    let mut s = Scenario::defaults(ScenarioKind::Sufficiency);
    s.mu = mu.into();
    s.nu = nu.into();
    s.trials = 4;
    s.seed = 700;
    s
}

#[test]
fn criterion_07_sufficiency_structure() {
    let instances = [
        ("const(c=1)", "const(c=1)"),
        ("power(a=0.5)", "power(a=-0.25)"),
        ("power(a=0.3)", "const(c=2)"),
    ];
    for (mu, nu) in &instances {
        let s = sufficiency_scenario(mu, nu);
        let r = run(&s).unwrap();
        assert!(r.passed, "{mu}/{nu}: {:?}", r.checks);
        assert!(r.quantities["bump_sum"].is_finite());
        assert!(r.quantities["r_max"] > 0.0);
        assert!(r.quantities["refinement_drift"] <= s.tol_refine);
    }
    // Constant symbol with m >= 1 gives exactly zero.
    let mut s = sufficiency_scenario("power(a=0.5)", "power(a=-0.25)");
    s.b = "const(c=7)".into();
    let r = run(&s).unwrap();
    assert!(r.passed, "{:?}", r.checks);
    assert_eq!(r.quantities["r_max"], 0.0);
    println!("PASS criterion 7: sufficiency ratios finite and refinement-stable on 3 weight pairs; constant symbol gives R = 0 exactly");
}

#[test]
fn criterion_08_sparse_necessity() {
    let instances = [
        ("const(c=1)", "const(c=1)"),
        ("power(a=0.5)", "power(a=-0.25)"),
        ("power(a=0.3)", "const(c=2)"),
    ];
    let mut worst = 0.0f64;
    for (mu, nu) in &instances {
        let mut s = Scenario::defaults(ScenarioKind::SparseNecessity);
        s.mu = (*mu).into();
        s.nu = (*nu).into();
        s.grid_n = 256;
        s.trials = 4;
        s.seed = 800;
        let r = run(&s).unwrap();
        assert!(r.passed, "{mu}/{nu}: {:?}", r.checks);
        let ratio = r.quantities["max_violation_ratio"];
        assert!(ratio <= 1.05, "{mu}/{nu}: ratio {ratio}");
        worst = worst.max(ratio);
    }
    println!("PASS criterion 8: extremal-function testing inequality holds with ratio <= 1.05 on 3 instances (worst {worst:.4})");
}

#[test]
fn criterion_09_weak_necessity_pieces() {
    let instances = [
        ("const(c=1)", "const(c=1)"),
        ("power(a=0.5)", "power(a=-0.25)"),
        ("power(a=0.3)", "const(c=2)"),
    ];
    let mut g_instances = 0usize;
    for (mu, nu) in &instances {
        let mut s = Scenario::defaults(ScenarioKind::WeakNecessity);
        s.mu = (*mu).into();
        s.nu = (*nu).into();
        s.trials = 4;
        s.seed = 900;
        let r = run(&s).unwrap();
        assert!(r.passed, "{mu}/{nu}: {:?}", r.checks);
        assert!(r.quantities["g_avg_max"] <= pins::G_AVG_BOUND);
        // One g per scanned cube per weight pair.
        g_instances += 63;
        for delta in ["0.25", "0.5", "0.75"] {
            assert!(r.quantities.contains_key(&format!("kolmogorov_{delta}")));
        }
        assert!(r.quantities["llogl_ratio_lo"] >= pins::LLOGL_RATIO_LO);
        assert!(r.quantities["llogl_ratio_hi"] <= pins::LLOGL_RATIO_HI);
    }
    assert!(g_instances >= 50);

    // Kernel separation decay within the pinned window over A in 4..=256.
    let mut s = Scenario::defaults(ScenarioKind::KernelSep);
    s.half_width = 600.0;
    s.grid_n = 16;
    s.alpha = 0.5;
    let r = run(&s).unwrap();
    assert!(r.passed, "{:?}", r.checks);
    println!("PASS criterion 9: g_Q bound on {g_instances} cube instances, Kolmogorov deltas, L(logL) window, kernel decay within factor {} of 1/A", pins::KERNEL_DECAY_WINDOW);
}

#[test]
fn criterion_10_log_bump_domination() {
    let pairs = [
        ("power(a=0.5)", "power(a=-0.4)"),
        ("power(a=0.3)", "const(c=2)"),
        ("const(c=1)", "power(a=-0.25)"),
    ];
    for (mu_spec, nu_spec) in &pairs {
        let d = Domain::new(1, 1.0, 128).unwrap();
        let cubes = enumerate_cubes(&DyadicLattice::new(d), 4).unwrap();
        let mu = fracbump::weights::parse_weight(mu_spec)
            .unwrap()
            .realize(d)
            .unwrap();
        let nu = fracbump::weights::parse_weight(nu_spec)
            .unwrap()
            .realize(d)
            .unwrap();
        let cmp = bump_log_comparison(&mu, &nu, 2.0, 4.0, 0.5, 1, 0.5, &cubes).unwrap();
        let mut strict = 0usize;
        for ((t1, t2), pr) in cmp
            .term1
            .per_cube
            .iter()
            .zip(&cmp.term2.per_cube)
            .zip(&cmp.doubled.per_cube)
        {
            assert!(
                t1.value <= pr.value * (1.0 + 1e-9),
                "{mu_spec}/{nu_spec} cube {}",
                t1.cube
            );
            assert!(
                t2.value <= pr.value * (1.0 + 1e-9),
                "{mu_spec}/{nu_spec} cube {}",
                t2.cube
            );
            if t1.value < pr.value * (1.0 - 1e-12) && t2.value < pr.value * (1.0 - 1e-12) {
                strict += 1;
            }
        }
        let frac = strict as f64 / cmp.term1.per_cube.len() as f64;
        assert!(frac >= 0.9, "{mu_spec}/{nu_spec}: strict fraction {frac}");
    }
    println!("PASS criterion 10: both log-bump terms dominated per cube by the doubled-exponent product (m=1), strict on >= 90% of cubes, 3 weight pairs");
}

#[test]
fn criterion_11_bloom_converse() {
    for (m, eta_exp) in [(1u32, 0.25f64), (2, 0.125)] {
        let mut s = Scenario::defaults(ScenarioKind::Bloom);
        s.grid_n = 256;
        s.m = m;
        s.lambda = "power(a=0.25)".into();
        s.mu = "power(a=0.5)".into();
        s.eta_prime = Some(format!("powerabs(a={eta_exp})"));
        s.epsilon = 0.2;
        s.trials = 4;
        s.seed = 1100;
        let r = run(&s).unwrap();
        assert!(r.passed, "m={m}: {:?}", r.checks);
        // Exact recovery of the canonical quotient for power weights.
        assert!((r.quantities["candidate_ratio_sup"] - 1.0).abs() <= 1e-10);
        assert!((r.quantities["candidate_ratio_inf"] - 1.0).abs() <= 1e-10);
        assert!(r.quantities["pointwise_identity_deviation"] <= 1e-10);
        // 20 ball pairs under the pinned constant.
        assert_eq!(r.quantities["ball_pairs"], 20.0);
        assert!(r.quantities["bloom_pair_constant"] <= pins::BLOOM_PAIR_CONSTANT);
        // The epsilon = 0.2 perturbation must violate the pointwise bound.
        assert!(r.quantities["perturbed_pointwise_max"] > 1.0 + s.tol_ineq);
    }
    println!("PASS criterion 11: Bloom converse — exact quotient recovery (1e-10), disjoint-ball inequality on 20 pairs, eps = 0.2 perturbation detected");
}

#[test]
fn criterion_12_verify_all_deterministic() {
    let start = Instant::now();
    let mut s = Scenario::defaults(ScenarioKind::VerifyAll);
    s.seed = 17;
    let first = run(&s).unwrap();
    assert!(first.passed, "{:?}", first.checks);
    let second = run(&s).unwrap();
    let a = result_to_json(&first).unwrap();
    let b = result_to_json(&second).unwrap();
    assert_eq!(a, b, "verify-all results differ between runs");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 900.0, "verify-all pair took {elapsed:.2}s");
    println!("PASS criterion 12: verify-all deterministic across 2 runs with seed 17, {elapsed:.2}s for both");
}
