//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them).

mod common;

use std::time::Instant;

use mixlab_core::bounds::finite_class_bound;
use mixlab_core::erm::{
    bound_violation_rate, simulate, trial_excess_risks, BoundKind, RateFit, SimConfig, TieBreak,
};
use mixlab_core::mixability::{
    bernstein_constant, check_weak_mixability, eta_root, eta_star, hyper_perturb, EtaResult,
};
use mixlab_core::moment::{
    certificate_bound, dual_certificate, feasible_mean_bound, grid_lp_solve, scale_instance,
    unscale_instance, verify_certificate, LpStatus, MomentInstance, Sense,
};
use mixlab_core::problem::ExcessLossRv;
use mixlab_core::simplex::{maximize_equality_form, SimplexOutcome};

use common::{bernoulli_pair_problem, random_interior_instance, random_problem, rng, staircase_problem};
use rand::Rng;

#[test]
fn criterion_01_eta_root_and_hyper_perturb_exactness() {
    let start = Instant::now();

    // Root of 0.25 e^η + 0.75 e^{−η} = 1: quadratic in e^η with roots {1, 3}.
    let z = ExcessLossRv::new(vec![(-1.0, 0.25), (1.0, 0.75)], 1.0).unwrap();
    let eta = match eta_root(&z) {
        EtaResult::Root { eta } => eta,
        other => panic!("expected a root, got {other:?}"),
    };
    assert!((eta - 3.0f64.ln()).abs() < 1e-9, "eta = {eta}");

    // Perturbed hyper-concentrated variable: 0.005 y² − 0.5 y + 0.495 = 0
    // has roots {1, 99}.
    let z = ExcessLossRv::new(vec![(0.0, 0.5), (1.0, 0.5)], 1.0).unwrap();
    let hp = hyper_perturb(&z, 0.01, 1.0).unwrap();
    assert!((hp.eta - 99.0f64.ln()).abs() < 1e-9, "eta = {}", hp.eta);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "acceptance 01 PASS: eta_root = {eta:.12} (ln 3), hyper_perturb eta = {:.12} (ln 99), {elapsed:?}",
        hp.eta
    );
}

#[test]
fn criterion_02_feasibility_boundary_lp() {
    let b = feasible_mean_bound(3.0f64.ln());
    assert!((b - 0.5).abs() < 1e-12, "bound = {b}");

    let inst = MomentInstance::new(3.0f64.ln(), -0.5, 1.0).unwrap();
    let sol = grid_lp_solve(&inst, 2001, Sense::MaxMgf);
    assert_eq!(sol.status, LpStatus::Optimal);
    let target = 3.0f64.sqrt() / 2.0;
    assert!((sol.value - target).abs() < 1e-9, "value = {}", sol.value);
    assert_eq!(sol.support.len(), 2, "support = {:?}", sol.support);
    assert_eq!(sol.support[0].0, -1.0);
    assert_eq!(sol.support[1].0, 1.0);
    assert!((sol.support[0].1 - 0.75).abs() < 1e-9);
    assert!((sol.support[1].1 - 0.25).abs() < 1e-9);
    println!(
        "acceptance 02 PASS: bound(ln 3) = {b:.15}, LP value = {:.12} (√3/2), support {:?}",
        sol.value, sol.support
    );
}

#[test]
fn criterion_03_certificate_suite_over_eta_grid() {
    let start = Instant::now();
    let mut worst_min = f64::INFINITY;
    for i in 0..200 {
        let eta = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
        let cert = dual_certificate(eta);
        let check = verify_certificate(&cert, eta, 10_000);
        assert!(check.min_u >= -1e-9, "min_u = {} at eta = {eta}", check.min_u);
        assert!(
            check.u_at_minus_one >= -1e-9,
            "u(-1) = {} at eta = {eta}",
            check.u_at_minus_one
        );
        worst_min = worst_min.min(check.min_u);
    }
    let check_at_one = verify_certificate(&dual_certificate(1.0), 1.0, 10_000);
    assert!(
        (check_at_one.u_at_minus_one - 0.011190).abs() < 1e-5,
        "u_1(-1) = {}",
        check_at_one.u_at_minus_one
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "acceptance 03 PASS: 200 log-grid certificates valid (worst grid min {worst_min:.3e}), u_1(-1) = {:.6}, {elapsed:?}",
        check_at_one.u_at_minus_one
    );
}

#[test]
fn criterion_04_certificate_soundness_on_randomized_instances() {
    let start = Instant::now();
    let mut r = rng(0x5EED_0004);
    let m = 2001usize;
    let slack = 2.0 / m as f64;
    let mut worst_gap = f64::NEG_INFINITY;
    for trial in 0..1000 {
        let inst = random_interior_instance(&mut r, 0.9);
        let a_over_n = -inst.mean;
        let bound = certificate_bound(inst.eta, a_over_n).unwrap();
        let sol = grid_lp_solve(&inst, m, Sense::MaxMgf);
        assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}: {inst:?}");
        let gap = sol.value - bound.value;
        worst_gap = worst_gap.max(gap);
        assert!(
            sol.value <= bound.value + slack,
            "trial {trial}: value {} exceeds bound {} + {slack} ({inst:?})",
            sol.value,
            bound.value
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "acceptance 04 PASS: 1000 interior instances, LP value ≤ certificate bound + 2/m (worst slack used {worst_gap:.3e}), {elapsed:?}"
    );
}

#[test]
fn criterion_05_change_of_scale() {
    let mut r = rng(0x5EED_0005);
    let m = 2001usize;
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let v = [0.5, 2.0, 5.0][trial % 3];
        let unit = random_interior_instance(&mut r, 0.9);
        let inst = unscale_instance(&unit, v);
        let scaled = scale_instance(&inst);
        let a = grid_lp_solve(&inst, m, Sense::MaxMgf);
        let b = grid_lp_solve(&scaled, m, Sense::MaxMgf);
        assert_eq!(a.status, LpStatus::Optimal, "trial {trial}");
        assert_eq!(b.status, LpStatus::Optimal, "trial {trial}");
        let diff = (a.value - b.value).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-2, "trial {trial}: |{} - {}| = {diff}", a.value, b.value);
    }
    println!("acceptance 05 PASS: 200 scaled instances agree (worst |Δvalue| = {worst:.3e})");
}

#[test]
fn criterion_06_erm_exact_oracle_and_violations() {
    let problem = bernoulli_pair_problem();

    // Exact binomial oracle at n = 3: ERM errs iff at most one of three
    // outcomes equals 1, probability C(3,0)·0.25³ + C(3,1)·0.75·0.25² =
    // 0.15625. Ties are impossible at odd n.
    let oracle = 0.25f64.powi(3) + 3.0 * 0.75 * 0.25 * 0.25;
    assert_eq!(oracle, 0.15625);
    let trials = 100_000usize;
    let excess = trial_excess_risks(&problem, 3, trials, 0x5EED_0006, TieBreak::FirstByName).unwrap();
    let rate = excess.iter().filter(|&&e| e > 0.0).count() as f64 / trials as f64;
    assert!((rate - oracle).abs() <= 0.005, "empirical error rate {rate}");

    // Bound violations at n = 1000, δ = 0.05 over 10⁴ trials.
    let report = bound_violation_rate(
        &problem,
        1000,
        0.05,
        10_000,
        BoundKind::FiniteThm4,
        0x5EED_0606,
        TieBreak::FirstByName,
    )
    .unwrap();
    assert!(report.rate <= 0.05, "violation rate {}", report.rate);
    println!(
        "acceptance 06 PASS: ERM error rate {rate:.5} vs exact 0.15625; finite-class bound violation rate {} ≤ 0.05 (bound {:.5})",
        report.rate, report.bound
    );
}

#[test]
fn criterion_07_fast_rate_reproduction() {
    let start = Instant::now();
    let problem = staircase_problem();
    let profile = eta_star(&problem).unwrap();
    assert!(profile.is_mixable());

    let n_values: Vec<usize> = (5..=14).map(|k| 1usize << k).collect();
    let config = SimConfig::new(n_values, 10_000, 0x5EED_0007);
    let report = simulate(&problem, &config).unwrap();

    let slope = match report.rate_fit {
        RateFit::Fitted { slope, .. } => slope,
        RateFit::Unavailable { usable_points } => {
            panic!("rate fit unavailable ({usable_points} usable points)")
        }
    };
    assert!(slope <= -0.85, "fitted slope {slope}");

    // The closed-form curve at the δ = 0.5 median reading dominates the
    // empirical mean curve pointwise.
    for row in &report.per_n {
        let bound = finite_class_bound(
            problem.loss_bound(),
            profile.eta_star,
            problem.hypotheses().len(),
            0.5,
            row.n,
        )
        .unwrap();
        assert!(
            row.mean_excess_risk <= bound,
            "n = {}: mean {} exceeds bound {bound}",
            row.n,
            row.mean_excess_risk
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "acceptance 07 PASS: fitted slope {slope:.3} ≤ -0.85 over n = 32..16384, bound curve dominates pointwise, {elapsed:?}"
    );
}

#[test]
fn criterion_08_weak_mixability_formula_and_checker() {
    // Formula behavior on a grid: decreasing in n; decreasing in κ once
    // η₀ n > 1.
    use mixlab_core::bounds::weak_mix_bound;
    for eta0 in [0.5, 1.0, 2.0] {
        for kappa in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut prev = f64::INFINITY;
            for n in [10usize, 30, 100, 300, 1000] {
                let b = weak_mix_bound(1.0, kappa, eta0, 10, 0.05, n).unwrap();
                assert!(b < prev, "not decreasing in n at kappa={kappa}");
                prev = b;
            }
        }
        for n in [10usize, 100, 1000] {
            if eta0 * n as f64 > 1.0 {
                let mut prev = f64::INFINITY;
                for kappa in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let b = weak_mix_bound(1.0, kappa, eta0, 10, 0.05, n).unwrap();
                    assert!(b <= prev + 1e-15, "not decreasing in kappa at n={n}");
                    prev = b;
                }
            }
        }
    }

    // Checker agreement with η* at κ = 1 on 100 random problems.
    let mut r = rng(0x5EED_0008);
    let mut checked = 0;
    while checked < 100 {
        let problem = random_problem(&mut r);
        let profile = match eta_star(&problem) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let eta0 = if profile.eta_star.is_finite() {
            // Stay away from the knife edge at η₀ = η*.
            let factor: f64 = [0.3, 0.7, 1.5, 4.0][checked % 4];
            profile.eta_star * factor
        } else {
            10f64.powi((checked % 5) as i32)
        };
        let report = check_weak_mixability(&problem, 1.0, eta0).unwrap();
        let expected = eta0 <= profile.eta_star;
        assert_eq!(
            report.holds, expected,
            "disagreement at eta0 = {eta0}, eta_star = {}",
            profile.eta_star
        );
        checked += 1;
    }
    println!("acceptance 08 PASS: formula monotone on grid; checker = (η* ≥ η₀) on 100 random problems");
}

#[test]
fn criterion_09_non_unique_minimizer_diagnostic() {
    use mixlab_core::diagnostics::diagnose;
    use mixlab_core::problem::{Atom, Hypothesis, LearningProblem, Loss};

    // Absolute loss, Y ~ Bern(1/2), {f≡0, f≡1}: not mixable on G_{0.5},
    // multiplicity 2.
    let p = LearningProblem::new(
        vec![
            Atom { x: "x".into(), y: 0.0, p: 0.5 },
            Atom { x: "x".into(), y: 1.0, p: 0.5 },
        ],
        Loss::Absolute,
        vec![
            Hypothesis::constant("f0", &["x"], 0.0),
            Hypothesis::constant("f1", &["x"], 1.0),
        ],
        1.0,
    )
    .unwrap();
    let report = diagnose(&p, &[0.5]).unwrap();
    assert!(!report.rows[0].mixable);
    assert_eq!(report.rows[0].minimizer_multiplicity, 2);

    // Squared loss, Y ~ Bern(3/4), {f≡1, f≡0}: mixable, multiplicity 1.
    let p = bernoulli_pair_problem();
    let report2 = diagnose(&p, &[0.5]).unwrap();
    assert!(report2.rows[0].mixable);
    assert_eq!(report2.rows[0].minimizer_multiplicity, 1);
    assert!(report2.rows[0].eta_star > 0.0);
    println!(
        "acceptance 09 PASS: absolute-loss pair → non-mixable, multiplicity 2; squared-loss pair → mixable (η* = {:.6}), multiplicity 1",
        report2.rows[0].eta_star
    );
}

#[test]
fn criterion_10_dual_primal_consistency() {
    let start = Instant::now();
    let mut r = rng(0x5EED_0004); // same instance set as criterion 04
    let m = 2001usize;
    let mut worst_diff = 0.0f64;
    for trial in 0..1000 {
        let inst = random_interior_instance(&mut r, 0.9);
        let sol = grid_lp_solve(&inst, m, Sense::MaxMgf);
        assert_eq!(sol.status, LpStatus::Optimal);

        // Cross-check simplex on the same discretization.
        let grid: Vec<f64> = (0..m)
            .map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64)
            .collect();
        let objective: Vec<f64> = grid.iter().map(|&x| (inst.eta / 2.0 * x).exp()).collect();
        let a = vec![
            vec![1.0; m],
            grid.clone(),
            grid.iter().map(|&x| (inst.eta * x).exp()).collect(),
        ];
        let b = vec![1.0, inst.mean, 1.0];
        let value = match maximize_equality_form(&objective, &a, &b) {
            SimplexOutcome::Optimal { value, .. } => value,
            other => panic!("trial {trial}: simplex returned {other:?} for {inst:?}"),
        };
        let diff = (value - sol.value).abs();
        worst_diff = worst_diff.max(diff);
        assert!(diff <= 1e-8, "trial {trial}: enumeration {} vs simplex {value}", sol.value);

        // Weak duality against the closed-form certificate, allowing only
        // for the LP's own constraint tolerance.
        let cert = dual_certificate(inst.eta);
        let dual_value = cert.c0 + cert.c2 - (-inst.mean) * inst.eta * cert.c1;
        assert!(
            sol.value <= dual_value + 1e-6,
            "trial {trial}: weak duality violated ({} > {dual_value})",
            sol.value
        );
    }

    // Infeasible instances classify identically under both solvers.
    for trial in 0..100 {
        let eta = (r.gen_range(0.05f64.ln()..20f64.ln())).exp();
        let mean = -feasible_mean_bound(eta) * r.gen_range(1.05..1.4);
        if mean < -1.0 {
            continue;
        }
        let inst = MomentInstance::new(eta, mean, 1.0).unwrap();
        let sol = grid_lp_solve(&inst, 501, Sense::MaxMgf);
        assert_eq!(sol.status, LpStatus::Infeasible, "trial {trial}: {inst:?}");
        let grid: Vec<f64> = (0..501).map(|i| -1.0 + 2.0 * i as f64 / 500.0).collect();
        let objective: Vec<f64> = grid.iter().map(|&x| (inst.eta / 2.0 * x).exp()).collect();
        let a = vec![
            vec![1.0; 501],
            grid.clone(),
            grid.iter().map(|&x| (inst.eta * x).exp()).collect(),
        ];
        let b = vec![1.0, inst.mean, 1.0];
        assert_eq!(
            maximize_equality_form(&objective, &a, &b),
            SimplexOutcome::Infeasible,
            "trial {trial}: {inst:?}"
        );
    }
    let elapsed = start.elapsed();
    println!(
        "acceptance 10 PASS: enumeration = simplex to 1e-8 on 1000 instances (worst |Δ| = {worst_diff:.3e}); weak duality intact; infeasibility classification agrees on 100 instances, {elapsed:?}"
    );
}

#[test]
fn criterion_extra_bernstein_mixability_direction() {
    // Evidence check promised alongside the criteria: finite B at β = 1
    // comes with η* > 0 on 500 random problems.
    let mut r = rng(0x5EED_0500);
    let mut checked = 0;
    while checked < 500 {
        let problem = random_problem(&mut r);
        let fit = match bernstein_constant(&problem, 1.0) {
            Ok(fit) => fit,
            Err(_) => continue,
        };
        let profile = eta_star(&problem).unwrap();
        assert!(
            profile.eta_star > 0.0,
            "finite B = {} but eta_star = {}",
            fit.b,
            profile.eta_star
        );
        checked += 1;
    }
    println!("acceptance extra PASS: B(β=1) finite ⇒ η* > 0 on 500 random problems");
}
