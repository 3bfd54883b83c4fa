//! End-to-end walk through the worked two-hypothesis problem: mixability
//! profile, the matching moment-problem instance, its certificate bound, and
//! a small replication study.
//!
//! Run with `cargo run -p mixlab-core --example worked_pair`.

use mixlab_core::bounds::finite_class_bound;
use mixlab_core::erm::{simulate, RateFit, SimConfig};
use mixlab_core::mixability::eta_star;
use mixlab_core::moment::{
    certificate_bound, feasible_mean_bound, grid_lp_solve, MomentInstance, Sense,
};
use mixlab_core::problem::{Atom, Hypothesis, LearningProblem, Loss};

fn main() {
    // Y ~ Bern(3/4) with squared loss over the constants {1, 0}.
    let problem = LearningProblem::new(
        vec![
            Atom { x: "x".into(), y: 0.0, p: 0.25 },
            Atom { x: "x".into(), y: 1.0, p: 0.75 },
        ],
        Loss::Squared,
        vec![
            Hypothesis::constant("f1", &["x"], 1.0),
            Hypothesis::constant("f0", &["x"], 0.0),
        ],
        1.0,
    )
    .unwrap();

    let profile = eta_star(&problem).unwrap();
    println!("designated minimizer: {}", profile.f_star);
    println!("eta_star = {} (ln 3 = {})", profile.eta_star, 3.0f64.ln());

    // A target mean halfway into the feasible region at that eta.
    let a_over_n = 0.5 * feasible_mean_bound(profile.eta_star);
    let instance = MomentInstance::new(profile.eta_star, -a_over_n, 1.0).unwrap();
    let solution = grid_lp_solve(&instance, 2001, Sense::MaxMgf);
    let bound = certificate_bound(profile.eta_star, a_over_n).unwrap();
    println!(
        "moment problem at mean {:.6}: max exponential moment {:.9} <= certificate {:.9}",
        instance.mean, solution.value, bound.value
    );

    // Replicated ERM: the excess risk collapses as n grows.
    let config = SimConfig::new(vec![16, 64, 256, 1024], 2000, 7);
    let report = simulate(&problem, &config).unwrap();
    for row in &report.per_n {
        let closed_form = finite_class_bound(1.0, profile.eta_star, 2, 0.05, row.n).unwrap();
        println!(
            "n = {:4}: mean excess risk {:.6}, closed-form bound {:.6}, eps-good rate {:.3}",
            row.n, row.mean_excess_risk, closed_form, row.epsilon_good_rate
        );
    }
    if let RateFit::Fitted { slope, r2, .. } = report.rate_fit {
        println!("log-log rate fit: slope {slope:.3}, r2 {r2:.3}");
    }
}
