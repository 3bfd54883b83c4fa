//! Shared generators for the randomized suites. Everything is seeded, so the
//! suites are reproducible run to run.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mixlab_core::moment::{feasible_mean_bound, MomentInstance};
use mixlab_core::problem::{Atom, Hypothesis, LearningProblem, Loss};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Instance strictly inside the feasible region: η log-uniform in
/// [0.05, 20], target mean at a uniform fraction (≤ `max_ratio`) of the
/// boundary.
pub fn random_interior_instance(rng: &mut ChaCha8Rng, max_ratio: f64) -> MomentInstance {
    let eta = (rng.gen_range(0.05f64.ln()..20f64.ln())).exp();
    let ratio = rng.gen_range(0.05..max_ratio);
    let mean = -ratio * feasible_mean_bound(eta);
    MomentInstance::new(eta, mean, 1.0).unwrap()
}

/// Random finite problem: one to three input labels, Bernoulli-style outputs
/// with random weights, squared or absolute loss, predictions in [0, 1], so
/// the loss bound 1 always holds.
pub fn random_problem(rng: &mut ChaCha8Rng) -> LearningProblem {
    loop {
        let n_labels = rng.gen_range(1..=3usize);
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for label in 0..n_labels {
            for y in [0.0, 1.0] {
                atoms.push((format!("x{label}"), y));
                weights.push(rng.gen_range(0.05..1.0f64));
            }
        }
        let total: f64 = weights.iter().sum();
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .zip(&weights)
            .map(|((x, y), &w)| Atom { x, y, p: w / total })
            .collect();

        let loss = if rng.gen_bool(0.5) { Loss::Squared } else { Loss::Absolute };
        let labels: Vec<String> = (0..n_labels).map(|l| format!("x{l}")).collect();
        let label_refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        let n_hyp = rng.gen_range(2..=5usize);
        let hypotheses: Vec<Hypothesis> = (0..n_hyp)
            .map(|i| {
                let mut h = Hypothesis::constant(&format!("f{i:02}"), &label_refs, 0.0);
                for label in &labels {
                    h.values.insert(label.clone(), rng.gen_range(0.0..1.0));
                }
                h
            })
            .collect();

        let problem = LearningProblem::new(atoms, loss, hypotheses, 1.0).unwrap();
        if !problem.minimizers(0.0).non_unique {
            return problem;
        }
    }
}

/// The ten-hypothesis mixable staircase: Bern(3/4) outputs under squared
/// loss, predictions walking toward the Bayes-optimal 0.75 in geometric
/// steps, so the excess-risk levels are 4^{−k} for k = 1..9.
pub fn staircase_problem() -> LearningProblem {
    let atoms = vec![
        Atom { x: "x".into(), y: 0.0, p: 0.25 },
        Atom { x: "x".into(), y: 1.0, p: 0.75 },
    ];
    let mut hypotheses = vec![Hypothesis::constant("f00", &["x"], 0.75)];
    for k in 1..=9 {
        let v = 0.75 - 2.0f64.powi(-k);
        hypotheses.push(Hypothesis::constant(&format!("f{k:02}"), &["x"], v));
    }
    LearningProblem::new(atoms, Loss::Squared, hypotheses, 1.0).unwrap()
}

/// Bern(3/4) squared-loss pair {f≡1, f≡0}: the worked two-hypothesis
/// problem with η* = ln 3 and exact ERM error probabilities at small n.
pub fn bernoulli_pair_problem() -> LearningProblem {
    let atoms = vec![
        Atom { x: "x".into(), y: 0.0, p: 0.25 },
        Atom { x: "x".into(), y: 1.0, p: 0.75 },
    ];
    let hypotheses = vec![
        Hypothesis::constant("f1", &["x"], 1.0),
        Hypothesis::constant("f0", &["x"], 0.0),
    ];
    LearningProblem::new(atoms, Loss::Squared, hypotheses, 1.0).unwrap()
}
