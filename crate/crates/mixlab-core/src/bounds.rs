//! Closed-form excess-risk bound evaluators and the greedy ε-net used by the
//! covering-number machinery.
//!
//! Every numeric constant lives in [`constants`] and is transcribed exactly
//! once; the test suites re-derive each formula independently (second
//! transcription) and compare at 1e−12 relative.

use serde::Serialize;
use thiserror::Error;

use crate::problem::{LearningProblem, ProblemError};

/// Single source of truth for the bound constants.
pub mod constants {
    /// Leading factor of the finite-class excess-risk bound.
    pub const FINITE_CLASS_FACTOR: f64 = 6.0;
    /// Leading factor of the weak-mixability bound.
    pub const WEAK_MIX_FACTOR: f64 = 6.0;
    /// Factor on the mixability branch of the parametric-class bound.
    pub const VC_MIXABILITY_FACTOR: f64 = 8.0;
    /// Factor on the localization branch of the parametric-class bound.
    pub const VC_LOCALIZATION_FACTOR: f64 = 2.0;
    /// Leading covering term of the localization bound.
    pub const LOCALIZATION_LEAD: f64 = 1080.0;
    /// Square-root cross term of the localization bound.
    pub const LOCALIZATION_CROSS: f64 = 90.0;
    /// Leading covering term of the local-analysis bound.
    pub const LOCAL_ANALYSIS_LEAD: f64 = 990.0;
    /// Inner covering factor under the local-analysis square root.
    pub const LOCAL_ANALYSIS_INNER: f64 = 3960.0;
}

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("precondition violated: {condition}")]
    Precondition { condition: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn require(ok: bool, condition: impl Into<String>) -> Result<(), BoundsError> {
    if ok {
        Ok(())
    } else {
        Err(BoundsError::Precondition { condition: condition.into() })
    }
}

/// Finite-class excess-risk bound at confidence 1 − δ:
/// `6 max{V, 1/η*} (log 1/δ + log N) / n`.
pub fn finite_class_bound(
    v: f64,
    eta_star: f64,
    n_class: usize,
    delta: f64,
    n: usize,
) -> Result<f64, BoundsError> {
    require(v > 0.0, format!("loss bound V must be positive, got {v}"))?;
    require(eta_star > 0.0, format!("eta_star must be positive, got {eta_star}"))?;
    require(n_class >= 1, "class size N must be at least 1")?;
    require(delta > 0.0 && delta <= 1.0, format!("delta must be in (0, 1], got {delta}"))?;
    require(n >= 1, "sample size n must be at least 1")?;
    let scale = v.max(1.0 / eta_star);
    Ok(constants::FINITE_CLASS_FACTOR * scale * ((1.0 / delta).ln() + (n_class as f64).ln())
        / n as f64)
}

/// Weak-mixability excess-risk bound:
/// `6 (log 1/δ + log N) / (η₀ n)^{1/(2−κ)}`, valid once
/// `n ≥ η₀⁻¹ V^{(1−κ)/(2−κ)}`.
pub fn weak_mix_bound(
    v: f64,
    kappa: f64,
    eta0: f64,
    n_class: usize,
    delta: f64,
    n: usize,
) -> Result<f64, BoundsError> {
    require(v > 0.0, format!("loss bound V must be positive, got {v}"))?;
    require((0.0..=1.0).contains(&kappa), format!("kappa must be in [0, 1], got {kappa}"))?;
    require(eta0 > 0.0, format!("eta0 must be positive, got {eta0}"))?;
    require(n_class >= 1, "class size N must be at least 1")?;
    require(delta > 0.0 && delta <= 1.0, format!("delta must be in (0, 1], got {delta}"))?;
    let n_min = v.powf((1.0 - kappa) / (2.0 - kappa)) / eta0;
    require(
        n as f64 >= n_min,
        format!("sample size n = {n} is below the minimum {n_min} for kappa = {kappa}, eta0 = {eta0}"),
    )?;
    Ok(constants::WEAK_MIX_FACTOR * ((1.0 / delta).ln() + (n_class as f64).ln())
        / (eta0 * n as f64).powf(1.0 / (2.0 - kappa)))
}

/// Which branch of the parametric-class bound dominated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VcBranch {
    Mixability,
    Localization,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VcBound {
    pub value: f64,
    pub branch: VcBranch,
    /// `8 max{V, 1/η*} (C log(Kn) + log 2/δ) / n`.
    pub mixability_branch: f64,
    /// `2V (1080 C log(2Kn) + 90 √((log 2/δ) C log(2Kn)) + log 2e/δ) / n`.
    pub localization_branch: f64,
}

/// Excess-risk bound for classes with covering numbers `(K/u)^C`: the larger
/// of the mixability and localization branches, plus `1/n`. The printed
/// formula mixes `Kn` and `2Kn` across branches; the evaluator follows it
/// verbatim rather than symmetrizing.
pub fn vc_type_bound(
    v: f64,
    eta_star: f64,
    c: f64,
    k: f64,
    delta: f64,
    n: usize,
) -> Result<VcBound, BoundsError> {
    require(v >= 1.0, format!("loss bound V must be at least 1, got {v}"))?;
    require(eta_star > 0.0, format!("eta_star must be positive, got {eta_star}"))?;
    require(c >= 1.0, format!("covering exponent C must be at least 1, got {c}"))?;
    require(k >= 1.0, format!("covering constant K must be at least 1, got {k}"))?;
    require(delta > 0.0 && delta <= 0.5, format!("delta must be in (0, 1/2], got {delta}"))?;
    require(n >= 5, format!("sample size n must be at least 5, got {n}"))?;
    let nf = n as f64;
    let log_2_delta = (2.0 / delta).ln();
    let mixability = constants::VC_MIXABILITY_FACTOR
        * v.max(1.0 / eta_star)
        * (c * (k * nf).ln() + log_2_delta)
        / nf;
    let cover = c * (2.0 * k * nf).ln();
    let localization = constants::VC_LOCALIZATION_FACTOR
        * v
        * (constants::LOCALIZATION_LEAD * cover
            + constants::LOCALIZATION_CROSS * (log_2_delta * cover).sqrt()
            + (2.0 * std::f64::consts::E / delta).ln())
        / nf;
    let (value, branch) = if mixability >= localization {
        (mixability + 1.0 / nf, VcBranch::Mixability)
    } else {
        (localization + 1.0 / nf, VcBranch::Localization)
    };
    Ok(VcBound { value, branch, mixability_branch: mixability, localization_branch: localization })
}

/// Localization term at confidence 1 − δ:
/// `V/n (1080 C log(2Kn) + 90 √((log 2/δ) C log(2Kn)) + log 2e/δ)`.
pub fn localization_bound(
    c: f64,
    k: f64,
    delta: f64,
    n: usize,
    v: f64,
) -> Result<f64, BoundsError> {
    require(c >= 1.0, format!("covering exponent C must be at least 1, got {c}"))?;
    require(k >= 1.0, format!("covering constant K must be at least 1, got {k}"))?;
    require(delta > 0.0 && delta <= 0.5, format!("delta must be in (0, 1/2], got {delta}"))?;
    require(n >= 4, format!("sample size n must be at least 4, got {n}"))?;
    require(v > 0.0, format!("loss bound V must be positive, got {v}"))?;
    let cover = c * (2.0 * k * n as f64).ln();
    Ok(v / n as f64
        * (constants::LOCALIZATION_LEAD * cover
            + constants::LOCALIZATION_CROSS * ((2.0 / delta).ln() * cover).sqrt()
            + (2.0 * std::f64::consts::E / delta).ln()))
}

/// Local-analysis bound at confidence 1 − e^{−y}:
/// `(990 C log(2Kn) + √(2y(1 + 3960 C log(2Kn))) + 2y/3 + 1) / n`.
pub fn local_analysis_bound(c: f64, k: f64, y: f64, n: usize) -> Result<f64, BoundsError> {
    require(c >= 1.0, format!("covering exponent C must be at least 1, got {c}"))?;
    require(k >= 1.0, format!("covering constant K must be at least 1, got {k}"))?;
    require(y > 0.0, format!("tail parameter y must be positive, got {y}"))?;
    require(n >= 4, format!("sample size n must be at least 4, got {n}"))?;
    let cover = c * (2.0 * k * n as f64).ln();
    Ok((constants::LOCAL_ANALYSIS_LEAD * cover
        + (2.0 * y * (1.0 + constants::LOCAL_ANALYSIS_INNER * cover)).sqrt()
        + 2.0 * y / 3.0
        + 1.0)
        / n as f64)
}

/// Expected-supremum bound `990 C V log(2Kn) / n`.
pub fn esup_bound(c: f64, k: f64, v: f64, n: usize) -> Result<f64, BoundsError> {
    require(c >= 1.0, format!("covering exponent C must be at least 1, got {c}"))?;
    require(k >= 1.0, format!("covering constant K must be at least 1, got {k}"))?;
    require(v >= 1.0, format!("loss bound V must be at least 1, got {v}"))?;
    require(n >= 4, format!("sample size n must be at least 4, got {n}"))?;
    Ok(constants::LOCAL_ANALYSIS_LEAD * c * v * (2.0 * k * n as f64).ln() / n as f64)
}

/// Metric for the ε-net construction.
pub enum NetMetric<'a> {
    /// `L2(P)` over the problem's input marginal.
    L2P,
    /// Empirical `L2(P_n)` over the inputs of the given sample.
    L2Pn(&'a [(String, f64)]),
}

/// A proper greedy cover of the hypothesis class together with its metric
/// projection.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonNet {
    /// Indices of the net elements (a subset of the class), in insertion
    /// order; the first hypothesis seeds the cover.
    pub centers: Vec<usize>,
    /// For each hypothesis, the index of its nearest net element (ties go to
    /// the earliest-inserted center).
    pub projection: Vec<usize>,
    /// Distance of each hypothesis to its projection.
    pub distances: Vec<f64>,
}

fn l2_distance(
    problem: &LearningProblem,
    metric: &NetMetric,
    a: usize,
    b: usize,
) -> Result<f64, BoundsError> {
    let ha = &problem.hypotheses()[a];
    let hb = &problem.hypotheses()[b];
    let mut total = 0.0;
    match metric {
        NetMetric::L2P => {
            for (label, p) in problem.input_marginal() {
                let d = ha.prediction(label).unwrap() - hb.prediction(label).unwrap();
                total += p * d * d;
            }
        }
        NetMetric::L2Pn(sample) => {
            if sample.is_empty() {
                return Err(BoundsError::Precondition {
                    condition: "empirical metric needs a nonempty sample".into(),
                });
            }
            for (x, _) in *sample {
                let pa = ha.prediction(x).ok_or_else(|| ProblemError::UndefinedLabel {
                    hypothesis: ha.name.clone(),
                    label: x.clone(),
                })?;
                let pb = hb.prediction(x).ok_or_else(|| ProblemError::UndefinedLabel {
                    hypothesis: hb.name.clone(),
                    label: x.clone(),
                })?;
                let d = pa - pb;
                total += d * d;
            }
            total /= sample.len() as f64;
        }
    }
    Ok(total.sqrt())
}

/// Greedy farthest-point cover at radius `eps`: repeatedly promotes the
/// hypothesis farthest from the current centers until everything is within
/// `eps`. The cover is proper (centers belong to the class) and its size is
/// at most the class size; minimality is not attempted.
pub fn epsilon_net(
    problem: &LearningProblem,
    eps: f64,
    metric: NetMetric,
) -> Result<EpsilonNet, BoundsError> {
    require(eps > 0.0, format!("eps must be positive, got {eps}"))?;
    let n = problem.hypotheses().len();
    let mut centers = vec![0usize];
    let mut dist = Vec::with_capacity(n);
    for i in 0..n {
        dist.push(l2_distance(problem, &metric, i, 0)?);
    }
    loop {
        let mut far = 0usize;
        for i in 1..n {
            if dist[i] > dist[far] {
                far = i;
            }
        }
        if dist[far] <= eps {
            break;
        }
        centers.push(far);
        for (i, slot) in dist.iter_mut().enumerate() {
            let d = l2_distance(problem, &metric, i, far)?;
            if d < *slot {
                *slot = d;
            }
        }
    }
    // Project onto the finished net: nearest center, earliest insertion on
    // ties.
    let mut projection = vec![0usize; n];
    let mut distances = vec![0.0f64; n];
    for i in 0..n {
        let mut best = centers[0];
        let mut best_d = l2_distance(problem, &metric, i, centers[0])?;
        for &c in &centers[1..] {
            let d = l2_distance(problem, &metric, i, c)?;
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        projection[i] = best;
        distances[i] = best_d;
    }
    Ok(EpsilonNet { centers, projection, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Atom, Hypothesis, Loss};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn finite_class_bound_values() {
        // Independent transcription: 6·max{V, 1/η*}·(ln(1/δ) + ln N)/n.
        let b = finite_class_bound(1.0, 1.0, 10, 0.05, 1000).unwrap();
        let expected = 6.0 * 1.0 * ((1.0f64 / 0.05).ln() + 10.0f64.ln()) / 1000.0;
        assert_relative_eq!(b, expected, max_relative = 1e-12);
        assert_abs_diff_eq!(b, 0.031789904199288226, epsilon = 1e-12);

        // N = 1 and δ = 1: both logarithms vanish.
        assert_eq!(finite_class_bound(1.0, 1.0, 1, 1.0, 10).unwrap(), 0.0);

        // Doubling n halves the bound.
        let b1 = finite_class_bound(2.0, 0.5, 7, 0.1, 100).unwrap();
        let b2 = finite_class_bound(2.0, 0.5, 7, 0.1, 200).unwrap();
        assert_relative_eq!(b1, 2.0 * b2, max_relative = 1e-12);

        // Infinite η* collapses the scale to V.
        let b = finite_class_bound(3.0, f64::INFINITY, 2, 0.5, 10).unwrap();
        assert_relative_eq!(b, 6.0 * 3.0 * (2.0f64.ln() + 2.0f64.ln()) / 10.0, max_relative = 1e-12);
    }

    #[test]
    fn weak_mix_bound_values() {
        let b = weak_mix_bound(1.0, 0.5, 1.0, 10, 0.05, 1000).unwrap();
        let expected = 6.0 * ((1.0f64 / 0.05).ln() + 10.0f64.ln()) / 1000.0f64.powf(2.0 / 3.0);
        assert_relative_eq!(b, expected, max_relative = 1e-12);
        assert_abs_diff_eq!(b, 0.3178990419928823, epsilon = 1e-12);

        // κ = 1 coincides with the finite-class bound when V ≤ 1/η₀.
        let eta0 = 2.0;
        let weak = weak_mix_bound(0.5, 1.0, eta0, 10, 0.05, 1000).unwrap();
        let finite = finite_class_bound(0.5, eta0, 10, 0.05, 1000).unwrap();
        assert_relative_eq!(weak, finite, max_relative = 1e-12);

        // κ = 0, η₀ = 1: square-root rate, quadrupling n halves the bound.
        let b1 = weak_mix_bound(1.0, 0.0, 1.0, 10, 0.05, 1000).unwrap();
        let b4 = weak_mix_bound(1.0, 0.0, 1.0, 10, 0.05, 4000).unwrap();
        assert_relative_eq!(b1, 2.0 * b4, max_relative = 1e-12);

        // n below the admissibility threshold.
        assert!(matches!(
            weak_mix_bound(16.0, 0.0, 1e-3, 10, 0.05, 100),
            Err(BoundsError::Precondition { .. })
        ));
    }

    #[test]
    fn vc_type_bound_values() {
        let b = vc_type_bound(1.0, 1.0, 1.0, 1.0, 0.5, 1000).unwrap();
        // Independent transcription of both branches.
        let nf = 1000.0f64;
        let branch1 = 8.0 * 1.0 * (1.0 * nf.ln() + 4.0f64.ln()) / nf;
        let branch2 = 2.0
            * (1080.0 * (2.0 * nf).ln()
                + 90.0 * (4.0f64.ln() * (2.0 * nf).ln()).sqrt()
                + (4.0 * std::f64::consts::E).ln())
            / nf;
        assert_relative_eq!(b.mixability_branch, branch1, max_relative = 1e-12);
        assert_relative_eq!(b.localization_branch, branch2, max_relative = 1e-12);
        assert_eq!(b.branch, VcBranch::Localization);
        assert_relative_eq!(b.value, branch2 + 1e-3, max_relative = 1e-12);
        assert_abs_diff_eq!(b.value, 17.008017766711607, epsilon = 1e-9);

        // A tiny 1/η* cannot rescue branch 1 against C ≥ 1, but a huge V
        // can: the dominance flag must agree with the direct max.
        let b = vc_type_bound(1.0, 1e6, 1.0, 1.0, 0.5, 1000).unwrap();
        let expect_branch = if b.mixability_branch >= b.localization_branch {
            VcBranch::Mixability
        } else {
            VcBranch::Localization
        };
        assert_eq!(b.branch, expect_branch);

        assert!(vc_type_bound(1.0, 1.0, 1.0, 1.0, 0.6, 1000).is_err());
        assert!(vc_type_bound(1.0, 1.0, 1.0, 1.0, 0.5, 4).is_err());
        assert!(vc_type_bound(0.5, 1.0, 1.0, 1.0, 0.5, 1000).is_err());
    }

    #[test]
    fn vc_bound_vanishes_at_log_rate() {
        let b1 = vc_type_bound(1.0, 1.0, 1.0, 1.0, 0.5, 1_000).unwrap().value;
        let b2 = vc_type_bound(1.0, 1.0, 1.0, 1.0, 0.5, 10_000).unwrap().value;
        let ratio = b1 / b2;
        // log n / n scaling: ratio close to 10 / (log 20000 / log 2000).
        assert!(ratio > 7.0 && ratio < 10.0, "ratio {ratio}");
    }

    #[test]
    fn localization_bound_values() {
        let b = localization_bound(1.0, 1.0, 0.5, 1000, 1.0).unwrap();
        let nf = 1000.0f64;
        let expected = 1.0 / nf
            * (1080.0 * (2.0 * nf).ln()
                + 90.0 * (4.0f64.ln() * (2.0 * nf).ln()).sqrt()
                + (4.0 * std::f64::consts::E).ln());
        assert_relative_eq!(b, expected, max_relative = 1e-12);
        assert_abs_diff_eq!(b, 8.503508883355803, epsilon = 1e-9);

        // Linear in V.
        let b3 = localization_bound(1.0, 1.0, 0.5, 1000, 3.0).unwrap();
        assert_relative_eq!(b3, 3.0 * b, max_relative = 1e-12);

        // δ beyond 1/2 rejected.
        assert!(localization_bound(1.0, 1.0, 0.9, 1000, 1.0).is_err());
    }

    #[test]
    fn local_analysis_and_esup_values() {
        let y = 2.0f64.ln();
        let b = local_analysis_bound(1.0, 1.0, y, 1000).unwrap();
        let cover = (2000.0f64).ln();
        let expected =
            (990.0 * cover + (2.0 * y * (1.0 + 3960.0 * cover)).sqrt() + 2.0 * y / 3.0 + 1.0)
                / 1000.0;
        assert_relative_eq!(b, expected, max_relative = 1e-12);
        assert_abs_diff_eq!(b, 7.730630484154875, epsilon = 1e-9);

        let e = esup_bound(1.0, 1.0, 1.0, 1000).unwrap();
        assert_relative_eq!(e, 990.0 * cover / 1000.0, max_relative = 1e-12);
        assert_abs_diff_eq!(e, 7.524893434946661, epsilon = 1e-9);

        // Both vanish at log n / n order.
        let b10 = local_analysis_bound(1.0, 1.0, y, 10_000).unwrap();
        let e10 = esup_bound(1.0, 1.0, 1.0, 10_000).unwrap();
        assert!(b10 < b / 7.0);
        assert!(e10 < e / 7.0);
    }

    #[test]
    fn evaluators_monotone_in_n_and_delta() {
        for n in [5usize, 10, 100, 1000, 10_000] {
            for delta in [0.01, 0.1, 0.25, 0.5] {
                let f = finite_class_bound(1.0, 1.0, 10, delta, n).unwrap();
                let f_next = finite_class_bound(1.0, 1.0, 10, delta, n * 2).unwrap();
                assert!(f_next < f);
                let f_tighter = finite_class_bound(1.0, 1.0, 10, delta / 2.0, n).unwrap();
                assert!(f_tighter > f);

                let w = weak_mix_bound(1.0, 0.5, 1.0, 10, delta, n).unwrap();
                assert!(weak_mix_bound(1.0, 0.5, 1.0, 10, delta, n * 2).unwrap() < w);
                assert!(weak_mix_bound(1.0, 0.5, 1.0, 10, delta / 2.0, n).unwrap() > w);

                let v = vc_type_bound(1.0, 1.0, 1.0, 1.0, delta, n.max(5)).unwrap().value;
                assert!(vc_type_bound(1.0, 1.0, 1.0, 1.0, delta, n.max(5) * 2).unwrap().value < v);

                let l = localization_bound(1.0, 1.0, delta, n, 1.0).unwrap();
                assert!(localization_bound(1.0, 1.0, delta, n * 2, 1.0).unwrap() < l);
            }
        }
    }

    fn cover_problem(values: &[f64]) -> LearningProblem {
        let atoms = vec![Atom { x: "x".into(), y: 0.0, p: 1.0 }];
        let hypotheses: Vec<Hypothesis> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Hypothesis::constant(&format!("h{i}"), &["x"], v))
            .collect();
        LearningProblem::new(atoms, Loss::Absolute, hypotheses, 10.0).unwrap()
    }

    #[test]
    fn epsilon_net_greedy_trace() {
        // Single unit-mass input: L2(P) distance is |value difference|.
        // Distances: d(0,1) = 0.1, d(0,2) = 0.9, d(1,2) = 1.0.
        let p = cover_problem(&[0.0, 0.1, 0.9]);
        let net = epsilon_net(&p, 0.2, NetMetric::L2P).unwrap();
        assert_eq!(net.centers, vec![0, 2]);
        assert!(net.distances.iter().all(|&d| d <= 0.2));
        assert_eq!(net.projection, vec![0, 0, 2]);
    }

    #[test]
    fn epsilon_net_extremes() {
        let p = cover_problem(&[0.0, 0.3, 0.7, 1.0]);
        // Radius above the diameter: a single ball suffices.
        let net = epsilon_net(&p, 2.0, NetMetric::L2P).unwrap();
        assert_eq!(net.centers, vec![0]);
        // Radius below every gap: the net is the whole class and the
        // projection is the identity.
        let net = epsilon_net(&p, 1e-9, NetMetric::L2P).unwrap();
        assert_eq!(net.centers.len(), 4);
        assert_eq!(net.projection, vec![0, 1, 2, 3]);
        assert!(net.distances.iter().all(|&d| d == 0.0));
        assert!(epsilon_net(&p, 0.0, NetMetric::L2P).is_err());
    }

    #[test]
    fn epsilon_net_covering_property_holds_exactly() {
        let p = cover_problem(&[0.0, 0.11, 0.35, 0.48, 0.9, 1.4, 2.2]);
        for eps in [0.05, 0.2, 0.5, 1.0] {
            let net = epsilon_net(&p, eps, NetMetric::L2P).unwrap();
            assert!(net.centers.len() <= p.hypotheses().len());
            for (i, &c) in net.projection.iter().enumerate() {
                assert!(net.centers.contains(&c));
                assert!(net.distances[i] <= eps, "eps={eps} i={i}");
            }
        }
    }

    #[test]
    fn epsilon_net_empirical_metric() {
        let p = cover_problem(&[0.0, 0.5, 1.0]);
        let sample: Vec<(String, f64)> =
            (0..4).map(|_| ("x".to_string(), 0.0)).collect();
        let net = epsilon_net(&p, 0.6, NetMetric::L2Pn(&sample)).unwrap();
        assert!(net.distances.iter().all(|&d| d <= 0.6));
        assert!(epsilon_net(&p, 0.6, NetMetric::L2Pn(&[])).is_err());
    }
}
