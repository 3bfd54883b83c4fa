//! Seeded Monte Carlo ERM, Cramér–Chernoff tail evaluation, empirical rate
//! fitting, and bound-violation frequency measurement.
//!
//! Replications are seeded by a counter construction: trial `i` at sample
//! size `n` draws from a stream seeded by `mix(master, n, i)`, so results are
//! identical whatever the execution schedule or worker count. Each trial
//! reduces the sample to per-atom counts (the sufficient statistic for every
//! empirical risk on a finite problem) before selecting the empirical
//! minimizer.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundsError};
use crate::exec;
use crate::mixability::{self, cgf, MixabilityError};
use crate::problem::{Hypothesis, LearningProblem, ProblemError};

#[derive(Debug, Error)]
pub enum ErmError {
    #[error("sample is empty")]
    EmptySample,
    #[error("tail bound is trivial: t = {t} is not below the mean {mean}")]
    TrivialTail { t: f64, mean: f64 },
    #[error("{name} must satisfy {requirement}, got {value}")]
    InvalidParameter { name: &'static str, requirement: &'static str, value: f64 },
    #[error("n_values must be nonempty and strictly increasing")]
    BadSampleSizes,
    #[error("prerequisite of the {bound} bound failed: {reason}")]
    Prerequisite { bound: &'static str, reason: String },
    #[error(transparent)]
    Mixability(#[from] MixabilityError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Rule for breaking exact empirical-risk ties.
///
/// The guarantees under test hold for *any* selection among empirical
/// minimizers, so both a benign and an adversarial rule are provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Lexicographically first hypothesis name among the tied minimizers.
    FirstByName,
    /// Bound-stressing rule: among tied empirical minimizers, select the one
    /// whose true risk is worst, i.e. the most pessimistic admissible
    /// selection (remaining ties go to the first name).
    LowestRisk,
}

/// Monte Carlo configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Sample sizes, strictly increasing.
    pub n_values: Vec<usize>,
    /// Replications per sample size.
    pub trials: usize,
    pub seed: u64,
    pub tiebreak: TieBreak,
    /// Confidence parameter for the high quantile column.
    pub delta: f64,
    /// Threshold for the ε-good rate; `None` uses the finite-class bound at
    /// δ = 0.05 for each sample size.
    pub epsilon: Option<f64>,
}

impl SimConfig {
    pub fn new(n_values: Vec<usize>, trials: usize, seed: u64) -> Self {
        SimConfig {
            n_values,
            trials,
            seed,
            tiebreak: TieBreak::FirstByName,
            delta: 0.05,
            epsilon: None,
        }
    }

    fn validate(&self) -> Result<(), ErmError> {
        if self.n_values.is_empty() || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ErmError::BadSampleSizes);
        }
        if self.n_values[0] == 0 {
            return Err(ErmError::BadSampleSizes);
        }
        if self.trials == 0 {
            return Err(ErmError::InvalidParameter {
                name: "trials",
                requirement: "trials >= 1",
                value: 0.0,
            });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ErmError::InvalidParameter {
                name: "delta",
                requirement: "0 < delta < 1",
                value: self.delta,
            });
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(ErmError::InvalidParameter {
                    name: "epsilon",
                    requirement: "epsilon > 0",
                    value: eps,
                });
            }
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for trial `trial` at sample size `n` under `master`.
pub fn trial_seed(master: u64, n: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n) ^ trial)
}

/// Precomputed per-hypothesis loss rows over the atoms.
struct SimTables {
    /// `loss[i][k] = ℓ(y_k, f_i(x_k))`.
    loss: Vec<Vec<f64>>,
    risks: Vec<f64>,
    excess: Vec<f64>,
    names: Vec<String>,
}

impl SimTables {
    fn new(problem: &LearningProblem) -> SimTables {
        let loss: Vec<Vec<f64>> = problem
            .hypotheses()
            .iter()
            .map(|h| {
                problem
                    .atoms()
                    .iter()
                    .map(|a| problem.loss().evaluate(a.y, h.prediction(&a.x).unwrap()))
                    .collect()
            })
            .collect();
        let risks = problem.risks();
        let excess = problem.excess_risks();
        let names = problem.hypotheses().iter().map(|h| h.name.clone()).collect();
        SimTables { loss, risks, excess, names }
    }

    /// Index of the empirical minimizer for the given counts under the tie
    /// rule; ties are exact equalities of the empirical loss sums.
    fn select(&self, counts: &[u64], tiebreak: TieBreak) -> usize {
        let sum_for = |i: usize| -> f64 {
            self.loss[i].iter().zip(counts).map(|(l, &c)| l * c as f64).sum()
        };
        let mut best = 0usize;
        let mut best_sum = sum_for(0);
        for i in 1..self.loss.len() {
            let sum = sum_for(i);
            if sum < best_sum {
                best = i;
                best_sum = sum;
                continue;
            }
            if sum > best_sum {
                continue;
            }
            let take = match tiebreak {
                TieBreak::FirstByName => self.names[i] < self.names[best],
                TieBreak::LowestRisk => {
                    self.risks[i] > self.risks[best]
                        || (self.risks[i] == self.risks[best]
                            && self.names[i] < self.names[best])
                }
            };
            if take {
                best = i;
            }
        }
        best
    }
}

/// ERM over an explicit sample: the hypothesis minimizing the empirical risk,
/// ties broken by the configured rule.
pub fn erm_select<'p>(
    problem: &'p LearningProblem,
    sample: &[(String, f64)],
    tiebreak: TieBreak,
) -> Result<&'p Hypothesis, ErmError> {
    if sample.is_empty() {
        return Err(ErmError::EmptySample);
    }
    let risks = problem.risks();
    let mut best: Option<(usize, f64)> = None;
    for (i, h) in problem.hypotheses().iter().enumerate() {
        let mut sum = 0.0;
        for (x, y) in sample {
            let prediction = h.prediction(x).ok_or_else(|| ProblemError::UndefinedLabel {
                hypothesis: h.name.clone(),
                label: x.clone(),
            })?;
            sum += problem.loss().evaluate(*y, prediction);
        }
        let take = match best {
            None => true,
            Some((bi, bsum)) => {
                sum < bsum
                    || (sum == bsum
                        && match tiebreak {
                            TieBreak::FirstByName => h.name < problem.hypotheses()[bi].name,
                            TieBreak::LowestRisk => {
                                risks[i] > risks[bi]
                                    || (risks[i] == risks[bi]
                                        && h.name < problem.hypotheses()[bi].name)
                            }
                        })
            }
        };
        if take {
            best = Some((i, sum));
        }
    }
    Ok(&problem.hypotheses()[best.unwrap().0])
}

/// Cramér–Chernoff tail value `exp(ηt + n·Λ_{−Z}(η))`, clamped to 1. Bounds
/// the probability that the empirical mean of `Z` falls at or below `t`.
pub fn chernoff_tail(
    rv: &crate::problem::ExcessLossRv,
    eta: f64,
    t: f64,
    n: usize,
) -> Result<f64, ErmError> {
    if !(eta > 0.0) {
        return Err(ErmError::InvalidParameter {
            name: "eta",
            requirement: "eta > 0",
            value: eta,
        });
    }
    let mean = rv.mean();
    if !(t < mean) {
        return Err(ErmError::TrivialTail { t, mean });
    }
    Ok((eta * t + n as f64 * cgf(rv, eta)).exp().min(1.0))
}

/// Per-trial excess risks of the ERM selection at sample size `n`.
///
/// Trial `i` uses the stream seeded by [`trial_seed`]`(seed, n, i)`;
/// the output is ordered by trial index and independent of scheduling.
pub fn trial_excess_risks(
    problem: &LearningProblem,
    n: usize,
    trials: usize,
    seed: u64,
    tiebreak: TieBreak,
) -> Result<Vec<f64>, ErmError> {
    trial_excess_risks_impl(problem, n, trials, seed, tiebreak, false)
}

fn trial_excess_risks_impl(
    problem: &LearningProblem,
    n: usize,
    trials: usize,
    seed: u64,
    tiebreak: TieBreak,
    sequential: bool,
) -> Result<Vec<f64>, ErmError> {
    if n == 0 {
        return Err(ErmError::EmptySample);
    }
    let tables = SimTables::new(problem);
    let run = |t: usize| -> f64 {
        let counts = problem
            .sample_counts(n, trial_seed(seed, n as u64, t as u64))
            .expect("n >= 1 checked above");
        tables.excess[tables.select(&counts, tiebreak)]
    };
    Ok(if sequential {
        exec::map_range_seq(trials, run)
    } else {
        exec::map_range(trials, run)
    })
}

/// Statistics of one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerSampleSize {
    pub n: usize,
    pub mean_excess_risk: f64,
    pub q50: f64,
    pub q90: f64,
    /// Empirical (1 − δ) quantile.
    pub q_high: f64,
    /// Threshold used for the ε-good rate at this sample size.
    pub epsilon: f64,
    /// Fraction of trials with excess risk ≤ ε.
    pub epsilon_good_rate: f64,
}

/// Log-log rate fit over the sample sizes with positive mean excess risk.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RateFit {
    Fitted { slope: f64, intercept: f64, r2: f64 },
    /// Fewer than three usable points.
    Unavailable { usable_points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub f_star: String,
    pub delta: f64,
    pub tiebreak: TieBreak,
    pub per_n: Vec<PerSampleSize>,
    pub rate_fit: RateFit,
}

/// Empirical quantile at level `q` of an ascending-sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = (q * sorted.len() as f64).ceil() as usize;
    sorted[k.max(1).min(sorted.len()) - 1]
}

/// Ordinary least squares on `(log n, log mean_excess_risk)`.
pub fn fit_rate(per_n: &[PerSampleSize]) -> RateFit {
    let points: Vec<(f64, f64)> = per_n
        .iter()
        .filter(|p| p.mean_excess_risk > 0.0)
        .map(|p| ((p.n as f64).ln(), p.mean_excess_risk.ln()))
        .collect();
    if points.len() < 3 {
        return RateFit::Unavailable { usable_points: points.len() };
    }
    let k = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let intercept = (sy - slope * sx) / k;
    let mean_y = sy / k;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 =
        points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    RateFit::Fitted { slope, intercept, r2 }
}

fn simulate_impl(
    problem: &LearningProblem,
    config: &SimConfig,
    sequential: bool,
) -> Result<SimReport, ErmError> {
    config.validate()?;
    let profile = mixability::eta_star(problem)?;
    let n_class = problem.hypotheses().len();
    let mut per_n = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let epsilon = match config.epsilon {
            Some(e) => e,
            None => bounds::finite_class_bound(
                problem.loss_bound(),
                profile.eta_star,
                n_class,
                0.05,
                n,
            )?,
        };
        let excess =
            trial_excess_risks_impl(problem, n, config.trials, config.seed, config.tiebreak, sequential)?;
        let trials = excess.len() as f64;
        let mean = excess.iter().sum::<f64>() / trials;
        let mut sorted = excess.clone();
        sorted.sort_by(f64::total_cmp);
        let good = excess.iter().filter(|&&e| e <= epsilon).count() as f64;
        per_n.push(PerSampleSize {
            n,
            mean_excess_risk: mean,
            q50: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
            q_high: quantile(&sorted, 1.0 - config.delta),
            epsilon,
            epsilon_good_rate: good / trials,
        });
    }
    let rate_fit = fit_rate(&per_n);
    Ok(SimReport {
        f_star: profile.f_star,
        delta: config.delta,
        tiebreak: config.tiebreak,
        per_n,
        rate_fit,
    })
}

/// Runs the seeded replication study. Deterministic given `(problem, config)`
/// and independent of the number of workers.
pub fn simulate(problem: &LearningProblem, config: &SimConfig) -> Result<SimReport, ErmError> {
    simulate_impl(problem, config, false)
}

/// Always-sequential variant of [`simulate`]; same report bit for bit.
pub fn simulate_seq(problem: &LearningProblem, config: &SimConfig) -> Result<SimReport, ErmError> {
    simulate_impl(problem, config, true)
}

/// Which closed-form guarantee a violation run measures against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundKind {
    FiniteThm4,
    WeakCor1 { kappa: f64, eta0: f64 },
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::FiniteThm4 => "finite_thm4",
            BoundKind::WeakCor1 { .. } => "weak_cor1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub kind: BoundKind,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    /// The evaluated excess-risk bound at confidence 1 − δ.
    pub bound: f64,
    /// Fraction of trials whose ERM excess risk strictly exceeds the bound.
    pub rate: f64,
    /// Three binomial standard deviations of a rate-δ event over `trials`.
    pub three_sigma: f64,
}

/// Measures how often ERM's excess risk exceeds the chosen bound. The
/// contract under test is `rate ≤ δ` up to binomial sampling error.
pub fn bound_violation_rate(
    problem: &LearningProblem,
    n: usize,
    delta: f64,
    trials: usize,
    kind: BoundKind,
    seed: u64,
    tiebreak: TieBreak,
) -> Result<ViolationReport, ErmError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(ErmError::InvalidParameter {
            name: "delta",
            requirement: "0 < delta <= 1",
            value: delta,
        });
    }
    if trials == 0 {
        return Err(ErmError::InvalidParameter {
            name: "trials",
            requirement: "trials >= 1",
            value: 0.0,
        });
    }
    let v = problem.loss_bound();
    let n_class = problem.hypotheses().len();
    let bound = match kind {
        BoundKind::FiniteThm4 => {
            let profile = mixability::eta_star(problem)?;
            if !profile.is_mixable() {
                return Err(ErmError::Prerequisite {
                    bound: "finite_thm4",
                    reason: "problem is not stochastically mixable (eta_star = 0)".into(),
                });
            }
            bounds::finite_class_bound(v, profile.eta_star, n_class, delta, n)?
        }
        BoundKind::WeakCor1 { kappa, eta0 } => {
            let report = mixability::check_weak_mixability(problem, kappa, eta0)?;
            if !report.holds {
                let w = report.witness.expect("violation carries a witness");
                return Err(ErmError::Prerequisite {
                    bound: "weak_cor1",
                    reason: format!(
                        "problem is not ({kappa}, {eta0})-weakly stochastically mixable: `{}` fails at level {}",
                        w.function, w.level
                    ),
                });
            }
            // The bound's own admissibility threshold on n is a prerequisite
            // of the experiment, not a flag-validation failure.
            bounds::weak_mix_bound(v, kappa, eta0, n_class, delta, n).map_err(|e| {
                ErmError::Prerequisite { bound: "weak_cor1", reason: e.to_string() }
            })?
        }
    };
    let excess = trial_excess_risks(problem, n, trials, seed, tiebreak)?;
    let violations = excess.iter().filter(|&&e| e > bound).count();
    Ok(ViolationReport {
        kind,
        n,
        delta,
        trials,
        bound,
        rate: violations as f64 / trials as f64,
        three_sigma: 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt(),
    })
}
