//! Stochastic mixability constants and related diagnostics.
//!
//! For an excess-loss variable `Z` the central object is the exponential
//! moment `E exp(−ηZ)`. A problem is η-stochastically mixable when
//! `log E exp(−ηZ_f) ≤ 0` for every hypothesis `f`; the profile computed here
//! reports, per hypothesis, the largest η at which equality holds (the
//! positive root of the CGF of `−Z_f`), and the class-level constant `η*` is
//! the minimum of those roots. Variables that are nonnegative almost surely
//! with positive mean have no finite root; their exponential moment stays
//! below one for every η ("hyper-concentrated") and they contribute `+∞`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::problem::{ExcessLossRv, LearningProblem, ProblemError};

/// Bisection width tolerance for CGF roots.
pub const ROOT_TOL: f64 = 1e-12;
/// Residual `|log E exp(−ηZ)|` guaranteed at a reported root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MixabilityError {
    #[error("risk minimizer is not unique: `{first}` and `{second}` both minimize the risk and differ in loss on a positive-probability atom")]
    NonUniqueMinimizer { first: String, second: String },
    #[error("{name} must satisfy {requirement}, got {value}")]
    InvalidParameter { name: &'static str, requirement: &'static str, value: f64 },
    #[error("Bernstein constant is unbounded: `{function}` has zero excess risk but is not almost surely loss-identical to the minimizer")]
    UnboundedBernstein { function: String },
    #[error("variable is not hyper-concentrated: {reason}")]
    NotHyperConcentrated { reason: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Outcome of the per-variable root search for `E exp(−ηZ) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EtaResult {
    /// Unique positive root η of `log E exp(−ηZ)`.
    Root { eta: f64 },
    /// `Z ≥ 0` a.s. with positive mean: `lim_{η→∞} E exp(−ηZ)` equals the
    /// mass at zero and stays below one, so no finite root exists.
    HyperConcentrated { limit: f64 },
    /// `E Z = 0`. Degenerate `Z ≡ 0` is mixable at every η; any other
    /// zero-mean variable at none.
    ZeroMean,
    /// `E Z < 0` — not an excess-loss variable relative to a true minimizer.
    NegativeMean,
}

/// `log E exp(−ηZ)`, the cumulant generating function of `−Z` at η.
///
/// Computed by log-sum-exp so the value stays finite for any η a finite
/// support admits.
pub fn cgf(rv: &ExcessLossRv, eta: f64) -> f64 {
    let m = rv
        .atoms()
        .iter()
        .map(|&(z, _)| -eta * z)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = rv.atoms().iter().map(|&(z, p)| p * (-eta * z - m).exp()).sum();
    m + sum.ln()
}

/// Classifies `Z` and finds the positive root of `η ↦ log E exp(−ηZ)` when
/// one exists.
///
/// The CGF of `−Z` is convex, zero at zero, with slope `−E Z` at zero. For
/// `E Z > 0` and `min Z < 0` it therefore has exactly one positive root,
/// bracketed by geometric expansion from η = 1 and bisected to [`ROOT_TOL`].
pub fn eta_root(rv: &ExcessLossRv) -> EtaResult {
    if rv.mean_is_zero() {
        return EtaResult::ZeroMean;
    }
    if rv.mean() < 0.0 {
        return EtaResult::NegativeMean;
    }
    if rv.min_value() >= 0.0 {
        return EtaResult::HyperConcentrated { limit: rv.mass_at_zero() };
    }

    let mut hi = 1.0f64;
    let mut lo = 0.0f64;
    // cgf(hi) > 0 eventually: the negative-support atom contributes
    // p·exp(η|z|) which dominates once η exceeds ln(1/p)/|z|.
    while cgf(rv, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e30 {
            // Unreachable for valid finite-support input; classify as
            // hyper-concentrated rather than looping forever.
            return EtaResult::HyperConcentrated { limit: rv.mass_at_zero() };
        }
    }
    let mut iterations = 0;
    while hi - lo > ROOT_TOL * hi.max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if cgf(rv, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    EtaResult::Root { eta: 0.5 * (lo + hi) }
}

/// Per-hypothesis roots and the class-level stochastic mixability constant.
#[derive(Debug, Clone, Serialize)]
pub struct MixabilityProfile {
    /// Name of the designated minimizer (first minimizer in input order).
    pub f_star: String,
    /// Root status per non-optimal hypothesis.
    pub per_function: BTreeMap<String, EtaResult>,
    /// `min` over hypotheses of the per-function root; `+∞` when every
    /// non-optimal hypothesis is hyper-concentrated or loss-identical to the
    /// minimizer.
    pub eta_star: f64,
    /// Hypothesis attaining `eta_star` (ties broken by name), when finite.
    pub witness: Option<String>,
}

impl MixabilityProfile {
    /// True when the problem is stochastically mixable at some positive η.
    pub fn is_mixable(&self) -> bool {
        self.eta_star > 0.0
    }
}

fn eta_results_against_star(
    problem: &LearningProblem,
    indices: &[usize],
    star: usize,
) -> Result<Vec<(String, EtaResult, bool)>, MixabilityError> {
    let f_star = &problem.hypotheses()[star];
    let compute = |&i: &usize| -> Result<(String, EtaResult, bool), MixabilityError> {
        let h = &problem.hypotheses()[i];
        let rv = problem.excess_loss(h, f_star)?;
        Ok((h.name.clone(), eta_root(&rv), rv.is_identically_zero()))
    };
    crate::exec::try_map(indices, compute)
}

fn profile_from_results(
    f_star: String,
    results: Vec<(String, EtaResult, bool)>,
) -> MixabilityProfile {
    let mut eta_star = f64::INFINITY;
    let mut witness: Option<String> = None;
    for (name, result, identically_zero) in &results {
        let candidate = match result {
            EtaResult::Root { eta } => *eta,
            EtaResult::HyperConcentrated { .. } => continue,
            // Z ≡ 0 duplicates the minimizer and never binds; any other
            // zero-mean variable defeats mixability at every positive η.
            EtaResult::ZeroMean if *identically_zero => continue,
            EtaResult::ZeroMean | EtaResult::NegativeMean => 0.0,
        };
        let better = candidate < eta_star
            || (candidate == eta_star
                && witness.as_deref().is_none_or(|w| name.as_str() < w));
        if better {
            eta_star = candidate;
            witness = Some(name.clone());
        }
    }
    MixabilityProfile {
        f_star,
        per_function: results.into_iter().map(|(n, r, _)| (n, r)).collect(),
        eta_star,
        witness,
    }
}

/// Computes the mixability profile of a problem.
///
/// Requires an almost-surely unique risk minimizer; otherwise returns the
/// diagnostic error naming two minimizers that differ.
pub fn eta_star(problem: &LearningProblem) -> Result<MixabilityProfile, MixabilityError> {
    let minimizers = problem.minimizers(0.0);
    if minimizers.non_unique {
        let first = &problem.hypotheses()[minimizers.indices[0]];
        let second = &problem.hypotheses()[minimizers.indices[1]];
        return Err(MixabilityError::NonUniqueMinimizer {
            first: first.name.clone(),
            second: second.name.clone(),
        });
    }
    let star = minimizers.indices[0];
    let others: Vec<usize> =
        (0..problem.hypotheses().len()).filter(|&i| i != star).collect();
    let results = eta_results_against_star(problem, &others, star)?;
    Ok(profile_from_results(problem.hypotheses()[star].name.clone(), results))
}

/// Witness of a weak-mixability violation.
#[derive(Debug, Clone, Serialize)]
pub struct WeakMixabilityWitness {
    pub function: String,
    /// Excess-risk level ε at which the constraint fails.
    pub level: f64,
    /// η₀ ε^{1−κ}, the constraint's exponent at that level.
    pub eta_level: f64,
    /// The offending `log E exp(−η_ε Z_f) > 0`.
    pub cgf_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakMixabilityReport {
    pub kappa: f64,
    pub eta0: f64,
    pub holds: bool,
    pub witness: Option<WeakMixabilityWitness>,
}

/// Checks (κ, η₀)-weak stochastic mixability.
///
/// The quantifier over ε > 0 reduces to the achieved positive excess-risk
/// levels: between consecutive levels the subclass `F_{⪰ε}` is constant while
/// η₀ ε^{1−κ} is nondecreasing in ε, and the CGF of each member is convex
/// with value zero at zero, so a constraint satisfied at a level holds for
/// every smaller ε as well.
pub fn check_weak_mixability(
    problem: &LearningProblem,
    kappa: f64,
    eta0: f64,
) -> Result<WeakMixabilityReport, MixabilityError> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(MixabilityError::InvalidParameter {
            name: "kappa",
            requirement: "0 <= kappa <= 1",
            value: kappa,
        });
    }
    if !(eta0 > 0.0) {
        return Err(MixabilityError::InvalidParameter {
            name: "eta0",
            requirement: "eta0 > 0",
            value: eta0,
        });
    }
    let star = problem.f_star_index();
    let f_star = &problem.hypotheses()[star];
    let excess = problem.excess_risks();
    let mut levels: Vec<f64> = excess.iter().copied().filter(|&e| e > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let rvs: Vec<ExcessLossRv> = problem
        .hypotheses()
        .iter()
        .map(|h| problem.excess_loss(h, f_star))
        .collect::<Result<_, _>>()?;

    for &level in &levels {
        let eta_level = eta0 * level.powf(1.0 - kappa);
        for (i, h) in problem.hypotheses().iter().enumerate() {
            if i != star && excess[i] < level {
                continue;
            }
            // CGF values within the root-residual tolerance count as zero,
            // so the check accepts η₀ equal to a reported root.
            let value = cgf(&rvs[i], eta_level);
            if value > ROOT_RESIDUAL_TOL {
                return Ok(WeakMixabilityReport {
                    kappa,
                    eta0,
                    holds: false,
                    witness: Some(WeakMixabilityWitness {
                        function: h.name.clone(),
                        level,
                        eta_level,
                        cgf_value: value,
                    }),
                });
            }
        }
    }
    Ok(WeakMixabilityReport { kappa, eta0, holds: true, witness: None })
}

/// A fitted (β, B) pair: `P Z_f² ≤ B (P Z_f)^β` for every non-optimal `f`.
#[derive(Debug, Clone, Serialize)]
pub struct BernsteinFit {
    pub beta: f64,
    /// `max_f (P Z_f²) / (P Z_f)^β`; zero by convention when the class has no
    /// non-optimal hypothesis (the max is vacuous).
    pub b: f64,
}

/// Computes the smallest Bernstein constant B at the given exponent β.
pub fn bernstein_constant(
    problem: &LearningProblem,
    beta: f64,
) -> Result<BernsteinFit, MixabilityError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(MixabilityError::InvalidParameter {
            name: "beta",
            requirement: "0 < beta <= 1",
            value: beta,
        });
    }
    let minimizers = problem.minimizers(0.0);
    if minimizers.non_unique {
        let first = &problem.hypotheses()[minimizers.indices[0]];
        let second = &problem.hypotheses()[minimizers.indices[1]];
        return Err(MixabilityError::NonUniqueMinimizer {
            first: first.name.clone(),
            second: second.name.clone(),
        });
    }
    let star = minimizers.indices[0];
    let f_star = &problem.hypotheses()[star];
    let mut b = 0.0f64;
    for (i, h) in problem.hypotheses().iter().enumerate() {
        if i == star {
            continue;
        }
        let rv = problem.excess_loss(h, f_star)?;
        if rv.is_identically_zero() {
            continue;
        }
        let mean = rv.mean();
        if rv.mean_is_zero() || mean <= 0.0 {
            return Err(MixabilityError::UnboundedBernstein { function: h.name.clone() });
        }
        b = b.max(rv.second_moment() / mean.powf(beta));
    }
    Ok(BernsteinFit { beta, b })
}

/// The perturbation of a hyper-concentrated variable that restores a finite
/// mixability root, together with the coupling certifying `Z' ≤ Z`.
#[derive(Debug, Clone, Serialize)]
pub struct HyperPerturbation {
    pub perturbed: ExcessLossRv,
    /// Finite positive root of `E exp(−ηZ') = 1`.
    pub eta: f64,
    /// Mass transport from atoms of `Z` to atoms of `Z'`; every move is
    /// downward, so `Z' ≤ Z` under this coupling.
    pub coupling: Vec<CouplingMove>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CouplingMove {
    pub from: f64,
    pub to: f64,
    pub mass: f64,
}

/// Perturbs a hyper-concentrated `Z` (nonnegative a.s., mean μ > 0): mass on
/// `A = [μ, V]` is scaled by `1 − ε` and the removed ε-fraction is mirrored
/// to `−z`. The result keeps `|mean(Z') − mean(Z)| ≤ 2εV` and has a finite
/// root because it now charges negative values.
pub fn hyper_perturb(
    rv: &ExcessLossRv,
    epsilon: f64,
    support_bound: f64,
) -> Result<HyperPerturbation, MixabilityError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(MixabilityError::InvalidParameter {
            name: "epsilon",
            requirement: "0 < epsilon < 1",
            value: epsilon,
        });
    }
    let mean = rv.mean();
    if rv.min_value() < 0.0 {
        return Err(MixabilityError::NotHyperConcentrated {
            reason: format!("support contains the negative value {}", rv.min_value()),
        });
    }
    if !(mean > 0.0) || rv.mean_is_zero() {
        return Err(MixabilityError::NotHyperConcentrated {
            reason: format!("mean {mean} is not positive"),
        });
    }
    if rv.max_value() > support_bound {
        return Err(MixabilityError::Problem(ProblemError::SupportBoundExceeded {
            z: rv.max_value(),
            bound: support_bound,
        }));
    }

    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut coupling: Vec<CouplingMove> = Vec::new();
    for &(z, p) in rv.atoms() {
        if z >= mean {
            atoms.push((z, (1.0 - epsilon) * p));
            atoms.push((-z, epsilon * p));
            coupling.push(CouplingMove { from: z, to: z, mass: (1.0 - epsilon) * p });
            coupling.push(CouplingMove { from: z, to: -z, mass: epsilon * p });
        } else {
            atoms.push((z, p));
            coupling.push(CouplingMove { from: z, to: z, mass: p });
        }
    }
    let perturbed = ExcessLossRv::new(atoms, support_bound)?;
    let eta = match eta_root(&perturbed) {
        EtaResult::Root { eta } => eta,
        other => {
            return Err(MixabilityError::NotHyperConcentrated {
                reason: format!("perturbed variable has no finite root ({other:?})"),
            })
        }
    };
    Ok(HyperPerturbation { perturbed, eta, coupling })
}
