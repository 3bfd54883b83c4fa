//! Finite discrete learning problems.
//!
//! A problem is a finite joint distribution over `(x, y)` atoms, a nonnegative
//! loss with `ℓ(y, f(x)) ≤ V` for every hypothesis, and a finite hypothesis
//! class. Finite support keeps every expectation exact, which is what lets the
//! rest of the crate verify closed-form quantities instead of estimating them.
//! Compactness assumptions on the class degenerate to finiteness here and
//! impose nothing further.

use std::collections::BTreeMap;

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `Σ p = 1` when validating a distribution.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Relative threshold below which a mean is treated as exactly zero.
pub(crate) const MEAN_ZERO_REL_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("failed to parse problem spec")]
    Parse(#[from] serde_json::Error),
    #[error("failed to read problem spec")]
    Io(#[from] std::io::Error),
    #[error("problem has no atoms")]
    NoAtoms,
    #[error("problem has no hypotheses")]
    NoHypotheses,
    #[error("atom {index} has negative probability {p}")]
    NegativeProbability { index: usize, p: f64 },
    #[error("atom probabilities sum to {sum}, expected 1 within {PROBABILITY_SUM_TOL:e}")]
    ProbabilitySum { sum: f64 },
    #[error("hypothesis `{hypothesis}` is undefined on input label `{label}`")]
    UndefinedLabel { hypothesis: String, label: String },
    #[error("loss bound must be positive, got {bound}")]
    NonPositiveBound { bound: f64 },
    #[error(
        "loss {loss} of hypothesis `{hypothesis}` on atom ({label}, {y}) exceeds the bound {bound}"
    )]
    LossBoundExceeded { hypothesis: String, label: String, y: f64, loss: f64, bound: f64 },
    #[error("p-loss exponent must be >= 1, got {exponent}")]
    BadExponent { exponent: f64 },
    #[error("log loss requires outputs in {{0, 1}}; atom ({label}, {y}) violates this")]
    LogLossOutput { label: String, y: f64 },
    #[error("log loss requires predictions in (0, 1]; hypothesis `{hypothesis}` predicts {prediction} on `{label}`")]
    LogLossPrediction { hypothesis: String, label: String, prediction: f64 },
    #[error("epsilon must be positive, got {eps}")]
    NonPositiveEpsilon { eps: f64 },
    #[error("sample size must be >= 1")]
    EmptySample,
    #[error("excess-loss value {z} exceeds the support bound {bound}")]
    SupportBoundExceeded { z: f64, bound: f64 },
}

/// One point mass of the joint distribution over inputs and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    /// Opaque input label.
    pub x: String,
    /// Real-valued output.
    pub y: f64,
    /// Probability mass.
    pub p: f64,
}

/// Loss functions admitted by the toolkit.
///
/// Every variant is nonnegative on the pairs it accepts. `Log` is binary
/// cross-entropy: outputs must lie in `{0, 1}` and predictions in `(0, 1]`;
/// a prediction whose loss exceeds the problem's bound is rejected at
/// construction rather than clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Loss {
    Squared,
    Absolute,
    PLoss { exponent: f64 },
    ZeroOne,
    Log,
}

impl Loss {
    /// Evaluates `ℓ(y, prediction)`.
    pub fn evaluate(&self, y: f64, prediction: f64) -> f64 {
        match self {
            Loss::Squared => (y - prediction) * (y - prediction),
            Loss::Absolute => (y - prediction).abs(),
            Loss::PLoss { exponent } => (y - prediction).abs().powf(*exponent),
            Loss::ZeroOne => {
                if y == prediction {
                    0.0
                } else {
                    1.0
                }
            }
            Loss::Log => {
                if y == 1.0 {
                    -prediction.ln()
                } else {
                    -(1.0 - prediction).ln()
                }
            }
        }
    }
}

/// A hypothesis: a named map from input label to real prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    pub name: String,
    pub values: BTreeMap<String, f64>,
}

impl Hypothesis {
    /// Constant hypothesis over the given labels.
    pub fn constant(name: &str, labels: &[&str], value: f64) -> Self {
        Hypothesis {
            name: name.to_string(),
            values: labels.iter().map(|l| (l.to_string(), value)).collect(),
        }
    }

    pub fn prediction(&self, label: &str) -> Option<f64> {
        self.values.get(label).copied()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    atoms: Vec<Atom>,
    loss: Loss,
    hypotheses: Vec<Hypothesis>,
    loss_bound: f64,
}

/// The excess-loss random variable `Z_f = ℓ(Y, f(X)) − ℓ(Y, f*(X))` of a
/// finite problem, stored as merged `(value, probability)` atoms sorted by
/// value. Always satisfies `|z| ≤ V` and `Σ p = 1` (within tolerance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcessLossRv {
    atoms: Vec<(f64, f64)>,
    support_bound: f64,
}

impl ExcessLossRv {
    /// Builds an excess-loss variable from raw atoms. Atoms with exactly equal
    /// values are merged; no fuzzy merging is performed, so nearby values stay
    /// distinct and the CGF is never silently altered.
    pub fn new(atoms: Vec<(f64, f64)>, support_bound: f64) -> Result<Self, ProblemError> {
        if atoms.is_empty() {
            return Err(ProblemError::NoAtoms);
        }
        if support_bound <= 0.0 {
            return Err(ProblemError::NonPositiveBound { bound: support_bound });
        }
        let mut sum = 0.0;
        for (index, &(z, p)) in atoms.iter().enumerate() {
            if p < 0.0 {
                return Err(ProblemError::NegativeProbability { index, p });
            }
            if z.abs() > support_bound {
                return Err(ProblemError::SupportBoundExceeded { z, bound: support_bound });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(ProblemError::ProbabilitySum { sum });
        }
        let mut merged: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for (z, p) in atoms {
            let entry = merged.entry(z.to_bits()).or_insert((z, 0.0));
            entry.1 += p;
        }
        let mut atoms: Vec<(f64, f64)> = merged.into_values().collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(ExcessLossRv { atoms, support_bound })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    /// `E Z`, exact over the atoms.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(z, p)| z * p).sum()
    }

    /// `E Z²`.
    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|(z, p)| z * z * p).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.atoms.first().map(|a| a.0).unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.atoms.last().map(|a| a.0).unwrap()
    }

    /// Total mass placed exactly at zero.
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms.iter().filter(|(z, _)| *z == 0.0).map(|(_, p)| p).sum()
    }

    /// True when the variable is the constant zero (a hypothesis almost surely
    /// loss-identical to the reference).
    pub fn is_identically_zero(&self) -> bool {
        self.atoms.iter().all(|&(z, p)| z == 0.0 || p == 0.0)
    }

    /// True when the mean is zero up to a relative rounding threshold.
    pub(crate) fn mean_is_zero(&self) -> bool {
        let scale: f64 = self.atoms.iter().map(|(z, p)| z.abs() * p).sum();
        self.mean().abs() <= MEAN_ZERO_REL_TOL * scale.max(1e-300)
    }
}

/// Result of [`LearningProblem::minimizers`].
#[derive(Debug, Clone)]
pub struct Minimizers {
    /// Indices into the problem's hypothesis list, in input order.
    pub indices: Vec<usize>,
    /// Set when two returned minimizers differ in loss value on a
    /// positive-probability atom, i.e. the risk minimizer is not unique in
    /// the almost-sure sense.
    pub non_unique: bool,
}

/// Finite discrete statistical learning problem `(ℓ, F, P)` with loss bound V.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone)]
pub struct LearningProblem {
    atoms: Vec<Atom>,
    loss: Loss,
    hypotheses: Vec<Hypothesis>,
    loss_bound: f64,
    /// Marginal over distinct input labels, in first-appearance order.
    marginal: Vec<(String, f64)>,
}

impl LearningProblem {
    pub fn new(
        atoms: Vec<Atom>,
        loss: Loss,
        hypotheses: Vec<Hypothesis>,
        loss_bound: f64,
    ) -> Result<Self, ProblemError> {
        if atoms.is_empty() {
            return Err(ProblemError::NoAtoms);
        }
        if hypotheses.is_empty() {
            return Err(ProblemError::NoHypotheses);
        }
        if loss_bound <= 0.0 {
            return Err(ProblemError::NonPositiveBound { bound: loss_bound });
        }
        if let Loss::PLoss { exponent } = loss {
            if !(exponent >= 1.0) {
                return Err(ProblemError::BadExponent { exponent });
            }
        }
        let mut sum = 0.0;
        for (index, atom) in atoms.iter().enumerate() {
            if atom.p < 0.0 {
                return Err(ProblemError::NegativeProbability { index, p: atom.p });
            }
            sum += atom.p;
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(ProblemError::ProbabilitySum { sum });
        }

        if matches!(loss, Loss::Log) {
            for atom in &atoms {
                if atom.y != 0.0 && atom.y != 1.0 {
                    return Err(ProblemError::LogLossOutput {
                        label: atom.x.clone(),
                        y: atom.y,
                    });
                }
            }
        }
        for h in &hypotheses {
            for atom in &atoms {
                let prediction = h.prediction(&atom.x).ok_or_else(|| {
                    ProblemError::UndefinedLabel {
                        hypothesis: h.name.clone(),
                        label: atom.x.clone(),
                    }
                })?;
                if matches!(loss, Loss::Log) && !(prediction > 0.0 && prediction <= 1.0) {
                    return Err(ProblemError::LogLossPrediction {
                        hypothesis: h.name.clone(),
                        label: atom.x.clone(),
                        prediction,
                    });
                }
                let value = loss.evaluate(atom.y, prediction);
                if !(value <= loss_bound) {
                    return Err(ProblemError::LossBoundExceeded {
                        hypothesis: h.name.clone(),
                        label: atom.x.clone(),
                        y: atom.y,
                        loss: value,
                        bound: loss_bound,
                    });
                }
            }
        }

        let mut marginal: Vec<(String, f64)> = Vec::new();
        for atom in &atoms {
            match marginal.iter_mut().find(|(l, _)| l == &atom.x) {
                Some((_, p)) => *p += atom.p,
                None => marginal.push((atom.x.clone(), atom.p)),
            }
        }

        Ok(LearningProblem { atoms, loss, hypotheses, loss_bound, marginal })
    }

    /// Loads a problem from its JSON spec representation.
    pub fn from_json_str(s: &str) -> Result<Self, ProblemError> {
        let spec: ProblemSpec = serde_json::from_str(s)?;
        Self::new(spec.atoms, spec.loss, spec.hypotheses, spec.loss_bound)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn loss(&self) -> &Loss {
        &self.loss
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn loss_bound(&self) -> f64 {
        self.loss_bound
    }

    /// Marginal distribution of the input labels, in first-appearance order.
    pub fn input_marginal(&self) -> &[(String, f64)] {
        &self.marginal
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }

    /// Risk `P ℓ(f) = Σ p · ℓ(y, f(x))`. The hypothesis may be external to
    /// the class but must be defined on every input label.
    pub fn risk(&self, f: &Hypothesis) -> Result<f64, ProblemError> {
        let mut total = 0.0;
        for atom in &self.atoms {
            let prediction = f.prediction(&atom.x).ok_or_else(|| ProblemError::UndefinedLabel {
                hypothesis: f.name.clone(),
                label: atom.x.clone(),
            })?;
            total += atom.p * self.loss.evaluate(atom.y, prediction);
        }
        Ok(total)
    }

    fn member_risk(&self, index: usize) -> f64 {
        self.risk(&self.hypotheses[index]).expect("members are validated at construction")
    }

    /// Risks of all members, in input order.
    pub fn risks(&self) -> Vec<f64> {
        (0..self.hypotheses.len()).map(|i| self.member_risk(i)).collect()
    }

    pub fn min_risk(&self) -> f64 {
        self.risks().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// All hypotheses with risk within `tol` of the minimum, in input order,
    /// together with the almost-sure non-uniqueness flag.
    pub fn minimizers(&self, tol: f64) -> Minimizers {
        let risks = self.risks();
        let min = risks.iter().copied().fold(f64::INFINITY, f64::min);
        let indices: Vec<usize> =
            (0..risks.len()).filter(|&i| risks[i] <= min + tol).collect();
        let mut non_unique = false;
        'outer: for (pos, &i) in indices.iter().enumerate() {
            for &j in &indices[pos + 1..] {
                if !self.loss_identical(i, j) {
                    non_unique = true;
                    break 'outer;
                }
            }
        }
        Minimizers { indices, non_unique }
    }

    /// Whether two members incur exactly the same loss on every
    /// positive-probability atom.
    fn loss_identical(&self, i: usize, j: usize) -> bool {
        self.atoms.iter().all(|atom| {
            if atom.p == 0.0 {
                return true;
            }
            let li = self.loss.evaluate(atom.y, self.hypotheses[i].prediction(&atom.x).unwrap());
            let lj = self.loss.evaluate(atom.y, self.hypotheses[j].prediction(&atom.x).unwrap());
            li == lj
        })
    }

    /// Index of the designated risk minimizer: the first minimizer in input
    /// order.
    pub fn f_star_index(&self) -> usize {
        self.minimizers(0.0).indices[0]
    }

    pub fn f_star(&self) -> &Hypothesis {
        &self.hypotheses[self.f_star_index()]
    }

    /// Excess-loss random variable of `f` relative to `f_star`, with atoms
    /// `(ℓ(y, f(x)) − ℓ(y, f*(x)), p)` merged over equal values.
    pub fn excess_loss(&self, f: &Hypothesis, f_star: &Hypothesis) -> Result<ExcessLossRv, ProblemError> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let pf = f.prediction(&atom.x).ok_or_else(|| ProblemError::UndefinedLabel {
                hypothesis: f.name.clone(),
                label: atom.x.clone(),
            })?;
            let ps = f_star.prediction(&atom.x).ok_or_else(|| ProblemError::UndefinedLabel {
                hypothesis: f_star.name.clone(),
                label: atom.x.clone(),
            })?;
            let z = self.loss.evaluate(atom.y, pf) - self.loss.evaluate(atom.y, ps);
            atoms.push((z, atom.p));
        }
        ExcessLossRv::new(atoms, self.loss_bound)
    }

    /// Excess risk `P ℓ(f) − inf P ℓ` of a member hypothesis.
    pub fn excess_risk(&self, index: usize) -> f64 {
        self.member_risk(index) - self.min_risk()
    }

    /// Excess risks of all members, in input order.
    pub fn excess_risks(&self) -> Vec<f64> {
        let risks = self.risks();
        let min = risks.iter().copied().fold(f64::INFINITY, f64::min);
        risks.into_iter().map(|r| r - min).collect()
    }

    /// `F_{⪰ε}`: members with excess risk at least `eps`, in input order.
    pub fn subclass_at_least(&self, eps: f64) -> Vec<&Hypothesis> {
        self.excess_risks()
            .into_iter()
            .enumerate()
            .filter(|&(_, r)| r >= eps)
            .map(|(i, _)| &self.hypotheses[i])
            .collect()
    }

    /// `F_{⪯ε}`: members with excess risk at most `eps`, in input order.
    pub fn subclass_at_most(&self, eps: f64) -> Vec<&Hypothesis> {
        self.excess_risks()
            .into_iter()
            .enumerate()
            .filter(|&(_, r)| r <= eps)
            .map(|(i, _)| &self.hypotheses[i])
            .collect()
    }

    /// `L1(P_X)` distance between two hypotheses over the input marginal.
    pub fn l1_distance(&self, f: &Hypothesis, g: &Hypothesis) -> Result<f64, ProblemError> {
        let mut total = 0.0;
        for (label, p) in &self.marginal {
            let pf = f.prediction(label).ok_or_else(|| ProblemError::UndefinedLabel {
                hypothesis: f.name.clone(),
                label: label.clone(),
            })?;
            let pg = g.prediction(label).ok_or_else(|| ProblemError::UndefinedLabel {
                hypothesis: g.name.clone(),
                label: label.clone(),
            })?;
            total += p * (pf - pg).abs();
        }
        Ok(total)
    }

    /// `G_ε`: the designated minimizer plus every member at `L1(P_X)` distance
    /// at least `eps` from it, in input order (minimizer first).
    pub fn g_epsilon(&self, eps: f64) -> Result<Vec<&Hypothesis>, ProblemError> {
        if !(eps > 0.0) {
            return Err(ProblemError::NonPositiveEpsilon { eps });
        }
        let star = self.f_star_index();
        let mut out = vec![&self.hypotheses[star]];
        for (i, h) in self.hypotheses.iter().enumerate() {
            if i == star {
                continue;
            }
            if self.l1_distance(h, &self.hypotheses[star])? >= eps {
                out.push(h);
            }
        }
        Ok(out)
    }

    /// Per-atom counts of an iid sample of size `n`, drawn by a binomial
    /// chain from a ChaCha stream seeded with `seed`. The counts are the
    /// sufficient statistic of the sample for every purpose in this crate.
    pub fn sample_counts(&self, n: usize, seed: u64) -> Result<Vec<u64>, ProblemError> {
        if n == 0 {
            return Err(ProblemError::EmptySample);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; self.atoms.len()];
        let mut remaining = n as u64;
        let mut rest = 1.0f64;
        for (k, atom) in self.atoms.iter().enumerate() {
            if k + 1 == self.atoms.len() {
                counts[k] = remaining;
                break;
            }
            if remaining == 0 {
                break;
            }
            let q = if rest > 0.0 { (atom.p / rest).clamp(0.0, 1.0) } else { 1.0 };
            let c = Binomial::new(remaining, q).expect("q is clamped to [0,1]").sample(&mut rng);
            counts[k] = c;
            remaining -= c;
            rest -= atom.p;
        }
        Ok(counts)
    }

    /// An iid sample of `(x, y)` pairs, deterministic given the seed.
    ///
    /// Points are emitted grouped by atom (in atom order); the grouping is
    /// immaterial for empirical risks and frequencies, which depend on the
    /// counts only.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<(String, f64)>, ProblemError> {
        let counts = self.sample_counts(n, seed)?;
        let mut out = Vec::with_capacity(n);
        for (atom, &c) in self.atoms.iter().zip(&counts) {
            for _ in 0..c {
                out.push((atom.x.clone(), atom.y));
            }
        }
        Ok(out)
    }
}
