//! Effective-convexity diagnostics.
//!
//! A problem whose risk minimizer is effectively unique looks convex from the
//! point of view of risk minimization; losing mixability on the subclass
//! `G_ε = {f*} ∪ {f : ‖f − f*‖_{L1(P)} ≥ ε}` for some ε > 0 forces a second
//! minimizer that differs from `f*` with positive probability. [`diagnose`]
//! evaluates that test exactly on a finite grid of ε values: for finite
//! classes the compactness argument reduces to enumeration.

use serde::Serialize;

use crate::mixability::{eta_root, EtaResult};
use crate::problem::{LearningProblem, ProblemError};

/// One row of the diagnostic report.
#[derive(Debug, Clone, Serialize)]
pub struct EpsDiagnosis {
    pub eps: f64,
    /// Whether `G_ε` is stochastically mixable at some positive η.
    pub mixable: bool,
    /// Mixability constant of `G_ε`: the minimum root over its far set, `+∞`
    /// when the far set binds nowhere, 0 when some far member has zero
    /// excess risk without being loss-identical to `f*`.
    pub eta_star: f64,
    /// Number of exact risk minimizers in the full class.
    pub minimizer_multiplicity: usize,
    /// Size of `G_ε` minus the designated minimizer.
    pub far_set_size: usize,
    /// Smallest excess risk over the far set; `None` when the far set is
    /// empty.
    pub min_excess_risk_on_far_set: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosisReport {
    pub f_star: String,
    pub rows: Vec<EpsDiagnosis>,
    /// Mixability of every tested `G_ε` certifies an effectively unique
    /// minimizer on this grid.
    pub effectively_unique_on_grid: bool,
}

/// Runs the non-convexity diagnostic over a grid of ε values (input order).
pub fn diagnose(
    problem: &LearningProblem,
    eps_grid: &[f64],
) -> Result<DiagnosisReport, ProblemError> {
    if eps_grid.is_empty() {
        return Err(ProblemError::NonPositiveEpsilon { eps: f64::NAN });
    }
    let star = problem.f_star_index();
    let f_star = &problem.hypotheses()[star];
    let multiplicity = problem.minimizers(0.0).indices.len();
    let min_risk = problem.min_risk();

    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let g = problem.g_epsilon(eps)?;
        let far = &g[1..];
        let mut eta_star = f64::INFINITY;
        let mut mixable = true;
        let mut min_excess: Option<f64> = None;
        for h in far {
            let rv = problem.excess_loss(h, f_star)?;
            let excess = problem.risk(h)? - min_risk;
            min_excess = Some(min_excess.map_or(excess, |m: f64| m.min(excess)));
            match eta_root(&rv) {
                EtaResult::Root { eta } => eta_star = eta_star.min(eta),
                EtaResult::HyperConcentrated { .. } => {}
                EtaResult::ZeroMean if rv.is_identically_zero() => {}
                EtaResult::ZeroMean | EtaResult::NegativeMean => {
                    mixable = false;
                    eta_star = 0.0;
                }
            }
        }
        rows.push(EpsDiagnosis {
            eps,
            mixable,
            eta_star,
            minimizer_multiplicity: multiplicity,
            far_set_size: far.len(),
            min_excess_risk_on_far_set: min_excess,
        });
    }
    let effectively_unique_on_grid = rows.iter().all(|r| r.mixable);
    Ok(DiagnosisReport { f_star: f_star.name.clone(), rows, effectively_unique_on_grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Atom, Hypothesis, Loss};

    fn bern(p1: f64, loss: Loss, predictions: &[(&str, f64)]) -> LearningProblem {
        let atoms = vec![
            Atom { x: "x".into(), y: 0.0, p: 1.0 - p1 },
            Atom { x: "x".into(), y: 1.0, p: p1 },
        ];
        let hypotheses =
            predictions.iter().map(|(n, v)| Hypothesis::constant(n, &["x"], *v)).collect();
        LearningProblem::new(atoms, loss, hypotheses, 1.0).unwrap()
    }

    #[test]
    fn non_unique_minimizers_break_mixability_on_g_eps() {
        // Absolute loss, Y ~ Bern(1/2), constants 0 and 1: both minimize, the
        // far member of G_{1/2} has zero excess risk with a symmetric ±1
        // excess loss.
        let p = bern(0.5, Loss::Absolute, &[("f0", 0.0), ("f1", 1.0)]);
        let report = diagnose(&p, &[0.5]).unwrap();
        let row = &report.rows[0];
        assert!(!row.mixable);
        assert_eq!(row.eta_star, 0.0);
        assert_eq!(row.minimizer_multiplicity, 2);
        assert_eq!(row.min_excess_risk_on_far_set, Some(0.0));
        assert!(!report.effectively_unique_on_grid);
    }

    #[test]
    fn unique_minimizer_is_mixable_on_g_eps() {
        let p = bern(0.75, Loss::Squared, &[("f1", 1.0), ("f0", 0.0)]);
        let report = diagnose(&p, &[0.25, 0.5, 1.0]).unwrap();
        for row in &report.rows {
            assert!(row.mixable);
            assert_eq!(row.minimizer_multiplicity, 1);
            assert!(row.eta_star > 0.0);
        }
        assert!(report.effectively_unique_on_grid);
    }

    #[test]
    fn singleton_class_is_vacuously_mixable() {
        let p = bern(0.75, Loss::Squared, &[("only", 1.0)]);
        let report = diagnose(&p, &[0.5]).unwrap();
        let row = &report.rows[0];
        assert!(row.mixable);
        assert!(row.eta_star.is_infinite());
        assert_eq!(row.minimizer_multiplicity, 1);
        assert_eq!(row.far_set_size, 0);
        assert_eq!(row.min_excess_risk_on_far_set, None);
    }

    #[test]
    fn non_mixability_with_zero_far_excess_implies_multiplicity() {
        // The checkable direction of the non-uniqueness statement.
        let problems = [
            bern(0.5, Loss::Absolute, &[("f0", 0.0), ("f1", 1.0)]),
            bern(0.75, Loss::Squared, &[("f1", 1.0), ("f0", 0.0)]),
            bern(0.5, Loss::Squared, &[("fh", 0.5), ("f0", 0.0), ("f1", 1.0)]),
        ];
        for p in &problems {
            let report = diagnose(p, &[0.1, 0.5, 0.9]).unwrap();
            for row in &report.rows {
                if !row.mixable && row.min_excess_risk_on_far_set == Some(0.0) {
                    assert!(row.minimizer_multiplicity >= 2);
                }
            }
        }
    }

    #[test]
    fn eta_star_on_g_eps_is_monotone_in_eps() {
        let p = bern(
            0.75,
            Loss::Squared,
            &[("f_star", 0.75), ("a", 0.6), ("b", 0.4), ("c", 0.0)],
        );
        let grid = [0.05, 0.1, 0.2, 0.4, 0.8];
        let report = diagnose(&p, &grid).unwrap();
        let mut prev = 0.0;
        for row in &report.rows {
            assert!(row.eta_star >= prev - 1e-12, "eta_star decreased at eps {}", row.eps);
            prev = row.eta_star;
        }
    }

    #[test]
    fn rejects_bad_grid() {
        let p = bern(0.75, Loss::Squared, &[("f1", 1.0)]);
        assert!(diagnose(&p, &[]).is_err());
        assert!(diagnose(&p, &[0.0]).is_err());
    }
}
