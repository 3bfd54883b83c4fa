//! The two-moment problem over a bounded interval and its dual certificates.
//!
//! The primal object is the semi-infinite program over probability measures μ
//! on `[−V, V]`:
//!
//! ```text
//!   extremize  E_{X∼μ} e^{(η/2)X}
//!   subject to E_{X∼μ} X = mean,   E_{X∼μ} e^{ηX} = 1 .
//! ```
//!
//! Discretized to a uniform grid the program becomes a finite LP whose basic
//! solutions have at most three support atoms (three equality constraints).
//! [`grid_lp_solve`] enumerates exactly the supports an optimal basic solution
//! can have; [`grid_lp_solve_exhaustive`] enumerates every support of size up
//! to three and serves as the brute-force oracle at small grid sizes, with the
//! dense simplex in [`crate::simplex`] as a second, independent cross-check.
//!
//! The dual side carries the closed-form certificates: coefficients
//! `(c0, c1, c2)` making `u_η(x) = c0 + c2 e^{ηx} − e^{(η/2)x} + η c1 x`
//! nonnegative on `[−1, 1]`, which bounds the maximal exponential moment by
//! `1 − c1 η a/n` for a feasible target mean `−a/n`.

use serde::Serialize;
use thiserror::Error;

use crate::exec;

/// Constraint residual tolerance of the grid LP.
pub const LP_FEASIBILITY_TOL: f64 = 1e-9;
/// Threshold below which a slightly negative solved mass is clamped to zero.
pub const LP_MASS_CLAMP: f64 = 1e-12;
/// Largest admissible `η · V`: beyond this `e^{ηx}` leaves the f64 range on
/// the grid and every answer would be garbage, so instances are rejected.
pub const MAX_ETA_TIMES_SUPPORT: f64 = 700.0;

/// `c2` of the dual certificate for η ≤ 1 (fixed rounding of
/// `(e − √e)/(2(e − 1)) = 0.3112…`, kept bit-reproducible).
pub const CERT_C2_SMALL_ETA: f64 = 0.32;
/// `c1 = 1/2 − c2` for η ≤ 1.
pub const CERT_C1_SMALL_ETA: f64 = 0.18;
/// `c0 = 1 − c2` for η ≤ 1, as a literal so the triple is bit-reproducible.
pub const CERT_C0_SMALL_ETA: f64 = 0.68;
/// Certificate-bound coefficient for η > 1.
pub const CERT_COEFF_LARGE_ETA: f64 = 0.21;

/// `α = (√e − 1)²/2`, the slope budget of the η > 1 certificate family.
pub fn cert_alpha() -> f64 {
    let s = std::f64::consts::E.sqrt() - 1.0;
    0.5 * s * s
}

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("{name} must satisfy {requirement}, got {value}")]
    InvalidParameter { name: &'static str, requirement: &'static str, value: f64 },
    #[error("target mean {a_over_n} is not strictly inside the feasible region (0, {bound}); the bound applies only strictly inside, the boundary admits a unique two-point measure")]
    BoundaryCase { a_over_n: f64, bound: f64 },
}

/// The triple (η, target mean, support bound V) defining one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentInstance {
    pub eta: f64,
    /// Target of `E X`; `−a/n` in the concentration application.
    pub mean: f64,
    pub support_bound: f64,
}

impl MomentInstance {
    pub fn new(eta: f64, mean: f64, support_bound: f64) -> Result<Self, MomentError> {
        if !(eta > 0.0) {
            return Err(MomentError::InvalidParameter {
                name: "eta",
                requirement: "eta > 0",
                value: eta,
            });
        }
        if !(support_bound > 0.0) {
            return Err(MomentError::InvalidParameter {
                name: "support_bound",
                requirement: "support_bound > 0",
                value: support_bound,
            });
        }
        if !(mean.abs() <= support_bound) {
            return Err(MomentError::InvalidParameter {
                name: "mean",
                requirement: "|mean| <= support_bound",
                value: mean,
            });
        }
        if eta * support_bound > MAX_ETA_TIMES_SUPPORT {
            return Err(MomentError::InvalidParameter {
                name: "eta",
                requirement: "eta * support_bound <= 700 (f64 exponential range)",
                value: eta,
            });
        }
        Ok(MomentInstance { eta, mean, support_bound })
    }
}

/// Objective direction of [`grid_lp_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// Minimize `E h(X)` with `h(x) = −e^{(η/2)x}`.
    MinH,
    /// Maximize `E e^{(η/2)X}` (the negated objective; same optimizer).
    MaxMgf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// Solution of the grid-discretized moment problem.
#[derive(Debug, Clone, Serialize)]
pub struct GridSolution {
    /// Optimal objective under the requested sense; NaN when infeasible.
    pub value: f64,
    /// Support atoms `(x, p)` on the grid, at most three.
    pub support: Vec<(f64, f64)>,
    pub grid_size: usize,
    pub status: LpStatus,
}

/// Largest feasible `a/n` at exponent η (support `[−1, 1]`):
/// `(cosh η − 1)/sinh η`, evaluated in the equivalent form `tanh(η/2)` which
/// is stable as η → 0.
pub fn feasible_mean_bound(eta: f64) -> f64 {
    (eta / 2.0).tanh()
}

/// The unique feasible measure when the target mean sits exactly on the
/// feasibility boundary: a two-point measure on `{−V, V}` with masses
/// `(1 ± tanh(ηV/2))/2`. Closed form replaces the perturbation argument the
/// boundary case would otherwise need.
pub fn boundary_measure(eta: f64, support_bound: f64) -> [(f64, f64); 2] {
    let t = feasible_mean_bound(eta * support_bound);
    [(-support_bound, (1.0 + t) / 2.0), (support_bound, (1.0 - t) / 2.0)]
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    /// Maximization objective `Σ p e^{(η/2)x}`.
    mgf: f64,
    len: usize,
    idx: [usize; 3],
    mass: [f64; 3],
}

impl Candidate {
    /// Total order used for the deterministic argmax: larger objective wins,
    /// exact ties go to the lexicographically smaller support.
    fn beats(&self, other: &Candidate) -> bool {
        if self.mgf != other.mgf {
            return self.mgf > other.mgf;
        }
        self.idx[..self.len] < other.idx[..other.len]
    }
}

struct GridData {
    x: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    mean: f64,
}

impl GridData {
    fn build(instance: &MomentInstance, m: usize) -> GridData {
        let vb = instance.support_bound;
        let x: Vec<f64> = (0..m)
            .map(|i| -vb + 2.0 * vb * (i as f64) / ((m - 1) as f64))
            .collect();
        let v: Vec<f64> = x.iter().map(|&xi| (instance.eta * xi).exp()).collect();
        let w: Vec<f64> = x.iter().map(|&xi| (instance.eta / 2.0 * xi).exp()).collect();
        GridData { x, v, w, mean: instance.mean }
    }

    /// Checks the three constraint residuals of a mass vector on the given
    /// support, each against [`LP_FEASIBILITY_TOL`] scaled by the
    /// constraint's own magnitude.
    fn feasible(&self, idx: &[usize], mass: &[f64]) -> bool {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s1_abs = 0.0;
        let mut s2 = 0.0;
        for (&i, &p) in idx.iter().zip(mass) {
            s0 += p;
            s1 += p * self.x[i];
            s1_abs += p * self.x[i].abs();
            s2 += p * self.v[i];
        }
        (s0 - 1.0).abs() <= LP_FEASIBILITY_TOL
            && (s1 - self.mean).abs() <= LP_FEASIBILITY_TOL * s1_abs.max(1.0)
            && (s2 - 1.0).abs() <= LP_FEASIBILITY_TOL * s2.max(1.0)
    }

    fn objective(&self, idx: &[usize], mass: &[f64]) -> f64 {
        idx.iter().zip(mass).map(|(&i, &p)| p * self.w[i]).sum()
    }

    fn candidate(&self, idx: &[usize], mass: &[f64]) -> Option<Candidate> {
        let mut clamped = [0.0f64; 3];
        for (k, &p) in mass.iter().enumerate() {
            if p < -LP_MASS_CLAMP || !p.is_finite() {
                return None;
            }
            // Masses within the clamp of zero are zeroed outright, so a
            // degenerate triple collapses to the pair it really is.
            clamped[k] = if p.abs() <= LP_MASS_CLAMP { 0.0 } else { p };
        }
        if !self.feasible(idx, &clamped[..idx.len()]) {
            return None;
        }
        let mut c = Candidate {
            mgf: self.objective(idx, &clamped[..idx.len()]),
            len: idx.len(),
            idx: [usize::MAX; 3],
            mass: clamped,
        };
        c.idx[..idx.len()].copy_from_slice(idx);
        Some(c)
    }

    fn singleton(&self, i: usize) -> Option<Candidate> {
        self.candidate(&[i], &[1.0])
    }

    /// Pair solved from (normalization, mean); when the exponential residual
    /// rejects it, re-solved from (normalization, exponential) which handles
    /// the stiff constraint directly. Either solve must still pass the full
    /// residual check.
    fn pair(&self, a: usize, b: usize) -> Option<Candidate> {
        if a == b {
            return None;
        }
        let dx = self.x[b] - self.x[a];
        if dx != 0.0 {
            let pb = (self.mean - self.x[a]) / dx;
            if let Some(c) = self.candidate(&[a, b], &[1.0 - pb, pb]) {
                return Some(c);
            }
        }
        let dv = self.v[b] - self.v[a];
        if dv != 0.0 {
            let pb = (1.0 - self.v[a]) / dv;
            if let Some(c) = self.candidate(&[a, b], &[1.0 - pb, pb]) {
                return Some(c);
            }
        }
        None
    }

    fn triple(&self, a: usize, b: usize, c: usize) -> Option<Candidate> {
        if a == b || b == c || a == c {
            return None;
        }
        let idx = [a, b, c];
        // Equilibrate the exponential row before elimination.
        let vmax = self.v[a].max(self.v[b]).max(self.v[c]);
        let mut rows = [
            [1.0, 1.0, 1.0, 1.0],
            [self.x[a], self.x[b], self.x[c], self.mean],
            [
                self.v[a] / vmax,
                self.v[b] / vmax,
                self.v[c] / vmax,
                1.0 / vmax,
            ],
        ];
        let mass = solve3(&mut rows)?;
        self.candidate(&idx, &mass)
    }
}

/// Gaussian elimination with partial pivoting on a 3×4 augmented system.
fn solve3(rows: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs()))
            .unwrap();
        if rows[pivot][col].abs() < 1e-300 {
            return None;
        }
        rows.swap(col, pivot);
        let pivot_row = rows[col];
        for row in rows.iter_mut().skip(col + 1) {
            let factor = row[col] / pivot_row[col];
            for (c, p) in pivot_row.iter().enumerate().skip(col) {
                row[c] -= factor * p;
            }
        }
    }
    let mut out = [0.0f64; 3];
    for r in (0..3).rev() {
        let mut acc = rows[r][3];
        for c in (r + 1)..3 {
            acc -= rows[r][c] * out[c];
        }
        out[r] = acc / rows[r][r];
    }
    if out.iter().all(|p| p.is_finite()) {
        Some(out)
    } else {
        None
    }
}

fn merge(best: Option<Candidate>, other: Option<Candidate>) -> Option<Candidate> {
    match (best, other) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Candidate supports involving grid index `j`, per the optimal-support
/// structure (see [`best_candidate`]).
fn candidates_at(grid: &GridData, m: usize, j: usize) -> Option<Candidate> {
    let last = m - 1;
    let mut best = grid.singleton(j);
    if j > 0 {
        best = merge(best, grid.pair(0, j));
    }
    if j < last {
        best = merge(best, grid.pair(j, last));
        best = merge(best, grid.pair(j, j + 1));
    }
    if j + 1 < last {
        if j > 0 {
            best = merge(best, grid.triple(0, j, j + 1));
        }
        best = merge(best, grid.triple(j, j + 1, last));
    }
    if j > 0 && j < last {
        best = merge(best, grid.triple(0, j, last));
    }
    best
}

/// Finds the maximizing basic solution over the structured support family.
///
/// Why the family suffices: a dual optimal plane gives
/// `φ(x) = d0 + d1 x + d2 e^{ηx} − e^{(η/2)x} ≥ 0` at every grid point with
/// equality on the support of any optimal basic solution. Substituting
/// `s = e^{(η/2)x}` makes `φ'` a quadratic in `s`, so `φ` has at most two
/// stationary points and so at most one interior valley. Hence the zero set
/// of `φ` on the grid is contained in: the two endpoints, plus either a
/// single interior touching point or two interior points with no grid point
/// between them (the valley dips below zero only off-grid), i.e. an adjacent
/// pair. Every support enumerated here is of that shape; supersets are
/// included where harmless since extra feasible candidates can only tie or
/// lose against the optimum.
fn best_candidate(grid: &GridData, m: usize, sequential: bool) -> Option<Candidate> {
    let per_j = if sequential {
        exec::map_range_seq(m, |j| candidates_at(grid, m, j))
    } else {
        exec::map_range(m, |j| candidates_at(grid, m, j))
    };
    per_j.into_iter().fold(None, merge)
}

fn solution_from(
    candidate: Option<Candidate>,
    grid: &GridData,
    m: usize,
    sense: Sense,
) -> GridSolution {
    match candidate {
        Some(c) => {
            let mut support: Vec<(f64, f64)> = (0..c.len)
                .filter(|&k| c.mass[k] > 0.0)
                .map(|k| (grid.x[c.idx[k]], c.mass[k]))
                .collect();
            support.sort_by(|a, b| a.0.total_cmp(&b.0));
            let value = match sense {
                Sense::MaxMgf => c.mgf,
                Sense::MinH => -c.mgf,
            };
            GridSolution { value, support, grid_size: m, status: LpStatus::Optimal }
        }
        None => GridSolution {
            value: f64::NAN,
            support: Vec::new(),
            grid_size: m,
            status: LpStatus::Infeasible,
        },
    }
}

/// Solves the grid-discretized moment problem on the uniform `m`-point grid
/// of `[−V, V]` (both endpoints on-grid). Infeasibility is reported through
/// the status — an infeasible instance certifies that no random variable with
/// those moments exists.
pub fn grid_lp_solve(instance: &MomentInstance, m: usize, sense: Sense) -> GridSolution {
    assert!(m >= 3, "grid must have at least 3 points");
    assert!(
        instance.eta * instance.support_bound <= MAX_ETA_TIMES_SUPPORT,
        "eta * support_bound exceeds the f64 exponential range"
    );
    let grid = GridData::build(instance, m);
    solution_from(best_candidate(&grid, m, false), &grid, m, sense)
}

/// Always-sequential variant of [`grid_lp_solve`]; same result bit for bit.
pub fn grid_lp_solve_seq(instance: &MomentInstance, m: usize, sense: Sense) -> GridSolution {
    assert!(m >= 3, "grid must have at least 3 points");
    assert!(
        instance.eta * instance.support_bound <= MAX_ETA_TIMES_SUPPORT,
        "eta * support_bound exceeds the f64 exponential range"
    );
    let grid = GridData::build(instance, m);
    solution_from(best_candidate(&grid, m, true), &grid, m, sense)
}

/// Brute-force reference: enumerates every support of size ≤ 3 on the grid,
/// in O(m³). Parallelizes over the first grid index. Intended for oracle
/// cross-checks at small `m`.
pub fn grid_lp_solve_exhaustive(
    instance: &MomentInstance,
    m: usize,
    sense: Sense,
) -> GridSolution {
    assert!(m >= 3, "grid must have at least 3 points");
    let grid = GridData::build(instance, m);
    let per_i = exec::map_range(m, |i| {
        let mut best = grid.singleton(i);
        for j in (i + 1)..m {
            best = merge(best, grid.pair(i, j));
            for k in (j + 1)..m {
                best = merge(best, grid.triple(i, j, k));
            }
        }
        best
    });
    let best = per_i.into_iter().fold(None, merge);
    solution_from(best, &grid, m, sense)
}

/// Dual certificate coefficients; `u_η(x) = c0 + c2 e^{ηx} − e^{(η/2)x} + η c1 x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualCertificate {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

/// The closed-form certificate family: `(0.68, 0.18, 0.32)` for η ≤ 1, and
/// `c2 = 1/2 − α/η` with `α = (√e − 1)²/2` for η > 1.
pub fn dual_certificate(eta: f64) -> DualCertificate {
    if eta <= 1.0 {
        DualCertificate {
            c0: CERT_C0_SMALL_ETA,
            c1: CERT_C1_SMALL_ETA,
            c2: CERT_C2_SMALL_ETA,
        }
    } else {
        let c1 = cert_alpha() / eta;
        DualCertificate { c0: 0.5 + c1, c1, c2: 0.5 - c1 }
    }
}

/// `u_η(x)` for an arbitrary coefficient triple, in the cancellation-free
/// form `(c0 + c2 − 1) + c2·expm1(ηx) − expm1(ηx/2) + η c1 x`.
pub fn certificate_u(cert: &DualCertificate, eta: f64, x: f64) -> f64 {
    let a = eta * x;
    if a >= 700.0 {
        // c2 e^{ηx} dominates e^{ηx/2} long before f64 overflow.
        return f64::INFINITY;
    }
    (cert.c0 + cert.c2 - 1.0) + cert.c2 * a.exp_m1() - (a / 2.0).exp_m1() + eta * cert.c1 * x
}

/// Grid verification of a certificate on `[−1, 1]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertificateCheck {
    /// Minimum of `u_η` over the verification grid.
    pub min_u: f64,
    /// Grid point attaining the minimum.
    pub argmin: f64,
    /// `u_η(−1)` — the binding end of the constraint.
    pub u_at_minus_one: f64,
    /// `u_η(0)`; zero exactly when `c0 = 1 − c2`.
    pub u_at_zero: f64,
    /// `u'_η(0) = η (c1 + c2 − 1/2)`.
    pub du_at_zero: f64,
    /// `u''_η(0) = η² (c2 − 1/4)`; nonnegative makes 0 a local minimum.
    pub ddu_at_zero: f64,
    /// `min_u ≥ −1e−9`.
    pub valid: bool,
}

/// Evaluates `u_η` on a uniform grid of `[−1, 1]` with `grid_m ≥ 1000`
/// points and reports the minimum together with the local data at zero.
pub fn verify_certificate(cert: &DualCertificate, eta: f64, grid_m: usize) -> CertificateCheck {
    assert!(grid_m >= 1000, "certificate verification needs at least 1000 grid points");
    let mut min_u = f64::INFINITY;
    let mut argmin = -1.0;
    for i in 0..grid_m {
        let x = -1.0 + 2.0 * (i as f64) / ((grid_m - 1) as f64);
        let u = certificate_u(cert, eta, x);
        if u < min_u {
            min_u = u;
            argmin = x;
        }
    }
    CertificateCheck {
        min_u,
        argmin,
        u_at_minus_one: certificate_u(cert, eta, -1.0),
        u_at_zero: cert.c0 + cert.c2 - 1.0,
        du_at_zero: eta * (cert.c1 + cert.c2 - 0.5),
        ddu_at_zero: eta * eta * (cert.c2 - 0.25),
        valid: min_u >= -1e-9,
    }
}

/// Certificate-implied bound on the maximal exponential moment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertificateBound {
    /// Branch form: `1 − 0.18 η a/n` for η ≤ 1, `1 − 0.21 a/n` for η > 1.
    pub value: f64,
    /// Combined form `1 − 0.18 (η ∧ 1) a/n`, never below `value`.
    pub combined: f64,
}

/// Upper bound on `sup E e^{(η/2)X}` for target mean `−a/n`, valid strictly
/// inside the feasible region. On or outside the boundary the certificate
/// argument does not apply and the boundary error is returned instead.
pub fn certificate_bound(eta: f64, a_over_n: f64) -> Result<CertificateBound, MomentError> {
    if !(eta > 0.0) {
        return Err(MomentError::InvalidParameter {
            name: "eta",
            requirement: "eta > 0",
            value: eta,
        });
    }
    let bound = feasible_mean_bound(eta);
    if !(a_over_n > 0.0 && a_over_n < bound) {
        return Err(MomentError::BoundaryCase { a_over_n, bound });
    }
    let value = if eta <= 1.0 {
        1.0 - CERT_C1_SMALL_ETA * eta * a_over_n
    } else {
        1.0 - CERT_COEFF_LARGE_ETA * a_over_n
    };
    let combined = 1.0 - CERT_C1_SMALL_ETA * eta.min(1.0) * a_over_n;
    Ok(CertificateBound { value, combined })
}

/// Change of scale mapping an instance on `[−V, V]` to the equivalent one on
/// `[−1, 1]`: `(η, mean, V) ↦ (Vη, mean/V, 1)`. The two instances have the
/// same optimal value.
pub fn scale_instance(instance: &MomentInstance) -> MomentInstance {
    MomentInstance {
        eta: instance.eta * instance.support_bound,
        mean: instance.mean / instance.support_bound,
        support_bound: 1.0,
    }
}

/// Inverse of [`scale_instance`] onto support bound `v`.
pub fn unscale_instance(instance: &MomentInstance, v: f64) -> MomentInstance {
    MomentInstance {
        eta: instance.eta * instance.support_bound / v,
        mean: instance.mean * v / instance.support_bound,
        support_bound: v,
    }
}
