//! Small dense two-phase simplex for equality-constrained problems
//! `max cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Bland's rule throughout, so the method terminates on the degenerate
//! boundary instances the moment problem produces. This is the independent
//! cross-check for [`crate::moment::grid_lp_solve`]; it shares no code with
//! the support enumeration.

const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Row-major constraint matrix including artificial columns.
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_structural: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..self.rows[r].len() {
                let delta = factor * self.rows[row][c];
                self.rows[r][c] -= delta;
            }
            self.rhs[r] -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// Reduced costs of the given objective under the current basis.
    fn reduced_costs(&self, objective: &[f64]) -> Vec<f64> {
        let m = self.rows.len();
        let n = self.rows[0].len();
        // Basic objective multipliers y solve yᵀB = c_B; with an explicit
        // tableau the basis columns are unit vectors, so y_r = c_{basis[r]}.
        let mut reduced = vec![0.0; n];
        for j in 0..n {
            let mut v = if j < objective.len() { objective[j] } else { 0.0 };
            for r in 0..m {
                let cb = if self.basis[r] < objective.len() {
                    objective[self.basis[r]]
                } else {
                    0.0
                };
                v -= cb * self.rows[r][j];
            }
            reduced[j] = v;
        }
        reduced
    }

    /// One Bland-rule phase; maximizes the objective restricted to columns
    /// `< allowed`. Returns false on unboundedness.
    fn run(&mut self, objective: &[f64], allowed: usize) -> bool {
        loop {
            let reduced = self.reduced_costs(objective);
            let entering = (0..allowed).find(|&j| reduced[j] > REDUCED_COST_TOL);
            let entering = match entering {
                Some(j) => j,
                None => return true,
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][entering];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    let better = match leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio
                                || (ratio == lratio && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, entering),
                None => return false,
            }
        }
    }
}

/// Solves `max cᵀx  s.t.  Ax = b, x ≥ 0` for a dense row-major `a`.
pub fn maximize_equality_form(
    objective: &[f64],
    a: &[Vec<f64>],
    b: &[f64],
) -> SimplexOutcome {
    let m = a.len();
    let n = objective.len();
    assert_eq!(b.len(), m);
    assert!(a.iter().all(|row| row.len() == n));

    // Ensure nonnegative right-hand sides, then append the artificial
    // identity as the starting basis.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (row, &bi) in a.iter().zip(b) {
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|&v| sign * v).collect();
        r.resize(n + m, 0.0);
        rows.push(r);
        rhs.push(sign * bi);
    }
    for (r, row) in rows.iter_mut().enumerate() {
        row[n + r] = 1.0;
    }
    let basis: Vec<usize> = (n..n + m).collect();
    let mut tableau = Tableau { rows, rhs, basis, n_structural: n };

    // Phase 1: maximize minus the artificial mass over all columns.
    let mut phase1 = vec![0.0; n];
    phase1.resize(n + m, -1.0);
    if !tableau.run(&phase1, n + m) {
        return SimplexOutcome::Unbounded;
    }
    let artificial_mass: f64 = (0..m)
        .filter(|&r| tableau.basis[r] >= n)
        .map(|r| tableau.rhs[r])
        .sum();
    if artificial_mass > PHASE1_TOL {
        return SimplexOutcome::Infeasible;
    }
    // Drive any degenerate artificial out of the basis when possible.
    for r in 0..m {
        if tableau.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| tableau.rows[r][j].abs() > PIVOT_TOL) {
                tableau.pivot(r, col);
            }
        }
    }

    // Phase 2 over structural columns only.
    let mut phase2 = vec![0.0; n + m];
    phase2[..n].copy_from_slice(objective);
    if !tableau.run(&phase2, tableau.n_structural) {
        return SimplexOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if tableau.basis[r] < n {
            x[tableau.basis[r]] = tableau.rhs[r].max(0.0);
        }
    }
    let value = objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
    SimplexOutcome::Optimal { x, value }
}
