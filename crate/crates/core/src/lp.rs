//! Small dense two-phase simplex for `min cᵀx  s.t.  A·x = b, x ≥ 0`.
//!
//! Sized for the linear programs of the minimax engine: a few dozen rows and a
//! few hundred columns. Pricing is Dantzig's rule with a switch to Bland's rule
//! after a run of degenerate pivots.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct StandardForm {
    /// Row-major constraint matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    /// Entries below this magnitude never become pivots.
    pub pivot_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub cost_tol: f64,
    /// Phase-one residual above which the problem is declared infeasible.
    pub feas_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_pivots: 20_000, pivot_tol: 1e-11, cost_tol: 1e-12, feas_tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Basic column per non-redundant row (`None` for dropped rows).
    pub basis: Vec<Option<usize>>,
    /// Simplex multipliers `π` with `Bᵀπ = c_B`; zero on redundant rows.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs, last entry is minus the objective.
    d: Vec<f64>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let width = self.cols + 1;
        let p = self.t[r][e];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * prow[k];
                }
                row[e] = 0.0;
            }
        }
        let f = self.d[e];
        if f != 0.0 {
            for k in 0..width {
                self.d[k] -= f * prow[k];
            }
            self.d[e] = 0.0;
        }
        self.basis[r] = e;
    }

    fn price(&self, allowed: usize, bland: bool, tol: f64) -> Option<usize> {
        let candidates = (0..allowed).filter(|&j| self.d[j] < -tol);
        if bland {
            candidates.into_iter().next()
        } else {
            candidates.min_by(|&a, &b| self.d[a].total_cmp(&self.d[b]))
        }
    }

    fn ratio(&self, e: usize, bland: bool, tol: f64) -> Option<usize> {
        let rhs = self.cols;
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.t.iter().enumerate() {
            let a = row[e];
            if a <= tol {
                continue;
            }
            let ratio = row[rhs].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let slack = 1e-12 * (1.0 + br.abs());
                    if ratio < br - slack {
                        Some((i, ratio))
                    } else if ratio <= br + slack {
                        let take = if bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            a > self.t[bi][e]
                        };
                        if take { Some((i, ratio)) } else { Some((bi, br)) }
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    /// Runs simplex iterations over columns `< allowed`.
    ///
    /// A pivot counts as degenerate when it improves the objective by less
    /// than a relative 1e-13. After a run of them Bland's rule takes over for
    /// the rest of the phase; switching back is what lets rounding cycle.
    fn iterate(&mut self, allowed: usize, opts: &SimplexOptions, pivots: &mut usize) -> LpStatus {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if *pivots >= opts.max_pivots {
                return LpStatus::IterationLimit;
            }
            bland |= degenerate_run > 50;
            let Some(e) = self.price(allowed, bland, opts.cost_tol) else {
                return LpStatus::Optimal;
            };
            let Some(r) = self.ratio(e, bland, opts.pivot_tol) else {
                return LpStatus::Unbounded;
            };
            let gain = -self.d[e] * self.t[r][self.cols].max(0.0) / self.t[r][e];
            if gain <= 1e-13 * (1.0 + self.d[self.cols].abs()) {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
            *pivots += 1;
        }
    }
}

/// Solves the standard-form program.
pub fn solve(lp: &StandardForm, opts: &SimplexOptions) -> LpSolution {
    let m = lp.b.len();
    let n = lp.c.len();
    debug_assert!(lp.a.len() == m && lp.a.iter().all(|r| r.len() == n));

    // phase one: artificial identity on rows normalized to b ≥ 0
    let cols = n + m;
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = sign * lp.a[i][j];
        }
        row[n + i] = 1.0;
        row[cols] = sign * lp.b[i];
        t.push(row);
    }
    let mut d = vec![0.0; cols + 1];
    for row in &t {
        for j in 0..n {
            d[j] -= row[j];
        }
        d[cols] -= row[cols];
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), d, cols };
    let mut pivots = 0;
    let status = tab.iterate(cols, opts, &mut pivots);
    let bnorm = lp.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let infeasibility = -tab.d[cols];
    if status == LpStatus::IterationLimit || infeasibility > opts.feas_tol * (1.0 + bnorm) {
        let st = if status == LpStatus::IterationLimit { status } else { LpStatus::Infeasible };
        return failed(st, m, n, pivots);
    }

    // drive remaining artificials out of the basis; rows where that is
    // impossible are linearly dependent and get dropped
    let mut redundant = vec![false; m];
    for r in 0..m {
        if tab.basis[r] < n {
            continue;
        }
        let best = (0..n)
            .filter(|&j| !tab.basis.contains(&j))
            .max_by(|&a, &b| tab.t[r][a].abs().total_cmp(&tab.t[r][b].abs()));
        match best {
            Some(j) if tab.t[r][j].abs() > opts.pivot_tol => {
                tab.pivot(r, j);
                pivots += 1;
            }
            _ => redundant[r] = true,
        }
    }

    // phase two
    let mut d = vec![0.0; cols + 1];
    d[..n].copy_from_slice(&lp.c);
    for (r, row) in tab.t.iter().enumerate() {
        if redundant[r] {
            continue;
        }
        let cb = lp.c[tab.basis[r]];
        if cb != 0.0 {
            for k in 0..=cols {
                d[k] -= cb * row[k];
            }
        }
    }
    tab.d = d;
    // redundant rows keep an artificial basic at level zero; blank them so
    // they never constrain the ratio test
    for r in 0..m {
        if redundant[r] {
            for v in tab.t[r].iter_mut() {
                *v = 0.0;
            }
        }
    }
    let status = tab.iterate(n, opts, &mut pivots);
    if status != LpStatus::Optimal {
        return failed(status, m, n, pivots);
    }

    let basis: Vec<Option<usize>> = (0..m).map(|r| (!redundant[r]).then_some(tab.basis[r])).collect();
    let (x, duals) = refine(lp, &basis, &tab);
    let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    LpSolution { status: LpStatus::Optimal, x, basis, duals, objective, pivots }
}

fn failed(status: LpStatus, m: usize, n: usize, pivots: usize) -> LpSolution {
    LpSolution {
        status,
        x: vec![0.0; n],
        basis: vec![None; m],
        duals: vec![0.0; m],
        objective: f64::NAN,
        pivots,
    }
}

/// Recomputes `x_B` and `π` from the original data with an LU factorization of
/// the final basis, which is more accurate than reading them off the tableau.
fn refine(lp: &StandardForm, basis: &[Option<usize>], tab: &Tableau) -> (Vec<f64>, Vec<f64>) {
    let n = lp.c.len();
    let rows: Vec<usize> = (0..basis.len()).filter(|&r| basis[r].is_some()).collect();
    let cols: Vec<usize> = rows.iter().map(|&r| basis[r].unwrap()).collect();
    let k = rows.len();
    let mut x = vec![0.0; n];
    let mut duals = vec![0.0; basis.len()];
    if k == 0 {
        return (x, duals);
    }
    let bmat = DMatrix::from_fn(k, k, |i, j| lp.a[rows[i]][cols[j]]);
    let lu = bmat.clone().lu();
    let rhs = DVector::from_fn(k, |i, _| lp.b[rows[i]]);
    let cb = DVector::from_fn(k, |j, _| lp.c[cols[j]]);
    let xb = lu.solve(&rhs);
    let pi = bmat.transpose().lu().solve(&cb);
    match (xb, pi) {
        (Some(xb), Some(pi)) => {
            for (j, &c) in cols.iter().enumerate() {
                x[c] = xb[j].max(0.0);
            }
            for (i, &r) in rows.iter().enumerate() {
                duals[r] = pi[i];
            }
        }
        _ => {
            // singular refit: fall back to the tableau values
            for (r, &b) in basis.iter().enumerate() {
                if let Some(c) = b {
                    x[c] = tab.t[r][tab.cols].max(0.0);
                }
            }
            for (r, d) in duals.iter_mut().enumerate() {
                let sign = if lp.b[r] < 0.0 { -1.0 } else { 1.0 };
                *d = -sign * tab.d[n + r];
            }
        }
    }
    (x, duals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> StandardForm {
        StandardForm { a, b, c }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  36 at (2, 6)
        let p = lp(
            vec![
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0, 1.0, 0.0],
                vec![3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            vec![4.0, 12.0, 18.0],
            vec![-3.0, -5.0, 0.0, 0.0, 0.0],
        );
        let s = solve(&p, &SimplexOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        // strong duality: bᵀπ equals the optimum
        let dual_obj: f64 = s.duals.iter().zip(&p.b).map(|(a, b)| a * b).sum();
        assert!((dual_obj - s.objective).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inf = lp(vec![vec![1.0, 1.0]], vec![-1.0], vec![1.0, 1.0]);
        assert_eq!(solve(&inf, &SimplexOptions::default()).status, LpStatus::Infeasible);
        let unb = lp(vec![vec![1.0, -1.0]], vec![1.0], vec![0.0, -1.0]);
        assert_eq!(solve(&unb, &SimplexOptions::default()).status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let p = lp(
            vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]],
            vec![1.0, 2.0, 1.0],
            vec![1.0, 2.0, 0.0],
        );
        let s = solve(&p, &SimplexOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert_eq!(s.basis.iter().filter(|b| b.is_none()).count(), 1);
    }

    #[test]
    fn degenerate_zero_rhs() {
        // the dual of a discrete minimax problem has mostly zero right-hand sides
        let p = lp(
            vec![vec![1.0, -1.0, 1.0, -1.0, 0.0], vec![1.0, 1.0, 1.0, 1.0, 1.0]],
            vec![0.0, 1.0],
            vec![-1.0, 1.0, 1.0, -1.0, 0.0],
        );
        let s = solve(&p, &SimplexOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-12);
    }
}
