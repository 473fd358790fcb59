//! Discrete best uniform approximation from finite Müntz systems and the
//! growth functional `sup{|p(y)| : ‖p‖_A ≤ 1}`.
//!
//! Both problems are linear programs over the coefficients of an
//! orthonormalized basis. They are solved by an exchange (cutting-plane) loop:
//! the LP is solved on a small reference set of grid points, the full grid is
//! scanned for violations, the worst violators join the reference set, and the
//! loop stops once the dual bound and the grid residual agree to `tol`.
//!
//! Every value is exact for the discretized set only. For the growth
//! functional, fewer constraints mean a larger supremum, so a grid value is an
//! upper estimate of the continuous one; callers report the mesh alongside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::OrthoBasis;
use crate::lp::{self, LpStatus, SimplexOptions, StandardForm};
use crate::muntzeval::{check_exponents, MuntzPolynomial};
use crate::sets::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative duality gap at which an exchange loop stops.
    pub tol: f64,
    pub max_exchanges: usize,
    pub max_dimension: usize,
    /// Relative Gram–Schmidt pivot below which the basis is degenerate.
    pub rank_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_exchanges: 200, max_dimension: 16, rank_tol: 1e-26 }
    }
}

impl SolverOptions {
    pub fn with_max_dimension(mut self, cap: usize) -> Self {
        self.max_dimension = cap;
        self
    }

    fn check_dimension(&self, dimension: usize) -> Result<()> {
        if dimension > self.max_dimension {
            return Err(Error::DimensionCap { dimension, cap: self.max_dimension });
        }
        Ok(())
    }
}

/// Relative floor for the duality gap denominator, in units of `‖f‖_∞`.
const GAP_FLOOR: f64 = 1e-6;

/// Best approximation together with its optimality certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquioscillationResult {
    pub approximant: MuntzPolynomial,
    /// `max |f − p|` over the grid.
    pub error: f64,
    /// Reference points in increasing order, with the residual sign at each.
    pub reference_points: Vec<f64>,
    pub reference_signs: Vec<i8>,
    /// Lower bound on the best error: the larger of the LP dual bound and the
    /// de la Vallée Poussin bound `min |r|` over an alternating reference.
    pub certified_lower_bound: f64,
    pub relative_gap: f64,
    pub exchanges: usize,
    pub mesh: f64,
}

impl EquioscillationResult {
    /// True when consecutive reference signs alternate.
    pub fn alternates(&self) -> bool {
        self.reference_signs.windows(2).all(|w| w[0] == -w[1] && w[0] != 0)
    }
}

/// Solution of the sampled minimax problem in orthonormal coordinates.
#[derive(Debug, Clone)]
pub(crate) struct MinimaxSolution {
    pub z: Vec<f64>,
    pub residual: Vec<f64>,
    pub error: f64,
    pub lower_bound: f64,
    /// Grid indices carrying positive dual weight, sorted, with weight signs.
    pub reference: Vec<(usize, i8)>,
    pub exchanges: usize,
}

/// `min_z max_i |f_i − (Q z)_i|` by exchange over reference subsets.
pub(crate) fn minimax_on_basis(basis: &OrthoBasis, f: &[f64], opts: &SolverOptions) -> Result<MinimaxSolution> {
    let rows = basis.rows();
    let npts = rows.len();
    let m = basis.dim();
    let fscale = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if fscale == 0.0 {
        return Ok(MinimaxSolution {
            z: vec![0.0; m],
            residual: vec![0.0; npts],
            error: 0.0,
            lower_bound: 0.0,
            reference: Vec::new(),
            exchanges: 0,
        });
    }
    let fs: Vec<f64> = f.iter().map(|v| v / fscale).collect();
    let floor = GAP_FLOOR;

    let mut active: Vec<usize> = initial_spread(npts, m + 1);
    let mut in_active = vec![false; npts];
    for &i in &active {
        in_active[i] = true;
    }
    let simplex = SimplexOptions::default();
    let mut best: Option<MinimaxSolution> = None;

    for exchange in 0..=opts.max_exchanges {
        // dual: max Σ f w  s.t.  Qᵀw = 0, ‖w‖₁ ≤ 1, with w = u − v
        let k = active.len();
        let ncols = 2 * k + 1;
        let mut a = vec![vec![0.0; ncols]; m + 1];
        let mut c = vec![0.0; ncols];
        for (s, &i) in active.iter().enumerate() {
            for j in 0..m {
                a[j][s] = rows[i][j];
                a[j][k + s] = -rows[i][j];
            }
            a[m][s] = 1.0;
            a[m][k + s] = 1.0;
            c[s] = -fs[i];
            c[k + s] = fs[i];
        }
        a[m][2 * k] = 1.0;
        let mut b = vec![0.0; m + 1];
        b[m] = 1.0;
        let sol = lp::solve(&StandardForm { a, b, c }, &simplex);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => return Err(Error::NonConvergence(exchange)),
            // the dual is always feasible (w = 0) and bounded (‖w‖₁ ≤ 1)
            LpStatus::Infeasible | LpStatus::Unbounded => {
                return Err(Error::IllConditioned { column: m, pivot: 0.0 })
            }
        }
        let z: Vec<f64> = sol.duals[..m].iter().map(|v| -v).collect();
        let lower = (-sol.objective).max(0.0);
        let fit = basis.combine(&z);
        let residual: Vec<f64> = fs.iter().zip(&fit).map(|(a, b)| a - b).collect();
        let error = residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));

        let mut reference: Vec<(usize, i8)> = Vec::with_capacity(m + 1);
        for (s, &i) in active.iter().enumerate() {
            let (u, v) = (sol.x[s], sol.x[k + s]);
            if u > 0.0 || v > 0.0 {
                reference.push((i, if u >= v { 1 } else { -1 }));
            }
        }
        reference.sort_unstable();

        let current = MinimaxSolution {
            z: z.iter().map(|v| v * fscale).collect(),
            residual: residual.iter().map(|v| v * fscale).collect(),
            error: error * fscale,
            lower_bound: lower * fscale,
            reference,
            exchanges: exchange,
        };
        let gap = (error - lower) / error.max(floor);
        if best.as_ref().is_none_or(|b| current.error < b.error) {
            best = Some(current);
        }
        if gap <= opts.tol {
            let mut done = best.expect("set above");
            done.lower_bound = done.lower_bound.max(lower * fscale);
            return Ok(done);
        }

        let added = add_violators(&residual, lower, &mut active, &mut in_active, m + 1);
        if added == 0 {
            return Err(Error::NonConvergence(exchange));
        }
    }
    Err(Error::NonConvergence(opts.max_exchanges))
}

/// `count` indices spread evenly over `0..n`.
fn initial_spread(n: usize, count: usize) -> Vec<usize> {
    let count = count.min(n);
    if count <= 1 {
        return vec![0];
    }
    let mut idx: Vec<usize> = (0..count).map(|i| (i * (n - 1) + (count - 1) / 2) / (count - 1)).collect();
    idx.dedup();
    idx
}

/// Adds the largest violations (global maximum first, then local maxima of
/// `|v|` above `level`) that are not yet active. Returns how many were added.
fn add_violators(values: &[f64], level: f64, active: &mut Vec<usize>, in_active: &mut [bool], limit: usize) -> usize {
    let n = values.len();
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for i in 0..n {
        let v = values[i].abs();
        if v <= level || in_active[i] {
            continue;
        }
        let left = if i > 0 { values[i - 1].abs() } else { f64::NEG_INFINITY };
        let right = if i + 1 < n { values[i + 1].abs() } else { f64::NEG_INFINITY };
        if v >= left && v >= right {
            candidates.push((v, i));
        }
    }
    if candidates.is_empty() {
        // no strict local maximum outside the active set: take the worst point
        if let Some((i, _)) = values
            .iter()
            .enumerate()
            .filter(|(i, v)| !in_active[*i] && v.abs() > level)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        {
            candidates.push((values[i].abs(), i));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut added = 0;
    for &(_, i) in candidates.iter().take(limit) {
        active.push(i);
        in_active[i] = true;
        added += 1;
    }
    added
}

/// Best uniform approximation of grid samples `target` from
/// `span{x^λ : λ ∈ exponents}`.
pub fn best_uniform_approx(
    target: &[f64],
    grid: &Grid,
    exponents: &[f64],
    opts: &SolverOptions,
) -> Result<EquioscillationResult> {
    check_exponents(exponents)?;
    if exponents.is_empty() {
        return Err(Error::invalid("need at least one exponent"));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if target.len() != grid.len() {
        return Err(Error::invalid(format!("{} samples for {} grid points", target.len(), grid.len())));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target samples must be finite"));
    }
    let m = exponents.len();
    opts.check_dimension(m)?;
    if grid.len() <= m {
        return Err(Error::invalid(format!("grid of {} points cannot certify dimension {m}", grid.len())));
    }
    let points = grid.points();
    let basis = OrthoBasis::new(exponents, points, None, opts.rank_tol)?;
    let sol = minimax_on_basis(&basis, target, opts)?;
    let coefficients = basis.to_monomial(&sol.z);
    let approximant = MuntzPolynomial::new(exponents.to_vec(), coefficients)?;
    Ok(certify(sol, points, approximant, target, grid.mesh()))
}

/// Builds the public certificate from an exchange solution.
pub(crate) fn certify(
    sol: MinimaxSolution,
    points: &[f64],
    approximant: MuntzPolynomial,
    target: &[f64],
    mesh: f64,
) -> EquioscillationResult {
    let fscale = target.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let reference_points: Vec<f64> = sol.reference.iter().map(|&(i, _)| points[i]).collect();
    let reference_signs: Vec<i8> = sol.reference.iter().map(|&(_, s)| s).collect();
    // de la Vallée Poussin: on an alternating reference whose residual signs
    // match the dual weights, min |r| bounds the best error from below
    let matches = sol.reference.iter().all(|&(i, s)| sol.residual[i] * s as f64 > 0.0);
    let alternating = reference_signs.windows(2).all(|w| w[0] == -w[1]);
    let dlvp = if matches && alternating && !sol.reference.is_empty() {
        sol.reference.iter().map(|&(i, _)| sol.residual[i].abs()).fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    let lower = sol.lower_bound.max(dlvp).min(sol.error);
    let floor = GAP_FLOOR * fscale;
    let relative_gap = if sol.error == 0.0 { 0.0 } else { (sol.error - lower) / sol.error.max(floor) };
    EquioscillationResult {
        approximant,
        error: sol.error,
        reference_points,
        reference_signs,
        certified_lower_bound: lower,
        relative_gap,
        exchanges: sol.exchanges,
        mesh,
    }
}

/// Extremal element for the growth functional at one query point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthResult {
    /// `max |p(query)|` subject to `|p| ≤ 1` on the constraint grid.
    pub value: f64,
    /// LP bound on the restricted reference set; `value ≤ upper_bound`.
    pub upper_bound: f64,
    pub extremal: MuntzPolynomial,
    pub query: f64,
    pub constraint_active_points: Vec<f64>,
    pub mesh: f64,
    pub exchanges: usize,
}

/// The growth functional for one exponent list and constraint grid,
/// factorized once and reusable across query points.
#[derive(Debug, Clone)]
pub struct GrowthProblem {
    exponents: Vec<f64>,
    basis: OrthoBasis,
    points: Vec<f64>,
    mesh: f64,
    opts: SolverOptions,
    /// Well-spread starting reference (maximal-volume greedy pick of rows).
    seed_rows: Vec<usize>,
}

impl GrowthProblem {
    pub fn new(exponents: &[f64], constraint: &Grid, opts: &SolverOptions) -> Result<Self> {
        check_exponents(exponents)?;
        if exponents.is_empty() {
            return Err(Error::invalid("need at least one exponent"));
        }
        if constraint.is_empty() {
            return Err(Error::EmptyGrid);
        }
        opts.check_dimension(exponents.len())?;
        if constraint.len() < exponents.len() {
            return Err(Error::Unbounded);
        }
        let points = constraint.points().to_vec();
        let basis = OrthoBasis::new(exponents, &points, None, opts.rank_tol)?;
        let seed_rows = greedy_rows(basis.rows(), basis.dim());
        Ok(Self { exponents: exponents.to_vec(), basis, points, mesh: constraint.mesh(), opts: *opts, seed_rows })
    }

    pub fn dimension(&self) -> usize {
        self.exponents.len()
    }

    pub fn solve(&self, query: f64) -> Result<GrowthResult> {
        if !(0.0..=1.0).contains(&query) {
            return Err(Error::invalid(format!("query must lie in [0, 1], got {query}")));
        }
        let qy = self.basis.eval_row(query);
        let (z, upper, active, exchanges) = growth_exchange(self.basis.rows(), &qy, &self.seed_rows, &self.opts)?;
        let value: f64 = qy.iter().zip(&z).map(|(a, b)| a * b).sum();
        let coefficients = self.basis.to_monomial(&z);
        Ok(GrowthResult {
            value,
            upper_bound: upper.max(value),
            extremal: MuntzPolynomial::new(self.exponents.clone(), coefficients)?,
            query,
            constraint_active_points: active.into_iter().map(|i| self.points[i]).collect(),
            mesh: self.mesh,
            exchanges,
        })
    }

    /// `|p(x)|` of a growth extremal evaluated through the orthonormal basis,
    /// which stays accurate where monomial coefficients cancel badly.
    pub fn eval_extremal_stable(&self, result: &GrowthResult, x: f64) -> Result<f64> {
        let z = self.coordinates(&result.extremal)?;
        Ok(self.basis.eval_row(x).iter().zip(&z).map(|(a, b)| a * b).sum())
    }

    fn coordinates(&self, p: &MuntzPolynomial) -> Result<Vec<f64>> {
        // Q coordinates of p: project the grid values (Q has orthonormal columns)
        let values: Vec<f64> = self.points.iter().map(|&x| p.eval(x)).collect();
        let rows = self.basis.rows();
        Ok((0..self.dimension()).map(|j| rows.iter().zip(&values).map(|(r, v)| r[j] * v).sum()).collect())
    }
}

/// `sup{|p(query)| : ‖p‖_constraint ≤ 1}` over `span{x^λ}`.
pub fn growth_functional(exponents: &[f64], constraint: &Grid, query: f64, opts: &SolverOptions) -> Result<GrowthResult> {
    GrowthProblem::new(exponents, constraint, opts)?.solve(query)
}

/// Greedy maximal-volume selection of `m` rows (pivoted Gram–Schmidt on rows).
fn greedy_rows(rows: &[Vec<f64>], m: usize) -> Vec<usize> {
    let mut work: Vec<Vec<f64>> = rows.to_vec();
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m.min(rows.len()) {
        let (best, norm) = work
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, r.iter().map(|v| v * v).sum::<f64>()))
            .fold((usize::MAX, -1.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if best == usize::MAX || norm <= 0.0 {
            break;
        }
        chosen.push(best);
        let pivot: Vec<f64> = work[best].iter().map(|v| v / norm.sqrt()).collect();
        for r in work.iter_mut() {
            let h: f64 = r.iter().zip(&pivot).map(|(a, b)| a * b).sum();
            for (a, b) in r.iter_mut().zip(&pivot) {
                *a -= h * b;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Exchange loop for `max qyᵀz s.t. |rows·z| ≤ 1`. Returns `(z, upper bound,
/// active indices, exchanges)`.
pub(crate) fn growth_exchange(
    rows: &[Vec<f64>],
    qy: &[f64],
    seed: &[usize],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, f64, Vec<usize>, usize)> {
    let m = qy.len();
    let npts = rows.len();
    let qnorm = qy.iter().map(|v| v * v).sum::<f64>().sqrt();
    if qnorm == 0.0 {
        return Ok((vec![0.0; m], 0.0, Vec::new(), 0));
    }
    let b: Vec<f64> = qy.iter().map(|v| v / qnorm).collect();
    let mut active: Vec<usize> = seed.to_vec();
    let mut in_active = vec![false; npts];
    for &i in &active {
        in_active[i] = true;
    }
    for i in initial_spread(npts, m + 1) {
        if !in_active[i] {
            in_active[i] = true;
            active.push(i);
        }
    }
    let simplex = SimplexOptions::default();
    for exchange in 0..=opts.max_exchanges {
        // dual: min ‖w‖₁ s.t. Σ wᵢ rowsᵢ = qy/‖qy‖
        let k = active.len();
        let mut a = vec![vec![0.0; 2 * k]; m];
        for (s, &i) in active.iter().enumerate() {
            for j in 0..m {
                a[j][s] = rows[i][j];
                a[j][k + s] = -rows[i][j];
            }
        }
        let c = vec![1.0; 2 * k];
        let sol = lp::solve(&StandardForm { a, b: b.clone(), c }, &simplex);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Unbounded),
            LpStatus::IterationLimit => return Err(Error::NonConvergence(exchange)),
            LpStatus::Unbounded => return Err(Error::IllConditioned { column: m, pivot: 0.0 }),
        }
        let z = sol.duals.clone();
        let values: Vec<f64> = rows.iter().map(|r| r.iter().zip(&z).map(|(a, b)| a * b).sum()).collect();
        let worst = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let upper = sol.objective * qnorm;
        if worst <= 1.0 + opts.tol {
            let z = if worst > 1.0 { z.iter().map(|v| v / worst).collect() } else { z };
            let mut touching: Vec<usize> = active
                .iter()
                .enumerate()
                .filter(|&(s, _)| sol.x[s] > 0.0 || sol.x[k + s] > 0.0)
                .map(|(_, &i)| i)
                .collect();
            touching.sort_unstable();
            return Ok((z, upper, touching, exchange));
        }
        if add_violators(&values, 1.0, &mut active, &mut in_active, m) == 0 {
            return Err(Error::NonConvergence(exchange));
        }
    }
    Err(Error::NonConvergence(opts.max_exchanges))
}

/// Chebyshev polynomial `T_n(x)`: cosine form on `[−1, 1]`, three-term
/// recurrence outside.
pub fn chebyshev_t(n: u32, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        return (n as f64 * x.acos()).cos();
    }
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}
