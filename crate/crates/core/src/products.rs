//! Products of Müntz spaces `M(Λ₁, …, Λ_k) = {p₁⋯p_k : p_j ∈ M(Λ_j)}`.
//!
//! Contents: superlevel-set measures and the per-factor constants `α_j` whose
//! product bounds the Remez constant of the product set, four-square monomial
//! witnesses for `H₄`, and a coordinate-descent search for best uniform
//! approximation by products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSequence;
use crate::linalg::OrthoBasis;
use crate::minimax::{minimax_on_basis, GrowthProblem, SolverOptions};
use crate::muntzeval::{power, MuntzPolynomial};
use crate::sets::{fat_cantor, subdivisions, Grid, IntervalUnion};

/// `k` exponent sequences, one per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpaceSpec {
    sequences: Vec<ExponentSequence>,
}

impl ProductSpaceSpec {
    pub fn new(sequences: Vec<ExponentSequence>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::invalid("a product space needs k ≥ 1 factors"));
        }
        for s in &sequences {
            s.validate()?;
        }
        Ok(Self { sequences })
    }

    /// `H_k`: every factor spanned by square exponents.
    pub fn squares(k: usize) -> Result<Self> {
        Self::new(vec![ExponentSequence::squares(); k])
    }

    pub fn k(&self) -> usize {
        self.sequences.len()
    }

    pub fn sequences(&self) -> &[ExponentSequence] {
        &self.sequences
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPolynomial {
    factors: Vec<MuntzPolynomial>,
}

impl ProductPolynomial {
    pub fn new(factors: Vec<MuntzPolynomial>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a product needs at least one factor"));
        }
        Ok(Self { factors })
    }

    /// Checks the factor count and that every exponent of factor `j` belongs
    /// to `Λ_j`.
    pub fn conforms_to(&self, spec: &ProductSpaceSpec) -> bool {
        self.factors.len() == spec.k()
            && self
                .factors
                .iter()
                .zip(spec.sequences())
                .all(|(p, seq)| p.exponents().iter().all(|&l| seq.contains(l)))
    }

    pub fn factors(&self) -> &[MuntzPolynomial] {
        &self.factors
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.factors.iter().map(|p| p.eval(x)).product()
    }
}

/// Product of factor evaluations.
pub fn eval_product(p: &ProductPolynomial, x: f64) -> f64 {
    p.eval(x)
}

/// Measure of `{x ∈ [y, 1] : |p(x)| > θ·|p(y)|}`, accumulated over uniform
/// cells of width `≤ mesh` tested at their midpoints.
pub fn superlevel_measure(p: impl Fn(f64) -> f64, y: f64, theta: f64, mesh: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::invalid(format!("y must lie in [0, 1), got {y}")));
    }
    if !(mesh > 0.0) || !(theta >= 0.0) {
        return Err(Error::invalid("mesh must be positive and theta non-negative"));
    }
    let cells = Cells::new(y, mesh);
    let level = theta * p(y).abs();
    let count = cells.midpoints().filter(|&x| p(x).abs() > level).count();
    Ok(count as f64 * cells.width)
}

/// Uniform cells partitioning `[y, 1]`.
#[derive(Debug, Clone, Copy)]
struct Cells {
    y: f64,
    count: usize,
    width: f64,
}

impl Cells {
    fn new(y: f64, mesh: f64) -> Self {
        let count = subdivisions(1.0 - y, mesh);
        Self { y, count, width: (1.0 - y) / count as f64 }
    }

    fn midpoints(self) -> impl Iterator<Item = f64> {
        (0..self.count).map(move |i| self.y + (i as f64 + 0.5) * self.width)
    }

    /// Cells needed to cover measure `target` (rounded up).
    fn needed(self, target: f64) -> usize {
        ((target / self.width) * (1.0 - 1e-12)).ceil().max(0.0) as usize
    }
}

/// Number of points in the `y` grid on `[0, 1 − s]` used for `α_j`.
pub const ALPHA_Y_POINTS: usize = 33;

fn alpha_y_grid(s: f64) -> Result<Grid> {
    Grid::uniform(0.0, 1.0 - s, ALPHA_Y_POINTS)
}

/// Seeded generator for one task. Independent of scheduling: the stream is
/// fixed by `(seed, tag, index)` alone.
fn task_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

const TAG_ALPHA: u64 = 1;
const TAG_FRESH: u64 = 2;
const TAG_SETS: u64 = 3;
const TAG_SEARCH: u64 = 4;

/// Grid on which sampling bases are orthonormalized.
const SAMPLING_POINTS: usize = 1001;

/// Standard-normal coordinates in an orthonormal basis of `span{x^λ}` on
/// `[0, 1]`, mapped back to monomial coefficients.
fn random_element(basis: &OrthoBasis, exponents: &[f64], rng: &mut impl Rng) -> Result<MuntzPolynomial> {
    let z: Vec<f64> = (0..exponents.len()).map(|_| rng.sample(StandardNormal)).collect();
    MuntzPolynomial::new(exponents.to_vec(), basis.to_monomial(&z))
}

fn sampling_basis(exponents: &[f64], opts: &SolverOptions) -> Result<OrthoBasis> {
    let grid = Grid::uniform(0.0, 1.0, SAMPLING_POINTS)?;
    OrthoBasis::new(exponents, grid.points(), None, opts.rank_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub j: usize,
    pub n: usize,
    pub s: f64,
    pub k: usize,
    pub alpha: f64,
    pub sample_count: usize,
    pub mesh: f64,
    /// The sample family the estimate is valid for.
    #[serde(skip)]
    pub samples: Vec<MuntzPolynomial>,
}

/// Relative bisection width for `α`.
pub const ALPHA_BISECTION_TOL: f64 = 1e-3;

/// Smallest `α ≥ 1` (to [`ALPHA_BISECTION_TOL`]) such that every sampled
/// `p ∈ span(truncate(seq, n))` and every `y` on a grid of `[0, 1 − s]` satisfy
/// `m({x ∈ [y, 1] : |p(x)| > |p(y)|/α}) ≥ 1 − y − s/(2k)`.
///
/// The strict condition is open in `α`, so the returned value is its infimum
/// (the closed `≥` form). Constants give exactly 1.
///
/// The samples are `budget` random elements plus the growth extremals at 0
/// for the constraint sets `[1 − s, 1]` and `[(1 − s)/2, (1 + s)/2]`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_alpha(
    seq: &ExponentSequence,
    j: usize,
    n: usize,
    s: f64,
    k: usize,
    budget: usize,
    seed: u64,
    mesh: f64,
    opts: &SolverOptions,
) -> Result<AlphaEstimate> {
    if budget == 0 {
        return Err(Error::invalid("alpha estimation needs a sampling budget ≥ 1"));
    }
    if !(s > 0.0 && s < 1.0) || k == 0 {
        return Err(Error::invalid(format!("need s in (0, 1) and k ≥ 1 (got s = {s}, k = {k})")));
    }
    let exponents = seq.truncate(n)?;
    let basis = sampling_basis(&exponents, opts)?;
    let mut samples: Vec<MuntzPolynomial> = (0..budget)
        .into_par_iter()
        .map(|i| random_element(&basis, &exponents, &mut task_rng(seed, TAG_ALPHA + 16 * j as u64, i as u64)))
        .collect::<Result<_>>()?;
    let half = 0.5 * (1.0 - s);
    for (lo, hi) in [(1.0 - s, 1.0), (half, half + s)] {
        let grid = IntervalUnion::interval(lo, hi)?.discretize(mesh)?;
        if grid.len() >= exponents.len() {
            samples.push(GrowthProblem::new(&exponents, &grid, opts)?.solve(0.0)?.extremal);
        }
    }
    estimate_alpha_for(samples, j, n, s, k, mesh)
}

/// [`estimate_alpha`] over an explicit sample family.
pub fn estimate_alpha_for(
    samples: Vec<MuntzPolynomial>,
    j: usize,
    n: usize,
    s: f64,
    k: usize,
    mesh: f64,
) -> Result<AlphaEstimate> {
    let ys = alpha_y_grid(s)?;
    let slack = s / (2.0 * k as f64);
    // for each (p, y): |p(y)| and the `needed`-th largest |p| over the cells
    let critical: Vec<(f64, f64)> = samples
        .par_iter()
        .flat_map_iter(|p| {
            ys.points().iter().filter_map(move |&y| {
                let py = p.eval(y).abs();
                if py == 0.0 || p.is_zero() {
                    return None;
                }
                let cells = Cells::new(y, mesh);
                let need = cells.needed(1.0 - y - slack);
                if need == 0 {
                    return None;
                }
                let mut vals: Vec<f64> = cells.midpoints().map(|x| p.eval(x).abs()).collect();
                let idx = need.min(vals.len()) - 1;
                let (_, kth, _) = vals.select_nth_unstable_by(idx, |a, b| b.total_cmp(a));
                Some((py, *kth))
            })
        })
        .collect();
    let holds = |alpha: f64| critical.iter().all(|&(py, kth)| kth >= py / alpha);

    let mut lo = 1.0;
    let alpha = if holds(lo) {
        lo
    } else {
        let mut hi = 2.0;
        while !holds(hi) {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NonConvergence(0));
            }
        }
        while (hi - lo) > ALPHA_BISECTION_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(AlphaEstimate { j, n, s, k, alpha, sample_count: samples.len(), mesh, samples })
}

/// A random compact subset of `[ρ, 1]` with measure at least `s`.
fn random_admissible(s: f64, rho: f64, rng: &mut impl Rng) -> Result<IntervalUnion> {
    let span = 1.0 - rho;
    let cantor_measure = span * (0.5 + 1.0 / 16.0);
    if cantor_measure >= s && rng.gen_range(0..4) == 0 {
        return fat_cantor(3, (rho, 1.0));
    }
    let pieces = rng.gen_range(1..=3usize);
    let total = rng.gen_range(s..=span);
    let split = |rng: &mut dyn rand::RngCore, parts: usize, sum: f64| -> Vec<f64> {
        let w: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.05..1.0)).collect();
        let tot: f64 = w.iter().sum();
        w.iter().map(|v| v / tot * sum).collect()
    };
    let lengths = split(rng, pieces, total);
    let gaps = split(rng, pieces + 1, span - total);
    let mut x = rho + gaps[0];
    let mut raw = Vec::with_capacity(pieces);
    for i in 0..pieces {
        let end = (x + lengths[i]).min(1.0);
        raw.push((x, end));
        x = end + gaps[i + 1];
    }
    let set = IntervalUnion::normalize(raw)?;
    if set.measure() < s {
        // rounding can shave a few ulps; fall back to the full carrier tail
        return IntervalUnion::interval(1.0 - s, 1.0);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductCheckRow {
    pub sample: usize,
    pub ratio: f64,
    pub c: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRemezReport {
    /// `α₁⋯α_k`.
    pub c: f64,
    pub in_sample: usize,
    /// In-sample `y` where the intersection of the factor superlevel sets has
    /// measure below `1 − y − s/2`.
    pub in_sample_chain_violations: usize,
    /// In-sample products with `‖p‖_[0,ρ] > c·‖p‖_A`.
    pub in_sample_norm_violations: usize,
    pub samples: usize,
    pub violations: usize,
    /// Fresh-sample rows.
    pub rows: Vec<ProductCheckRow>,
}

impl ProductRemezReport {
    /// Out-of-sample violation rate above 1% is flagged.
    pub fn flagged(&self) -> bool {
        self.violations as f64 > 0.01 * self.samples as f64
    }
}

/// Checks `‖p‖_[0,ρ] ≤ (α₁⋯α_k)·‖p‖_A` on the in-sample products (factor `i`
/// of every estimate's sample family) and on `budget` fresh products, each
/// against a random admissible `A ⊂ [ρ, 1]` with `m(A) ≥ s`. The in-sample
/// pass also checks the superlevel intersection bound `1 − y − s/2`.
#[allow(clippy::too_many_arguments)]
pub fn verify_product_remez(
    spec: &ProductSpaceSpec,
    n: usize,
    s: f64,
    rho: f64,
    alphas: &[AlphaEstimate],
    budget: usize,
    seed: u64,
    mesh: f64,
    opts: &SolverOptions,
) -> Result<ProductRemezReport> {
    let k = spec.k();
    if alphas.len() != k {
        return Err(Error::invalid(format!("{} alpha estimates for k = {k}", alphas.len())));
    }
    if !(rho > 0.0 && rho <= 1.0 - s) {
        return Err(Error::invalid(format!("need 0 < rho ≤ 1 − s (rho = {rho}, s = {s})")));
    }
    for a in alphas {
        if a.n != n || a.k != k || a.s != s {
            return Err(Error::invalid(format!(
                "alpha estimate for factor {} was made with (n, s, k) = ({}, {}, {}), expected ({n}, {s}, {k})",
                a.j, a.n, a.s, a.k
            )));
        }
    }
    let c: f64 = alphas.iter().map(|a| a.alpha).product();
    let ys = alpha_y_grid(s)?;
    let near: Vec<f64> = ys.points().iter().copied().filter(|&y| y <= rho).collect();

    let ratio_for = |p: &ProductPolynomial, set: &IntervalUnion| -> Result<f64> {
        let inner = near.iter().map(|&y| p.eval(y).abs()).fold(0.0, f64::max);
        let grid = set.discretize(mesh)?;
        let outer = grid.points().iter().map(|&x| p.eval(x).abs()).fold(0.0, f64::max);
        Ok(if inner == 0.0 { 0.0 } else { inner / outer })
    };

    let in_sample = alphas.iter().map(|a| a.samples.len()).min().unwrap_or(0);
    let in_results: Vec<(usize, bool)> = (0..in_sample)
        .into_par_iter()
        .map(|i| {
            let p = ProductPolynomial::new(alphas.iter().map(|a| a.samples[i].clone()).collect())?;
            let mut chain = 0;
            for &y in ys.points() {
                let cells = Cells::new(y, mesh);
                let levels: Vec<f64> = p.factors.iter().zip(alphas).map(|(f, a)| f.eval(y).abs() / a.alpha).collect();
                let good = cells
                    .midpoints()
                    .filter(|&x| p.factors.iter().zip(&levels).all(|(f, &l)| f.eval(x).abs() >= l))
                    .count();
                if (good as f64) * cells.width < 1.0 - y - 0.5 * s - 1e-12 {
                    chain += 1;
                }
            }
            let set = random_admissible(s, rho, &mut task_rng(seed, TAG_SETS, i as u64))?;
            Ok((chain, ratio_for(&p, &set)? > c))
        })
        .collect::<Result<_>>()?;

    let bases: Vec<(Vec<f64>, OrthoBasis)> = spec
        .sequences()
        .iter()
        .map(|seq| {
            let e = seq.truncate(n)?;
            let b = sampling_basis(&e, opts)?;
            Ok((e, b))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ProductCheckRow> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, TAG_FRESH, i as u64);
            let factors = bases
                .iter()
                .map(|(e, b)| random_element(b, e, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let p = ProductPolynomial::new(factors)?;
            let set = random_admissible(s, rho, &mut rng)?;
            let ratio = ratio_for(&p, &set)?;
            Ok(ProductCheckRow { sample: i, ratio, c, violation: ratio > c })
        })
        .collect::<Result<_>>()?;

    Ok(ProductRemezReport {
        c,
        in_sample,
        in_sample_chain_violations: in_results.iter().map(|r| r.0).sum(),
        in_sample_norm_violations: in_results.iter().filter(|r| r.1).count(),
        samples: budget,
        violations: rows.iter().filter(|r| r.violation).count(),
        rows,
    })
}

/// `(a, b, c, d)` with `a ≥ b ≥ c ≥ d` and `a² + b² + c² + d² = n`, taking the
/// lexicographically largest such tuple.
pub fn four_squares(n: u64) -> (u64, u64, u64, u64) {
    for a in (0..=n.isqrt()).rev() {
        let ra = n - a * a;
        for b in (0..=ra.isqrt().min(a)).rev() {
            let rb = ra - b * b;
            for c in (0..=rb.isqrt().min(b)).rev() {
                let rc = rb - c * c;
                let d = rc.isqrt();
                if d * d == rc && d <= c {
                    return (a, b, c, d);
                }
            }
        }
    }
    unreachable!("every natural number is a sum of four squares")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H4Witness {
    pub n: u64,
    pub squares: (u64, u64, u64, u64),
    pub factors: ProductPolynomial,
    pub max_abs_deviation: f64,
}

/// Writes `xⁿ` as `x^{a²}·x^{b²}·x^{c²}·x^{d²}` and measures the deviation of
/// the product from `xⁿ` on a grid.
pub fn monomial_in_h4(n: u64, grid: &Grid) -> Result<H4Witness> {
    let sq = four_squares(n);
    let factors = [sq.0, sq.1, sq.2, sq.3]
        .iter()
        .map(|&r| MuntzPolynomial::monomial((r * r) as f64))
        .collect::<Result<Vec<_>>>()?;
    let factors = ProductPolynomial::new(factors)?;
    if grid.points().iter().any(|&x| x > 1.0) {
        return Err(Error::invalid("grid must lie inside [0, 1]"));
    }
    let max_abs_deviation = grid
        .points()
        .iter()
        .map(|&x| (factors.eval(x) - power(x, n as f64)).abs())
        .fold(0.0, f64::max);
    Ok(H4Witness { n, squares: sq, factors, max_abs_deviation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    /// Best error over all starts after each round; nonincreasing.
    pub best_error_by_round: Vec<f64>,
    pub best: ProductPolynomial,
    /// Final error of each start: all-ones, best monomial, then the random
    /// restarts.
    pub start_errors: Vec<f64>,
    /// Inner solves that failed and were recovered by perturbation.
    pub perturbations: usize,
}

/// Best uniform approximation of grid samples by products in
/// `M(Λ₁, …, Λ_k)` truncated at `n`, by cyclic coordinate descent.
///
/// With all factors but `p_j` fixed the residual `f − g·p_j` is linear in
/// `p_j`, so each coordinate step is an exact weighted minimax solve. Steps
/// that would increase the error are rejected. Start 0 uses constant factors,
/// start 1 the best single scaled monomial reachable as a product, and the
/// remaining `restarts` starts use seeded random factors.
#[allow(clippy::too_many_arguments)]
pub fn product_approx_search(
    target: &[f64],
    grid: &Grid,
    spec: &ProductSpaceSpec,
    n: usize,
    rounds: usize,
    restarts: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<SearchReport> {
    if rounds == 0 {
        return Err(Error::invalid("product search needs rounds ≥ 1"));
    }
    if target.len() != grid.len() {
        return Err(Error::invalid(format!("{} samples for {} grid points", target.len(), grid.len())));
    }
    let exps: Vec<Vec<f64>> = spec.sequences().iter().map(|s| s.truncate(n)).collect::<Result<_>>()?;
    for e in &exps {
        if e.len() > opts.max_dimension {
            return Err(Error::DimensionCap { dimension: e.len(), cap: opts.max_dimension });
        }
    }
    let runs: Vec<(Vec<f64>, Vec<MuntzPolynomial>, usize)> = (0..restarts + 2)
        .into_par_iter()
        .map(|start| descend(target, grid, &exps, rounds, start, seed, opts))
        .collect::<Result<_>>()?;

    let best_error_by_round = (0..rounds)
        .map(|r| runs.iter().map(|run| run.0[r]).fold(f64::INFINITY, f64::min))
        .collect();
    let (best_idx, _) = runs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, run)| if run.0[rounds - 1] < acc.1 { (i, run.0[rounds - 1]) } else { acc });
    Ok(SearchReport {
        best_error_by_round,
        best: ProductPolynomial::new(runs[best_idx].1.clone())?,
        start_errors: runs.iter().map(|r| r.0[rounds - 1]).collect(),
        perturbations: runs.iter().map(|r| r.2).sum(),
    })
}

/// Factor `Σ c_i x^{λ_i}` with a single nonzero coefficient.
fn single_term(exps: &[f64], index: usize, coeff: f64) -> Result<MuntzPolynomial> {
    let mut c = vec![0.0; exps.len()];
    c[index] = coeff;
    MuntzPolynomial::new(exps.to_vec(), c)
}

/// Largest exponent-tuple enumeration tried by [`monomial_start`].
const MONOMIAL_START_TUPLES: usize = 200_000;

/// Factors `c·x^{μ₁}, x^{μ₂}, …` whose product `c·x^μ` is the best single
/// scaled monomial fit to the target among all reachable sums `μ = Σ μ_j`.
/// Ties go to the smaller `μ`, then to the lexicographically first tuple.
fn monomial_start(target: &[f64], points: &[f64], exps: &[Vec<f64>], opts: &SolverOptions) -> Result<Vec<MuntzPolynomial>> {
    let count = exps.iter().try_fold(1usize, |acc, e| acc.checked_mul(e.len()));
    if count.is_none_or(|c| c > MONOMIAL_START_TUPLES) {
        return exps.iter().map(|e| single_term(e, 0, 1.0)).collect();
    }
    let mut sums: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    let mut idx = vec![0usize; exps.len()];
    loop {
        let mu: f64 = idx.iter().zip(exps).map(|(&i, e)| e[i]).sum();
        sums.entry(mu.to_bits()).or_insert_with(|| idx.clone());
        // odometer increment
        let mut j = exps.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < exps[j].len() {
                break;
            }
            idx[j] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for (bits, tuple) in &sums {
        let mu = f64::from_bits(*bits);
        let basis = match OrthoBasis::new(&[mu], points, None, opts.rank_tol) {
            Ok(b) => b,
            Err(Error::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        };
        let c = basis.to_monomial(&minimax_on_basis(&basis, target, opts)?.z)[0];
        let err = points.iter().zip(target).map(|(&x, f)| (f - c * power(x, mu)).abs()).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, c, tuple.clone()));
        }
    }
    let Some((_, c, tuple)) = best else {
        return exps.iter().map(|e| single_term(e, 0, 1.0)).collect();
    };
    tuple
        .iter()
        .zip(exps)
        .enumerate()
        .map(|(j, (&i, e))| single_term(e, i, if j == 0 { c } else { 1.0 }))
        .collect()
}

fn product_error(target: &[f64], values: &[Vec<f64>]) -> f64 {
    target
        .iter()
        .enumerate()
        .map(|(i, f)| (f - values.iter().map(|v| v[i]).product::<f64>()).abs())
        .fold(0.0, f64::max)
}

fn descend(
    target: &[f64],
    grid: &Grid,
    exps: &[Vec<f64>],
    rounds: usize,
    start: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<MuntzPolynomial>, usize)> {
    let points = grid.points();
    let k = exps.len();
    let mut rng = task_rng(seed, TAG_SEARCH, start as u64);
    let mut factors: Vec<MuntzPolynomial> = if start == 0 {
        exps.iter().map(|e| single_term(e, 0, 1.0)).collect::<Result<_>>()?
    } else if start == 1 {
        monomial_start(target, points, exps, opts)?
    } else {
        exps.iter()
            .map(|e| random_element(&sampling_basis(e, opts)?, e, &mut rng))
            .collect::<Result<_>>()?
    };
    let mut values: Vec<Vec<f64>> = factors.iter().map(|p| points.iter().map(|&x| p.eval(x)).collect()).collect();
    let mut error = product_error(target, &values);
    let mut trace = Vec::with_capacity(rounds);
    let mut perturbations = 0;

    for _ in 0..rounds {
        for j in 0..k {
            let weight: Vec<f64> =
                (0..points.len()).map(|i| (0..k).filter(|&l| l != j).map(|l| values[l][i]).product()).collect();
            let basis = match OrthoBasis::new(&exps[j], points, Some(&weight), opts.rank_tol) {
                Ok(b) => b,
                Err(Error::IllConditioned { .. }) => {
                    // the other factors vanish on too much of the grid: nudge one
                    let l = (j + 1) % k;
                    if l == j {
                        continue;
                    }
                    let bumped: Vec<f64> = factors[l]
                        .coefficients()
                        .iter()
                        .map(|c| c + 1e-3 * rng.sample::<f64, _>(StandardNormal))
                        .collect();
                    factors[l] = MuntzPolynomial::new(exps[l].clone(), bumped)?;
                    values[l] = points.iter().map(|&x| factors[l].eval(x)).collect();
                    error = product_error(target, &values);
                    perturbations += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let sol = match minimax_on_basis(&basis, target, opts) {
                Ok(s) => s,
                Err(e) if e.is_numeric() => continue,
                Err(e) => return Err(e),
            };
            let candidate = MuntzPolynomial::new(exps[j].clone(), basis.to_monomial(&sol.z))?;
            let cand_values: Vec<f64> = points.iter().map(|&x| candidate.eval(x)).collect();
            let old = std::mem::replace(&mut values[j], cand_values);
            let cand_error = product_error(target, &values);
            if cand_error <= error {
                error = cand_error;
                factors[j] = candidate;
            } else {
                values[j] = old;
            }
        }
        trace.push(error);
    }
    Ok((trace, factors, perturbations))
}
