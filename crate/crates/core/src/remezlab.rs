//! Remez-type experiments: the classical Remez bound for algebraic
//! polynomials, empirical Remez constants for Müntz spaces over finite set
//! families, and density probes on compact sets of positive measure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSequence;
use crate::minimax::{best_uniform_approx, chebyshev_t, EquioscillationResult, GrowthProblem, SolverOptions};
use crate::sets::{Grid, IntervalUnion, SetDescriptor};
use crate::targets::Target;

/// Number of equispaced query points on `[0, ρ]`.
pub const QUERY_POINTS: usize = 33;

/// Sharp bound on `‖p‖_[0,1]` for degree-`n` polynomials bounded by 1 on a
/// subset of `[0, 1]` of measure `s`: `T_n((2 − s)/s)`.
pub fn classical_remez_bound(n: u32, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid(format!("measure s must lie in (0, 1], got {s}")));
    }
    Ok(chebyshev_t(n, (2.0 - s) / s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub n: u32,
    pub s: f64,
    pub mesh: f64,
    pub computed: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

/// Growth at 0 of `span{1, x, …, xⁿ}` constrained on `[1 − s, 1]`, compared
/// with [`classical_remez_bound`].
pub fn verify_classical_extremal(n: u32, s: f64, mesh: f64, opts: &SolverOptions) -> Result<ClassicalReport> {
    let predicted = classical_remez_bound(n, s)?;
    let grid = IntervalUnion::interval(1.0 - s, 1.0)?.discretize(mesh)?;
    if grid.len() < n as usize + 2 {
        return Err(Error::invalid(format!("mesh {mesh} gives {} points on [1 − s, 1], need {}", grid.len(), n + 2)));
    }
    let exponents: Vec<f64> = (0..=n).map(f64::from).collect();
    let computed = GrowthProblem::new(&exponents, &grid, opts)?.solve(0.0)?.value;
    Ok(ClassicalReport { n, s, mesh, computed, predicted, relative_error: (computed - predicted).abs() / predicted })
}

/// One growth evaluation inside a Remez-constant sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub n: usize,
    pub set_id: String,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezConstantEstimate {
    pub sequence: ExponentSequence,
    pub n: usize,
    pub s: f64,
    pub rho: f64,
    pub set_family: Vec<SetDescriptor>,
    /// Largest growth over the family and the query grid: a lower envelope
    /// for the Remez constant of the truncated space.
    pub c_value: f64,
    pub attaining_query: f64,
    pub attaining_set: SetDescriptor,
    pub mesh: f64,
    pub samples: Vec<GrowthSample>,
}

/// `{[1 − s, 1], [ρ, ρ + s], level-3 fat Cantor set on [ρ, 1]}`.
pub fn default_family(s: f64, rho: f64) -> Result<Vec<SetDescriptor>> {
    check_s_rho(s, rho)?;
    let cantor = SetDescriptor::FatCantor { level: 3, carrier: [rho, 1.0] };
    let measure = cantor.build()?.measure();
    if measure < s {
        return Err(Error::invalid(format!(
            "level-3 fat Cantor set on [{rho}, 1] has measure {measure} < s = {s}"
        )));
    }
    Ok(vec![
        SetDescriptor::Intervals(vec![[1.0 - s, 1.0]]),
        SetDescriptor::Intervals(vec![[rho, rho + s]]),
        cantor,
    ])
}

/// `QUERY_POINTS` equispaced points on `[0, ρ]`, including both ends.
pub fn query_grid(rho: f64) -> Result<Grid> {
    Grid::uniform(0.0, rho, QUERY_POINTS)
}

fn check_s_rho(s: f64, rho: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid(format!("s must lie in (0, 1), got {s}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    Ok(())
}

fn admissible(family: &[SetDescriptor], s: f64, rho: f64) -> Result<Vec<IntervalUnion>> {
    if family.is_empty() {
        return Err(Error::invalid("set family is empty"));
    }
    let carrier = IntervalUnion::interval(rho, 1.0)?;
    family
        .iter()
        .map(|d| {
            let set = d.build()?;
            // measures are compared with a rounding allowance: [1 − s, 1] need not be exactly s long
            if set.measure() < s * (1.0 - 1e-12) {
                return Err(Error::invalid(format!("set {} has measure {} < s = {s}", d.id(), set.measure())));
            }
            if !set.is_subset_of(&carrier) {
                return Err(Error::invalid(format!("set {} is not inside [rho, 1] = [{rho}, 1]", d.id())));
            }
            Ok(set)
        })
        .collect()
}

/// Empirical Remez constant: the largest growth functional value over the
/// set family and the default query grid on `[0, ρ]`.
pub fn remez_constant_estimate(
    seq: &ExponentSequence,
    n: usize,
    s: f64,
    rho: f64,
    family: &[SetDescriptor],
    mesh: f64,
    opts: &SolverOptions,
) -> Result<RemezConstantEstimate> {
    remez_constant_estimate_on(seq, n, s, rho, family, mesh, &query_grid(rho)?, opts)
}

/// As [`remez_constant_estimate`] with an explicit query grid inside `[0, ρ]`.
#[allow(clippy::too_many_arguments)]
pub fn remez_constant_estimate_on(
    seq: &ExponentSequence,
    n: usize,
    s: f64,
    rho: f64,
    family: &[SetDescriptor],
    mesh: f64,
    queries: &Grid,
    opts: &SolverOptions,
) -> Result<RemezConstantEstimate> {
    check_s_rho(s, rho)?;
    let sets = admissible(family, s, rho)?;
    if queries.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if queries.points().iter().any(|&y| y < 0.0 || y > rho) {
        return Err(Error::invalid("query points must lie in [0, rho]"));
    }
    let exponents = seq.truncate(n)?;
    let problems: Vec<GrowthProblem> = sets
        .par_iter()
        .map(|set| GrowthProblem::new(&exponents, &set.discretize(mesh)?, opts))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> =
        (0..sets.len()).flat_map(|k| queries.points().iter().map(move |&y| (k, y))).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(k, y)| problems[k].solve(y).map(|r| r.value))
        .collect::<Result<_>>()?;

    // deterministic reduction: largest value, ties to the smallest y, then family order
    let mut best = 0usize;
    for i in 1..jobs.len() {
        let (v, b) = (values[i], values[best]);
        let (yi, yb) = (jobs[i].1, jobs[best].1);
        if v > b || (v == b && (yi < yb || (yi == yb && jobs[i].0 < jobs[best].0))) {
            best = i;
        }
    }
    let samples = jobs
        .iter()
        .zip(&values)
        .map(|(&(k, y), &value)| GrowthSample { n, set_id: family[k].id(), y, value })
        .collect();
    Ok(RemezConstantEstimate {
        sequence: seq.clone(),
        n,
        s,
        rho,
        set_family: family.to_vec(),
        c_value: values[best],
        attaining_query: jobs[best].1,
        attaining_set: family[jobs[best].0].clone(),
        mesh,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezTrend {
    pub estimates: Vec<RemezConstantEstimate>,
    /// `c_{n+1}/c_n` for `n = 0, …, n_max − 1`.
    pub ratios: Vec<f64>,
}

impl RemezTrend {
    pub fn values(&self) -> Vec<(usize, f64)> {
        self.estimates.iter().map(|e| (e.n, e.c_value)).collect()
    }
}

/// Remez-constant estimates for `n = 0, …, n_max` and their growth ratios.
pub fn remez_trend(
    seq: &ExponentSequence,
    n_max: usize,
    s: f64,
    rho: f64,
    family: &[SetDescriptor],
    mesh: f64,
    opts: &SolverOptions,
) -> Result<RemezTrend> {
    let estimates: Vec<RemezConstantEstimate> = (0..=n_max)
        .map(|n| remez_constant_estimate(seq, n, s, rho, family, mesh, opts))
        .collect::<Result<_>>()?;
    let ratios = estimates.windows(2).map(|w| w[1].c_value / w[0].c_value).collect();
    Ok(RemezTrend { estimates, ratios })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProbeResult {
    pub target: Target,
    pub sequence: ExponentSequence,
    pub set: IntervalUnion,
    pub mesh: f64,
    pub errors_by_n: Vec<(usize, f64)>,
    pub certificates: Vec<EquioscillationResult>,
}

/// Best uniform approximation errors of `target` on `set` from the truncations
/// `truncate(seq, n)` for `n` in `n_list`.
///
/// Only the essential part of `set` is sampled: isolated points carry no
/// measure and are dropped before discretization.
pub fn density_probe(
    target: &Target,
    seq: &ExponentSequence,
    set: &IntervalUnion,
    n_list: &[usize],
    mesh: f64,
    opts: &SolverOptions,
) -> Result<DensityProbeResult> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list must be strictly increasing"));
    }
    if set.supremum().is_some_and(|s| s > 1.0) {
        return Err(Error::invalid("density probes run inside [0, 1]"));
    }
    let essential = set.essential_part();
    if essential.is_empty() {
        return Err(Error::MeasureZero);
    }
    let grid = essential.discretize(mesh)?;
    let samples = target.sample(grid.points());
    let certificates: Vec<EquioscillationResult> = n_list
        .par_iter()
        .map(|&n| best_uniform_approx(&samples, &grid, &seq.truncate(n)?, opts))
        .collect::<Result<_>>()?;
    Ok(DensityProbeResult {
        target: target.clone(),
        sequence: seq.clone(),
        set: set.clone(),
        mesh,
        errors_by_n: n_list.iter().zip(&certificates).map(|(&n, c)| (n, c.error)).collect(),
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn classical_bound_examples() {
        assert_eq!(classical_remez_bound(1, 0.5).unwrap(), 3.0);
        assert_eq!(classical_remez_bound(2, 0.5).unwrap(), 17.0);
        for n in 0..8 {
            assert_eq!(classical_remez_bound(n, 1.0).unwrap(), 1.0);
        }
        assert!(classical_remez_bound(2, 0.0).is_err());
    }

    #[test]
    fn classical_extremal_examples() {
        let r1 = verify_classical_extremal(1, 0.5, 1e-3, &opts()).unwrap();
        assert!(r1.relative_error < 0.01 && (r1.computed - 3.0).abs() < 1e-9);
        let r2 = verify_classical_extremal(2, 0.5, 1e-3, &opts()).unwrap();
        assert!(r2.relative_error < 0.01 && (r2.computed - 17.0).abs() < 1e-9);
        let r0 = verify_classical_extremal(0, 0.3, 1e-2, &opts()).unwrap();
        assert_eq!(r0.computed, 1.0);
        assert!(verify_classical_extremal(5, 0.5, 0.4, &opts()).is_err());
    }

    #[test]
    fn constants_have_unit_constant() {
        let fam = default_family(0.25, 0.5).unwrap();
        let e = remez_constant_estimate(&ExponentSequence::squares(), 0, 0.25, 0.5, &fam, 1e-2, &opts()).unwrap();
        assert!((e.c_value - 1.0).abs() < 1e-12);
        assert_eq!(e.attaining_query, 0.0);
        assert_eq!(e.samples.len(), 3 * QUERY_POINTS);
    }

    #[test]
    fn agrees_with_classical_extremal() {
        let fam = vec![SetDescriptor::Intervals(vec![[0.5, 1.0]])];
        let seq = ExponentSequence::arithmetic(1.0).unwrap();
        let e = remez_constant_estimate(&seq, 2, 0.5, 0.5, &fam, 1e-3, &opts()).unwrap();
        let c = verify_classical_extremal(2, 0.5, 1e-3, &opts()).unwrap();
        assert_eq!(e.attaining_query, 0.0);
        assert!((e.c_value - c.computed).abs() <= 1e-9 * c.computed);
    }

    #[test]
    fn family_preconditions() {
        let seq = ExponentSequence::squares();
        let small = vec![SetDescriptor::Intervals(vec![[0.9, 1.0]])];
        assert!(remez_constant_estimate(&seq, 2, 0.25, 0.5, &small, 1e-2, &opts()).is_err());
        let outside = vec![SetDescriptor::Intervals(vec![[0.2, 0.6]])];
        assert!(remez_constant_estimate(&seq, 2, 0.25, 0.5, &outside, 1e-2, &opts()).is_err());
        assert!(remez_constant_estimate(&seq, 2, 0.25, 0.5, &[], 1e-2, &opts()).is_err());
        assert!(default_family(0.6, 0.5).is_err());
    }

    #[test]
    fn trend_of_constants_is_trivial() {
        let fam = default_family(0.25, 0.5).unwrap();
        let t = remez_trend(&ExponentSequence::squares(), 0, 0.25, 0.5, &fam, 1e-2, &opts()).unwrap();
        assert_eq!(t.values().len(), 1);
        assert!((t.values()[0].1 - 1.0).abs() < 1e-12);
        assert!(t.ratios.is_empty());
    }

    #[test]
    fn density_exact_member() {
        let set = IntervalUnion::interval(0.0, 1.0).unwrap();
        let r = density_probe(&Target::Monomial(4.0), &ExponentSequence::squares(), &set, &[2, 3], 1e-2, &opts()).unwrap();
        for (_, e) in r.errors_by_n {
            assert!(e < 1e-12, "{e}");
        }
    }

    #[test]
    fn singletons_do_not_matter() {
        let plain = IntervalUnion::interval(0.0, 0.5).unwrap();
        let with = IntervalUnion::normalize(vec![(0.0, 0.5), (0.9, 0.9)]).unwrap();
        let seq = ExponentSequence::squares();
        let a = density_probe(&Target::Runge, &seq, &plain, &[2, 4], 1e-3, &opts()).unwrap();
        let b = density_probe(&Target::Runge, &seq, &with, &[2, 4], 1e-3, &opts()).unwrap();
        for ((_, ea), (_, eb)) in a.errors_by_n.iter().zip(&b.errors_by_n) {
            assert!((ea - eb).abs() <= 1e-8 * ea);
        }
        assert_eq!(with.essential_supremum().unwrap(), plain.essential_supremum().unwrap());
    }
}
