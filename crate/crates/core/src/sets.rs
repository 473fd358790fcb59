//! Compact subsets of `[0, ∞)` given as finite unions of closed intervals.
//!
//! Cantor-type sets are represented by their finite-level truncations, which
//! are interval unions containing the limit set and carry an exact measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely many disjoint, sorted, non-adjacent closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::normalize(vec![(a, b)])
    }

    /// Sorts and merges overlapping or touching intervals.
    pub fn normalize(raw: Vec<(f64, f64)>) -> Result<Self> {
        let mut raw = raw;
        for &(a, b) in &raw {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::invalid(format!("interval [{a}, {b}] has a non-finite endpoint")));
            }
            if a < 0.0 {
                return Err(Error::invalid(format!("interval [{a}, {b}] leaves [0, ∞)")));
            }
            if a > b {
                return Err(Error::ReversedInterval(a, b));
            }
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// `r_A`: the right end of the last interval of positive length.
    pub fn essential_supremum(&self) -> Result<f64> {
        self.intervals
            .iter()
            .rev()
            .find(|(a, b)| a < b)
            .map(|&(_, b)| b)
            .ok_or(Error::MeasureZero)
    }

    /// The union without its degenerate (single point) intervals.
    pub fn essential_part(&self) -> Self {
        Self { intervals: self.intervals.iter().copied().filter(|(a, b)| a < b).collect() }
    }

    pub fn contains(&self, x: f64) -> bool {
        // intervals are sorted, so a binary search on left endpoints suffices
        let idx = self.intervals.partition_point(|&(a, _)| a <= x);
        idx > 0 && x <= self.intervals[idx - 1].1
    }

    /// Smallest point of the set.
    pub fn infimum(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.0)
    }

    pub fn supremum(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.1)
    }

    /// True when every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.intervals
            .iter()
            .all(|&(a, b)| other.intervals.iter().any(|&(c, d)| c <= a && b <= d))
    }

    /// Image under `x ↦ lo + (hi − lo)·x`, for sets inside `[0, 1]`.
    pub fn map_unit_onto(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::invalid(format!("bad carrier [{lo}, {hi}]")));
        }
        let len = hi - lo;
        let mapped = self.intervals.iter().map(|&(a, b)| (lo + len * a, lo + len * b)).collect();
        Self::normalize(mapped)
    }

    /// Union with a list of extra intervals.
    pub fn union(&self, other: &IntervalUnion) -> Result<Self> {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::normalize(all)
    }

    /// Uniform subdivision of every interval with spacing at most `mesh`.
    pub fn discretize(&self, mesh: f64) -> Result<Grid> {
        Grid::new(self, mesh)
    }
}

/// Level-`level` Smith–Volterra–Cantor set on `[0, 1]`, mapped onto `carrier`.
///
/// Step `k` removes from each of the `2^{k−1}` current intervals its centered
/// open middle of length `4^{−k}`; on `[0, 1]` the result has measure
/// `1/2 + 2^{−(level+1)}`.
pub fn fat_cantor(level: u32, carrier: (f64, f64)) -> Result<IntervalUnion> {
    if level > 30 {
        return Err(Error::invalid(format!("fat Cantor level {level} too deep (max 30)")));
    }
    if carrier.0 > carrier.1 {
        return Err(Error::ReversedInterval(carrier.0, carrier.1));
    }
    let mut current = vec![(0.0_f64, 1.0_f64)];
    let mut gap = 1.0_f64;
    for _ in 1..=level {
        gap /= 4.0;
        current = current
            .into_iter()
            .flat_map(|(a, b)| {
                let mid = 0.5 * (a + b);
                let half = 0.5 * gap;
                [(a, mid - half), (mid + half, b)]
            })
            .collect();
    }
    IntervalUnion::normalize(current)?.map_unit_onto(carrier.0, carrier.1)
}

/// A finite sample of an [`IntervalUnion`]: every endpoint plus a uniform
/// subdivision of each interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    parent: IntervalUnion,
    mesh: f64,
}

/// Hard limit on grid size; finer requests are almost certainly mistakes.
const MAX_GRID_POINTS: usize = 5_000_000;

impl Grid {
    fn new(parent: &IntervalUnion, mesh: f64) -> Result<Self> {
        if !(mesh.is_finite() && mesh > 0.0) {
            return Err(Error::invalid(format!("mesh must be positive, got {mesh}")));
        }
        let mut points = Vec::new();
        for &(a, b) in &parent.intervals {
            if a == b {
                points.push(a);
                continue;
            }
            let cells = subdivisions(b - a, mesh);
            if points.len() + cells > MAX_GRID_POINTS {
                return Err(Error::invalid(format!("mesh {mesh} yields more than {MAX_GRID_POINTS} points")));
            }
            let len = b - a;
            points.extend((0..cells).map(|j| a + len * (j as f64 / cells as f64)));
            points.push(b);
        }
        Ok(Self { points, parent: parent.clone(), mesh })
    }

    /// `count ≥ 2` equispaced points on `[a, b]` including both ends.
    pub fn uniform(a: f64, b: f64, count: usize) -> Result<Self> {
        if count < 2 || a >= b {
            return Err(Error::invalid(format!("uniform grid needs a < b and count ≥ 2 (got [{a}, {b}], {count})")));
        }
        let parent = IntervalUnion::interval(a, b)?;
        let cells = count - 1;
        let mut points: Vec<f64> = (0..cells).map(|j| a + (b - a) * (j as f64 / cells as f64)).collect();
        points.push(b);
        Ok(Self { points, parent, mesh: (b - a) / cells as f64 })
    }

    /// Grid from explicit points; the parent is the union of their singletons.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("grid points must be finite and non-negative"));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let parent = IntervalUnion::normalize(points.iter().map(|&p| (p, p)).collect())?;
        let mesh = points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Ok(Self { points, parent, mesh: if mesh > 0.0 { mesh } else { 1.0 } })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn parent(&self) -> &IntervalUnion {
        &self.parent
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of uniform cells of width `≤ mesh` covering a length.
pub(crate) fn subdivisions(len: f64, mesh: f64) -> usize {
    // the relative slack keeps len/mesh = 32.000000001 from producing 33 cells
    ((len / mesh) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// JSON description of a set: `{"intervals": [[a, b], …]}` or
/// `{"fat_cantor": {"level": K, "carrier": [a, b]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDescriptor {
    Intervals(Vec<[f64; 2]>),
    FatCantor { level: u32, carrier: [f64; 2] },
}

impl SetDescriptor {
    pub fn build(&self) -> Result<IntervalUnion> {
        match self {
            SetDescriptor::Intervals(list) => IntervalUnion::normalize(list.iter().map(|&[a, b]| (a, b)).collect()),
            SetDescriptor::FatCantor { level, carrier } => fat_cantor(*level, (carrier[0], carrier[1])),
        }
    }

    /// Short stable identifier used in CSV output.
    pub fn id(&self) -> String {
        match self {
            SetDescriptor::Intervals(list) => {
                let parts: Vec<String> = list.iter().map(|[a, b]| format!("[{a};{b}]")).collect();
                parts.join("u")
            }
            SetDescriptor::FatCantor { level, carrier } => {
                format!("cantor{level}[{};{}]", carrier[0], carrier[1])
            }
        }
    }
}
