//! Shared fixtures: the approximation corpus, a brute-force discrete minimax
//! oracle and the frozen oracle values.
#![allow(dead_code)]

use muntzlab::targets::Target;
use muntzlab::{ExponentSequence, Grid, IntervalUnion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub struct Case {
    pub label: String,
    pub grid: Grid,
    pub samples: Vec<f64>,
    pub exponents: Vec<f64>,
}

fn sequences() -> Vec<(&'static str, ExponentSequence)> {
    vec![
        ("arith1", ExponentSequence::arithmetic(1.0).unwrap()),
        ("squares", ExponentSequence::squares()),
        ("explicit", ExponentSequence::explicit(vec![0.0, 0.5, 1.5, 3.5]).unwrap()),
    ]
}

// none of these lies in the span of any truncation used below
fn targets() -> Vec<Target> {
    vec![Target::Abs2x1, Target::Runge, Target::Monomial(2.7)]
}

/// Small grids (≤ 12 points): uniform, shifted, random and a level-1 fat
/// Cantor sample.
pub fn small_grids() -> Vec<(&'static str, Grid)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let random: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..1.0)).collect();
    let cantor = muntzlab::fat_cantor(1, (0.0, 1.0)).unwrap().discretize(0.2).unwrap();
    assert!(cantor.len() <= 12);
    vec![
        ("uniform12", Grid::uniform(0.0, 1.0, 12).unwrap()),
        ("tail8", Grid::uniform(0.3, 1.0, 8).unwrap()),
        ("random10", Grid::from_points(random).unwrap()),
        ("cantor1", cantor),
    ]
}

/// Dimension ≤ 3 on small grids.
pub fn small_corpus() -> Vec<Case> {
    let mut out = Vec::new();
    for (gname, grid) in small_grids() {
        for (sname, seq) in sequences() {
            for target in targets() {
                for n in 0..=2 {
                    out.push(Case {
                        label: format!("{gname}/{sname}/n{n}/{}", target.name()),
                        samples: target.sample(grid.points()),
                        exponents: seq.truncate(n).unwrap(),
                        grid: grid.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Small corpus plus larger grids and dimensions.
pub fn full_corpus() -> Vec<Case> {
    let mut out = small_corpus();
    let sets = [
        ("unit", IntervalUnion::interval(0.0, 1.0).unwrap(), 2e-3),
        ("split", IntervalUnion::normalize(vec![(0.0, 0.3), (0.6, 1.0)]).unwrap(), 2e-3),
        ("cantor6", muntzlab::fat_cantor(6, (0.0, 1.0)).unwrap(), 1e-3),
    ];
    for (name, set, mesh) in sets {
        let grid = set.discretize(mesh).unwrap();
        for (sname, seq) in sequences() {
            for target in targets() {
                for n in [3, 6, 9] {
                    if sname == "explicit" && n > 3 {
                        continue;
                    }
                    out.push(Case {
                        label: format!("{name}/{sname}/n{n}/{}", target.name()),
                        samples: target.sample(grid.points()),
                        exponents: seq.truncate(n).unwrap(),
                        grid: grid.clone(),
                    });
                }
            }
        }
    }
    out
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Best discrete uniform error by enumerating every `(m+1)`-point subset: on
/// such a subset with left null vector `w` of the collocation matrix the best error is `|wᵀf| / ‖w‖₁`, and the global
/// optimum is the largest subset value (a vertex of the dual LP).
pub fn brute_force_error(points: &[f64], f: &[f64], exponents: &[f64]) -> f64 {
    let m = exponents.len();
    let mut best = 0.0_f64;
    for_each_subset(points.len(), m + 1, &mut |s| {
        let v = DMatrix::from_fn(m + 1, m, |i, j| {
            let (x, l) = (points[s[i]], exponents[j]);
            if l == 0.0 {
                1.0
            } else {
                x.powf(l)
            }
        });
        // left null vector by cofactors: w_i = (−1)^i det(v without row i)
        let w: Vec<f64> = (0..=m)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * v.clone().remove_row(i).determinant()
            })
            .collect();
        let scale = w.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            return;
        }
        let num: f64 = s.iter().zip(w.iter()).map(|(&i, wi)| wi * f[i]).sum();
        let den: f64 = w.iter().map(|x| x.abs()).sum();
        best = best.max(num.abs() / den);
    });
    best
}

pub fn frozen() -> Value {
    serde_json::from_str(include_str!("../oracle/frozen.json")).expect("frozen.json parses")
}

pub fn frozen_f64(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for p in path {
        cur = &cur[*p];
    }
    cur.as_f64().unwrap_or_else(|| panic!("frozen value {path:?} missing"))
}
