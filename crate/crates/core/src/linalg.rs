//! Orthonormalized Müntz bases on a grid.
//!
//! Columns `w(xᵢ)·xᵢ^{λⱼ}` are near-collinear for clustered exponents, so the
//! factorization `V·D⁻¹ = Q·R` (D = column norms) is computed by modified
//! Gram–Schmidt with a second reorthogonalization pass in double-double
//! arithmetic. Only `Q` is rounded to `f64`; off-grid evaluation and the map
//! back to monomial coefficients go through `R` in extended precision.

use twofloat::TwoFloat;

use crate::error::{Error, Result};

type Dd = TwoFloat;

const ZERO: Dd = TwoFloat::from_f64(0.0);

/// `x^λ` in double-double; integer exponents use exact repeated squaring.
fn power_dd(x: f64, lambda: f64) -> Dd {
    if lambda == 0.0 {
        return TwoFloat::from(1.0);
    }
    if x == 0.0 {
        return ZERO;
    }
    if lambda.fract() == 0.0 && lambda <= i32::MAX as f64 {
        TwoFloat::from(x).powi(lambda as i32)
    } else {
        // exp/ln in twofloat are accurate to roughly 1e-16 relative; enough for
        // non-integer exponents which never appear in the ill-conditioned families
        let v = TwoFloat::from(x).ln() * lambda;
        if v.hi() < -745.0 {
            ZERO
        } else {
            v.exp()
        }
    }
}

fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + *x * *y)
}

/// Orthonormal basis of `span{w·x^λⱼ}` sampled on a point set.
#[derive(Debug, Clone)]
pub(crate) struct OrthoBasis {
    exponents: Vec<f64>,
    scales: Vec<Dd>,
    /// Upper triangle, `r[i][j]` for `j ≥ i`.
    r: Vec<Vec<Dd>>,
    /// Row-major `N × m`.
    q: Vec<Vec<f64>>,
}

impl OrthoBasis {
    /// Builds the basis of `span{x^λ}` (optionally multiplied pointwise by
    /// `weights`) on `points`. Fails when a column lies within `rank_tol`
    /// (relative) of the span of its predecessors.
    pub(crate) fn new(exponents: &[f64], points: &[f64], weights: Option<&[f64]>, rank_tol: f64) -> Result<Self> {
        let m = exponents.len();
        let n = points.len();
        if m == 0 {
            return Err(Error::invalid("empty exponent list"));
        }
        if n < m {
            return Err(Error::IllConditioned { column: n, pivot: 0.0 });
        }
        let mut cols: Vec<Vec<Dd>> = exponents
            .iter()
            .map(|&l| {
                points
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let v = power_dd(x, l);
                        match weights {
                            Some(w) => v * w[i],
                            None => v,
                        }
                    })
                    .collect()
            })
            .collect();

        let mut scales = Vec::with_capacity(m);
        let mut r = vec![vec![ZERO; m]; m];
        for j in 0..m {
            let norm = dot(&cols[j], &cols[j]).sqrt();
            if !(norm.hi() > 0.0) || !norm.is_valid() {
                return Err(Error::IllConditioned { column: j, pivot: 0.0 });
            }
            for v in cols[j].iter_mut() {
                *v /= norm;
            }
            scales.push(norm);
            let (done, rest) = cols.split_at_mut(j);
            let w = &mut rest[0];
            // "twice is enough": two Gram–Schmidt sweeps restore orthogonality
            for _ in 0..2 {
                for (i, qi) in done.iter().enumerate() {
                    let h = dot(qi, w);
                    for (wk, qk) in w.iter_mut().zip(qi) {
                        *wk -= h * *qk;
                    }
                    r[i][j] += h;
                }
            }
            let rjj = dot(w, w).sqrt();
            if !(rjj.hi() > rank_tol) {
                return Err(Error::IllConditioned { column: j, pivot: rjj.hi() });
            }
            for v in w.iter_mut() {
                *v /= rjj;
            }
            r[j][j] = rjj;
        }
        let q = (0..n).map(|i| cols.iter().map(|c| c[i].hi() + c[i].lo()).collect()).collect();
        Ok(Self { exponents: exponents.to_vec(), scales, r, q })
    }

    pub(crate) fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Rows of `Q`, one per grid point.
    pub(crate) fn rows(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// Values of the orthonormal basis functions at an arbitrary point
    /// (unweighted bases only): solves `Rᵀ·q = D⁻¹·v(x)`.
    pub(crate) fn eval_row(&self, x: f64) -> Vec<f64> {
        let m = self.dim();
        let mut out: Vec<Dd> = Vec::with_capacity(m);
        for j in 0..m {
            let mut acc = power_dd(x, self.exponents[j]) / self.scales[j];
            for (i, qi) in out.iter().enumerate() {
                acc -= self.r[i][j] * *qi;
            }
            out.push(acc / self.r[j][j]);
        }
        out.iter().map(|v| v.hi() + v.lo()).collect()
    }

    /// Monomial coefficients `a` with `V·a = Q·z`.
    pub(crate) fn to_monomial(&self, z: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut c = vec![ZERO; m];
        for j in (0..m).rev() {
            let mut acc = TwoFloat::from(z[j]);
            for k in j + 1..m {
                acc -= self.r[j][k] * c[k];
            }
            c[j] = acc / self.r[j][j];
        }
        c.iter().zip(&self.scales).map(|(cj, dj)| {
            let a = *cj / *dj;
            a.hi() + a.lo()
        }).collect()
    }

    /// `Q·z` on the grid.
    pub(crate) fn combine(&self, z: &[f64]) -> Vec<f64> {
        self.q.iter().map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum()).collect()
    }
}
