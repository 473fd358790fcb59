//! Evaluation of Müntz monomials `x^λ` and polynomials on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::Grid;

/// `x^λ` for `x ∈ [0, 1]`, `λ ≥ 0`, with `0^0 = 1`.
pub fn power_eval(x: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("Müntz monomials are evaluated on [0, 1], got x = {x}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("exponent must be non-negative, got {lambda}")));
    }
    Ok(power(x, lambda))
}

/// Unchecked `x^λ`. Underflow to 0 for small `x` and large `λ` is intended.
#[inline]
pub(crate) fn power(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        (lambda * x.ln()).exp()
    }
}

/// An element `Σ cᵢ x^{λᵢ}` of a finite Müntz space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuntzPolynomial {
    exponents: Vec<f64>,
    coefficients: Vec<f64>,
}

impl MuntzPolynomial {
    pub fn new(exponents: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if exponents.len() != coefficients.len() {
            return Err(Error::invalid(format!(
                "{} exponents but {} coefficients",
                exponents.len(),
                coefficients.len()
            )));
        }
        check_exponents(&exponents)?;
        Ok(Self { exponents, coefficients })
    }

    pub fn constant(c: f64) -> Self {
        Self { exponents: vec![0.0], coefficients: vec![c] }
    }

    pub fn monomial(lambda: f64) -> Result<Self> {
        Self::new(vec![lambda], vec![1.0])
    }

    /// The zero element of `span{x^λ : λ ∈ exponents}`.
    pub fn zero(exponents: Vec<f64>) -> Result<Self> {
        let n = exponents.len();
        Self::new(exponents, vec![0.0; n])
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluates at `x ∈ [0, 1]`; the caller guarantees the range.
    pub fn eval(&self, x: f64) -> f64 {
        self.exponents.iter().zip(&self.coefficients).map(|(&l, &c)| c * power(x, l)).sum()
    }

    pub fn try_eval(&self, x: f64) -> Result<f64> {
        power_eval(x, 0.0)?;
        Ok(self.eval(x))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            exponents: self.exponents.clone(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// `max |p(x)|` over the grid, with the smallest maximizing point.
    pub fn sup_norm(&self, grid: &Grid) -> Result<(f64, f64)> {
        sup_norm_of(|x| self.eval(x), grid)
    }
}

pub(crate) fn check_exponents(exponents: &[f64]) -> Result<()> {
    if exponents.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::invalid("exponents must be finite and non-negative"));
    }
    if exponents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("exponents must be strictly increasing"));
    }
    Ok(())
}

/// Grid sup-norm of an arbitrary function; ties go to the smallest point.
pub fn sup_norm_of(f: impl Fn(f64) -> f64, grid: &Grid) -> Result<(f64, f64)> {
    let mut points = grid.points().iter();
    let first = *points.next().ok_or(Error::EmptyGrid)?;
    let mut best = (f(first).abs(), first);
    for &x in points {
        let v = f(x).abs();
        // grid points are sorted, so strict > keeps the smallest argmax
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}
