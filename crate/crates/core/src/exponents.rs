//! Exponent sequences `0 = λ₀ < λ₁ < λ₂ < …` spanning Müntz spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the exponents of a sequence are generated.
///
/// Serializes as `"squares"`, `{"arithmetic": a}` or `{"explicit": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    /// `λᵢ = a·i` for a step `a > 0`.
    Arithmetic(f64),
    /// `λᵢ = i²`.
    Squares,
    /// A finite, user supplied list starting at 0.
    Explicit(Vec<f64>),
}

/// Outcome of the Müntz test `Σ 1/λᵢ` on a sequence tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    /// `Σ 1/λᵢ = ∞`: the span is dense.
    Diverges,
    /// `Σ 1/λᵢ < ∞`: the span is not dense.
    Converges,
    /// A finite list says nothing about the tail.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSequence {
    pub kind: SequenceKind,
    #[serde(default)]
    pub label: String,
}

impl ExponentSequence {
    pub fn arithmetic(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(format!("arithmetic step must be positive, got {step}")));
        }
        Ok(Self { kind: SequenceKind::Arithmetic(step), label: format!("arithmetic({step})") })
    }

    pub fn squares() -> Self {
        Self { kind: SequenceKind::Squares, label: "squares".into() }
    }

    /// Wraps an explicit list, checking `λ₀ = 0` and strict increase.
    pub fn explicit(exponents: Vec<f64>) -> Result<Self> {
        let seq = Self { label: "explicit".into(), kind: SequenceKind::Explicit(exponents) };
        seq.validate()?;
        Ok(seq)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Checks the invariants of a deserialized value.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SequenceKind::Arithmetic(a) if !(a.is_finite() && *a > 0.0) => {
                Err(Error::invalid(format!("arithmetic step must be positive, got {a}")))
            }
            SequenceKind::Explicit(list) => {
                if list.first() != Some(&0.0) {
                    return Err(Error::invalid("explicit sequence must start with exponent 0"));
                }
                if list.iter().any(|l| !l.is_finite()) {
                    return Err(Error::invalid("explicit exponents must be finite"));
                }
                if list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("explicit exponents must be strictly increasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The `i`-th exponent.
    pub fn exponent(&self, i: usize) -> Result<f64> {
        match &self.kind {
            // i as f64 is exact for any realistic index, so a·i carries one rounding at most
            SequenceKind::Arithmetic(a) => Ok(a * i as f64),
            SequenceKind::Squares => Ok((i as f64) * (i as f64)),
            SequenceKind::Explicit(list) => {
                list.get(i).copied().ok_or(Error::OutOfRange { index: i, len: list.len() })
            }
        }
    }

    /// Returns `[λ₀, …, λₙ]`.
    pub fn truncate(&self, n: usize) -> Result<Vec<f64>> {
        if let SequenceKind::Explicit(list) = &self.kind {
            if n >= list.len() {
                return Err(Error::OutOfRange { index: n, len: list.len() });
            }
        }
        (0..=n).map(|i| self.exponent(i)).collect()
    }

    /// True when `λ` equals some generated exponent exactly.
    pub fn contains(&self, lambda: f64) -> bool {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return false;
        }
        match &self.kind {
            SequenceKind::Arithmetic(a) => {
                let i = (lambda / a).round();
                i * a == lambda
            }
            SequenceKind::Squares => {
                let i = lambda.sqrt().round();
                i * i == lambda
            }
            SequenceKind::Explicit(list) => list.contains(&lambda),
        }
    }

    /// `Σ_{i=1}^{n} 1/λᵢ`; the term `λ₀ = 0` is excluded.
    pub fn reciprocal_partial_sum(&self, n: usize) -> Result<f64> {
        let mut sum = 0.0;
        for i in 1..=n {
            sum += 1.0 / self.exponent(i)?;
        }
        Ok(sum)
    }

    /// Classifies the Müntz series from the generator alone. Explicit lists are
    /// never extrapolated.
    pub fn classify_density(&self) -> Density {
        match self.kind {
            SequenceKind::Arithmetic(_) => Density::Diverges,
            SequenceKind::Squares => Density::Converges,
            SequenceKind::Explicit(_) => Density::Undetermined,
        }
    }
}
