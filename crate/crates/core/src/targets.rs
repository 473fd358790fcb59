//! Named target functions for approximation experiments.

use serde::{Deserialize, Serialize};

/// `"abs2x1"` is `|2x − 1|`, `"runge"` is `1/(1 + 25(x − 1/2)²)` and
/// `{"monomial": m}` is `x^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Abs2x1,
    Runge,
    Monomial(f64),
}

impl Target {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Target::Abs2x1 => (2.0 * x - 1.0).abs(),
            Target::Runge => 1.0 / (1.0 + 25.0 * (x - 0.5) * (x - 0.5)),
            Target::Monomial(m) => crate::muntzeval::power(x, *m),
        }
    }

    pub fn sample(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn name(&self) -> String {
        match self {
            Target::Abs2x1 => "abs2x1".into(),
            Target::Runge => "runge".into(),
            Target::Monomial(m) => format!("monomial({m})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_json() {
        assert_eq!(Target::Abs2x1.eval(0.25), 0.5);
        assert_eq!(Target::Runge.eval(0.5), 1.0);
        assert!((Target::Monomial(3.0).eval(0.5) - 0.125).abs() < 1e-16);
        let t: Target = serde_json::from_str(r#"{"monomial": 4}"#).unwrap();
        assert_eq!(t, Target::Monomial(4.0));
        let a: Target = serde_json::from_str(r#""abs2x1""#).unwrap();
        assert_eq!(a, Target::Abs2x1);
    }
}
