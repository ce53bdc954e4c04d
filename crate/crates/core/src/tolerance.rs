//! Tolerance profiles, hybrid residuals and tri-state predicates.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Environment variable selecting the default profile.
pub const PROFILE_ENV: &str = "PSEUDOCONTACT_TOL";
/// Below this a predicate residual counts as zero.
pub const PREDICATE_TRUE: f64 = 1e-6;
/// Above this a predicate residual counts as nonzero.
pub const PREDICATE_FALSE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Strict,
    #[default]
    Default,
    Loose,
}

impl Profile {
    /// Tolerance for quantities built from at most second derivatives of
    /// the metric, and for those using third derivatives.
    pub fn tolerances(self) -> (f64, f64) {
        match self {
            Profile::Strict => (1e-10, 1e-8),
            Profile::Default => (1e-8, 1e-6),
            Profile::Loose => (1e-6, 1e-4),
        }
    }

    pub fn tolerance(self, order: DerivativeOrder) -> f64 {
        let (low, high) = self.tolerances();
        match order {
            DerivativeOrder::Low => low,
            DerivativeOrder::High => high,
        }
    }

    /// Profile named by the environment, or the default.
    pub fn from_env() -> Result<Profile, String> {
        match std::env::var(PROFILE_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(Profile::Default),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Strict => "strict",
            Profile::Default => "default",
            Profile::Loose => "loose",
        }
    }
}

impl FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Profile, String> {
        match s {
            "strict" => Ok(Profile::Strict),
            "default" => Ok(Profile::Default),
            "loose" => Ok(Profile::Loose),
            other => Err(format!("unknown tolerance profile `{other}` (expected strict, default or loose)")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Highest metric derivative a check consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    /// At most second derivatives.
    Low,
    /// Third derivatives.
    High,
}

/// Tri-state predicate value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Indeterminate,
}

impl Truth {
    /// Classifies a residual against the predicate band.
    pub fn from_residual(r: f64) -> Truth {
        if r < PREDICATE_TRUE {
            Truth::True
        } else if r > PREDICATE_FALSE || r.is_nan() {
            Truth::False
        } else {
            Truth::Indeterminate
        }
    }

    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Indeterminate,
        }
    }

    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Indeterminate => Truth::Indeterminate,
        }
    }

    pub fn all(values: impl IntoIterator<Item = Truth>) -> Truth {
        values.into_iter().fold(Truth::True, Truth::and)
    }

    pub fn is_true(self) -> bool {
        self == Truth::True
    }

    pub fn name(self) -> &'static str {
        match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hybrid residual `‖lhs − rhs‖∞ / max(1, ‖lhs‖∞, ‖rhs‖∞)` accumulated over
/// probes. Any non-finite term makes the residual NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    diff: f64,
    scale: f64,
    invalid: bool,
}

impl Default for Residual {
    fn default() -> Self {
        Residual::new()
    }
}

impl Residual {
    pub fn new() -> Residual {
        Residual {
            diff: 0.0,
            scale: 1.0,
            invalid: false,
        }
    }

    pub fn push(&mut self, lhs: f64, rhs: f64) {
        if !(lhs.is_finite() && rhs.is_finite()) {
            self.invalid = true;
            return;
        }
        self.diff = self.diff.max((lhs - rhs).abs());
        self.scale = self.scale.max(lhs.abs()).max(rhs.abs());
    }

    pub fn push_vec(&mut self, lhs: &DVector<f64>, rhs: &DVector<f64>) {
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            self.push(*a, *b);
        }
    }

    pub fn push_mat(&mut self, lhs: &DMatrix<f64>, rhs: &DMatrix<f64>) {
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            self.push(*a, *b);
        }
    }

    /// Compares `v` against zero.
    pub fn push_zero_vec(&mut self, v: &DVector<f64>) {
        for a in v.iter() {
            self.push(*a, 0.0);
        }
    }

    pub fn push_zero_mat(&mut self, m: &DMatrix<f64>) {
        for a in m.iter() {
            self.push(*a, 0.0);
        }
    }

    /// Marks the residual as failed outright.
    pub fn poison(&mut self) {
        self.invalid = true;
    }

    pub fn value(&self) -> f64 {
        if self.invalid {
            f64::NAN
        } else {
            self.diff / self.scale
        }
    }
}

/// Larger of two residuals, with NaN dominating.
pub fn max_residual(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hybrid_residual_scales_only_above_one() {
        let mut r = Residual::new();
        r.push(0.5, 0.5 + 1e-9);
        assert!((r.value() - 1e-9).abs() < 1e-15);
        let mut r = Residual::new();
        r.push(1e4, 1e4 + 1e-3);
        assert!((r.value() - 1e-7).abs() < 1e-12);
        let mut r = Residual::new();
        r.push(f64::NAN, 0.0);
        assert!(r.value().is_nan());
    }

    #[test]
    fn predicate_band() {
        assert_eq!(Truth::from_residual(1e-9), Truth::True);
        assert_eq!(Truth::from_residual(1e-4), Truth::Indeterminate);
        assert_eq!(Truth::from_residual(0.5), Truth::False);
        assert_eq!(Truth::from_residual(f64::NAN), Truth::False);
        assert_eq!(Truth::True.and(Truth::Indeterminate), Truth::Indeterminate);
        assert_eq!(Truth::Indeterminate.and(Truth::False), Truth::False);
    }

    #[test]
    fn profiles_parse() {
        assert_eq!("loose".parse::<Profile>().unwrap().tolerances(), (1e-6, 1e-4));
        assert!("tight".parse::<Profile>().is_err());
    }
}
