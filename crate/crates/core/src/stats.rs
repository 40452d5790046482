//! Probability estimates, confidence intervals and three-valued verdicts.

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};

/// Relative slack granted to comparisons to absorb rounding.
pub const EXACT_TOL: f64 = 1e-12;

/// Default two-sided confidence level for Monte Carlo intervals.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Hard cap on any Monte Carlo budget.
pub const MAX_SAMPLES: u64 = 100_000_000;

/// How a probability is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    /// Exact enumeration or closed form; an error when unavailable.
    Exact,
    /// Always Monte Carlo.
    MonteCarlo {
        samples: u64,
        #[serde(default = "default_confidence")]
        confidence: f64,
    },
    /// Exact when available, Monte Carlo otherwise.
    Auto {
        samples: u64,
        #[serde(default = "default_confidence")]
        confidence: f64,
    },
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

impl Estimator {
    pub fn mc(samples: u64) -> Self {
        Estimator::MonteCarlo { samples, confidence: DEFAULT_CONFIDENCE }
    }

    pub fn auto(samples: u64) -> Self {
        Estimator::Auto { samples, confidence: DEFAULT_CONFIDENCE }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Estimator::Exact => Ok(()),
            Estimator::MonteCarlo { samples, confidence } | Estimator::Auto { samples, confidence } => {
                if samples == 0 || samples > MAX_SAMPLES {
                    return Err(Error::param(format!(
                        "sample budget {samples} outside [1, {MAX_SAMPLES}]"
                    )));
                }
                if !(confidence > 0.0 && confidence < 1.0) {
                    return Err(Error::param(format!("confidence {confidence} outside (0,1)")));
                }
                Ok(())
            }
        }
    }

    pub fn allows_exact(&self) -> bool {
        !matches!(self, Estimator::MonteCarlo { .. })
    }

    /// `(samples, confidence)` for the Monte Carlo fallback, if any.
    pub fn mc_budget(&self) -> Option<(u64, f64)> {
        match *self {
            Estimator::Exact => None,
            Estimator::MonteCarlo { samples, confidence } | Estimator::Auto { samples, confidence } => {
                Some((samples, confidence))
            }
        }
    }
}

/// A probability with either an exact value or a two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub samples: Option<u64>,
    pub hits: Option<u64>,
    pub confidence: Option<f64>,
}

impl TailEstimate {
    pub fn exact(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self { estimate: p, lower: p, upper: p, exact: true, samples: None, hits: None, confidence: None }
    }

    pub fn from_counts(hits: u64, samples: u64, confidence: f64) -> Self {
        let (lower, upper) = clopper_pearson(hits, samples, confidence);
        Self {
            estimate: hits as f64 / samples as f64,
            lower,
            upper,
            exact: false,
            samples: Some(samples),
            hits: Some(hits),
            confidence: Some(confidence),
        }
    }

    pub fn interval(&self) -> Interval {
        Interval { lo: self.lower, hi: self.upper }
    }
}

/// Clopper–Pearson two-sided interval for `hits` successes out of `n`.
pub fn clopper_pearson(hits: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(n > 0 && hits <= n, "invalid binomial counts {hits}/{n}");
    let half = (1.0 - confidence) / 2.0;
    let k = hits as f64;
    let nf = n as f64;
    let lower = if hits == 0 {
        0.0
    } else if hits == n {
        (half.ln() / nf).exp()
    } else {
        inverse_beta_cdf(k, nf - k + 1.0, half)
    };
    let upper = if hits == n {
        1.0
    } else if hits == 0 {
        -(half.ln() / nf).exp_m1()
    } else {
        inverse_beta_cdf(k + 1.0, nf - k, 1.0 - half)
    };
    (lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0))
}

/// Quantile of Beta(a, b): Newton steps on the regularized incomplete beta
/// function, kept inside a shrinking bracket.
fn inverse_beta_cdf(a: f64, b: f64, target: f64) -> f64 {
    let log_norm = ln_beta(a, b);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = a / (a + b);
    for _ in 0..400 {
        let f = beta_reg(a, b, x) - target;
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let log_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - log_norm;
        let step = f / log_pdf.exp();
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo == 0.0 { hi / 2.0 } else { 0.5 * (lo + hi) };
        }
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

impl std::ops::Add for Interval {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        Self { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }
}

/// Product of two nonnegative intervals.
impl std::ops::Mul for Interval {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self { lo: self.lo * other.lo, hi: self.hi * other.hi }
    }
}

/// Closed interval `[lo, hi]` used for CI-aware comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Scales by a nonnegative factor.
    pub fn scale(self, c: f64) -> Self {
        Self { lo: self.lo * c, hi: self.hi * c }
    }

    /// Image under a nondecreasing map.
    pub fn map_monotone(self, f: impl Fn(f64) -> f64) -> Self {
        Self { lo: f(self.lo), hi: f(self.hi) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Inconclusive,
    Violated,
}

impl Verdict {
    /// Worst of two verdicts: violated > inconclusive > holds.
    pub fn worst(self, other: Verdict) -> Verdict {
        self.max(other)
    }
}

/// Compares `lhs ≤ rhs` where both sides may be uncertain.
///
/// Violated only when the whole lhs interval lies above the whole rhs
/// interval; holds when the whole lhs interval lies at or below rhs.
pub fn compare_le(lhs: Interval, rhs: Interval) -> Verdict {
    let tol = EXACT_TOL * lhs.hi.abs().max(rhs.hi.abs());
    if lhs.hi <= rhs.lo + tol {
        Verdict::Holds
    } else if lhs.lo > rhs.hi + tol {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// How a slack report was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    Mc { samples: u64, confidence: f64 },
}

/// Outcome of checking one inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub verdict: Verdict,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs_interval: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_interval: Option<Interval>,
}

impl SlackReport {
    pub fn exact(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let verdict = compare_le(Interval::point(lhs), Interval::point(rhs));
        Self {
            label: label.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: verdict == Verdict::Holds,
            verdict,
            method: Method::Exact,
            lhs_interval: None,
            rhs_interval: None,
        }
    }

    /// Report from point estimates and intervals; `method` tells whether the
    /// intervals came from sampling.
    pub fn from_intervals(
        label: impl Into<String>,
        lhs: f64,
        rhs: f64,
        lhs_iv: Interval,
        rhs_iv: Interval,
        method: Method,
    ) -> Self {
        if method == Method::Exact {
            return Self::exact(label, lhs, rhs);
        }
        let verdict = compare_le(lhs_iv, rhs_iv);
        Self {
            label: label.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: verdict != Verdict::Violated,
            verdict,
            method,
            lhs_interval: Some(lhs_iv),
            rhs_interval: Some(rhs_iv),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference quantiles at 99% two-sided, from exact binomial sums.
    #[test]
    fn clopper_pearson_matches_reference() {
        let cases = [
            (0u64, 1_000_000u64, 0.0, 5.298303330489367e-06),
            (3, 10, 0.03700722109623209, 0.7351139852871307),
            (250_000, 1_000_000, 0.24888532485816578, 0.251117054921662),
            (5, 10_000_000, 1.0779283981415377e-07, 1.414975293767952e-6),
            (1000, 10_000_000, 9.204276624237836e-5, 0.00010843682933813424),
        ];
        for (k, n, lo, hi) in cases {
            let (l, h) = clopper_pearson(k, n, 0.99);
            assert!((l - lo).abs() <= 5e-9 * lo, "lower {k}/{n}: {l} vs {lo}");
            assert!((h - hi).abs() <= 5e-9 * hi, "upper {k}/{n}: {h} vs {hi}");
        }
    }

    #[test]
    fn zero_hits_upper_is_closed_form() {
        let (_, h) = clopper_pearson(0, 1000, 0.99);
        let expected = 1.0 - 0.005f64.powf(1.0 / 1000.0);
        assert!((h - expected).abs() < 1e-12);
    }

    #[test]
    fn three_valued_comparison() {
        assert_eq!(compare_le(Interval::point(0.25), Interval::point(0.25)), Verdict::Holds);
        assert_eq!(compare_le(Interval::point(0.3), Interval::point(0.25)), Verdict::Violated);
        let a = Interval { lo: 0.2, hi: 0.3 };
        let b = Interval { lo: 0.25, hi: 0.35 };
        assert_eq!(compare_le(a, b), Verdict::Inconclusive);
        assert_eq!(compare_le(Interval { lo: 0.4, hi: 0.5 }, b), Verdict::Violated);
        assert_eq!(Verdict::Holds.worst(Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(Verdict::Violated.worst(Verdict::Inconclusive), Verdict::Violated);
    }
}
