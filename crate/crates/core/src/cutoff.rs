//! Compactly supported cutoffs `τ` on `]0, ∞[`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffFamily {
    /// `exp(−1/((t−a)(b−t)))` on `(a, b)`.
    SmoothBump,
    /// `½(1 − cos(2π(t−a)/(b−a)))` on `(a, b)`.
    RaisedCosine,
    /// The indicator of `[a, b]`. Only meaningful as a limit; accepted by the
    /// cutoff integrals but not by the kernel sums.
    Indicator,
}

/// `τ(t) = amplitude · profile(t)` with `0 ≤ amplitude ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub family: CutoffFamily,
    pub a: f64,
    pub b: f64,
    pub amplitude: f64,
}

impl CutoffFunction {
    pub fn new(family: CutoffFamily, a: f64, b: f64) -> Result<Self> {
        Self::with_amplitude(family, a, b, 1.0)
    }

    pub fn with_amplitude(family: CutoffFamily, a: f64, b: f64, amplitude: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidCutoff { a, b, reason: "support must be bounded" });
        }
        if !(a < b) {
            return Err(Error::InvalidCutoff { a, b, reason: "support must satisfy a < b" });
        }
        let min_a_ok = match family {
            CutoffFamily::Indicator => a >= 0.0,
            _ => a > 0.0,
        };
        if !min_a_ok {
            return Err(Error::InvalidCutoff { a, b, reason: "support must lie in ]0, ∞[" });
        }
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::InvalidCutoff { a, b, reason: "amplitude must lie in [0, 1]" });
        }
        Ok(Self { family, a, b, amplitude })
    }

    pub fn smooth_bump(a: f64, b: f64) -> Result<Self> {
        Self::new(CutoffFamily::SmoothBump, a, b)
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(CutoffFamily::Indicator, a, b)
    }

    /// The identically zero cutoff.
    pub fn zero() -> Self {
        Self { family: CutoffFamily::SmoothBump, a: 0.5, b: 1.0, amplitude: 0.0 }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let profile = match self.family {
            CutoffFamily::Indicator => {
                if (a..=b).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            _ if t <= a || t >= b => 0.0,
            CutoffFamily::SmoothBump => (-1.0 / ((t - a) * (b - t))).exp(),
            CutoffFamily::RaisedCosine => 0.5 * (1.0 - (2.0 * std::f64::consts::PI * (t - a) / (b - a)).cos()),
        };
        self.amplitude * profile
    }

    pub fn is_indicator(&self) -> bool {
        self.family == CutoffFamily::Indicator
    }
}
