//! The spectrum `S`: a finite union of disjoint intervals of the real line,
//! together with the closed-form Fourier transform of its indicator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::numeric::{cos_pi, sin_pi, sinc};

/// A set `S ⊂ ℝ` of finite positive measure, stored as sorted, pairwise
/// disjoint intervals `[a, b)`. Abutting intervals are merged on
/// construction so equal sets have equal representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct Spectrum {
    intervals: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<RawSpectrum> for Spectrum {
    type Error = LabError;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        Spectrum::new(raw.intervals.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<Spectrum> for RawSpectrum {
    fn from(s: Spectrum) -> Self {
        RawSpectrum {
            intervals: s.intervals.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl Spectrum {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(invalid("spectrum needs at least one interval"));
        }
        for &(a, b) in &intervals {
            if !a.is_finite() || !b.is_finite() {
                return Err(invalid(format!("non-finite interval [{a}, {b}]")));
            }
            if a >= b {
                return Err(invalid(format!("empty or reversed interval [{a}, {b}]")));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                Some(last) if last.1 > a => {
                    return Err(invalid(format!(
                        "intervals [{}, {}] and [{a}, {b}] overlap",
                        last.0, last.1
                    )))
                }
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self {
            intervals: vec![(0.0, 1.0)],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Lebesgue measure `|S|`.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().fold(0.0, |acc, &(a, b)| acc + (b - a))
    }

    pub fn max_interval_length(&self) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    /// `S + c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.intervals.iter().map(|&(a, b)| (a + c, b + c)).collect())
    }

    /// `1̂_S(ξ) = ∫_S e^{-2πiξt} dt`.
    ///
    /// Each interval contributes `L·sinc(ξL)·e^{-iπξ(a+b)}`, which has no
    /// cancellation near `ξ = 0`; `sinc` switches to its Taylor series for
    /// small arguments. At `ξ = 0` the result is exactly `measure()`.
    pub fn ft_indicator(&self, xi: f64) -> Result<Complex64> {
        if !xi.is_finite() {
            return Err(invalid(format!("frequency {xi} is not finite")));
        }
        Ok(self.ft_indicator_unchecked(xi))
    }

    pub(crate) fn ft_indicator_unchecked(&self, xi: f64) -> Complex64 {
        self.intervals
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &(a, b)| {
                let len = b - a;
                let amp = len * sinc(xi * len);
                let arg = xi * (a + b);
                acc + Complex64::new(amp * cos_pi(arg), -amp * sin_pi(arg))
            })
    }

    /// `⟨e_μ, e_λ⟩` in `L²(S)`, which equals `1̂_S(λ - μ)`.
    pub fn exp_inner(&self, lam: f64, mu: f64) -> Result<Complex64> {
        self.ft_indicator(lam - mu)
    }
}
