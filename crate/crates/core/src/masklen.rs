//! Mask-length selection. The half support of the filter is derived from the
//! signal itself, which is what makes the decomposition nonlinear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskKind {
    ExtremaCount,
    SpectralPeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskStrategy {
    pub kind: MaskKind,
    pub nu: f64,
}

impl Default for MaskStrategy {
    fn default() -> Self {
        Self {
            kind: MaskKind::ExtremaCount,
            nu: 1.6,
        }
    }
}

impl MaskStrategy {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::InvalidConfig(format!("nu must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    pub fn mask_length(&self, s: &[f64]) -> Result<usize> {
        self.validate()?;
        match self.kind {
            MaskKind::ExtremaCount => mask_length_extrema(s, self.nu),
            MaskKind::SpectralPeak => mask_length_spectral(s, self.nu),
        }
    }
}

/// Relative amplitude floor below which spectral peaks are ignored.
pub const SPECTRAL_PEAK_FLOOR: f64 = 0.01;

/// Counts interior strict local extrema. Runs of equal values are collapsed
/// to one point first; the endpoints never count.
pub fn count_extrema(s: &[f64]) -> usize {
    let mut compact: Vec<f64> = Vec::with_capacity(s.len());
    for &v in s {
        if compact.last() != Some(&v) {
            compact.push(v);
        }
    }
    compact
        .windows(3)
        .filter(|w| (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]))
        .count()
}

fn max_half_support(n: usize) -> usize {
    (n.saturating_sub(1) / 2).max(1)
}

/// `l = 2 floor(nu N / k)` with `k` the extrema count, clamped to `[1, (n-1)/2]`.
pub fn mask_length_extrema(s: &[f64], nu: f64) -> Result<usize> {
    let k = count_extrema(s);
    if k < 2 {
        return Err(Error::TooFewExtrema { found: k });
    }
    let n = s.len();
    let raw = 2.0 * (nu * n as f64 / k as f64).floor();
    let raw = if raw >= usize::MAX as f64 { usize::MAX } else { raw as usize };
    Ok(raw.clamp(1, max_half_support(n)))
}

/// Picks the highest-frequency local maximum of `|DFT(s)|` over bins
/// `1..=n/2` that exceeds 1% of the largest such magnitude, and returns
/// `round(nu n / bin)` clamped to `[1, (n-1)/2]`.
pub fn mask_length_spectral(s: &[f64], nu: f64) -> Result<usize> {
    let n = s.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!("{n} samples")));
    }
    let bin = highest_spectral_peak(s).ok_or(Error::FlatSpectrum)?;
    let raw = (nu * n as f64 / bin as f64).round();
    let raw = if raw >= usize::MAX as f64 { usize::MAX } else { raw as usize };
    Ok(raw.clamp(1, max_half_support(n)))
}

fn highest_spectral_peak(s: &[f64]) -> Option<usize> {
    let n = s.len();
    let mag: Vec<f64> = fft::forward_real(s).iter().map(|c| c.norm()).collect();
    let half = n / 2;
    let peak = mag[1..=half].iter().cloned().fold(0.0_f64, f64::max);
    let scale: f64 = s.iter().map(|v| v.abs()).sum();
    if peak <= 1e-12 * scale {
        return None;
    }
    let floor = SPECTRAL_PEAK_FLOOR * peak;
    (1..=half)
        .rev()
        .find(|&b| mag[b] > floor && mag[b] >= mag[b - 1] && mag[b] >= mag[(b + 1) % n])
}
