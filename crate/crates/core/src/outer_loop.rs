//! Full decomposition: IMFs are peeled off the running remainder until what
//! is left is a trend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::{sample_filter, self_convolve, FilterShape};
use crate::inner_loop::{extract_imf_direct, extract_imf_iterative, ImfRecord, InnerConfig, InnerMode};
use crate::masklen::{count_extrema, MaskStrategy};
use crate::signal::{max_abs, Signal};
use crate::spectrum::{filter_eigenvalues, EigenCache};

/// A remainder whose max-abs norm falls below this fraction of the input's
/// is roundoff and ends the decomposition.
pub const NEGLIGIBLE_REMAINDER_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OuterConfig {
    /// IMFs with max-abs norm strictly above `eta` are significant.
    pub eta: f64,
    pub max_imfs: usize,
    pub mask_strategy: MaskStrategy,
    pub inner: InnerConfig,
    pub filter_shape: FilterShape,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            max_imfs: 50,
            mask_strategy: MaskStrategy::default(),
            inner: InnerConfig::default(),
            filter_shape: FilterShape::Triangular,
        }
    }
}

impl OuterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidConfig(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if self.max_imfs == 0 {
            return Err(Error::InvalidConfig("max_imfs must be at least 1".into()));
        }
        self.mask_strategy.validate()?;
        self.inner.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    /// The remainder has fewer than two interior extrema.
    Trend,
    MaxImfs,
    /// The remainder is at roundoff level relative to the input.
    NegligibleRemainder,
    /// The extracted IMF vanished, so the remainder would not change.
    Stalled,
    /// The selected filter does not fit in the period (`n < 5`).
    FilterDoesNotFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub imfs: Vec<ImfRecord>,
    pub trend: Signal,
    pub termination: TerminationReason,
    pub config_echo: OuterConfig,
}

impl Decomposition {
    /// Sum of all IMFs and the trend.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.trend.samples().to_vec();
        for rec in &self.imfs {
            for (o, v) in out.iter_mut().zip(rec.imf.samples()) {
                *o += v;
            }
        }
        out
    }

    pub fn significant_count(&self) -> usize {
        significant_count(self)
    }

    /// The signal each inner loop started from: the input minus all
    /// previously extracted IMFs.
    pub fn inner_inputs(&self, input: &Signal) -> Vec<Vec<f64>> {
        let mut cur = input.samples().to_vec();
        let mut out = Vec::with_capacity(self.imfs.len());
        for rec in &self.imfs {
            out.push(cur.clone());
            for (c, v) in cur.iter_mut().zip(rec.imf.samples()) {
                *c -= v;
            }
        }
        out
    }
}

pub fn significant_count(d: &Decomposition) -> usize {
    d.imfs.iter().filter(|r| r.significant).count()
}

/// Power-weighted mean frequency bin over `0..=n/2`.
pub fn spectral_centroid(x: &[f64]) -> f64 {
    let spec = fft::forward_real(x);
    let (num, den) = spec[..=x.len() / 2]
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(a, b), (k, c)| {
            let p = c.norm_sqr();
            (a + k as f64 * p, b + p)
        });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn decompose(s: &Signal, cfg: &OuterConfig) -> Result<Decomposition> {
    decompose_with_cache(s, cfg, None)
}

/// Runs the outer loop. While the remainder has at least two extrema and
/// fewer than `max_imfs` IMFs exist: pick the mask length `l` from the
/// remainder, sample the shape with half support `l`, self-convolve it,
/// extract an IMF and subtract it.
pub fn decompose_with_cache(
    s: &Signal,
    cfg: &OuterConfig,
    cache: Option<&EigenCache>,
) -> Result<Decomposition> {
    cfg.validate()?;
    let n = s.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!(
            "decomposition needs at least 3 samples, got {n}"
        )));
    }
    let negligible = NEGLIGIBLE_REMAINDER_RTOL * s.max_abs();
    // The doubled support 2l must still fit in the period.
    let max_mask = (n - 1) / 4;
    let mut remainder = s.samples().to_vec();
    let mut imfs: Vec<ImfRecord> = Vec::new();

    let termination = loop {
        if imfs.len() >= cfg.max_imfs {
            break TerminationReason::MaxImfs;
        }
        if count_extrema(&remainder) < 2 {
            break TerminationReason::Trend;
        }
        if max_abs(&remainder) <= negligible {
            break TerminationReason::NegligibleRemainder;
        }
        if max_mask == 0 {
            break TerminationReason::FilterDoesNotFit;
        }
        let index = imfs.len() + 1;
        let ctx = |e: Error| Error::Imf {
            index,
            source: Box::new(e),
        };
        let mask = cfg.mask_strategy.mask_length(&remainder).map_err(ctx)?.min(max_mask);
        let filter = sample_filter(&cfg.filter_shape, mask, n)
            .and_then(|f| self_convolve(&f))
            .map_err(ctx)?;
        let current = Signal::from_raw(remainder.clone());
        let mut rec = match cfg.inner.mode {
            InnerMode::Iterative => extract_imf_iterative(&current, &filter, &cfg.inner),
            InnerMode::Direct => {
                let ev = match cache {
                    Some(c) => c.eigenvalues(&filter),
                    None => filter_eigenvalues(&filter).map(std::sync::Arc::new),
                }
                .map_err(ctx)?;
                extract_imf_direct(&current, &ev, &cfg.inner)
            }
        }
        .map_err(ctx)?;
        if rec.zero_norm {
            break TerminationReason::Stalled;
        }
        rec.mask_length = mask;
        rec.significant = rec.imf.max_abs() > cfg.eta;
        for (r, v) in remainder.iter_mut().zip(rec.imf.samples()) {
            *r -= v;
        }
        log::debug!(
            "IMF {index}: mask {mask}, {} iterations, SD {:.3e}, centroid bin {:.2}",
            rec.iterations_used,
            rec.final_sd,
            spectral_centroid(rec.imf.samples())
        );
        imfs.push(rec);
    };

    Ok(Decomposition {
        imfs,
        trend: Signal::from_raw(remainder),
        termination,
        config_echo: cfg.clone(),
    })
}
