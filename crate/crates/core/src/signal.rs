use crate::error::{Error, Result};

/// A finite sequence of real samples on a uniform grid, periodically extended.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
}

impl Signal {
    /// Wraps `samples`, rejecting empty input and NaN/Inf.
    ///
    /// Algorithms that need a minimum length (decomposition needs three
    /// samples) check it themselves.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { samples })
    }

    pub(crate) fn from_raw(samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self { samples }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            samples: vec![0.0; n],
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.samples)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.samples)
    }
}

impl AsRef<[f64]> for Signal {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

impl TryFrom<Vec<f64>> for Signal {
    type Error = Error;

    fn try_from(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples)
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
