//! Spectrum of the circulant averaging operator.
//!
//! `W` is circulant and symmetric, so its eigenvectors are the Fourier modes
//! and its eigenvalues are the DFT of the filter row. Doubly-convolved
//! filters have their spectrum in `[0, 1]`, with exactly one eigenvalue equal
//! to one when `c0 < 1`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::{DiscreteFilter, FilterKind};

/// Tolerance on realness, row sum and stochastic bounds of the spectrum.
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Distance from 1 within which an eigenvalue counts as a unit eigenvalue.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-8;
/// `1 - lambda` below this is reported as misuse rather than clamped.
pub const DAMPING_BASE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterEigenvalues {
    lambdas: Vec<f64>,
    doubly_convolved: bool,
    half_support: usize,
    center_weight: f64,
}

impl FilterEigenvalues {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn is_doubly_convolved(&self) -> bool {
        self.doubly_convolved
    }

    /// Half support of the filter the spectrum was computed from.
    pub fn half_support(&self) -> usize {
        self.half_support
    }

    pub fn center_weight(&self) -> f64 {
        self.center_weight
    }
}

/// Eigenvalues of the circulant operator with first row `f.weights()`.
///
/// The raw DFT coefficients are checked for realness, the unit row sum, the
/// stochastic bound `|lambda| <= 1` and, for doubly-convolved filters,
/// nonnegativity. The returned vector is symmetrized so that
/// `lambda[j] == lambda[n - j]` exactly.
pub fn filter_eigenvalues(f: &DiscreteFilter) -> Result<FilterEigenvalues> {
    let n = f.period();
    let raw = fft::forward_real(f.weights());
    let residue = raw.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    let tolerance = SPECTRUM_TOL * n as f64;
    if residue > tolerance {
        return Err(Error::AsymmetryDetected { residue, tolerance });
    }
    let mut lambdas: Vec<f64> = raw.iter().map(|c| c.re).collect();
    for j in 1..=n / 2 {
        let avg = 0.5 * (lambdas[j] + lambdas[n - j]);
        lambdas[j] = avg;
        lambdas[n - j] = avg;
    }
    if (lambdas[0] - 1.0).abs() > SPECTRUM_TOL {
        return Err(Error::InvalidSpectrum(format!(
            "lambda[0] = {} is not 1",
            lambdas[0]
        )));
    }
    if let Some((j, l)) = lambdas
        .iter()
        .enumerate()
        .find(|(_, l)| l.abs() > 1.0 + SPECTRUM_TOL)
    {
        return Err(Error::InvalidSpectrum(format!("|lambda[{j}]| = {} exceeds 1", l.abs())));
    }
    if f.is_doubly_convolved() {
        if let Some((j, l)) = lambdas.iter().enumerate().find(|(_, l)| **l < -SPECTRUM_TOL) {
            return Err(Error::InvalidSpectrum(format!(
                "doubly-convolved filter has negative lambda[{j}] = {l}"
            )));
        }
    }
    Ok(FilterEigenvalues {
        lambdas,
        doubly_convolved: f.is_doubly_convolved(),
        half_support: f.half_support(),
        center_weight: f.center_weight(),
    })
}

/// True iff exactly one eigenvalue lies within `1e-8` of one. When
/// `c0_lt_1` is false the uniqueness hypothesis does not apply and the
/// check passes vacuously.
pub fn unique_unit_eigenvalue_check(ev: &FilterEigenvalues, c0_lt_1: bool) -> bool {
    if !c0_lt_1 {
        return true;
    }
    ev.lambdas
        .iter()
        .filter(|l| (*l - 1.0).abs() <= UNIT_EIGENVALUE_TOL)
        .count()
        == 1
}

fn damping_base(bin: usize, lambda: f64) -> Result<f64> {
    let base = 1.0 - lambda;
    if !(-DAMPING_BASE_TOL..=1.0 + DAMPING_BASE_TOL).contains(&base) {
        return Err(Error::DampingBaseOutOfRange { bin, base });
    }
    Ok(base.clamp(0.0, 1.0))
}

/// Clamped `1 - lambda_j` for every bin.
pub fn damping_bases(ev: &FilterEigenvalues) -> Result<Vec<f64>> {
    ev.lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| damping_base(j, l))
        .collect()
}

pub(crate) fn pow_n(base: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => base.powi(k),
        Err(_) => base.powf(n as f64),
    }
}

/// Per-bin retention `(1 - lambda_j)^N`.
pub fn damping_factors(ev: &FilterEigenvalues, iterations: u64) -> Result<Vec<f64>> {
    Ok(damping_bases(ev)?
        .into_iter()
        .map(|b| pow_n(b, iterations))
        .collect())
}

/// `1 - (1 - gamma)^(1/N)`.
pub fn threshold_value(gamma: f64, iterations: u64) -> f64 {
    1.0 - (1.0 - gamma).powf(1.0 / iterations as f64)
}

/// Bins whose eigenvalue lies at or below `1 - (1 - gamma)^(1/N)`. These
/// bins keep at least a `1 - gamma` fraction after `N` steps and are passed
/// through whole in threshold mode.
pub fn threshold_mask(ev: &FilterEigenvalues, gamma: f64, iterations: u64) -> Result<Vec<bool>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if iterations == 0 {
        return Err(Error::InvalidConfig("threshold mask needs N >= 1".into()));
    }
    let thr = threshold_value(gamma, iterations);
    Ok(ev.lambdas.iter().map(|&l| l <= thr).collect())
}

/// Cache key for precomputed spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub kind: FilterKind,
    pub doubly_convolved: bool,
    pub half_support: usize,
    pub period: usize,
}

impl CacheKey {
    fn tag(&self) -> u8 {
        self.kind.tag() | if self.doubly_convolved { 0x80 } else { 0 }
    }
}

const CACHE_MAGIC: &[u8; 8] = b"IFEIGEN\0";
const CACHE_VERSION: u32 = 1;

/// In-memory store of precomputed spectra, optionally persisted to disk.
///
/// Only built-in filter kinds are cached; a tabulated filter is not
/// identified by `(kind, l, n)` alone. Concurrent readers are allowed and a
/// duplicate insert of the same key is harmless.
#[derive(Debug, Default)]
pub struct EigenCache {
    entries: RwLock<HashMap<CacheKey, Arc<FilterEigenvalues>>>,
}

impl EigenCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn key_for(f: &DiscreteFilter) -> Option<CacheKey> {
        (f.kind() != FilterKind::Tabulated).then(|| CacheKey {
            kind: f.kind(),
            doubly_convolved: f.is_doubly_convolved(),
            half_support: f.half_support(),
            period: f.period(),
        })
    }

    pub fn get(&self, key: &CacheKey) -> Option<Arc<FilterEigenvalues>> {
        self.entries.read().expect("cache lock poisoned").get(key).cloned()
    }

    /// Returns the cached spectrum for `f`, computing and storing it on a miss.
    pub fn eigenvalues(&self, f: &DiscreteFilter) -> Result<Arc<FilterEigenvalues>> {
        let Some(key) = Self::key_for(f) else {
            return Ok(Arc::new(filter_eigenvalues(f)?));
        };
        if let Some(hit) = self.get(&key) {
            return Ok(hit);
        }
        let ev = Arc::new(filter_eigenvalues(f)?);
        let mut map = self.entries.write().expect("cache lock poisoned");
        Ok(map.entry(key).or_insert(ev).clone())
    }

    /// Writes all entries: an 8-byte magic, a little-endian `u32` version and
    /// `u64` record count, then per record a `u8` kind tag (high bit set for
    /// doubly-convolved), `u64` half support, `u64` period and `period`
    /// little-endian `f64` eigenvalues.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let map = self.entries.read().expect("cache lock poisoned");
        let mut keys: Vec<&CacheKey> = map.keys().collect();
        keys.sort_by_key(|k| (k.tag(), k.half_support, k.period));
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(keys.len() as u64).to_le_bytes())?;
        for key in keys {
            let ev = &map[key];
            w.write_all(&[key.tag()])?;
            w.write_all(&(key.half_support as u64).to_le_bytes())?;
            w.write_all(&(key.period as u64).to_le_bytes())?;
            for l in &ev.lambdas {
                w.write_all(&l.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        fn io(e: std::io::Error) -> Error {
            Error::Cache(e.to_string())
        }
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b8).map_err(io)?;
        let count = u64::from_le_bytes(b8);
        let mut map = HashMap::new();
        for _ in 0..count {
            let mut tag = [0u8; 1];
            r.read_exact(&mut tag).map_err(io)?;
            let kind = FilterKind::from_tag(tag[0] & 0x7f)
                .filter(|k| *k != FilterKind::Tabulated)
                .ok_or_else(|| Error::Cache(format!("unknown kind tag {}", tag[0])))?;
            r.read_exact(&mut b8).map_err(io)?;
            let half_support = u64::from_le_bytes(b8) as usize;
            r.read_exact(&mut b8).map_err(io)?;
            let period = u64::from_le_bytes(b8) as usize;
            if period == 0 || period > (1 << 32) {
                return Err(Error::Cache(format!("implausible period {period}")));
            }
            let mut lambdas = Vec::with_capacity(period);
            for _ in 0..period {
                r.read_exact(&mut b8).map_err(io)?;
                lambdas.push(f64::from_le_bytes(b8));
            }
            let key = CacheKey {
                kind,
                doubly_convolved: tag[0] & 0x80 != 0,
                half_support,
                period,
            };
            let center_weight = lambdas.iter().sum::<f64>() / period as f64;
            map.insert(
                key,
                Arc::new(FilterEigenvalues {
                    lambdas,
                    doubly_convolved: key.doubly_convolved,
                    half_support,
                    center_weight,
                }),
            );
        }
        Ok(Self {
            entries: RwLock::new(map),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Cache(e.to_string()))?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::Cache(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Cache(e.to_string()))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}
