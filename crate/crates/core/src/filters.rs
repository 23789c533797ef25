//! Filter shapes, their discretization into circulant rows, and self-convolution.
//!
//! A [`DiscreteFilter`] stores the full length-`n` first row of the circulant
//! averaging operator `W`. Index `0` holds the center weight and the row is
//! symmetric, `weights[n - j] == weights[j]`, so the operator is symmetric
//! and its spectrum is real.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Tag identifying the family a discrete filter was sampled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    Triangular,
    TriangularSelfConvolved,
    Tabulated,
}

impl FilterKind {
    pub(crate) fn tag(self) -> u8 {
        match self {
            FilterKind::Triangular => 0,
            FilterKind::TriangularSelfConvolved => 1,
            FilterKind::Tabulated => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(FilterKind::Triangular),
            1 => Some(FilterKind::TriangularSelfConvolved),
            2 => Some(FilterKind::Tabulated),
            _ => None,
        }
    }
}

/// Continuous, even, nonnegative window on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterShape {
    /// `1 - |t|`.
    Triangular,
    /// The triangle convolved with itself and rescaled back onto `[-1, 1]`
    /// (a cubic B-spline).
    TriangularSelfConvolved,
    /// User-supplied samples, linearly interpolated and symmetrized.
    Tabulated(TabulatedShape),
}

impl FilterShape {
    pub fn kind(&self) -> FilterKind {
        match self {
            FilterShape::Triangular => FilterKind::Triangular,
            FilterShape::TriangularSelfConvolved => FilterKind::TriangularSelfConvolved,
            FilterShape::Tabulated(_) => FilterKind::Tabulated,
        }
    }

    /// Evaluates the shape at `t`; zero outside `[-1, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            FilterShape::Triangular => 1.0 - a,
            FilterShape::TriangularSelfConvolved => {
                let x = 2.0 * a;
                if x <= 1.0 {
                    2.0 / 3.0 - x * x + 0.5 * x * x * x
                } else {
                    let r = 2.0 - x;
                    r * r * r / 6.0
                }
            }
            FilterShape::Tabulated(table) => 0.5 * (table.interpolate(t) + table.interpolate(-t)),
        }
    }
}

/// Tabulated window samples `(t, weight)` with `t` in `[-1, 1]`, sorted by `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedShape {
    points: Vec<(f64, f64)>,
}

impl TabulatedShape {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTable("table has no rows".into()));
        }
        for &(t, w) in &points {
            if !t.is_finite() || !(-1.0..=1.0).contains(&t) {
                return Err(Error::InvalidTable(format!("abscissa {t} outside [-1, 1]")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidTable(format!(
                    "weight {w} at t = {t} is negative or non-finite"
                )));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(pair) = points.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidTable(format!("duplicate abscissa {}", pair[0].0)));
        }
        Ok(Self { points })
    }

    /// Parses the two-column `t,weight` CSV format. A first line that does
    /// not parse as numbers is treated as a header.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let parsed = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                None if idx == 0 => continue,
                None => {
                    return Err(Error::InvalidTable(format!(
                        "line {}: expected `t,weight`, got {line:?}",
                        idx + 1
                    )))
                }
            }
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn interpolate(&self, t: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if t < first.0 || t > last.0 {
            return 0.0;
        }
        let i = pts.partition_point(|p| p.0 <= t);
        if i == 0 {
            return first.1;
        }
        let (t0, w0) = pts[i - 1];
        if t0 == t || i == pts.len() {
            return w0;
        }
        let (t1, w1) = pts[i];
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// Symmetric, nonnegative, row-stochastic circulant row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilter {
    weights: Vec<f64>,
    half_support: usize,
    doubly_convolved: bool,
    kind: FilterKind,
}

impl DiscreteFilter {
    /// Builds a filter from a full circulant row after checking the
    /// structural invariants. Weights are renormalized to sum to one.
    pub fn from_row(weights: Vec<f64>, kind: FilterKind) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::EmptySignal);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidTable("weights must be finite and nonnegative".into()));
        }
        for j in 1..n {
            if weights[j] != weights[n - j] {
                return Err(Error::AsymmetryDetected {
                    residue: (weights[j] - weights[n - j]).abs(),
                    tolerance: 0.0,
                });
            }
        }
        let half_support = (0..=n / 2).rev().find(|&j| weights[j] != 0.0).unwrap_or(0);
        if 2 * half_support + 1 > n {
            return Err(Error::SupportTooLarge {
                half_support,
                period: n,
            });
        }
        let sum: f64 = weights.iter().sum();
        if sum == 0.0 {
            return Err(Error::DegenerateFilter);
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self {
            weights,
            half_support,
            doubly_convolved: false,
            kind,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn period(&self) -> usize {
        self.weights.len()
    }

    pub fn half_support(&self) -> usize {
        self.half_support
    }

    pub fn is_doubly_convolved(&self) -> bool {
        self.doubly_convolved
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    /// Center weight `c0`.
    pub fn center_weight(&self) -> f64 {
        self.weights[0]
    }

    /// The `2l + 1` nonzero-range weights, ordered from offset `-l` to `+l`.
    pub fn window(&self) -> Vec<f64> {
        let n = self.period();
        let h = self.half_support as isize;
        (-h..=h)
            .map(|j| self.weights[j.rem_euclid(n as isize) as usize])
            .collect()
    }

    /// Circular convolution `W x` by direct summation over the support window.
    pub fn convolve_direct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let n = x.len();
        let h = self.half_support;
        let window = self.window();
        let mut ext = Vec::with_capacity(n + 2 * h);
        ext.extend((0..h).map(|i| x[(n - h + i) % n]));
        ext.extend_from_slice(x);
        ext.extend((0..h).map(|i| x[i % n]));
        // The window is symmetric, so correlation and convolution coincide.
        Ok((0..n)
            .map(|i| {
                ext[i..i + window.len()]
                    .iter()
                    .zip(&window)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Circular convolution `W x` through the DFT.
    pub fn convolve_fft(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let spec = fft::forward_real(&self.weights);
        let mut buf = fft::forward_real(x);
        for (b, w) in buf.iter_mut().zip(&spec) {
            *b *= Complex64::new(w.re, 0.0);
        }
        fft::inverse_in_place(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.period() {
            return Err(Error::LengthMismatch {
                signal: len,
                filter: self.period(),
            });
        }
        Ok(())
    }
}

/// Samples `shape` at `t_j = j / l` for `|j| <= l`, lays the samples out
/// circularly on a period of `n` and normalizes them to sum to one.
pub fn sample_filter(shape: &FilterShape, half_support: usize, n: usize) -> Result<DiscreteFilter> {
    let l = half_support;
    if l == 0 {
        return Err(Error::InvalidHalfSupport(l));
    }
    if 2 * l + 1 > n {
        return Err(Error::SupportTooLarge {
            half_support: l,
            period: n,
        });
    }
    let samples: Vec<f64> = (0..=l).map(|j| shape.eval(j as f64 / l as f64)).collect();
    let sum = samples[0] + 2.0 * samples[1..].iter().sum::<f64>();
    if sum <= 0.0 {
        return Err(Error::DegenerateFilter);
    }
    let mut weights = vec![0.0; n];
    weights[0] = samples[0] / sum;
    for (j, &v) in samples.iter().enumerate().skip(1) {
        let w = v / sum;
        weights[j] = w;
        weights[n - j] = w;
    }
    Ok(DiscreteFilter {
        weights,
        half_support: l,
        doubly_convolved: false,
        kind: shape.kind(),
    })
}

/// Circular self-convolution. The result has twice the half support and a
/// spectrum equal to the square of the input's, hence nonnegative.
pub fn self_convolve(f: &DiscreteFilter) -> Result<DiscreteFilter> {
    let n = f.period();
    let h = f.half_support;
    let h2 = 2 * h;
    if 2 * h2 + 1 > n {
        return Err(Error::SupportTooLarge {
            half_support: h2,
            period: n,
        });
    }
    let window = f.window();
    let len = window.len();
    // full[k] is the weight at offset k - 2h.
    let mut full = vec![0.0; 2 * len - 1];
    for (i, a) in window.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        for (j, b) in window.iter().enumerate() {
            full[i + j] += a * b;
        }
    }
    let sum = full[h2] + 2.0 * full[h2 + 1..].iter().sum::<f64>();
    if sum <= 0.0 {
        return Err(Error::DegenerateFilter);
    }
    let mut weights = vec![0.0; n];
    weights[0] = full[h2] / sum;
    for k in 1..=h2 {
        let w = full[h2 + k] / sum;
        weights[k] = w;
        weights[n - k] = w;
    }
    Ok(DiscreteFilter {
        weights,
        half_support: h2,
        doubly_convolved: true,
        kind: f.kind,
    })
}
