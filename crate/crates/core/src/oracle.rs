//! Slow reference implementations for tests and benchmarks: the explicit
//! circulant matrix, its powers, and its eigenvalues computed without the FFT.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::filters::DiscreteFilter;
use crate::signal::Signal;

pub const DENSE_LIMIT: usize = 2048;
pub const EIGEN_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseCirculant {
    entries: DMatrix<f64>,
}

impl DenseCirculant {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// `W[i][j] = w[(j - i) mod n]`.
pub fn build_dense(f: &DiscreteFilter) -> Result<DenseCirculant> {
    let n = f.period();
    if n > DENSE_LIMIT {
        return Err(Error::SizeGuard { n, limit: DENSE_LIMIT });
    }
    let w = f.weights();
    let entries = DMatrix::from_fn(n, n, |i, j| w[(j + n - i) % n]);
    for i in 0..n {
        let row_sum: f64 = entries.row(i).iter().sum();
        if (row_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!("row {i} sums to {row_sum}")));
        }
        for j in 0..i {
            if entries[(i, j)] != entries[(j, i)] {
                return Err(Error::AsymmetryDetected {
                    residue: (entries[(i, j)] - entries[(j, i)]).abs(),
                    tolerance: 0.0,
                });
            }
        }
    }
    Ok(DenseCirculant { entries })
}

/// `(I - W)^N s` by `N` explicit matrix-vector products.
pub fn dense_power_apply(w: &DenseCirculant, s: &Signal, iterations: usize) -> Result<Signal> {
    if s.len() != w.dim() {
        return Err(Error::LengthMismatch {
            signal: s.len(),
            filter: w.dim(),
        });
    }
    let mut cur = nalgebra::DVector::from_column_slice(s.samples());
    for _ in 0..iterations {
        let avg = &w.entries * &cur;
        cur -= avg;
    }
    Ok(Signal::from_raw(cur.as_slice().to_vec()))
}

/// Eigenvalue of each Fourier mode from the cosine sum
/// `lambda_j = c0 + 2 sum_{k=1}^{(n-1)/2} c_k cos(2 pi j k / n)` (plus the
/// Nyquist term for even `n`), indexed by bin.
pub fn dense_eigenvalues(w: &DenseCirculant) -> Result<Vec<f64>> {
    let n = w.dim();
    if n > EIGEN_LIMIT {
        return Err(Error::SizeGuard { n, limit: EIGEN_LIMIT });
    }
    let c: Vec<f64> = w.entries.row(0).iter().copied().collect();
    Ok((0..n)
        .map(|j| {
            let mut acc = c[0];
            for (k, ck) in c.iter().enumerate().take((n - 1) / 2 + 1).skip(1) {
                let arg = 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                acc += 2.0 * ck * arg.cos();
            }
            if n.is_multiple_of(2) {
                acc += c[n / 2] * if j % 2 == 0 { 1.0 } else { -1.0 };
            }
            acc
        })
        .collect())
}

/// Eigenvalues from a general dense symmetric eigensolver, ascending.
pub fn dense_symmetric_eigenvalues(w: &DenseCirculant) -> Result<Vec<f64>> {
    let n = w.dim();
    if n > EIGEN_LIMIT {
        return Err(Error::SizeGuard { n, limit: EIGEN_LIMIT });
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(w.entries.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
