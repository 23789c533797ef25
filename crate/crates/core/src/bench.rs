//! Iterative versus direct inner-loop timing on seeded synthetic signals.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::filters::{sample_filter, self_convolve, FilterShape};
use crate::inner_loop::{apply_direct, apply_iterative};
use crate::masklen::mask_length_extrema;
use crate::signal::Signal;
use crate::spectrum::filter_eigenvalues;

pub const BENCH_TONES: usize = 5;
/// Noise standard deviation relative to the RMS of the tone sum.
pub const BENCH_NOISE_LEVEL: f64 = 0.01;

/// Sum of five tones with random frequency (1 to n/16 cycles), amplitude
/// and phase, plus Gaussian noise at 1% of the tone RMS. Deterministic in
/// `(n, seed)`.
pub fn bench_signal(n: usize, seed: u64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32));
    let top = (n as f64 / 16.0).max(2.0);
    let tones: Vec<(f64, f64, f64)> = (0..BENCH_TONES)
        .map(|_| {
            (
                rng.random_range(1.0..top),
                rng.random_range(0.5..1.5),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            tones
                .iter()
                .map(|(f, a, p)| a * (std::f64::consts::TAU * f * t + p).sin())
                .sum()
        })
        .collect();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let noise = Normal::new(0.0, BENCH_NOISE_LEVEL * rms.max(f64::MIN_POSITIVE)).expect("finite sigma");
    for v in x.iter_mut() {
        *v += noise.sample(&mut rng);
    }
    Signal::new(x).expect("finite samples")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub iterations: usize,
    pub mask_length: usize,
    pub t_iterative: f64,
    pub t_direct: f64,
    pub max_abs_diff: f64,
}

impl BenchRow {
    pub fn speedup(&self) -> f64 {
        self.t_iterative / self.t_direct.max(f64::MIN_POSITIVE)
    }
}

/// Times `N` sifting steps by direct windowed convolution against the
/// spectral path (eigenvalue FFT, signal FFT, damping, inverse FFT) on the
/// same doubly-convolved triangular filter.
pub fn bench_size(n: usize, seed: u64, iterations: usize, nu: f64) -> Result<BenchRow> {
    if n < 16 {
        return Err(Error::InvalidConfig(format!("bench size {n} is below 16")));
    }
    let s = bench_signal(n, seed);
    let mask = mask_length_extrema(s.samples(), nu)?.min((n - 1) / 4).max(1);
    let filter = self_convolve(&sample_filter(&FilterShape::Triangular, mask, n)?)?;

    let t0 = Instant::now();
    let iterative = apply_iterative(&s, &filter, iterations)?;
    let t_iterative = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let ev = filter_eigenvalues(&filter)?;
    let direct = apply_direct(&s, &ev, iterations)?;
    let t_direct = t0.elapsed().as_secs_f64();

    let max_abs_diff = iterative
        .samples()
        .iter()
        .zip(direct.samples())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(BenchRow {
        n,
        iterations,
        mask_length: mask,
        t_iterative,
        t_direct,
        max_abs_diff,
    })
}

pub fn format_bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,N,t_iterative,t_direct,speedup\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:?},{:?},{:?}\n",
            r.n,
            r.iterations,
            r.t_iterative,
            r.t_direct,
            r.speedup()
        ));
    }
    out
}
