//! Extraction of a single IMF.
//!
//! With the mask length fixed for the whole inner loop, `N` sifting steps
//! compute `(I - W)^N s`. The iterative path applies the step by direct
//! windowed convolution; the direct path diagonalizes `W` with the DFT and
//! applies `(1 - lambda_j)^N` to each bin in one shot.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::DiscreteFilter;
use crate::signal::{norm2, Signal};
use crate::spectrum::{damping_bases, pow_n, threshold_mask, FilterEigenvalues};

/// Largest `N0` the a-priori bound will search for.
pub const N0_LIMIT: u64 = 1_000_000_000;
/// An iterate whose norm falls to this fraction of the input norm is treated
/// as fully averaged away.
pub const ZERO_NORM_RTOL: f64 = 1e-13;
/// Allowed imaginary residue of the inverse DFT, relative to `||s||_2`.
pub const IMAG_RESIDUE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMode {
    Iterative,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    /// Threshold on the relative step size `||s_{N+1} - s_N|| / ||s_N||`.
    pub delta: f64,
    pub max_iterations: usize,
    pub mode: InnerMode,
    /// Enables threshold mode (direct path only).
    pub gamma: Option<f64>,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            max_iterations: 200,
            mode: InnerMode::Direct,
            gamma: None,
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {}", self.delta)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {g}")));
            }
            if self.mode == InnerMode::Iterative {
                return Err(Error::InvalidConfig(
                    "threshold mode (gamma) requires the direct mode".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImfRecord {
    pub imf: Signal,
    /// Half support of the filter used. [`crate::outer_loop::decompose`]
    /// overwrites this with the selected mask length.
    pub mask_length: usize,
    pub iterations_used: usize,
    pub final_sd: f64,
    pub significant: bool,
    /// The iterate vanished before the stopping criterion fired.
    pub zero_norm: bool,
}

/// One sifting step `s - W s`, by direct windowed summation.
pub fn dif_step(s: &Signal, f: &DiscreteFilter) -> Result<Signal> {
    let avg = f.convolve_direct(s.samples())?;
    Ok(Signal::from_raw(
        s.samples().iter().zip(avg).map(|(x, m)| x - m).collect(),
    ))
}

/// One sifting step computed through the DFT.
pub fn dif_step_fft(s: &Signal, f: &DiscreteFilter) -> Result<Signal> {
    let avg = f.convolve_fft(s.samples())?;
    Ok(Signal::from_raw(
        s.samples().iter().zip(avg).map(|(x, m)| x - m).collect(),
    ))
}

/// `(I - W)^N s` by `N` direct-summation steps.
pub fn apply_iterative(s: &Signal, f: &DiscreteFilter, iterations: usize) -> Result<Signal> {
    let mut cur = s.clone();
    for _ in 0..iterations {
        cur = dif_step(&cur, f)?;
    }
    Ok(cur)
}

/// `IDFT((1 - lambda)^N DFT(s))`.
pub fn apply_direct(s: &Signal, ev: &FilterEigenvalues, iterations: usize) -> Result<Signal> {
    check_len(s, ev)?;
    let bases = damping_bases(ev)?;
    let factors: Vec<f64> = bases.iter().map(|&b| pow_n(b, iterations as u64)).collect();
    let sigma = fft::forward_real(s.samples());
    synthesize(&sigma, &factors, s.norm2())
}

fn check_len(s: &Signal, ev: &FilterEigenvalues) -> Result<()> {
    if s.len() != ev.len() {
        return Err(Error::LengthMismatch {
            signal: s.len(),
            filter: ev.len(),
        });
    }
    Ok(())
}

fn check_doubly_convolved(doubly: bool) -> Result<()> {
    if !doubly {
        return Err(Error::InvalidConfig(
            "IMF extraction requires a doubly-convolved filter".into(),
        ));
    }
    Ok(())
}

fn synthesize(sigma: &[Complex64], factors: &[f64], input_norm: f64) -> Result<Signal> {
    let mut buf: Vec<Complex64> = sigma.iter().zip(factors).map(|(s, &f)| s * f).collect();
    fft::inverse_in_place(&mut buf);
    let residue = buf.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    let tolerance = IMAG_RESIDUE_RTOL * input_norm;
    if residue > tolerance {
        return Err(Error::ResidualImaginary { residue, tolerance });
    }
    Ok(Signal::from_raw(buf.into_iter().map(|c| c.re).collect()))
}

fn zero_record(n: usize, mask_length: usize, iterations_used: usize) -> ImfRecord {
    ImfRecord {
        imf: Signal::zeros(n),
        mask_length,
        iterations_used,
        final_sd: 0.0,
        significant: false,
        zero_norm: true,
    }
}

/// Sifts `s` with `f` until the relative step falls below `cfg.delta` or
/// `cfg.max_iterations` is reached, returning `s_N` for the smallest such `N >= 1`.
pub fn extract_imf_iterative(s: &Signal, f: &DiscreteFilter, cfg: &InnerConfig) -> Result<ImfRecord> {
    cfg.validate()?;
    check_doubly_convolved(f.is_doubly_convolved())?;
    if s.len() != f.period() {
        return Err(Error::LengthMismatch {
            signal: s.len(),
            filter: f.period(),
        });
    }
    let zero_floor = ZERO_NORM_RTOL * s.norm2();
    let mut cur = dif_step(s, f)?;
    for n_iter in 1..=cfg.max_iterations {
        let cur_norm = cur.norm2();
        if cur_norm <= zero_floor {
            return Ok(zero_record(s.len(), f.half_support(), n_iter));
        }
        let next = dif_step(&cur, f)?;
        let diff: f64 = cur
            .samples()
            .iter()
            .zip(next.samples())
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        let sd = diff / cur_norm;
        if sd < cfg.delta || n_iter == cfg.max_iterations {
            let significant = cur.max_abs() > 0.0;
            return Ok(ImfRecord {
                imf: cur,
                mask_length: f.half_support(),
                iterations_used: n_iter,
                final_sd: sd,
                significant,
                zero_norm: false,
            });
        }
        cur = next;
    }
    unreachable!("max_iterations >= 1 is validated")
}

/// Relative step size and squared norm of `s_N`, evaluated on the spectrum.
struct SdProbe<'a> {
    bases: &'a [f64],
    power: &'a [f64],
    zero_floor_sq: f64,
}

enum Probe {
    Zero,
    Sd(f64),
}

impl SdProbe<'_> {
    fn eval(&self, n_iter: usize) -> Probe {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&b, &p) in self.bases.iter().zip(self.power) {
            let f = pow_n(b, n_iter as u64);
            let d = f * (1.0 - b);
            num += d * d * p;
            den += f * f * p;
        }
        if den <= self.zero_floor_sq {
            Probe::Zero
        } else {
            Probe::Sd((num / den).sqrt())
        }
    }

    fn satisfied(&self, n_iter: usize, delta: f64) -> bool {
        match self.eval(n_iter) {
            Probe::Zero => true,
            Probe::Sd(sd) => sd < delta,
        }
    }
}

/// Direct extraction: finds the smallest `N` in `[1, max_iterations]` whose
/// relative step is below `delta` (probing `N = 1, 2, 4, ...` and then
/// bisecting the bracket) and returns `IDFT((1 - lambda)^N DFT(s))`.
///
/// With `cfg.gamma` set, bins selected by [`threshold_mask`] at the found
/// `N` keep factor exactly one.
pub fn extract_imf_direct(s: &Signal, ev: &FilterEigenvalues, cfg: &InnerConfig) -> Result<ImfRecord> {
    cfg.validate()?;
    check_doubly_convolved(ev.is_doubly_convolved())?;
    check_len(s, ev)?;
    let n = s.len();
    let bases = damping_bases(ev)?;
    let sigma = fft::forward_real(s.samples());
    let power: Vec<f64> = sigma.iter().map(|c| c.norm_sqr()).collect();
    let input_norm = s.norm2();
    // Parseval: ||x||^2 = sum |X_k|^2 / n
    let zero_floor_sq = (ZERO_NORM_RTOL * input_norm).powi(2) * n as f64;
    let probe = SdProbe {
        bases: &bases,
        power: &power,
        zero_floor_sq,
    };

    let max = cfg.max_iterations;
    let mut lo = 0usize;
    let mut hi = 1usize;
    loop {
        if probe.satisfied(hi, cfg.delta) {
            break;
        }
        if hi == max {
            break;
        }
        lo = hi;
        hi = (hi * 2).min(max);
    }
    if probe.satisfied(hi, cfg.delta) {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe.satisfied(mid, cfg.delta) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let n_iter = hi;
    let final_sd = match probe.eval(n_iter) {
        Probe::Zero => return Ok(zero_record(n, ev.half_support(), n_iter)),
        Probe::Sd(sd) => sd,
    };

    let mut factors: Vec<f64> = bases.iter().map(|&b| pow_n(b, n_iter as u64)).collect();
    if let Some(gamma) = cfg.gamma {
        let mask = threshold_mask(ev, gamma, n_iter as u64)?;
        for (f, m) in factors.iter_mut().zip(mask) {
            if m {
                *f = 1.0;
            }
        }
    }
    let imf = synthesize(&sigma, &factors, input_norm)?;
    let significant = imf.max_abs() > 0.0;
    Ok(ImfRecord {
        imf,
        mask_length: ev.half_support(),
        iterations_used: n_iter,
        final_sd,
        significant,
        zero_norm: false,
    })
}

/// `N^N / (N+1)^(N+1)`, evaluated as `exp(-N ln(1 + 1/N)) / (N+1)`.
pub fn n0_sequence(n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    (-nf * (1.0 / nf).ln_1p()).exp() / (nf + 1.0)
}

/// Smallest `N0 >= 1` with `N0^N0 / (N0+1)^(N0+1) < rhs`.
pub fn minimal_n0(rhs: f64) -> Result<u64> {
    if rhs.is_nan() || rhs <= 0.0 {
        return Err(Error::InvalidConfig(format!("bound right-hand side must be positive, got {rhs}")));
    }
    if n0_sequence(N0_LIMIT) >= rhs {
        return Err(Error::BoundOverflow { limit: N0_LIMIT });
    }
    if n0_sequence(1) < rhs {
        return Ok(1);
    }
    // invariant: f(lo) >= rhs > f(hi)
    let (mut lo, mut hi) = (1u64, N0_LIMIT);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if n0_sequence(mid) < rhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A-priori iteration count after which `||s_{m+1} - s_m||_2 < delta_abs`
/// for all `m >= N0`. Uses the unitary-normalized spectrum
/// `||DFT(s)||_inf / sqrt(n)` and assumes no exactly-zero eigenvalues.
pub fn n0_bound(s: &Signal, ev: &FilterEigenvalues, delta_abs: f64) -> Result<u64> {
    check_len(s, ev)?;
    if !(delta_abs.is_finite() && delta_abs > 0.0) {
        return Err(Error::InvalidConfig(format!("delta_abs must be positive, got {delta_abs}")));
    }
    let n = s.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("{n} samples")));
    }
    let sigma = fft::forward_real(s.samples());
    let sup = sigma.iter().fold(0.0_f64, |m, c| m.max(c.norm())) / (n as f64).sqrt();
    if sup == 0.0 {
        return Err(Error::DegenerateInput("zero signal".into()));
    }
    minimal_n0(delta_abs / (sup * ((n - 1) as f64).sqrt()))
}

/// `||a - b||_2`.
pub fn step_norm(a: &Signal, b: &Signal) -> f64 {
    let d: Vec<f64> = a.samples().iter().zip(b.samples()).map(|(x, y)| x - y).collect();
    norm2(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{sample_filter, self_convolve, FilterKind, FilterShape};
    use crate::spectrum::filter_eigenvalues;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tri2(l: usize, n: usize) -> DiscreteFilter {
        self_convolve(&sample_filter(&FilterShape::Triangular, l, n).unwrap()).unwrap()
    }

    fn uniform(n: usize) -> DiscreteFilter {
        let f = DiscreteFilter::from_row(vec![1.0; n], FilterKind::Tabulated).unwrap();
        assert_eq!(f.half_support(), n / 2);
        f
    }

    fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Signal {
        Signal::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn max_diff(a: &Signal, b: &Signal) -> f64 {
        a.samples()
            .iter()
            .zip(b.samples())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn dif_step_examples() {
        let c = Signal::new(vec![2.5; 17]).unwrap();
        let out = dif_step(&c, &tri2(2, 17)).unwrap();
        assert!(out.max_abs() < 1e-14);

        let delta = sample_filter(&FilterShape::Triangular, 1, 9).unwrap();
        let s = Signal::new((0..9).map(|i| i as f64).collect()).unwrap();
        assert_eq!(dif_step(&s, &delta).unwrap().max_abs(), 0.0);

        let n = 8;
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let e0 = Signal::new(e0).unwrap();
        let u = DiscreteFilter::from_row(vec![1.0; 7], FilterKind::Tabulated).unwrap();
        let e7 = Signal::new({
            let mut v = vec![0.0; 7];
            v[0] = 1.0;
            v
        })
        .unwrap();
        let out = dif_step(&e7, &u).unwrap();
        for (i, v) in out.samples().iter().enumerate() {
            let want = if i == 0 { 1.0 - 1.0 / 7.0 } else { -1.0 / 7.0 };
            assert!((v - want).abs() < 1e-15);
        }
        assert!(matches!(
            dif_step(&e0, &u),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn dif_step_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_signal(&mut rng, 101);
        let f = tri2(6, 101);
        let a = dif_step(&s, &f).unwrap();
        let b = dif_step_fft(&s, &f).unwrap();
        assert!(max_diff(&a, &b) <= 1e-12 * s.max_abs());
    }

    #[test]
    fn pure_tone_on_zero_bin_converges_immediately() {
        // Triangle with l = 8 on n = 128 has exact spectral zeros at
        // multiples of 16; so does its square.
        let n = 128;
        let f = tri2(8, n);
        let ev = filter_eigenvalues(&f).unwrap();
        assert!(ev.lambdas()[16].abs() < 1e-15);
        let s = Signal::new((0..n).map(|i| (2.0 * PI * 16.0 * i as f64 / n as f64).cos()).collect())
            .unwrap();
        let cfg = InnerConfig {
            mode: InnerMode::Iterative,
            ..InnerConfig::default()
        };
        let it = extract_imf_iterative(&s, &f, &cfg).unwrap();
        assert_eq!(it.iterations_used, 1);
        assert!(it.final_sd < 1e-12);
        let dir = extract_imf_direct(&s, &ev, &InnerConfig::default()).unwrap();
        assert_eq!(dir.iterations_used, 1);
        assert!(max_diff(&dir.imf, &s) < 1e-12);
    }

    #[test]
    fn constant_signal_gives_zero_imf() {
        let s = Signal::new(vec![1.5; 33]).unwrap();
        let f = tri2(3, 33);
        let cfg = InnerConfig {
            mode: InnerMode::Iterative,
            ..InnerConfig::default()
        };
        let it = extract_imf_iterative(&s, &f, &cfg).unwrap();
        assert!(it.zero_norm);
        assert_eq!(it.imf.max_abs(), 0.0);
        let ev = filter_eigenvalues(&f).unwrap();
        let dir = extract_imf_direct(&s, &ev, &InnerConfig::default()).unwrap();
        assert!(dir.zero_norm);
        assert_eq!(dir.iterations_used, 1);
    }

    /// (I - W)^N s by explicit matrix-vector products with the circulant.
    fn dense_power(f: &DiscreteFilter, s: &Signal, iterations: usize) -> Vec<f64> {
        let n = s.len();
        let w = f.weights();
        let mut cur = s.samples().to_vec();
        for _ in 0..iterations {
            let next: Vec<f64> = (0..n)
                .map(|i| cur[i] - (0..n).map(|j| w[(j + n - i) % n] * cur[j]).sum::<f64>())
                .collect();
            cur = next;
        }
        cur
    }

    #[test]
    fn iterative_and_direct_extraction_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 64;
        let f = tri2(4, n);
        let ev = filter_eigenvalues(&f).unwrap();
        for _ in 0..10 {
            let s = random_signal(&mut rng, n);
            let it = extract_imf_iterative(
                &s,
                &f,
                &InnerConfig {
                    mode: InnerMode::Iterative,
                    ..InnerConfig::default()
                },
            )
            .unwrap();
            let dir = extract_imf_direct(&s, &ev, &InnerConfig::default()).unwrap();
            assert_eq!(it.iterations_used, dir.iterations_used);
            assert!(max_diff(&it.imf, &dir.imf) <= 1e-10);
            assert!((it.final_sd - dir.final_sd).abs() <= 1e-9 * it.final_sd.max(1e-300));
            let dense = dense_power(&f, &s, it.iterations_used);
            assert!(max_diff(&it.imf, &Signal::new(dense).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn uniform_filter_fixed_n_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 128;
        let f = uniform(n + 1);
        let ev = filter_eigenvalues(&f).unwrap();
        let s = random_signal(&mut rng, n + 1);
        for iters in [1, 5, 50] {
            let a = apply_iterative(&s, &f, iters).unwrap();
            let b = apply_direct(&s, &ev, iters).unwrap();
            assert!(max_diff(&a, &b) <= 1e-10);
        }
    }

    #[test]
    fn search_finds_minimal_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 200;
        let f = tri2(5, n);
        let ev = filter_eigenvalues(&f).unwrap();
        let s = random_signal(&mut rng, n);
        for delta in [0.5, 0.1, 0.03, 1e-2] {
            let cfg = InnerConfig {
                delta,
                max_iterations: 10_000,
                ..InnerConfig::default()
            };
            let rec = extract_imf_direct(&s, &ev, &cfg).unwrap();
            // brute-force scan of the stopping quantity
            let mut prev = apply_direct(&s, &ev, 1).unwrap();
            let mut want = None;
            for k in 1..=10_000 {
                let next = dif_step_fft(&prev, &f).unwrap();
                if step_norm(&next, &prev) / prev.norm2() < delta {
                    want = Some(k);
                    break;
                }
                prev = next;
            }
            assert_eq!(Some(rec.iterations_used), want, "delta {delta}");
        }
    }

    #[test]
    fn max_iterations_caps_both_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 65;
        let f = tri2(2, n);
        let ev = filter_eigenvalues(&f).unwrap();
        let s = random_signal(&mut rng, n);
        let cfg = InnerConfig {
            delta: 1e-12,
            max_iterations: 7,
            ..InnerConfig::default()
        };
        let dir = extract_imf_direct(&s, &ev, &cfg).unwrap();
        assert_eq!(dir.iterations_used, 7);
        let it = extract_imf_iterative(
            &s,
            &f,
            &InnerConfig {
                mode: InnerMode::Iterative,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(it.iterations_used, 7);
        assert!((it.final_sd - dir.final_sd).abs() <= 1e-9 * dir.final_sd);
    }

    #[test]
    fn threshold_mode_passes_masked_bins_whole() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 257;
        let f = tri2(6, n);
        let ev = filter_eigenvalues(&f).unwrap();
        let s = random_signal(&mut rng, n);
        let cfg = InnerConfig {
            delta: 1e-9,
            max_iterations: 500,
            gamma: Some(0.1),
            ..InnerConfig::default()
        };
        let rec = extract_imf_direct(&s, &ev, &cfg).unwrap();
        let mask = threshold_mask(&ev, 0.1, rec.iterations_used as u64).unwrap();
        assert!(mask.iter().any(|&m| m));
        let x = fft::forward_real(s.samples());
        let y = fft::forward_real(rec.imf.samples());
        for j in 0..n {
            if mask[j] {
                assert!((x[j].norm() - y[j].norm()).abs() <= 1e-12 * x[j].norm().max(1.0));
            }
            assert!(y[j].norm() <= x[j].norm() + 1e-9);
        }
    }

    #[test]
    fn config_and_precondition_errors() {
        let s = Signal::new(vec![0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0]).unwrap();
        let f = sample_filter(&FilterShape::Triangular, 2, 9).unwrap();
        let it = InnerConfig {
            mode: InnerMode::Iterative,
            ..InnerConfig::default()
        };
        assert!(matches!(
            extract_imf_iterative(&s, &f, &it),
            Err(Error::InvalidConfig(_))
        ));
        let ff = self_convolve(&f).unwrap();
        let bad = InnerConfig { gamma: Some(0.2), ..it };
        assert!(matches!(
            extract_imf_iterative(&s, &ff, &bad),
            Err(Error::InvalidConfig(_))
        ));
        let bad = InnerConfig { delta: 0.0, ..InnerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = InnerConfig { max_iterations: 0, ..InnerConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn n0_sequence_oracle_values() {
        // Exact rational evaluation, frozen: f(36) = 0.010079204..., f(37) = 0.009810409...
        assert!((n0_sequence(36) - 0.010_079_204_043_287_108).abs() < 1e-15);
        assert!((n0_sequence(37) - 0.009_810_409_121_224_651).abs() < 1e-15);
        assert_eq!(n0_sequence(1), 0.25);
        assert_eq!(minimal_n0(0.01).unwrap(), 37);
        assert_eq!(minimal_n0(0.5).unwrap(), 1);
        assert_eq!(minimal_n0(0.3).unwrap(), 1);
        assert_eq!(minimal_n0(0.25).unwrap(), 2);
        assert_eq!(minimal_n0(1e-12), Err(Error::BoundOverflow { limit: N0_LIMIT }));
        // sequential scan agrees with the bisection
        for rhs in [0.2, 0.07, 0.013, 0.0021, 4.5e-4] {
            let seq = (1..).find(|&k| n0_sequence(k) < rhs).unwrap();
            assert_eq!(minimal_n0(rhs).unwrap(), seq);
        }
    }

    #[test]
    fn n0_bound_is_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let n = rng.random_range(20..120);
            let l = rng.random_range(1..=(n - 1) / 4);
            let f = tri2(l, n);
            let ev = filter_eigenvalues(&f).unwrap();
            let s = random_signal(&mut rng, n);
            let delta_abs = 10f64.powf(rng.random_range(-3.0..-1.0));
            let n0 = n0_bound(&s, &ev, delta_abs).unwrap();
            let mut prev = s.clone();
            let mut found = None;
            for m in 0..=n0 {
                let next = dif_step(&prev, &f).unwrap();
                if step_norm(&next, &prev) < delta_abs {
                    found = Some(m);
                    break;
                }
                prev = next;
            }
            assert!(found.is_some(), "no m <= {n0} met the bound");
        }
    }
}
