//! Iterative Filtering decomposition of 1-D periodic signals.
//!
//! A signal is split into Intrinsic Mode Functions by repeatedly subtracting
//! a moving average, `s <- (I - W) s`, where `W` is the circulant operator of
//! a symmetric, row-stochastic filter. Because `W` is diagonalized by the
//! DFT, `N` steps reduce to multiplying each frequency bin by
//! `(1 - lambda_j)^N`; [`inner_loop::extract_imf_direct`] uses this to
//! replace the iteration with two FFTs.
//!
//! ```no_run
//! use ifdecomp::{decompose, OuterConfig, Signal};
//!
//! let s = Signal::new((0..512).map(|i| (i as f64 * 0.3).sin()).collect()).unwrap();
//! let d = decompose(&s, &OuterConfig::default()).unwrap();
//! println!("{} IMFs, stopped by {:?}", d.imfs.len(), d.termination);
//! ```

pub mod bench;
pub mod cli;
pub mod error;
pub mod fft;
pub mod filters;
pub mod inner_loop;
pub mod io;
pub mod masklen;
#[doc(hidden)]
pub mod oracle;
pub mod outer_loop;
pub mod signal;
pub mod spectrum;

pub use error::{Error, Result};
pub use filters::{sample_filter, self_convolve, DiscreteFilter, FilterKind, FilterShape, TabulatedShape};
pub use inner_loop::{
    dif_step, extract_imf_direct, extract_imf_iterative, n0_bound, ImfRecord, InnerConfig, InnerMode,
};
pub use masklen::{count_extrema, mask_length_extrema, mask_length_spectral, MaskKind, MaskStrategy};
pub use outer_loop::{decompose, decompose_with_cache, significant_count, Decomposition, OuterConfig, TerminationReason};
pub use signal::Signal;
pub use spectrum::{
    damping_factors, filter_eigenvalues, threshold_mask, unique_unit_eigenvalue_check, EigenCache,
    FilterEigenvalues,
};
