//! Command-line front end: `decompose`, `spectrum` and `bench`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bench::{bench_size, format_bench_csv};
use crate::error::Error;
use crate::filters::{sample_filter, self_convolve, FilterShape, TabulatedShape};
use crate::inner_loop::{InnerConfig, InnerMode};
use crate::io::{
    self, read_bytes, sha256_hex, signal_from_bytes, ConfigEcho, ImfEntry, InputDescriptor, IoError,
    RunReport, SignalFormat, Timings,
};
use crate::masklen::{MaskKind, MaskStrategy};
use crate::outer_loop::{decompose_with_cache, OuterConfig};
use crate::spectrum::{damping_factors, filter_eigenvalues, threshold_mask, EigenCache};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let mut root = &e;
        while let Error::Imf { source, .. } = root {
            root = source;
        }
        match root {
            Error::InvalidConfig(_)
            | Error::InvalidTable(_)
            | Error::InvalidHalfSupport(_)
            | Error::SupportTooLarge { .. }
            | Error::DegenerateFilter => CliError::Config(e.to_string()),
            Error::Cache(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ifdecomp", version, about = "Iterative Filtering signal decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose signals into IMFs and a trend.
    Decompose(DecomposeArgs),
    /// Tabulate the spectrum of a filter.
    Spectrum(SpectrumArgs),
    /// Time iterative against direct inner-loop extraction.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskArg {
    Extrema,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Direct,
    Iterative,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Input signal; repeat for a batch (each gets its own subdirectory).
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: SignalFormat,
    /// `triangular`, `triangular-self-convolved` or `tabulated:<path>`.
    #[arg(long, default_value = "triangular")]
    pub filter: String,
    #[arg(long, value_enum, default_value = "extrema")]
    pub mask_strategy: MaskArg,
    #[arg(long, default_value_t = 1.6)]
    pub nu: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub max_inner_iter: usize,
    #[arg(long, default_value_t = 50)]
    pub max_imfs: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, value_enum, default_value = "direct")]
    pub mode: ModeArg,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Eigenvalue cache file, loaded if present and rewritten afterwards.
    #[arg(long)]
    pub eigen_cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "triangular")]
    pub filter: String,
    /// Half support in samples.
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub n: usize,
    /// Self-convolve the sampled filter first.
    #[arg(long)]
    pub self_convolve: bool,
    #[arg(long, default_value_t = 1)]
    pub iterations: u64,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "4096,65536,262144")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1.6)]
    pub nu: f64,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose(args) => cmd_decompose(&args),
        Command::Spectrum(args) => cmd_spectrum(&args),
        Command::Bench(args) => cmd_bench(&args),
    }
}

pub fn parse_filter(spec: &str) -> Result<FilterShape, CliError> {
    match spec {
        "triangular" => Ok(FilterShape::Triangular),
        "triangular-self-convolved" => Ok(FilterShape::TriangularSelfConvolved),
        other => match other.strip_prefix("tabulated:") {
            Some(path) => {
                let bytes = read_bytes(Path::new(path))?;
                let table = TabulatedShape::from_csv_str(&String::from_utf8_lossy(&bytes))?;
                Ok(FilterShape::Tabulated(table))
            }
            None => Err(CliError::Config(format!("unknown filter {other:?}"))),
        },
    }
}

fn outer_config(args: &DecomposeArgs, shape: FilterShape) -> Result<OuterConfig, CliError> {
    let cfg = OuterConfig {
        eta: args.eta,
        max_imfs: args.max_imfs,
        mask_strategy: MaskStrategy {
            kind: match args.mask_strategy {
                MaskArg::Extrema => MaskKind::ExtremaCount,
                MaskArg::Spectral => MaskKind::SpectralPeak,
            },
            nu: args.nu,
        },
        inner: InnerConfig {
            delta: args.delta,
            max_iterations: args.max_inner_iter,
            mode: match args.mode {
                ModeArg::Direct => InnerMode::Direct,
                ModeArg::Iterative => InnerMode::Iterative,
            },
            gamma: args.gamma,
        },
        filter_shape: shape,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn config_echo(args: &DecomposeArgs) -> ConfigEcho {
    ConfigEcho {
        format: args.format,
        filter: args.filter.clone(),
        mask_strategy: match args.mask_strategy {
            MaskArg::Extrema => "extrema".into(),
            MaskArg::Spectral => "spectral".into(),
        },
        nu: args.nu,
        delta: args.delta,
        max_inner_iter: args.max_inner_iter,
        max_imfs: args.max_imfs,
        eta: args.eta,
        mode: match args.mode {
            ModeArg::Direct => "direct".into(),
            ModeArg::Iterative => "iterative".into(),
        },
        gamma: args.gamma,
    }
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<(), CliError> {
    let shape = parse_filter(&args.filter)?;
    let cfg = outer_config(args, shape)?;
    let cache = match &args.eigen_cache {
        Some(p) if p.exists() => EigenCache::load(p)?,
        _ => EigenCache::new(),
    };

    let batch = args.input.len() > 1;
    let results: Vec<Result<(), CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .input
            .iter()
            .map(|input| {
                let out_dir = if batch {
                    let stem = input
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "input".into());
                    args.output_dir.join(stem)
                } else {
                    args.output_dir.clone()
                };
                let (cfg, cache) = (&cfg, &cache);
                scope.spawn(move || decompose_file(args, cfg, cache, input, &out_dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("decomposition thread panicked"))
            .collect()
    });

    if let Some(p) = &args.eigen_cache {
        cache.save(p)?;
    }
    // Report the most severe failure: numerical > config > I/O.
    results
        .into_iter()
        .filter_map(Result::err)
        .max_by_key(CliError::exit_code)
        .map_or(Ok(()), Err)
}

fn decompose_file(
    args: &DecomposeArgs,
    cfg: &OuterConfig,
    cache: &EigenCache,
    input: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut timings = Timings::default();
    let t0 = Instant::now();
    let bytes = read_bytes(input)?;
    let signal = signal_from_bytes(&bytes, args.format)?;
    timings.read_seconds = t0.elapsed().as_secs_f64();

    std::fs::create_dir_all(out_dir).map_err(|source| IoError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut report = RunReport {
        input: InputDescriptor {
            path: input.display().to_string(),
            n: signal.len(),
            checksum: format!("sha256:{}", sha256_hex(&bytes)),
        },
        imf_count: 0,
        significant_count: 0,
        imfs: Vec::new(),
        trend_file: None,
        termination: None,
        error: None,
        timings,
        config: config_echo(args),
    };

    let t0 = Instant::now();
    let outcome = decompose_with_cache(&signal, cfg, Some(cache));
    report.timings.decompose_seconds = t0.elapsed().as_secs_f64();
    let d = match outcome {
        Ok(d) => d,
        Err(e) => {
            let err = CliError::from(e);
            report.error = Some(err.to_string());
            write_report(out_dir, &report)?;
            return Err(err);
        }
    };

    let t0 = Instant::now();
    for (i, rec) in d.imfs.iter().enumerate() {
        let name = format!("imf_{:03}.csv", i + 1);
        io::write_series(&out_dir.join(&name), rec.imf.samples())?;
        report.imfs.push(ImfEntry {
            index: i + 1,
            file: name,
            mask_length: rec.mask_length,
            iterations_used: rec.iterations_used,
            final_sd: rec.final_sd,
            max_abs_norm: rec.imf.max_abs(),
            significant: rec.significant,
        });
    }
    io::write_series(&out_dir.join("trend.csv"), d.trend.samples())?;
    report.timings.write_seconds = t0.elapsed().as_secs_f64();
    report.imf_count = d.imfs.len();
    report.significant_count = d.significant_count();
    report.trend_file = Some("trend.csv".into());
    report.termination = Some(
        serde_json::to_value(d.termination)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
    );
    write_report(out_dir, &report)
}

fn write_report(out_dir: &Path, report: &RunReport) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Numerical(format!("report serialization: {e}")))?;
    text.push('\n');
    Ok(io::write_text(&out_dir.join("report.json"), &text)?)
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let shape = parse_filter(&args.filter)?;
    let mut filter = sample_filter(&shape, args.length, args.n)?;
    if args.self_convolve {
        filter = self_convolve(&filter)?;
    }
    let ev = filter_eigenvalues(&filter)?;
    let damping = damping_factors(&ev, args.iterations)?;
    let mask = match args.gamma {
        Some(g) => threshold_mask(&ev, g, args.iterations)
            .map_err(|e| CliError::Config(e.to_string()))?,
        None => vec![false; ev.len()],
    };
    let mut out = String::from("bin,lambda,damping,threshold_mask\n");
    for (j, ((l, d), m)) in ev.lambdas().iter().zip(&damping).zip(&mask).enumerate() {
        out.push_str(&format!("{j},{l:?},{d:?},{}\n", u8::from(*m)));
    }
    Ok(io::write_text(&args.output, &out)?)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.sizes.is_empty() || args.sizes.iter().any(|&n| n < 16) {
        return Err(CliError::Config(format!(
            "bench sizes must be at least 16, got {:?}",
            args.sizes
        )));
    }
    if args.iterations == 0 {
        return Err(CliError::Config("iterations must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(args.sizes.len());
    for &n in &args.sizes {
        let row = bench_size(n, args.seed, args.iterations, args.nu)?;
        log::info!(
            "n = {n}: iterative {:.4}s, direct {:.4}s, speedup {:.1}",
            row.t_iterative,
            row.t_direct,
            row.speedup()
        );
        rows.push(row);
    }
    Ok(io::write_text(&args.output, &format_bench_csv(&rows))?)
}
