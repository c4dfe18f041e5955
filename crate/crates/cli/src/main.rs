use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rmax_core::clutter::{design_highpass, DEFAULT_HPF_CUTOFF_HZ, DEFAULT_HPF_ORDER};
use rmax_core::pipeline::{self, PipelineConfig};
use rmax_core::{io, ClutterMethod, TfrMethod};

#[derive(Parser)]
#[command(name = "rmax", version, about = "Through-wall UWB micro-Doppler pipeline")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a labelled echo dataset and write its manifest.
    Simulate(SimulateArgs),
    /// Range-compress, declutter and render one TFR per input echo.
    Process(ProcessArgs),
    /// Compare TFR methods by 2D-PCA + kNN accuracy.
    Benchmark(BenchmarkArgs),
    /// Design the clutter high-pass filter and dump its taps as CSV.
    FilterDesign(FilterArgs),
    /// Print a summary of echo, range map, cube, PGM or JSON files.
    Inspect {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClutterKind {
    None,
    Mean,
    Svd,
    Hpf,
}

#[derive(Args)]
struct ClutterArgs {
    #[arg(long, value_enum)]
    clutter: Option<ClutterKind>,
    /// Singular vectors removed by `--clutter svd`.
    #[arg(long, default_value_t = 1)]
    svd_remove: usize,
    #[arg(long)]
    hpf_order: Option<usize>,
    #[arg(long)]
    hpf_cutoff: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    samples_per_class: Option<usize>,
    /// Scene duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Noise level in dB relative to the target returns.
    #[arg(long)]
    snr: Option<f64>,
}

#[derive(Args)]
struct ProcessArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    clutter: ClutterArgs,
    #[arg(long, value_parser = parse_method)]
    method: Option<TfrMethod>,
    /// Echo files to process.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Process every echo listed in a manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    clutter: ClutterArgs,
    /// Use echoes from a manifest instead of simulating in memory.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Add the single-range-bin STFT row.
    #[arg(long)]
    narrowband: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples_per_class: Option<usize>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, default_value_t = DEFAULT_HPF_ORDER)]
    hpf_order: usize,
    #[arg(long, default_value_t = DEFAULT_HPF_CUTOFF_HZ)]
    hpf_cutoff: f64,
    /// Slow-time sample rate in Hz.
    #[arg(long, default_value_t = 113.0)]
    prf: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<TfrMethod, String> {
    TfrMethod::parse(s).map_err(|e| e.to_string())
}

/// Bad input or configuration (exit 2) versus a failure while processing (exit 1).
enum Failure {
    Input(anyhow::Error),
    Processing(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Processing(e.into())
    }
}

trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn load_config(common: &CommonArgs) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)
            .with_context(|| format!("loading {}", path.display()))
            .input()?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_clutter(cfg: &mut PipelineConfig, args: &ClutterArgs) -> Result<(), Failure> {
    let (order, cutoff) = match cfg.processing.clutter {
        ClutterMethod::Hpf { order, cutoff_hz } => (order, cutoff_hz),
        _ => (DEFAULT_HPF_ORDER, DEFAULT_HPF_CUTOFF_HZ),
    };
    let hpf = ClutterMethod::Hpf {
        order: args.hpf_order.unwrap_or(order),
        cutoff_hz: args.hpf_cutoff.unwrap_or(cutoff),
    };
    match args.clutter {
        Some(ClutterKind::None) => cfg.processing.clutter = ClutterMethod::None,
        Some(ClutterKind::Mean) => cfg.processing.clutter = ClutterMethod::Mean,
        Some(ClutterKind::Svd) => {
            cfg.processing.clutter = ClutterMethod::Svd {
                n_remove: args.svd_remove,
            }
        }
        Some(ClutterKind::Hpf) => cfg.processing.clutter = hpf,
        None if args.hpf_order.is_some() || args.hpf_cutoff.is_some() => {
            if !matches!(cfg.processing.clutter, ClutterMethod::Hpf { .. }) {
                return Err(Failure::Input(anyhow!(
                    "--hpf-order/--hpf-cutoff need --clutter hpf"
                )));
            }
            cfg.processing.clutter = hpf;
        }
        None => {}
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut cfg = load_config(&args.common)?;
    if let Some(n) = args.samples_per_class {
        cfg.dataset.samples_per_class = n;
    }
    if args.duration.is_some() {
        cfg.dataset.duration_s = args.duration;
    }
    if args.snr.is_some() {
        cfg.dataset.noise_snr_db = args.snr;
    }
    cfg.validate().input()?;
    let entries = pipeline::simulate(&cfg)?;
    println!(
        "wrote {} echoes to {}",
        entries.len(),
        cfg.output_dir.join("manifest.json").display()
    );
    Ok(())
}

fn process(args: ProcessArgs) -> Result<(), Failure> {
    let mut cfg = load_config(&args.common)?;
    apply_clutter(&mut cfg, &args.clutter)?;
    if let Some(m) = args.method {
        cfg.processing.method = m;
    }
    cfg.validate().input()?;

    let mut inputs = args.input.clone();
    if let Some(manifest) = &args.manifest {
        let entries = pipeline::read_manifest(manifest)
            .with_context(|| format!("reading {}", manifest.display()))
            .input()?;
        inputs.extend(entries.iter().map(|e| pipeline::entry_path(manifest, e)));
    }
    if inputs.is_empty() {
        return Err(Failure::Input(anyhow!("no inputs; pass --input or --manifest")));
    }
    let missing: Vec<String> = inputs
        .iter()
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::Input(anyhow!("missing input: {}", missing.join(", "))));
    }

    let results = pipeline::process(&cfg, &inputs)?;
    let mut failed = 0;
    for r in &results {
        match &r.outcome {
            Ok(outputs) => {
                for o in outputs {
                    println!("{}", o.display());
                }
            }
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e}", r.input.display());
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Processing(anyhow!(
            "{failed} of {} inputs failed",
            results.len()
        )));
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    let mut cfg = load_config(&args.common)?;
    apply_clutter(&mut cfg, &args.clutter)?;
    if args.narrowband {
        cfg.benchmark.narrowband = true;
    }
    if let Some(t) = args.trials {
        cfg.classifier.n_trials = t;
    }
    if let Some(n) = args.samples_per_class {
        cfg.dataset.samples_per_class = n;
    }
    cfg.validate().input()?;
    let report = match &args.manifest {
        Some(manifest) => {
            if !manifest.is_file() {
                return Err(Failure::Input(anyhow!(
                    "missing input: {}",
                    manifest.display()
                )));
            }
            pipeline::benchmark_manifest(&cfg, manifest)?
        }
        None => pipeline::benchmark_simulated(&cfg)?,
    };
    pipeline::write_benchmark(&cfg, &report)?;
    print!("{}", report.table());
    Ok(())
}

fn filter_design(args: FilterArgs) -> Result<(), Failure> {
    let coeffs = design_highpass(args.hpf_order, args.hpf_cutoff, args.prf).input()?;
    match &args.out {
        Some(path) => io::save(path, |w| io::write_filter_csv(w, &coeffs))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            io::write_filter_csv(&mut lock, &coeffs)?;
            lock.flush()?;
        }
    }
    eprintln!(
        "{} taps, DC {:.1} dB, {:.1} Hz {:.2} dB",
        coeffs.taps.len(),
        coeffs.gain_db(0.0),
        args.hpf_cutoff,
        coeffs.gain_db(args.hpf_cutoff),
    );
    Ok(())
}

fn inspect(paths: &[PathBuf]) -> Result<(), Failure> {
    for path in paths {
        if !path.is_file() {
            return Err(Failure::Input(anyhow!("missing input: {}", path.display())));
        }
        println!("{}: {}", path.display(), describe(path)?);
    }
    Ok(())
}

fn describe(path: &Path) -> anyhow::Result<String> {
    if path.extension().is_some_and(|e| e == "json") {
        let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        return Ok(match &value {
            serde_json::Value::Array(items) => format!("JSON array of {} entries", items.len()),
            serde_json::Value::Object(map) => {
                let keys: Vec<&str> = map.keys().map(String::as_str).collect();
                format!("JSON object with keys {}", keys.join(", "))
            }
            _ => "JSON scalar".into(),
        });
    }
    Ok(io::describe(path)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .input()?;
    }
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Process(a) => process(a),
        Command::Benchmark(a) => benchmark(a),
        Command::FilterDesign(a) => filter_design(a),
        Command::Inspect { paths } => inspect(&paths),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Processing(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
