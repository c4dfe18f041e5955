//! End-to-end orchestration: dataset simulation, per-sample processing and
//! the method comparison benchmark. The CLI is a thin wrapper over this.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, Components, Distance, EvalConfig, EvalReport, GrayImage};
use crate::clutter::ClutterMethod;
use crate::error::{Error, Result};
use crate::io::{self, ManifestEntry};
use crate::range::{range_compress, RangeMap};
use crate::sim::{synthesize_echo, ClassTable, MotionClass, RadarParams, RawEchoMatrix, SceneGenerator};
use crate::tfr::{self, StftConfig, TfrMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub samples_per_class: usize,
    pub classes: Vec<u32>,
    /// Generator table file; the built-in table when absent.
    pub class_table: Option<PathBuf>,
    /// Overrides the table's scene duration.
    pub duration_s: Option<f64>,
    /// Overrides the table's noise level.
    pub noise_snr_db: Option<f64>,
    /// Drops the wall from every scene.
    pub free_space: bool,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            samples_per_class: 40,
            classes: MotionClass::ALL.iter().map(|c| c.id()).collect(),
            class_table: None,
            duration_s: None,
            noise_snr_db: None,
            free_space: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImageSpec {
    pub dyn_range_db: f64,
    pub height: usize,
    pub width: usize,
}

impl Default for ImageSpec {
    fn default() -> Self {
        Self {
            dyn_range_db: classify::DEFAULT_DYN_RANGE_DB,
            height: classify::DEFAULT_IMAGE_SIZE,
            width: classify::DEFAULT_IMAGE_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessingSpec {
    /// Range FFT length `L`; the number of frequency steps when absent.
    pub range_bins: Option<usize>,
    /// Keeps range bins `[start, end)` only.
    pub range_gate: Option<[usize; 2]>,
    pub clutter: ClutterMethod,
    /// Drops filter start-up columns before time-frequency analysis.
    pub trim_transients: bool,
    pub stft: StftConfig,
    pub method: TfrMethod,
    pub image: ImageSpec,
}

impl Default for ProcessingSpec {
    fn default() -> Self {
        Self {
            range_bins: None,
            range_gate: None,
            clutter: ClutterMethod::default(),
            trim_transients: true,
            stft: StftConfig::default(),
            method: TfrMethod::Rmax,
            image: ImageSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSpec {
    pub train_fraction: f64,
    pub n_trials: usize,
    pub components: Components,
    pub k: usize,
    pub distance: Distance,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        let e = EvalConfig::default();
        Self {
            train_fraction: e.train_fraction,
            n_trials: e.n_trials,
            components: e.components,
            k: e.k,
            distance: e.distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSpec {
    pub methods: Vec<TfrMethod>,
    /// Adds the single-range-bin RA-STFT row.
    pub narrowband: bool,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            methods: vec![TfrMethod::RaStft, TfrMethod::Cratfr, TfrMethod::Rmax],
            narrowband: false,
        }
    }
}

/// Everything a pipeline run depends on. All randomness derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub radar: RadarParams,
    pub dataset: DatasetSpec,
    pub processing: ProcessingSpec,
    pub classifier: ClassifierSpec,
    pub benchmark: BenchmarkSpec,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            radar: RadarParams::default(),
            dataset: DatasetSpec::default(),
            processing: ProcessingSpec::default(),
            classifier: ClassifierSpec::default(),
            benchmark: BenchmarkSpec::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.processing.stft.validate()?;
        for c in &self.dataset.classes {
            MotionClass::from_id(*c)?;
        }
        if let Some(l) = self.processing.range_bins {
            if l < self.radar.n_freq {
                return Err(Error::invalid(format!(
                    "range_bins {l} below the {} frequency steps",
                    self.radar.n_freq
                )));
            }
        }
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        let c = &self.classifier;
        EvalConfig {
            train_fraction: c.train_fraction,
            n_trials: c.n_trials,
            components: c.components,
            k: c.k,
            distance: c.distance,
            seed: self.seed,
        }
    }

    pub fn scene_generator(&self) -> Result<SceneGenerator> {
        let mut table = match &self.dataset.class_table {
            Some(path) => ClassTable::from_json(&fs::read_to_string(path)?)?,
            None => ClassTable::builtin(),
        };
        if let Some(d) = self.dataset.duration_s {
            table.duration_s = d;
        }
        if let Some(snr) = self.dataset.noise_snr_db {
            table.noise_snr_db = Some(snr);
        }
        if self.dataset.free_space {
            table.wall = None;
        }
        Ok(SceneGenerator::new(table))
    }

    /// `(class, seed)` for every sample, class-major, drawn from the config seed.
    pub fn sample_plan(&self) -> Vec<(u32, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut plan = vec![];
        for &class in &self.dataset.classes {
            for _ in 0..self.dataset.samples_per_class {
                plan.push((class, rng.next_u64()));
            }
        }
        plan
    }
}

/// Range map after compression, gating and clutter mitigation.
pub fn prepare_range_map(echo: &RawEchoMatrix, spec: &ProcessingSpec) -> Result<RangeMap> {
    let mut rm = range_compress(echo, spec.range_bins.unwrap_or(echo.n_freq()))?;
    if let Some([lo, hi]) = spec.range_gate {
        rm = rm.gate(lo, hi)?;
    }
    rm = spec.clutter.apply(&rm)?;
    if spec.trim_transients && rm.transient_cols > 0 {
        rm = rm.trim_transients()?;
    }
    Ok(rm)
}

/// RA-STFT of the single strongest range bin.
pub fn narrowband_stft(rm: &RangeMap, cfg: &StftConfig) -> Result<Array2<f64>> {
    let energy = |l: usize| rm.data.row(l).iter().map(|v| v.norm_sqr()).sum::<f64>();
    let best = (0..rm.n_bins())
        .max_by(|a, b| energy(*a).total_cmp(&energy(*b)).then(b.cmp(a)))
        .ok_or(Error::EmptyMap)?;
    Ok(tfr::ra_stft(&rm.gate(best, best + 1)?, cfg)?.data)
}

/// A benchmark row: one of the TFR methods or the narrowband emulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkMethod {
    Narrowband,
    #[serde(untagged)]
    Tfr(TfrMethod),
}

impl BenchmarkMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkMethod::Narrowband => "narrowband",
            BenchmarkMethod::Tfr(m) => m.name(),
        }
    }

    pub fn render(self, rm: &RangeMap, cfg: &StftConfig) -> Result<Array2<f64>> {
        match self {
            BenchmarkMethod::Narrowband => narrowband_stft(rm, cfg),
            BenchmarkMethod::Tfr(m) => m.render(rm, cfg),
        }
    }
}

/// Images of one echo under each method, in order.
pub fn render_images(
    echo: &RawEchoMatrix,
    spec: &ProcessingSpec,
    methods: &[BenchmarkMethod],
) -> Result<Vec<GrayImage>> {
    let rm = prepare_range_map(echo, spec)?;
    methods
        .iter()
        .map(|m| {
            let power = m.render(&rm, &spec.stft)?;
            let img = spec.image;
            Ok(classify::to_grayscale(&power, img.dyn_range_db, img.height, img.width))
        })
        .collect()
}

fn echo_file_name(class: u32, index: usize) -> String {
    format!("c{class:02}_s{index:03}.rmx")
}

/// Simulates the dataset described by `cfg`, writing echo files under
/// `<output_dir>/echo/` and `<output_dir>/manifest.json`.
pub fn simulate(cfg: &PipelineConfig) -> Result<Vec<ManifestEntry>> {
    cfg.validate()?;
    let gen = cfg.scene_generator()?;
    let echo_dir = cfg.output_dir.join("echo");
    fs::create_dir_all(&echo_dir)?;
    let per_class = cfg.dataset.samples_per_class;
    let plan = cfg.sample_plan();
    let entries: Vec<ManifestEntry> = plan
        .par_iter()
        .enumerate()
        .map(|(i, &(class, seed))| {
            let scene = gen.scene(class, seed, &cfg.radar)?;
            let echo = synthesize_echo(&scene, &cfg.radar)?;
            let name = echo_file_name(class, i % per_class.max(1));
            io::save(&echo_dir.join(&name), |w| io::write_echo(w, &echo))?;
            Ok(ManifestEntry {
                path: format!("echo/{name}"),
                class_label: class,
                seed,
            })
        })
        .collect::<Result<_>>()?;
    io::write_json(&cfg.output_dir.join("manifest.json"), &entries)?;
    Ok(entries)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    io::read_json(path)
}

/// Resolves a manifest entry's path against the manifest's directory.
pub fn entry_path(manifest: &Path, entry: &ManifestEntry) -> PathBuf {
    let p = Path::new(&entry.path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Parameters recorded next to processed outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessMetadata {
    pub method: TfrMethod,
    pub radar: RadarParams,
    pub processing: ProcessingSpec,
    pub outputs: Vec<String>,
}

/// Outcome of processing one input file.
#[derive(Debug)]
pub struct FileResult {
    pub input: PathBuf,
    pub outcome: Result<Vec<PathBuf>>,
}

/// Runs the configured TFR method over every input echo, writing
/// `<stem>.<method>.csv` and `.pgm` into `<output_dir>/spectrograms/`.
/// Returns one result per input; inputs are expected to exist.
pub fn process(cfg: &PipelineConfig, inputs: &[PathBuf]) -> Result<Vec<FileResult>> {
    cfg.validate()?;
    let spec = &cfg.processing;
    let out_dir = cfg.output_dir.join("spectrograms");
    fs::create_dir_all(&out_dir)?;
    let results: Vec<FileResult> = inputs
        .par_iter()
        .map(|input| {
            let outcome = (|| {
                let echo = io::load(input, io::read_echo)?;
                let rm = prepare_range_map(&echo, spec)?;
                let power = spec.method.render(&rm, &spec.stft)?;
                let img = classify::to_grayscale(
                    &power,
                    spec.image.dyn_range_db,
                    spec.image.height,
                    spec.image.width,
                );
                let stem = input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "sample".into());
                let base = out_dir.join(format!("{stem}.{}", spec.method.name()));
                let csv = base.with_extension(format!("{}.csv", spec.method.name()));
                let pgm = base.with_extension(format!("{}.pgm", spec.method.name()));
                io::save(&csv, |w| io::write_matrix_csv(w, &power))?;
                io::save(&pgm, |w| io::write_pgm(w, &img))?;
                Ok(vec![csv, pgm])
            })();
            FileResult {
                input: input.clone(),
                outcome,
            }
        })
        .collect();
    let outputs = results
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .flatten()
        .map(|p| p.strip_prefix(&cfg.output_dir).unwrap_or(p).display().to_string())
        .collect();
    let meta = ProcessMetadata {
        method: spec.method,
        radar: cfg.radar,
        processing: spec.clone(),
        outputs,
    };
    io::write_json(&cfg.output_dir.join("process_meta.json"), &meta)?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodResult {
    pub method: BenchmarkMethod,
    pub report: EvalReport,
}

/// Per-method evaluation on identically decluttered data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkReport {
    pub results: Vec<MethodResult>,
    pub n_samples: usize,
    pub clutter: ClutterMethod,
    /// Set when the narrowband row is the single-bin emulation.
    pub narrowband_emulated: bool,
}

impl BenchmarkReport {
    pub fn accuracy(&self, method: BenchmarkMethod) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.report.average_accuracy)
    }

    /// Fixed-width text table of average accuracies.
    pub fn table(&self) -> String {
        let mut s = format!("{:<12} {:>8} {:>4}\n", "method", "accuracy", "d");
        for r in &self.results {
            s.push_str(&format!(
                "{:<12} {:>8.4} {:>4}\n",
                r.method.name(),
                r.report.average_accuracy,
                r.report.d
            ));
        }
        s
    }
}

fn benchmark_methods(cfg: &PipelineConfig) -> Vec<BenchmarkMethod> {
    let mut methods = vec![];
    if cfg.benchmark.narrowband {
        methods.push(BenchmarkMethod::Narrowband);
    }
    methods.extend(cfg.benchmark.methods.iter().map(|m| BenchmarkMethod::Tfr(*m)));
    methods
}

fn evaluate_images(
    cfg: &PipelineConfig,
    methods: &[BenchmarkMethod],
    per_sample: Vec<(Vec<GrayImage>, u32)>,
) -> Result<BenchmarkReport> {
    let eval = cfg.eval_config();
    let n_samples = per_sample.len();
    let results = methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let data: Vec<(GrayImage, u32)> = per_sample
                .iter()
                .map(|(imgs, label)| (imgs[j].clone(), *label))
                .collect();
            Ok(MethodResult {
                method,
                report: classify::evaluate(&data, &eval)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BenchmarkReport {
        results,
        n_samples,
        clutter: cfg.processing.clutter,
        narrowband_emulated: cfg.benchmark.narrowband,
    })
}

/// Benchmark over echoes listed in a manifest.
pub fn benchmark_manifest(cfg: &PipelineConfig, manifest: &Path) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let entries = read_manifest(manifest)?;
    let methods = benchmark_methods(cfg);
    let per_sample = entries
        .par_iter()
        .map(|e| {
            let echo = io::load(&entry_path(manifest, e), io::read_echo)?;
            Ok((render_images(&echo, &cfg.processing, &methods)?, e.class_label))
        })
        .collect::<Result<_>>()?;
    evaluate_images(cfg, &methods, per_sample)
}

/// Benchmark on scenes simulated in memory from the config.
pub fn benchmark_simulated(cfg: &PipelineConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let gen = cfg.scene_generator()?;
    let methods = benchmark_methods(cfg);
    let per_sample = cfg
        .sample_plan()
        .par_iter()
        .map(|&(class, seed)| {
            let scene = gen.scene(class, seed, &cfg.radar)?;
            let echo = synthesize_echo(&scene, &cfg.radar)?;
            Ok((render_images(&echo, &cfg.processing, &methods)?, class))
        })
        .collect::<Result<_>>()?;
    evaluate_images(cfg, &methods, per_sample)
}

/// Writes `benchmark.json` and one confusion CSV per method.
pub fn write_benchmark(cfg: &PipelineConfig, report: &BenchmarkReport) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    io::write_json(&cfg.output_dir.join("benchmark.json"), report)?;
    for r in &report.results {
        let conf = &r.report.confusion;
        let n = conf.len();
        let m = Array2::from_shape_fn((n, n), |(i, j)| conf[i][j]);
        let path = cfg
            .output_dir
            .join(format!("confusion.{}.csv", r.method.name()));
        io::save(&path, |w| io::write_matrix_csv(w, &m))?;
        io::write_json(
            &cfg.output_dir.join(format!("report.{}.json", r.method.name())),
            &r.report,
        )?;
    }
    Ok(())
}
