//! Stepped-frequency CW echo synthesis for point-scatterer motion scenes.
//!
//! Echoes are produced directly in demodulated form: entry `(n, m)` of the
//! output is the coherent sum over scatterers of `a * exp(-j 2 pi f_n t_d)`,
//! with the time delay evaluated once per sweep at `t_m = m / prf`
//! (stop-and-go).

use std::f64::consts::{PI, TAU};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

const CLASS_TABLE_JSON: &str = include_str!("../data/motion_classes.json");

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

/// Sweep parameters of the SFCW radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarParams {
    /// Starting frequency in Hz.
    pub f0: f64,
    /// Frequency step in Hz.
    pub delta_f: f64,
    /// Number of frequency bins per sweep.
    pub n_freq: usize,
    /// Sweep repetition frequency in Hz; the slow-time sampling rate.
    pub prf: f64,
    /// Propagation speed in m/s.
    #[serde(default = "default_c")]
    pub c: f64,
}

impl Default for RadarParams {
    /// 380 MHz to 4.4 GHz in 5 MHz steps at 113 sweeps per second.
    fn default() -> Self {
        Self {
            f0: 380e6,
            delta_f: 5e6,
            n_freq: 805,
            prf: 113.0,
            c: SPEED_OF_LIGHT,
        }
    }
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.f0, self.delta_f, self.prf, self.c]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite value".into()));
        }
        if self.f0 <= 0.0 || self.delta_f <= 0.0 || self.prf <= 0.0 || self.c <= 0.0 {
            return Err(Error::InvalidParams(
                "f0, delta_f, prf and c must be positive".into(),
            ));
        }
        if self.n_freq < 2 {
            return Err(Error::InvalidParams(format!(
                "n_freq must be at least 2, got {}",
                self.n_freq
            )));
        }
        Ok(())
    }

    /// `c / (2 delta_f)`.
    pub fn max_unambiguous_range(&self) -> f64 {
        self.c / (2.0 * self.delta_f)
    }

    /// Frequency of sweep step `n`.
    pub fn frequency(&self, n: usize) -> f64 {
        self.f0 + n as f64 * self.delta_f
    }

    /// Midpoint of the swept band.
    pub fn center_frequency(&self) -> f64 {
        self.f0 + 0.5 * (self.n_freq - 1) as f64 * self.delta_f
    }

    /// Number of sweeps recorded in `duration_s` seconds.
    pub fn slow_time_samples(&self, duration_s: f64) -> usize {
        (duration_s * self.prf).floor().max(0.0) as usize
    }

    /// Doppler shift in Hz at the band center for radial velocity `v`
    /// (positive = approaching).
    pub fn doppler_at_center(&self, v: f64) -> f64 {
        2.0 * v * self.center_frequency() / self.c
    }
}

/// A point reflector with bulk radial motion plus sinusoidal micro-motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatterer {
    pub base_range: f64,
    /// m/s, positive when approaching the radar.
    pub radial_velocity: f64,
    pub micro_amplitude: f64,
    pub micro_freq: f64,
    pub micro_phase: f64,
    pub reflectivity: f64,
}

impl Scatterer {
    pub fn fixed(range: f64, reflectivity: f64) -> Self {
        Self {
            base_range: range,
            radial_velocity: 0.0,
            micro_amplitude: 0.0,
            micro_freq: 0.0,
            micro_phase: 0.0,
            reflectivity,
        }
    }

    pub fn moving(range: f64, velocity: f64, reflectivity: f64) -> Self {
        Self {
            radial_velocity: velocity,
            ..Self::fixed(range, reflectivity)
        }
    }

    pub fn range_at(&self, t: f64) -> f64 {
        self.base_range - self.radial_velocity * t
            + self.micro_amplitude * (TAU * self.micro_freq * t + self.micro_phase).sin()
    }
}

/// Instantaneous range of `s` at time `t` seconds.
pub fn scatterer_range(s: &Scatterer, t: f64) -> f64 {
    s.range_at(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceReturn {
    pub range: f64,
    pub amplitude: f64,
}

/// Static wall returns plus the one-way amplitude loss through the wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSpec {
    pub surface_returns: Vec<SurfaceReturn>,
    pub one_way_attenuation: f64,
}

impl WallSpec {
    fn validate(&self, max_range: f64) -> Result<()> {
        if !(self.one_way_attenuation > 0.0 && self.one_way_attenuation <= 1.0) {
            return Err(Error::invalid(format!(
                "wall attenuation must lie in (0, 1], got {}",
                self.one_way_attenuation
            )));
        }
        for r in &self.surface_returns {
            if r.amplitude < 0.0 || !r.amplitude.is_finite() {
                return Err(Error::invalid("wall return amplitude must be >= 0"));
            }
            if !(r.range >= 0.0 && r.range < max_range) {
                return Err(Error::RangeAmbiguity {
                    range: r.range,
                    max_range,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionScene {
    pub scatterers: Vec<Scatterer>,
    #[serde(default)]
    pub wall: Option<WallSpec>,
    pub duration_s: f64,
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
    pub seed: u64,
    pub class_label: u32,
}

/// Demodulated frequency-domain samples, `n_freq` rows by slow-time columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEchoMatrix {
    pub data: Array2<Complex64>,
    pub params: RadarParams,
}

impl RawEchoMatrix {
    pub fn n_freq(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_slow(&self) -> usize {
        self.data.ncols()
    }
}

fn check_scene(scene: &MotionScene, params: &RadarParams) -> Result<usize> {
    params.validate()?;
    if !(scene.duration_s.is_finite() && scene.duration_s > 0.0) {
        return Err(Error::invalid("scene duration must be positive"));
    }
    let m = params.slow_time_samples(scene.duration_s);
    if m == 0 {
        return Err(Error::invalid(format!(
            "duration {} s yields no sweeps at {} Hz",
            scene.duration_s, params.prf
        )));
    }
    let max_range = params.max_unambiguous_range();
    for s in &scene.scatterers {
        if s.reflectivity.is_nan() || s.reflectivity < 0.0 {
            return Err(Error::invalid("scatterer reflectivity must be >= 0"));
        }
        for k in 0..m {
            let r = s.range_at(k as f64 / params.prf);
            if !(r > 0.0 && r < max_range) {
                return Err(Error::RangeAmbiguity { range: r, max_range });
            }
        }
    }
    if let Some(wall) = &scene.wall {
        wall.validate(max_range)?;
    }
    Ok(m)
}

fn add_return(column: &mut [Complex64], params: &RadarParams, amplitude: f64, range: f64) {
    let delay = 2.0 * range / params.c;
    for (n, v) in column.iter_mut().enumerate() {
        *v += Complex64::from_polar(amplitude, -TAU * params.frequency(n) * delay);
    }
}

/// Simulates the demodulated echo matrix of `scene`.
///
/// Behind-wall scatterers are scaled by the squared one-way wall attenuation.
/// Noise, when requested, is circular complex Gaussian at `noise_snr_db`
/// relative to the mean power of the target-only (wall-free, noise-free)
/// matrix, drawn from a stream derived from the scene seed.
pub fn synthesize_echo(scene: &MotionScene, params: &RadarParams) -> Result<RawEchoMatrix> {
    let n_slow = check_scene(scene, params)?;
    let n_freq = params.n_freq;
    let gain = scene
        .wall
        .as_ref()
        .map_or(1.0, |w| w.one_way_attenuation * w.one_way_attenuation);

    let columns: Vec<Vec<Complex64>> = (0..n_slow)
        .into_par_iter()
        .map(|m| {
            let t = m as f64 / params.prf;
            let mut col = vec![Complex64::new(0.0, 0.0); n_freq];
            for s in &scene.scatterers {
                add_return(&mut col, params, gain * s.reflectivity, s.range_at(t));
            }
            col
        })
        .collect();

    let mut data = Array2::from_shape_fn((n_freq, n_slow), |(n, m)| columns[m][n]);

    let noise_var = scene.noise_snr_db.map(|snr| {
        let power = data.iter().map(|v| v.norm_sqr()).sum::<f64>() / data.len() as f64;
        power / 10f64.powf(snr / 10.0)
    });

    if let Some(wall) = &scene.wall {
        let mut col = vec![Complex64::new(0.0, 0.0); n_freq];
        for r in &wall.surface_returns {
            add_return(&mut col, params, r.amplitude, r.range);
        }
        for mut c in data.columns_mut() {
            for (v, w) in c.iter_mut().zip(&col) {
                *v += w;
            }
        }
    }

    if let Some(var) = noise_var.filter(|v| *v > 0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        rng.set_stream(NOISE_STREAM);
        let normal = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
        for m in 0..n_slow {
            for n in 0..n_freq {
                let re = normal.sample(&mut rng);
                let im = normal.sample(&mut rng);
                data[[n, m]] += Complex64::new(re, im);
            }
        }
    }

    Ok(RawEchoMatrix {
        data,
        params: *params,
    })
}

const JITTER_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// The ten indoor motions of the synthetic benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionClass {
    WalkForward,
    WalkBackward,
    SitDown,
    StandUp,
    Fetch,
    CrawlForward,
    CrawlBackward,
    FallForward,
    FallBackward,
    Boxing,
}

impl MotionClass {
    pub const ALL: [MotionClass; 10] = [
        MotionClass::WalkForward,
        MotionClass::WalkBackward,
        MotionClass::SitDown,
        MotionClass::StandUp,
        MotionClass::Fetch,
        MotionClass::CrawlForward,
        MotionClass::CrawlBackward,
        MotionClass::FallForward,
        MotionClass::FallBackward,
        MotionClass::Boxing,
    ];

    pub fn from_id(id: u32) -> Result<Self> {
        Self::ALL
            .get(id as usize)
            .copied()
            .ok_or(Error::UnknownClass(id))
    }

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn name(self) -> &'static str {
        match self {
            MotionClass::WalkForward => "walk forward",
            MotionClass::WalkBackward => "walk backward",
            MotionClass::SitDown => "sit down",
            MotionClass::StandUp => "stand up",
            MotionClass::Fetch => "fetch",
            MotionClass::CrawlForward => "crawl forward",
            MotionClass::CrawlBackward => "crawl backward",
            MotionClass::FallForward => "fall forward",
            MotionClass::FallBackward => "fall backward",
            MotionClass::Boxing => "boxing",
        }
    }

    /// Cross-place motions carry nonzero bulk velocity.
    pub fn is_cross_place(self) -> bool {
        matches!(
            self,
            MotionClass::WalkForward
                | MotionClass::WalkBackward
                | MotionClass::CrawlForward
                | MotionClass::CrawlBackward
        )
    }
}

/// Closed interval a parameter is drawn from uniformly.
pub type Span = [f64; 2];

/// Parameter ranges for one body part. For limbs, `range` is an offset
/// from the torso base range and the bulk velocity is inherited from the
/// torso (the `velocity` span is ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartProfile {
    pub range: Span,
    #[serde(default)]
    pub velocity: Span,
    pub micro_amplitude: Span,
    pub micro_freq: Span,
    pub micro_phase: Span,
    pub reflectivity: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    pub class: MotionClass,
    pub torso: PartProfile,
    /// Inclusive bounds on the number of limb scatterers.
    pub limb_count: [usize; 2],
    pub limbs: PartProfile,
    /// Phase offset added per limb index, e.g. pi for alternating gait.
    #[serde(default)]
    pub limb_phase_step: f64,
}

/// Versioned generator table for the synthetic motion dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassTable {
    pub version: u32,
    pub duration_s: f64,
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
    #[serde(default)]
    pub wall: Option<WallSpec>,
    pub classes: Vec<ClassProfile>,
}

impl ClassTable {
    pub fn builtin() -> Self {
        serde_json::from_str(CLASS_TABLE_JSON).expect("embedded class table parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: ClassTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        for class in MotionClass::ALL {
            if self.profile(class).is_none() {
                return Err(Error::invalid(format!(
                    "class table lacks a profile for {}",
                    class.name()
                )));
            }
        }
        for p in &self.classes {
            let [lo, hi] = p.limb_count;
            if lo > hi {
                return Err(Error::invalid("limb_count lower bound exceeds upper"));
            }
        }
        Ok(())
    }

    pub fn profile(&self, class: MotionClass) -> Option<&ClassProfile> {
        self.classes.iter().find(|p| p.class == class)
    }
}

fn draw(rng: &mut ChaCha8Rng, span: Span) -> f64 {
    let [lo, hi] = span;
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Builds randomized motion scenes from a [`ClassTable`].
#[derive(Debug, Clone)]
pub struct SceneGenerator {
    pub table: ClassTable,
}

impl Default for SceneGenerator {
    fn default() -> Self {
        Self {
            table: ClassTable::builtin(),
        }
    }
}

impl SceneGenerator {
    pub fn new(table: ClassTable) -> Self {
        Self { table }
    }

    pub fn scene(&self, class_id: u32, seed: u64, params: &RadarParams) -> Result<MotionScene> {
        let class = MotionClass::from_id(class_id)?;
        let profile = self
            .table
            .profile(class)
            .ok_or(Error::UnknownClass(class_id))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(JITTER_STREAM);

        let t = &profile.torso;
        let torso = Scatterer {
            base_range: draw(&mut rng, t.range),
            radial_velocity: draw(&mut rng, t.velocity),
            micro_amplitude: draw(&mut rng, t.micro_amplitude),
            micro_freq: draw(&mut rng, t.micro_freq),
            micro_phase: draw(&mut rng, t.micro_phase),
            reflectivity: draw(&mut rng, t.reflectivity),
        };

        let [lo, hi] = profile.limb_count;
        let n_limbs = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let l = &profile.limbs;
        let mut scatterers = vec![torso];
        for i in 0..n_limbs {
            scatterers.push(Scatterer {
                base_range: torso.base_range + draw(&mut rng, l.range),
                radial_velocity: torso.radial_velocity,
                micro_amplitude: draw(&mut rng, l.micro_amplitude),
                micro_freq: draw(&mut rng, l.micro_freq),
                micro_phase: (draw(&mut rng, l.micro_phase) + i as f64 * profile.limb_phase_step)
                    .rem_euclid(2.0 * PI),
                reflectivity: draw(&mut rng, l.reflectivity),
            });
        }

        let scene = MotionScene {
            scatterers,
            wall: self.table.wall.clone(),
            duration_s: self.table.duration_s,
            noise_snr_db: self.table.noise_snr_db,
            seed,
            class_label: class_id,
        };
        check_scene(&scene, params)?;
        Ok(scene)
    }
}

/// Scene for `class_id` drawn from the built-in class table.
pub fn make_motion_scene(class_id: u32, seed: u64, params: &RadarParams) -> Result<MotionScene> {
    SceneGenerator::default().scene(class_id, seed, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_scene(scatterers: Vec<Scatterer>) -> MotionScene {
        MotionScene {
            scatterers,
            wall: None,
            duration_s: 0.1,
            noise_snr_db: None,
            seed: 7,
            class_label: 0,
        }
    }

    fn small_params() -> RadarParams {
        RadarParams {
            n_freq: 64,
            ..RadarParams::default()
        }
    }

    #[test]
    fn range_examples() {
        let fixed = Scatterer::fixed(5.0, 1.0);
        assert_eq!(scatterer_range(&fixed, 7.0), 5.0);
        let linear = Scatterer::moving(5.0, 1.0, 1.0);
        assert_eq!(scatterer_range(&linear, 2.0), 3.0);
        let wobble = Scatterer {
            micro_amplitude: 0.2,
            micro_freq: 2.0,
            ..Scatterer::fixed(5.0, 1.0)
        };
        assert!((scatterer_range(&wobble, 0.125) - 5.2).abs() < 1e-12);
    }

    #[test]
    fn empty_scene_is_zero() {
        let p = small_params();
        let echo = synthesize_echo(&quiet_scene(vec![]), &p).unwrap();
        assert_eq!(echo.data.dim(), (64, 11));
        assert!(echo.data.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn static_scatterer_closed_form() {
        let p = small_params();
        let echo = synthesize_echo(&quiet_scene(vec![Scatterer::fixed(5.0, 1.0)]), &p).unwrap();
        for ((n, _), v) in echo.data.indexed_iter() {
            let expected = Complex64::from_polar(1.0, -TAU * p.frequency(n) * 10.0 / p.c);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!((v - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn superposition() {
        let p = small_params();
        let a = Scatterer::fixed(3.0, 0.7);
        let b = Scatterer::moving(8.0, -0.5, 1.3);
        let ea = synthesize_echo(&quiet_scene(vec![a]), &p).unwrap();
        let eb = synthesize_echo(&quiet_scene(vec![b]), &p).unwrap();
        let eab = synthesize_echo(&quiet_scene(vec![a, b]), &p).unwrap();
        let scale = eab.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((x, y), z) in ea.data.iter().zip(eb.data.iter()).zip(eab.data.iter()) {
            assert!((x + y - z).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn phase_is_affine_in_frequency() {
        let p = small_params();
        let r = 4.321;
        let echo = synthesize_echo(&quiet_scene(vec![Scatterer::fixed(r, 1.0)]), &p).unwrap();
        let col: Vec<f64> = echo.data.column(0).iter().map(|v| v.arg()).collect();
        let mut unwrapped = vec![col[0]];
        for w in col.windows(2) {
            let mut d = w[1] - w[0];
            d -= TAU * (d / TAU).round();
            unwrapped.push(unwrapped.last().unwrap() + d);
        }
        // least-squares slope
        let n = unwrapped.len() as f64;
        let mx = (n - 1.0) / 2.0;
        let my = unwrapped.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, y) in unwrapped.iter().enumerate() {
            sxy += (i as f64 - mx) * (y - my);
            sxx += (i as f64 - mx).powi(2);
        }
        let slope = sxy / sxx;
        let expected = -TAU * p.delta_f * 2.0 * r / p.c;
        let diff = (slope - expected).rem_euclid(TAU);
        assert!(diff.min(TAU - diff) < 1e-9, "slope {slope} vs {expected}");
    }

    #[test]
    fn noise_power_matches_requested_snr() {
        let p = RadarParams::default();
        let mut scene = quiet_scene(vec![Scatterer::moving(5.0, 0.3, 1.0)]);
        scene.duration_s = 1.0;
        let clean = synthesize_echo(&scene, &p).unwrap();
        for snr in [-5.0, 0.0, 12.0] {
            scene.noise_snr_db = Some(snr);
            let noisy = synthesize_echo(&scene, &p).unwrap();
            let sig: f64 = clean.data.iter().map(|v| v.norm_sqr()).sum();
            let noise: f64 = noisy
                .data
                .iter()
                .zip(clean.data.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            let measured = 10.0 * (sig / noise).log10();
            assert!((measured - snr).abs() < 0.5, "{measured} vs {snr}");
        }
    }

    #[test]
    fn noise_reference_excludes_wall() {
        let p = small_params();
        let mut scene = quiet_scene(vec![Scatterer::fixed(5.0, 1.0)]);
        scene.noise_snr_db = Some(0.0);
        scene.duration_s = 2.0;
        let bare = synthesize_echo(&scene, &p).unwrap();
        scene.wall = Some(WallSpec {
            surface_returns: vec![SurfaceReturn {
                range: 0.3,
                amplitude: 50.0,
            }],
            one_way_attenuation: 1.0,
        });
        let walled = synthesize_echo(&scene, &p).unwrap();
        // noise is identical; the difference is exactly the static wall column
        let diff = &walled.data - &bare.data;
        for c in diff.columns() {
            for (a, b) in c.iter().zip(diff.column(0).iter()) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn wall_attenuation_scales_targets() {
        let p = small_params();
        let mut scene = quiet_scene(vec![Scatterer::fixed(5.0, 1.0)]);
        scene.wall = Some(WallSpec {
            surface_returns: vec![],
            one_way_attenuation: 0.5,
        });
        let echo = synthesize_echo(&scene, &p).unwrap();
        assert!(echo.data.iter().all(|v| (v.norm() - 0.25).abs() < 1e-12));
    }

    #[test]
    fn rejects_ambiguous_range() {
        let p = small_params();
        let far = p.max_unambiguous_range() + 1.0;
        let err = synthesize_echo(&quiet_scene(vec![Scatterer::fixed(far, 1.0)]), &p);
        assert!(matches!(err, Err(Error::RangeAmbiguity { .. })));
    }

    #[test]
    fn deterministic_with_seed() {
        let p = small_params();
        let mut scene = quiet_scene(vec![Scatterer::moving(4.0, 1.0, 1.0)]);
        scene.noise_snr_db = Some(3.0);
        let a = synthesize_echo(&scene, &p).unwrap();
        let b = synthesize_echo(&scene, &p).unwrap();
        assert_eq!(a, b);
        scene.seed += 1;
        let c = synthesize_echo(&scene, &p).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn builtin_table_covers_all_classes() {
        let table = ClassTable::builtin();
        table.validate().unwrap();
        assert_eq!(table.classes.len(), 10);
    }

    #[test]
    fn generator_contracts() {
        let p = RadarParams::default();
        for seed in 0..50 {
            let walk = make_motion_scene(0, seed, &p).unwrap();
            let v = walk.scatterers[0].radial_velocity;
            assert!((0.8..=1.4).contains(&v), "{v}");
            let boxing = make_motion_scene(9, seed, &p).unwrap();
            assert_eq!(boxing.scatterers[0].radial_velocity, 0.0);
            for id in 0..10 {
                let s = make_motion_scene(id, seed, &p).unwrap();
                assert!((3..=5).contains(&s.scatterers.len()));
                let class = MotionClass::from_id(id).unwrap();
                assert_eq!(s.scatterers[0].radial_velocity != 0.0, class.is_cross_place());
                assert_eq!(s, make_motion_scene(id, seed, &p).unwrap());
            }
        }
        assert!(matches!(
            make_motion_scene(10, 0, &p),
            Err(Error::UnknownClass(10))
        ));
    }
}
