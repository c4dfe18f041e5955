//! Short-time Fourier analysis of range maps.
//!
//! Four representations are built on one STFT engine:
//!
//! * RA-STFT: spectrogram of the coherent sum of all range bins.
//! * Radar data cube: one spectrogram per range bin, `L x M' x K`.
//! * CRATFR: inverse-energy weighted sum of the per-bin spectrograms.
//! * R-max: per time-frequency cell maximum of the cube over range.
//!
//! T-max (maximum over frames, giving a range-Doppler map) is provided for
//! completeness.
//!
//! Spectrogram rows are frames and columns are Doppler bins, rotated so that
//! column `K / 2` holds zero Doppler and the axis spans `[-PRF/2, PRF/2)`.

use std::f64::consts::TAU;
use std::sync::Arc;

use ndarray::{Array2, Array3, ArrayView1, ArrayViewMut2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::range::{range_axis, RangeMap};

/// Rows per work unit when reducing over range bins. Fixed so that floating
/// point accumulation order does not depend on the thread count.
const BIN_CHUNK: usize = 16;

/// Default CRATFR energy floor relative to the strongest bin.
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Symmetric raised cosine without zero end points, `0.5 - 0.5 cos(2 pi n / (N + 1))`
    /// for `n = 1..=N`.
    Hanning,
    /// Symmetric raised cosine with zero end points.
    Hann,
    Hamming,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let n = len as f64;
        (0..len)
            .map(|i| {
                let i = i as f64;
                match self {
                    Window::Hanning => 0.5 - 0.5 * (TAU * (i + 1.0) / (n + 1.0)).cos(),
                    Window::Hann if len > 1 => 0.5 - 0.5 * (TAU * i / (n - 1.0)).cos(),
                    Window::Hamming if len > 1 => 0.54 - 0.46 * (TAU * i / (n - 1.0)).cos(),
                    _ => 1.0,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftConfig {
    pub window: Window,
    pub win_len: usize,
    pub hop: usize,
    /// Doppler bins `K`; frames are zero-padded from `win_len`.
    pub fft_len: usize,
}

impl Default for StftConfig {
    /// 32-sample Hanning window, 31 samples of overlap, 64 Doppler bins.
    fn default() -> Self {
        Self {
            window: Window::Hanning,
            win_len: 32,
            hop: 1,
            fft_len: 64,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.win_len == 0 || self.hop == 0 || self.hop > self.win_len {
            return Err(Error::invalid(format!(
                "need 1 <= hop <= win_len, got hop {} and win_len {}",
                self.hop, self.win_len
            )));
        }
        if self.fft_len < self.win_len {
            return Err(Error::invalid(format!(
                "fft_len {} shorter than win_len {}",
                self.fft_len, self.win_len
            )));
        }
        Ok(())
    }

    pub fn n_frames(&self, n_samples: usize) -> Result<usize> {
        if n_samples < self.win_len {
            return Err(Error::SignalTooShort {
                len: n_samples,
                win_len: self.win_len,
            });
        }
        Ok((n_samples - self.win_len) / self.hop + 1)
    }

    /// Centre time in seconds of each frame.
    pub fn frame_times(&self, n_frames: usize, prf: f64) -> Vec<f64> {
        let centre = (self.win_len as f64 - 1.0) / 2.0;
        (0..n_frames)
            .map(|i| ((i * self.hop) as f64 + centre) / prf)
            .collect()
    }

    /// Doppler frequency in Hz of each output column.
    pub fn doppler_axis(&self, prf: f64) -> Vec<f64> {
        let k = self.fft_len as f64;
        let half = (self.fft_len / 2) as f64;
        (0..self.fft_len)
            .map(|i| (i as f64 - half) * prf / k)
            .collect()
    }

    /// Output column nearest to `freq_hz`, folded into `[-PRF/2, PRF/2)`.
    pub fn doppler_bin(&self, freq_hz: f64, prf: f64) -> usize {
        let k = self.fft_len as f64;
        let raw = (freq_hz / prf * k).round() as i64 + (self.fft_len / 2) as i64;
        raw.rem_euclid(self.fft_len as i64) as usize
    }
}

/// Frames by Doppler bins of nonnegative power.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub data: Array2<f64>,
    pub frame_times: Vec<f64>,
    pub doppler_axis: Vec<f64>,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.data.ncols()
    }
}

/// Per-range-bin spectrograms stacked as `(range, frame, doppler)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarDataCube {
    pub data: Array3<f64>,
    pub range_axis: Vec<f64>,
    pub frame_times: Vec<f64>,
    pub doppler_axis: Vec<f64>,
}

impl RadarDataCube {
    pub fn slice(&self, l: usize) -> Spectrogram {
        Spectrogram {
            data: self.data.index_axis(Axis(0), l).to_owned(),
            frame_times: self.frame_times.clone(),
            doppler_axis: self.doppler_axis.clone(),
        }
    }
}

/// Range-by-Doppler map of nonnegative power.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pub data: Array2<f64>,
    pub range_axis: Vec<f64>,
    pub doppler_axis: Vec<f64>,
}

/// Reusable STFT with a planned FFT and precomputed window.
pub struct Stft {
    cfg: StftConfig,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(cfg: StftConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            window: cfg.window.coefficients(cfg.win_len),
            fft: FftPlanner::new().plan_fft_forward(cfg.fft_len),
            cfg,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    /// Writes `|DFT_K(window * frame)|^2` for every frame of `signal` into
    /// `out` (frames x K), DC-centred.
    pub fn power_into(&self, signal: ArrayView1<Complex64>, mut out: ArrayViewMut2<f64>) {
        let k = self.cfg.fft_len;
        let half = k / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); k];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for (frame, mut row) in out.rows_mut().into_iter().enumerate() {
            let start = frame * self.cfg.hop;
            for (t, b) in buf.iter_mut().enumerate() {
                *b = if t < self.cfg.win_len {
                    signal[start + t] * self.window[t]
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (i, r) in row.iter_mut().enumerate() {
                *r = buf[(i + half) % k].norm_sqr();
            }
        }
    }

    pub fn power(&self, signal: ArrayView1<Complex64>) -> Result<Array2<f64>> {
        let frames = self.cfg.n_frames(signal.len())?;
        let mut out = Array2::zeros((frames, self.cfg.fft_len));
        self.power_into(signal, out.view_mut());
        Ok(out)
    }

    fn wrap(&self, data: Array2<f64>, prf: f64) -> Spectrogram {
        Spectrogram {
            frame_times: self.cfg.frame_times(data.nrows(), prf),
            doppler_axis: self.cfg.doppler_axis(prf),
            data,
        }
    }
}

/// Spectrogram of one slow-time signal sampled at `prf`.
pub fn stft_spectrogram(signal: &[Complex64], cfg: &StftConfig, prf: f64) -> Result<Spectrogram> {
    let stft = Stft::new(*cfg)?;
    let data = stft.power(ArrayView1::from(signal))?;
    Ok(stft.wrap(data, prf))
}

/// Spectrogram of the coherent sum over range bins.
pub fn ra_stft(rm: &RangeMap, cfg: &StftConfig) -> Result<Spectrogram> {
    let summed = rm.data.sum_axis(Axis(0));
    stft_spectrogram(summed.as_slice().expect("contiguous"), cfg, rm.prf)
}

/// Radar data cube: slice `l` is the spectrogram of range bin `l`.
pub fn build_cube(rm: &RangeMap, cfg: &StftConfig) -> Result<RadarDataCube> {
    let stft = Stft::new(*cfg)?;
    let frames = cfg.n_frames(rm.n_slow())?;
    let mut data = Array3::zeros((rm.n_bins(), frames, cfg.fft_len));
    data.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(rm.data.axis_iter(Axis(0)).into_par_iter())
        .for_each(|(slice, row)| stft.power_into(row, slice));
    Ok(RadarDataCube {
        data,
        range_axis: range_axis(rm),
        frame_times: cfg.frame_times(frames, rm.prf),
        doppler_axis: cfg.doppler_axis(rm.prf),
    })
}

/// Folds the per-bin spectrograms of `rm` in fixed chunks of range bins.
///
/// `fold(acc, l, tfr)` accumulates bin `l` into a chunk accumulator that
/// starts as `init`; chunk results are merged in bin order with `merge`.
fn fold_bins<F, M>(rm: &RangeMap, cfg: &StftConfig, init: f64, fold: F, merge: M) -> Result<Array2<f64>>
where
    F: Fn(&mut Array2<f64>, usize, &Array2<f64>) + Sync,
    M: Fn(&mut Array2<f64>, &Array2<f64>),
{
    let stft = Stft::new(*cfg)?;
    let frames = cfg.n_frames(rm.n_slow())?;
    let shape = (frames, cfg.fft_len);
    let n_chunks = rm.n_bins().div_ceil(BIN_CHUNK);
    let partials: Vec<Array2<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Array2::from_elem(shape, init);
            let mut tfr = Array2::zeros(shape);
            let end = ((c + 1) * BIN_CHUNK).min(rm.n_bins());
            for l in c * BIN_CHUNK..end {
                stft.power_into(rm.data.row(l), tfr.view_mut());
                fold(&mut acc, l, &tfr);
            }
            acc
        })
        .collect();
    let mut total = Array2::from_elem(shape, init);
    for p in &partials {
        merge(&mut total, p);
    }
    Ok(total)
}

fn max_merge(acc: &mut Array2<f64>, other: &Array2<f64>) {
    acc.zip_mut_with(other, |a, b| *a = a.max(*b));
}

/// Normalized inverse-energy weights over range bins. Bins whose slow-time
/// energy is below `floor` times the strongest bin get weight zero.
pub fn cratfr_weights(rm: &RangeMap, floor: f64) -> Result<Vec<f64>> {
    let energies: Vec<f64> = rm
        .data
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let max_e = energies.iter().copied().fold(0.0, f64::max);
    if max_e.is_nan() || max_e <= 0.0 {
        return Err(Error::EmptyMap);
    }
    let threshold = floor * max_e;
    let inv: Vec<f64> = energies
        .iter()
        .map(|&e| if e >= threshold && e > 0.0 { 1.0 / e } else { 0.0 })
        .collect();
    let total: f64 = inv.iter().sum();
    Ok(inv.iter().map(|w| w / total).collect())
}

/// Inverse-energy weighted sum of per-bin spectrograms with the given floor.
pub fn cratfr_with_floor(rm: &RangeMap, cfg: &StftConfig, floor: f64) -> Result<Spectrogram> {
    let weights = cratfr_weights(rm, floor)?;
    let data = fold_bins(
        rm,
        cfg,
        0.0,
        |acc, l, tfr| {
            let w = weights[l];
            if w > 0.0 {
                acc.zip_mut_with(tfr, |a, t| *a += w * t);
            }
        },
        |acc, p| *acc += p,
    )?;
    Ok(Spectrogram {
        frame_times: cfg.frame_times(data.nrows(), rm.prf),
        doppler_axis: cfg.doppler_axis(rm.prf),
        data,
    })
}

/// CRATFR with the default energy floor.
pub fn cratfr(rm: &RangeMap, cfg: &StftConfig) -> Result<Spectrogram> {
    cratfr_with_floor(rm, cfg, DEFAULT_ENERGY_FLOOR)
}

/// Maximum of the data cube over range for every time-frequency cell.
pub fn rmax_tfr(cube: &RadarDataCube) -> Spectrogram {
    let (_, frames, bins) = cube.data.dim();
    let mut data = Array2::<f64>::zeros((frames, bins));
    for slice in cube.data.outer_iter() {
        data.zip_mut_with(&slice, |a, b| *a = a.max(*b));
    }
    Spectrogram {
        data,
        frame_times: cube.frame_times.clone(),
        doppler_axis: cube.doppler_axis.clone(),
    }
}

/// R-max map computed bin by bin without materializing the cube. Equal to
/// `rmax_tfr(&build_cube(rm, cfg)?)`.
pub fn rmax_from_range_map(rm: &RangeMap, cfg: &StftConfig) -> Result<Spectrogram> {
    let data = fold_bins(rm, cfg, 0.0, |acc, _, tfr| max_merge(acc, tfr), max_merge)?;
    Ok(Spectrogram {
        frame_times: cfg.frame_times(data.nrows(), rm.prf),
        doppler_axis: cfg.doppler_axis(rm.prf),
        data,
    })
}

/// Maximum of the data cube over frames, per range bin and Doppler bin.
pub fn tmax_rdr(cube: &RadarDataCube) -> RangeDopplerMap {
    RangeDopplerMap {
        data: cube.data.fold_axis(Axis(1), 0.0f64, |a, b| a.max(*b)),
        range_axis: cube.range_axis.clone(),
        doppler_axis: cube.doppler_axis.clone(),
    }
}

/// T-max map computed per range bin without materializing the cube.
pub fn tmax_from_range_map(rm: &RangeMap, cfg: &StftConfig) -> Result<RangeDopplerMap> {
    let stft = Stft::new(*cfg)?;
    cfg.n_frames(rm.n_slow())?;
    let rows: Vec<Vec<f64>> = rm
        .data
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| {
            let tfr = stft.power(row).expect("length checked");
            tfr.fold_axis(Axis(0), 0.0f64, |a, b| a.max(*b)).to_vec()
        })
        .collect();
    let data = Array2::from_shape_fn((rm.n_bins(), cfg.fft_len), |(l, k)| rows[l][k]);
    Ok(RangeDopplerMap {
        data,
        range_axis: range_axis(rm),
        doppler_axis: cfg.doppler_axis(rm.prf),
    })
}

/// Mean power along expected Doppler ridges over the central half of the
/// frames, relative to the median of the whole map.
pub fn ridge_contrast(power: &Array2<f64>, cfg: &StftConfig, prf: f64, dopplers_hz: &[f64]) -> Result<f64> {
    let (n_frames, n_bins) = power.dim();
    if n_bins != cfg.fft_len {
        return Err(Error::DimensionMismatch {
            expected: format!("{} Doppler bins", cfg.fft_len),
            actual: format!("{n_bins}"),
        });
    }
    if n_frames < 2 || dopplers_hz.is_empty() {
        return Err(Error::invalid("ridge contrast needs frames and ridges"));
    }
    let mut values: Vec<f64> = power.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    let median = values[values.len() / 2];
    if median <= 0.0 {
        return Err(Error::EmptyMap);
    }
    let frames = n_frames / 4..n_frames - n_frames / 4;
    let mut sum = 0.0;
    for &f in dopplers_hz {
        let k = cfg.doppler_bin(f, prf);
        sum += frames.clone().map(|t| power[[t, k]]).sum::<f64>();
    }
    Ok(sum / (frames.len() * dopplers_hz.len()) as f64 / median)
}

/// Time-frequency representation selectable from configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TfrMethod {
    RaStft,
    Cratfr,
    Rmax,
    Tmax,
}

impl TfrMethod {
    pub const ALL: [TfrMethod; 4] = [
        TfrMethod::RaStft,
        TfrMethod::Cratfr,
        TfrMethod::Rmax,
        TfrMethod::Tmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TfrMethod::RaStft => "ra-stft",
            TfrMethod::Cratfr => "cratfr",
            TfrMethod::Rmax => "rmax",
            TfrMethod::Tmax => "tmax",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown TFR method {s:?}")))
    }

    /// The method's 2-D output: frames x Doppler for the spectrogram methods,
    /// range x Doppler for T-max.
    pub fn render(self, rm: &RangeMap, cfg: &StftConfig) -> Result<Array2<f64>> {
        Ok(match self {
            TfrMethod::RaStft => ra_stft(rm, cfg)?.data,
            TfrMethod::Cratfr => cratfr(rm, cfg)?.data,
            TfrMethod::Rmax => rmax_from_range_map(rm, cfg)?.data,
            TfrMethod::Tmax => tmax_from_range_map(rm, cfg)?.data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RadarParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PRF: f64 = 113.0;

    fn random_signal(len: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn map(data: Array2<Complex64>) -> RangeMap {
        RangeMap::from_data(data, RadarParams::default())
    }

    fn tone(freq: f64, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|m| Complex64::from_polar(1.0, TAU * freq * m as f64 / PRF))
            .collect()
    }

    /// Direct double sum over window samples and Doppler bins.
    fn brute_spectrogram(signal: &[Complex64], cfg: &StftConfig) -> Array2<f64> {
        let h = cfg.window.coefficients(cfg.win_len);
        let frames = (signal.len() - cfg.win_len) / cfg.hop + 1;
        let k_len = cfg.fft_len;
        Array2::from_shape_fn((frames, k_len), |(f, col)| {
            let k = (col + k_len / 2) % k_len;
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..cfg.win_len {
                let ang = -TAU * (k * t) as f64 / k_len as f64;
                acc += signal[f * cfg.hop + t] * h[t] * Complex64::from_polar(1.0, ang);
            }
            acc.norm_sqr()
        })
    }

    #[test]
    fn hanning_has_no_zero_endpoints() {
        let w = Window::Hanning.coefficients(32);
        assert!(w[0] > 0.0 && (w[0] - w[31]).abs() < 1e-15);
        let hann = Window::Hann.coefficients(32);
        assert!(hann[0].abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cfg in [
            StftConfig::default(),
            StftConfig {
                window: Window::Hamming,
                win_len: 20,
                hop: 3,
                fft_len: 25,
            },
        ] {
            let s = random_signal(256, &mut rng);
            let fast = stft_spectrogram(&s, &cfg, PRF).unwrap();
            let slow = brute_spectrogram(&s, &cfg);
            assert_eq!(fast.data.dim(), slow.dim());
            for (a, b) in fast.data.iter().zip(slow.iter()) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-9));
            }
        }
    }

    #[test]
    fn frame_count_and_short_signal() {
        let cfg = StftConfig::default();
        let s = stft_spectrogram(&vec![Complex64::new(0.0, 0.0); 100], &cfg, PRF).unwrap();
        assert_eq!(s.n_frames(), 69);
        assert!(s.data.iter().all(|v| *v == 0.0));
        assert!(matches!(
            stft_spectrogram(&vec![Complex64::new(1.0, 0.0); 31], &cfg, PRF),
            Err(Error::SignalTooShort { len: 31, win_len: 32 })
        ));
        let bad = StftConfig { hop: 40, ..cfg };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn doppler_axis_is_centred() {
        let cfg = StftConfig::default();
        let axis = cfg.doppler_axis(PRF);
        assert_eq!(axis[32], 0.0);
        assert!((axis[0] + PRF / 2.0).abs() < 1e-12);
        assert!(axis[63] < PRF / 2.0);
    }

    #[test]
    fn tones_localize() {
        let cfg = StftConfig::default();
        for f in [-40.0, -10.0, 5.0, 25.0] {
            let spec = stft_spectrogram(&tone(f, 200), &cfg, PRF).unwrap();
            let want = cfg.doppler_bin(f, PRF) as i64;
            for row in spec.data.rows() {
                let got = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap()
                    .0 as i64;
                assert!((got - want).abs() <= 1, "f={f}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ra_stft_examples() {
        let cfg = StftConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = random_signal(80, &mut rng);
        let single = stft_spectrogram(&r, &cfg, PRF).unwrap();

        let mut one = Array2::zeros((3, 80));
        one.row_mut(1).assign(&ArrayView1::from(&r));
        assert_eq!(ra_stft(&map(one), &cfg).unwrap().data, single.data);

        let twice = Array2::from_shape_fn((2, 80), |(_, m)| r[m]);
        let doubled = ra_stft(&map(twice), &cfg).unwrap();
        for (a, b) in doubled.data.iter().zip(single.data.iter()) {
            assert!((a - 4.0 * b).abs() <= 1e-12 * b.max(1.0));
        }

        let opposite = Array2::from_shape_fn((2, 80), |(l, m)| if l == 0 { r[m] } else { -r[m] });
        assert!(ra_stft(&map(opposite), &cfg).unwrap().data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cube_slices_are_row_spectrograms() {
        let cfg = StftConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let data = Array2::from_shape_fn((8, 128), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let rm = map(data.clone());
        let cube = build_cube(&rm, &cfg).unwrap();
        for l in 0..8 {
            let row: Vec<Complex64> = data.row(l).to_vec();
            assert_eq!(cube.slice(l).data, stft_spectrogram(&row, &cfg, PRF).unwrap().data);
        }
        let zero = build_cube(&map(Array2::zeros((2, 40))), &cfg).unwrap();
        assert!(zero.data.iter().all(|v| *v == 0.0));
        // streaming forms agree with the cube reductions
        assert_eq!(rmax_from_range_map(&rm, &cfg).unwrap().data, rmax_tfr(&cube).data);
        assert_eq!(tmax_from_range_map(&rm, &cfg).unwrap().data, tmax_rdr(&cube).data);
    }

    #[test]
    fn cratfr_examples() {
        let cfg = StftConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let r = random_signal(64, &mut rng);
        let q = random_signal(64, &mut rng);

        let single = map(Array2::from_shape_fn((1, 64), |(_, m)| r[m]));
        assert_eq!(cratfr_weights(&single, DEFAULT_ENERGY_FLOOR).unwrap(), vec![1.0]);
        let c = cratfr(&single, &cfg).unwrap();
        let s = stft_spectrogram(&r, &cfg, PRF).unwrap();
        for (a, b) in c.data.iter().zip(s.data.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.max(1e-12));
        }

        // equal energy: unit-modulus rows
        let e1: Vec<Complex64> = r.iter().map(|v| v / v.norm()).collect();
        let e2: Vec<Complex64> = q.iter().map(|v| v / v.norm()).collect();
        let pair = map(Array2::from_shape_fn((2, 64), |(l, m)| if l == 0 { e1[m] } else { e2[m] }));
        let w = cratfr_weights(&pair, DEFAULT_ENERGY_FLOOR).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        let avg = cratfr(&pair, &cfg).unwrap();
        let s1 = stft_spectrogram(&e1, &cfg, PRF).unwrap().data;
        let s2 = stft_spectrogram(&e2, &cfg, PRF).unwrap().data;
        for ((a, x), y) in avg.data.iter().zip(s1.iter()).zip(s2.iter()) {
            assert!((a - 0.5 * (x + y)).abs() <= 1e-12 * (x + y).max(1e-12));
        }

        // energies E and 4E
        let scaled = map(Array2::from_shape_fn((2, 64), |(l, m)| if l == 0 { e1[m] } else { 2.0 * e2[m] }));
        let w = cratfr_weights(&scaled, DEFAULT_ENERGY_FLOOR).unwrap();
        assert!((w[0] - 0.8).abs() < 1e-12 && (w[1] - 0.2).abs() < 1e-12);

        assert!(matches!(
            cratfr(&map(Array2::zeros((3, 64))), &cfg),
            Err(Error::EmptyMap)
        ));
    }

    #[test]
    fn cratfr_floor_excludes_weak_bins() {
        let data = Array2::from_shape_fn((3, 40), |(l, _)| match l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(1e-4, 0.0),
            _ => Complex64::new(0.0, 0.0),
        });
        let w = cratfr_weights(&map(data), 1e-6).unwrap();
        assert_eq!(w, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rmax_and_tmax_single_cell() {
        let mut data = Array3::zeros((3, 4, 5));
        data[[1, 2, 3]] = 7.5;
        let cube = RadarDataCube {
            data,
            range_axis: vec![0.0; 3],
            frame_times: vec![0.0; 4],
            doppler_axis: vec![0.0; 5],
        };
        let r = rmax_tfr(&cube);
        let t = tmax_rdr(&cube);
        for ((m, k), v) in r.data.indexed_iter() {
            assert_eq!(*v, if (m, k) == (2, 3) { 7.5 } else { 0.0 });
        }
        for ((l, k), v) in t.data.indexed_iter() {
            assert_eq!(*v, if (l, k) == (1, 3) { 7.5 } else { 0.0 });
        }
    }

    #[test]
    fn tmax_of_time_constant_cube() {
        let slice = Array2::from_shape_fn((3, 6), |(l, k)| (l * 6 + k) as f64);
        let data = Array3::from_shape_fn((3, 5, 6), |(l, _, k)| slice[[l, k]]);
        let cube = RadarDataCube {
            data,
            range_axis: vec![0.0; 3],
            frame_times: vec![0.0; 5],
            doppler_axis: vec![0.0; 6],
        };
        assert_eq!(tmax_rdr(&cube).data, slice);
    }

    #[test]
    fn method_names_round_trip() {
        for m in TfrMethod::ALL {
            assert_eq!(TfrMethod::parse(m.name()).unwrap(), m);
        }
        assert!(TfrMethod::parse("wigner").is_err());
    }

    #[test]
    fn ridge_contrast_examples() {
        let cfg = StftConfig::default();
        let flat = Array2::from_elem((40, 64), 2.0);
        assert!((ridge_contrast(&flat, &cfg, PRF, &[10.0]).unwrap() - 1.0).abs() < 1e-12);
        let k = cfg.doppler_bin(10.0, PRF);
        let mut ridge = Array2::from_elem((40, 64), 1.0);
        ridge.column_mut(k).fill(10.0);
        assert!((ridge_contrast(&ridge, &cfg, PRF, &[10.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(ridge_contrast(&Array2::zeros((40, 64)), &cfg, PRF, &[10.0]).is_err());
        assert!(ridge_contrast(&flat, &cfg, PRF, &[]).is_err());
    }
}
