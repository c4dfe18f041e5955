//! Wall-clutter mitigation along slow time.
//!
//! Three methods: per-bin mean removal, SVD subspace projection and a
//! linear-phase FIR high-pass filter run along each range bin.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::range::RangeMap;

/// Filter order used for wall removal.
pub const DEFAULT_HPF_ORDER: usize = 112;
/// High-pass cutoff in Hz.
pub const DEFAULT_HPF_CUTOFF_HZ: f64 = 3.0;

/// Removes each range bin's slow-time mean.
pub fn mean_subtract(rm: &RangeMap) -> RangeMap {
    let mut data = rm.data.clone();
    let m = data.ncols().max(1) as f64;
    for mut row in data.rows_mut() {
        let mean = row.sum() / m;
        row.mapv_inplace(|v| v - mean);
    }
    rm.with_data(data)
}

/// Orthonormal basis of the dominant left singular subspace of a range map.
#[derive(Debug, Clone)]
pub struct ClutterSubspace {
    basis: DMatrix<Complex64>,
}

fn to_matrix(data: &Array2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(data.nrows(), data.ncols(), |i, j| data[[i, j]])
}

impl ClutterSubspace {
    /// Left singular vectors of the `n_remove` largest singular values.
    pub fn estimate(rm: &RangeMap, n_remove: usize) -> Result<Self> {
        let (l, m) = rm.data.dim();
        if n_remove == 0 || n_remove >= l.min(m) {
            return Err(Error::invalid(format!(
                "n_remove must lie in 1..{}, got {n_remove}",
                l.min(m)
            )));
        }
        let svd = to_matrix(&rm.data).svd(true, false);
        let u = svd.u.expect("left vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let basis = DMatrix::from_fn(l, n_remove, |i, j| u[(i, order[j])]);
        Ok(Self { basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `(I - U U^H) X`.
    pub fn remove(&self, rm: &RangeMap) -> Result<RangeMap> {
        if rm.n_bins() != self.basis.nrows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} range bins", self.basis.nrows()),
                actual: format!("{}", rm.n_bins()),
            });
        }
        let x = to_matrix(&rm.data);
        let coeffs = self.basis.adjoint() * &x;
        let residual = x - &self.basis * coeffs;
        let data = Array2::from_shape_fn(rm.data.dim(), |(i, j)| residual[(i, j)]);
        Ok(rm.with_data(data))
    }
}

/// Subtracts the `n_remove` strongest singular components.
pub fn svd_project(rm: &RangeMap, n_remove: usize) -> Result<RangeMap> {
    ClutterSubspace::estimate(rm, n_remove)?.remove(rm)
}

/// Symmetric real FIR taps with their design parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoeffs {
    pub taps: Vec<f64>,
    pub cutoff_hz: f64,
    pub sample_rate_hz: f64,
}

impl FilterCoeffs {
    pub fn order(&self) -> usize {
        self.taps.len() - 1
    }

    /// Group delay in samples; constant for a symmetric filter.
    pub fn group_delay(&self) -> usize {
        self.order() / 2
    }

    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let w = TAU * freq_hz / self.sample_rate_hz;
        self.taps
            .iter()
            .enumerate()
            .map(|(i, h)| Complex64::from_polar(*h, -w * i as f64))
            .sum()
    }

    pub fn gain_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.response(freq_hz).norm().log10()
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Windowed-sinc high-pass: spectral inversion of a unity-DC Hamming-windowed
/// low-pass. `order` must be even, giving `order + 1` taps.
pub fn design_highpass(order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<FilterCoeffs> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "high-pass order must be even and positive, got {order}"
        )));
    }
    if !(sample_rate_hz > 0.0 && cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            sample_rate_hz / 2.0
        )));
    }
    let half = order / 2;
    let fc = cutoff_hz / sample_rate_hz;
    // one half, mirrored so the taps are exactly symmetric
    let left: Vec<f64> = (0..=half)
        .map(|i| {
            let hamming = 0.54 - 0.46 * (TAU * i as f64 / order as f64).cos();
            2.0 * fc * sinc(2.0 * fc * (i as f64 - half as f64)) * hamming
        })
        .collect();
    let mut lowpass: Vec<f64> = left.iter().chain(left.iter().rev().skip(1)).copied().collect();
    let dc: f64 = lowpass.iter().sum();
    lowpass.iter_mut().for_each(|h| *h /= dc);

    let mut taps: Vec<f64> = lowpass.iter().map(|h| -h).collect();
    taps[half] += 1.0;
    for i in 0..half {
        taps[order - i] = taps[i];
    }
    Ok(FilterCoeffs {
        taps,
        cutoff_hz,
        sample_rate_hz,
    })
}

/// Filters every range bin along slow time, advancing the output by the
/// group delay. Samples outside the record are treated as zero, so the
/// first and last `order / 2` columns are start-up transients; they are
/// recorded in `transient_cols`.
pub fn apply_highpass(rm: &RangeMap, coeffs: &FilterCoeffs) -> Result<RangeMap> {
    let order = coeffs.order();
    let m = rm.n_slow();
    if m <= order {
        return Err(Error::invalid(format!(
            "{m} slow-time samples cannot be filtered with an order-{order} FIR"
        )));
    }
    let delay = coeffs.group_delay();
    let mut data = Array2::zeros(rm.data.dim());
    for (src, mut dst) in rm.data.rows().into_iter().zip(data.rows_mut()) {
        for (out_idx, out) in dst.iter_mut().enumerate() {
            // y[k] = sum_i h[i] x[k + delay - i]
            let centre = out_idx + delay;
            let i_lo = centre.saturating_sub(m - 1);
            let i_hi = centre.min(order);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in i_lo..=i_hi {
                acc += src[centre - i] * coeffs.taps[i];
            }
            *out = acc;
        }
    }
    let mut out = rm.with_data(data);
    out.transient_cols = rm.transient_cols.max(delay);
    Ok(out)
}

/// Selectable mitigation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClutterMethod {
    None,
    Mean,
    Svd { n_remove: usize },
    Hpf { order: usize, cutoff_hz: f64 },
}

impl Default for ClutterMethod {
    fn default() -> Self {
        ClutterMethod::Hpf {
            order: DEFAULT_HPF_ORDER,
            cutoff_hz: DEFAULT_HPF_CUTOFF_HZ,
        }
    }
}

impl ClutterMethod {
    pub fn apply(&self, rm: &RangeMap) -> Result<RangeMap> {
        match *self {
            ClutterMethod::None => Ok(rm.clone()),
            ClutterMethod::Mean => Ok(mean_subtract(rm)),
            ClutterMethod::Svd { n_remove } => svd_project(rm, n_remove),
            ClutterMethod::Hpf { order, cutoff_hz } => {
                apply_highpass(rm, &design_highpass(order, cutoff_hz, rm.prf)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RadarParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn map(data: Array2<Complex64>) -> RangeMap {
        RangeMap::from_data(data, RadarParams::default())
    }

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn frob(a: &Array2<Complex64>) -> f64 {
        a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn default_filter() -> FilterCoeffs {
        design_highpass(112, 3.0, 113.0).unwrap()
    }

    #[test]
    fn mean_examples() {
        let c = Complex64::new(2.5, -1.0);
        let out = mean_subtract(&map(Array2::from_elem((2, 5), c)));
        assert!(out.data.iter().all(|v| v.norm() < 1e-15));
        let row = Array2::from_shape_vec((1, 2), vec![1.0.into(), 3.0.into()]).unwrap();
        let out = mean_subtract(&map(row));
        assert_eq!(out.data[[0, 0]], Complex64::new(-1.0, 0.0));
        assert_eq!(out.data[[0, 1]], Complex64::new(1.0, 0.0));
        let rnd = mean_subtract(&map(random(6, 40, 1)));
        for r in rnd.data.rows() {
            assert!((r.sum() / 40.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn svd_annihilates_rank_one() {
        let u = random(6, 1, 2);
        let v = random(1, 9, 3);
        let x = u.dot(&v);
        let out = svd_project(&map(x.clone()), 1).unwrap();
        assert!(frob(&out.data) <= 1e-10 * frob(&x));
    }

    #[test]
    fn svd_argument_range() {
        let rm = map(random(4, 6, 4));
        assert!(svd_project(&rm, 0).is_err());
        assert!(svd_project(&rm, 4).is_err());
        assert!(svd_project(&rm, 3).is_ok());
    }

    #[test]
    fn fixed_subspace_removal_is_linear() {
        let a = map(random(8, 20, 5));
        let b = map(random(8, 20, 6));
        let sub = ClutterSubspace::estimate(&map(random(8, 20, 7)), 2).unwrap();
        let sum = a.with_data(&a.data + &b.data);
        let lhs = sub.remove(&sum).unwrap().data;
        let rhs = &sub.remove(&a).unwrap().data + &sub.remove(&b).unwrap().data;
        assert!(frob(&(&lhs - &rhs)) < 1e-12);
    }

    #[test]
    fn filter_design_contract() {
        let f = default_filter();
        assert_eq!(f.taps.len(), 113);
        assert_eq!(f.group_delay(), 56);
        for i in 0..=112 {
            assert_eq!(f.taps[i], f.taps[112 - i]);
        }
        assert!(f.gain_db(0.0) <= -50.0);
        assert!(f.gain_db(10.0).abs() <= 1.0);
        // linear phase: response * exp(j w 56) is real
        for freq in [5.0, 10.0, 20.0, 40.0] {
            let r = f.response(freq) * Complex64::from_polar(1.0, TAU * freq / 113.0 * 56.0);
            assert!(r.im.abs() < 1e-12 * r.norm().max(1.0));
        }
    }

    #[test]
    fn filter_design_errors() {
        assert!(design_highpass(111, 3.0, 113.0).is_err());
        assert!(design_highpass(112, 0.0, 113.0).is_err());
        assert!(design_highpass(112, 60.0, 113.0).is_err());
    }

    #[test]
    fn highpass_rejects_short_rows() {
        let f = default_filter();
        assert!(apply_highpass(&map(random(2, 112, 8)), &f).is_err());
        assert!(apply_highpass(&map(random(2, 113, 8)), &f).is_ok());
    }

    #[test]
    fn highpass_dc_and_zero() {
        let f = default_filter();
        let out = apply_highpass(&map(Array2::zeros((3, 300))), &f).unwrap();
        assert!(out.data.iter().all(|v| v.norm() == 0.0));
        let dc = apply_highpass(&map(Array2::from_elem((1, 300), Complex64::new(1.0, 0.5))), &f).unwrap();
        assert_eq!(dc.transient_cols, 56);
        let central = dc.data.slice(ndarray::s![.., 56..244]);
        let p_out: f64 = central.iter().map(|v| v.norm_sqr()).sum::<f64>() / central.len() as f64;
        assert!(10.0 * (p_out / 1.25).log10() <= -50.0);
    }

    #[test]
    fn passband_tone_keeps_amplitude_and_phase() {
        let f = default_filter();
        let prf = 113.0;
        let tone = Array2::from_shape_fn((1, 1024), |(_, m)| {
            Complex64::from_polar(1.0, TAU * 10.0 * m as f64 / prf)
        });
        let out = apply_highpass(&map(tone.clone()), &f).unwrap();
        let mut phases = vec![];
        for m in 56..1024 - 56 {
            let ratio = out.data[[0, m]] / tone[[0, m]];
            assert!((0.89..=1.12).contains(&ratio.norm()));
            phases.push(ratio.arg());
        }
        let p0 = phases[0];
        assert!(phases.iter().all(|p| (p - p0).abs() < 1e-3));
    }

    #[test]
    fn row_permutation_commutes() {
        let x = random(4, 150, 9);
        let perm = [2usize, 0, 3, 1];
        let permuted = Array2::from_shape_fn(x.dim(), |(i, j)| x[[perm[i], j]]);
        for method in [ClutterMethod::Mean, ClutterMethod::Hpf { order: 112, cutoff_hz: 3.0 }] {
            let a = method.apply(&map(x.clone())).unwrap();
            let b = method.apply(&map(permuted.clone())).unwrap();
            for (i, &src) in perm.iter().enumerate() {
                assert_eq!(a.data.row(src), b.data.row(i));
            }
        }
    }

    #[test]
    fn mean_and_hpf_are_linear() {
        let a = map(random(3, 200, 10));
        let b = map(random(3, 200, 11));
        let sum = a.with_data(&a.data + &b.data);
        for method in [ClutterMethod::Mean, ClutterMethod::default()] {
            let lhs = method.apply(&sum).unwrap().data;
            let rhs = &method.apply(&a).unwrap().data + &method.apply(&b).unwrap().data;
            assert!(frob(&(&lhs - &rhs)) < 1e-12);
        }
    }
}
