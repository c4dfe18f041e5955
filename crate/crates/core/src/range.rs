//! Range compression of SFCW sweeps.

use ndarray::{s, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sim::{RadarParams, RawEchoMatrix};

/// Range bins by slow time, `s(l, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeMap {
    pub data: Array2<Complex64>,
    /// Meters per range bin, `c / (2 delta_f L)`.
    pub bin_spacing: f64,
    pub prf: f64,
    pub params: RadarParams,
    /// Index of row 0 in the full (ungated) range profile.
    pub first_bin: usize,
    /// Slow-time columns at either edge that carry filter start-up transients.
    pub transient_cols: usize,
}

impl RangeMap {
    /// Wraps raw data with the bookkeeping of an `L`-point compression.
    pub fn from_data(data: Array2<Complex64>, params: RadarParams) -> Self {
        let l = data.nrows().max(1);
        Self {
            bin_spacing: params.c / (2.0 * params.delta_f * l as f64),
            prf: params.prf,
            params,
            data,
            first_bin: 0,
            transient_cols: 0,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_slow(&self) -> usize {
        self.data.ncols()
    }

    /// Same metadata, new samples.
    pub fn with_data(&self, data: Array2<Complex64>) -> Self {
        Self {
            data,
            ..self.clone()
        }
    }

    /// Rows `l_min..l_max` (exclusive end) of the map.
    pub fn gate(&self, l_min: usize, l_max: usize) -> Result<Self> {
        if l_min >= l_max || l_max > self.n_bins() {
            return Err(Error::invalid(format!(
                "range gate {l_min}..{l_max} invalid for {} bins",
                self.n_bins()
            )));
        }
        Ok(Self {
            data: self.data.slice(s![l_min..l_max, ..]).to_owned(),
            first_bin: self.first_bin + l_min,
            ..self.clone()
        })
    }

    /// Drops the flagged transient columns at both edges.
    pub fn trim_transients(&self) -> Result<Self> {
        let k = self.transient_cols;
        if 2 * k >= self.n_slow() {
            return Err(Error::invalid("transient region covers the whole map"));
        }
        Ok(Self {
            data: self.data.slice(s![.., k..self.n_slow() - k]).to_owned(),
            transient_cols: 0,
            ..self.clone()
        })
    }
}

/// `L`-point inverse DFT of every echo column, zero-padded from `N`.
///
/// The inverse carries the `1/L` factor, so a unit-amplitude scatterer over
/// `N = L` frequencies compresses to a unit-magnitude peak.
pub fn range_compress(echo: &RawEchoMatrix, n_bins: usize) -> Result<RangeMap> {
    let n = echo.n_freq();
    if n_bins < n {
        return Err(Error::invalid(format!(
            "range FFT length {n_bins} is shorter than the {n} frequency steps"
        )));
    }
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n_bins);
    let scale = 1.0 / n_bins as f64;
    let mut data = Array2::zeros((n_bins, echo.n_slow()));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_bins];
    for (src, mut dst) in echo.data.columns().into_iter().zip(data.columns_mut()) {
        buf.fill(Complex64::new(0.0, 0.0));
        for (b, v) in buf.iter_mut().zip(src.iter()) {
            *b = *v;
        }
        ifft.process(&mut buf);
        for (d, b) in dst.iter_mut().zip(&buf) {
            *d = b * scale;
        }
    }
    Ok(RangeMap::from_data(data, echo.params))
}

/// Range in meters of each row.
pub fn range_axis(rm: &RangeMap) -> Vec<f64> {
    (0..rm.n_bins())
        .map(|l| (rm.first_bin + l) as f64 * rm.bin_spacing)
        .collect()
}

/// Bin a scatterer at `range` meters compresses to: `round(2 R delta_f L / c)`.
pub fn expected_bin(params: &RadarParams, range: f64, n_bins: usize) -> usize {
    (2.0 * range * params.delta_f * n_bins as f64 / params.c).round() as usize
}
