//! On-disk formats.
//!
//! Binary files are little-endian with a 4-byte magic:
//!
//! * `RMX1` echo: `u32 N, u32 M, f64 f0, f64 delta_f, f64 prf`, then `N*M`
//!   complex samples as interleaved `f64` (re, im), column-major by slow time.
//! * `RGM1` range map: as `RMX1` with `L` rows and an extra `f64 bin_spacing`
//!   after `prf`.
//! * `RDC1` data cube: `u32 L, u32 M', u32 K`, the range, frame-time and
//!   Doppler axes as `f64`, then `L*M'*K` `f32` values in `(l, m, k)` order.
//!
//! Text outputs are headerless CSV and binary PGM (`P5`, maxval 255).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::GrayImage;
use crate::clutter::FilterCoeffs;
use crate::error::{Error, Result};
use crate::range::RangeMap;
use crate::sim::{RadarParams, RawEchoMatrix};
use crate::tfr::RadarDataCube;

pub const ECHO_MAGIC: &[u8; 4] = b"RMX1";
pub const RANGE_MAP_MAGIC: &[u8; 4] = b"RGM1";
pub const CUBE_MAGIC: &[u8; 4] = b"RDC1";

/// One row of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    pub class_label: u32,
    pub seed: u64,
}

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file truncated".into())
    } else {
        Error::Io(e)
    }
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    if &b != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&b),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

fn dim_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::invalid(format!("dimension {n} exceeds u32")))
}

fn put_complex_columns(w: &mut impl Write, data: &Array2<Complex64>) -> Result<()> {
    for col in data.columns() {
        for v in col {
            put_f64(w, v.re)?;
            put_f64(w, v.im)?;
        }
    }
    Ok(())
}

fn get_complex_columns(r: &mut impl Read, rows: usize, cols: usize) -> Result<Array2<Complex64>> {
    let mut data = Array2::zeros((rows, cols));
    for m in 0..cols {
        for n in 0..rows {
            let re = get_f64(r)?;
            let im = get_f64(r)?;
            data[[n, m]] = Complex64::new(re, im);
        }
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(data)
}

pub fn write_echo(w: &mut impl Write, echo: &RawEchoMatrix) -> Result<()> {
    w.write_all(ECHO_MAGIC)?;
    put_u32(w, dim_u32(echo.n_freq())?)?;
    put_u32(w, dim_u32(echo.n_slow())?)?;
    put_f64(w, echo.params.f0)?;
    put_f64(w, echo.params.delta_f)?;
    put_f64(w, echo.params.prf)?;
    put_complex_columns(w, &echo.data)
}

/// Reads an echo file; the propagation speed is not stored and defaults to
/// the vacuum value.
pub fn read_echo(r: &mut impl Read) -> Result<RawEchoMatrix> {
    expect_magic(r, ECHO_MAGIC)?;
    let n = get_u32(r)? as usize;
    let m = get_u32(r)? as usize;
    let params = RadarParams {
        f0: get_f64(r)?,
        delta_f: get_f64(r)?,
        n_freq: n,
        prf: get_f64(r)?,
        ..RadarParams::default()
    };
    params
        .validate()
        .map_err(|e| Error::Format(format!("echo header: {e}")))?;
    let data = get_complex_columns(r, n, m)?;
    Ok(RawEchoMatrix { data, params })
}

pub fn write_range_map(w: &mut impl Write, rm: &RangeMap) -> Result<()> {
    w.write_all(RANGE_MAP_MAGIC)?;
    put_u32(w, dim_u32(rm.n_bins())?)?;
    put_u32(w, dim_u32(rm.n_slow())?)?;
    put_f64(w, rm.params.f0)?;
    put_f64(w, rm.params.delta_f)?;
    put_f64(w, rm.prf)?;
    put_f64(w, rm.bin_spacing)?;
    put_complex_columns(w, &rm.data)
}

pub fn read_range_map(r: &mut impl Read) -> Result<RangeMap> {
    expect_magic(r, RANGE_MAP_MAGIC)?;
    let l = get_u32(r)? as usize;
    let m = get_u32(r)? as usize;
    let params = RadarParams {
        f0: get_f64(r)?,
        delta_f: get_f64(r)?,
        n_freq: l,
        prf: get_f64(r)?,
        ..RadarParams::default()
    };
    let bin_spacing = get_f64(r)?;
    let data = get_complex_columns(r, l, m)?;
    let mut rm = RangeMap::from_data(data, params);
    rm.bin_spacing = bin_spacing;
    Ok(rm)
}

pub fn write_cube(w: &mut impl Write, cube: &RadarDataCube) -> Result<()> {
    let (l, m, k) = cube.data.dim();
    w.write_all(CUBE_MAGIC)?;
    for d in [l, m, k] {
        put_u32(w, dim_u32(d)?)?;
    }
    for axis in [&cube.range_axis, &cube.frame_times, &cube.doppler_axis] {
        for v in axis {
            put_f64(w, *v)?;
        }
    }
    for v in cube.data.iter() {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    Ok(())
}

/// Header fields of an `RDC1` file: dimensions and axes.
pub fn read_cube_header(r: &mut impl Read) -> Result<(usize, usize, usize)> {
    expect_magic(r, CUBE_MAGIC)?;
    Ok((get_u32(r)? as usize, get_u32(r)? as usize, get_u32(r)? as usize))
}

/// Headerless CSV, one line per row of `data`.
pub fn write_matrix_csv(w: impl Write, data: &Array2<f64>) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in data.rows() {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv(r: impl Read) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows: Vec<Vec<f64>> = vec![];
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format("ragged CSV".into()));
    }
    Ok(Array2::from_shape_fn((rows.len(), cols), |(i, j)| rows[i][j]))
}

/// Range-map magnitudes: one line per range bin, one column per sweep.
pub fn write_range_map_csv(w: impl Write, rm: &RangeMap) -> Result<()> {
    write_matrix_csv(w, &rm.data.mapv(|v| v.norm()))
}

pub fn write_filter_csv(w: impl Write, coeffs: &FilterCoeffs) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "tap"])?;
    for (i, t) in coeffs.taps.iter().enumerate() {
        out.write_record([i.to_string(), t.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_pgm(w: &mut impl Write, img: &GrayImage) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width(), img.height())?;
    let bytes: Vec<u8> = img.pixels.iter().copied().collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_pgm(r: &mut impl Read) -> Result<GrayImage> {
    let mut buf = vec![];
    r.read_to_end(&mut buf)?;
    // magic, width, height and maxval separated by single whitespace runs
    let mut fields = vec![];
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < buf.len() && buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&buf[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(Error::Format("expected P5 PGM with maxval 255".into()));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Format(e.to_string()));
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let pixels = buf.get(pos..pos + w * h).ok_or_else(|| Error::Format("truncated PGM".into()))?;
    Ok(GrayImage {
        pixels: Array2::from_shape_vec((h, w), pixels.to_vec()).expect("sized"),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes through a buffered file handle.
pub fn save(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load<T>(path: &Path, f: impl FnOnce(&mut BufReader<File>) -> Result<T>) -> Result<T> {
    f(&mut BufReader::new(File::open(path)?))
}

/// One-paragraph summary of a file's header, keyed on its magic.
pub fn describe(path: &Path) -> Result<String> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    let mut rest = r;
    match &magic {
        m if m == ECHO_MAGIC || m == RANGE_MAP_MAGIC => {
            let rows = get_u32(&mut rest)?;
            let cols = get_u32(&mut rest)?;
            let f0 = get_f64(&mut rest)?;
            let df = get_f64(&mut rest)?;
            let prf = get_f64(&mut rest)?;
            let kind = String::from_utf8_lossy(m);
            let mut s = format!(
                "{kind}: {rows} x {cols} complex, f0 = {f0} Hz, delta_f = {df} Hz, prf = {prf} Hz"
            );
            if m == RANGE_MAP_MAGIC {
                s.push_str(&format!(", bin_spacing = {} m", get_f64(&mut rest)?));
            }
            Ok(s)
        }
        m if m == CUBE_MAGIC => {
            let dims = (get_u32(&mut rest)?, get_u32(&mut rest)?, get_u32(&mut rest)?);
            Ok(format!("RDC1: L = {}, frames = {}, K = {}", dims.0, dims.1, dims.2))
        }
        [b'P', b'5', ..] => {
            let mut all = magic.to_vec();
            rest.read_to_end(&mut all)?;
            let img = read_pgm(&mut all.as_slice())?;
            Ok(format!("PGM: {} x {} gray", img.width(), img.height()))
        }
        _ => Err(Error::Format(format!(
            "unrecognized magic {:?}",
            String::from_utf8_lossy(&magic)
        ))),
    }
}
