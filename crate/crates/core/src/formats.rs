//! On-disk formats: far-field matrices (`BIHFAR1`), indicator fields (CSV),
//! grayscale heatmaps (PGM), spectra (CSV) and run manifests (JSON).

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{spectrum_label, ExperimentConfig, Residuals, RunOutcome};
use crate::forward::FarFieldMatrix;
use crate::indicators::{IndicatorField, IndicatorMeta};
use crate::linalg::CMatrix;

pub const FARFIELD_MAGIC: &str = "BIHFAR1";
const PGM_MAXVAL: u32 = 65535;

/// `BIHFAR1 N kappa`, then one line per row with `re im` pairs in 17
/// significant digits.
pub fn format_farfield(f: &FarFieldMatrix) -> String {
    let n = f.n();
    let mut s = String::with_capacity(n * n * 48 + 64);
    let _ = writeln!(s, "{FARFIELD_MAGIC} {n} {}", f.kappa);
    for row in f.entries.rows() {
        let mut first = true;
        for z in row {
            if !first {
                s.push(' ');
            }
            first = false;
            let _ = write!(s, "{:.16e} {:.16e}", z.re, z.im);
        }
        s.push('\n');
    }
    s
}

pub fn parse_farfield(reader: impl Read) -> Result<FarFieldMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty far-field file".into()))??;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(FARFIELD_MAGIC) {
        return Err(Error::Parse(format!("expected `{FARFIELD_MAGIC}` header, got `{header}`")));
    }
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad direction count in header `{header}`")))?;
    let kappa: f64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad wavenumber in header `{header}`")))?;
    if parts.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in header `{header}`")));
    }
    let mut entries = CMatrix::zeros((n, n));
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {} of {n}", i + 1)))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: `{t}`: {e}", i + 1))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * n {
            return Err(Error::Parse(format!(
                "row {} has {} numbers, expected {}",
                i + 1,
                vals.len(),
                2 * n
            )));
        }
        for j in 0..n {
            entries[[i, j]] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    if let Some(extra) = lines.next() {
        if !extra?.trim().is_empty() {
            return Err(Error::Parse("unexpected data after the last row".into()));
        }
    }
    FarFieldMatrix::new(entries, kappa)
}

pub fn read_farfield(path: &Path) -> Result<FarFieldMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
    parse_farfield(file).map_err(|e| e.context(format!("reading {}", path.display())))
}

pub fn write_farfield(path: &Path, f: &FarFieldMatrix) -> Result<()> {
    write_text(path, &format_farfield(f))
}

/// CSV `x,y,value` in grid order; counts are written as integers.
pub fn format_field_csv(field: &IndicatorField) -> String {
    let count = field.meta.method.is_count();
    let mut s = String::with_capacity(field.values.len() * 40 + 16);
    s.push_str("x,y,value\n");
    for (p, v) in field.grid.points().zip(&field.values) {
        if count {
            let _ = writeln!(s, "{},{},{}", p.x, p.y, *v as u64);
        } else {
            let _ = writeln!(s, "{},{},{:.16e}", p.x, p.y, v);
        }
    }
    s
}

/// Plain PGM (`P2`), maxval 65535, top row at `ymax`; linear gray scale
/// between the field minimum and maximum (all zeros for a constant field).
pub fn format_pgm(field: &IndicatorField) -> String {
    let g = &field.grid;
    let (lo, hi) = field
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    let gray = |v: f64| -> u32 {
        if !(span > 0.0) || !span.is_finite() {
            0
        } else {
            (f64::from(PGM_MAXVAL) * (v - lo) / span).round().clamp(0.0, f64::from(PGM_MAXVAL)) as u32
        }
    };
    let mut s = String::with_capacity(g.len() * 6 + 32);
    let _ = writeln!(s, "P2\n{} {}\n{PGM_MAXVAL}", g.nx, g.ny);
    for iy in (0..g.ny).rev() {
        let row = &field.values[iy * g.nx..(iy + 1) * g.nx];
        let line: Vec<String> = row.iter().map(|&v| gray(v).to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn format_spectrum_csv(values: &[f64]) -> String {
    let mut s = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{:.16e}", i + 1, v);
    }
    s
}

/// Parameters, residuals and outputs of one run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub config: &'a ExperimentConfig,
    pub indicator: &'a IndicatorMeta,
    pub directions: usize,
    pub kappa: f64,
    /// Residuals of the noise-free simulated matrix, when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals_clean: Option<Residuals>,
    /// Residuals of the matrix the indicator was computed from.
    pub residuals_data: Residuals,
    pub spectrum: &'static str,
    pub field_min: f64,
    pub field_max: f64,
    pub outputs: Vec<String>,
}

/// Paths written by [`write_outcome`].
#[derive(Clone, Debug, Default)]
pub struct ArtifactPaths {
    pub farfield: Option<PathBuf>,
    pub farfield_noisy: Option<PathBuf>,
    pub field: PathBuf,
    pub heatmap: PathBuf,
    pub spectrum: PathBuf,
    pub manifest: PathBuf,
}

/// Name of the noisy matrix next to the clean one: `farfield.txt` →
/// `farfield_noisy.txt`.
pub fn noisy_name(clean: &str) -> String {
    match clean.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_noisy.{ext}"),
        None => format!("{clean}_noisy"),
    }
}

/// Writes the far-field matrices of a run: the clean matrix, and the noisy
/// one when noise was applied.
pub fn write_farfields(dir: &Path, outcome: &RunOutcome) -> Result<(Option<PathBuf>, Option<PathBuf>)> {
    fs::create_dir_all(dir)?;
    let out = &outcome.config.output;
    let Some(clean) = &outcome.clean else {
        return Ok((None, None));
    };
    let p = dir.join(&out.farfield);
    write_farfield(&p, clean)?;
    let noisy = if outcome.config.noise.delta > 0.0 {
        let q = dir.join(noisy_name(&out.farfield));
        write_farfield(&q, &outcome.data)?;
        Some(q)
    } else {
        None
    };
    Ok((Some(p), noisy))
}

/// Writes every artifact of a run into `dir`.
pub fn write_outcome(dir: &Path, outcome: &RunOutcome) -> Result<ArtifactPaths> {
    let out = &outcome.config.output;
    let (farfield, farfield_noisy) = write_farfields(dir, outcome)?;
    let paths = ArtifactPaths {
        farfield,
        farfield_noisy,
        field: dir.join(&out.field),
        heatmap: dir.join(&out.heatmap),
        spectrum: dir.join(&out.spectrum),
        manifest: dir.join(&out.manifest),
    };
    write_text(&paths.field, &format_field_csv(&outcome.field))?;
    write_text(&paths.heatmap, &format_pgm(&outcome.field))?;
    write_text(&paths.spectrum, &format_spectrum_csv(&outcome.spectrum))?;

    let (lo, hi) = outcome
        .field
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut outputs: Vec<String> = [&paths.farfield, &paths.farfield_noisy]
        .into_iter()
        .flatten()
        .chain([&paths.field, &paths.heatmap, &paths.spectrum])
        .map(|p| file_name(p))
        .collect();
    outputs.push(file_name(&paths.manifest));
    let manifest = Manifest {
        config: &outcome.config,
        indicator: &outcome.field.meta,
        directions: outcome.data.n(),
        kappa: outcome.data.kappa,
        residuals_clean: outcome.clean.as_ref().map(Residuals::of),
        residuals_data: Residuals::of(&outcome.data),
        spectrum: spectrum_label(outcome.field.meta.method),
        field_min: lo,
        field_max: hi,
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    write_text(&paths.manifest, &(json + "\n"))?;
    Ok(paths)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::make_grid;
    use crate::indicators::Method;
    use proptest::prelude::*;

    fn meta(method: Method) -> IndicatorMeta {
        IndicatorMeta {
            method,
            alpha: None,
            threshold: None,
            h: None,
            convention: None,
        }
    }

    #[test]
    fn farfield_header() {
        let f = FarFieldMatrix::new(CMatrix::zeros((8, 8)), std::f64::consts::TAU).unwrap();
        let s = format_farfield(&f);
        assert!(s.starts_with("BIHFAR1 8 6.283185307179586\n"));
        assert_eq!(s.lines().count(), 9);
    }

    #[test]
    fn farfield_parse_errors() {
        assert!(parse_farfield("BIHFAR2 2 1.0\n".as_bytes()).is_err());
        assert!(parse_farfield("BIHFAR1 2 1.0\n1 2 3 4\n".as_bytes()).is_err());
        assert!(parse_farfield("BIHFAR1 2 1.0\n1 2 3\n1 2 3 4\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn farfield_round_trip_is_exact(
            vals in proptest::collection::vec(-1e3f64..1e3, 2 * 8 * 8),
            scale in -30i32..30,
            kappa in 0.1f64..50.0,
        ) {
            let m = 10f64.powi(scale);
            let e = CMatrix::from_shape_fn((8, 8), |(i, j)| {
                Complex64::new(vals[2 * (8 * i + j)] * m, vals[2 * (8 * i + j) + 1] * m)
            });
            let f = FarFieldMatrix::new(e, kappa).unwrap();
            let g = parse_farfield(format_farfield(&f).as_bytes()).unwrap();
            prop_assert_eq!(f, g);
        }
    }

    #[test]
    fn csv_layout() {
        let grid = make_grid([0.0, 1.0, 0.0, 2.0], 2, 3).unwrap();
        let field = IndicatorField { grid, values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], meta: meta(Method::W3) };
        let s = format_field_csv(&field);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines[1], "0,0,1");
        assert_eq!(lines[2], "1,0,2");
        assert_eq!(lines[3], "0,1,3");
    }

    #[test]
    fn pgm_orientation_and_scaling() {
        let grid = make_grid([0.0, 1.0, 0.0, 1.0], 2, 2).unwrap();
        let field = IndicatorField { grid: grid.clone(), values: vec![0.0, 1.0, 2.0, 4.0], meta: meta(Method::W1) };
        let s = format_pgm(&field);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(&lines[..3], &["P2", "2 2", "65535"]);
        // Top row is y = ymax: values 2 and 4.
        assert_eq!(lines[3], "32768 65535");
        assert_eq!(lines[4], "0 16384");
        let flat = IndicatorField { grid, values: vec![3.0; 4], meta: meta(Method::W1) };
        assert!(format_pgm(&flat).lines().skip(3).all(|l| l == "0 0"));
    }

    proptest! {
        #[test]
        fn pgm_is_monotone(vals in proptest::collection::vec(-1e6f64..1e6, 12)) {
            let grid = make_grid([0.0, 1.0, 0.0, 1.0], 4, 3).unwrap();
            let field = IndicatorField { grid, values: vals.clone(), meta: meta(Method::W1) };
            let s = format_pgm(&field);
            let mut grays = Vec::new();
            for line in s.lines().skip(3).collect::<Vec<_>>().into_iter().rev() {
                grays.extend(line.split(' ').map(|t| t.parse::<u32>().unwrap()));
            }
            for i in 0..12 {
                for j in 0..12 {
                    if vals[i] < vals[j] {
                        prop_assert!(grays[i] <= grays[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn noisy_names() {
        assert_eq!(noisy_name("farfield.txt"), "farfield_noisy.txt");
        assert_eq!(noisy_name("ff"), "ff_noisy");
    }
}
