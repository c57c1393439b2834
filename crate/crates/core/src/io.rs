//! Curve files: JSON with `samples` or `fourier` entries, or headerless x,y CSV.

use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::CurveSamples;
use crate::error::{Error, Result};
use crate::spectral::SpectralCoeffs;

/// Grid used when a Fourier file does not name one.
pub const DEFAULT_FOURIER_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierEntry {
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveFile {
    Samples {
        samples: Vec<[f64; 2]>,
    },
    Fourier {
        fourier: Vec<FourierEntry>,
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

impl CurveFile {
    pub fn from_samples(c: &CurveSamples) -> Self {
        CurveFile::Samples { samples: c.to_xy() }
    }

    pub fn from_spectrum(sc: &SpectralCoeffs) -> Self {
        CurveFile::Fourier {
            fourier: sc.modes().map(|(k, c)| FourierEntry { k, re: c.re, im: c.im }).collect(),
            length: sc.length(),
            n: Some(sc.n()),
        }
    }

    pub fn into_samples(self) -> Result<CurveSamples> {
        match self {
            CurveFile::Samples { samples } => CurveSamples::new(samples),
            CurveFile::Fourier { fourier, length, n } => {
                let n = n.unwrap_or(DEFAULT_FOURIER_GRID);
                if !(length > 0.0 && length.is_finite()) {
                    return Err(Error::Malformed(format!("length {length} must be positive")));
                }
                if n < 2 || n % 2 != 0 {
                    return Err(Error::Malformed(format!("grid size {n} must be even")));
                }
                let half = (n / 2) as i64;
                if let Some(e) = fourier.iter().find(|e| e.k <= -half || e.k >= half) {
                    return Err(Error::Malformed(format!("mode {} does not fit a grid of {n}", e.k)));
                }
                let modes: Vec<(i64, Complex64)> = fourier.iter().map(|e| (e.k, Complex64::new(e.re, e.im))).collect();
                CurveSamples::from_complex(SpectralCoeffs::from_modes(n, length, &modes).synthesize())
            }
        }
    }
}

pub fn parse_curve_json(text: &str) -> Result<CurveSamples> {
    let file: CurveFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    file.into_samples()
}

pub fn parse_curve_csv(text: &str) -> Result<CurveSamples> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(|s| s.trim().parse::<f64>());
        match (cols.next(), cols.next(), cols.next()) {
            (Some(Ok(x)), Some(Ok(y)), None) => points.push([x, y]),
            _ => return Err(Error::Malformed(format!("line {}: expected two numeric columns", i + 1))),
        }
    }
    CurveSamples::new(points)
}

/// Reads a curve, choosing CSV for a `.csv` extension and JSON otherwise.
pub fn read_curve(path: &Path) -> Result<CurveSamples> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_curve_csv(&text)
    } else {
        parse_curve_json(&text)
    }
}

pub fn curve_to_json(c: &CurveSamples) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CurveFile::from_samples(c))?)
}

pub fn curve_to_csv(c: &CurveSamples) -> String {
    c.to_xy().iter().map(|[x, y]| format!("{x:e},{y:e}\n")).collect()
}

pub fn write_curve(path: &Path, c: &CurveSamples) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        curve_to_csv(c)
    } else {
        curve_to_json(c)?
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::resample_arclength;
    use crate::spectral::analyze;
    use std::f64::consts::PI;

    fn circle(n: usize) -> CurveSamples {
        CurveSamples::from_complex((0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect())
            .unwrap()
    }

    #[test]
    fn json_and_csv_round_trip() {
        let c = circle(32);
        assert_eq!(parse_curve_json(&curve_to_json(&c).unwrap()).unwrap(), c);
        assert_eq!(parse_curve_csv(&curve_to_csv(&c)).unwrap(), c);
    }

    #[test]
    fn fourier_form() {
        let l = 2.0 * PI;
        let text = format!(r#"{{"fourier": [{{"k": 1, "re": {}, "im": 0.0}}], "length": {l}, "n": 64}}"#, l.sqrt());
        let c = parse_curve_json(&text).unwrap();
        assert_eq!(c.len(), 64);
        assert!(c.points().iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));

        let arc = resample_arclength(&circle(64), 64).unwrap();
        let back = CurveFile::from_spectrum(&analyze(&arc)).into_samples().unwrap();
        assert!(back.points().iter().zip(arc.points()).all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_curve_json("{\"points\": []}"), Err(Error::Malformed(_))));
        assert!(matches!(parse_curve_csv("1,2\n3\n"), Err(Error::Malformed(_))));
        assert!(parse_curve_json(r#"{"fourier": [{"k": 40, "re": 1, "im": 0}], "length": 1, "n": 64}"#).is_err());
    }
}
