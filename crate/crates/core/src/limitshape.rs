//! Limit-circle extraction from Fourier modes 0 and 1, and the convergence
//! report built on top of a flow trace.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{self, ArcLengthCurve};
use crate::error::{Error, Result};
use crate::flow::{fit_series, DiagnosticsTrace};
use crate::fourier;
use crate::spectral::{synthesize_filtered, SpectralCoeffs};

/// Gap series that never rise above this are reported as converged, not fitted.
pub const GAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// Phase `sigma` in `[0, L)`.
    pub phase: f64,
    /// Sup norm of everything outside modes 0 and 1.
    pub rho_sup: f64,
}

impl CircleFit {
    pub fn center_c(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }
}

pub fn circle_fit(sc: &SpectralCoeffs) -> CircleFit {
    let root = sc.length().sqrt();
    let c = sc.coeff(0) / root;
    let a1 = sc.coeff(1) / root;
    let l = sc.length();
    let phase = (a1.arg() * l / (2.0 * PI)).rem_euclid(l);
    let rho = synthesize_filtered(sc, |k| k != 0 && k != 1);
    let rho_sup = rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
    CircleFit { center: [c.re, c.im], radius: a1.norm(), phase: if phase >= l { 0.0 } else { phase }, rho_sup }
}

/// Hausdorff distance between the enclosed region and a disk. Exact only when
/// the curve is star-shaped about the disk center; otherwise a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskDistance {
    pub distance: f64,
    pub star_shaped: bool,
}

pub fn hausdorff_to_disk(c: &ArcLengthCurve, fit: &CircleFit) -> DiskDistance {
    let center = fit.center_c();
    let tau = fourier::derivative(c.points(), c.length(), 1);
    let mut distance: f64 = 0.0;
    let mut star_shaped = true;
    for (p, t) in c.points().iter().zip(&tau) {
        let rel = p - center;
        distance = distance.max((rel.norm() - fit.radius).abs());
        // (f - c) . nu with nu = i tau; negative along the whole curve means every
        // ray from c leaves through the boundary once.
        if curve::dot(rel, Complex64::i() * t) >= 0.0 {
            star_shaped = false;
        }
    }
    DiskDistance { distance, star_shaped }
}

/// `A (b - c) = -(i/2) \int |f - c|^2 f' ds`.
pub fn barycenter_moment(c: &ArcLengthCurve, center: Complex64) -> Complex64 {
    let tau = fourier::derivative(c.points(), c.length(), 1);
    let r2: Vec<Complex64> = c.points().iter().map(|p| Complex64::new((p - center).norm_sqr(), 0.0)).collect();
    -0.5 * Complex64::i() * c.length() * fourier::mean_product(&r2, &tau)
}

/// Centroid of the enclosed region.
pub fn barycenter(c: &ArcLengthCurve) -> Result<[f64; 2]> {
    let area = curve::signed_area(c);
    if !(area > 0.0) {
        return Err(Error::NonPositiveArea { area });
    }
    let center = circle_fit(&crate::spectral::analyze(c)).center_c();
    let b = center + barycenter_moment(c, center) / area;
    Ok([b.re, b.im])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub center: Option<f64>,
    pub radius: Option<f64>,
    pub rho: Option<f64>,
    pub hausdorff: Option<f64>,
    pub barycenter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub r_gap_final: f64,
    pub rates: Rates,
    /// Time of the first row after which `kappa_min > 0` throughout.
    pub t_star_convex: Option<f64>,
    pub t_star_row: Option<usize>,
    pub flags: Vec<String>,
}

pub fn convergence_report(trace: &DiagnosticsTrace) -> Result<ConvergenceReport> {
    let rows = &trace.rows;
    let last = rows.last().ok_or_else(|| Error::InsufficientData("empty trace".into()))?;
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let mut flags = Vec::new();

    let mut rate = |name: &str, series: Vec<f64>| -> Option<f64> {
        if series.iter().all(|&v| v < GAP_FLOOR) {
            flags.push(format!("{name}: below {GAP_FLOOR:e} throughout"));
            return None;
        }
        match fit_series(&t, &series) {
            Ok(fit) => Some(fit.lambda),
            Err(e) => {
                flags.push(format!("{name}: {e}"));
                None
            }
        }
    };
    let center_end = Complex64::new(last.cx, last.cy);
    let rates = Rates {
        center: rate("center", rows.iter().map(|r| (Complex64::new(r.cx, r.cy) - center_end).norm()).collect()),
        radius: rate("radius", rows.iter().map(|r| (r.r_fit - last.r_fit).abs()).collect()),
        rho: rate("rho", rows.iter().map(|r| r.rho_sup).collect()),
        hausdorff: rate("hausdorff", rows.iter().map(|r| r.hausdorff).collect()),
        barycenter: rate("barycenter", rows.iter().map(|r| r.barycenter_gap).collect()),
    };

    let t_star_row = match rows.iter().rposition(|r| r.kappa_min <= 0.0) {
        None => Some(0),
        Some(i) if i + 1 < rows.len() => Some(i + 1),
        Some(_) => None,
    };
    if t_star_row.is_none() {
        flags.push("not convex at final row".into());
    }
    if rows.iter().any(|r| !r.star_shaped) {
        flags.push("hausdorff is a lower bound on rows that are not star-shaped".into());
    }
    Ok(ConvergenceReport {
        r_gap_final: (last.r_fit - last.length / (2.0 * PI)).abs(),
        rates,
        t_star_convex: t_star_row.map(|i| rows[i].t),
        t_star_row,
        flags,
    })
}
