//! Scale-invariant curvature functionals and the isoperimetric-type
//! inequalities relating them.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{self, ArcLengthCurve, FrameFields};
use crate::error::{Error, Result};
use crate::fourier;
use crate::spectral::check_cap;

/// Denominators below this make the interpolation ratio meaningless.
pub const RATIO_DENOMINATOR_FLOOR: f64 = 1e-30;

/// Per-mode rounding floor of `kappa~`, in units of `(1 + k^2) 2 pi / L`.
/// Curvature comes from a second derivative, so its noise grows like `k^2`.
pub const KAPPA_NOISE_FLOOR: f64 = 1e-15;

/// Spectrum of `kappa~` (FFT order) with modes at rounding level zeroed.
fn clean_spectrum(l: f64, kappa_dev: &[f64]) -> Vec<Complex64> {
    let n = kappa_dev.len();
    let mut spectrum = fourier::analyze_real(kappa_dev);
    let unit = KAPPA_NOISE_FLOOR * 2.0 * PI / l;
    for (i, c) in spectrum.iter_mut().enumerate() {
        let k = fourier::wavenumber(i, n) as f64;
        if c.norm() < unit * (1.0 + k * k) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    spectrum
}

/// `I_l = L^{2l+1} \int |kappa~^{(l)}|^2 ds`.
pub fn i_ell(c: &ArcLengthCurve, frame: &FrameFields, ell: usize) -> Result<f64> {
    check_cap(c.n(), ell)?;
    Ok(i_ell_spectral(c.length(), &clean_spectrum(c.length(), &frame.kappa_dev), ell))
}

fn i_ell_spectral(l: f64, spectrum: &[Complex64], ell: usize) -> f64 {
    let n = spectrum.len();
    let base = 2.0 * PI / l;
    let energy: f64 = spectrum
        .iter()
        .enumerate()
        .filter(|&(i, _)| ell == 0 || i != n / 2)
        .map(|(i, c)| (base * fourier::wavenumber(i, n) as f64).powi(2 * ell as i32) * c.norm_sqr())
        .sum();
    l.powi(2 * ell as i32 + 2) * energy
}

/// `J_{k,p} = (L^{(1+k)p-1} \int |kappa~^{(k)}|^p ds)^{1/p}`.
pub fn j_kp(c: &ArcLengthCurve, frame: &FrameFields, k: usize, p: f64) -> Result<f64> {
    check_cap(c.n(), k)?;
    if !(p >= 2.0) {
        return Err(Error::Malformed(format!("J_kp needs p >= 2, got {p}")));
    }
    let l = c.length();
    let spectrum = fourier::differentiate_spectrum(&clean_spectrum(l, &frame.kappa_dev), l, k as u32);
    let fine = fourier::synthesize_real(&fourier::resize_spectrum(&spectrum, 4 * c.n()));
    let integral = l * fine.iter().map(|v| v.abs().powf(p)).sum::<f64>() / fine.len() as f64;
    Ok((l.powf((1.0 + k as f64) * p - 1.0) * integral).powf(1.0 / p))
}

/// `L^3 \int (kappa^3 kappa~ + kappa~'^2) ds` together with the same integral
/// taken over absolute values, which sets the rounding scale.
pub fn g_integral(c: &ArcLengthCurve, frame: &FrameFields) -> (f64, f64) {
    let l = c.length();
    let spectrum = clean_spectrum(l, &frame.kappa_dev);
    g_from_spectrum(l, &spectrum)
}

fn g_from_spectrum(l: f64, spectrum: &[Complex64]) -> (f64, f64) {
    let m = 4 * spectrum.len();
    let kappa_dev = fourier::synthesize_real(&fourier::resize_spectrum(spectrum, m));
    let mean = 2.0 * PI / l;
    let (mut cubic, mut cubic_abs) = (0.0, 0.0);
    for d in &kappa_dev {
        let v = (mean + d).powi(3) * d;
        cubic += v;
        cubic_abs += v.abs();
    }
    let slope = i_ell_spectral(l, spectrum, 1) / l.powi(3);
    let l3 = l.powi(3);
    (l3 * (l * cubic / m as f64 + slope), l3 * (l * cubic_abs / m as f64 + slope))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRatio {
    pub ell: usize,
    pub m: usize,
    /// `None` when the curve is round to rounding precision.
    pub ratio: Option<f64>,
}

/// Length, area, the functionals of one curve and its inequality margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDiagnostics {
    pub length: f64,
    pub area: f64,
    pub deficit: f64,
    pub i_ell: Vec<f64>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub thm1_margin: f64,
    #[serde(rename = "thm2_G")]
    pub thm2_g: f64,
    pub thm2_margin: f64,
    pub thm3_ratios: Vec<InterpolationRatio>,
    /// Absolute-value version of `thm2_G`, the yardstick for its sign check.
    #[serde(skip)]
    pub thm2_scale: f64,
}

impl CurveDiagnostics {
    pub fn compute(c: &ArcLengthCurve, frame: &FrameFields, ell_max: usize) -> Result<Self> {
        check_cap(c.n(), ell_max)?;
        let l = c.length();
        let area = curve::signed_area(c);
        let deficit = 1.0 - 4.0 * PI * area / (l * l);
        let spectrum = clean_spectrum(l, &frame.kappa_dev);
        let i_ell: Vec<f64> = (0..=ell_max).map(|ell| i_ell_spectral(l, &spectrum, ell)).collect();
        let (kappa_min, kappa_max) =
            frame.kappa.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
        let (thm2_g, thm2_scale) = g_from_spectrum(l, &spectrum);
        let mut diag = Self {
            length: l,
            area,
            deficit,
            thm1_margin: i_ell[0] / (8.0 * PI * PI) - deficit,
            thm2_margin: (deficit * thm2_g).max(0.0).sqrt() - i_ell[0],
            i_ell,
            kappa_min,
            kappa_max,
            thm2_g,
            thm3_ratios: Vec::new(),
            thm2_scale,
        };
        for m in 1..=ell_max {
            for ell in 0..m {
                let ratio = check_theorem3(&diag, ell, m).ok();
                diag.thm3_ratios.push(InterpolationRatio { ell, m, ratio });
            }
        }
        Ok(diag)
    }

    pub fn ratio(&self, ell: usize, m: usize) -> Option<f64> {
        self.thm3_ratios.iter().find(|r| r.ell == ell && r.m == m).and_then(|r| r.ratio)
    }
}

/// `I_0 / (8 pi^2) - I_{-1}`, non-negative for every curve.
pub fn check_theorem1(diag: &CurveDiagnostics) -> f64 {
    diag.thm1_margin
}

/// `(G, sqrt(I_{-1} G) - I_0)` with `G = L^3 \int (kappa^3 kappa~ + kappa~'^2) ds`.
pub fn check_theorem2(diag: &CurveDiagnostics) -> (f64, f64) {
    (diag.thm2_g, diag.thm2_margin)
}

/// `I_l / (I_{-1}^{(m-l)/2} I_m + I_{-1}^{(m-l)/(m+1)} I_m^{(l+1)/(m+1)})`,
/// an empirical lower bound on the interpolation constant `C(l, m)`.
pub fn check_theorem3(diag: &CurveDiagnostics, ell: usize, m: usize) -> Result<f64> {
    if ell > m || m >= diag.i_ell.len() {
        return Err(Error::DerivativeCapExceeded { requested: m.max(ell), cap: diag.i_ell.len().saturating_sub(1) });
    }
    let deficit = diag.deficit.max(0.0);
    let im = diag.i_ell[m].max(0.0);
    let gap = (m - ell) as f64;
    let denominator = deficit.powf(gap / 2.0) * im
        + deficit.powf(gap / (m as f64 + 1.0)) * im.powf((ell as f64 + 1.0) / (m as f64 + 1.0));
    if !(denominator > RATIO_DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateRatio { denominator });
    }
    Ok(diag.i_ell[ell] / denominator)
}

/// Sign checks on a [`CurveDiagnostics`], at the rounding slack each quantity allows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityChecks {
    pub isoperimetric: bool,
    pub deficit_bound: bool,
    pub deficit_bound_weak: bool,
    pub g_nonnegative: bool,
    pub product_bound: bool,
    pub wirtinger: bool,
    pub functionals_nonnegative: bool,
}

impl InequalityChecks {
    pub fn evaluate(diag: &CurveDiagnostics) -> Self {
        let i0 = diag.i_ell[0];
        let slack = 1e-10;
        Self {
            isoperimetric: diag.deficit >= -slack,
            deficit_bound: diag.thm1_margin >= -slack,
            deficit_bound_weak: diag.deficit <= i0 / (4.0 * PI * PI) + slack,
            g_nonnegative: diag.thm2_g >= -slack * diag.thm2_scale.max(1.0),
            product_bound: diag.thm2_margin >= -1e-8 * i0 - slack,
            wirtinger: diag.i_ell.get(1).is_none_or(|&i1| i0 <= i1 / (4.0 * PI * PI) * (1.0 + 1e-8) + slack),
            functionals_nonnegative: diag.i_ell.iter().all(|&v| v >= 0.0),
        }
    }

    /// Names of the checks that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("isoperimetric", self.isoperimetric),
            ("deficit_bound", self.deficit_bound),
            ("deficit_bound_weak", self.deficit_bound_weak),
            ("g_nonnegative", self.g_nonnegative),
            ("product_bound", self.product_bound),
            ("wirtinger", self.wirtinger),
            ("functionals_nonnegative", self.functionals_nonnegative),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}
