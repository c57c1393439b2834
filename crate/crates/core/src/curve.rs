//! Closed plane curves: raw samples, uniform arc-length resampling and the
//! local geometry (frame, curvature) on the arc-length grid.
//!
//! Planar points are stored as complex numbers `x + i y`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, TrigSeries};

pub const MIN_SAMPLES: usize = 16;

/// Thresholds used when building curves and frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveTolerances {
    /// Minimum parametric speed, relative to the bounding-box diameter.
    pub degenerate_speed: f64,
    /// Allowed deviation of the rotation number from 1.
    pub rotation_number: f64,
}

impl Default for CurveTolerances {
    fn default() -> Self {
        Self { degenerate_speed: 1e-12, rotation_number: 1e-3 }
    }
}

/// Samples of a closed curve at uniform values of an arbitrary periodic
/// parameter. The closing point is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    points: Vec<Complex64>,
}

impl CurveSamples {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::from_complex(points.into_iter().map(|[x, y]| Complex64::new(x, y)).collect())
    }

    pub fn from_complex(points: Vec<Complex64>) -> Result<Self> {
        let n = points.len();
        if n < MIN_SAMPLES {
            return Err(Error::InvalidSamples(format!("need at least {MIN_SAMPLES} samples, got {n}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidSamples(format!("sample count must be even, got {n}")));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::NonFinite("curve samples"));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn to_xy(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p.re, p.im]).collect()
    }

    /// Signed enclosed area of the trigonometric interpolant (independent of
    /// the parametrization, negative for clockwise traversal).
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let c = fourier::analyze(&self.points);
        PI * c
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != n / 2)
            .map(|(i, c)| fourier::wavenumber(i, n) as f64 * c.norm_sqr())
            .sum::<f64>()
    }

    /// Same curve traversed in the opposite direction, starting at the same point.
    pub fn reversed(&self) -> Self {
        let n = self.points.len();
        Self { points: (0..n).map(|j| self.points[(n - j) % n]).collect() }
    }

    fn bbox_diameter(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &self.points {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        (x1 - x0).hypot(y1 - y0)
    }
}

/// A closed curve sampled at `N` points of uniform arc-length spacing `L / N`,
/// positively oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLengthCurve {
    points: Vec<Complex64>,
    length: f64,
    orientation_reversed: bool,
}

impl ArcLengthCurve {
    /// Wraps points that are already at uniform arc length. The length is the
    /// spectral quadrature of the parametric speed.
    pub fn from_uniform_samples(points: Vec<Complex64>) -> Result<Self> {
        let samples = CurveSamples::from_complex(points)?;
        let n = samples.len() as f64;
        let du = fourier::derivative(&samples.points, 2.0 * PI, 1);
        let length = 2.0 * PI * du.iter().map(|d| d.norm()).sum::<f64>() / n;
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::NonFinite("curve length"));
        }
        Ok(Self { points: samples.points, length, orientation_reversed: false })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `h = L / N`.
    pub fn spacing(&self) -> f64 {
        self.length / self.points.len() as f64
    }

    /// Whether the input was clockwise and got reversed on ingestion.
    pub fn orientation_reversed(&self) -> bool {
        self.orientation_reversed
    }

    pub fn to_samples(&self) -> CurveSamples {
        CurveSamples { points: self.points.clone() }
    }

    /// Image under `z -> scale * e^{i angle} z + shift`. Arc-length spacing is
    /// preserved, so no resampling is needed.
    pub fn transformed(&self, scale: f64, angle: f64, shift: Complex64) -> Self {
        let rot = Complex64::from_polar(scale, angle);
        Self {
            points: self.points.iter().map(|&p| rot * p + shift).collect(),
            length: self.length * scale,
            orientation_reversed: self.orientation_reversed,
        }
    }
}

/// Tangent, inward normal, curvature and curvature deviation on the arc-length grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFields {
    pub tau: Vec<Complex64>,
    pub nu: Vec<Complex64>,
    pub kappa: Vec<f64>,
    pub kappa_dev: Vec<f64>,
    pub rotation_number: f64,
}

pub fn resample_arclength(raw: &CurveSamples, n_out: usize) -> Result<ArcLengthCurve> {
    resample_arclength_with(raw, n_out, &CurveTolerances::default())
}

/// Resamples `raw` to `n_out` points of uniform arc-length spacing.
///
/// Cumulative arc length is the antiderivative of the trigonometric series of
/// the parametric speed; it is inverted by monotone cubic interpolation and
/// polished by Newton iteration on the series itself.
pub fn resample_arclength_with(raw: &CurveSamples, n_out: usize, tol: &CurveTolerances) -> Result<ArcLengthCurve> {
    if n_out < MIN_SAMPLES || !n_out.is_multiple_of(2) {
        return Err(Error::InvalidSamples(format!("output sample count {n_out} must be even and >= {MIN_SAMPLES}")));
    }
    let reversed = raw.signed_area() < 0.0;
    let owned;
    let raw = if reversed {
        owned = raw.reversed();
        &owned
    } else {
        raw
    };
    let n = raw.len();
    let two_pi = 2.0 * PI;

    let coeffs = fourier::analyze(&raw.points);
    let zu = fourier::synthesize(&fourier::differentiate_spectrum(&coeffs, two_pi, 1));
    let speed: Vec<f64> = zu.iter().map(|d| d.norm()).collect();
    let threshold = tol.degenerate_speed * raw.bbox_diameter();
    let min_speed = speed.iter().cloned().fold(f64::INFINITY, f64::min);
    if !min_speed.is_finite() {
        return Err(Error::NonFinite("parametric speed"));
    }
    if min_speed < threshold || min_speed == 0.0 {
        return Err(Error::DegenerateCurve { speed: min_speed, threshold });
    }

    // |z_u| is not band-limited; sample it finer so its series does not alias.
    let fine_speed: Vec<f64> = fourier::upsample(&zu, 4 * n).iter().map(|d| d.norm()).collect();
    let speed_series = TrigSeries::from_spectrum_above(&fourier::analyze_real(&fine_speed), 1e-16);
    let (anti, mean) = speed_series.antiderivative();
    let mean = mean.re;
    let length = two_pi * mean;
    let arc = |u: f64| mean * u + anti.eval(u).re;

    // Cumulative length at the input nodes, closed with S(2 pi) = L.
    let nodes: Vec<f64> = (0..=n).map(|j| two_pi * j as f64 / n as f64).collect();
    let mut cumulative: Vec<f64> = nodes[..n].iter().map(|&u| arc(u)).collect();
    cumulative[0] = 0.0;
    cumulative.push(length);
    if cumulative.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateCurve { speed: min_speed, threshold });
    }
    let inverse = MonotoneCubic::new(&cumulative, &nodes);

    let z_series = TrigSeries::from_spectrum(&coeffs);
    let mut points = Vec::with_capacity(n_out);
    for m in 0..n_out {
        let target = length * m as f64 / n_out as f64;
        let mut u = inverse.eval(target);
        for _ in 0..8 {
            let (a, da) = anti.eval_with_derivative(u);
            let step = (mean * u + a.re - target) / (mean + da.re);
            u -= step;
            if step.abs() <= 1e-15 * two_pi {
                break;
            }
        }
        points.push(z_series.eval(u));
    }
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) || !length.is_finite() {
        return Err(Error::NonFinite("resampled curve"));
    }
    Ok(ArcLengthCurve { points, length, orientation_reversed: reversed })
}

/// Piecewise cubic Hermite interpolant with Fritsch–Butland slopes; monotone
/// data give a monotone interpolant.
struct MonotoneCubic<'a> {
    x: &'a [f64],
    y: &'a [f64],
    slopes: Vec<f64>,
}

impl<'a> MonotoneCubic<'a> {
    fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let blend = |h0: f64, h1: f64, d0: f64, d1: f64| {
            if d0 * d1 <= 0.0 {
                0.0
            } else {
                3.0 * (h0 + h1) / ((2.0 * h1 + h0) / d0 + (h1 + 2.0 * h0) / d1)
            }
        };
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            slopes[i] = blend(h[i - 1], h[i], secant[i - 1], secant[i]);
        }
        // Periodic data: both ends see the same neighbours.
        let end = blend(h[n - 2], h[0], secant[n - 2], secant[0]);
        slopes[0] = end;
        slopes[n - 1] = end;
        Self { x, y, slopes }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[i]
            + (s3 - 2.0 * s2 + s) * h * self.slopes[i]
            + (-2.0 * s3 + 3.0 * s2) * self.y[i + 1]
            + (s3 - s2) * h * self.slopes[i + 1]
    }
}

/// Signed area `A = -1/2 \oint f . nu ds`.
pub fn signed_area(c: &ArcLengthCurve) -> f64 {
    let fs = fourier::derivative(&c.points, c.length, 1);
    let conj: Vec<Complex64> = c.points.iter().map(|p| p.conj()).collect();
    // f . nu = -(x y' - y x') = -Im(conj(f) f').
    0.5 * c.length * fourier::mean_product(&conj, &fs).im
}

pub fn frame_fields(c: &ArcLengthCurve) -> Result<FrameFields> {
    frame_fields_with(c, &CurveTolerances::default())
}

pub fn frame_fields_with(c: &ArcLengthCurve, tol: &CurveTolerances) -> Result<FrameFields> {
    let spectrum = fourier::analyze(&c.points);
    let tau = fourier::synthesize(&fourier::differentiate_spectrum(&spectrum, c.length, 1));
    let second = fourier::synthesize(&fourier::differentiate_spectrum(&spectrum, c.length, 2));
    let nu: Vec<Complex64> = tau.iter().map(|t| Complex64::i() * t).collect();
    let kappa: Vec<f64> = second.iter().zip(&nu).map(|(k, n)| dot(*k, *n)).collect();
    if kappa.iter().any(|k| !k.is_finite()) {
        return Err(Error::NonFinite("curvature"));
    }
    let rotation_number = c.spacing() * kappa.iter().sum::<f64>() / (2.0 * PI);
    if (rotation_number - 1.0).abs() > tol.rotation_number {
        return Err(Error::RotationNumberMismatch { rotation: rotation_number });
    }
    let mean = 2.0 * PI / c.length;
    let kappa_dev = kappa.iter().map(|k| k - mean).collect();
    Ok(FrameFields { tau, nu, kappa, kappa_dev, rotation_number })
}

/// `I_{-1} = 1 - 4 pi A / L^2`.
pub fn isoperimetric_deficit(c: &ArcLengthCurve) -> f64 {
    1.0 - 4.0 * PI * signed_area(c) / (c.length * c.length)
}

#[inline]
pub(crate) fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64) -> CurveSamples {
        CurveSamples::from_complex((0..n).map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64)).collect())
            .unwrap()
    }

    fn ellipse(n: usize, a: f64, b: f64) -> CurveSamples {
        CurveSamples::new(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    [a * t.cos(), b * t.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    /// Adaptive Simpson quadrature, used as an independent length oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    const ELLIPSE_2_1_LENGTH: f64 = 9.688448220547676;

    #[test]
    fn ellipse_length_oracle_is_frozen_correctly() {
        let l = adaptive_simpson(&|t: f64| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt(), 0.0, 2.0 * PI, 1e-13);
        assert!((l - ELLIPSE_2_1_LENGTH).abs() < 1e-11, "{l}");
    }

    #[test]
    fn unit_circle_length() {
        let c = resample_arclength(&circle(64, 1.0), 64).unwrap();
        assert!((c.length() - 2.0 * PI).abs() / (2.0 * PI) < 1e-10);
        assert!((signed_area(&c) - PI).abs() < 1e-12);
    }

    #[test]
    fn ellipse_length_area_and_deficit() {
        let c = resample_arclength(&ellipse(256, 2.0, 1.0), 256).unwrap();
        assert!((c.length() - ELLIPSE_2_1_LENGTH).abs() < 1e-10, "{}", c.length());
        assert!((signed_area(&c) - 2.0 * PI).abs() < 1e-10);
        let deficit = isoperimetric_deficit(&c);
        let expected = 1.0 - 8.0 * PI * PI / (ELLIPSE_2_1_LENGTH * ELLIPSE_2_1_LENGTH);
        assert!((deficit - expected).abs() < 1e-10);
        assert!((deficit - 0.15883).abs() < 1e-5);
    }

    #[test]
    fn circle_radius_two_area() {
        let c = resample_arclength(&circle(64, 2.0), 64).unwrap();
        assert!((signed_area(&c) - 4.0 * PI).abs() < 1e-11);
        assert!(isoperimetric_deficit(&c).abs() < 1e-14);
    }

    #[test]
    fn reversed_input_is_normalized() {
        let raw = ellipse(128, 2.0, 1.0);
        let rev = raw.reversed();
        assert!((raw.signed_area() + rev.signed_area()).abs() < 1e-12);
        assert!(rev.signed_area() < 0.0);
        let a = resample_arclength(&raw, 128).unwrap();
        let b = resample_arclength(&rev, 128).unwrap();
        assert!(!a.orientation_reversed());
        assert!(b.orientation_reversed());
        assert!((a.length() - b.length()).abs() < 1e-12);
        assert!((signed_area(&b) - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn chords_are_uniform_after_resampling() {
        let c = resample_arclength(&ellipse(256, 3.0, 1.0), 256).unwrap();
        let h = c.spacing();
        let n = c.n();
        let chords: Vec<f64> = (0..n).map(|j| (c.points()[(j + 1) % n] - c.points()[j]).norm()).collect();
        let (lo, hi) = chords.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        // Chord/arc ratio varies with curvature at O(h^2); that part is geometry.
        let frame = frame_fields(&c).unwrap();
        let kmax = frame.kappa.iter().cloned().fold(0.0, f64::max);
        assert!((hi - lo) <= 1e-6 * h + h * (kmax * h).powi(2) / 24.0, "{lo} {hi}");
        for t in &frame.tau {
            assert!((t.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn circle_frame() {
        let r = 1.7;
        let c = resample_arclength(&circle(64, r), 64).unwrap();
        let f = frame_fields(&c).unwrap();
        for (k, d) in f.kappa.iter().zip(&f.kappa_dev) {
            assert!((k - 1.0 / r).abs() < 1e-10);
            assert!(d.abs() < 1e-10);
        }
        assert!((f.rotation_number - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_curvature_at_vertex() {
        let c = resample_arclength(&ellipse(256, 2.0, 1.0), 256).unwrap();
        assert!((c.points()[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        let f = frame_fields(&c).unwrap();
        assert!((f.kappa[0] - 2.0).abs() < 1e-8, "{}", f.kappa[0]);
        let integral: f64 = c.spacing() * f.kappa_dev.iter().sum::<f64>();
        assert!(integral.abs() < 1e-8 * 2.0 * PI);
    }

    #[test]
    fn nonconvex_polar_curve() {
        let n = 256;
        let raw = CurveSamples::from_complex(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    Complex64::from_polar(1.0 + 0.5 * (3.0 * t).cos(), t)
                })
                .collect(),
        )
        .unwrap();
        let c = resample_arclength(&raw, n).unwrap();
        let f = frame_fields(&c).unwrap();
        // Closed-form polar curvature (r^2 + 2r'^2 - r r'') / (r^2 + r'^2)^{3/2}, densely sampled.
        let oracle_min = (0..20000)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 20000.0;
                let r = 1.0 + 0.5 * (3.0 * t).cos();
                let r1 = -1.5 * (3.0 * t).sin();
                let r2 = -4.5 * (3.0 * t).cos();
                (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(1.5)
            })
            .fold(f64::MAX, f64::min);
        assert!(oracle_min < 0.0);
        let kmin = f.kappa.iter().cloned().fold(f64::MAX, f64::min);
        assert!(kmin < 0.0);
        assert!((kmin - oracle_min).abs() < 0.05 * oracle_min.abs());
        assert!((f.rotation_number - 1.0).abs() < 1e-3);
    }

    #[test]
    fn figure_eight_has_rotation_number_zero() {
        let n = 128;
        let raw = CurveSamples::new(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    [t.sin(), (2.0 * t).sin() / 2.0]
                })
                .collect(),
        )
        .unwrap();
        let c = resample_arclength(&raw, n).unwrap();
        assert!(matches!(frame_fields(&c), Err(Error::RotationNumberMismatch { .. })));
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(CurveSamples::new(vec![[0.0, 0.0]; 8]), Err(Error::InvalidSamples(_))));
        assert!(matches!(CurveSamples::new(vec![[0.0, 0.0]; 17]), Err(Error::InvalidSamples(_))));
        let mut pts = vec![[1.0, 0.0]; 16];
        pts[3] = [f64::NAN, 0.0];
        assert!(matches!(CurveSamples::new(pts), Err(Error::NonFinite(_))));
        // A curve that stalls: x = cos^3, y = sin^3 has zero speed at four points.
        let n = 64;
        let astroid = CurveSamples::new(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    [t.cos().powi(3), t.sin().powi(3)]
                })
                .collect(),
        )
        .unwrap();
        assert!(matches!(resample_arclength(&astroid, n), Err(Error::DegenerateCurve { .. })));
    }

    #[test]
    fn spectral_convergence_of_length() {
        let errors: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&n| (resample_arclength(&ellipse(n, 2.0, 1.0), n).unwrap().length() - ELLIPSE_2_1_LENGTH).abs())
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] <= w[0] * 0.5 || w[1] < 1e-13, "{errors:?}");
        }
    }

    #[test]
    fn resampling_is_idempotent() {
        let c = resample_arclength(&ellipse(256, 2.0, 1.0), 256).unwrap();
        let again = resample_arclength(&c.to_samples(), 256).unwrap();
        let drift = c.points().iter().zip(again.points()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-8 * c.length(), "{drift}");
    }
}
