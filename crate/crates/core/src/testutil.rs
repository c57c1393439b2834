use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::curve::{resample_arclength, ArcLengthCurve, CurveSamples};
use crate::fourier;

/// Samples `f` at `n` uniform parameter values and resamples to arc length.
pub fn sampled(n: usize, f: impl Fn(f64) -> Complex64) -> ArcLengthCurve {
    let raw = CurveSamples::from_complex((0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect()).unwrap();
    resample_arclength(&raw, n).unwrap()
}

/// Arc-length curve of length 2 pi with curvature `1 + eps cos(m s)`:
/// tangent angle `s + (eps/m) sin(m s)`, integrated spectrally.
pub fn prescribed_deviation(n: usize, eps: f64, m: f64) -> ArcLengthCurve {
    let tangent: Vec<Complex64> = (0..n)
        .map(|j| {
            let s = 2.0 * PI * j as f64 / n as f64;
            Complex64::from_polar(1.0, s + eps / m * (m * s).sin())
        })
        .collect();
    let mut spec = fourier::analyze(&tangent);
    assert!(spec[0].norm() < 1e-14);
    for (i, c) in spec.iter_mut().enumerate() {
        let k = fourier::wavenumber(i, n);
        *c = if k == 0 || i == n / 2 { Complex64::new(0.0, 0.0) } else { *c / Complex64::new(0.0, k as f64) };
    }
    ArcLengthCurve::from_uniform_samples(fourier::synthesize(&spec)).unwrap()
}
