//! FFT plumbing shared by the geometric modules.
//!
//! All spectra here are *normalized* DFT coefficients in FFT order: index `i`
//! holds wavenumber [`wavenumber(i, n)`], and a periodic function sampled at
//! `n` uniform points is `u(x_j) = sum_k c_k exp(2 pi i k j / n)`. The Nyquist
//! index `n/2` is read as `k = -n/2` and is treated as the symmetric cosine
//! mode when interpolating; it is dropped by every derivative.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plans>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        if let Some(p) = cache.get(&n) {
            return p.clone();
        }
        let p = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
        cache.insert(n, p.clone());
        p
    })
}

/// Signed wavenumber of FFT index `i` on an `n`-point grid, in `[-n/2, n/2)`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index holding wavenumber `k` on an `n`-point grid.
#[inline]
pub fn index_of(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Normalized forward transform.
pub fn analyze(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    plans(n).0.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`analyze`].
pub fn synthesize(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    plans(buf.len()).1.process(&mut buf);
    buf
}

pub fn analyze_real(samples: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    analyze(&buf)
}

pub fn synthesize_real(coeffs: &[Complex64]) -> Vec<f64> {
    synthesize(coeffs).into_iter().map(|c| c.re).collect()
}

/// Multiplies a spectrum by `(2 pi i k / period)^order`, zeroing the Nyquist mode.
pub fn differentiate_spectrum(coeffs: &[Complex64], period: f64, order: u32) -> Vec<Complex64> {
    let n = coeffs.len();
    if order == 0 {
        return coeffs.to_vec();
    }
    let base = 2.0 * PI / period;
    let factor = Complex64::i().powu(order);
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if n.is_multiple_of(2) && i == n / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let k = wavenumber(i, n) as f64;
            c * factor * (base * k).powi(order as i32)
        })
        .collect()
}

pub fn derivative(samples: &[Complex64], period: f64, order: u32) -> Vec<Complex64> {
    synthesize(&differentiate_spectrum(&analyze(samples), period, order))
}

pub fn derivative_real(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    synthesize_real(&differentiate_spectrum(&analyze_real(samples), period, order))
}

/// Zero-pads (or truncates) a spectrum to `m` modes, splitting the Nyquist
/// coefficient symmetrically so the trigonometric interpolant is preserved.
pub fn resize_spectrum(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    if m >= n {
        for (i, &c) in coeffs.iter().enumerate() {
            if n.is_multiple_of(2) && i == n / 2 {
                if m > n {
                    out[index_of(-(n as i64) / 2, m)] += 0.5 * c;
                    out[index_of(n as i64 / 2, m)] += 0.5 * c;
                } else {
                    out[i] = c;
                }
            } else {
                out[index_of(wavenumber(i, n), m)] = c;
            }
        }
    } else {
        let half = (m / 2) as i64;
        for (i, &c) in coeffs.iter().enumerate() {
            let k = wavenumber(i, n);
            if k > -half && k < half {
                out[index_of(k, m)] = c;
            }
        }
    }
    out
}

/// Trigonometric interpolant of `samples` evaluated on an `m`-point grid.
pub fn upsample(samples: &[Complex64], m: usize) -> Vec<Complex64> {
    synthesize(&resize_spectrum(&analyze(samples), m))
}

pub fn upsample_real(samples: &[f64], m: usize) -> Vec<f64> {
    synthesize_real(&resize_spectrum(&analyze_real(samples), m))
}

/// Pointwise product of two band-limited fields computed on a doubled grid
/// and truncated back to the original `n` modes (Nyquist dropped).
pub fn dealiased_product(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let m = 2 * n;
    let ua = upsample(a, m);
    let ub = upsample(b, m);
    let prod: Vec<Complex64> = ua.iter().zip(&ub).map(|(x, y)| x * y).collect();
    synthesize(&resize_spectrum(&analyze(&prod), n))
}

/// Mean over one period of `a * b`, exact for the trigonometric interpolants.
pub fn mean_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let m = 2 * a.len();
    let ua = upsample(a, m);
    let ub = upsample(b, m);
    ua.iter().zip(&ub).map(|(x, y)| x * y).sum::<Complex64>() / m as f64
}

/// Zeroes every coefficient smaller than `floor(k)`.
pub fn chop(coeffs: &[Complex64], floor: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let n = coeffs.len();
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| if c.norm() < floor(wavenumber(i, n) as f64) { Complex64::new(0.0, 0.0) } else { c })
        .collect()
}

/// Trigonometric series `sum_k c_k e^{i k x}` for evaluation at arbitrary `x`.
///
/// Modes beyond the last coefficient above `1e-18 * max|c|` are dropped, which
/// changes values only at the level of rounding.
#[derive(Debug, Clone)]
pub struct TrigSeries {
    positive: Vec<Complex64>,
    negative: Vec<Complex64>,
    nyquist: Option<(f64, Complex64)>,
}

impl TrigSeries {
    pub fn from_spectrum(coeffs: &[Complex64]) -> Self {
        Self::from_spectrum_above(coeffs, 1e-18)
    }

    /// Drops the modes above the last one exceeding `rel_floor` times the largest.
    pub fn from_spectrum_above(coeffs: &[Complex64], rel_floor: f64) -> Self {
        let n = coeffs.len();
        let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = rel_floor * cmax;
        let mut nyquist = None;
        let mut last = 0usize;
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm() <= floor {
                continue;
            }
            if n.is_multiple_of(2) && i == n / 2 {
                nyquist = Some(((n / 2) as f64, *c));
            } else {
                last = last.max(wavenumber(i, n).unsigned_abs() as usize);
            }
        }
        let positive =
            (0..=last).map(|k| if k < n.div_ceil(2) { coeffs[k] } else { Complex64::new(0.0, 0.0) }).collect();
        let negative =
            (0..=last)
                .map(|k| {
                    if k == 0 || k >= n.div_ceil(2) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        coeffs[index_of(-(k as i64), n)]
                    }
                })
                .collect();
        Self { positive, negative, nyquist }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, x);
        let wc = w.conj();
        let mut p = Complex64::new(1.0, 0.0);
        let mut q = Complex64::new(1.0, 0.0);
        let mut acc = self.positive[0];
        for k in 1..self.positive.len() {
            p *= w;
            q *= wc;
            acc += self.positive[k] * p + self.negative[k] * q;
        }
        if let Some((k, c)) = self.nyquist {
            acc += c * (k * x).cos();
        }
        acc
    }

    /// Value and first derivative at `x`.
    pub fn eval_with_derivative(&self, x: f64) -> (Complex64, Complex64) {
        let w = Complex64::from_polar(1.0, x);
        let wc = w.conj();
        let mut p = Complex64::new(1.0, 0.0);
        let mut q = Complex64::new(1.0, 0.0);
        let mut acc = self.positive[0];
        let mut dacc = Complex64::new(0.0, 0.0);
        for k in 1..self.positive.len() {
            p *= w;
            q *= wc;
            let a = self.positive[k] * p;
            let b = self.negative[k] * q;
            acc += a + b;
            dacc += (a - b) * k as f64;
        }
        let mut slope = Complex64::i() * dacc;
        if let Some((k, c)) = self.nyquist {
            acc += c * (k * x).cos();
            slope -= c * k * (k * x).sin();
        }
        (acc, slope)
    }

    /// Antiderivative with zero value at `x = 0`, excluding the mean term.
    pub fn antiderivative(&self) -> (Self, Complex64) {
        let mean = self.positive[0];
        let div = |c: Complex64, k: f64| c / Complex64::new(0.0, k);
        let positive: Vec<Complex64> = self
            .positive
            .iter()
            .enumerate()
            .map(|(k, &c)| if k == 0 { Complex64::new(0.0, 0.0) } else { div(c, k as f64) })
            .collect();
        let negative: Vec<Complex64> = self
            .negative
            .iter()
            .enumerate()
            .map(|(k, &c)| if k == 0 { Complex64::new(0.0, 0.0) } else { div(c, -(k as f64)) })
            .collect();
        // cos(kx) integrates to sin(kx)/k, which is not a single exponential.
        let mut anti = Self { positive, negative, nyquist: None };
        if let Some((k, c)) = self.nyquist {
            // sin(kx) = (e^{ikx} - e^{-ikx}) / 2i, folded into the top mode.
            let top = k as usize;
            if anti.positive.len() <= top {
                anti.positive.resize(top + 1, Complex64::new(0.0, 0.0));
                anti.negative.resize(top + 1, Complex64::new(0.0, 0.0));
            }
            let s = c / k / Complex64::new(0.0, 2.0);
            anti.positive[top] += s;
            anti.negative[top] -= s;
        }
        let offset = anti.eval(0.0);
        anti.positive[0] = -offset;
        (anti, mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
    }

    #[test]
    fn derivative_of_trig_polynomial() {
        let n = 32;
        let f: Vec<f64> = grid(n).map(|x| (3.0 * x).sin() + 0.5 * (5.0 * x).cos()).collect();
        let d = derivative_real(&f, 2.0 * PI, 1);
        for (x, v) in grid(n).zip(d) {
            let exact = 3.0 * (3.0 * x).cos() - 2.5 * (5.0 * x).sin();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn series_value_and_slope() {
        let n = 16;
        let f: Vec<f64> = grid(n).map(|x| (3.0 * x).sin() + 0.5 * (8.0 * x).cos()).collect();
        let s = TrigSeries::from_spectrum(&analyze_real(&f));
        let x = 0.37;
        let (v, d) = s.eval_with_derivative(x);
        assert!((v - s.eval(x)).norm() < 1e-14);
        assert!((v.re - (3.0 * x).sin() - 0.5 * (8.0 * x).cos()).abs() < 1e-13);
        assert!((d.re - 3.0 * (3.0 * x).cos() + 4.0 * (8.0 * x).sin()).abs() < 1e-12);
    }

    #[test]
    fn upsample_preserves_interpolant() {
        let n = 16;
        let f: Vec<Complex64> = grid(n).map(|x| Complex64::from_polar(1.0, 2.0 * x) + 0.3).collect();
        let up = upsample(&f, 64);
        for (j, v) in up.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 64.0;
            let exact = Complex64::from_polar(1.0, 2.0 * x) + 0.3;
            assert!((v - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn series_eval_matches_samples_and_antiderivative() {
        let n = 16;
        let f: Vec<f64> = grid(n).map(|x| 2.0 + x.cos() + 0.25 * (8.0 * x).cos()).collect();
        let series = TrigSeries::from_spectrum(&analyze_real(&f));
        for (x, v) in grid(n).zip(&f) {
            assert!((series.eval(x).re - v).abs() < 1e-13);
        }
        let (anti, mean) = series.antiderivative();
        assert!((mean.re - 2.0).abs() < 1e-14);
        let x: f64 = 0.7;
        let exact = x.sin() + 0.25 * (8.0 * x).sin() / 8.0;
        assert!((anti.eval(x).re - exact).abs() < 1e-13);
    }

    #[test]
    fn dealiased_product_is_exact_for_bandlimited_factors() {
        let n = 16;
        let a: Vec<Complex64> = grid(n).map(|x| Complex64::from_polar(1.0, 3.0 * x)).collect();
        let b: Vec<Complex64> = grid(n).map(|x| Complex64::from_polar(1.0, -3.0 * x)).collect();
        let m = mean_product(&a, &b);
        assert!((m - 1.0).norm() < 1e-14);
        let p = dealiased_product(&a, &a);
        for (x, v) in grid(n).zip(p) {
            assert!((v - Complex64::from_polar(1.0, 6.0 * x)).norm() < 1e-13);
        }
    }
}
