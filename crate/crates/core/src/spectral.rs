//! Fourier side of the curve: coefficients against the orthonormal basis
//! `phi_k(s) = L^{-1/2} exp(2 pi i k s / L)`, the `F_l` recurrence, power
//! moments `sum k^l |f^(k)|^2` and the identities tying them to curvature
//! integrals.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{self, ArcLengthCurve, FrameFields};
use crate::error::{Error, Result};
use crate::fourier;

/// Relative magnitude the highest quarter of the band must stay below.
pub const RESOLUTION_TAIL: f64 = 1e-10;

/// Dimensionless functionals below this are indistinguishable from rounding.
pub const FUNCTIONAL_NOISE_FLOOR: f64 = 1e-13;

/// Fourier coefficients `f^(k)` for `k` in `[-N/2, N/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    coeffs: Vec<Complex64>,
    length: f64,
    under_resolved: bool,
}

impl SpectralCoeffs {
    /// Builds a coefficient set from explicit `(k, f^(k))` pairs on an `n`-mode grid.
    pub fn from_modes(n: usize, length: f64, modes: &[(i64, Complex64)]) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        let half = (n / 2) as i64;
        for &(k, c) in modes {
            assert!((-half..half).contains(&k), "mode {k} outside [-{half}, {half})");
            coeffs[(k + half) as usize] += c;
        }
        let under_resolved = tail_ratio(&coeffs) > RESOLUTION_TAIL;
        Self { coeffs, length, under_resolved }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Coefficients ordered by wavenumber, starting at `k = -N/2`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let half = (self.n() / 2) as i64;
        if (-half..half).contains(&k) {
            self.coeffs[(k + half) as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `(k, f^(k))` pairs, Nyquist mode excluded.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = (self.n() / 2) as i64;
        self.coeffs.iter().enumerate().skip(1).map(move |(i, &c)| (i as i64 - half, c))
    }

    /// Set when the top quarter of the band holds more than
    /// `RESOLUTION_TAIL * max |f^(k)|`.
    pub fn under_resolved(&self) -> bool {
        self.under_resolved
    }

    /// Samples `f(s_j) = sum_k f^(k) phi_k(s_j)` on the uniform grid.
    pub fn synthesize(&self) -> Vec<Complex64> {
        synthesize_filtered(self, |_| true)
    }

    /// Weighted sum `sum_k w(k) |f^(k)|^2` over represented modes.
    pub fn weighted_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        self.modes().map(|(k, c)| weight(k as f64) * c.norm_sqr()).sum()
    }
}

fn tail_ratio(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    let half = (n / 2) as i64;
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let cutoff = 3 * n as i64 / 8;
    let tail = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as i64 - half).abs() >= cutoff)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    tail / max
}

pub(crate) fn synthesize_filtered(sc: &SpectralCoeffs, keep: impl Fn(i64) -> bool) -> Vec<Complex64> {
    let n = sc.n();
    let half = (n / 2) as i64;
    let scale = 1.0 / sc.length.sqrt();
    let mut fft_order = vec![Complex64::new(0.0, 0.0); n];
    for (i, &c) in sc.coeffs.iter().enumerate() {
        let k = i as i64 - half;
        if keep(k) {
            fft_order[fourier::index_of(k, n)] = c * scale;
        }
    }
    fourier::synthesize(&fft_order)
}

/// `f^(k) = \int f conj(phi_k) ds`, evaluated as `(L/N) sum_j f(s_j) conj(phi_k(s_j))`.
pub fn analyze(c: &ArcLengthCurve) -> SpectralCoeffs {
    let n = c.n();
    let half = n / 2;
    let raw = fourier::analyze(c.points());
    let scale = c.length().sqrt();
    let coeffs: Vec<Complex64> = (0..n).map(|i| raw[fourier::index_of(i as i64 - half as i64, n)] * scale).collect();
    let under_resolved = tail_ratio(&coeffs) > RESOLUTION_TAIL;
    SpectralCoeffs { coeffs, length: c.length(), under_resolved }
}

/// Highest derivative order supported at `n` samples: `floor(log2 n) - 3`.
pub fn derivative_cap(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()).saturating_sub(3) as usize
}

pub(crate) fn check_cap(n: usize, requested: usize) -> Result<()> {
    let cap = derivative_cap(n);
    if requested > cap {
        return Err(Error::DerivativeCapExceeded { requested, cap });
    }
    Ok(())
}

/// `F_l = f^{(l-1)} conj(f')` for `l = 1 ..= ell_max + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FSequence {
    values: Vec<Vec<Complex64>>,
}

impl FSequence {
    /// Samples of `F_ell` (1-based, matching the usual indexing).
    pub fn get(&self, ell: usize) -> &[Complex64] {
        &self.values[ell - 1]
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }
}

/// Builds `F_1 = f.tau + i f.nu` and `F_l = i kappa F_{l-1} + F_{l-1}'`.
///
/// `F_1` and `kappa` are cleared of rounding-level modes first; each step
/// differentiates, so any noise left in them grows by a factor `pi N / L`.
pub fn f_sequence(c: &ArcLengthCurve, frame: &FrameFields, ell_max: usize) -> Result<FSequence> {
    check_cap(c.n(), ell_max)?;
    let kappa_spec = fourier::analyze_real(&frame.kappa);
    let kappa_floor = 1e-15 * 2.0 * PI / c.length();
    let ikappa: Vec<Complex64> = fourier::synthesize_real(&fourier::chop(&kappa_spec, |k| kappa_floor * (1.0 + k * k)))
        .into_iter()
        .map(|k| Complex64::new(0.0, k))
        .collect();
    let f1_spec = fourier::analyze(&fourier::dealiased_product(c.points(), &conj_all(&frame.tau)));
    let scale = f1_spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut values = Vec::with_capacity(ell_max + 1);
    values.push(fourier::synthesize(&fourier::chop(&f1_spec, |k| 1e-15 * scale * (1.0 + k.abs()))));
    for _ in 1..=ell_max {
        let prev = values.last().unwrap();
        let product = fourier::dealiased_product(&ikappa, prev);
        let deriv = fourier::derivative(prev, c.length(), 1);
        values.push(product.iter().zip(&deriv).map(|(a, b)| a + b).collect());
    }
    Ok(FSequence { values })
}

fn conj_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

/// `sum_k k^ell |f^(k)|^2`.
pub fn moment_sum(sc: &SpectralCoeffs, ell: u32) -> f64 {
    sc.weighted_sum(|k| k.powi(ell as i32))
}

/// `(I_{-1}, I_0)` from `(4 pi^2 / L^3) sum k(k-1)|f^|^2` and
/// `(16 pi^4 / L^3) sum k^3(k-1)|f^|^2`.
pub fn deficit_sums(sc: &SpectralCoeffs) -> (f64, f64) {
    let l3 = sc.length.powi(3);
    let deficit = 4.0 * PI * PI / l3 * sc.weighted_sum(|k| k * (k - 1.0));
    let i0 = 16.0 * PI.powi(4) / l3 * sc.weighted_sum(|k| k.powi(3) * (k - 1.0));
    (deficit, i0)
}

/// `(2 pi^2 / L^3) sum k(k-2)(k-1)(k+1)|f^|^2`, the gap `I_0/(8 pi^2) - I_{-1}`.
pub fn deficit_gap_spectral(sc: &SpectralCoeffs) -> f64 {
    2.0 * PI * PI / sc.length.powi(3) * sc.weighted_sum(|k| k * (k - 2.0) * (k - 1.0) * (k + 1.0))
}

/// `(L / 2 pi)^6 \int (kappa^3 kappa~ + kappa~'^2) ds` written as `sum k^5 (k-1) |f^|^2`.
pub fn g_integral_spectral(sc: &SpectralCoeffs) -> f64 {
    sc.weighted_sum(|k| k.powi(5) * (k - 1.0))
}

/// Relative mismatches between the Fourier side and the curvature side of
/// each moment identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub ser1: f64,
    pub ser2: f64,
    pub ser3: f64,
    pub ser4: f64,
    pub ser5: f64,
    pub ser6: f64,
    /// Keyed by the power `l` as a string, `"2"` through `"6"`.
    pub prop22: BTreeMap<String, f64>,
    pub thm1_residual_identity: f64,
}

impl IdentityResiduals {
    pub fn ser(&self) -> [f64; 6] {
        [self.ser1, self.ser2, self.ser3, self.ser4, self.ser5, self.ser6]
    }

    /// Largest mismatch over every reported identity.
    pub fn max(&self) -> f64 {
        self.ser()
            .into_iter()
            .chain(self.prop22.values().copied())
            .chain(std::iter::once(self.thm1_residual_identity))
            .fold(0.0, f64::max)
    }
}

/// Relative mismatch; two sides that both lie below `floor` count as equal.
pub(crate) fn rel_mismatch(a: f64, b: f64, floor: f64) -> f64 {
    let size = a.abs().max(b.abs());
    if size < floor {
        0.0
    } else {
        (a - b).abs() / size
    }
}

/// Evaluates both sides of the six moment identities, of the general moment
/// identity for `l = 2..6`, and of the spectral form of `I_0 / (8 pi^2) - I_{-1}`.
pub fn identity_residuals(c: &ArcLengthCurve, frame: &FrameFields, sc: &SpectralCoeffs) -> IdentityResiduals {
    let l = c.length();
    let n = c.n();
    let r = l / (2.0 * PI);
    let area = curve::signed_area(c);

    let up = fourier::upsample_real(&frame.kappa, 4 * n);
    let kappa_power = |p: i32| l * up.iter().map(|k| k.powi(p)).sum::<f64>() / up.len() as f64;
    let kappa_prime = fourier::derivative_real(&frame.kappa, l, 1);
    let kp: Vec<Complex64> = kappa_prime.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let kappa_prime_sq = l * fourier::mean_product(&kp, &kp).re;

    let curvature_side = [
        l * area / PI,
        r * r * l,
        r.powi(3) * kappa_power(1),
        r.powi(4) * kappa_power(2),
        r.powi(5) * kappa_power(3),
        r.powi(6) * (kappa_power(4) + kappa_prime_sq),
    ];
    let ser: Vec<f64> = (1..=6)
        .map(|ell| rel_mismatch(moment_sum(sc, ell), curvature_side[ell as usize - 1], f64::MIN_POSITIVE))
        .collect();

    let mut prop22 = BTreeMap::new();
    // Needs F_1..F_5; skipped on grids too coarse for a fourth derivative.
    if let Ok(fseq) = f_sequence(c, frame, 4) {
        let kappa_c: Vec<Complex64> = frame.kappa.iter().map(|&k| Complex64::new(k, 0.0)).collect();
        for ell in 2..=6u32 {
            let integral = l * fourier::mean_product(&kappa_c, fseq.get(ell as usize - 1));
            let coeff = -Complex64::i().powi(1 - ell as i32) * r.powi(ell as i32);
            let rhs = coeff * integral;
            let lhs = moment_sum(sc, ell);
            prop22.insert(ell.to_string(), (rhs - lhs).norm() / lhs.abs().max(rhs.norm()));
        }
    }

    let kd: Vec<Complex64> = frame.kappa_dev.iter().map(|&k| Complex64::new(k, 0.0)).collect();
    let i0 = l * l * fourier::mean_product(&kd, &kd).re;
    let deficit = 1.0 - 4.0 * PI * area / (l * l);
    let direct_gap = i0 / (8.0 * PI * PI) - deficit;
    let thm1_residual_identity = rel_mismatch(direct_gap, deficit_gap_spectral(sc), FUNCTIONAL_NOISE_FLOOR);

    IdentityResiduals {
        ser1: ser[0],
        ser2: ser[1],
        ser3: ser[2],
        ser4: ser[3],
        ser5: ser[4],
        ser6: ser[5],
        prop22,
        thm1_residual_identity,
    }
}
