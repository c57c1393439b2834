//! Deterministic initial curves.
//!
//! Random draws come from SplitMix64: the state advances by
//! `0x9E3779B97F4A7C15` and each output is mixed with multipliers
//! `0xBF58476D1CE4E5B9`, `0x94D049BB133111EB` and shifts 30, 27, 31. A draw
//! in `[0, 1)` takes the top 53 bits of one output.

use std::f64::consts::PI;
use std::path::PathBuf;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveSamples, MIN_SAMPLES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Shape {
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        phase: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `r(theta) = base_radius + amplitude cos(mode theta)`.
    PolarCosine {
        base_radius: f64,
        amplitude: f64,
        mode: u32,
    },
    /// `r(theta) = radius (1 + 2 Re sum_{k=1}^{max_mode} a_k e^{i k theta})`
    /// with `|a_k| < amplitude_decay^k`.
    FourierPerturbedCircle {
        radius: f64,
        seed: u64,
        max_mode: u32,
        amplitude_decay: f64,
    },
    FromFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    256
}

impl CurveSpec {
    pub fn new(shape: Shape, n: usize) -> Self {
        Self { shape, n }
    }

    pub fn label(&self) -> String {
        match &self.shape {
            Shape::Circle { radius, .. } => format!("circle(r={radius})"),
            Shape::Ellipse { a, b, .. } => format!("ellipse(a={a},b={b})"),
            Shape::PolarCosine { base_radius, amplitude, mode } => {
                format!("polar-cosine(r={base_radius},eps={amplitude},m={mode})")
            }
            Shape::FourierPerturbedCircle { radius, seed, max_mode, amplitude_decay } => {
                format!("perturbed-circle(r={radius},seed={seed},M={max_mode},q={amplitude_decay})")
            }
            Shape::FromFile { path } => format!("file({})", path.display()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::SpecInvalid(m));
        if self.n < MIN_SAMPLES || !self.n.is_multiple_of(2) {
            return invalid(format!("n = {} must be even and >= {MIN_SAMPLES}", self.n));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::SpecInvalid(format!("{name} = {v} must be positive")))
            }
        };
        match &self.shape {
            Shape::Circle { radius, center, phase } => {
                positive("radius", *radius)?;
                if !center.iter().chain([phase]).all(|v| v.is_finite()) {
                    return invalid("center and phase must be finite".into());
                }
            }
            Shape::Ellipse { a, b, center } => {
                positive("a", *a)?;
                positive("b", *b)?;
                if !center.iter().all(|v| v.is_finite()) {
                    return invalid("center must be finite".into());
                }
            }
            Shape::PolarCosine { base_radius, amplitude, mode } => {
                positive("base_radius", *base_radius)?;
                positive("amplitude", *amplitude)?;
                if amplitude >= base_radius {
                    return invalid(format!("amplitude {amplitude} must be below base_radius {base_radius}"));
                }
                if *mode == 0 || *mode as usize > self.n / 4 {
                    return invalid(format!("mode {mode} must lie in 1..={}", self.n / 4));
                }
            }
            Shape::FourierPerturbedCircle { radius, max_mode, amplitude_decay, .. } => {
                positive("radius", *radius)?;
                positive("amplitude_decay", *amplitude_decay)?;
                if *max_mode == 0 || *max_mode as usize > self.n / 4 {
                    return invalid(format!("max_mode {max_mode} must lie in 1..={}", self.n / 4));
                }
                let bound: f64 = (1..=*max_mode).map(|k| 2.0 * amplitude_decay.powi(k as i32)).sum();
                if bound >= 1.0 {
                    return invalid(format!("amplitude_decay {amplitude_decay} allows a non-positive radius"));
                }
            }
            Shape::FromFile { .. } => {}
        }
        Ok(())
    }
}

pub fn generate(spec: &CurveSpec) -> Result<CurveSamples> {
    spec.validate()?;
    let n = spec.n;
    let theta = |j: usize| 2.0 * PI * j as f64 / n as f64;
    let points: Vec<Complex64> = match &spec.shape {
        Shape::Circle { radius, center, phase } => {
            let c = Complex64::new(center[0], center[1]);
            (0..n).map(|j| c + Complex64::from_polar(*radius, theta(j) + phase)).collect()
        }
        Shape::Ellipse { a, b, center } => {
            (0..n).map(|j| Complex64::new(center[0] + a * theta(j).cos(), center[1] + b * theta(j).sin())).collect()
        }
        Shape::PolarCosine { base_radius, amplitude, mode } => (0..n)
            .map(|j| Complex64::from_polar(base_radius + amplitude * (*mode as f64 * theta(j)).cos(), theta(j)))
            .collect(),
        Shape::FourierPerturbedCircle { radius, seed, max_mode, amplitude_decay } => {
            let mut rng = SplitMix64::new(*seed);
            let modes: Vec<Complex64> = (1..=*max_mode)
                .map(|k| {
                    let mag = rng.next_f64() * amplitude_decay.powi(k as i32);
                    Complex64::from_polar(mag, 2.0 * PI * rng.next_f64())
                })
                .collect();
            (0..n)
                .map(|j| {
                    let t = theta(j);
                    let wobble: f64 = modes
                        .iter()
                        .enumerate()
                        .map(|(i, a)| 2.0 * (a * Complex64::from_polar(1.0, (i + 1) as f64 * t)).re)
                        .sum();
                    Complex64::from_polar(radius * (1.0 + wobble), t)
                })
                .collect()
        }
        Shape::FromFile { path } => return crate::io::read_curve(path),
    };
    CurveSamples::from_complex(points)
}

/// The twenty reference curves, all resolved at `n = 256`. Members 6 to 11
/// and 17 are nonconvex.
pub fn standard_corpus() -> Vec<CurveSpec> {
    let n = 256;
    let circle = |radius, center, phase| Shape::Circle { radius, center, phase };
    let ellipse = |a, b, center| Shape::Ellipse { a, b, center };
    let polar = |base_radius, amplitude, mode| Shape::PolarCosine { base_radius, amplitude, mode };
    let perturbed = |radius, seed, max_mode, amplitude_decay| Shape::FourierPerturbedCircle {
        radius,
        seed,
        max_mode,
        amplitude_decay,
    };
    [
        circle(1.0, [0.0, 0.0], 0.0),
        circle(2.5, [3.0, -1.0], 0.4),
        ellipse(2.0, 1.0, [0.0, 0.0]),
        ellipse(1.5, 1.0, [0.0, 0.0]),
        ellipse(2.5, 1.0, [1.0, 2.0]),
        ellipse(1.2, 1.0, [0.5, 0.5]),
        polar(1.0, 0.2, 3),
        polar(1.0, 0.15, 4),
        polar(1.0, 0.1, 5),
        polar(1.0, 0.3, 2),
        polar(2.0, 0.1, 6),
        polar(2.0, 0.3, 3),
        polar(1.0, 0.08, 3),
        polar(1.0, 0.15, 2),
        perturbed(1.0, 1, 4, 0.2),
        perturbed(1.0, 2, 8, 0.3),
        perturbed(2.0, 3, 6, 0.25),
        perturbed(0.5, 4, 3, 0.3),
        perturbed(1.0, 5, 8, 0.15),
        perturbed(1.5, 6, 5, 0.3),
    ]
    .into_iter()
    .map(|shape| CurveSpec::new(shape, n))
    .collect()
}

/// `count` perturbed circles whose parameters are drawn from `seed`: radius in
/// `[0.5, 2.5)`, `max_mode` in `3..=8` and `amplitude_decay` in `[0.1, 0.25)`.
pub fn perturbed_corpus(count: usize, seed: u64, n: usize) -> Vec<CurveSpec> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| {
            let radius = 0.5 + 2.0 * rng.next_f64();
            let max_mode = 3 + (rng.next_u64() % 6) as u32;
            let amplitude_decay = 0.1 + 0.15 * rng.next_f64();
            let seed = rng.next_u64();
            CurveSpec::new(Shape::FourierPerturbedCircle { radius, seed, max_mode, amplitude_decay }, n)
        })
        .collect()
}
