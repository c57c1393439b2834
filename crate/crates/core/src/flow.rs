//! Explicit integration of the non-local curvature flow
//! `f_t = kappa - (L / 2A) nu` and the area-preserving flow `f_t = kappa~ nu`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{self, resample_arclength, ArcLengthCurve, CurveSamples, FrameFields};
use crate::error::{Error, Result};
use crate::fourier;
use crate::functionals;
use crate::limitshape::{self, circle_fit};
use crate::spectral::{self, deficit_sums, derivative_cap};

/// Samples below this are dropped before taking logarithms.
pub const FIT_FLOOR: f64 = 1e-12;

/// Minimum number of rows in a decay fit.
pub const MIN_FIT_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    /// `f_t = kappa - (L / 2A) nu`.
    #[serde(rename = "jiang-pan", alias = "nonlocal-curvature")]
    NonlocalCurvature,
    /// `f_t = kappa~ nu`.
    AreaPreserving,
}

impl FlowKind {
    pub fn name(self) -> &'static str {
        match self {
            FlowKind::NonlocalCurvature => "jiang-pan",
            FlowKind::AreaPreserving => "area-preserving",
        }
    }
}

impl std::str::FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jiang-pan" | "nonlocal-curvature" => Ok(FlowKind::NonlocalCurvature),
            "area-preserving" => Ok(FlowKind::AreaPreserving),
            other => Err(Error::Malformed(format!("unknown flow kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub curve: ArcLengthCurve,
    pub t: f64,
    pub step_count: u64,
}

impl FlowState {
    pub fn new(curve: ArcLengthCurve) -> Self {
        Self { curve, t: 0.0, step_count: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub n: usize,
    pub ell_max: usize,
    /// `dt = dt_safety * h^2` with `h = L / N`.
    pub dt_safety: f64,
    pub t_end: f64,
    /// Accepted steps between recorded rows.
    pub record_interval: usize,
    pub stop_tolerance: f64,
    pub max_halvings: u32,
    /// Relative growth of `L` tolerated in one area-preserving step.
    pub length_growth_tolerance: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            n: 256,
            ell_max: 3,
            dt_safety: 0.2,
            t_end: 10.0,
            record_interval: 10,
            stop_tolerance: 1e-10,
            max_halvings: 20,
            length_growth_tolerance: 1e-10,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.dt_safety, self.t_end, self.stop_tolerance];
        if self.n < curve::MIN_SAMPLES || !self.n.is_multiple_of(2) {
            return Err(Error::Malformed(format!("n = {} must be even and >= {}", self.n, curve::MIN_SAMPLES)));
        }
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.record_interval == 0 {
            return Err(Error::Malformed(
                "dt_safety, t_end, stop_tolerance and record_interval must be positive".into(),
            ));
        }
        if self.ell_max > derivative_cap(self.n) {
            return Err(Error::DerivativeCapExceeded { requested: self.ell_max, cap: derivative_cap(self.n) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    DeficitBelowTolerance,
    EndTime,
    StiffnessFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    pub deficit: f64,
    pub i_ell: Vec<f64>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub dadt_pred: f64,
    pub dldt_pred: f64,
    pub cx: f64,
    pub cy: f64,
    pub r_fit: f64,
    pub sigma_fit: f64,
    pub rho_sup: f64,
    pub hausdorff: f64,
    pub star_shaped: bool,
    pub barycenter_gap: f64,
    /// `sum_{k != 0, 1} |f^(k)|^2`.
    pub residual_energy: f64,
}

impl TraceRow {
    pub fn compute(kind: FlowKind, c: &ArcLengthCurve, t: f64, ell_max: usize) -> Result<Self> {
        let frame = curve::frame_fields(c)?;
        let sc = spectral::analyze(c);
        let l = c.length();
        let area = curve::signed_area(c);
        // Spectral form of 1 - 4 pi A / L^2: non-negative weights, no cancellation.
        let (deficit, _) = deficit_sums(&sc);
        let i_ell = (0..=ell_max).map(|ell| functionals::i_ell(c, &frame, ell)).collect::<Result<Vec<_>>>()?;
        let (kappa_min, kappa_max) =
            frame.kappa.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
        let h = c.spacing();
        let (dadt_pred, dldt_pred) = match kind {
            FlowKind::NonlocalCurvature => {
                let k2: f64 = h * frame.kappa.iter().map(|k| k * k).sum::<f64>();
                (l * l * deficit / (2.0 * area), -k2 + PI * l / area)
            }
            FlowKind::AreaPreserving => (0.0, -h * frame.kappa_dev.iter().map(|k| k * k).sum::<f64>()),
        };
        let fit = circle_fit(&sc);
        let disk = limitshape::hausdorff_to_disk(c, &fit);
        let barycenter_gap = limitshape::barycenter_moment(c, fit.center_c()).norm();
        let residual_energy = sc.modes().filter(|&(k, _)| k != 0 && k != 1).map(|(_, v)| v.norm_sqr()).sum();
        let row = Self {
            t,
            length: l,
            area,
            deficit,
            i_ell,
            kappa_min,
            kappa_max,
            dadt_pred,
            dldt_pred,
            cx: fit.center[0],
            cy: fit.center[1],
            r_fit: fit.radius,
            sigma_fit: fit.phase,
            rho_sup: fit.rho_sup,
            hausdorff: disk.distance,
            star_shaped: disk.star_shaped,
            barycenter_gap,
            residual_energy,
        };
        if row.csv_values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trace row"));
        }
        Ok(row)
    }

    fn csv_values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.length, self.area, self.deficit];
        v.extend(&self.i_ell);
        v.extend([
            self.kappa_min,
            self.kappa_max,
            self.dadt_pred,
            self.dldt_pred,
            self.cx,
            self.cy,
            self.r_fit,
            self.sigma_fit,
            self.rho_sup,
            self.hausdorff,
            self.barycenter_gap,
        ]);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsTrace {
    pub kind: FlowKind,
    pub n: usize,
    pub ell_max: usize,
    pub rows: Vec<TraceRow>,
    pub stop_reason: StopReason,
    pub steps: u64,
    pub halvings: u64,
    pub orientation_reversed: bool,
}

impl DiagnosticsTrace {
    pub fn csv_header(ell_max: usize) -> Vec<String> {
        let mut h: Vec<String> = ["t", "L", "A", "I_m1"].iter().map(|s| s.to_string()).collect();
        h.extend((0..=ell_max).map(|l| format!("I_{l}")));
        h.extend(
            [
                "kappa_min",
                "kappa_max",
                "dAdt_pred",
                "dLdt_pred",
                "cx",
                "cy",
                "r_fit",
                "sigma_fit",
                "rho_sup",
                "hausdorff",
                "barycenter_gap",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.ell_max).join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.csv_values().iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn series(&self, q: Quantity) -> Vec<f64> {
        let last = self.rows.last();
        self.rows
            .iter()
            .map(|r| match q {
                Quantity::Deficit => r.deficit,
                Quantity::IsoperimetricGap => r.length * r.length * r.deficit,
                Quantity::I(ell) => r.i_ell.get(ell).copied().unwrap_or(f64::NAN),
                Quantity::Length => r.length,
                Quantity::Area => r.area,
                Quantity::CenterGap => {
                    let l = last.expect("non-empty");
                    (r.cx - l.cx).hypot(r.cy - l.cy)
                }
                Quantity::RadiusGap => (r.r_fit - last.expect("non-empty").r_fit).abs(),
                Quantity::RhoSup => r.rho_sup,
                Quantity::Hausdorff => r.hausdorff,
                Quantity::BarycenterGap => r.barycenter_gap,
            })
            .collect()
    }
}

/// Selects a trace series for [`fit_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Deficit,
    /// `L^2 - 4 pi A`.
    IsoperimetricGap,
    I(usize),
    Length,
    Area,
    CenterGap,
    RadiusGap,
    RhoSup,
    Hausdorff,
    BarycenterGap,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Deficit => write!(f, "I_m1"),
            Quantity::IsoperimetricGap => write!(f, "iso_gap"),
            Quantity::I(ell) => write!(f, "I_{ell}"),
            Quantity::Length => write!(f, "L"),
            Quantity::Area => write!(f, "A"),
            Quantity::CenterGap => write!(f, "center_gap"),
            Quantity::RadiusGap => write!(f, "radius_gap"),
            Quantity::RhoSup => write!(f, "rho_sup"),
            Quantity::Hausdorff => write!(f, "hausdorff"),
            Quantity::BarycenterGap => write!(f, "barycenter_gap"),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I_m1" | "deficit" => Quantity::Deficit,
            "iso_gap" => Quantity::IsoperimetricGap,
            "L" => Quantity::Length,
            "A" => Quantity::Area,
            "center_gap" => Quantity::CenterGap,
            "radius_gap" => Quantity::RadiusGap,
            "rho_sup" => Quantity::RhoSup,
            "hausdorff" => Quantity::Hausdorff,
            "barycenter_gap" => Quantity::BarycenterGap,
            other => match other.strip_prefix("I_").and_then(|d| d.parse().ok()) {
                Some(ell) => Quantity::I(ell),
                None => return Err(Error::Malformed(format!("unknown quantity {other:?}"))),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda: f64,
    pub c0: f64,
    pub window: (f64, f64),
    pub rms_residual: f64,
    pub samples: usize,
}

/// Least-squares line through `log y` against `t` over the later half of the
/// samples that sit above [`FIT_FLOOR`].
pub fn fit_series(t: &[f64], y: &[f64]) -> Result<DecayFit> {
    let usable: Vec<(f64, f64)> = t.iter().zip(y).filter(|(_, &v)| v > FIT_FLOOR).map(|(&a, &b)| (a, b.ln())).collect();
    let window = &usable[usable.len() / 2..];
    if window.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData(format!(
            "{} rows above {FIT_FLOOR:e} in the late window, need {MIN_FIT_ROWS}",
            window.len()
        )));
    }
    fit_log_linear(window)
}

fn fit_log_linear(points: &[(f64, f64)]) -> Result<DecayFit> {
    let n = points.len() as f64;
    let tm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - tm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("fit window has no time spread".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let rms = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit {
        lambda: -slope,
        c0: intercept.exp(),
        window: (points[0].0, points[points.len() - 1].0),
        rms_residual: rms,
        samples: points.len(),
    })
}

pub fn fit_decay(trace: &DiagnosticsTrace, q: Quantity) -> Result<DecayFit> {
    fit_series(&trace.times(), &trace.series(q))
}

/// Velocity of the flow at the samples of an arc-length curve.
pub fn velocity(kind: FlowKind, c: &ArcLengthCurve, frame: &FrameFields, area: f64) -> Result<Vec<Complex64>> {
    if !(area > 0.0) {
        return Err(Error::NonPositiveArea { area });
    }
    let offset = match kind {
        FlowKind::NonlocalCurvature => c.length() / (2.0 * area),
        FlowKind::AreaPreserving => 2.0 * PI / c.length(),
    };
    Ok(frame.kappa.iter().zip(&frame.nu).map(|(k, n)| (k - offset) * n).collect())
}

/// Same field on a curve sampled at uniform values of any parameter `u` in `[0, 2 pi)`.
fn parametric_velocity(kind: FlowKind, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let spectrum = fourier::analyze(z);
    let zu = fourier::synthesize(&fourier::differentiate_spectrum(&spectrum, 2.0 * PI, 1));
    let zuu = fourier::synthesize(&fourier::differentiate_spectrum(&spectrum, 2.0 * PI, 2));
    let n = z.len() as f64;
    let speed: Vec<f64> = zu.iter().map(|d| d.norm()).collect();
    let length = 2.0 * PI * speed.iter().sum::<f64>() / n;
    let conj: Vec<Complex64> = z.iter().map(|p| p.conj()).collect();
    let area = PI * fourier::mean_product(&conj, &zu).im;
    if !(area > 0.0) {
        return Err(Error::NonPositiveArea { area });
    }
    let offset = match kind {
        FlowKind::NonlocalCurvature => length / (2.0 * area),
        FlowKind::AreaPreserving => 2.0 * PI / length,
    };
    Ok(zu
        .iter()
        .zip(&zuu)
        .zip(&speed)
        .map(|((d1, d2), &s)| {
            let kappa = (d1.conj() * d2).im / (s * s * s);
            let nu = Complex64::i() * d1 / s;
            (kappa - offset) * nu
        })
        .collect())
}

/// One RK4 step followed by resampling to uniform arc length.
pub fn step(state: &FlowState, kind: FlowKind, dt: f64) -> Result<FlowState> {
    step_with(state, kind, dt, FlowConfig::default().length_growth_tolerance)
}

fn step_with(state: &FlowState, kind: FlowKind, dt: f64, growth_tol: f64) -> Result<FlowState> {
    let reject = |e: Error| Error::StepRejected(e.to_string());
    let z0 = state.curve.points();
    let axpy = |a: f64, k: &[Complex64]| -> Vec<Complex64> { z0.iter().zip(k).map(|(z, v)| z + a * v).collect() };
    let k1 = parametric_velocity(kind, z0).map_err(reject)?;
    let k2 = parametric_velocity(kind, &axpy(0.5 * dt, &k1)).map_err(reject)?;
    let k3 = parametric_velocity(kind, &axpy(0.5 * dt, &k2)).map_err(reject)?;
    let k4 = parametric_velocity(kind, &axpy(dt, &k3)).map_err(reject)?;
    let z: Vec<Complex64> =
        (0..z0.len()).map(|j| z0[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
    let raw = CurveSamples::from_complex(z).map_err(reject)?;
    let curve = resample_arclength(&raw, z0.len()).map_err(reject)?;
    if curve.orientation_reversed() {
        return Err(Error::StepRejected("orientation flipped".into()));
    }
    if kind == FlowKind::AreaPreserving && curve.length() > state.curve.length() * (1.0 + growth_tol) {
        return Err(Error::StepRejected(format!(
            "length grew from {:e} to {:e}",
            state.curve.length(),
            curve.length()
        )));
    }
    Ok(FlowState { curve, t: state.t + dt, step_count: state.step_count + 1 })
}

/// Runs the flow from `initial` until `t_end` or until the deficit drops
/// below the stop tolerance, recording a row every `record_interval` steps.
pub fn simulate(initial: &CurveSamples, kind: FlowKind, config: &FlowConfig) -> Result<DiagnosticsTrace> {
    config.validate()?;
    let start = resample_arclength(initial, config.n)?;
    let mut trace = DiagnosticsTrace {
        kind,
        n: config.n,
        ell_max: config.ell_max,
        rows: Vec::new(),
        stop_reason: StopReason::EndTime,
        steps: 0,
        halvings: 0,
        orientation_reversed: start.orientation_reversed(),
    };
    let area = curve::signed_area(&start);
    if !(area > 0.0) {
        return Err(Error::NonPositiveArea { area });
    }
    let mut state = FlowState::new(start);
    trace.rows.push(TraceRow::compute(kind, &state.curve, 0.0, config.ell_max)?);
    let mut deficit = trace.rows[0].deficit;
    let mut since_record = 0;

    while deficit >= config.stop_tolerance && state.t < config.t_end {
        let h = state.curve.spacing();
        let mut dt = (config.dt_safety * h * h).min(config.t_end - state.t);
        let mut attempt = 0;
        let next = loop {
            match step_with(&state, kind, dt, config.length_growth_tolerance) {
                Ok(s) => break s,
                Err(Error::StepRejected(reason)) => {
                    if attempt == config.max_halvings {
                        trace.stop_reason = StopReason::StiffnessFailure;
                        trace.steps = state.step_count;
                        return Err(Error::StiffnessFailure { t: state.t, reason, partial: Box::new(trace) });
                    }
                    attempt += 1;
                    trace.halvings += 1;
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        state = next;
        if state.t >= config.t_end {
            state.t = config.t_end;
        }
        deficit = deficit_sums(&spectral::analyze(&state.curve)).0;
        since_record += 1;
        let done = deficit < config.stop_tolerance || state.t >= config.t_end;
        if since_record == config.record_interval || done {
            trace.rows.push(TraceRow::compute(kind, &state.curve, state.t, config.ell_max)?);
            since_record = 0;
        }
    }
    trace.stop_reason =
        if deficit < config.stop_tolerance { StopReason::DeficitBelowTolerance } else { StopReason::EndTime };
    trace.steps = state.step_count;
    Ok(trace)
}

/// Metadata written next to a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub kind: FlowKind,
    pub n: usize,
    pub config: FlowConfig,
    pub dt_policy: String,
    pub stop_reason: StopReason,
    pub steps: u64,
    pub halvings: u64,
    pub rows: usize,
    pub orientation_reversed: bool,
}

impl TraceSidecar {
    pub fn new(trace: &DiagnosticsTrace, config: &FlowConfig) -> Self {
        Self {
            kind: trace.kind,
            n: trace.n,
            config: config.clone(),
            dt_policy: format!(
                "dt = {} * (L/N)^2, halved on rejection up to {} times",
                config.dt_safety, config.max_halvings
            ),
            stop_reason: trace.stop_reason,
            steps: trace.steps,
            halvings: trace.halvings,
            rows: trace.rows.len(),
            orientation_reversed: trace.orientation_reversed,
        }
    }
}
