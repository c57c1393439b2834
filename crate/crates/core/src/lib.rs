//! Spectral geometry of closed plane curves.
//!
//! A curve is held as `N` samples at uniform arc length. On that grid the
//! crate computes the Fourier coefficients of `f = x + i y`, the curvature
//! functionals `I_l = L^{2l+1} \int |kappa~^{(l)}|^2 ds` and the deficit
//! `I_{-1} = 1 - 4 pi A / L^2`, checks the inequalities between them, and
//! integrates two curvature flows that drive any curve to a round circle.

pub mod analysis;
pub mod curve;
pub mod curvegen;
pub mod error;
pub mod flow;
mod fourier;
pub mod functionals;
pub mod io;
pub mod limitshape;
pub mod spectral;
#[cfg(test)]
mod testutil;

pub use rustfft::num_complex::Complex64;

pub use analysis::{analyze_curve, verify_corpus, AnalysisReport, VerifySummary};
pub use curve::{
    frame_fields, isoperimetric_deficit, resample_arclength, signed_area, ArcLengthCurve, CurveSamples,
    CurveTolerances, FrameFields,
};
pub use curvegen::{generate, perturbed_corpus, standard_corpus, CurveSpec, Shape, SplitMix64};
pub use error::{Error, Result};
pub use flow::{
    fit_decay, fit_series, simulate, step, velocity, DecayFit, DiagnosticsTrace, FlowConfig, FlowKind, FlowState,
    Quantity, StopReason, TraceRow, TraceSidecar,
};
pub use functionals::{
    check_theorem1, check_theorem2, check_theorem3, i_ell, j_kp, CurveDiagnostics, InequalityChecks,
};
pub use limitshape::{
    barycenter, circle_fit, convergence_report, hausdorff_to_disk, CircleFit, ConvergenceReport, DiskDistance,
};
pub use spectral::{identity_residuals, IdentityResiduals, SpectralCoeffs};
