//! Single-curve analysis and the batch corpus check.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{frame_fields, resample_arclength, CurveSamples};
use crate::curvegen::{generate, CurveSpec};
use crate::error::{Error, Result};
use crate::functionals::{CurveDiagnostics, InequalityChecks};
use crate::spectral::{self, identity_residuals, IdentityResiduals};

/// Largest identity mismatch accepted as agreement.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub diagnostics: CurveDiagnostics,
    pub identities: IdentityResiduals,
    pub checks: InequalityChecks,
    pub under_resolved: bool,
    pub orientation_reversed: bool,
    /// Names of failed inequality checks and identities above tolerance.
    pub failures: Vec<String>,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn analyze_curve(raw: &CurveSamples, n: usize, ell_max: usize) -> Result<AnalysisReport> {
    let c = resample_arclength(raw, n)?;
    let frame = frame_fields(&c)?;
    let sc = spectral::analyze(&c);
    let diagnostics = CurveDiagnostics::compute(&c, &frame, ell_max)?;
    let identities = identity_residuals(&c, &frame, &sc);
    let checks = InequalityChecks::evaluate(&diagnostics);
    let mut failures: Vec<String> = checks.failures().into_iter().map(String::from).collect();
    for (i, r) in identities.ser().iter().enumerate() {
        if !(*r < IDENTITY_TOLERANCE) {
            failures.push(format!("ser{}", i + 1));
        }
    }
    for (ell, r) in &identities.prop22 {
        if !(*r < IDENTITY_TOLERANCE) {
            failures.push(format!("moment_identity_{ell}"));
        }
    }
    if !(identities.thm1_residual_identity < IDENTITY_TOLERANCE) {
        failures.push("thm1_residual_identity".into());
    }
    Ok(AnalysisReport {
        diagnostics,
        identities,
        checks,
        under_resolved: sc.under_resolved(),
        orientation_reversed: c.orientation_reversed(),
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveOutcome {
    pub index: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub curves: usize,
    pub violations: usize,
    pub errors: usize,
    pub min_deficit: f64,
    pub min_thm1_margin: f64,
    pub min_thm2_margin: f64,
    /// Smallest `thm2_margin / I_0` over non-circular curves.
    pub min_thm2_margin_rel: f64,
    pub min_thm2_g: f64,
    pub max_identity_residual: f64,
    /// Supremum of the interpolation ratio keyed by `"l,m"`.
    pub thm3_sup: BTreeMap<String, f64>,
    pub outcomes: Vec<CurveOutcome>,
}

/// Analyzes every spec concurrently; results keep corpus order.
pub fn verify_corpus(specs: &[CurveSpec], ell_max: usize) -> Result<VerifySummary> {
    if specs.is_empty() {
        return Err(Error::InsufficientData("empty corpus".into()));
    }
    let results: Vec<Result<AnalysisReport>> =
        specs.par_iter().map(|spec| generate(spec).and_then(|raw| analyze_curve(&raw, spec.n, ell_max))).collect();
    let mut summary = VerifySummary {
        curves: specs.len(),
        violations: 0,
        errors: 0,
        min_deficit: f64::INFINITY,
        min_thm1_margin: f64::INFINITY,
        min_thm2_margin: f64::INFINITY,
        min_thm2_margin_rel: f64::INFINITY,
        min_thm2_g: f64::INFINITY,
        max_identity_residual: 0.0,
        thm3_sup: BTreeMap::new(),
        outcomes: Vec::with_capacity(specs.len()),
    };
    for (index, (spec, result)) in specs.iter().zip(results).enumerate() {
        let mut outcome = CurveOutcome { index, label: spec.label(), error: None, failures: Vec::new() };
        match result {
            Err(e) => {
                summary.errors += 1;
                outcome.error = Some(e.to_string());
            }
            Ok(report) => {
                let d = &report.diagnostics;
                summary.min_deficit = summary.min_deficit.min(d.deficit);
                summary.min_thm1_margin = summary.min_thm1_margin.min(d.thm1_margin);
                summary.min_thm2_margin = summary.min_thm2_margin.min(d.thm2_margin);
                if d.i_ell[0] > spectral::FUNCTIONAL_NOISE_FLOOR {
                    summary.min_thm2_margin_rel = summary.min_thm2_margin_rel.min(d.thm2_margin / d.i_ell[0]);
                }
                summary.min_thm2_g = summary.min_thm2_g.min(d.thm2_g);
                summary.max_identity_residual = summary.max_identity_residual.max(report.identities.max());
                for r in &d.thm3_ratios {
                    if let Some(v) = r.ratio {
                        let e = summary.thm3_sup.entry(format!("{},{}", r.ell, r.m)).or_insert(v);
                        *e = e.max(v);
                    }
                }
                if !report.passed() {
                    summary.violations += 1;
                }
                outcome.failures = report.failures;
            }
        }
        summary.outcomes.push(outcome);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvegen::{standard_corpus, Shape};

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(verify_corpus(&[], 3), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ellipse_report_passes() {
        let spec = CurveSpec::new(Shape::Ellipse { a: 2.0, b: 1.0, center: [0.0, 0.0] }, 256);
        let report = analyze_curve(&generate(&spec).unwrap(), 256, 3).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert!(report.diagnostics.thm1_margin > 0.0);
        assert!(report.identities.max() < 1e-8);
    }

    #[test]
    fn batch_order_is_corpus_order() {
        let corpus = standard_corpus();
        let summary = verify_corpus(&corpus[..6], 3).unwrap();
        let labels: Vec<String> = corpus[..6].iter().map(|s| s.label()).collect();
        assert_eq!(summary.outcomes.iter().map(|o| o.label.clone()).collect::<Vec<_>>(), labels);
    }
}
