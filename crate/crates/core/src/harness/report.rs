use std::fmt::Write as _;

use super::config::ExperimentConfig;
use super::metrics::ErrorPair;
use crate::fem::InnerKind;
use crate::l1::StabilityReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Temporal,
    Spatial,
    Pod,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// `N` for temporal sweeps, cell count for spatial sweeps
    pub size: usize,
    /// `τ` or `h`
    pub step: f64,
    pub errors: ErrorPair,
    /// against the previous row
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PodRow {
    pub inner: InnerKind,
    pub include_fdq: bool,
    pub m: usize,
    pub rank: usize,
    /// lifted reduced solution against the full Galerkin solution
    pub vs_full: ErrorPair,
    /// lifted reduced solution against the reference solution
    pub vs_reference: Option<ErrorPair>,
}

/// Correlation eigenvalues above the rank cutoff, one list per snapshot
/// variant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EigenvalueTable {
    pub h1_fdq: Vec<f64>,
    pub h1: Vec<f64>,
    pub l2_fdq: Vec<f64>,
    pub l2: Vec<f64>,
}

impl EigenvalueTable {
    pub fn column_mut(&mut self, inner: InnerKind, fdq: bool) -> &mut Vec<f64> {
        match (inner, fdq) {
            (InnerKind::H1, true) => &mut self.h1_fdq,
            (InnerKind::H1, false) => &mut self.h1,
            (InnerKind::L2, true) => &mut self.l2_fdq,
            (InnerKind::L2, false) => &mut self.l2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub kind: ReportKind,
    pub config: Vec<(String, String)>,
    pub convergence: Vec<ConvergenceRow>,
    /// full-order error against the reference
    pub full_error: Option<ErrorPair>,
    pub pod: Vec<PodRow>,
    pub eigenvalues: Option<EigenvalueTable>,
    pub stability: Vec<(String, StabilityReport)>,
    pub runtime_secs: f64,
}

impl ErrorReport {
    pub fn new(kind: ReportKind, config: &ExperimentConfig) -> Self {
        Self {
            kind,
            config: config.echo(),
            convergence: Vec::new(),
            full_error: None,
            pod: Vec::new(),
            eigenvalues: None,
            stability: Vec::new(),
            runtime_secs: 0.0,
        }
    }

    pub fn stable(&self) -> bool {
        self.stability.iter().all(|(_, s)| s.holds())
    }

    pub fn pod_rows(&self, inner: InnerKind, fdq: bool) -> impl Iterator<Item = &PodRow> {
        self.pod.iter().filter(move |r| r.inner == inner && r.include_fdq == fdq)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "# runtime_secs = {:.3}", self.runtime_secs);
        let violations: usize = self.stability.iter().map(|(_, s)| s.violations.len()).sum();
        let _ = writeln!(out, "# stability_violations = {violations}");
        match self.kind {
            ReportKind::Temporal | ReportKind::Spatial => {
                let (a, b) = if self.kind == ReportKind::Temporal { ("n", "tau") } else { ("cells", "h") };
                let _ = writeln!(out, "{a},{b},e_max,e,rate");
                for r in &self.convergence {
                    let rate = r.rate.map(num).unwrap_or_default();
                    let _ = writeln!(out, "{},{},{},{},{rate}", r.size, num(r.step), num(r.errors.e_max), num(r.errors.e));
                }
            }
            ReportKind::Pod | ReportKind::Perturbed => {
                if let Some(e) = self.full_error {
                    let _ = writeln!(out, "# full_e_max = {}", num(e.e_max));
                    let _ = writeln!(out, "# full_e = {}", num(e.e));
                }
                let _ = writeln!(out, "inner,fdq,m,rank,e_m,e_m_max,e_ref,e_ref_max");
                for r in &self.pod {
                    let inner = match r.inner {
                        InnerKind::H1 => "h1",
                        InnerKind::L2 => "l2",
                    };
                    let (er, erm) = r
                        .vs_reference
                        .map(|e| (num(e.e), num(e.e_max)))
                        .unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{inner},{},{},{},{},{},{er},{erm}",
                        r.include_fdq,
                        r.m,
                        r.rank,
                        num(r.vs_full.e),
                        num(r.vs_full.e_max)
                    );
                }
            }
        }
        out
    }
}

/// Six significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.5e}")
}

pub const EIGENVALUE_HEADER: &str = "n,lambda_h1_fdq,lambda_h1,lambda_l2_fdq,lambda_l2";

/// One row per index; columns shorter than the longest are left blank.
pub fn eigenvalue_report(table: &EigenvalueTable) -> String {
    let cols = [&table.h1_fdq, &table.h1, &table.l2_fdq, &table.l2];
    let rows = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut out = String::from(EIGENVALUE_HEADER);
    out.push('\n');
    for n in 0..rows {
        let cells: Vec<String> = cols.iter().map(|c| c.get(n).map(|&v| num(v)).unwrap_or_default()).collect();
        let _ = writeln!(out, "{},{}", n + 1, cells.join(","));
    }
    out
}
