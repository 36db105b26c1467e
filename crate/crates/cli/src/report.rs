//! JSON reports and trace files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use conefix_core::{
    apriori_bound, AxiomReport, AxiomViolation, Certificate, ContractionSpec, ContractionViolation, IterationTrace,
    SolveResult, Status, StopReason,
};
use serde::Serialize;

use crate::config::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    JsonLines,
    Csv,
}

impl std::str::FromStr for TraceFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json-lines" | "jsonl" => Ok(TraceFormat::JsonLines),
            "csv" => Ok(TraceFormat::Csv),
            other => bail!("unknown format `{other}` (expected json-lines or csv)"),
        }
    }
}

/// Writes one record per step. CSV rows carry the point as `x0..x{d-1}`
/// columns when the trace includes points.
pub fn write_trace(path: &Path, format: TraceFormat, trace: &IterationTrace, dim: usize) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    match format {
        TraceFormat::JsonLines => {
            for rec in &trace.records {
                serde_json::to_writer(&mut w, rec)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        TraceFormat::Csv => {
            let with_points = trace.records.iter().any(|r| r.point.is_some());
            let mut out = csv::Writer::from_writer(w);
            let mut header = vec!["n".to_string(), "step_norm".into(), "self_norm".into()];
            if with_points {
                header.extend((0..dim).map(|i| format!("x{i}")));
            }
            out.write_record(&header)?;
            for rec in &trace.records {
                let mut row = vec![rec.n.to_string(), rec.step_norm.to_string(), rec.self_norm.to_string()];
                if let Some(p) = &rec.point {
                    row.extend(p.iter().map(f64::to_string));
                }
                out.write_record(&row)?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
pub struct SolveSummary<'a> {
    problem: &'a str,
    status: Status,
    stop_reason: StopReason,
    x_star: &'a [f64],
    iterations: usize,
    residual_t: f64,
    residual_s: f64,
    self_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<ContractionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    /// A-priori bound after `iterations` steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    apriori_bound: Option<f64>,
}

impl<'a> SolveSummary<'a> {
    pub fn new(problem: &'a Problem, result: &'a SolveResult) -> Result<Self> {
        let (rate, bound) = match &problem.spec {
            Some(spec) => {
                let k = spec.contraction_rate()?;
                let p10 = result.trace.records.first().map_or(0.0, |r| r.step_norm);
                let m = problem.space.ambient().normal_constant_bound();
                let n = u32::try_from(result.iterations).unwrap_or(u32::MAX);
                (Some(k), Some(apriori_bound(k, m, p10, n)?))
            }
            None => (None, None),
        };
        Ok(SolveSummary {
            problem: &problem.label,
            status: result.status,
            stop_reason: result.stop_reason,
            x_star: result.x_star.coords(),
            iterations: result.iterations,
            residual_t: result.residual_t,
            residual_s: result.residual_s,
            self_distance: result.self_distance,
            spec: problem.spec,
            rate,
            apriori_bound: bound,
        })
    }
}

#[derive(Serialize)]
pub struct CertificateJson<'a> {
    pass: bool,
    samples: usize,
    violations: &'a [ContractionViolation],
    worst_slack: f64,
    spec: ContractionSpec,
    rate: f64,
}

impl<'a> CertificateJson<'a> {
    pub fn new(cert: &'a Certificate) -> Result<Self> {
        Ok(CertificateJson {
            pass: cert.pass(),
            samples: cert.samples_checked,
            violations: &cert.violations,
            worst_slack: cert.worst_slack,
            spec: cert.spec,
            rate: cert.spec.contraction_rate()?,
        })
    }
}

#[derive(Serialize)]
pub struct AxiomsJson<'a> {
    pass: bool,
    samples: usize,
    violations: &'a [AxiomViolation],
}

impl<'a> AxiomsJson<'a> {
    pub fn new(rep: &'a AxiomReport) -> Self {
        AxiomsJson { pass: rep.pass(), samples: rep.samples_checked, violations: &rep.violations }
    }
}
