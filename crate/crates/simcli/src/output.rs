//! CSV and metadata files. Floats use the shortest round-trip form and
//! missing values are empty fields, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use stiefel_ekf::stiefel::MaxVarProvenance;

use crate::error::{SimError, SimResult};
use crate::experiment::{ExperimentResult, PanelSummary, RunTrace, SummaryRow};
use crate::plot::emit_plots;

pub const TRACE_HEADER: &str = "step,PK,gain,dist2_norm,innov_norm";
pub const SUMMARY_HEADER: &str =
    "n,k,sigma0_2,xi2,step,count,PK_median,dist2_median,dist2_q1,dist2_q3,gain_median";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.step,
            opt(r.pk),
            opt(r.gain),
            opt(r.dist2_norm),
            opt(r.innov_norm)
        );
    }
    out
}

pub fn trace_file_name(trace: &RunTrace) -> String {
    format!(
        "s{}_x{}_r{:04}.csv",
        trace.sigma_idx, trace.xi_idx, trace.replicate
    )
}

pub fn summary_csv(panels: &[PanelSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for p in panels {
        for r in &p.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.n,
                p.k,
                p.sigma0_2,
                p.xi2,
                r.step,
                r.count,
                opt(r.pk_median),
                opt(r.dist2_median),
                opt(r.dist2_q1),
                opt(r.dist2_q3),
                opt(r.gain_median)
            );
        }
    }
    out
}

fn parse_opt(field: &str, line: usize) -> SimResult<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| SimError::Config(format!("summary line {line}: bad number `{field}`")))
}

fn parse_req<T: std::str::FromStr>(field: &str, line: usize) -> SimResult<T> {
    field
        .parse()
        .map_err(|_| SimError::Config(format!("summary line {line}: bad field `{field}`")))
}

/// Reads a summary written by [`summary_csv`], grouping rows into panels in
/// order of first appearance.
pub fn parse_summary(text: &str) -> SimResult<Vec<PanelSummary>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SUMMARY_HEADER => {}
        _ => return Err(SimError::Config("summary file has no valid header".into())),
    }
    let mut panels: Vec<PanelSummary> = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').collect();
        if f.len() != 11 {
            return Err(SimError::Config(format!("summary line {line}: expected 11 fields")));
        }
        let (n, k): (usize, usize) = (parse_req(f[0], line)?, parse_req(f[1], line)?);
        let (s, x): (f64, f64) = (parse_req(f[2], line)?, parse_req(f[3], line)?);
        let row = SummaryRow {
            step: parse_req(f[4], line)?,
            count: parse_req(f[5], line)?,
            pk_median: parse_opt(f[6], line)?,
            dist2_median: parse_opt(f[7], line)?,
            dist2_q1: parse_opt(f[8], line)?,
            dist2_q3: parse_opt(f[9], line)?,
            gain_median: parse_opt(f[10], line)?,
        };
        match panels
            .iter_mut()
            .find(|p| p.n == n && p.k == k && p.sigma0_2 == s && p.xi2 == x)
        {
            Some(p) => p.rows.push(row),
            None => panels.push(PanelSummary {
                n,
                k,
                sigma0_2: s,
                xi2: x,
                rows: vec![row],
            }),
        }
    }
    Ok(panels)
}

pub fn runs_csv(result: &ExperimentResult) -> String {
    let cfg = &result.config;
    let mut out = String::from(
        "sigma0_2,xi2,replicate,seed,stream,config_hash,measurement_model,maxvar,\
         redrawn_measurements,redrawn_priors,final_PK,final_dist,status\n",
    );
    for t in &result.traces {
        let last = t.rows.last();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.sigma0_2,
            t.xi2,
            t.replicate,
            cfg.seed,
            t.stream,
            result.config_hash,
            cfg.measurement_model,
            result.spec.maxvar(),
            t.redrawn_measurements,
            t.redrawn_priors,
            opt(last.and_then(|r| r.pk)),
            opt(t.final_distance),
            t.error
                .as_deref()
                .map(|e| e.replace(',', ";"))
                .unwrap_or_else(|| "ok".into())
        );
    }
    out
}

pub fn metadata(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "config_hash = {}", result.config_hash);
    let _ = writeln!(out, "manifold = {}", result.spec.shape());
    let _ = writeln!(out, "dim = {}", result.spec.dim());
    let _ = writeln!(out, "maxvar = {}", result.spec.maxvar());
    match result.spec.provenance() {
        MaxVarProvenance::ClosedForm => {
            let _ = writeln!(out, "maxvar_provenance = closed_form");
        }
        MaxVarProvenance::MonteCarlo {
            samples,
            seed,
            std_error,
            failure_fraction,
        } => {
            let _ = writeln!(
                out,
                "maxvar_provenance = monte_carlo samples={samples} seed={seed} \
                 std_error={std_error} failure_fraction={failure_fraction}"
            );
        }
        MaxVarProvenance::Given => {
            let _ = writeln!(out, "maxvar_provenance = given");
        }
    }
    let _ = writeln!(out, "truth = pr(x0)");
    let _ = writeln!(out, "plot_y_axis = log10");
    let redrawn: usize = result.traces.iter().map(|t| t.redrawn_measurements).sum();
    let failed = result.traces.iter().filter(|t| t.error.is_some()).count();
    let _ = writeln!(out, "redrawn_measurements = {redrawn}");
    let _ = writeln!(out, "failed_replicates = {failed}");
    out.push_str("\n# config\n");
    out.push_str(&result.config.canonical());
    out
}

fn write(path: &Path, contents: &str) -> SimResult<()> {
    fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

fn mkdir(path: &Path) -> SimResult<()> {
    fs::create_dir_all(path).map_err(|e| SimError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub root: PathBuf,
    pub summary: PathBuf,
    pub runs: PathBuf,
    pub traces: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

/// Writes `<out>/<name>/{traces/*.csv, summary.csv, runs.csv, metadata.txt, plots/*.svg}`.
pub fn write_outputs(result: &ExperimentResult, out_dir: &Path) -> SimResult<OutputPaths> {
    let root = out_dir.join(&result.config.name);
    let trace_dir = root.join("traces");
    mkdir(&trace_dir)?;
    let mut traces = Vec::with_capacity(result.traces.len());
    for t in &result.traces {
        let p = trace_dir.join(trace_file_name(t));
        write(&p, &trace_csv(t))?;
        traces.push(p);
    }
    let summary = root.join("summary.csv");
    write(&summary, &summary_csv(&result.panels))?;
    let runs = root.join("runs.csv");
    write(&runs, &runs_csv(result))?;
    write(&root.join("metadata.txt"), &metadata(result))?;
    let plots = emit_plots(&result.panels, &root.join("plots"), &result.config.name)?;
    Ok(OutputPaths {
        root,
        summary,
        runs,
        traces,
        plots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel() -> PanelSummary {
        PanelSummary {
            n: 4,
            k: 2,
            sigma0_2: 0.5,
            xi2: 0.1,
            rows: vec![
                SummaryRow {
                    step: 1,
                    count: 3,
                    pk_median: Some(0.1),
                    dist2_median: Some(0.2),
                    dist2_q1: Some(0.15),
                    dist2_q3: Some(0.3),
                    gain_median: Some(0.8),
                },
                SummaryRow {
                    step: 2,
                    count: 0,
                    pk_median: Some(0.05),
                    dist2_median: None,
                    dist2_q1: None,
                    dist2_q3: None,
                    gain_median: Some(0.4),
                },
            ],
        }
    }

    #[test]
    fn summary_round_trip() {
        let panels = vec![panel()];
        let text = summary_csv(&panels);
        assert!(text.contains("\n4,2,0.5,0.1,2,0,0.05,,,,0.4\n"));
        assert_eq!(parse_summary(&text).unwrap(), panels);
    }

    #[test]
    fn summary_parse_errors() {
        assert!(parse_summary("").is_err());
        assert!(parse_summary("wrong\n1,2").is_err());
        assert!(parse_summary(&format!("{SUMMARY_HEADER}\n1,2,3")).is_err());
    }
}
