//! CSV and JSON renderings of run results.

use anyhow::Result;
use ddlpb::coupling::SweepRow;
use ddlpb::{IterationReport, ModeSpectrum, SolverConfig, SweepTable};
use serde::Serialize;
use std::path::Path;

pub const FORMAT_VERSION: &str = "ddlpb-report/1";

/// Leading comment block of every report.
pub struct Header {
    command: &'static str,
    input: Option<String>,
    lines: Vec<String>,
}

impl Header {
    pub fn new(command: &'static str, input: Option<&Path>, lines: Vec<String>) -> Self {
        Self {
            command,
            input: input.map(|p| p.display().to_string()),
            lines,
        }
    }

    fn write(&self, out: &mut String) {
        out.push_str(&format!("# {FORMAT_VERSION}\n# command={}\n", self.command));
        if let Some(input) = &self.input {
            out.push_str(&format!("# input={input}\n"));
        }
        for l in &self.lines {
            out.push_str(&format!("# {l}\n"));
        }
    }
}

pub enum Outcome {
    Finished(IterationReport),
    Diverged(String),
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Finished(r) if r.converged)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_body<F>(header: &Header, columns: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut out = String::new();
    header.write(&mut out);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    fill(&mut w)?;
    out.push_str(&String::from_utf8(w.into_inner()?)?);
    Ok(out)
}

pub fn solve_csv(header: &Header, outcome: &Outcome) -> Result<String> {
    let mut out = csv_body(header, &["iteration", "energy_kjmol", "rel_error"], |w| {
        if let Outcome::Finished(r) = outcome {
            for (k, (e, err)) in r.energies_kjmol.iter().zip(&r.rel_errors).enumerate() {
                w.write_record([(k + 1).to_string(), e.to_string(), opt(*err)])?;
            }
        }
        Ok(())
    })?;
    match outcome {
        Outcome::Finished(r) => out.push_str(&format!(
            "# converged={},n_ite={},energy_kjmol={}\n",
            r.converged,
            r.n_ite,
            opt(r.energy_kjmol())
        )),
        Outcome::Diverged(msg) => out.push_str(&format!("# converged=false,failure={msg}\n")),
    }
    Ok(out)
}

#[derive(Serialize)]
struct Iterate {
    iteration: usize,
    energy_kjmol: f64,
    rel_error: Option<f64>,
}

#[derive(Serialize)]
struct SolveJson<'a> {
    format: &'static str,
    command: &'static str,
    input: Option<&'a str>,
    config: &'a SolverConfig,
    converged: bool,
    n_ite: usize,
    energy_kjmol: Option<f64>,
    iterations: Vec<Iterate>,
    failure: Option<&'a str>,
    wall_time_s: f64,
}

pub fn solve_json(header: &Header, config: &SolverConfig, outcome: &Outcome, wall_time_s: f64) -> Result<String> {
    let (iterations, n_ite, energy, failure) = match outcome {
        Outcome::Finished(r) => (
            r.energies_kjmol
                .iter()
                .zip(&r.rel_errors)
                .enumerate()
                .map(|(k, (e, err))| Iterate {
                    iteration: k + 1,
                    energy_kjmol: *e,
                    rel_error: *err,
                })
                .collect(),
            r.n_ite,
            r.energy_kjmol(),
            None,
        ),
        Outcome::Diverged(msg) => (Vec::new(), 0, None, Some(msg.as_str())),
    };
    let doc = SolveJson {
        format: FORMAT_VERSION,
        command: header.command,
        input: header.input.as_deref(),
        config,
        converged: outcome.converged(),
        n_ite,
        energy_kjmol: energy,
        iterations,
        failure,
        wall_time_s,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn sweep_csv(header: &Header, table: &SweepTable, predicted: f64) -> Result<String> {
    let columns = ["alpha", "n_ite", "converged", "energy_kjmol", "err_final"];
    let mut out = csv_body(header, &columns, |w| {
        for r in &table.rows {
            w.write_record([
                r.alpha.to_string(),
                r.n_ite.to_string(),
                r.converged.to_string(),
                opt(r.energy_kjmol),
                opt(r.err_final),
            ])?;
        }
        Ok(())
    })?;
    for r in table.rows.iter().filter(|r| r.failure.is_some()) {
        out.push_str(&format!("# alpha={}: {}\n", r.alpha, r.failure.as_deref().unwrap_or_default()));
    }
    let best = table.best_alpha.map(|a| a.to_string()).unwrap_or_else(|| "none".into());
    out.push_str(&format!("# best_alpha={best},practical_alpha={predicted}\n"));
    Ok(out)
}

#[derive(Serialize)]
struct SweepJson<'a> {
    format: &'static str,
    command: &'static str,
    input: Option<&'a str>,
    config: &'a SolverConfig,
    rows: &'a [SweepRow],
    best_alpha: Option<f64>,
    practical_alpha: f64,
    wall_time_s: f64,
}

pub fn sweep_json(header: &Header, config: &SolverConfig, table: &SweepTable, predicted: f64, wall_time_s: f64) -> Result<String> {
    let doc = SweepJson {
        format: FORMAT_VERSION,
        command: header.command,
        input: header.input.as_deref(),
        config,
        rows: &table.rows,
        best_alpha: table.best_alpha,
        practical_alpha: predicted,
        wall_time_s,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[derive(Serialize)]
pub struct SpectrumSummary {
    pub c1: f64,
    pub c2: f64,
    pub mu_range: (f64, f64),
    pub alpha_op: f64,
    pub practical_alpha: f64,
}

pub fn spectrum_csv(header: &Header, spectrum: &ModeSpectrum, summary: &SpectrumSummary) -> Result<String> {
    let columns = ["ell", "lambda_r", "lambda_c", "lambda_e", "mu"];
    let mut out = csv_body(header, &columns, |w| {
        for l in 0..=spectrum.lmax() {
            w.write_record([
                l.to_string(),
                spectrum.lambda_r[l].to_string(),
                spectrum.lambda_c[l].to_string(),
                spectrum.lambda_e[l].to_string(),
                spectrum.mu[l].to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.push_str(&format!("# C1={},C2={}\n", summary.c1, summary.c2));
    out.push_str(&format!("# mu_min={},mu_max={}\n", summary.mu_range.0, summary.mu_range.1));
    out.push_str(&format!(
        "# alpha_op={},practical_alpha={}\n",
        summary.alpha_op, summary.practical_alpha
    ));
    Ok(out)
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    format: &'static str,
    command: &'static str,
    spectrum: &'a ModeSpectrum,
    summary: &'a SpectrumSummary,
}

pub fn spectrum_json(header: &Header, spectrum: &ModeSpectrum, summary: &SpectrumSummary) -> Result<String> {
    let doc = SpectrumJson {
        format: FORMAT_VERSION,
        command: header.command,
        spectrum,
        summary,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}
