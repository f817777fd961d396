//! The five subcommands.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use sphkern::cubature::io::{read_rule_csv, write_rate_csv, write_rate_sidecar, write_rule_csv};
use sphkern::kernels::Family;
use sphkern::real::format_shortest;
use sphkern::schoenberg::io::{read_csv, read_json, write_csv, write_json};
use sphkern::schoenberg::PROJECTION_TOL;
use sphkern::{
    discrepancy_between, eval_kernel, fit_decay, generate_points, optimal_weights, rate_study,
    reconstruct_kernel, schoenberg_coeffs, worst_case_error, CubatureOptions, Dim, Kernel,
    Provenance, Route, Rule, Sequence, Truncation, WeightMode,
};

use crate::config::{Format, Job};
use crate::error::{CliError, Op};

/// Degrees compared between routes by `validate`.
const ROUTE_CHECK_DEGREE: usize = 30;
const PROJECTION_CHECK_DEGREE: usize = 20;
const ROUTE_REL_TOL: f64 = 1e-6;
/// Coefficients smaller than this are skipped in relative comparisons.
const ROUTE_FLOOR: f64 = 1e-12;
const MASS_TOL: f64 = 1e-6;
const RECONSTRUCTION_SLACK: f64 = 1e-8;
const GRID_POINTS: usize = 50;

fn emit(job: &Job, bytes: &[u8]) -> Result<(), CliError> {
    match &job.out {
        Some(p) => write_file(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn write_file(p: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(p, bytes).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))
}

fn json_bytes<S: Serialize>(v: &S) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| CliError::Output(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

fn json_only(job: &Job, what: &str) -> Result<(), CliError> {
    match job.format_or(Format::Json) {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::config(format!("{what} is written as JSON only"))),
    }
}

fn sequence(job: &Job, truncation: Truncation, route: Route) -> Result<Sequence, CliError> {
    let s = schoenberg_coeffs(&job.kernel, job.dim, truncation, route, &job.coeff_opts)
        .op("schoenberg_coeffs")?;
    for n in s.notes() {
        log::debug!("{n}");
    }
    log::info!(
        "M = {}, tail bound {:e}, provenance {}",
        s.truncation(),
        s.tail_bound(),
        s.provenance()
    );
    Ok(s)
}

pub fn coeffs(job: &Job) -> Result<(), CliError> {
    let seq = sequence(job, job.truncation, job.route)?;
    let mut buf = Vec::new();
    match job.format_or(Format::Csv) {
        Format::Csv => write_csv(&seq, &mut buf),
        Format::Json => write_json(&seq, &mut buf),
    }
    .op("coefficient export")?;
    emit(job, &buf)
}

pub fn identify(job: &Job) -> Result<(), CliError> {
    json_only(job, "a decay fit")?;
    let truncation = match (job.truncation, job.fit_range) {
        (Truncation::Auto, Some(r)) => Truncation::Fixed(r.hi),
        (Truncation::Fixed(m), Some(r)) if m < r.hi => {
            return Err(CliError::config(format!(
                "truncation {m} is below fit_range.hi = {}",
                r.hi
            )))
        }
        (t, _) => t,
    };
    let seq = sequence(job, truncation, job.route)?;
    let fit = fit_decay(&seq, job.fit_range).op("fit_decay")?;
    log::info!("gamma = {}, beta = {}", fit.gamma_hat, fit.beta);
    emit(job, &json_bytes(&fit)?)
}

#[derive(Serialize)]
struct EvalRow {
    theta: f64,
    psi: f64,
    reconstructed: f64,
    abs_error: f64,
    tail_bound: f64,
}

fn default_grid() -> Vec<f64> {
    let last = (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|i| PI * i as f64 / last).collect()
}

fn eval_rows(k: &Kernel, seq: &Sequence, theta: &[f64]) -> Result<Vec<EvalRow>, CliError> {
    theta
        .iter()
        .map(|&t| {
            let psi = eval_kernel(k, t).op("eval_kernel")?;
            let rec = reconstruct_kernel(seq, t);
            Ok(EvalRow {
                theta: t,
                psi,
                reconstructed: rec,
                abs_error: (rec - psi).abs(),
                tail_bound: seq.tail_bound(),
            })
        })
        .collect()
}

pub fn eval(job: &Job) -> Result<(), CliError> {
    let theta = job.theta.clone().unwrap_or_else(default_grid);
    let seq = sequence(job, job.truncation, job.route)?;
    let rows = eval_rows(&job.kernel, &seq, &theta)?;
    let bytes = match job.format_or(Format::Csv) {
        Format::Json => json_bytes(&rows)?,
        Format::Csv => {
            let mut s = String::from("theta,psi,reconstructed,abs_error,tail_bound\n");
            for r in &rows {
                let f = [r.theta, r.psi, r.reconstructed, r.abs_error, r.tail_bound]
                    .map(format_shortest);
                s.push_str(&f.join(","));
                s.push('\n');
            }
            s.into_bytes()
        }
    };
    emit(job, &bytes)
}

fn read_rule(p: &Path, dim: usize) -> Result<Rule, CliError> {
    let f = File::open(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    let rule: Rule =
        read_rule_csv(f).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    if rule.dim() != dim {
        return Err(CliError::config(format!(
            "{} lives on S^{}, the job on S^{dim}",
            p.display(),
            rule.dim()
        )));
    }
    Ok(rule)
}

#[derive(Serialize)]
struct DiscrepancyOut<'a> {
    kernel: &'a Kernel,
    dim: usize,
    discrepancy: f64,
}

pub fn cubature(job: &Job) -> Result<(), CliError> {
    let opts = CubatureOptions {
        coeffs: job.coeff_opts,
        route: job.route,
        ..Default::default()
    };
    match job.rules.as_slice() {
        [] => {}
        [one] => {
            json_only(job, "a discrepancy report")?;
            let rule = read_rule(one, job.dim)?;
            let rep = worst_case_error(&job.kernel, &rule, &opts).op("worst_case_error")?;
            log::info!("wce = {:e}", rep.wce);
            return emit(job, &json_bytes(&rep)?);
        }
        [a, b] => {
            json_only(job, "a discrepancy")?;
            let (a, b) = (read_rule(a, job.dim)?, read_rule(b, job.dim)?);
            let discrepancy = discrepancy_between(&job.kernel, &a, &b).op("discrepancy_between")?;
            log::info!("discrepancy = {discrepancy:e}");
            let out = DiscrepancyOut {
                kernel: &job.kernel,
                dim: job.dim,
                discrepancy,
            };
            return emit(job, &json_bytes(&out)?);
        }
        more => {
            return Err(CliError::config(format!(
                "cubature takes one or two rule files, got {}",
                more.len()
            )))
        }
    }
    let grid = job
        .n_grid
        .as_deref()
        .ok_or_else(|| CliError::config("cubature needs n_grid or rules"))?;
    if let [n] = grid {
        let pts = generate_points(job.generator, *n, job.dim).op("generate_points")?;
        let (rule, rep) = match job.weights {
            WeightMode::Optimal => {
                optimal_weights(&job.kernel, pts, job.generator, &opts).op("optimal_weights")?
            }
            WeightMode::Equal => {
                let rule = Rule::equal_weights(pts, job.generator).op("equal_weights")?;
                let rep = worst_case_error(&job.kernel, &rule, &opts).op("worst_case_error")?;
                (rule, rep)
            }
        };
        log::info!(
            "n = {n}, wce = {:e}, cond ≈ {:e}",
            rep.wce,
            rep.gram_condition
        );
        let bytes = match job.format_or(Format::Json) {
            Format::Json => json_bytes(&rep)?,
            Format::Csv => {
                let mut b = Vec::new();
                write_rule_csv(&rule, &mut b).op("rule export")?;
                b
            }
        };
        return emit(job, &bytes);
    }
    if job.weights != WeightMode::Optimal {
        return Err(CliError::config("rate studies use optimal weights"));
    }
    let study = rate_study(&job.kernel, job.dim, grid, job.generator, &opts).op("rate_study")?;
    log::info!("slope = {}", study.slope);
    let mut table = Vec::new();
    let mut sidecar = Vec::new();
    write_rate_csv(&study, &mut table).op("rate export")?;
    write_rate_sidecar(&study, &mut sidecar).op("rate export")?;
    sidecar.push(b'\n');
    match job.format_or(Format::Csv) {
        Format::Json => emit(job, &sidecar),
        Format::Csv => {
            emit(job, &table)?;
            match &job.out {
                Some(p) => write_file(&p.with_extension("json"), &sidecar),
                None => Ok(()),
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    kernel: &'a Kernel,
    dim: usize,
    passed: bool,
    checks: &'a [Check],
}

/// `max |a_m − b_m| / |b_m|` over `m ≤ upto` with `|b_m|` above the floor.
fn max_rel_dev(a: &Sequence, b: &Sequence, upto: usize) -> f64 {
    (0..=upto.min(a.truncation()).min(b.truncation()))
        .filter(|&m| b.coeff(m).abs() > ROUTE_FLOOR)
        .map(|m| ((a.coeff(m) - b.coeff(m)) / b.coeff(m)).abs())
        .fold(0.0, f64::max)
}

fn mass_check(s: &Sequence) -> Check {
    // mass() already counts the tail bound
    let dev = (s.mass() - 1.0).abs();
    Check {
        name: "mass_conservation",
        passed: dev <= MASS_TOL,
        max_deviation: dev,
        tolerance: MASS_TOL,
        detail: None,
    }
}

fn reconstruction_check(k: &Kernel, s: &Sequence) -> Result<Check, CliError> {
    let rows = eval_rows(k, s, &default_grid())?;
    let dev = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let tol = s.tail_bound() + RECONSTRUCTION_SLACK;
    Ok(Check {
        name: "reconstruction",
        passed: dev <= tol,
        max_deviation: dev,
        tolerance: tol,
        detail: None,
    })
}

fn read_coefficients(p: &Path, dim: usize) -> Result<Sequence, CliError> {
    let f = File::open(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    let seq = if p.extension().is_some_and(|e| e == "json") {
        read_json(f)
    } else {
        read_csv(f, Dim::Finite(dim))
    };
    let seq = seq.map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    if seq.dim() != Dim::Finite(dim) {
        return Err(CliError::config(format!(
            "{} holds a sequence on S^{}, the job is on S^{dim}",
            p.display(),
            seq.dim()
        )));
    }
    Ok(seq)
}

pub fn run_checks(job: &Job) -> Result<Vec<Check>, CliError> {
    let subject = match &job.coefficients {
        Some(p) => read_coefficients(p, job.dim)?,
        None => sequence(job, job.truncation, Route::Closed)?,
    };
    let mut checks = vec![
        mass_check(&subject),
        reconstruction_check(&job.kernel, &subject)?,
    ];

    let upto = Truncation::Fixed(ROUTE_CHECK_DEGREE);
    let quad = sequence(job, upto, Route::Quadrature)?;
    let (name, reference, detail) = match job.coefficients {
        Some(_) => (
            "file_vs_quadrature",
            subject.truncated(ROUTE_CHECK_DEGREE),
            None,
        ),
        None => {
            let closed = sequence(job, upto, Route::Closed)?;
            let note = (closed.provenance() == Provenance::Quadrature)
                .then(|| "no closed form for these parameters; both routes are quadrature".into());
            ("closed_vs_quadrature", closed, note)
        }
    };
    let dev = max_rel_dev(&reference, &quad, ROUTE_CHECK_DEGREE);
    checks.push(Check {
        name,
        passed: dev <= ROUTE_REL_TOL,
        max_deviation: dev,
        tolerance: ROUTE_REL_TOL,
        detail,
    });

    if job.kernel.family() == Family::FFamily {
        let upto = Truncation::Fixed(PROJECTION_CHECK_DEGREE);
        let closed = sequence(job, upto, Route::Closed)?;
        let proj = sequence(job, upto, Route::Projection)?;
        // the two routes sum their series to these relative tolerances
        let st = job.coeff_opts.series_tol;
        let tol = st + st.max(PROJECTION_TOL);
        let dev = max_rel_dev(&proj, &closed, PROJECTION_CHECK_DEGREE);
        checks.push(Check {
            name: "projection_vs_closed",
            passed: dev <= tol,
            max_deviation: dev,
            tolerance: tol,
            detail: None,
        });
    }
    Ok(checks)
}

pub fn validate(job: &Job) -> Result<(), CliError> {
    json_only(job, "a validation report")?;
    let checks = run_checks(job)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        log::info!(
            "{verdict} {}: {:e} (tolerance {:e})",
            c.name,
            c.max_deviation,
            c.tolerance
        );
    }
    let report = ValidationReport {
        kernel: &job.kernel,
        dim: job.dim,
        passed: failed == 0,
        checks: &checks,
    };
    emit(job, &json_bytes(&report)?)?;
    if failed > 0 {
        return Err(CliError::Validation {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
