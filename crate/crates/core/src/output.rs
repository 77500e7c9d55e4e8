//! CSV serialization. Every file starts with a header row; numbers use the
//! shortest round-trip representation (`1.0`, `0.25`, `1.5e-10`), so reruns
//! are byte-identical.

use std::io::Write;

use crate::coupling::CouplingEstimate;
use crate::error::Result;
use crate::mc::MonteCarloEstimate;
use crate::model::{AssumptionReport, DataClassCertificate};
use crate::pde::{Grid, ValueFunction};
use crate::pia::IterationReport;

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Columns `x, v, dv, d2v`.
pub fn write_value_function<W: Write>(vf: &ValueFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "v", "dv", "d2v"])?;
    for i in 0..vf.grid.len() {
        w.write_record([num(vf.grid.x(i)), num(vf.v[i]), num(vf.dv[i]), num(vf.d2v[i])])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x, n0, n1, ...`: one column per snapshot.
pub fn write_snapshots<W: Write>(grid: &Grid, snapshots: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string()];
    header.extend((0..snapshots.len()).map(|n| format!("n{n}")));
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let mut row = vec![num(grid.x(i))];
        row.extend(snapshots.iter().map(|s| num(s[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per iteration.
pub fn write_iteration_report<W: Write>(report: &IterationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "sup_dv",
        "sup_dpi",
        "max_monotonicity_violation",
        "interior_residual_norm",
        "monotonicity_warning",
        "converged",
    ])?;
    for r in &report.iterations {
        w.write_record([
            r.n.to_string(),
            opt(r.sup_dv),
            num(r.sup_dpi),
            opt(r.max_monotonicity_violation),
            num(r.interior_residual_norm),
            r.monotonicity_warning.to_string(),
            report.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `n, log10_sup_dv, log10_sup_dpi`; `log10(0)` is written as `-inf`.
pub fn write_log_diffs<W: Write>(report: &IterationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "log10_sup_dv", "log10_sup_dpi"])?;
    for r in &report.iterations {
        w.write_record([r.n.to_string(), opt(r.sup_dv.map(f64::log10)), num(r.sup_dpi.log10())])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRow {
    pub x0: f64,
    pub estimate: MonteCarloEstimate,
    pub dt: f64,
    /// PDE value at `x0`, when compared against one.
    pub pde_value: Option<f64>,
}

/// Columns `x0, mean, std_error, n_paths, dt, pde_value, abs_diff`.
pub fn write_mc_rows<W: Write>(rows: &[McRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x0", "mean", "std_error", "n_paths", "dt", "pde_value", "abs_diff"])?;
    for r in rows {
        w.write_record([
            num(r.x0),
            num(r.estimate.mean),
            num(r.estimate.std_error),
            r.estimate.n_paths.to_string(),
            num(r.dt),
            opt(r.pde_value),
            opt(r.pde_value.map(|v| (r.estimate.mean - v).abs())),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRow {
    pub y0: f64,
    pub phi: f64,
    pub delta_c: f64,
    pub dt: f64,
    pub estimate: CouplingEstimate,
    pub bessel_bound: f64,
}

/// Columns `y0, phi, delta_c, dt, n_paths, p_separated, std_error,
/// p_censored, bessel_bound`.
pub fn write_coupling_rows<W: Write>(rows: &[CouplingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "y0",
        "phi",
        "delta_c",
        "dt",
        "n_paths",
        "p_separated",
        "std_error",
        "p_censored",
        "bessel_bound",
    ])?;
    for r in rows {
        w.write_record([
            num(r.y0),
            num(r.phi),
            num(r.delta_c),
            num(r.dt),
            r.estimate.n_paths.to_string(),
            num(r.estimate.p_separated),
            num(r.estimate.std_error),
            num(r.estimate.p_censored),
            num(r.bessel_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Key/value rows `item, value` for the sampled assumption check, followed
/// by one `violation` row per refuting sample.
pub fn write_assumption_report<W: Write>(report: &AssumptionReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item", "x", "p", "value"])?;
    let l = &report.estimated_lipschitz;
    let rows: [(&str, String); 11] = [
        ("passed", report.passed.to_string()),
        ("estimated_lambda", num(report.estimated_lambda)),
        ("estimated_epsilon0", num(report.estimated_epsilon0)),
        ("lipschitz_sigma_x", num(l.sigma.in_x)),
        ("lipschitz_sigma_p", num(l.sigma.in_p)),
        ("lipschitz_mu_x", num(l.mu.in_x)),
        ("lipschitz_mu_p", num(l.mu.in_p)),
        ("lipschitz_alpha_x", num(l.alpha.in_x)),
        ("lipschitz_alpha_p", num(l.alpha.in_p)),
        ("lipschitz_f_x", num(l.f.in_x)),
        ("lipschitz_f_p", num(l.f.in_p)),
    ];
    for (k, v) in rows {
        w.write_record([k, "", "", &v])?;
    }
    for v in &report.violations {
        w.write_record(["violation".to_string(), num(v.x), num(v.p), v.description.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Key/value rows for the example-class certificate. `Err` input records
/// the reason the bounds are undefined.
pub fn write_certificate<W: Write>(cert: std::result::Result<&DataClassCertificate, String>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item", "value"])?;
    match cert {
        Ok(c) => {
            w.write_record(["b1", &num(c.b1)])?;
            w.write_record(["b2", &num(c.b2)])?;
            w.write_record(["alpha_condition", &c.alpha_condition.to_string()])?;
            w.write_record(["derivative_condition", &c.derivative_condition.to_string()])?;
            w.write_record(["passed", &c.passed.to_string()])?;
        }
        Err(reason) => {
            w.write_record(["passed", "false"])?;
            w.write_record(["error", &reason])?;
        }
    }
    w.flush()?;
    Ok(())
}
