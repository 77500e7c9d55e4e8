//! Subcommand bodies. Each writes its CSV files into the output directory
//! and prints one summary line per file.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use gpia_core::coupling::{
    bessel_bound, estimate_coupling_probability, CouplingParams, MarkovDiffusion,
};
use gpia_core::mc::{estimate_payoff, SimConfig};
use gpia_core::model::{check_assumption1, data_class_certificate};
use gpia_core::output::{self, CouplingRow, McRow};
use gpia_core::pia::{run_gpia, IterationReport};
use gpia_core::Grid;
use nalgebra::DVector;

use crate::config::ExperimentConfig;
use crate::CliError;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn gpia(cfg: &ExperimentConfig) -> Result<IterationReport, CliError> {
    let problem = cfg.problem.load()?.problem;
    let grid = Grid::for_problem(&problem, cfg.grid.n)?;
    let setup = cfg.pia.setup(&problem, &grid)?;
    Ok(run_gpia(
        &problem,
        &setup.scaling,
        &setup.initial_policy,
        setup.rule,
        &setup.config,
        cfg.execution.into(),
    )?)
}

pub fn iterate(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let report = gpia(cfg)?;
    let grid = &report.final_value.grid;
    output::write_snapshots(grid, &report.value_history, create(out, "value.csv")?)?;
    output::write_snapshots(grid, &report.policy_history, create(out, "policy.csv")?)?;
    output::write_log_diffs(&report, create(out, "diffs.csv")?)?;
    output::write_iteration_report(&report, create(out, "report.csv")?)?;
    output::write_value_function(&report.final_value, create(out, "final_value.csv")?)?;
    println!(
        "iterate: {} iterations, converged = {}, files in {}",
        report.improvement_steps(),
        report.converged,
        out.display()
    );
    Ok(())
}

pub fn verify_mc(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let problem = cfg.problem.load()?.problem;
    let report = gpia(cfg)?;
    let sim = SimConfig {
        dt: cfg.mc.dt,
        t_max: cfg.mc.t_max,
        n_paths: cfg.mc.n_paths,
        seed: cfg.mc.seed,
    };
    if cfg.mc.x0.is_empty() {
        return Err(CliError::Config("mc.x0 must list at least one start point".into()));
    }
    let mut rows = Vec::with_capacity(cfg.mc.x0.len());
    for &x0 in &cfg.mc.x0 {
        let estimate = estimate_payoff(&problem, &report.final_policy, x0, &sim, cfg.execution.into())?;
        rows.push(McRow {
            x0,
            estimate,
            dt: sim.dt,
            pde_value: Some(report.final_value.eval(x0)),
        });
    }
    output::write_mc_rows(&rows, create(out, "mc.csv")?)?;
    println!("verify-mc: {} start points, file mc.csv in {}", rows.len(), out.display());
    Ok(())
}

pub fn coupling(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let c = &cfg.coupling;
    let (scale, lambda) = c.scale()?;
    let diff = MarkovDiffusion::isotropic(c.d, move |x: &DVector<f64>| scale(x[0], 0.0), lambda)?;
    if c.distances.is_empty() {
        return Err(CliError::Config("coupling.distances must not be empty".into()));
    }
    let x = DVector::zeros(c.d);
    let mut rows = Vec::with_capacity(c.distances.len());
    for &y0 in &c.distances {
        if !(y0 > 0.0 && y0 < c.phi) {
            return Err(CliError::Config(format!("coupling distance {y0} must lie in (0, phi = {})", c.phi)));
        }
        let mut xp = x.clone();
        xp[0] = y0;
        let params = CouplingParams {
            phi: c.phi,
            delta_c: c.delta_c.unwrap_or_else(|| CouplingParams::default_delta_c(y0)),
            dt: c.dt,
            t_max: c.t_max,
            refine: c.refine,
        };
        let estimate = estimate_coupling_probability(&diff, &x, &xp, &params, c.n_paths, c.seed, cfg.execution.into())?;
        rows.push(CouplingRow {
            y0,
            phi: c.phi,
            delta_c: params.delta_c,
            dt: c.dt,
            estimate,
            bessel_bound: bessel_bound(y0, c.phi, c.eps)?,
        });
    }
    output::write_coupling_rows(&rows, create(out, "coupling.csv")?)?;
    println!("coupling: {} distances, file coupling.csv in {}", rows.len(), out.display());
    Ok(())
}

pub fn check(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let loaded = cfg.problem.load()?;
    let report = check_assumption1(&loaded.problem, cfg.check.n_x, cfg.check.n_p)?;
    output::write_assumption_report(&report, create(out, "assumptions.csv")?)?;
    let mut summary = format!("check: assumptions passed = {}", report.passed);
    if let Some(spec) = &loaded.example_spec {
        let cert = data_class_certificate(spec);
        let passed = cert.as_ref().map(|c| c.passed).unwrap_or(false);
        output::write_certificate(cert.as_ref().map_err(|e| e.to_string()), create(out, "certificate.csv")?)?;
        summary.push_str(&format!(", certificate passed = {passed}"));
    }
    println!("{summary}, files in {}", out.display());
    Ok(())
}

