//! Single packet: simulated versus closed-form width.

use std::path::Path;

use ballistic::analytic::analytic_sigma;
use ballistic::stepper::{initial_field, second_moment_sigma};
use ballistic::{Evolution, Grid1D};

use super::{ensure_dir, indexed_name, Check, RunOutcome};
use crate::config::RunConfig;
use crate::error::{Result, SimContext};
use crate::report::stepper_report;
use crate::table::Table;

pub(crate) fn evolve_packet(
    cfg: &RunConfig,
    times: &[f64],
) -> Result<(Grid1D<f64>, Evolution<f64>)> {
    let grid = cfg
        .grid
        .auto_grid()
        .build(&cfg.packet, &cfg.physical, cfg.grid.t_final, cfg.grid.dt)
        .context("building grid")?;
    let init = initial_field(&cfg.packet, &grid).context("sampling initial packet")?;
    let ev = cfg
        .grid
        .stepper()
        .evolve(&init, &grid, &cfg.packet, &cfg.physical, times)
        .context("evolving packet")?;
    Ok((grid, ev))
}

pub(crate) fn write_fields(dir: &Path, grid: &Grid1D<f64>, ev: &Evolution<f64>) -> Result<()> {
    for (k, snap) in ev.snapshots.iter().enumerate() {
        let mut t = Table::new(&[("t", "time"), ("x", "length"), ("p", "1/length")]);
        for (x, &p) in grid.nodes().zip(snap.values()) {
            t.push(vec![snap.time(), x, p]);
        }
        t.write(&dir.join(indexed_name("field", k)))?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let dir = ensure_dir(out)?;
    let (grid, ev) = evolve_packet(cfg, &cfg.snapshot_times())?;
    let d = cfg.physical.diffusivity();
    let sigma0 = cfg.packet.sigma0();

    let mut series = Table::new(&[
        ("t", "time"),
        ("sigma_simulated", "length"),
        ("sigma_analytic", "length"),
        ("rel_error", "1"),
    ]);
    let mut max_rel = 0.0f64;
    let mut negative = false;
    let mut max_asym = 0.0f64;
    for snap in &ev.snapshots {
        let t = snap.time();
        let sim = second_moment_sigma(snap, &grid).context("second moment")?;
        let exact = analytic_sigma(t, sigma0, d).context("closed-form width")?;
        let rel = (sim - exact).abs() / exact;
        max_rel = max_rel.max(rel);
        negative |= snap.values().iter().any(|&v| v < 0.0);
        max_asym = max_asym.max(snap.asymmetry());
        series.push(vec![t, sim, exact, rel]);
    }
    series.write(&dir.join("sigma_timeseries.csv"))?;
    write_fields(&dir, &grid, &ev)?;
    stepper_report(&ev.report).write(&dir.join("stepper_report.txt"))?;

    let mut outcome = RunOutcome::default();
    outcome.checks.push(Check::at_most(
        "sigma_rel_error",
        max_rel,
        cfg.checks.sigma_rel_tol,
    ));
    outcome.checks.push(Check::at_most(
        "mass_drift",
        ev.report.mass_drift,
        cfg.checks.mass_drift_tol,
    ));
    outcome.checks.push(Check::new(
        "non_negative",
        !negative,
        if negative {
            "negative density found"
        } else {
            "all nodes >= 0"
        },
    ));
    outcome
        .checks
        .push(Check::at_most("mirror_asymmetry", max_asym, 1e-12));

    outcome.metric_push("dx", grid.dx());
    outcome.metric_push("nx", grid.nx() as f64);
    outcome.metric_push("max_sigma_rel_error", max_rel);
    outcome.metric_push("mass_drift", ev.report.mass_drift);
    outcome.metric_push("boundary_leak", ev.report.boundary_leak);
    outcome.metric_push("max_courant", ev.report.max_courant);
    outcome.write_summary(&dir)?;
    Ok(outcome)
}
