//! Grid refinement study against the exact Gaussian solution.
//!
//! Each level halves `dx` and quarters `dt`, keeping the Courant number
//! fixed, so a second-order scheme shows error ratios near 4.

use std::path::Path;

use ballistic::analytic::exact_density;
use ballistic::Resolution;

use super::{ensure_dir, Check, RunOutcome};
use crate::config::RunConfig;
use crate::error::{CliError, Result, SimContext};
use crate::report::stepper_report;
use crate::table::Table;

pub const DEFAULT_REFINEMENTS: usize = 3;

/// Errors at `t_final` for one level: `(L∞, discrete L2)`.
fn level_errors(cfg: &RunConfig, dir: &Path) -> Result<(f64, f64, f64)> {
    let (grid, ev) = super::spread::evolve_packet(cfg, &[cfg.grid.t_final])?;
    let snap = ev.snapshots.last().expect("one snapshot requested");
    let d = cfg.physical.diffusivity();
    let mut linf = 0.0f64;
    let mut l2 = 0.0f64;
    let mut table = Table::new(&[
        ("x", "length"),
        ("p_simulated", "1/length"),
        ("p_exact", "1/length"),
    ]);
    for (x, &p) in grid.nodes().zip(snap.values()) {
        let exact = exact_density(x, snap.time(), &cfg.packet, d).context("exact density")?;
        let e = (p - exact).abs();
        linf = linf.max(e);
        l2 += e * e * grid.dx();
        table.push(vec![x, p, exact]);
    }
    table.write(&dir.join("field_final.csv"))?;
    stepper_report(&ev.report).write(&dir.join("stepper_report.txt"))?;
    Ok((grid.dx(), linf, l2.sqrt()))
}

pub fn run(cfg: &RunConfig, out: &Path, refinements: usize) -> Result<RunOutcome> {
    if refinements < 2 {
        return Err(CliError::Usage(format!(
            "--refinements must be at least 2 to estimate an order, got {}",
            refinements
        )));
    }
    let dir = ensure_dir(out)?;
    let dx0 = cfg
        .grid
        .auto_grid()
        .dx(cfg.packet.sigma0())
        .context("resolving base dx")?;
    let dt0 = cfg.grid.dt;

    let mut errors = Table::new(&[
        ("level", "1"),
        ("dx", "length"),
        ("dt", "time"),
        ("linf_error", "1/length"),
        ("l2_error", "1/sqrt(length)"),
    ]);
    let mut linf = Vec::new();
    for level in 0..=refinements {
        let scale = 2f64.powi(level as i32);
        let mut level_cfg = cfg.clone();
        level_cfg.grid.resolution = Resolution::Spacing(dx0 / scale);
        level_cfg.grid.dt = dt0 / (scale * scale);
        let level_dir = ensure_dir(&dir.join(format!("level_{}", level)))?;
        let (dx, e_inf, e_2) = level_errors(&level_cfg, &level_dir)?;
        errors.push(vec![level as f64, dx, level_cfg.grid.dt, e_inf, e_2]);
        linf.push(e_inf);
    }
    errors.write(&dir.join("convergence_errors.csv"))?;

    let mut orders = Table::new(&[("level", "1"), ("ratio", "1"), ("order", "1")]);
    let mut outcome = RunOutcome::default();
    let mut all_ok = true;
    let mut detail = Vec::new();
    for level in 1..linf.len() {
        let ratio = linf[level - 1] / linf[level];
        let order = ratio.log2();
        orders.push(vec![level as f64, ratio, order]);
        all_ok &= order >= cfg.checks.order_min && order <= cfg.checks.order_max;
        detail.push(format!("{:.3}", order));
        outcome.metric_push(&format!("order_{}", level), order);
    }
    orders.write(&dir.join("convergence_orders.csv"))?;
    outcome.checks.push(Check::new(
        "second_order",
        all_ok,
        format!(
            "orders [{}] within [{}, {}]",
            detail.join(", "),
            cfg.checks.order_min,
            cfg.checks.order_max
        ),
    ));
    outcome.metric_push(
        "finest_linf_error",
        *linf.last().expect("at least three levels"),
    );
    outcome.write_summary(&dir)?;
    Ok(outcome)
}
