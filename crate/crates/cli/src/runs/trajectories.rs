//! Flux lines traced as quantile paths of the simulated density.

use std::path::Path;

use ballistic::analytic::{analytic_flux_line_velocity, analytic_sigma, standard_normal_quantile};
use ballistic::trajectories::{flux_between, path_velocity, trace_flux_lines};
use ballistic::{Field, Grid1D, TrajectorySet};

use super::{ensure_dir, Check, RunOutcome};
use crate::config::{DensitySource, RunConfig};
use crate::error::{Result, SimContext};
use crate::table::Table;

fn is_median(q: f64) -> bool {
    (q - 0.5).abs() < 1e-12
}

fn write_paths(dir: &Path, set: &TrajectorySet<f64>, v_y: f64) -> Result<()> {
    let mut t = Table::new(&[
        ("quantile", "1"),
        ("t", "time"),
        ("y_display", "length"),
        ("x", "length"),
    ]);
    for (&q, path) in set.quantiles().iter().zip(set.paths()) {
        for &(time, x) in path {
            t.push(vec![q, time, v_y * time, x]);
        }
    }
    t.write(&dir.join("trajectories.csv"))
}

/// Mass in each tube between neighbouring lines against the quantile gap.
fn flux_check(
    dir: &Path,
    set: &TrajectorySet<f64>,
    fields: &[Field<f64>],
    grid: &Grid1D<f64>,
    outcome: &mut RunOutcome,
) -> Result<()> {
    let mut t = Table::new(&[
        ("tube", "1"),
        ("t", "time"),
        ("flux", "1"),
        ("expected", "1"),
        ("abs_deviation", "1"),
    ]);
    let peak = fields.iter().map(|f| f.max_value()).fold(0.0, f64::max);
    let allowed = grid.dx() * peak;
    let mut worst = 0.0f64;
    let qs = set.quantiles();
    for tube in 0..qs.len().saturating_sub(1) {
        let expected = qs[tube + 1] - qs[tube];
        for (k, field) in fields.iter().enumerate() {
            let a = set.path(tube)[k].1;
            let b = set.path(tube + 1)[k].1;
            let flux = flux_between(field, grid, a, b);
            let dev = (flux - expected).abs();
            worst = worst.max(dev);
            t.push(vec![tube as f64, field.time(), flux, expected, dev]);
        }
    }
    t.write(&dir.join("flux.csv"))?;
    outcome
        .checks
        .push(Check::at_most("constant_flux", worst, allowed));
    outcome.metric_push("max_flux_deviation", worst);
    Ok(())
}

fn single_beam(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<()> {
    let (grid, ev) = super::spread::evolve_packet(cfg, &cfg.snapshot_times())?;
    let qs = &cfg.trajectories.quantiles;
    let set = trace_flux_lines(&ev.snapshots, &grid, qs).context("tracing flux lines")?;
    write_paths(dir, &set, cfg.trajectories.v_y)?;
    outcome.checks.push(Check::new(
        "non_crossing",
        set.is_non_crossing(),
        "neighbouring lines stay ordered",
    ));

    let d = cfg.physical.diffusivity();
    let sigma0 = cfg.packet.sigma0();
    let c = cfg.packet.center();
    let dx = grid.dx();

    let mut homothety = Table::new(&[
        ("quantile", "1"),
        ("t", "time"),
        ("x_simulated", "length"),
        ("x_predicted", "length"),
        ("abs_deviation", "length"),
        ("allowed", "length"),
    ]);
    let mut homothety_ok = true;
    let mut worst_ratio = 0.0f64;
    for (&q, path) in qs.iter().zip(set.paths()) {
        let x0 = path[0].1;
        for &(t, x) in path {
            let scale = analytic_sigma(t, sigma0, d).context("closed-form width")? / sigma0;
            let predicted = c + (x0 - c) * scale;
            let dev = (x - predicted).abs();
            let allowed = if is_median(q) {
                dx
            } else {
                cfg.checks.homothety_rel_tol * (predicted - c).abs()
            };
            homothety_ok &= dev <= allowed;
            if allowed > 0.0 {
                worst_ratio = worst_ratio.max(dev / allowed);
            }
            homothety.push(vec![q, t, x, predicted, dev, allowed]);
        }
    }
    homothety.write(&dir.join("homothety.csv"))?;
    outcome.checks.push(Check::new(
        "homothety",
        homothety_ok,
        format!("worst deviation {:.3} of allowance", worst_ratio),
    ));
    outcome.metric_push("homothety_worst_fraction", worst_ratio);

    flux_check(dir, &set, &ev.snapshots, &grid, outcome)?;

    if ev.snapshots.len() >= 2 {
        let mut table = Table::new(&[
            ("quantile", "1"),
            ("t", "time"),
            ("tau", "1"),
            ("v_simulated", "length/time"),
            ("v_analytic", "length/time"),
            ("v_asymptote", "length/time"),
        ]);
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for (&q, path) in qs.iter().zip(set.paths()) {
            let z = standard_normal_quantile(q).context("normal quantile")?;
            let asymptote = z * d / sigma0;
            for (t, v) in path_velocity(path).context("line velocity")? {
                let exact = analytic_flux_line_velocity(q, t, &cfg.packet, d)
                    .context("closed-form velocity")?;
                let tau = d * t / (sigma0 * sigma0);
                table.push(vec![q, t, tau, v, exact, asymptote]);
                if tau >= cfg.checks.velocity_min_tau && !is_median(q) {
                    worst = worst.max(((v - asymptote) / asymptote).abs());
                    checked += 1;
                }
            }
        }
        table.write(&dir.join("velocity.csv"))?;
        if checked > 0 {
            outcome.checks.push(Check::at_most(
                "velocity_asymptote",
                worst,
                cfg.checks.velocity_rel_tol,
            ));
        }
        outcome.metric_push("velocity_samples_checked", checked as f64);
        outcome.metric_push(
            "velocity_worst_rel_error",
            if checked > 0 { worst } else { f64::NAN },
        );
    }
    outcome.metric_push("dx", dx);
    Ok(())
}

fn double_slit(cfg: &RunConfig, dir: &Path, outcome: &mut RunOutcome) -> Result<()> {
    let slits = cfg.require_slits()?;
    let (grid, map) = super::doubleslit::simulate(cfg, &cfg.snapshot_times())?;
    let dx = grid.dx();
    let fields = (0..map.len())
        .map(|k| map.total_field(k).normalized(dx))
        .collect::<ballistic::Result<Vec<_>>>()
        .context("normalizing intensity")?;
    let qs = &cfg.trajectories.quantiles;
    let set = trace_flux_lines(&fields, &grid, qs).context("tracing flux lines")?;
    write_paths(dir, &set, cfg.trajectories.v_y)?;
    outcome.checks.push(Check::new(
        "non_crossing",
        set.is_non_crossing(),
        "neighbouring lines stay ordered",
    ));
    if slits.is_mirror_symmetric() {
        // lines never cross the symmetry axis x = 0
        let mut worst = 0.0f64;
        for (&q, path) in qs.iter().zip(set.paths()) {
            for &(_, x) in path {
                let wrong_side = if is_median(q) {
                    x.abs()
                } else if q < 0.5 {
                    x.max(0.0)
                } else {
                    (-x).max(0.0)
                };
                worst = worst.max(wrong_side);
            }
        }
        outcome
            .checks
            .push(Check::at_most("symmetry_axis", worst, dx));
    }
    flux_check(dir, &set, &fields, &grid, outcome)?;
    outcome.metric_push("dx", dx);
    Ok(())
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let dir = ensure_dir(out)?;
    let mut outcome = RunOutcome::default();
    match cfg.trajectories.source {
        DensitySource::SingleBeam => single_beam(cfg, &dir, &mut outcome)?,
        DensitySource::DoubleSlit => double_slit(cfg, &dir, &mut outcome)?,
    }
    outcome.write_summary(&dir)?;
    Ok(outcome)
}
