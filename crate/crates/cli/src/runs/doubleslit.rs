//! Two Gaussian beams composed with their interference term.

use std::path::Path;

use ballistic::interference::{fringe_maxima, fringe_spacing, measured_fringe_spacing};
use ballistic::{DoubleSlit, Grid1D, IntensityMap};

use super::{ensure_dir, indexed_name, Check, RunOutcome};
use crate::config::RunConfig;
use crate::error::{Result, SimContext};
use crate::table::Table;

pub(crate) fn simulate(cfg: &RunConfig, times: &[f64]) -> Result<(Grid1D<f64>, IntensityMap<f64>)> {
    let slits = cfg.require_slits()?;
    let grid = cfg
        .grid
        .auto_grid()
        .build_for_slits(&slits, &cfg.physical, cfg.grid.t_final, cfg.grid.dt)
        .context("building grid")?;
    let driver = DoubleSlit {
        stepper: cfg.grid.stepper(),
        safety_span: cfg.grid.safety_span,
    };
    let map = driver
        .simulate(&slits, &grid, &cfg.physical, times)
        .context("simulating double slit")?;
    Ok((grid, map))
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let dir = ensure_dir(out)?;
    let slits = cfg.require_slits()?;
    let (grid, map) = simulate(cfg, &cfg.snapshot_times())?;
    let dx = grid.dx();
    let dvx = slits.dvx();

    let mut negative = false;
    let mut envelope_excess = 0.0f64;
    let mut identity_error = 0.0f64;
    for k in 0..map.len() {
        let total = if cfg.output.normalize_total {
            map.normalized_total(k, dx)
                .context("normalizing intensity")?
        } else {
            map.p_total[k].clone()
        };
        let mut t = Table::new(&[
            ("t", "time"),
            ("x", "length"),
            ("p1", "1/length"),
            ("p2", "1/length"),
            ("p_total", "1/length"),
        ]);
        let peak = map.p_total[k].iter().fold(0.0f64, |m, &v| m.max(v));
        let slack = 16.0 * f64::EPSILON * peak;
        for (i, &exported) in total.iter().enumerate() {
            let (a, b, p) = (map.p1[k][i], map.p2[k][i], map.p_total[k][i]);
            t.push(vec![map.times[k], map.x_axis[i], a, b, exported]);
            negative |= p < 0.0;
            let upper = (a.sqrt() + b.sqrt()).powi(2);
            let lower = (a.sqrt() - b.sqrt()).powi(2);
            envelope_excess = envelope_excess.max((p - upper - slack).max(lower - p - slack));
            identity_error = identity_error.max((p - upper).abs());
        }
        t.write(&dir.join(indexed_name("intensity", k)))?;
    }

    let mut fringes = Table::new(&[
        ("t", "time"),
        ("n", "1"),
        ("x_detected", "length"),
        ("x_analytic", "length"),
        ("error_cells", "1"),
    ]);
    let mut max_cells = 0.0f64;
    let mut count_last = 0usize;
    let mut spacing_measured = f64::NAN;
    for k in 0..map.len() {
        let maxima = fringe_maxima(&map, k, dvx, &cfg.physical);
        for m in &maxima {
            fringes.push(vec![
                map.times[k],
                m.order as f64,
                m.x_detected,
                m.x_analytic,
                m.error_cells,
            ]);
            max_cells = max_cells.max(m.error_cells);
        }
        if k + 1 == map.len() {
            count_last = maxima.len();
            spacing_measured = measured_fringe_spacing(&maxima).unwrap_or(f64::NAN);
        }
    }
    fringes.write(&dir.join("fringes.csv"))?;

    let mut outcome = RunOutcome::default();
    outcome.checks.push(Check::new(
        "non_negative",
        !negative,
        if negative {
            "negative intensity found"
        } else {
            "all nodes >= 0"
        },
    ));
    outcome.checks.push(Check::new(
        "within_envelope",
        envelope_excess <= 0.0,
        format!("largest excess {:.3e}", envelope_excess.max(0.0)),
    ));
    let spacing_analytic = if dvx == 0.0 {
        f64::INFINITY
    } else {
        fringe_spacing(dvx, &cfg.physical)
    };
    if dvx == 0.0 {
        outcome.checks.push(Check::at_most(
            "equal_phase_identity",
            identity_error,
            cfg.checks.composition_abs_tol,
        ));
    } else {
        let detected = count_last > 0;
        outcome.checks.push(Check::new(
            "fringe_positions",
            detected && max_cells <= cfg.checks.fringe_max_cells,
            if detected {
                format!("{:.4} cells <= {}", max_cells, cfg.checks.fringe_max_cells)
            } else {
                "no maxima detected".to_string()
            },
        ));
    }

    outcome.metric_push("dx", dx);
    outcome.metric_push("nx", grid.nx() as f64);
    outcome.metric_push("dvx", dvx);
    outcome.metric_push("fringe_spacing_analytic", spacing_analytic);
    outcome.metric_push("fringe_spacing_measured", spacing_measured);
    outcome.metric_push("fringe_count", count_last as f64);
    outcome.metric_push("max_error_cells", max_cells);
    outcome.metric_push(
        "equal_phase_error",
        if dvx == 0.0 { identity_error } else { f64::NAN },
    );
    outcome.write_summary(&dir)?;
    Ok(outcome)
}
