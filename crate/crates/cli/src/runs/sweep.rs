//! Parameter sweeps: one run per point of the Cartesian product of the
//! `[sweep]` value lists, executed on a worker pool.

use std::path::Path;

use rayon::prelude::*;

use super::{ensure_dir, Check, RunOutcome};
use crate::config::{RunConfig, SweepSpec};
use crate::error::{CliError, Result};
use crate::table::Table;

/// Override sets in manifest order; the first axis varies slowest.
pub fn points(spec: &SweepSpec) -> Vec<Vec<(String, String)>> {
    let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &spec.axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((key.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    out
}

fn run_point(
    cfg: &RunConfig,
    kind: &str,
    overrides: &[(String, String)],
    dir: &Path,
) -> Result<RunOutcome> {
    let point_cfg = cfg.with_overrides(overrides)?;
    match kind {
        "spread" => super::spread::run(&point_cfg, dir),
        "doubleslit" => super::doubleslit::run(&point_cfg, dir),
        "trajectories" => super::trajectories::run(&point_cfg, dir),
        other => Err(CliError::Usage(format!("cannot sweep `{}`", other))),
    }
}

/// Runs every point and writes `manifest.csv`. A point that fails to run is
/// recorded with status −1 and its error text in `error.txt`.
pub fn run(cfg: &RunConfig, out: &Path, workers: usize) -> Result<RunOutcome> {
    let spec = cfg.sweep.clone().ok_or_else(|| CliError::Config {
        location: cfg.origin().to_string(),
        key: "[sweep]".into(),
        message: "section required for sweeps".into(),
    })?;
    let dir = ensure_dir(out)?;
    let points = points(&spec);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {}", workers, e)))?;
    let results: Vec<Result<RunOutcome>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, overrides)| {
                let point_dir = dir.join(format!("point_{:04}", i));
                let result = run_point(cfg, &spec.run, overrides, &point_dir);
                if let Err(e) = &result {
                    // the manifest already records the failure
                    let _ = std::fs::create_dir_all(&point_dir).and_then(|_| {
                        std::fs::write(point_dir.join("error.txt"), format!("{}\n", e))
                    });
                }
                result
            })
            .collect()
    });

    let mut metric_names: Vec<String> = Vec::new();
    for r in results.iter().flatten() {
        for (name, _) in &r.metrics {
            if !metric_names.contains(name) {
                metric_names.push(name.clone());
            }
        }
    }
    let mut columns: Vec<(String, String)> = vec![("point".into(), "1".into())];
    columns.extend(
        spec.axes
            .iter()
            .map(|(k, _)| (k.clone(), "input".to_string())),
    );
    columns.push(("status".into(), "1".into()));
    columns.extend(
        metric_names
            .iter()
            .map(|m| (m.clone(), "metric".to_string())),
    );
    let spec_refs: Vec<(&str, &str)> = columns
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mut manifest = Table::new(&spec_refs);

    let mut outcome = RunOutcome::default();
    for (i, (overrides, result)) in points.iter().zip(&results).enumerate() {
        let mut row = vec![i as f64];
        row.extend(
            overrides
                .iter()
                .map(|(_, v)| v.parse::<f64>().expect("validated numeric")),
        );
        let name = format!("point_{:04}", i);
        match result {
            Ok(r) => {
                row.push(if r.passed() { 1.0 } else { 0.0 });
                row.extend(metric_names.iter().map(|m| r.metric(m).unwrap_or(f64::NAN)));
                let failed: Vec<&str> = r
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                let detail = if failed.is_empty() {
                    "all checks pass".to_string()
                } else {
                    format!("failed: {}", failed.join(", "))
                };
                outcome.checks.push(Check::new(&name, r.passed(), detail));
            }
            Err(e) => {
                row.push(-1.0);
                row.extend(metric_names.iter().map(|_| f64::NAN));
                outcome
                    .checks
                    .push(Check::new(&name, false, format!("error: {}", e)));
            }
        }
        manifest.push(row);
    }
    manifest.write(&dir.join("manifest.csv"))?;
    outcome.metric_push("points", points.len() as f64);
    outcome.write_summary(&dir)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_product_order() {
        let spec = SweepSpec {
            run: "spread".into(),
            axes: vec![
                ("grid.dt".into(), vec!["0.1".into(), "0.2".into()]),
                (
                    "packet.sigma0".into(),
                    vec!["1".into(), "2".into(), "3".into()],
                ),
            ],
        };
        let p = points(&spec);
        assert_eq!(p.len(), 6);
        assert_eq!(
            p[0],
            vec![
                ("grid.dt".into(), "0.1".into()),
                ("packet.sigma0".into(), "1".into())
            ]
        );
        assert_eq!(
            p[3],
            vec![
                ("grid.dt".into(), "0.2".into()),
                ("packet.sigma0".into(), "1".into())
            ]
        );
    }
}
