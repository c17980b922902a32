use ballistic::analytic::{
    analytic_flux_line, analytic_sigma, exact_density, linear_fit, standard_normal_quantile,
};
use ballistic::stepper::{evolve, initial_field, second_moment_sigma};
use ballistic::trajectories::{flux_between, trace_flux_lines, velocity_field};
use ballistic::{AutoGrid, Evolution, GaussianState, Grid1D, PhysicalParams, Resolution};

fn run(dx: f64, dt: f64, t_final: f64, times: &[f64]) -> (Grid1D<f64>, Evolution<f64>) {
    let params = PhysicalParams::natural();
    let state = GaussianState::new(1.0, 0.0).unwrap();
    let grid = AutoGrid::new(Resolution::Spacing(dx), 10.0)
        .build(&state, &params, t_final, dt)
        .unwrap();
    let init = initial_field(&state, &grid).unwrap();
    let ev = evolve(&init, &grid, &state, &params, times).unwrap();
    (grid, ev)
}

fn linf_error(grid: &Grid1D<f64>, ev: &Evolution<f64>) -> f64 {
    let state = GaussianState::new(1.0, 0.0).unwrap();
    let snap = ev.snapshots.last().unwrap();
    snap.values()
        .iter()
        .zip(grid.nodes())
        .map(|(&p, x)| (p - exact_density(x, snap.time(), &state, 0.5).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn halving_dx_quarters_the_error() {
    let mut errors = Vec::new();
    let (mut dx, mut dt) = (0.1, 0.006);
    for _ in 0..4 {
        let (grid, ev) = run(dx, dt, 2.0, &[2.0]);
        errors.push(linf_error(&grid, &ev));
        dx /= 2.0;
        dt /= 4.0;
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "errors {:?}", errors);
    }
}

#[test]
fn variance_grows_ballistically() {
    let times: Vec<f64> = (10..=100).map(f64::from).collect();
    let (grid, ev) = run(0.125, 0.05, 100.0, &times);
    let points: Vec<(f64, f64)> = ev
        .snapshots
        .iter()
        .map(|s| {
            (
                s.time().ln(),
                second_moment_sigma(s, &grid).unwrap().powi(2).ln(),
            )
        })
        .collect();
    let (slope, _) = linear_fit(&points);
    assert!((slope - 2.0).abs() <= 0.02, "slope {}", slope);
    // normal diffusion would give slope 1
    assert!(slope > 1.9);
}

#[test]
fn conservation_and_symmetry() {
    let times: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
    let (_, ev) = run(0.02, 0.01, 4.0, &times);
    assert!(ev.report.mass_drift <= 1e-9, "{:?}", ev.report);
    assert!(ev.report.boundary_leak < 1e-12);
    for s in &ev.snapshots {
        assert!(s.values().iter().all(|&v| v >= 0.0));
        assert!(s.asymmetry() <= 1e-12);
        assert!((s.mass(0.02) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn flux_lines_are_homothetic_and_carry_constant_flux() {
    let times: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
    let (grid, ev) = run(0.02, 0.01, 4.0, &times);
    let qs: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let set = trace_flux_lines(&ev.snapshots, &grid, &qs).unwrap();
    assert!(set.is_non_crossing());
    let state = GaussianState::new(1.0, 0.0).unwrap();
    for (qi, &q) in qs.iter().enumerate() {
        let path = set.path(qi);
        let x0 = path[0].1;
        for &(t, x) in path {
            let ratio = analytic_sigma(t, 1.0, 0.5).unwrap();
            if (q - 0.5f64).abs() < 1e-12 {
                assert!(x.abs() <= grid.dx());
            } else {
                assert!(((x / x0) - ratio).abs() <= 0.01 * ratio, "q {} t {}", q, t);
                let exact = analytic_flux_line(q, t, &state, 0.5).unwrap();
                assert!((x - exact).abs() <= 0.01 * exact.abs());
            }
        }
    }
    let peak = ev
        .snapshots
        .iter()
        .map(|s| s.max_value())
        .fold(0.0, f64::max);
    for pair in 0..qs.len() - 1 {
        let f0 = flux_between(
            &ev.snapshots[0],
            &grid,
            set.path(pair)[0].1,
            set.path(pair + 1)[0].1,
        );
        for (k, snap) in ev.snapshots.iter().enumerate() {
            let f = flux_between(snap, &grid, set.path(pair)[k].1, set.path(pair + 1)[k].1);
            assert!((f - f0).abs() <= grid.dx() * peak);
            assert!((f - 0.1).abs() <= grid.dx() * peak);
        }
    }
}

#[test]
fn line_velocities_approach_ballistic_asymptote() {
    let times: Vec<f64> = (0..=30).map(f64::from).collect();
    let (grid, ev) = run(0.1, 0.05, 30.0, &times);
    let qs = [0.1, 0.3, 0.5, 0.8413447460685429, 0.9];
    let vel = velocity_field(&ev.snapshots, &grid, &qs).unwrap();
    for (qi, &q) in qs.iter().enumerate() {
        let z = standard_normal_quantile(q).unwrap();
        for &(t, v) in &vel[qi] {
            if q == 0.5 {
                assert!(v.abs() < 1e-6);
            } else if 0.5 * t >= 10.0 {
                let asymptote = z * 0.5;
                assert!(
                    ((v - asymptote) / asymptote).abs() <= 0.02,
                    "q {} t {} v {}",
                    q,
                    t,
                    v
                );
            }
        }
    }
}
