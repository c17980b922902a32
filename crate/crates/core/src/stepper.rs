//! Explicit finite-difference integration of `∂P/∂t = D_t ∂²P/∂x²`.
//!
//! Each update is `P[i] ← P[i] + ν·(P[i+1] − 2P[i] + P[i−1])` with
//! `ν = D_t(t_end)·δt/dx²`, the coefficient taken at the end of the step.
//! `D_t` grows linearly in time, so a fixed `dt` eventually violates the
//! stability bound; macro steps are split into equal substeps whenever
//! the end-time `ν` exceeds the configured limit. Edge nodes are held at
//! zero and the mass near them is monitored.

use crate::analytic::{diffusion_coefficient, gaussian_pdf};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid1D;
use crate::params::{GaussianState, PhysicalParams};
use crate::scalar::{from_count, lit, to_f64, Real};

/// Courant limit used for substepping.
pub const STABILITY_LIMIT: f64 = 0.4;
/// Von Neumann bound of the three-point explicit scheme.
pub const VON_NEUMANN_LIMIT: f64 = 0.5;
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-6;
/// Width of the edge band counted as boundary leak.
pub const LEAK_CELLS: usize = 3;

/// Accepted deviation of the initial mass from 1.
pub fn mass_tolerance<T: Real>() -> T {
    lit::<T>(1e-9).max(lit::<T>(64.0) * T::epsilon())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperSettings<T> {
    pub stability_limit: T,
    pub leak_threshold: T,
}

impl<T: Real> Default for StepperSettings<T> {
    fn default() -> Self {
        Self {
            stability_limit: lit(STABILITY_LIMIT),
            leak_threshold: lit(DEFAULT_LEAK_THRESHOLD),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperReport<T> {
    pub macro_steps: usize,
    pub total_substeps: usize,
    /// Largest `ν` applied in any substep.
    pub max_courant: T,
    /// `|final mass − initial mass| / initial mass`.
    pub mass_drift: T,
    /// Largest fraction of mass within [`LEAK_CELLS`] of an edge at any snapshot.
    pub boundary_leak: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution<T> {
    pub snapshots: Vec<Field<T>>,
    pub report: StepperReport<T>,
}

/// Writes one explicit update of `src` into `dst`; edge nodes are set to zero.
///
/// Written as `(1 − 2ν)·P + ν·(P_left + P_right)` so a non-negative input
/// stays non-negative for `ν ≤ 1/2` and mirrored inputs give mirrored outputs.
fn apply_stencil<T: Real>(src: &[T], dst: &mut [T], nu: T) {
    let n = src.len();
    debug_assert_eq!(n, dst.len());
    let keep = T::one() - (nu + nu);
    for (out, w) in dst[1..n - 1].iter_mut().zip(src.windows(3)) {
        *out = keep * w[1] + nu * (w[0] + w[2]);
    }
    dst[0] = T::zero();
    dst[n - 1] = T::zero();
}

fn check_nu<T: Real>(nu: T, limit: T) -> Result<()> {
    if nu.is_finite() && nu >= T::zero() && nu <= limit {
        Ok(())
    } else {
        Err(Error::Stability {
            nu: to_f64(nu),
            limit: to_f64(limit),
        })
    }
}

/// One explicit step with Courant number `nu ∈ [0, 1/2]`.
pub fn fd_step<T: Real>(field: &Field<T>, nu: T) -> Result<Field<T>> {
    if field.len() < 3 {
        return Err(Error::validation("field", "need at least 3 nodes"));
    }
    check_nu(nu, lit(VON_NEUMANN_LIMIT))?;
    let mut out = vec![T::zero(); field.len()];
    apply_stencil(field.values(), &mut out, nu);
    Ok(Field::from_parts_unchecked(field.time(), out))
}

/// `D_t(t_next)·dt/dx²` for a full macro step ending at `t_next`.
pub fn courant_number<T: Real>(
    t_next: T,
    grid: &Grid1D<T>,
    sigma0: T,
    diffusivity: T,
) -> Result<T> {
    let dx = grid.dx();
    Ok(diffusion_coefficient(t_next, sigma0, diffusivity)? * grid.dt() / (dx * dx))
}

/// Grid-sampled Gaussian rescaled to discrete mass exactly 1.
pub fn initial_field<T: Real>(state: &GaussianState<T>, grid: &Grid1D<T>) -> Result<Field<T>> {
    let values = grid
        .nodes()
        .map(|x| gaussian_pdf(x, state.center(), state.sigma0()))
        .collect::<Result<Vec<_>>>()?;
    Field::new(T::zero(), values)?.normalized(grid.dx())
}

/// Discrete mean position `Σ P x / Σ P`.
pub fn mean_position<T: Real>(field: &Field<T>, grid: &Grid1D<T>) -> Result<T> {
    let (mass, first) = field
        .values()
        .iter()
        .zip(grid.nodes())
        .fold((T::zero(), T::zero()), |(m, f), (&p, x)| (m + p, f + p * x));
    if !(mass > T::zero()) {
        return Err(Error::validation("field", "zero mass has no moments"));
    }
    Ok(first / mass)
}

/// Standard deviation measured from the discrete second central moment.
pub fn second_moment_sigma<T: Real>(field: &Field<T>, grid: &Grid1D<T>) -> Result<T> {
    let mean = mean_position(field, grid)?;
    let (mass, second) =
        field
            .values()
            .iter()
            .zip(grid.nodes())
            .fold((T::zero(), T::zero()), |(m, s), (&p, x)| {
                let d = x - mean;
                (m + p, s + p * d * d)
            });
    Ok((second / mass).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct Stepper<T> {
    pub settings: StepperSettings<T>,
}

impl<T: Real> Stepper<T> {
    pub fn default_settings() -> Self {
        Self {
            settings: StepperSettings::default(),
        }
    }

    pub fn new(settings: StepperSettings<T>) -> Result<Self> {
        let limit = settings.stability_limit;
        if !(limit > T::zero() && limit <= lit(VON_NEUMANN_LIMIT)) {
            return Err(Error::validation(
                "stability_limit",
                format!("must lie in (0, {}], got {}", VON_NEUMANN_LIMIT, limit),
            ));
        }
        if !(settings.leak_threshold > T::zero() && settings.leak_threshold.is_finite()) {
            return Err(Error::validation(
                "leak_threshold",
                "must be finite and > 0",
            ));
        }
        Ok(Self { settings })
    }

    /// Courant number of substep `j` (1-based) when the macro step from
    /// `t_start` is split into `s` parts.
    fn substep_courant(
        &self,
        t_start: T,
        j: usize,
        s: usize,
        grid: &Grid1D<T>,
        sigma0: T,
        d: T,
    ) -> Result<T> {
        let h = grid.dt() / from_count(s);
        let dx = grid.dx();
        let t_end = t_start + from_count::<T>(j) * h;
        Ok(diffusion_coefficient(t_end, sigma0, d)? * h / (dx * dx))
    }

    /// Smallest substep count that keeps every substep of the macro step
    /// starting at `t_start` within the stability limit.
    fn substeps(&self, t_start: T, grid: &Grid1D<T>, sigma0: T, d: T) -> Result<usize> {
        let limit = self.settings.stability_limit;
        let nu_end = courant_number(t_start + grid.dt(), grid, sigma0, d)?;
        let mut s = (to_f64(nu_end) / to_f64(limit)).ceil().max(1.0) as usize;
        // the last substep carries the largest coefficient; rounding can push it over
        while self.substep_courant(t_start, s, s, grid, sigma0, d)? > limit {
            s += 1;
        }
        Ok(s)
    }

    /// Advances `initial` and returns the field at each requested time,
    /// snapped to the nearest macro step.
    pub fn evolve(
        &self,
        initial: &Field<T>,
        grid: &Grid1D<T>,
        state: &GaussianState<T>,
        params: &PhysicalParams<T>,
        snapshot_times: &[T],
    ) -> Result<Evolution<T>> {
        if initial.len() != grid.nx() {
            return Err(Error::validation(
                "initial",
                format!("field has {} nodes, grid has {}", initial.len(), grid.nx()),
            ));
        }
        let dx = grid.dx();
        let initial_mass = initial.mass(dx);
        if !((initial_mass - T::one()).abs() <= mass_tolerance()) {
            return Err(Error::validation(
                "initial",
                format!(
                    "mass {} is not 1 within {}",
                    initial_mass,
                    mass_tolerance::<T>()
                ),
            ));
        }
        let horizon = grid.t_final() * (T::one() + lit(1e-9));
        for (i, &t) in snapshot_times.iter().enumerate() {
            if !(t >= T::zero() && t <= horizon) {
                return Err(Error::validation(
                    "snapshot_times",
                    format!("{} outside [0, {}]", t, grid.t_final()),
                ));
            }
            if i > 0 && t < snapshot_times[i - 1] {
                return Err(Error::validation("snapshot_times", "must be sorted"));
            }
        }
        let targets: Vec<usize> = snapshot_times
            .iter()
            .map(|&t| grid.nearest_step(t))
            .collect();
        let last_step = targets.last().copied().unwrap_or(0);

        let d = params.diffusivity();
        let threshold = self.settings.leak_threshold;
        let mut report = StepperReport {
            macro_steps: 0,
            total_substeps: 0,
            max_courant: T::zero(),
            mass_drift: T::zero(),
            boundary_leak: T::zero(),
        };
        let mut snapshots = Vec::with_capacity(targets.len());
        let mut current = initial.values().to_vec();
        let mut scratch = vec![T::zero(); current.len()];
        let mut next_target = 0;

        for step in 0..=last_step {
            let now = grid.time_of_step(step);
            while next_target < targets.len() && targets[next_target] == step {
                let snap = Field::from_parts_unchecked(now, current.clone());
                let leak = snap.boundary_fraction(LEAK_CELLS);
                report.boundary_leak = report.boundary_leak.max(leak);
                if leak > threshold {
                    return Err(Error::DomainTooSmall {
                        time: to_f64(now),
                        leak: to_f64(leak),
                        threshold: to_f64(threshold),
                    });
                }
                snapshots.push(snap);
                next_target += 1;
            }
            if step == last_step {
                break;
            }
            let s = self.substeps(now, grid, state.sigma0(), d)?;
            for j in 1..=s {
                let nu = self.substep_courant(now, j, s, grid, state.sigma0(), d)?;
                check_nu(nu, self.settings.stability_limit)?;
                apply_stencil(&current, &mut scratch, nu);
                std::mem::swap(&mut current, &mut scratch);
                report.max_courant = report.max_courant.max(nu);
            }
            report.macro_steps += 1;
            report.total_substeps += s;
        }

        let final_mass = current.iter().fold(T::zero(), |acc, &v| acc + v) * dx;
        report.mass_drift = (final_mass - initial_mass).abs() / initial_mass;
        Ok(Evolution { snapshots, report })
    }
}

/// [`Stepper::evolve`] with default settings.
pub fn evolve<T: Real>(
    initial: &Field<T>,
    grid: &Grid1D<T>,
    state: &GaussianState<T>,
    params: &PhysicalParams<T>,
    snapshot_times: &[T],
) -> Result<Evolution<T>> {
    Stepper::default_settings().evolve(initial, grid, state, params, snapshot_times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::analytic_sigma;
    use crate::grid::{AutoGrid, Resolution};

    #[test]
    fn uniform_interior_is_unchanged() {
        let f = Field::new(0.0f64, vec![2.0; 7]).unwrap();
        for nu in [0.0, 0.1, 0.25, 0.4, 0.5] {
            let g = fd_step(&f, nu).unwrap();
            for &v in &g.values()[1..6] {
                assert!((v - 2.0).abs() < 1e-15);
            }
            assert_eq!((g.values()[0], g.values()[6]), (0.0, 0.0));
        }
    }

    #[test]
    fn stencil_arithmetic() {
        let f = Field::new(0.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(fd_step(&f, 0.25).unwrap().values(), &[0.0, 0.5, 0.0]);
        let f = Field::new(0.0, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            fd_step(&f, 0.5).unwrap().values(),
            &[0.0, 0.5, 0.0, 0.5, 0.0]
        );
    }

    #[test]
    fn rejects_unstable_courant() {
        let f = Field::new(0.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(fd_step(&f, 0.51), Err(Error::Stability { .. })));
        assert!(matches!(fd_step(&f, -0.01), Err(Error::Stability { .. })));
        assert!(fd_step(&Field::new(0.0, vec![1.0, 1.0]).unwrap(), 0.1).is_err());
    }

    #[test]
    fn courant_examples() {
        let grid = Grid1D::new(-1.0f64, 0.1, 21, 0.001, 10).unwrap();
        assert_eq!(courant_number(0.0, &grid, 1.0, 1.0).unwrap(), 0.0);
        assert!((courant_number(1.0, &grid, 1.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        let nu = courant_number(10.0, &grid, 1.0, 1.0).unwrap();
        assert!((nu - 1.0).abs() < 1e-14);
        assert!(nu > STABILITY_LIMIT);
    }

    #[test]
    fn second_moment_examples() {
        let grid = Grid1D::centered(0.0f64, 10.0, 0.01, 0.1, 1, 1 << 22).unwrap();
        let g = Field::sample(&grid, 0.0, |x| gaussian_pdf(x, 0.0, 1.0).unwrap()).unwrap();
        assert!((second_moment_sigma(&g, &grid).unwrap() - 1.0).abs() < 1e-6);

        let a = 0.75f64;
        let two_point = Grid1D::new(-a, a, 3, 0.1, 1).unwrap();
        let f = Field::new(0.0, vec![0.5 / a, 0.0, 0.5 / a]).unwrap();
        assert!((second_moment_sigma(&f, &two_point).unwrap() - a).abs() < 1e-15);

        // uniform on [−L/2, L/2]: discrete variance L²/12·(n+1)/(n−1)
        let n = 1001;
        let l = 4.0;
        let ugrid = Grid1D::new(-l / 2.0, l / (n - 1) as f64, n, 0.1, 1).unwrap();
        let u = Field::new(0.0, vec![1.0 / l; n]).unwrap();
        let s = second_moment_sigma(&u, &ugrid).unwrap();
        assert!((s - l / 12f64.sqrt()).abs() < 2.0 * ugrid.dx());

        assert!(second_moment_sigma(&Field::new(0.0, vec![0.0; 3]).unwrap(), &two_point).is_err());
    }

    fn spread_setup(
        dx: f64,
        dt: f64,
        t_final: f64,
    ) -> (Grid1D<f64>, GaussianState<f64>, PhysicalParams<f64>) {
        let params = PhysicalParams::natural();
        let state = GaussianState::new(1.0, 0.0).unwrap();
        let grid = AutoGrid::new(Resolution::Spacing(dx), 10.0)
            .build(&state, &params, t_final, dt)
            .unwrap();
        (grid, state, params)
    }

    #[test]
    fn zero_time_snapshot_is_initial_field() {
        let (grid, state, params) = spread_setup(0.05, 0.01, 1.0);
        let init = initial_field(&state, &grid).unwrap();
        let ev = evolve(&init, &grid, &state, &params, &[0.0]).unwrap();
        assert_eq!(ev.snapshots[0], init);
        assert_eq!(ev.report.macro_steps, 0);
    }

    #[test]
    fn spreading_matches_closed_form() {
        let (grid, state, params) = spread_setup(0.02, 0.01, 2.0);
        let init = initial_field(&state, &grid).unwrap();
        let ev = evolve(&init, &grid, &state, &params, &[0.5, 1.0, 2.0]).unwrap();
        for snap in &ev.snapshots {
            let sim = second_moment_sigma(snap, &grid).unwrap();
            let exact = analytic_sigma(snap.time(), 1.0, 0.5).unwrap();
            assert!(((sim - exact) / exact).abs() < 0.005);
        }
        assert!((ev.snapshots[2].time() - 2.0).abs() < 1e-12);
        assert!(ev.report.max_courant <= STABILITY_LIMIT);
        assert!(ev.report.mass_drift <= 1e-9);
        assert!(ev.report.boundary_leak < 1e-12);
        assert!(ev.report.total_substeps > ev.report.macro_steps);
    }

    #[test]
    fn even_fields_stay_even() {
        let (grid, state, params) = spread_setup(0.05, 0.02, 3.0);
        let init = initial_field(&state, &grid).unwrap();
        let ev = evolve(&init, &grid, &state, &params, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        for snap in &ev.snapshots {
            assert!(snap.asymmetry() <= 1e-12);
            assert!(snap.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn undersized_domain_is_reported() {
        let params = PhysicalParams::natural();
        let state = GaussianState::new(1.0, 0.0).unwrap();
        let grid = Grid1D::centered(0.0, 6.0, 0.05, 0.01, 800, 1 << 20).unwrap();
        let init = initial_field(&state, &grid).unwrap();
        match evolve(&init, &grid, &state, &params, &[0.0, 8.0]) {
            Err(Error::DomainTooSmall { time, .. }) => assert_eq!(time, 8.0),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn rejects_unnormalized_or_misordered_input() {
        let (grid, state, params) = spread_setup(0.05, 0.01, 1.0);
        let init = initial_field(&state, &grid).unwrap();
        let doubled = Field::new(0.0, init.values().iter().map(|v| 2.0 * v).collect()).unwrap();
        assert!(evolve(&doubled, &grid, &state, &params, &[0.5]).is_err());
        assert!(evolve(&init, &grid, &state, &params, &[0.5, 0.2]).is_err());
        assert!(evolve(&init, &grid, &state, &params, &[2.0]).is_err());
        assert!(Stepper::new(StepperSettings {
            stability_limit: 0.6,
            leak_threshold: 1e-6
        })
        .is_err());
    }

    #[test]
    fn single_precision_run() {
        let params = PhysicalParams::<f32>::natural();
        let state = GaussianState::new(1.0f32, 0.0).unwrap();
        let grid = AutoGrid::new(Resolution::Spacing(0.05f32), 10.0)
            .build(&state, &params, 2.0, 0.01)
            .unwrap();
        let init = initial_field(&state, &grid).unwrap();
        let ev = evolve(&init, &grid, &state, &params, &[2.0]).unwrap();
        let sim = second_moment_sigma(&ev.snapshots[0], &grid).unwrap();
        let exact = analytic_sigma(2.0f32, 1.0, 0.5).unwrap();
        assert!(((sim - exact) / exact).abs() < 0.005);
    }
}
