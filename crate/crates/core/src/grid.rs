//! Uniform space-time mesh and automatic domain sizing.

use crate::analytic::analytic_sigma;
use crate::error::{Error, Result};
use crate::params::{GaussianState, PhysicalParams, SlitConfig};
use crate::scalar::{from_count, lit, to_f64, Real};

/// Default ceiling on the node count of an automatically sized grid.
pub const DEFAULT_NX_CAP: usize = 1 << 22;

pub const MIN_POINTS_PER_SIGMA0: f64 = 8.0;
pub const MIN_SAFETY_SPAN: f64 = 5.0;

/// Uniform 1D mesh `x_i = x_min + i·dx`, `i ∈ [0, nx)`, advanced in
/// `n_steps` macro steps of length `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    x_min: T,
    dx: T,
    nx: usize,
    dt: T,
    n_steps: usize,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, dx: T, nx: usize, dt: T, n_steps: usize) -> Result<Self> {
        if !x_min.is_finite() {
            return Err(Error::validation("x_min", "must be finite"));
        }
        if !(dx.is_finite() && dx > T::zero()) {
            return Err(Error::validation("dx", format!("must be > 0, got {}", dx)));
        }
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::validation("dt", format!("must be > 0, got {}", dt)));
        }
        if nx < 3 {
            return Err(Error::validation(
                "nx",
                format!("need at least 3 nodes, got {}", nx),
            ));
        }
        if n_steps < 1 {
            return Err(Error::validation("n_steps", "need at least one macro step"));
        }
        Ok(Self {
            x_min,
            dx,
            nx,
            dt,
            n_steps,
        })
    }

    /// Odd node count with `center` on the middle node and at least
    /// `half_width` on each side.
    pub fn centered(
        center: T,
        half_width: T,
        dx: T,
        dt: T,
        n_steps: usize,
        nx_cap: usize,
    ) -> Result<Self> {
        if !(half_width.is_finite() && half_width >= T::zero()) {
            return Err(Error::validation("half_width", "must be finite and >= 0"));
        }
        if !(dx.is_finite() && dx > T::zero()) {
            return Err(Error::validation("dx", format!("must be > 0, got {}", dx)));
        }
        let half_cells = (to_f64(half_width) / to_f64(dx)).ceil().max(1.0);
        let nx = 2.0 * half_cells + 1.0;
        if !(nx <= nx_cap as f64) {
            return Err(Error::Resource(format!(
                "grid would need {:.3e} nodes (cap {}); increase dx, reduce t_final or safety_span, or raise nx_cap",
                nx, nx_cap
            )));
        }
        let half_cells = half_cells as usize;
        Self::new(
            center - from_count::<T>(half_cells) * dx,
            dx,
            2 * half_cells + 1,
            dt,
            n_steps,
        )
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x(self.nx - 1)
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t_final(&self) -> T {
        self.time_of_step(self.n_steps)
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_min + from_count::<T>(i) * self.dx
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        (0..self.nx).map(move |i| self.x(i))
    }

    pub fn time_of_step(&self, step: usize) -> T {
        from_count::<T>(step) * self.dt
    }

    /// Macro step closest to `t`.
    pub fn nearest_step(&self, t: T) -> usize {
        let k = (to_f64(t) / to_f64(self.dt)).round();
        if k <= 0.0 {
            0
        } else {
            k as usize
        }
    }

    pub fn with_time_stepping(&self, dt: T, n_steps: usize) -> Result<Self> {
        Self::new(self.x_min, self.dx, self.nx, dt, n_steps)
    }
}

/// Number of macro steps of size `dt` needed to reach `t_final`.
pub fn steps_to_reach<T: Real>(t_final: T, dt: T) -> usize {
    let ratio = to_f64(t_final) / to_f64(dt);
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    (steps as usize).max(1)
}

/// How the spatial step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution<T> {
    /// Explicit `dx`.
    Spacing(T),
    /// `dx = σ₀ / n`.
    PointsPerSigma0(T),
}

/// Sizes a grid so the packet stays well inside the domain up to `t_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoGrid<T> {
    pub resolution: Resolution<T>,
    pub safety_span: T,
    pub nx_cap: usize,
}

impl<T: Real> AutoGrid<T> {
    pub fn new(resolution: Resolution<T>, safety_span: T) -> Self {
        Self {
            resolution,
            safety_span,
            nx_cap: DEFAULT_NX_CAP,
        }
    }

    pub fn with_nx_cap(mut self, nx_cap: usize) -> Self {
        self.nx_cap = nx_cap;
        self
    }

    /// Spatial step for a packet of width `sigma0`; at least 8 nodes per σ₀.
    pub fn dx(&self, sigma0: T) -> Result<T> {
        let min_pps = lit::<T>(MIN_POINTS_PER_SIGMA0);
        match self.resolution {
            Resolution::PointsPerSigma0(n) => {
                if !(n.is_finite() && n >= min_pps) {
                    return Err(Error::validation(
                        "points_per_sigma0",
                        format!("must be >= {}, got {}", MIN_POINTS_PER_SIGMA0, n),
                    ));
                }
                Ok(sigma0 / n)
            }
            Resolution::Spacing(dx) => {
                if !(dx.is_finite() && dx > T::zero()) {
                    return Err(Error::validation("dx", format!("must be > 0, got {}", dx)));
                }
                if sigma0 / dx < min_pps {
                    return Err(Error::validation(
                        "dx",
                        format!(
                            "{} resolves sigma0 = {} with fewer than {} points",
                            dx, sigma0, MIN_POINTS_PER_SIGMA0
                        ),
                    ));
                }
                Ok(dx)
            }
        }
    }

    fn check_common(&self, t_final: T, dt: T) -> Result<()> {
        if !(self.safety_span.is_finite() && self.safety_span >= lit(MIN_SAFETY_SPAN)) {
            return Err(Error::validation(
                "safety_span",
                format!("must be >= {}, got {}", MIN_SAFETY_SPAN, self.safety_span),
            ));
        }
        if !(t_final.is_finite() && t_final >= T::zero()) {
            return Err(Error::validation(
                "t_final",
                format!("must be >= 0, got {}", t_final),
            ));
        }
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::validation("dt", format!("must be > 0, got {}", dt)));
        }
        Ok(())
    }

    /// Grid centered on the packet with half-width `safety_span·σ(t_final)`.
    pub fn build(
        &self,
        state: &GaussianState<T>,
        params: &PhysicalParams<T>,
        t_final: T,
        dt: T,
    ) -> Result<Grid1D<T>> {
        self.check_common(t_final, dt)?;
        let dx = self.dx(state.sigma0())?;
        let sigma_end = analytic_sigma(t_final, state.sigma0(), params.diffusivity())?;
        Grid1D::centered(
            state.center(),
            self.safety_span * sigma_end,
            dx,
            dt,
            steps_to_reach(t_final, dt),
            self.nx_cap,
        )
    }

    /// Grid centered between the slits, wide enough for both beams in their
    /// co-moving frames and after drifting by `v_i·t_final`.
    pub fn build_for_slits(
        &self,
        slits: &SlitConfig<T>,
        params: &PhysicalParams<T>,
        t_final: T,
        dt: T,
    ) -> Result<Grid1D<T>> {
        self.check_common(t_final, dt)?;
        let dx = self.dx(slits.sigma0())?;
        let half_width = slit_half_width(slits, params, t_final, self.safety_span)?;
        Grid1D::centered(
            T::zero(),
            half_width,
            dx,
            dt,
            steps_to_reach(t_final, dt),
            self.nx_cap,
        )
    }
}

/// Smallest half-width about the slit midpoint that keeps every beam's
/// `center ± safety_span·σ(t)` inside, before and after its drift.
pub fn slit_half_width<T: Real>(
    slits: &SlitConfig<T>,
    params: &PhysicalParams<T>,
    t_final: T,
    safety_span: T,
) -> Result<T> {
    let sigma_end = analytic_sigma(t_final, slits.sigma0(), params.diffusivity())?;
    Ok(slits
        .beams()
        .iter()
        .map(|(beam, v)| beam.center().abs() + v.abs() * t_final + safety_span * sigma_end)
        .fold(T::zero(), T::max))
}

/// [`AutoGrid::build`] with an explicit points-per-σ₀ and the default cap.
pub fn auto_grid<T: Real>(
    state: &GaussianState<T>,
    params: &PhysicalParams<T>,
    t_final: T,
    dt: T,
    points_per_sigma0: T,
    safety_span: T,
) -> Result<Grid1D<T>> {
    AutoGrid::new(Resolution::PointsPerSigma0(points_per_sigma0), safety_span)
        .build(state, params, t_final, dt)
}
