//! Two-beam composition `P_tot = P₁ + P₂ + 2√(P₁P₂)·cos φ` with
//! `φ = m·Δv_x·x/ħ`.
//!
//! Each beam is evolved in its co-moving frame by the ballistic stepper and
//! then translated by `v_i·t`. The two beams share one grid so the
//! composition is a per-node map.

use crate::analytic::analytic_sigma;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid1D;
use crate::params::{GaussianState, PhysicalParams, SlitConfig};
use crate::scalar::{lit, to_f64, Real};
use crate::stepper::{initial_field, Evolution, Stepper, LEAK_CELLS};

/// Phase difference `m·dvx·x/ħ` at transverse position `x`.
pub fn phase<T: Real>(x: T, dvx: T, params: &PhysicalParams<T>) -> T {
    params.mass() * dvx * x / params.hbar()
}

/// Distance `2πħ/(m·dvx)` between neighbouring interference maxima.
pub fn fringe_spacing<T: Real>(dvx: T, params: &PhysicalParams<T>) -> T {
    T::TAU() * params.hbar() / (params.mass() * dvx.abs())
}

/// Classical two-wave intensity rule.
pub fn compose_intensity<T: Real>(p1: T, p2: T, phi: T) -> Result<T> {
    if !(p1 >= T::zero()) {
        return Err(Error::validation(
            "p1",
            format!("density must be >= 0, got {}", p1),
        ));
    }
    if !(p2 >= T::zero()) {
        return Err(Error::validation(
            "p2",
            format!("density must be >= 0, got {}", p2),
        ));
    }
    let total = p1 + p2 + lit::<T>(2.0) * (p1 * p2).sqrt() * phi.cos();
    // (√p1 − √p2)² ≥ 0; clamp rounding below zero
    Ok(total.max(T::zero()))
}

/// Field translated by `offset`, resampled at the nodes by linear interpolation.
pub fn shift_field<T: Real>(field: &Field<T>, grid: &Grid1D<T>, offset: T) -> Field<T> {
    if offset == T::zero() {
        return field.clone();
    }
    let values = grid
        .nodes()
        .map(|x| field.interpolate(grid, x - offset))
        .collect();
    Field::from_parts_unchecked(field.time(), values)
}

/// Densities of both beams and their composition on a shared `(t, x)` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap<T> {
    pub times: Vec<T>,
    pub x_axis: Vec<T>,
    pub p1: Vec<Vec<T>>,
    pub p2: Vec<Vec<T>>,
    pub p_total: Vec<Vec<T>>,
}

impl<T: Real> IntensityMap<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_field(&self, index: usize) -> Field<T> {
        Field::from_parts_unchecked(self.times[index], self.p_total[index].clone())
    }

    pub fn total_fields(&self) -> Vec<Field<T>> {
        (0..self.len()).map(|i| self.total_field(i)).collect()
    }

    /// `p_total` at one snapshot rescaled to unit discrete mass.
    pub fn normalized_total(&self, index: usize, dx: T) -> Result<Vec<T>> {
        Ok(self.total_field(index).normalized(dx)?.into_values())
    }
}

/// Double-slit driver: stepper settings plus the span used to validate that
/// both beams stay inside the grid.
#[derive(Debug, Clone, Copy)]
pub struct DoubleSlit<T> {
    pub stepper: Stepper<T>,
    pub safety_span: T,
}

impl<T: Real> Default for DoubleSlit<T> {
    fn default() -> Self {
        Self {
            stepper: Stepper::default_settings(),
            safety_span: lit(10.0),
        }
    }
}

impl<T: Real> DoubleSlit<T> {
    fn check_domain(
        &self,
        slits: &SlitConfig<T>,
        grid: &Grid1D<T>,
        params: &PhysicalParams<T>,
        t_final: T,
    ) -> Result<()> {
        let reach =
            self.safety_span * analytic_sigma(t_final, slits.sigma0(), params.diffusivity())?;
        for (beam, v) in slits.beams() {
            for center in [beam.center(), beam.center() + v * t_final] {
                if center - reach < grid.x_min() || center + reach > grid.x_max() {
                    return Err(Error::DomainTooSmall {
                        time: to_f64(t_final),
                        leak: f64::NAN,
                        threshold: to_f64(self.stepper.settings.leak_threshold),
                    });
                }
            }
        }
        Ok(())
    }

    fn evolve_beam(
        &self,
        beam: &GaussianState<T>,
        grid: &Grid1D<T>,
        params: &PhysicalParams<T>,
        snapshot_times: &[T],
    ) -> Result<Evolution<T>> {
        let init = initial_field(beam, grid)?;
        self.stepper
            .evolve(&init, grid, beam, params, snapshot_times)
    }

    pub fn simulate(
        &self,
        slits: &SlitConfig<T>,
        grid: &Grid1D<T>,
        params: &PhysicalParams<T>,
        snapshot_times: &[T],
    ) -> Result<IntensityMap<T>> {
        let t_last = snapshot_times.last().copied().unwrap_or(T::zero());
        self.check_domain(slits, grid, params, t_last)?;
        let [(beam1, v1), (beam2, v2)] = slits.beams();

        let (ev1, ev2) = std::thread::scope(|s| {
            let h = s.spawn(|| self.evolve_beam(&beam2, grid, params, snapshot_times));
            let ev1 = self.evolve_beam(&beam1, grid, params, snapshot_times);
            (ev1, h.join().expect("beam evolution panicked"))
        });
        let (ev1, ev2) = (ev1?, ev2?);

        let threshold = self.stepper.settings.leak_threshold;
        let x_axis: Vec<T> = grid.nodes().collect();
        let mut map = IntensityMap {
            times: Vec::with_capacity(ev1.snapshots.len()),
            x_axis,
            p1: Vec::new(),
            p2: Vec::new(),
            p_total: Vec::new(),
        };
        for (f1, f2) in ev1.snapshots.iter().zip(&ev2.snapshots) {
            let t = f1.time();
            let s1 = shift_field(f1, grid, v1 * t);
            let s2 = shift_field(f2, grid, v2 * t);
            for s in [&s1, &s2] {
                let leak = s.boundary_fraction(LEAK_CELLS);
                if leak > threshold {
                    return Err(Error::DomainTooSmall {
                        time: to_f64(t),
                        leak: to_f64(leak),
                        threshold: to_f64(threshold),
                    });
                }
            }
            let total = s1
                .values()
                .iter()
                .zip(s2.values())
                .zip(&map.x_axis)
                .map(|((&a, &b), &x)| compose_intensity(a, b, phase(x, slits.dvx(), params)))
                .collect::<Result<Vec<_>>>()?;
            map.times.push(t);
            map.p1.push(s1.into_values());
            map.p2.push(s2.into_values());
            map.p_total.push(total);
        }
        Ok(map)
    }
}

/// [`DoubleSlit::simulate`] with default stepper settings and safety span.
pub fn simulate_double_slit<T: Real>(
    slits: &SlitConfig<T>,
    grid: &Grid1D<T>,
    params: &PhysicalParams<T>,
    snapshot_times: &[T],
) -> Result<IntensityMap<T>> {
    DoubleSlit::default().simulate(slits, grid, params, snapshot_times)
}

/// A detected interference maximum matched to the nearest closed-form one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeMaximum<T> {
    pub order: i64,
    pub x_detected: T,
    pub x_analytic: T,
    /// `|x_detected − x_analytic| / dx`.
    pub error_cells: T,
}

/// Envelope level, relative to its peak, below which the fringe factor is not evaluated.
pub const FRINGE_ENVELOPE_FLOOR: f64 = 1e-6;

/// Maxima of the fringe factor `cos φ = (P_tot − P₁ − P₂)/(2√(P₁P₂))` at
/// one snapshot, refined to sub-cell accuracy by a parabola through the
/// three nodes around each discrete peak.
pub fn fringe_maxima<T: Real>(
    map: &IntensityMap<T>,
    index: usize,
    dvx: T,
    params: &PhysicalParams<T>,
) -> Vec<FringeMaximum<T>> {
    if dvx == T::zero() || map.x_axis.len() < 3 {
        return Vec::new();
    }
    let (p1, p2, pt) = (&map.p1[index], &map.p2[index], &map.p_total[index]);
    let two = lit::<T>(2.0);
    let envelope: Vec<T> = p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| two * (a * b).sqrt())
        .collect();
    let peak = envelope.iter().fold(T::zero(), |m, &e| m.max(e));
    if !(peak > T::zero()) {
        return Vec::new();
    }
    let floor = peak * lit(FRINGE_ENVELOPE_FLOOR);
    let factor: Vec<Option<T>> = (0..pt.len())
        .map(|i| (envelope[i] >= floor).then(|| (pt[i] - p1[i] - p2[i]) / envelope[i]))
        .collect();

    let dx = map.x_axis[1] - map.x_axis[0];
    let spacing = fringe_spacing(dvx, params);
    let mut out = Vec::new();
    for i in 1..factor.len() - 1 {
        let (Some(l), Some(c), Some(r)) = (factor[i - 1], factor[i], factor[i + 1]) else {
            continue;
        };
        if !(c > l && c >= r && c > T::zero()) {
            continue;
        }
        let curvature = l - two * c + r;
        let offset = if curvature < T::zero() {
            ((l - r) / (two * curvature)).max(lit(-0.5)).min(lit(0.5))
        } else {
            T::zero()
        };
        let x = map.x_axis[i] + offset * dx;
        let order = (to_f64(x) / to_f64(spacing)).round();
        let x_analytic = lit::<T>(order) * spacing;
        out.push(FringeMaximum {
            order: order as i64,
            x_detected: x,
            x_analytic,
            error_cells: (x - x_analytic).abs() / dx,
        });
    }
    out
}

/// Mean distance between consecutive detected maxima.
pub fn measured_fringe_spacing<T: Real>(maxima: &[FringeMaximum<T>]) -> Option<T> {
    if maxima.len() < 2 {
        return None;
    }
    let first = maxima.first()?.x_detected;
    let last = maxima.last()?.x_detected;
    Some((last - first) / lit((maxima.len() - 1) as f64))
}
