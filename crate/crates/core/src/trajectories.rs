//! Flux lines as quantile paths of the density.
//!
//! A flux line keeps the mass on either side of it fixed, so following the
//! `q`-quantile of each snapshot traces it directly; adjacent lines bound a
//! tube whose enclosed mass equals the quantile gap at all times.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid1D;
use crate::scalar::{lit, Real};

/// Quantile paths `x_q(t)`, one per quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet<T> {
    quantiles: Vec<T>,
    paths: Vec<Vec<(T, T)>>,
}

fn check_quantiles<T: Real>(quantiles: &[T]) -> Result<()> {
    for (i, &q) in quantiles.iter().enumerate() {
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::validation(
                "quantiles",
                format!("{} is outside (0, 1)", q),
            ));
        }
        if i > 0 && !(q > quantiles[i - 1]) {
            return Err(Error::validation(
                "quantiles",
                "must be strictly increasing",
            ));
        }
    }
    Ok(())
}

impl<T: Real> TrajectorySet<T> {
    pub fn new(quantiles: Vec<T>, paths: Vec<Vec<(T, T)>>) -> Result<Self> {
        check_quantiles(&quantiles)?;
        if paths.len() != quantiles.len() {
            return Err(Error::validation(
                "paths",
                "need exactly one path per quantile",
            ));
        }
        let set = Self { quantiles, paths };
        if !set.is_non_crossing() {
            return Err(Error::validation("paths", "flux lines cross"));
        }
        Ok(set)
    }

    pub fn quantiles(&self) -> &[T] {
        &self.quantiles
    }

    pub fn paths(&self) -> &[Vec<(T, T)>] {
        &self.paths
    }

    pub fn path(&self, index: usize) -> &[(T, T)] {
        &self.paths[index]
    }

    /// Every pair of neighbouring paths is ordered at every shared sample.
    pub fn is_non_crossing(&self) -> bool {
        self.paths.windows(2).all(|pair| {
            pair[0]
                .iter()
                .zip(&pair[1])
                .all(|(a, b)| a.0 == b.0 && a.1 <= b.1)
        })
    }
}

/// Trapezoid cumulative integral from `x_min`, rescaled so the last entry is 1.
pub fn cumulative<T: Real>(field: &Field<T>, grid: &Grid1D<T>) -> Result<Vec<T>> {
    let values = field.values();
    if values.len() != grid.nx() {
        return Err(Error::validation("field", "length does not match the grid"));
    }
    let half_dx = grid.dx() / lit(2.0);
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(values.len());
    out.push(T::zero());
    for w in values.windows(2) {
        acc = acc + (w[0] + w[1]) * half_dx;
        out.push(acc);
    }
    if !(acc > T::zero()) {
        return Err(Error::validation(
            "field",
            "zero mass has no cumulative distribution",
        ));
    }
    for c in out.iter_mut() {
        *c = *c / acc;
    }
    *out.last_mut().expect("non-empty") = T::one();
    Ok(out)
}

/// Position where the piecewise-linear cumulative reaches `q`; leftmost on plateaus.
pub fn invert_cdf<T: Real>(cumulative: &[T], grid: &Grid1D<T>, q: T) -> Result<T> {
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::validation(
            "q",
            format!("quantile must lie in (0, 1), got {}", q),
        ));
    }
    if cumulative.len() != grid.nx() {
        return Err(Error::validation(
            "cumulative",
            "length does not match the grid",
        ));
    }
    let j = cumulative.partition_point(|&c| c < q);
    if j == 0 {
        return Ok(grid.x(0));
    }
    if j >= cumulative.len() {
        return Ok(grid.x_max());
    }
    let (lo, hi) = (cumulative[j - 1], cumulative[j]);
    Ok(grid.x(j - 1) + (q - lo) / (hi - lo) * grid.dx())
}

/// Follows each quantile through the snapshot sequence.
pub fn trace_flux_lines<T: Real>(
    snapshots: &[Field<T>],
    grid: &Grid1D<T>,
    quantiles: &[T],
) -> Result<TrajectorySet<T>> {
    check_quantiles(quantiles)?;
    if snapshots.windows(2).any(|w| w[1].time() < w[0].time()) {
        return Err(Error::validation("snapshots", "must be ordered in time"));
    }
    let mut paths = vec![Vec::with_capacity(snapshots.len()); quantiles.len()];
    for snap in snapshots {
        let cdf = cumulative(snap, grid)?;
        for (path, &q) in paths.iter_mut().zip(quantiles) {
            path.push((snap.time(), invert_cdf(&cdf, grid, q)?));
        }
    }
    Ok(TrajectorySet {
        quantiles: quantiles.to_vec(),
        paths,
    })
}

/// Finite-difference velocity along a sampled path: central in the interior,
/// one-sided at the ends. Two samples give a single forward difference.
pub fn path_velocity<T: Real>(path: &[(T, T)]) -> Result<Vec<(T, T)>> {
    let n = path.len();
    if n < 2 {
        return Err(Error::validation(
            "snapshots",
            "need at least 2 to estimate velocity",
        ));
    }
    let slope = |a: (T, T), b: (T, T)| (b.1 - a.1) / (b.0 - a.0);
    if n == 2 {
        return Ok(vec![(path[0].0, slope(path[0], path[1]))]);
    }
    Ok((0..n)
        .map(|k| {
            let v = match k {
                0 => slope(path[0], path[1]),
                k if k == n - 1 => slope(path[n - 2], path[n - 1]),
                k => slope(path[k - 1], path[k + 1]),
            };
            (path[k].0, v)
        })
        .collect())
}

/// Flux-line velocities `(t, dx_q/dt)` for each quantile.
pub fn velocity_field<T: Real>(
    snapshots: &[Field<T>],
    grid: &Grid1D<T>,
    quantiles: &[T],
) -> Result<Vec<Vec<(T, T)>>> {
    if snapshots.len() < 2 {
        return Err(Error::validation(
            "snapshots",
            "need at least 2 to estimate velocity",
        ));
    }
    let set = trace_flux_lines(snapshots, grid, quantiles)?;
    set.paths().iter().map(|p| path_velocity(p)).collect()
}

/// Mass between `a < b` by the trapezoid rule on the linearly interpolated
/// density, including the partial cells at both ends.
pub fn flux_between<T: Real>(field: &Field<T>, grid: &Grid1D<T>, a: T, b: T) -> T {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let half = lit::<T>(0.5);
    let f = |x: T| field.interpolate(grid, x);
    let first = ((a - grid.x_min()) / grid.dx()).ceil().max(T::zero());
    let last = ((b - grid.x_min()) / grid.dx()).floor();
    let (Some(i0), Some(i1)) = (first.to_usize(), last.to_usize()) else {
        return half * (f(a) + f(b)) * (b - a);
    };
    let i1 = i1.min(grid.nx() - 1);
    if i0 > i1 {
        return half * (f(a) + f(b)) * (b - a);
    }
    let v = field.values();
    let mut total = half * (f(a) + v[i0]) * (grid.x(i0) - a);
    for i in i0..i1 {
        total = total + half * (v[i] + v[i + 1]) * grid.dx();
    }
    total + half * (v[i1] + f(b)) * (b - grid.x(i1))
}
