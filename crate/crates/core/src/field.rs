use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scalar::{lit, Real};

/// Probability density sampled on the grid nodes at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    time: T,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    /// Rejects negative or non-finite samples.
    pub fn new(time: T, values: Vec<T>) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::validation("time", "must be finite"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= T::zero()))
        {
            return Err(Error::validation(
                "values",
                format!("sample {} is {}, densities must be finite and >= 0", i, v),
            ));
        }
        Ok(Self { time, values })
    }

    pub(crate) fn from_parts_unchecked(time: T, values: Vec<T>) -> Self {
        Self { time, values }
    }

    /// Samples `density(x)` at every node.
    pub fn sample(grid: &Grid1D<T>, time: T, density: impl Fn(T) -> T) -> Result<Self> {
        Self::new(time, grid.nodes().map(density).collect())
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete mass `Σ P_i·dx`.
    pub fn mass(&self, dx: T) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v) * dx
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc.max(v))
    }

    /// Rescales to discrete mass 1.
    pub fn normalized(&self, dx: T) -> Result<Self> {
        let mass = self.mass(dx);
        if !(mass > T::zero()) {
            return Err(Error::validation("field", "zero mass cannot be normalized"));
        }
        Ok(Self {
            time: self.time,
            values: self.values.iter().map(|&v| v / mass).collect(),
        })
    }

    /// Fraction of the mass held within `cells` nodes of either edge.
    pub fn boundary_fraction(&self, cells: usize) -> T {
        let n = self.values.len();
        let total: T = self.values.iter().fold(T::zero(), |acc, &v| acc + v);
        if !(total > T::zero()) {
            return T::zero();
        }
        let k = cells.min(n / 2);
        let edge = self.values[..k]
            .iter()
            .chain(&self.values[n - k..])
            .fold(T::zero(), |acc, &v| acc + v);
        edge / total
    }

    /// Largest `|P(x) − P(mirror(x))|` about the middle node.
    pub fn asymmetry(&self) -> T {
        let n = self.values.len();
        (0..n / 2).fold(T::zero(), |acc, i| {
            acc.max((self.values[i] - self.values[n - 1 - i]).abs())
        })
    }

    /// Value at an arbitrary position by linear interpolation, zero outside the grid.
    pub fn interpolate(&self, grid: &Grid1D<T>, x: T) -> T {
        let s = (x - grid.x_min()) / grid.dx();
        if !(s >= T::zero()) {
            return T::zero();
        }
        let last = lit::<T>((self.values.len() - 1) as f64);
        if s > last {
            return T::zero();
        }
        let i = s.floor().to_usize().unwrap_or(0).min(self.values.len() - 1);
        if i + 1 >= self.values.len() {
            return self.values[i];
        }
        let w = s - lit::<T>(i as f64);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_samples() {
        assert!(Field::new(0.0, vec![0.0, -1e-3, 0.0]).is_err());
        assert!(Field::new(0.0, vec![0.0, f64::NAN]).is_err());
        assert!(Field::new(f64::INFINITY, vec![0.0]).is_err());
    }

    #[test]
    fn mass_and_normalization() {
        let f = Field::new(0.0, vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(f.mass(0.5), 2.0);
        let n = f.normalized(0.5).unwrap();
        assert_eq!(n.mass(0.5), 1.0);
        assert!(Field::new(0.0, vec![0.0; 3])
            .unwrap()
            .normalized(1.0)
            .is_err());
    }

    #[test]
    fn boundary_fraction_counts_both_edges() {
        let f = Field::new(0.0, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.boundary_fraction(1), 3.0 / 4.0);
        assert_eq!(f.boundary_fraction(2), 1.0);
    }

    #[test]
    fn interpolation_is_linear_and_zero_outside() {
        let grid = Grid1D::new(0.0, 1.0, 3, 0.1, 1).unwrap();
        let f = Field::new(0.0, vec![0.0, 2.0, 4.0]).unwrap();
        assert_eq!(f.interpolate(&grid, 0.5), 1.0);
        assert_eq!(f.interpolate(&grid, 2.0), 4.0);
        assert_eq!(f.interpolate(&grid, -0.1), 0.0);
        assert_eq!(f.interpolate(&grid, 2.1), 0.0);
    }
}
