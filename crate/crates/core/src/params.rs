//! Validated physical and configuration data shared across the simulator.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

fn require_positive<T: Real>(field: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(Error::validation(
            field,
            format!("must be finite and > 0, got {}", value),
        ))
    }
}

fn require_finite<T: Real>(field: &'static str, value: T) -> Result<T> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::validation(
            field,
            format!("must be finite, got {}", value),
        ))
    }
}

/// Reduced Planck constant, particle mass and the derived diffusivity `ħ/2m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    hbar: T,
    mass: T,
    diffusivity: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(hbar: T, mass: T) -> Result<Self> {
        let hbar = require_positive("hbar", hbar)?;
        let mass = require_positive("mass", mass)?;
        Ok(Self {
            hbar,
            mass,
            diffusivity: hbar / (lit::<T>(2.0) * mass),
        })
    }

    /// `ħ = 1`, `m = 1`, so `D = 1/2`.
    pub fn natural() -> Self {
        Self::new(T::one(), T::one()).expect("natural units are valid")
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// Constant diffusivity `D = ħ/(2m)`.
    pub fn diffusivity(&self) -> T {
        self.diffusivity
    }
}

/// See [`PhysicalParams::new`].
pub fn make_physical_params<T: Real>(hbar: T, mass: T) -> Result<PhysicalParams<T>> {
    PhysicalParams::new(hbar, mass)
}

/// Anomalous diffusion law with coefficient `D_t(t) = k·t^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralDiffusionLaw<T> {
    k: T,
    alpha: T,
}

impl<T: Real> GeneralDiffusionLaw<T> {
    pub fn new(k: T, alpha: T) -> Result<Self> {
        if !(k.is_finite() && k >= T::zero()) {
            return Err(Error::validation(
                "k",
                format!("must be finite and >= 0, got {}", k),
            ));
        }
        if !(alpha.is_finite() && alpha >= T::zero()) {
            return Err(Error::validation(
                "alpha",
                format!("must be finite and >= 0, got {}", alpha),
            ));
        }
        Ok(Self { k, alpha })
    }

    /// The only member of the family whose Gaussian solution spreads as
    /// `σ₀√(1 + D²t²/σ₀⁴)`: `alpha = 1`, `k = D²/σ₀²`.
    pub fn ballistic(state: &GaussianState<T>, params: &PhysicalParams<T>) -> Self {
        let d = params.diffusivity();
        let s0 = state.sigma0();
        Self {
            k: d * d / (s0 * s0),
            alpha: T::one(),
        }
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn coefficient(&self, t: T) -> T {
        self.k * t.powf(self.alpha)
    }

    /// Variance gained since `t = 0`: `2k·t^(α+1)/(α+1)`.
    pub fn variance_growth(&self, t: T) -> T {
        let a1 = self.alpha + T::one();
        lit::<T>(2.0) * self.k * t.powf(a1) / a1
    }
}

/// Gaussian packet at `t = 0`: initial standard deviation and mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState<T> {
    sigma0: T,
    center: T,
}

impl<T: Real> GaussianState<T> {
    pub fn new(sigma0: T, center: T) -> Result<Self> {
        Ok(Self {
            sigma0: require_positive("sigma0", sigma0)?,
            center: require_finite("center", center)?,
        })
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    pub fn center(&self) -> T {
        self.center
    }
}

/// Two Gaussian slits at `∓separation/2` emitting beams with transverse
/// drifts `v1` (left slit) and `v2` (right slit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitConfig<T> {
    separation: T,
    sigma0: T,
    v1: T,
    v2: T,
    dvx: T,
}

impl<T: Real> SlitConfig<T> {
    pub fn new(separation: T, sigma0: T, v1: T, v2: T) -> Result<Self> {
        let v1 = require_finite("v1", v1)?;
        let v2 = require_finite("v2", v2)?;
        Ok(Self {
            separation: require_positive("separation", separation)?,
            sigma0: require_positive("sigma0", sigma0)?,
            v1,
            v2,
            dvx: v1 - v2,
        })
    }

    /// Mirror-symmetric beams: `v1 = v_mean + dvx/2`, `v2 = v_mean − dvx/2`.
    pub fn from_velocity_difference(separation: T, sigma0: T, dvx: T, v_mean: T) -> Result<Self> {
        let dvx = require_finite("dvx", dvx)?;
        let half = dvx / lit(2.0);
        let mut cfg = Self::new(separation, sigma0, v_mean + half, v_mean - half)?;
        cfg.dvx = dvx;
        Ok(cfg)
    }

    pub fn separation(&self) -> T {
        self.separation
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    pub fn v1(&self) -> T {
        self.v1
    }

    pub fn v2(&self) -> T {
        self.v2
    }

    pub fn dvx(&self) -> T {
        self.dvx
    }

    /// Beam 1 starts at `−separation/2`, beam 2 at `+separation/2`.
    pub fn beams(&self) -> [(GaussianState<T>, T); 2] {
        let half = self.separation / lit(2.0);
        [
            (
                GaussianState {
                    sigma0: self.sigma0,
                    center: -half,
                },
                self.v1,
            ),
            (
                GaussianState {
                    sigma0: self.sigma0,
                    center: half,
                },
                self.v2,
            ),
        ]
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        self.v1 == -self.v2
    }
}

impl<T: Real> std::fmt::Display for SlitConfig<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "slits(separation={}, sigma0={}, v1={}, v2={})",
            to_f64(self.separation),
            to_f64(self.sigma0),
            to_f64(self.v1),
            to_f64(self.v2)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diffusivity_is_hbar_over_two_mass() {
        assert_eq!(make_physical_params(1.0, 0.5).unwrap().diffusivity(), 1.0);
        assert_eq!(make_physical_params(1.0, 1.0).unwrap().diffusivity(), 0.5);
        assert_eq!(PhysicalParams::<f32>::natural().diffusivity(), 0.5);
    }

    #[test]
    fn rejects_non_positive_inputs_by_name() {
        match make_physical_params(0.0, 1.0) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "hbar"),
            other => panic!("unexpected {:?}", other),
        }
        match make_physical_params(1.0, -2.0) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "mass"),
            other => panic!("unexpected {:?}", other),
        }
        assert!(make_physical_params(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn construction_is_bitwise_reproducible() {
        let a = make_physical_params(1.054_571_817e-34f64, 9.109_383_7e-31).unwrap();
        let b = make_physical_params(1.054_571_817e-34f64, 9.109_383_7e-31).unwrap();
        assert_eq!(a.diffusivity().to_bits(), b.diffusivity().to_bits());
    }

    #[test]
    fn ballistic_law() {
        let params = PhysicalParams::new(1.0, 1.0).unwrap();
        let state = GaussianState::new(2.0, 0.0).unwrap();
        let law = GeneralDiffusionLaw::ballistic(&state, &params);
        assert_eq!(law.alpha(), 1.0);
        assert_eq!(law.k(), 0.25 / 4.0);
        assert_eq!(law.coefficient(4.0), 0.25);
        assert!(GeneralDiffusionLaw::new(-1.0, 1.0).is_err());
        assert!(GeneralDiffusionLaw::new(1.0, -0.5).is_err());
    }

    #[test]
    fn slit_velocity_difference() {
        let s = SlitConfig::new(4.0, 1.0, 0.75, -0.25).unwrap();
        assert_eq!(s.dvx(), 1.0);
        let m = SlitConfig::from_velocity_difference(4.0, 1.0, 2.0, 0.0).unwrap();
        assert_eq!((m.v1(), m.v2(), m.dvx()), (1.0, -1.0, 2.0));
        assert!(m.is_mirror_symmetric());
        let [(b1, _), (b2, _)] = m.beams();
        assert_eq!((b1.center(), b2.center()), (-2.0, 2.0));
        assert!(SlitConfig::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(GaussianState::new(0.0, 0.0).is_err());
    }
}
