//! Classical simulation of Gaussian wave-packet spreading and two-beam
//! interference as ballistic diffusion, `∂P/∂t = D_t ∂²P/∂x²` with
//! `D_t = D²t/σ₀²` and `D = ħ/2m`.
//!
//! All numerics are generic over [`Real`]; the aliases at the crate root
//! fix the scalar to `f64` or `f32`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod field;
pub mod grid;
pub mod interference;
pub mod params;
pub mod scalar;
pub mod stepper;
pub mod trajectories;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::{auto_grid, AutoGrid, Grid1D, Resolution};
pub use interference::{DoubleSlit, FringeMaximum, IntensityMap};
pub use params::{
    make_physical_params, GaussianState, GeneralDiffusionLaw, PhysicalParams, SlitConfig,
};
pub use scalar::Real;
pub use stepper::{Evolution, Stepper, StepperReport, StepperSettings};
pub use trajectories::TrajectorySet;

pub type PhysicalParamsF64 = PhysicalParams<f64>;
pub type GeneralDiffusionLawF64 = GeneralDiffusionLaw<f64>;
pub type GaussianStateF64 = GaussianState<f64>;
pub type SlitConfigF64 = SlitConfig<f64>;
pub type Grid1DF64 = Grid1D<f64>;
pub type FieldF64 = Field<f64>;
pub type TrajectorySetF64 = TrajectorySet<f64>;
pub type IntensityMapF64 = IntensityMap<f64>;
pub type StepperReportF64 = StepperReport<f64>;

pub type PhysicalParamsF32 = PhysicalParams<f32>;
pub type GaussianStateF32 = GaussianState<f32>;
pub type SlitConfigF32 = SlitConfig<f32>;
pub type Grid1DF32 = Grid1D<f32>;
pub type FieldF32 = Field<f32>;
pub type TrajectorySetF32 = TrajectorySet<f32>;
pub type IntensityMapF32 = IntensityMap<f32>;
