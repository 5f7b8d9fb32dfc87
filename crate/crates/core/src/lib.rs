//! Vector-field certificates for prescribed-point area bounds of minimal
//! submanifolds in the space forms `ℍⁿ`, `ℝⁿ` and `𝕊ⁿ`.

pub mod cli;
pub mod domains;
pub mod error;
pub mod field;
pub mod geodesics;
pub mod geometry;
pub mod numerics;
pub mod ode;
pub mod profiles;
pub mod quadrature;
pub mod surfaces;

pub use error::{Error, Result};
pub use geometry::{AxisChart, Curvature, KPlane, Point, SpaceForm, TangentVector};
