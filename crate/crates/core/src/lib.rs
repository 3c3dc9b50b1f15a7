//! Calibrated geometry for G₂ and Spin(7) structures on flat model spaces.
//!
//! The crate covers the octonionic cross products, the calibration forms
//! φ₀, *φ₀, Ψ and the tangent-valued form χ, associative and Cayley planes,
//! the Lie algebra g₂ as a stabilizer, the metric-preserving family φ_λ,
//! and a periodic-lattice twisted Dirac operator with Seiberg–Witten type
//! residuals.

pub mod deformations;
pub mod dirac;
pub mod error;
pub mod forms;
pub mod grassmann;
pub mod lattice;
pub mod lie;
pub mod octonion;
pub mod spectral;
pub mod sw;
pub mod verify;

pub use error::{Error, Result};
