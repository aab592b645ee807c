//! Variable-exponent Lebesgue and Sobolev spaces on uniform meshes, the
//! quasilinear energy `E(u) = ∫Φ(x,|∇u|) − ∫F(x,u)` with its exact discrete
//! derivative, and mountain-pass, fountain and Rayleigh-quotient solvers for
//!
//! ```text
//! −div(A(x,|∇u|)∇u) = f(x,u)  in Ω,   u = 0 on ∂Ω.
//! ```

pub mod cli;
pub mod energy;
pub mod error;
pub mod exponent;
pub mod expr;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod modular;
pub mod quadrature;
pub mod solvers;

pub use error::{Error, Result};
pub use exponent::{check_admissibility, critical_exponent, log_holder_estimate, ExponentField};
pub use expr::FieldSpec;
pub use mesh::{enforce_zero_trace, gradient, integrate, GridFunction, Mesh, MeshSpec};
pub use model::{OperatorKernel, Reaction};
pub use modular::{luxemburg_norm, modular, sobolev0_norm};
