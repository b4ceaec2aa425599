//! Numerical workbench for fourth-order conformal analysis: explicit
//! bubble families and their gluing, Paneitz operator and Q-curvature of
//! perturbed Euclidean metrics, the constrained linearized problem around
//! a bubble, and the reduced energy functional driving the blow-up
//! construction.

pub mod bubbles;
pub mod curvature;
pub mod dim;
pub mod error;
pub mod jet;
pub mod linsolve;
pub mod perturb;
pub mod quad;
pub mod sym;
pub mod tensor;
pub mod weyl;

pub use dim::Dimension;
pub use error::CoreError;
