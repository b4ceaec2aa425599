//! Integration over ℝⁿ for n up to 30: closed-form sphere moments,
//! adaptive 1-D radial quadrature after the algebraic map r = c·s/(1−s),
//! polynomial-times-radial factored integrands, and L^p norms over
//! balls and annuli.

pub mod gammafn;
pub mod gk;
pub mod lp;
pub mod moments;
pub mod polyrad;
pub mod radial;
pub mod spheregrid;

pub use lp::{lp_norm_grid, lp_norm_radial, LpResult, Region};
pub use moments::{sphere_moment, sphere_moment_abs, MultiIndex};
pub use polyrad::{polyradial_integrate, PolyRadialIntegrand, PolyRadialTerm};
pub use radial::{radial_integrate, radial_integrate_interval, QuadratureSpec, RadialProfile};
