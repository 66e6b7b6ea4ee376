//! Elliptic complex points, model discs and the nonlinear Bishop disc solver.

mod disc;
mod model;
mod psi;
mod solve;
mod surface;

pub use disc::{boundary_mu, boundary_residual, BishopDisc, BishopDiscRecord, DiscDiagnostics};
pub use model::{
    classify_point, dilate, ellipse_map, model_family, quadric, validate_adapted, AdaptationReport,
    EllipseMap, EllipticPointModel, PointType,
};
pub use psi::{cr_residual, pair_at, psi_apply, psi_inverse, psi_inverse_unchecked, DiscPair};
pub use solve::{bishop_solve, BishopProblem, PinCurve, Pins, SolveOptions};
pub use surface::{FnSurface, GraphSurface, MappedSurface, Surface};
