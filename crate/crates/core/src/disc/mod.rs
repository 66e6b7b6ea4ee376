//! Spectral calculus on the closed unit disc.

mod boundary;
mod field;
mod grid;
mod io;
mod ops;

pub use boundary::BoundaryField;
pub use field::{DiscField, DiscInterpolant};
pub use grid::DiscGrid;
pub use io::{write_field_csv, field_to_json, FieldRecord};
pub use ops::{
    cauchy_green, conjugate, conjugate_samples, d_zeta, dbar, schwarz, schwarz_taylor,
    schwarz_with_offset, top_mode_fraction, winding_number, winding_number_samples,
};
