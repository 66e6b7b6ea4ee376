//! Characteristic leaves, disc families, gluing and the filling hypersurface.

mod family;
mod glue;
mod hypersurface;
mod leaf;
mod monitor;
mod pipeline;

pub use family::{cap_seed, continue_family, pole_family, DiscFamily, StepControls};

pub use glue::{
    distance_to_image, glue, image_distance, image_samples, locate, reparametrize, three_point_mobius, GlueReport,
    GluedFamily, INTERIOR_CIRCLES,
};
pub use hypersurface::{assemble_hypersurface, CloudPoint, Hypersurface, FIT_STEP, LEVI_ANGLES, LEVI_RADII};
pub use leaf::{
    characteristic_field, gauge_leaves, integrate_leaf, integrate_leaf_with, CharacteristicLeaf, Gauge, LeafEnd,
    LeafOptions,
};
pub use monitor::{monitor, Monitor, MonitorReport, COLLAR};
pub use pipeline::{fill, glued_family, FillOptions, FillingResult};
