//! The slice model of an orbit built from pointwise anchor data.

mod anchor;
mod model;
mod radii;
mod state;

pub use anchor::{AnchorData, IsotropySample};
pub use model::{chu_sigma, compute_k, compute_splitting, SliceModel};
pub use radii::{estimate_radii, Radii};
pub use state::{SliceState, TangentVector};
