//! Traced algebras, their elements and projections, and the rearrangement
//! machinery built on generalized singular numbers.

mod element;
mod fava;
mod measure;
mod projection;
mod spectral;
mod step;

pub use element::{Block, Element, Flags, TracedAlgebra};
pub use fava::{fava_decompose, fava_membership, FavaSplit};
pub use measure::{enlarge_projection, enlarge_projection_with, in_neighborhood, measure_metric, MeasureNeighborhood};
pub use projection::Projection;
pub use spectral::{
    clip_decompose, k_functional, lp_norm, lp_norm_checked, lp_norm_with, mu, mu_at, mu_spectral, mu_with,
    submajorizes, submajorizes_with, trace_lp_norm,
};
pub use step::StepFunction;
