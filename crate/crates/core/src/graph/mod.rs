//! Abstract weighted planar graphs and the exact Kadanoff–Ceva oracle.

mod edgeset;
pub mod enumerate;
pub mod json;
pub mod kc;
mod planar;
pub mod random;

pub use edgeset::EdgeSet;
pub use enumerate::{enumerate_even_subgraphs, weighted_sum, LogSum};
pub use kc::{kadanoff_ceva_correlator, kc_spinor, CornerLift, DefectSet, KcValue};
pub use planar::{Edge, WeightedPlanarGraph};
