//! s-embeddings of planar Ising models.
//!
//! The crate is organised bottom-up: [`graph`] holds the abstract weighted
//! planar graph and the exact even-subgraph oracle, [`mesh`] and
//! [`propagation`] the quad complex and spinors on its corners,
//! [`embedding`] the geometric realisation, followed by [`constructions`],
//! [`shol`], [`surgery`] and the FK Monte Carlo in [`fk`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructions;
pub mod embedding;
pub mod error;
pub mod fk;
pub mod geom;
pub mod graph;
pub mod mesh;
pub mod par;
pub mod propagation;
pub mod schema;
pub mod shol;
pub mod surgery;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
