//! Graph summarization with approximately regular partitions.
//!
//! The crate builds equitable partitions whose class pairs are mostly
//! ε-regular, compresses them into weighted reduced graphs, reconstructs and
//! scores those summaries, searches databases of summaries by Laplacian
//! spectral distance, and fits Poisson block models to shortest-path distance
//! matrices of sparse graphs.

pub mod cli;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod regdecomp;
pub mod regularity;
pub mod search;
pub mod summary;

pub use error::{Error, Result};
pub use graph::{Graph, GraphBuilder, VertexClass};
