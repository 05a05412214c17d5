//! Summary-based graph similarity search.

mod database;
mod metrics;
mod spectrum;

pub use database::{index_graph, rank, Database, DatabaseEntry, IndexOptions, QueryResult, SearchMode, TimingBreakdown};
pub use metrics::{ap_at_k, map_at_k};
pub use spectrum::{laplacian_spectrum, spectral_distance, Spectrum};
