//! Spectral clustering on two-class stochastic blockmodels.
//!
//! The crate samples blockmodel graphs, embeds nodes with the top
//! eigenvectors of the adjacency matrix or its degree-normalized variant,
//! and measures how normalization changes the within-class variance and
//! between-center bias of the embedding. Closed-form predictions for those
//! quantities are provided alongside the empirical pipeline, together with
//! a link-prediction harness with a Katz-index baseline and a seeded
//! experiment runner that emits CSV.

pub mod clustering;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod linkpred;
pub mod metrics;
pub mod sbm;

pub use error::{Error, Result};
pub use graph::{Graph, IdMap, NodeLabeling};
pub use sbm::BlockModelParams;
