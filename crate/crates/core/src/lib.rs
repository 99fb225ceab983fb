//! Latent network summarization.
//!
//! A graph is reduced to a small set of relational-function descriptors and
//! per-level factor matrices whose size does not depend on the number of
//! nodes or edges. Node embeddings for the training graph, or for any other
//! graph with compatible types, are derived from that summary on demand.
//!
//! ```
//! use latsum::hetgraph::GraphBuilder;
//!
//! let mut b = GraphBuilder::with_identity_nodes(3);
//! b.add_edge(0, 1, 0, 1.0).unwrap();
//! b.add_edge(1, 2, 0, 1.0).unwrap();
//! let g = b.build().unwrap();
//! let x0 = latsum::relfeat::base_features(&g);
//! assert_eq!(x0.row(1), &[1.0, 1.0, 2.0]);
//! ```

pub mod error;
pub mod hetgraph;
pub mod context;
pub mod lowrank;
pub mod relfeat;
pub mod summary;
pub mod tasks;
pub mod cli;

pub use error::{Error, Result};
