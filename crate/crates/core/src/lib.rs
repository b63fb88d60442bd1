//! Constructive packing of convex geometric graphs (cggs) and ordered graphs
//! into complete host graphs.
//!
//! The crate is organised around five areas:
//!
//! * [`graph`]: cggs and ordered graphs, edge lengths, interval partitions,
//!   cyclic/interval chromatic numbers, order-preserving embeddings, blowups.
//! * [`lp`]: weighted cggs, rotation classes, the compressed length/class
//!   matrix and an exact rational feasibility solver that returns either a
//!   fractional packing or a Farkas certificate.
//! * [`packing`]: explicit edge-disjoint packings (greedy, copy hypergraphs
//!   with a nibble matching, rotation schedules, blowup composition and the
//!   recursive ordered packer) together with an independent verifier.
//! * [`obstruction`]: edge-length statistics and coverage upper bounds.
//! * [`experiment`]: JSON file formats, experiment manifests and the
//!   deterministic command runners used by the CLI.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod lp;
pub mod obstruction;
pub mod packing;
pub mod rational;

pub use error::{Error, Result};
pub use graph::{Graph, IntervalPartition, Order};
