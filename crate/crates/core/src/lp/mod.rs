//! Weighted cggs and the exact feasibility machinery for perfect fractional
//! packings of `K_m`.

mod fractional;
mod matrix;
mod rotation;
mod simplex;
mod weighted;
mod witness;

pub use fractional::{
    fractional_packing_from_solution, ClassPacking, ClassWeight, FractionalPacking, ImageKey,
    Placement,
};
pub use matrix::{compressed_matrix, ColumnSource, CompressedMatrix, DenseMatrix, WithSlack};
pub use rotation::{canonical_gap_vectors, figure_configuration, Configuration, RotationClass};
pub use simplex::{solve_feasibility, verify_certificate, verify_solution, FeasibilityOutcome};
pub use weighted::{
    long_edge_condition, uniformize_by_rotation, weighted_representation, LongEdgeReport,
    Uniformized, WeightedCgg,
};
pub use witness::{k4_witness_m, kk_witness_m, minimal_feasible_m, KkWitness};
