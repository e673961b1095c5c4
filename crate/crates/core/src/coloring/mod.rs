//! Discrete and vector 3-colorings, their DPP kernels, and decoding.

pub mod decode;
pub mod discrete;
pub mod geometry;
pub mod vector;

pub use decode::{decode_assignment, DecodeOutcome, DecoderParams};
pub use discrete::{assignment_to_coloring, check_proper, find_three_coloring, ProperCheck};
pub use vector::{
    assemble_factor, coloring_to_kernel, discrete_to_vectors, likelihood_from_angles,
    optimal_value, vector_error,
};
