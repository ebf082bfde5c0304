//! Exact classical simulation of Clifford and Clifford+T circuits.
//!
//! The central object is a phased graph state: a symmetric GF(2) adjacency
//! matrix whose diagonal carries values mod 4. Amplitudes of such states in
//! the Hadamard-transformed basis reduce to an LDL factorization of the
//! adjacency matrix over GF(2) with a small block diagonal, which this crate
//! computes either densely or along a tree decomposition of the graph.
//!
//! Modules:
//! - [`gf2`]: bit-packed vectors and matrices over GF(2)
//! - [`treedec`]: tree decompositions (validation, heuristics, file io)
//! - [`ldl`]: the block LDL factorization engine and selected inversion
//! - [`pgs`]: phased graph states, exact amplitudes, local complementation
//! - [`sim`]: strong and weak simulation built on the factorization
//! - [`zx`]: circuit parsing and reduction to a phased graph state
//! - [`oracle`]: brute-force reference implementations used for testing
//! - [`analysis`]: local-Clifford equivalence and graph-state learning

pub mod analysis;
pub mod gf2;
pub mod ldl;
pub mod oracle;
pub mod pgs;
pub mod sim;
pub mod treedec;
pub mod zx;
