//! Desk-scale constructive Kadison–Singer toolkit.
//!
//! The crate builds certified Weaver partitions of finite frames by running the
//! interlacing-family greedy over mixed characteristic polynomials, and exposes
//! the reduction chain that turns those partitions into pavings of projections,
//! reflections, self-adjoint and bounded matrices. Frame-theoretic consumers
//! (Naimark complements, Schur–Horn constructions, Feichtinger and R_ε
//! partitions, restricted invertibility) sit on top.
//!
//! Everything is dense double-precision linear algebra over `Complex64`, aimed
//! at dimensions up to a few dozen.
//!
//! ```
//! use weaver::linalg::VectorSystem;
//! use weaver::partition::{greedy_partition, GreedyConfig};
//!
//! let frame = VectorSystem::mercedes_benz();
//! let cert = greedy_partition(&frame, 2, &GreedyConfig::default()).unwrap();
//! assert!(cert.max_block_bessel() <= cert.guaranteed_bound + 1e-9);
//! ```

pub mod barrier;
pub mod corpus;
pub mod error;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod mixed;
pub mod partition;
pub mod paving;
pub mod poly;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
