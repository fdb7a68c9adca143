//! Exact calculator for bounded complexes of line-bundle sums on projective
//! space `P^n`.
//!
//! Objects are bounded complexes whose terms are formal direct sums of twists
//! `O(d)` and whose differentials are matrices of homogeneous polynomials.
//! Every derived-category computation offered here (Ext tables, sheaf
//! hypercohomology, Serre duality, Beilinson multiplicities, Euler pairings,
//! Hochschild tables, lattice-level Fourier-Mukai actions) reduces to finite
//! exact linear algebra over the rationals or a prime field.
//!
//! The main pipeline is:
//!
//! 1. [`complex::LineBundleComplex`] — the object model, with shift, cone,
//!    tensor, dual, twist and prune.
//! 2. [`window::reduce_to_window`] — rewrite any object into the twist range
//!    `[-n, 0]` by Koszul substitutions.
//! 3. [`ext::ext_table`] — Ext dimensions from the total Hom complex of
//!    window representatives.
//! 4. [`numerics`] — Chern characters, Todd classes, Euler and Mukai
//!    pairings, HKR aggregation and correspondence calculus.

pub mod complex;
pub mod error;
pub mod ext;
pub mod interchange;
pub mod koszul;
pub mod matrix;
pub mod numerics;
pub mod poly;
pub mod sampling;
pub mod scalar;
pub mod window;

pub use complex::{ChainMap, FreeTerm, LineBundleComplex, PolyMatrix, Twist};
pub use error::{Error, Result};
pub use ext::ExtTable;
pub use matrix::ExactMatrix;
pub use poly::HomogPoly;
pub use scalar::{FieldSpec, Scalar};
pub use window::WindowComplex;
