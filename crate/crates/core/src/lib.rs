//! Symbolic machinery for graded Poisson algebra: Koszul-sign polynomial
//! arithmetic, Schouten and Gerstenhaber brackets, the HKR map, a
//! generator-level Fourier transform, higher derived brackets for
//! submanifolds, Kontsevich graph expansion, and star-product assembly
//! with anomaly checks.

pub mod context;
pub mod derived;
pub mod error;
pub mod fourier;
pub mod hkr;
pub mod kontsevich;
pub mod hochschild;
pub mod linalg;
pub mod monomial;
pub mod parse;
pub mod quantize;
pub mod sample;
pub mod perm;
pub mod multivector;
pub mod poly;
pub mod tensor;
pub mod weighted;

pub use context::{DoubledContext, GradedContext, Var};
pub use error::{CoreError, Result};
pub use hochschild::MultiDiffOp;
pub use monomial::Monomial;
pub use multivector::MultiVector;
pub use poly::{rat, rat_int, GradedPoly};
