//! Logarithmic vector-valued modular forms for SL2(Z).
//!
//! The crate covers exact group arithmetic ([`modgroup`]), finite-dimensional
//! representations given by the images of `S` and `T` ([`repspace`]),
//! logarithmic q-expansions ([`qexp`]), the pair `(rho, F)` together with the
//! natural-boundary classifier ([`vvmf`]), and numerical probes of the growth
//! of components near rational cusps ([`analysis`]). Scalar modular forms used
//! as test fixtures live in [`fixtures`].

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod matrix;
pub mod modgroup;
pub mod poly;
pub mod qexp;
pub mod repspace;
pub mod scalar;
pub mod vvmf;
pub mod wire;

pub use error::{Error, Result};
pub use matrix::{AnyMatrix, Matrix};
pub use modgroup::{GeneratorWord, Token, UnimodularMatrix};
pub use poly::Poly;
pub use qexp::{LogBlock, PureQSeries};
pub use repspace::{AnyRepresentation, JordanData, Representation};
pub use scalar::{GaussRat, Scalar, C64};
pub use vvmf::{Body, Classification, PolyVector, Verdict, VvmfForm};
