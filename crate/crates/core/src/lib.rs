//! Exact arithmetic for Kazhdan–Lusztig bases of affine Hecke algebras with
//! unequal parameters, the lowest two-sided cell and its based ring.

pub mod affine;
pub mod based_ring;
pub mod cells;
pub mod config;
pub mod degree;
pub mod error;
pub mod field;
pub mod gamma;
pub mod hecke;
pub mod int;
pub mod kl;
pub mod linalg;
pub mod root;
pub mod spectra;
pub mod tasks;
pub mod xi;

pub use affine::{AffineElement, C0Factor, CellDatum, Mode};
pub use error::{Error, Result};
pub use gamma::{Degree, GammaElement, Laurent};
pub use int::Int;
pub use hecke::{Hecke, HeckeElement};
pub use kl::{CVec, KlTable};
pub use cells::{CellContext, CellReport, Property, Sampling, Verdict, VerifyOptions};
