//! Bracketing, certification and closed-form evaluation of the joint
//! spectral radius ρ(F) of a finite family of complex square matrices, with
//! stability decisions for the associated discrete linear inclusion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod family;
pub mod gallery;
pub mod inclusion;
pub mod io;
pub mod linalg;
pub mod special;
pub mod structure;

pub use error::{JsrError, PartialBound, Result};
