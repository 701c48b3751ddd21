//! Quantum minimum-description-length inference at finite dimension.
//!
//! Dense operator algebra ([`opcore`]), projection systems and
//! Q-projections ([`projlat`]), universal sources and strategies
//! ([`qsource`]), estimators ([`estim`]), divergences ([`infodist`]) and
//! reproducible experiments ([`xplab`]).

#![forbid(unsafe_code)]
// `!(x > y)` guards are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod estim;
pub mod infodist;
pub mod opcore;
pub mod projlat;
pub mod qsource;
pub mod rng;
pub mod tol;
pub mod words;
pub mod xplab;

pub use error::{Error, Result};
