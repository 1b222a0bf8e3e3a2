//! Numerical toolkit for spectral invariants of planar billiard tables:
//! billiard dynamics, Kronecker invariant circles, small-denominator
//! problems, Radon-type invariants, quasi-eigenvalue series, weak
//! isospectrality clusters and Liouville-table Radon inversion.

pub mod error;
pub mod numeric;

pub mod geometry;
pub mod billiard;
pub mod tori;
pub mod wiener;
pub mod radon;
pub mod bessel;
pub mod quasi;
pub mod spectra;
pub mod rigidity;

pub mod output;
pub mod cli;

pub use error::{Error, ErrorKind, Result};
