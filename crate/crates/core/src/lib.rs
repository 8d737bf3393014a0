//! Shell reconstruction of dispersive waves from a Radon-type restriction of the spectrum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod initial_data;
pub mod operators;
pub mod quadrature;
pub mod spectral;
pub mod stationary_phase;
