#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod banded;
pub mod chart;
pub mod dense;
pub mod discretization;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod math;
pub mod quadrature;
pub mod solvers;
pub mod sparse;
pub mod systems;

pub use error::{Error, Result};
pub use math::C64;
