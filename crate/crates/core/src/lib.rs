//! Level-set mean curvature flow on step-two Carnot groups.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod calculus;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod grid;
pub mod group;
pub mod output;
pub mod solver;
pub mod verify;
pub mod viscosity;

pub use error::{Error, Result};
pub use group::{GroupSpec, HeisenbergLikeSpec, Point};
