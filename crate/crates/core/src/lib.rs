//! Exact computations on finite metric spaces: Katětov functions and
//! one-point extensions, Lipschitz-free (Arens-Eells) norms, affine
//! extensions of isometric group actions, strongly moving gaps, and quotients
//! of finite groups by invariant pseudometrics.
//!
//! All arithmetic is exact over the rationals, so every inequality is checked
//! with zero tolerance.

#![allow(clippy::needless_range_loop)]

pub mod action;
pub mod error;
pub mod free;
pub mod group;
pub mod katetov;
pub mod metric;
pub mod quotient;
pub mod random;
pub mod rational;
pub mod suites;

pub use action::{enumerate_isometries, GroupAction, Isometry};
pub use error::{Error, Result};
pub use free::{Molecule, MoleculeRecord};
pub use group::FiniteGroup;
pub use katetov::{KatetovFunction, KatetovRecord};
pub use metric::{FiniteMetricSpace, PointedSpace, Violation};
pub use quotient::InvariantPseudometric;
pub use rational::{q, Rational};
