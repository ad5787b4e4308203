//! Voronoi residual diagnostics for spatial and space-time point process models.
//!
//! The crate tessellates observed point patterns, integrates a proposed
//! conditional intensity over the resulting cells (or over a regular pixel
//! grid), scores the residuals against their reference law and turns them
//! into probability integral transform (PIT) values for goodness-of-fit
//! testing. It also simulates the builtin test families and the ETAS
//! earthquake model, and fits ETAS by maximum likelihood.
//!
//! Everything here is `no_std` + `alloc`. File formats, plotting and the
//! command-line driver live in the `vorres` companion crate.
//!
//! ```
//! use vorres_core::geometry::{tessellate, Point, Window};
//! use vorres_core::intensity::{IntensityModel, ModelKind};
//! use vorres_core::residuals::voronoi_residuals;
//! use vorres_core::catalog::Catalog;
//!
//! let window = Window::unit();
//! let pts = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
//! let catalog = Catalog::from_points(&pts, window);
//! let diagram = tessellate(&pts, window).unwrap();
//! let model = IntensityModel::spatial(ModelKind::Homogeneous { rate: 2.0 }, window);
//! let records = voronoi_residuals(&catalog, &model, &diagram).unwrap();
//! assert!((records[0].raw - 0.0).abs() < 1e-12);
//! ```
#![no_std]
// Once std is linked, its inherent float methods shadow the num-traits ones.
#![cfg_attr(any(test, feature = "std"), allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod error;
pub mod etas_fit;
pub mod exec;
pub mod geometry;
pub mod inference;
pub mod intensity;
pub mod optimize;
pub mod residuals;
pub mod seed;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
