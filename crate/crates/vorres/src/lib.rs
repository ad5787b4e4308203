//! File formats, SVG plots, a rayon executor and the command-line driver
//! for the `vorres-core` residual diagnostics.
//!
//! ```no_run
//! use std::path::Path;
//! use vorres::catalog_io::{read_catalog, CatalogSpec};
//! use vorres_core::geometry::Window;
//!
//! let spec = CatalogSpec::new(Window::new(-117.0, -116.0, 34.0, 35.0).unwrap());
//! let load = read_catalog(Path::new("hector.csv"), &spec).unwrap();
//! println!("{} events", load.catalog.len());
//! ```

pub mod catalog_io;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod svg;

pub use error::{Error, Result};
