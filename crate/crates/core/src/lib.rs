//! Variable importance and variable interaction (VIVI) summaries for any
//! fitted prediction model, with seriation, zen-path selection and SVG
//! displays.

pub mod dataset;
pub mod error;
pub mod parallel;
pub mod pdp;
pub mod predictor;
pub mod render;
pub mod seed;
pub mod seriation;
pub mod vivi;
pub mod zenpath;

pub use error::{Result, VividError};
