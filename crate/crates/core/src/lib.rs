//! Laguerre tessellations, tessellation-adapted persistent homology and
//! Monte-Carlo goodness-of-fit tests for spatial tessellation models.

pub mod filtration;
pub mod generators;
pub mod geometry;
pub mod models;
pub mod persistence;
pub mod seeds;
pub mod stats;
