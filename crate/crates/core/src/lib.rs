//! Procedural underground environments: a seeded graph skeleton is skinned
//! into a watertight tunnel mesh, smoothed, decimated, cut into grid chunks
//! and textured with baked procedural materials.

pub mod error;
pub mod graph;
pub mod io;
pub mod mesh;
pub mod noise;
pub mod pipeline;
pub mod rng;
pub mod texture;

pub use error::{Error, Result};
