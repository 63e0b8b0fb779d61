//! Render-and-compare camera pose refinement.
//!
//! A query image and an initial pose go in; a particle filter perturbs the
//! pose on SO(3) x T(3), renders every hypothesis from a mesh, and ranks the
//! renders against the query by comparing dense, channel-normalized feature
//! pyramids. Coarse pyramid levels drive the early iterations, finer ones
//! the last few.
//!
//! Modules, bottom-up:
//!
//! - [`geometry`]: poses, Lie-algebra perturbation, camera model, error metrics
//! - [`renderer`]: meshes, procedural rooms, the software rasterizer
//! - [`features`]: feature pyramids and candidate scoring functions
//! - [`filter`]: schedules, beams, sampling, ranking and resampling
//! - [`refiner`]: the refinement loop
//! - [`eval`]: error summaries, basin profiles, convergence studies
//! - [`cli`]: the `mcrefine` command-line front end

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod filter;
pub mod geometry;
pub mod refiner;
pub mod renderer;
pub mod seed;

pub use error::{Error, Result};
