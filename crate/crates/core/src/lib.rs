//! Goodness-of-fit tests of multivariate uniformity built on edge statistics
//! of random geometric graphs.
//!
//! Given `n` points in a unit-volume observation window, connect every pair
//! at Euclidean distance at most `r` and sum the `beta`-th powers of the edge
//! lengths. Centering that sum by its null mean (exactly, or by its small-`r`
//! approximation) and scaling by the null standard deviation yields two
//! families of test statistics whose null law converges to chi-squared with
//! one degree of freedom. Rejection is for large values.
//!
//! The crate provides:
//!
//! * [`geom`] — windows, point clouds, unit-ball volumes and the radius
//!   rules that target a prescribed limiting average degree;
//! * [`edges`] — grid-accelerated fixed-radius pair enumeration and the
//!   edge power sum;
//! * [`moments`] — exact and asymptotic null means and variances;
//! * [`stats`] — the exact- and asymptotic-centering statistics, p-values
//!   and empirical quantiles;
//! * [`alternatives`] — samplers for the null and the contamination,
//!   clustering, point-source and contiguous alternatives;
//! * [`competitors`] — nearest-neighbour and kernel-density competitor
//!   statistics;
//! * [`harness`] — a reproducible parallel Monte Carlo engine for critical
//!   values, power studies and limit-law diagnostics;
//! * [`io`] / [`table`] — the point file format and CSV/JSON result tables.
//!
//! All computations driven by an [`rng::RngStream`] are bit-reproducible:
//! a (seed, stream) pair identifies an independent substream, and the
//! harness assigns one stream per replicate so results do not depend on
//! the number of worker threads.

// Parameter guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alternatives;
pub mod competitors;
pub mod edges;
mod error;
pub mod geom;
pub mod harness;
pub mod io;
pub mod moments;
pub mod rng;
pub mod special;
pub mod stats;
pub mod table;

pub use error::{Error, Result};
pub use geom::{unit_ball_volume, PointCloud, Window};
pub use rng::RngStream;
pub use stats::{RadiusRule, TestConfig, TestOutcome, Variant};
