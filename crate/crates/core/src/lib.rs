//! Intraday serial correlation and heterogeneous volatility.
//!
//! The crate turns high-frequency prices into two daily measures, the
//! power-transformed overlapped variance ratio `VR(q)` and log realized
//! variance, fits the HAR cascade to split log realized variance into a
//! predictable and an unexpected part, and regresses `VR(q)` on volatility
//! over the full sample or on rolling windows.
//!
//! Modules, in pipeline order:
//!
//! - [`grid`]: previous-tick resampling onto a regular intraday grid.
//! - [`vr`]: the daily variance ratio and its power exponent.
//! - [`realized`]: realized variance and heterogeneous (weekly/monthly) averages.
//! - [`har`]: HAR fit and the predictable/unexpected decomposition.
//! - [`ols`]: least-squares engine shared by HAR and the regressions.
//! - [`regress`]: the simple, lagged and decomposed specifications, full-sample and rolling.
//! - [`simulate`]: seeded synthetic markets used as verification oracles.
//! - [`metrics`]: per-day metric table assembled from gridded days.
//! - [`io`]: CSV readers and writers for every file format.

pub mod error;
pub mod grid;
pub mod har;
pub mod io;
pub mod metrics;
pub mod numeric;
pub mod ols;
pub mod realized;
pub mod regress;
pub mod series;
pub mod simulate;
pub mod vr;

pub use error::{Error, Result};
