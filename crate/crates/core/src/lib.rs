//! Software reliability monitoring with an order-statistics Goel-Okumoto
//! NHPP model.
//!
//! The pipeline is:
//!
//! 1. [`failure_data`]: parse inter-failure times and group them into
//!    cumulative times at every r-th failure.
//! 2. [`mle`]: fit `(a, b)` by maximum likelihood, solving the profile score
//!    in `b` with a safeguarded Newton-Raphson iteration.
//! 3. [`spc`]: derive probability-based control limits, build the mean value
//!    chart of successive `m(t)` differences and flag out-of-control points.
//!
//! [`simulate`] draws NHPP sample paths for estimator checks and [`cli`]
//! backs the `relimon` binary.

pub mod cli;
pub mod error;
pub mod failure_data;
pub mod go_model;
pub mod mle;
pub mod report;
pub mod simulate;
pub mod spc;
pub mod svg;

pub use error::{Error, Result};
pub use failure_data::{
    group_by_order, musa_fixture, parse_failure_data, serialize_failure_data, FailureSeries,
    GroupedSeries, InputFormat,
};
pub use go_model::{GoParams, OrderedGoModel};
pub use mle::{
    a_given_b, fit, fit_oracle, log_likelihood, profile_score, profile_score_derivative, FitResult,
    SolverConfig,
};
pub use simulate::{simulate_epochs, simulate_nhpp, simulate_replications, Horizon, SimConfig};
pub use spc::{
    build_chart, control_limits, detect, ChartPoint, ControlLimits, DetectionReport, MScale,
    MeanValueChart, PointStatus, Verdict,
};
