//! NHPP sample paths under the Goel-Okumoto mean value function.
//!
//! Paths are generated by inversion: unit-rate Poisson arrival times
//! `τ_1 < τ_2 < ...` are mapped through `t = m^{-1}(τ) = -ln(1 - τ/a) / b`.
//!
//! The generator is ChaCha8 (`rand_chacha` 0.3), seeded with
//! `seed_from_u64(seed)`; replication `k` uses stream `k` of that key, so
//! every replication is independent of how many others are drawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::failure_data::FailureSeries;
use crate::go_model::GoParams;

/// Name and version of the generator, recorded in simulation output.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3), stream = replication index";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Observe failures up to this time.
    Time(f64),
    /// Observe until this many failures (fewer if the process is exhausted).
    Failures(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: GoParams,
    pub horizon: Horizon,
    pub seed: u64,
    pub replications: usize,
}

impl SimConfig {
    pub fn new(params: GoParams, horizon: Horizon, seed: u64, replications: usize) -> Result<Self> {
        match horizon {
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "horizon must be finite and > 0, got {t}"
                )));
            }
            Horizon::Failures(0) => {
                return Err(Error::InvalidParameter(
                    "failure-count horizon must be >= 1".into(),
                ));
            }
            _ => {}
        }
        if replications < 1 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        Ok(SimConfig {
            params,
            horizon,
            seed,
            replications,
        })
    }

    /// Horizon time at which the expected failure count is `expected`.
    pub fn time_for_expected(params: GoParams, expected: f64) -> Result<f64> {
        params.inverse_mean_value(expected)
    }
}

fn rng_for(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Failure epochs of one replication; may be empty.
pub fn simulate_epochs(cfg: &SimConfig, replication: usize) -> Vec<f64> {
    let (a, b) = (cfg.params.a(), cfg.params.b());
    let tau_limit = match cfg.horizon {
        Horizon::Time(t) => cfg.params.mean_value(t).expect("validated horizon"),
        Horizon::Failures(_) => a,
    };
    let max_count = match cfg.horizon {
        Horizon::Time(_) => usize::MAX,
        Horizon::Failures(k) => k,
    };

    let mut rng = rng_for(cfg.seed, replication);
    let mut epochs = Vec::new();
    let mut tau = 0.0;
    let mut last = 0.0;
    while epochs.len() < max_count {
        // Unit exponential increment; a zero draw or a tie after inversion
        // is discarded and redrawn.
        let u: f64 = rng.gen();
        let step = -(1.0 - u).ln();
        if step <= 0.0 {
            continue;
        }
        let next_tau = tau + step;
        if next_tau >= tau_limit {
            break;
        }
        let t = -(-next_tau / a).ln_1p() / b;
        if t <= last {
            continue;
        }
        tau = next_tau;
        last = t;
        epochs.push(t);
    }
    epochs
}

/// One replication as inter-failure times. A path with no failures is
/// reported as [`Error::NoObservations`].
pub fn simulate_nhpp(cfg: &SimConfig, replication: usize) -> Result<FailureSeries> {
    let epochs = simulate_epochs(cfg, replication);
    let mut prev = 0.0;
    let deltas = epochs
        .iter()
        .map(|&t| {
            let d = t - prev;
            prev = t;
            d
        })
        .collect();
    FailureSeries::new(
        deltas,
        format!(
            "simulated a={} b={} seed={} replication={}",
            cfg.params.a(),
            cfg.params.b(),
            cfg.seed,
            replication
        ),
    )
}

/// All replications, in replication order.
pub fn simulate_replications(cfg: &SimConfig) -> Vec<Vec<f64>> {
    (0..cfg.replications)
        .map(|k| simulate_epochs(cfg, k))
        .collect()
}
