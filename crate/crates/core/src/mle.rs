//! Maximum-likelihood estimation of `(a, b)` for the ordered Goel-Okumoto
//! model.
//!
//! For grouped cumulative times `s_1 < ... < s_n` the log-likelihood is
//!
//! ```text
//! log L(a, b) = -[a(1 - e^{-b s_n})]^r
//!             + Σ_k [ r ln a + ln b + ln r - b s_k + (r - 1) ln(1 - e^{-b s_k}) ]
//! ```
//!
//! Setting `∂/∂a = 0` gives `a(b) = n^{1/r} / (1 - e^{-b s_n})`. Substituting
//! back leaves a one-dimensional profile score in `b`,
//!
//! ```text
//! g(b) = n/b - Σ s_k + (r - 1) Σ s_k / (e^{b s_k} - 1) - n r s_n / (e^{b s_n} - 1)
//! ```
//!
//! whose root is found by Newton-Raphson with a bisection safeguard inside a
//! sign-change bracket. [`fit_oracle`] finds the same maximum by grid scan
//! and golden-section search on the profile likelihood itself.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::failure_data::{GroupedSeries, MIN_GROUPS};
use crate::go_model::{ln_one_minus_exp_neg, one_minus_exp_neg, GoParams, OrderedGoModel};

/// Above this `r ln a` the leading term is evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 650.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Lower end of the `b` bracket; `None` uses `1e-6 / s_n`.
    pub bracket_lo: Option<f64>,
    /// Upper end of the `b` bracket; `None` uses `50 / s_n`.
    pub bracket_hi: Option<f64>,
    /// Log-spaced points scanned for sign changes of the score.
    pub scan_points: usize,
    /// Stop when `|Δb| <= step_tol * b`.
    pub step_tol: f64,
    /// Stop when `|g(b)| <= score_tol * n / b`.
    pub score_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            bracket_lo: None,
            bracket_hi: None,
            scan_points: 256,
            step_tol: 1e-12,
            score_tol: 1e-9,
            max_iterations: 100,
        }
    }
}

impl SolverConfig {
    pub fn bracket_for(&self, g: &GroupedSeries) -> Result<(f64, f64)> {
        let s_n = g.last_time();
        let lo = self.bracket_lo.unwrap_or(1e-6 / s_n);
        let hi = self.bracket_hi.unwrap_or(50.0 / s_n);
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok((lo, hi))
    }

    fn validate(&self) -> Result<()> {
        if self.scan_points < 2 {
            return Err(Error::InvalidParameter("scan_points must be >= 2".into()));
        }
        if !(self.score_tol.is_finite() && self.score_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "score tolerance must be positive, got {}",
                self.score_tol
            )));
        }
        if !(self.step_tol.is_finite() && self.step_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step tolerance must be non-negative, got {}",
                self.step_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: OrderedGoModel,
    pub n_groups: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `|g(b̂)|`.
    pub residual: f64,
    /// Absolute score tolerance at `b̂`, i.e. `score_tol * n / b̂`.
    pub score_tolerance: f64,
    pub log_lik: f64,
    pub bracket: (f64, f64),
    /// Number of sign-change intervals of the score in the bracket.
    pub roots_found: usize,
}

impl FitResult {
    pub fn a(&self) -> f64 {
        self.model.params().a()
    }

    pub fn b(&self) -> f64 {
        self.model.params().b()
    }
}

fn check_b(b: f64) -> Result<()> {
    if b.is_finite() && b > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "b must be finite and > 0, got {b}"
        )))
    }
}

pub fn log_likelihood(g: &GroupedSeries, a: f64, b: f64) -> Result<f64> {
    let params = GoParams::new(a, b)?;
    let (a, b) = (params.a(), params.b());
    let r = g.order_r() as f64;
    let n = g.n_groups() as f64;
    let s_n = g.last_time();

    let ln_a = a.ln();
    let log_head = r * (ln_a + ln_one_minus_exp_neg(b * s_n));
    if log_head > f64::MAX.ln() {
        return Err(Error::Overflow("[a(1 - exp(-b s_n))]^r"));
    }
    let head = if r * ln_a > LOG_SPACE_THRESHOLD {
        log_head.exp()
    } else {
        (a * one_minus_exp_neg(b * s_n)).powi(g.order_r() as i32)
    };

    let constant = n * (r * ln_a + b.ln() + r.ln());
    let body: f64 = g
        .cum_times()
        .iter()
        .map(|&s| -b * s + (r - 1.0) * ln_one_minus_exp_neg(b * s))
        .sum();

    let value = -head + constant + body;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("log-likelihood"))
    }
}

/// Stationary point of the log-likelihood in `a` for fixed `b`.
pub fn a_given_b(g: &GroupedSeries, b: f64) -> Result<f64> {
    check_b(b)?;
    let n = g.n_groups() as f64;
    let r = g.order_r() as f64;
    Ok(n.powf(1.0 / r) / one_minus_exp_neg(b * g.last_time()))
}

/// Derivative of the profile log-likelihood `b ↦ log L(a(b), b)`.
pub fn profile_score(g: &GroupedSeries, b: f64) -> Result<f64> {
    check_b(b)?;
    let n = g.n_groups() as f64;
    let r = g.order_r() as f64;
    let s_n = g.last_time();

    let sum_s: f64 = g.cum_times().iter().sum();
    let sum_ratio: f64 = if g.order_r() > 1 {
        g.cum_times().iter().map(|&s| s / (b * s).exp_m1()).sum()
    } else {
        0.0
    };
    Ok(n / b - sum_s + (r - 1.0) * sum_ratio - n * r * s_n / (b * s_n).exp_m1())
}

// s² e^{-bs} / (1 - e^{-bs})² written so it stays finite for large b·s.
fn curvature_term(s: f64, b: f64) -> f64 {
    let x = b * s;
    s * s / (x.exp_m1() * one_minus_exp_neg(x))
}

pub fn profile_score_derivative(g: &GroupedSeries, b: f64) -> Result<f64> {
    check_b(b)?;
    let n = g.n_groups() as f64;
    let r = g.order_r() as f64;
    let s_n = g.last_time();

    let sum_curv: f64 = if g.order_r() > 1 {
        g.cum_times().iter().map(|&s| curvature_term(s, b)).sum()
    } else {
        0.0
    };
    Ok(-n / (b * b) - (r - 1.0) * sum_curv + n * r * curvature_term(s_n, b))
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (ln_lo + step * i as f64).exp(),
        })
        .collect()
}

fn check_fittable(g: &GroupedSeries) -> Result<()> {
    if g.n_groups() < MIN_GROUPS {
        return Err(Error::TooFewGroups {
            groups: g.n_groups(),
            order: g.order_r(),
            required: MIN_GROUPS,
        });
    }
    Ok(())
}

struct RootSearch {
    b: f64,
    score: f64,
    iterations: usize,
    converged: bool,
}

/// Newton-Raphson on `[lo, hi]` where the score changes sign, starting from
/// the midpoint. A step that leaves the current bracket is replaced by
/// bisection.
fn safeguarded_newton(
    g: &GroupedSeries,
    cfg: &SolverConfig,
    mut lo: f64,
    mut hi: f64,
) -> Result<RootSearch> {
    let n = g.n_groups() as f64;
    let g_lo = profile_score(g, lo)?;
    let lo_positive = g_lo > 0.0;

    let mut b = 0.5 * (lo + hi);
    let mut score = profile_score(g, b)?;
    let mut best = (b, score);

    for iteration in 1..=cfg.max_iterations {
        if score.abs() <= cfg.score_tol * n / b {
            return Ok(RootSearch {
                b,
                score,
                iterations: iteration - 1,
                converged: true,
            });
        }
        if (score > 0.0) == lo_positive {
            lo = b;
        } else {
            hi = b;
        }

        let slope = profile_score_derivative(g, b)?;
        let newton = b - score / slope;
        let next = if slope != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };

        let step = (next - b).abs();
        b = next;
        score = profile_score(g, b)?;
        if score.abs() < best.1.abs() {
            best = (b, score);
        }

        let tolerance = cfg.score_tol * n / b;
        if step <= cfg.step_tol * b || score.abs() <= tolerance {
            return Ok(RootSearch {
                b,
                score,
                iterations: iteration,
                converged: score.abs() <= tolerance,
            });
        }
    }

    Ok(RootSearch {
        b: best.0,
        score: best.1,
        iterations: cfg.max_iterations,
        converged: false,
    })
}

/// Fits `(a, b)` by solving the profile score.
///
/// Every sign change of the score on a log-spaced scan of the bracket is
/// refined; when there are several, the root with the largest
/// log-likelihood wins. If the iteration cap is hit the best iterate is
/// returned with `converged = false`.
pub fn fit(g: &GroupedSeries, cfg: &SolverConfig) -> Result<FitResult> {
    check_fittable(g)?;
    cfg.validate()?;
    let (lo, hi) = cfg.bracket_for(g)?;

    let grid = log_grid(lo, hi, cfg.scan_points);
    let scores = grid
        .iter()
        .map(|&b| profile_score(g, b))
        .collect::<Result<Vec<_>>>()?;

    let mut intervals = Vec::new();
    for i in 0..grid.len() - 1 {
        let (s0, s1) = (scores[i], scores[i + 1]);
        if s0 == 0.0 {
            intervals.push((grid[i], grid[i]));
        } else if s0.signum() != s1.signum() && s1 != 0.0 {
            intervals.push((grid[i], grid[i + 1]));
        }
    }
    if scores[grid.len() - 1] == 0.0 {
        intervals.push((hi, hi));
    }
    if intervals.is_empty() {
        return Err(Error::NoSignChange { lo, hi });
    }

    let mut best: Option<(RootSearch, f64)> = None;
    for &(a_end, b_end) in &intervals {
        let search = if a_end == b_end {
            RootSearch {
                b: a_end,
                score: 0.0,
                iterations: 0,
                converged: true,
            }
        } else {
            safeguarded_newton(g, cfg, a_end, b_end)?
        };
        let a = a_given_b(g, search.b)?;
        let ll = log_likelihood(g, a, search.b)?;
        let better = match &best {
            None => true,
            Some((prev, prev_ll)) => {
                (search.converged && !prev.converged)
                    || (search.converged == prev.converged && ll > *prev_ll)
            }
        };
        if better {
            best = Some((search, ll));
        }
    }

    let (search, log_lik) = best.expect("at least one interval");
    let a = a_given_b(g, search.b)?;
    let n = g.n_groups() as f64;
    Ok(FitResult {
        model: OrderedGoModel::new(GoParams::new(a, search.b)?, g.order_r())?,
        n_groups: g.n_groups(),
        iterations: search.iterations,
        converged: search.converged,
        residual: search.score.abs(),
        score_tolerance: cfg.score_tol * n / search.b,
        log_lik,
        bracket: (lo, hi),
        roots_found: intervals.len(),
    })
}

/// Number of log-spaced points in the oracle's coarse scan.
pub const ORACLE_GRID_POINTS: usize = 4096;

fn profile_log_likelihood(g: &GroupedSeries, ln_b: f64) -> f64 {
    let b = ln_b.exp();
    a_given_b(g, b)
        .and_then(|a| log_likelihood(g, a, b))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Independent check on [`fit`]: maximizes the profile log-likelihood by a
/// dense log-spaced scan of the default bracket followed by golden-section
/// refinement in `ln b`. Uses no derivatives.
pub fn fit_oracle(g: &GroupedSeries) -> Result<FitResult> {
    check_fittable(g)?;
    let cfg = SolverConfig::default();
    let (lo, hi) = cfg.bracket_for(g)?;

    let grid: Vec<f64> = log_grid(lo, hi, ORACLE_GRID_POINTS)
        .into_iter()
        .map(f64::ln)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| profile_log_likelihood(g, x)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| {
                if v > acc.1 {
                    (i, v)
                } else {
                    acc
                }
            },
        );
    if best == 0 || best == grid.len() - 1 {
        return Err(Error::NoInteriorMaximum { lo, hi });
    }

    let (mut left, mut right) = (grid[best - 1], grid[best + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = right - inv_phi * (right - left);
    let mut x2 = left + inv_phi * (right - left);
    let mut f1 = profile_log_likelihood(g, x1);
    let mut f2 = profile_log_likelihood(g, x2);
    let mut iterations = 0;
    while right - left > 1e-12 && iterations < 200 {
        iterations += 1;
        if f1 < f2 {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + inv_phi * (right - left);
            f2 = profile_log_likelihood(g, x2);
        } else {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - inv_phi * (right - left);
            f1 = profile_log_likelihood(g, x1);
        }
    }

    let b = (0.5 * (left + right)).exp();
    let a = a_given_b(g, b)?;
    let log_lik = log_likelihood(g, a, b)?;
    let residual = profile_score(g, b)?.abs();
    let n = g.n_groups() as f64;
    Ok(FitResult {
        model: OrderedGoModel::new(GoParams::new(a, b)?, g.order_r())?,
        n_groups: g.n_groups(),
        iterations,
        converged: true,
        residual,
        score_tolerance: cfg.score_tol * n / b,
        log_lik,
        bracket: (lo, hi),
        roots_found: 1,
    })
}
