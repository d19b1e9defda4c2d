//! End-to-end pipeline and the `report.json` document.

use serde::Serialize;

use crate::error::Result;
use crate::failure_data::{group_by_order, FailureSeries, GroupedSeries};
use crate::go_model::{GoParams, OrderedGoModel};
use crate::mle::{fit, FitResult, SolverConfig};
use crate::spc::{
    build_chart, control_limits, detect, ControlLimits, DetectionReport, MScale, MeanValueChart,
    Verdict,
};

pub const TOOL_NAME: &str = "relimon";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where the model parameters come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSource {
    Fit(SolverConfig),
    /// Parameters known in advance; no estimation.
    Known(GoParams),
}

/// Every intermediate of one run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub grouped: GroupedSeries,
    /// `None` when the parameters were given.
    pub fit: Option<FitResult>,
    pub model: OrderedGoModel,
    pub limits: ControlLimits,
    pub chart: MeanValueChart,
    pub detection: DetectionReport,
}

/// Group, fit (unless parameters are known), derive limits, chart, detect.
/// A fit that hit the iteration cap is returned as is; see
/// [`Pipeline::converged`].
pub fn run_pipeline(
    series: &FailureSeries,
    order_r: usize,
    source: &ModelSource,
    m_scale: MScale,
) -> Result<Pipeline> {
    let grouped = group_by_order(series, order_r)?;
    let (fit, model) = match source {
        ModelSource::Fit(cfg) => {
            let fit = fit(&grouped, cfg)?;
            let model = fit.model;
            (Some(fit), model)
        }
        ModelSource::Known(params) => (None, OrderedGoModel::new(*params, order_r)?),
    };
    let limits = control_limits(&model);
    let chart = build_chart(&grouped, &model, &limits, m_scale)?;
    let detection = detect(&chart);
    Ok(Pipeline {
        grouped,
        fit,
        model,
        limits,
        chart,
        detection,
    })
}

impl Pipeline {
    pub fn converged(&self) -> bool {
        self.fit.as_ref().is_none_or(|f| f.converged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub a: f64,
    pub b: f64,
    pub r: usize,
    /// `fitted` or `given`.
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub a: f64,
    pub b: f64,
    pub r: usize,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub log_lik: f64,
    pub bracket: [f64; 2],
    pub roots_found: usize,
}

impl From<&FitResult> for FitSummary {
    fn from(fit: &FitResult) -> Self {
        FitSummary {
            a: fit.a(),
            b: fit.b(),
            r: fit.model.order_r(),
            n: fit.n_groups,
            iterations: fit.iterations,
            converged: fit.converged,
            residual: fit.residual,
            log_lik: fit.log_lik,
            bracket: [fit.bracket.0, fit.bracket.1],
            roots_found: fit.roots_found,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub source: String,
    pub count: usize,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartSummary {
    pub points: usize,
    pub alarms: usize,
    pub above_ucl: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub input: InputDigest,
    pub order_r: usize,
    pub dropped_tail: usize,
    pub model: ModelSummary,
    pub fit: Option<FitSummary>,
    pub limits: ControlLimits,
    pub summary: ChartSummary,
    pub chart: serde_json::Value,
}

impl RunReport {
    pub fn new(series: &FailureSeries, pipeline: &Pipeline) -> Self {
        RunReport {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            input: InputDigest {
                source: series.source_label().to_string(),
                count: series.len(),
                sum: series.total(),
            },
            order_r: pipeline.grouped.order_r(),
            dropped_tail: pipeline.grouped.dropped_tail(),
            model: ModelSummary {
                a: pipeline.model.params().a(),
                b: pipeline.model.params().b(),
                r: pipeline.model.order_r(),
                source: if pipeline.fit.is_some() {
                    "fitted"
                } else {
                    "given"
                },
            },
            fit: pipeline.fit.as_ref().map(FitSummary::from),
            limits: pipeline.limits,
            summary: ChartSummary {
                points: pipeline.chart.points.len(),
                alarms: pipeline.detection.alarms.len(),
                above_ucl: pipeline.detection.above_ucl.len(),
                verdict: pipeline.detection.verdict,
            },
            chart: pipeline.chart.to_json_value(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
