//! Probability-based control limits and the mean value chart.
//!
//! Limits sit where the ordered mean value reaches `a^r · p` for
//! `p ∈ {0.00135, 0.5, 0.99865}`. The chart plots successive differences of
//! `m(s_k)`; a difference below the lower limit is an alarm, one above the
//! upper limit is a "better quality" signal.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::failure_data::{GroupedSeries, MIN_GROUPS};
use crate::go_model::OrderedGoModel;

pub const P_LOW: f64 = 0.00135;
pub const P_CENTER: f64 = 0.5;
pub const P_HIGH: f64 = 0.99865;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlLimits {
    pub p_low: f64,
    pub p_center: f64,
    pub p_high: f64,
    pub t_low: f64,
    pub t_center: f64,
    pub t_high: f64,
    pub m_low: f64,
    pub m_center: f64,
    pub m_high: f64,
}

/// Time at which `(1 - e^{-bt})^r = p`.
fn quantile_time(model: &OrderedGoModel, p: f64) -> f64 {
    let root = p.powf(1.0 / model.order_r() as f64);
    -(-root).ln_1p() / model.params().b()
}

pub fn control_limits(model: &OrderedGoModel) -> ControlLimits {
    let scale = model.asymptote();
    ControlLimits {
        p_low: P_LOW,
        p_center: P_CENTER,
        p_high: P_HIGH,
        t_low: quantile_time(model, P_LOW),
        t_center: quantile_time(model, P_CENTER),
        t_high: quantile_time(model, P_HIGH),
        m_low: scale * P_LOW,
        m_center: scale * P_CENTER,
        m_high: scale * P_HIGH,
    }
}

/// Which mean value the chart differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MScale {
    /// `a(1 - e^{-bt})`, as in the reference tables.
    #[default]
    Base,
    /// `[a(1 - e^{-bt})]^r`, on the same scale as the limits.
    Ordered,
}

impl std::str::FromStr for MScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(MScale::Base),
            "ordered" => Ok(MScale::Ordered),
            other => Err(Error::InvalidParameter(format!(
                "unknown m-scale {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    BelowLcl,
    InControl,
    AboveUcl,
}

impl PointStatus {
    /// Limits themselves count as in control.
    pub fn classify(diff: f64, limits: &ControlLimits) -> Self {
        if diff < limits.m_low {
            PointStatus::BelowLcl
        } else if diff > limits.m_high {
            PointStatus::AboveUcl
        } else {
            PointStatus::InControl
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PointStatus::BelowLcl => "below_lcl",
            PointStatus::InControl => "in_control",
            PointStatus::AboveUcl => "above_ucl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    InControl,
    OutOfControl,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::InControl => "in_control",
            Verdict::OutOfControl => "out_of_control",
        }
    }
}

/// One chart row: `m` at `s_index` and the step to the next group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartPoint {
    pub index: usize,
    pub time: f64,
    pub m_value: f64,
    /// `m(s_{index+1}) - m(s_index)`.
    pub diff: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanValueChart {
    pub points: Vec<ChartPoint>,
    pub limits: ControlLimits,
    pub model: OrderedGoModel,
    pub m_scale: MScale,
    /// `s_n`, the time of the last group (no difference of its own).
    pub last_time: f64,
    /// `m(s_n)`.
    pub last_m: f64,
    pub verdict: Verdict,
    pub alarm_indices: Vec<usize>,
}

pub fn build_chart(
    g: &GroupedSeries,
    model: &OrderedGoModel,
    limits: &ControlLimits,
    m_scale: MScale,
) -> Result<MeanValueChart> {
    if g.order_r() != model.order_r() {
        return Err(Error::OrderMismatch {
            data: g.order_r(),
            model: model.order_r(),
        });
    }
    if g.n_groups() < MIN_GROUPS {
        return Err(Error::TooFewGroups {
            groups: g.n_groups(),
            order: g.order_r(),
            required: MIN_GROUPS,
        });
    }

    let m_values = g
        .cum_times()
        .iter()
        .map(|&t| match m_scale {
            MScale::Base => model.mean_value(t),
            MScale::Ordered => model.ordered_mean_value(t),
        })
        .collect::<Result<Vec<f64>>>()?;

    let points: Vec<ChartPoint> = m_values
        .windows(2)
        .zip(g.cum_times())
        .enumerate()
        .map(|(i, (pair, &time))| {
            let diff = pair[1] - pair[0];
            ChartPoint {
                index: i + 1,
                time,
                m_value: pair[0],
                diff,
                status: PointStatus::classify(diff, limits),
            }
        })
        .collect();

    let mut chart = MeanValueChart {
        points,
        limits: *limits,
        model: *model,
        m_scale,
        last_time: g.last_time(),
        last_m: *m_values.last().expect("at least two groups"),
        verdict: Verdict::InControl,
        alarm_indices: Vec::new(),
    };
    let report = detect(&chart);
    chart.verdict = report.verdict;
    chart.alarm_indices = report.alarms;
    Ok(chart)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetectionReport {
    pub verdict: Verdict,
    /// Indices of below-LCL points.
    pub alarms: Vec<usize>,
    /// Indices of above-UCL points; reported, never alarms.
    pub above_ucl: Vec<usize>,
    pub below_count: usize,
    pub in_control_count: usize,
    pub above_count: usize,
}

pub fn detect(chart: &MeanValueChart) -> DetectionReport {
    let mut alarms = Vec::new();
    let mut above_ucl = Vec::new();
    for p in &chart.points {
        match p.status {
            PointStatus::BelowLcl => alarms.push(p.index),
            PointStatus::AboveUcl => above_ucl.push(p.index),
            PointStatus::InControl => {}
        }
    }
    let verdict = if alarms.is_empty() {
        Verdict::InControl
    } else {
        Verdict::OutOfControl
    };
    DetectionReport {
        verdict,
        below_count: alarms.len(),
        above_count: above_ucl.len(),
        in_control_count: chart.points.len() - alarms.len() - above_ucl.len(),
        alarms,
        above_ucl,
    }
}

pub const CSV_HEADER: &str = "index,time,m,diff,status";

impl MeanValueChart {
    /// `index,time,m,diff,status` rows with 9 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{:.9},{:.9},{:.9},{}",
                p.index,
                p.time,
                p.m_value,
                p.diff,
                p.status.as_str()
            );
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let params = self.model.params();
        let points: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| {
                serde_json::json!({
                    "index": p.index,
                    "time": p.time,
                    "m": p.m_value,
                    "diff": p.diff,
                    "status": p.status,
                })
            })
            .collect();
        serde_json::json!({
            "model": { "a": params.a(), "b": params.b(), "r": self.model.order_r() },
            "limits": self.limits,
            "m_scale": self.m_scale,
            "points": points,
            "verdict": self.verdict,
            "alarms": self.alarm_indices,
        })
    }
}
