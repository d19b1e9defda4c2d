//! Inter-failure time series: parsing, serialization, the bundled Musa (1975)
//! data set, and grouping into cumulative times at every r-th failure.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of complete subgroups the estimator and chart need.
pub const MIN_GROUPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One value per line, `#` comments, blank lines ignored.
    #[default]
    Plain,
    /// `fault,time` header followed by `index,delta` rows.
    Csv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" | "txt" => Ok(InputFormat::Plain),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

/// Ordered raw inter-failure times, as recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureSeries {
    deltas: Vec<f64>,
    source_label: String,
}

impl FailureSeries {
    pub fn new(deltas: Vec<f64>, source_label: impl Into<String>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::NoObservations);
        }
        if let Some((index, &value)) = deltas
            .iter()
            .enumerate()
            .find(|(_, d)| !d.is_finite() || **d < 0.0)
        {
            return Err(Error::InvalidDelta { index, value });
        }
        Ok(FailureSeries {
            deltas,
            source_label: source_label.into(),
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.deltas.iter().sum()
    }

    /// Failure epochs (running sum of the deltas).
    pub fn epochs(&self) -> Vec<f64> {
        self.deltas
            .iter()
            .scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            })
            .collect()
    }
}

/// Cumulative times `s_1 < ... < s_n` at every r-th failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedSeries {
    order_r: usize,
    cum_times: Vec<f64>,
    dropped_tail: usize,
}

impl GroupedSeries {
    /// Builds a grouped series directly from cumulative times.
    ///
    /// Times must be positive and non-decreasing; ties arise from zero
    /// inter-failure times when `r` is small. Only one point is required;
    /// [`group_by_order`] enforces the two-group minimum used by fitting and
    /// charting.
    pub fn from_cumulative(order_r: usize, cum_times: Vec<f64>) -> Result<Self> {
        if order_r < 1 {
            return Err(Error::InvalidOrder(order_r));
        }
        if cum_times.is_empty() {
            return Err(Error::NoObservations);
        }
        let mut prev = 0.0;
        for (index, &s) in cum_times.iter().enumerate() {
            if !s.is_finite() || s < prev || s <= 0.0 {
                return Err(Error::NonIncreasingTimes { index });
            }
            prev = s;
        }
        Ok(GroupedSeries {
            order_r,
            cum_times,
            dropped_tail: 0,
        })
    }

    pub fn order_r(&self) -> usize {
        self.order_r
    }

    pub fn cum_times(&self) -> &[f64] {
        &self.cum_times
    }

    pub fn n_groups(&self) -> usize {
        self.cum_times.len()
    }

    pub fn dropped_tail(&self) -> usize {
        self.dropped_tail
    }

    /// Last cumulative time `s_n`.
    pub fn last_time(&self) -> f64 {
        *self.cum_times.last().expect("grouped series is non-empty")
    }

    /// Rescales every cumulative time by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let mut out = GroupedSeries::from_cumulative(
            self.order_r,
            self.cum_times.iter().map(|s| s * factor).collect(),
        )?;
        out.dropped_tail = self.dropped_tail;
        Ok(out)
    }
}

/// Parses inter-failure times. Errors carry the 1-based line number.
pub fn parse_failure_data(
    text: &str,
    format: InputFormat,
    source_label: impl Into<String>,
) -> Result<FailureSeries> {
    let deltas = match format {
        InputFormat::Plain => parse_plain(text)?,
        InputFormat::Csv => parse_csv(text)?,
    };
    FailureSeries::new(deltas, source_label)
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {token:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {token}"),
        });
    }
    if value < 0.0 {
        return Err(Error::Parse {
            line,
            message: format!("negative value {token}"),
        });
    }
    Ok(value)
}

fn parse_plain(text: &str) -> Result<Vec<f64>> {
    let mut deltas = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let token = tokens.next().expect("non-empty line has a token");
        if tokens.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "expected one value per line".into(),
            });
        }
        deltas.push(parse_value(token, line)?);
    }
    Ok(deltas)
}

fn parse_csv(text: &str) -> Result<Vec<f64>> {
    let mut deltas = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        if !seen_header {
            let header: Vec<String> = content
                .split(',')
                .map(|c| c.trim().to_ascii_lowercase())
                .collect();
            if header != ["fault", "time"] {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header \"fault,time\", found {content:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        fields[0].parse::<u64>().map_err(|_| Error::Parse {
            line,
            message: format!("fault index is not a non-negative integer: {:?}", fields[0]),
        })?;
        deltas.push(parse_value(fields[1], line)?);
    }
    Ok(deltas)
}

/// Writes a series in the given format: LF line endings, no trailing
/// whitespace, shortest round-trip decimal representation of each value.
pub fn serialize_failure_data(series: &FailureSeries, format: InputFormat) -> String {
    let mut out = String::new();
    match format {
        InputFormat::Plain => {
            for d in series.deltas() {
                let _ = writeln!(out, "{d}");
            }
        }
        InputFormat::Csv => {
            out.push_str("fault,time\n");
            for (i, d) in series.deltas().iter().enumerate() {
                let _ = writeln!(out, "{},{d}", i + 1);
            }
        }
    }
    out
}

/// Groups the series into disjoint successive subgroups of `r` failures and
/// returns the cumulative time at the end of each complete subgroup. A
/// trailing incomplete subgroup is dropped and counted.
///
/// A zero-length subgroup after the first only produces a tie in the
/// cumulative times; a zero-length first subgroup would put `s_1` at 0 and
/// is rejected.
pub fn group_by_order(series: &FailureSeries, r: usize) -> Result<GroupedSeries> {
    if r < 1 {
        return Err(Error::InvalidOrder(r));
    }
    let n_groups = series.len() / r;
    if n_groups < MIN_GROUPS {
        return Err(Error::TooFewGroups {
            groups: n_groups,
            order: r,
            required: MIN_GROUPS,
        });
    }

    let mut cum_times = Vec::with_capacity(n_groups);
    let mut running = 0.0;
    for (group, chunk) in series.deltas().chunks_exact(r).enumerate() {
        // Accumulate delta by delta so s_k is the plain prefix sum.
        for d in chunk {
            running += d;
        }
        if running <= 0.0 {
            return Err(Error::EmptySubgroup { group: group + 1 });
        }
        cum_times.push(running);
    }

    Ok(GroupedSeries {
        order_r: r,
        cum_times,
        dropped_tail: series.len() % r,
    })
}

/// Time between failures of a software product, Musa (1975), 136 faults.
const MUSA_1975: [u32; 136] = [
    3, 30, 113, 81, 115, 9, 2, 91, 112, 15, 138, 50, 77, 24, 108, 88, 670, 120, 26, 114, 325, 55,
    242, 68, 422, 180, 10, 1146, 600, 15, 36, 4, 0, 8, 227, 65, 176, 58, 457, 300, 97, 263, 452,
    255, 197, 193, 6, 79, 816, 1351, 148, 21, 233, 134, 357, 193, 236, 31, 369, 748, 0, 232, 330,
    365, 1222, 543, 10, 16, 529, 379, 44, 129, 810, 290, 300, 529, 281, 160, 828, 1011, 445, 296,
    1755, 1064, 1783, 860, 983, 707, 33, 868, 724, 2323, 2930, 1461, 843, 12, 261, 1800, 865, 1435,
    30, 143, 108, 0, 3110, 1247, 943, 700, 875, 245, 729, 1897, 447, 386, 446, 122, 990, 948, 1082,
    22, 75, 482, 5509, 100, 10, 1071, 371, 790, 6150, 3321, 1045, 648, 5485, 1160, 1864, 4116,
];

pub const MUSA_LABEL: &str = "musa-1975";

pub fn musa_fixture() -> FailureSeries {
    FailureSeries::new(
        MUSA_1975.iter().map(|&d| f64::from(d)).collect(),
        MUSA_LABEL,
    )
    .expect("bundled data is valid")
}
