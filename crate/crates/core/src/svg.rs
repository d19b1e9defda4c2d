//! SVG rendering of a mean value chart.
//!
//! The x axis is the point index `1..n-1`; the y axis carries the successive
//! differences and the three limit lines. Output depends only on the chart
//! and the options, with every coordinate printed to two decimals.

use std::fmt::Write as _;

use crate::spc::{MeanValueChart, PointStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub log_y: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 800.0,
            height: 480.0,
            log_y: true,
        }
    }
}

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 60.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

struct YAxis {
    log: bool,
    lo: f64,
    hi: f64,
    top: f64,
    bottom: f64,
}

impl YAxis {
    fn new(chart: &MeanValueChart, log: bool, top: f64, bottom: f64) -> Self {
        let limits = &chart.limits;
        let diffs = chart.points.iter().map(|p| p.diff);
        let max = diffs.clone().fold(limits.m_high, f64::max);
        if log {
            let min_positive = diffs.filter(|d| *d > 0.0).fold(limits.m_low, f64::min);
            let lo = 10f64.powf(min_positive.log10().floor());
            let hi = 10f64.powf(max.log10().ceil());
            YAxis {
                log,
                lo,
                hi,
                top,
                bottom,
            }
        } else {
            YAxis {
                log,
                lo: 0.0,
                hi: max * 1.05,
                top,
                bottom,
            }
        }
    }

    /// Zero and sub-range values are pinned to the bottom of a log axis.
    fn map(&self, v: f64) -> f64 {
        let frac = if self.log {
            let v = v.max(self.lo);
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        self.bottom - frac * (self.bottom - self.top)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (
                self.lo.log10().round() as i32,
                self.hi.log10().round() as i32,
            );
            (a..=b).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=5).map(|k| self.hi * f64::from(k) / 5.0).collect()
        }
    }
}

fn status_class(status: PointStatus) -> &'static str {
    match status {
        PointStatus::BelowLcl => "point below-lcl",
        PointStatus::InControl => "point in-control",
        PointStatus::AboveUcl => "point above-ucl",
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.0e}")
    }
}

pub fn render_chart(chart: &MeanValueChart, opts: &SvgOptions) -> String {
    let (w, h) = (opts.width, opts.height);
    let (left, right) = (MARGIN_LEFT, w - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, h - MARGIN_BOTTOM);
    let y = YAxis::new(chart, opts.log_y, top, bottom);
    let count = chart.points.len();
    let x = |index: usize| {
        if count <= 1 {
            0.5 * (left + right)
        } else {
            left + (index - 1) as f64 / (count - 1) as f64 * (right - left)
        }
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    out.push_str(
        "<style>\n\
         .axis{stroke:#333;stroke-width:1}\n\
         .grid{stroke:#ddd;stroke-width:1}\n\
         .limit{stroke-width:1.5;stroke-dasharray:6 4}\n\
         .lcl{stroke:#c0392b}.cl{stroke:#555}.ucl{stroke:#2471a3}\n\
         .series{fill:none;stroke:#444;stroke-width:1}\n\
         .in-control{fill:#444}.below-lcl{fill:#c0392b}.above-ucl{fill:#2471a3}\n\
         text{font-family:sans-serif;font-size:12px}\n\
         </style>\n",
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#
    );
    let r = chart.model.order_r();
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">Mean value chart (order {r}, {} scale)</text>"#,
        0.5 * w,
        match chart.m_scale {
            crate::spc::MScale::Base => "base",
            crate::spc::MScale::Ordered => "ordered",
        }
    );

    for tick in y.ticks() {
        let ty = y.map(tick);
        let _ = writeln!(
            out,
            r#"<line class="grid" x1="{left:.2}" y1="{ty:.2}" x2="{right:.2}" y2="{ty:.2}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            ty + 4.0,
            fmt_tick(tick)
        );
    }
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{left:.2}" y1="{bottom:.2}" x2="{right:.2}" y2="{bottom:.2}"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{left:.2}" y1="{top:.2}" x2="{left:.2}" y2="{bottom:.2}"/>"#
    );
    let step = (count / 10).max(1);
    for index in (1..=count).filter(|i| (i - 1) % step == 0 || *i == count) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{index}</text>"#,
            x(index),
            bottom + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">failure group</text>"#,
        0.5 * (left + right),
        h - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">successive difference of m(t){}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom),
        if y.log { " (log)" } else { "" }
    );

    let limits = &chart.limits;
    for (class, label, level) in [
        ("lcl", "LCL", limits.m_low),
        ("cl", "CL", limits.m_center),
        ("ucl", "UCL", limits.m_high),
    ] {
        let ly = y.map(level);
        let _ = writeln!(
            out,
            r#"<line class="limit {class}" x1="{left:.2}" y1="{ly:.2}" x2="{right:.2}" y2="{ly:.2}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text class="limit-label" x="{:.2}" y="{:.2}">{label}</text>"#,
            right + 6.0,
            ly + 4.0
        );
    }

    let path: Vec<String> = chart
        .points
        .iter()
        .map(|p| format!("{:.2},{:.2}", x(p.index), y.map(p.diff)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="series" points="{}"/>"#,
        path.join(" ")
    );
    for p in &chart.points {
        let _ = writeln!(
            out,
            r#"<circle class="{}" cx="{:.2}" cy="{:.2}" r="3"><title>{}: {:.9}</title></circle>"#,
            status_class(p.status),
            x(p.index),
            y.map(p.diff),
            p.index,
            p.diff
        );
    }
    out.push_str("</svg>\n");
    out
}
