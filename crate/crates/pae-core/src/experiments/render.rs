//! CSV and SVG output. Both are plain strings with deterministic bytes.

use std::fmt::Write as _;

use super::config::strategy_name;
use super::sweeps::{BiasRow, ResultRow, TlRow};
use crate::pae_driver::hl_reference;

pub fn csv(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(scale: Scale, vals: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in vals {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis {
                scale,
                lo: 0.0,
                hi: 1.0,
            };
        }
        match scale {
            Scale::Log => {
                let (l, h) = (lo.log10().floor(), hi.log10().ceil());
                Axis {
                    scale,
                    lo: l,
                    hi: if h > l { h } else { l + 1.0 },
                }
            }
            Scale::Linear => {
                if hi > lo {
                    let pad = 0.05 * (hi - lo);
                    Axis {
                        scale,
                        lo: lo - pad,
                        hi: hi + pad,
                    }
                } else {
                    Axis {
                        scale,
                        lo: lo - 1.0,
                        hi: hi + 1.0,
                    }
                }
            }
        }
    }

    fn coord(&self, v: f64) -> f64 {
        let u = match self.scale {
            Scale::Log => v.log10(),
            Scale::Linear => v,
        };
        (u - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match self.scale {
            Scale::Log => {
                let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i32;
                (self.lo as i32..=self.hi as i32)
                    .step_by(step as usize)
                    .map(|e| (10f64.powi(e), format!("1e{e}")))
                    .collect()
            }
            Scale::Linear => {
                let span = self.hi - self.lo;
                let raw = span / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .iter()
                    .map(|m| m * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(raw);
                let mut v = (self.lo / step).ceil() * step;
                let mut out = Vec::new();
                while v <= self.hi + 1e-9 * step {
                    let label = format!("{}", (v / step).round() * step);
                    out.push((v, label));
                    v += step;
                }
                out
            }
        }
    }
}

fn usable(scale: Scale, v: f64) -> bool {
    v.is_finite() && (scale == Scale::Linear || v > 0.0)
}

pub fn svg(plot: &Plot) -> String {
    let pts = || plot.series.iter().flat_map(|s| s.points.iter().copied());
    let xa = Axis::fit(
        plot.x_scale,
        pts().map(|p| p.0).filter(|v| usable(plot.x_scale, *v)),
    );
    let ya = Axis::fit(
        plot.y_scale,
        pts().map(|p| p.1).filter(|v| usable(plot.y_scale, *v)),
    );
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |x: f64| LEFT + xa.coord(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.coord(y)) * ph;

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        esc(&plot.title)
    );
    let _ = writeln!(
        o,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, label) in xa.ticks() {
        let x = px(v);
        let _ = writeln!(
            o,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            o,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + ph + 18.0
        );
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        let _ = writeln!(
            o,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 16.0,
        esc(&plot.x_label)
    );
    let _ = writeln!(
        o,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(&plot.y_label)
    );
    let mut color_i = 0;
    for (i, s) in plot.series.iter().enumerate() {
        let color = if s.dashed {
            "gray"
        } else {
            color_i += 1;
            COLORS[(color_i - 1) % COLORS.len()]
        };
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| usable(plot.x_scale, *x) && usable(plot.y_scale, *y))
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            o,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            coords.join(" ")
        );
        if !s.dashed {
            for c in &coords {
                let (cx, cy) = c.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(o, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
            }
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            o,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    o.push_str("</svg>\n");
    o
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XAxis {
    Queries,
    Depth,
}

/// One polyline per (a, strategy); the query plot adds ε = π/(2(N−1)).
pub fn rmse_plot(rows: &[ResultRow], x: XAxis) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let label = format!("{} a={:.4}", strategy_name(r.strategy), r.a);
        let xv = match x {
            XAxis::Queries => r.n as f64,
            XAxis::Depth => r.oracle_depth as f64,
        };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((xv, r.rmse)),
            None => series.push(Series {
                label,
                points: vec![(xv, r.rmse)],
                dashed: false,
            }),
        }
    }
    if x == XAxis::Queries {
        let ns = rows.iter().map(|r| r.n).filter(|n| *n > 1);
        if let (Some(lo), Some(hi)) = (ns.clone().min(), ns.max()) {
            let points = log_span(lo as f64, hi as f64, 32)
                .into_iter()
                .filter_map(|n| hl_reference(n.round() as u64).ok().map(|e| (n.round(), e)))
                .collect();
            series.push(Series {
                label: "HL π/(2(N−1))".into(),
                points,
                dashed: true,
            });
        }
    }
    Plot {
        title: match x {
            XAxis::Queries => "RMSE vs total queries".into(),
            XAxis::Depth => "RMSE vs oracle depth".into(),
        },
        x_label: match x {
            XAxis::Queries => "N".into(),
            XAxis::Depth => "oracle depth".into(),
        },
        y_label: "RMSE".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        series,
    }
}

fn log_span(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// |β| against L, one series per step k and setting.
pub fn bias_plot(rows: &[BiasRow]) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        for (tag, l, b) in [("+", r.l_plus, r.beta_plus), ("i", r.l_i, r.beta_i)] {
            let label = format!("k={} {tag}", r.k);
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.points.push((l as f64, b)),
                None => series.push(Series {
                    label,
                    points: vec![(l as f64, b)],
                    dashed: false,
                }),
            }
        }
    }
    Plot {
        title: "max bias vs L".into(),
        x_label: "L".into(),
        y_label: "max |β|".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        series,
    }
}

pub fn tl_plot(rows: &[TlRow], fit: Option<(f64, f64)>) -> Plot {
    let mut series = vec![
        Series {
            label: "L*".into(),
            points: rows.iter().map(|r| (r.t, r.l_star)).collect(),
            dashed: false,
        },
        Series {
            label: "even L".into(),
            points: rows.iter().map(|r| (r.t, r.l_even as f64)).collect(),
            dashed: false,
        },
    ];
    if let Some((m, c)) = fit {
        let points = rows.iter().map(|r| (r.t, m * r.t + c)).collect();
        series.push(Series {
            label: format!("fit {m:.3}T+{c:.2}"),
            points,
            dashed: true,
        });
    }
    Plot {
        title: "T-L relation".into(),
        x_label: "T".into(),
        y_label: "L".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series,
    }
}
