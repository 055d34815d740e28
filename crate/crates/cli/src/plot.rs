//! SVG line charts of benchmark and SG-MCMC CSVs.
//!
//! Rendering is a pure function of the CSV bytes: numbers are printed with
//! fixed precision and series are ordered by name, so identical input gives
//! byte-identical SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CliError, Result};
use crate::record::BENCH_HEADER;
use crate::sgmcmc_run::SGMCMC_HEADER;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_axes: bool,
    pub series: Vec<Series>,
}

/// A rendered chart and the file stem it should be saved under.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: String,
    pub svg: String,
}

fn parse_err(line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads data rows as `(line number, fields)` after checking the header.
fn read_rows(bytes: &[u8], expected_header: &str) -> Result<Vec<(u64, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes);
    let width = expected_header.split(',').count();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if i == 0 {
            continue;
        }
        if rec.len() != width {
            return Err(parse_err(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

fn number(line: u64, column: &str, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("column {column}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(
            line,
            format!("column {column}: '{field}' is not finite"),
        ));
    }
    Ok(v)
}

fn optional_count(line: u64, column: &str, field: &str) -> Result<Option<usize>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| parse_err(line, format!("column {column}: '{field}' is not a count")))
}

/// Renders every chart a CSV supports: one log-log timing chart per
/// benchmark experiment, or residual-versus-minibatch and residual-versus-time
/// charts for an SG-MCMC trace.
pub fn render_csv(bytes: &[u8]) -> Result<Vec<Figure>> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(1, format!("not UTF-8: {e}")))?;
    let header = text.lines().next().unwrap_or("").trim_end_matches('\r');
    let charts = if header == BENCH_HEADER {
        bench_charts(&read_rows(bytes, BENCH_HEADER)?)?
    } else if header == SGMCMC_HEADER {
        sgmcmc_charts(&read_rows(bytes, SGMCMC_HEADER)?)?
    } else {
        return Err(parse_err(1, format!("unrecognized header '{header}'")));
    };
    Ok(charts
        .into_iter()
        .map(|(name, chart)| Figure {
            name,
            svg: render_svg(&chart),
        })
        .collect())
}

const DIMS: [&str; 5] = ["k", "k1", "k2", "n", "p"];

fn bench_charts(rows: &[(u64, Vec<String>)]) -> Result<Vec<(String, Chart)>> {
    struct Parsed {
        algorithm: String,
        cov_kind: String,
        dims: [Option<usize>; 5],
        time: f64,
    }
    let mut by_experiment: BTreeMap<String, Vec<Parsed>> = BTreeMap::new();
    for (line, f) in rows {
        let mut dims = [None; 5];
        for (d, name) in DIMS.iter().enumerate() {
            dims[d] = optional_count(*line, name, &f[2 + d])?;
        }
        let time = number(*line, "wall_time_ms", &f[10])?;
        if time <= 0.0 {
            return Err(parse_err(*line, "wall_time_ms must be positive"));
        }
        by_experiment.entry(f[0].clone()).or_default().push(Parsed {
            algorithm: f[1].clone(),
            cov_kind: f[11].clone(),
            dims,
            time,
        });
    }
    let mut charts = Vec::new();
    for (experiment, recs) in by_experiment {
        // the swept dimension is the one with the most distinct values
        let mut best = (0usize, 0usize);
        for d in 0..DIMS.len() {
            let mut distinct: Vec<usize> = recs.iter().filter_map(|r| r.dims[d]).collect();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() > best.1 {
                best = (d, distinct.len());
            }
        }
        let axis = best.0;
        let several_kinds = recs.iter().any(|r| r.cov_kind != recs[0].cov_kind);
        let mut groups: BTreeMap<String, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
        for r in &recs {
            let Some(x) = r.dims[axis] else { continue };
            let name = if several_kinds {
                format!("{} ({})", r.algorithm, r.cov_kind)
            } else {
                r.algorithm.clone()
            };
            let e = groups.entry(name).or_default().entry(x).or_insert((0.0, 0));
            e.0 += r.time;
            e.1 += 1;
        }
        let series = groups
            .into_iter()
            .map(|(name, pts)| Series {
                name,
                points: pts
                    .into_iter()
                    .map(|(x, (t, c))| (x as f64, t / c as f64))
                    .collect(),
                dashed: false,
            })
            .collect();
        charts.push((
            experiment.clone(),
            Chart {
                title: format!("{experiment}: mean wall time over trials"),
                x_label: DIMS[axis].to_string(),
                y_label: "wall time (ms)".into(),
                log_axes: true,
                series,
            },
        ));
    }
    Ok(charts)
}

fn sgmcmc_charts(rows: &[(u64, Vec<String>)]) -> Result<Vec<(String, Chart)>> {
    let mut by_method: BTreeMap<String, (Vec<(f64, f64)>, Vec<(f64, f64)>)> = BTreeMap::new();
    let mut floor: Option<f64> = None;
    for (line, f) in rows {
        let minibatch = number(*line, "minibatch", &f[1])?;
        let elapsed = number(*line, "elapsed_ms", &f[2])?;
        let residual = number(*line, "residual", &f[4])?;
        floor = Some(number(*line, "floor", &f[5])?);
        let e = by_method.entry(f[0].clone()).or_default();
        e.0.push((minibatch, residual));
        e.1.push((elapsed, residual));
    }
    let mut vs_batch = Vec::new();
    let mut vs_time = Vec::new();
    for (name, (b, t)) in by_method {
        vs_batch.push(Series {
            name: name.clone(),
            points: b,
            dashed: false,
        });
        vs_time.push(Series {
            name,
            points: t,
            dashed: false,
        });
    }
    if let Some(floor) = floor {
        for series in [&mut vs_batch, &mut vs_time] {
            let x_max = series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0))
                .fold(0.0, f64::max);
            let x_min = series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0))
                .fold(x_max, f64::min);
            series.push(Series {
                name: "batch posterior mean".into(),
                points: vec![(x_min, floor), (x_max, floor)],
                dashed: true,
            });
        }
    }
    let chart = |title: &str, x_label: &str, series| Chart {
        title: title.into(),
        x_label: x_label.into(),
        y_label: "residual error".into(),
        log_axes: false,
        series,
    };
    Ok(vec![
        (
            "sgmcmc-minibatch".into(),
            chart(
                "residual error by processed minibatches",
                "minibatch",
                vs_batch,
            ),
        ),
        (
            "sgmcmc-time".into(),
            chart(
                "residual error by wall time",
                "cumulative wall time (ms)",
                vs_time,
            ),
        ),
    ])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Compact tick label: plain decimals for moderate magnitudes, otherwise
/// scientific notation.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        let e = a.log10().floor() as i32;
        let m = v / 10f64.powi(e);
        if (m.abs() - 1.0).abs() < 1e-9 {
            format!("{}1e{e}", if v < 0.0 { "-" } else { "" })
        } else {
            format!("{m:.1}e{e}")
        }
    }
}

/// Axis mapping from data to pixels plus tick positions.
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    ticks: Vec<f64>,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64> + Clone, log: bool) -> Self {
        let vals: Vec<f64> = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .collect();
        let (mut min, mut max) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(*v), b.max(*v))
            });
        if vals.is_empty() {
            (min, max) = if log { (1.0, 10.0) } else { (0.0, 1.0) };
        }
        if log {
            let mut lo = min.log10().floor();
            let mut hi = max.log10().ceil();
            if hi <= lo {
                lo -= 1.0;
                hi += 1.0;
            }
            let ticks = (lo as i32..=hi as i32).map(|e| 10f64.powi(e)).collect();
            Axis { lo, hi, log, ticks }
        } else {
            if max <= min {
                let pad = if min == 0.0 { 1.0 } else { min.abs() * 0.1 };
                min -= pad;
                max += pad;
            }
            let raw = (max - min) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let lo = (min / step).floor() * step;
            let hi = (max / step).ceil() * step;
            let n = ((hi - lo) / step).round() as usize;
            let ticks = (0..=n).map(|i| lo + i as f64 * step).collect();
            Axis { lo, hi, log, ticks }
        }
    }

    /// Fraction of the axis length, in `[0, 1]` for in-range values.
    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }
}

/// Standalone SVG 1.1 document for `chart`.
pub fn render_svg(chart: &Chart) -> String {
    let xs = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1));
    let x_axis = Axis::new(xs, chart.log_axes);
    let y_axis = Axis::new(ys, chart.log_axes);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x_axis.frac(x) * plot_w;
    let py = |y: f64| TOP + (1.0 - y_axis.frac(y)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&chart.title)
    );
    for &t in &x_axis.ticks {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP,
            TOP + plot_h
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            tick_label(t)
        );
    }
    for &t in &y_axis.ticks {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    let scale = if chart.log_axes { " (log scale)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{scale}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}{scale}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );
    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if series.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let pts: Vec<String> = series
            .points
            .iter()
            .filter(|(x, y)| !chart.log_axes || (*x > 0.0 && *y > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_labels() {
        assert_eq!(tick_label(1000.0), "1000");
        assert_eq!(tick_label(0.01), "0.01");
        assert_eq!(tick_label(1e6), "1e6");
        assert_eq!(tick_label(1e-5), "1e-5");
        assert_eq!(tick_label(2.5), "2.5");
    }

    #[test]
    fn log_axis_spans_whole_decades() {
        let a = Axis::new([3.0, 700.0].into_iter(), true);
        assert_eq!(a.ticks, vec![1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(a.frac(1.0), 0.0);
        assert_eq!(a.frac(1000.0), 1.0);
    }

    #[test]
    fn linear_axis_uses_round_steps() {
        let a = Axis::new([0.013, 0.087].into_iter(), false);
        assert_eq!(a.ticks.len(), 6);
        assert!((a.ticks[1] - a.ticks[0] - 0.02).abs() < 1e-12);
    }
}
