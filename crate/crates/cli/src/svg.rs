//! Standalone SVG 1.1 line plots with confidence bands.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::experiment::Summary;

/// Values at or below this are drawn at the floor of a log-scaled axis.
pub const LOG_FLOOR: f64 = 1e-30;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub log_x: bool,
    pub log_y: bool,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            log_x: false,
            log_y: true,
            title: String::new(),
            x_label: "samples seen".to_string(),
            y_label: String::new(),
        }
    }
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(log: bool, lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = if log {
            (lo.log10(), hi.log10())
        } else {
            (lo, hi)
        };
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            let pad = if log { 1.0 } else { lo.abs().max(1.0) * 0.1 };
            lo -= pad;
            hi += pad;
        }
        Self {
            log,
            lo,
            hi,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.px_lo + (t - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo).round() as i64;
            let step = ((span + 9) / 10).max(1);
            let first = self.lo.round() as i64;
            (0..=span / step)
                .map(|m| {
                    let e = first + m * step;
                    (10f64.powi(e as i32), format!("1e{e}"))
                })
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let start = (self.lo / step).ceil() as i64;
            let end = (self.hi / step).floor() as i64;
            (start..=end)
                .map(|m| {
                    let v = m as f64 * step;
                    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
                    (v, tick_label(v))
                })
                .collect()
        }
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One plotted series, after clipping.
struct Series<'a> {
    label: &'a str,
    points: Vec<(f64, f64, f64, f64)>,
}

/// Renders summaries as an SVG document.
pub fn render(summaries: &[Summary], opts: &PlotOptions) -> Result<String> {
    if summaries.is_empty() {
        return Err(CliError::Usage("cannot plot an empty summary set".into()));
    }
    let mut clipped = false;
    let mut clip = |v: f64| -> f64 {
        if opts.log_y && v <= LOG_FLOOR {
            clipped = true;
            LOG_FLOOR
        } else {
            v
        }
    };
    let mut series = Vec::with_capacity(summaries.len());
    for s in summaries {
        let mut points = Vec::new();
        for (c, &x) in s.checkpoints.iter().enumerate() {
            let (m, ci) = (s.mean[c], s.ci[c]);
            if !m.is_finite() || (opts.log_x && x == 0) {
                continue;
            }
            let ci = if ci.is_finite() { ci } else { 0.0 };
            let lo = clip(m - ci);
            let mid = clip(m);
            let hi = clip(m + ci);
            points.push((x as f64, mid, lo, hi));
        }
        series.push(Series {
            label: &s.label,
            points,
        });
    }

    let all = || series.iter().flat_map(|s| s.points.iter());
    let fold = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        })
    };
    let (mut x0, mut x1) = fold(&mut all().map(|p| p.0));
    let (mut y0, mut y1) = fold(&mut all().flat_map(|p| [p.2, p.3]));
    if !x0.is_finite() {
        (x0, x1) = (1.0, 10.0);
    }
    if !y0.is_finite() {
        (y0, y1) = (1.0, 10.0);
    }
    let xa = Axis::new(opts.log_x, x0, x1, LEFT, WIDTH - RIGHT);
    let ya = Axis::new(opts.log_y, y0, y1, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        w,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    if !opts.title.is_empty() {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&opts.title)
        );
    }
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - RIGHT - LEFT,
        HEIGHT - BOTTOM - TOP
    );
    for (v, label) in xa.ticks() {
        let px = xa.map(v);
        let _ = writeln!(
            w,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 18.0
        );
    }
    for (v, label) in ya.ticks() {
        let py = ya.map(v);
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 20.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(&opts.y_label)
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if s.points.iter().any(|p| p.3 > p.2) {
            let mut band = String::new();
            for p in s.points.iter() {
                let _ = write!(band, "{:.2},{:.2} ", xa.map(p.0), ya.map(p.3));
            }
            for p in s.points.iter().rev() {
                let _ = write!(band, "{:.2},{:.2} ", xa.map(p.0), ya.map(p.2));
            }
            let _ = writeln!(
                w,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                band.trim_end()
            );
        }
        let line: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", xa.map(p.0), ya.map(p.1)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * idx as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    if clipped {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="gray">values at or below 1e-30 drawn at 1e-30</text>"#,
            LEFT + 4.0,
            HEIGHT - BOTTOM - 6.0
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(out)
}

pub fn write_plot(path: &Path, summaries: &[Summary], opts: &PlotOptions) -> Result<()> {
    let text = render(summaries, opts)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
