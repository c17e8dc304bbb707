//! Standalone SVG line charts. Output bytes depend only on the inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rarelab_core::wave::exact_rarefaction;

use crate::config::RunConfig;
use crate::{CliError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

impl Chart {
    fn usable(&self, (x, y): (f64, f64)) -> bool {
        x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
    }

    /// Drops points that cannot be drawn on the chosen axes and series left
    /// empty; `None` if nothing remains.
    fn cleaned(&self) -> Option<Chart> {
        let series: Vec<Series> = self
            .series
            .iter()
            .map(|s| Series {
                label: s.label.clone(),
                points: s.points.iter().copied().filter(|&p| self.usable(p)).collect(),
            })
            .filter(|s| !s.points.is_empty())
            .collect();
        (!series.is_empty()).then(|| Chart {
            series,
            ..self.clone()
        })
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let decades = (self.hi - self.lo).round() as i32;
            let step = (decades / 8).max(1);
            (0..=decades)
                .step_by(step as usize)
                .map(|k| 10f64.powi(self.lo as i32 + k))
                .collect()
        } else {
            (0..=5)
                .map(|k| self.lo + (self.hi - self.lo) * k as f64 / 5.0)
                .collect()
        }
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a chart; `None` when no drawable point exists.
pub fn render(chart: &Chart) -> Option<String> {
    let chart = chart.cleaned()?;
    let points = || chart.series.iter().flat_map(|s| s.points.iter().copied());
    let xa = Axis::fit(points().map(|p| p.0), chart.log_x);
    let ya = Axis::fit(points().map(|p| p.1), chart.log_y);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + plot_w * xa.unit(x);
    let py = |y: f64| TOP + plot_h * (1.0 - ya.unit(y));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&chart.title)
    );
    for (i, note) in chart.notes.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            LEFT + 6.0,
            TOP + 14.0 + 14.0 * i as f64,
            escape(note)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#
    );
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            tick_label(t, xa.log)
        );
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t, ya.log)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );
    for (i, s) in chart.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + plot_w - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            lx + 26.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Files written and warnings for inputs that produced no plot.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct PlotReport {
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    trailer: Vec<String>,
}

fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    let mut trailer = Vec::new();
    let mut in_trailer = false;
    for line in lines {
        if line.starts_with('#') {
            in_trailer = true;
            continue;
        }
        if in_trailer {
            trailer.push(line.to_string());
        } else if !line.is_empty() {
            rows.push(
                line.split(',')
                    .map(|v| v.parse().unwrap_or(f64::NAN))
                    .collect(),
            );
        }
    }
    Ok(Table {
        header,
        rows,
        trailer,
    })
}

impl Table {
    fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r.get(j).copied().unwrap_or(f64::NAN)).collect())
    }

    fn series(&self, x: &str, y: &str) -> Series {
        let xs = self.column(x).unwrap_or_default();
        let ys = self.column(y).unwrap_or_default();
        Series {
            label: y.to_string(),
            points: xs.into_iter().zip(ys).collect(),
        }
    }
}

fn emit(dir: &Path, name: &str, chart: &Chart, report: &mut PlotReport) -> Result<()> {
    match render(chart) {
        Some(svg) => {
            let path = dir.join(name);
            fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
            report.files.push(name.to_string());
        }
        None => report
            .warnings
            .push(format!("{name}: no plottable data, skipped")),
    }
    Ok(())
}

/// Time encoded in a `snap_t<time>.csv` name.
fn snapshot_time(name: &str) -> Option<f64> {
    name.strip_prefix("snap_t")?.strip_suffix(".csv")?.parse().ok()
}

/// Plots every recognised artifact in `dir`: the diagnostics decay series,
/// the latest snapshot profile, rate tables and convergence tables.
/// `config` supplies the flux and far-field states for the `u^r` overlay.
pub fn emit_plots(dir: &Path, config: Option<&RunConfig>) -> Result<PlotReport> {
    let mut report = PlotReport::default();
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();

    if names.iter().any(|n| n == "diagnostics.csv") {
        let table = read_table(&dir.join("diagnostics.csv"))?;
        let chart = Chart {
            title: "Deviation decay".into(),
            x_label: "t".into(),
            y_label: "norm".into(),
            log_x: true,
            log_y: true,
            series: ["l2_phi", "sup_phi", "sup_dev_exact", "linf_dxphi"]
                .iter()
                .map(|c| table.series("t", c))
                .collect(),
            notes: Vec::new(),
        };
        emit(dir, "decay.svg", &chart, &mut report)?;
    }

    let latest = names
        .iter()
        .filter_map(|n| snapshot_time(n).map(|t| (t, n.clone())))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((t, name)) = latest {
        let table = read_table(&dir.join(&name))?;
        let mut series = vec![table.series("x", "u"), table.series("x", "U")];
        match config.map(|c| (c.flux.build(), c.riemann())) {
            Some((Ok(flux), Ok(riemann))) if t > 0.0 => {
                let xs = table.column("x").unwrap_or_default();
                series.push(Series {
                    label: "u^r".into(),
                    points: xs
                        .iter()
                        .map(|&x| (x, exact_rarefaction(&flux, &riemann, x / t)))
                        .collect(),
                });
            }
            _ => report
                .warnings
                .push(format!("{name}: no u^r overlay (needs t > 0 and a config)")),
        }
        let chart = Chart {
            title: format!("Profile at t = {t}"),
            x_label: "x".into(),
            y_label: "u".into(),
            log_x: false,
            log_y: false,
            series,
            notes: Vec::new(),
        };
        let stem = name.trim_end_matches(".csv").replacen("snap_", "profile_", 1);
        emit(dir, &format!("{stem}.svg"), &chart, &mut report)?;
    }

    for name in names.iter().filter(|n| n.starts_with("rates_") && n.ends_with(".csv")) {
        let table = read_table(&dir.join(name))?;
        let fits: Vec<serde_json::Value> = table
            .trailer
            .first()
            .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
            .and_then(|v| v.get("fits").and_then(|f| f.as_array().cloned()))
            .unwrap_or_default();
        let stem = name.trim_end_matches(".csv");
        for label in table.header.iter().skip(1) {
            let notes = fits
                .iter()
                .find(|f| f.get("norm").and_then(|n| n.as_str()) == Some(label))
                .map(|f| {
                    let slope = f["fit"]["slope"].as_f64().unwrap_or(f64::NAN);
                    let expected = f["expected_slope"].as_f64().unwrap_or(f64::NAN);
                    vec![format!("fitted slope {slope:.4} (expected {expected:.4})")]
                })
                .unwrap_or_default();
            let chart = Chart {
                title: format!("{stem} {label}"),
                x_label: "t".into(),
                y_label: label.clone(),
                log_x: true,
                log_y: true,
                series: vec![table.series("t", label)],
                notes,
            };
            emit(dir, &format!("{stem}_{label}.svg"), &chart, &mut report)?;
        }
    }

    if names.iter().any(|n| n == "convergence.csv") {
        let table = read_table(&dir.join("convergence.csv"))?;
        let chart = Chart {
            title: "Grid convergence".into(),
            x_label: "dx".into(),
            y_label: "L2 difference".into(),
            log_x: true,
            log_y: true,
            series: vec![table.series("dx", "error")],
            notes: Vec::new(),
        };
        emit(dir, "convergence.svg", &chart, &mut report)?;
    }
    Ok(report)
}
