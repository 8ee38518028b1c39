//! Static SVG line charts for persisted runs and sweeps.
//!
//! Deliberately dependency-free: fixed-layout axes, ticks, polylines and a
//! small legend are all the reporting needs, and the output is
//! byte-deterministic.

use std::fmt::Write as _;
use std::path::Path;

use crate::report::{load_series, SweepReport};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Curve {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub dashed: bool,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub curves: Vec<Curve>,
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let span = hi - lo;
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    } * mag;
    let start = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= hi + 1e-12 * span {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.1e}")
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let tx = |v: f64| if self.log_x { v.max(1e-300).log10() } else { v };
        let ty = |v: f64| if self.log_y { v.max(1e-300).log10() } else { v };

        let mut x_lo = f64::INFINITY;
        let mut x_hi = f64::NEG_INFINITY;
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for c in &self.curves {
            for (&x, &y) in c.xs.iter().zip(&c.ys) {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                let (x, y) = (tx(x), ty(y));
                if x.is_finite() && y.is_finite() {
                    x_lo = x_lo.min(x);
                    x_hi = x_hi.max(x);
                    y_lo = y_lo.min(y);
                    y_hi = y_hi.max(y);
                }
            }
        }
        if !x_lo.is_finite() {
            x_lo = 0.0;
            x_hi = 1.0;
        }
        if !y_lo.is_finite() {
            y_lo = 0.0;
            y_hi = 1.0;
        }
        if x_hi - x_lo < 1e-12 {
            x_hi = x_lo + 1.0;
        }
        if y_hi - y_lo < 1e-12 {
            y_hi = y_lo + 1.0;
        }
        let pad = 0.04 * (y_hi - y_lo);
        let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |y: f64| MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        );

        // axes frame
        let _ = writeln!(
            svg,
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>"
        );

        for t in nice_ticks(x_lo, x_hi, 6) {
            let x = px(t);
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#bbb\" stroke-width=\"0.5\"/>",
                MARGIN_T,
                MARGIN_T + plot_h
            );
            let label = if self.log_x { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
            let _ = writeln!(
                svg,
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{label}</text>",
                MARGIN_T + plot_h + 18.0
            );
        }
        for t in nice_ticks(y_lo, y_hi, 6) {
            let y = py(t);
            let _ = writeln!(
                svg,
                "<line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#bbb\" stroke-width=\"0.5\"/>",
                MARGIN_L + plot_w
            );
            let label = if self.log_y { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{label}</text>",
                MARGIN_L - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (idx, curve) in self.curves.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let mut points = String::new();
            for (&x, &y) in curve.xs.iter().zip(&curve.ys) {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                let (xx, yy) = (px(tx(x)), py(ty(y)));
                if xx.is_finite() && yy.is_finite() {
                    let _ = write!(points, "{xx:.2},{yy:.2} ");
                }
            }
            let dash = if curve.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash}/>",
                points.trim_end()
            );
            // legend
            let ly = MARGIN_T + 14.0 + 18.0 * idx as f64;
            let lx = MARGIN_L + 12.0;
            let _ = writeln!(
                svg,
                "<line x1=\"{lx}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
                lx + 22.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
                lx + 28.0,
                ly + 4.0,
                escape(&curve.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standard plots for one run directory; returns the files written.
pub fn plot_run_dir(dir: &Path, out_dir: &Path) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let series = load_series(dir)?;
    if series.rows.is_empty() {
        anyhow::bail!("series in {} is empty, nothing to plot", dir.display());
    }
    std::fs::create_dir_all(out_dir)?;
    let times = series.times();
    let mut written = Vec::new();

    let mut curves = vec![Curve {
        label: "alpha".to_string(),
        xs: times.clone(),
        ys: series.alphas(),
        dashed: false,
    }];
    for (slot, &r) in series.r_values.iter().enumerate() {
        curves.push(Curve {
            label: format!("gronwall bound (r={r})"),
            xs: times.clone(),
            ys: series.rows.iter().map(|row| row.gronwall[slot]).collect(),
            dashed: true,
        });
    }
    let chart = Chart {
        title: "Counting functional vs Grönwall envelope".to_string(),
        x_label: "t".to_string(),
        y_label: "alpha".to_string(),
        log_x: false,
        log_y: false,
        curves,
    };
    let path = out_dir.join("alpha_vs_bound.svg");
    std::fs::write(&path, chart.render())?;
    written.push(path);

    let n = {
        // recover N from the report when present, otherwise from the envelope
        crate::report::RunReport::load(dir).map(|r| r.particles).unwrap_or(1)
    };
    let inv_n = 1.0 / n as f64;
    let mut curves = vec![Curve {
        label: "|gamma|".to_string(),
        xs: times.clone(),
        ys: series.gammas().iter().map(|g| g.abs()).collect(),
        dashed: false,
    }];
    for (slot, &r) in series.r_values.iter().enumerate() {
        curves.push(Curve {
            label: format!("10 C (alpha + 1/N), r={r}"),
            xs: times.clone(),
            ys: series
                .rows
                .iter()
                .map(|row| row.c_t[slot] * (row.alpha + inv_n))
                .collect(),
            dashed: true,
        });
    }
    let chart = Chart {
        title: "Counting derivative vs uniform bound".to_string(),
        x_label: "t".to_string(),
        y_label: "rate".to_string(),
        log_x: false,
        log_y: false,
        curves,
    };
    let path = out_dir.join("gamma_vs_lemma2.svg");
    std::fs::write(&path, chart.render())?;
    written.push(path);

    let chart = Chart {
        title: "Density-matrix distances vs counting bound".to_string(),
        x_label: "t".to_string(),
        y_label: "distance".to_string(),
        log_x: false,
        log_y: false,
        curves: vec![
            Curve {
                label: "operator distance".to_string(),
                xs: times.clone(),
                ys: series.rows.iter().map(|r| r.op_distance).collect(),
                dashed: false,
            },
            Curve {
                label: "trace distance".to_string(),
                xs: times.clone(),
                ys: series.rows.iter().map(|r| r.trace_distance).collect(),
                dashed: false,
            },
            Curve {
                label: "2 sqrt(alpha) + 2 alpha".to_string(),
                xs: times,
                ys: series
                    .rows
                    .iter()
                    .map(|r| 2.0 * r.alpha.max(0.0).sqrt() + 2.0 * r.alpha)
                    .collect(),
                dashed: true,
            },
        ],
    };
    let path = out_dir.join("density_vs_alpha.svg");
    std::fs::write(&path, chart.render())?;
    written.push(path);

    Ok(written)
}

/// Decay plot for a sweep directory.
pub fn plot_sweep_dir(dir: &Path, out_dir: &Path) -> anyhow::Result<std::path::PathBuf> {
    let sweep = SweepReport::load(dir)?;
    let good: Vec<_> = sweep
        .entries
        .iter()
        .filter(|e| e.error.is_none() && e.max_alpha.is_finite() && e.max_alpha > 0.0)
        .collect();
    if good.is_empty() {
        anyhow::bail!("sweep has no successful entries to plot");
    }
    std::fs::create_dir_all(out_dir)?;
    let ns: Vec<f64> = good.iter().map(|e| e.particles as f64).collect();
    let alphas: Vec<f64> = good.iter().map(|e| e.max_alpha).collect();
    // 1/N guide through the first point
    let c = alphas[0] * ns[0];
    let guide: Vec<f64> = ns.iter().map(|&n| c / n).collect();
    let chart = Chart {
        title: format!("Depletion decay, fitted slope {:.3}", sweep.slope),
        x_label: "N".to_string(),
        y_label: "max_t alpha".to_string(),
        log_x: true,
        log_y: true,
        curves: vec![
            Curve { label: "max_t alpha".to_string(), xs: ns.clone(), ys: alphas, dashed: false },
            Curve { label: "1/N guide".to_string(), xs: ns, ys: guide, dashed: true },
        ],
    };
    let path = out_dir.join("sweep_decay.svg");
    std::fs::write(&path, chart.render())?;
    Ok(path)
}
