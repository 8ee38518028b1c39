//! Run reports and their on-disk shape: a JSON summary next to a columnar
//! time-series file, plus the echoed config.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use mflab_core::validation::BoundCheck;

pub const SERIES_FILE: &str = "series.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const SWEEP_FILE: &str = "sweep.json";
pub const WEIGHTS_FILE: &str = "alphas.csv";

/// One sampled instant of a run.
#[derive(Debug, Clone)]
pub struct SeriesRow {
    pub time: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `C^t = 10 ||v||_{2r} ||φ^t||_{2s}` per configured r.
    pub c_t: Vec<f64>,
    /// Grönwall envelope per configured r.
    pub gronwall: Vec<f64>,
    pub op_distance: f64,
    pub trace_distance: f64,
    pub nbody_norm_drift: f64,
    pub hartree_norm_drift: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub r_values: Vec<f64>,
    pub rows: Vec<SeriesRow>,
}

fn fmt_r(r: f64) -> String {
    // compact but unambiguous column suffix: 1, 1.5, 2, 4
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

impl SeriesTable {
    pub fn header(&self) -> String {
        let mut cols = vec!["time".to_string(), "alpha".to_string(), "gamma".to_string()];
        for &r in &self.r_values {
            cols.push(format!("c_t_r{}", fmt_r(r)));
        }
        for &r in &self.r_values {
            cols.push(format!("gronwall_r{}", fmt_r(r)));
        }
        cols.extend(
            [
                "op_distance",
                "trace_distance",
                "nbody_norm_drift",
                "hartree_norm_drift",
                "energy",
            ]
            .map(String::from),
        );
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header());
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![
                format!("{:.17e}", row.time),
                format!("{:.17e}", row.alpha),
                format!("{:.17e}", row.gamma),
            ];
            for v in &row.c_t {
                fields.push(format!("{v:.17e}"));
            }
            for v in &row.gronwall {
                fields.push(format!("{v:.17e}"));
            }
            for v in [
                row.op_distance,
                row.trace_distance,
                row.nbody_norm_drift,
                row.hartree_norm_drift,
                row.energy,
            ] {
                fields.push(format!("{v:.17e}"));
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> anyhow::Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| anyhow::anyhow!("empty series file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        let r_count = cols.iter().filter(|c| c.starts_with("c_t_r")).count();
        let r_values: Vec<f64> = cols
            .iter()
            .filter_map(|c| c.strip_prefix("c_t_r"))
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()?;
        let expected = 3 + 2 * r_count + 5;
        if cols.len() != expected {
            anyhow::bail!("series header has {} columns, expected {expected}", cols.len());
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| anyhow::anyhow!("series line {}: {e}", lineno + 2))?;
            if f.len() != expected {
                anyhow::bail!("series line {} has {} fields", lineno + 2, f.len());
            }
            rows.push(SeriesRow {
                time: f[0],
                alpha: f[1],
                gamma: f[2],
                c_t: f[3..3 + r_count].to_vec(),
                gronwall: f[3 + r_count..3 + 2 * r_count].to_vec(),
                op_distance: f[3 + 2 * r_count],
                trace_distance: f[4 + 2 * r_count],
                nbody_norm_drift: f[5 + 2 * r_count],
                hartree_norm_drift: f[6 + 2 * r_count],
                energy: f[7 + 2 * r_count],
            });
        }
        Ok(SeriesTable { r_values, rows })
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.alpha).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gamma).collect()
    }
}

/// Aggregate verdict for one named check across a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub enabled: bool,
    pub passed: bool,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `rhs - lhs` seen across the run.
    pub worst_margin: f64,
    pub tolerance: f64,
}

impl CheckSummary {
    pub fn from_checks(name: &str, checks: &[BoundCheck]) -> Self {
        let violations = checks.iter().filter(|c| !c.passed).count();
        let worst_margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        let tolerance = checks.first().map(|c| c.tolerance).unwrap_or(0.0);
        CheckSummary {
            name: name.to_string(),
            enabled: true,
            passed: violations == 0,
            samples: checks.len(),
            violations,
            worst_margin: if checks.is_empty() { f64::INFINITY } else { worst_margin },
            tolerance,
        }
    }

    pub fn disabled(name: &str) -> Self {
        CheckSummary {
            name: name.to_string(),
            enabled: false,
            passed: true,
            samples: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightAlphaSummary {
    pub name: String,
    pub final_alpha: f64,
    pub max_alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeSummary {
    pub coarse_dt: f64,
    pub fine_dt: f64,
    pub coarse_max_residual: f64,
    pub fine_max_residual: f64,
    pub ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub particles: u32,
    pub basis_dimension: usize,
    pub r_values: Vec<f64>,
    pub alpha0: f64,
    pub max_alpha: f64,
    pub final_alpha: f64,
    pub weight_alphas: Vec<WeightAlphaSummary>,
    pub checks: Vec<CheckSummary>,
    pub derivative: Option<DerivativeSummary>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn save(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        fs::write(dir.join(REPORT_FILE), json + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(dir.join(REPORT_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Per-particle-number entry of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub particles: u32,
    pub directory: String,
    pub max_alpha: f64,
    /// Grönwall envelope at the final time for the first configured r.
    pub envelope_final: f64,
    pub within_envelope: bool,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// Least-squares slope of `ln max_t α` against `ln N`.
    pub slope: f64,
    /// Two-standard-error confidence band around the slope.
    pub slope_confidence: (f64, f64),
    pub passed: bool,
}

impl SweepReport {
    pub fn save(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        fs::write(dir.join(SWEEP_FILE), json + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(dir.join(SWEEP_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn save_series(dir: &Path, series: &SeriesTable) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SERIES_FILE), series.to_csv())?;
    Ok(())
}

pub fn load_series(dir: &Path) -> anyhow::Result<SeriesTable> {
    let text = fs::read_to_string(dir.join(SERIES_FILE))?;
    SeriesTable::from_csv(&text)
}

/// Extra weight families, one alpha column per weight.
pub fn save_weight_series(
    dir: &Path,
    times: &[f64],
    names: &[String],
    columns: &[Vec<f64>],
) -> anyhow::Result<()> {
    let mut out = String::from("time");
    for n in names {
        out.push(',');
        out.push_str(&format!("alpha_{n}"));
    }
    out.push('\n');
    for (i, t) in times.iter().enumerate() {
        out.push_str(&format!("{t:.17e}"));
        for col in columns {
            out.push_str(&format!(",{:.17e}", col[i]));
        }
        out.push('\n');
    }
    fs::write(dir.join(WEIGHTS_FILE), out)?;
    Ok(())
}
