//! End-to-end contracts of the command-line runner: determinism, exit
//! codes, machine-readable errors, and plot file counts.

use std::fs;
use std::path::Path;
use std::process::Command;

fn mflab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mflab"))
}

fn write_config(dir: &Path, particles: &str, out: &str, extra: &str) -> std::path::PathBuf {
    let text = format!(
        r#"
seed = 42
particles = {particles}
r_values = [1.0, 2.0]

[grid]
length = 6.283185307179586
points = 6

[interaction]
profile = "box"
amplitude = 0.5
width = 1.0

[trap]
kind = "constant"
amplitude = 0.3

[initial]
state = "product"
orbital = "bump"

[time]
dt = 0.002
t_final = 0.05

[output]
directory = "{out}"
{extra}
"#
    );
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_is_deterministic_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), "2", out_a.to_str().unwrap(), "");
    let status = mflab().arg("run").arg(&cfg).status().unwrap();
    assert!(status.success());
    let status = mflab()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap();
    assert!(status.success());
    let a = fs::read(out_a.join("series.csv")).unwrap();
    let b = fs::read(out_b.join("series.csv")).unwrap();
    assert_eq!(a, b, "series outputs differ between identical runs");
}

#[test]
fn malformed_config_yields_parse_error_and_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("broken.toml");
    fs::write(&path, "particles = 2\n[interaction]\nprofile = \"box\"\n").unwrap();
    let output = mflab().arg("run").arg(&path).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("\"error\""), "stderr was: {stderr}");
    assert!(stderr.contains("config-parse"), "stderr was: {stderr}");
}

#[test]
fn empty_sweep_list_is_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "[]", out.to_str().unwrap(), "");
    let output = mflab().arg("sweep").arg(&cfg).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("config-invalid"), "stderr was: {stderr}");
}

#[test]
fn free_run_passes_and_alpha_stays_put() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg_text = format!(
        r#"
seed = 1
particles = 3
r_values = [1.0]

[grid]
length = 6.283185307179586
points = 6

[interaction]
profile = "box"
amplitude = 0.0
width = 1.0

[trap]
kind = "constant"
amplitude = 0.4

[initial]
state = "one-defect"
orbital = "bump"

[time]
dt = 0.002
t_final = 0.05

[output]
directory = "{}"
"#,
        out.display()
    );
    let path = tmp.path().join("free.toml");
    fs::write(&path, cfg_text).unwrap();
    let status = mflab().arg("run").arg(&path).status().unwrap();
    assert!(status.success());

    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut alphas = Vec::new();
    for line in series.lines().skip(1) {
        let alpha: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        alphas.push(alpha);
    }
    // zero interaction: alpha stays at its initial value 1/N
    for a in &alphas {
        assert!((a - 1.0 / 3.0).abs() <= 1e-9, "alpha moved to {a}");
    }
}

#[test]
fn check_and_plot_work_on_persisted_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "2", out.to_str().unwrap(), "");
    assert!(mflab().arg("run").arg(&cfg).status().unwrap().success());

    assert!(mflab().arg("check").arg(&out).status().unwrap().success());

    let plots = tmp.path().join("plots");
    let output = mflab().arg("plot").arg(&out).arg("--out").arg(&plots).output().unwrap();
    assert!(output.status.success());
    let svgs: Vec<_> = fs::read_dir(&plots)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().map(|x| x == "svg").unwrap_or(false))
        .collect();
    assert_eq!(svgs.len(), 3, "single-run report must produce exactly 3 plots");

    // corrupting the series must flip the check verdict
    let series_path = out.join("series.csv");
    let text = fs::read_to_string(&series_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.last().unwrap().clone();
    let mut fields: Vec<String> = last.split(',').map(String::from).collect();
    fields[1] = format!("{:.17e}", 5.0); // alpha = 5 violates every bound
    *lines.last_mut().unwrap() = fields.join(",");
    fs::write(&series_path, lines.join("\n") + "\n").unwrap();
    let status = mflab().arg("check").arg(&out).status().unwrap();
    assert!(!status.success(), "corrupted series must fail the check");
}

#[test]
fn sweep_produces_decay_plot_and_per_run_dirs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let cfg = write_config(tmp.path(), "[2, 3]", out.to_str().unwrap(), "");
    assert!(mflab().arg("sweep").arg(&cfg).arg("--jobs").arg("2").status().unwrap().success());
    assert!(out.join("sweep.json").exists());
    assert!(out.join("n2").join("series.csv").exists());
    assert!(out.join("n3").join("report.json").exists());

    let plots = tmp.path().join("plots");
    assert!(mflab().arg("plot").arg(&out).arg("--out").arg(&plots).status().unwrap().success());
    assert!(plots.join("sweep_decay.svg").exists());
    assert!(plots.join("n2").join("alpha_vs_bound.svg").exists());
}

#[test]
fn custom_orbital_file_feeds_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // an (unnormalized) profile; the runner normalizes it
    let orbital_path = tmp.path().join("orbital.txt");
    let mut text = String::from("# re im per site\n");
    for i in 0..6 {
        text.push_str(&format!("{} 0.0\n", 1.0 + 0.1 * i as f64));
    }
    fs::write(&orbital_path, text).unwrap();
    let extra = format!(
        "\n[initial]\nstate = \"custom\"\norbital_file = \"{}\"\n",
        orbital_path.display()
    );
    // base config without its own [initial] block
    let cfg_text = format!(
        r#"
seed = 3
particles = 2
r_values = [1.0]

[grid]
length = 6.283185307179586
points = 6

[interaction]
profile = "gaussian"
amplitude = 0.4
width = 0.8

[trap]
kind = "quench"
amplitude = 0.5
ramp_time = 0.03

[time]
dt = 0.002
t_final = 0.05

[output]
directory = "{}"
{extra}
"#,
        out.display()
    );
    let path = tmp.path().join("custom.toml");
    fs::write(&path, cfg_text).unwrap();
    let output = mflab().arg("run").arg(&path).output().unwrap();
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    // product over the custom orbital: alpha starts at zero
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["alpha0"].as_f64().unwrap().abs() <= 1e-10);
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}

#[test]
fn plot_on_missing_series_reports_clear_error() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let output = mflab().arg("plot").arg(&empty).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("plot"), "stderr was: {stderr}");
}
