use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morse-spectrum"))
        .args(args)
        .env_remove("MORSE_SPECTRUM_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spectrum_at_pi() {
    let o = run(&["spectrum", "--family", "circle", "--t", "3.14159265", "--k", "4", "--n-per-unit", "600"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,lambda,lambda_twisted"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let lam1: f64 = first[1].parse().unwrap();
    assert!(lam1.abs() < 1e-4);
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn psi_zero_oracle() {
    let o = run(&["oracle", "psi-zeros", "--count", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let vals: Vec<f64> = stdout(&o)
        .lines()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 6);
    let pi = std::f64::consts::PI;
    for (i, m) in [(0, 2.0), (2, 4.0), (4, 6.0)] {
        assert!((vals[i] - m * pi).abs() < 1e-12);
    }
}

#[test]
fn scalar_oracles() {
    let o = run(&["oracle", "bessel-zero", "--m", "0", "--n", "1"]);
    let j: f64 = stdout(&o).trim().parse().unwrap();
    assert!((j - 2.404825557695773).abs() < 1e-12);
    let o = run(&["oracle", "circle-lambda", "--k", "2", "--t", "3"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - (4.0 * std::f64::consts::PI.powi(2) / 9.0 - 1.0)).abs() < 1e-14);
    let o = run(&["oracle", "gap-lambda1", "--t", "1"]);
    assert_eq!(stdout(&o).trim(), "2.5000000000000000e-1");
    assert_eq!(run(&["oracle", "gap-lambda1", "--t", "2"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["spectrum", "--family", "torus", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown family"));
    let o = run(&["curves", "--family", "circle", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["curves", "--family", "circle", "--t-min", "1", "--t-max", "2", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["spectrum", "--family", "circle", "--t", "40"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["spectrum", "--family", "circle", "--t", "2", "--n-per-unit", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_morse-spectrum"))
        .args(["oracle", "psi", "--t", "1"])
        .env("MORSE_SPECTRUM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curves_events_and_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.csv");
    let events = dir.path().join("events.csv");
    let svg = dir.path().join("plot.svg");
    let common = ["--family", "circle", "--t-min", "1", "--t-max", "7", "--steps", "25", "--k", "3", "--n-per-unit", "100"];

    let mut args = vec!["curves"];
    args.extend(common);
    args.extend(["-o", curves.to_str().unwrap()]);
    assert_eq!(run(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&curves).unwrap();
    assert!(text.starts_with("t,kind,k,value\n"));
    assert_eq!(text.lines().count(), 1 + 25 * 3 * 2);
    assert!(!text.contains('\r'));

    let mut args = vec!["events"];
    args.extend(common);
    args.extend(["-o", events.to_str().unwrap()]);
    assert_eq!(run(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&events).unwrap();
    assert!(text.starts_with("t_star,kind,k,multiplicity,width\n"));
    // λ1 at π, λ2 and λ̃1 both at 2π
    assert_eq!(text.lines().count(), 1 + 3);

    let o = run(&[
        "plot",
        "--input",
        curves.to_str().unwrap(),
        "--events",
        events.to_str().unwrap(),
        "-o",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<svg") && text.contains(r#"viewBox="0 0 800 500""#));
    assert_eq!(text.matches("<circle").count(), 3);

    let o = run(&["plot", "--psi", "--t-max", "22"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("<circle").count(), 6);

    let o = run(&["plot", "--input", events.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_json_embeds_config() {
    let o = run(&[
        "verify", "--family", "circle", "--t-min", "1", "--t-max", "10", "--steps", "40", "--k", "4", "--n-per-unit", "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["config", "curve", "events", "checks"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["steps"], 40);
    assert_eq!(v["config"]["family"], "circle");
    assert_eq!(v["identity_ok"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["name"].is_string() && c["ok"].is_boolean() && c["detail"].is_string());
    }
}

#[test]
fn gap_verify_flags_expected_violation() {
    let o = run(&[
        "verify", "--family", "gap", "--t-min", "0.9", "--t-max", "1", "--steps", "21", "--k", "2", "--n-per-unit", "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cont = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "continuity")
        .unwrap();
    assert_eq!(cont["ok"], false);
    assert_eq!(cont["expected"], true);
}
