use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcflab"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .unwrap();
    status.code().unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn circle_simulation_follows_extinction_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"initial_curve":{"circle":{"R":1}},"p":2,"n":256,"horizon":{"until":0.5}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &[]), 0);
    let (header, rows) = csv_rows(&out.join("timeseries.csv"));
    assert_eq!(header.join(","), "t,dt,area,length,isoperimetric,kappa_min,kappa_max,mu");
    let (it, ia) = (column(&header, "t"), column(&header, "area"));
    for row in &rows {
        let t: f64 = row[it].parse().unwrap();
        let r = (row[ia].parse::<f64>().unwrap() / std::f64::consts::PI).sqrt();
        let exact = (1.0 - 3.0 * t).cbrt();
        assert!((r - exact).abs() <= 1e-4, "t={t}: {r} vs {exact}");
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["terminal_reason"], "t_end");
    assert!((summary["t_final"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);

    let first_line = std::fs::read_to_string(out.join("timeseries.csv")).unwrap().lines().next().unwrap().to_string();
    let hash = first_line.strip_prefix("# config_hash=").unwrap().to_string();
    let svg = std::fs::read_to_string(out.join("curve_0.svg")).unwrap();
    assert!(svg.contains(&format!("config_hash={hash}")));
    let nc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("noncollapse_0.json")).unwrap()).unwrap();
    assert_eq!(nc["config_hash"], hash.as_str());
    assert_eq!(nc["per_point"].as_array().unwrap().len(), 256);
    let (h, rows) = csv_rows(&out.join("curve_0.csv"));
    assert_eq!(h.join(","), "theta,x,y,kappa,h");
    assert_eq!(rows.len(), 256);
}

#[test]
fn ellipse_simulation_becomes_rounder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"initial_curve":{"ellipse":{"a":1.05,"b":1}},"p":2,"n":256,"horizon":{"until":0.5},"snapshot_every":2000}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &[]), 0);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(s["isoperimetric_final"].as_f64().unwrap() < s["isoperimetric_initial"].as_f64().unwrap());
    assert!(s["mu_final"].as_f64().unwrap() < s["mu_initial"].as_f64().unwrap());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"initial_curve":{"fourier":{"R":1,"modes":[[3,0.02,0.3]]}},"p":1.5,"n":128,"horizon":{"until":0.3}}"#,
    );
    for sub in ["simulate", "verify", "noncollapse"] {
        let (a, b) = (dir.path().join(format!("{sub}_a")), dir.path().join(format!("{sub}_b")));
        run(sub, &cfg, &a, &["--seed", "7"]);
        run(sub, &cfg, &b, &["--seed", "7"]);
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
        }
    }
}

#[test]
fn verify_passes_and_detects_injected_sign() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "g.json", r#"{"initial_curve":{"ellipse":{"a":1.2,"b":1}},"p":2}"#);
    let out = dir.path().join("good");
    assert_eq!(run("verify", &good, &out, &[]), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    let names: Vec<_> = v["reports"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap().to_string()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(names.iter().any(|n| n == "kappa_evolution[kappa_pow]"));

    let bad = write_config(
        dir.path(),
        "b.json",
        r#"{"initial_curve":{"ellipse":{"a":1.2,"b":1}},"p":2,"inject_sign_error":true}"#,
    );
    let out = dir.path().join("bad");
    assert_eq!(run("verify", &bad, &out, &[]), 3);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    let kappa = v["reports"].as_array().unwrap().iter().find(|r| r["name"] == "kappa_evolution[kappa]").unwrap();
    assert_eq!(kappa["pass"], false);
}

#[test]
fn verify_on_circle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"initial_curve":{"circle":{"R":1}},"p":3,"n":256}"#);
    assert_eq!(run("verify", &cfg, &dir.path().join("o"), &[]), 0);
}

#[test]
fn sweep_shape_and_label() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"initial_curve":{"circle":{"R":1}},"p":2,"n":64,
            "sweep":{"p_values":[1.5,2,3],"families":["circle","ellipse"],"grid":[1.02,1.05],"bisect_steps":1}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(run("sweep-mu0", &cfg, &out, &[]), 0);
    let text = std::fs::read_to_string(out.join("mu0_sweep.csv")).unwrap();
    assert!(text.lines().next().unwrap().starts_with("# EMPIRICAL"));
    let (header, rows) = csv_rows(&out.join("mu0_sweep.csv"));
    assert_eq!(header.join(","), "p,family,param,mu0_empirical,pass");
    assert_eq!(rows.len(), 6);
    for fam in ["circle", "ellipse"] {
        assert_eq!(rows.iter().filter(|r| r[1] == fam).count(), 3);
    }
    let mu = column(&header, "mu0_empirical");
    assert!(rows.iter().all(|r| r[mu].parse::<f64>().unwrap() >= 1.0));
    assert!(rows.iter().all(|r| ["true", "false", "ambiguous"].contains(&r[4].as_str())));

    let empty = write_config(
        dir.path(),
        "e.json",
        r#"{"initial_curve":{"circle":{"R":1}},"p":2,"n":64,"sweep":{"grid":[]}}"#,
    );
    assert_eq!(run("sweep-mu0", &empty, &dir.path().join("e"), &[]), 1);
}

#[test]
fn noncollapse_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n.json", r#"{"initial_curve":{"ellipse":{"a":2,"b":1}},"p":2,"n":256}"#);
    let out = dir.path().join("o");
    assert_eq!(run("noncollapse", &cfg, &out, &[]), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("noncollapse.json")).unwrap()).unwrap();
    assert!((v["mu"].as_f64().unwrap() - 4.0).abs() < 1e-3);
    assert!((v["delta_equiv"].as_f64().unwrap() - 0.25).abs() < 1e-3);
    for key in ["i", "j", "d", "Z", "alpha"] {
        assert!(v["argmax"].get(key).is_some(), "{key}");
    }
    let svg = std::fs::read_to_string(out.join("curve.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1);
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let p1 = write_config(dir.path(), "p.json", r#"{"initial_curve":{"circle":{"R":1}},"p":1.0}"#);
    assert_eq!(run("simulate", &p1, &out, &[]), 1);
    let nc = write_config(dir.path(), "nc.json", r#"{"initial_curve":{"fourier":{"R":1,"modes":[[2,0.8,0]]}},"p":2}"#);
    assert_eq!(run("simulate", &nc, &out, &[]), 1);
    let unknown = write_config(dir.path(), "u.json", r#"{"initial_curve":{"circle":{"R":1}},"p":2,"extra":0}"#);
    assert_eq!(run("verify", &unknown, &out, &[]), 1);
    assert_eq!(run("simulate", &dir.path().join("missing.json"), &out, &[]), 1);

    let ok = write_config(dir.path(), "ok.json", r#"{"initial_curve":{"circle":{"R":1}},"p":2,"n":64}"#);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(run("simulate", &ok, &blocker.join("sub"), &[]), 1);

    assert_eq!(bin().arg("nonsense").status().unwrap().code(), Some(1));
    assert_eq!(bin().arg("simulate").status().unwrap().code(), Some(1));
}

#[test]
fn runtime_failures_map_to_exit_two() {
    use pcflab::cli::{cmd_noncollapse, exit_code_for, EXIT_RUNTIME};
    use pcflab::config::parse_config;
    use pcflab::Error;

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let mut cfg = parse_config(r#"{"initial_curve":{"circle":{"R":1}},"p":2,"n":64}"#).unwrap();
    cfg.outputs = blocker.join("sub");
    let err = cmd_noncollapse(&cfg).unwrap_err();
    assert!(matches!(err, Error::Io(_)), "{err}");
    assert_eq!(exit_code_for(&err), EXIT_RUNTIME);
    assert_eq!(exit_code_for(&Error::ConvexityLost { index: 0, value: -1.0 }), EXIT_RUNTIME);
    assert_eq!(exit_code_for(&Error::NonFinite("x".into())), EXIT_RUNTIME);
}
