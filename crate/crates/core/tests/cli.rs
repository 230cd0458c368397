use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asep-spectra"))
        .args(args)
        .env_remove("ASEP_SPECTRA_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV with `# ` header lines, as maps from column name.
fn rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let body: String = text.lines().filter(|l| !l.starts_with("# ")).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let head = r.headers().unwrap().clone();
    r.records()
        .map(|rec| head.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

#[test]
fn single_site_gap_is_q_plus_inverse() {
    let o = bin(&["gap-scan", "--q", "0.3", "--sticks", "1", "--heights", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# asep-spectra "));
    assert!(text.contains("# command: asep-spectra gap-scan --q 0.3 --sticks 1 --heights 2"));
    let r = rows(&text);
    let cell = r.iter().find(|r| r["N"] == "1").unwrap();
    let gap: f64 = cell["gap"].parse().unwrap();
    assert!((gap - (0.3 + 1.0 / 0.3)).abs() < 1e-12);
    assert_eq!(r.iter().filter(|r| r["N"] == "sup").count(), 1);
}

#[test]
fn complete_graph_gamma_is_one_half() {
    let o = bin(&["gap-scan", "--form", "bernoulli-laplace", "--sticks", "3..5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2 + 3 + 4 + 3);
    for row in &r {
        assert_eq!(row["form"], "bernoulli-laplace");
        assert_eq!(row["q"], "");
        let gamma: f64 = row["gamma"].parse().unwrap();
        assert!((gamma - 0.5).abs() < 1e-10, "{row:?}");
    }
}

#[test]
fn xxz_spin_half_pair() {
    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("x.csv");
    let o = bin(&["xxz", "--delta", "2", "--twice-s", "1", "--height", "2", "--sector", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["dim"], "2");
    assert!((r[0]["gap"].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    assert!(r[0]["equivalence_residual"].parse::<f64>().unwrap() < 1e-10);
}

#[test]
fn output_directory_from_environment() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_asep-spectra"))
        .args(["gap-scan", "--sticks", "2", "--heights", "2"])
        .env("ASEP_SPECTRA_OUT_DIR", out.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(out.path().join("gap_scan.csv").exists());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["gap-scan", "--sticks", "2", "--q", "1.0"][..],
        &["gap-scan", "--sticks", "0", "--heights", "2"],
        &["xxz", "--delta", "0.5"],
        &["xxz", "--twice-s", "1", "--height", "2", "--sector", "7"],
        &["verify", "--filter", "no-such-check"],
        &["simulate", "--sticks", "2", "--height", "3", "--particles", "9"],
        &["simulate", "--sticks", "2", "--height", "3", "--particles", "3", "--observable", "row9"],
        &["frobnicate"],
    ] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_filter_and_fault() {
    let o = bin(&["verify", "--filter", "closed-form"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("closed-form") && l.ends_with("PASS")));

    let o = bin(&["verify", "--filter", "generator-axioms", "--inject-fault", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_json_report() {
    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("v.json");
    let o = bin(&["verify", "--filter", "bernoulli", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["header"]["schema"], "verify/1");
    assert!(!v["rows"].as_array().unwrap().is_empty());
}

fn simulate(dir: &std::path::Path, tag: &str, extra: &[&str]) -> (Output, String, String) {
    let prefix = dir.join(tag);
    let prefix = prefix.to_str().unwrap().to_string();
    let mut args = vec!["simulate", "--sticks", "2", "--height", "3", "--particles", "3", "--t-run", "400", "--out-prefix"];
    args.push(&prefix);
    args.extend_from_slice(extra);
    let o = bin(&args);
    let series = std::fs::read_to_string(format!("{prefix}_series.csv")).unwrap_or_default();
    let est = std::fs::read_to_string(format!("{prefix}_estimate.json")).unwrap_or_default();
    (o, series, est)
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, sa, ea) = simulate(dir.path(), "a", &["--seed", "5", "--mode", "profile"]);
    let (_, sb, eb) = simulate(dir.path(), "b", &["--seed", "5", "--mode", "profile"]);
    assert!(a.status.code().is_some());
    assert!(!sa.is_empty());
    assert_eq!(sa, sb);
    assert_eq!(ea, eb);
    assert!(sa.contains("# seed: 5\n"));
}

#[test]
fn omitted_seed_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let (_, series, est) = simulate(dir.path(), "s", &[]);
    let line = series.lines().find(|l| l.starts_with("# command: ")).unwrap();
    let seed: u64 = series
        .lines()
        .find_map(|l| l.strip_prefix("# seed: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(line.contains(&format!("--seed {seed}")));
    let v: serde_json::Value = serde_json::from_str(&est).unwrap();
    assert_eq!(v["seed"], seed);

    // rerunning the echoed command reproduces the series
    let args: Vec<&str> = line.trim_start_matches("# command: asep-spectra ").split(' ').collect();
    let prefix = dir.path().join("r");
    let mut args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    args.extend(["--out-prefix".into(), prefix.to_str().unwrap().into()]);
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    bin(&argv);
    assert_eq!(std::fs::read_to_string(dir.path().join("r_series.csv")).unwrap(), series);
}
