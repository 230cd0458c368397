use super::output::{command_line, fmt_f64, fmt_opt, open_output, resolve_output, Header, OUT_DIR_ENV};
use super::{GapScanArgs, MethodArg, ModeArg, ScanForm, SimulateArgs, VerifyArgs, XxzArgs, EXIT_FAILURE, EXIT_OK};
use crate::error::{invalid, Result};
use crate::operators::{bernoulli_laplace, q_of_delta, DiagonalRegion, XXZParams};
use crate::simulate::{
    exact_profile_gap, gillespie_run, relaxation_estimate, Mode, Observable, SimulationPlan,
};
use crate::spectral::{
    dense_gap, diagonal_gap, gamma_scan, xxz_gap, Form, HamiltonianGap, ScanMethod, ScanOptions, DENSE_CAP,
};
use crate::state_space::{enumerate_profiles, EnsembleParams};
use crate::verify::{run_verify, Fault, VerifyOptions};
use rand::Rng;
use serde_json::json;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Instant;

pub const GAP_SCAN_COLUMNS: [&str; 12] = [
    "q", "L", "H", "N", "dim", "form", "gap", "gamma", "method", "residual", "iterations", "seconds",
];

pub const XXZ_COLUMNS: [&str; 11] = [
    "Delta",
    "q",
    "twiceS",
    "H",
    "R",
    "sector_2n",
    "dim",
    "gap",
    "gap_over_S",
    "gap_times_R2_over_S",
    "equivalence_residual",
];

fn fmt_range(r: &RangeInclusive<usize>) -> String {
    if r.start() == r.end() {
        r.start().to_string()
    } else {
        format!("{}..{}", r.start(), r.end())
    }
}

fn csv_writer(out: Box<dyn Write>) -> csv::Writer<Box<dyn Write>> {
    csv::WriterBuilder::new().from_writer(out)
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(e.to_string())
}

fn form_name(f: ScanForm) -> &'static str {
    match f {
        ScanForm::Full => "full",
        ScanForm::Modified => "modified",
        ScanForm::BernoulliLaplace => "bernoulli-laplace",
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Auto => "auto",
        MethodArg::Dense => "dense",
        MethodArg::Iterative => "iterative",
        MethodArg::Blocks => "blocks",
    }
}

pub fn cmd_gap_scan(a: &GapScanArgs) -> Result<i32> {
    if *a.sticks.start() == 0 || *a.heights.start() == 0 {
        return Err(invalid("L and H start at 1"));
    }
    let mut parts: Vec<String> = vec![
        "gap-scan".into(),
        "--q".into(),
        fmt_f64(a.q),
        "--sticks".into(),
        fmt_range(&a.sticks),
        "--heights".into(),
        fmt_range(&a.heights),
        "--form".into(),
        form_name(a.form).into(),
        "--method".into(),
        method_name(a.method).into(),
        "--tol".into(),
        fmt_f64(a.solver.tol),
        "--max-matvecs".into(),
        a.solver.max_matvecs.to_string(),
    ];
    if a.all_n {
        parts.push("--all-n".into());
    }
    if a.keep_going {
        parts.push("--keep-going".into());
    }
    let params = json!({
        "q": a.q,
        "sticks": [a.sticks.start(), a.sticks.end()],
        "heights": [a.heights.start(), a.heights.end()],
        "form": form_name(a.form),
        "method": method_name(a.method),
        "all_n": a.all_n,
        "tol": a.solver.tol,
        "max_matvecs": a.solver.max_matvecs,
    });
    let header = Header::new("gap-scan/1", command_line(&parts), params, None);
    let path = resolve_output(a.out.as_deref(), "gap_scan.csv");

    let mut records: Vec<Vec<String>> = Vec::new();
    let mut failures = Vec::new();
    if a.form == ScanForm::BernoulliLaplace {
        if *a.sticks.start() < 2 {
            return Err(invalid("the complete graph needs L ≥ 2"));
        }
        for l in a.sticks.clone() {
            let mut best = (f64::NEG_INFINITY, 0.0);
            for n in 1..l {
                let start = Instant::now();
                let r = bernoulli_laplace(l, n).and_then(|op| dense_gap(&op));
                let secs = start.elapsed().as_secs_f64();
                best.1 += secs;
                let (gap, residual, method) = match r {
                    Ok(r) => (r.gap, r.residual, "dense"),
                    Err(e) => {
                        failures.push(format!("L={l} N={n}: {e}"));
                        (f64::NAN, f64::NAN, "failed")
                    }
                };
                let gamma = 1.0 / gap;
                if gamma > best.0 {
                    best.0 = gamma;
                }
                records.push(vec![
                    String::new(),
                    l.to_string(),
                    "1".into(),
                    n.to_string(),
                    crate::combinatorics::binomial(l as u64, n as u64).to_string(),
                    "bernoulli-laplace".into(),
                    fmt_f64(gap),
                    fmt_f64(gamma),
                    method.into(),
                    fmt_f64(residual),
                    "0".into(),
                    fmt_seconds(secs),
                ]);
            }
            let gamma = if best.0 == f64::NEG_INFINITY { f64::NAN } else { best.0 };
            records.push(sup_row("", l, 1, "bernoulli-laplace", gamma, best.1));
        }
    } else {
        let opts = ScanOptions {
            method: match a.method {
                MethodArg::Auto => ScanMethod::Auto,
                MethodArg::Dense => ScanMethod::Dense,
                MethodArg::Iterative => ScanMethod::Iterative,
                MethodArg::Blocks => ScanMethod::Blocks,
            },
            lanczos: a.solver.lanczos(),
            jobs: a
                .jobs
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            all_particle_numbers: a.all_n,
            ..ScanOptions::default()
        };
        let form = if a.form == ScanForm::Modified { Form::Modified } else { Form::Full };
        let table = gamma_scan(a.q, a.sticks.clone(), a.heights.clone(), form, &opts)?;
        for s in &table.summaries {
            let group = table
                .cells
                .iter()
                .filter(|c| c.sticks == s.sticks && c.height == s.height);
            let mut seconds = 0.0;
            for c in group {
                seconds += c.seconds;
                if let Some(e) = &c.error {
                    failures.push(format!("L={} H={} N={}: {e}", c.sticks, c.height, c.particles));
                }
                records.push(vec![
                    fmt_f64(c.q),
                    c.sticks.to_string(),
                    c.height.to_string(),
                    c.particles.to_string(),
                    c.dim.to_string(),
                    form.as_str().into(),
                    fmt_f64(c.gap),
                    fmt_f64(c.gamma),
                    c.method.map_or("failed", |m| m.as_str()).into(),
                    fmt_f64(c.residual),
                    c.iterations.to_string(),
                    fmt_seconds(c.seconds),
                ]);
            }
            records.push(sup_row(&fmt_f64(a.q), s.sticks, s.height, form.as_str(), s.gamma, seconds));
        }
    }

    let mut out = open_output(path.as_deref())?;
    header.write_comment(&mut out)?;
    let mut w = csv_writer(out);
    w.write_record(GAP_SCAN_COLUMNS).map_err(csv_err)?;
    for r in &records {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    if let Some(p) = &path {
        eprintln!("wrote {}", p.display());
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("cell failed: {f}");
        }
        if !a.keep_going {
            return Ok(EXIT_FAILURE);
        }
    }
    Ok(EXIT_OK)
}

fn sup_row(q: &str, l: usize, h: usize, form: &str, gamma: f64, seconds: f64) -> Vec<String> {
    vec![
        q.into(),
        l.to_string(),
        h.to_string(),
        "sup".into(),
        String::new(),
        form.into(),
        fmt_f64(1.0 / gamma),
        fmt_f64(gamma),
        String::new(),
        String::new(),
        String::new(),
        fmt_seconds(seconds),
    ]
}

pub fn cmd_xxz(a: &XxzArgs) -> Result<i32> {
    let mut parts: Vec<String> = vec![
        "xxz".into(),
        "--delta".into(),
        fmt_f64(a.delta),
        "--twice-s".into(),
        fmt_range(&a.twice_s),
        "--height".into(),
        fmt_range(&a.height),
    ];
    if let Some(n2) = a.sector {
        parts.extend(["--sector".into(), n2.to_string()]);
    }
    if a.diagonal {
        parts.extend(["--diagonal".into(), "--half-width".into(), fmt_range(&a.half_width)]);
    }
    parts.extend([
        "--tol".into(),
        fmt_f64(a.solver.tol),
        "--max-matvecs".into(),
        a.solver.max_matvecs.to_string(),
    ]);
    if a.keep_going {
        parts.push("--keep-going".into());
    }
    let params = json!({
        "delta": a.delta,
        "q": q_of_delta(a.delta),
        "twice_s": [a.twice_s.start(), a.twice_s.end()],
        "height": [a.height.start(), a.height.end()],
        "sector_2n": a.sector,
        "diagonal": a.diagonal,
        "half_width": if a.diagonal { json!([a.half_width.start(), a.half_width.end()]) } else { json!(null) },
    });
    let header = Header::new("xxz/1", command_line(&parts), params, None);
    let path = resolve_output(a.out.as_deref(), if a.diagonal { "xxz_diagonal.csv" } else { "xxz.csv" });
    if *a.twice_s.start() == 0 {
        return Err(invalid("2S must be at least 1"));
    }
    let opts = a.solver.lanczos();
    let q = q_of_delta(a.delta);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut push = |ts: usize, h: usize, r: Option<usize>, n2: i64, g: Result<HamiltonianGap>| {
        let s = ts as f64 / 2.0;
        let (dim, gap, res) = match g {
            Ok(g) => (g.dim.to_string(), g.gap, g.equivalence_residual),
            Err(e) => {
                failures.push(format!("2S={ts} H={h} 2n={n2}: {e}"));
                (String::new(), f64::NAN, f64::NAN)
            }
        };
        records.push(vec![
            fmt_f64(a.delta),
            fmt_f64(q),
            ts.to_string(),
            h.to_string(),
            r.map(|r| r.to_string()).unwrap_or_default(),
            n2.to_string(),
            dim,
            fmt_f64(gap),
            fmt_f64(gap / s),
            fmt_opt(r.map(|r| gap * (r * r) as f64 / s)),
            fmt_f64(res),
        ]);
    };
    for ts in a.twice_s.clone() {
        for h in a.height.clone() {
            if a.diagonal {
                for r in a.half_width.clone() {
                    let region = DiagonalRegion::new(r, h)?;
                    let sectors = match a.sector {
                        Some(n2) => {
                            region.particles(ts, n2)?;
                            vec![n2]
                        }
                        None => region.sectors(ts),
                    };
                    for n2 in sectors {
                        push(ts, h, Some(r), n2, diagonal_gap(&region, ts, a.delta, n2, &opts));
                    }
                }
            } else {
                let sectors = match a.sector {
                    Some(n2) => vec![XXZParams::new(ts, h, a.delta, n2)?.sector_2n],
                    None => {
                        XXZParams::new(ts, h, a.delta, 0).or_else(|_| XXZParams::new(ts, h, a.delta, 1))?;
                        XXZParams::sectors(ts, h)
                    }
                };
                for n2 in sectors {
                    let g = XXZParams::new(ts, h, a.delta, n2).and_then(|x| xxz_gap(&x, &opts));
                    push(ts, h, None, n2, g);
                }
            }
        }
    }

    let mut out = open_output(path.as_deref())?;
    header.write_comment(&mut out)?;
    let mut w = csv_writer(out);
    w.write_record(XXZ_COLUMNS).map_err(csv_err)?;
    for r in &records {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    if let Some(p) = &path {
        eprintln!("wrote {}", p.display());
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("sector failed: {f}");
        }
        if !a.keep_going {
            return Ok(EXIT_FAILURE);
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let opts = VerifyOptions {
        filter: a.filter.clone(),
        fault: a.inject_fault.map(Fault::CorruptFullGenerator),
        ..VerifyOptions::default()
    };
    let report = run_verify(&opts)?;
    let rows = if a.verbose { report.rows.clone() } else { report.summary() };
    println!("# {} {} verify", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    println!("{:<22} {:<28} {:>10} STATUS", "check", "instance", "deviation");
    for r in &rows {
        println!("{}", r.line());
    }
    let failed = report.failures().count();
    println!(
        "{} instances, {} failed, {:.1} s: {}",
        report.rows.len(),
        failed,
        report.seconds,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    if let Some(p) = &a.json {
        let mut parts = vec!["verify".to_string()];
        if let Some(f) = &a.filter {
            parts.extend(["--filter".into(), f.clone()]);
        }
        let header = Header::new("verify/1", command_line(&parts), json!({ "filter": a.filter }), None);
        let mut out = open_output(Some(p))?;
        serde_json::to_writer_pretty(
            &mut out,
            &json!({
                "header": header,
                "passed": report.passed(),
                "seconds": report.seconds,
                "rows": report.rows,
            }),
        )
        .map_err(|e| crate::Error::Io(e.to_string()))?;
        writeln!(out)?;
        out.flush()?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let params = EnsembleParams::new(a.q, a.sticks, a.height, a.particles)?;
    let mode = match a.mode {
        ModeArg::Lattice => Mode::Lattice,
        ModeArg::Profile => Mode::Profile,
    };
    let seed = a.seed.unwrap_or_else(|| rand::rng().random());
    let mut plan = SimulationPlan::new(params, mode, seed, a.t_burn, a.t_run, a.sample_dt)?;
    if let Some(o) = &a.observable {
        plan = plan.with_observable(o.parse::<Observable>()?)?;
    }
    let parts: Vec<String> = vec![
        "simulate".into(),
        "--q".into(),
        fmt_f64(a.q),
        "--sticks".into(),
        a.sticks.to_string(),
        "--height".into(),
        a.height.to_string(),
        "--particles".into(),
        a.particles.to_string(),
        "--mode".into(),
        mode.as_str().into(),
        "--seed".into(),
        seed.to_string(),
        "--t-burn".into(),
        fmt_f64(a.t_burn),
        "--t-run".into(),
        fmt_f64(a.t_run),
        "--sample-dt".into(),
        fmt_f64(a.sample_dt),
        "--observable".into(),
        plan.observable.label(),
    ];
    let header = Header::new(
        "simulate/1",
        command_line(&parts),
        serde_json::to_value(plan).map_err(|e| crate::Error::Io(e.to_string()))?,
        Some(seed),
    );
    let prefix = a.out_prefix.clone().unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map_or_else(|| PathBuf::from("simulate"), |d| PathBuf::from(d).join("simulate"))
    });
    let with_suffix = |s: &str| {
        let mut p = prefix.clone().into_os_string();
        p.push(s);
        PathBuf::from(p)
    };
    let series_path = with_suffix("_series.csv");
    let estimate_path = with_suffix("_estimate.json");

    let run = gillespie_run(&plan)?;
    let mut out = open_output(Some(&series_path))?;
    header.write_comment(&mut out)?;
    let mut w = csv_writer(out);
    w.write_record(["t", "value"]).map_err(csv_err)?;
    for (t, v) in run.series.iter() {
        w.write_record([fmt_f64(t), fmt_f64(v)]).map_err(csv_err)?;
    }
    w.flush()?;

    let estimate = relaxation_estimate(&run.series, &plan);
    let exact = match enumerate_profiles(&params, Some(DENSE_CAP as u64)) {
        Ok(_) => exact_profile_gap(&params).ok(),
        Err(_) => None,
    };
    let mut doc = json!({
        "header": header,
        "seed": seed,
        "params": params,
        "mode": mode,
        "observable": plan.observable.label(),
        "events": run.events,
        "n_samples": run.series.len(),
        "exact_gap": exact,
        "exact_gap_kind": exact.map(|_| "profile"),
    });
    let code = match &estimate {
        Ok(e) => {
            doc["rate"] = json!(e.rate);
            doc["stderr"] = json!(e.stderr);
            doc["n_samples"] = json!(e.n_samples);
            doc["fit_lags"] = json!(e.fit_lags);
            doc["r2"] = json!(e.r2);
            doc["bootstrap_replicates"] = json!(e.replicates);
            if let Some(g) = exact {
                doc["ratio"] = json!(e.rate / g);
                doc["z_score"] = json!((e.rate - g) / e.stderr);
            }
            EXIT_OK
        }
        Err(err) => {
            doc["error"] = json!(err.to_string());
            eprintln!("estimate failed: {err}");
            EXIT_FAILURE
        }
    };
    let mut out = open_output(Some(&estimate_path))?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| crate::Error::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    eprintln!("seed {seed}; wrote {} and {}", series_path.display(), estimate_path.display());
    Ok(code)
}

fn fmt_seconds(s: f64) -> String {
    format!("{s:.6}")
}
