use cfdim::cli::{parse_report, Report};
use std::process::{Command, Output};

fn cfdim(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cfdim"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn report(args: &[&str]) -> Report {
    let o = cfdim(args, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    parse_report(&String::from_utf8(o.stdout).unwrap()).unwrap()
}

#[test]
fn pressure_at_one_brackets_zero() {
    let r = report(&["pressure", "--theta", "1.0", "--cap", "100", "--depth", "14"]);
    assert!(r.value_lo <= 0.0 && 0.0 <= r.value_hi, "{r:?}");
    assert_eq!(r.provenance.m, serde_json::json!(100));
    assert!(r.provenance.runtime.is_none());
}

#[test]
fn dim_fn_two() {
    let r = report(&["dim", "fn", "--N", "2", "--tol", "5e-4"]);
    assert!(0.5306 <= r.value_lo && r.value_hi <= 0.5320, "{r:?}");
}

#[test]
fn trivial_growth_is_a_domain_error() {
    let o = cfdim(&["dim", "limsup", "--psi", "B^n", "--B", "1"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("B > 1 required"));
}

#[test]
fn malformed_input_exits_64() {
    assert_eq!(cfdim(&["dim", "fn"], &[]).status.code(), Some(64));
    assert_eq!(cfdim(&["dim", "limsup", "--psi", "B^", "--B", "2"], &[]).status.code(), Some(64));
    assert_eq!(cfdim(&["--tol", "abc", "dim", "fn", "--N", "2"], &[]).status.code(), Some(64));
    assert_eq!(cfdim(&["dim", "fn", "--N", "2"], &[("CFDIM_TOL", "x")]).status.code(), Some(64));
}

#[test]
fn budget_exhaustion_exits_3() {
    let o = cfdim(&["verify", "bands", "--k", "8", "--m-max", "60", "--node-cap", "1000"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dim_reports_name_their_branch() {
    let cases: &[&[&str]] = &[
        &["dim", "e", "--n", "k^4", "--s", "exp(e^(k^2))"],
        &["dim", "el", "--n", "k^4", "--s", "exp(e^(k^2))"],
        &["dim", "limsup", "--psi", "B^n", "--B", "3", "--family", "a"],
        &["dim", "liminf-max", "--psi", "exp(C^n)", "--C", "2"],
        &["dim", "sum", "--family", "exp-power", "--r", "0.3"],
    ];
    for args in cases {
        let r = report(args);
        assert!(r.branch.starts_with("Theorem "), "{args:?}: {}", r.branch);
        assert!(0.0 <= r.value_lo && r.value_lo <= r.value_hi && r.value_hi <= 1.0);
    }
}

#[test]
fn every_dim_report_has_a_named_branch() {
    let cases: &[&[&str]] = &[
        &["dim", "fn", "--N", "3"],
        &["dim", "sum", "--family", "exp-power", "--r", "0.7"],
        &["dim", "sum", "--family", "floor-power", "--c", "1", "--d", "1", "--r", "0.5"],
        &["dim", "liao-rams", "--u", "3^n", "--v", "3^n"],
    ];
    for args in cases {
        let r = report(args);
        assert!(!r.branch.is_empty() && r.branch != "indeterminate", "{args:?}");
    }
}

#[test]
fn reruns_are_bit_identical_and_reparse() {
    let args = ["dim", "liao-rams", "--u", "exp(n^2)", "--v", "exp(n^2)"];
    let a = cfdim(&args, &[]);
    let b = cfdim(&args, &[]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let r = parse_report(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["verify", "boxcount", "--cap", "2", "--count", "20000", "--depth", "16", "--scale-to", "10"];
    let one: Vec<&str> = ["--threads", "1"].iter().chain(&base).copied().collect();
    let four: Vec<&str> = ["--threads", "4"].iter().chain(&base).copied().collect();
    assert_eq!(cfdim(&one, &[]).stdout, cfdim(&four, &[]).stdout);
}

#[test]
fn environment_and_config_precedence() {
    let dir = std::env::temp_dir().join(format!("cfdim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "format = \"table\"\ntol = 0.01\n").unwrap();
    let p = cfg.to_str().unwrap();
    let args = ["dim", "sum", "--family", "exp-power", "--r", "0.3"];

    let from_file = cfdim(&[&["--config", p][..], &args].concat(), &[]);
    assert!(String::from_utf8_lossy(&from_file.stdout).starts_with("branch"));

    let env_wins = cfdim(&[&["--config", p][..], &args].concat(), &[("CFDIM_FORMAT", "csv")]);
    assert!(String::from_utf8_lossy(&env_wins.stdout).starts_with("query,branch,value_lo,value_hi"));

    let flag_wins = cfdim(&[&["--config", p, "--format", "json"][..], &args].concat(), &[("CFDIM_FORMAT", "csv")]);
    let r = parse_report(&String::from_utf8(flag_wins.stdout).unwrap()).unwrap();
    assert_eq!(r.provenance.tol, 0.01);

    std::fs::write(&cfg, "colour = 3\n").unwrap();
    assert_eq!(cfdim(&[&["--config", p][..], &args].concat(), &[]).status.code(), Some(64));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn plot_data_is_written() {
    let path = std::env::temp_dir().join(format!("cfdim-plot-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let o = cfdim(
        &["--emit-plot", p, "pressure", "--theta", "0.8", "--cap", "5", "--depth", "8", "--restricted", "--curve-points", "5"],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series,x,y"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    std::fs::remove_file(&path).ok();
}

#[test]
fn timing_is_opt_in() {
    let r = report(&["--timing", "dim", "fn", "--N", "1"]);
    assert!(r.provenance.runtime.is_some());
}
