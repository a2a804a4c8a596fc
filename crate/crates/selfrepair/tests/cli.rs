use std::path::Path;
use std::process::Command;

use selfrepair::{run_cli, CliError};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_selfrepair"));
    c.env_remove("SELFREPAIR_WORKERS");
    c
}

fn run(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    let argv = std::iter::once("selfrepair").chain(args.iter().copied());
    run_cli(argv, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", "[config.a]\nscheme = \"twod:4\"\nspares = 2\nruns = 200\n");
    let unknown = write(dir.path(), "unknown.toml", "[config.a]\nscheme = \"twod:4\"\nspares = 2\nfoo = 1\n");
    let cases: [(&[&str], i32); 8] = [
        (&["--help"], 0),
        (&["analyze", "--twod", "4"], 0),
        (&["simulate", &good], 0),
        (&["simulate", &unknown], 2),
        (&["simulate", "/nonexistent/campaign.toml"], 2),
        (&["analyze", "--twod", "2"], 2),
        (&["frobnicate"], 2),
        (&["simulate", &good, "--workers", "0"], 2),
    ];
    for (args, code) in cases {
        let status = bin().args(args).current_dir(dir.path()).output().unwrap();
        assert_eq!(status.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
    }
    let out = bin().args(["simulate", &unknown]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "");
    let good = write(dir.path(), "c.toml", "[config.a]\nscheme = \"twod:4\"\nspares = 2\nruns = 100\n");
    let out = bin().args(["simulate", &good, "--out", &format!("{blocker}/sub")]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_reports_exact_fractions_and_agreement() {
    let text = run(&["analyze", "--twod", "4"]).unwrap();
    assert!(text.contains("[11/12]"), "{text}");
    let text = run(&["analyze", "--raid6", "2x6"]).unwrap();
    assert!(text.contains("verdict: closed-form = enumeration"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    run(&["analyze", "--tp", "1x8", "--out", &out]).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7, "{csv}");
    assert!(csv.starts_with("scheme,method,level,failures,numerator,denominator,fraction,std_error"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.json")).unwrap()).unwrap();
    assert_eq!(json["agree"], serde_json::Value::Bool(true));
    assert_eq!(json["tolerated"], 3);
}

#[test]
fn analyze_over_budget_needs_sampling() {
    assert!(matches!(run(&["analyze", "--twod", "20"]), Err(CliError::Config(m)) if m.contains("--sample")));
    let text = run(&["analyze", "--twod", "20", "--sample", "20000", "--sample-seed", "3"]).unwrap();
    assert!(text.contains("sampled"), "{text}");
}

#[test]
fn simulate_writes_csv_and_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let campaign = write(
        dir.path(),
        "c.toml",
        "seed = 5\n[config.harsh]\nscheme = \"twod:4\"\nspares = 1\nruns = 5000\n\
         [[config.harsh.bathtub]]\nstart_age_years = 0.0\nrate_per_year = 0.5\n\
         [config.mild]\nscheme = \"raid6:1x6\"\nspares = \"unlimited\"\nruns = 5000\nmode = \"profile\"\n",
    );
    let out = dir.path().join("out");
    let stdout = run(&["simulate", &campaign, "--out", &out.display().to_string()]).unwrap();
    assert!(stdout.contains("harsh") && stdout.contains("mild"), "{stdout}");

    let mut reader = csv::Reader::from_path(out.join("results.csv")).unwrap();
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        headers,
        [
            "scheme", "data", "parity", "spares", "runs", "losses", "exhaustions", "R", "CI-low", "CI-high",
            "nines-low", "nines-high", "wall-time"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "twod:4");
    assert_eq!(&rows[1][3], "unlimited");
    assert!(rows[0][5].parse::<u64>().unwrap() > 0);
    assert!(!rows[0][12].is_empty());

    let lines = std::fs::read_to_string(out.join("results.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[1]["config"]["mode"], "profile");

    // a second campaign appends without repeating the header
    run(&["simulate", &campaign, "--out", &out.display().to_string(), "--runs", "100"]).unwrap();
    let text = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.matches("scheme,").count(), 1);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let campaign = write(
        dir.path(),
        "c.toml",
        "[config.a]\nscheme = \"tp:2x6\"\nspares = 2\nruns = 70000\nseed = 42\n\
         [[config.a.bathtub]]\nstart_age_years = 0.0\nrate_per_year = 0.4\n",
    );
    let outputs: Vec<Vec<u8>> = [1, 3, 8]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}"));
            run(&["simulate", &campaign, "--workers", &w.to_string(), "--no-timing", "--out", &out.display().to_string()])
                .unwrap();
            std::fs::read(out.join("results.csv")).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn sweep_with_zero_target_needs_no_spares() {
    let text = run(&["sweep", "--raid6", "1x6", "--target", "0", "--runs", "2000"]).unwrap();
    assert!(text.contains("verdict: 0 spares reach 0 nines"), "{text}");
}

#[test]
fn sweep_reports_unreachable_targets() {
    let text = run(&["sweep", "--twod", "5", "--target", "9", "--runs", "20000", "--seed", "2"]).unwrap();
    assert!(text.contains("verdict: unreachable"), "{text}");
    assert!(matches!(run(&["sweep", "--twod", "5", "--target", "-1"]), Err(CliError::Config(_))));
}

#[test]
fn table_compares_published_rows() {
    let text = run(&["table", "2", "--runs", "3000", "--seed", "4"]).unwrap();
    assert_eq!(text.matches("raid6:").count(), 4, "{text}");
    assert!(text.contains("66.67%"));
    assert!(matches!(run(&["table", "4"]), Err(CliError::Config(_))));
}
