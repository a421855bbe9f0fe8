//! End-to-end pipeline behavior: staged CLI runs vs the single-shot
//! run, cross-year timeline events on the bundled fixture, and CLI
//! error reporting.

mod common;

use std::path::Path;
use std::process::Command;

use biblionet::config::load_config;
use biblionet::pipeline;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biblionet"))
}

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Running each stage as its own CLI invocation must produce the same
/// bytes as the corresponding artifacts of a full `run`.
#[test]
fn staged_cli_matches_full_run() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.txt");
    std::fs::write(&corpus, common::two_block_corpus(1996, 42)).unwrap();
    let config = tmp.path().join("run.conf");
    std::fs::write(
        &config,
        "seed = BULL SEISMOL SOC AM\n[year 1996]\ncorpus = corpus.txt\n",
    )
    .unwrap();

    let full = tmp.path().join("full");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&full)
        .status()
        .unwrap();
    assert!(status.success());
    let full = full.join("1996");

    let staged = tmp.path().join("staged");
    let stages: &[&[&str]] = &[
        &["parse", "--input", "corpus.txt", "--out-dir", "staged"],
        &["matrix", "--records", "staged/records.json", "--year", "1996", "--out", "staged/matrix.csv"],
        &["env", "--matrix", "staged/matrix.csv", "--seed", "BULL SEISMOL SOC AM", "--out-dir", "staged"],
        &["factors", "--correlation", "staged/correlation.csv", "--out-dir", "staged"],
        &["map", "--correlation", "staged/correlation.csv", "--clusters", "staged/clusters.csv", "--out-dir", "staged"],
        &["countries", "--records", "staged/records.json", "--year", "1996", "--out-dir", "staged"],
        &["export", "--records", "staged/records.json", "--year", "1996", "--out-dir", "staged"],
    ];
    for args in stages {
        let status = bin().args(*args).current_dir(tmp.path()).status().unwrap();
        assert!(status.success(), "stage {:?} failed", args[0]);
    }

    for artifact in [
        "records.json",
        "warnings.csv",
        "matrix.csv",
        "environment.csv",
        "correlation.csv",
        "loadings.csv",
        "clusters.csv",
        "stimulus.csv",
        "stimulus.svg",
        "collaboration.csv",
        "core_groups.csv",
        "affiliation.dl",
        "country.net",
        "cosine.net",
    ] {
        assert_eq!(
            read(&full.join(artifact)),
            read(&staged.join(artifact)),
            "staged {artifact} differs from the full run"
        );
    }
}

/// On the bundled fixture the seed's block separates from the merged
/// 1994 structure by 1996; the timeline must report it as EMERGED.
#[test]
fn fixture_timeline_reports_emerged_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = load_config(&fixtures().join("fixture.conf")).unwrap();
    cfg.out = tmp.path().to_path_buf();
    let runs = pipeline::run(&cfg).unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0].model.n_factors, 1, "1994 should be one merged block");
    assert_eq!(runs[1].model.n_factors, 2, "1996 should split into two blocks");

    let timeline = std::fs::read_to_string(tmp.path().join("timeline.csv")).unwrap();
    let emerged: Vec<&str> = timeline.lines().filter(|l| l.contains("EMERGED")).collect();
    assert_eq!(emerged.len(), 1, "timeline:\n{timeline}");
    assert!(emerged[0].starts_with("1996,"), "{}", emerged[0]);
    assert!(emerged[0].contains("J SEISMOL"), "{}", emerged[0]);

    let manifest = std::fs::read_to_string(tmp.path().join("run_manifest.txt")).unwrap();
    assert!(manifest.contains("resolved seed 1996 = BULL SEISMOL SOC AM"), "{manifest}");
}

#[test]
fn run_with_year_filter_skips_timeline() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(fixtures().join("fixture.conf"))
        .args(["--year", "1994", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("1994/loadings.csv").exists());
    assert!(!out.join("1996").exists());
    assert!(!out.join("timeline.csv").exists());
}

fn run_expecting_error(args: &mut Command, want_code: i32) -> serde_json::Value {
    let output = args.output().unwrap();
    assert_eq!(output.status.code(), Some(want_code), "{output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("stderr not JSON ({e}): {stderr}"))
}

#[test]
fn unknown_config_key_exits_2_with_json_report() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.conf");
    std::fs::write(&config, "seed = X\nbogus_key = 1\n[year 2000]\ncorpus = c.txt\n").unwrap();
    let report = run_expecting_error(bin().args(["run", "--config"]).arg(&config), 2);
    assert!(report["error"].as_str().unwrap().contains("bogus_key"), "{report}");
    assert_eq!(report["exit_code"], 2);
}

#[test]
fn unknown_seed_journal_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.txt");
    std::fs::write(&corpus, common::two_block_corpus(1996, 7)).unwrap();
    let config = tmp.path().join("run.conf");
    std::fs::write(&config, "seed = NO SUCH JOURNAL\n[year 1996]\ncorpus = corpus.txt\n").unwrap();
    let report = run_expecting_error(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(tmp.path().join("out")),
        3,
    );
    assert!(report["error"].as_str().unwrap().contains("NO SUCH JOURNAL"), "{report}");
}

/// Keyword-based seed resolution picks the most-cited match.
#[test]
fn keyword_seed_resolution() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.txt");
    std::fs::write(&corpus, common::two_block_corpus(1996, 11)).unwrap();
    let config = tmp.path().join("run.conf");
    std::fs::write(&config, "keywords = SEISMOL\n[year 1996]\ncorpus = corpus.txt\n").unwrap();
    let mut cfg = load_config(&config).unwrap();
    cfg.out = tmp.path().join("out");
    let runs = pipeline::run(&cfg).unwrap();
    // BULL SEISMOL SOC AM receives every journal's seed citations;
    // J SEISMOL matches the keyword too but is cited far less.
    assert_eq!(runs[0].seed, "BULL SEISMOL SOC AM");
}
