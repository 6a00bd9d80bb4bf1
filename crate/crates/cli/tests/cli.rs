use std::collections::BTreeMap;
use std::path::Path;

use hamgrad::app::{main_with, OUTPUT_FILES};
use hamgrad::csv_io::{read_summaries, read_traces, TRACE_HEADER};
use hamgrad::experiment::Metric;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hamgrad").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn small_run(dir: &Path, extra: &[&str]) -> (i32, String, String) {
    let out = dir.display().to_string();
    let mut args = vec![
        "run",
        "--game",
        "bilinear",
        "--n",
        "20",
        "--d",
        "4",
        "--algo",
        "shgd,lsvrhg",
        "--gamma",
        "0.05",
        "--max-samples",
        "5000",
        "--seeds",
        "3",
        "--checkpoints",
        "30",
        "--out",
        &out,
    ];
    args.extend_from_slice(extra);
    call(&args)
}

#[test]
fn run_without_arguments_prints_usage() {
    let (code, _, err) = call(&["run"]);
    assert_ne!(code, 0);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn unknown_flag_and_preset_exit_with_one() {
    assert_eq!(call(&["run", "--bogus"]).0, 1);
    let (code, _, err) = call(&["run", "--preset", "no-such-preset"]);
    assert_eq!(code, 1);
    assert!(err.contains("no-such-preset"));
}

#[test]
fn presets_lists_every_name() {
    let (code, out, _) = call(&["presets"]);
    assert_eq!(code, 0);
    for name in ["fig1-bilinear", "fig1-suff-bilinear", "gan-wgan"] {
        assert!(out.contains(name), "{out}");
    }
}

#[test]
fn constants_of_the_identity_game() {
    let (code, out, err) = call(&["constants", "--game", "bilinear", "--n", "100"]);
    assert_eq!(code, 0, "{err}");
    assert!(
        out.lines()
            .any(|l| l.starts_with("mu_H") && l.contains("0.0001")),
        "{out}"
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.conf");
    std::fs::write(&file, "game = bilinear\nn = 10\nd = 3\nalgo = shgd\ngamma = 0.05\nseeds = 2\nmax-samples = 1000\n").unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = call(&[
        "run",
        "--config",
        file.to_str().unwrap(),
        "--seeds",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(text.contains("seeds = 3"), "{text}");
    assert!(text.contains("n = 10"), "{text}");
}

#[test]
fn run_writes_every_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = small_run(dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("lsvrhg"));
    for f in OUTPUT_FILES {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let header = std::fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), TRACE_HEADER.join(","));
}

#[test]
fn summary_is_recomputable_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(small_run(dir.path(), &[]).0, 0);
    let traces = read_traces(&dir.path().join("traces.csv")).unwrap();
    let summaries = read_summaries(&dir.path().join("summary.csv")).unwrap();
    let mut runs: BTreeMap<(String, usize), Vec<(u64, f64, f64)>> = BTreeMap::new();
    for t in &traces {
        runs.entry((t.algo.clone(), t.run_id)).or_default().push((
            t.samples_seen,
            t.dist_sq_rel,
            t.h_rel,
        ));
    }
    assert!(!summaries.is_empty());
    for s in &summaries {
        let vals: Vec<f64> = runs
            .iter()
            .filter(|((algo, _), _)| *algo == s.algo)
            .map(|(_, rows)| {
                let row = rows.iter().rev().find(|r| r.0 <= s.samples_seen).unwrap();
                match s.metric {
                    Metric::Distance => row.1,
                    Metric::Hamiltonian => row.2,
                }
            })
            .collect();
        assert_eq!(vals.len(), s.m);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!(
            (mean - s.mean).abs() <= 1e-12 * (1.0 + mean.abs()),
            "{} at {}: {mean} vs {}",
            s.algo,
            s.samples_seen,
            s.mean
        );
    }
}

#[test]
fn aligned_values_come_from_records_at_or_before_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(small_run(dir.path(), &[]).0, 0);
    let traces = read_traces(&dir.path().join("traces.csv")).unwrap();
    for t in traces.windows(2).filter(|w| w[0].run_id == w[1].run_id) {
        assert!(t[0].samples_seen <= t[1].samples_seen);
        assert!(t[0].k < t[1].k);
    }
    assert!(traces
        .iter()
        .filter(|t| t.k == 0)
        .all(|t| t.dist_sq_rel == 1.0 && t.h_rel == 1.0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(small_run(a.path(), &[]).0, 0);
    assert_eq!(small_run(b.path(), &[]).0, 0);
    for f in OUTPUT_FILES.iter().filter(|f| **f != "config.txt") {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
