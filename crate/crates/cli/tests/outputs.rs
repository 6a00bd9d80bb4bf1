use hamgrad::csv_io::{
    read_summaries, read_traces, write_summaries, write_traces, TraceLine, SUMMARY_HEADER,
};
use hamgrad::experiment::{Metric, Summary};
use hamgrad::svg::{render, PlotOptions, LOG_FLOOR};

fn opts() -> PlotOptions {
    PlotOptions {
        log_x: false,
        log_y: true,
        title: "t".into(),
        x_label: "samples seen".into(),
        y_label: "y".into(),
    }
}

fn summary(label: &str, mean: Vec<f64>) -> Summary {
    let n = mean.len() as u64;
    Summary {
        label: label.into(),
        metric: Metric::Distance,
        checkpoints: (0..n).map(|i| i * 10).collect(),
        ci: vec![0.0; mean.len()],
        mean,
        m: 1,
    }
}

#[test]
fn trace_lines_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let lines: Vec<TraceLine> = (0..5)
        .map(|k| TraceLine {
            run_id: 1,
            seed: 7,
            algo: "shgd".into(),
            game: "bilinear".into(),
            k,
            samples_seen: 2 * k,
            dist_sq_rel: 0.3f64.powi(k as i32 * 40),
            h_rel: 1.0 / 3.0,
            gamma: 1e-7,
            flag: "OK".into(),
        })
        .collect();
    write_traces(&path, &lines).unwrap();
    assert_eq!(read_traces(&path).unwrap(), lines);
}

#[test]
fn empty_summaries_write_the_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_summaries(&path, &[]).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        format!("{}\n", SUMMARY_HEADER.join(","))
    );
    assert!(read_summaries(&path).unwrap().is_empty());
}

#[test]
fn wrong_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    std::fs::write(&path, "a,b\n1,2\n").unwrap();
    assert!(read_summaries(&path).is_err());
}

#[test]
fn svg_is_deterministic() {
    let s = vec![
        summary("a", vec![1.0, 0.5, 0.1]),
        summary("b", vec![1.0, 2.0, 4.0]),
    ];
    assert_eq!(render(&s, &opts()).unwrap(), render(&s, &opts()).unwrap());
}

#[test]
fn svg_rejects_empty_input() {
    assert!(render(&[], &opts()).is_err());
}

#[test]
fn svg_draws_a_constant_series() {
    let svg = render(&[summary("flat", vec![0.5; 4])], &opts()).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("flat"));
    assert!(!svg.contains("NaN"));
}

#[test]
fn svg_notes_clipped_values() {
    let svg = render(&[summary("tiny", vec![1.0, 1e-40, 0.0])], &opts()).unwrap();
    assert!(svg.contains(&format!("{LOG_FLOOR:e}")), "{svg}");
    let clean = render(&[summary("ok", vec![1.0, 1e-3])], &opts()).unwrap();
    assert!(!clean.contains("drawn at"));
}
