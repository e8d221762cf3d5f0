//! End-to-end tests of the `eight` binary: exit codes, deterministic
//! reports, file round trips, and export sanity.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn eight() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eight"))
}

fn run(args: &[&str]) -> Output {
    eight().args(args).output().expect("spawn eight")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eight-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn invalid_period_exits_with_code_two() {
    let out = run(&["bounds", "--period", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn collision_state_file_exits_with_code_two() {
    let path = tmp("collision.json");
    std::fs::write(
        &path,
        r#"{"q": [[0.5, 0.0], [0.5, 0.0], [-1.0, 0.0]], "v": [[0,0],[0,0],[0,0]]}"#,
    )
    .unwrap();
    let out = run(&[
        "integrate",
        "--ics",
        path.to_str().unwrap(),
        "--t-end",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("collision"), "stderr: {msg}");
}

#[test]
fn length_emits_curve_samples_csv() {
    let csv = tmp("curve.csv");
    let out = run(&["length", "--csv", csv.to_str().unwrap(), "--csv-points", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,phi,phi_prime"));
    assert_eq!(lines.count(), 65);
    // Latitude column is strictly increasing along the quarter interval.
    let phis: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(phis.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn bounds_report_is_byte_identical_across_runs() {
    let a = run(&["bounds", "--ell0", "0.618112999930991"]);
    let b = run(&["bounds", "--ell0", "0.618112999930991"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"A2\": 2.0583254777513358e0"), "{text}");
}

#[test]
fn config_file_overrides_defaults_but_not_flags() {
    let config = tmp("config.txt");
    std::fs::write(
        &config,
        "# pipeline defaults\nperiod = 1.0\nell0 = 0.618112999930991\n",
    )
    .unwrap();
    let from_config = run(&["--config", config.to_str().unwrap(), "bounds"]);
    assert_eq!(from_config.status.code(), Some(0));
    let text = String::from_utf8(from_config.stdout).unwrap();
    assert!(text.contains("\"T\": 1.0000000000000000e0"), "{text}");

    // An explicit flag still wins over the config value.
    let with_flag = run(&[
        "--config",
        config.to_str().unwrap(),
        "bounds",
        "--period",
        "2.0",
    ]);
    let text = String::from_utf8(with_flag.stdout).unwrap();
    assert!(text.contains("\"T\": 2.0000000000000000e0"), "{text}");

    // Malformed config exits with code 2.
    let bad = tmp("bad-config.txt");
    std::fs::write(&bad, "period == oops\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "bounds"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trajectory_csv_round_trips_through_verify() {
    let csv = tmp("traj.csv");
    let out = run(&[
        "integrate",
        "--t-end",
        "6.32591398",
        "--samples",
        "1200",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // Lossless at 17 digits: rewriting the parsed CSV reproduces it.
    let text = std::fs::read_to_string(&csv).unwrap();
    let reparsed: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    let mut rebuilt = String::from(text.lines().next().unwrap());
    rebuilt.push('\n');
    for row in &reparsed {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        rebuilt.push_str(&cells.join(","));
        rebuilt.push('\n');
    }
    assert_eq!(text, rebuilt);

    let report = tmp("traj-report.json");
    let out = run(&[
        "verify",
        "--in",
        csv.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "verify failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.contains("\"aggregate_pass\": true"));
}

#[test]
fn pipeline_artifacts_verify_and_export() {
    let dir = tmp("pipeline");
    let out = run(&[
        "run",
        "--segments",
        "128",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "pipeline failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("\"gate_passed\": true"));
    assert!(report.contains("\"aggregate_pass\": true"));

    // Orbit JSON verifies on its own.
    let orbit_path = dir.join("orbit.json");
    let out = run(&["verify", "--in", orbit_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    // SVG export shows a Klein-symmetric closed eight.
    let svg_path = tmp("orbit.svg");
    let out = run(&[
        "export",
        "--in",
        orbit_path.to_str().unwrap(),
        "--format",
        "svg",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    check_svg(&svg_path);

    // CSV export has one row per sample.
    let csv_path = tmp("orbit.csv");
    let out = run(&[
        "export",
        "--in",
        orbit_path.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = std::fs::read_to_string(&csv_path).unwrap().lines().count();
    assert_eq!(rows, 12 * 128 + 1);
}

/// The exported eight must be symmetric under both axis reflections, and
/// the shape-curve panel must cross phi = 0 only near the three collinear
/// longitudes.
fn check_svg(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let polylines: Vec<Vec<(f64, f64)>> = text
        .match_indices("points=\"")
        .map(|(start, _)| {
            let rest = &text[start + 8..];
            let end = rest.find('"').unwrap();
            rest[..end]
                .split_whitespace()
                .map(|pair| {
                    let (x, y) = pair.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect();
    assert_eq!(polylines.len(), 2);

    // Panel one: the planar eight, symmetric under x- and y-negation
    // about its bounding-box center.
    let eight = &polylines[0];
    let cx = (eight.iter().map(|p| p.0).fold(f64::INFINITY, f64::min)
        + eight.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max))
        / 2.0;
    let cy = (eight.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
        + eight.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max))
        / 2.0;
    let nearest = |x: f64, y: f64| -> f64 {
        eight
            .iter()
            .map(|p| ((p.0 - x).powi(2) + (p.1 - y).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    };
    let mut worst = 0.0f64;
    for p in eight.iter().step_by(7) {
        worst = worst.max(nearest(2.0 * cx - p.0, p.1));
        worst = worst.max(nearest(p.0, 2.0 * cy - p.1));
    }
    assert!(worst < 2.0, "reflection defect {worst} svg units");

    // Panel two: phi = 0 crossings only near collinear longitudes (the
    // curve advances 4 pi in theta per period, crossing six times).
    let shape = &polylines[1];
    let ymin = shape.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ymax = shape.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let xmin = shape.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = shape.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let equator = (ymin + ymax) / 2.0;
    // The curve touches the equator exactly at the crossings, so track
    // strict sides and record side changes.
    let band = (ymax - ymin) / 100.0;
    let mut crossings = Vec::new();
    let mut last_side = 0i8;
    for p in shape {
        let side = if p.1 > equator + band {
            1
        } else if p.1 < equator - band {
            -1
        } else {
            0
        };
        if side != 0 {
            if last_side != 0 && side != last_side {
                crossings.push(p.0);
            }
            last_side = side;
        }
    }
    assert_eq!(crossings.len(), 5, "interior equator crossings");
    // Crossing longitudes sit at multiples of one sixth of the span.
    for (k, x) in crossings.iter().enumerate() {
        let expected = xmin + (xmax - xmin) * (k + 1) as f64 / 6.0;
        assert!(
            (x - expected).abs() < (xmax - xmin) / 40.0,
            "crossing {k} at {x}, expected about {expected}"
        );
    }
}
