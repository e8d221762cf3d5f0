//! `eight` — construction and verification of the figure-eight orbit of
//! the planar equal-mass three-body problem.
//!
//! Subcommands mirror the stages of the construction: `length` solves the
//! equipotential curve and its arc length, `bounds` prints the collision
//! action bounds and the gate, `minimize` runs the direct action
//! minimization, `build` assembles the periodic orbit from a minimizing
//! arc, `integrate` runs the equations of motion from published or custom
//! initial conditions, `verify` checks a trajectory or orbit file, `run`
//! chains the whole pipeline, and `export` renders orbit files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use eight_core::action_bounds::{self, DEFAULT_PERIOD};
use eight_core::equipotential;
use eight_core::integrator::{self, Trajectory, SIMO_PERIOD};
use eight_core::minimizer::{self, MinimizeOptions};
use eight_core::orbit_builder::{self, Orbit};
use eight_core::path::DiscretePath;
use eight_core::planar::Vec2;
use eight_core::shape_geometry::{Configuration, State};
use eight_core::verification::{self, VerificationReport};

#[derive(Parser)]
#[command(
    name = "eight",
    version,
    about = "Figure-eight three-body orbit: construction and verification"
)]
struct Cli {
    /// Key-value file (`key = value` lines) overriding built-in defaults;
    /// explicit flags still win. Keys: segments, period, tol, max_iter,
    /// samples, t_end, n_base, max_refinements, ell0, out_dir.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Defaults loaded from the optional config file.
struct FileDefaults(std::collections::HashMap<String, String>);

impl FileDefaults {
    fn load(path: Option<&Path>) -> anyhow::Result<FileDefaults> {
        let mut map = std::collections::HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap().trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .with_context(|| format!("config line {}: expected key = value", lineno + 1))?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileDefaults(map))
    }

    fn f64(&self, key: &str, cli: Option<f64>, default: f64) -> anyhow::Result<f64> {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(s) => s.parse().with_context(|| format!("config key {key}")),
            None => Ok(default),
        }
    }

    fn usize(&self, key: &str, cli: Option<usize>, default: usize) -> anyhow::Result<usize> {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(s) => s.parse().with_context(|| format!("config key {key}")),
            None => Ok(default),
        }
    }

    fn string(&self, key: &str, cli: Option<String>, default: &str) -> String {
        cli.or_else(|| self.0.get(key).cloned())
            .unwrap_or_else(|| default.to_string())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the equipotential curve and compute its arc length.
    Length {
        /// Base grid intervals [default: 64].
        #[arg(long)]
        n_base: Option<usize>,
        /// Grid doublings allowed [default: 14].
        #[arg(long)]
        max_refinements: Option<usize>,
        /// Write theta,phi,phi_prime samples to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Grid resolution for the CSV dump [default: 1024].
        #[arg(long)]
        csv_points: Option<usize>,
    },
    /// Print the action bounds report as JSON.
    Bounds {
        /// Equipotential length: a number, or "auto" to compute it.
        #[arg(long)]
        ell0: Option<String>,
        /// Twelfth-period T [default: 2 pi / 12].
        #[arg(long)]
        period: Option<f64>,
    },
    /// Minimize the action over arcs between the boundary manifolds.
    Minimize {
        /// Segments of the arc [default: 512].
        #[arg(long)]
        segments: Option<usize>,
        /// Twelfth-period T [default: 2 pi / 12].
        #[arg(long)]
        period: Option<f64>,
        /// Gradient max-norm target [default: 1e-9].
        #[arg(long)]
        tol: Option<f64>,
        /// Iteration cap [default: 50000].
        #[arg(long)]
        max_iter: Option<usize>,
        /// Seed path JSON; defaults to the equipotential test path.
        #[arg(long)]
        seed_path: Option<PathBuf>,
        /// Output path JSON for the minimizing arc.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the periodic orbit from a minimizing arc.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Resample the orbit to this many uniform samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Integrate the equations of motion.
    Integrate {
        /// "simo" or a JSON state file `{"q": [[x,y],...], "v": [[x,y],...]}`.
        #[arg(long)]
        ics: Option<String>,
        /// Integration span [default: the published period 6.32591398].
        #[arg(long)]
        t_end: Option<f64>,
        /// Per-step tolerance [default: 1e-12].
        #[arg(long)]
        tol: Option<f64>,
        /// Uniform samples [default: 4104].
        #[arg(long)]
        samples: Option<usize>,
        /// Trajectory CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a trajectory CSV or orbit JSON; exit 0 iff all checks pass.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Equipotential length: a number, or "auto" to compute it.
        #[arg(long)]
        ell0: Option<String>,
        /// Write the report JSON here (also printed to stdout).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the whole pipeline: length, bounds, minimize, build, integrate,
    /// verify; write artifacts and a combined report.
    Run {
        /// Segments of the minimizing arc [default: 512].
        #[arg(long)]
        segments: Option<usize>,
        /// Twelfth-period T [default: 2 pi / 12].
        #[arg(long)]
        period: Option<f64>,
        /// Minimizer gradient target [default: 1e-9].
        #[arg(long)]
        tol: Option<f64>,
        /// Trajectory samples [default: 4104].
        #[arg(long)]
        samples: Option<usize>,
        /// Artifact directory [default: eight-out].
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Export an orbit file as CSV, JSON, or a static SVG.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let defaults = match FileDefaults::load(cli.config.as_deref()) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.cmd, &defaults) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(feature = "parallel")]
fn init_thread_pool() {
    if let Some(n) = std::env::var("EIGHT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_thread_pool() {}

/// Runs a subcommand; `Ok(false)` means verification failed (exit 1).
fn dispatch(cmd: Cmd, defaults: &FileDefaults) -> anyhow::Result<bool> {
    match cmd {
        Cmd::Length {
            n_base,
            max_refinements,
            csv,
            csv_points,
        } => {
            let n_base = defaults.usize("n_base", n_base, 64)?;
            let max_refinements = defaults.usize("max_refinements", max_refinements, 14)?;
            let csv_points = defaults.usize("csv_points", csv_points, 1024)?;
            let r = equipotential::euler_length(n_base, max_refinements)?;
            println!("{}", length_json(&r));
            if let Some(path) = csv {
                let grid = equipotential::solve_grid(csv_points)?;
                std::fs::write(&path, equipotential::samples_csv(&grid))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(true)
        }
        Cmd::Bounds { ell0, period } => {
            let ell0 = defaults.string("ell0", ell0, "auto");
            let period = defaults.f64("period", period, DEFAULT_PERIOD)?;
            if !(period > 0.0) {
                bail!("--period must be positive");
            }
            let ell0 = resolve_ell0(&ell0)?;
            let report = action_bounds::bounds_report(ell0, period);
            println!("{}", bounds_json(&report));
            Ok(true)
        }
        Cmd::Minimize {
            segments,
            period,
            tol,
            max_iter,
            seed_path,
            out,
        } => {
            let segments = defaults.usize("segments", segments, 512)?;
            let period = defaults.f64("period", period, DEFAULT_PERIOD)?;
            let tol = defaults.f64("tol", tol, 1e-9)?;
            let max_iter = defaults.usize("max_iter", max_iter, 50_000)?;
            if !(period > 0.0) || !(tol > 0.0) || segments < 2 {
                bail!("--period and --tol must be positive and --segments >= 2");
            }
            let report = minimize_arc(segments, period, tol, max_iter, seed_path.as_deref())?;
            println!(
                "{{\n  \"action\": {:.16e},\n  \"gradient_norm\": {:.16e},\n  \
                 \"min_separation\": {:.16e},\n  \"max_angular_momentum\": {:.16e},\n  \
                 \"iterations\": {}\n}}",
                report.action,
                report.gradient_norm,
                report.min_separation,
                report.max_angular_momentum,
                report.iterations
            );
            if let Some(path) = out {
                std::fs::write(&path, report.path.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(true)
        }
        Cmd::Build {
            input,
            out,
            samples,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let arc = DiscretePath::from_json(&text)?;
            let mut orbit = orbit_builder::build_orbit(&arc)?;
            if let Some(m) = samples {
                if m < 24 {
                    bail!("--samples must be at least 24");
                }
                orbit = orbit.resampled(m);
            }
            std::fs::write(&out, orbit.to_json())
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{{\n  \"Tbar\": {:.16e},\n  \"samples\": {}\n}}",
                orbit.tbar,
                orbit.samples()
            );
            Ok(true)
        }
        Cmd::Integrate {
            ics,
            t_end,
            tol,
            samples,
            out,
        } => {
            let ics = defaults.string("ics", ics, "simo");
            let t_end = defaults.f64("t_end", t_end, SIMO_PERIOD)?;
            let tol = defaults.f64("tol", tol, 1e-12)?;
            let samples = defaults.usize("samples", samples, 4104)?;
            if !(t_end > 0.0) || !(tol > 0.0) || samples < 2 {
                bail!("--t-end and --tol must be positive and --samples >= 2");
            }
            let s0 = resolve_state(&ics)?;
            let traj = integrator::integrate(&s0, t_end, tol, samples)?;
            let defect = integrator::state_distance(traj.start(), traj.end());
            println!(
                "{{\n  \"t_end\": {:.16e},\n  \"steps\": {},\n  \"rejected\": {},\n  \
                 \"periodicity_defect\": {:.16e}\n}}",
                t_end, traj.stats.steps, traj.stats.rejected, defect
            );
            if let Some(path) = out {
                std::fs::write(&path, trajectory_csv(&traj))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(true)
        }
        Cmd::Verify {
            input,
            ell0,
            report,
        } => {
            let ell0 = defaults.string("ell0", ell0, "auto");
            let rep = verify_file(&input, &ell0)?;
            let json = rep.to_json();
            println!("{json}");
            if let Some(path) = report {
                std::fs::write(&path, &json)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(rep.passed())
        }
        Cmd::Run {
            segments,
            period,
            tol,
            samples,
            out_dir,
        } => {
            let segments = defaults.usize("segments", segments, 512)?;
            let period = defaults.f64("period", period, DEFAULT_PERIOD)?;
            let tol = defaults.f64("tol", tol, 1e-9)?;
            let samples = defaults.usize("samples", samples, 4104)?;
            let out_dir = out_dir.unwrap_or_else(|| {
                PathBuf::from(defaults.string("out_dir", None, "eight-out"))
            });
            run_pipeline(segments, period, tol, samples, &out_dir)
        }
        Cmd::Export { input, format, out } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let orbit = Orbit::from_json(&text)?;
            let payload = match format {
                ExportFormat::Json => orbit.to_json(),
                ExportFormat::Csv => orbit_csv(&orbit),
                ExportFormat::Svg => orbit_svg(&orbit)?,
            };
            std::fs::write(&out, payload).with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
    }
}

fn resolve_ell0(spec: &str) -> anyhow::Result<f64> {
    if spec == "auto" {
        Ok(equipotential::euler_length(64, 14)?.ell0)
    } else {
        let v: f64 = spec.parse().context("--ell0 must be a number or \"auto\"")?;
        if !(v > 0.0) {
            bail!("--ell0 must be positive");
        }
        Ok(v)
    }
}

fn resolve_state(spec: &str) -> anyhow::Result<State> {
    if spec == "simo" {
        return Ok(integrator::simo_initial_state());
    }
    let text =
        std::fs::read_to_string(spec).with_context(|| format!("reading state file {spec}"))?;
    #[derive(serde::Deserialize)]
    struct StateFile {
        q: [[f64; 2]; 3],
        v: [[f64; 2]; 3],
    }
    let file: StateFile = serde_json::from_str(&text).context("state JSON")?;
    let q = Configuration::recentered(
        Vec2::new(file.q[0][0], file.q[0][1]),
        Vec2::new(file.q[1][0], file.q[1][1]),
        Vec2::new(file.q[2][0], file.q[2][1]),
    );
    let v = Configuration::recentered(
        Vec2::new(file.v[0][0], file.v[0][1]),
        Vec2::new(file.v[1][0], file.v[1][1]),
        Vec2::new(file.v[2][0], file.v[2][1]),
    );
    if q.min_separation() == 0.0 {
        bail!("state file has coincident bodies (collision)");
    }
    Ok(State::new(q, v))
}

fn minimize_arc(
    segments: usize,
    period: f64,
    tol: f64,
    max_iter: usize,
    seed_path: Option<&Path>,
) -> anyhow::Result<minimizer::MinimizeReport> {
    let seed = match seed_path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            DiscretePath::from_json(&text)?
        }
        None => {
            let ell0 = equipotential::euler_length(64, 14)?.ell0;
            let (i0, _) = action_bounds::optimal_test_action(ell0, period);
            equipotential::reduced_test_path(i0, period, segments)?
        }
    };
    let opts = MinimizeOptions {
        grad_tol: tol,
        max_iter,
        ..MinimizeOptions::default()
    };
    Ok(minimizer::minimize_with(&seed, &opts)?)
}

fn run_pipeline(
    segments: usize,
    period: f64,
    tol: f64,
    samples: usize,
    out_dir: &Path,
) -> anyhow::Result<bool> {
    if !(period > 0.0) || !(tol > 0.0) || segments < 8 {
        bail!("--period and --tol must be positive and --segments >= 8");
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    eprintln!("[1/6] equipotential length");
    let length = equipotential::euler_length(64, 14)?;

    eprintln!("[2/6] action bounds");
    let bounds = action_bounds::bounds_report(length.ell0, period);
    if !bounds.gate_passed {
        bail!("gate failed: test action does not undercut the collision bound");
    }

    eprintln!("[3/6] action minimization ({segments} segments)");
    let minimized = minimize_arc(segments, period, tol, 50_000, None)?;
    std::fs::write(out_dir.join("arc.json"), minimized.path.to_json())?;

    eprintln!("[4/6] orbit assembly");
    let orbit = orbit_builder::build_orbit(&minimized.path)?;
    std::fs::write(out_dir.join("orbit.json"), orbit.to_json())?;

    eprintln!("[5/6] integration from the published initial conditions");
    let s0 = integrator::simo_initial_state();
    let traj = integrator::integrate(&s0, SIMO_PERIOD, 1e-12, samples)?;
    std::fs::write(out_dir.join("trajectory.csv"), trajectory_csv(&traj))?;
    let defect = integrator::state_distance(traj.start(), traj.end());

    eprintln!("[6/6] verification");
    let mut report = verification::verify_trajectory(&traj, length.ell0)?;
    report.extend(verification::verify_orbit(&orbit)?.entries);
    let hausdorff = verification::cross_validate(&orbit, &traj)?;
    report.entries.push(verification::CheckEntry {
        name: "cross-validation Hausdorff distance".into(),
        measured: hausdorff,
        bound: 1e-3,
        passed: hausdorff < 1e-3,
    });

    let combined = combined_report_json(&length, &bounds, &minimized, defect, &report);
    std::fs::write(out_dir.join("report.json"), &combined)?;
    println!("{combined}");
    Ok(report.passed())
}

// ---------------------------------------------------------------------------
// Serialization helpers (floats at 17 significant digits throughout)
// ---------------------------------------------------------------------------

fn length_json(r: &equipotential::LengthResult) -> String {
    format!(
        "{{\n  \"ell0\": {:.16e},\n  \"samples\": {},\n  \"estimated_error\": {:.16e}\n}}",
        r.ell0, r.samples, r.estimated_error
    )
}

fn bounds_json(r: &action_bounds::BoundsReport) -> String {
    format!(
        "{{\n  \"T\": {:.16e},\n  \"ell0\": {:.16e},\n  \"A2\": {:.16e},\n  \"A3\": {:.16e},\n  \
         \"I0_star\": {:.16e},\n  \"a\": {:.16e},\n  \"gate_passed\": {}\n}}",
        r.t, r.ell0, r.a2, r.a3, r.i0_star, r.a, r.gate_passed
    )
}

fn combined_report_json(
    length: &equipotential::LengthResult,
    bounds: &action_bounds::BoundsReport,
    minimized: &minimizer::MinimizeReport,
    periodicity_defect: f64,
    verification: &VerificationReport,
) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"ell0\": {:.16e},\n", length.ell0));
    out.push_str(&format!("  \"A2\": {:.16e},\n", bounds.a2));
    out.push_str(&format!("  \"A3\": {:.16e},\n", bounds.a3));
    out.push_str(&format!("  \"a\": {:.16e},\n", bounds.a));
    out.push_str(&format!("  \"I0_star\": {:.16e},\n", bounds.i0_star));
    out.push_str(&format!("  \"gate_passed\": {},\n", bounds.gate_passed));
    out.push_str(&format!("  \"A_min\": {:.16e},\n", minimized.action));
    out.push_str(&format!(
        "  \"minimizer_gradient_norm\": {:.16e},\n",
        minimized.gradient_norm
    ));
    out.push_str(&format!(
        "  \"min_separation\": {:.16e},\n",
        minimized.min_separation
    ));
    out.push_str(&format!(
        "  \"max_angular_momentum\": {:.16e},\n",
        minimized.max_angular_momentum
    ));
    out.push_str(&format!(
        "  \"periodicity_defect\": {:.16e},\n",
        periodicity_defect
    ));
    let inner = verification.to_json();
    out.push_str("  \"verification\": ");
    out.push_str(inner.trim_end().replace('\n', "\n  ").as_str());
    out.push_str("\n}\n");
    out
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.times().len() * 400);
    out.push_str(
        "t,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im,v1_re,v1_im,v2_re,v2_im,v3_re,v3_im,I,U,H,C\n",
    );
    for (t, s) in traj.times().iter().zip(traj.states()) {
        out.push_str(&format!("{t:.16e}"));
        for i in 0..3 {
            out.push_str(&format!(",{:.16e},{:.16e}", s.q.body(i).x, s.q.body(i).y));
        }
        for i in 0..3 {
            out.push_str(&format!(",{:.16e},{:.16e}", s.v.body(i).x, s.v.body(i).y));
        }
        let u = s.q.potential().unwrap_or(f64::INFINITY);
        out.push_str(&format!(
            ",{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.q.moment_of_inertia(),
            u,
            0.5 * s.kinetic() - u,
            s.angular_momentum()
        ));
    }
    out
}

fn parse_trajectory_csv(text: &str) -> anyhow::Result<(Vec<f64>, Vec<State>)> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if !line.starts_with("t,") {
                bail!("trajectory CSV must start with the standard header");
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("CSV line {}", lineno + 1))?;
        if cols.len() != 17 {
            bail!(
                "CSV line {} has {} columns, expected 17",
                lineno + 1,
                cols.len()
            );
        }
        times.push(cols[0]);
        let q = Configuration::new([
            Vec2::new(cols[1], cols[2]),
            Vec2::new(cols[3], cols[4]),
            Vec2::new(cols[5], cols[6]),
        ])?;
        let v = Configuration::new([
            Vec2::new(cols[7], cols[8]),
            Vec2::new(cols[9], cols[10]),
            Vec2::new(cols[11], cols[12]),
        ])?;
        states.push(State::new(q, v));
    }
    Ok((times, states))
}

fn verify_file(input: &Path, ell0_spec: &str) -> anyhow::Result<VerificationReport> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    if input.extension().and_then(|e| e.to_str()) == Some("csv") {
        let (times, states) = parse_trajectory_csv(&text)?;
        let traj = Trajectory::from_samples(times, states)?;
        let ell0 = resolve_ell0(ell0_spec)?;
        Ok(verification::verify_trajectory(&traj, ell0)?)
    } else {
        let orbit = Orbit::from_json(&text)?;
        Ok(verification::verify_orbit(&orbit)?)
    }
}

fn orbit_csv(orbit: &Orbit) -> String {
    let mut out = String::from("t,q_re,q_im\n");
    let h = orbit.sample_step();
    for (i, v) in orbit.q.iter().enumerate() {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", i as f64 * h, v.x, v.y));
    }
    out
}

fn orbit_svg(orbit: &Orbit) -> anyhow::Result<String> {
    let polyline = |pts: &[(f64, f64)], x0: f64, y0: f64, w: f64, h: f64| -> String {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        let sx = w / (xmax - xmin).max(1e-12);
        let sy = h / (ymax - ymin).max(1e-12);
        let s = sx.min(sy);
        let mut points = String::new();
        for &(x, y) in pts {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x0 + (x - xmin) * s,
                y0 + h - (y - ymin) * s
            ));
        }
        format!(
            "<polyline fill=\"none\" stroke=\"#20507a\" stroke-width=\"1.2\" points=\"{}\"/>",
            points.trim_end()
        )
    };

    let mut q_pts: Vec<(f64, f64)> = orbit.q.iter().map(|v| (v.x, v.y)).collect();
    q_pts.push(q_pts[0]);
    let shape_pts = orbit_builder::shape_curve(orbit)?;
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1040 420\">\n\
         <rect width=\"1040\" height=\"420\" fill=\"white\"/>\n\
         <text x=\"250\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">choreography curve q(t)</text>\n{}\n\
         <text x=\"770\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">shape-sphere curve (theta, phi)</text>\n{}\n</svg>\n",
        polyline(&q_pts, 30.0, 50.0, 440.0, 330.0),
        polyline(&shape_pts, 550.0, 50.0, 440.0, 330.0),
    ))
}
