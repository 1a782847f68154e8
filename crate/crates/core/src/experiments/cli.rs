//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or argument error, 2 numerical failure,
//! 3 failed verification.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::checks::{verify_fkg, verify_mecke};
use super::cluster::{capacity_first_order, expected_cluster_capacity, one_arm_scan, two_point_scan, ScanSettings};
use super::lemma::{lemma_scan, LemmaKind, LemmaParams};
use super::output::{software_version, Format, Record};
use crate::error::{Error, Result};
use crate::greens::{capacity, GreenTable};
use crate::lattice::{Ball, Point};
use crate::loopmeasure::{LengthTable, DEFAULT_LMAX};
use crate::soup::{sample_soup, SoupHeader, SoupParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Relative tail bound above which the length table prints a warning.
const TABLE_TOLERANCE: f64 = 1e-3;

#[derive(Parser, Debug, Serialize)]
#[command(name = "loopsoup", version = software_version(), about = "Loop-soup percolation on Z^d")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Global {
    /// Lattice dimension.
    #[arg(long, global = true, default_value_t = 3)]
    dim: usize,
    /// Soup intensity.
    #[arg(long, global = true, default_value_t = 0.2)]
    alpha: f64,
    /// Loop length cutoff (default depends on the subcommand).
    #[arg(long, global = true)]
    lmax: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo sample count (default depends on the subcommand).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// G(0), C_d and G at the given points.
    Green {
        /// Points as comma-separated coordinates, e.g. `3,1,0`.
        #[arg(long = "point", value_delimiter = ';')]
        points: Vec<String>,
    },
    /// Capacity and equilibrium measure of a finite set.
    Capacity {
        /// Points separated by `;`, e.g. `0,0,0;1,0,0`.
        #[arg(long, value_delimiter = ';', conflicts_with = "ball")]
        points: Vec<String>,
        /// Use the lattice ball of this radius around the origin.
        #[arg(long)]
        ball: Option<i64>,
    },
    /// Return probabilities and per-vertex loop mass.
    Table {
        /// Also write the full table in its JSON file format.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Print p_k for k = 2, 4, ..., up to this length.
        #[arg(long, default_value_t = 10)]
        show: usize,
    },
    /// Sample one soup and dump it as JSON lines (lmax defaults to 4 x window).
    Soup {
        #[arg(long, default_value_t = 6)]
        window: i64,
        #[arg(long, default_value_t = 0)]
        replica: u64,
    },
    /// P(0 <-> ∂B_n) against alpha C_d E[Cap] n^{2-d}.
    OneArm {
        #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
        n: Vec<i64>,
        #[command(flatten)]
        cap: CapArgs,
        /// Localisation radius as a fraction of n.
        #[arg(long, default_value_t = 0.5)]
        localization_fraction: f64,
    },
    /// P(0 <-> x) against alpha C_d^2 E[Cap]^2 |x|^{4-2d}.
    TwoPoint {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        x: Vec<i64>,
        /// Exploration window radius as a multiple of |x|.
        #[arg(long, default_value_t = 2.0)]
        window_factor: f64,
        #[command(flatten)]
        cap: CapArgs,
    },
    /// E[Cap(C_0 ∪ {0})] by cluster exploration.
    ClusterCapacity {
        #[arg(long, default_value_t = 16)]
        window: i64,
        /// Also estimate the one-loop first-order coefficient.
        #[arg(long)]
        first_order: bool,
    },
    /// Loop-measure connection masses against their asymptotics.
    Lemma {
        #[arg(long)]
        kind: LemmaKind,
        /// n (sphere targets) or |x| (point targets).
        #[arg(long, value_delimiter = ',')]
        radii: Vec<i64>,
        /// Diameter thresholds.
        #[arg(long, value_delimiter = ',')]
        m: Vec<f64>,
        /// Kill radius as a multiple of the scale.
        #[arg(long)]
        kill_factor: Option<f64>,
    },
    /// Mecke and FKG checks; exit 3 if any fails (lmax defaults to 6).
    Verify {
        /// Root window radius of the Mecke check.
        #[arg(long, default_value_t = 1)]
        mecke_window: i64,
        /// Window radius of the FKG check (default lmax / 2 + 2).
        #[arg(long)]
        fkg_window: Option<i64>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct CapArgs {
    /// Replicas for the E[Cap] reference value.
    #[arg(long, default_value_t = 20_000)]
    cap_samples: u64,
    /// Exploration radius for the E[Cap] reference value.
    #[arg(long, default_value_t = 16)]
    cap_window: i64,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.global.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::IllConditioned { .. }
        | Error::Numerical(_)
        | Error::BoundaryTouch { .. }
        | Error::MemoryBudget { .. }
        | Error::InsufficientSamples { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn parse_point(s: &str, d: usize) -> Result<Point> {
    let coords: std::result::Result<Vec<i32>, _> = s.split(',').map(|c| c.trim().parse::<i32>()).collect();
    let coords = coords.map_err(|e| Error::InvalidArgument(format!("bad point {s:?}: {e}")))?;
    if coords.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: coords.len() });
    }
    Ok(Point::new(&coords))
}

fn build_table(d: usize, l_max: usize) -> Result<LengthTable> {
    let t = LengthTable::build(d, l_max, TABLE_TOLERANCE)?;
    if let Some(w) = t.warning() {
        eprintln!("warning: {w}");
    }
    Ok(t)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let d = g.dim;
    let l_max = g.lmax.unwrap_or(DEFAULT_LMAX);
    let out = sink(&g.out)?;
    let params = serde_json::to_value(cli)?;
    let record = |kind: &str| Record::new(kind).meta("params", &params).meta("seed", g.seed).meta("d", d);

    match &cli.command {
        Command::Green { points } => {
            let greens = GreenTable::new(d)?;
            let mut r = record("green").value("green_origin", greens.at_origin()).value("green_constant", greens.constant());
            for p in points {
                let x = parse_point(p, d)?;
                r = r.value(&format!("green[{p}]"), greens.value(&x));
            }
            r.write(out, g.format)?;
        }
        Command::Capacity { points, ball } => {
            let greens = GreenTable::new(d)?;
            let set = match ball {
                Some(r) => Ball::centered(d, *r).points(),
                None if points.is_empty() => vec![Point::origin(d)],
                None => points.iter().map(|p| parse_point(p, d)).collect::<Result<_>>()?,
            };
            let c = capacity(&greens, &set)?;
            record("capacity")
                .value("capacity", c.capacity)
                .value("residual", c.residual)
                .value("points", c.points.len())
                .value("capacity_origin", 1.0 / greens.at_origin())
                .value("equilibrium", &c.equilibrium)
                .write(out, g.format)?;
        }
        Command::Table { save, show } => {
            let t = build_table(d, l_max)?;
            if let Some(path) = save {
                t.save_json(path)?;
            }
            let mut r = record("table")
                .meta("l_max", t.l_max())
                .value("m_d", t.mass())
                .value("tail_bound", t.tail_bound())
                .value("return_mass", t.return_mass());
            if let Some(w) = t.warning() {
                r = r.value("warning", w);
            }
            for k in (2..=(*show).min(t.l_max())).step_by(2) {
                r = r.value(&format!("p_{k}"), t.return_probability(k));
            }
            r.write(out, g.format)?;
        }
        Command::Soup { window, replica } => {
            let t = build_table(d, g.lmax.unwrap_or(4 * (*window).max(1) as usize))?;
            let params = SoupParams::new(g.alpha, Ball::centered(d, *window), g.seed).replica(*replica);
            let soup = sample_soup(&params, &t)?;
            let header = SoupHeader::new(&params, &t, &soup, software_version());
            soup.write_jsonl(out, &header)?;
        }
        Command::OneArm { n, cap, localization_fraction } => {
            let greens = GreenTable::new(d)?;
            let t = build_table(d, l_max)?;
            let mut s = settings(g, cap, 100_000);
            s.localization_fraction = *localization_fraction;
            one_arm_scan(&greens, &t, n, &s)?.meta("params", &params).write(out, g.format)?;
        }
        Command::TwoPoint { x, window_factor, cap } => {
            let greens = GreenTable::new(d)?;
            let t = build_table(d, l_max)?;
            let s = settings(g, cap, 100_000);
            two_point_scan(&greens, &t, x, *window_factor, &s)?.meta("params", &params).write(out, g.format)?;
        }
        Command::ClusterCapacity { window, first_order } => {
            let greens = GreenTable::new(d)?;
            let t = build_table(d, l_max)?;
            let samples = g.samples.unwrap_or(20_000);
            let c = expected_cluster_capacity(&greens, &t, g.alpha, *window, samples, g.seed)?;
            let mut r = record("cluster_capacity")
                .meta("alpha", g.alpha)
                .meta("samples", samples)
                .meta("l_max", t.l_max())
                .meta("tail_bound", t.tail_bound())
                .meta("boundary_touch_rate", c.estimate.diagnostics.boundary_touch_rate)
                .value("estimate", c.estimate.value)
                .value("std_error", c.estimate.std_error)
                .value("capacity_origin", c.cap_origin)
                .value("touched", c.touched)
                .value("touched_mean", c.touched_mean)
                .value("upper", c.upper)
                .value("oversized", c.oversized)
                .value("largest_cluster", c.largest_cluster);
            if *first_order {
                let f = capacity_first_order(&greens, &t, samples, g.seed)?;
                r = r
                    .value("first_order_coefficient", f.estimate.value)
                    .value("first_order_std_error", f.estimate.std_error)
                    .value("first_order_upper", f.upper)
                    .value("first_order_prediction", c.cap_origin + g.alpha * f.estimate.value);
            }
            r.write(out, g.format)?;
        }
        Command::Lemma { kind, radii, m, kill_factor } => {
            let greens = GreenTable::new(d)?;
            let t = build_table(d, l_max)?;
            let mut p = LemmaParams::new(*kind, g.samples.unwrap_or(100_000), g.seed)
                .radii(radii)
                .m(m)
                .alpha(g.alpha);
            if let Some(f) = kill_factor {
                p = p.kill_factor(*f);
            }
            lemma_scan(&greens, &t, &p)?.meta("params", &params).write(out, g.format)?;
        }
        Command::Verify { mecke_window, fkg_window } => {
            let l_max = g.lmax.unwrap_or(6);
            let t = build_table(d, l_max)?;
            let samples = g.samples.unwrap_or(20_000);
            let mecke = verify_mecke(&t, g.alpha, &Ball::centered(d, *mecke_window), samples, g.seed)?;
            let fkg_w = fkg_window.unwrap_or(l_max as i64 / 2 + 2);
            let fkg = verify_fkg(&t, g.alpha, fkg_w, samples, g.seed)?;
            let passed = mecke.passed && fkg.passed;
            for rep in [&mecke, &fkg] {
                for row in &rep.rows {
                    eprintln!(
                        "{} {}: lhs {:.6} rhs {:.6} z {:.2} {}",
                        rep.name,
                        row.name,
                        row.lhs,
                        row.rhs,
                        row.z,
                        if row.passed { "ok" } else { "FAIL" }
                    );
                }
            }
            // wall times would break byte-for-byte reproducibility
            let strip = |v: serde_json::Value| {
                let mut v = v;
                if let Some(o) = v.as_object_mut() {
                    o.remove("wall_time_s");
                }
                v
            };
            let mut r = record("verify")
                .meta("alpha", g.alpha)
                .meta("samples", samples)
                .meta("l_max", t.l_max())
                .meta("tail_bound", t.tail_bound())
                .value("passed", passed)
                .value("mecke_passed", mecke.passed)
                .value("fkg_passed", fkg.passed);
            if g.format == Format::Json {
                r = r.value("mecke", strip(serde_json::to_value(&mecke)?)).value("fkg", strip(serde_json::to_value(&fkg)?));
            } else {
                for rep in [&mecke, &fkg] {
                    for row in &rep.rows {
                        r = r.value(&format!("{}.{}.z", rep.name, row.name), row.z);
                    }
                }
            }
            r.write(out, g.format)?;
            if !passed {
                return Ok(EXIT_VERIFY);
            }
        }
    }
    Ok(EXIT_OK)
}

fn settings(g: &Global, cap: &CapArgs, default_samples: u64) -> ScanSettings {
    let mut s = ScanSettings::new(g.alpha, g.samples.unwrap_or(default_samples), g.seed);
    s.cap_samples = cap.cap_samples;
    s.cap_window = cap.cap_window;
    s
}
