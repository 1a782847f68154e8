//! Scans of loop-measure connection masses against their asymptotics.

use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::output::{ScanResult, ScanRow};
use crate::error::{Error, Result};
use crate::greens::GreenTable;
use crate::lattice::{Ball, Point};
use crate::loopmeasure::{far_connect_mass, loop_mass_connect, loop_range_stats, ConnectEstimate, LengthTable, Target};
use super::cluster::replica_base;
use crate::rng::{batched, tag, BATCH};
use crate::soup::{explore_origin_cluster, ExploreStop};
use crate::stats::{clopper_pearson, proportion, Diagnostics, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaKind {
    /// `mu[{0} <-> ∂B_n]` against `C_d Cap({0}) n^{2-d}`.
    SingleLoop,
    /// `mu[{0} <-> {x}]` against `C_d^2 Cap({0})^2 |x|^{4-2d}` and the
    /// exact first term `(G(x) / G(0))^2`.
    TwoSets,
    /// `mu[0, x in omega, diam(omega) > m]` against `m^{2-d} |x|^{2-d}`.
    FarConnect,
    /// `P(0 <-> ∂B_n)` through loops of diameter at most `m`, as a
    /// function of `n / m`.
    ShortLoops,
    /// Mean range of loops through 0 with diameter above `m`, against `m^2`.
    Range,
}

impl FromStr for LemmaKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<LemmaKind, String> {
        match s.replace('-', "_").as_str() {
            "single_loop" => Ok(LemmaKind::SingleLoop),
            "two_sets" => Ok(LemmaKind::TwoSets),
            "far_connect" => Ok(LemmaKind::FarConnect),
            "short_loops" => Ok(LemmaKind::ShortLoops),
            "range" => Ok(LemmaKind::Range),
            other => Err(format!(
                "unknown lemma kind {other:?} (single-loop, two-sets, far-connect, short-loops, range)"
            )),
        }
    }
}

impl LemmaKind {
    pub fn name(&self) -> &'static str {
        match self {
            LemmaKind::SingleLoop => "single_loop",
            LemmaKind::TwoSets => "two_sets",
            LemmaKind::FarConnect => "far_connect",
            LemmaKind::ShortLoops => "short_loops",
            LemmaKind::Range => "range",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaParams {
    pub kind: LemmaKind,
    /// `n` for sphere targets, `|x|` for point targets.
    pub radii: Vec<i64>,
    /// Diameter thresholds (`far_connect`, `range`; the first entry for
    /// `short_loops`).
    pub m: Vec<f64>,
    /// Activity for `short_loops`.
    pub alpha: f64,
    pub samples: u64,
    pub seed: u64,
    /// Kill radius as a multiple of the query scale; defaults to 4.
    pub kill_factor: Option<f64>,
}

impl LemmaParams {
    pub fn new(kind: LemmaKind, samples: u64, seed: u64) -> LemmaParams {
        LemmaParams { kind, radii: Vec::new(), m: Vec::new(), alpha: 0.0, samples, seed, kill_factor: None }
    }

    pub fn radii(mut self, r: &[i64]) -> LemmaParams {
        self.radii = r.to_vec();
        self
    }

    pub fn m(mut self, m: &[f64]) -> LemmaParams {
        self.m = m.to_vec();
        self
    }

    pub fn alpha(mut self, alpha: f64) -> LemmaParams {
        self.alpha = alpha;
        self
    }

    pub fn kill_factor(mut self, f: f64) -> LemmaParams {
        self.kill_factor = Some(f);
        self
    }

    fn kill_radius(&self, scale: f64) -> i64 {
        let f = self.kill_factor.unwrap_or(4.0);
        ((f * scale).ceil() as i64).max(scale.ceil() as i64 + 2)
    }
}

fn connect_row(param: f64, c: ConnectEstimate, reference: f64) -> ScanRow {
    let rel = c.relative_higher_order_bound();
    ScanRow::new(param, c.estimate, reference)
        .with("lower", c.lower)
        .with("upper", c.upper)
        .with("higher_order_bound", c.higher_order_bound)
        .with("relative_higher_order_bound", rel)
        .with("return_bound", c.return_bound)
        .with("kill_radius", c.kill_radius as f64)
}

pub fn lemma_scan(greens: &GreenTable, table: &LengthTable, p: &LemmaParams) -> Result<ScanResult> {
    let d = greens.dim();
    if table.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: table.dim() });
    }
    if p.radii.is_empty() && p.kind != LemmaKind::Range {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if p.m.is_empty() && matches!(p.kind, LemmaKind::FarConnect | LemmaKind::ShortLoops | LemmaKind::Range) {
        return Err(Error::InvalidArgument("no diameter thresholds given".into()));
    }
    let o = Point::origin(d);
    let g0 = greens.at_origin();
    let cap0 = 1.0 / g0;
    let cd = greens.constant();
    let mut out = ScanResult::new(&format!("lemma_{}", p.kind.name()))
        .meta("d", d)
        .meta("params", p)
        .meta("l_max", table.l_max())
        .meta("tail_bound", table.tail_bound())
        .meta("green_origin", g0)
        .meta("green_constant", cd);

    match p.kind {
        LemmaKind::SingleLoop => {
            for &n in &p.radii {
                let target = Target::Sphere(Ball::centered(d, n));
                let c = loop_mass_connect(greens, &[o], &target, p.kill_radius(n as f64), p.samples, p.seed)?;
                let reference = cd * cap0 * (n as f64).powi(2 - d as i32);
                out.rows.push(connect_row(n as f64, c, reference));
            }
        }
        LemmaKind::TwoSets => {
            for &xn in &p.radii {
                let x = Point::on_axis(d, xn as i32);
                let target = Target::Points(vec![x]);
                let c = loop_mass_connect(greens, &[o], &target, p.kill_radius(xn as f64), p.samples, p.seed)?;
                let reference = cd * cd * cap0 * cap0 * (xn as f64).powi(4 - 2 * d as i32);
                let exact = (greens.value(&x) / g0).powi(2);
                let z = (c.estimate.value - exact).abs() / c.estimate.std_error;
                out.rows.push(connect_row(xn as f64, c, reference).with("exact_first_term", exact).with("z_exact", z));
            }
        }
        LemmaKind::FarConnect => {
            for &xn in &p.radii {
                let x = Point::on_axis(d, xn as i32);
                for &m in &p.m {
                    let e = far_connect_mass(table, &x, m, p.samples, p.seed)?;
                    let reference = m.powi(2 - d as i32) * (xn as f64).powi(2 - d as i32);
                    out.rows.push(ScanRow::new(m, e, reference).with("x_norm", xn as f64));
                }
            }
        }
        LemmaKind::ShortLoops => {
            let m = p.m[0];
            let mut pts = Vec::new();
            // radii with fewer than 10 successes
            let mut flagged = Vec::new();
            for &n in &p.radii {
                let start = Instant::now();
                let ball = Ball::centered(d, n);
                let base = replica_base(&[tag::SCAN, 5, n as u64, m.to_bits()]);
                let parts = batched(p.samples, BATCH, |b, k| -> Result<u64> {
                    let mut hits = 0;
                    for i in 0..k {
                        let e = explore_origin_cluster(
                            table,
                            p.alpha,
                            &ball,
                            ExploreStop::AtBoundary,
                            |l| !l.diameter_exceeds(m),
                            p.seed,
                            base + b * BATCH + i,
                        )?;
                        hits += e.stopped as u64;
                    }
                    Ok(hits)
                });
                let mut hits = 0;
                for h in parts {
                    hits += h?;
                }
                let (prob, se) = proportion(hits, p.samples);
                let est = Estimate {
                    value: prob,
                    std_error: se,
                    samples: p.samples,
                    seed: p.seed,
                    diagnostics: Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: 0.0 },
                    wall_time_s: start.elapsed().as_secs_f64(),
                };
                let ratio_nm = n as f64 / m;
                if hits > 0 {
                    pts.push((ratio_nm, prob.ln(), se / prob));
                }
                let (lo, hi) = clopper_pearson(hits, p.samples, 0.05);
                if hits < 10 {
                    flagged.push(n);
                }
                out.rows.push(
                    ScanRow::new(ratio_nm, est, f64::NAN)
                        .with("n", n as f64)
                        .with("m", m)
                        .with("successes", hits as f64)
                        .with("cp_low", lo)
                        .with("cp_high", hi),
                );
            }
            let (slope, slope_se) = weighted_slope(&pts);
            out.set_meta("decay_slope", slope);
            out.set_meta("decay_slope_std_error", slope_se);
            out.set_meta("decaying", slope < 0.0);
            out.set_meta("insufficient_hits", flagged);
        }
        LemmaKind::Range => {
            for &m in &p.m {
                let e = loop_range_stats(table, m, p.samples, p.seed)?;
                out.rows.push(ScanRow::new(m, e, m * m));
            }
            let ratios: Vec<f64> = out.rows.iter().map(|r| r.ratio).collect();
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
            out.set_meta("ratio_spread", hi / lo);
        }
    }
    Ok(out)
}

/// Weighted least-squares slope of `y` on `x` with standard errors `s`.
pub fn weighted_slope(pts: &[(f64, f64, f64)]) -> (f64, f64) {
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, s) in pts {
        let w = 1.0 / (s * s).max(1e-300);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    ((sw * sxy - sx * sy) / det, (sw / det).sqrt())
}
