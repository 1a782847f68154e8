//! Cluster-level Monte Carlo: expected capacity of the origin cluster,
//! one-arm and two-point scans.
//!
//! Every replica is an independent exploration of the origin cluster
//! (see [`explore_origin_cluster`]); replica `r` of a scan point uses its
//! own substreams, so results do not depend on the thread count.

use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::output::{ScanResult, ScanRow};
use crate::error::{Error, Result};
use crate::greens::{capacity_bracket, GreenTable};
use crate::lattice::{Ball, Point};
use crate::loopmeasure::{sample_loop_through, LengthTable, Loop};
use crate::percolation::build_clusters;
use crate::rng::{batched, stream_id, substream, tag, BATCH};
use crate::soup::{explore_origin_cluster, ExploreStop};
use crate::stats::{clopper_pearson, proportion, Diagnostics, Estimate, MeanAccumulator};

/// Largest tolerated fraction of replicas whose cluster meets the window
/// boundary.
pub const MAX_TOUCH_RATE: f64 = 0.01;

#[derive(Clone, Debug, Serialize)]
pub struct ClusterCapacity {
    /// Mean of the per-replica lower capacity brackets; exact when no
    /// cluster is oversized.
    pub estimate: Estimate,
    /// Mean of the per-replica upper brackets.
    pub upper: f64,
    /// Replicas whose cluster exceeded the direct capacity solve.
    pub oversized: u64,
    /// `Cap({0}) = 1 / G(0)`.
    pub cap_origin: f64,
    /// Replicas whose cluster met the window boundary.
    pub touched: u64,
    /// Mean capacity over touching replicas only (a lower bracket for
    /// their true capacity, since capacity is monotone).
    pub touched_mean: f64,
    pub largest_cluster: usize,
}

/// Replica index space of one scan point.
pub(crate) fn replica_base(label: &[u64]) -> u64 {
    stream_id(label) & 0xffff_ffff_0000_0000
}

/// `E[Cap(C_0 ∪ {0})]` over `samples` explorations inside
/// `B_window_radius`.
pub fn expected_cluster_capacity(
    greens: &GreenTable,
    table: &LengthTable,
    alpha: f64,
    window_radius: i64,
    samples: u64,
    seed: u64,
) -> Result<ClusterCapacity> {
    let start = Instant::now();
    if greens.dim() != table.dim() {
        return Err(Error::DimensionMismatch { expected: greens.dim(), got: table.dim() });
    }
    let ball = Ball::centered(table.dim(), window_radius);
    let base = replica_base(&[tag::SCAN, 1, window_radius as u64, alpha.to_bits()]);
    let cap0 = 1.0 / greens.at_origin();
    let o = Point::origin(table.dim());
    let parts = batched(samples, BATCH, |b, n| -> Result<(MeanAccumulator, MeanAccumulator, MeanAccumulator, u64, usize)> {
        let mut all = MeanAccumulator::new();
        let mut upper = MeanAccumulator::new();
        let mut touched = MeanAccumulator::new();
        let mut oversized = 0;
        let mut largest = 1;
        for i in 0..n {
            let r = base + b * BATCH + i;
            let e = explore_origin_cluster(table, alpha, &ball, ExploreStop::Never, |_| true, seed, r)?;
            let (lo, hi) = if e.cluster.len() == 1 { (cap0, cap0) } else { capacity_bracket(greens, e.cluster.vertices(), &o)? };
            largest = largest.max(e.cluster.len());
            oversized += (hi > lo) as u64;
            all.push(lo);
            upper.push(hi);
            if e.cluster.touched_window_boundary() {
                touched.push(lo);
            }
        }
        Ok((all, upper, touched, oversized, largest))
    });
    let mut all = MeanAccumulator::new();
    let mut upper = MeanAccumulator::new();
    let mut touched = MeanAccumulator::new();
    let mut oversized = 0;
    let mut largest = 1;
    for p in parts {
        let (a, u, t, ov, l) = p?;
        all.merge(&a);
        upper.merge(&u);
        touched.merge(&t);
        oversized += ov;
        largest = largest.max(l);
    }
    let rate = touched.count() as f64 / all.count().max(1) as f64;
    if rate >= MAX_TOUCH_RATE {
        return Err(Error::BoundaryTouch { rate, limit: MAX_TOUCH_RATE });
    }
    let diagnostics = Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: rate };
    Ok(ClusterCapacity {
        estimate: Estimate::from_accumulator(&all, seed, diagnostics).with_wall_time(start.elapsed().as_secs_f64()),
        upper: upper.mean(),
        oversized,
        cap_origin: cap0,
        touched: touched.count(),
        touched_mean: touched.mean(),
        largest_cluster: largest,
    })
}

/// One-loop coefficient with its bracket; see [`capacity_first_order`].
#[derive(Clone, Debug, Serialize)]
pub struct FirstOrder {
    /// From the lower capacity brackets; exact when nothing is oversized.
    pub estimate: Estimate,
    /// Same from the upper brackets.
    pub upper: f64,
    /// Sampled loops whose range exceeded the direct capacity solve.
    pub oversized: u64,
}

/// First-order coefficient `c_1` in `E[Cap] = Cap({0}) + alpha c_1 + O(alpha^2)`:
/// `c_1 = int mu(d omega) 1{0 in omega} (Cap(R(omega) ∪ {0}) - Cap({0}))`,
/// estimated from loops through the origin.
pub fn capacity_first_order(greens: &GreenTable, table: &LengthTable, samples: u64, seed: u64) -> Result<FirstOrder> {
    let start = Instant::now();
    let o = Point::origin(table.dim());
    let cap0 = 1.0 / greens.at_origin();
    let rate = table.return_mass();
    let parts = batched(samples, BATCH, |b, n| -> Result<(MeanAccumulator, MeanAccumulator, u64)> {
        let mut rng = substream(seed, &[tag::LOOP_SAMPLE, 7, b]);
        let (mut lo_acc, mut hi_acc, mut oversized) = (MeanAccumulator::new(), MeanAccumulator::new(), 0);
        for _ in 0..n {
            let (lo, hi) = match sample_loop_through(o, table, &mut rng) {
                None => (0.0, 0.0),
                Some(l) => {
                    let mut pts = l.range();
                    if let Err(i) = pts.binary_search(&o) {
                        pts.insert(i, o);
                    }
                    let (lo, hi) = capacity_bracket(greens, &pts, &o)?;
                    oversized += (hi > lo) as u64;
                    (rate * (lo - cap0), rate * (hi - cap0))
                }
            };
            lo_acc.push(lo);
            hi_acc.push(hi);
        }
        Ok((lo_acc, hi_acc, oversized))
    });
    let (mut lo, mut hi, mut oversized) = (MeanAccumulator::new(), MeanAccumulator::new(), 0);
    for p in parts {
        let (l, h, o) = p?;
        lo.merge(&l);
        hi.merge(&h);
        oversized += o;
    }
    let diagnostics = Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: 0.0 };
    Ok(FirstOrder {
        estimate: Estimate::from_accumulator(&lo, seed, diagnostics).with_wall_time(start.elapsed().as_secs_f64()),
        upper: hi.mean(),
        oversized,
    })
}

/// Settings shared by the one-arm and two-point scans.
#[derive(Clone, Debug, Serialize)]
pub struct ScanSettings {
    pub alpha: f64,
    pub samples: u64,
    pub seed: u64,
    /// Replicas for the `E[Cap]` reference value.
    pub cap_samples: u64,
    /// Exploration radius for the `E[Cap]` reference value.
    pub cap_window: i64,
    /// Radius `K` of the localisation diagnostic, as a fraction of `n`.
    pub localization_fraction: f64,
}

impl ScanSettings {
    pub fn new(alpha: f64, samples: u64, seed: u64) -> ScanSettings {
        ScanSettings { alpha, samples, seed, cap_samples: 20_000, cap_window: 16, localization_fraction: 0.5 }
    }
}

fn base_meta(kind: &str, greens: &GreenTable, table: &LengthTable, s: &ScanSettings) -> ScanResult {
    ScanResult::new(kind)
        .meta("d", table.dim())
        .meta("alpha", s.alpha)
        .meta("seed", s.seed)
        .meta("samples", s.samples)
        .meta("l_max", table.l_max())
        .meta("m_d", table.mass())
        .meta("tail_bound", table.tail_bound())
        .meta("green_origin", greens.at_origin())
        .meta("green_constant", greens.constant())
        .meta("cap_samples", s.cap_samples)
        .meta("cap_window", s.cap_window)
}

/// Origin cluster in `η ∖ ω` for each loop `ω` of a fully explored cluster:
/// is any of them inside `B_k`?
fn localized_by_one_loop(loops: &[Loop], d: usize, k: i64) -> bool {
    let ball = Ball::centered(d, k);
    let o = Point::origin(d);
    (0..loops.len()).any(|skip| {
        let edges: Vec<_> = loops
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, l)| l.edges())
            .collect();
        build_clusters(&edges).component_of(&o).iter().all(|p| ball.contains(p))
    })
}

/// `P(0 <-> ∂B_n)` for each `n`, with reference `alpha C_d E[Cap] / n^{d-2}`.
///
/// Extra columns: the Clopper-Pearson 95% interval, `n^{d-2} P` with its
/// error, and among successes the fraction whose cluster is confined to
/// `B_K` after deleting a single loop.
pub fn one_arm_scan(greens: &GreenTable, table: &LengthTable, n_list: &[i64], s: &ScanSettings) -> Result<ScanResult> {
    let d = table.dim();
    let cap = expected_cluster_capacity(greens, table, s.alpha, s.cap_window, s.cap_samples, s.seed)?;
    let mut out = base_meta("one_arm", greens, table, s)
        .meta("expected_capacity", cap.estimate.value)
        .meta("expected_capacity_std_error", cap.estimate.std_error)
        .meta("localization_fraction", s.localization_fraction);
    for &n in n_list {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {n}")));
        }
        let start = Instant::now();
        let ball = Ball::centered(d, n);
        let big = Ball::centered(d, 2 * n);
        let k = ((n as f64) * s.localization_fraction).round() as i64;
        let base = replica_base(&[tag::SCAN, 2, n as u64]);
        let parts = batched(s.samples, BATCH, |b, m| -> Result<(u64, u64)> {
            let (mut hits, mut localized) = (0, 0);
            for i in 0..m {
                let r = base + b * BATCH + i;
                let e = explore_origin_cluster(table, s.alpha, &ball, ExploreStop::AtBoundary, |_| true, s.seed, r)?;
                if e.stopped {
                    hits += 1;
                    let full = explore_origin_cluster(table, s.alpha, &big, ExploreStop::Never, |_| true, s.seed, r)?;
                    localized += localized_by_one_loop(&full.loops, d, k) as u64;
                }
            }
            Ok((hits, localized))
        });
        let (mut hits, mut localized) = (0, 0);
        for p in parts {
            let (h, l) = p?;
            hits += h;
            localized += l;
        }
        let (p, se) = proportion(hits, s.samples);
        let (lo, hi) = clopper_pearson(hits, s.samples, 0.05);
        let scale = (n as f64).powi(d as i32 - 2);
        let estimate = Estimate {
            value: p,
            std_error: se,
            samples: s.samples,
            seed: s.seed,
            diagnostics: Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: 0.0 },
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        let reference = s.alpha * greens.constant() * cap.estimate.value / scale;
        let frac = if hits > 0 { localized as f64 / hits as f64 } else { f64::NAN };
        out.rows.push(
            ScanRow::new(n as f64, estimate, reference)
                .with("successes", hits as f64)
                .with("cp_low", lo)
                .with("cp_high", hi)
                .with("scaled", p * scale)
                .with("scaled_std_error", se * scale)
                .with("localized_fraction", frac),
        );
    }
    Ok(out)
}

/// `1 - exp(-alpha mu[edge traversed by a length-2 loop])`: the two
/// out-and-back loops over the edge `{0, x}` have total mass
/// `2 * (1/2) (2d)^{-2}`.
pub fn adjacent_lower_bound(alpha: f64, d: usize) -> f64 {
    1.0 - (-alpha / ((2 * d) as f64).powi(2)).exp()
}

/// `P(0 <-> x)` along the first axis, with reference
/// `alpha C_d^2 E[Cap]^2 / |x|^{2d-4}`; explorations run in
/// `B_{window_factor |x|}`.
pub fn two_point_scan(
    greens: &GreenTable,
    table: &LengthTable,
    x_list: &[i64],
    window_factor: f64,
    s: &ScanSettings,
) -> Result<ScanResult> {
    let d = table.dim();
    let cap = expected_cluster_capacity(greens, table, s.alpha, s.cap_window, s.cap_samples, s.seed)?;
    let mut out = base_meta("two_point", greens, table, s)
        .meta("expected_capacity", cap.estimate.value)
        .meta("expected_capacity_std_error", cap.estimate.std_error)
        .meta("window_factor", window_factor)
        .meta("adjacent_lower_bound", adjacent_lower_bound(s.alpha, d));
    for &xn in x_list {
        if xn < 1 {
            return Err(Error::InvalidArgument(format!("|x| must be positive, got {xn}")));
        }
        let start = Instant::now();
        let x = Point::on_axis(d, xn as i32);
        let radius = ((xn as f64) * window_factor).ceil() as i64;
        if radius <= xn {
            return Err(Error::WindowTooSmall { needed: xn + 1, radius });
        }
        let ball = Ball::centered(d, radius);
        let base = replica_base(&[tag::SCAN, 3, xn as u64]);
        let parts = batched(s.samples, BATCH, |b, m| -> Result<(u64, u64)> {
            let (mut hits, mut touched) = (0, 0);
            for i in 0..m {
                let r = base + b * BATCH + i;
                let e = explore_origin_cluster(table, s.alpha, &ball, ExploreStop::AtPoint(x), |_| true, s.seed, r)?;
                hits += e.stopped as u64;
                touched += (!e.stopped && e.cluster.touched_window_boundary()) as u64;
            }
            Ok((hits, touched))
        });
        let (mut hits, mut touched) = (0, 0);
        for p in parts {
            let (h, t) = p?;
            hits += h;
            touched += t;
        }
        let (p, se) = proportion(hits, s.samples);
        let (lo, hi) = clopper_pearson(hits, s.samples, 0.05);
        let scale = (xn as f64).powi(2 * d as i32 - 4);
        let estimate = Estimate {
            value: p,
            std_error: se,
            samples: s.samples,
            seed: s.seed,
            diagnostics: Diagnostics {
                tail_bound: table.tail_bound(),
                boundary_touch_rate: touched as f64 / s.samples as f64,
            },
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        let reference = s.alpha * greens.constant().powi(2) * cap.estimate.value.powi(2) / scale;
        out.rows.push(
            ScanRow::new(xn as f64, estimate, reference)
                .with("successes", hits as f64)
                .with("cp_low", lo)
                .with("cp_high", hi)
                .with("scaled", p * scale)
                .with("scaled_std_error", se * scale)
                .with("scaled_order", p * (xn as f64).powi(d as i32 - 2)),
        );
    }
    Ok(out)
}

/// Histogram of origin-cluster sizes, for diagnostics.
pub fn cluster_size_histogram(
    table: &LengthTable,
    alpha: f64,
    window_radius: i64,
    samples: u64,
    seed: u64,
) -> Result<Vec<(usize, u64)>> {
    let ball = Ball::centered(table.dim(), window_radius);
    let base = replica_base(&[tag::SCAN, 4, window_radius as u64]);
    let parts = batched(samples, BATCH, |b, n| -> Result<FxHashMap<usize, u64>> {
        let mut h = FxHashMap::default();
        for i in 0..n {
            let e = explore_origin_cluster(table, alpha, &ball, ExploreStop::Never, |_| true, seed, base + b * BATCH + i)?;
            *h.entry(e.cluster.len()).or_insert(0) += 1;
        }
        Ok(h)
    });
    let mut total: FxHashMap<usize, u64> = FxHashMap::default();
    for p in parts {
        for (k, v) in p? {
            *total.entry(k).or_insert(0) += v;
        }
    }
    let mut v: Vec<(usize, u64)> = total.into_iter().collect();
    v.sort_unstable();
    Ok(v)
}
