//! Loop mass of connection events by first-passage decomposition.
//!
//! For disjoint `K` and `L`, a rooted loop connecting them is cut at its
//! alternating visits to `K` and `L`, which gives
//!
//! ```text
//! mu[K <-> L] = sum_{x in K} sum_{n >= 1} (1/n) P_x(omega(tau_{2n}) = x)
//! ```
//!
//! with `tau_{2i+1}` the next hit of `L` and `tau_{2i+2}` the next hit of
//! `K`. The `n = 1` term is estimated by simulation. Walks that leave the
//! kill ball are scored by their exact hitting probability where the Green's
//! function gives one, and bracketed otherwise.

use std::time::Instant;

use serde::Serialize;

use super::walk::{walk_until, PointSet, WalkEnd};
use crate::error::{Error, Result};
use crate::greens::{capacity, hitting_probability, CapacityResult, GreenTable};
use crate::lattice::{ball_boundary, Ball, Point};
use crate::rng::{batched, substream, tag, BATCH};
use crate::stats::{Diagnostics, Estimate, MeanAccumulator};

/// The set a loop from `K` has to reach.
#[derive(Clone, Debug)]
pub enum Target {
    /// The inner boundary `∂B` of a ball containing `K` in its interior.
    Sphere(Ball),
    /// A finite point set disjoint from `K`.
    Points(Vec<Point>),
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectEstimate {
    /// Midpoint of the brackets (the exact estimate when they coincide).
    pub estimate: Estimate,
    pub lower: f64,
    pub lower_std_error: f64,
    pub upper: f64,
    pub upper_std_error: f64,
    /// Lower and upper brackets coincide sample by sample.
    pub exact: bool,
    /// `q = max_{y in L} P_y(H_K < inf)`.
    pub return_bound: f64,
    /// Upper bound on the `n >= 2` terms.
    pub higher_order_bound: f64,
    pub kill_radius: i64,
}

impl ConnectEstimate {
    pub fn relative_higher_order_bound(&self) -> f64 {
        if self.estimate.value > 0.0 { self.higher_order_bound / self.estimate.value } else { f64::INFINITY }
    }
}

/// `sum_{m >= 2} q^{m-1} / m`.
pub fn geometric_tail_factor(q: f64) -> f64 {
    if q <= 0.0 {
        0.0
    } else if q < 1e-4 {
        q / 2.0 + q * q / 3.0
    } else if q >= 1.0 {
        f64::INFINITY
    } else {
        (-(1.0 - q).ln() - q) / q
    }
}

/// Distance from the first point of `K` to the farthest point involved.
fn geometric_scale(k: &[Point], target: &Target) -> f64 {
    let c = k[0];
    let from_k = k.iter().map(|p| p.dist(&c)).fold(0.0, f64::max);
    let from_t = match target {
        Target::Sphere(b) => b.center.dist(&c) + b.radius as f64,
        Target::Points(l) => l.iter().map(|p| p.dist(&c)).fold(0.0, f64::max),
    };
    from_k.max(from_t)
}

/// Four times the largest distance involved in the query.
pub fn default_kill_radius(k: &[Point], target: &Target) -> Result<i64> {
    let mut k = k.to_vec();
    if k.is_empty() {
        return Err(Error::EmptySet);
    }
    k.sort_unstable();
    Ok((4.0 * geometric_scale(&k, target)).ceil() as i64 + 1)
}

/// Per-sample scores: lower and upper bracket of `1{omega(tau_2) = x}` and
/// an upper bound on `1{tau_2 < inf}`.
#[derive(Clone, Copy, Default)]
struct Score {
    lo: f64,
    hi: f64,
    any: f64,
}

#[derive(Clone, Copy, Default)]
struct Acc {
    lo: MeanAccumulator,
    hi: MeanAccumulator,
    mid: MeanAccumulator,
    any: MeanAccumulator,
}

impl Acc {
    fn push(&mut self, s: Score) {
        self.lo.push(s.lo);
        self.hi.push(s.hi);
        self.mid.push(0.5 * (s.lo + s.hi));
        self.any.push(s.any);
    }

    fn merge(&mut self, o: &Acc) {
        self.lo.merge(&o.lo);
        self.hi.merge(&o.hi);
        self.mid.merge(&o.mid);
        self.any.merge(&o.any);
    }
}

struct Query<'a> {
    greens: &'a GreenTable,
    g0: f64,
    kset: PointSet,
    cap_k: CapacityResult,
    target: &'a Target,
    lset: Option<PointSet>,
    cap_l: Option<CapacityResult>,
    kill: Ball,
    q: f64,
}

impl Query<'_> {
    fn hits_target(&self, p: &Point) -> bool {
        match (self.target, &self.lset) {
            (Target::Sphere(b), _) => b.on_boundary(p),
            (_, Some(s)) => s.contains(p),
            _ => unreachable!(),
        }
    }

    fn singleton_k(&self) -> bool {
        self.kset.len() == 1
    }

    fn one_sample<R: rand::Rng + ?Sized>(&self, x: Point, rng: &mut R) -> Score {
        let l = match walk_until(x, &self.kill, |p| self.hits_target(p), rng) {
            WalkEnd::Hit(l) => l,
            WalkEnd::Killed(y) => {
                let lset = self.lset.as_ref().expect("only point targets can be missed");
                let cap_l = self.cap_l.as_ref().expect("capacity of point target");
                if self.singleton_k() && lset.len() == 1 {
                    let l = lset.points()[0];
                    let s = self.greens.value(&(y - l)) / self.g0 * self.greens.value(&(l - x)) / self.g0;
                    return Score { lo: s, hi: s, any: s };
                }
                let bound = hitting_probability(self.greens, &y, cap_l) * self.q;
                return Score { lo: 0.0, hi: bound, any: bound };
            }
        };
        match walk_until(l, &self.kill, |p| self.kset.contains(p), rng) {
            WalkEnd::Hit(z) => {
                let s = if z == x { 1.0 } else { 0.0 };
                Score { lo: s, hi: s, any: 1.0 }
            }
            WalkEnd::Killed(y) => {
                if self.singleton_k() {
                    let s = self.greens.value(&(y - x)) / self.g0;
                    Score { lo: s, hi: s, any: s }
                } else {
                    let h = hitting_probability(self.greens, &y, &self.cap_k);
                    Score { lo: 0.0, hi: h, any: h }
                }
            }
        }
    }
}

/// Estimate `mu[K <-> target]` from the first term of the decomposition,
/// using about `samples` walks in total.
pub fn loop_mass_connect(
    greens: &GreenTable,
    k: &[Point],
    target: &Target,
    kill_radius: i64,
    samples: u64,
    seed: u64,
) -> Result<ConnectEstimate> {
    let start = Instant::now();
    if k.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = greens.dim();
    let mut kpts = k.to_vec();
    kpts.sort_unstable();
    kpts.dedup();
    for p in &kpts {
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
        }
    }
    let (lset, cap_l) = match target {
        Target::Sphere(b) => {
            if b.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: b.dim() });
            }
            if kpts.iter().any(|p| b.on_boundary(p)) {
                return Err(Error::SetsIntersect);
            }
            if kpts.iter().any(|p| !b.contains(p)) {
                return Err(Error::InvalidArgument("K must lie inside the target ball".into()));
            }
            (None, None)
        }
        Target::Points(l) => {
            if l.is_empty() {
                return Err(Error::EmptySet);
            }
            let set = PointSet::new(l);
            if kpts.iter().any(|p| set.contains(p)) {
                return Err(Error::SetsIntersect);
            }
            let cap = capacity(greens, l)?;
            (Some(set), Some(cap))
        }
    };
    let scale = geometric_scale(&kpts, target);
    if (kill_radius as f64) <= scale + 1.0 {
        return Err(Error::InvalidArgument(format!(
            "kill radius {kill_radius} must exceed the query scale {scale:.2} by more than one step"
        )));
    }
    let cap_k = capacity(greens, &kpts)?;
    let kill = Ball::new(kpts[0], kill_radius);

    let q = match (target, &lset) {
        (Target::Sphere(b), _) => {
            let bd = ball_boundary(b);
            bd.iter().map(|y| hitting_probability(greens, y, &cap_k)).fold(0.0, f64::max)
        }
        (_, Some(s)) => s.points().iter().map(|y| hitting_probability(greens, y, &cap_k)).fold(0.0, f64::max),
        _ => unreachable!(),
    };

    let query = Query {
        greens,
        g0: greens.at_origin(),
        kset: PointSet::new(&kpts),
        cap_k,
        target,
        lset,
        cap_l,
        kill,
        q,
    };
    let exact = query.singleton_k()
        && match &query.lset {
            None => true,
            Some(s) => s.len() == 1,
        };

    let per_point = samples.div_ceil(kpts.len() as u64).max(2);
    let mut total_mid = 0.0;
    let mut var_mid = 0.0;
    let (mut lo, mut var_lo, mut hi, mut var_hi, mut any) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0;
    for (xi, &x) in kpts.iter().enumerate() {
        let parts = batched(per_point, BATCH, |b, n| {
            let mut rng = substream(seed, &[tag::WALK, xi as u64, b]);
            let mut acc = Acc::default();
            for _ in 0..n {
                acc.push(query.one_sample(x, &mut rng));
            }
            acc
        });
        let mut acc = Acc::default();
        for p in &parts {
            acc.merge(p);
        }
        total_mid += acc.mid.mean();
        var_mid += acc.mid.std_error().powi(2);
        lo += acc.lo.mean();
        var_lo += acc.lo.std_error().powi(2);
        hi += acc.hi.mean();
        var_hi += acc.hi.std_error().powi(2);
        any += acc.any.mean();
        count += acc.mid.count();
    }

    let estimate = Estimate {
        value: total_mid,
        std_error: var_mid.sqrt(),
        samples: count,
        seed,
        diagnostics: Diagnostics::default(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(ConnectEstimate {
        estimate,
        lower: lo,
        lower_std_error: var_lo.sqrt(),
        upper: hi,
        upper_std_error: var_hi.sqrt(),
        exact,
        return_bound: q,
        higher_order_bound: any * geometric_tail_factor(q),
        kill_radius,
    })
}

/// Simulated `P_y(H_K < inf)`: walks from `y` that leave the kill ball
/// score the exact last-exit value at their exit point.
pub fn hitting_probability_mc(
    greens: &GreenTable,
    y: &Point,
    cap: &CapacityResult,
    kill_radius: i64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let start = Instant::now();
    let far = cap.points.iter().map(|p| p.dist(y)).fold(0.0, f64::max);
    if (kill_radius as f64) <= far {
        return Err(Error::InvalidArgument(format!("kill radius {kill_radius} does not enclose K")));
    }
    let kset = PointSet::new(&cap.points);
    let kill = Ball::new(*y, kill_radius);
    let parts = batched(samples, BATCH, |b, n| {
        let mut rng = substream(seed, &[tag::WALK, u64::MAX, b]);
        let mut acc = MeanAccumulator::new();
        for _ in 0..n {
            acc.push(match walk_until(*y, &kill, |p| kset.contains(p), &mut rng) {
                WalkEnd::Hit(_) => 1.0,
                WalkEnd::Killed(z) => hitting_probability(greens, &z, cap),
            });
        }
        acc
    });
    let mut acc = MeanAccumulator::new();
    for p in &parts {
        acc.merge(p);
    }
    Ok(Estimate::from_accumulator(&acc, seed, Diagnostics::default()).with_wall_time(start.elapsed().as_secs_f64()))
}
