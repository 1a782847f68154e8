//! Loops through a fixed vertex: sampling and range statistics.
//!
//! Rooted loops through `v` are in bijection with pairs (closed path from
//! the origin, index `j` of the first visit to a vertex of the path): the
//! root is `v - omega(j)`. Drawing `k ∝ p_k`, a uniform bridge and a uniform
//! `j < k`, and keeping the draw only when `j` is a first visit, therefore
//! samples `mu` restricted to loops through `v`, with total rate
//! `sum_k p_k` per candidate.

use std::time::Instant;

use rand::Rng;

use super::bridge::{sample_bridge, Loop};
use super::table::LengthTable;
use crate::error::{Error, Result};
use crate::lattice::Point;
use crate::rng::{batched, substream, tag, BATCH};
use crate::stats::{Diagnostics, Estimate, MeanAccumulator};

/// Fewest accepted loops for a conditional range estimate.
pub const MIN_ACCEPTED: u64 = 100;

/// One candidate loop through `v`: `None` when the candidate is thinned.
/// Candidates arrive at rate `table.return_mass()` per unit activity.
pub fn sample_loop_through<R: Rng + ?Sized>(v: Point, table: &LengthTable, rng: &mut R) -> Option<Loop> {
    let k = table.sample_return_length(rng);
    candidate_of_length(v, k, table, rng)
}

fn candidate_of_length<R: Rng + ?Sized>(v: Point, k: usize, table: &LengthTable, rng: &mut R) -> Option<Loop> {
    let path = sample_bridge(Point::origin(table.dim()), k, table, rng).expect("length from table");
    let j = rng.random_range(0..k);
    let trace = path.trace();
    let t = trace[j];
    if trace[..j].contains(&t) {
        return None;
    }
    Some(path.translated(v - t))
}

/// Importance proposal over lengths: `q(k) ∝ 1/k` on even `k` in
/// `[k_min, l_max]`.
struct Proposal {
    k_min: usize,
    cdf: Vec<f64>,
}

impl Proposal {
    fn new(k_min: usize, l_max: usize) -> Proposal {
        let mut acc = 0.0;
        let cdf = (k_min..=l_max)
            .step_by(2)
            .map(|k| {
                acc += 1.0 / k as f64;
                acc
            })
            .collect();
        Proposal { k_min, cdf }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let total = *self.cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let k = self.k_min + 2 * i;
        (k, (1.0 / k as f64) / total)
    }
}

/// Smallest even length whose loops can have diameter above `m`.
fn min_length_for_diameter(m: f64) -> usize {
    let k = (2.0 * m).floor() as usize + 1;
    k + k % 2
}

/// Mean of `#R(omega)` under `mu` restricted to loops through the origin
/// with `diam(omega) > m`, by importance sampling over lengths.
pub fn loop_range_stats(table: &LengthTable, m: f64, samples: u64, seed: u64) -> Result<Estimate> {
    let start = Instant::now();
    let k_min = min_length_for_diameter(m);
    if k_min > table.l_max() {
        return Err(Error::InvalidArgument(format!("no loop of length <= {} has diameter > {m}", table.l_max())));
    }
    let proposal = Proposal::new(k_min, table.l_max());
    let o = Point::origin(table.dim());
    // residuals need the final ratio, so keep per-sample (w, r) pairs
    let parts = batched(samples, BATCH, |b, n| {
        let mut rng = substream(seed, &[tag::LOOP_SAMPLE, m.to_bits(), b]);
        let mut out = Vec::new();
        for _ in 0..n {
            let (k, qk) = proposal.sample(&mut rng);
            if let Some(l) = candidate_of_length(o, k, table, &mut rng) {
                if l.diameter_exceeds(m) {
                    out.push((table.return_probability(k) / qk, l.range_size() as f64));
                }
            }
        }
        out
    });
    let pairs: Vec<(f64, f64)> = parts.into_iter().flatten().collect();
    let accepted = pairs.len() as u64;
    if accepted < MIN_ACCEPTED {
        return Err(Error::InsufficientSamples { accepted, needed: MIN_ACCEPTED });
    }
    let sw: f64 = pairs.iter().map(|p| p.0).sum();
    let r = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / sw;
    let res2: f64 = pairs.iter().map(|(w, x)| (w * (x - r)).powi(2)).sum();
    Ok(Estimate {
        value: r,
        std_error: res2.sqrt() / sw,
        samples: accepted,
        seed,
        diagnostics: Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: 0.0 },
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Mean of `#R(omega)` under the normalised rooted length law `w_k / m_d`,
/// by direct sampling.
pub fn mean_range_rooted(table: &LengthTable, samples: u64, seed: u64) -> Estimate {
    let start = Instant::now();
    let o = Point::origin(table.dim());
    let parts = batched(samples, BATCH, |b, n| {
        let mut rng = substream(seed, &[tag::LOOP_SAMPLE, u64::MAX, b]);
        let mut acc = MeanAccumulator::new();
        for _ in 0..n {
            let k = table.sample_length(&mut rng);
            acc.push(sample_bridge(o, k, table, &mut rng).expect("length from table").range_size() as f64);
        }
        acc
    });
    let mut acc = MeanAccumulator::new();
    for p in &parts {
        acc.merge(p);
    }
    Estimate::from_accumulator(&acc, seed, Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: 0.0 })
        .with_wall_time(start.elapsed().as_secs_f64())
}

/// `mu[0 in omega, x in omega, diam(omega) > m]`.
pub fn far_connect_mass(table: &LengthTable, x: &Point, m: f64, samples: u64, seed: u64) -> Result<Estimate> {
    let start = Instant::now();
    if x.is_origin() {
        return Err(Error::InvalidArgument("x must differ from the origin".into()));
    }
    let k_min = min_length_for_diameter(m.max(x.norm()));
    if k_min > table.l_max() {
        return Err(Error::InvalidArgument(format!("no loop of length <= {} reaches {x} with diameter > {m}", table.l_max())));
    }
    let proposal = Proposal::new(k_min, table.l_max());
    let o = Point::origin(table.dim());
    let parts = batched(samples, BATCH, |b, n| {
        let mut rng = substream(seed, &[tag::LOOP_SAMPLE, crate::rng::vertex_key(x), m.to_bits(), b]);
        let mut acc = MeanAccumulator::new();
        for _ in 0..n {
            let (k, qk) = proposal.sample(&mut rng);
            let score = match candidate_of_length(o, k, table, &mut rng) {
                Some(l) if l.visits(x) && l.diameter_exceeds(m) => table.return_probability(k) / qk,
                _ => 0.0,
            };
            acc.push(score);
        }
        acc
    });
    let mut acc = MeanAccumulator::new();
    for p in &parts {
        acc.merge(p);
    }
    Ok(Estimate::from_accumulator(&acc, seed, Diagnostics { tail_bound: table.tail_bound(), boundary_touch_rate: 0.0 })
        .with_wall_time(start.elapsed().as_secs_f64()))
}
