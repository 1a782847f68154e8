//! Exact sampling of the origin cluster without a finite root window.
//!
//! Vertices of the cluster are processed one at a time in breadth-first
//! order. At a vertex `v` the loops of the soup that visit `v` but none of
//! the previously processed vertices form a Poisson process independent of
//! everything seen so far, so they can be drawn on the spot: candidates
//! from [`sample_loop_through`] arrive at rate `alpha * sum_k p_k`, and a
//! candidate survives if it avoids the processed set. The loops found this
//! way are exactly the loops meeting the cluster, with the law of the
//! length-truncated soup on all of Z^d.

use std::collections::VecDeque;

use rand_distr::{Distribution, Poisson};
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::lattice::{Ball, Point};
use crate::loopmeasure::{sample_loop_through, LengthTable, Loop};
use crate::percolation::OriginCluster;
use crate::rng::{substream, tag, vertex_key};

/// When to stop exploring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploreStop {
    /// Explore every cluster vertex inside the ball.
    Never,
    /// Stop once the cluster meets the inner boundary of the ball; only
    /// interior vertices are processed.
    AtBoundary,
    /// Stop once the cluster contains this point.
    AtPoint(Point),
}

#[derive(Clone, Debug)]
pub struct ExploredCluster {
    /// `loop_indices` refer to `loops`.
    pub cluster: OriginCluster,
    pub loops: Vec<Loop>,
    /// Vertices whose loops were sampled.
    pub processed: usize,
    /// The stopping condition fired.
    pub stopped: bool,
}

/// Explore the cluster of the origin in the soup of activity `alpha`,
/// keeping only loops accepted by `filter`. Replica `r` under `seed` is the
/// same soup whatever the stopping rule, so a stopped exploration can be
/// resumed by re-running it with a weaker rule.
pub fn explore_origin_cluster<F>(
    table: &LengthTable,
    alpha: f64,
    ball: &Ball,
    stop: ExploreStop,
    filter: F,
    seed: u64,
    replica: u64,
) -> Result<ExploredCluster>
where
    F: Fn(&Loop) -> bool,
{
    let d = table.dim();
    if ball.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: ball.dim() });
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("activity must be non-negative, got {alpha}")));
    }
    let o = Point::origin(d);
    if !ball.contains(&o) {
        return Err(Error::OutOfWindow);
    }
    let poisson = if alpha > 0.0 {
        Some(Poisson::new(alpha * table.return_mass()).map_err(|e| Error::Numerical(e.to_string()))?)
    } else {
        None
    };

    let fires = |p: &Point| match stop {
        ExploreStop::Never => false,
        ExploreStop::AtBoundary => ball.reaches_boundary(p),
        ExploreStop::AtPoint(x) => *p == x,
    };
    let processable = |p: &Point| match stop {
        ExploreStop::AtBoundary => !ball.reaches_boundary(p),
        _ => ball.contains(p),
    };

    let mut members: FxHashSet<Point> = FxHashSet::default();
    members.insert(o);
    let mut queue = VecDeque::from([o]);
    let mut processed: FxHashSet<Point> = FxHashSet::default();
    let mut loops = Vec::new();
    let mut stopped = fires(&o);

    while !stopped {
        let Some(v) = queue.pop_front() else { break };
        if !processable(&v) {
            continue;
        }
        let mut found = Vec::new();
        if let Some(poisson) = &poisson {
            let mut rng = substream(seed, &[tag::EXPLORE, replica, vertex_key(&v)]);
            let n = poisson.sample(&mut rng) as usize;
            for _ in 0..n {
                if let Some(l) = sample_loop_through(v, table, &mut rng) {
                    if !l.points().any(|p| processed.contains(&p)) && filter(&l) {
                        found.push(l);
                    }
                }
            }
        }
        processed.insert(v);
        for l in found {
            for p in l.points() {
                if members.insert(p) {
                    queue.push_back(p);
                    stopped |= fires(&p);
                }
            }
            loops.push(l);
        }
    }

    let mut vertices: Vec<Point> = members.into_iter().collect();
    vertices.sort_unstable();
    let touched = vertices.iter().any(|p| ball.reaches_boundary(p));
    let cluster = OriginCluster::new(vertices, (0..loops.len()).collect(), touched);
    Ok(ExploredCluster { cluster, loops, processed: processed.len(), stopped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::one_arm;
    use crate::soup::{sample_soup, SoupParams};
    use crate::stats::z_score;

    #[test]
    fn zero_activity_gives_the_origin() {
        let t = LengthTable::build(3, 20, 1.0).unwrap();
        let e = explore_origin_cluster(&t, 0.0, &Ball::centered(3, 5), ExploreStop::Never, |_| true, 1, 0).unwrap();
        assert_eq!(e.cluster.vertices(), &[Point::origin(3)]);
        assert!(e.loops.is_empty() && !e.stopped);
    }

    #[test]
    fn explored_cluster_is_connected_and_deterministic() {
        let t = LengthTable::build(3, 20, 1.0).unwrap();
        let b = Ball::centered(3, 6);
        for r in 0..50 {
            let a = explore_origin_cluster(&t, 0.8, &b, ExploreStop::Never, |_| true, 2, r).unwrap();
            let again = explore_origin_cluster(&t, 0.8, &b, ExploreStop::Never, |_| true, 2, r).unwrap();
            assert_eq!(a.loops, again.loops);
            // every found loop meets the cluster and all its points are in it
            for l in &a.loops {
                assert!(l.points().all(|p| a.cluster.contains(&p)));
            }
        }
    }

    #[test]
    fn stopped_exploration_is_a_prefix_of_the_full_one() {
        let t = LengthTable::build(3, 30, 1.0).unwrap();
        for r in 0..40 {
            let part = explore_origin_cluster(&t, 1.0, &Ball::centered(3, 3), ExploreStop::AtBoundary, |_| true, 5, r).unwrap();
            let full = explore_origin_cluster(&t, 1.0, &Ball::centered(3, 8), ExploreStop::Never, |_| true, 5, r).unwrap();
            assert_eq!(&full.loops[..part.loops.len()], &part.loops[..]);
        }
    }

    /// The explored one-arm frequency matches the full-window sampler.
    #[test]
    fn agrees_with_window_sampler() {
        let t = LengthTable::build(3, 12, 1.0).unwrap();
        let (alpha, n, reps) = (2.0, 3i64, 6000u64);
        let ball = Ball::centered(3, n);
        let mut hits_explore = 0u64;
        let mut hits_window = 0u64;
        for r in 0..reps {
            let e = explore_origin_cluster(&t, alpha, &ball, ExploreStop::AtBoundary, |_| true, 11, r).unwrap();
            hits_explore += e.stopped as u64;
            let s = sample_soup(&SoupParams::new(alpha, ball, 13).replica(r), &t).unwrap();
            hits_window += one_arm(&s, n).unwrap() as u64;
        }
        let (pe, pw) = (hits_explore as f64 / reps as f64, hits_window as f64 / reps as f64);
        let se = |p: f64| (p * (1.0 - p) / reps as f64).sqrt();
        assert!(z_score(pe, se(pe), pw, se(pw)) < 4.0, "{pe} vs {pw}");
        assert!(pe > 0.05, "{pe}");
    }
}
