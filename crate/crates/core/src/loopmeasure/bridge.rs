//! Rooted loops and exact uniform sampling of closed paths.

use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::table::LengthTable;
use crate::error::{Error, Result};
use crate::lattice::{Edge, Point};

/// A rooted closed nearest-neighbour path, stored as its root and step
/// directions (`2 * axis` for `+e_axis`, `2 * axis + 1` for `-e_axis`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    root: Point,
    steps: Vec<u8>,
}

impl Loop {
    /// Build a loop, checking that the steps are valid directions and that
    /// the path closes.
    pub fn new(root: Point, steps: Vec<u8>) -> Result<Loop> {
        let d = root.dim();
        if steps.len() < 2 || steps.len() % 2 == 1 {
            return Err(Error::InvalidLength(steps.len()));
        }
        let mut disp = [0i64; crate::lattice::MAX_DIM];
        for &s in &steps {
            if s as usize >= 2 * d {
                return Err(Error::InvalidArgument(format!("step direction {s} in dimension {d}")));
            }
            disp[s as usize / 2] += if s % 2 == 0 { 1 } else { -1 };
        }
        if disp.iter().any(|&v| v != 0) {
            return Err(Error::InvalidArgument("path does not close".into()));
        }
        Ok(Loop { root, steps })
    }

    /// Build a loop from its vertex sequence `trace[0..=k]`.
    pub fn from_trace(trace: &[Point]) -> Result<Loop> {
        let (first, last) = match (trace.first(), trace.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(Error::EmptySet),
        };
        if first != last {
            return Err(Error::InvalidArgument("trace does not close".into()));
        }
        let mut steps = Vec::with_capacity(trace.len() - 1);
        for w in trace.windows(2) {
            let dir = (0..2 * first.dim() as u8)
                .find(|&dir| w[0].step(dir) == w[1])
                .ok_or_else(|| Error::InvalidArgument(format!("{} and {} are not neighbours", w[0], w[1])))?;
            steps.push(dir);
        }
        Loop::new(first, steps)
    }

    pub fn root(&self) -> Point {
        self.root
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn length(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[u8] {
        &self.steps
    }

    /// The `length + 1` visited points, starting and ending at the root.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        std::iter::once(self.root).chain(self.steps.iter().scan(self.root, |p, &s| {
            *p = p.step(s);
            Some(*p)
        }))
    }

    pub fn trace(&self) -> Vec<Point> {
        self.points().collect()
    }

    /// Traversed edges in order, with repetitions.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let mut prev = self.root;
        self.steps.iter().map(move |&s| {
            let next = prev.step(s);
            let e = Edge::between(prev, next);
            prev = next;
            e
        })
    }

    /// Distinct traversed edges, sorted.
    pub fn edge_set(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.edges().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The vertex range `R(ω)`, sorted.
    pub fn range(&self) -> Vec<Point> {
        let mut v: Vec<Point> = self.points().skip(1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn range_size(&self) -> usize {
        let set: FxHashSet<Point> = self.points().skip(1).collect();
        set.len()
    }

    pub fn diameter(&self) -> f64 {
        crate::lattice::diameter(&self.range())
    }

    /// `diam(ω) > m`, exiting early where cheap bounds decide it.
    pub fn diameter_exceeds(&self, m: f64) -> bool {
        let d = self.dim();
        let mut lo = [i32::MAX; crate::lattice::MAX_DIM];
        let mut hi = [i32::MIN; crate::lattice::MAX_DIM];
        let mut r2 = 0i64;
        for p in self.points() {
            r2 = r2.max(p.dist2(&self.root));
            for (i, &c) in p.coords().iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let r = (r2 as f64).sqrt();
        if r > m {
            return true;
        }
        if 2.0 * r <= m {
            return false;
        }
        if (0..d).any(|i| (hi[i] - lo[i]) as f64 > m) {
            return true;
        }
        let range = self.range();
        let m2 = m * m;
        range
            .iter()
            .enumerate()
            .any(|(i, a)| range[i + 1..].iter().any(|b| a.dist2(b) as f64 > m2))
    }

    /// Largest Euclidean distance from the root.
    pub fn reach(&self) -> f64 {
        self.points().map(|p| p.dist2(&self.root)).max().map_or(0.0, |v| (v as f64).sqrt())
    }

    /// Does the loop visit `x`?
    pub fn visits(&self, x: &Point) -> bool {
        self.points().any(|p| p == *x)
    }

    /// The same path moved by `offset`.
    pub fn translated(&self, offset: Point) -> Loop {
        Loop { root: self.root + offset, steps: self.steps.clone() }
    }

    /// The same closed path re-rooted at its `j`-th vertex.
    pub fn rerooted(&self, j: usize) -> Loop {
        let k = self.length();
        let j = j % k;
        let root = self.points().nth(j).expect("index within loop");
        let mut steps = Vec::with_capacity(k);
        steps.extend_from_slice(&self.steps[j..]);
        steps.extend_from_slice(&self.steps[..j]);
        Loop { root, steps }
    }
}

/// JSON form of a loop: root, length and full vertex trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub root: Point,
    pub length: usize,
    pub trace: Vec<Point>,
}

impl From<&Loop> for LoopRecord {
    fn from(l: &Loop) -> Self {
        LoopRecord { root: l.root, length: l.length(), trace: l.trace() }
    }
}

impl TryFrom<LoopRecord> for Loop {
    type Error = Error;

    fn try_from(r: LoopRecord) -> Result<Loop> {
        let l = Loop::from_trace(&r.trace)?;
        if l.root != r.root || l.length() != r.length {
            return Err(Error::InvalidArgument("loop record fields disagree with trace".into()));
        }
        Ok(l)
    }
}

/// Uniform sample from the closed `k`-step paths rooted at `root`.
///
/// Per-axis step counts are drawn one axis at a time from the conditional
/// law given by the partial tables; a uniformly shuffled word over the
/// resulting multiset of directions is then uniform over closed paths with
/// those counts, which covers both the per-axis sign pattern and the
/// interleaving of axes.
pub fn sample_bridge<R: Rng + ?Sized>(
    root: Point,
    k: usize,
    table: &LengthTable,
    rng: &mut R,
) -> Result<Loop> {
    let d = table.dim();
    if root.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: root.dim() });
    }
    if k < 2 || k % 2 == 1 || k > table.l_max() {
        return Err(Error::InvalidLength(k));
    }
    let counts = sample_axis_counts(k, table, rng);
    let mut steps = Vec::with_capacity(k);
    for (axis, &n) in counts.iter().enumerate() {
        let up = 2 * axis as u8;
        steps.extend(std::iter::repeat_n(up, n / 2));
        steps.extend(std::iter::repeat_n(up + 1, n / 2));
    }
    steps.shuffle(rng);
    Ok(Loop { root, steps })
}

/// Steps per axis of a uniform closed `k`-path, all even and summing to `k`.
fn sample_axis_counts<R: Rng + ?Sized>(k: usize, table: &LengthTable, rng: &mut R) -> Vec<usize> {
    let d = table.dim();
    let mut counts = vec![0usize; d];
    let mut rem = k;
    for j in (2..=d).rev() {
        if rem == 0 {
            break;
        }
        // P(n_j = n | rem) = Binom(rem, n; 1/j) u(n) P_{j-1}(rem - n) / P_j(rem)
        let jf = j as f64;
        let (ln_pick, ln_rest) = ((1.0 / jf).ln(), ((jf - 1.0) / jf).ln());
        let ln_norm = table.ln_partial[j - 1][rem / 2];
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        let mut chosen = rem;
        for n in (0..=rem).step_by(2) {
            let ln_u = table.ln_partial[0][n / 2];
            let lp = table.ln_binom(rem, n)
                + n as f64 * ln_pick
                + (rem - n) as f64 * ln_rest
                + ln_u
                + table.ln_partial[j - 2][(rem - n) / 2]
                - ln_norm;
            acc += lp.exp();
            if u < acc {
                chosen = n;
                break;
            }
        }
        counts[j - 1] = chosen;
        rem -= chosen;
    }
    counts[0] = rem;
    counts
}
