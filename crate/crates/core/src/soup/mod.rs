//! The Poisson loop soup with intensity `alpha * mu`.
//!
//! [`sample_soup`] draws every loop rooted in a finite window. Each vertex
//! gets `Poisson(alpha * m_d)` loops with lengths from the table and uniform
//! bridges. A loop of length at most `l_max` stays within `l_max / 2` of
//! its root, so rooting loops in the window enlarged by `l_max / 2` makes
//! every connectivity event inside the window exact for the length-truncated
//! soup.
//!
//! [`explore_origin_cluster`] samples only the loops that matter for the
//! cluster of the origin, which reaches much larger distances.

mod explore;

use std::collections::hash_map::Entry;
use std::io::{BufRead, Write};

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Ball, Edge, Point};
use crate::loopmeasure::{sample_bridge, LengthTable, Loop, LoopRecord};
use crate::rng::{substream, tag, vertex_key};

pub use explore::{explore_origin_cluster, ExploreStop, ExploredCluster};

pub const SOUP_SCHEMA: &str = "loopsoup-soup";
pub const SOUP_SCHEMA_VERSION: u32 = 1;

/// Default cap on the expected number of stored steps.
pub const DEFAULT_STEP_BUDGET: f64 = 2e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoupParams {
    pub alpha: f64,
    /// Region whose connectivity events are exact.
    pub window: Ball,
    pub seed: u64,
    /// Independent replica index under the same seed.
    pub replica: u64,
    pub step_budget: f64,
}

impl SoupParams {
    pub fn new(alpha: f64, window: Ball, seed: u64) -> SoupParams {
        SoupParams { alpha, window, seed, replica: 0, step_budget: DEFAULT_STEP_BUDGET }
    }

    pub fn replica(mut self, replica: u64) -> SoupParams {
        self.replica = replica;
        self
    }

    pub fn root_window(&self, table: &LengthTable) -> Ball {
        self.window.enlarged(table.l_max() as i64 / 2)
    }
}

/// A sampled loop configuration with its open-edge multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct Soup {
    loops: Vec<Loop>,
    window: Ball,
    root_window: Ball,
    /// Number of loops traversing each open edge.
    edges: FxHashMap<Edge, u32>,
}

/// Lattice points in a ball of radius `r` in dimension `d`, up to boundary
/// effects: the volume of the ball of radius `r + sqrt(d) / 2`.
fn approx_ball_size(d: usize, r: i64) -> f64 {
    let df = d as f64;
    let unit = std::f64::consts::PI.powf(df / 2.0) / statrs::function::gamma::gamma(df / 2.0 + 1.0);
    unit * (r as f64 + df.sqrt() / 2.0).powf(df)
}

pub fn sample_soup(params: &SoupParams, table: &LengthTable) -> Result<Soup> {
    let d = params.window.dim();
    if d != table.dim() {
        return Err(Error::DimensionMismatch { expected: table.dim(), got: d });
    }
    if !(params.alpha >= 0.0) || !params.alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("activity must be non-negative, got {}", params.alpha)));
    }
    let root_window = params.root_window(table);
    let volume = approx_ball_size(d, root_window.radius);
    let expected_steps = params.alpha * volume * table.return_mass();
    if expected_steps.max(volume) > params.step_budget {
        return Err(Error::MemoryBudget { expected: expected_steps.max(volume), budget: params.step_budget });
    }
    let mut soup = Soup::empty(params.window, root_window);
    if params.alpha == 0.0 {
        return Ok(soup);
    }
    let rate = params.alpha * table.mass();
    let poisson = Poisson::new(rate).map_err(|e| Error::Numerical(e.to_string()))?;
    let roots = root_window.points();
    let loops: Vec<Vec<Loop>> = roots
        .par_chunks(1024)
        .map(|chunk| {
            let mut out = Vec::new();
            for &x in chunk {
                let mut rng = substream(params.seed, &[tag::SOUP_VERTEX, params.replica, vertex_key(&x)]);
                let count = poisson.sample(&mut rng) as usize;
                for _ in 0..count {
                    let k = table.sample_length(&mut rng);
                    out.push(sample_bridge(x, k, table, &mut rng).expect("length drawn from table"));
                }
            }
            out
        })
        .collect();
    for l in loops.into_iter().flatten() {
        debug_assert!(l.reach() <= table.l_max() as f64 / 2.0);
        soup.add_loop(l);
    }
    Ok(soup)
}

impl Soup {
    pub fn empty(window: Ball, root_window: Ball) -> Soup {
        Soup { loops: Vec::new(), window, root_window, edges: FxHashMap::default() }
    }

    pub fn from_loops(window: Ball, root_window: Ball, loops: Vec<Loop>) -> Soup {
        let mut s = Soup::empty(window, root_window);
        for l in loops {
            s.add_loop(l);
        }
        s
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn window(&self) -> &Ball {
        &self.window
    }

    pub fn root_window(&self) -> &Ball {
        &self.root_window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Deduplicated open edges, sorted.
    pub fn open_edges(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.edges.keys().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn open_edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_open(&self, e: &Edge) -> bool {
        self.edges.contains_key(e)
    }

    /// Number of loops traversing `e`.
    pub fn multiplicity(&self, e: &Edge) -> u32 {
        self.edges.get(e).copied().unwrap_or(0)
    }

    pub fn total_steps(&self) -> usize {
        self.loops.iter().map(Loop::length).sum()
    }

    pub fn add_loop(&mut self, l: Loop) {
        for e in l.edge_set() {
            *self.edges.entry(e).or_insert(0) += 1;
        }
        self.loops.push(l);
    }

    /// Remove the loop at `index`; later loops shift down by one.
    pub fn remove_loop(&mut self, index: usize) -> Result<Loop> {
        if index >= self.loops.len() {
            return Err(Error::IndexOutOfRange { index, len: self.loops.len() });
        }
        let l = self.loops.remove(index);
        for e in l.edge_set() {
            match self.edges.entry(e) {
                Entry::Occupied(mut o) => {
                    *o.get_mut() -= 1;
                    if *o.get() == 0 {
                        o.remove();
                    }
                }
                Entry::Vacant(_) => unreachable!("edge of a stored loop missing from the edge map"),
            }
        }
        Ok(l)
    }

    /// Number of loops rooted at each vertex that has any.
    pub fn root_counts(&self) -> FxHashMap<Point, usize> {
        let mut m = FxHashMap::default();
        for l in &self.loops {
            *m.entry(l.root()).or_insert(0) += 1;
        }
        m
    }

    /// JSON-lines dump: a header line, then one loop per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W, header: &SoupHeader) -> Result<()> {
        serde_json::to_writer(&mut w, header)?;
        writeln!(w)?;
        for l in &self.loops {
            serde_json::to_writer(&mut w, &LoopRecord::from(l))?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<(SoupHeader, Soup)> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::InvalidArgument("empty soup file".into()))??;
        let header: SoupHeader = serde_json::from_str(&first)?;
        if header.schema != SOUP_SCHEMA || header.version != SOUP_SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported soup schema {} v{}",
                header.schema, header.version
            )));
        }
        let mut soup = Soup::empty(header.window, header.root_window);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LoopRecord = serde_json::from_str(&line)?;
            soup.add_loop(Loop::try_from(rec)?);
        }
        if soup.len() != header.loops {
            return Err(Error::InvalidArgument(format!(
                "header announces {} loops, file has {}",
                header.loops,
                soup.len()
            )));
        }
        Ok((header, soup))
    }
}

/// First line of a soup dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoupHeader {
    pub schema: String,
    pub version: u32,
    pub d: usize,
    pub alpha: f64,
    pub seed: u64,
    pub replica: u64,
    pub l_max: usize,
    pub m_d: f64,
    pub tail_bound: f64,
    pub window: Ball,
    pub root_window: Ball,
    pub loops: usize,
    pub software_version: String,
}

impl SoupHeader {
    pub fn new(params: &SoupParams, table: &LengthTable, soup: &Soup, software_version: &str) -> SoupHeader {
        SoupHeader {
            schema: SOUP_SCHEMA.into(),
            version: SOUP_SCHEMA_VERSION,
            d: table.dim(),
            alpha: params.alpha,
            seed: params.seed,
            replica: params.replica,
            l_max: table.l_max(),
            m_d: table.mass(),
            tail_bound: table.tail_bound(),
            window: params.window,
            root_window: *soup.root_window(),
            loops: soup.len(),
            software_version: software_version.into(),
        }
    }
}
