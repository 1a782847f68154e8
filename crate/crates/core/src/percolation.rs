//! Connectivity of the open-edge configuration: union-find clusters, the
//! origin cluster, one-arm and two-point events, and connectivity through
//! a filtered subset of loops.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{diameter, Ball, Edge, Point};
use crate::loopmeasure::{Loop, Target};
use crate::soup::Soup;

/// Components of the graph spanned by a set of edges. Vertices not on any
/// edge are isolated and have no id.
#[derive(Clone, Debug)]
pub struct ClusterPartition {
    index: FxHashMap<Point, u32>,
    points: Vec<Point>,
    /// Dense component id per vertex.
    comp: Vec<u32>,
    num_components: usize,
}

pub fn build_clusters(edges: &[Edge]) -> ClusterPartition {
    let mut index: FxHashMap<Point, u32> = FxHashMap::default();
    index.reserve(edges.len() + 1);
    let mut points = Vec::new();
    let mut id = |p: Point, points: &mut Vec<Point>| -> u32 {
        *index.entry(p).or_insert_with(|| {
            points.push(p);
            (points.len() - 1) as u32
        })
    };
    let mut pairs = Vec::with_capacity(edges.len());
    for e in edges {
        let (a, b) = e.endpoints();
        pairs.push((id(a, &mut points), id(b, &mut points)));
    }
    let n = points.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut size = vec![1u32; n];
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let p = parent[x as usize];
            parent[x as usize] = parent[p as usize];
            x = p;
        }
        x
    }
    for (a, b) in pairs {
        let (mut ra, mut rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            continue;
        }
        if size[ra as usize] < size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        parent[rb as usize] = ra;
        size[ra as usize] += size[rb as usize];
    }
    let mut dense: FxHashMap<u32, u32> = FxHashMap::default();
    let comp: Vec<u32> = (0..n as u32)
        .map(|v| {
            let r = find(&mut parent, v);
            let next = dense.len() as u32;
            *dense.entry(r).or_insert(next)
        })
        .collect();
    ClusterPartition { index, points, comp, num_components: dense.len() }
}

impl ClusterPartition {
    pub fn component(&self, p: &Point) -> Option<u32> {
        self.index.get(p).map(|&i| self.comp[i as usize])
    }

    pub fn connected(&self, a: &Point, b: &Point) -> bool {
        a == b || matches!((self.component(a), self.component(b)), (Some(x), Some(y)) if x == y)
    }

    /// Vertices of the component containing `p`; `[p]` if `p` is isolated.
    pub fn component_of(&self, p: &Point) -> Vec<Point> {
        match self.component(p) {
            None => vec![*p],
            Some(c) => self.component_vertices(c),
        }
    }

    pub fn component_vertices(&self, id: u32) -> Vec<Point> {
        let mut v: Vec<Point> = self
            .comp
            .iter()
            .zip(&self.points)
            .filter(|(&c, _)| c == id)
            .map(|(_, p)| *p)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    /// Vertices touched by some edge.
    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }
}

/// The cluster `C_0 ∪ {0}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OriginCluster {
    vertices: Vec<Point>,
    loop_indices: Vec<usize>,
    touched_window_boundary: bool,
}

impl OriginCluster {
    /// `vertices` must be sorted and contain the origin.
    pub fn new(vertices: Vec<Point>, loop_indices: Vec<usize>, touched_window_boundary: bool) -> OriginCluster {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(vertices.iter().any(Point::is_origin));
        OriginCluster { vertices, loop_indices, touched_window_boundary }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Indices of the loops that meet the cluster.
    pub fn loop_indices(&self) -> &[usize] {
        &self.loop_indices
    }

    pub fn touched_window_boundary(&self) -> bool {
        self.touched_window_boundary
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.vertices.binary_search(p).is_ok()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    /// Does the cluster meet the inner boundary of `ball`? (It is connected
    /// and contains the origin, so any point on or beyond the boundary
    /// implies a point on it.)
    pub fn reaches(&self, ball: &Ball) -> bool {
        self.vertices.iter().any(|p| ball.reaches_boundary(p))
    }
}

pub fn origin_cluster(soup: &Soup) -> OriginCluster {
    let part = build_clusters(&soup.open_edges());
    let o = Point::origin(soup.dim());
    let vertices = part.component_of(&o);
    let loop_indices = match part.component(&o) {
        None => Vec::new(),
        Some(c) => soup
            .loops()
            .iter()
            .enumerate()
            .filter(|(_, l)| part.component(&l.root()) == Some(c))
            .map(|(i, _)| i)
            .collect(),
    };
    let touched = vertices.iter().any(|p| soup.window().reaches_boundary(p));
    OriginCluster::new(vertices, loop_indices, touched)
}

fn check_ball_in_window(soup: &Soup, n: i64) -> Result<Ball> {
    let w = soup.window();
    let needed = n + w.center.norm().ceil() as i64;
    if needed > w.radius {
        return Err(Error::WindowTooSmall { needed, radius: w.radius });
    }
    Ok(Ball::centered(soup.dim(), n))
}

/// `0 <-> ∂B_n`.
pub fn one_arm(soup: &Soup, n: i64) -> Result<bool> {
    let ball = check_ball_in_window(soup, n)?;
    Ok(origin_cluster(soup).reaches(&ball))
}

/// `0 <-> x`.
pub fn two_point(soup: &Soup, x: &Point) -> Result<bool> {
    if !soup.window().contains(x) {
        return Err(Error::OutOfWindow);
    }
    Ok(origin_cluster(soup).contains(x))
}

/// Is `source` connected to `target` using only loops accepted by `keep`?
pub fn filtered_connectivity<F>(soup: &Soup, keep: F, source: &Point, target: &Target) -> Result<bool>
where
    F: Fn(&Loop) -> bool,
{
    let w = soup.window();
    match target {
        Target::Sphere(b) => {
            let needed = b.radius + b.center.dist(&w.center).ceil() as i64;
            if needed > w.radius {
                return Err(Error::WindowTooSmall { needed, radius: w.radius });
            }
        }
        Target::Points(l) => {
            if l.iter().any(|p| !w.contains(p)) {
                return Err(Error::OutOfWindow);
            }
        }
    }
    let mut edges: Vec<Edge> = soup.loops().iter().filter(|l| keep(l)).flat_map(|l| l.edges()).collect();
    edges.sort_unstable();
    edges.dedup();
    let comp = build_clusters(&edges).component_of(source);
    Ok(match target {
        Target::Sphere(b) => comp.iter().any(|p| b.reaches_boundary(p)),
        Target::Points(l) => comp.iter().any(|p| l.contains(p)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopmeasure::{sample_bridge, LengthTable};
    use crate::rng::substream;
    use crate::soup::{sample_soup, SoupParams};
    use proptest::prelude::*;
    use rustc_hash::FxHashSet;
    use std::collections::VecDeque;

    fn bfs_component(edges: &[Edge], start: Point) -> Vec<Point> {
        let mut adj: FxHashMap<Point, Vec<Point>> = FxHashMap::default();
        for e in edges {
            let (a, b) = e.endpoints();
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen = FxHashSet::default();
        seen.insert(start);
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            for w in adj.get(&v).into_iter().flatten() {
                if seen.insert(*w) {
                    q.push_back(*w);
                }
            }
        }
        let mut v: Vec<Point> = seen.into_iter().collect();
        v.sort_unstable();
        v
    }

    fn line_loop(d: usize, len: i32) -> Loop {
        // out along e_1 and back
        let mut steps = vec![0u8; len as usize];
        steps.extend(vec![1u8; len as usize]);
        Loop::new(Point::origin(d), steps).unwrap()
    }

    #[test]
    fn empty_soup_cases() {
        let w = Ball::centered(3, 5);
        let s = Soup::empty(w, w);
        let c = origin_cluster(&s);
        assert_eq!(c.vertices(), &[Point::origin(3)]);
        assert_eq!(c.diameter(), 0.0);
        assert!(!one_arm(&s, 3).unwrap());
        assert!(!two_point(&s, &Point::unit(3, 0)).unwrap());
        assert!(build_clusters(&[]).component(&Point::origin(3)).is_none());
    }

    #[test]
    fn out_and_back_and_long_loop() {
        let w = Ball::centered(3, 6);
        let s = Soup::from_loops(w, w, vec![line_loop(3, 1)]);
        assert_eq!(origin_cluster(&s).vertices(), &[Point::origin(3), Point::unit(3, 0)]);
        let s = Soup::from_loops(w, w, vec![line_loop(3, 4)]);
        assert!(one_arm(&s, 3).unwrap());
        assert!(one_arm(&s, 4).unwrap());
        assert!(!one_arm(&s, 5).unwrap());
        assert!(two_point(&s, &Point::on_axis(3, 4)).unwrap());
        assert!(matches!(one_arm(&s, 7), Err(Error::WindowTooSmall { .. })));
        assert!(matches!(two_point(&s, &Point::on_axis(3, 9)), Err(Error::OutOfWindow)));
        assert_eq!(origin_cluster(&s).loop_indices(), &[0]);
    }

    #[test]
    fn filter_can_cut_the_only_bridge() {
        let w = Ball::centered(3, 6);
        let s = Soup::from_loops(w, w, vec![line_loop(3, 4)]);
        let t = Target::Points(vec![Point::on_axis(3, 4)]);
        let o = Point::origin(3);
        assert!(filtered_connectivity(&s, |_| true, &o, &t).unwrap());
        assert!(!filtered_connectivity(&s, |l| l.diameter() <= 3.0, &o, &t).unwrap());
        let sphere = Target::Sphere(Ball::centered(3, 4));
        assert_eq!(filtered_connectivity(&s, |_| true, &o, &sphere).unwrap(), one_arm(&s, 4).unwrap());
    }

    fn random_soup(seed: u64, alpha: f64) -> Soup {
        let t = LengthTable::build(3, 10, 1.0).unwrap();
        sample_soup(&SoupParams::new(alpha, Ball::centered(3, 4), seed), &t).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn union_find_matches_bfs(raw in prop::collection::vec((-3i32..4, -3i32..4, 0u8..4), 1..200)) {
            let edges: Vec<Edge> = raw.iter().map(|&(a, b, dir)| {
                let p = Point::new(&[a, b, 0]);
                Edge::new(p, p.step(dir)).unwrap()
            }).collect();
            let part = build_clusters(&edges);
            for &(a, b, _) in raw.iter().take(10) {
                let p = Point::new(&[a, b, 0]);
                prop_assert_eq!(part.component_of(&p), bfs_component(&edges, p));
            }
        }

        #[test]
        fn origin_cluster_matches_bfs(seed in any::<u64>()) {
            let s = random_soup(seed, 0.8);
            let edges = s.open_edges();
            prop_assert_eq!(origin_cluster(&s).vertices().to_vec(), bfs_component(&edges, Point::origin(3)));
            let n = 3;
            let bfs_arm = bfs_component(&edges, Point::origin(3)).iter().any(|p| Ball::centered(3, n).reaches_boundary(p));
            prop_assert_eq!(one_arm(&s, n).unwrap(), bfs_arm);
        }

        #[test]
        fn adding_loops_is_monotone(seed in any::<u64>(), extra in any::<u64>()) {
            let mut s = random_soup(seed, 0.5);
            let t = LengthTable::build(3, 10, 1.0).unwrap();
            let before: Vec<bool> = (0..=4).map(|n| one_arm(&s, n).unwrap()).collect();
            let x = Point::new(&[1, 1, 0]);
            let tp = two_point(&s, &x).unwrap();
            let mut rng = substream(extra, &[]);
            let root = Point::new(&[(extra % 3) as i32 - 1, 0, 0]);
            s.add_loop(sample_bridge(root, 6, &t, &mut rng).unwrap());
            for n in 0..=4 {
                prop_assert!(!before[n as usize] || one_arm(&s, n).unwrap());
            }
            prop_assert!(!tp || two_point(&s, &x).unwrap());
            // one_arm(n2) implies one_arm(n1) for n1 <= n2
            for n in 1..=4 {
                prop_assert!(!one_arm(&s, n).unwrap() || one_arm(&s, n - 1).unwrap());
            }
        }

        #[test]
        fn diameter_filter_is_monotone(seed in any::<u64>()) {
            let s = random_soup(seed, 0.8);
            let o = Point::origin(3);
            let t = Target::Sphere(Ball::centered(3, 3));
            let mut prev = false;
            for m in 0..=6 {
                let c = filtered_connectivity(&s, |l| l.diameter() <= m as f64, &o, &t).unwrap();
                prop_assert!(!prev || c);
                prev = c;
            }
            prop_assert_eq!(prev, one_arm(&s, 3).unwrap());
        }
    }
}
