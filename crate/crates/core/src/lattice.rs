//! Integer lattice geometry: points, nearest-neighbour edges, Euclidean
//! balls and their inner boundaries.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 8;

/// A point of Z^d, stored inline so that it is `Copy` and cheap to hash.
///
/// Coordinates past `dim` are always zero, which keeps the derived `Eq`,
/// `Hash` and `Ord` consistent with the mathematical point.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    coords: [i32; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[i32]) -> Point {
        Self::try_new(coords).expect("point dimension out of range")
    }

    pub fn try_new(coords: &[i32]) -> Result<Point> {
        let d = coords.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let mut c = [0; MAX_DIM];
        c[..d].copy_from_slice(coords);
        Ok(Point { coords: c, dim: d as u8 })
    }

    pub fn origin(dim: usize) -> Point {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Point { coords: [0; MAX_DIM], dim: dim as u8 }
    }

    /// The unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Point {
        let mut p = Point::origin(dim);
        p.coords[axis] = 1;
        p
    }

    /// `r * e_1`.
    pub fn on_axis(dim: usize, r: i32) -> Point {
        let mut p = Point::origin(dim);
        p.coords[0] = r;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    #[inline]
    pub fn norm2(&self) -> i64 {
        self.coords().iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn dist2(&self, other: &Point) -> i64 {
        (*self - *other).norm2()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Move one lattice step. Directions are numbered `2 * axis + sign`, with
    /// sign 0 meaning `+1` and sign 1 meaning `-1`.
    #[inline]
    pub fn step(&self, dir: u8) -> Point {
        let mut p = *self;
        let axis = (dir >> 1) as usize;
        p.coords[axis] += if dir & 1 == 0 { 1 } else { -1 };
        p
    }

    pub fn neighbors(&self) -> impl Iterator<Item = Point> + '_ {
        (0..2 * self.dim).map(move |dir| self.step(dir))
    }

    pub fn is_neighbor(&self, other: &Point) -> bool {
        self.dim == other.dim && self.dist2(other) == 1
    }

    /// Representative of the orbit under coordinate permutations and sign
    /// flips: absolute values sorted in decreasing order.
    pub fn canonical(&self) -> Point {
        let mut p = *self;
        let d = self.dim();
        for c in p.coords[..d].iter_mut() {
            *c = c.abs();
        }
        p.coords[..d].sort_unstable_by(|a, b| b.cmp(a));
        p
    }

    pub fn max_abs_coord(&self) -> i32 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.coords.iter_mut().zip(rhs.coords.iter()) {
            *a += b;
        }
        self
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.coords.iter_mut().zip(rhs.coords.iter()) {
            *a -= b;
        }
        self
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(mut self) -> Point {
        for a in self.coords.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.coords().cmp(other.coords()))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<i32> = Vec::deserialize(d)?;
        Point::try_new(&v).map_err(serde::de::Error::custom)
    }
}

/// An undirected nearest-neighbour edge with its endpoints in lexicographic
/// order, so `(a, b)` and `(b, a)` build the same value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    lo: Point,
    hi: Point,
}

impl Edge {
    pub fn new(a: Point, b: Point) -> Result<Edge> {
        if !a.is_neighbor(&b) {
            return Err(Error::InvalidArgument(format!(
                "{a} and {b} are not nearest neighbours"
            )));
        }
        Ok(Self::between(a, b))
    }

    /// Caller guarantees that `a` and `b` are neighbours.
    #[inline]
    pub(crate) fn between(a: Point, b: Point) -> Edge {
        debug_assert!(a.is_neighbor(&b));
        if a <= b {
            Edge { lo: a, hi: b }
        } else {
            Edge { lo: b, hi: a }
        }
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.lo, self.hi)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// The Euclidean ball `B_r(center) = { x : |x - center| <= r }`.
///
/// Membership is decided on the integer `|x - center|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: i64,
}

impl Ball {
    pub fn new(center: Point, radius: i64) -> Ball {
        assert!(radius >= 0, "negative radius");
        Ball { center, radius }
    }

    pub fn centered(dim: usize, radius: i64) -> Ball {
        Ball::new(Point::origin(dim), radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        x.dist2(&self.center) <= self.radius * self.radius
    }

    /// True if `x` lies on the inner boundary or outside the ball. For a
    /// connected set containing a point of the ball, this is equivalent to
    /// meeting the inner boundary.
    #[inline]
    pub fn reaches_boundary(&self, x: &Point) -> bool {
        let r2 = self.radius * self.radius;
        let rel = *x - self.center;
        let n2 = rel.norm2();
        if n2 > r2 {
            return true;
        }
        let m = rel.max_abs_coord() as i64;
        n2 + 2 * m + 1 > r2
    }

    /// Inner boundary point: inside the ball with a neighbour outside.
    pub fn on_boundary(&self, x: &Point) -> bool {
        self.contains(x) && self.reaches_boundary(x)
    }

    pub fn enlarged(&self, by: i64) -> Ball {
        Ball::new(self.center, self.radius + by)
    }

    /// All lattice points of the ball in lexicographic order.
    pub fn points(&self) -> Vec<Point> {
        let d = self.dim();
        let r = self.radius as i32;
        let r2 = self.radius * self.radius;
        let mut out = Vec::new();
        let mut offset = vec![-r; d];
        loop {
            let n2: i64 = offset.iter().map(|&c| (c as i64) * (c as i64)).sum();
            if n2 <= r2 {
                out.push(self.center + Point::new(&offset));
            }
            // odometer, last axis fastest
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if offset[axis] < r {
                    offset[axis] += 1;
                    break;
                }
                offset[axis] = -r;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The inner boundary `{x in B : dist(x, B^c) = 1}` in lexicographic order.
/// A radius-0 ball yields its centre.
pub fn ball_boundary(ball: &Ball) -> Vec<Point> {
    if ball.radius == 0 {
        return vec![ball.center];
    }
    ball.points()
        .into_iter()
        .filter(|x| ball.reaches_boundary(x))
        .collect()
}

/// Minimal Euclidean distance between two point sets.
pub fn dist_sets(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best = i64::MAX;
    for x in a {
        for y in b {
            best = best.min(x.dist2(y));
        }
    }
    Ok((best as f64).sqrt())
}

/// Largest pairwise Euclidean distance of a point set (0 for fewer than two
/// points).
pub fn diameter(points: &[Point]) -> f64 {
    let mut best = 0i64;
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            best = best.max(x.dist2(y));
        }
    }
    (best as f64).sqrt()
}
