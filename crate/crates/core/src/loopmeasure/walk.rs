//! Simple random walks stopped on hitting a set or leaving a kill ball.

use rand::Rng;
use rustc_hash::FxHashSet;

use crate::lattice::{Ball, Point};

/// Membership test for a finite set of points, with a bounding-box filter
/// in front of the hash lookup.
#[derive(Clone, Debug)]
pub struct PointSet {
    lo: Point,
    hi: Point,
    points: Vec<Point>,
    lookup: Option<FxHashSet<Point>>,
}

impl PointSet {
    pub fn new(points: &[Point]) -> PointSet {
        assert!(!points.is_empty(), "PointSet needs at least one point");
        let d = points[0].dim();
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            let (mut l, mut h) = (lo.coords().to_vec(), hi.coords().to_vec());
            for i in 0..d {
                l[i] = l[i].min(p.coord(i));
                h[i] = h[i].max(p.coord(i));
            }
            lo = Point::new(&l);
            hi = Point::new(&h);
        }
        let mut v = points.to_vec();
        v.sort_unstable();
        v.dedup();
        let lookup = (v.len() > 8).then(|| v.iter().copied().collect());
        PointSet { lo, hi, points: v, lookup }
    }

    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        for i in 0..x.dim() {
            let c = x.coord(i);
            if c < self.lo.coord(i) || c > self.hi.coord(i) {
                return false;
            }
        }
        match &self.lookup {
            Some(set) => set.contains(x),
            None => self.points.contains(x),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How a stopped walk ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkEnd {
    /// Stopped at this point of the target.
    Hit(Point),
    /// First point outside the kill ball.
    Killed(Point),
}

/// Walk from `start` until `stop` holds or the walk leaves `kill`. The
/// starting point itself is not tested against `stop`.
pub fn walk_until<R, F>(start: Point, kill: &Ball, stop: F, rng: &mut R) -> WalkEnd
where
    R: Rng + ?Sized,
    F: Fn(&Point) -> bool,
{
    let d = start.dim();
    let c = kill.center;
    let r2 = kill.radius * kill.radius;
    let mut pos = start;
    let mut rel2 = start.dist2(&c);
    let dirs = 2 * d as u32;
    loop {
        let dir = rng.random_range(0..dirs) as u8;
        let axis = (dir / 2) as usize;
        let off = (pos.coord(axis) - c.coord(axis)) as i64;
        rel2 += if dir % 2 == 0 { 2 * off + 1 } else { 1 - 2 * off };
        pos = pos.step(dir);
        if rel2 > r2 {
            return WalkEnd::Killed(pos);
        }
        if stop(&pos) {
            return WalkEnd::Hit(pos);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn point_set_membership() {
        let pts = [Point::new(&[0, 0, 0]), Point::new(&[2, -1, 4])];
        let s = PointSet::new(&pts);
        assert!(s.contains(&pts[1]));
        assert!(!s.contains(&Point::new(&[1, 0, 0])));
        let many: Vec<Point> = Ball::centered(3, 2).points();
        let s = PointSet::new(&many);
        assert!(many.iter().all(|p| s.contains(p)));
        assert!(!s.contains(&Point::new(&[2, 1, 0])));
    }

    #[test]
    fn killed_walk_ends_just_outside() {
        let mut rng = substream(9, &[]);
        let kill = Ball::centered(3, 5);
        for _ in 0..200 {
            match walk_until(Point::origin(3), &kill, |_| false, &mut rng) {
                WalkEnd::Killed(p) => {
                    assert!(!kill.contains(&p));
                    assert!(p.neighbors().any(|q| kill.contains(&q)));
                }
                WalkEnd::Hit(_) => unreachable!(),
            }
        }
    }
}
