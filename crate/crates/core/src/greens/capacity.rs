//! Equilibrium measure and capacity of finite sets.
//!
//! For finite `K` the equilibrium measure `e_K` solves `G_K e = 1` on `K`,
//! with `G_K = (G(x - y))_{x, y in K}`; its entries are the escape
//! probabilities and `Cap(K) = sum e_K`. For `y` outside `K` the last-exit
//! decomposition gives `P_y(H_K < inf) = sum_x G(y - x) e_K(x)`.

use serde::Serialize;

use super::GreenTable;
use crate::error::{Error, Result};
use crate::lattice::Point;

/// Largest set handled by the dense Cholesky solve.
pub const MAX_DIRECT_SOLVE: usize = 2000;

const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    /// The set, sorted and deduplicated.
    pub points: Vec<Point>,
    /// `e_K(x)` in the order of `points`.
    pub equilibrium: Vec<f64>,
    pub capacity: f64,
    /// `max_x |(G_K e)(x) - 1|`.
    pub residual: f64,
}

impl CapacityResult {
    pub fn contains(&self, y: &Point) -> bool {
        self.points.binary_search(y).is_ok()
    }
}

pub fn capacity(table: &GreenTable, set: &[Point]) -> Result<CapacityResult> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut points = set.to_vec();
    points.sort_unstable();
    points.dedup();
    for p in &points {
        if p.dim() != table.dim() {
            return Err(Error::DimensionMismatch { expected: table.dim(), got: p.dim() });
        }
    }
    let n = points.len();
    if n > MAX_DIRECT_SOLVE {
        return Err(Error::SetTooLarge { size: n, limit: MAX_DIRECT_SOLVE });
    }
    if n == 1 {
        let g0 = table.at_origin();
        let e = 1.0 / g0;
        return Ok(CapacityResult {
            points,
            equilibrium: vec![e],
            capacity: e,
            residual: (g0 * e - 1.0).abs(),
        });
    }

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let g = table.value(&(points[i] - points[j]));
            a[i * n + j] = g;
            a[j * n + i] = g;
        }
    }
    let chol = Cholesky::factor(&a, n)?;
    let ones = vec![1.0; n];
    let mut e = chol.solve(&ones);
    // one step of iterative refinement
    let r = residual_vec(&a, n, &e);
    let de = chol.solve(&r);
    for (x, d) in e.iter_mut().zip(&de) {
        *x += d;
    }
    let residual = residual_vec(&a, n, &e).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > RESIDUAL_TOL {
        return Err(Error::IllConditioned { condition: chol.condition_estimate() });
    }
    let capacity = e.iter().sum();
    Ok(CapacityResult { points, equilibrium: e, capacity, residual })
}

/// `[lower, upper]` bracket of `Cap(K)`, exact (equal ends) up to
/// `MAX_DIRECT_SOLVE` points. Larger sets keep the `MAX_DIRECT_SOLVE` points
/// `S` closest to `center`: capacity is monotone, so `Cap(S)` is a lower
/// bound, and subadditive, so `Cap(S) + |K \ S| / G(0)` is an upper bound.
pub fn capacity_bracket(table: &GreenTable, set: &[Point], center: &Point) -> Result<(f64, f64)> {
    let mut points = set.to_vec();
    points.sort_unstable();
    points.dedup();
    if points.len() <= MAX_DIRECT_SOLVE {
        let c = capacity(table, &points)?.capacity;
        return Ok((c, c));
    }
    points.sort_by_key(|p| (p.dist2(center), *p));
    let rest = (points.len() - MAX_DIRECT_SOLVE) as f64;
    points.truncate(MAX_DIRECT_SOLVE);
    let lower = capacity(table, &points)?.capacity;
    Ok((lower, lower + rest / table.at_origin()))
}

/// `1 - G_K e`.
fn residual_vec(a: &[f64], n: usize, e: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| 1.0 - a[i * n..(i + 1) * n].iter().zip(e).map(|(g, x)| g * x).sum::<f64>())
        .collect()
}

/// `P_y(H_K < inf)`; exactly 1 for `y` in `K`.
pub fn hitting_probability(table: &GreenTable, y: &Point, cap: &CapacityResult) -> f64 {
    if cap.contains(y) {
        return 1.0;
    }
    let p: f64 = cap
        .points
        .iter()
        .zip(&cap.equilibrium)
        .map(|(x, e)| table.value(&(*y - *x)) * e)
        .sum();
    if p > 1.0 + 1e-8 || p < -1e-8 {
        log::warn!("hitting probability {p} clamped to [0, 1]");
    }
    p.clamp(0.0, 1.0)
}

struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(a: &[f64], n: usize) -> Result<Cholesky> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                let partial = Cholesky { n: j.max(1), l: l.clone() };
                let cond = if j == 0 { f64::INFINITY } else { partial.condition_estimate() };
                return Err(Error::IllConditioned { condition: cond });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// `(max L_ii / min L_ii)^2`, a cheap lower estimate of the 2-norm
    /// condition number.
    fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let diag = (0..n).map(|i| self.l[i * n + i]).filter(|v| *v > 0.0);
        let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (hi / lo).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Ball;

    #[test]
    fn singleton_and_pair() {
        let t = GreenTable::new(3).unwrap();
        let o = Point::origin(3);
        let e1 = Point::unit(3, 0);
        let c = capacity(&t, &[o]).unwrap();
        assert!((c.capacity - 1.0 / t.at_origin()).abs() < 1e-15);
        assert!((c.capacity - 0.659_463).abs() < 1e-6);
        let c2 = capacity(&t, &[o, e1]).unwrap();
        let want = 2.0 / (t.at_origin() + t.value(&e1));
        assert!((c2.capacity - want).abs() < 1e-12);
        assert!(c2.residual <= 1e-10);
    }

    #[test]
    fn ball_capacity_bounds_d5() {
        let t = GreenTable::new(5).unwrap();
        let k = Ball::centered(5, 1).points();
        assert_eq!(k.len(), 11);
        let c = capacity(&t, &k).unwrap();
        assert!(c.capacity > 1.0 / t.at_origin() && c.capacity < 11.0);
        assert!(c.equilibrium.iter().all(|&e| (-1e-10..=1.0 + 1e-10).contains(&e)));
        // every step from the centre lands in K, so it cannot escape
        let centre = c.points.binary_search(&Point::origin(5)).unwrap();
        assert!(c.equilibrium[centre].abs() < 1e-10);
    }

    #[test]
    fn hitting_inside_is_one_and_singleton_reduces() {
        let t = GreenTable::new(3).unwrap();
        let o = Point::origin(3);
        let c = capacity(&t, &[o]).unwrap();
        assert_eq!(hitting_probability(&t, &o, &c), 1.0);
        let y = Point::new(&[2, 1, 0]);
        let h = hitting_probability(&t, &y, &c);
        assert!((h - t.value(&y) / t.at_origin()).abs() < 1e-14);
    }

    #[test]
    fn bracket_of_large_set() {
        let t = GreenTable::new(3).unwrap();
        let o = Point::origin(3);
        let small = Ball::centered(3, 2).points();
        let (lo, hi) = capacity_bracket(&t, &small, &o).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo, capacity(&t, &small).unwrap().capacity);
        let big = Ball::centered(3, 8).points();
        let (lo, hi) = capacity_bracket(&t, &big, &o).unwrap();
        // the kept points are B_7 plus part of the next shell
        let inner = capacity(&t, &Ball::centered(3, 7).points()).unwrap().capacity;
        assert!(lo >= inner - 1e-9 && hi > lo);
        assert!((hi - lo - (big.len() - MAX_DIRECT_SOLVE) as f64 / t.at_origin()).abs() < 1e-9);
    }

    #[test]
    fn rejects_empty_and_oversized() {
        let t = GreenTable::new(3).unwrap();
        assert!(matches!(capacity(&t, &[]), Err(Error::EmptySet)));
        let big = Ball::centered(3, 8).points();
        assert!(big.len() > MAX_DIRECT_SOLVE);
        assert!(matches!(capacity(&t, &big), Err(Error::SetTooLarge { .. })));
    }
}
