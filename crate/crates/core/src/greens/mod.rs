//! Discrete potential theory for the simple random walk on Z^d, d >= 3.
//!
//! The Green's function `G(x) = sum_n p_n(0, x)` is evaluated through the
//! continuous-time representation
//!
//! ```text
//! G(x) = int_0^inf prod_j e^{-t/d} I_{x_j}(t/d) dt
//! ```
//!
//! (the jump chain of the rate-1 walk is the discrete walk, and the mean
//! holding time is 1). The integral is split at `T = d * s_T`: `[0, T]` is
//! done with composite Gauss-Legendre on dyadic panels, and `[T, inf)`
//! term by term from the large-argument Bessel expansion, whose leading term
//! is the local CLT density.

mod bessel;
mod capacity;
mod quadrature;

use std::f64::consts::PI;
use std::sync::RwLock;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::Point;

pub use bessel::{scaled_i_all, scaled_i_asymptotic, scaled_i_miller};
pub use capacity::{capacity, capacity_bracket, hitting_probability, CapacityResult, MAX_DIRECT_SOLVE};
pub use quadrature::gauss_legendre;

/// `C_d = d Gamma(d/2) / ((d - 2) pi^{d/2})`, the constant in
/// `G(x) ~ C_d |x|^{2-d}`.
pub fn green_constant(d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::RecurrentDimension(d));
    }
    let df = d as f64;
    Ok(df * gamma_half_integer(d) / ((df - 2.0) * PI.powf(df / 2.0)))
}

/// `Gamma(m / 2)` for a positive integer `m`, by the recursion
/// `Gamma(z + 1) = z Gamma(z)` from `Gamma(1) = 1`, `Gamma(1/2) = sqrt(pi)`.
fn gamma_half_integer(m: usize) -> f64 {
    let (mut z, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while z < m as f64 / 2.0 {
        g *= z;
        z += 1.0;
    }
    g
}

/// Quadrature parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenParams {
    /// Lower bound for the split point in the scaled variable `s = t/d`;
    /// the actual split is `max(min_split, |x|^2, bessel switch)`.
    pub min_split: f64,
    /// Gauss-Legendre nodes per dyadic panel.
    pub nodes_per_panel: usize,
    /// Number of correction terms in the tail expansion.
    pub tail_order: usize,
}

impl Default for GreenParams {
    fn default() -> Self {
        GreenParams { min_split: 400.0, nodes_per_panel: 32, tail_order: 24 }
    }
}

/// Uncached evaluation of `G(x)` with default parameters.
pub fn green(x: &Point) -> Result<f64> {
    let d = x.dim();
    if d < 3 {
        return Err(Error::RecurrentDimension(d));
    }
    Ok(evaluate(x, &GreenParams::default(), &gauss_legendre(GreenParams::default().nodes_per_panel)))
}

fn evaluate(x: &Point, params: &GreenParams, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let d = x.dim();
    let df = d as f64;
    let orders: Vec<usize> = x.coords().iter().map(|c| c.unsigned_abs() as usize).collect();
    let n_max = *orders.iter().max().unwrap();

    let split = params
        .min_split
        .max(x.norm2() as f64)
        .max(bessel::asymptotic_switch(n_max));
    let t_end = df * split;

    let integrand = |t: f64| -> f64 {
        let b = scaled_i_all(t / df, n_max);
        orders.iter().map(|&n| b[n]).product()
    };

    let (nodes, weights) = rule;
    let mut body = 0.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while lo < t_end {
        let b = hi.min(t_end);
        let half = 0.5 * (b - lo);
        let mid = 0.5 * (b + lo);
        let panel: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(z, w)| w * integrand(mid + half * z))
            .sum();
        body += half * panel;
        lo = b;
        hi = 2.0 * b;
    }

    body + tail(&orders, df, split, params.tail_order)
}

/// `int_{d s_T}^inf prod_j e^{-t/d} I_{n_j}(t/d) dt` from the product of the
/// large-argument expansions: with `s = t/d` the integrand is
/// `(2 pi s)^{-d/2} sum_m c_m s^{-m}`.
fn tail(orders: &[usize], df: f64, split: f64, order: usize) -> f64 {
    let mut poly = vec![0.0; order + 1];
    poly[0] = 1.0;
    for &n in orders {
        let a = bessel::asymptotic_coefficients(n, order);
        let mut next = vec![0.0; order + 1];
        for (i, &p) in poly.iter().enumerate() {
            for (j, &q) in a.iter().enumerate().take(order + 1 - i) {
                next[i + j] += p * q;
            }
        }
        poly = next;
    }
    let half_d = df / 2.0;
    let prefactor = df * (2.0 * PI).powf(-half_d);
    poly.iter()
        .enumerate()
        .map(|(m, &c)| {
            let e = half_d + m as f64 - 1.0;
            c * split.powf(-e) / e
        })
        .sum::<f64>()
        * prefactor
}

/// Memoised Green's function for one dimension, keyed by the canonical form
/// of the argument (sorted absolute coordinates), which the full
/// hyperoctahedral symmetry of `G` makes sufficient.
///
/// Values are filled on demand; the cache only ever grows and each entry is
/// a pure function of its key, so concurrent readers always agree.
pub struct GreenTable {
    dim: usize,
    params: GreenParams,
    rule: (Vec<f64>, Vec<f64>),
    constant: f64,
    cache: RwLock<FxHashMap<Point, f64>>,
}

impl GreenTable {
    pub fn new(dim: usize) -> Result<GreenTable> {
        Self::with_params(dim, GreenParams::default())
    }

    pub fn with_params(dim: usize, params: GreenParams) -> Result<GreenTable> {
        let constant = green_constant(dim)?;
        if dim > crate::lattice::MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(GreenTable {
            dim,
            params,
            rule: gauss_legendre(params.nodes_per_panel),
            constant,
            cache: RwLock::new(FxHashMap::default()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &GreenParams {
        &self.params
    }

    /// `C_d` for this table's dimension.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn value(&self, x: &Point) -> f64 {
        debug_assert_eq!(x.dim(), self.dim);
        let key = x.canonical();
        if let Some(&v) = self.cache.read().expect("green cache poisoned").get(&key) {
            return v;
        }
        let v = evaluate(&key, &self.params, &self.rule);
        self.cache.write().expect("green cache poisoned").insert(key, v);
        v
    }

    pub fn at_origin(&self) -> f64 {
        self.value(&Point::origin(self.dim))
    }

    /// Evaluate every canonical point with `|x| <= radius` up front.
    pub fn prefill(&self, radius: i64) {
        use rayon::prelude::*;
        let todo: Vec<Point> = crate::lattice::Ball::centered(self.dim, radius)
            .points()
            .into_iter()
            .filter(|p| *p == p.canonical())
            .filter(|p| !self.cache.read().expect("green cache poisoned").contains_key(p))
            .collect();
        let vals: Vec<(Point, f64)> = todo
            .into_par_iter()
            .map(|p| (p, evaluate(&p, &self.params, &self.rule)))
            .collect();
        let mut cache = self.cache.write().expect("green cache poisoned");
        cache.extend(vals);
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("green cache poisoned").len()
    }
}

impl std::fmt::Debug for GreenTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenTable")
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("cached", &self.cached_len())
            .finish()
    }
}

/// `P_y(H_0 < inf) = G(y) / G(0)` for `y != 0`.
pub fn hit_single_point(table: &GreenTable, y: &Point) -> Result<f64> {
    if y.is_origin() {
        return Err(Error::InvalidArgument("hit_single_point requires y != 0".into()));
    }
    Ok(table.value(y) / table.at_origin())
}
