//! Return probabilities `p_k(0,0)` of the simple random walk and the loop
//! length law `P(l = k) ∝ k^{-1} p_k(0,0)`.
//!
//! A closed `k`-step path decomposes into per-axis step counts `n_1..n_d`
//! (all even), one balanced `±1` word per axis, and an interleaving. With
//! `u(n) = C(n, n/2) 2^{-n}` the one-dimensional return probability,
//!
//! ```text
//! P_j(s) = sum_{n even} Binom(s, n; 1/j) u(n) P_{j-1}(s - n),   P_1 = u,
//! ```
//!
//! is the return probability of a `j`-dimensional walk after `s` steps, and
//! `p_k = P_d(k)`. Every factor is a probability, so the recursion is run on
//! logarithms of quantities in `(0, 1]` and summed directly. The partial
//! tables `P_j` are kept for bridge sampling.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;

pub const TABLE_FORMAT: &str = "loopsoup-length-table";
pub const TABLE_VERSION: u32 = 1;

/// Default length cutoff.
pub const DEFAULT_LMAX: usize = 10_000;

#[derive(Clone, Debug)]
pub struct LengthTable {
    dim: usize,
    l_max: usize,
    /// `p_k` for even `k = 0, 2, ..., l_max`, indexed by `k / 2`.
    p: Vec<f64>,
    mass: f64,
    tail_bound: f64,
    warning: Option<String>,
    /// `ln k!` for `k <= l_max`.
    pub(crate) ln_fact: Vec<f64>,
    /// `ln P_j(s)` indexed `[j - 1][s / 2]`.
    pub(crate) ln_partial: Vec<Vec<f64>>,
    /// Cumulative `w_k = p_k / k` over `k = 2, 4, ...`.
    length_cdf: Vec<f64>,
    /// Cumulative `p_k` over `k = 2, 4, ...`.
    return_cdf: Vec<f64>,
}

/// The per-vertex loop mass under the length cutoff, with a bound on what
/// the cutoff drops.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexMass {
    /// `m_d = sum_{k <= l_max} k^{-1} p_k`.
    pub truncated: f64,
    /// Upper bound on `sum_{k > l_max} k^{-1} p_k`.
    pub tail_bound: f64,
}

impl VertexMass {
    pub fn upper(&self) -> f64 {
        self.truncated + self.tail_bound
    }
}

pub fn build_length_table(dim: usize, l_max: usize, tolerance: f64) -> Result<LengthTable> {
    LengthTable::build(dim, l_max, tolerance)
}

pub fn per_vertex_mass(table: &LengthTable) -> VertexMass {
    VertexMass { truncated: table.mass, tail_bound: table.tail_bound }
}

impl LengthTable {
    pub fn build(dim: usize, l_max: usize, tolerance: f64) -> Result<LengthTable> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if l_max < 2 || l_max % 2 == 1 {
            return Err(Error::InvalidLength(l_max));
        }
        let half = l_max / 2;

        let mut ln_fact = vec![0.0f64; l_max + 1];
        for i in 1..=l_max {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let ln2 = std::f64::consts::LN_2;
        // ln u(n) for even n
        let ln_u: Vec<f64> = (0..=half)
            .map(|h| {
                let n = 2 * h;
                ln_fact[n] - 2.0 * ln_fact[h] - n as f64 * ln2
            })
            .collect();

        let mut ln_partial = vec![ln_u.clone()];
        for j in 2..=dim {
            let jf = j as f64;
            let ln_pick = (1.0 / jf).ln();
            let ln_rest = ((jf - 1.0) / jf).ln();
            let prev = &ln_partial[j - 2];
            let a: Vec<f64> = (0..=half)
                .map(|h| ln_u[h] - ln_fact[2 * h] + (2 * h) as f64 * ln_pick)
                .collect();
            let b: Vec<f64> = (0..=half)
                .map(|h| prev[h] - ln_fact[2 * h] + (2 * h) as f64 * ln_rest)
                .collect();
            let mut cur = vec![0.0; half + 1];
            for hs in 0..=half {
                let base = ln_fact[2 * hs];
                let mut acc = 0.0;
                for hn in 0..=hs {
                    acc += (base + a[hn] + b[hs - hn]).exp();
                }
                cur[hs] = acc.ln();
            }
            ln_partial.push(cur);
        }

        let p: Vec<f64> = ln_partial[dim - 1].iter().map(|v| v.exp()).collect();
        let mut length_cdf = Vec::with_capacity(half);
        let mut return_cdf = Vec::with_capacity(half);
        let (mut wsum, mut psum) = (0.0, 0.0);
        for h in 1..=half {
            wsum += p[h] / (2 * h) as f64;
            psum += p[h];
            length_cdf.push(wsum);
            return_cdf.push(psum);
        }

        // p_k <= c k^{-d/2} with c fitted at l_max (never below the local-CLT
        // constant 2 (d / 2pi)^{d/2}), and sum over even k > L of k^{-1-d/2}
        // is at most L^{-d/2} / d.
        let df = dim as f64;
        let lf = l_max as f64;
        let clt = 2.0 * (df / (2.0 * std::f64::consts::PI)).powf(df / 2.0);
        let c = (p[half] * lf.powf(df / 2.0)).max(clt);
        let tail_bound = c * lf.powf(-df / 2.0) / df;
        let warning = (tail_bound > tolerance).then(|| {
            let suggested = (c / (df * tolerance)).powf(2.0 / df).ceil() as usize;
            let suggested = suggested + suggested % 2;
            let msg = format!(
                "length tail bound {tail_bound:.3e} exceeds tolerance {tolerance:.3e}; \
                 l_max >= {suggested} would meet it"
            );
            log::warn!("{msg}");
            msg
        });

        let table = LengthTable {
            dim,
            l_max,
            p,
            mass: wsum,
            tail_bound,
            warning,
            ln_fact,
            ln_partial,
            length_cdf,
            return_cdf,
        };
        table.validate_exact()?;
        Ok(table)
    }

    /// Compare the floating-point table against exact integer path counts
    /// for the lengths whose counts fit in `u128`.
    fn validate_exact(&self) -> Result<()> {
        let two_d = 2 * self.dim as u128;
        let bits_per_step = (two_d as f64).log2();
        let mut k_max = (120.0 / bits_per_step).floor() as usize;
        k_max = k_max.min(self.l_max).min(60);
        k_max -= k_max % 2;
        for (k, count) in exact_closed_path_counts(self.dim, k_max).into_iter().enumerate() {
            if k % 2 == 1 {
                continue;
            }
            let exact = count as f64 / (two_d as f64).powi(k as i32);
            let got = self.p[k / 2];
            if ((got - exact) / exact).abs() > 1e-11 {
                return Err(Error::Numerical(format!(
                    "return probability p_{k} = {got} disagrees with exact count ({exact})"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `p_k(0, 0)`; zero for odd `k` and beyond the cutoff.
    pub fn return_probability(&self, k: usize) -> f64 {
        if k % 2 == 1 || k > self.l_max {
            0.0
        } else {
            self.p[k / 2]
        }
    }

    /// `w_k = k^{-1} p_k` for even `k >= 2`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 { 0.0 } else { self.return_probability(k) / k as f64 }
    }

    /// `m_d`, the truncated per-vertex loop mass.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `sum_{2 <= k <= l_max} p_k`: the mass of rooted loops that visit a
    /// given vertex, counted once per visit.
    pub fn return_mass(&self) -> f64 {
        *self.return_cdf.last().expect("non-empty table")
    }

    /// `P(l = k) = w_k / m_d`.
    pub fn length_probability(&self, k: usize) -> f64 {
        self.weight(k) / self.mass
    }

    /// Draw a loop length with probability `w_k / m_d`.
    pub fn sample_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        invert_cdf(&self.length_cdf, rng)
    }

    /// Draw a length with probability proportional to `p_k`.
    pub fn sample_return_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        invert_cdf(&self.return_cdf, rng)
    }

    pub(crate) fn ln_binom(&self, n: usize, k: usize) -> f64 {
        self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
    }

    pub fn to_file(&self) -> TableFile {
        TableFile {
            format: TABLE_FORMAT.to_string(),
            version: TABLE_VERSION,
            d: self.dim,
            l_max: self.l_max,
            p_k: self.p.clone(),
            m_d: self.mass,
            tail_bound: self.tail_bound,
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, &self.to_file())?;
        Ok(())
    }

    /// Rebuild a table from a dump, checking the stored values against a
    /// fresh computation.
    pub fn load_json(path: &Path) -> Result<LengthTable> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let file: TableFile = serde_json::from_reader(f)?;
        if file.format != TABLE_FORMAT || file.version != TABLE_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported table format {} v{}",
                file.format, file.version
            )));
        }
        let table = LengthTable::build(file.d, file.l_max, f64::INFINITY)?;
        let ok = file.p_k.len() == table.p.len()
            && file.p_k.iter().zip(&table.p).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs())
            && (file.m_d - table.mass).abs() <= 1e-12 * table.mass;
        if !ok {
            return Err(Error::Numerical("stored table does not match recomputation".into()));
        }
        Ok(table)
    }
}

fn invert_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    let u = rng.random::<f64>() * total;
    let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    2 * (idx + 1)
}

/// On-disk form of a [`LengthTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub format: String,
    pub version: u32,
    pub d: usize,
    pub l_max: usize,
    /// `p_k` for `k = 0, 2, ..., l_max`.
    pub p_k: Vec<f64>,
    pub m_d: f64,
    pub tail_bound: f64,
}

/// Exact number of closed `k`-step paths in Z^d for `k = 0..=k_max`,
/// via `N_j(s) = sum_n C(s, n) C(n, n/2) N_{j-1}(s - n)`.
pub fn exact_closed_path_counts(dim: usize, k_max: usize) -> Vec<u128> {
    let mut binom = vec![vec![0u128; k_max + 1]; k_max + 1];
    for n in 0..=k_max {
        binom[n][0] = 1;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
        }
    }
    let one_dim: Vec<u128> = (0..=k_max)
        .map(|n| if n % 2 == 0 { binom[n][n / 2] } else { 0 })
        .collect();
    let mut cur = one_dim.clone();
    for _ in 2..=dim {
        let mut next = vec![0u128; k_max + 1];
        for s in (0..=k_max).step_by(2) {
            next[s] = (0..=s)
                .step_by(2)
                .map(|n| binom[s][n] * one_dim[n] * cur[s - n])
                .sum();
        }
        cur = next;
    }
    cur
}
