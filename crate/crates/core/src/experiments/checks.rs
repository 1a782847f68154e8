//! Monte Carlo checks of the Mecke equation and of positive association.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Ball, Edge, Point};
use crate::loopmeasure::{sample_bridge, LengthTable};
use crate::percolation::{one_arm, two_point};
use crate::rng::{batched, substream, tag, BATCH};
use crate::soup::{sample_soup, Soup, SoupParams};
use crate::stats::{z_score, MeanAccumulator};

/// One compared quantity.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub lhs: f64,
    pub lhs_std_error: f64,
    pub rhs: f64,
    pub rhs_std_error: f64,
    /// Closed-form value where one exists.
    pub exact: Option<f64>,
    /// `|lhs - rhs|` over the combined standard error.
    pub z: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: u64,
    pub seed: u64,
    pub threshold: f64,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
    pub wall_time_s: f64,
}

/// Combined standard errors allowed between the two sides.
pub const CHECK_SIGMAS: f64 = 4.0;

fn soup_rooted_in(table: &LengthTable, alpha: f64, window: &Ball, seed: u64, replica: u64) -> Result<Soup> {
    // only loops rooted in the window belong to the truncated loop space
    let p = SoupParams::new(alpha, *window, seed).replica(replica);
    let full = sample_soup(&p, table)?;
    let kept = full.loops().iter().filter(|l| window.contains(&l.root())).cloned().collect();
    Ok(Soup::from_loops(*window, *window, kept))
}

/// Sum over soup points against the intensity integral, for
/// `f ≡ 1`, `f_1 = 1{root(ω) = 0}` and `f_2 = 1{root(ω) = 0} #(η ∖ ω)`,
/// on loops rooted in `window` with length at most `l_max`.
pub fn verify_mecke(table: &LengthTable, alpha: f64, window: &Ball, samples: u64, seed: u64) -> Result<CheckReport> {
    let start = Instant::now();
    if window.dim() != table.dim() {
        return Err(Error::DimensionMismatch { expected: table.dim(), got: window.dim() });
    }
    let o = Point::origin(table.dim());
    if !window.contains(&o) {
        return Err(Error::OutOfWindow);
    }
    let roots = window.points();
    let volume = roots.len() as f64;
    let total_mass = table.mass() * volume;

    // left: E[sum_{ω in η} f(η ∖ ω, ω)]
    let lhs_parts = batched(samples, BATCH, |b, n| -> Result<[MeanAccumulator; 3]> {
        let mut acc = [MeanAccumulator::new(); 3];
        for i in 0..n {
            let s = soup_rooted_in(table, alpha, window, seed, b * BATCH + i)?;
            let total = s.len() as f64;
            let at0 = s.loops().iter().filter(|l| l.root() == o).count() as f64;
            acc[0].push(total);
            acc[1].push(at0);
            acc[2].push(at0 * (total - 1.0));
        }
        Ok(acc)
    });
    // right: alpha M E[f(η, ω)] with ω ~ mu / M independent of η
    let rhs_parts = batched(samples, BATCH, |b, n| -> Result<[MeanAccumulator; 2]> {
        let mut rng = substream(seed, &[tag::MECKE, b]);
        let mut acc = [MeanAccumulator::new(); 2];
        for i in 0..n {
            let root = roots[rand::Rng::random_range(&mut rng, 0..roots.len())];
            let k = table.sample_length(&mut rng);
            let w = sample_bridge(root, k, table, &mut rng)?;
            let eta = soup_rooted_in(table, alpha, window, seed ^ 0x5bd1_e995, b * BATCH + i)?;
            let f1 = (w.root() == o) as u8 as f64;
            acc[0].push(alpha * total_mass * f1);
            acc[1].push(alpha * total_mass * f1 * eta.len() as f64);
        }
        Ok(acc)
    });
    let mut lhs = [MeanAccumulator::new(); 3];
    for p in lhs_parts {
        for (a, b) in lhs.iter_mut().zip(p?) {
            a.merge(&b);
        }
    }
    let mut rhs = [MeanAccumulator::new(); 2];
    for p in rhs_parts {
        for (a, b) in rhs.iter_mut().zip(p?) {
            a.merge(&b);
        }
    }

    let am = alpha * total_mass;
    let row = |name: &str, l: &MeanAccumulator, r: f64, r_se: f64, exact: f64| {
        let z = z_score(l.mean(), l.std_error(), r, r_se);
        CheckRow {
            name: name.into(),
            lhs: l.mean(),
            lhs_std_error: l.std_error(),
            rhs: r,
            rhs_std_error: r_se,
            exact: Some(exact),
            z,
            passed: z <= CHECK_SIGMAS,
        }
    };
    let rows = vec![
        row("f=1", &lhs[0], am, 0.0, am),
        row("f1=root_at_origin", &lhs[1], rhs[0].mean(), rhs[0].std_error(), alpha * table.mass()),
        row("f2=root_at_origin*others", &lhs[2], rhs[1].mean(), rhs[1].std_error(), alpha * table.mass() * am),
    ];
    let passed = rows.iter().all(|r| r.passed);
    Ok(CheckReport {
        name: "mecke".into(),
        samples,
        seed,
        threshold: CHECK_SIGMAS,
        rows,
        passed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Estimate of `D = P(A ∩ B) - P(A) P(B)` from indicator pairs, with the
/// delta-method standard error (influence `1_{AB} - P(B) 1_A - P(A) 1_B`).
#[derive(Clone, Copy, Debug, Default)]
struct PairAcc {
    n: f64,
    a: f64,
    b: f64,
    ab: f64,
}

impl PairAcc {
    fn push(&mut self, a: bool, b: bool) {
        let (a, b) = (a as u8 as f64, b as u8 as f64);
        self.n += 1.0;
        self.a += a;
        self.b += b;
        self.ab += a * b;
    }

    fn merge(&mut self, o: &PairAcc) {
        self.n += o.n;
        self.a += o.a;
        self.b += o.b;
        self.ab += o.ab;
    }

    /// `(P(A), P(B), P(AB), D, se(D))`
    fn summary(&self) -> (f64, f64, f64, f64, f64) {
        let n = self.n;
        let (pa, pb, pab) = (self.a / n, self.b / n, self.ab / n);
        let d = pab - pa * pb;
        // psi = 1{AB} - pb 1{A} - pa 1{B} + pa pb has mean d; its second
        // moment is a sum over the four cells of (1_A, 1_B).
        let p11 = pab;
        let p10 = pa - pab;
        let p01 = pb - pab;
        let p00 = 1.0 - pa - pb + pab;
        let psi = |ia: f64, ib: f64| ia * ib - pb * ia - pa * ib + pa * pb;
        let m2 = p11 * psi(1.0, 1.0).powi(2)
            + p10 * psi(1.0, 0.0).powi(2)
            + p01 * psi(0.0, 1.0).powi(2)
            + p00 * psi(0.0, 0.0).powi(2);
        let var = (m2 - d * d).max(0.0);
        (pa, pb, pab, d, (var / n).sqrt())
    }
}

/// `P(A ∩ B) >= P(A) P(B)` for increasing events of the soup in
/// `B_window`: two perpendicular edges at the origin, `0 <-> ∂B_2` with
/// `0 <-> e_1`, and two edges further apart than any loop can stretch
/// (independent, so `D` should vanish).
pub fn verify_fkg(table: &LengthTable, alpha: f64, window: i64, samples: u64, seed: u64) -> Result<CheckReport> {
    let start = Instant::now();
    let d = table.dim();
    let reach = table.l_max() as i64 / 2;
    let far = reach + 1;
    if window < far + 1 || window < 2 {
        return Err(Error::WindowTooSmall { needed: (far + 1).max(2), radius: window });
    }
    let o = Point::origin(d);
    let e1 = Point::unit(d, 0);
    let e2 = Point::unit(d, 1);
    let edge_a = Edge::new(o, e1)?;
    let edge_b = Edge::new(o, e2)?;
    // the far edge sits at distance > l_max / 2 from both ends of edge_a
    let p = Point::on_axis(d, -(far as i32));
    let edge_c = Edge::new(p, p.step(1))?;
    let ball = Ball::centered(d, window);

    let parts = batched(samples, BATCH, |b, n| -> Result<[PairAcc; 3]> {
        let mut acc = [PairAcc::default(); 3];
        for i in 0..n {
            let s = sample_soup(&SoupParams::new(alpha, ball, seed).replica(b * BATCH + i), table)?;
            let (a, bb, c) = (s.is_open(&edge_a), s.is_open(&edge_b), s.is_open(&edge_c));
            acc[0].push(a, bb);
            acc[1].push(one_arm(&s, 2)?, two_point(&s, &e1)?);
            acc[2].push(a, c);
        }
        Ok(acc)
    });
    let mut acc = [PairAcc::default(); 3];
    for p in parts {
        for (x, y) in acc.iter_mut().zip(p?) {
            x.merge(&y);
        }
    }
    let names = ["adjacent_edges", "one_arm2_and_two_point_e1", "distant_edges"];
    let rows: Vec<CheckRow> = acc
        .iter()
        .zip(names)
        .map(|(a, name)| {
            let (pa, pb, pab, dd, se) = a.summary();
            let z = if se > 0.0 { dd / se } else if dd >= 0.0 { 0.0 } else { f64::NEG_INFINITY };
            CheckRow {
                name: name.into(),
                lhs: pab,
                lhs_std_error: se,
                rhs: pa * pb,
                rhs_std_error: 0.0,
                exact: None,
                z,
                passed: dd >= -CHECK_SIGMAS * se,
            }
        })
        .collect();
    let passed = rows.iter().all(|r| r.passed);
    Ok(CheckReport {
        name: "fkg".into(),
        samples,
        seed,
        threshold: CHECK_SIGMAS,
        rows,
        passed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_summary_matches_direct_formula() {
        let mut p = PairAcc::default();
        let data = [(true, true), (true, false), (false, false), (false, true), (true, true)];
        for _ in 0..20 {
            for &(a, b) in &data {
                p.push(a, b);
            }
        }
        let (pa, pb, pab, d, se) = p.summary();
        assert!((pa - 0.6).abs() < 1e-12 && (pb - 0.6).abs() < 1e-12 && (pab - 0.4).abs() < 1e-12);
        assert!((d - 0.04).abs() < 1e-12);
        assert!(se > 0.0);
    }

    #[test]
    fn small_mecke_run_passes() {
        let t = LengthTable::build(3, 6, 1.0).unwrap();
        let r = verify_mecke(&t, 0.5, &Ball::centered(3, 1), 4000, 1).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn zero_activity_fkg_is_degenerate() {
        let t = LengthTable::build(3, 4, 1.0).unwrap();
        let r = verify_fkg(&t, 0.0, 4, 200, 1).unwrap();
        assert!(r.passed);
        assert!(r.rows.iter().all(|row| row.lhs == 0.0 && row.rhs == 0.0));
    }
}
