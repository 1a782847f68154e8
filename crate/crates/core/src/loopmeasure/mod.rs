//! The random walk loop measure `mu(omega) = (1/n) (2d)^{-n}` on closed
//! paths of length `n`: length tables, exact bridge sampling and Monte
//! Carlo estimators of loop masses of connection events.

mod bridge;
mod connect;
mod range;
mod table;
pub mod walk;

pub use bridge::{sample_bridge, Loop, LoopRecord};
pub use connect::{
    default_kill_radius, geometric_tail_factor, hitting_probability_mc, loop_mass_connect, ConnectEstimate, Target,
};
pub use range::{far_connect_mass, loop_range_stats, mean_range_rooted, sample_loop_through, MIN_ACCEPTED};
pub use table::{
    build_length_table, exact_closed_path_counts, per_vertex_mass, LengthTable, TableFile, VertexMass, DEFAULT_LMAX,
    TABLE_FORMAT, TABLE_VERSION,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{gauss_legendre, green};
    use crate::lattice::Point;
    use std::f64::consts::PI;

    /// `int -log(1 - phi) dtheta / (2 pi)^3` with the last angle done in
    /// closed form: `mean_t log(a - cos t) = log((a + sqrt(a^2 - 1)) / 2)`.
    fn mass_d3_fourier() -> f64 {
        let (z, w) = gauss_legendre(32);
        let mut nodes = Vec::new();
        let mut hi = PI;
        for _ in 0..30 {
            let lo = hi / 2.0;
            for (zi, wi) in z.iter().zip(&w) {
                nodes.push((0.5 * (lo + hi) + 0.5 * (hi - lo) * zi, 0.5 * (hi - lo) * wi));
            }
            hi = lo;
        }
        let mut s = 0.0;
        for &(t1, w1) in &nodes {
            for &(t2, w2) in &nodes {
                let a = 3.0 - t1.cos() - t2.cos();
                let inner = ((a + (a * a - 1.0).sqrt()) / 2.0).ln() - 3f64.ln();
                s += w1 * w2 * -inner;
            }
        }
        s / (PI * PI)
    }

    #[test]
    fn mass_d3_matches_fourier_integral() {
        let t = build_length_table(3, DEFAULT_LMAX, 1e-5).unwrap();
        let m = per_vertex_mass(&t);
        let oracle = mass_d3_fourier();
        assert!(m.truncated < oracle + 1e-9, "{} vs {oracle}", m.truncated);
        assert!(m.upper() > oracle - 1e-9, "{} vs {oracle}", m.upper());
        assert!((m.truncated - oracle).abs() < 1e-5);
        // the rooted mass sits strictly below log G(0)
        assert!(m.upper() < green(&Point::origin(3)).unwrap().ln());
    }

    /// `sum_k p_k` with the tail removed by fitting
    /// `S(L) = G - a L^{-(d-2)/2} - b L^{-d/2}` at three cutoffs.
    fn green_origin_series(d: usize) -> f64 {
        let t = build_length_table(d, 12_000, 1.0).unwrap();
        let partial = |l: usize| -> f64 { (0..=l).step_by(2).map(|k| t.return_probability(k)).sum() };
        let e1 = (d as f64 - 2.0) / 2.0;
        let e2 = d as f64 / 2.0;
        let ls: [f64; 3] = [3000.0, 6000.0, 12000.0];
        let s: Vec<f64> = ls.iter().map(|&l| partial(l as usize)).collect();
        // solve [1, -L^-e1, -L^-e2] [G a b]^T = S
        let m: Vec<[f64; 3]> = ls.iter().map(|&l| [1.0, -l.powf(-e1), -l.powf(-e2)]).collect();
        let det = |a: [[f64; 3]; 3]| {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let full = [m[0], m[1], m[2]];
        let mut g = full;
        for i in 0..3 {
            g[i][0] = s[i];
        }
        det(g) / det(full)
    }

    #[test]
    fn series_oracle_reproduces_green_at_origin() {
        for d in [3usize, 5] {
            let series = green_origin_series(d);
            let quad = green(&Point::origin(d)).unwrap();
            assert!((series - quad).abs() < 1e-6, "d={d}: series {series} vs quadrature {quad}");
        }
    }

    #[test]
    fn exact_counts_small() {
        assert_eq!(exact_closed_path_counts(2, 4)[4], 36);
        assert_eq!(exact_closed_path_counts(3, 2)[2], 6);
        assert_eq!(exact_closed_path_counts(3, 4)[4], 90);
    }
}
