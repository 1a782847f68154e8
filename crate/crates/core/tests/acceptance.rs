//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use loopsoup::experiments::{
    expected_cluster_capacity, lemma_scan, one_arm_scan, verify_fkg, verify_mecke, LemmaKind, LemmaParams,
    ScanSettings,
};
use loopsoup::greens::{capacity, green, GreenTable};
use loopsoup::loopmeasure::{sample_bridge, LengthTable};
use loopsoup::rng::substream;
use loopsoup::soup::{sample_soup, SoupHeader, SoupParams};
use loopsoup::stats::MeanAccumulator;
use loopsoup::{Ball, Point};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("green_values", green_values),
        ("capacity_identities", capacity_identities),
        ("bridge_exactness", bridge_exactness),
        ("soup_law", soup_law),
        ("single_loop_sphere_d3", single_loop_sphere),
        ("singleton_pair_d3", singleton_pair),
        ("one_arm_order_d5", one_arm_order),
        ("mecke_and_fkg", mecke_and_fkg),
        ("cluster_capacity_small_alpha_d5", cluster_capacity_limit),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name} ({secs:.1}s): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.passed as i32;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ln_binom(n: u64, k: u64, ln_fact: &[f64]) -> f64 {
    ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize]
}

/// `sum_{2n <= l} p_{2n}` in d = 3 from the closed-walk count
/// `C(2n, n) sum_k C(n, k)^2 C(2k, k)`, for each `l` in `cuts`.
fn return_series_d3(cuts: &[u64]) -> Vec<f64> {
    let n_max = cuts.iter().max().unwrap() / 2;
    let mut ln_fact = vec![0.0f64; 2 * n_max as usize + 1];
    for i in 1..ln_fact.len() {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln6 = 6f64.ln();
    let mut partial = 1.0; // p_0
    let mut out = vec![0.0; cuts.len()];
    for n in 1..=n_max {
        let terms: Vec<f64> = (0..=n)
            .map(|k| 2.0 * ln_binom(n, k, &ln_fact) + ln_binom(2 * k, k, &ln_fact))
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
        partial += (ln_binom(2 * n, n, &ln_fact) + lse - 2.0 * n as f64 * ln6).exp();
        for (i, &c) in cuts.iter().enumerate() {
            if c / 2 == n {
                out[i] = partial;
            }
        }
    }
    out
}

/// Solve the 3x3 system `S(L) = G - a L^{-1/2} - b L^{-3/2}` for `G`.
fn extrapolate(cuts: &[u64], sums: &[f64]) -> f64 {
    let rows: Vec<[f64; 4]> = cuts
        .iter()
        .zip(sums)
        .map(|(&l, &s)| [1.0, -(l as f64).powf(-0.5), -(l as f64).powf(-1.5), s])
        .collect();
    let mut m = rows;
    for c in 0..3 {
        let p = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..4 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    m[0][3] / m[0][0]
}

fn green_values() -> Outcome {
    let cuts = [3000u64, 6000, 12000];
    let oracle = extrapolate(&cuts, &return_series_d3(&cuts));
    let g0 = green(&Point::origin(3)).unwrap();
    let series_ok = (g0 - oracle).abs() < 1e-6;

    let mut rng = substream(2024, &[1]);
    let mut worst: f64 = 0.0;
    for d in [3usize, 5] {
        let t = GreenTable::new(d).unwrap();
        for _ in 0..20 {
            let x = loop {
                let c: Vec<i32> = (0..d).map(|_| rng.random_range(-30..=30)).collect();
                let p = Point::new(&c);
                if (100..=900).contains(&p.norm2()) {
                    break p;
                }
            };
            let r = t.value(&x) * x.norm().powi(d as i32 - 2) / t.constant();
            worst = worst.max((r - 1.0).abs());
        }
    }
    let far_ok = worst <= 0.02;
    outcome(
        series_ok && far_ok,
        format!("G3(0) = {g0:.12}, series oracle {oracle:.12}, diff {:.2e}; worst far-field |ratio - 1| = {worst:.4}", (g0 - oracle).abs()),
    )
}

fn capacity_identities() -> Outcome {
    let t = GreenTable::new(3).unwrap();
    let o = Point::origin(3);
    let e1 = Point::unit(3, 0);
    let c0 = capacity(&t, &[o]).unwrap().capacity;
    let d0 = (c0 - 1.0 / t.at_origin()).abs();
    let c2 = capacity(&t, &[o, e1]).unwrap().capacity;
    let d2 = (c2 - 2.0 / (t.at_origin() + t.value(&e1))).abs();

    let pool = Ball::centered(3, 3).points();
    let mut rng = substream(2024, &[2]);
    let mut violations = 0;
    for _ in 0..100 {
        let mut pts = pool.clone();
        pts.shuffle(&mut rng);
        let big = rng.random_range(2..=40);
        let small = rng.random_range(1..big);
        let a = capacity(&t, &pts[..small]).unwrap().capacity;
        let b = capacity(&t, &pts[..big]).unwrap().capacity;
        violations += (a > b + 1e-12) as u32;
    }
    outcome(
        d0 < 1e-10 && d2 < 1e-10 && violations == 0,
        format!("|cap{{0}} - 1/G(0)| = {d0:.1e}, |cap{{0,e1}} - 2/(G(0)+G(e1))| = {d2:.1e}, monotonicity violations {violations}/100"),
    )
}

fn bridge_exactness() -> Outcome {
    // every closed 4-step walk in Z^2 has the same bridge probability
    let mut closed: Vec<[u8; 4]> = Vec::new();
    for code in 0..256u32 {
        let s = [(code & 3) as u8, ((code >> 2) & 3) as u8, ((code >> 4) & 3) as u8, ((code >> 6) & 3) as u8];
        let mut p = Point::origin(2);
        for &st in &s {
            p = p.step(st);
        }
        if p.is_origin() {
            closed.push(s);
        }
    }
    let t2 = LengthTable::build(2, 4, 1.0).unwrap();
    let mut rng = substream(2024, &[3]);
    let mut counts = vec![0u64; closed.len()];
    let n = 1_000_000u64;
    for _ in 0..n {
        let l = sample_bridge(Point::origin(2), 4, &t2, &mut rng).unwrap();
        let i = closed.iter().position(|c| c[..] == l.steps()[..]).expect("sampled walk is closed");
        counts[i] += 1;
    }
    let tv = 0.5 * counts.iter().map(|&c| (c as f64 / n as f64 - 1.0 / closed.len() as f64).abs()).sum::<f64>();

    let t3 = LengthTable::build(3, 64, 1.0).unwrap();
    let mut violations = 0u64;
    for i in 0..n {
        let root = Point::new(&[(i % 7) as i32 - 3, 0, 2]);
        let k = t3.sample_length(&mut rng);
        let l = sample_bridge(root, k, &t3, &mut rng).unwrap();
        let tr = l.trace();
        let bad = tr.len() != k + 1
            || tr[0] != root
            || tr[k] != root
            || tr.windows(2).any(|w| w[0].dist2(&w[1]) != 1);
        violations += bad as u64;
    }
    outcome(
        tv < 0.01 && violations == 0,
        format!("{} closed 4-walks in Z^2, TV = {tv:.5} over 10^6 draws; invariant violations {violations} in 10^6 loops", closed.len()),
    )
}

fn soup_bytes(params: &SoupParams, table: &LengthTable) -> Vec<u8> {
    let s = sample_soup(params, table).unwrap();
    let mut buf = Vec::new();
    s.write_jsonl(&mut buf, &SoupHeader::new(params, table, &s, "acceptance")).unwrap();
    buf
}

fn soup_law() -> Outcome {
    let t = LengthTable::build(3, 8, 1.0).unwrap();
    let window = Ball::centered(3, 2);
    let acc: MeanAccumulator = (0..10_000u64)
        .map(|r| sample_soup(&SoupParams::new(0.5, window, 99).replica(r), &t).unwrap().len() as f64)
        .collect();
    let dispersion = acc.variance() / acc.mean();
    let roots = SoupParams::new(0.5, window, 99).root_window(&t).points().len() as f64;
    let expected = 0.5 * t.mass() * roots;

    let params = SoupParams::new(0.7, Ball::centered(3, 6), 5).replica(3);
    let big = LengthTable::build(3, 24, 1.0).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let a = one.install(|| soup_bytes(&params, &big));
    let b = eight.install(|| soup_bytes(&params, &big));
    let same = a == b;
    outcome(
        (0.95..=1.05).contains(&dispersion) && same,
        format!(
            "dispersion {dispersion:.4} (mean {:.3}, expected alpha m_d |roots| = {expected:.3}); 1 vs 8 threads identical: {same} ({} bytes)",
            acc.mean(),
            a.len()
        ),
    )
}

fn single_loop_sphere() -> Outcome {
    let g = GreenTable::new(3).unwrap();
    let t = LengthTable::build(3, 10, 1.0).unwrap();
    let p = LemmaParams::new(LemmaKind::SingleLoop, 1_000_000, 33).radii(&[10, 20, 40]).kill_factor(2.0);
    let r = lemma_scan(&g, &t, &p).unwrap();
    let ok = r.rows.iter().all(|row| (0.9..=1.1).contains(&row.ratio));
    let parts: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("n={} ratio {:.4} +- {:.4}", row.param, row.ratio, row.estimate.std_error / row.reference))
        .collect();
    outcome(ok, parts.join(", "))
}

fn singleton_pair() -> Outcome {
    let g = GreenTable::new(3).unwrap();
    let t = LengthTable::build(3, 10, 1.0).unwrap();
    let p = LemmaParams::new(LemmaKind::TwoSets, 1_000_000, 34).radii(&[8, 16]);
    let r = lemma_scan(&g, &t, &p).unwrap();
    let ok = r.rows.iter().all(|row| row.get("z_exact").unwrap() <= 3.0);
    let parts: Vec<String> = r
        .rows
        .iter()
        .map(|row| {
            format!(
                "|x|={} est {:.4e} +- {:.1e} vs (G(x)/G(0))^2 = {:.4e}, z {:.2}",
                row.param,
                row.estimate.value,
                row.estimate.std_error,
                row.get("exact_first_term").unwrap(),
                row.get("z_exact").unwrap()
            )
        })
        .collect();
    outcome(ok, parts.join("; "))
}

fn one_arm_order() -> Outcome {
    let g = GreenTable::new(5).unwrap();
    let t = LengthTable::build(5, 10_000, 1e-3).unwrap();
    let s = ScanSettings::new(0.2, 1_000_000, 35);
    let r = one_arm_scan(&g, &t, &[4, 6, 8], &s).unwrap();
    let pts: Vec<(f64, f64, f64)> = r
        .rows
        .iter()
        .map(|row| (row.param, row.get("scaled").unwrap(), row.get("scaled_std_error").unwrap()))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let se = (pts[i].2.powi(2) + pts[j].2.powi(2)).sqrt();
            worst = worst.max((pts[i].1 - pts[j].1).abs() / se);
        }
    }
    let bounded = r.rows.iter().all(|row| row.get("cp_low").unwrap() > 0.0);
    let parts: Vec<String> = r
        .rows
        .iter()
        .map(|row| {
            format!(
                "n={} n^3 P = {:.4} +- {:.4} ({} hits, CP [{:.2e}, {:.2e}])",
                row.param,
                row.get("scaled").unwrap(),
                row.get("scaled_std_error").unwrap(),
                row.get("successes").unwrap(),
                row.get("cp_low").unwrap(),
                row.get("cp_high").unwrap()
            )
        })
        .collect();
    outcome(
        worst <= 3.0 && bounded,
        format!("{}; largest pairwise z {worst:.2}; bounded away from 0: {bounded}", parts.join(", ")),
    )
}

fn mecke_and_fkg() -> Outcome {
    let t = LengthTable::build(3, 6, 1.0).unwrap();
    let m = verify_mecke(&t, 0.5, &Ball::centered(3, 2), 20_000, 36).unwrap();
    let f = verify_fkg(&t, 0.5, 5, 20_000, 37).unwrap();
    let rows: Vec<String> = m
        .rows
        .iter()
        .chain(&f.rows)
        .map(|r| format!("{} z {:.2}", r.name, r.z))
        .collect();
    outcome(m.passed && f.passed, rows.join(", "))
}

/// Weighted least-squares quadratic through `(x, y, se)`; returns the
/// intercept and its standard error.
fn quadratic_intercept(pts: &[(f64, f64, f64)]) -> (f64, f64) {
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for &(x, y, s) in pts {
        let w = 1.0 / (s * s);
        let v = [1.0, x, x * x];
        for i in 0..3 {
            b[i] += w * v[i] * y;
            for j in 0..3 {
                a[i][j] += w * v[i] * v[j];
            }
        }
    }
    // invert the 3x3 normal matrix by cofactors
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let inv00 = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    let inv01 = -(a[0][1] * a[2][2] - a[0][2] * a[2][1]) / det;
    let inv02 = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    (inv00 * b[0] + inv01 * b[1] + inv02 * b[2], inv00.sqrt())
}

fn cluster_capacity_limit() -> Outcome {
    let g = GreenTable::new(5).unwrap();
    let t = LengthTable::build(5, 10_000, 1e-3).unwrap();
    let target = 1.0 / g.at_origin();
    let mut pts = Vec::new();
    let mut worst_touch: f64 = 0.0;
    let mut parts = Vec::new();
    for alpha in [0.0125, 0.025, 0.05, 0.1] {
        let c = expected_cluster_capacity(&g, &t, alpha, 16, 400_000, 38).unwrap();
        worst_touch = worst_touch.max(c.estimate.diagnostics.boundary_touch_rate);
        parts.push(format!("alpha {alpha}: {:.6} +- {:.1e}", c.estimate.value, c.estimate.std_error));
        pts.push((alpha, c.estimate.value, c.estimate.std_error));
    }
    let (icpt, se) = quadratic_intercept(&pts);
    let z = (icpt - target).abs() / se;
    outcome(
        z <= 3.0 && worst_touch < 0.01,
        format!(
            "{}; alpha -> 0 intercept {icpt:.6} +- {se:.1e} vs 1/G5(0) = {target:.6} (z {z:.2}); max boundary-touch rate {worst_touch}",
            parts.join(", ")
        ),
    )
}
