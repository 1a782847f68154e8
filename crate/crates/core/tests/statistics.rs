//! Standard errors scale as `1 / sqrt(samples)`.

use loopsoup::experiments::{expected_cluster_capacity, lemma_scan, LemmaKind, LemmaParams};
use loopsoup::greens::GreenTable;
use loopsoup::loopmeasure::LengthTable;

fn check_scaling(name: &str, se: impl Fn(u64) -> f64, n: u64) {
    let (a, b, c) = (se(n), se(2 * n), se(4 * n));
    let r2 = a / b;
    let r4 = a / c;
    assert!((r2 / 2f64.sqrt() - 1.0).abs() < 0.2, "{name}: doubling gives ratio {r2}");
    assert!((r4 / 2.0 - 1.0).abs() < 0.2, "{name}: quadrupling gives ratio {r4}");
}

#[test]
fn connection_mass_error_scaling() {
    let g = GreenTable::new(3).unwrap();
    let t = LengthTable::build(3, 10, 1.0).unwrap();
    check_scaling(
        "single_loop",
        |n| {
            let p = LemmaParams::new(LemmaKind::SingleLoop, n, 5).radii(&[6]);
            lemma_scan(&g, &t, &p).unwrap().rows[0].estimate.std_error
        },
        20_000,
    );
}

#[test]
fn cluster_capacity_error_scaling() {
    let g = GreenTable::new(5).unwrap();
    let t = LengthTable::build(5, 200, 1.0).unwrap();
    check_scaling(
        "cluster_capacity",
        |n| expected_cluster_capacity(&g, &t, 0.3, 12, n, 6).unwrap().estimate.std_error,
        40_000,
    );
}
