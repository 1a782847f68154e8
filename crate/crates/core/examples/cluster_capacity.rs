//! E[Cap(C_0 ∪ {0})] in d = 5 for a few activities, next to the
//! first-order prediction Cap({0}) + alpha c_1 from single loops.

use loopsoup::experiments::{capacity_first_order, expected_cluster_capacity};
use loopsoup::greens::GreenTable;
use loopsoup::loopmeasure::LengthTable;

fn main() -> loopsoup::Result<()> {
    let greens = GreenTable::new(5)?;
    let table = LengthTable::build(5, 10_000, 1e-3)?;
    let c1 = capacity_first_order(&greens, &table, 100_000, 3)?;
    println!(
        "first-order coefficient c_1 = {:.5} +- {:.5} (upper bracket {:.5}, {} oversized loops)",
        c1.estimate.value, c1.estimate.std_error, c1.upper, c1.oversized
    );
    for alpha in [0.0, 0.05, 0.1, 0.2, 0.3] {
        let c = expected_cluster_capacity(&greens, &table, alpha, 16, 100_000, 3)?;
        println!(
            "alpha {alpha:>4}: E[Cap] = {:.5} +- {:.5} (upper {:.5}), first order {:.5}, touch rate {:.4}, largest cluster {}",
            c.estimate.value,
            c.estimate.std_error,
            c.upper,
            c.cap_origin + alpha * c1.estimate.value,
            c.estimate.diagnostics.boundary_touch_rate,
            c.largest_cluster
        );
    }
    Ok(())
}
