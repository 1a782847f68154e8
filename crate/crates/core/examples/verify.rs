//! Mecke equation and FKG checks on a small window.

use loopsoup::experiments::{verify_fkg, verify_mecke};
use loopsoup::loopmeasure::LengthTable;
use loopsoup::Ball;

fn main() -> loopsoup::Result<()> {
    let table = LengthTable::build(3, 6, 1.0)?;
    let mecke = verify_mecke(&table, 0.5, &Ball::centered(3, 1), 10_000, 1)?;
    let fkg = verify_fkg(&table, 0.5, 5, 10_000, 2)?;
    for rep in [&mecke, &fkg] {
        for r in &rep.rows {
            println!(
                "{:<6} {:<28} lhs {:>10.6} rhs {:>10.6} z {:>6.2} {}",
                rep.name,
                r.name,
                r.lhs,
                r.rhs,
                r.z,
                if r.passed { "ok" } else { "FAIL" }
            );
        }
    }
    std::process::exit(if mecke.passed && fkg.passed { 0 } else { 1 });
}
