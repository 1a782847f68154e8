//! Loop-measure connection masses: one loop from the origin to a sphere and
//! between two points in d = 3, and the mean range of long loops through 0
//! in d = 5 (in d = 3 that mean grows with the length cutoff).

use loopsoup::experiments::{lemma_scan, Format, LemmaKind, LemmaParams};
use loopsoup::greens::GreenTable;
use loopsoup::loopmeasure::LengthTable;

fn main() -> loopsoup::Result<()> {
    let greens = GreenTable::new(3)?;
    let table = LengthTable::build(3, 4000, 1e-2)?;
    let out = &mut std::io::stdout().lock();

    let p = LemmaParams::new(LemmaKind::SingleLoop, 100_000, 1).radii(&[5, 10, 20]).kill_factor(2.0);
    lemma_scan(&greens, &table, &p)?.write(&mut *out, Format::Csv)?;

    let p = LemmaParams::new(LemmaKind::TwoSets, 100_000, 2).radii(&[4, 8]);
    lemma_scan(&greens, &table, &p)?.write(&mut *out, Format::Csv)?;

    let greens5 = GreenTable::new(5)?;
    let table5 = LengthTable::build(5, 10_000, 1e-3)?;
    let p = LemmaParams::new(LemmaKind::Range, 200_000, 3).m(&[2.0, 4.0, 8.0]);
    lemma_scan(&greens5, &table5, &p)?.write(&mut *out, Format::Csv)?;
    Ok(())
}
