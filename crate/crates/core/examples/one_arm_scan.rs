//! One-arm probability in d = 5 against alpha C_d E[Cap] n^{2-d}.

use loopsoup::experiments::{one_arm_scan, Format, ScanSettings};
use loopsoup::greens::GreenTable;
use loopsoup::loopmeasure::LengthTable;

fn main() -> loopsoup::Result<()> {
    let greens = GreenTable::new(5)?;
    let table = LengthTable::build(5, 10_000, 1e-3)?;
    let mut s = ScanSettings::new(0.2, 200_000, 7);
    s.cap_samples = 5_000;
    let r = one_arm_scan(&greens, &table, &[3, 4, 6, 8], &s)?;
    r.write(std::io::stdout().lock(), Format::Csv)?;
    Ok(())
}
