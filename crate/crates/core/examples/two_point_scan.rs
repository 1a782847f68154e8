//! Two-point function in d = 5 against alpha C_d^2 E[Cap]^2 |x|^{4-2d}.

use loopsoup::experiments::{adjacent_lower_bound, two_point_scan, Format, ScanSettings};
use loopsoup::greens::GreenTable;
use loopsoup::loopmeasure::LengthTable;

fn main() -> loopsoup::Result<()> {
    let greens = GreenTable::new(5)?;
    let table = LengthTable::build(5, 10_000, 1e-3)?;
    let alpha = 0.3;
    let mut s = ScanSettings::new(alpha, 200_000, 8);
    s.cap_samples = 5_000;
    let r = two_point_scan(&greens, &table, &[1, 2, 3, 4], 3.0, &s)?;
    println!("P(0 <-> e1) >= {:.3e} from the single length-2 loop", adjacent_lower_bound(alpha, 5));
    r.write(std::io::stdout().lock(), Format::Csv)?;
    Ok(())
}
