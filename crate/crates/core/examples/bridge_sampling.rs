//! Exact loop sampling: draw lengths from the loop measure and bridges of
//! a given length, then compare empirical laws with exact counts.

use loopsoup::loopmeasure::{exact_closed_path_counts, sample_bridge, LengthTable};
use loopsoup::rng::substream;
use loopsoup::Point;

fn main() -> loopsoup::Result<()> {
    let d = 3;
    let table = LengthTable::build(d, 1000, 1e-3)?;
    println!("d={d}, l_max={}: m_d = {:.8}, tail bound {:.2e}", table.l_max(), table.mass(), table.tail_bound());
    if let Some(w) = table.warning() {
        println!("warning: {w}");
    }

    let counts = exact_closed_path_counts(d, 8);
    for k in (2..=8).step_by(2) {
        println!("p_{k} = {:.8} = {} / 6^{k}", table.return_probability(k), counts[k]);
    }

    let mut rng = substream(1, &[0]);
    let n = 200_000;
    let mut len_hist = [0u64; 5];
    for _ in 0..n {
        let k = table.sample_length(&mut rng);
        if k <= 10 {
            len_hist[k / 2 - 1] += 1;
        }
    }
    for (i, c) in len_hist.iter().enumerate() {
        let k = 2 * (i + 1);
        println!("P(length = {k:>2}): empirical {:.5}, exact {:.5}", *c as f64 / n as f64, table.length_probability(k));
    }

    let l = sample_bridge(Point::origin(d), 40, &table, &mut rng)?;
    println!("a bridge of length 40: range {} sites, diameter {:.3}", l.range_size(), l.diameter());
    for p in l.trace().iter().take(8) {
        println!("  {:?}", p.coords());
    }
    Ok(())
}
