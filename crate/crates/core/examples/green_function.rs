//! Lattice Green's function: G(0), the far-field constant C_d and the
//! approach of G(x) |x|^{d-2} to C_d along an axis and a diagonal.

use loopsoup::greens::{green_constant, hit_single_point, GreenTable};
use loopsoup::Point;

fn main() -> loopsoup::Result<()> {
    for d in [3usize, 4, 5] {
        let t = GreenTable::new(d)?;
        println!("d={d}: G(0) = {:.12}, C_d = {:.12}", t.at_origin(), green_constant(d)?);
        println!("  Polya return probability 1 - 1/G(0) = {:.6}", 1.0 - 1.0 / t.at_origin());
        println!("  P_e1(hit 0) = {:.6}", hit_single_point(&t, &Point::unit(d, 0))?);
        println!("  {:>4} {:>12} {:>12}", "r", "axis", "diagonal");
        for r in [2i32, 4, 8, 16, 32] {
            let axis = Point::on_axis(d, r);
            let mut c = vec![0; d];
            c[0] = r;
            c[1] = r;
            let diag = Point::new(&c);
            let ratio = |x: &Point| t.value(x) * x.norm().powi(d as i32 - 2) / t.constant();
            println!("  {r:>4} {:>12.6} {:>12.6}", ratio(&axis), ratio(&diag));
        }
    }
    Ok(())
}
