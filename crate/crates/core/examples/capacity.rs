//! Capacity and equilibrium measure of a few finite sets, with hitting
//! probabilities from the last-exit formula.

use loopsoup::greens::{capacity, hitting_probability, GreenTable};
use loopsoup::{Ball, Point};

fn main() -> loopsoup::Result<()> {
    let d = 3;
    let t = GreenTable::new(d)?;
    let o = Point::origin(d);
    let single = capacity(&t, &[o])?;
    println!("cap{{0}} = {:.10} (1/G(0) = {:.10})", single.capacity, 1.0 / t.at_origin());

    let segment: Vec<Point> = (0..8).map(|i| Point::on_axis(d, i)).collect();
    let seg = capacity(&t, &segment)?;
    println!("segment of 8 points: cap = {:.6}, residual {:.1e}", seg.capacity, seg.residual);
    for (p, e) in seg.points.iter().zip(&seg.equilibrium) {
        println!("  e({:?}) = {e:.6}", p.coords());
    }

    for r in 1..=5 {
        let ball = Ball::centered(d, r).points();
        let c = capacity(&t, &ball)?;
        println!("ball r={r}: |B| = {:>4}, cap = {:.6}, cap / r = {:.4}", ball.len(), c.capacity, c.capacity / r as f64);
    }

    let ball = capacity(&t, &Ball::centered(d, 3).points())?;
    for x in [5, 10, 20, 40] {
        let y = Point::on_axis(d, x);
        let h = hitting_probability(&t, &y, &ball);
        println!("P_{x}e1(hit B_3) = {h:.6}, cap G(x) = {:.6}", ball.capacity * t.value(&y));
    }
    Ok(())
}
