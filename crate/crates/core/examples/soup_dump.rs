//! Sample one soup in a window of Z^3, report its cluster structure and
//! write it as JSON lines (pass an output path as the first argument).

use std::fs::File;
use std::io::BufWriter;

use loopsoup::experiments::software_version;
use loopsoup::loopmeasure::LengthTable;
use loopsoup::percolation::{build_clusters, origin_cluster};
use loopsoup::soup::{sample_soup, SoupHeader, SoupParams};
use loopsoup::Ball;

fn main() -> loopsoup::Result<()> {
    let window = Ball::centered(3, 10);
    let table = LengthTable::build(3, 40, 1e-2)?;
    let params = SoupParams::new(0.5, window, 42);
    let soup = sample_soup(&params, &table)?;
    println!(
        "{} loops rooted in B_{}, {} open edges, {} steps",
        soup.len(),
        soup.root_window().radius,
        soup.open_edge_count(),
        soup.total_steps()
    );
    let parts = build_clusters(&soup.open_edges());
    println!("{} clusters over {} vertices", parts.num_components(), parts.num_vertices());
    let c0 = origin_cluster(&soup);
    println!("origin cluster: {} vertices, diameter {:.3}", c0.len(), c0.diameter());

    if let Some(path) = std::env::args().nth(1) {
        let header = SoupHeader::new(&params, &table, &soup, software_version());
        soup.write_jsonl(BufWriter::new(File::create(&path)?), &header)?;
        println!("wrote {path}");
    }
    Ok(())
}
