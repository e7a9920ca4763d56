//! Witness-based neighbour graphs and greedy search on them.

use rand::Rng as _;
use simlab::graph::{build_witness_graph, delaunay_line, greedy_nn, greedy_nn_restarts};
use simlab::{rng, scan, Dataset, Domain, Point};

fn main() -> simlab::Result<()> {
    let line = Dataset::on_line(&[0.0, 1.0, 10.0, 10.5, 30.0])?;
    let g = delaunay_line(&line)?;
    let walk = greedy_nn(&g, &line, &Point::Reals(vec![9.0]), 0)?;
    println!(
        "line edges {:?}, greedy path to 9.0: {:?}",
        g.edges(),
        walk.path
    );

    let mut r = rng::child(3, "queries");
    for d in [2, 8, 32] {
        let dom = Domain::gaussian(d);
        let ds = dom.sample(200, 3)?;
        let g = build_witness_graph(&ds, 100_000, 4)?;
        let mut exact = 0;
        for _ in 0..200 {
            let q = dom.random_point(&mut r);
            let got = greedy_nn_restarts(&g, &ds, &q, 1, r.random())?;
            exact += usize::from(Some(got.answer) == scan::nearest(&ds, &q, None).map(|n| n.0));
        }
        let deg = g.degree_stats();
        println!(
            "d = {d:>2}: mean degree {:.1}, greedy exact {exact}/200",
            deg.mean
        );
    }
    Ok(())
}
