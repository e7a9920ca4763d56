//! Pivot-table range and k-NN search, and how much of the data it has to touch.

use simlab::pivot::{select_pivots, PivotStrategy, PivotTable};
use simlab::scan;
use simlab::{rng, Domain};

fn main() -> simlab::Result<()> {
    let mut r = rng::child(11, "queries");
    for d in [2, 10, 100] {
        let dom = Domain::gaussian(d).normalize(0, 0)?;
        let ds = dom.sample(5000, 11)?;
        let table = PivotTable::build(
            &ds,
            select_pivots(&ds, 16, PivotStrategy::FarthestFirst { start: None }, 11)?,
        )?;

        let q = dom.random_point(&mut r);
        let (_, nn_dist) = scan::nearest(&ds, &q, None).expect("non-empty");
        let eps = 1.5 * nn_dist;
        let (hits, stats) = table.range_query(&q, eps)?;
        let (nn, _) = table.knn_query(&q, 5)?;
        println!(
            "d = {d:>3}: {} hits, {} of {} candidates verified, 5-NN {:?}",
            hits.len(),
            stats.candidates,
            ds.len(),
            nn.iter().map(|p| p.0).collect::<Vec<_>>()
        );
    }
    Ok(())
}
