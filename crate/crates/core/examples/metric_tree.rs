//! Metric trees with hyperplane and ball-shell splits. Branching is the fraction of
//! leaves a range query has to open.

use simlab::tree::{branching_profile, MetricTree, Splitter, TreeConfig};
use simlab::Domain;

fn main() -> simlab::Result<()> {
    for splitter in [Splitter::GeneralizedHyperplane, Splitter::BallShell] {
        println!("{splitter:?}");
        for d in [2, 10, 100] {
            let dom = Domain::gaussian(d).normalize(0, 0)?;
            let ds = dom.sample(4096, 5)?;
            let tree = MetricTree::build(&ds, &TreeConfig::new(splitter, 16))?;
            tree.check_invariants()?;
            let b = branching_profile(&tree, &dom, 200, 0.3, 6)?;
            println!(
                "  d = {d:>3}: {} leaves, depth {}, branching {b:.3}",
                tree.leaf_count(),
                tree.depth()
            );
        }
    }
    Ok(())
}
