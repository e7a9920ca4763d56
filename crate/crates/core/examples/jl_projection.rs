//! Random Gaussian projections keep pairwise distances within a multiplicative band.

use simlab::reduce::{self, DistortionMode};
use simlab::Domain;

fn main() -> simlab::Result<()> {
    let (n, d) = (100, 1000);
    let ds = Domain::gaussian(d).sample(n, 1)?;
    for eps in [0.1, 0.25, 0.4] {
        let k = reduce::jl_target_dim(n, eps, 4.0)?.min(d);
        let map = reduce::jl_map(d, k, 2)?;
        let rep = reduce::distortion_histogram(
            &ds,
            &map.apply_dataset(&ds)?,
            DistortionMode::Multiplicative,
            20,
        )?;
        println!(
            "eps = {eps}: k = {k:>4}, ratio in [{:.3}, {:.3}], inside band {:.4}",
            rep.summary.min,
            rep.summary.max,
            rep.fraction_in(1.0 - eps, 1.0 + eps)
        );
    }
    Ok(())
}
