//! Exact concentration function of the Hamming cube against the Chernoff bound,
//! and the two intrinsic-dimension estimates.

use simlab::concentration::{self, ConcentrationProfile};
use simlab::Domain;

fn main() -> simlab::Result<()> {
    for d in [10, 100, 1000] {
        println!("d = {d}");
        for eps in [0.05, 0.1, 0.2, 0.3] {
            println!(
                "  α({eps:.2}) = {:.3e}   chernoff {:.3e}",
                concentration::exact_hamming_alpha(d, eps),
                concentration::chernoff_alpha_bound(eps, d)
            );
        }
        let profile = ConcentrationProfile::exact_hamming(d, concentration::unit_grid(101))?;
        println!("  dim_alpha = {:.1}", concentration::dim_alpha(&profile)?);
    }

    let dom = Domain::hamming(100).normalize(0, 0)?;
    let ds = dom.sample(5000, 1)?;
    println!(
        "normalized Hamming(100): CharSize {:.4}",
        dom.char_size(100_000, 2)?
    );
    println!("dim_dist {:.2}", concentration::dim_dist(&ds, 100_000, 3)?);

    let cube = Domain::hamming(1000).normalize(0, 0)?.sample(100, 4)?;
    println!(
        "pairs within 0.1 of CharSize: {:.5}",
        concentration::pairwise_simplex_check(&cube, 0.1)?
    );
    Ok(())
}
