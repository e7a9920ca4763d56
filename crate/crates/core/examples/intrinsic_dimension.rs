//! Distance-based and concentration-based intrinsic dimension of a dataset.
//!
//! Reads 20-dimensional vectors from the path in `NASA_VECTORS` when set,
//! otherwise uses synthetic data.

use simlab::experiments::{self, NASA_ENV};
use simlab::{domain, Domain};

fn main() -> simlab::Result<()> {
    let mut sets = Vec::new();
    if let Some(path) = std::env::var_os(NASA_ENV) {
        sets.push((
            path.to_string_lossy().into_owned(),
            domain::load_vectors(&path, 20)?,
        ));
    }
    for d in [5, 20] {
        sets.push((
            format!("gaussian({d})"),
            Domain::gaussian(d).sample(5000, 1)?,
        ));
    }
    sets.push(("hamming(64)".into(), Domain::hamming(64).sample(5000, 1)?));

    for (name, ds) in sets {
        let r = experiments::dims_of(&ds, name, 100_000, 21, 50, 2)?;
        println!(
            "{:<14} {} points, CharSize {:.3}, dim_dist {:.2}, dim_alpha {:.2}",
            r.source, r.points, r.char_size, r.dim_dist, r.dim_alpha
        );
    }
    Ok(())
}
