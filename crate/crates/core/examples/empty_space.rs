//! Nearest-neighbour distance, in units of the typical distance, grows towards 1 with dimension.
//!
//! `cargo run --release --example empty_space`

use simlab::concentration::{nn_distance_curve, DomainFamily, FamilyKind, NnCurveConfig};

fn main() -> simlab::Result<()> {
    let cfg = NnCurveConfig {
        n: 1000,
        trials: 20,
        ..Default::default()
    };
    let dims = [2, 3, 10, 30, 100, 300, 1000];
    for kind in [
        FamilyKind::Hamming,
        FamilyKind::Gaussian,
        FamilyKind::UnitCube,
        FamilyKind::Sphere,
    ] {
        println!("{kind:?}");
        for row in nn_distance_curve(DomainFamily::new(kind), &dims, &cfg, 7)? {
            println!(
                "  d = {:>4}  nn / CharSize = {:.3} ± {:.3}",
                row.d, row.value, row.stderr
            );
        }
    }
    Ok(())
}
