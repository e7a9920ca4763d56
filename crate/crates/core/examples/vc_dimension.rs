//! VC dimension by exhaustive shattering, and the sample bounds it buys.

use simlab::vc::{self, ConceptClass, UnitIntervals};

fn main() -> simlab::Result<()> {
    let xs: Vec<f64> = (0..8).map(f64::from).collect();
    let ring: Vec<[f64; 2]> = (0..6)
        .map(|i| {
            let t = std::f64::consts::TAU * (i as f64 + 0.1) / 6.0;
            [t.cos(), t.sin()]
        })
        .collect();
    let classes = [
        ("intervals", ConceptClass::intervals(&xs)?),
        ("half-planes", ConceptClass::half_planes(&ring)?),
        ("Hamming balls, d = 3", ConceptClass::hamming_balls(3)?),
    ];
    for (name, cc) in &classes {
        let v = vc::vc_dimension(cc, cc.ground_size())?;
        println!(
            "{name}: {} concepts on {} points, VC = {v}",
            cc.concepts().len(),
            cc.ground_size()
        );
    }

    println!(
        "sample bound (d=2, ε=0.1, δ=0.05): {}",
        vc::ugc_sample_bound(2, 0.1, 0.05)?
    );
    println!(
        "VC bound for s=3 tests of degree 5: {}",
        vc::goldberg_jerrum_bound(3, 5)
    );

    for n in [100, 1243, 10_000] {
        let rep = vc::empirical_sup_deviation(&UnitIntervals { grid: 45 }, n, 100, 7)?;
        println!(
            "n = {n:>5}: sup deviation mean {:.4}, max {:.4}",
            rep.mean, rep.max
        );
    }
    Ok(())
}
