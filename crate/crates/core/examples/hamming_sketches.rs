//! Bit sampling and the mod-2 random linear sketch on Hamming cubes.

use simlab::domain::BitString;
use simlab::reduce::{self, DistortionMode, KorLadder};
use simlab::{rng, Domain, Point};

fn main() -> simlab::Result<()> {
    let d = 256;
    let ds = Domain::hamming(d).sample(200, 1)?;
    let map = reduce::bit_sample_map(d, 32, 2)?;
    let rep =
        reduce::distortion_histogram(&ds, &map.apply_dataset(&ds)?, DistortionMode::Additive, 10)?;
    println!(
        "bit sampling 256 → 32: additive error mean {:+.4}, std {:.4}",
        rep.summary.mean, rep.summary.std
    );

    let mut r = rng::child(3, "pair");
    let x = BitString::random(d, &mut r);
    let ladder = KorLadder::new(d, 512, 4)?;
    for h in [1, 8, 32, 128] {
        let mut y = x.clone();
        for i in 0..h {
            y.flip(i);
        }
        let rates = ladder.image_distances(&Point::Bits(x.clone()), &Point::Bits(y))?;
        let line: Vec<String> = rates
            .iter()
            .filter(|(ell, _)| [1, 8, 32, 128].contains(ell))
            .map(|(ell, v)| format!("ℓ={ell}: {v:.3}/{:.3}", reduce::kor_rate(h, *ell)))
            .collect();
        println!("h = {h:>3}  {}", line.join("  "));
    }
    Ok(())
}
