//! Projections of high-dimensional points onto a random line or plane.

use simlab::reduce;

fn main() -> simlab::Result<()> {
    let target = (2.0 / std::f64::consts::PI).sqrt();
    for d in [2, 8, 32, 128, 512] {
        let m = reduce::sphere_projection_distortion(d, 10_000, 1)?;
        println!(
            "d = {d:>3}: mean ratio {m:.4}, times √d {:.4} (→ {target:.4})",
            m * (d as f64).sqrt()
        );
    }
    for d in [3, 10, 100] {
        let s = reduce::cube_projection_scatter(d, 2000, 2)?;
        println!(
            "cube d = {d:>3}: sample spread / outline radius {:.3}",
            s.radius_ratio()
        );
    }
    Ok(())
}
