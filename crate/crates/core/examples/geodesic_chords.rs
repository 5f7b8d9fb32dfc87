//! Chords of a spherical ball through an interior point: the shortest one
//! is orthogonal to the radius through the point.

use prescribed_area::geodesics::{minimize_chord, total_length, ChordProblem};

fn main() -> prescribed_area::Result<()> {
    let p = ChordProblem::new(0.3, 0.8)?;
    for i in 0..=6 {
        let alpha = std::f64::consts::PI * i as f64 / 6.0;
        println!("α = {alpha:.4}: length {:.12}", total_length(&p, alpha)?);
    }
    let (alpha, len) = minimize_chord(&p, 10_000)?;
    println!("minimum at α = {alpha:.9}, length {len:.15}, 2r̲ = {:.15}", 2.0 * p.r_under());
    Ok(())
}
