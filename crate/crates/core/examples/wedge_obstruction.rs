//! On the sphere with s_y + R > π/2 the disk containing γ in the wedge can
//! be smaller than the orthogonal disk.

use prescribed_area::domains::{wedge_compare, wedge_grid};

fn main() -> prescribed_area::Result<()> {
    let w = wedge_compare(1.5, 0.4)?;
    println!("R = 1.5, s_y = 0.4: r̄ = {:.6}, r̲ = {:.6}, obstruction = {}", w.r_over, w.r_under, w.obstruction);
    let grid = wedge_grid(30)?;
    let bad = grid.iter().filter(|w| w.obstruction).count();
    println!("{bad} of {} grid points with R ≤ 1.5 are obstructed", grid.len());
    Ok(())
}
