//! Where the sphere condition holds: minimum of its left-hand side over s
//! for a few (k, R, s_y) on the unit sphere.

use prescribed_area::field::{min_sphere_condition, FieldConfig};

fn main() -> prescribed_area::Result<()> {
    println!("{:>2} {:>5} {:>5} {:>12} {:>8}", "k", "R", "s_y", "min lhs", "simple");
    for k in [2, 3, 5, 8] {
        for (radius, s_y) in [(0.4, 0.1), (0.7, 0.2), (1.2, 0.3), (1.5, 0.4)] {
            let cfg = FieldConfig::new(1, k + 1, k, radius, s_y)?;
            let (min, _) = min_sphere_condition(&cfg, 400)?;
            let simple = (s_y + radius).cos() >= (2.0 / k as f64).sqrt();
            println!("{k:>2} {radius:>5} {s_y:>5} {min:>12.4e} {simple:>8}");
        }
    }
    Ok(())
}
