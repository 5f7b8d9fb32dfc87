//! Q(t) and Q_∂(t) for explicit minimal surfaces.

use prescribed_area::profiles::BallData;
use prescribed_area::surfaces::{default_t_grid, q_partial_profile, q_profile, Catenoid, CliffordTorus, ExplicitSurface, TotallyGeodesicDisk};
use prescribed_area::SpaceForm;

fn main() -> prescribed_area::Result<()> {
    let space = SpaceForm::from_kappa(-1, 3)?;
    let ball = BallData::new(space.curvature(), 1.0, 0.5)?;
    let surfaces: Vec<(&str, Box<dyn ExplicitSurface>)> = vec![
        ("tilted disk in H^3", Box::new(TotallyGeodesicDisk::tilted(space, &ball, 0.6, 2)?)),
        ("catenoid in R^3", Box::new(Catenoid::new(1.0, 0.4)?)),
        ("Clifford torus in S^3", Box::new(CliffordTorus::new(1.0)?)),
    ];
    let grid = default_t_grid(1.0, 10);
    for (name, s) in &surfaces {
        let q = q_profile(s.as_ref(), &grid, 16)?;
        let qp = q_partial_profile(s.as_ref(), &grid, 16)?;
        println!("{name}");
        for ((t, a), b) in grid.iter().zip(&q.values).zip(&qp.values) {
            println!("  t = {t:.2}  Q = {a:.6}  Q_∂ = {b:.6}");
        }
    }
    Ok(())
}
