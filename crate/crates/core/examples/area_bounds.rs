//! Area of minimal surfaces through y compared with the geodesic ball of
//! radius r̲(y).

use nalgebra::DVector;
use prescribed_area::profiles::BallData;
use prescribed_area::surfaces::{prescribed_point_check, Catenoid, ExplicitSurface, TotallyGeodesicDisk};
use prescribed_area::SpaceForm;

fn main() -> prescribed_area::Result<()> {
    let space = SpaceForm::from_kappa(1, 4)?;
    let ball = BallData::new(space.curvature(), 1.0, 0.3)?;
    for tilt in [0.0, 0.3, 0.8, 1.5] {
        let disk = TotallyGeodesicDisk::tilted(space, &ball, tilt, 2)?;
        println!("tilt {tilt}: area {:.8}", disk.exact_area(1.0)?);
    }
    let cat = Catenoid::new(1.0, 0.4)?;
    let y = cat.space().point(DVector::from_vec(vec![0.4, 0.0, 0.0]))?;
    let check = prescribed_point_check(&cat, &y, 24)?;
    println!("{}: area {:.6} ≥ bound {:.6}: {}", cat.describe(), check.area, check.bound, check.pass);
    Ok(())
}
