//! In flat space the field is the classical one, `(x−y)/k · (1 − R^k/|x−y|^k)`
//! corrected along the axis; compare both at a few points.

use nalgebra::DVector;
use prescribed_area::field::{eval_bh_euclidean, eval_w, FieldConfig};

fn main() -> prescribed_area::Result<()> {
    let cfg = FieldConfig::new(0, 4, 3, 1.0, 0.4)?;
    let y = cfg.y().into_coords();
    for coords in [[0.1, 0.2, -0.3, 0.0], [-0.5, 0.1, 0.4, 0.2], [0.7, -0.2, 0.0, 0.1]] {
        let x = cfg.space().point(DVector::from_row_slice(&coords))?;
        let w = eval_w(&cfg, &x)?.vec;
        let bh = eval_bh_euclidean(3, 1.0, &y, x.coords())?;
        println!("x = {coords:?}: |W − W_BH|∞ = {:.2e}", (w - bh).amax());
    }
    Ok(())
}
