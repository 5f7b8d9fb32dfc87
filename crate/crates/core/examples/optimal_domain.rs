//! Integrates the equality profile through the orthogonal disk and checks it
//! stays inside the ball.

use prescribed_area::domains::{ball_profile, containment, optimal_profile};
use prescribed_area::ode::OdeOptions;
use prescribed_area::profiles::{underline_r, BallData};
use prescribed_area::Curvature;

fn main() -> prescribed_area::Result<()> {
    for (c, k) in [(Curvature::Hyperbolic, 2), (Curvature::Flat, 3), (Curvature::Flat, 5)] {
        let ball = BallData::new(c, 1.0, 0.4)?;
        let opt = optimal_profile(c, k, 0.4, underline_r(c, &ball)?, &OdeOptions::default())?;
        let cont = containment(&opt, &ball_profile(c, k, 1.0, 0.4)?, 1e-6)?;
        let (lo, hi) = opt.interval();
        println!("{c:?} k={k}: profile on ({lo:.4}, {hi:.4}), inside ball = {}, max excess {:.1e}", cont.contained, cont.max_excess);
        for s in [lo * 0.9, 0.0, 0.4, hi * 0.9] {
            println!("  R*({s:.3}) = {:.6}", opt.r_at(s)?);
        }
    }
    Ok(())
}
