//! Monte Carlo certificate `div_S W ≤ 1` for a ball in hyperbolic space.

use prescribed_area::field::{certify_v1, CertParams, FieldConfig};

fn main() -> prescribed_area::Result<()> {
    let cfg = FieldConfig::new(-1, 5, 3, 1.2, 0.5)?;
    let report = certify_v1(&cfg, &CertParams { samples: 20_000, seed: 7, ..CertParams::default() })?;
    println!("r̲(y) = {:.6}", cfg.r_under());
    println!("evaluated {} samples, max div = {:.12}", report.evaluated, report.max_div);
    println!("violations: {}, near-equality samples: {}", report.violations, report.near_equality);
    Ok(())
}
