//! Acceptance criteria; prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use nalgebra::DVector;
use prescribed_area::domains::{ball_profile, containment, optimal_profile, wedge_compare};
use prescribed_area::field::{
    boundary_check, boundary_check_wedge, certify_v1, default_residue_radii, div_numeric, div_w_closed, eval_bh_euclidean,
    eval_w, halton_direction, residue_check, CertParams, FieldConfig,
};
use prescribed_area::geodesics::{minimize_chord, ChordProblem};
use prescribed_area::numerics::derivative_at_zero;
use prescribed_area::ode::OdeOptions;
use prescribed_area::profiles::{f_fun, fprime_closed, underline_r, BallData, ProfileContext};
use prescribed_area::surfaces::{
    default_t_grid, geodesic_chord_length, prescribed_point_check, q_partial_profile, q_profile, tilted_disk, Catenoid,
    CliffordTorus, ExplicitSurface, TotallyGeodesicDisk,
};
use prescribed_area::{Curvature, Point, SpaceForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

const KAPPAS: [i64; 3] = [-1, 0, 1];

/// Uniform point of the ball `B_R(o)` (by geodesic radius), scaled by `shrink`.
fn point_in_ball(cfg: &FieldConfig, rng: &mut ChaCha8Rng, shrink: f64) -> Point {
    let sp = cfg.space();
    let o = sp.origin();
    let mut dir = DVector::zeros(sp.ambient_dim());
    for b in sp.tangent_basis(&o) {
        let g: f64 = rng.sample(rand_distr::StandardNormal);
        dir += b * g;
    }
    let dir = &dir / sp.norm(&dir);
    let t = cfg.radius() * shrink * rng.random::<f64>().powf(1.0 / sp.dim() as f64);
    sp.geodesic(&o, &dir, t).0
}

fn c1_divergence_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut worst) = (0usize, 0.0f64);
    while checked < 1000 {
        let kappa = KAPPAS[rng.random_range(0..3)];
        let k = rng.random_range(1..=5);
        let n = rng.random_range((k + 1).max(2)..=7);
        let radius = if kappa == 1 { rng.random_range(0.2..1.0) } else { rng.random_range(0.2..2.0) };
        let s_y = radius * rng.random_range(0.05..0.9);
        if kappa == 1 && s_y + radius > 1.4 {
            continue;
        }
        let cfg = FieldConfig::new(kappa, n, k, radius, s_y).map_err(e)?;
        let x = point_in_ball(&cfg, &mut rng, 0.98);
        if cfg.space().distance(&x, &cfg.y()).map_err(e)? < 0.05 {
            continue;
        }
        let plane = cfg.space().random_kplane(&x, k, rng.random()).map_err(e)?;
        let (Ok(closed), Ok(numeric)) = (div_w_closed(&cfg, &x, &plane), div_numeric(&cfg, &plane)) else {
            continue;
        };
        worst = worst.max((closed.total - numeric).abs() / (1.0 + closed.total.abs()));
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs <= 60.0, format!("{checked} configs, max rel err {worst:.2e}, {secs:.1} s"))
}

fn c2_v1_certification() -> Outcome {
    let mut configs: Vec<(i64, usize, usize, f64, f64)> = Vec::new();
    for kappa in [-1, 0] {
        for k in [1, 2, 3, 5] {
            configs.push((kappa, k + 2, k, 1.2, 0.5));
        }
    }
    // cos(s_y + R) ≥ √(2/k)
    configs.extend([(1, 5, 3, 0.5, 0.1), (1, 7, 5, 0.7, 0.15), (1, 7, 5, 0.4, 0.3)]);
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, &(kappa, n, k, radius, s_y)) in configs.iter().enumerate() {
        if kappa == 1 {
            assert!((s_y + radius).cos() >= (2.0 / k as f64).sqrt());
        }
        let cfg = FieldConfig::new(kappa, n, k, radius, s_y).map_err(e)?;
        let params = CertParams { samples: 100_000, seed: 100 + i as u64, ..CertParams::default() };
        let rep = certify_v1(&cfg, &params).map_err(e)?;
        ok &= rep.passed() && rep.evaluated * 100 >= 95 * rep.samples;
        lines.push(format!("κ={kappa},k={k}: {} viol in {}, max {:.12}", rep.violations, rep.evaluated, rep.max_div));
    }
    check(ok, format!("{} configs; {}", configs.len(), lines.join("; ")))
}

fn c3_residue() -> Outcome {
    let (mut configs, mut worst) = (0, 0.0f64);
    for kappa in KAPPAS {
        for k in 1..=5 {
            for radius in [0.8, 1.2] {
                let cfg = FieldConfig::new(kappa, 6, k, radius, 0.4 * radius).map_err(e)?;
                let sp = cfg.space();
                let y = cfg.y();
                let expected = -cfg.profiles().a(cfg.r_under()).map_err(e)?;
                let basis = sp.tangent_basis(&y);
                for i in 1..=3u64 {
                    let local = halton_direction(i, sp.dim());
                    let dir = basis.iter().zip(local.iter()).fold(DVector::zeros(sp.ambient_dim()), |acc, (b, c)| acc + b * *c);
                    let radii = default_residue_radii();
                    let value = if k == 1 {
                        let plus = residue_check(&cfg, &dir, &radii).map_err(e)?;
                        let minus = residue_check(&cfg, &(-&dir), &radii).map_err(e)?;
                        0.5 * (plus + minus)
                    } else {
                        residue_check(&cfg, &dir, &radii).map_err(e)?
                    };
                    worst = worst.max((value - expected).abs());
                }
                configs += 1;
            }
        }
    }
    check(configs >= 20 && worst <= 1e-6, format!("{configs} configs × 3 directions, max err {worst:.2e}"))
}

fn c4_boundary() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_wedge = 0.0f64;
    for kappa in KAPPAS {
        for k in [1, 2, 3, 5] {
            let cfg = FieldConfig::new(kappa, 6, k, 1.1, 0.4).map_err(e)?;
            worst = worst.max(boundary_check(&cfg, 1000).map_err(e)?);
        }
    }
    for (k, radius, s_y) in [(2, 1.5, 0.4), (3, 1.3, 0.5), (4, 1.4, 0.6)] {
        let cfg = FieldConfig::new(1, 5, k, radius, s_y).map_err(e)?;
        worst_wedge = worst_wedge.max(boundary_check_wedge(&cfg, 1000).map_err(e)?);
    }
    check(
        worst <= 1e-10 && worst_wedge <= 1e-10,
        format!("max |W| on ∂B {worst:.2e}, on wedge face {worst_wedge:.2e}"),
    )
}

fn c5_euclidean_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in [3, 4, 5] {
        let cfg = FieldConfig::new(0, 6, k, 1.3, 0.45).map_err(e)?;
        let y = cfg.y().into_coords();
        let mut done = 0;
        while done < 10_000 {
            let x = point_in_ball(&cfg, &mut rng, 1.0);
            if (x.coords() - &y).norm() < 1e-6 {
                continue;
            }
            let w = eval_w(&cfg, &x).map_err(e)?.vec;
            let bh = eval_bh_euclidean(k, 1.3, &y, x.coords()).map_err(e)?;
            worst = worst.max((w - bh).amax());
            done += 1;
        }
        count += done;
    }
    check(worst <= 1e-12, format!("{count} points, max componentwise diff {worst:.2e}"))
}

fn c6_fprime() -> Outcome {
    let mut worst = 0.0f64;
    let mut flat2 = 0.0f64;
    for kappa in KAPPAS {
        let c = Curvature::from_kappa(kappa).map_err(e)?;
        for k in 1..=6 {
            let ctx = ProfileContext::new(c, k).map_err(e)?;
            for (radius, s_y) in [(1.1, 0.35), (0.6, 0.5)] {
                let ball = BallData::new(c, radius, s_y).map_err(e)?;
                for i in 1..400 {
                    let s = radius * (-1.0 + 2.0 * i as f64 / 400.0);
                    let fd = derivative_at_zero(|t| f_fun(&ctx, &ball, s + t), 1e-4).map_err(e)?;
                    let cf = fprime_closed(&ctx, &ball, s).map_err(e)?;
                    worst = worst.max((fd - cf).abs() / cf.abs().max(1.0));
                    if kappa == 0 && k == 2 {
                        flat2 = flat2.max(cf.abs());
                    }
                }
            }
        }
    }
    check(worst <= 1e-8 && flat2 == 0.0, format!("max rel err {worst:.2e}; κ=0,k=2 max |F′| = {flat2}"))
}

fn c7_geodesics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut da, mut dl) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let radius = rng.random_range(0.1..1.5);
        let s_y = radius * rng.random_range(0.01..0.95);
        let p = ChordProblem::new(s_y, radius).map_err(e)?;
        let (alpha, len) = minimize_chord(&p, 10_000).map_err(e)?;
        da = da.max((alpha - FRAC_PI_2).abs());
        dl = dl.max((len - 2.0 * p.r_under()).abs());
    }
    check(da <= 1e-6 && dl <= 1e-8, format!("100 problems, max |α*−π/2| {da:.2e}, max |L*−2r̲| {dl:.2e}"))
}

fn c8_area_bounds() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (kappa, radius, s_y) in [(-1, 1.0, 0.5), (0, 1.0, 0.5), (1, 0.9, 0.3), (1, 1.2, 0.3)] {
        let space = SpaceForm::from_kappa(kappa, 4).map_err(e)?;
        let c = space.curvature();
        let ball = BallData::new(c, radius, s_y).map_err(e)?;
        for k in [1, 2, 3] {
            let ctx = ProfileContext::new(c, k).map_err(e)?;
            let bound = prescribed_area::numerics::unit_sphere_area(k) * ctx.a(underline_r(c, &ball).map_err(e)?).map_err(e)?;
            let sampled = tilted_disk(space, &ball, 0.0, k, 24).map_err(e)?.area();
            let rel0 = (sampled - bound).abs() / bound;
            let mut argmin = (0.0, f64::INFINITY);
            for i in 0..=40 {
                let tilt = FRAC_PI_2 * i as f64 / 40.0;
                let area = TotallyGeodesicDisk::tilted(space, &ball, tilt, k).map_err(e)?.exact_area(radius).map_err(e)?;
                if area < argmin.1 {
                    argmin = (tilt, area);
                }
            }
            ok &= rel0 <= 1e-6 && argmin.0 == 0.0 && (argmin.1 - bound).abs() <= 1e-6 * bound;
            if rel0 > 1e-6 || argmin.0 != 0.0 {
                notes.push(format!("κ={kappa},k={k}: rel {rel0:.1e}, argmin tilt {}", argmin.0));
            }
        }
        let chord_bound = 2.0 * underline_r(c, &ball).map_err(e)?;
        for i in 0..=20 {
            let alpha = PI * i as f64 / 20.0;
            let len = geodesic_chord_length(c, &ball, alpha).map_err(e)?;
            ok &= len >= chord_bound * (1.0 - 1e-4);
        }
    }
    for (neck, y0) in [(0.4, 0.4), (0.3, 0.3), (0.5, 0.5)] {
        let cat = Catenoid::new(1.0, neck).map_err(e)?;
        let y = cat.space().point(DVector::from_vec(vec![y0, 0.0, 0.0])).map_err(e)?;
        let chk = prescribed_point_check(&cat, &y, 24).map_err(e)?;
        ok &= chk.area >= chk.bound * (1.0 - 1e-4);
        notes.push(format!("catenoid neck {neck}: area {:.6} ≥ {:.6}", chk.area, chk.bound));
    }
    check(ok, notes.join("; "))
}

fn c9_monotonicity() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut run = |name: &str, s: &dyn ExplicitSurface, radius: f64, res: usize| -> Result<(), String> {
        let grid = default_t_grid(radius, 50);
        let q = q_profile(s, &grid, res).map_err(e)?;
        let qp = q_partial_profile(s, &grid, res).map_err(e)?;
        ok &= q.nondecreasing(1e-6) && qp.nondecreasing(1e-6);
        notes.push(format!("{name} {:.1e}/{:.1e}", q.min_forward_difference, qp.min_forward_difference));
        Ok(())
    };
    for kappa in KAPPAS {
        let space = SpaceForm::from_kappa(kappa, 4).map_err(e)?;
        let ball = BallData::new(space.curvature(), 1.0, 0.4).map_err(e)?;
        run(&format!("tilted κ={kappa}"), &TotallyGeodesicDisk::tilted(space, &ball, 0.6, 2).map_err(e)?, 1.0, 16)?;
        run(&format!("chord κ={kappa}"), &TotallyGeodesicDisk::tilted(space, &ball, 0.9, 1).map_err(e)?, 1.0, 16)?;
    }
    run("catenoid", &Catenoid::new(1.0, 0.4).map_err(e)?, 1.0, 24)?;
    run("clifford", &CliffordTorus::new(1.0).map_err(e)?, 1.0, 16)?;
    check(ok, format!("min forward differences Q/Q_∂: {}", notes.join(", ")))
}

fn c10_wedge() -> Outcome {
    let w = wedge_compare(1.5, 0.4).map_err(e)?;
    let ok = w.obstruction && w.r_over < w.r_under && (w.r_over - 1.3354).abs() <= 1e-3 && (w.r_under - 1.4939).abs() <= 1e-3;
    check(ok, format!("r̄ = {:.6}, r̲ = {:.6}", w.r_over, w.r_under))
}

fn c11_sweep() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in [2, 3, 4, 8] {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = prescribed_area::cli::run(
            ["prescribed-area", "sweep-sphere", "--k", &k.to_string(), "--grid", "12"],
            &mut out,
            &mut err,
        );
        let mut rdr = csv::Reader::from_reader(out.as_slice());
        let (mut rows, mut simple, mut unsound) = (0, 0, 0);
        for rec in rdr.records() {
            let rec = rec.map_err(e)?;
            let s = &rec[4] == "true";
            let c = &rec[5] == "true";
            rows += 1;
            simple += s as usize;
            unsound += (s && !c) as usize;
        }
        ok &= code == 0 && rows == 144 && unsound == 0 && (k != 2 || simple == 0);
        notes.push(format!("k={k}: {simple} simple, {unsound} unsound"));
    }
    check(ok, notes.join("; "))
}

fn c12_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut g_err, mut b_err, mut a_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut sign_ok = true;
    for _ in 0..2000 {
        let kappa = KAPPAS[rng.random_range(0..3)];
        let c = Curvature::from_kappa(kappa).map_err(e)?;
        let k = rng.random_range(1..=6);
        let ctx = ProfileContext::new(c, k).map_err(e)?;
        let hi = if kappa == 1 { 1.5 } else { 3.0 };
        let r = rng.random_range(0.02..hi);
        let ap = ctx.a_prime(r);
        let h = (1e-3 * r).min(1e-4);
        let gp = derivative_at_zero(|t| ctx.g(r + t), h).map_err(e)?;
        let bp = derivative_at_zero(|t| ctx.b(r + t), h).map_err(e)?;
        let app = derivative_at_zero(|t| Ok(ctx.a_prime(r + t)), h).map_err(e)?;
        g_err = g_err.max((gp * ap - 1.0).abs());
        b_err = b_err.max((bp * c.cs(r).powi(2) * ap - 1.0).abs());
        a_err = a_err.max((app / ap - (k as f64 - 1.0) * c.ct(r)).abs() / (1.0 + (k as f64 - 1.0) * c.ct(r).abs()));
        if k >= 2 {
            let f = 1.0 - k as f64 * ctx.a(r).map_err(e)? / ap * c.ct(r);
            sign_ok &= match c {
                Curvature::Flat => f.abs() < 1e-12,
                _ => f.signum() == c.kappa(),
            };
        }
    }
    // small-r behaviour: A′ ~ r^{k−1}, A ~ r^k/k, G′ and B′ ~ r^{1−k}
    let mut asym = 0.0f64;
    for kappa in KAPPAS {
        let c = Curvature::from_kappa(kappa).map_err(e)?;
        for k in 1..=6 {
            let ctx = ProfileContext::new(c, k).map_err(e)?;
            for r in [1e-3f64, 1e-4] {
                let lead = r.powi(k as i32 - 1);
                let gp = derivative_at_zero(|t| ctx.g(r + t), r * 1e-3).map_err(e)?;
                let bp = derivative_at_zero(|t| ctx.b(r + t), r * 1e-3).map_err(e)?;
                for ratio in [ctx.a_prime(r) / lead, ctx.a(r).map_err(e)? / (r * lead / k as f64), gp * lead, bp * lead] {
                    asym = asym.max((ratio - 1.0).abs());
                }
            }
        }
    }
    let ok = g_err <= 1e-10 && b_err <= 1e-8 && a_err <= 1e-8 && sign_ok && asym <= 1e-2;
    check(
        ok,
        format!("G′A′ {g_err:.1e}, B′cs²A′ {b_err:.1e}, A″/A′ {a_err:.1e}, sign {sign_ok}, asymptotic ratios {asym:.1e}"),
    )
}

fn c13_optimal_domain() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let configs = [(-1, 2, 1.0, 0.4), (-1, 4, 1.5, 0.6), (0, 2, 1.0, 0.3), (0, 3, 1.0, 0.5), (0, 5, 2.0, 0.7), (1, 5, 0.7, 0.15)];
    for (kappa, k, radius, s_y) in configs {
        let c = Curvature::from_kappa(kappa).map_err(e)?;
        let ball = BallData::new(c, radius, s_y).map_err(e)?;
        if kappa == 1 {
            assert!((s_y + radius).cos() >= (2.0 / k as f64).sqrt());
        }
        let r0 = underline_r(c, &ball).map_err(e)?;
        let opt = optimal_profile(c, k, s_y, r0, &OdeOptions::default()).map_err(e)?;
        let outer = ball_profile(c, k, radius, s_y).map_err(e)?;
        let cont = containment(&opt, &outer, 1e-6).map_err(e)?;
        ok &= cont.contained && cont.compared > 0;
        notes.push(format!("κ={kappa},k={k}: excess {:.1e} over {} pts", cont.max_excess, cont.compared));
    }
    check(ok, notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("divergence identity", c1_divergence_identity),
        ("V1 certification", c2_v1_certification),
        ("V2 residue", c3_residue),
        ("V3 boundary and wedge face", c4_boundary),
        ("Euclidean reduction", c5_euclidean_reduction),
        ("F′ closed form", c6_fprime),
        ("sphere geodesics", c7_geodesics),
        ("area estimates on explicit surfaces", c8_area_bounds),
        ("monotonicity", c9_monotonicity),
        ("wedge obstruction", c10_wedge),
        ("sweep soundness", c11_sweep),
        ("identity suite", c12_identities),
        ("optimal-domain containment", c13_optimal_domain),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.1} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {d}", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
