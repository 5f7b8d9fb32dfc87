//! Command-line front end. Exit codes: 0 when every check passes, 1 when a
//! mathematical check fails, 2 on usage errors.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::domains::{ball_profile, containment, optimal_profile, profile_admissible, wedge_grid, OdiForm};
use crate::error::{Error, Result};
use crate::field::{
    boundary_check, boundary_check_wedge, certify_v1, default_residue_radii, div_numeric, div_w_closed, eval_bh_euclidean,
    eval_w, halton_direction, min_sphere_condition, residue_check, CertParams, FieldConfig,
};
use crate::geodesics::{minimize_chord, total_length, ChordProblem};
use crate::geometry::{Curvature, SpaceForm};
use crate::ode::OdeOptions;
use crate::profiles::{underline_r, BallData, ProfileContext};
use crate::surfaces::{
    default_t_grid, q_partial_profile, q_profile, Catenoid, CliffordTorus, ExplicitSurface, TotallyGeodesicDisk,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "prescribed-area", version, about = "Certificates and sweeps for prescribed-point area bounds")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the field certificates and identity checks for one configuration (JSON).
    Verify(VerifyArgs),
    /// Sphere-condition sweep over (s_y, R) (CSV).
    SweepSphere(SweepArgs),
    /// Chord lengths through y on the sphere (CSV).
    Geodesic(GeodesicArgs),
    /// Integrate the equality profile and compare with the ball (CSV).
    Domain(DomainArgs),
    /// Q and Q_∂ profiles of an explicit minimal surface (CSV).
    Monotonicity(MonotonicityArgs),
    /// Orthogonal disk against the disk containing γ in the wedge (CSV).
    Wedge(WedgeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BallArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: i64,
    #[arg(long)]
    pub k: usize,
    /// Ambient dimension; defaults to max(k + 1, 3).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long = "sy")]
    pub s_y: f64,
}

impl BallArgs {
    fn n(&self) -> usize {
        self.n.unwrap_or((self.k + 1).max(3))
    }

    fn config(&self) -> Result<FieldConfig> {
        FieldConfig::new(self.kappa, self.n(), self.k, self.radius, self.s_y)
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub ball: BallArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub k: usize,
    /// Points per axis of the (R, s_y) grid.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Size of the s-grid on which the sphere condition is checked.
    #[arg(long, default_value_t = 400)]
    pub lhs_grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    #[arg(long = "sy")]
    pub s_y: f64,
    #[arg(long = "R")]
    pub radius: f64,
    /// Rows of the printed α-table.
    #[arg(long, default_value_t = 181)]
    pub table: usize,
    /// Grid for the minimiser search.
    #[arg(long, default_value_t = 10_000)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    General,
    Printed,
}

#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: i64,
    #[arg(long)]
    pub k: usize,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long = "sy")]
    pub s_y: f64,
    /// Initial value R(s_y); defaults to the orthogonal-disk radius of the ball.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long, value_enum, default_value_t = FormArg::General)]
    pub form: FormArg,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceArg {
    /// Totally geodesic disk through the centre.
    Disk,
    /// Totally geodesic disk through y, tilted by --tilt.
    Tilted,
    /// Geodesic chord through y (k = 1 tilted disk).
    Chord,
    Catenoid,
    Clifford,
}

#[derive(Debug, Clone, Args)]
pub struct MonotonicityArgs {
    #[arg(long, value_enum)]
    pub surface: SurfaceArg,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    pub kappa: i64,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long = "sy", default_value_t = 0.3)]
    pub s_y: f64,
    #[arg(long, default_value_t = 0.5)]
    pub tilt: f64,
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long, default_value_t = 24)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Args)]
pub struct WedgeArgs {
    /// Grid values i/20 for i = 1..=grid.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
}

/// Outcome of a command: the report text and whether every check passed.
struct Outcome {
    body: String,
    pass: bool,
    summary: Option<String>,
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

#[derive(Debug, Serialize)]
struct Suite {
    suite: &'static str,
    samples: usize,
    max_err: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

fn random_point_and_plane(cfg: &FieldConfig, rng: &mut ChaCha8Rng) -> Result<(crate::Point, crate::KPlane)> {
    let sp = cfg.space();
    let o = sp.origin();
    let basis = sp.tangent_basis(&o);
    let mut dir = DVector::zeros(sp.ambient_dim());
    for b in &basis {
        dir += b * (2.0 * rng.random::<f64>() - 1.0);
    }
    let dir = &dir / sp.norm(&dir);
    let t = cfg.radius() * rng.random::<f64>().powf(1.0 / sp.dim() as f64) * 0.98;
    let x = sp.geodesic(&o, &dir, t).0;
    let plane = sp.random_kplane(&x, cfg.k(), rng.random())?;
    Ok((x, plane))
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let cfg = a.ball.config()?;
    if a.samples == 0 {
        return Err(Error::InvalidParameter("--samples must be positive".into()));
    }
    let mut suites = Vec::new();

    let params = CertParams { samples: a.samples, seed: a.seed, tolerance: a.tolerance, ..CertParams::default() };
    let cert = certify_v1(&cfg, &params)?;
    suites.push(Suite {
        suite: "v1_divergence",
        samples: cert.evaluated,
        max_err: (cert.max_div - 1.0).max(0.0),
        pass: cert.passed(),
        detail: Some(json!({
            "violations": cert.violations,
            "max_div": cert.max_div,
            "worst_point": cert.worst_point,
            "near_equality": cert.near_equality,
            "equality_failures": cert.equality_failures,
            "min_sphere_lhs": cert.min_sphere_lhs,
            "sphere_lhs_argmin": cert.sphere_lhs_argmin,
        })),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed);
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let y = cfg.y();
    let mut attempts = 0;
    while used < 200 && attempts < 2000 {
        attempts += 1;
        let (x, plane) = random_point_and_plane(&cfg, &mut rng)?;
        if cfg.space().distance(&x, &y)? < 0.05 {
            continue;
        }
        let (Ok(closed), Ok(numeric)) = (div_w_closed(&cfg, &x, &plane), div_numeric(&cfg, &plane)) else {
            continue;
        };
        worst = worst.max((closed.total - numeric).abs() / (1.0 + closed.total.abs()));
        used += 1;
    }
    suites.push(Suite { suite: "divergence_oracle", samples: used, max_err: worst, pass: used > 0 && worst <= 1e-6, detail: None });

    let sp = cfg.space();
    let ctx = cfg.profiles();
    let expected = -ctx.a(cfg.r_under())?;
    let basis = sp.tangent_basis(&y);
    let mut worst: f64 = 0.0;
    for i in 1..=3u64 {
        let local = halton_direction(i, sp.dim());
        let dir = basis.iter().zip(local.iter()).fold(DVector::zeros(sp.ambient_dim()), |acc, (b, c)| acc + b * *c);
        let value = if cfg.k() == 1 {
            0.5 * (residue_check(&cfg, &dir, &default_residue_radii())? + residue_check(&cfg, &(-&dir), &default_residue_radii())?)
        } else {
            residue_check(&cfg, &dir, &default_residue_radii())?
        };
        worst = worst.max((value - expected).abs());
    }
    suites.push(Suite { suite: "v2_residue", samples: 3, max_err: worst, pass: worst <= 1e-6, detail: Some(json!({ "expected": expected })) });

    let b = boundary_check(&cfg, 1000)?;
    suites.push(Suite { suite: "v3_boundary", samples: 1002, max_err: b, pass: b <= 1e-10, detail: None });
    if cfg.curvature() == Curvature::Spherical && cfg.s_y() + cfg.radius() > FRAC_PI_2 {
        let w = boundary_check_wedge(&cfg, 1000)?;
        suites.push(Suite { suite: "v3_wedge_face", samples: 1000, max_err: w, pass: w <= 1e-10, detail: None });
    }

    let (mut g_err, mut b_err): (f64, f64) = (0.0, 0.0);
    let top = 0.9 * cfg.curvature().half_diam().min(3.0);
    for i in 1..=50 {
        let r = top * i as f64 / 51.0;
        if cfg.curvature() == Curvature::Spherical && (r - FRAC_PI_2).abs() < 0.05 {
            continue;
        }
        let h = 1e-4 * r;
        let d = |fun: &dyn Fn(f64) -> Result<f64>, h: f64| -> Result<f64> { Ok((fun(r + h)? - fun(r - h)?) / (2.0 * h)) };
        let gp = |h| d(&|x| ctx.g(x), h);
        let bp = |h| d(&|x| ctx.b(x), h);
        let gprime = (4.0 * gp(h / 2.0)? - gp(h)?) / 3.0;
        let bprime = (4.0 * bp(h / 2.0)? - bp(h)?) / 3.0;
        let ap = ctx.a_prime(r);
        let cs = cfg.curvature().cs(r);
        g_err = g_err.max((gprime * ap - 1.0).abs());
        b_err = b_err.max((bprime * cs * cs * ap - 1.0).abs());
    }
    suites.push(Suite { suite: "identity_g_a", samples: 50, max_err: g_err, pass: g_err <= 1e-6, detail: None });
    suites.push(Suite { suite: "identity_b_a", samples: 50, max_err: b_err, pass: b_err <= 1e-6, detail: None });

    if cfg.curvature() == Curvature::Flat {
        let mut worst: f64 = 0.0;
        let mut used = 0;
        let yv = y.coords().clone();
        for _ in 0..2000 {
            let (x, _) = random_point_and_plane(&cfg, &mut rng)?;
            if (x.coords() - &yv).norm() < 1e-3 {
                continue;
            }
            let w = eval_w(&cfg, &x)?.vec;
            let bh = eval_bh_euclidean(cfg.k(), cfg.radius(), &yv, x.coords())?;
            worst = worst.max((w - bh).amax());
            used += 1;
        }
        suites.push(Suite { suite: "euclidean_reduction", samples: used, max_err: worst, pass: worst <= 1e-12, detail: None });
    }

    let pass = suites.iter().all(|s| s.pass);
    let failed: Vec<&str> = suites.iter().filter(|s| !s.pass).map(|s| s.suite).collect();
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "config": {
            "kappa": a.ball.kappa, "k": a.ball.k, "n": a.ball.n(), "R": a.ball.radius, "s_y": a.ball.s_y,
            "samples": a.samples, "seed": a.seed, "tolerance": a.tolerance,
        },
        "suites": suites,
        "pass": pass,
    });
    let summary = (!pass).then(|| format!("failed suites: {}; V1 violations: {}", failed.join(", "), cert.violations));
    Ok(Outcome { body: serde_json::to_string_pretty(&report).map_err(|e| Error::Numerical(e.to_string()))? + "\n", pass, summary })
}

fn sweep_sphere(a: &SweepArgs) -> Result<Outcome> {
    if a.k < 1 || a.grid < 1 || a.lhs_grid < 10 {
        return Err(Error::InvalidParameter("need k ≥ 1, grid ≥ 1, lhs-grid ≥ 10".into()));
    }
    let n = (a.k + 1).max(3);
    let m = a.grid;
    let threshold = (2.0 / a.k as f64).sqrt();
    let mut rows = Vec::new();
    let mut pass = true;
    for i in 1..=m {
        let radius = FRAC_PI_2 * i as f64 / (m + 1) as f64;
        for j in 1..=m {
            let s_y = radius * j as f64 / (m + 1) as f64;
            let cfg = FieldConfig::new(1, n, a.k, radius, s_y)?;
            let (min_lhs, _) = min_sphere_condition(&cfg, a.lhs_grid)?;
            let simple = (s_y + radius).cos() >= threshold;
            let certified = min_lhs >= -1e-9;
            pass &= !simple || certified;
            rows.push(vec![f(s_y), f(radius), a.k.to_string(), f(min_lhs), simple.to_string(), certified.to_string()]);
        }
    }
    let body = csv_text(&["s_y", "R", "k", "min_lhs", "simple_condition", "certified"], rows)?;
    Ok(Outcome { body, pass, summary: (!pass).then(|| "a row satisfies the simple condition but is not certified".into()) })
}

fn geodesic(a: &GeodesicArgs) -> Result<Outcome> {
    let p = ChordProblem::new(a.s_y, a.radius)?;
    if a.table < 2 {
        return Err(Error::InvalidParameter("--table must be at least 2".into()));
    }
    let rows = (0..a.table)
        .map(|i| {
            let alpha = PI * i as f64 / (a.table - 1) as f64;
            Ok(vec![f(alpha), f(total_length(&p, alpha)?)])
        })
        .collect::<Result<Vec<_>>>()?;
    let (alpha_star, l_star) = minimize_chord(&p, a.grid)?;
    let target = 2.0 * p.r_under();
    let pass = (alpha_star - FRAC_PI_2).abs() <= 1e-6 && (l_star - target).abs() <= 1e-8;
    let summary = format!("alpha_star = {}, L_star = {}, 2*r_under = {}", f(alpha_star), f(l_star), f(target));
    Ok(Outcome { body: csv_text(&["alpha", "total_length"], rows)?, pass, summary: Some(summary) })
}

fn domain(a: &DomainArgs) -> Result<Outcome> {
    let c = Curvature::from_kappa(a.kappa)?;
    let ball = BallData::new(c, a.radius, a.s_y)?;
    let r0 = match a.r0 {
        Some(r) => r,
        None => underline_r(c, &ball)?,
    };
    let form = match a.form {
        FormArg::General => OdiForm::General,
        FormArg::Printed => OdiForm::Printed,
    };
    let opt = optimal_profile(c, a.k, a.s_y, r0, &OdeOptions::default())?;
    let outer = ball_profile(c, a.k, a.radius, a.s_y)?;
    let cont = containment(&opt, &outer, 1e-6)?;
    let (lo, hi) = opt.interval();
    // the finite-difference check of F′ is swamped by B(|s − s_y|) next to s_y
    let grid: Vec<f64> = (1..a.grid.max(2))
        .map(|i| lo + (hi - lo) * i as f64 / a.grid.max(2) as f64)
        .filter(|s| (s - a.s_y).abs() >= 1e-3)
        .collect();
    let adm = profile_admissible(&opt, &grid, form)?;
    let mut buf = Vec::new();
    crate::domains::write_profile_csv(&opt, &grid, form, &mut buf)?;
    let (left, right) = opt.termination.clone().unwrap_or_default();
    let summary = format!(
        "interval = ({}, {}); stopped: left '{}', right '{}'; contained = {} (max excess {}); min odi_lhs = {}",
        f(lo),
        f(hi),
        left,
        right,
        cont.contained,
        f(cont.max_excess),
        f(adm.min_lhs)
    );
    let pass = cont.contained && adm.min_lhs >= -1e-8;
    Ok(Outcome { body: String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))?, pass, summary: Some(summary) })
}

fn monotonicity(a: &MonotonicityArgs) -> Result<Outcome> {
    let surface: Box<dyn ExplicitSurface> = match a.surface {
        SurfaceArg::Disk => Box::new(TotallyGeodesicDisk::through_center(SpaceForm::from_kappa(a.kappa, a.n)?, a.radius, a.k)?),
        SurfaceArg::Tilted | SurfaceArg::Chord => {
            let space = SpaceForm::from_kappa(a.kappa, a.n)?;
            let ball = BallData::new(space.curvature(), a.radius, a.s_y)?;
            let k = if a.surface == SurfaceArg::Chord { 1 } else { a.k };
            Box::new(TotallyGeodesicDisk::tilted(space, &ball, a.tilt, k)?)
        }
        SurfaceArg::Catenoid => Box::new(Catenoid::new(a.radius, a.s_y)?),
        SurfaceArg::Clifford => Box::new(CliffordTorus::new(a.radius)?),
    };
    if a.grid < 2 || a.resolution < 4 {
        return Err(Error::InvalidParameter("need grid ≥ 2 and resolution ≥ 4".into()));
    }
    let grid = default_t_grid(a.radius, a.grid);
    let q = q_profile(surface.as_ref(), &grid, a.resolution)?;
    let qp = q_partial_profile(surface.as_ref(), &grid, a.resolution)?;
    let rows = grid.iter().zip(q.values.iter().zip(&qp.values)).map(|(t, (x, y))| vec![f(*t), f(*x), f(*y)]).collect();
    let pass = q.nondecreasing(1e-6) && qp.nondecreasing(1e-6);
    let summary = format!(
        "{}: min forward difference Q = {}, Q_partial = {}",
        surface.describe(),
        f(q.min_forward_difference),
        f(qp.min_forward_difference)
    );
    Ok(Outcome { body: csv_text(&["t", "Q", "Q_partial"], rows)?, pass, summary: Some(summary) })
}

fn wedge(a: &WedgeArgs) -> Result<Outcome> {
    let rows = wedge_grid(a.grid)?
        .into_iter()
        .map(|w| vec![f(w.radius), f(w.s_y), f(w.r_under), f(w.r_over), w.obstruction.to_string()])
        .collect();
    Ok(Outcome { body: csv_text(&["R", "s_y", "r_under", "r_over", "obstruction"], rows)?, pass: true, summary: None })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Verify(a) => verify(a),
        Command::SweepSphere(a) => sweep_sphere(a),
        Command::Geodesic(a) => geodesic(a),
        Command::Domain(a) => domain(a),
        Command::Monotonicity(a) => monotonicity(a),
        Command::Wedge(a) => wedge(a),
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidCurvature(_) | Error::InvalidDimension(_) | Error::InvalidParameter(_)
    )
}

/// Parses `args` (including the program name) and runs the command, writing
/// the report to `--out` or `stdout` and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    // ProfileContext construction is the first place a bad k surfaces
    if let Command::Verify(VerifyArgs { ball, .. }) = &cli.command {
        if let Err(e) = Curvature::from_kappa(ball.kappa).and_then(|c| ProfileContext::new(c, ball.k)) {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    }
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if is_usage_error(&e) { 2 } else { 1 };
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|file| {
            let mut w = BufWriter::new(file);
            w.write_all(outcome.body.as_bytes())?;
            w.flush()
        }),
        None => stdout.write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return 2;
    }
    if let Some(s) = &outcome.summary {
        let _ = writeln!(stderr, "{s}");
    }
    if outcome.pass {
        0
    } else {
        1
    }
}
