//! The prescribed-point vector field
//!
//! ```text
//! W = ((A(r_y) − A(u_s))/A′(r_y))·∇r_y + (B(r_y) − B(u_s))·A′(u_s)u′_s·cs(s − s_y)²·∂_s
//! ```
//!
//! on a geodesic ball `B^n_R(o)`, the classical radial fields `W₁`, `W₂`, the
//! closed-form divergence along a k-plane and the certifiers for the
//! divergence bound (V1), the residue at `y` (V2) and boundary vanishing (V3).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{directional_div_term, AxisChart, Curvature, KPlane, Point, SpaceForm, TangentVector};
use crate::numerics::{self, derive_seed, extrapolate_to_zero, halton};
use crate::profiles::{fprime_from_u, underline_r, u_ball, uprime_from_u, BallData, ProfileContext};

/// Exclusion radius around `y` and other singular sets when sampling.
pub const SINGULAR_EXCLUSION: f64 = 1e-3;

/// Ball, prescribed point and submanifold dimension.
#[derive(Debug, Clone)]
pub struct FieldConfig {
    space: SpaceForm,
    k: usize,
    ball: BallData,
    chart: AxisChart,
    profiles: ProfileContext,
    r_under: f64,
}

impl FieldConfig {
    pub fn new(kappa: i64, n: usize, k: usize, radius: f64, s_y: f64) -> Result<Self> {
        Self::from_space(SpaceForm::from_kappa(kappa, n)?, k, radius, s_y)
    }

    pub fn from_space(space: SpaceForm, k: usize, radius: f64, s_y: f64) -> Result<Self> {
        if k < 1 || k >= space.dim() {
            return Err(Error::InvalidDimension(format!("k = {k} must lie in 1..={}", space.dim() - 1)));
        }
        let c = space.curvature();
        let ball = BallData::new(c, radius, s_y)?;
        let chart = AxisChart::canonical(space, s_y)?;
        let profiles = ProfileContext::new(c, k)?;
        let r_under = underline_r(c, &ball)?;
        Ok(Self { space, k, ball, chart, profiles, r_under })
    }

    /// The same configuration with `B` shifted by a constant.
    pub fn with_b_offset(mut self, offset: f64) -> Self {
        self.profiles = self.profiles.with_b_offset(offset);
        self
    }

    pub fn space(&self) -> &SpaceForm {
        &self.space
    }

    pub fn curvature(&self) -> Curvature {
        self.space.curvature()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ball(&self) -> &BallData {
        &self.ball
    }

    pub fn radius(&self) -> f64 {
        self.ball.radius
    }

    pub fn s_y(&self) -> f64 {
        self.ball.s_y
    }

    pub fn chart(&self) -> &AxisChart {
        &self.chart
    }

    pub fn profiles(&self) -> &ProfileContext {
        &self.profiles
    }

    pub fn y(&self) -> Point {
        self.chart.y()
    }

    pub fn r_under(&self) -> f64 {
        self.r_under
    }

    /// Whether `x` lies in the closed ball.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        Ok(self.space.distance(self.chart.origin(), x)? <= self.ball.radius * (1.0 + 1e-12))
    }
}

/// Per-point quantities shared by `W` and its divergence.
struct Local {
    r_y: f64,
    s: f64,
    cs_rho: f64,
    u: f64,
    uprime: f64,
    grad_ry: DVector<f64>,
    killing: DVector<f64>,
    unit_grad_s: DVector<f64>,
}

fn local(cfg: &FieldConfig, x: &Point) -> Result<Local> {
    let sp = &cfg.space;
    let c = sp.curvature();
    let r = sp.distance(cfg.chart.origin(), x)?;
    if r > cfg.ball.radius * (1.0 + 1e-12) {
        return Err(domain("W (outside the ball)", r));
    }
    let y = cfg.y();
    let r_y = sp.distance(&y, x)?;
    if r_y <= 0.0 {
        return Err(Error::SingularGradient("x coincides with y"));
    }
    let coords = cfg.chart.axis_coords(x)?;
    let fields = cfg.chart.axis_fields(x)?;
    let s = coords.s.clamp(-cfg.ball.radius, cfg.ball.radius);
    let u = u_ball(c, &cfg.ball, s)?;
    let uprime = uprime_from_u(c, &cfg.ball, s, u);
    let grad_ry = sp.grad_r(&y, x)?.vec;
    let cs_rho = c.cs(coords.rho);
    let unit_grad_s = &fields.grad_s * cs_rho;
    Ok(Local { r_y, s, cs_rho, u, uprime, grad_ry, killing: fields.killing, unit_grad_s })
}

/// `(B(r_y) − B(u))·cs(s − s_y)²`, finite across the pole of `B` on the sphere.
fn b_gap_scaled(cfg: &FieldConfig, l: &Local) -> Result<f64> {
    let c = cfg.curvature();
    let p = &cfg.profiles;
    let cs_d = c.cs(l.s - cfg.ball.s_y);
    if c == Curvature::Spherical && l.r_y > p.split_radius() && l.u > p.split_radius() {
        // tan r_y − tan u = sin(r_y − u)/(cos r_y cos u) with
        // cos r_y cos u = cos²(s − s_y)·cos ρ·cos R/cos s
        let tan_part = (l.r_y - l.u).sin() * l.s.cos() / (l.cs_rho * cfg.ball.radius.cos());
        let regular = p.sphere_regular_integral(l.r_y, l.u) * cs_d * cs_d;
        return Ok(tan_part + regular);
    }
    Ok(p.b_diff(l.r_y, l.u)? * cs_d * cs_d)
}

fn w_from_local(cfg: &FieldConfig, l: &Local) -> Result<DVector<f64>> {
    let p = &cfg.profiles;
    let radial = (p.a(l.r_y)? - p.a(l.u)?) / p.a_prime(l.r_y);
    let axial = b_gap_scaled(cfg, l)? * p.a_prime(l.u) * l.uprime;
    Ok(&l.grad_ry * radial + &l.killing * axial)
}

/// `W(x)`.
pub fn eval_w(cfg: &FieldConfig, x: &Point) -> Result<TangentVector> {
    let l = local(cfg, x)?;
    Ok(TangentVector { base: x.clone(), vec: w_from_local(cfg, &l)? })
}

/// The explicit Euclidean field for a ball of radius `radius` about the
/// origin and a prescribed point `y`:
///
/// ```text
/// (1/k)(1 − u^k/r^k)(x − y) + (1/(k−2))(u^{k−2}/r^{k−2} − 1)·y
/// ```
///
/// with `r = |x − y|`, `u² = R² − 2⟨x,y⟩ + |y|²`. The second coefficient is
/// `log(u/r)` for `k = 2` and `(u − r)/u` for `k = 1`.
pub fn eval_bh_euclidean(k: usize, radius: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::SingularGradient("x coincides with y"));
    }
    let u = (radius * radius - 2.0 * x.dot(y) + y.norm_squared()).max(0.0).sqrt();
    let kf = k as f64;
    let ratio = u / r;
    let first = (1.0 - ratio.powi(k as i32)) / kf;
    let second = match k {
        1 => (u - r) / u,
        2 => ratio.ln(),
        _ => (ratio.powi(k as i32 - 2) - 1.0) / (kf - 2.0),
    };
    Ok(d * first + y * second)
}

/// `W₁ = ∇r/A′(r)` and `W₂ = (A(r)/A′(r))∇r`, centred at `o`.
pub fn eval_w1_w2(cfg: &FieldConfig, x: &Point) -> Result<(TangentVector, TangentVector)> {
    let (r, grad) = radial(cfg, x)?;
    let p = &cfg.profiles;
    let ap = p.a_prime(r);
    let w1 = TangentVector { base: x.clone(), vec: &grad / ap };
    let w2 = TangentVector { base: x.clone(), vec: &grad * (p.a(r)? / ap) };
    Ok((w1, w2))
}

fn radial(cfg: &FieldConfig, x: &Point) -> Result<(f64, DVector<f64>)> {
    let sp = &cfg.space;
    let r = sp.distance(cfg.chart.origin(), x)?;
    if !(r > 0.0 && r < sp.half_diam()) {
        return Err(domain("radial field", r));
    }
    Ok((r, sp.grad_r(cfg.chart.origin(), x)?.vec))
}

/// Closed-form `(div_S W₁, div_S W₂)`.
pub fn div_w1_w2_closed(cfg: &FieldConfig, x: &Point, plane: &KPlane) -> Result<(f64, f64)> {
    let (r, grad) = radial(cfg, x)?;
    let p = &cfg.profiles;
    let c = cfg.curvature();
    let perp = 1.0 - plane.tangential_sq(&cfg.space, &grad);
    let k = cfg.k as f64;
    let ap = p.a_prime(r);
    let d1 = k * c.ct(r) * perp / ap;
    let d2 = 1.0 - (1.0 - k * p.a(r)? / ap * c.ct(r)) * perp;
    Ok((d1, d2))
}

/// Terms of the closed-form divergence of `W` along a k-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivBreakdown {
    pub total: f64,
    /// Coefficient of `|∇^⊥r_y|²`.
    pub coeff_perp: f64,
    /// Coefficient of `cs(ρ)²|∇^⊤s|²`.
    pub coeff_s: f64,
    pub perp_sq: f64,
    /// `cs(ρ)²|∇^⊤s|²`, the tangential part of the unit vector along `∇s`.
    pub stangent_sq: f64,
}

impl DivBreakdown {
    pub fn reassembled(&self) -> f64 {
        1.0 - self.coeff_perp * self.perp_sq - self.coeff_s * self.stangent_sq
    }
}

fn coefficients(cfg: &FieldConfig, l: &Local) -> Result<(f64, f64)> {
    let p = &cfg.profiles;
    let c = cfg.curvature();
    let k = cfg.k as f64;
    let coeff_perp = 1.0 + k * c.ct(l.r_y) * (p.a(l.u)? - p.a(l.r_y)?) / p.a_prime(l.r_y);
    let cs_s = c.cs(l.s);
    let sn_sy = c.sn(cfg.ball.s_y);
    let coeff_s = if cfg.k == 1 {
        let t = if l.u == l.r_y { 1.0 } else { c.tn(l.r_y) / c.tn(l.u) };
        let cs_u = c.cs(l.u);
        let lead = sn_sy * sn_sy / (c.sn(l.u).powi(2) * cs_s * cs_s);
        lead * (1.0 + (1.0 - t) * (cs_u * cs_u - 2.0))
    } else {
        let fprime = fprime_from_u(p, &cfg.ball, l.s, l.u);
        let gap = if fprime == 0.0 { 0.0 } else { p.b_diff(l.u, l.r_y)? };
        l.uprime * l.uprime * cs_s * cs_s / c.cs(cfg.ball.radius).powi(2) + gap * fprime
    };
    Ok((coeff_perp, coeff_s))
}

/// Closed-form divergence of `W` along `plane`.
pub fn div_w_closed(cfg: &FieldConfig, x: &Point, plane: &KPlane) -> Result<DivBreakdown> {
    let l = local(cfg, x)?;
    let (coeff_perp, coeff_s) = coefficients(cfg, &l)?;
    let perp_sq = (1.0 - plane.tangential_sq(&cfg.space, &l.grad_ry)).max(0.0);
    let stangent_sq = plane.tangential_sq(&cfg.space, &l.unit_grad_s);
    let mut b = DivBreakdown { total: 0.0, coeff_perp, coeff_s, perp_sq, stangent_sq };
    b.total = b.reassembled();
    Ok(b)
}

/// `Σᵢ g(∇_{eᵢ}field, eᵢ)` over the frame of `plane` by finite differences.
pub fn div_numeric_field<F>(space: &SpaceForm, field: F, plane: &KPlane, h: f64) -> Result<f64>
where
    F: Fn(&Point) -> Result<DVector<f64>>,
{
    plane
        .frame
        .iter()
        .map(|e| directional_div_term(space, &field, &plane.base, e, h))
        .sum()
}

/// Finite-difference divergence of `W` along `plane`.
pub fn div_numeric(cfg: &FieldConfig, plane: &KPlane) -> Result<f64> {
    let h = numerics::DEFAULT_STEP;
    let r_y = cfg.space.distance(&cfg.y(), &plane.base)?;
    if r_y < 10.0 * h {
        return Err(domain("div oracle (too close to y)", r_y));
    }
    div_numeric_field(&cfg.space, |p| w_from_local(cfg, &local(cfg, p)?), plane, h)
}

/// Extrapolated limit of `r_y^{k−1}⟨W, ∇r_y⟩` along the geodesic from `y`
/// with unit initial velocity `direction`.
pub fn residue_check(cfg: &FieldConfig, direction: &DVector<f64>, radii: &[f64]) -> Result<f64> {
    let sp = &cfg.space;
    let y = cfg.y();
    let dir = sp.tangent(&y, direction.clone())?;
    let norm = sp.norm(&dir.vec);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector { norm });
    }
    if radii.len() < 4 || radii.iter().any(|&r| !(r > 0.0 && r <= 0.1)) {
        return Err(Error::InvalidParameter("residue needs at least 4 radii in (0, 0.1]".into()));
    }
    let k = cfg.k as i32;
    let values = radii
        .iter()
        .map(|&t| {
            let x = sp.exp_map(&dir, t)?;
            let l = local(cfg, &x)?;
            let w = w_from_local(cfg, &l)?;
            Ok(t.powi(k - 1) * sp.form(&w, &l.grad_ry))
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = radii.len() - 1;
    let basis: Vec<fn(f64) -> f64> = if cfg.k == 2 {
        let all: [fn(f64) -> f64; 6] =
            [|h| h * h.ln(), |h| h, |h| h * h * h.ln(), |h| h * h, |h| h.powi(3) * h.ln(), |h| h.powi(3)];
        all[..m.min(6)].to_vec()
    } else {
        let all: [fn(f64) -> f64; 6] = [|h| h, |h| h * h, |h| h.powi(3), |h| h.powi(4), |h| h.powi(5), |h| h.powi(6)];
        all[..m.min(6)].to_vec()
    };
    let used = basis.len() + 1;
    extrapolate_to_zero(&radii[..used], &values[..used], &basis)
}

/// Default radii `10⁻³·2^{−j}`, `j = 0..6`, for [`residue_check`].
pub fn default_residue_radii() -> Vec<f64> {
    (0..6).map(|j| 1e-3 * 0.5f64.powi(j)).collect()
}

/// Quasi-uniform unit vector in `ℝ^d` from a Halton point through Box–Muller.
pub fn halton_direction(index: u64, d: usize) -> DVector<f64> {
    let pairs = d.div_ceil(2);
    let h = halton(index, 2 * pairs);
    let mut v = DVector::zeros(d);
    for p in 0..pairs {
        let u1 = h[2 * p].max(1e-300);
        let u2 = h[2 * p + 1];
        let rad = (-2.0 * u1.ln()).sqrt();
        let ang = std::f64::consts::TAU * u2;
        v[2 * p] = rad * ang.cos();
        if 2 * p + 1 < d {
            v[2 * p + 1] = rad * ang.sin();
        }
    }
    let n = v.norm();
    if n < 1e-12 {
        let mut e = DVector::zeros(d);
        e[0] = 1.0;
        return e;
    }
    v / n
}

fn tangent_at_origin(cfg: &FieldConfig, local_dir: &DVector<f64>) -> DVector<f64> {
    // tangent space at o is spanned by the non-time coordinates (κ ≠ 0)
    let sp = &cfg.space;
    let mut v = DVector::zeros(sp.ambient_dim());
    let offset = if sp.curvature() == Curvature::Flat { 0 } else { 1 };
    for i in 0..sp.dim() {
        v[i + offset] = local_dir[i];
    }
    v
}

/// `max |W|` over `m` quasi-uniform points of `∂B^n_R` plus both axis endpoints.
pub fn boundary_check(cfg: &FieldConfig, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidParameter("boundary_check needs m ≥ 1".into()));
    }
    let sp = &cfg.space;
    let radius = cfg.ball.radius;
    let mut points = vec![cfg.chart.point_on_axis(radius), cfg.chart.point_on_axis(-radius)];
    for i in 1..=m as u64 {
        let dir = tangent_at_origin(cfg, &halton_direction(i, sp.dim()));
        points.push(sp.geodesic(cfg.chart.origin(), &dir, radius).0);
    }
    max_norm(cfg, &points)
}

fn max_norm(cfg: &FieldConfig, points: &[Point]) -> Result<f64> {
    let norms = points
        .par_iter()
        .map(|x| Ok(cfg.space.norm(&eval_w(cfg, x)?.vec)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// `max |W|` over `m` quasi-uniform points of `B^n_R ∩ ∂B^n_{π/2}(y)` on the
/// sphere (the flat face `{s = s_y − π/2}` of the wedge), which is non-empty
/// when `s_y + R > π/2`.
pub fn boundary_check_wedge(cfg: &FieldConfig, m: usize) -> Result<f64> {
    let sp = &cfg.space;
    if sp.curvature() != Curvature::Spherical {
        return Err(Error::InvalidParameter("wedge boundary exists only on the sphere".into()));
    }
    let (radius, s_y) = (cfg.ball.radius, cfg.ball.s_y);
    let ratio = radius.cos() / s_y.sin();
    if s_y + radius <= std::f64::consts::FRAC_PI_2 || ratio >= 1.0 {
        return Err(Error::InvalidParameter("wedge face is empty for s_y + R ≤ π/2".into()));
    }
    let phi_max = ratio.acos();
    let centre = cfg.chart.point_on_axis(s_y - std::f64::consts::FRAC_PI_2);
    let normals: Vec<usize> = cfg.chart.normal_indices().collect();
    let mut points = Vec::with_capacity(m);
    for i in 1..=m as u64 {
        let h = halton(i, 1)[0];
        let local_dir = halton_direction(i + 7919, normals.len());
        let mut w = DVector::zeros(sp.ambient_dim());
        for (j, &idx) in normals.iter().enumerate() {
            w[idx] = local_dir[j];
        }
        // stay a hair inside the ball so rounding cannot push x outside
        let phi = phi_max * h * (1.0 - 1e-12);
        points.push(sp.geodesic(&centre, &w, phi).0);
    }
    max_norm(cfg, &points)
}

/// `1 + (B(u) − B(|s − s_y|))·sin(u)^{k−2}·cos(u)·(k cos²u − 2)` on the sphere.
pub fn sphere_condition_lhs(cfg: &FieldConfig, s: f64) -> Result<f64> {
    if cfg.curvature() != Curvature::Spherical {
        return Err(Error::InvalidParameter("sphere condition requires κ = +1".into()));
    }
    let d = (s - cfg.ball.s_y).abs();
    if d == 0.0 {
        return Err(domain("sphere condition (s = s_y)", s));
    }
    let u = u_ball(Curvature::Spherical, &cfg.ball, s)?;
    let k = cfg.k as f64;
    let cu = u.cos();
    let factor = u.sin().powi(cfg.k as i32 - 2) * cu * (k * cu * cu - 2.0);
    if factor == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 + cfg.profiles.b_diff(u, d)? * factor)
}

/// Punctured grid of `m` points in `(lo, hi)` avoiding `s_y` and, on the
/// sphere, the pole `|s − s_y| = π/2` of `B`.
pub fn punctured_grid(lo: f64, hi: f64, s_y: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / m as f64)
        .filter(|s| (s - s_y).abs() >= 1e-6 && ((s - s_y).abs() - std::f64::consts::FRAC_PI_2).abs() >= 1e-9)
        .collect()
}

/// Minimum of [`sphere_condition_lhs`] over a punctured grid of `(−R, R)`.
pub fn min_sphere_condition(cfg: &FieldConfig, m: usize) -> Result<(f64, f64)> {
    let r = cfg.ball.radius;
    let mut best = (f64::INFINITY, f64::NAN);
    for s in punctured_grid(-r, r, cfg.ball.s_y, m) {
        let v = sphere_condition_lhs(cfg, s)?;
        if v < best.0 {
            best = (v, s);
        }
    }
    Ok(best)
}

/// Sampling controls for [`certify_v1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertParams {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Size of the s-grid for the sphere condition.
    pub lhs_grid: usize,
}

impl Default for CertParams {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, tolerance: 1e-9, lhs_grid: 2000 }
    }
}

/// Outcome of a (V1) certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub samples: usize,
    pub evaluated: usize,
    pub max_div: f64,
    pub worst_point: Vec<f64>,
    pub violations: usize,
    pub tolerance: f64,
    /// Samples with `total > 1 − 10⁻⁹`.
    pub near_equality: usize,
    /// Near-equality samples with both coefficients `≥ 10⁻³` but
    /// `perp_sq` or `stangent_sq` above `10⁻⁶`.
    pub equality_failures: usize,
    pub min_coeff_perp: f64,
    pub min_coeff_s: f64,
    /// Minimum of the sphere condition over the s-grid (`κ = +1`).
    pub min_sphere_lhs: Option<f64>,
    pub sphere_lhs_argmin: Option<f64>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct SampleResult {
    total: f64,
    coeff_perp: f64,
    coeff_s: f64,
    near_equality: bool,
    equality_failure: bool,
    point: Point,
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| StandardNormal.sample(rng))
}

/// Random point of the ball away from `y` and (on the sphere) the wedge face.
fn sample_point(cfg: &FieldConfig, rng: &mut ChaCha8Rng, mode: u64) -> Option<Point> {
    let sp = &cfg.space;
    let n = sp.dim();
    let radius = cfg.ball.radius;
    let x = match mode {
        // near γ
        3 => {
            let s = radius * (2.0 * rng.random::<f64>() - 1.0) * (1.0 - 1e-9);
            let c = cfg.curvature();
            let rbar = match c {
                Curvature::Flat => (radius * radius - s * s).sqrt(),
                _ => c.acs(c.cs(radius) / c.cs(s)).ok()?,
            };
            let rho = rbar * 0.05 * rng.random::<f64>();
            let normals: Vec<usize> = cfg.chart.normal_indices().collect();
            let g = gaussian_vec(rng, normals.len());
            let mut dir = DVector::zeros(sp.ambient_dim());
            for (j, &idx) in normals.iter().enumerate() {
                dir[idx] = g[j];
            }
            let norm = dir.norm();
            if norm == 0.0 {
                return None;
            }
            cfg.chart.from_coords(s, rho, &(dir / norm))
        }
        _ => {
            let g = gaussian_vec(rng, n);
            let dir = tangent_at_origin(cfg, &(&g / g.norm()));
            let t = match mode {
                // near the boundary sphere
                2 => radius * (1.0 - 0.02 * rng.random::<f64>()),
                _ => radius * rng.random::<f64>().powf(1.0 / n as f64),
            };
            sp.geodesic(cfg.chart.origin(), &dir, t).0
        }
    };
    let r_y = sp.distance(&cfg.y(), &x).ok()?;
    if r_y < SINGULAR_EXCLUSION {
        return None;
    }
    if cfg.curvature() == Curvature::Spherical {
        let c = cfg.chart.axis_coords(&x).ok()?;
        if (c.s - cfg.ball.s_y).cos().abs() < 1e-9 {
            return None;
        }
    }
    Some(x)
}

/// A k-plane at `x` containing the vectors of `include` and orthogonal to
/// those of `exclude`, completed at random.
pub(crate) fn constrained_plane(
    space: &SpaceForm,
    x: &Point,
    k: usize,
    include: &[DVector<f64>],
    exclude: &[DVector<f64>],
    rng: &mut ChaCha8Rng,
) -> Result<KPlane> {
    let mut vectors: Vec<DVector<f64>> = include.iter().take(k).cloned().collect();
    let excl = space.orthonormalize(x, exclude.to_vec())?;
    let basis = space.tangent_basis(x);
    while vectors.len() < k {
        let mut v = DVector::zeros(space.ambient_dim());
        for b in &basis {
            let g: f64 = StandardNormal.sample(rng);
            v += b * g;
        }
        for e in &excl.frame {
            let c = space.form(&v, e);
            v -= e * c;
        }
        vectors.push(v);
    }
    space.orthonormalize(x, vectors)
}

fn sample_plane(cfg: &FieldConfig, x: &Point, rng: &mut ChaCha8Rng, seed: u64) -> Result<KPlane> {
    let sp = &cfg.space;
    let k = cfg.k;
    let n = sp.dim();
    let choice = rng.random_range(0..6u32);
    if choice < 3 {
        return sp.random_kplane(x, k, seed);
    }
    let l = local(cfg, x)?;
    // component of the unit ∇s direction orthogonal to ∇r_y
    let mut sdir = l.unit_grad_s.clone();
    sdir -= &l.grad_ry * sp.form(&sdir, &l.grad_ry);
    let independent = sp.norm(&sdir) > 1e-6;
    let attempt = match choice {
        3 => constrained_plane(sp, x, k, std::slice::from_ref(&l.grad_ry), std::slice::from_ref(&l.unit_grad_s), rng),
        4 if independent => constrained_plane(sp, x, k, &[sdir], std::slice::from_ref(&l.grad_ry), rng),
        _ if independent && k + 2 <= n => {
            constrained_plane(sp, x, k, &[], &[l.grad_ry.clone(), l.unit_grad_s.clone()], rng)
        }
        _ => sp.random_kplane(x, k, seed),
    };
    attempt.or_else(|_| sp.random_kplane(x, k, seed))
}

fn run_sample(cfg: &FieldConfig, params: &CertParams, index: u64) -> Option<SampleResult> {
    let seed = derive_seed(params.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = sample_point(cfg, &mut rng, index % 4)?;
    let plane = sample_plane(cfg, &x, &mut rng, seed ^ 0xA5A5).ok()?;
    let b = div_w_closed(cfg, &x, &plane).ok()?;
    let near_equality = b.total > 1.0 - 1e-9;
    let equality_failure = near_equality
        && b.coeff_perp >= 1e-3
        && b.coeff_s >= 1e-3
        && (b.perp_sq > 1e-6 || b.stangent_sq > 1e-6);
    Some(SampleResult {
        total: b.total,
        coeff_perp: b.coeff_perp,
        coeff_s: b.coeff_s,
        near_equality,
        equality_failure,
        point: x,
    })
}

/// Monte Carlo certification of `div_S W ≤ 1` over points of the ball and
/// k-planes; for `κ = +1` also the minimum of the sphere condition.
pub fn certify_v1(cfg: &FieldConfig, params: &CertParams) -> Result<CertReport> {
    if params.samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let tol = params.tolerance;
    let results: Vec<SampleResult> =
        (0..params.samples as u64).into_par_iter().filter_map(|i| run_sample(cfg, params, i)).collect();
    let mut report = CertReport {
        samples: params.samples,
        evaluated: results.len(),
        max_div: f64::NEG_INFINITY,
        worst_point: Vec::new(),
        violations: 0,
        tolerance: tol,
        near_equality: 0,
        equality_failures: 0,
        min_coeff_perp: f64::INFINITY,
        min_coeff_s: f64::INFINITY,
        min_sphere_lhs: None,
        sphere_lhs_argmin: None,
    };
    for r in &results {
        if r.total > report.max_div {
            report.max_div = r.total;
            report.worst_point = r.point.coords().iter().cloned().collect();
        }
        report.violations += usize::from(r.total > 1.0 + tol);
        report.near_equality += usize::from(r.near_equality);
        report.equality_failures += usize::from(r.equality_failure);
        report.min_coeff_perp = report.min_coeff_perp.min(r.coeff_perp);
        report.min_coeff_s = report.min_coeff_s.min(r.coeff_s);
    }
    if cfg.curvature() == Curvature::Spherical {
        let (v, s) = min_sphere_condition(cfg, params.lhs_grid.max(1000))?;
        report.min_sphere_lhs = Some(v);
        report.sphere_lhs_argmin = Some(s);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(kappa: i64, n: usize, k: usize, r: f64, sy: f64) -> FieldConfig {
        FieldConfig::new(kappa, n, k, r, sy).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn w_vanishes_on_the_boundary() {
        for kappa in [-1, 0, 1] {
            for k in [1, 2, 3, 5] {
                let c = cfg(kappa, 6, k, 1.1, 0.4);
                assert!(boundary_check(&c, 200).unwrap() <= 1e-10, "κ={kappa} k={k}");
                for t in [1.1, -1.1] {
                    let w = eval_w(&c, &c.chart().point_on_axis(t)).unwrap();
                    assert!(w.vec.norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn w_vanishes_on_the_wedge_face() {
        for k in [2, 3, 4] {
            let c = cfg(1, 5, k, 1.5, 0.4);
            assert!(boundary_check_wedge(&c, 300).unwrap() <= 1e-10);
        }
        assert!(boundary_check_wedge(&cfg(1, 4, 2, 0.5, 0.2), 10).is_err());
    }

    #[test]
    fn euclidean_reduction() {
        let mut r = rng(3);
        for k in 1..=5 {
            let c = cfg(0, 6, k, 1.3, 0.45);
            let y = c.y().into_coords();
            for _ in 0..200 {
                let Some(x) = sample_point(&c, &mut r, 0) else { continue };
                let w = eval_w(&c, &x).unwrap().vec;
                let bh = eval_bh_euclidean(k, 1.3, &y, x.coords()).unwrap();
                assert!((w - bh).amax() <= 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn bh_field_at_centre_and_on_unit_sphere() {
        let y = DVector::zeros(3);
        let x = DVector::from_column_slice(&[0.3, -0.2, 0.1]);
        let w = eval_bh_euclidean(3, 1.0, &y, &x).unwrap();
        let r = x.norm();
        assert_abs_diff_eq!((w - &x * ((1.0 - 1.0 / r.powi(3)) / 3.0)).norm(), 0.0, epsilon = 1e-13);
        let y = DVector::from_column_slice(&[0.2, 0.1, 0.0]);
        let x = DVector::from_column_slice(&[0.6, 0.0, 0.8]);
        assert!(eval_bh_euclidean(4, 1.0, &y, &x).unwrap().norm() < 1e-14);
    }

    #[test]
    fn orthogonal_disk_is_the_equality_case() {
        for kappa in [-1, 0, 1] {
            let c = cfg(kappa, 5, 3, 1.0, 0.3);
            let sp = *c.space();
            let y = c.y();
            let normals: Vec<DVector<f64>> = c.chart().normal_indices().map(|i| sp.basis(i)).collect();
            let x = sp.geodesic(&y, &normals[0], 0.4).0;
            let (_, v1) = sp.geodesic(&y, &normals[0], 0.4);
            let plane = sp.orthonormalize(&x, vec![v1, normals[1].clone(), normals[2].clone()]).unwrap();
            let b = div_w_closed(&c, &x, &plane).unwrap();
            assert_abs_diff_eq!(b.total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_divergence_matches_oracle() {
        let mut r = rng(11);
        for kappa in [-1, 0, 1] {
            for k in [1, 2, 3, 5] {
                let c = cfg(kappa, 6, k, 1.0, 0.35);
                let mut checked = 0;
                for i in 0..30u64 {
                    let Some(x) = sample_point(&c, &mut r, i % 4) else { continue };
                    if c.space().distance(&c.y(), &x).unwrap() < 0.05 {
                        continue;
                    }
                    let plane = c.space().random_kplane(&x, k, i).unwrap();
                    let closed = div_w_closed(&c, &x, &plane).unwrap().total;
                    let numeric = div_numeric(&c, &plane).unwrap();
                    assert!(
                        (closed - numeric).abs() <= 1e-6 * (1.0 + closed.abs()),
                        "κ={kappa} k={k}: {closed} vs {numeric}"
                    );
                    checked += 1;
                }
                assert!(checked > 10);
            }
        }
    }

    #[test]
    fn classical_field_divergences() {
        let mut r = rng(5);
        for kappa in [-1, 0, 1] {
            let c = cfg(kappa, 5, 3, 1.2, 0.3);
            let sp = *c.space();
            for i in 0..20u64 {
                let Some(x) = sample_point(&c, &mut r, 0) else { continue };
                let plane = sp.random_kplane(&x, 3, i).unwrap();
                let (d1, d2) = div_w1_w2_closed(&c, &x, &plane).unwrap();
                let n1 = div_numeric_field(&sp, |p| Ok(eval_w1_w2(&c, p)?.0.vec), &plane, 1e-4).unwrap();
                let n2 = div_numeric_field(&sp, |p| Ok(eval_w1_w2(&c, p)?.1.vec), &plane, 1e-4).unwrap();
                assert!((d1 - n1).abs() < 1e-6 * (1.0 + d1.abs()));
                assert!((d2 - n2).abs() < 1e-7);
                match kappa {
                    0 => assert_abs_diff_eq!(d2, 1.0, epsilon = 1e-12),
                    -1 => assert!(d2 >= 1.0 - 1e-12),
                    _ => assert!(d2 <= 1.0 + 1e-12),
                }
                let killing = div_numeric_field(&sp, |p| Ok(c.chart().axis_fields(p)?.killing), &plane, 1e-4).unwrap();
                assert!(killing.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn residue_in_flat_space() {
        let c = cfg(0, 4, 3, 1.0, 0.5);
        let sp = *c.space();
        let expect = -(0.75f64).powf(1.5) / 3.0;
        for i in 0..3 {
            let lim = residue_check(&c, &sp.basis(i), &default_residue_radii()).unwrap();
            assert_abs_diff_eq!(lim, expect, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(expect, -0.21650635094610966, epsilon = 1e-15);
    }

    #[test]
    fn residue_for_curved_spaces() {
        for kappa in [-1, 1] {
            for k in [2, 3, 4] {
                let c = cfg(kappa, 5, k, 1.2, 0.5);
                let sp = *c.space();
                let y = c.y();
                let expect = -c.profiles().a(c.r_under()).unwrap();
                let dirs = [c.chart().axis_velocity(0.5), sp.basis(2), {
                    let v = c.chart().axis_velocity(0.5) + sp.basis(3);
                    let v = sp.project(&y, &v);
                    let n = sp.norm(&v);
                    v / n
                }];
                for d in dirs {
                    let lim = residue_check(&c, &d, &default_residue_radii()).unwrap();
                    assert!((lim - expect).abs() < 1e-6, "κ={kappa} k={k}: {lim} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn sphere_condition_behaviour() {
        let c = cfg(1, 9, 8, 0.7, 0.3);
        let good = cfg(1, 6, 5, 0.4, 0.2);
        assert!((0.6f64).cos() >= (0.4f64).sqrt());
        assert!(min_sphere_condition(&good, 1000).unwrap().0 >= 0.0);
        let bad = cfg(1, 4, 2, 1.5, 0.4);
        assert!(min_sphere_condition(&bad, 1000).unwrap().0 < 0.0);
        assert!(sphere_condition_lhs(&c, 0.3).is_err());
        assert!(sphere_condition_lhs(&cfg(0, 4, 3, 1.0, 0.2), 0.1).is_err());
    }

    #[test]
    fn certify_hyperbolic_small_run() {
        let c = cfg(-1, 4, 3, 1.2, 0.5);
        let rep = certify_v1(&c, &CertParams { samples: 4000, seed: 7, ..Default::default() }).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.equality_failures, 0);
        assert!(rep.evaluated > 3500);
        let again = certify_v1(&c, &CertParams { samples: 4000, seed: 7, ..Default::default() }).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn certify_detects_sphere_failure() {
        let c = cfg(1, 4, 2, 1.5, 0.4);
        let rep = certify_v1(&c, &CertParams { samples: 20000, seed: 1, ..Default::default() }).unwrap();
        assert!(rep.violations > 0);
        assert!(rep.min_sphere_lhs.unwrap() < 0.0);
    }

    #[test]
    fn b_offset_does_not_change_divergence() {
        let c = cfg(-1, 5, 3, 1.0, 0.4);
        let shifted = c.clone().with_b_offset(3.7);
        let p = CertParams { samples: 2000, seed: 3, ..Default::default() };
        let a = certify_v1(&c, &p).unwrap();
        let b = certify_v1(&shifted, &p).unwrap();
        assert_eq!(a.violations, b.violations);
        assert!((a.max_div - b.max_div).abs() < 1e-12);
    }
}
