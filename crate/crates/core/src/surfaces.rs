//! Explicit minimal submanifolds of balls, their quadrature areas and the
//! monotone quantities `Q(t)` and `Q_∂(t)`.
//!
//! Every surface implements [`ExplicitSurface`], which re-samples
//! `Σ ∩ B_t(o)` from scratch for each `t`. `Q(t)` integrates the clipped
//! quadrature, and `Q_∂(t)` uses the co-area identity
//! `∫_{Σ∩∂B_t} |∇^⊤r| = d/dt ∫_{Σ∩B_t} |∇^⊤r|²` unless the surface knows its
//! slices exactly.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::smallest_positive_root;
use crate::geometry::{AxisChart, Curvature, KPlane, Point, SpaceForm};
use crate::numerics::{bisect, unit_sphere_area};
use crate::profiles::{underline_r, BallData, ProfileContext};
use crate::quadrature::GaussRule;

/// One quadrature node of a sampled submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub tangent: KPlane,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSubmanifold {
    pub k: usize,
    pub samples: Vec<Sample>,
    pub meta: String,
}

impl SampledSubmanifold {
    pub fn empty(k: usize, meta: impl Into<String>) -> Self {
        Self { k, samples: Vec::new(), meta: meta.into() }
    }

    pub fn area(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    pub fn integrate<F: Fn(&Sample) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for s in &self.samples {
            acc += s.weight * f(s)?;
        }
        Ok(acc)
    }

    /// Flat CSV: point coordinates, frame coordinates (row-major), weight.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let Some(first) = self.samples.first() else {
            w.write_record(["weight"]).map_err(io_err)?;
            return w.flush().map_err(|e| Error::Numerical(e.to_string()));
        };
        let dim = first.point.coords().len();
        let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        for a in 0..self.k {
            header.extend((0..dim).map(|i| format!("e{a}_{i}")));
        }
        header.push("weight".into());
        w.write_record(&header).map_err(io_err)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.point.coords().iter().map(|v| format!("{v:.16e}")).collect();
            for e in &s.tangent.frame {
                row.extend(e.iter().map(|v| format!("{v:.16e}")));
            }
            row.push(format!("{:.16e}", s.weight));
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Numerical(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv: {e}"))
}

/// Product rule on `𝕊^{k−1} ⊂ ℝᵏ`: Gauss–Legendre in the polar angles,
/// uniform in the last one. Weights sum to `|𝕊^{k−1}|`.
pub fn sphere_rule(k: usize, m: usize) -> Vec<(DVector<f64>, f64)> {
    match k {
        0 => Vec::new(),
        1 => vec![(DVector::from_element(1, 1.0), 1.0), (DVector::from_element(1, -1.0), 1.0)],
        2 => {
            let count = 2 * m;
            (0..count)
                .map(|i| {
                    let phi = 2.0 * PI * (i as f64 + 0.5) / count as f64;
                    (DVector::from_vec(vec![phi.cos(), phi.sin()]), 2.0 * PI / count as f64)
                })
                .collect()
        }
        _ => {
            let inner = sphere_rule(k - 1, m);
            let rule = GaussRule::new(m);
            let mut out = Vec::with_capacity(m * inner.len());
            for (phi, w) in rule.mapped(0.0, PI) {
                let (s, c) = phi.sin_cos();
                let wt = w * s.powi(k as i32 - 2);
                for (omega, wo) in &inner {
                    let mut v = DVector::zeros(k);
                    v[0] = c;
                    for i in 0..k - 1 {
                        v[i + 1] = s * omega[i];
                    }
                    out.push((v, wt * wo));
                }
            }
            out
        }
    }
}

/// Orthonormal basis of `span(vectors)` in `T_x M`, dropping dependent vectors.
fn span_basis(space: &SpaceForm, x: &Point, vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = space.project(x, v);
        for _ in 0..2 {
            for e in &out {
                let c = space.form(&w, e);
                w -= e * c;
            }
        }
        let norm = space.norm(&w);
        if norm > 1e-9 {
            out.push(w / norm);
        }
    }
    out
}

/// Tangent plane at `exp_p(τ e)` of the totally geodesic submanifold through
/// `p` tangent to `span(frame)`, where `e ∈ span(frame)` is a unit vector.
fn radial_plane(space: &SpaceForm, x: Point, velocity: DVector<f64>, e: &DVector<f64>, frame: &[DVector<f64>]) -> KPlane {
    let mut vecs = Vec::with_capacity(frame.len() + 1);
    vecs.push(velocity);
    for f in frame {
        let c = space.form(f, e);
        vecs.push(f - e * c);
    }
    let basis = span_basis(space, &x, &vecs);
    KPlane { base: x, frame: basis }
}

/// A compact minimal submanifold of `B^n_R(o)` with boundary on `∂B^n_R(o)`
/// that can be clipped to any concentric ball.
pub trait ExplicitSurface: Sync {
    fn space(&self) -> &SpaceForm;
    fn k(&self) -> usize;
    fn center(&self) -> &Point;
    fn radius(&self) -> f64;
    /// `inf_Σ r`; `Σ ∩ B_t` is empty for `t` below it.
    fn min_distance(&self) -> f64;
    /// Quadrature for `Σ ∩ B_t(o)`.
    fn clip(&self, t: f64, resolution: usize) -> Result<SampledSubmanifold>;
    /// A nonnegative quantity vanishing exactly on `Σ`, comparable to distance.
    fn residual(&self, p: &Point) -> Result<f64>;
    /// `∫_{Σ∩∂B_t} |∇^⊤r|` when the slices are known in closed form.
    fn slice_integral(&self, _t: f64, _resolution: usize) -> Option<Result<f64>> {
        None
    }
    fn describe(&self) -> String;
}

/// `|∇^⊤r|²` at a sample, `r` the distance from `o`.
pub fn radial_tangential_sq(space: &SpaceForm, o: &Point, s: &Sample) -> Result<f64> {
    let g = space.grad_r(o, &s.point)?;
    Ok(s.tangent.tangential_sq(space, &g.vec))
}

/// A totally geodesic k-disk `Σ ∩ B_R(o)`, stored by its point `p` closest
/// to `o` and an orthonormal frame of `T_pΣ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotallyGeodesicDisk {
    space: SpaceForm,
    o: Point,
    radius: f64,
    p: Point,
    frame: Vec<DVector<f64>>,
    d_p: f64,
}

impl TotallyGeodesicDisk {
    /// The disk through `x` tangent to the orthonormal `frame`.
    pub fn new(space: SpaceForm, radius: f64, x: &Point, frame: Vec<DVector<f64>>) -> Result<Self> {
        let k = frame.len();
        if k < 1 || k >= space.dim() {
            return Err(Error::InvalidDimension(format!("k = {k} must lie in 1..={}", space.dim() - 1)));
        }
        if !(radius > 0.0 && radius < space.half_diam()) {
            return Err(Error::InvalidParameter(format!("R = {radius} must lie in (0, diam/2)")));
        }
        let o = space.origin();
        let p = match space.curvature() {
            Curvature::Flat => {
                let d = o.coords() - x.coords();
                let mut q = x.coords().clone();
                for f in &frame {
                    q += f * f.dot(&d);
                }
                space.point(q)?
            }
            _ => {
                let xx = space.form(x.coords(), x.coords());
                let mut q = x.coords() * (space.form(o.coords(), x.coords()) / xx);
                for f in &frame {
                    q += f * space.form(o.coords(), f);
                }
                let sq = space.form(&q, &q) * xx.signum();
                if sq <= 1e-24 {
                    return Err(Error::InvalidParameter("plane at maximal distance from o".into()));
                }
                space.point(q / sq.sqrt())?
            }
        };
        let mut span = frame.clone();
        if space.curvature() != Curvature::Flat {
            span.insert(0, x.coords().clone());
        }
        let frame_p = span_basis(&space, &p, &span);
        if frame_p.len() != k {
            return Err(Error::Numerical("degenerate disk frame".into()));
        }
        let d_p = space.distance(&o, &p)?;
        if d_p >= radius {
            return Err(Error::InvalidParameter("disk misses the ball".into()));
        }
        Ok(Self { space, o, radius, p, frame: frame_p, d_p })
    }

    /// The disk through `y = γ(s_y)` whose first frame vector is
    /// `cos(tilt)·ν + sin(tilt)·γ′(s_y)`; `tilt = 0` is orthogonal to `γ`.
    pub fn tilted(space: SpaceForm, ball: &BallData, tilt: f64, k: usize) -> Result<Self> {
        let (y, frame) = tilted_frame(&space, ball, tilt, k)?;
        Self::new(space, ball.radius, &y, frame)
    }

    /// A disk through the centre of the ball.
    pub fn through_center(space: SpaceForm, radius: f64, k: usize) -> Result<Self> {
        let o = space.origin();
        let basis = space.tangent_basis(&o);
        if k < 1 || k > basis.len() {
            return Err(Error::InvalidDimension(format!("k = {k}")));
        }
        Self::new(space, radius, &o, basis[..k].to_vec())
    }

    pub fn foot(&self) -> &Point {
        &self.p
    }

    pub fn foot_distance(&self) -> f64 {
        self.d_p
    }

    /// Intrinsic radius of `Σ ∩ B_t(o)` about the foot point.
    pub fn slice_radius(&self, t: f64) -> Result<f64> {
        if t <= self.d_p {
            return Ok(0.0);
        }
        let c = self.space.curvature();
        match c {
            Curvature::Flat => Ok((t * t - self.d_p * self.d_p).sqrt()),
            _ => c.acs(c.cs(t) / c.cs(self.d_p)),
        }
    }

    /// `|Σ ∩ B_t(o)|` in closed form.
    pub fn exact_area(&self, t: f64) -> Result<f64> {
        let k = self.frame.len();
        let ctx = ProfileContext::new(self.space.curvature(), k)?;
        Ok(unit_sphere_area(k) * ctx.a(self.slice_radius(t)?)?)
    }
}

fn tilted_frame(space: &SpaceForm, ball: &BallData, tilt: f64, k: usize) -> Result<(Point, Vec<DVector<f64>>)> {
    if !(0.0..=PI / 2.0).contains(&tilt) {
        return Err(Error::InvalidParameter(format!("tilt = {tilt} outside [0, π/2]")));
    }
    if k < 1 || k >= space.dim() {
        return Err(Error::InvalidDimension(format!("k = {k} must lie in 1..={}", space.dim() - 1)));
    }
    if !(ball.s_y > 0.0) {
        return Err(Error::InvalidParameter("s_y must be positive".into()));
    }
    let chart = AxisChart::canonical(*space, ball.s_y)?;
    let y = chart.y();
    let axis = chart.axis_velocity(ball.s_y);
    let normals: Vec<usize> = chart.normal_indices().collect();
    let mut frame = Vec::with_capacity(k);
    frame.push(space.basis(normals[0]) * tilt.cos() + &axis * tilt.sin());
    for &i in &normals[1..k] {
        frame.push(space.basis(i));
    }
    Ok((y, frame))
}

impl ExplicitSurface for TotallyGeodesicDisk {
    fn space(&self) -> &SpaceForm {
        &self.space
    }

    fn k(&self) -> usize {
        self.frame.len()
    }

    fn center(&self) -> &Point {
        &self.o
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn min_distance(&self) -> f64 {
        self.d_p
    }

    fn clip(&self, t: f64, resolution: usize) -> Result<SampledSubmanifold> {
        let k = self.k();
        let meta = format!("{} clipped at t = {t}", self.describe());
        let rho = self.slice_radius(t)?;
        if rho <= 0.0 {
            return Ok(SampledSubmanifold::empty(k, meta));
        }
        let curv = self.space.curvature();
        let radial = GaussRule::new(resolution);
        let mut samples = Vec::new();
        for (theta, wt) in sphere_rule(k, resolution) {
            let e = self.frame.iter().zip(theta.iter()).fold(DVector::zeros(self.space.ambient_dim()), |acc, (f, c)| acc + f * *c);
            for (tau, wr) in radial.mapped(0.0, rho) {
                let (x, vel) = self.space.geodesic(&self.p, &e, tau);
                let plane = radial_plane(&self.space, x.clone(), vel, &e, &self.frame);
                samples.push(Sample { point: x, tangent: plane, weight: wt * wr * curv.sn(tau).powi(k as i32 - 1) });
            }
        }
        Ok(SampledSubmanifold { k, samples, meta })
    }

    fn residual(&self, q: &Point) -> Result<f64> {
        let sp = &self.space;
        let mut span = self.frame.clone();
        if sp.curvature() != Curvature::Flat {
            span.insert(0, self.p.coords().clone());
        }
        let base = match sp.curvature() {
            Curvature::Flat => q.coords() - self.p.coords(),
            _ => q.coords().clone(),
        };
        let mut rest = base.clone();
        for (i, v) in span.iter().enumerate() {
            let vv = if i == 0 && sp.curvature() != Curvature::Flat { sp.form(v, v) } else { 1.0 };
            rest -= v * (sp.form(&base, v) / vv);
        }
        Ok(rest.norm())
    }

    fn slice_integral(&self, t: f64, resolution: usize) -> Option<Result<f64>> {
        let k = self.k();
        let curv = self.space.curvature();
        let rho = match self.slice_radius(t) {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        if rho <= 0.0 {
            return Some(Ok(0.0));
        }
        let mut acc = 0.0;
        for (theta, wt) in sphere_rule(k, resolution) {
            let e = self.frame.iter().zip(theta.iter()).fold(DVector::zeros(self.space.ambient_dim()), |acc, (f, c)| acc + f * *c);
            let (x, vel) = self.space.geodesic(&self.p, &e, rho);
            let plane = radial_plane(&self.space, x.clone(), vel, &e, &self.frame);
            let s = Sample { point: x, tangent: plane, weight: 1.0 };
            match radial_tangential_sq(&self.space, &self.o, &s) {
                Ok(v) => acc += wt * curv.sn(rho).powi(k as i32 - 1) * v.sqrt(),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(acc))
    }

    fn describe(&self) -> String {
        format!(
            "totally geodesic {}-disk, kappa = {}, R = {}, d(o, Σ) = {}",
            self.k(),
            self.space.kappa(),
            self.radius,
            self.d_p
        )
    }
}

/// The tilted disk through `y` sampled in geodesic polar coordinates about
/// `y`, with each ray cut where it leaves `B^n_R(o)`.
pub fn tilted_disk(space: SpaceForm, ball: &BallData, tilt: f64, k: usize, resolution: usize) -> Result<SampledSubmanifold> {
    if resolution < 16 {
        return Err(Error::InvalidParameter(format!("resolution {resolution} < 16")));
    }
    let (y, frame) = tilted_frame(&space, ball, tilt, k)?;
    let o = space.origin();
    let curv = space.curvature();
    let radial = GaussRule::new(resolution);
    let rays: Vec<(DVector<f64>, f64)> = sphere_rule(k, resolution);
    let per_ray = rays
        .par_iter()
        .map(|(theta, wt)| {
            let e = frame.iter().zip(theta.iter()).fold(DVector::zeros(space.ambient_dim()), |acc, (f, c)| acc + f * *c);
            let hit = bisect(
                |tau| space.distance(&o, &space.geodesic(&y, &e, tau).0).unwrap_or(f64::INFINITY) - ball.radius,
                0.0,
                ball.radius + ball.s_y + 1e-6,
                1e-13,
            )?;
            let mut out = Vec::with_capacity(radial.len());
            for (tau, wr) in radial.mapped(0.0, hit) {
                let (x, vel) = space.geodesic(&y, &e, tau);
                let plane = radial_plane(&space, x.clone(), vel, &e, &frame);
                out.push(Sample { point: x, tangent: plane, weight: wt * wr * curv.sn(tau).powi(k as i32 - 1) });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledSubmanifold {
        k,
        samples: per_ray.into_iter().flatten().collect(),
        meta: format!("tilted {k}-disk, kappa = {}, R = {}, s_y = {}, tilt = {tilt}", space.kappa(), ball.radius, ball.s_y),
    })
}

/// Length of the geodesic through `y` that makes angle `α` with `γ′(s_y)`,
/// clipped to `B^n_R(o)`.
pub fn geodesic_chord_length(curvature: Curvature, ball: &BallData, alpha: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("α = {alpha} outside [0, π]")));
    }
    let half = |ca: f64| -> Result<f64> {
        let (r, s) = (ball.radius, ball.s_y);
        match curvature {
            Curvature::Flat => Ok(-s * ca + (r * r - s * s * (1.0 - ca * ca)).max(0.0).sqrt()),
            Curvature::Spherical => smallest_positive_root(s.cos(), -s.sin() * ca, r.cos()),
            Curvature::Hyperbolic => {
                let (a, b) = (s.cosh(), s.sinh() * ca);
                let ch = r.cosh();
                let disc = (ch * ch - (a * a - b * b)).max(0.0).sqrt();
                Ok(((ch + disc) / (a + b)).ln())
            }
        }
    };
    Ok(half(alpha.cos())? + half(-alpha.cos())?)
}

/// The catenoid `x₀² + x₁² = a² cosh²(x₂/a)` in `ℝ³`, with neck radius
/// `a = s_y` passing through `y = (a, 0, 0)`, clipped to `B³_R(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Catenoid {
    space: SpaceForm,
    o: Point,
    radius: f64,
    neck: f64,
}

impl Catenoid {
    pub fn new(radius: f64, neck: f64) -> Result<Self> {
        if !(neck > 0.0 && neck < radius) {
            return Err(Error::InvalidParameter(format!("need 0 < neck < R, got neck = {neck}, R = {radius}")));
        }
        let space = SpaceForm::new(Curvature::Flat, 3)?;
        Ok(Self { o: space.origin(), space, radius, neck })
    }

    pub fn neck(&self) -> f64 {
        self.neck
    }

    pub fn param(&self, v: f64, phi: f64) -> DVector<f64> {
        let a = self.neck;
        let c = (v / a).cosh();
        DVector::from_vec(vec![a * c * phi.cos(), a * c * phi.sin(), v])
    }

    /// Height `v_t > 0` at which the catenoid meets `∂B_t`.
    fn height(&self, t: f64) -> Result<f64> {
        let a = self.neck;
        bisect(|v| a * a * (v / a).cosh().powi(2) + v * v - t * t, 0.0, t, 1e-15)
    }

    fn sample(&self, v: f64, phi: f64, weight: f64) -> Result<Sample> {
        let a = self.neck;
        let (sh, ch) = ((v / a).sinh(), (v / a).cosh());
        let xv = DVector::from_vec(vec![sh * phi.cos(), sh * phi.sin(), 1.0]) / ch;
        let xphi = DVector::from_vec(vec![-phi.sin(), phi.cos(), 0.0]);
        let point = self.space.point(self.param(v, phi))?;
        Ok(Sample { tangent: KPlane { base: point.clone(), frame: vec![xv, xphi] }, point, weight })
    }
}

impl ExplicitSurface for Catenoid {
    fn space(&self) -> &SpaceForm {
        &self.space
    }

    fn k(&self) -> usize {
        2
    }

    fn center(&self) -> &Point {
        &self.o
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn min_distance(&self) -> f64 {
        self.neck
    }

    fn clip(&self, t: f64, resolution: usize) -> Result<SampledSubmanifold> {
        let meta = format!("{} clipped at t = {t}", self.describe());
        if t <= self.neck {
            return Ok(SampledSubmanifold::empty(2, meta));
        }
        let vt = self.height(t)?;
        let a = self.neck;
        let rule = GaussRule::new(2 * resolution);
        let count = 2 * resolution;
        let dphi = 2.0 * PI / count as f64;
        let mut samples = Vec::with_capacity(count * rule.len());
        for (v, wv) in rule.mapped(-vt, vt) {
            let area = a * (v / a).cosh().powi(2);
            for j in 0..count {
                let phi = dphi * (j as f64 + 0.5);
                samples.push(self.sample(v, phi, wv * dphi * area)?);
            }
        }
        Ok(SampledSubmanifold { k: 2, samples, meta })
    }

    fn residual(&self, p: &Point) -> Result<f64> {
        let x = p.coords();
        let a = self.neck;
        Ok((x[0].hypot(x[1]) - a * (x[2] / a).cosh()).abs())
    }

    fn slice_integral(&self, t: f64, resolution: usize) -> Option<Result<f64>> {
        if t <= self.neck {
            return Some(Ok(0.0));
        }
        let vt = match self.height(t) {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        let s = match self.sample(vt, 0.0, 1.0) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let _ = resolution;
        let g = radial_tangential_sq(&self.space, &self.o, &s).map(f64::sqrt);
        Some(g.map(|g| 2.0 * 2.0 * PI * self.neck * (vt / self.neck).cosh() * g))
    }

    fn describe(&self) -> String {
        format!("catenoid, neck = {}, R = {}", self.neck, self.radius)
    }
}

/// The Clifford torus in `𝕊³`, rotated so that the centre `o = e₀` of the
/// ball lies on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordTorus {
    space: SpaceForm,
    o: Point,
    radius: f64,
}

impl CliffordTorus {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < PI / 2.0) {
            return Err(Error::InvalidParameter(format!("R = {radius} must lie in (0, π/2)")));
        }
        let space = SpaceForm::new(Curvature::Spherical, 3)?;
        Ok(Self { o: space.origin(), space, radius })
    }

    /// `(cos u, sin u, cos v, sin v)/√2` in the rotated frame.
    pub fn param(&self, u: f64, v: f64) -> DVector<f64> {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        DVector::from_vec(vec![0.5 * (cu + cv), FRAC_1_SQRT_2 * su, 0.5 * (cu - cv), FRAC_1_SQRT_2 * sv])
    }

    fn ray_length(&self, t: f64, psi: f64) -> Result<f64> {
        let (s, c) = psi.sin_cos();
        let target = 2.0 * t.cos();
        bisect(|rho| (rho * c).cos() + (rho * s).cos() - target, 0.0, PI, 1e-15)
    }
}

impl ExplicitSurface for CliffordTorus {
    fn space(&self) -> &SpaceForm {
        &self.space
    }

    fn k(&self) -> usize {
        2
    }

    fn center(&self) -> &Point {
        &self.o
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn min_distance(&self) -> f64 {
        0.0
    }

    fn clip(&self, t: f64, resolution: usize) -> Result<SampledSubmanifold> {
        let meta = format!("{} clipped at t = {t}", self.describe());
        if t <= 0.0 {
            return Ok(SampledSubmanifold::empty(2, meta));
        }
        let count = 4 * resolution;
        let dpsi = 2.0 * PI / count as f64;
        let rule = GaussRule::new(resolution);
        let mut samples = Vec::with_capacity(count * rule.len());
        for j in 0..count {
            let psi = dpsi * (j as f64 + 0.5);
            let (sp, cp) = psi.sin_cos();
            let rho_t = self.ray_length(t, psi)?;
            for (rho, wr) in rule.mapped(0.0, rho_t) {
                let (u, v) = (rho * cp, rho * sp);
                let point = self.space.point(self.param(u, v))?;
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let eu = DVector::from_vec(vec![-su * FRAC_1_SQRT_2, cu, -su * FRAC_1_SQRT_2, 0.0]);
                let ev = DVector::from_vec(vec![-sv * FRAC_1_SQRT_2, 0.0, sv * FRAC_1_SQRT_2, cv]);
                samples.push(Sample {
                    tangent: KPlane { base: point.clone(), frame: vec![eu, ev] },
                    point,
                    weight: 0.5 * rho * wr * dpsi,
                });
            }
        }
        Ok(SampledSubmanifold { k: 2, samples, meta })
    }

    fn residual(&self, p: &Point) -> Result<f64> {
        let c = p.coords();
        // back to the unrotated frame: x₁ = (c₀ + c₂)/√2, x₂ = c₁
        let x1 = FRAC_1_SQRT_2 * (c[0] + c[2]);
        Ok((x1 * x1 + c[1] * c[1] - 0.5).abs())
    }

    fn describe(&self) -> String {
        format!("Clifford torus, R = {}", self.radius)
    }
}

/// Norm of the mean curvature vector of a parametrised surface
/// `(p, q) ↦ X(p, q)` in `ℝ³` or `𝕊³`, from Richardson-extrapolated central
/// differences.
pub fn mean_curvature_norm<F: Fn(f64, f64) -> DVector<f64>>(space: &SpaceForm, map: F, p: f64, q: f64, h: f64) -> f64 {
    let derivs = |h: f64| {
        let x = map(p, q);
        let xp = (map(p + h, q) - map(p - h, q)) / (2.0 * h);
        let xq = (map(p, q + h) - map(p, q - h)) / (2.0 * h);
        let xpp = (map(p + h, q) - &x * 2.0 + map(p - h, q)) / (h * h);
        let xqq = (map(p, q + h) - &x * 2.0 + map(p, q - h)) / (h * h);
        let xpq = (map(p + h, q + h) - map(p + h, q - h) - map(p - h, q + h) + map(p - h, q - h)) / (4.0 * h * h);
        [xp, xq, xpp, xqq, xpq]
    };
    let coarse = derivs(h);
    let fine = derivs(h / 2.0);
    let d: Vec<DVector<f64>> = fine.iter().zip(coarse.iter()).map(|(f, c)| (f * 4.0 - c) / 3.0).collect();
    let x = map(p, q);
    let (xp, xq) = (&d[0], &d[1]);
    let (e, f, g) = (xp.dot(xp), xp.dot(xq), xq.dot(xq));
    let det = e * g - f * f;
    let lap = (&d[2] * g - &d[4] * (2.0 * f) + &d[3] * e) / det;
    let mut normal_part = lap;
    if space.curvature() == Curvature::Spherical {
        let c = normal_part.dot(&x) / x.dot(&x);
        normal_part -= &x * c;
    }
    let t1 = xp / xp.norm();
    let mut t2 = xq - &t1 * t1.dot(xq);
    t2 /= t2.norm();
    let c1 = normal_part.dot(&t1);
    let c2 = normal_part.dot(&t2);
    normal_part -= &t1 * c1;
    normal_part -= &t2 * c2;
    normal_part.norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub min_forward_difference: f64,
}

impl MonotonicityReport {
    fn from_values(t_grid: Vec<f64>, values: Vec<f64>) -> Self {
        let min_forward_difference = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Self { t_grid, values, min_forward_difference }
    }

    pub fn nondecreasing(&self, tol: f64) -> bool {
        self.min_forward_difference >= -tol
    }
}

/// `n` equispaced radii `R·i/n`, `i = 1..=n`.
pub fn default_t_grid(radius: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| radius * i as f64 / n as f64).collect()
}

fn check_grid(surface: &dyn ExplicitSurface, t_grid: &[f64]) -> Result<()> {
    let r = surface.radius();
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter("t-grid must be strictly increasing".into()));
        }
    }
    if t_grid.iter().any(|&t| !(t > 0.0 && t <= r * (1.0 + 1e-12))) {
        return Err(Error::InvalidParameter(format!("t-grid must lie in (0, R = {r}]")));
    }
    Ok(())
}

/// `∫_{Σ∩B_t} |∇^⊤r|²`.
pub fn radial_energy(surface: &dyn ExplicitSurface, t: f64, resolution: usize) -> Result<f64> {
    let sub = surface.clip(t, resolution)?;
    let (space, o) = (surface.space(), surface.center());
    sub.integrate(|s| radial_tangential_sq(space, o, s))
}

/// `Q(t) = |Σ ∩ B_t|/|B^k_t|`, or `∫_{Σ∩B_t}|∇^⊤r|² / |B^k_t|` on the sphere.
pub fn q_value(surface: &dyn ExplicitSurface, t: f64, resolution: usize) -> Result<f64> {
    let k = surface.k();
    let space = surface.space();
    let ctx = ProfileContext::new(space.curvature(), k)?;
    let num = if space.curvature() == Curvature::Spherical {
        radial_energy(surface, t, resolution)?
    } else {
        surface.clip(t, resolution)?.area()
    };
    Ok(num / (unit_sphere_area(k) * ctx.a(t)?))
}

/// `∫_{Σ∩∂B_t} |∇^⊤r|` by differentiating [`radial_energy`] in `t`.
pub fn slice_integral_coarea(surface: &dyn ExplicitSurface, t: f64, resolution: usize) -> Result<f64> {
    let t0 = surface.min_distance();
    if t <= t0 {
        return Ok(0.0);
    }
    let h = 1e-3_f64.min((t - t0) / 8.0).min(t / 8.0);
    let d = |h: f64| -> Result<f64> {
        Ok((radial_energy(surface, t + h, resolution)? - radial_energy(surface, t - h, resolution)?) / (2.0 * h))
    };
    Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0)
}

/// `Q_∂(t) = (1/|∂B^k_t|) ∫_{Σ∩∂B_t} |∇^⊤r|`.
pub fn q_partial_value(surface: &dyn ExplicitSurface, t: f64, resolution: usize) -> Result<f64> {
    let k = surface.k();
    let ctx = ProfileContext::new(surface.space().curvature(), k)?;
    let slice = match surface.slice_integral(t, resolution) {
        Some(v) => v?,
        None => slice_integral_coarea(surface, t, resolution)?,
    };
    Ok(slice / (unit_sphere_area(k) * ctx.a_prime(t)))
}

pub fn q_profile(surface: &dyn ExplicitSurface, t_grid: &[f64], resolution: usize) -> Result<MonotonicityReport> {
    check_grid(surface, t_grid)?;
    let values = t_grid.par_iter().map(|&t| q_value(surface, t, resolution)).collect::<Result<Vec<_>>>()?;
    Ok(MonotonicityReport::from_values(t_grid.to_vec(), values))
}

pub fn q_partial_profile(surface: &dyn ExplicitSurface, t_grid: &[f64], resolution: usize) -> Result<MonotonicityReport> {
    check_grid(surface, t_grid)?;
    let values = t_grid.par_iter().map(|&t| q_partial_value(surface, t, resolution)).collect::<Result<Vec<_>>>()?;
    Ok(MonotonicityReport::from_values(t_grid.to_vec(), values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaCheck {
    pub area: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares `|Σ|` with `|B^k_{r̲(y)}|` for a point `y ∈ Σ`.
pub fn prescribed_point_check(surface: &dyn ExplicitSurface, y: &Point, resolution: usize) -> Result<AreaCheck> {
    let res = surface.residual(y)?;
    if res > 1e-8 {
        return Err(Error::InvalidParameter(format!("y is not on the surface (residual {res:e})")));
    }
    let space = surface.space();
    let s_y = space.distance(surface.center(), y)?;
    let ball = BallData::new(space.curvature(), surface.radius(), s_y)?;
    let k = surface.k();
    let ctx = ProfileContext::new(space.curvature(), k)?;
    let bound = unit_sphere_area(k) * ctx.a(underline_r(space.curvature(), &ball)?)?;
    let area = surface.clip(surface.radius(), resolution)?.area();
    Ok(AreaCheck { area, bound, pass: area >= bound * (1.0 - 1e-4) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_2;

    fn ball(c: Curvature, r: f64, s: f64) -> BallData {
        BallData::new(c, r, s).unwrap()
    }

    #[test]
    fn sphere_rule_weights() {
        for k in 1..=4 {
            let total: f64 = sphere_rule(k, 12).iter().map(|p| p.1).sum();
            assert_relative_eq!(total, unit_sphere_area(k), max_relative = 1e-13);
        }
        let second: f64 = sphere_rule(3, 12).iter().map(|(v, w)| w * v[2] * v[2]).sum();
        assert_relative_eq!(second, 4.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn chord_length_closed_forms() {
        for c in [Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical] {
            let b = ball(c, 1.1, 0.4);
            assert_abs_diff_eq!(geodesic_chord_length(c, &b, 0.0).unwrap(), 2.2, epsilon = 1e-13);
            let r = underline_r(c, &b).unwrap();
            assert_abs_diff_eq!(geodesic_chord_length(c, &b, FRAC_PI_2).unwrap(), 2.0 * r, epsilon = 1e-13);
        }
        let b = ball(Curvature::Flat, 1.0, 0.6);
        assert_abs_diff_eq!(geodesic_chord_length(Curvature::Flat, &b, FRAC_PI_2).unwrap(), 1.6, epsilon = 1e-14);
    }

    #[test]
    fn orthogonal_disk_has_extremal_area() {
        for (kappa, r, s) in [(-1, 1.2, 0.5), (0, 1.0, 0.6), (1, 1.0, 0.2)] {
            let space = SpaceForm::from_kappa(kappa, 4).unwrap();
            for k in 1..=3 {
                let b = ball(space.curvature(), r, s);
                let sub = tilted_disk(space, &b, 0.0, k, 16).unwrap();
                let ctx = ProfileContext::new(space.curvature(), k).unwrap();
                let exact = unit_sphere_area(k) * ctx.a(underline_r(space.curvature(), &b).unwrap()).unwrap();
                assert_relative_eq!(sub.area(), exact, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn polar_about_y_matches_foot_point_formula() {
        for kappa in [-1, 0, 1] {
            let space = SpaceForm::from_kappa(kappa, 4).unwrap();
            let b = ball(space.curvature(), 1.0, 0.3);
            for k in 1..=3 {
                for tilt in [0.2, 0.7, 1.3] {
                    let sub = tilted_disk(space, &b, tilt, k, 24).unwrap();
                    let disk = TotallyGeodesicDisk::tilted(space, &b, tilt, k).unwrap();
                    let exact = disk.exact_area(1.0).unwrap();
                    assert_relative_eq!(sub.area(), exact, max_relative = 1e-9);
                    assert_relative_eq!(disk.clip(1.0, 16).unwrap().area(), exact, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn one_dimensional_disks_are_chords() {
        for kappa in [-1, 0, 1] {
            let space = SpaceForm::from_kappa(kappa, 3).unwrap();
            let b = ball(space.curvature(), 0.9, 0.35);
            for tilt in [0.0, 0.4, 1.1, FRAC_PI_2] {
                let len = tilted_disk(space, &b, tilt, 1, 16).unwrap().area();
                let closed = geodesic_chord_length(space.curvature(), &b, FRAC_PI_2 - tilt).unwrap();
                assert_abs_diff_eq!(len, closed, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn centred_disk_has_unit_profiles() {
        for kappa in [-1, 0, 1] {
            let space = SpaceForm::from_kappa(kappa, 4).unwrap();
            let disk = TotallyGeodesicDisk::through_center(space, 1.2, 2).unwrap();
            let grid = default_t_grid(1.2, 10);
            let q = q_profile(&disk, &grid, 16).unwrap();
            let qp = q_partial_profile(&disk, &grid, 16).unwrap();
            for (a, b) in q.values.iter().zip(&qp.values) {
                assert_abs_diff_eq!(*a, 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(*b, 1.0, epsilon = 1e-10);
            }
            let fd = slice_integral_coarea(&disk, 0.7, 16).unwrap();
            let exact = disk.slice_integral(0.7, 16).unwrap().unwrap();
            assert_relative_eq!(fd, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn tilted_disk_profiles_increase() {
        let space = SpaceForm::from_kappa(-1, 3).unwrap();
        let b = ball(space.curvature(), 1.0, 0.5);
        let disk = TotallyGeodesicDisk::tilted(space, &b, 0.6, 2).unwrap();
        let grid = default_t_grid(1.0, 50);
        let q = q_profile(&disk, &grid, 16).unwrap();
        assert!(q.nondecreasing(1e-6));
        assert_eq!(q.values[0], 0.0);
        assert!(q.values[30] < 1.0);
        let qp = q_partial_profile(&disk, &grid, 16).unwrap();
        assert!(qp.nondecreasing(1e-6));
        let fd = slice_integral_coarea(&disk, 0.8, 16).unwrap();
        let exact = disk.slice_integral(0.8, 16).unwrap().unwrap();
        assert_relative_eq!(fd, exact, max_relative = 1e-7);
    }

    #[test]
    fn catenoid_is_minimal_and_obeys_the_bound() {
        let cat = Catenoid::new(1.0, 0.4).unwrap();
        let space = *cat.space();
        for (v, phi) in [(0.0, 0.3), (0.3, 1.0), (-0.5, 2.0)] {
            assert!(mean_curvature_norm(&space, |p, q| cat.param(p, q), v, phi, 1e-3) < 1e-8);
        }
        let y = space.point(DVector::from_vec(vec![0.4, 0.0, 0.0])).unwrap();
        let check = prescribed_point_check(&cat, &y, 24).unwrap();
        assert!(check.pass);
        assert_relative_eq!(check.bound, PI * 0.84, max_relative = 1e-12);
        let grid = default_t_grid(1.0, 50);
        assert!(q_profile(&cat, &grid, 24).unwrap().nondecreasing(1e-6));
        assert!(q_partial_profile(&cat, &grid, 24).unwrap().nondecreasing(1e-6));
        let fd = slice_integral_coarea(&cat, 0.8, 24).unwrap();
        let exact = cat.slice_integral(0.8, 24).unwrap().unwrap();
        assert_relative_eq!(fd, exact, max_relative = 1e-7);
    }

    #[test]
    fn clifford_torus_is_minimal_and_monotone() {
        let torus = CliffordTorus::new(1.0).unwrap();
        let space = *torus.space();
        for (u, v) in [(0.1, 0.2), (0.7, -0.4), (2.0, 1.0)] {
            assert!(torus.residual(&space.point(torus.param(u, v)).unwrap()).unwrap() < 1e-15);
            assert!(mean_curvature_norm(&space, |p, q| torus.param(p, q), u, v, 1e-3) < 1e-8);
        }
        let grid = default_t_grid(1.0, 50);
        let q = q_profile(&torus, &grid, 16).unwrap();
        let qp = q_partial_profile(&torus, &grid, 16).unwrap();
        assert!(q.nondecreasing(1e-6), "{}", q.min_forward_difference);
        assert!(qp.nondecreasing(1e-6), "{}", qp.min_forward_difference);
        assert_abs_diff_eq!(q.values[0], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn off_surface_point_is_rejected() {
        let cat = Catenoid::new(1.0, 0.4).unwrap();
        let y = cat.space().point(DVector::from_vec(vec![0.5, 0.0, 0.0])).unwrap();
        assert!(prescribed_point_check(&cat, &y, 16).is_err());
    }

    #[test]
    fn csv_export_has_one_row_per_sample() {
        let space = SpaceForm::from_kappa(0, 3).unwrap();
        let sub = tilted_disk(space, &ball(Curvature::Flat, 1.0, 0.5), 0.2, 2, 16).unwrap();
        let mut buf = Vec::new();
        sub.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), sub.samples.len() + 1);
    }
}
