//! Exact-model geometry of the three simply connected space forms.
//!
//! * `κ = +1`: the unit sphere in `ℝ^{n+1}`.
//! * `κ = −1`: the upper sheet of the hyperboloid `⟨x,x⟩_L = −1` in Minkowski
//!   space `ℝ^{1,n}`, with `⟨a,b⟩_L = −a₀b₀ + Σ aᵢbᵢ`.
//! * `κ = 0`: flat `ℝⁿ`.
//!
//! Points and tangent vectors are stored as ambient coordinate vectors. The
//! [`AxisChart`] realises the geodesic `γ` through the origin `o` and the
//! prescribed point `y`, together with the signed axis coordinate `s` and the
//! distance `ρ` to the axis.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics;

/// Tolerance on model constraints (unit norm, hyperboloid, tangency).
pub const MODEL_TOL: f64 = 1e-12;
/// Tolerance on orthonormality of k-frames.
pub const FRAME_TOL: f64 = 1e-10;

/// Sign of the sectional curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl Curvature {
    pub fn from_kappa(kappa: i64) -> Result<Self> {
        match kappa {
            -1 => Ok(Self::Hyperbolic),
            0 => Ok(Self::Flat),
            1 => Ok(Self::Spherical),
            other => Err(Error::InvalidCurvature(other)),
        }
    }

    pub fn kappa(self) -> f64 {
        self.as_int() as f64
    }

    pub fn as_int(self) -> i64 {
        match self {
            Self::Hyperbolic => -1,
            Self::Flat => 0,
            Self::Spherical => 1,
        }
    }

    /// `½·diam(M)`: `π/2` on the sphere, `+∞` otherwise.
    pub fn half_diam(self) -> f64 {
        match self {
            Self::Spherical => PI / 2.0,
            _ => f64::INFINITY,
        }
    }

    /// Warping function of `g = dr² + sn(r)² g_{𝕊^{n-1}}`.
    #[inline]
    pub fn sn(self, r: f64) -> f64 {
        match self {
            Self::Hyperbolic => r.sinh(),
            Self::Flat => r,
            Self::Spherical => r.sin(),
        }
    }

    /// `cs = sn′`.
    #[inline]
    pub fn cs(self, r: f64) -> f64 {
        match self {
            Self::Hyperbolic => r.cosh(),
            Self::Flat => 1.0,
            Self::Spherical => r.cos(),
        }
    }

    #[inline]
    pub fn tn(self, r: f64) -> f64 {
        match self {
            Self::Hyperbolic => r.tanh(),
            Self::Flat => r,
            Self::Spherical => r.tan(),
        }
    }

    #[inline]
    pub fn ct(self, r: f64) -> f64 {
        self.cs(r) / self.sn(r)
    }

    /// Inverse of `cs` on its principal branch (`cosh⁻¹: [1,∞) → [0,∞)`,
    /// `cos⁻¹: [-1,1] → [0,π]`). Arguments within `MODEL_TOL` of the branch
    /// domain are clamped.
    pub fn acs(self, c: f64) -> Result<f64> {
        match self {
            Self::Hyperbolic => {
                if c < 1.0 - MODEL_TOL || c.is_nan() {
                    return Err(domain("arccosh", c));
                }
                Ok(c.max(1.0).acosh())
            }
            Self::Spherical => {
                if c.abs() > 1.0 + MODEL_TOL || c.is_nan() {
                    return Err(domain("arccos", c));
                }
                Ok(c.clamp(-1.0, 1.0).acos())
            }
            Self::Flat => Err(Error::InvalidParameter("cs has no inverse in flat space".into())),
        }
    }
}

/// A point of the model, stored in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(DVector<f64>);

impl Point {
    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub vec: DVector<f64>,
}

/// An orthonormal k-frame of a tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct KPlane {
    pub base: Point,
    pub frame: Vec<DVector<f64>>,
}

impl KPlane {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// `|v^⊤|²`, the squared norm of the projection of `v` onto the plane.
    pub fn tangential_sq(&self, space: &SpaceForm, v: &DVector<f64>) -> f64 {
        self.frame.iter().map(|e| space.form(e, v).powi(2)).sum()
    }

    /// Largest deviation of the frame Gram matrix from the identity.
    pub fn gram_error(&self, space: &SpaceForm) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.frame.iter().enumerate() {
            for (j, b) in self.frame.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((space.form(a, b) - target).abs());
            }
        }
        worst
    }
}

/// A space form `M ∈ {ℍⁿ, ℝⁿ, 𝕊ⁿ}` of dimension `n ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceForm {
    curvature: Curvature,
    n: usize,
}

impl SpaceForm {
    pub fn new(curvature: Curvature, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("ambient dimension n = {n} < 2")));
        }
        Ok(Self { curvature, n })
    }

    pub fn from_kappa(kappa: i64, n: usize) -> Result<Self> {
        Self::new(Curvature::from_kappa(kappa)?, n)
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn kappa(&self) -> f64 {
        self.curvature.kappa()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        match self.curvature {
            Curvature::Flat => self.n,
            _ => self.n + 1,
        }
    }

    pub fn half_diam(&self) -> f64 {
        self.curvature.half_diam()
    }

    /// The model bilinear form on ambient vectors.
    #[inline]
    pub fn form(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self.curvature {
            Curvature::Hyperbolic => a.dot(b) - 2.0 * a[0] * b[0],
            _ => a.dot(b),
        }
    }

    /// Norm of a tangent vector.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.form(v, v).max(0.0).sqrt()
    }

    /// Value of `⟨x, x⟩` for points of the model (`±1`; unused when flat).
    fn point_square(&self) -> f64 {
        match self.curvature {
            Curvature::Hyperbolic => -1.0,
            _ => 1.0,
        }
    }

    /// Ambient unit basis vector `e_i`.
    pub fn basis(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.ambient_dim());
        v[i] = 1.0;
        v
    }

    /// The origin `o`: `e₀` for `κ ≠ 0`, the zero vector for `κ = 0`.
    pub fn origin(&self) -> Point {
        match self.curvature {
            Curvature::Flat => Point(DVector::zeros(self.n)),
            _ => Point(self.basis(0)),
        }
    }

    /// Validates the model constraint and wraps `coords` as a point.
    pub fn point(&self, coords: DVector<f64>) -> Result<Point> {
        if coords.len() != self.ambient_dim() {
            return Err(Error::InvalidDimension(format!(
                "point has {} coordinates, model needs {}",
                coords.len(),
                self.ambient_dim()
            )));
        }
        match self.curvature {
            Curvature::Flat => {}
            Curvature::Spherical => {
                let residual = coords.norm_squared() - 1.0;
                if residual.abs() > MODEL_TOL {
                    return Err(Error::InvalidPoint { residual });
                }
            }
            Curvature::Hyperbolic => {
                let sq = self.form(&coords, &coords);
                let residual = sq + 1.0;
                let scale = coords.norm_squared().max(1.0);
                if residual.abs() > MODEL_TOL * scale || coords[0] <= 0.0 {
                    return Err(Error::InvalidPoint { residual });
                }
            }
        }
        Ok(Point(coords))
    }

    /// Re-imposes the model constraint on a computed point.
    fn renormalize(&self, mut x: DVector<f64>) -> Point {
        match self.curvature {
            Curvature::Flat => {}
            Curvature::Spherical => {
                let n = x.norm();
                x /= n;
            }
            Curvature::Hyperbolic => {
                let sq = -self.form(&x, &x);
                x /= sq.sqrt();
            }
        }
        Point(x)
    }

    /// Projection of an ambient vector onto `T_x M`.
    pub fn project(&self, x: &Point, w: &DVector<f64>) -> DVector<f64> {
        match self.curvature {
            Curvature::Flat => w.clone(),
            _ => {
                let c = self.form(w, &x.0) / self.point_square();
                w - &x.0 * c
            }
        }
    }

    /// Validates tangency and wraps `vec` as a tangent vector at `base`.
    pub fn tangent(&self, base: &Point, vec: DVector<f64>) -> Result<TangentVector> {
        if vec.len() != self.ambient_dim() {
            return Err(Error::InvalidDimension("tangent vector length".into()));
        }
        if self.curvature != Curvature::Flat {
            let residual = self.form(&vec, &base.0);
            let scale = vec.norm().max(1.0) * base.0.norm().max(1.0);
            if residual.abs() > MODEL_TOL * scale {
                return Err(Error::NotTangent { residual });
            }
        }
        Ok(TangentVector { base: base.clone(), vec })
    }

    /// Geodesic distance.
    ///
    /// Inner products outside the arccos/arccosh domain by more than
    /// `MODEL_TOL` are rejected; the distance itself is evaluated with the
    /// chord formulas `2·atan2(|x−z|, |x+z|)` and `2·asinh(|x−z|_L / 2)`,
    /// which agree with arccos/arccosh and stay accurate for nearby points.
    pub fn distance(&self, x: &Point, z: &Point) -> Result<f64> {
        let d = &x.0 - &z.0;
        match self.curvature {
            Curvature::Flat => Ok(d.norm()),
            Curvature::Spherical => {
                let c = x.0.dot(&z.0);
                if c.abs() > 1.0 + MODEL_TOL {
                    return Err(Error::InvalidPoint { residual: c.abs() - 1.0 });
                }
                let s = &x.0 + &z.0;
                Ok(2.0 * d.norm().atan2(s.norm()))
            }
            Curvature::Hyperbolic => {
                let c = -self.form(&x.0, &z.0);
                let scale = x.0.norm() * z.0.norm();
                if c < 1.0 - MODEL_TOL * scale.max(1.0) {
                    return Err(Error::InvalidPoint { residual: 1.0 - c });
                }
                let chord = self.form(&d, &d).max(0.0).sqrt();
                Ok(2.0 * (0.5 * chord).asinh())
            }
        }
    }

    /// Point and velocity at time `t` along the geodesic with initial point
    /// `x` and unit initial velocity `e` (not checked).
    pub fn geodesic(&self, x: &Point, e: &DVector<f64>, t: f64) -> (Point, DVector<f64>) {
        match self.curvature {
            Curvature::Flat => (Point(&x.0 + e * t), e.clone()),
            Curvature::Spherical => {
                let (s, c) = t.sin_cos();
                let p = &x.0 * c + e * s;
                let v = &x.0 * (-s) + e * c;
                (self.renormalize(p), v)
            }
            Curvature::Hyperbolic => {
                let (s, c) = (t.sinh(), t.cosh());
                let p = &x.0 * c + e * s;
                let v = &x.0 * s + e * c;
                (self.renormalize(p), v)
            }
        }
    }

    /// Exponential map along a unit tangent vector.
    pub fn exp_map(&self, v: &TangentVector, t: f64) -> Result<Point> {
        let norm = self.norm(&v.vec);
        if (norm - 1.0).abs() > FRAME_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(self.geodesic(&v.base, &v.vec, t).0)
    }

    /// `∇r_z(x)`, the unit gradient of the distance from `z`.
    pub fn grad_r(&self, z: &Point, x: &Point) -> Result<TangentVector> {
        let diff = &x.0 - &z.0;
        let v = self.project(x, &diff);
        let norm = self.norm(&v);
        let scale = diff.norm();
        if scale < 1e-300 {
            return Err(Error::SingularGradient("x coincides with the centre"));
        }
        if norm <= 1e-14 * scale.max(1.0) {
            return Err(Error::SingularGradient("x is antipodal to the centre"));
        }
        Ok(TangentVector { base: x.clone(), vec: v / norm })
    }

    /// An orthonormal basis of `T_x M`.
    pub fn tangent_basis(&self, x: &Point) -> Vec<DVector<f64>> {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(self.n);
        for i in 0..self.ambient_dim() {
            let mut v = self.project(x, &self.basis(i));
            for b in &basis {
                let c = self.form(&v, b);
                v -= b * c;
            }
            let norm = self.norm(&v);
            if norm > 1e-6 {
                basis.push(v / norm);
            }
            if basis.len() == self.n {
                break;
            }
        }
        basis
    }

    /// Orthonormalises tangent vectors (modified Gram–Schmidt in the model
    /// metric, applied twice).
    pub fn orthonormalize(&self, x: &Point, vectors: Vec<DVector<f64>>) -> Result<KPlane> {
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let mut w = self.project(x, &v);
            for _ in 0..2 {
                for e in &frame {
                    let c = self.form(&w, e);
                    w -= e * c;
                }
            }
            let norm = self.norm(&w);
            if norm < 1e-12 {
                return Err(Error::Numerical("degenerate frame".into()));
            }
            frame.push(w / norm);
        }
        Ok(KPlane { base: x.clone(), frame })
    }

    /// A Haar-uniform orthonormal k-frame in `T_x M`, deterministic in `seed`.
    pub fn random_kplane(&self, x: &Point, k: usize, seed: u64) -> Result<KPlane> {
        if k < 1 || k >= self.n {
            return Err(Error::InvalidDimension(format!(
                "k = {k} must lie in 1..={}",
                self.n - 1
            )));
        }
        let basis = self.tangent_basis(x);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = (0..k)
            .map(|_| {
                let mut v = DVector::zeros(self.ambient_dim());
                for b in &basis {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    v += b * g;
                }
                v
            })
            .collect();
        self.orthonormalize(x, vectors)
    }
}

/// Central-difference estimate of `g(∇_e F, e)` at `x`.
///
/// Differentiates `t ↦ g(F(c(t)), c′(t))` along the geodesic
/// `c(t) = exp_x(t e)`; since `∇_{c′}c′ = 0` this equals `g(∇_e F, e)`.
pub fn directional_div_term<F>(space: &SpaceForm, field: F, x: &Point, e: &DVector<f64>, h: f64) -> Result<f64>
where
    F: Fn(&Point) -> Result<DVector<f64>>,
{
    let norm = space.norm(e);
    if (norm - 1.0).abs() > FRAME_TOL {
        return Err(Error::NonUnitVector { norm });
    }
    if !(h > 0.0 && h <= 1e-2) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h}")));
    }
    numerics::derivative_at_zero(
        |t| {
            let (p, v) = space.geodesic(x, e, t);
            let w = field(&p)?;
            Ok(space.form(&w, &v))
        },
        h,
    )
}

/// `(s, ρ)` coordinates of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCoords {
    pub s: f64,
    pub rho: f64,
}

/// `∇s`, `∇ρ` (undefined on `γ`) and the Killing field `∂_s = cs(ρ)²∇s`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisFields {
    pub grad_s: DVector<f64>,
    pub grad_rho: Option<DVector<f64>>,
    pub killing: DVector<f64>,
}

struct Split {
    c0: f64,
    c1: f64,
    perp: DVector<f64>,
    perp_norm: f64,
}

/// The geodesic `γ` through `o` and `y`, with the axis coordinates `(s, ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisChart {
    space: SpaceForm,
    origin: Point,
    axis: DVector<f64>,
    s_y: f64,
}

impl AxisChart {
    /// Canonical placement: `o` is the model origin and `γ` leaves `o` along
    /// `e₁` (`κ ≠ 0`) or `e₀` (`κ = 0`, where `o` is the zero vector).
    pub fn canonical(space: SpaceForm, s_y: f64) -> Result<Self> {
        if !(s_y > 0.0 && s_y < space.half_diam()) {
            return Err(Error::InvalidParameter(format!("s_y = {s_y} must lie in (0, diam/2)")));
        }
        let axis = match space.curvature() {
            Curvature::Flat => space.basis(0),
            _ => space.basis(1),
        };
        Ok(Self { space, origin: space.origin(), axis, s_y })
    }

    pub fn space(&self) -> &SpaceForm {
        &self.space
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn axis(&self) -> TangentVector {
        TangentVector { base: self.origin.clone(), vec: self.axis.clone() }
    }

    pub fn s_y(&self) -> f64 {
        self.s_y
    }

    /// Index of the axis direction among the ambient coordinates.
    pub fn axis_index(&self) -> usize {
        match self.space.curvature() {
            Curvature::Flat => 0,
            _ => 1,
        }
    }

    /// Ambient indices spanning the directions orthogonal to the `(o, γ)` plane.
    pub fn normal_indices(&self) -> std::ops::Range<usize> {
        match self.space.curvature() {
            Curvature::Flat => 1..self.space.dim(),
            _ => 2..self.space.ambient_dim(),
        }
    }

    /// `γ(t)` at signed arclength `t` (positive towards `y`).
    pub fn point_on_axis(&self, t: f64) -> Point {
        self.space.geodesic(&self.origin, &self.axis, t).0
    }

    /// `γ′(t)`.
    pub fn axis_velocity(&self, t: f64) -> DVector<f64> {
        self.space.geodesic(&self.origin, &self.axis, t).1
    }

    /// The prescribed point `y = γ(s_y)`.
    pub fn y(&self) -> Point {
        self.point_on_axis(self.s_y)
    }

    /// Builds the point with axis coordinates `(s, ρ)` displaced from `γ(s)`
    /// along the unit direction `dir`, which must be orthogonal to the
    /// `(o, γ)` plane.
    pub fn from_coords(&self, s: f64, rho: f64, dir: &DVector<f64>) -> Point {
        let (z, _) = self.space.geodesic(&self.origin, &self.axis, s);
        self.space.geodesic(&z, dir, rho).0
    }

    fn split(&self, x: &Point) -> Split {
        let sp = &self.space;
        let o = &self.origin.0;
        let a = &self.axis;
        let (c0, c1, perp) = match sp.curvature() {
            Curvature::Flat => {
                let d = &x.0 - o;
                let c1 = d.dot(a);
                let perp = d - a * c1;
                (1.0, c1, perp)
            }
            Curvature::Spherical => {
                let c0 = x.0.dot(o);
                let c1 = x.0.dot(a);
                let perp = &x.0 - o * c0 - a * c1;
                (c0, c1, perp)
            }
            Curvature::Hyperbolic => {
                let c0 = -sp.form(&x.0, o);
                let c1 = sp.form(&x.0, a);
                let perp = &x.0 - o * c0 - a * c1;
                (c0, c1, perp)
            }
        };
        let perp_norm = sp.norm(&perp);
        Split { c0, c1, perp, perp_norm }
    }

    /// Signed axis coordinate `s` and axis distance `ρ`.
    pub fn axis_coords(&self, x: &Point) -> Result<AxisCoords> {
        let sp = self.split(x);
        match self.space.curvature() {
            Curvature::Flat => Ok(AxisCoords { s: sp.c1, rho: sp.perp_norm }),
            Curvature::Spherical => {
                let planar = sp.c0.hypot(sp.c1);
                if planar < MODEL_TOL {
                    return Err(Error::FootPointUndefined("ρ = π/2"));
                }
                if (&x.0 + &self.origin.0).norm() < MODEL_TOL {
                    return Err(Error::FootPointUndefined("x is antipodal to o"));
                }
                Ok(AxisCoords { s: sp.c1.atan2(sp.c0), rho: sp.perp_norm.atan2(planar) })
            }
            Curvature::Hyperbolic => {
                let cosh_rho = (1.0 + sp.perp_norm * sp.perp_norm).sqrt();
                Ok(AxisCoords { s: (sp.c1 / cosh_rho).asinh(), rho: sp.perp_norm.asinh() })
            }
        }
    }

    /// The foot point `z_x ∈ γ`.
    pub fn foot_point(&self, x: &Point) -> Result<Point> {
        let c = self.axis_coords(x)?;
        Ok(self.point_on_axis(c.s))
    }

    /// `∇s`, `∇ρ` and `∂_s` at `x`.
    pub fn axis_fields(&self, x: &Point) -> Result<AxisFields> {
        // validates x ∉ 𝓔
        self.axis_coords(x)?;
        let sp = self.split(x);
        let o = &self.origin.0;
        let a = &self.axis;
        let (killing, cs_rho_sq) = match self.space.curvature() {
            Curvature::Flat => (a.clone(), 1.0),
            Curvature::Spherical => (a * sp.c0 - o * sp.c1, sp.c0 * sp.c0 + sp.c1 * sp.c1),
            Curvature::Hyperbolic => (o * sp.c1 + a * sp.c0, 1.0 + sp.perp_norm * sp.perp_norm),
        };
        let grad_s = &killing / cs_rho_sq;
        let grad_rho = if sp.perp_norm > 1e-14 {
            let nhat = &sp.perp / sp.perp_norm;
            Some(match self.space.curvature() {
                Curvature::Flat => nhat,
                Curvature::Spherical => {
                    let cos_rho = cs_rho_sq.sqrt();
                    let foot = (o * sp.c0 + a * sp.c1) / cos_rho;
                    foot * (-sp.perp_norm) + nhat * cos_rho
                }
                Curvature::Hyperbolic => {
                    let cosh_rho = cs_rho_sq.sqrt();
                    let foot = (o * sp.c0 + a * sp.c1) / cosh_rho;
                    foot * sp.perp_norm + nhat * cosh_rho
                }
            })
        } else {
            None
        };
        Ok(AxisFields { grad_s, grad_rho, killing })
    }
}
