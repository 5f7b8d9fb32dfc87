//! Scalar profile functions: `sn, cs, tn, ct`, the area profile `A`, the
//! Green's-type functions `G` and `B`, the inner radius `r̲(y)`, the
//! boundary-matched radius `u(s)` and `F(s) = A′(u)u′cs(s−s_y)²`.
//!
//! On the sphere `A` and `B` are continued to `(0, π)`, since `u` and `r_y`
//! may exceed `π/2` inside a ball. `B` has a pole at `π/2` there.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::Curvature;
use crate::numerics::unit_sphere_area;
use crate::quadrature::composite_k15;

const PANEL: f64 = 0.25;
const SERIES_TERMS: usize = 40;
/// Radius below which `B` is evaluated from its power series.
const SERIES_SPLIT: f64 = 0.5;
/// Truncation of `∫_r^∞ B′` in hyperbolic space.
const HYPERBOLIC_CUTOFF: f64 = 40.0;
const TINY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrigKind {
    Sn,
    Cs,
    Tn,
    Ct,
}

pub fn trig(curvature: Curvature, kind: TrigKind, r: f64) -> Result<f64> {
    if !r.is_finite() {
        return Err(domain("trig", r));
    }
    match kind {
        TrigKind::Sn => Ok(curvature.sn(r)),
        TrigKind::Cs => Ok(curvature.cs(r)),
        TrigKind::Tn => {
            if curvature == Curvature::Spherical && r.cos().abs() < 1e-15 {
                return Err(domain("tn", r));
            }
            Ok(curvature.tn(r))
        }
        TrigKind::Ct => {
            if curvature.sn(r).abs() < 1e-300 || (curvature == Curvature::Spherical && r.sin().abs() < 1e-15) {
                return Err(domain("ct", r));
            }
            Ok(curvature.ct(r))
        }
    }
}

/// Ball radius `R` and distance `s_y = d(o, y)` of the prescribed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallData {
    pub radius: f64,
    pub s_y: f64,
}

impl BallData {
    /// Requires `0 ≤ s_y < R < ½·diam`.
    pub fn new(curvature: Curvature, radius: f64, s_y: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < curvature.half_diam()) {
            return Err(Error::InvalidParameter(format!("R = {radius} must lie in (0, diam/2)")));
        }
        if !(s_y >= 0.0 && s_y < radius) {
            return Err(Error::InvalidParameter(format!("s_y = {s_y} must lie in [0, R)")));
        }
        Ok(Self { radius, s_y })
    }
}

/// `r̲(y)`, the radius of the totally geodesic disk through `y` orthogonal to `γ`.
pub fn underline_r(curvature: Curvature, ball: &BallData) -> Result<f64> {
    let (r, s) = (ball.radius, ball.s_y);
    match curvature {
        Curvature::Flat => Ok(((r - s) * (r + s)).sqrt()),
        _ => curvature.acs(curvature.cs(r) / curvature.cs(s)),
    }
}

/// `u(s)`: `cs(u) = cs(s − s_y)cs(R)/cs(s)`, or `u² = R² − 2s·s_y + s_y²` when flat.
pub fn u_ball(curvature: Curvature, ball: &BallData, s: f64) -> Result<f64> {
    let r = ball.radius;
    if !(s.abs() <= r * (1.0 + 1e-12)) {
        return Err(domain("u", s));
    }
    match curvature {
        Curvature::Flat => Ok((r * r - 2.0 * s * ball.s_y + ball.s_y * ball.s_y).max(0.0).sqrt()),
        _ => {
            let c = curvature.cs(s - ball.s_y) * curvature.cs(r) / curvature.cs(s);
            curvature.acs(c)
        }
    }
}

/// `u′(s) = −cs(R)·sn(s_y)/(sn(u)·cs(s)²)`.
pub fn uprime_ball(curvature: Curvature, ball: &BallData, s: f64) -> Result<f64> {
    let u = u_ball(curvature, ball, s)?;
    Ok(uprime_from_u(curvature, ball, s, u))
}

pub(crate) fn uprime_from_u(curvature: Curvature, ball: &BallData, s: f64, u: f64) -> f64 {
    let cs_s = curvature.cs(s);
    -curvature.cs(ball.radius) * curvature.sn(ball.s_y) / (curvature.sn(u) * cs_s * cs_s)
}

/// `F(s) = A′(u)·u′·cs(s − s_y)²`.
pub fn f_fun(ctx: &ProfileContext, ball: &BallData, s: f64) -> Result<f64> {
    let c = ctx.curvature();
    let u = u_ball(c, ball, s)?;
    let up = uprime_from_u(c, ball, s, u);
    Ok(ctx.a_prime(u) * up * c.cs(s - ball.s_y).powi(2))
}

/// Closed form `F′(s) = sn(u)^{k−4}·cs(u)·sn(s_y)²·(k·cs(u)² − 2)/cs(s)²`.
pub fn fprime_closed(ctx: &ProfileContext, ball: &BallData, s: f64) -> Result<f64> {
    let c = ctx.curvature();
    let u = u_ball(c, ball, s)?;
    Ok(fprime_from_u(ctx, ball, s, u))
}

pub(crate) fn fprime_from_u(ctx: &ProfileContext, ball: &BallData, s: f64, u: f64) -> f64 {
    let c = ctx.curvature();
    let k = ctx.k() as f64;
    let cs_u = c.cs(u);
    let factor = k * cs_u * cs_u - 2.0;
    if factor == 0.0 {
        return 0.0;
    }
    c.sn(u).powi(ctx.k() as i32 - 4) * cs_u * c.sn(ball.s_y).powi(2) * factor / c.cs(s).powi(2)
}

/// Profile functions for a fixed curvature and submanifold dimension `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileContext {
    curvature: Curvature,
    k: usize,
    b_offset: f64,
    // coefficients of r^{k−1}/(cs² sn^{k−1}) as a series in r²
    series: Vec<f64>,
    series_const: f64,
    b_split: f64,
}

impl ProfileContext {
    pub fn new(curvature: Curvature, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidDimension("k must be at least 1".into()));
        }
        let mut ctx = Self {
            curvature,
            k,
            b_offset: 0.0,
            series: Vec::new(),
            series_const: 0.0,
            b_split: 0.0,
        };
        if ctx.b_uses_series() {
            ctx.series = b_series(curvature, k);
            let upper = match curvature {
                Curvature::Spherical => FRAC_PI_4,
                _ => HYPERBOLIC_CUTOFF,
            };
            let tail = composite_k15(|t| ctx.b_prime_raw(t), SERIES_SPLIT, upper, PANEL);
            ctx.b_split = -tail;
            ctx.series_const = ctx.b_split - ctx.series_sum(SERIES_SPLIT);
        }
        Ok(ctx)
    }

    /// The same context with `B` shifted by a constant.
    pub fn with_b_offset(mut self, offset: f64) -> Self {
        self.b_offset = offset;
        self
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn kappa(&self) -> f64 {
        self.curvature.kappa()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn b_uses_series(&self) -> bool {
        self.k >= 2 && self.curvature != Curvature::Flat
    }

    fn max_radius(&self) -> f64 {
        match self.curvature {
            Curvature::Spherical => PI,
            _ => f64::INFINITY,
        }
    }

    fn check(&self, name: &'static str, r: f64, allow_zero: bool) -> Result<()> {
        let lower_ok = if allow_zero { r >= 0.0 } else { r > 0.0 };
        if lower_ok && r < self.max_radius() {
            Ok(())
        } else {
            Err(domain(name, r))
        }
    }

    /// `A′(r) = sn(r)^{k−1}`.
    pub fn a_prime(&self, r: f64) -> f64 {
        self.curvature.sn(r).powi(self.k as i32 - 1)
    }

    /// `A(r) = ∫₀ʳ sn^{k−1}`.
    pub fn a(&self, r: f64) -> Result<f64> {
        self.check("A", r, true)?;
        let k = self.k as f64;
        if r < TINY || self.curvature == Curvature::Flat {
            return Ok(r.powi(self.k as i32) / k);
        }
        Ok(match (self.k, self.curvature) {
            (1, _) => r,
            (2, Curvature::Spherical) => 2.0 * (0.5 * r).sin().powi(2),
            (2, Curvature::Hyperbolic) => 2.0 * (0.5 * r).sinh().powi(2),
            _ => composite_k15(|t| self.a_prime(t), 0.0, r, PANEL),
        })
    }

    /// `|B^k_r| = A(r)·|𝕊^{k−1}|`.
    pub fn ball_area(&self, r: f64) -> Result<f64> {
        Ok(self.a(r)? * unit_sphere_area(self.k))
    }

    /// `G(r) = −∫_r^{½diam} 1/A′`, with `G = r` for `k = 1` and `log r` for flat `k = 2`.
    pub fn g(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < self.curvature.half_diam()) {
            return Err(domain("G", r));
        }
        let k = self.k as i32;
        if self.k == 1 {
            return Ok(r);
        }
        if self.curvature == Curvature::Flat {
            return Ok(if k == 2 { r.ln() } else { -r.powi(2 - k) / (k - 2) as f64 });
        }
        if self.curvature == Curvature::Hyperbolic && k >= 3 && r > 1.0 {
            // the closed form below cancels badly far out; integrate the tail
            let hi = r + 40.0 / (k - 1) as f64;
            return Ok(-composite_k15(|t| 1.0 / self.a_prime(t), r, hi, PANEL));
        }
        // substitute w = tn(r/2): G = −2^{2−k} ∫_w^1 w^{1−k}(1+κw²)^{k−2} dw
        let ln_w = match self.curvature {
            Curvature::Hyperbolic => (-(-r).exp()).ln_1p() - (-r).exp().ln_1p(),
            _ => self.curvature.tn(0.5 * r).ln(),
        };
        let kappa = self.kappa();
        let mut sum = 0.0;
        let mut binom = 1.0;
        for j in 0..=(k - 2) {
            let p = 2 * j + 2 - k;
            let term = if p == 0 { -ln_w } else { -(p as f64 * ln_w).exp_m1() / p as f64 };
            sum += binom * kappa.powi(j) * term;
            binom = binom * (k - 2 - j) as f64 / (j + 1) as f64;
        }
        Ok(-(2f64).powi(2 - k) * sum)
    }

    fn b_prime_raw(&self, r: f64) -> f64 {
        1.0 / (self.curvature.cs(r).powi(2) * self.a_prime(r))
    }

    /// `B′(r) = 1/(cs(r)²·A′(r))`.
    pub fn b_prime(&self, r: f64) -> Result<f64> {
        self.check("B'", r, false)?;
        if self.curvature == Curvature::Spherical && (r - FRAC_PI_2).abs() < 1e-15 {
            return Err(domain("B'", r));
        }
        Ok(self.b_prime_raw(r))
    }

    fn series_sum(&self, r: f64) -> f64 {
        let k = self.k as i32;
        let r2 = r * r;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for (j, h) in self.series.iter().enumerate() {
            let p = 2 * j as i32 + 2 - k;
            if p == 0 {
                sum += h * r.ln();
            } else {
                sum += h * pow * r.powi(2 - k) / p as f64;
            }
            pow *= r2;
        }
        sum
    }

    // φ = B′ − sec² on the sphere, regular on (0, π)
    fn sphere_regular_part(&self, r: f64) -> f64 {
        let s = r.sin();
        let mut acc = 0.0;
        let mut inv = 1.0;
        for _ in 1..self.k {
            inv /= s;
            acc += inv;
        }
        acc / (1.0 + s)
    }

    /// `B(r) = −∫_r^{¼diam} B′` (plus the configured offset), `tn` for
    /// `k = 1`, `log r` for flat `k = 2`, `−r^{2−k}/(k−2)` for flat `k ≥ 3`.
    pub fn b(&self, r: f64) -> Result<f64> {
        self.check("B", r, false)?;
        let k = self.k as i32;
        let value = if self.k == 1 {
            if self.curvature == Curvature::Spherical && r.cos().abs() < 1e-15 {
                return Err(domain("B", r));
            }
            self.curvature.tn(r)
        } else if self.curvature == Curvature::Flat {
            if k == 2 {
                r.ln()
            } else {
                -r.powi(2 - k) / (k - 2) as f64
            }
        } else if r <= SERIES_SPLIT {
            self.series_const + self.series_sum(r)
        } else {
            match self.curvature {
                Curvature::Hyperbolic => {
                    let decay = (self.k + 1) as f64;
                    if decay * (r - SERIES_SPLIT) <= 7.0 {
                        self.b_split + composite_k15(|t| self.b_prime_raw(t), SERIES_SPLIT, r, PANEL)
                    } else {
                        // B′ decays like e^{−(k+1)t}; integrate the tail directly
                        let hi = (r + 40.0 / decay).min(HYPERBOLIC_CUTOFF);
                        if r >= hi {
                            0.0
                        } else {
                            -composite_k15(|t| self.b_prime_raw(t), r, hi, 2.0 * PANEL)
                        }
                    }
                }
                _ => {
                    if r.cos().abs() < 1e-15 {
                        return Err(domain("B", r));
                    }
                    self.b_split
                        + tan_diff(r, SERIES_SPLIT)
                        + composite_k15(|t| self.sphere_regular_part(t), SERIES_SPLIT, r, PANEL)
                }
            }
        };
        Ok(value + self.b_offset)
    }

    /// `∫_{r₂}^{r₁} (B′ − sec²)` on the sphere, for `r₁, r₂ ∈ (0, π)`.
    pub(crate) fn sphere_regular_integral(&self, r1: f64, r2: f64) -> f64 {
        if self.k == 1 {
            return 0.0;
        }
        composite_k15(|x| self.sphere_regular_part(x), r2, r1, PANEL)
    }

    /// Radius above which `B` on the sphere is evaluated as `tan + regular part`.
    pub(crate) fn split_radius(&self) -> f64 {
        SERIES_SPLIT
    }

    /// `B(r₁) − B(r₂)`, avoiding the cancellation of two large tangents on
    /// the sphere.
    pub fn b_diff(&self, r1: f64, r2: f64) -> Result<f64> {
        if r1 == r2 {
            self.check("B", r1, false)?;
            return Ok(0.0);
        }
        if self.curvature == Curvature::Spherical && r1 > SERIES_SPLIT && r2 > SERIES_SPLIT {
            self.check("B", r1, false)?;
            self.check("B", r2, false)?;
            if r1.cos().abs() < 1e-15 || r2.cos().abs() < 1e-15 {
                return Err(domain("B", if r1.cos().abs() < 1e-15 { r1 } else { r2 }));
            }
            let t = tan_diff(r1, r2);
            if self.k == 1 {
                return Ok(t);
            }
            return Ok(t + composite_k15(|x| self.sphere_regular_part(x), r2, r1, PANEL));
        }
        Ok(self.b(r1)? - self.b(r2)?)
    }
}

fn tan_diff(a: f64, b: f64) -> f64 {
    (a - b).sin() / (a.cos() * b.cos())
}

/// Coefficients `h_j` with `r^{k−1}/(cs(r)²·sn(r)^{k−1}) = Σ h_j r^{2j}`.
fn b_series(curvature: Curvature, k: usize) -> Vec<f64> {
    let n = SERIES_TERMS;
    let mk = -curvature.kappa();
    let mut sn_over_r = vec![0.0; n];
    let mut cs = vec![0.0; n];
    let mut fact_even = 1.0; // (2j)!
    let mut sign = 1.0;
    for j in 0..n {
        if j > 0 {
            fact_even *= (2 * j - 1) as f64 * (2 * j) as f64;
            sign *= mk;
        }
        cs[j] = sign / fact_even;
        sn_over_r[j] = sign / (fact_even * (2 * j + 1) as f64);
    }
    let inv_sn = series_inv(&sn_over_r);
    let inv_cs = series_inv(&cs);
    let mut h = series_mul(&inv_cs, &inv_cs);
    for _ in 1..k {
        h = series_mul(&h, &inv_sn);
    }
    h
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|i| (0..=i).map(|j| a[j] * b[i - j]).sum()).collect()
}

fn series_inv(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = 1.0 / a[0];
    for i in 1..n {
        let acc: f64 = (1..=i).map(|j| a[j] * out[i - j]).sum();
        out[i] = -acc / a[0];
    }
    out
}
