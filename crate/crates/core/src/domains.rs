//! Rotationally symmetric domains over `γ`: the ball, the wedge
//! `B_R ∩ B_{π/2}(y)` on the sphere, and profiles obtained by integrating
//! the equality case of the admissibility inequality
//!
//! ```text
//! c(s)·u′² + (B(u) − B(|s − s_y|))·(A′(u)·u′·cs(s − s_y)²)′ ≥ 0,
//! ```
//!
//! where `cs(u) = cs(s − s_y)·cs(R(s))`.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::ode::{integrate, OdeOptions, Stop};
use crate::profiles::{fprime_from_u, underline_r, uprime_from_u, BallData, ProfileContext};

/// Which coefficient multiplies `u′²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdiForm {
    /// `cs(s − s_y)²/cs(u)²`.
    General,
    /// `cs(s)²/cs(R)²` with `R` the radius of the ball through the same
    /// orthogonal disk at `y`, the ball coefficient applied verbatim.
    Printed,
}

/// A node of an integrated profile: `F = A′(u)·u′·cs(s − s_y)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub s: f64,
    pub u: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Ball { radius: f64 },
    Integrated { knots: Vec<Knot> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainProfile {
    ctx: ProfileContext,
    s_y: f64,
    interval: (f64, f64),
    shape: ProfileShape,
    /// Why integration stopped on the left and right of `s_y`.
    pub termination: Option<(String, String)>,
}

/// Value of the admissibility expression at one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdiValue {
    pub lhs: f64,
    /// `F′` came from finite differences rather than a closed form.
    pub finite_difference: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleReport {
    pub ok: bool,
    pub min_lhs: f64,
    pub argmin_s: f64,
    pub finite_difference: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeResult {
    pub radius: f64,
    pub s_y: f64,
    pub r_under: f64,
    pub r_over: f64,
    pub obstruction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    /// `max (R*(s) − R̄(s))` over the compared nodes.
    pub max_excess: f64,
    pub at: f64,
    pub compared: usize,
}

const ADMISSIBLE_TOL: f64 = 1e-9;

impl DomainProfile {
    pub fn curvature(&self) -> Curvature {
        self.ctx.curvature()
    }

    pub fn k(&self) -> usize {
        self.ctx.k()
    }

    pub fn s_y(&self) -> f64 {
        self.s_y
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    /// Radius of the ball `B_R(o)` with `R̄(s_y) = R(s_y)`.
    pub fn matched_radius(&self) -> Result<f64> {
        if let ProfileShape::Ball { radius } = self.shape {
            return Ok(radius);
        }
        let c = self.curvature();
        let r = self.r_at(self.s_y)?;
        match c {
            Curvature::Flat => Ok(r.hypot(self.s_y)),
            _ => c.acs(c.cs(r) * c.cs(self.s_y)),
        }
    }

    fn check(&self, s: f64) -> Result<()> {
        let (a, b) = self.interval;
        if !(s >= a && s <= b) {
            return Err(Error::Domain { function: "profile", value: s });
        }
        Ok(())
    }

    /// `R(s)`.
    pub fn r_at(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        let c = self.curvature();
        match &self.shape {
            ProfileShape::Ball { radius } => match c {
                Curvature::Flat => Ok((radius * radius - s * s).max(0.0).sqrt()),
                _ => c.acs(clamp_cs(c, c.cs(*radius) / c.cs(s))),
            },
            ProfileShape::Integrated { .. } => {
                let (u, _, _) = self.state(s)?;
                r_from_u(c, s - self.s_y, u)
            }
        }
    }

    /// `(u, u′, F)` at `s`.
    pub fn state(&self, s: f64) -> Result<(f64, f64, f64)> {
        self.check(s)?;
        let c = self.curvature();
        let cs_d = c.cs(s - self.s_y);
        match &self.shape {
            ProfileShape::Ball { radius } => {
                let ball = BallData::new(c, *radius, self.s_y)?;
                let u = u_general(self, s)?;
                let up = uprime_from_u(c, &ball, s, u);
                Ok((u, up, self.ctx.a_prime(u) * up * cs_d * cs_d))
            }
            ProfileShape::Integrated { knots } => {
                let start = if s >= self.s_y {
                    knots.iter().rfind(|k| k.s >= self.s_y && k.s <= s)
                } else {
                    knots.iter().find(|k| k.s <= self.s_y && k.s >= s)
                };
                let start = start.ok_or(Error::Domain { function: "profile", value: s })?;
                let (u, f) = if start.s == s {
                    (start.u, start.f)
                } else {
                    let opts = OdeOptions { tol: 1e-13, initial_step: 1e-5, max_step: 1e-2, ..OdeOptions::default() };
                    let traj = integrate(|t, y: &[f64; 2]| self.equality_rhs(t, y), start.s, [start.u, start.f], s, &opts, |_, _| None)?;
                    if traj.stop != Stop::Reached {
                        return Err(Error::Numerical(format!("re-integration stopped: {:?}", traj.stop)));
                    }
                    let (_, y) = *traj.points.last().expect("non-empty trajectory");
                    (y[0], y[1])
                };
                Ok((u, f / (self.ctx.a_prime(u) * cs_d * cs_d), f))
            }
        }
    }

    /// Right-hand side of the equality system in `(u, F)`.
    fn equality_rhs(&self, s: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        let c = self.curvature();
        let (u, f) = (y[0], y[1]);
        let d = (s - self.s_y).abs();
        if !(u > d) {
            return Err(Error::Numerical("R(s) reaches 0".into()));
        }
        if c == Curvature::Spherical && u >= FRAC_PI_2 {
            return Err(Error::Numerical("u reaches π/2".into()));
        }
        let cs_d = c.cs(s - self.s_y);
        let up = f / (self.ctx.a_prime(u) * cs_d * cs_d);
        let fp = if d == 0.0 && self.k() >= 2 {
            0.0
        } else {
            let coeff = (cs_d / c.cs(u)).powi(2);
            -coeff * up * up / self.ctx.b_diff(u, d)?
        };
        Ok([up, fp])
    }
}

fn r_from_u(c: Curvature, d: f64, u: f64) -> Result<f64> {
    match c {
        Curvature::Flat => Ok((u * u - d * d).max(0.0).sqrt()),
        _ => c.acs(clamp_cs(c, c.cs(u) / c.cs(d))),
    }
}

/// Rounds `cs` values just past `cs(0) = 1` back onto it.
fn clamp_cs(c: Curvature, v: f64) -> f64 {
    match c {
        Curvature::Hyperbolic => v.max(1.0),
        _ => v.min(1.0),
    }
}

/// `R̄(s)` for `B^n_R(o)`, on `[−R, R]`.
pub fn ball_profile(curvature: Curvature, k: usize, radius: f64, s_y: f64) -> Result<DomainProfile> {
    BallData::new(curvature, radius, s_y)?;
    Ok(DomainProfile {
        ctx: ProfileContext::new(curvature, k)?,
        s_y,
        interval: (-radius, radius),
        shape: ProfileShape::Ball { radius },
        termination: None,
    })
}

/// `u(s)` from `cs(u) = cs(s − s_y)·cs(R(s))`, or `u² = R(s)² + (s − s_y)²`.
pub fn u_general(profile: &DomainProfile, s: f64) -> Result<f64> {
    let c = profile.curvature();
    let r = profile.r_at(s)?;
    let d = s - profile.s_y;
    match c {
        Curvature::Flat => Ok(r.hypot(d)),
        _ => c.acs(c.cs(d) * c.cs(r)),
    }
}

/// The admissibility expression at `s`.
pub fn odi_lhs(profile: &DomainProfile, s: f64, form: OdiForm) -> Result<OdiValue> {
    let c = profile.curvature();
    let d = (s - profile.s_y).abs();
    if d <= 1e-6 {
        return Err(Error::Domain { function: "odi_lhs (s = s_y)", value: s });
    }
    let (u, up, fprime, fd) = match profile.shape() {
        ProfileShape::Ball { radius } => {
            let ball = BallData::new(c, *radius, profile.s_y)?;
            let u = u_general(profile, s)?;
            let up = uprime_from_u(c, &ball, s, u);
            (u, up, fprime_from_u(&profile.ctx, &ball, s, u), false)
        }
        ProfileShape::Integrated { .. } => {
            let (u, up, _) = profile.state(s)?;
            let (a, b) = profile.interval;
            let h = 1e-3_f64.min((s - a) / 4.0).min((b - s) / 4.0).min(d / 16.0);
            let diff = |h: f64| -> Result<f64> { Ok((profile.state(s + h)?.2 - profile.state(s - h)?.2) / (2.0 * h)) };
            (u, up, (4.0 * diff(h / 2.0)? - diff(h)?) / 3.0, true)
        }
    };
    let coeff = match form {
        OdiForm::General => (c.cs(s - profile.s_y) / c.cs(u)).powi(2),
        OdiForm::Printed => (c.cs(s) / c.cs(profile.matched_radius()?)).powi(2),
    };
    let gap = profile.ctx.b_diff(u, d)?;
    Ok(OdiValue { lhs: coeff * up * up + gap * fprime, finite_difference: fd })
}

/// Minimum of [`odi_lhs`] over `grid`, skipping points within `1e−6` of `s_y`.
pub fn profile_admissible(profile: &DomainProfile, grid: &[f64], form: OdiForm) -> Result<AdmissibleReport> {
    let mut report = AdmissibleReport { ok: true, min_lhs: f64::INFINITY, argmin_s: f64::NAN, finite_difference: false };
    for &s in grid {
        if (s - profile.s_y).abs() <= 1e-6 {
            continue;
        }
        let v = odi_lhs(profile, s, form)?;
        report.finite_difference |= v.finite_difference;
        if v.lhs < report.min_lhs {
            report.min_lhs = v.lhs;
            report.argmin_s = s;
        }
    }
    report.ok = report.min_lhs >= -ADMISSIBLE_TOL;
    Ok(report)
}

/// `m` interior points of `(lo, hi)` avoiding `s_y` and, on the sphere, the
/// pole `|s − s_y| = π/2` of `B`.
pub fn profile_grid(profile: &DomainProfile, m: usize) -> Vec<f64> {
    let (a, b) = profile.interval;
    crate::field::punctured_grid(a, b, profile.s_y, m)
}

/// `(max(−R, s_y − π/2), R)`: the part of the ball inside `B_{π/2}(y)`.
pub fn wedge_interval(radius: f64, s_y: f64) -> (f64, f64) {
    ((s_y - FRAC_PI_2).max(-radius), radius)
}

/// `r̲(y)` against `r̄(y) = ½(R + π/2 − s_y)` on the sphere.
pub fn wedge_compare(radius: f64, s_y: f64) -> Result<WedgeResult> {
    let ball = BallData::new(Curvature::Spherical, radius, s_y)?;
    if !(s_y > 0.0 && radius < FRAC_PI_2) {
        return Err(Error::InvalidParameter("need 0 < s_y < R < π/2".into()));
    }
    let r_under = underline_r(Curvature::Spherical, &ball)?;
    let r_over = 0.5 * (radius + FRAC_PI_2 - s_y);
    Ok(WedgeResult { radius, s_y, r_under, r_over, obstruction: s_y + radius > FRAC_PI_2 && r_over < r_under })
}

/// [`wedge_compare`] over `R = i/20`, `s_y = j/20`, `1 ≤ j < i ≤ n`,
/// `R < π/2`.
pub fn wedge_grid(n: usize) -> Result<Vec<WedgeResult>> {
    let mut out = Vec::new();
    for i in 1..=n {
        let r = i as f64 / 20.0;
        if r >= FRAC_PI_2 {
            break;
        }
        for j in 1..i {
            out.push(wedge_compare(r, j as f64 / 20.0)?);
        }
    }
    Ok(out)
}

/// Integrates the equality case outward from `s_y` in both directions,
/// starting from `u(s_y) = r0` with the slope of the ball whose orthogonal
/// disk through `y` has radius `r0`.
pub fn optimal_profile(curvature: Curvature, k: usize, s_y: f64, r0: f64, opts: &OdeOptions) -> Result<DomainProfile> {
    if !(s_y > 0.0 && r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("need s_y > 0 and R0 > 0, got {s_y}, {r0}")));
    }
    let ctx = ProfileContext::new(curvature, k)?;
    let radius = match curvature {
        Curvature::Flat => r0.hypot(s_y),
        _ => curvature.acs(curvature.cs(r0) * curvature.cs(s_y))?,
    };
    let ball = BallData::new(curvature, radius, s_y)?;
    let f0 = ctx.a_prime(r0) * uprime_from_u(curvature, &ball, s_y, r0);
    let reach = match curvature {
        Curvature::Spherical => FRAC_PI_2 - 1e-9,
        _ => 4.0 * radius + 4.0,
    };
    let mut profile = DomainProfile {
        ctx,
        s_y,
        interval: (s_y, s_y),
        shape: ProfileShape::Integrated { knots: Vec::new() },
        termination: None,
    };
    let right = integrate(|t, y: &[f64; 2]| profile.equality_rhs(t, y), s_y, [r0, f0], reach, opts, |_, _| None)?;
    let left = integrate(|t, y: &[f64; 2]| profile.equality_rhs(t, y), s_y, [r0, f0], -reach, opts, |_, _| None)?;
    if right.points.len() < 2 || left.points.len() < 2 {
        return Err(Error::Numerical("equality system degenerates at s_y".into()));
    }
    let describe = |stop: &Stop| match stop {
        Stop::Reached => "reached the end of the chart".to_string(),
        Stop::Event(e) | Stop::RhsFailed(e) => e.clone(),
        Stop::StepUnderflow => "step size underflow".to_string(),
        Stop::TooManySteps => "too many steps".to_string(),
    };
    let mut knots: Vec<Knot> = left.points.iter().rev().map(|&(s, y)| Knot { s, u: y[0], f: y[1] }).collect();
    knots.extend(right.points.iter().skip(1).map(|&(s, y)| Knot { s, u: y[0], f: y[1] }));
    profile.interval = (knots[0].s, knots[knots.len() - 1].s);
    profile.termination = Some((describe(&left.stop), describe(&right.stop)));
    profile.shape = ProfileShape::Integrated { knots };
    Ok(profile)
}

/// Compares `R*(s)` with `R̄(s)` at the knots of `inner` lying in the ball.
pub fn containment(inner: &DomainProfile, outer: &DomainProfile, tol: f64) -> Result<Containment> {
    let ProfileShape::Integrated { knots } = inner.shape() else {
        return Err(Error::InvalidParameter("inner profile must be integrated".into()));
    };
    let (a, b) = outer.interval();
    let mut out = Containment { contained: true, max_excess: f64::NEG_INFINITY, at: f64::NAN, compared: 0 };
    for kn in knots {
        if kn.s <= a || kn.s >= b {
            continue;
        }
        let inner_r = r_from_u(inner.curvature(), kn.s - inner.s_y, kn.u)?;
        let excess = inner_r - outer.r_at(kn.s)?;
        out.compared += 1;
        if excess > out.max_excess {
            out.max_excess = excess;
            out.at = kn.s;
        }
    }
    out.contained = out.compared > 0 && out.max_excess <= tol;
    Ok(out)
}

/// CSV with columns `s, R, u, odi_lhs`.
pub fn write_profile_csv<W: Write>(profile: &DomainProfile, grid: &[f64], form: OdiForm, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
    w.write_record(["s", "R", "u", "odi_lhs"]).map_err(err)?;
    for &s in grid {
        let r = profile.r_at(s)?;
        let u = u_general(profile, s)?;
        let lhs = if (s - profile.s_y).abs() > 1e-6 { format!("{:.16e}", odi_lhs(profile, s, form)?.lhs) } else { String::new() };
        w.write_record([format!("{s:.16e}"), format!("{r:.16e}"), format!("{u:.16e}"), lhs]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Numerical(e.to_string()))
}
