//! Geodesic chords through a prescribed point of a spherical ball.
//!
//! A geodesic through `y` making angle `α` with the direction from `y`
//! towards `o` leaves the ball after length `l(α)`, where
//! `cos R = cos s_y cos l + sin s_y sin l cos α`. The chord through `y` has
//! length `l(α) + l(π − α)`, minimised at `α = π/2` with value `2·r̲(y)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::golden_section;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordProblem {
    pub s_y: f64,
    pub radius: f64,
    /// `cos r̲(y) = cos R / cos s_y`.
    pub c: f64,
}

impl ChordProblem {
    pub fn new(s_y: f64, radius: f64) -> Result<Self> {
        if !(s_y > 0.0 && s_y < radius && radius < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < s_y < R < π/2, got s_y = {s_y}, R = {radius}"
            )));
        }
        Ok(Self { s_y, radius, c: radius.cos() / s_y.cos() })
    }

    pub fn r_under(&self) -> f64 {
        self.c.acos()
    }
}

/// Smallest positive root of `a cos l + b sin l = c`.
pub(crate) fn smallest_positive_root(a: f64, b: f64, c: f64) -> Result<f64> {
    let amp = a.hypot(b);
    if amp == 0.0 || (c / amp).abs() > 1.0 {
        return Err(Error::Numerical(format!("no root of {a} cos l + {b} sin l = {c}")));
    }
    let phi = b.atan2(a);
    let theta = (c / amp).acos();
    let mut best = f64::INFINITY;
    for base in [phi - theta, phi + theta] {
        for shift in [-TAU, 0.0, TAU, 2.0 * TAU] {
            let l = base + shift;
            if l > 1e-15 && l < best {
                best = l;
            }
        }
    }
    Ok(best)
}

pub fn l_of_alpha(p: &ChordProblem, alpha: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("α = {alpha} outside [0, π]")));
    }
    smallest_positive_root(p.s_y.cos(), p.s_y.sin() * alpha.cos(), p.radius.cos())
}

/// `l(α) + l(π − α)`.
pub fn total_length(p: &ChordProblem, alpha: f64) -> Result<f64> {
    Ok(l_of_alpha(p, alpha)? + l_of_alpha(p, PI - alpha)?)
}

/// Global minimiser of [`total_length`] over `[0, π]`: dense grid of
/// `grid + 1` points followed by golden-section refinement.
pub fn minimize_chord(p: &ChordProblem, grid: usize) -> Result<(f64, f64)> {
    let grid = grid.max(10_000);
    let values = (0..=grid)
        .into_par_iter()
        .map(|i| {
            let a = PI * i as f64 / grid as f64;
            Ok((a, total_length(p, a)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (a0, _) = values
        .iter()
        .cloned()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty grid");
    let h = PI / grid as f64;
    let (lo, hi) = ((a0 - h).max(0.0), (a0 + h).min(PI));
    let (a, v) = golden_section(|a| total_length(p, a).unwrap_or(f64::INFINITY), lo, hi, 1e-12);
    Ok((a, v))
}

/// Both sides of `cot l₁ − C/sin l₁ = −cot l₂ + C/sin l₂` at
/// `(l(α), l(π − α))`.
pub fn constraint_sides(p: &ChordProblem, alpha: f64) -> Result<(f64, f64)> {
    let l1 = l_of_alpha(p, alpha)?;
    let l2 = l_of_alpha(p, PI - alpha)?;
    let lhs = 1.0 / l1.tan() - p.c / l1.sin();
    let rhs = -1.0 / l2.tan() + p.c / l2.sin();
    Ok((lhs, rhs))
}
