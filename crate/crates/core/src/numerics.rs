//! Small numerical helpers shared by the oracles: Richardson-extrapolated
//! finite differences, bracketed root finding, golden-section search,
//! extrapolation to zero, and low-discrepancy sequences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default finite-difference step for derivative oracles.
pub const DEFAULT_STEP: f64 = 1e-4;

/// First derivative at 0 by central differences with one Richardson step
/// (steps `h` and `h/2`), error `O(h⁴)`.
pub fn derivative_at_zero<F: FnMut(f64) -> Result<f64>>(mut f: F, h: f64) -> Result<f64> {
    let d1 = (f(h)? - f(-h)?) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (f(h2)? - f(-h2)?) / (2.0 * h2);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Second derivative at 0 by central differences with one Richardson step.
pub fn second_derivative_at_zero<F: FnMut(f64) -> Result<f64>>(mut f: F, h: f64) -> Result<f64> {
    let f0 = f(0.0)?;
    let d1 = (f(h)? - 2.0 * f0 + f(-h)?) / (h * h);
    let h2 = 0.5 * h;
    let d2 = (f(h2)? - 2.0 * f0 + f(-h2)?) / (h2 * h2);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Bracketed root of `f` on `[a, b]` by bisection, to an absolute tolerance.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{a}, {b}] (f = {fa:e}, {fb:e})"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Extrapolates samples `values[i] ≈ L + Σ_j c_j φ_j(h_i)` to `h → 0` by
/// solving the interpolation system for `L` and the coefficients.
///
/// `basis` lists the correction terms `φ_j`, each vanishing at 0; the number
/// of samples must equal `basis.len() + 1`.
pub fn extrapolate_to_zero(steps: &[f64], values: &[f64], basis: &[fn(f64) -> f64]) -> Result<f64> {
    let m = basis.len() + 1;
    if steps.len() != m || values.len() != m {
        return Err(Error::InvalidParameter(format!(
            "extrapolation needs {m} samples, got {}",
            steps.len()
        )));
    }
    // scale columns to keep the system well conditioned
    let h0 = steps.iter().cloned().fold(0.0, f64::max);
    let mut a = DMatrix::zeros(m, m);
    for (i, &h) in steps.iter().enumerate() {
        a[(i, 0)] = 1.0;
        for (j, phi) in basis.iter().enumerate() {
            a[(i, j + 1)] = phi(h) / phi(h0);
        }
    }
    let rhs = DVector::from_column_slice(values);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular extrapolation system".into()))?;
    Ok(sol[0])
}

/// Van der Corput radical inverse of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Point `index` (starting at 1) of the Halton sequence in `dim` dimensions.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton dimension too large");
    PRIMES[..dim].iter().map(|&p| radical_inverse(index, p)).collect()
}

/// SplitMix64 mixing, used to derive per-sample seeds from a root seed.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sample `index` of a run rooted at `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Surface area of the unit sphere `𝕊^{k-1} ⊂ ℝ^k`.
pub fn unit_sphere_area(k: usize) -> f64 {
    use std::f64::consts::PI;
    // |S^{k-1}| = 2π^{k/2}/Γ(k/2), with the recursion |S^{k+1}| = 2π/k |S^{k-1}|
    match k {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 2.0) * unit_sphere_area(k - 2),
    }
}
