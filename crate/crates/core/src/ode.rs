//! Dormand–Prince 5(4) with step-size control.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Local error bound per step, mixed absolute/relative.
    pub tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, initial_step: 1e-4, max_step: 1e-2, min_step: 1e-14, max_steps: 1_000_000 }
    }
}

/// Why an integration stopped before its end point.
#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    Reached,
    Event(String),
    RhsFailed(String),
    StepUnderflow,
    TooManySteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub points: Vec<(f64, [f64; N])>,
    pub stop: Stop,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], coeffs: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrates `y′ = f(t, y)` from `t0` towards `t1` (either direction).
///
/// `event(t, y)` is checked after every accepted step; a `Some(reason)`
/// ends the integration there. Errors from `f` end it too, with the last
/// accepted state kept.
pub fn integrate<const N: usize, F, E>(mut f: F, t0: f64, y0: [f64; N], t1: f64, opts: &OdeOptions, mut event: E) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    E: FnMut(f64, &[f64; N]) -> Option<String>,
{
    if !(opts.tol > 0.0 && opts.initial_step > 0.0 && opts.max_step >= opts.initial_step) {
        return Err(Error::InvalidParameter("bad ODE options".into()));
    }
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step;
    let mut h_cap = opts.max_step;
    let mut rhs_error: Option<String> = None;
    let mut points = vec![(t, y)];
    let mut ks = [[0.0; N]; 7];
    ks[0] = match f(t, &y) {
        Ok(v) => v,
        Err(e) => return Ok(Trajectory { points, stop: Stop::RhsFailed(e.to_string()) }),
    };
    for _ in 0..opts.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            return Ok(Trajectory { points, stop: Stop::Reached });
        }
        h = h.min(remaining).min(h_cap);
        let step = |ks: &mut [[f64; N]; 7], f: &mut F| -> Result<()> {
            for s in 1..7 {
                let ys = axpy(&y, dir * h, &ks[..s], &A[s][..s]);
                ks[s] = f(t + dir * C[s] * h, &ys)?;
            }
            Ok(())
        };
        if let Err(e) = step(&mut ks, &mut f) {
            // approach the edge of the domain of `f` with shrinking steps
            h_cap = h / 4.0;
            h = h_cap;
            rhs_error = Some(e.to_string());
            if h_cap >= opts.min_step {
                continue;
            }
            return Ok(Trajectory { points, stop: Stop::RhsFailed(e.to_string()) });
        }
        let y5 = axpy(&y, dir * h, &ks, &B5);
        let y4 = axpy(&y, dir * h, &ks, &B4);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let scale = 1.0 + y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }
        if !err.is_finite() {
            h /= 4.0;
            if h < opts.min_step {
                return Ok(Trajectory { points, stop: Stop::StepUnderflow });
            }
            continue;
        }
        if err <= opts.tol {
            t += dir * h;
            y = y5;
            ks[0] = ks[6];
            points.push((t, y));
            if let Some(reason) = event(t, &y) {
                return Ok(Trajectory { points, stop: Stop::Event(reason) });
            }
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (opts.tol / err).powf(0.2)).clamp(0.2, 4.0) };
        h *= factor;
        if h < opts.min_step {
            let stop = rhs_error.map_or(Stop::StepUnderflow, Stop::RhsFailed);
            return Ok(Trajectory { points, stop });
        }
    }
    Ok(Trajectory { points, stop: Stop::TooManySteps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator() {
        let traj = integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [0.0, 1.0], 3.0, &OdeOptions::default(), |_, _| None).unwrap();
        assert_eq!(traj.stop, Stop::Reached);
        let (t, y) = *traj.points.last().unwrap();
        assert_abs_diff_eq!(t, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[0], 3.0_f64.sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 3.0_f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn backwards_and_events() {
        let traj = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], -2.0, &OdeOptions::default(), |_, y| {
            (y[0] < 0.5).then(|| "halved".to_string())
        })
        .unwrap();
        assert_eq!(traj.stop, Stop::Event("halved".into()));
        let (t, _) = *traj.points.last().unwrap();
        assert!(t < -0.69 && t > -0.72);
    }

    #[test]
    fn failing_rhs_is_reported() {
        let traj = integrate(
            |t, y: &[f64; 1]| if t > 1.0 { Err(Error::Numerical("edge".into())) } else { Ok([y[0]]) },
            0.0,
            [1.0],
            2.0,
            &OdeOptions::default(),
            |_, _| None,
        )
        .unwrap();
        assert!(matches!(traj.stop, Stop::RhsFailed(_)), "{:?}", traj.stop);
        assert!(traj.points.last().unwrap().0 <= 1.0);
    }
}
