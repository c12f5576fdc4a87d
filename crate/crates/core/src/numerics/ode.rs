//! Dormand–Prince 5(4) integration of matrix-valued ODEs.

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Tolerances and limits for [`integrate_ode_with`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; `None` picks one from the span.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            h0: None,
            max_steps: 10_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus embedded fourth order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &ComplexMatrix, terms: &[(f64, &ComplexMatrix)], h: f64) -> ComplexMatrix {
    let mut out = y.clone();
    for (w, k) in terms {
        out.zip_apply(*k, |o, x| *o += x * (w * h));
    }
    out
}

/// Integrates `dy/dt = f(t, y)` over `t_span` with the default step control
/// at absolute and relative tolerance `tol`.
pub fn integrate_ode<F>(f: F, y0: &ComplexMatrix, t_span: (f64, f64), tol: f64) -> Result<ComplexMatrix>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    integrate_ode_with(f, y0, t_span, OdeOptions::with_tol(tol)).map(|(y, _)| y)
}

pub fn integrate_ode_with<F>(
    f: F,
    y0: &ComplexMatrix,
    t_span: (f64, f64),
    opts: OdeOptions,
) -> Result<(ComplexMatrix, OdeStats)>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    let (t0, t1) = t_span;
    if !(opts.atol > 0.0 && opts.rtol > 0.0) {
        return Err(Error::InvalidParameter("ODE tolerances must be positive".into()));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidParameter(format!("invalid time span ({t0}, {t1})")));
    }
    let mut stats = OdeStats::default();
    let mut y = y0.clone();
    if t1 == t0 {
        return Ok((y, stats));
    }

    let span = t1 - t0;
    let mut t = t0;
    let mut h = opts.h0.unwrap_or_else(|| (span * 1e-3).min(1e-2)).min(span);
    let mut k1 = f(t, &y);

    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(t + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            t + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let k7 = f(t + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e: C64 = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::NonFinite(format!("ODE state at t = {t}")));
        }

        if err <= 1.0 {
            t = if t1 - (t + h) < 1e-15 * span.max(1.0) { t1 } else { t + h };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t.abs().max(1.0) && t < t1 {
            return Err(Error::StepSizeUnderflow { t, h });
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, identity, trace};

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = identity(3) * c(0.5, 0.25);
        let y = integrate_ode(|_, y| ComplexMatrix::zeros(y.nrows(), y.ncols()), &y0, (0.0, 3.0), 1e-10).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn exponential_decay() {
        let y0 = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
        let tol = 1e-10;
        let y = integrate_ode(|_, y| -y, &y0, (0.0, 1.0), tol).unwrap();
        assert!((y[0] - c((-1.0f64).exp(), 0.0)).norm() < tol);
    }

    #[test]
    fn oscillator_phase() {
        let y0 = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
        let y = integrate_ode(|_, y| y * c(0.0, -2.0), &y0, (0.0, 10.0), 1e-12).unwrap();
        let want = C64::from_polar(1.0, -20.0);
        assert!((y[0] - want).norm() < 1e-9);
    }

    #[test]
    fn trace_preserving_generator_keeps_trace() {
        // two-level rate equation with off-diagonal damping
        let rhs = |_: f64, y: &ComplexMatrix| {
            let mut d = ComplexMatrix::zeros(2, 2);
            d[(0, 0)] = -y[(0, 0)] * 0.7 + y[(1, 1)] * 0.3;
            d[(1, 1)] = -d[(0, 0)];
            d[(0, 1)] = -y[(0, 1)] * c(0.5, 1.0);
            d[(1, 0)] = -y[(1, 0)] * c(0.5, -1.0);
            d
        };
        let y0 = ComplexMatrix::from_row_slice(2, 2, &[c(0.2, 0.), c(0.3, 0.1), c(0.3, -0.1), c(0.8, 0.)]);
        let tol = 1e-10;
        let y = integrate_ode(rhs, &y0, (0.0, 25.0), tol).unwrap();
        assert!((trace(&y) - c(1.0, 0.0)).norm() < 10.0 * tol);
    }

    #[test]
    fn rejects_bad_input() {
        let y0 = identity(1);
        assert!(integrate_ode(|_, y| y.clone(), &y0, (0.0, 1.0), 0.0).is_err());
        assert!(integrate_ode(|_, y| y.clone(), &y0, (1.0, 0.0), 1e-8).is_err());
    }

    #[test]
    fn blow_up_reports_failure() {
        // y' = y² reaches infinity at t = 1
        let y0 = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
        let r = integrate_ode(|_, y| y.component_mul(y), &y0, (0.0, 2.0), 1e-8);
        assert!(r.is_err());
    }
}
