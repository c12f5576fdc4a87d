//! Searches over meter preparations, temperatures, times and dimensions.

mod simplex;

pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bath::{self, SensorParams};
use crate::dynamics::{MeterSpec, MeterState};
use crate::error::{Error, Result};
use crate::qfi;

/// Axes of a parameter sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub taus: Vec<f64>,
    pub times: Vec<f64>,
    pub omegas: Vec<f64>,
    pub ns: Vec<usize>,
}

fn check_axis(name: &str, xs: &[f64], allow_zero: bool) -> Result<()> {
    if xs.iter().any(|x| !((*x > 0.0 || (allow_zero && *x == 0.0)) && x.is_finite())) {
        return Err(Error::InvalidParameter(format!("{name} entries must be positive and finite")));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl SweepGrid {
    /// Strictly increasing axes; temperatures and times positive, drive
    /// strengths non-negative.
    pub fn validate(&self) -> Result<()> {
        check_axis("taus", &self.taus, false)?;
        check_axis("times", &self.times, false)?;
        check_axis("omegas", &self.omegas, true)?;
        if self.ns.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter("meter dimensions must be ≥ 2".into()));
        }
        if self.ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("ns must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// `num` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, num: usize) -> Vec<f64> {
    match num {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..num)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == num - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (num - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct InitialStateOptions {
    /// Number of starts, the first being the equal superposition.
    pub starts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for InitialStateOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            tol: 1e-10,
            seed: 0,
            max_iter: 20_000,
        }
    }
}

fn amplitudes(x: &[f64]) -> Option<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(x.iter().map(|v| v.abs() / norm).collect())
}

/// Maximizes the meter QFI at `(params, t)` over real non-negative initial
/// amplitudes, using `c = |x|/‖x‖` and multi-start Nelder–Mead.
pub fn optimize_initial_state(
    params: &SensorParams,
    meter: &MeterSpec,
    t: f64,
    tol: f64,
) -> Result<(MeterState, OptimizationReport)> {
    optimize_initial_state_with(params, meter, t, InitialStateOptions { tol, ..Default::default() })
}

pub fn optimize_initial_state_with(
    params: &SensorParams,
    meter: &MeterSpec,
    t: f64,
    opts: InitialStateOptions,
) -> Result<(MeterState, OptimizationReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
    }
    let n = meter.n();
    let objective = |x: &[f64]| -> f64 {
        let Some(c) = amplitudes(x) else {
            return f64::INFINITY;
        };
        match MeterState::new(c).and_then(|s| qfi::meter_qfi(params, meter, &s, t)) {
            Ok(q) => -q.value,
            Err(_) => f64::INFINITY,
        }
    };
    let equal_value = -objective(&vec![1.0; n]);
    if !equal_value.is_finite() {
        return Err(Error::NonFinite("meter QFI at the equal superposition".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for _ in 1..opts.starts.max(1) {
        starts.push((0..n).map(|_| rng.gen_range(0.05..1.0)).collect());
    }

    let simplex_opts = SimplexOptions {
        ftol: opts.tol,
        xtol: opts.tol.sqrt(),
        max_iter: opts.max_iter,
        initial_step: 0.2,
    };
    let runs: Vec<(SimplexResult, usize)> = starts
        .par_iter()
        .map(|x0| {
            // restart from the incumbent until a fresh simplex stops improving
            let mut best = nelder_mead(objective, x0, simplex_opts);
            let mut iterations = best.iterations;
            for _ in 0..10 {
                let Some(c) = amplitudes(&best.x) else { break };
                let next = nelder_mead(objective, &c, SimplexOptions { initial_step: 0.05, ..simplex_opts });
                iterations += next.iterations;
                let gain = best.value - next.value;
                if next.value < best.value {
                    best = SimplexResult { converged: next.converged, ..next };
                }
                if gain <= opts.tol * (1.0 + best.value.abs()) {
                    break;
                }
            }
            (best, iterations)
        })
        .collect();

    // first start wins ties so results do not depend on scheduling
    let mut pick = 0;
    for (i, (r, _)) in runs.iter().enumerate() {
        if r.value < runs[pick].0.value {
            pick = i;
        }
    }
    let (best, _) = &runs[pick];
    let total_iter = runs.iter().map(|(_, it)| it).sum();
    let c = amplitudes(&best.x).ok_or(Error::NonFinite("optimizer iterate".into()))?;
    let state = MeterState::new(c.clone())?;
    let value = -best.value;
    Ok((
        state,
        OptimizationReport {
            argmax: c,
            value,
            iterations: total_iter,
            converged: runs.iter().all(|(r, _)| r.converged),
        },
    ))
}

/// `2(1 − |⟨a|b⟩|)` for normalized real amplitude vectors.
pub fn bures_distance_pure(a: &MeterState, b: &MeterState) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(format!("states of dimension {} and {}", a.n(), b.n())));
    }
    let overlap: f64 = a.coefficients().iter().zip(b.coefficients()).map(|(x, y)| x * y).sum();
    Ok((2.0 * (1.0 - overlap.abs())).max(0.0))
}

/// Location and height of a temperature maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmaxResult {
    pub tau: f64,
    pub value: f64,
    /// The coarse maximum sat on an end of the search range.
    pub at_boundary: bool,
}

pub const T_MAX_GRID: usize = 240;
const GOLDEN_REL_TOL: f64 = 1e-5;

/// Maximizes `objective(τ)` on `tau_range`: a log-spaced scan of `grid`
/// points (ties go to the smaller τ) refined by golden-section search.
pub fn find_t_max<F>(objective: F, tau_range: (f64, f64), grid: usize) -> Result<TmaxResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi) = tau_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid temperature range ({lo}, {hi})")));
    }
    if grid < 3 {
        return Err(Error::InvalidParameter("temperature grid needs at least 3 points".into()));
    }
    let taus = log_space(lo, hi, grid);
    let values: Vec<f64> = taus.par_iter().map(|&x| objective(x)).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    if best == 0 || best == grid - 1 {
        return Ok(TmaxResult {
            tau: taus[best],
            value: values[best],
            at_boundary: true,
        });
    }

    // golden section in ln τ on the bracketing cell pair
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = taus[best - 1].ln();
    let mut b = taus[best + 1].ln();
    let f = |u: f64| objective(u.exp());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a) > GOLDEN_REL_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let (mut tau, mut value) = if f1 >= f2 { (x1.exp(), f1) } else { (x2.exp(), f2) };
    if values[best] > value {
        tau = taus[best];
        value = values[best];
    }
    Ok(TmaxResult {
        tau,
        value,
        at_boundary: false,
    })
}

/// Temperature maximizing the meter QFI at time `t`.
pub fn meter_t_max(
    base: &SensorParams,
    meter: &MeterSpec,
    psi0: &MeterState,
    t: f64,
    tau_range: (f64, f64),
) -> Result<TmaxResult> {
    find_t_max(
        |tau| Ok(qfi::meter_qfi(&base.with_temperature(tau)?, meter, psi0, t)?.value),
        tau_range,
        T_MAX_GRID,
    )
}

/// Temperature maximizing the sensor-only QFI at time `t` (`∞` for the steady state).
pub fn sensor_t_max(base: &SensorParams, t: f64, tau_range: (f64, f64)) -> Result<TmaxResult> {
    find_t_max(
        |tau| bath::sensor_qfi(&base.with_temperature(tau)?, t),
        tau_range,
        T_MAX_GRID,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub tau_max: f64,
    pub qfi: f64,
    /// `(I(n+1) − I(n)) / I(n)`.
    pub r: f64,
}

/// Peak meter QFI (equal-superposition start, spin-x spectrum) for
/// `n = 2..=n_max`, with the relative gain of adding one more level.
pub fn dimension_scaling(
    base: &SensorParams,
    omega_drive: f64,
    t: f64,
    n_max: usize,
    tau_range: (f64, f64),
) -> Result<Vec<ScalingRow>> {
    if n_max < 3 {
        return Err(Error::InvalidParameter(format!("n_max must be ≥ 3, got {n_max}")));
    }
    let peaks: Vec<TmaxResult> = (2..=n_max + 1)
        .into_par_iter()
        .map(|n| meter_t_max(base, &MeterSpec::spin_x(n, omega_drive)?, &MeterState::equal(n), t, tau_range))
        .collect::<Result<_>>()?;
    Ok((2..=n_max)
        .map(|n| {
            let here = peaks[n - 2];
            let next = peaks[n - 1];
            ScalingRow {
                n,
                tau_max: here.tau,
                qfi: here.value,
                r: (next.value - here.value) / here.value,
            }
        })
        .collect())
}

pub const CROSSING_WINDOW: (f64, f64) = (0.05, 50.0);

/// First time at which the two-level meter QFI (equal superposition, gap
/// `omega_drive`) reaches the sensor QFI.
pub fn crossing_time(params: &SensorParams, omega_drive: f64) -> Result<f64> {
    crossing_time_in(params, omega_drive, CROSSING_WINDOW)
}

pub fn crossing_time_in(params: &SensorParams, omega_drive: f64, window: (f64, f64)) -> Result<f64> {
    let meter = MeterSpec::spin_x(2, omega_drive)?;
    let psi = MeterState::equal(2);
    let diff = |t: f64| -> Result<(f64, f64)> {
        let s = bath::sensor_qfi(params, t)?;
        Ok((qfi::meter_qfi(params, &meter, &psi, t)?.value - s, s))
    };
    let no_crossing = Error::NoCrossing { lo: window.0, hi: window.1 };
    let times = log_space(window.0, window.1, 400);
    let mut prev = times[0];
    if diff(prev)?.0 >= 0.0 {
        return Err(no_crossing);
    }
    for &t in &times[1..] {
        let (d, s) = diff(t)?;
        if d.abs() < 1e-6 * s {
            return Ok(t);
        }
        if d > 0.0 {
            let (mut a, mut b) = (prev, t);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let (dm, sm) = diff(m)?;
                if dm.abs() < 1e-6 * sm {
                    return Ok(m);
                }
                if dm < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = t;
    }
    Err(no_crossing)
}

/// Temperature on `taus` where the optimal preparation is closest to the
/// equal superposition (smallest Bures distance), with that distance.
pub fn white_line_temperature(
    base: &SensorParams,
    meter: &MeterSpec,
    t: f64,
    taus: &[f64],
    opts: InitialStateOptions,
) -> Result<(f64, f64)> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("empty temperature grid".into()));
    }
    let eq = MeterState::equal(meter.n());
    let dists: Vec<f64> = taus
        .par_iter()
        .map(|&tau| {
            let (s, _) = optimize_initial_state_with(&base.with_temperature(tau)?, meter, t, opts)?;
            bures_distance_pure(&s, &eq)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, d) in dists.iter().enumerate() {
        if *d < dists[best] {
            best = i;
        }
    }
    Ok((taus[best], dists[best]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(tau: f64) -> SensorParams {
        SensorParams::reduced(tau).unwrap()
    }

    #[test]
    fn grid_validation() {
        let g = SweepGrid {
            taus: vec![0.1, 0.2],
            times: vec![1.0],
            omegas: vec![2.0],
            ns: vec![2, 3],
        };
        assert!(g.validate().is_ok());
        assert!(SweepGrid { taus: vec![0.2, 0.1], ..g.clone() }.validate().is_err());
        assert!(SweepGrid { times: vec![0.0], ..g.clone() }.validate().is_err());
        assert!(SweepGrid { omegas: vec![0.0, 1.0], ..g.clone() }.validate().is_ok());
        assert!(SweepGrid { ns: vec![1], ..g }.validate().is_err());
    }

    #[test]
    fn log_space_endpoints() {
        let xs = log_space(0.05, 1.0, 5);
        assert_eq!(xs[0], 0.05);
        assert_eq!(xs[4], 1.0);
        assert!((xs[1] / xs[0] - xs[2] / xs[1]).abs() < 1e-12);
    }

    #[test]
    fn bures_cases() {
        let a = MeterState::new(vec![1.0, 0.0]).unwrap();
        let b = MeterState::equal(2);
        assert_eq!(bures_distance_pure(&b, &b).unwrap().abs() < 1e-15, true);
        assert!((bures_distance_pure(&a, &MeterState::new(vec![0.0, 1.0]).unwrap()).unwrap() - 2.0).abs() < 1e-15);
        assert!((bures_distance_pure(&a, &b).unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!((bures_distance_pure(&a, &b).unwrap() - 0.5858).abs() < 1e-4);
        assert!(bures_distance_pure(&a, &MeterState::equal(3)).is_err());
    }

    #[test]
    fn two_level_optimum_is_equal_superposition() {
        let meter = MeterSpec::spin_x(2, 2.0).unwrap();
        for (tau, t) in [(0.2, 20.0), (0.3, 5.0), (0.15, 200.0)] {
            let s = p(tau);
            let (state, report) = optimize_initial_state(&s, &meter, t, 1e-10).unwrap();
            let d = bures_distance_pure(&state, &MeterState::equal(2)).unwrap();
            assert!(d < 1e-6, "tau {tau} t {t}: {d}");
            let eq = qfi::meter_qfi(&s, &meter, &MeterState::equal(2), t).unwrap().value;
            assert!(report.value >= eq - 1e-10);
        }
    }

    #[test]
    fn multilevel_optimum_is_symmetric_and_not_worse() {
        let s = p(0.2);
        let meter = MeterSpec::spin_x(4, 2.0).unwrap();
        let (state, report) = optimize_initial_state(&s, &meter, 20.0, 1e-10).unwrap();
        let c = state.coefficients();
        for m in 0..4 {
            assert!((c[m] - c[3 - m]).abs() < 1e-4, "{c:?}");
        }
        let eq = qfi::meter_qfi(&s, &meter, &MeterState::equal(4), 20.0).unwrap().value;
        assert!(report.value >= eq - 1e-10);
        assert!(optimize_initial_state(&s, &meter, 20.0, 0.0).is_err());
    }

    #[test]
    fn t_max_sensor_steady() {
        let r = sensor_t_max(&p(1.0), f64::INFINITY, (0.05, 1.0)).unwrap();
        assert!(!r.at_boundary);
        assert!((r.tau - 0.242).abs() < 1e-3, "{}", r.tau);
        let r2 = sensor_t_max(&p(1.0), f64::INFINITY, (0.05, 1.0)).unwrap();
        assert_eq!(r.tau.to_bits(), r2.tau.to_bits());
    }

    #[test]
    fn t_max_boundary_flag() {
        let r = find_t_max(|x| Ok(x), (0.1, 1.0), 50).unwrap();
        assert!(r.at_boundary);
        assert_eq!(r.tau, 1.0);
        let r = find_t_max(|_| Ok(1.0), (0.1, 1.0), 50).unwrap();
        assert_eq!(r.tau, 0.1);
        assert!(find_t_max(|x| Ok(x), (1.0, 0.1), 50).is_err());
    }

    #[test]
    fn crossing_cases() {
        let t = crossing_time(&p(0.2), 2.0).unwrap();
        assert!((2.2..=3.0).contains(&t), "{t}");
        let s = p(0.2);
        let im = qfi::meter_qfi(&s, &MeterSpec::spin_x(2, 2.0).unwrap(), &MeterState::equal(2), t).unwrap().value;
        let is = bath::sensor_qfi(&s, t).unwrap();
        assert!((im - is).abs() < 1e-6 * is);
        assert!(matches!(crossing_time(&p(0.2), 0.0), Err(Error::NoCrossing { .. })));
    }
}
