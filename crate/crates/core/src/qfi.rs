//! Quantum Fisher information for temperature.
//!
//! The reference expression is the vectorized form
//! `I = 2 vec(∂ρ)† (ρ*⊗I + I⊗ρ)⁺ vec(∂ρ)`, with the pseudo-inverse restricted to
//! the support of `ρ`. Two faster routes compute the same quantity: the
//! qubit closed form `4 Tr[ρ(∂ρ)²] + (∂ det ρ)² / det ρ` and the eigenbasis
//! sum `2 Σ |⟨i|∂ρ|j⟩|² / (p_i + p_j)`.
//!
//! Values are per single shot and dimensionless in reduced units.

use crate::bath::{self, dbose_dtau, SensorParams};
use crate::dynamics::{self, MeterSpec, MeterState};
use crate::error::{Error, Result};
use crate::numerics::{eigh, kron, trace, vec, ComplexMatrix, PseudoInverse, DEFAULT_RANK_TOL};

/// How a QFI value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiMethod {
    QubitClosedForm,
    Vectorized,
    Spectral,
    LongTimeApprox,
    /// Sensor closed form `(∂p_e/∂τ)² / (p_e(1 − p_e))`.
    SensorClosedForm,
}

/// Where `∂ρ/∂τ` came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    Analytic,
    FiniteDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub method: QfiMethod,
    pub derivative: Derivative,
}

impl QfiResult {
    fn new(value: f64, method: QfiMethod) -> Result<Self> {
        Ok(Self {
            value: clip(value)?,
            method,
            derivative: Derivative::Analytic,
        })
    }

    fn zero(method: QfiMethod) -> Self {
        Self {
            value: 0.0,
            method,
            derivative: Derivative::Analytic,
        }
    }

    pub fn with_derivative(mut self, derivative: Derivative) -> Self {
        self.derivative = derivative;
        self
    }
}

const NEGATIVE_TOL: f64 = 1e-9;
/// Largest tolerated weight of `vec(∂ρ)` outside the numerical range, relative to `‖∂ρ‖`.
const SUPPORT_TOL: f64 = 1e-8;
/// Below this determinant the qubit closed form hands over to the vectorized form.
const QUBIT_DET_FLOOR: f64 = 1e-14;

fn clip(value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite("QFI value".into()));
    }
    if value < -NEGATIVE_TOL {
        return Err(Error::InvalidParameter(format!(
            "negative QFI {value:e}: state is not positive semidefinite"
        )));
    }
    Ok(value.max(0.0))
}

fn check_pair(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<()> {
    if !rho.is_square() || rho.shape() != drho.shape() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, derivative is {}x{}",
            rho.nrows(),
            rho.ncols(),
            drho.nrows(),
            drho.ncols()
        )));
    }
    Ok(())
}

/// Default central-difference step `1e-6 τ`.
pub fn default_step(tau: f64) -> f64 {
    1e-6 * tau
}

/// Central difference `(ρ(τ+h) − ρ(τ−h)) / 2h`.
pub fn state_derivative<F>(state_fn: F, tau: f64, step: f64) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let hi = state_fn(tau + step)?;
    let lo = state_fn(tau - step)?;
    if hi.shape() != lo.shape() {
        return Err(Error::DimensionMismatch("state function changed shape".into()));
    }
    let d = (hi - lo) / crate::numerics::C64::new(2.0 * step, 0.0);
    if d.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("state derivative".into()));
    }
    Ok(d)
}

/// Qubit closed form. Falls back to [`qfi_general`] for (nearly) pure states.
pub fn qfi_qubit(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<QfiResult> {
    check_pair(rho, drho)?;
    if rho.nrows() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "qubit QFI needs a 2x2 state, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let det = (rho[(0, 0)] * rho[(1, 1)] - rho[(0, 1)] * rho[(1, 0)]).re;
    if det < QUBIT_DET_FLOOR {
        return qfi_general(rho, drho, DEFAULT_RANK_TOL);
    }
    let ddet = (drho[(0, 0)] * rho[(1, 1)] + rho[(0, 0)] * drho[(1, 1)]
        - drho[(0, 1)] * rho[(1, 0)]
        - rho[(0, 1)] * drho[(1, 0)])
        .re;
    let first = 4.0 * trace(&(rho * drho * drho)).re;
    QfiResult::new(first + ddet * ddet / det, QfiMethod::QubitClosedForm)
}

/// `ρ*⊗I + I⊗ρ`, the matrix of `X ↦ ρX + Xρ` on column-stacked `X`.
pub fn sld_superoperator(rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.nrows();
    let id = ComplexMatrix::identity(d, d);
    kron(&rho.conjugate(), &id) + kron(&id, rho)
}

/// Vectorized QFI with the pseudo-inverse cut at `rank_tol · σ_max`.
pub fn qfi_general(rho: &ComplexMatrix, drho: &ComplexMatrix, rank_tol: f64) -> Result<QfiResult> {
    check_pair(rho, drho)?;
    if drho.iter().all(|z| *z == crate::numerics::C64::new(0.0, 0.0)) {
        return Ok(QfiResult::zero(QfiMethod::Vectorized));
    }
    let pinv = PseudoInverse::new(&sld_superoperator(rho), rank_tol)?;
    let v = ComplexMatrix::from_column_slice(drho.len(), 1, vec(drho).as_slice());
    let outside = pinv.range_residual(&v);
    if outside > SUPPORT_TOL * v.norm().max(1.0) {
        return Err(Error::SupportViolation { weight: outside });
    }
    let x = pinv.solve(&v);
    let value = 2.0 * (v.adjoint() * x)[(0, 0)].re;
    QfiResult::new(value, QfiMethod::Vectorized)
}

/// Same quantity as [`qfi_general`], evaluated in the eigenbasis of `ρ`.
pub fn qfi_spectral(rho: &ComplexMatrix, drho: &ComplexMatrix, rank_tol: f64) -> Result<QfiResult> {
    check_pair(rho, drho)?;
    let (p, u) = eigh(rho)?;
    let d = u.adjoint() * drho * &u;
    // the eigenvalues of ρ*⊗I + I⊗ρ are p_i + p_j, the largest being 2 p_max
    let cutoff = rank_tol * 2.0 * p.iter().copied().fold(0.0, f64::max);
    let mut value = 0.0;
    let mut outside = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            let w = d[(i, j)].norm_sqr();
            let s = p[i] + p[j];
            if s > cutoff {
                value += 2.0 * w / s;
            } else {
                outside += w;
            }
        }
    }
    if outside.sqrt() > SUPPORT_TOL * drho.norm().max(1.0) {
        return Err(Error::SupportViolation { weight: outside.sqrt() });
    }
    QfiResult::new(value, QfiMethod::Spectral)
}

/// Picks the cheapest exact route: closed form for qubits, the vectorized
/// form up to dimension 4, the eigenbasis sum beyond.
pub fn qfi_auto(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<QfiResult> {
    match rho.nrows() {
        2 => qfi_qubit(rho, drho),
        d if d <= 4 => qfi_general(rho, drho, DEFAULT_RANK_TOL),
        _ => qfi_spectral(rho, drho, DEFAULT_RANK_TOL),
    }
}

/// Slow decay rate of meter coherences, `Γ_N = Nγ(Ω² − Nγ²)/(Ω² + γ²)`.
pub fn gamma_n(params: &SensorParams, omega: f64) -> f64 {
    let n = params.n_bar();
    let g = params.gamma();
    n * g * (omega * omega - n * g * g) / (omega * omega + g * g)
}

/// Long-time, weak-occupation approximation of the two-level meter QFI,
/// valid for `Ω ≫ γN` and `γt ≫ 1`.
pub fn qfi_longtime(params: &SensorParams, omega: f64, t: f64) -> Result<QfiResult> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let n = params.n_bar();
    let g = params.gamma();
    let dn = dbose_dtau(params.temperature());
    let rate = gamma_n(params, omega);
    let w2 = omega * omega;
    let g2 = g * g;
    let decay = (-2.0 * rate * t).exp();
    let tail = (w2 - 2.0 * g2 * n).powi(2) / ((w2 + g2) * (2.0 * rate * t).exp_m1());
    let value = dn * dn * g2 * t * t * decay / (w2 + g2) * (w2 + 4.0 * g2 * n * n + tail);
    QfiResult::new(if value.is_nan() { 0.0 } else { value }, QfiMethod::LongTimeApprox)
}

/// QFI of the reduced meter state, with the analytic temperature derivative.
pub fn meter_qfi(params: &SensorParams, meter: &MeterSpec, psi0: &MeterState, t: f64) -> Result<QfiResult> {
    let rho = dynamics::meter_state(params, meter, psi0, t)?;
    if t == 0.0 {
        return Ok(QfiResult::zero(if meter.n() == 2 { QfiMethod::QubitClosedForm } else { QfiMethod::Spectral }));
    }
    let drho = dynamics::meter_state_dtau(params, meter, psi0, t)?;
    qfi_auto(&rho, &drho)
}

/// Meter QFI with a central-difference derivative of step `step`.
pub fn meter_qfi_fd(
    params: &SensorParams,
    meter: &MeterSpec,
    psi0: &MeterState,
    t: f64,
    step: f64,
) -> Result<QfiResult> {
    let rho = dynamics::meter_state(params, meter, psi0, t)?;
    let drho = state_derivative(
        |tau| dynamics::meter_state(&params.with_temperature(tau)?, meter, psi0, t),
        params.temperature(),
        step,
    )?;
    Ok(qfi_auto(&rho, &drho)?.with_derivative(Derivative::FiniteDifference { step }))
}

/// QFI of the full sensor–meter state.
pub fn joint_qfi(params: &SensorParams, meter: &MeterSpec, psi0: &MeterState, t: f64) -> Result<QfiResult> {
    let rho = dynamics::joint_state(params, meter, psi0, t)?;
    let drho = dynamics::joint_state_dtau(params, meter, psi0, t)?;
    qfi_auto(&rho, &drho)
}

/// Sensor QFI as a [`QfiResult`].
pub fn sensor_qfi(params: &SensorParams, t: f64) -> Result<QfiResult> {
    QfiResult::new(bath::sensor_qfi(params, t)?, QfiMethod::SensorClosedForm)
}
