//! Thermal bath coupling of the two-level sensor.
//!
//! The sensor decays at `γ₋ = (N+1)γ` and is excited at `γ₊ = Nγ`, with `N` the
//! Bose occupation at the sensor frequency. Started in `|g⟩` it stays diagonal
//! and relaxes to the Gibbs state at rate `(2N+1)γ`.

use crate::error::{Error, Result};
use crate::numerics::{basis_op, c, from_real_diagonal, ComplexMatrix, C64};

/// Sensor frequency, bath coupling and temperature, in reduced units.
///
/// `temperature` is `τ = k_B T / ħω`. Construct through [`SensorParams::new`],
/// which enforces positivity of all three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    omega: f64,
    gamma: f64,
    temperature: f64,
}

impl SensorParams {
    pub fn new(omega: f64, gamma: f64, temperature: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("gamma", gamma), ("temperature", temperature)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            omega,
            gamma,
            temperature,
        })
    }

    /// `ω = γ = 1` at temperature `tau`.
    pub fn reduced(tau: f64) -> Result<Self> {
        Self::new(1.0, 1.0, tau)
    }

    pub fn with_temperature(&self, tau: f64) -> Result<Self> {
        Self::new(self.omega, self.gamma, tau)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn n_bar(&self) -> f64 {
        bose(self.temperature)
    }

    pub fn rates(&self) -> ThermalRates {
        let n_bar = self.n_bar();
        ThermalRates {
            n_bar,
            gamma_minus: (n_bar + 1.0) * self.gamma,
            gamma_plus: n_bar * self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRates {
    pub n_bar: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

/// `N(τ) = 1/(e^{1/τ} − 1)`.
pub fn bose(tau: f64) -> f64 {
    1.0 / (1.0 / tau).exp_m1()
}

/// `dN/dτ = e^{1/τ} / (τ² (e^{1/τ} − 1)²)`, evaluated in a form that stays
/// finite as `τ → 0`.
pub fn dbose_dtau(tau: f64) -> f64 {
    let x = 1.0 / tau;
    let em = (-x).exp();
    let denom = -(-x).exp_m1();
    x * x * em / (denom * denom)
}

pub fn bose_occupation(params: &SensorParams) -> f64 {
    params.n_bar()
}

pub fn d_occupation_dt(params: &SensorParams) -> f64 {
    dbose_dtau(params.temperature)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")))
    }
}

/// `p_e(t) = N/(2N+1) (1 − e^{−(2N+1)γt})`. `t = ∞` gives the Gibbs weight.
pub fn excited_population(params: &SensorParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let n = params.n_bar();
    let k = 2.0 * n + 1.0;
    Ok(-n / k * (-k * params.gamma * t).exp_m1())
}

/// `∂p_e/∂N` at fixed `t`.
pub fn dexcited_dn(n: f64, gamma: f64, t: f64) -> f64 {
    let k = 2.0 * n + 1.0;
    let decay = (-k * gamma * t).exp();
    let growth = -(-k * gamma * t).exp_m1();
    growth / (k * k) + n / k * 2.0 * gamma * t * decay
}

/// `∂p_e/∂τ` through the chain rule `∂p_e/∂N · dN/dτ`.
pub fn dexcited_dtau(params: &SensorParams, t: f64) -> Result<f64> {
    check_time(t)?;
    if t.is_infinite() {
        let n = params.n_bar();
        let k = 2.0 * n + 1.0;
        return Ok(dbose_dtau(params.temperature) / (k * k));
    }
    Ok(dexcited_dn(params.n_bar(), params.gamma, t) * dbose_dtau(params.temperature))
}

/// `diag(p_e, 1 − p_e)` in the `{|e⟩, |g⟩}` basis.
pub fn sensor_state(params: &SensorParams, t: f64) -> Result<ComplexMatrix> {
    let p = excited_population(params, t)?;
    Ok(from_real_diagonal(&[p, 1.0 - p]))
}

/// Gibbs state of the sensor.
pub fn gibbs_state(params: &SensorParams) -> ComplexMatrix {
    let w = (-1.0 / params.temperature).exp();
    from_real_diagonal(&[w / (1.0 + w), 1.0 / (1.0 + w)])
}

/// QFI of the sensor alone, `(∂p_e/∂τ)² / (p_e(1 − p_e))`; zero at `t = 0`.
pub fn sensor_qfi(params: &SensorParams, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = excited_population(params, t)?;
    let dp = dexcited_dtau(params, t)?;
    if p <= 0.0 {
        return Ok(0.0);
    }
    Ok(dp * dp / (p * (1.0 - p)))
}

/// Long-time sensor QFI `e^{1/τ} / ((1 + e^{1/τ})² τ⁴)`.
pub fn steady_sensor_qfi(params: &SensorParams) -> f64 {
    steady_qfi_at(params.temperature)
}

pub fn steady_qfi_at(tau: f64) -> f64 {
    let w = (-1.0 / tau).exp();
    w / ((1.0 + w) * (1.0 + w) * tau.powi(4))
}

/// Lowering operator `σ₋ = |g⟩⟨e|`.
pub fn sigma_minus() -> ComplexMatrix {
    basis_op(2, 1, 0)
}

pub fn sigma_plus() -> ComplexMatrix {
    basis_op(2, 0, 1)
}

pub fn sigma_z() -> ComplexMatrix {
    from_real_diagonal(&[1.0, -1.0])
}

/// `D[a]ρ = aρa† − ½{a†a, ρ}`.
pub fn dissipator(a: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let ada = a.adjoint() * a;
    a * rho * a.adjoint() - (&ada * rho + rho * &ada) * c(0.5, 0.0)
}

/// Sensor generator `−i(ω/2)[σ_z, ρ] + γ₋D[σ₋]ρ + γ₊D[σ₊]ρ`.
pub fn sensor_lindblad_rhs(params: &SensorParams, rho: &ComplexMatrix) -> ComplexMatrix {
    let rates = params.rates();
    let sz = sigma_z();
    let comm = &sz * rho - rho * &sz;
    comm * C64::new(0.0, -0.5 * params.omega)
        + dissipator(&sigma_minus(), rho) * c(rates.gamma_minus, 0.0)
        + dissipator(&sigma_plus(), rho) * c(rates.gamma_plus, 0.0)
}
