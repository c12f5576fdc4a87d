//! Joint sensor–meter evolution under `ρ̇ = −i[M ⊗ |e⟩⟨e|, ρ] + L_T ρ`.
//!
//! Expanding in the eigenbasis of the meter operator, `ρ(t) = Σ A_mm' |m⟩⟨m'| ⊗ ρ_mm'(t)`
//! with `A_mm' = c_m c_m'`. Each sensor block `ρ_mm'` evolves independently and
//! only through the gap `Ω_mm' = λ_m − λ_m'`. For a sensor started in `|g⟩` the
//! blocks stay diagonal, and writing `ρ_mm' = a|e⟩⟨e| + b|g⟩⟨g|` the block
//! equation is the 2×2 linear system
//!
//! ```text
//! ȧ = −((N+1)γ + iΩ) a + Nγ b
//! ḃ =  (N+1)γ a − Nγ b
//! ```
//!
//! whose eigenvalues are `μ± = (−β ± α)/2` with `β = (2N+1)γ + iΩ` and
//! `α = √(((2N+1)γ)² − Ω² + 2iγΩ)` on the branch with `Re α ≥ 0`.

use crate::bath::{self, dbose_dtau, SensorParams};
use crate::error::{Error, Result};
use crate::numerics::{basis_op, c, from_real_diagonal, identity, integrate_ode, kron, ComplexMatrix, C64};

/// Spectrum of the meter operator `M`. The eigenbasis is the computational
/// basis, so only the eigenvalues are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterSpec {
    lambdas: Vec<f64>,
    omega_drive: Option<f64>,
}

impl MeterSpec {
    /// Eigenvalues must be finite and ascending, with at least two levels.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "meter needs at least two levels, got {}",
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter("meter eigenvalues must be finite".into()));
        }
        if lambdas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("meter eigenvalues must be sorted ascending".into()));
        }
        Ok(Self {
            lambdas,
            omega_drive: None,
        })
    }

    /// `M = Ω S_x` for spin `(n−1)/2`: eigenvalues `Ω·{−j, …, j}`.
    pub fn spin_x(n: usize, omega_drive: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("meter dimension must be ≥ 2, got {n}")));
        }
        if !(omega_drive >= 0.0 && omega_drive.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "drive strength must be non-negative, got {omega_drive}"
            )));
        }
        let j = (n as f64 - 1.0) / 2.0;
        let lambdas = (0..n).map(|k| omega_drive * (k as f64 - j)).collect();
        Ok(Self {
            lambdas,
            omega_drive: Some(omega_drive),
        })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn omega_drive(&self) -> Option<f64> {
        self.omega_drive
    }

    /// `Ω_mm' = λ_m − λ_m'`.
    pub fn gap(&self, m: usize, m_prime: usize) -> f64 {
        self.lambdas[m] - self.lambdas[m_prime]
    }

    /// Meter operator as a diagonal matrix.
    pub fn operator(&self) -> ComplexMatrix {
        from_real_diagonal(&self.lambdas)
    }
}

/// Alias matching the operation name used in the CLI.
pub fn spin_x_spectrum(n: usize, omega_drive: f64) -> Result<MeterSpec> {
    MeterSpec::spin_x(n, omega_drive)
}

/// Real, non-negative amplitudes `c_m` of the initial meter state in the
/// eigenbasis of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterState {
    coefficients: Vec<f64>,
}

impl MeterState {
    /// Normalizes `coefficients`; rejects negative entries and the zero vector.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("meter state is empty".into()));
        }
        if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter(
                "meter amplitudes must be finite and non-negative".into(),
            ));
        }
        let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("meter state has zero norm".into()));
        }
        Ok(Self {
            coefficients: coefficients.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// `(1/√n) Σ|m⟩`.
    pub fn equal(n: usize) -> Self {
        Self {
            coefficients: vec![1.0 / (n as f64).sqrt(); n],
        }
    }

    pub fn eigenstate(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidParameter(format!("eigenstate {k} out of range for n = {n}")));
        }
        let mut coefficients = vec![0.0; n];
        coefficients[k] = 1.0;
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> ComplexMatrix {
        let n = self.n();
        ComplexMatrix::from_fn(n, n, |i, j| c(self.coefficients[i] * self.coefficients[j], 0.0))
    }
}

/// Sensor-space operator multiplying `|m⟩⟨m'|` in the joint state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceBlock {
    pub m: usize,
    pub m_prime: usize,
    pub block: ComplexMatrix,
}

/// `α = √(((2N+1)γ)² − Ω² + 2iγΩ)` with `Re α ≥ 0`.
pub fn alpha(n_bar: f64, gamma: f64, omega_diff: f64) -> C64 {
    let k = (2.0 * n_bar + 1.0) * gamma;
    C64::new(k * k - omega_diff * omega_diff, 2.0 * gamma * omega_diff).sqrt()
}

/// Eigenvalues `(μ₊, μ₋)` of the block generator for gap `omega_diff`.
/// `μ₊` is the slow mode and vanishes when `N = 0`.
pub fn block_rates(n_bar: f64, gamma: f64, omega_diff: f64) -> (C64, C64) {
    let a = alpha(n_bar, gamma, omega_diff);
    let b = C64::new((2.0 * n_bar + 1.0) * gamma, omega_diff);
    // (α − β)/2 rewritten to avoid cancellation, using β² − α² = 4iΩγN
    let slow = C64::new(0.0, -2.0 * omega_diff * gamma * n_bar) / (a + b);
    (slow, -(a + b) * 0.5)
}

/// Diagonal entries `(a, b) = (⟨e|ρ_mm'|e⟩, ⟨g|ρ_mm'|g⟩)` of a block and
/// their derivatives with respect to `N`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockEntries {
    pub e: C64,
    pub g: C64,
    pub de_dn: C64,
    pub dg_dn: C64,
}

pub(crate) fn block_entries(n: f64, gamma: f64, omega_diff: f64, t: f64) -> BlockEntries {
    if omega_diff == 0.0 {
        let k = 2.0 * n + 1.0;
        let p = -n / k * (-k * gamma * t).exp_m1();
        let dp = bath::dexcited_dn(n, gamma, t);
        return BlockEntries {
            e: c(p, 0.0),
            g: c(1.0 - p, 0.0),
            de_dn: c(dp, 0.0),
            dg_dn: c(-dp, 0.0),
        };
    }
    let a = alpha(n, gamma, omega_diff);
    let b = C64::new((2.0 * n + 1.0) * gamma, omega_diff);
    let cc = C64::new(gamma, omega_diff);
    let (mu_p, mu_m) = block_rates(n, gamma, omega_diff);
    let ep = (mu_p * t).exp();
    let em = (mu_m * t).exp();

    let e = (ep - em) * (gamma * n) / a;
    let g = ((cc + a) * ep + (a - cc) * em) / (a * 2.0);

    let da = c(2.0 * (2.0 * n + 1.0) * gamma * gamma, 0.0) / a;
    let db = c(2.0 * gamma, 0.0);
    let iwg = C64::new(0.0, -2.0 * omega_diff * gamma);
    let dmu_p = iwg / (a + b) - iwg * n * (da + db) / ((a + b) * (a + b));
    let dmu_m = -(da + db) * 0.5;
    let dep = ep * dmu_p * t;
    let dem = em * dmu_m * t;

    let de_dn = (ep - em) * gamma / a + (dep - dem) * (gamma * n) / a - e * da / a;
    let dg_dn = (da * ep + (cc + a) * dep + da * em + (a - cc) * dem) / (a * 2.0) - g * da / a;
    BlockEntries { e, g, de_dn, dg_dn }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")))
    }
}

/// Closed-form sensor block for gap `omega_diff`, sensor initialized in `|g⟩`.
pub fn coherence_block(params: &SensorParams, omega_diff: f64, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    let be = block_entries(params.n_bar(), params.gamma(), omega_diff, t);
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = be.e;
    m[(1, 1)] = be.g;
    Ok(m)
}

/// Block for the eigenvalue pair `(m, m_prime)` of `meter`.
pub fn coherence_block_for(
    params: &SensorParams,
    meter: &MeterSpec,
    m: usize,
    m_prime: usize,
    t: f64,
) -> Result<CoherenceBlock> {
    if m >= meter.n() || m_prime >= meter.n() {
        return Err(Error::DimensionMismatch(format!(
            "block ({m}, {m_prime}) out of range for n = {}",
            meter.n()
        )));
    }
    Ok(CoherenceBlock {
        m,
        m_prime,
        block: coherence_block(params, meter.gap(m, m_prime), t)?,
    })
}

/// `Tr ρ_mm'(t)`: the factor multiplying the meter coherence `A_mm'`.
pub fn coherence_trace(params: &SensorParams, omega_diff: f64, t: f64) -> Result<C64> {
    check_time(t)?;
    let be = block_entries(params.n_bar(), params.gamma(), omega_diff, t);
    Ok(be.e + be.g)
}

fn check_dims(meter: &MeterSpec, psi0: &MeterState) -> Result<()> {
    if meter.n() != psi0.n() {
        return Err(Error::DimensionMismatch(format!(
            "meter has {} levels but the initial state has {} amplitudes",
            meter.n(),
            psi0.n()
        )));
    }
    Ok(())
}

/// Fills a `2n × 2n` joint matrix from per-pair values `(e, g)`; the lower
/// triangle is the conjugate of the upper so the result is exactly Hermitian.
fn assemble_joint<F>(meter: &MeterSpec, psi0: &MeterState, mut entries: F) -> ComplexMatrix
where
    F: FnMut(usize, usize) -> (C64, C64),
{
    let n = meter.n();
    let cf = psi0.coefficients();
    let mut rho = ComplexMatrix::zeros(2 * n, 2 * n);
    for m in 0..n {
        for mp in m..n {
            let w = cf[m] * cf[mp];
            if w == 0.0 {
                continue;
            }
            let (e, g) = entries(m, mp);
            rho[(2 * m, 2 * mp)] = e * w;
            rho[(2 * m + 1, 2 * mp + 1)] = g * w;
            if mp != m {
                rho[(2 * mp, 2 * m)] = (e * w).conj();
                rho[(2 * mp + 1, 2 * m + 1)] = (g * w).conj();
            } else {
                rho[(2 * m, 2 * m)].im = 0.0;
                rho[(2 * m + 1, 2 * m + 1)].im = 0.0;
            }
        }
    }
    rho
}

/// Closed-form joint state, ordered meter ⊗ sensor.
pub fn joint_state(params: &SensorParams, meter: &MeterSpec, psi0: &MeterState, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_dims(meter, psi0)?;
    let (n_bar, gamma) = (params.n_bar(), params.gamma());
    Ok(assemble_joint(meter, psi0, |m, mp| {
        let be = block_entries(n_bar, gamma, meter.gap(m, mp), t);
        (be.e, be.g)
    }))
}

/// `∂ρ/∂τ` of the joint state via the chain rule through `dN/dτ`.
pub fn joint_state_dtau(params: &SensorParams, meter: &MeterSpec, psi0: &MeterState, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_dims(meter, psi0)?;
    let (n_bar, gamma) = (params.n_bar(), params.gamma());
    let dn = dbose_dtau(params.temperature());
    Ok(assemble_joint(meter, psi0, |m, mp| {
        let be = block_entries(n_bar, gamma, meter.gap(m, mp), t);
        (be.de_dn * dn, be.dg_dn * dn)
    }))
}

fn assemble_meter<F>(meter: &MeterSpec, psi0: &MeterState, mut coherence: F) -> ComplexMatrix
where
    F: FnMut(usize, usize) -> C64,
{
    let n = meter.n();
    let cf = psi0.coefficients();
    let mut rho = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        rho[(m, m)] = coherence(m, m);
        for mp in (m + 1)..n {
            let w = cf[m] * cf[mp];
            if w == 0.0 {
                continue;
            }
            let z = coherence(m, mp) * w;
            rho[(m, mp)] = z;
            rho[(mp, m)] = z.conj();
        }
    }
    rho
}

/// Reduced meter state: populations `c_m²` are frozen, coherences are
/// `c_m c_m' Tr ρ_mm'(t)`.
pub fn meter_state(params: &SensorParams, meter: &MeterSpec, psi0: &MeterState, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_dims(meter, psi0)?;
    let (n_bar, gamma) = (params.n_bar(), params.gamma());
    let cf = psi0.coefficients();
    Ok(assemble_meter(meter, psi0, |m, mp| {
        if m == mp {
            c(cf[m] * cf[m], 0.0)
        } else {
            let be = block_entries(n_bar, gamma, meter.gap(m, mp), t);
            be.e + be.g
        }
    }))
}

/// `∂ρ_M/∂τ`; the diagonal vanishes identically.
pub fn meter_state_dtau(params: &SensorParams, meter: &MeterSpec, psi0: &MeterState, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_dims(meter, psi0)?;
    let (n_bar, gamma) = (params.n_bar(), params.gamma());
    let dn = dbose_dtau(params.temperature());
    Ok(assemble_meter(meter, psi0, |m, mp| {
        if m == mp {
            c(0.0, 0.0)
        } else {
            let be = block_entries(n_bar, gamma, meter.gap(m, mp), t);
            (be.de_dn + be.dg_dn) * dn
        }
    }))
}

/// Generator of the joint master equation in matrix form.
#[derive(Debug, Clone)]
pub struct JointGenerator {
    hamiltonian: ComplexMatrix,
    lower: ComplexMatrix,
    raise: ComplexMatrix,
    gamma_minus: f64,
    gamma_plus: f64,
}

impl JointGenerator {
    /// `include_free` adds the sensor term `(ω/2) I ⊗ σ_z` to the Hamiltonian.
    pub fn new(params: &SensorParams, meter: &MeterSpec, include_free: bool) -> Self {
        let n = meter.n();
        let mut hamiltonian = kron(&meter.operator(), &basis_op(2, 0, 0));
        if include_free {
            hamiltonian += kron(&identity(n), &bath::sigma_z()) * c(0.5 * params.omega(), 0.0);
        }
        let rates = params.rates();
        Self {
            hamiltonian,
            lower: kron(&identity(n), &bath::sigma_minus()),
            raise: kron(&identity(n), &bath::sigma_plus()),
            gamma_minus: rates.gamma_minus,
            gamma_plus: rates.gamma_plus,
        }
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    /// Jump operators paired with their rates.
    pub fn jumps(&self) -> [(f64, &ComplexMatrix); 2] {
        [(self.gamma_minus, &self.lower), (self.gamma_plus, &self.raise)]
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * C64::new(0.0, -1.0);
        for (rate, l) in self.jumps() {
            out += bath::dissipator(l, rho) * c(rate, 0.0);
        }
        out
    }
}

/// Right-hand side of the joint master equation, without the sensor free term.
pub fn lindblad_rhs(params: &SensorParams, meter: &MeterSpec, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    lindblad_rhs_with(params, meter, rho, false)
}

pub fn lindblad_rhs_with(
    params: &SensorParams,
    meter: &MeterSpec,
    rho: &ComplexMatrix,
    include_free: bool,
) -> Result<ComplexMatrix> {
    let d = 2 * meter.n();
    if rho.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "joint state must be {d}x{d}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(JointGenerator::new(params, meter, include_free).apply(rho))
}

/// `|ψ⟩⟨ψ| ⊗ |g⟩⟨g|`.
pub fn initial_joint_state(psi0: &MeterState) -> ComplexMatrix {
    kron(&psi0.density(), &basis_op(2, 1, 1))
}

/// Joint state by direct integration of the master equation.
pub fn integrate_joint(
    params: &SensorParams,
    meter: &MeterSpec,
    psi0: &MeterState,
    t: f64,
    tol: f64,
    include_free: bool,
) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_dims(meter, psi0)?;
    let gen = JointGenerator::new(params, meter, include_free);
    integrate_ode(|_, r| gen.apply(r), &initial_joint_state(psi0), (0.0, t), tol)
}
