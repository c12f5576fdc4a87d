//! Liouvillian superoperator of the joint master equation and its spectrum.
//!
//! With column stacking, `vec(AρB) = (Bᵀ⊗A) vec(ρ)`, so the generator becomes
//!
//! ```text
//! L = −i(I⊗H − Hᵀ⊗I) + Σ_k r_k [L_k*⊗L_k − ½ I⊗L_k†L_k − ½ (L_k†L_k)ᵀ⊗I]
//! ```
//!
//! The null space is the steady manifold. Meter coherences contribute slow
//! modes whose real parts are close to `−Γ_N` and whose positions depend on
//! temperature; this is what lets the meter QFI grow like `t²` long after the
//! sensor has thermalized.

use crate::bath::SensorParams;
use crate::dynamics::{block_rates, JointGenerator, MeterSpec};
use crate::error::{Error, Result};
use crate::numerics::{self, c, eig, kron, unvec, vec, ComplexMatrix, Spectrum, C64};

/// Relative threshold (against `‖L‖_F`) below which an eigenvalue counts as zero.
pub const NULL_TOL: f64 = 1e-9;
/// Largest accepted condition number of the eigenbasis.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    pub matrix: ComplexMatrix,
    pub params: SensorParams,
    pub meter: MeterSpec,
    pub include_free: bool,
}

impl LiouvillianMatrix {
    /// Side of the density matrices it acts on (`2n`).
    pub fn state_dim(&self) -> usize {
        2 * self.meter.n()
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn null_threshold(&self) -> f64 {
        NULL_TOL * self.norm().max(f64::MIN_POSITIVE)
    }

    /// `L ρ` through the matrix form.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.state_dim();
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {d}x{d} state, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        unvec(&(&self.matrix * vec(rho)), d)
    }
}

/// Superoperator of the joint generator without the sensor free term.
pub fn build_superoperator(params: &SensorParams, meter: &MeterSpec) -> LiouvillianMatrix {
    build_superoperator_with(params, meter, false)
}

pub fn build_superoperator_with(params: &SensorParams, meter: &MeterSpec, include_free: bool) -> LiouvillianMatrix {
    let gen = JointGenerator::new(params, meter, include_free);
    let d = 2 * meter.n();
    let id = ComplexMatrix::identity(d, d);
    let h = gen.hamiltonian();
    let mut matrix = (kron(&id, h) - kron(&h.transpose(), &id)) * C64::new(0.0, -1.0);
    for (rate, l) in gen.jumps() {
        let ll = l.adjoint() * l;
        let term = kron(&l.conjugate(), l) - (kron(&id, &ll) + kron(&ll.transpose(), &id)) * c(0.5, 0.0);
        matrix += term * c(rate, 0.0);
    }
    LiouvillianMatrix {
        matrix,
        params: *params,
        meter: meter.clone(),
        include_free,
    }
}

/// Orders eigen-pairs by descending real part; near-equal real parts are
/// ordered by descending imaginary part so conjugate pairs come out stably.
fn order_by_real_part(values: &[C64], scale: f64) -> Vec<usize> {
    let tie = 1e-12 * scale.max(1.0);
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        if (x.re - y.re).abs() <= tie {
            y.im.total_cmp(&x.im)
        } else {
            y.re.total_cmp(&x.re)
        }
    });
    idx
}

/// Full spectrum sorted by descending real part.
pub fn sorted_spectrum(liou: &LiouvillianMatrix) -> Result<Spectrum> {
    let sp = eig(&liou.matrix)?;
    let order = order_by_real_part(&sp.eigenvalues, liou.norm());
    let eigenvalues = order.iter().map(|&i| sp.eigenvalues[i]).collect();
    let eigenvectors = sp.eigenvectors.map(|v| {
        ComplexMatrix::from_fn(v.nrows(), order.len(), |r, k| v[(r, order[k])])
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// The `k` eigenvalues with the largest real parts.
pub fn slow_spectrum(liou: &LiouvillianMatrix, k: usize) -> Result<Spectrum> {
    let total = liou.matrix.nrows();
    if k > total {
        return Err(Error::InvalidParameter(format!("asked for {k} eigenvalues of a {total}x{total} superoperator")));
    }
    let full = sorted_spectrum(liou)?;
    Ok(Spectrum {
        eigenvalues: full.eigenvalues[..k].to_vec(),
        eigenvectors: full.eigenvectors.map(|v| v.columns(0, k).into_owned()),
    })
}

/// Number of eigenvalues with `|λ| < NULL_TOL · ‖L‖`.
pub fn null_space_dimension(liou: &LiouvillianMatrix) -> Result<usize> {
    let thr = liou.null_threshold();
    Ok(numerics::eigenvalues(&liou.matrix)?.iter().filter(|z| z.norm() < thr).count())
}

/// Slow coherence eigenvalues `(λ₁, λ₂)` of a two-level meter with gap `omega`.
///
/// `λ₂ = ½[−(2N+1)γ − iΩ + α]` and `λ₁ = λ₂* = ½[−(2N+1)γ + iΩ + α*]`. Both vanish
/// at `N = 0` and at `Ω = 0`; the partner branches `½[−(2N+1)γ ∓ iΩ − α]` are the
/// fast modes with real part near `−(2N+1)γ`.
pub fn coherence_eigenvalues_closed_form(params: &SensorParams, omega: f64) -> (C64, C64) {
    let (slow, _) = block_rates(params.n_bar(), params.gamma(), omega);
    (slow.conj(), slow)
}

/// Eigen-decomposition `L = V Λ V⁻¹` kept for repeated propagation.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub values: Vec<C64>,
    right: ComplexMatrix,
    left: ComplexMatrix,
    null_count: usize,
    dim: usize,
}

impl ModeDecomposition {
    pub fn new(liou: &LiouvillianMatrix) -> Result<Self> {
        let sp = sorted_spectrum(liou)?;
        let right = sp.eigenvectors.ok_or(Error::IllConditioned(f64::INFINITY))?;
        let sv = numerics::svd(&right)?.singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let cond = smax / smin;
        if !(cond < MAX_CONDITION) {
            return Err(Error::IllConditioned(cond));
        }
        let left = right.clone().try_inverse().ok_or(Error::IllConditioned(cond))?;
        let thr = liou.null_threshold();
        let null_count = sp.eigenvalues.iter().filter(|z| z.norm() < thr).count();
        Ok(Self {
            values: sp.eigenvalues,
            right,
            left,
            null_count,
            dim: liou.state_dim(),
        })
    }

    pub fn null_count(&self) -> usize {
        self.null_count
    }

    /// `ρ(t)` from the null space plus the `slow_modes` slowest decaying modes
    /// (`None` keeps every mode).
    pub fn evolve(&self, rho0: &ComplexMatrix, t: f64, slow_modes: Option<usize>) -> Result<ComplexMatrix> {
        if rho0.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} state, got {1}x{2}",
                self.dim,
                rho0.nrows(),
                rho0.ncols()
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")));
        }
        let keep = match slow_modes {
            None => self.values.len(),
            Some(k) => (self.null_count + k).min(self.values.len()),
        };
        let coeffs = &self.left * vec(rho0);
        let mut out = nalgebra::DVector::<C64>::zeros(self.values.len());
        // sorted by descending real part, so the null space comes first
        for j in 0..keep {
            let w = coeffs[j] * (self.values[j] * t).exp();
            out.axpy(w, &self.right.column(j), c(1.0, 0.0));
        }
        unvec(&out, self.dim)
    }
}

/// Reconstructs `ρ(t)` from the spectral decomposition of `liou`, keeping
/// the null space and the `slow_modes` slowest modes (`None` = all).
pub fn spectral_decomposition_qfi_tail(
    liou: &LiouvillianMatrix,
    rho0: &ComplexMatrix,
    t: f64,
    slow_modes: Option<usize>,
) -> Result<ComplexMatrix> {
    ModeDecomposition::new(liou)?.evolve(rho0, t, slow_modes)
}
