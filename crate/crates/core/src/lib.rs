//! Ancilla-assisted quantum thermometry.
//!
//! A two-level sensor thermalizes with a bosonic bath while a bath-isolated
//! meter couples to it through `H = M ⊗ |e⟩⟨e|`. Temperature information that
//! the sensor holds in populations is transferred into meter coherences,
//! where it keeps accumulating long after the sensor has reached its Gibbs
//! state. This crate solves the joint dynamics (closed form and by direct
//! integration), evaluates the quantum Fisher information for temperature,
//! analyses the Liouvillian spectrum and optimizes meter preparation.
//!
//! Units are reduced throughout: `ħ = k_B = 1`, the bath coupling `γ` sets the
//! rate unit and the sensor frequency `ω` sets the energy unit, so the
//! temperature is `τ = k_B T / ħω` and QFI values are dimensionless.
//!
//! Basis conventions:
//! - the sensor basis is ordered `{|e⟩, |g⟩}` (index 0 is the excited state);
//! - joint states are ordered meter ⊗ sensor, i.e. index `2m + s`;
//! - matrices are vectorized by stacking columns, `vec(AρB) = (Bᵀ⊗A) vec(ρ)`.

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod optimize;
pub mod qfi;
pub mod spectrum;

pub use bath::{SensorParams, ThermalRates};
pub use dynamics::{CoherenceBlock, MeterSpec, MeterState};
pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, Spectrum, C64};
pub use qfi::{QfiMethod, QfiResult};
