//! Three-level model obtained by adiabatically eliminating both antenna
//! modes, with its closed-form stationary results.

use alloc::vec::Vec;

use crate::dynamics::{evolve, steady_state, EvolveOptions, TimeDependentGenerator, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{emitter_flip, DensityMatrix, Level, OperatorMatrix};
use crate::math::sqrt;
use crate::model::{build_liouvillian, CollapseTerm, Liouvillian, SystemParams};
use crate::C64;

/// Derived parameters of the eliminated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Lamb-shifted excited-level frequency.
    pub omega_e_eff: f64,
    /// Effective drive for the configured laser drive.
    pub drive_eff: C64,
    /// Effective drive per unit laser drive; `drive_eff = drive_gain · Ω`.
    pub drive_gain: C64,
    pub gamma1_eff: f64,
    pub gamma2_eff: f64,
    /// `ω_e^eff − ω_L − ω_1`.
    pub delta1: f64,
    /// Total decay rate of the `|1⟩–|e⟩` coherence.
    pub gamma_1e: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_l: f64,
    pub gamma_12: f64,
    pub pump: f64,
    pub gamma_deph_1e: f64,
    pub gamma_deph_2e: f64,
    pub gamma_deph_12: f64,
}

fn lorentz_denominator(detuning: f64, gamma: f64) -> f64 {
    detuning * detuning + 0.25 * gamma * gamma
}

pub fn effective_params(params: &SystemParams) -> Result<EffectiveParams> {
    params.validate()?;
    let (g1, g2) = (params.gamma1(), params.gamma2());
    let (d1, d2) = (params.mode_detuning(1), params.mode_detuning(2));
    let (k1, k2) = (params.kappa1.norm_sqr(), params.kappa2.norm_sqr());
    let (den1, den2) = (lorentz_denominator(d1, g1), lorentz_denominator(d2, g2));

    let omega_e_eff = params.omega_e + k1 * d1 / den1 + k2 * d2 / den2;
    let drive_gain = C64::new(0.0, -1.0) * params.kappa1.conj() / C64::new(0.5 * g1, d1);
    let gamma1_eff = params.gamma_sp_e1 + k1 * g1 / den1;
    let gamma2_eff = params.gamma_sp_e2 + k2 * g2 / den2;
    let gamma_1e = gamma1_eff + gamma2_eff + params.gamma_deph_12 + 4.0 * params.gamma_deph_1e + params.gamma_deph_2e;
    Ok(EffectiveParams {
        omega_e_eff,
        drive_eff: drive_gain * params.drive,
        drive_gain,
        gamma1_eff,
        gamma2_eff,
        delta1: omega_e_eff - params.omega_l - params.omega_1,
        gamma_1e,
        omega_1: params.omega_1,
        omega_2: params.omega_2,
        omega_l: params.omega_l,
        gamma_12: params.gamma_12,
        pump: params.pump,
        gamma_deph_1e: params.gamma_deph_1e,
        gamma_deph_2e: params.gamma_deph_2e,
        gamma_deph_12: params.gamma_deph_12,
    })
}

impl EffectiveParams {
    /// Copy with a different laser drive.
    pub fn with_drive(&self, drive: C64) -> Self {
        Self { drive_eff: self.drive_gain * drive, ..*self }
    }
}

fn flip(k: Level, l: Level) -> OperatorMatrix {
    emitter_flip(k, l)
}

/// `Ω σ_e1 + Ω* σ_1e` on the emitter.
pub(crate) fn drive_coupling(drive_eff: C64) -> OperatorMatrix {
    let up = flip(Level::Excited, Level::One).scale(drive_eff);
    up.try_add(&up.dagger()).expect("3x3")
}

pub fn effective_hamiltonian(eff: &EffectiveParams) -> OperatorMatrix {
    use Level::*;
    let mut h = flip(Excited, Excited).scale(C64::new(eff.omega_e_eff - eff.omega_l, 0.0));
    h = h.try_add(&flip(One, One).scale(C64::new(eff.omega_1, 0.0))).expect("3x3");
    h = h.try_add(&flip(Two, Two).scale(C64::new(eff.omega_2, 0.0))).expect("3x3");
    h.try_add(&drive_coupling(eff.drive_eff)).expect("3x3")
}

/// Dissipators of the eliminated model; zero-rate channels are omitted.
pub fn effective_collapse_terms(eff: &EffectiveParams) -> Vec<CollapseTerm> {
    use Level::*;
    let diff = |a: Level, b: Level| flip(a, a).try_sub(&flip(b, b)).expect("3x3");
    [
        (eff.gamma1_eff, flip(One, Excited)),
        (eff.gamma2_eff, flip(Two, Excited)),
        (eff.gamma_12, flip(One, Two)),
        (eff.pump, flip(One, Two)),
        (eff.gamma_deph_1e, diff(One, Excited)),
        (eff.gamma_deph_2e, diff(Two, Excited)),
        (eff.gamma_deph_12, diff(One, Two)),
    ]
    .into_iter()
    .filter(|(rate, _)| *rate > 0.0)
    .map(|(rate, operator)| CollapseTerm { rate, operator })
    .collect()
}

pub fn effective_liouvillian(eff: &EffectiveParams) -> Result<Liouvillian> {
    build_liouvillian(&effective_hamiltonian(eff), &effective_collapse_terms(eff))
}

pub fn steady_state_effective(eff: &EffectiveParams) -> Result<DensityMatrix> {
    steady_state(&effective_liouvillian(eff)?)
}

/// Evolution under constant effective parameters.
pub fn evolve_effective(
    eff: &EffectiveParams,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    evolve(&TimeDependentGenerator::constant(effective_liouvillian(eff)?), rho0, grid, opts)
}

/// Mode occupations reconstructed from the emitter state, using
/// `params.drive` as the instantaneous laser drive.
pub fn adiabatic_photon_numbers(rho_qd: &DensityMatrix, params: &SystemParams) -> Result<(f64, f64)> {
    if rho_qd.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rho_qd.dim() });
    }
    let m = rho_qd.matrix();
    let rho_ee = m[(2, 2)].re;
    let rho_1e = m[(0, 2)];
    let den1 = lorentz_denominator(params.mode_detuning(1), params.gamma1());
    let den2 = lorentz_denominator(params.mode_detuning(2), params.gamma2());
    let cross = 2.0 * (params.drive * params.kappa1.conj() * rho_1e).re;
    let n1 = (params.kappa1.norm_sqr() * rho_ee + cross + params.drive.norm_sqr()) / den1;
    let n2 = params.kappa2.norm_sqr() * rho_ee / den2;
    Ok((n1, n2))
}

/// The ratio ξ with `ρ₂₂ = 1/(1+ξ)` in the unpumped stationary state.
pub fn xi(drive_eff: C64, eff: &EffectiveParams) -> Result<f64> {
    let drive2 = drive_eff.norm_sqr();
    if drive2 == 0.0 {
        return Err(Error::ZeroDrive);
    }
    if eff.gamma2_eff <= 0.0 {
        return Err(Error::InvalidParameter { name: "gamma2_eff", reason: "must be positive".into() });
    }
    if eff.gamma_12 == 0.0 {
        return Ok(0.0);
    }
    let g = eff.gamma_1e;
    let bracket =
        2.0 + (eff.gamma1_eff + eff.gamma2_eff) * (g * g + 4.0 * eff.delta1 * eff.delta1) / (4.0 * g * drive2);
    Ok(eff.gamma_12 / eff.gamma2_eff * bracket)
}

/// `1/(1+ξ)` at the configured drive.
pub fn stationary_rho22(eff: &EffectiveParams) -> Result<f64> {
    Ok(1.0 / (1.0 + xi(eff.drive_eff, eff)?))
}

/// Drive threshold for efficient triggered generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// How far above `value` the drive should sit for efficient operation.
    pub recommended_multiplier: f64,
}

impl Threshold {
    pub fn recommended_drive(&self) -> f64 {
        self.value * self.recommended_multiplier
    }
}

/// Resonant drive threshold `Γ₁√(Γ₂γ¹²)/(2|κ₁κ₂|)·(|κ₁|²/Γ₁ + |κ₂|²/Γ₂)`.
pub fn threshold(params: &SystemParams) -> Result<Threshold> {
    params.validate()?;
    let (k1, k2) = (params.kappa1.norm(), params.kappa2.norm());
    if k1 == 0.0 || k2 == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let (g1, g2) = (params.gamma1(), params.gamma2());
    let value = g1 * sqrt(g2 * params.gamma_12) / (2.0 * k1 * k2) * (k1 * k1 / g1 + k2 * k2 / g2);
    Ok(Threshold { value, recommended_multiplier: 10.0 })
}
