#![allow(dead_code)]

use nanosps_core::{CollapseTerm, OperatorMatrix, SystemParams, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Antenna and emitter rates used throughout the dynamics scenarios
/// (Ω = 5×10¹¹, everything resonant, ω₁ = ω₂ = 0).
pub fn antenna_params() -> SystemParams {
    SystemParams {
        kappa1: C64::new(5.73e11, 0.0),
        kappa2: C64::new(5.76e11, 0.0),
        drive: C64::new(5e11, 0.0),
        gamma_rad1: 6.8e13,
        gamma_nonrad1: 6.8e13,
        gamma_rad2: 1.0e14,
        gamma_nonrad2: 2.2e14,
        gamma_sp_e1: 1e8,
        gamma_deph_1e: 1e9,
        gamma_deph_2e: 1e9,
        gamma_deph_12: 1e8,
        ..Default::default()
    }
}

pub fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |_, _| random_c64(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> OperatorMatrix {
    let a = random_matrix(rng, dim);
    a.try_add(&a.dagger()).unwrap().scale(C64::new(0.5, 0.0))
}

pub fn random_terms(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<CollapseTerm> {
    (0..count).map(|_| CollapseTerm { rate: rng.random_range(0.1..2.0), operator: random_matrix(rng, dim) }).collect()
}

/// `−i[H, ρ] + Σ γ (CρC† − ½{C†C, ρ})` evaluated with plain matrix products.
pub fn lindblad_rhs(h: &OperatorMatrix, terms: &[CollapseTerm], rho: &OperatorMatrix) -> OperatorMatrix {
    let mul = |a: &OperatorMatrix, b: &OperatorMatrix| a.try_mul(b).unwrap();
    let mut out = mul(h, rho).try_sub(&mul(rho, h)).unwrap().scale(C64::new(0.0, -1.0));
    for t in terms {
        let c = &t.operator;
        let cd = c.dagger();
        let cdc = mul(&cd, c);
        let jump = mul(&mul(c, rho), &cd);
        let anti = mul(&cdc, rho).try_add(&mul(rho, &cdc)).unwrap().scale(C64::new(0.5, 0.0));
        out = out.try_add(&jump.try_sub(&anti).unwrap().scale(C64::new(t.rate, 0.0))).unwrap();
    }
    out
}

pub fn max_abs_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    a.try_sub(b).unwrap().max_abs()
}
