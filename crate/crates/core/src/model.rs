//! Rotating-frame Hamiltonian, dissipators and the Liouvillian of the full
//! emitter–antenna system.
//!
//! Superoperators act on column-stacked density matrices: `ρ[i][j]` sits at
//! `i + D·j`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use alloc::{format, vec::Vec};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed, emitter_flip, DensityMatrix, Level, OperatorMatrix, Slot, SpaceConfig};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::C64;

/// Physical parameters of the hybrid system. Frequencies in rad/s, rates in
/// 1/s; couplings and drive are used exactly as given (no factors of 2π).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystemParams {
    pub omega_e: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_l: f64,
    pub omega_m1: f64,
    pub omega_m2: f64,
    pub kappa1: C64,
    pub kappa2: C64,
    pub drive: C64,
    pub gamma_rad1: f64,
    pub gamma_nonrad1: f64,
    pub gamma_rad2: f64,
    pub gamma_nonrad2: f64,
    pub gamma_sp_e1: f64,
    pub gamma_sp_e2: f64,
    pub gamma_12: f64,
    pub pump: f64,
    pub gamma_deph_1e: f64,
    pub gamma_deph_2e: f64,
    pub gamma_deph_12: f64,
}

impl SystemParams {
    /// Total loss rate Γ₁ of mode 1.
    pub fn gamma1(&self) -> f64 {
        self.gamma_rad1 + self.gamma_nonrad1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma_rad2 + self.gamma_nonrad2
    }

    /// Radiative efficiency of mode 1 (`NaN` when Γ₁ = 0).
    pub fn eta1(&self) -> f64 {
        self.gamma_rad1 / self.gamma1()
    }

    pub fn eta2(&self) -> f64 {
        self.gamma_rad2 / self.gamma2()
    }

    /// Detuning of mode `j` from the laser, `ω_mj − ω_L`.
    pub fn mode_detuning(&self, mode: u8) -> f64 {
        match mode {
            1 => self.omega_m1 - self.omega_l,
            _ => self.omega_m2 - self.omega_l,
        }
    }

    fn rates(&self) -> [(&'static str, f64); 11] {
        [
            ("gamma_rad1", self.gamma_rad1),
            ("gamma_nonrad1", self.gamma_nonrad1),
            ("gamma_rad2", self.gamma_rad2),
            ("gamma_nonrad2", self.gamma_nonrad2),
            ("gamma_sp_e1", self.gamma_sp_e1),
            ("gamma_sp_e2", self.gamma_sp_e2),
            ("gamma_12", self.gamma_12),
            ("pump", self.pump),
            ("gamma_deph_1e", self.gamma_deph_1e),
            ("gamma_deph_2e", self.gamma_deph_2e),
            ("gamma_deph_12", self.gamma_deph_12),
        ]
    }

    /// Checks finiteness, non-negative rates and non-zero mode losses.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.rates() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name, reason: format!("rate must be finite and ≥ 0, got {v}")
                });
            }
        }
        let freqs = [
            ("omega_e", self.omega_e),
            ("omega_1", self.omega_1),
            ("omega_2", self.omega_2),
            ("omega_l", self.omega_l),
            ("omega_m1", self.omega_m1),
            ("omega_m2", self.omega_m2),
            ("kappa1", self.kappa1.norm()),
            ("kappa2", self.kappa2.norm()),
            ("drive", self.drive.norm()),
        ];
        for (name, v) in freqs {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite, got {v}") });
            }
        }
        if self.gamma1() <= 0.0 {
            return Err(Error::ZeroModeLoss { mode: 1 });
        }
        if self.gamma2() <= 0.0 {
            return Err(Error::ZeroModeLoss { mode: 2 });
        }
        Ok(())
    }
}

/// One dissipator `γ (CρC† − ½{C†C, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseTerm {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn emitter_op(k: Level, l: Level, config: &SpaceConfig) -> OperatorMatrix {
    embed(&emitter_flip(k, l), Slot::Emitter, config).expect("3x3 emitter operator")
}

fn mode_op(mode: u8, config: &SpaceConfig) -> OperatorMatrix {
    let (n_max, slot) = match mode {
        1 => (config.n_max1, Slot::Mode1),
        _ => (config.n_max2, Slot::Mode2),
    };
    embed(&annihilation(n_max), slot, config).expect("local Fock dimension")
}

fn add(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.try_add(b).expect("equal dimensions")
}

fn mul(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.try_mul(b).expect("equal dimensions")
}

/// Embedded annihilation operator `a_j` (`mode` is 1 or 2).
pub fn mode_annihilation(mode: u8, config: &SpaceConfig) -> OperatorMatrix {
    mode_op(mode, config)
}

/// Coherent drive operator `a₁† + a₁` for a unit real drive.
pub fn unit_drive_operator(config: &SpaceConfig) -> OperatorMatrix {
    let a1 = mode_op(1, config);
    add(&a1, &a1.dagger())
}

/// Rotating-frame Hamiltonian (ħ = 1).
pub fn build_hamiltonian(params: &SystemParams, config: &SpaceConfig) -> OperatorMatrix {
    use Level::*;
    let s_ee = emitter_op(Excited, Excited, config);
    let s_11 = emitter_op(One, One, config);
    let s_22 = emitter_op(Two, Two, config);
    let a1 = mode_op(1, config);
    let a2 = mode_op(2, config);
    let a1d = a1.dagger();
    let a2d = a2.dagger();

    let mut h = s_ee.scale(real(params.omega_e - params.omega_l));
    h = add(&h, &s_11.scale(real(params.omega_1)));
    h = add(&h, &s_22.scale(real(params.omega_2)));
    h = add(&h, &mul(&a1d, &a1).scale(real(params.omega_m1 - params.omega_l)));
    h = add(&h, &mul(&a2d, &a2).scale(real(params.omega_m2 - params.omega_l)));

    for (kappa, ad, lower) in [(params.kappa1, &a1d, One), (params.kappa2, &a2d, Two)] {
        if kappa.norm() == 0.0 {
            continue;
        }
        let jc = mul(ad, &emitter_op(lower, Excited, config)).scale(kappa);
        h = add(&h, &add(&jc, &jc.dagger()));
    }
    if params.drive.norm() != 0.0 {
        let d = a1d.scale(params.drive);
        h = add(&h, &add(&d, &d.dagger()));
    }
    h
}

/// Dissipators of the full model; zero-rate channels are omitted.
pub fn collapse_terms(params: &SystemParams, config: &SpaceConfig) -> Vec<CollapseTerm> {
    use Level::*;
    let s11 = emitter_op(One, One, config);
    let s22 = emitter_op(Two, Two, config);
    let see = emitter_op(Excited, Excited, config);
    let sub = |a: &OperatorMatrix, b: &OperatorMatrix| a.try_sub(b).expect("equal dimensions");

    let candidates: [(f64, &dyn Fn() -> OperatorMatrix); 9] = [
        (params.gamma1(), &|| mode_op(1, config)),
        (params.gamma2(), &|| mode_op(2, config)),
        (params.gamma_sp_e1, &|| emitter_op(One, Excited, config)),
        (params.gamma_sp_e2, &|| emitter_op(Two, Excited, config)),
        (params.gamma_12, &|| emitter_op(One, Two, config)),
        (params.pump, &|| emitter_op(One, Two, config)),
        (params.gamma_deph_1e, &|| sub(&s11, &see)),
        (params.gamma_deph_2e, &|| sub(&s22, &see)),
        (params.gamma_deph_12, &|| sub(&s11, &s22)),
    ];
    candidates
        .iter()
        .filter(|(rate, _)| *rate > 0.0)
        .map(|(rate, op)| CollapseTerm { rate: *rate, operator: op() })
        .collect()
}

/// Sparse generator on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn from_csr(dim: usize, matrix: CsrMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(Self { dim, matrix })
    }

    /// Dimension `D` of the underlying Hilbert space (the superoperator is D²×D²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn apply_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.matrix.mul_vec(v)
    }

    /// `L[ρ]` as a matrix. Accepts any square matrix, not only valid states.
    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        let out = self.matrix.mul_vec(&crate::hilbert::vectorize(rho))?;
        Ok(DensityMatrix::from_vec(self.dim, &out)?.matrix().clone())
    }

    /// `Σ c_k L_k` over generators of equal dimension.
    pub fn linear_combination(parts: &[&Liouvillian], coeffs: &[C64]) -> Result<Self> {
        let dim = parts.first().map(|l| l.dim).unwrap_or(0);
        let mats: Vec<&CsrMatrix> = parts.iter().map(|l| &l.matrix).collect();
        Self::from_csr(dim, CsrMatrix::linear_combination(&mats, coeffs)?)
    }
}

/// Assembles `L[ρ] = −i[H, ρ] + Σ γ (CρC† − ½{C†C, ρ})`.
pub fn build_liouvillian(h: &OperatorMatrix, terms: &[CollapseTerm]) -> Result<Liouvillian> {
    let d = h.dim();
    for t in terms {
        if t.operator.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: t.operator.dim() });
        }
        if !(t.rate >= 0.0 && t.rate.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("collapse rate {} is invalid", t.rate),
            });
        }
    }

    // H_eff = −iH − ½ Σ γ C†C, so that L[ρ] = H_eff ρ + ρ H_eff† + Σ γ CρC†.
    let mut heff = h.scale(C64::new(0.0, -1.0));
    for t in terms {
        let cdc = t.operator.dagger().try_mul(&t.operator)?;
        heff = heff.try_sub(&cdc.scale(real(0.5 * t.rate)))?;
    }
    let heff_nz: Vec<(usize, usize, C64)> = heff.nonzeros().collect();
    let jumps: Vec<(f64, Vec<(usize, usize, C64)>)> =
        terms.iter().map(|t| (t.rate, t.operator.nonzeros().collect())).collect();

    let cap = 2 * heff_nz.len() * d + jumps.iter().map(|(_, nz)| nz.len() * nz.len()).sum::<usize>();
    let mut b = TripletBuilder::with_capacity(d * d, d * d, cap);
    for &(i, k, v) in &heff_nz {
        for j in 0..d {
            b.push(i + d * j, k + d * j, v);
        }
    }
    for &(j, l, v) in &heff_nz {
        let vc = v.conj();
        for i in 0..d {
            b.push(i + d * j, i + d * l, vc);
        }
    }
    for (rate, nz) in &jumps {
        for &(i, k, cik) in nz {
            let left = cik * *rate;
            for &(j, l, cjl) in nz {
                b.push(i + d * j, k + d * l, left * cjl.conj());
            }
        }
    }
    Liouvillian::from_csr(d, b.build())
}

/// Full-model generator for constant parameters.
pub fn system_liouvillian(params: &SystemParams, config: &SpaceConfig) -> Result<Liouvillian> {
    params.validate()?;
    build_liouvillian(&build_hamiltonian(params, config), &collapse_terms(params, config))
}
