//! Populations, photon statistics and the generated-photon count.

use alloc::{string::String, vec::Vec};

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, SpaceConfig};

/// Emitter populations `(ρ₁₁, ρ₂₂, ρ_ee)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub p1: f64,
    pub p2: f64,
    pub pe: f64,
}

impl Populations {
    pub fn sum(&self) -> f64 {
        self.p1 + self.p2 + self.pe
    }
}

/// Emitter populations of a three-level or full state. The emitter is the
/// slowest-varying factor, so each level owns a contiguous block of `D/3`
/// basis states and the partial trace is a block sum.
pub fn populations(rho: &DensityMatrix) -> Result<Populations> {
    let d = rho.dim();
    if d == 0 || d % 3 != 0 {
        return Err(Error::DimensionMismatch { expected: 3 * (d / 3).max(1), found: d });
    }
    let block = d / 3;
    let sum = |level: usize| (level * block..(level + 1) * block).map(|i| rho.population(i)).sum();
    Ok(Populations { p1: sum(0), p2: sum(1), pe: sum(2) })
}

fn check_full(rho: &DensityMatrix, config: &SpaceConfig) -> Result<()> {
    if rho.dim() != config.dim() {
        return Err(Error::DimensionMismatch { expected: config.dim(), found: rho.dim() });
    }
    Ok(())
}

/// Photon-number distribution of one mode (`mode` is 1 or 2).
pub fn photon_distribution(rho: &DensityMatrix, mode: u8, config: &SpaceConfig) -> Result<Vec<f64>> {
    check_full(rho, config)?;
    let n_max = match mode {
        1 => config.n_max1,
        2 => config.n_max2,
        _ => {
            return Err(Error::InvalidParameter { name: "mode", reason: alloc::format!("expected 1 or 2, got {mode}") })
        }
    };
    let mut p = alloc::vec![0.0; n_max + 1];
    for i in 0..rho.dim() {
        let (_, n1, n2) = config.decode(i);
        p[if mode == 1 { n1 } else { n2 }] += rho.population(i);
    }
    Ok(p)
}

/// `⟨a_j†a_j⟩`.
pub fn mean_photon(rho: &DensityMatrix, mode: u8, config: &SpaceConfig) -> Result<f64> {
    Ok(photon_distribution(rho, mode, config)?.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
}

/// Population of the highest retained Fock state of a mode.
pub fn fock_ceiling_population(rho: &DensityMatrix, mode: u8, config: &SpaceConfig) -> Result<f64> {
    Ok(*photon_distribution(rho, mode, config)?.last().expect("at least the vacuum"))
}

/// Mean photon numbers below this are treated as zero by [`g2_zero`].
pub const G2_MEAN_FLOOR: f64 = 1e-30;

/// `⟨a†a†aa⟩/⟨a†a⟩²` for one mode.
pub fn g2_zero(rho: &DensityMatrix, mode: u8, config: &SpaceConfig) -> Result<f64> {
    let p = photon_distribution(rho, mode, config)?;
    let n_max = p.len() - 1;
    if n_max < 2 {
        return Err(Error::TruncationTooSmall { n_max });
    }
    let mean: f64 = p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    if !(mean > G2_MEAN_FLOOR) {
        return Err(Error::UndefinedCorrelation { mean });
    }
    let pairs: f64 = p.iter().enumerate().map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p).sum();
    Ok((pairs / (mean * mean)).max(0.0))
}

/// A named observable sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub label: String,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>, grid: &TimeGrid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "series", reason: "non-finite sample".into() });
        }
        Ok(Self { label: label.into(), values })
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Photons generated in mode 2 up to each sample: `Γ₂ ∫ ⟨n₂⟩ dt` by the
/// trapezoidal rule on the sample grid.
pub fn n_gen(n2: &ObservableSeries, grid: &TimeGrid, gamma2: f64) -> Result<ObservableSeries> {
    if n2.values.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: n2.values.len() });
    }
    let t = grid.times();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(t.len());
    out.push(0.0);
    for k in 1..t.len() {
        acc += 0.5 * (n2.values[k] + n2.values[k - 1]) * (t[k] - t[k - 1]) * gamma2;
        out.push(acc);
    }
    ObservableSeries::new("n_gen", out, grid)
}
