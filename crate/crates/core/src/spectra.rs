//! Lorentzian fits of classical antenna spectra and the rates and couplings
//! derived from them.

use alloc::{format, string::String, vec::Vec};

use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Scattered,
    Absorbed,
}

impl Channel {
    pub fn from_label(label: &str) -> Result<Self> {
        match label.trim().to_ascii_lowercase().as_str() {
            "scattered" | "sca" | "scattering" => Ok(Self::Scattered),
            "absorbed" | "abs" | "absorption" => Ok(Self::Absorbed),
            other => Err(Error::InvalidParameter { name: "channel", reason: format!("unknown channel `{other}`") }),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Scattered => "scattered",
            Self::Absorbed => "absorbed",
        }
    }
}

/// Sampled power spectra, possibly holding both channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples {
    pub source: String,
    points: Vec<(f64, f64, Channel)>,
}

impl SpectrumSamples {
    /// Validates finite, non-negative powers and strictly increasing
    /// frequencies within each channel.
    pub fn new(source: impl Into<String>, points: Vec<(f64, f64, Channel)>) -> Result<Self> {
        for ch in [Channel::Scattered, Channel::Absorbed] {
            let mut last = f64::NEG_INFINITY;
            for &(w, p, _) in points.iter().filter(|(_, _, c)| *c == ch) {
                if !w.is_finite() || !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "spectrum",
                        reason: format!("invalid sample ({w}, {p}) in {} channel", ch.label()),
                    });
                }
                if w <= last {
                    return Err(Error::InvalidParameter {
                        name: "spectrum",
                        reason: format!("frequencies not strictly increasing at {w} in {} channel", ch.label()),
                    });
                }
                last = w;
            }
        }
        Ok(Self { source: source.into(), points })
    }

    pub fn points(&self) -> &[(f64, f64, Channel)] {
        &self.points
    }

    /// `(frequencies, powers)` of one channel.
    pub fn channel(&self, channel: Channel) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().filter(|(_, _, c)| *c == channel).map(|&(w, p, _)| (w, p)).unzip()
    }
}

/// `A·(Γ/2)² / ((ω−ω₀)² + (Γ/2)²)`.
pub fn lorentzian(omega: f64, center: f64, width: f64, amplitude: f64) -> f64 {
    let hw = 0.5 * width;
    amplitude * hw * hw / ((omega - center) * (omega - center) + hw * hw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    /// Full width at half maximum.
    pub width: f64,
    pub amplitude: f64,
    /// Euclidean norm of the residual, in power units.
    pub residual_norm: f64,
    pub iterations: usize,
}

impl LorentzianFit {
    pub fn evaluate(&self, omega: f64) -> f64 {
        lorentzian(omega, self.center, self.width, self.amplitude)
    }

    /// Integrated weight up to the constant π/2.
    pub fn weight(&self) -> f64 {
        self.amplitude * self.width
    }
}

const MAX_ITERATIONS: usize = 500;
const GRADIENT_TOL: f64 = 1e-9;

/// Fits one channel, optionally restricted to `window = (lo, hi)`.
pub fn fit_lorentzian(
    samples: &SpectrumSamples,
    channel: Channel,
    window: Option<(f64, f64)>,
) -> Result<LorentzianFit> {
    let (w, p) = samples.channel(channel);
    let (x, y): (Vec<f64>, Vec<f64>) =
        w.into_iter().zip(p).filter(|(w, _)| window.map_or(true, |(lo, hi)| *w >= lo && *w <= hi)).unzip();
    fit_lorentzian_xy(&x, &y)
}

fn initial_guess(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (imax, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let half = 0.5 * ymax;
    let crossing = |range: &mut dyn Iterator<Item = usize>, step_back: isize| -> Option<f64> {
        for i in range {
            if y[i] < half {
                let j = (i as isize + step_back) as usize;
                let f = (half - y[i]) / (y[j] - y[i]);
                return Some(x[i] + f * (x[j] - x[i]));
            }
        }
        None
    };
    let left = crossing(&mut (0..imax).rev(), 1);
    let right = crossing(&mut (imax + 1..x.len()), -1);
    let span = x[x.len() - 1] - x[0];
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[imax] - l),
        (None, Some(r)) => 2.0 * (r - x[imax]),
        (None, None) => span,
    };
    (ymax, x[imax], width.max(span * 1e-6))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m =
        [[a[0][0], a[0][1], a[0][2], b[0]], [a[1][0], a[1][1], a[1][2], b[1]], [a[2][0], a[2][1], a[2][2], b[2]]];
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Damped Gauss–Newton (Levenberg–Marquardt) fit in coordinates where the
/// frequency span and the peak height are of order one.
pub fn fit_lorentzian_xy(x: &[f64], y: &[f64]) -> Result<LorentzianFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 5 {
        return Err(Error::DegenerateData("fewer than five samples in the fit window"));
    }
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(ymax > 0.0) || ymax - ymin <= 1e-12 * ymax {
        return Err(Error::DegenerateData("spectrum is flat"));
    }
    let (a0, c0, w0) = initial_guess(x, y);
    let x0 = c0;
    let s = x[x.len() - 1] - x[0];
    let xs: Vec<f64> = x.iter().map(|v| (v - x0) / s).collect();
    let ys: Vec<f64> = y.iter().map(|v| v / ymax).collect();

    // Parameters (A, c, w) of A / (1 + 4(x−c)²/w²).
    let residuals = |p: &[f64; 3]| -> Vec<f64> {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let u = 2.0 * (x - p[1]) / p[2];
                p[0] / (1.0 + u * u) - y
            })
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let y_norm = sqrt(cost(&ys));

    let mut p = [a0 / ymax, 0.0, w0 / s];
    let mut r = residuals(&p);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        let mut j_norm2 = 0.0;
        for (&x, &ri) in xs.iter().zip(&r) {
            let u = 2.0 * (x - p[1]) / p[2];
            let d = 1.0 + u * u;
            let g = [1.0 / d, 4.0 * p[0] * u / (p[2] * d * d), 2.0 * p[0] * u * u / (p[2] * d * d)];
            for a in 0..3 {
                jtr[a] += g[a] * ri;
                for b in 0..3 {
                    jtj[a][b] += g[a] * g[b];
                }
                j_norm2 += g[a] * g[a];
            }
        }
        let grad = jtr.iter().map(|v| v * v).sum::<f64>();
        if sqrt(grad) <= GRADIENT_TOL * sqrt(j_norm2) * y_norm {
            return Ok(LorentzianFit {
                center: x0 + p[1] * s,
                width: p[2] * s,
                amplitude: p[0] * ymax,
                residual_norm: sqrt(c) * ymax,
                iterations: iteration - 1,
            });
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for a in 0..3 {
                damped[a][a] += lambda * jtj[a][a].max(1e-300);
            }
            let Some(step) = solve3(damped, [-jtr[0], -jtr[1], -jtr[2]]) else {
                lambda *= 4.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            if trial[0] >= 0.0 && trial[2] > 0.0 {
                let rt = residuals(&trial);
                let ct = cost(&rt);
                if ct <= c {
                    let stalled = (0..3).all(|k| step[k].abs() <= 1e-15 * (p[k].abs() + 1e-15));
                    p = trial;
                    r = rt;
                    c = ct;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = !stalled;
                    if stalled {
                        // No representable progress left: accept as converged.
                        return Ok(LorentzianFit {
                            center: x0 + p[1] * s,
                            width: p[2] * s,
                            amplitude: p[0] * ymax,
                            residual_norm: sqrt(c) * ymax,
                            iterations: iteration,
                        });
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            return Err(Error::FitNonConvergence { iterations: iteration });
        }
    }
    Err(Error::FitNonConvergence { iterations: MAX_ITERATIONS })
}

/// Loss rates of one antenna mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRates {
    pub gamma_rad: f64,
    pub gamma_nonrad: f64,
    pub gamma_total: f64,
    pub eta: f64,
}

impl LossRates {
    pub fn from_components(gamma_rad: f64, gamma_nonrad: f64) -> Result<Self> {
        let total = gamma_rad + gamma_nonrad;
        if !(gamma_rad >= 0.0 && gamma_nonrad >= 0.0 && total > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma_rad",
                reason: format!("rates must be ≥ 0 with a positive sum, got {gamma_rad} and {gamma_nonrad}"),
            });
        }
        Ok(Self { gamma_rad, gamma_nonrad, gamma_total: total, eta: gamma_rad / total })
    }
}

/// Splits a resonance into radiative and nonradiative loss.
///
/// The scattered and absorbed powers of one resonance are proportional to
/// its radiative and nonradiative rates, so each channel is weighted by its
/// integrated Lorentzian area `A·Γ`. The total width is the weight-averaged
/// fitted width.
pub fn extract_rates(fit_sca: &LorentzianFit, fit_abs: &LorentzianFit) -> Result<LossRates> {
    let (ws, wa) = (fit_sca.weight(), fit_abs.weight());
    if !(ws >= 0.0 && wa >= 0.0 && ws + wa > 0.0) {
        return Err(Error::DegenerateData("both channels have zero weight"));
    }
    let total = (ws * fit_sca.width + wa * fit_abs.width) / (ws + wa);
    if ws > 0.0 && wa > 0.0 && (fit_sca.center - fit_abs.center).abs() > 0.5 * total {
        return Err(Error::DisjointResonances { center_a: fit_sca.center, center_b: fit_abs.center });
    }
    let eta = ws / (ws + wa);
    Ok(LossRates { gamma_rad: eta * total, gamma_nonrad: (1.0 - eta) * total, gamma_total: total, eta })
}

pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
pub const REDUCED_PLANCK: f64 = 1.054571817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Emitter properties entering the free-space emission rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterPhysical {
    /// Transition dipole moment (C·m).
    pub dipole: f64,
    /// Relative permittivity of the host.
    pub permittivity: f64,
    /// Transition angular frequency (rad/s).
    pub omega: f64,
}

impl EmitterPhysical {
    pub fn validate(&self) -> Result<()> {
        if !(self.dipole >= 0.0 && self.dipole.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dipole",
                reason: format!("must be ≥ 0, got {}", self.dipole),
            });
        }
        if !(self.permittivity >= 1.0 && self.permittivity.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "permittivity",
                reason: format!("must be ≥ 1, got {}", self.permittivity),
            });
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega", reason: format!("must be ≥ 0, got {}", self.omega)
            });
        }
        Ok(())
    }
}

/// Free-space spontaneous emission rate `ω³√ε d² / (3π ε₀ ħ c³)`.
pub fn weisskopf_wigner(phys: &EmitterPhysical) -> Result<f64> {
    phys.validate()?;
    let w = phys.omega;
    let c = SPEED_OF_LIGHT;
    Ok(w * w * w * sqrt(phys.permittivity) * phys.dipole * phys.dipole
        / (3.0 * core::f64::consts::PI * VACUUM_PERMITTIVITY * REDUCED_PLANCK * c * c * c))
}

fn check_purcell_inputs(eta: f64, gamma: f64, gamma_sp: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter { name: "eta", reason: format!("must lie in (0, 1], got {eta}") });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter { name: "gamma", reason: format!("must be positive, got {gamma}") });
    }
    if !(gamma_sp > 0.0 && gamma_sp.is_finite()) {
        return Err(Error::InvalidParameter { name: "gamma_sp", reason: format!("must be positive, got {gamma_sp}") });
    }
    Ok(())
}

/// Far-field scattering enhancement `1 + η·4|κ|²/(Γγ_sp)` of a resonant mode.
pub fn purcell_ratio(kappa: f64, eta: f64, gamma: f64, gamma_sp: f64) -> Result<f64> {
    check_purcell_inputs(eta, gamma, gamma_sp)?;
    Ok(1.0 + eta * 4.0 * kappa * kappa / (gamma * gamma_sp))
}

/// Coupling `|κ| = √((ratio − 1)Γγ_sp/(4η))` from an enhancement ratio.
pub fn coupling_from_purcell(ratio: f64, eta: f64, gamma: f64, gamma_sp: f64) -> Result<f64> {
    check_purcell_inputs(eta, gamma, gamma_sp)?;
    if !ratio.is_finite() || ratio < 1.0 {
        return Err(Error::NoEnhancement(ratio));
    }
    Ok(sqrt((ratio - 1.0) * gamma * gamma_sp / (4.0 * eta)))
}
