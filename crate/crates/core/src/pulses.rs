//! Gaussian pulse trains for the laser drive and the incoherent pump.

use alloc::{format, vec::Vec};

use crate::dynamics::GeneratorTerm;
use crate::effective::{drive_coupling, EffectiveParams};
use crate::error::{Error, Result};
use crate::hilbert::{embed, emitter_flip, Level, OperatorMatrix, Slot, SpaceConfig};
use crate::math::exp;
use crate::model::{build_liouvillian, unit_drive_operator, CollapseTerm, Liouvillian};

/// One Gaussian `amplitude·exp(−(t−center)²/2τ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Sum of Gaussian pulses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseTrain {
    pulses: Vec<Pulse>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseTarget {
    /// Scales a real laser drive `Ω(t)`.
    Drive,
    /// Scales the rate `P(t)` of the `σ₁₂` pump dissipator.
    Pump,
}

/// Which model a pulse addend is assembled for.
#[derive(Debug, Clone, Copy)]
pub enum ModelSpace<'a> {
    Full(&'a SpaceConfig),
    Effective(&'a EffectiveParams),
}

impl PulseTrain {
    /// Pulses of common amplitude and width `τ` at the given centers.
    pub fn new(amplitude: f64, width: f64, centers: &[f64]) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter { name: "width", reason: format!("must be positive, got {width}") });
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("must be finite, got {amplitude}"),
            });
        }
        if let Some(c) = centers.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter { name: "centers", reason: format!("non-finite center {c}") });
        }
        Ok(Self { pulses: centers.iter().map(|&center| Pulse { amplitude, center, width }).collect() })
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn concat(&self, other: &PulseTrain) -> PulseTrain {
        let mut pulses = self.pulses.clone();
        pulses.extend_from_slice(&other.pulses);
        PulseTrain { pulses }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.pulses
            .iter()
            .map(|p| {
                let x = (t - p.center) / p.width;
                p.amplitude * exp(-0.5 * x * x)
            })
            .sum()
    }

    pub fn min_width(&self) -> Option<f64> {
        self.pulses.iter().map(|p| p.width).reduce(f64::min)
    }

    /// Rejects negative pump amplitudes (a Lindblad rate must stay ≥ 0).
    pub fn validate_for(&self, target: PulseTarget) -> Result<()> {
        if target == PulseTarget::Pump {
            if let Some(p) = self.pulses.iter().find(|p| p.amplitude < 0.0) {
                return Err(Error::InvalidParameter {
                    name: "amplitude",
                    reason: format!("pump amplitude must be ≥ 0, got {}", p.amplitude),
                });
            }
        }
        Ok(())
    }

    /// The addend `f(t)·ΔL` this train contributes to a time-dependent generator.
    pub fn generator_term(&self, target: PulseTarget, space: ModelSpace<'_>) -> Result<GeneratorTerm> {
        self.validate_for(target)?;
        let delta = unit_delta(target, space)?;
        let train = self.clone();
        let label = match target {
            PulseTarget::Drive => "drive",
            PulseTarget::Pump => "pump",
        };
        let term = GeneratorTerm::new(label, delta, move |t| train.evaluate(t));
        Ok(match self.min_width() {
            Some(w) => term.with_max_step(w),
            None => term,
        })
    }
}

/// Generator of a unit drive (commutator part only) or a unit-rate pump.
pub fn unit_delta(target: PulseTarget, space: ModelSpace<'_>) -> Result<Liouvillian> {
    match (target, space) {
        (PulseTarget::Drive, ModelSpace::Full(cfg)) => build_liouvillian(&unit_drive_operator(cfg), &[]),
        (PulseTarget::Drive, ModelSpace::Effective(eff)) => build_liouvillian(&drive_coupling(eff.drive_gain), &[]),
        (PulseTarget::Pump, ModelSpace::Full(cfg)) => {
            let op = embed(&emitter_flip(Level::One, Level::Two), Slot::Emitter, cfg)?;
            build_liouvillian(&OperatorMatrix::zeros(cfg.dim()), &[CollapseTerm { rate: 1.0, operator: op }])
        }
        (PulseTarget::Pump, ModelSpace::Effective(_)) => build_liouvillian(
            &OperatorMatrix::zeros(3),
            &[CollapseTerm { rate: 1.0, operator: emitter_flip(Level::One, Level::Two) }],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_shape() {
        let p = PulseTrain::new(2e12, 1e-9, &[4e-9]).unwrap();
        assert_eq!(p.evaluate(4e-9), 2e12);
        assert!((p.evaluate(5e-9) - 2e12 * exp(-0.5)).abs() < 1e-3);
        assert!(PulseTrain::new(1.0, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn concatenation_is_additive() {
        let a = PulseTrain::new(1.0, 0.5, &[0.0, 3.0]).unwrap();
        let b = PulseTrain::new(-2.0, 1.5, &[1.0]).unwrap();
        let ab = a.concat(&b);
        for t in [-1.0, 0.0, 0.7, 2.0, 5.0] {
            assert!((ab.evaluate(t) - a.evaluate(t) - b.evaluate(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_pump_rejected() {
        let p = PulseTrain::new(-1.0, 1.0, &[0.0]).unwrap();
        assert!(p.validate_for(PulseTarget::Drive).is_ok());
        assert!(p.generator_term(PulseTarget::Pump, ModelSpace::Full(&SpaceConfig::new(1, 1))).is_err());
    }

    #[test]
    fn zero_amplitude_addend_vanishes() {
        let p = PulseTrain::new(0.0, 1.0, &[0.0, 2.0]).unwrap();
        let term = p.generator_term(PulseTarget::Drive, ModelSpace::Full(&SpaceConfig::new(2, 1))).unwrap();
        assert!((0..10).all(|k| (term.envelope)(k as f64 * 0.3) == 0.0));
    }
}
