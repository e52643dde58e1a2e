mod common;

use common::antenna_params;
use nanosps_core::dynamics::distance;
use nanosps_core::pulses::ModelSpace;
use nanosps_core::{
    effective_liouvillian, effective_params, evolve, steady_state_effective, EvolveOptions, PulseTarget, PulseTrain,
    SystemParams, TimeDependentGenerator, TimeGrid, C64,
};
use proptest::prelude::*;

#[test]
fn pulsed_sequence_envelopes() {
    let drive = PulseTrain::new(2e12, 1e-9, &[4e-9, 28e-9, 64e-9]).unwrap();
    let pump = PulseTrain::new(2e12, 1e-9, &[16e-9, 40e-9]).unwrap();
    for &c in &[4e-9, 28e-9, 64e-9] {
        assert!((drive.evaluate(c) / 2e12 - 1.0).abs() < 1e-20 + f64::EPSILON);
        assert!(pump.evaluate(c) < 1e-20 * 2e12);
        assert!((drive.evaluate(c + 1e-9) / (2e12 * (-0.5f64).exp()) - 1.0).abs() < 1e-14);
    }
    for &c in &[16e-9, 40e-9] {
        assert!((pump.evaluate(c) / 2e12 - 1.0).abs() < 1e-15);
        assert!(drive.evaluate(c) < 1e-20 * 2e12);
    }
    // drive and pump never overlap appreciably on the 0–80 ns window
    let grid = TimeGrid::linspace(0.0, 80e-9, 2000).unwrap();
    for &t in grid.times() {
        assert!(drive.evaluate(t).min(pump.evaluate(t)) < 1e-6 * 2e12);
    }
}

#[test]
fn wide_pulse_plateau_reproduces_constant_drive() {
    let base = SystemParams { drive: C64::new(0.0, 0.0), gamma_12: 1e8, ..antenna_params() };
    let eff = effective_params(&base).unwrap();
    let omega0 = 5e11;
    let center = 1e-6;
    let train = PulseTrain::new(omega0, 1e-3, &[center]).unwrap();
    let gen = TimeDependentGenerator::constant(effective_liouvillian(&eff).unwrap())
        .with_term(train.generator_term(PulseTarget::Drive, ModelSpace::Effective(&eff)).unwrap())
        .unwrap();
    let constant = steady_state_effective(&eff.with_drive(C64::new(omega0, 0.0))).unwrap();
    // start in the constant-drive stationary state 100 ns before the peak
    let grid = TimeGrid::linspace(center - 1e-7, center, 11).unwrap();
    let traj = evolve(&gen, &constant, &grid, &EvolveOptions::default()).unwrap();
    for rho in &traj.states {
        assert!(distance(rho, &constant).unwrap() < 1e-6);
    }
}

proptest! {
    #[test]
    fn concatenation_evaluates_to_sum(
        a in -1e12f64..1e12, b in 0.0f64..1e12,
        ca in proptest::collection::vec(0.0f64..1e-7, 1..4),
        cb in proptest::collection::vec(0.0f64..1e-7, 1..4),
        wa in 1e-10f64..1e-8, wb in 1e-10f64..1e-8,
        t in -1e-8f64..2e-7,
    ) {
        let x = PulseTrain::new(a, wa, &ca).unwrap();
        let y = PulseTrain::new(b, wb, &cb).unwrap();
        let sum = x.evaluate(t) + y.evaluate(t);
        prop_assert!((x.concat(&y).evaluate(t) - sum).abs() <= 1e-15 * (a.abs() + b.abs()) * 4.0);
    }

    #[test]
    fn non_negative_amplitudes_give_non_negative_envelopes(
        amp in 0.0f64..1e13, width in 1e-12f64..1e-6,
        centers in proptest::collection::vec(-1e-6f64..1e-6, 0..5), t in -1e-5f64..1e-5,
    ) {
        let train = PulseTrain::new(amp, width, &centers).unwrap();
        prop_assert!(train.evaluate(t) >= 0.0);
        prop_assert!(train.validate_for(PulseTarget::Pump).is_ok());
    }
}
