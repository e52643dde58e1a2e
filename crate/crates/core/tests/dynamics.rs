mod common;

use common::antenna_params;
use nanosps_core::dynamics::distance;
use nanosps_core::model::mode_annihilation;
use nanosps_core::pulses::ModelSpace;
use nanosps_core::{
    annihilation, build_liouvillian, effective_liouvillian, effective_params, emitter_flip, evolve, expectation,
    mean_photon, steady_state, steady_state_effective, system_liouvillian, CollapseTerm, DensityMatrix, EvolveOptions,
    GeneratorTerm, Level, Liouvillian, OperatorMatrix, PulseTarget, PulseTrain, SpaceConfig, SystemParams,
    TimeDependentGenerator, TimeGrid, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cavity_decay(rate: f64, n_max: usize) -> Liouvillian {
    let terms = [CollapseTerm { rate, operator: annihilation(n_max) }];
    build_liouvillian(&OperatorMatrix::zeros(n_max + 1), &terms).unwrap()
}

fn number_expectation(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|n| n as f64 * rho.population(n)).sum()
}

#[test]
fn damped_cavity_follows_exponential_on_every_propagation_path() {
    let gamma = 1.36e14;
    let grid = TimeGrid::linspace(0.0, 5.0 / gamma, 51).unwrap();
    let opts = EvolveOptions::default();

    // dense exact propagation
    let gen = TimeDependentGenerator::constant(cavity_decay(gamma, 1));
    let traj = evolve(&gen, &DensityMatrix::basis(2, 1), &grid, &opts).unwrap();
    // Magnus path: a zero-envelope addend makes the generator time dependent
    let zero = GeneratorTerm::new("idle", cavity_decay(gamma, 1), |_| 0.0);
    let gen_td = TimeDependentGenerator::constant(cavity_decay(gamma, 1)).with_term(zero).unwrap();
    let traj_td = evolve(&gen_td, &DensityMatrix::basis(2, 1), &grid, &opts).unwrap();
    // Krylov path: 13 Fock states exceed the dense limit, |3⟩ decays as 3e^{-Γt}
    let gen_k = TimeDependentGenerator::constant(cavity_decay(gamma, 12));
    let traj_k = evolve(&gen_k, &DensityMatrix::basis(13, 3), &grid, &opts).unwrap();
    assert!(traj_k.diagnostics.krylov_substeps > 0);

    for (k, &t) in grid.times().iter().enumerate() {
        let exact = (-gamma * t).exp();
        assert!((number_expectation(&traj.states[k]) - exact).abs() < 1e-6);
        assert!((number_expectation(&traj_td.states[k]) - exact).abs() < 1e-6);
        assert!((number_expectation(&traj_k.states[k]) - 3.0 * exact).abs() < 1e-6);
    }
}

fn empty_cavity(drive: f64, gamma1: f64, detuning: f64) -> SystemParams {
    SystemParams {
        drive: C64::new(drive, 0.0),
        gamma_rad1: gamma1 / 2.0,
        gamma_nonrad1: gamma1 / 2.0,
        gamma_rad2: gamma1,
        // the emitter must relax somewhere for the stationary state to be unique
        gamma_sp_e1: gamma1,
        gamma_12: gamma1,
        omega_m1: detuning,
        ..Default::default()
    }
}

fn check_coherent_steady_state(p: &SystemParams, cfg: &SpaceConfig) -> DensityMatrix {
    let rho = steady_state(&system_liouvillian(p, cfg).unwrap()).unwrap();
    let delta = p.mode_detuning(1);
    let half = p.gamma1() / 2.0;
    let n_exact = p.drive.norm_sqr() / (delta * delta + half * half);
    let a_exact = C64::new(0.0, -1.0) * p.drive / C64::new(half, delta);
    let n = mean_photon(&rho, 1, cfg).unwrap();
    let a = expectation(&rho, &mode_annihilation(1, cfg)).unwrap();
    assert!(((n - n_exact) / n_exact).abs() < 1e-8, "⟨n⟩ {n} vs {n_exact}");
    assert!((a - a_exact).norm() / a_exact.norm() < 1e-8, "⟨a⟩ {a} vs {a_exact}");
    rho
}

#[test]
fn driven_damped_cavity_reaches_coherent_balance() {
    // resonant, antenna values: ⟨n₁⟩ ≈ 5.41×10⁻⁵
    let p = empty_cavity(5e11, 1.36e14, 0.0);
    let rho = check_coherent_steady_state(&p, &SpaceConfig::new(6, 0));
    let n = mean_photon(&rho, 1, &SpaceConfig::new(6, 0)).unwrap();
    assert!((n - 5.41e-5).abs() < 0.01e-5);

    // detuned, dimensionless
    let p = empty_cavity(0.3, 1.0, 0.4);
    let cfg = SpaceConfig::new(20, 0);
    let rho_ss = check_coherent_steady_state(&p, &cfg);

    // and the same state is the long-time limit of the evolution
    let gen = TimeDependentGenerator::constant(system_liouvillian(&p, &cfg).unwrap());
    let grid = TimeGrid::linspace(0.0, 60.0, 61).unwrap();
    let traj = evolve(&gen, &DensityMatrix::basis(cfg.dim(), 0), &grid, &EvolveOptions::default()).unwrap();
    assert!(distance(traj.states.last().unwrap(), &rho_ss).unwrap() < 1e-6);
}

#[test]
fn effective_steady_state_is_long_time_limit() {
    for (gamma_12, pump) in [(1e7, 0.0), (1e7, 1e9), (0.0, 1e8)] {
        let p = SystemParams { gamma_12, pump, gamma_sp_e2: 1e8, ..antenna_params() };
        let eff = effective_params(&p).unwrap();
        let rho_ss = steady_state_effective(&eff).unwrap();
        let slowest = gamma_12 + pump;
        let grid = TimeGrid::linspace(0.0, 60.0 / slowest, 601).unwrap();
        let gen = TimeDependentGenerator::constant(effective_liouvillian(&eff).unwrap());
        let traj = evolve(&gen, &DensityMatrix::basis(3, 0), &grid, &EvolveOptions::default()).unwrap();
        let d = distance(traj.states.last().unwrap(), &rho_ss).unwrap();
        assert!(d < 1e-6, "γ¹² = {gamma_12}, P = {pump}: distance {d:e}");
    }
}

#[test]
fn full_model_steady_state_with_pump_is_unique_and_positive() {
    let cfg = SpaceConfig::new(4, 3);
    let p = SystemParams { pump: 1e9, ..antenna_params() };
    let rho = steady_state(&system_liouvillian(&p, &cfg).unwrap()).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
    assert!(rho.hermiticity_error() < 1e-12);
    assert!(rho.min_eigenvalue().unwrap() > -1e-10);
}

/// Driven, decaying qubit with an oscillating drive envelope.
fn driven_qubit() -> TimeDependentGenerator {
    let decay = [CollapseTerm { rate: 0.3, operator: emitter_flip(Level::One, Level::Two) }];
    let detuning = emitter_flip(Level::Two, Level::Two).scale(C64::new(0.7, 0.0));
    let base = build_liouvillian(&detuning, &decay).unwrap();
    let sx = emitter_flip(Level::One, Level::Two).try_add(&emitter_flip(Level::Two, Level::One)).unwrap();
    let drive = build_liouvillian(&sx, &[]).unwrap();
    TimeDependentGenerator::constant(base)
        .with_term(GeneratorTerm::new("drive", drive, |t: f64| 1.5 * (2.0 * t).sin() + 0.5))
        .unwrap()
}

#[test]
fn magnus_integrator_converges_at_fourth_order() {
    let gen = driven_qubit();
    let rho0 = DensityMatrix::basis(3, 0);
    let t_end = 4.0;
    let reference = {
        let grid = TimeGrid::new(vec![0.0, t_end]).unwrap();
        let opts = EvolveOptions { rtol: 1e-13, atol: 1e-15, max_step: Some(1e-3), ..Default::default() };
        evolve(&gen, &rho0, &grid, &opts).unwrap().states.pop().unwrap()
    };
    let fixed_step = |steps: usize| {
        // one step per sample interval; tolerances loose enough that every step is accepted
        let grid = TimeGrid::linspace(0.0, t_end, steps + 1).unwrap();
        let opts = EvolveOptions { rtol: 1e6, atol: 1.0, max_step: Some(t_end / steps as f64), ..Default::default() };
        let traj = evolve(&gen, &rho0, &grid, &opts).unwrap();
        assert_eq!(traj.diagnostics.steps, steps);
        assert_eq!(traj.diagnostics.rejected_steps, 0);
        distance(traj.states.last().unwrap(), &reference).unwrap()
    };
    let errors: Vec<f64> = [8, 16, 32].into_iter().map(fixed_step).collect();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(order > 3.7, "observed order {order:.2} from {errors:?}");
    }
}

#[test]
fn tolerances_bound_the_error_of_adaptive_runs() {
    let gen = driven_qubit();
    let rho0 = DensityMatrix::basis(3, 0);
    let grid = TimeGrid::linspace(0.0, 4.0, 9).unwrap();
    let tight = EvolveOptions { rtol: 1e-13, atol: 1e-15, max_step: Some(1e-3), ..Default::default() };
    let reference = evolve(&gen, &rho0, &grid, &tight).unwrap();
    let traj = evolve(&gen, &rho0, &grid, &EvolveOptions::default()).unwrap();
    for (a, b) in traj.states.iter().zip(&reference.states) {
        assert!(distance(a, b).unwrap() < 1e-7);
    }
    assert!(traj.diagnostics.max_trace_error <= 10.0 * EvolveOptions::default().atol);
}

#[test]
fn stiff_pumped_full_model_is_stable_and_invariant() {
    // rates from 10⁷ (γ¹²) to 1.36×10¹⁴ (Γ₁): seven orders of magnitude
    let cfg = SpaceConfig::new(1, 0);
    let p = SystemParams { gamma_12: 1e7, gamma_sp_e2: 1e8, ..antenna_params() };
    let pump = PulseTrain::new(2e12, 1e-9, &[3e-9]).unwrap();
    let gen = TimeDependentGenerator::constant(system_liouvillian(&p, &cfg).unwrap())
        .with_term(pump.generator_term(PulseTarget::Pump, ModelSpace::Full(&cfg)).unwrap())
        .unwrap();
    let rho0 = DensityMatrix::basis(cfg.dim(), cfg.index(Level::Two, 0, 0));
    let grid = TimeGrid::linspace(0.0, 8e-9, 161).unwrap();
    let traj = evolve(&gen, &rho0, &grid, &EvolveOptions::default()).unwrap();
    assert!(traj.diagnostics.steps < 5_000, "{:?}", traj.diagnostics);

    let tight = EvolveOptions { rtol: 1e-11, atol: 1e-12, max_step: Some(5e-11), ..Default::default() };
    let reference = evolve(&gen, &rho0, &grid, &tight).unwrap();
    for (a, b) in traj.states.iter().zip(&reference.states) {
        assert!(distance(a, b).unwrap() < 1e-6);
    }

    assert!(traj.diagnostics.max_trace_error <= 1e-9);
    assert!(traj.diagnostics.max_hermiticity_error <= 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let k = rng.random_range(0..grid.len());
        assert!(traj.states[k].min_eigenvalue().unwrap() >= -1e-6);
    }
    // at the pump peak (3 ns) |2⟩ has been emptied
    let p2: f64 =
        (0..cfg.dim()).filter(|&i| cfg.decode(i).0 == Level::Two).map(|i| traj.states[60].population(i)).sum();
    assert!(p2 < 0.01, "metastable population {p2}");
}
