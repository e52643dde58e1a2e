//! The four scenario runners behind the subcommands.
//!
//! Runners return tables and metadata; writing them is left to [`write`] so
//! that tests can inspect results without touching the file system.

use std::path::Path;

use nanosps_core::observables::fock_ceiling_population;
use nanosps_core::{
    adiabatic_photon_numbers, coupling_from_purcell, effective_liouvillian, effective_params, evolve, extract_rates,
    fit_lorentzian, g2_zero, mean_photon, n_gen, populations, stationary_rho22, steady_state_effective,
    steady_state_graded, system_liouvillian, weisskopf_wigner, Channel, DensityMatrix, EmitterPhysical,
    Error as CoreError, ModelSpace, ObservableSeries, PulseTarget, SystemParams, TimeDependentGenerator, TimeGrid, C64,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    param_unit, params_table, set_param, FitConfig, ModelKind, Observable, ParamFile, ParamValue, Scenario,
    SCHEMA_VERSION,
};
use crate::error::{CliError, Result};
use crate::io::{self, Column, Table};

/// States whose minimum eigenvalue is checked per trajectory.
const EIGEN_SAMPLES: usize = 64;

/// A table with its metadata, ready to be written as `<stem>.csv` and
/// `<stem>.json`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stem: String,
    pub table: Table,
    pub metadata: Value,
}

pub fn write(outputs: &[RunOutput], dir: &Path) -> Result<()> {
    io::ensure_dir(dir)?;
    for out in outputs {
        out.table.write(&io::output_path(dir, &out.stem, "csv"))?;
        io::write_json(&io::output_path(dir, &out.stem, "json"), &out.metadata)?;
    }
    Ok(())
}

/// Health of the states a run produced.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateChecks {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub eigen_samples: usize,
    /// Largest top-Fock-state population of modes 1 and 2 (full model only).
    pub max_fock_ceiling: Option<[f64; 2]>,
}

impl StateChecks {
    fn new() -> Self {
        Self { min_eigenvalue: f64::INFINITY, ..Default::default() }
    }

    fn record(&mut self, rho: &DensityMatrix, eigen: bool) -> Result<()> {
        self.max_trace_error = self.max_trace_error.max((rho.trace() - C64::new(1.0, 0.0)).norm());
        self.max_hermiticity_error = self.max_hermiticity_error.max(rho.hermiticity_error());
        if eigen {
            let e = rho.min_eigenvalue().map_err(|e| CliError::core("eigenvalue check", e))?;
            self.min_eigenvalue = self.min_eigenvalue.min(e);
            self.eigen_samples += 1;
        }
        Ok(())
    }

    fn record_ceiling(&mut self, c1: f64, c2: f64) {
        let [a, b] = self.max_fock_ceiling.unwrap_or([0.0, 0.0]);
        self.max_fock_ceiling = Some([a.max(c1), b.max(c2)]);
    }

    fn merge(&mut self, other: &StateChecks) {
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.eigen_samples += other.eigen_samples;
        if let Some([c1, c2]) = other.max_fock_ceiling {
            self.record_ceiling(c1, c2);
        }
    }
}

/// Every observable of one model along a trajectory.
#[derive(Debug, Clone)]
pub struct Trace {
    pub model: ModelKind,
    pub grid: TimeGrid,
    pub series: Vec<(Observable, Vec<f64>)>,
    pub integrator: nanosps_core::Diagnostics,
    pub checks: StateChecks,
}

impl Trace {
    pub fn get(&self, o: Observable) -> Option<&[f64]> {
        self.series.iter().find(|(k, _)| *k == o).map(|(_, v)| v.as_slice())
    }
}

fn g2_or_nan(result: nanosps_core::Result<f64>) -> Result<f64> {
    match result {
        Ok(v) => Ok(v),
        Err(CoreError::UndefinedCorrelation { .. }) => Ok(f64::NAN),
        Err(e) => Err(CliError::core("g2", e)),
    }
}

/// Evolves one model (`Full` or `Effective`) of a scenario.
pub fn trace(s: &Scenario, model: ModelKind) -> Result<Trace> {
    let grid = s.grid()?;
    let opts = s.evolve_options();
    let trains = s.pulse_trains()?;
    let p = s.params;
    let level = s.initial_level()?;
    let envelope = |target: PulseTarget, t: f64| -> f64 {
        trains.iter().filter(|(x, _)| *x == target).map(|(_, tr)| tr.evaluate(t)).sum()
    };
    let ctx = |what: &str| format!("{} ({what})", s.config.name);
    let cfg = s.space();
    let eff = match model {
        ModelKind::Effective => Some(effective_params(&p).map_err(|e| CliError::core(ctx("effective parameters"), e))?),
        _ => None,
    };
    let (base, space, rho0) = match &eff {
        Some(eff) => (effective_liouvillian(eff), ModelSpace::Effective(eff), DensityMatrix::basis(3, level.index())),
        None => (
            system_liouvillian(&p, &cfg),
            ModelSpace::Full(&cfg),
            DensityMatrix::basis(cfg.dim(), cfg.index(level, 0, 0)),
        ),
    };
    let mut gen = TimeDependentGenerator::constant(base.map_err(|e| CliError::core(ctx("generator"), e))?);
    for (target, train) in &trains {
        let term = train.generator_term(*target, space).map_err(|e| CliError::core(ctx("pulses"), e))?;
        gen.push(term).map_err(|e| CliError::core(ctx("pulses"), e))?;
    }
    let traj = evolve(&gen, &rho0, &grid, &opts).map_err(|e| CliError::core(ctx("integration"), e))?;

    let n = grid.len();
    let stride = (n / EIGEN_SAMPLES).max(1);
    let mut checks = StateChecks::new();
    let (mut n1, mut n2, mut r11, mut r22, mut ree) = (vec![], vec![], vec![], vec![], vec![]);
    let (mut drive, mut pump, mut g2, mut c1, mut c2) = (vec![], vec![], vec![], vec![], vec![]);
    for (k, (rho, &t)) in traj.states.iter().zip(grid.times()).enumerate() {
        checks.record(rho, rho.dim() <= 3 || k % stride == 0 || k + 1 == n)?;
        let pops = populations(rho).map_err(|e| CliError::core(ctx("populations"), e))?;
        r11.push(pops.p1);
        r22.push(pops.p2);
        ree.push(pops.pe);
        let omega = p.drive + C64::new(envelope(PulseTarget::Drive, t), 0.0);
        drive.push(omega.norm());
        pump.push(p.pump + envelope(PulseTarget::Pump, t));
        if eff.is_some() {
            let (a, b) = adiabatic_photon_numbers(rho, &SystemParams { drive: omega, ..p })
                .map_err(|e| CliError::core(ctx("photon numbers"), e))?;
            n1.push(a);
            n2.push(b);
        } else {
            let m = |mode| mean_photon(rho, mode, &cfg).map_err(|e| CliError::core(ctx("photon numbers"), e));
            n1.push(m(1)?);
            n2.push(m(2)?);
            g2.push(if cfg.n_max2 >= 2 { g2_or_nan(g2_zero(rho, 2, &cfg))? } else { f64::NAN });
            let ceil = |mode| fock_ceiling_population(rho, mode, &cfg).map_err(|e| CliError::core(ctx("ceiling"), e));
            let (a, b) = (ceil(1)?, ceil(2)?);
            checks.record_ceiling(a, b);
            c1.push(a);
            c2.push(b);
        }
    }
    let n2_series = ObservableSeries::new("n2", n2.clone(), &grid).map_err(|e| CliError::core(ctx("n_gen"), e))?;
    let generated = n_gen(&n2_series, &grid, p.gamma2()).map_err(|e| CliError::core(ctx("n_gen"), e))?.values;

    let mut series = vec![
        (Observable::N1, n1),
        (Observable::N2, n2),
        (Observable::Rho11, r11),
        (Observable::Rho22, r22),
        (Observable::RhoEe, ree),
        (Observable::NGen, generated),
        (Observable::DriveEnvelope, drive),
        (Observable::PumpEnvelope, pump),
    ];
    if eff.is_none() {
        series.extend([(Observable::G2, g2), (Observable::FockCeiling1, c1), (Observable::FockCeiling2, c2)]);
    }
    Ok(Trace { model, grid, series, integrator: traj.diagnostics, checks })
}

fn model_name(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Full => "full",
        ModelKind::Effective => "effective",
        ModelKind::Both => "both",
    }
}

fn params_json(p: &SystemParams) -> Value {
    let table: serde_json::Map<String, Value> = params_table(p)
        .into_iter()
        .map(|(name, v)| {
            let unit = param_unit(&name);
            (name, json!({ "value": v, "unit": unit }))
        })
        .collect();
    Value::Object(table)
}

fn derived_json(p: &SystemParams) -> Value {
    let mut d = json!({
        "gamma1": p.gamma1(),
        "gamma2": p.gamma2(),
        "eta1": p.eta1(),
        "eta2": p.eta2(),
    });
    if let Ok(eff) = effective_params(p) {
        d["effective"] = json!({
            "omega_e_eff": eff.omega_e_eff,
            "drive_eff": [eff.drive_eff.re, eff.drive_eff.im],
            "gamma1_eff": eff.gamma1_eff,
            "gamma2_eff": eff.gamma2_eff,
            "gamma_1e": eff.gamma_1e,
            "delta1": eff.delta1,
        });
    }
    d
}

fn base_metadata(s: &Scenario, command: &str) -> Value {
    let c = &s.config;
    let o = s.evolve_options();
    json!({
        "tool": "nanosps",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "scenario": c.name,
        "description": c.description,
        "model": model_name(c.model),
        "units": { "time": "s", "frequency": "rad/s", "rate": "1/s" },
        "params": params_json(&s.params),
        "derived": derived_json(&s.params),
        "space": { "n_max1": c.space.n_max1, "n_max2": c.space.n_max2, "dim": s.space().dim() },
        "initial": { "level": c.initial.level, "modes": "vacuum" },
        "time": c.time,
        "pulses": c.pulses,
        "integrator": {
            "rtol": o.rtol, "atol": o.atol, "max_steps": o.max_steps,
            "krylov_dim": o.krylov_dim, "dense_limit": o.dense_limit, "max_step": o.max_step,
        },
    })
}

fn trace_table(s: &Scenario, tr: &Trace, observables: &[Observable]) -> Result<Table> {
    let mut cols = vec![Column::new("time", "s")];
    cols.extend(observables.iter().map(|o| Column::new(o.name(), o.unit())));
    let mut table = Table::new(cols);
    table.notes.push(format!("scenario: {} ({} model)", s.config.name, model_name(tr.model)));
    let picked: Vec<&[f64]> = observables
        .iter()
        .map(|&o| {
            tr.get(o).ok_or_else(|| CliError::Config(format!("observable `{o}` is not available for this model")))
        })
        .collect::<Result<_>>()?;
    for (k, &t) in tr.grid.times().iter().enumerate() {
        let mut row = Vec::with_capacity(picked.len() + 1);
        row.push(t);
        row.extend(picked.iter().map(|v| v[k]));
        table.push_row(row);
    }
    Ok(table)
}

fn trace_metadata(tr: &Trace) -> Value {
    let d = &tr.integrator;
    let finals: serde_json::Map<String, Value> =
        tr.series.iter().map(|(o, v)| (o.name().to_string(), json!(v.last().copied()))).collect();
    json!({
        "integrator": {
            "steps": d.steps,
            "rejected_steps": d.rejected_steps,
            "krylov_substeps": d.krylov_substeps,
            "max_trace_error": d.max_trace_error,
            "max_hermiticity_error": d.max_hermiticity_error,
        },
        "states": tr.checks,
        "final": finals,
    })
}

/// Time-resolved run. `model = "both"` produces one output per model, with
/// stems suffixed `_full` and `_effective`.
pub fn simulate(s: &Scenario) -> Result<Vec<RunOutput>> {
    let models: &[ModelKind] = match s.config.model {
        ModelKind::Both => &[ModelKind::Full, ModelKind::Effective],
        ModelKind::Full => &[ModelKind::Full],
        ModelKind::Effective => &[ModelKind::Effective],
    };
    let mut outputs = Vec::new();
    for &model in models {
        let tr = trace(s, model)?;
        let table = trace_table(s, &tr, &s.config.observables)?;
        let mut metadata = base_metadata(s, "simulate");
        metadata["model"] = json!(model_name(model));
        metadata["observables"] = json!(s.config.observables);
        metadata["diagnostics"] = trace_metadata(&tr);
        let stem = match s.config.model {
            ModelKind::Both => format!("{}_{}", s.stem(), model_name(model)),
            _ => s.stem().to_string(),
        };
        outputs.push(RunOutput { stem, table, metadata });
    }
    Ok(outputs)
}

fn steady_point(s: &Scenario, p: &SystemParams, observables: &[Observable]) -> Result<(Vec<f64>, StateChecks)> {
    let mut checks = StateChecks::new();
    let ctx = |what: &str| format!("{} ({what})", s.config.name);
    p.validate().map_err(|e| CliError::core(ctx("params"), e))?;
    let mut row = Vec::with_capacity(observables.len());
    if s.config.model == ModelKind::Full {
        let cfg = s.space();
        let l = system_liouvillian(p, &cfg).map_err(|e| CliError::core(ctx("generator"), e))?;
        let rho = steady_state_graded(&l, &cfg).map_err(|e| CliError::core(ctx("steady state"), e))?;
        checks.record(&rho, true)?;
        let c = |mode| fock_ceiling_population(&rho, mode, &cfg).map_err(|e| CliError::core(ctx("ceiling"), e));
        checks.record_ceiling(c(1)?, c(2)?);
        let pops = populations(&rho).map_err(|e| CliError::core(ctx("populations"), e))?;
        let m = |mode| mean_photon(&rho, mode, &cfg).map_err(|e| CliError::core(ctx("photon numbers"), e));
        for &o in observables {
            row.push(match o {
                Observable::N1 => m(1)?,
                Observable::N2 => m(2)?,
                Observable::Rho11 => pops.p1,
                Observable::Rho22 => pops.p2,
                Observable::RhoEe => pops.pe,
                Observable::G2 => g2_or_nan(g2_zero(&rho, 2, &cfg))?,
                Observable::FockCeiling1 => c(1)?,
                Observable::FockCeiling2 => c(2)?,
                other => return Err(CliError::Config(format!("observable `{other}` is not defined for this sweep"))),
            });
        }
    } else {
        let eff = effective_params(p).map_err(|e| CliError::core(ctx("effective parameters"), e))?;
        let rho = steady_state_effective(&eff).map_err(|e| CliError::core(ctx("steady state"), e))?;
        checks.record(&rho, true)?;
        let pops = populations(&rho).map_err(|e| CliError::core(ctx("populations"), e))?;
        let (n1, n2) = adiabatic_photon_numbers(&rho, p).map_err(|e| CliError::core(ctx("photon numbers"), e))?;
        for &o in observables {
            row.push(match o {
                Observable::N1 => n1,
                Observable::N2 => n2,
                Observable::Rho11 => pops.p1,
                Observable::Rho22 => pops.p2,
                Observable::RhoEe => pops.pe,
                Observable::Rho22Formula => match stationary_rho22(&eff) {
                    Ok(v) => v,
                    Err(CoreError::ZeroDrive) => f64::NAN,
                    Err(e) => return Err(CliError::core(ctx("stationary formula"), e)),
                },
                other => return Err(CliError::Config(format!("observable `{other}` is not defined for this sweep"))),
            });
        }
    }
    Ok((row, checks))
}

/// Worker count: explicit value, else `NANOSPS_WORKERS`, else the number of
/// available cores.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize> {
    if let Some(n) = explicit {
        return if n > 0 { Ok(n) } else { Err(CliError::Config("--workers must be ≥ 1".into())) };
    }
    match std::env::var("NANOSPS_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("NANOSPS_WORKERS=`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Steady-state observables on the Cartesian product of the sweep axes
/// (first axis varies slowest). Points are independent and run on `workers`
/// threads; rows come out in grid order regardless.
pub fn sweep(s: &Scenario, workers: usize) -> Result<RunOutput> {
    let sw = s.config.sweep.as_ref().ok_or_else(|| CliError::Config("a [sweep] block is required".into()))?;
    let axes: Vec<(String, Vec<f64>)> =
        sw.axes.iter().map(|a| Ok((a.parameter.clone(), a.grid()?))).collect::<Result<_>>()?;
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let point = |mut k: usize| -> Vec<f64> {
        let mut coords = vec![0.0; axes.len()];
        for (j, (_, values)) in axes.iter().enumerate().rev() {
            coords[j] = values[k % values.len()];
            k /= values.len();
        }
        coords
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<(Vec<f64>, StateChecks)>> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|k| {
                let coords = point(k);
                let mut p = s.params;
                for ((name, _), &v) in axes.iter().zip(&coords) {
                    set_param(&mut p, name, ParamValue::Real(v))?;
                }
                let (values, checks) = steady_point(s, &p, &sw.observables).map_err(|e| match e {
                    CliError::Numerics { context, source } => {
                        let at: Vec<String> =
                            axes.iter().zip(&coords).map(|((n, _), v)| format!("{n} = {v:e}")).collect();
                        CliError::Numerics { context: format!("{context} at {}", at.join(", ")), source }
                    }
                    other => other,
                })?;
                Ok((coords.into_iter().chain(values).collect(), checks))
            })
            .collect()
    });

    let mut cols: Vec<Column> = axes.iter().map(|(n, _)| Column::new(n.clone(), param_unit(n))).collect();
    cols.extend(sw.observables.iter().map(|o| Column::new(o.name(), o.unit())));
    let mut table = Table::new(cols);
    table.notes.push(format!("scenario: {} ({} model, steady state)", s.config.name, model_name(s.config.model)));
    let mut checks = StateChecks::new();
    for r in results {
        let (row, c) = r?;
        checks.merge(&c);
        table.push_row(row);
    }
    let mut metadata = base_metadata(s, "sweep");
    metadata["sweep"] = json!({
        "axes": axes.iter().map(|(n, v)| json!({ "parameter": n, "unit": param_unit(n), "values": v })).collect::<Vec<_>>(),
        "points": total,
        "observables": sw.observables,
    });
    metadata["diagnostics"] = json!({ "states": checks });
    Ok(RunOutput { stem: s.stem().to_string(), table, metadata })
}

/// Full-versus-effective comparison.
#[derive(Debug, Clone)]
pub struct Validation {
    pub output: RunOutput,
    /// `max_t |ρ_ee^full − ρ_ee^eff| / max_t ρ_ee^full`.
    pub rho_ee_deviation: f64,
    /// The same measure for `⟨n₂⟩`.
    pub n2_deviation: f64,
    pub passed: bool,
}

fn relative_deviation(full: &[f64], eff: &[f64]) -> f64 {
    let scale = full.iter().cloned().fold(0.0, f64::max);
    let dev = full.iter().zip(eff).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    dev / scale
}

pub fn validate(s: &Scenario) -> Result<Validation> {
    let window = s.config.validate.ok_or_else(|| CliError::Config("a [validate] block is required".into()))?;
    let full = trace(s, ModelKind::Full)?;
    let eff = trace(s, ModelKind::Effective)?;
    let get = |t: &Trace, o| t.get(o).expect("always computed").to_vec();
    let (ef, ee) = (get(&full, Observable::RhoEe), get(&eff, Observable::RhoEe));
    let (nf, ne) = (get(&full, Observable::N2), get(&eff, Observable::N2));
    let rho_ee_deviation = relative_deviation(&ef, &ee);
    let n2_deviation = relative_deviation(&nf, &ne);
    let passed = rho_ee_deviation >= window.min_deviation && window.max_deviation.is_none_or(|m| rho_ee_deviation <= m);

    let mut table = Table::new(vec![
        Column::new("time", "s"),
        Column::new("rho_ee_full", "1"),
        Column::new("rho_ee_effective", "1"),
        Column::new("rho_ee_deviation", "1"),
        Column::new("n2_full", "1"),
        Column::new("n2_effective", "1"),
        Column::new("n2_deviation", "1"),
    ]);
    table.notes.push(format!("scenario: {} (full vs effective)", s.config.name));
    for (k, &t) in full.grid.times().iter().enumerate() {
        table.push_row(vec![t, ef[k], ee[k], (ef[k] - ee[k]).abs(), nf[k], ne[k], (nf[k] - ne[k]).abs()]);
    }
    let mut metadata = base_metadata(s, "validate");
    metadata["validation"] = json!({
        "metric": "max |rho_ee_full - rho_ee_effective| / max rho_ee_full",
        "rho_ee_deviation": rho_ee_deviation,
        "n2_deviation": n2_deviation,
        "min_deviation": window.min_deviation,
        "max_deviation": window.max_deviation,
        "passed": passed,
    });
    metadata["diagnostics"] = json!({ "full": trace_metadata(&full), "effective": trace_metadata(&eff) });
    Ok(Validation {
        output: RunOutput { stem: s.stem().to_string(), table, metadata },
        rho_ee_deviation,
        n2_deviation,
        passed,
    })
}

/// Rates recovered for one antenna mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeReport {
    pub mode: u8,
    pub center: f64,
    pub gamma_rad: f64,
    pub gamma_nonrad: f64,
    pub gamma_total: f64,
    pub eta: f64,
    pub gamma_sp: f64,
    pub purcell_ratio: f64,
    pub kappa: f64,
    pub residual_scattered: f64,
    pub residual_absorbed: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub stem: String,
    pub modes: Vec<ModeReport>,
    pub params: ParamFile,
    /// The parameter file as written, loadable through `params_file`.
    pub text: String,
    pub metadata: Value,
}

/// Fits both channels of every configured mode and turns the rates into a
/// parameter file. Spectrum paths are relative to `base_dir`.
pub fn fit(cfg: &FitConfig, base_dir: &Path) -> Result<FitOutcome> {
    let mut params = ParamFile { schema_version: SCHEMA_VERSION, params: Default::default() };
    let mut modes = Vec::new();
    for m in &cfg.modes {
        let path = base_dir.join(&m.spectrum);
        let samples = io::read_spectrum(&path)?;
        let window = m.window.map(|[lo, hi]| (lo, hi));
        let where_ = match window {
            Some((lo, hi)) => format!("window [{lo:e}, {hi:e}] rad/s"),
            None => "full range".to_string(),
        };
        let fit_channel = |ch: Channel| {
            fit_lorentzian(&samples, ch, window).map_err(|e| CliError::Numerics {
                context: format!("mode {}: {} fit of {} in {where_}", m.mode, ch.label(), path.display()),
                source: e,
            })
        };
        let (sca, abs) = (fit_channel(Channel::Scattered)?, fit_channel(Channel::Absorbed)?);
        let numerics = |what: &str, e| CliError::Numerics { context: format!("mode {}: {what}", m.mode), source: e };
        let rates = extract_rates(&sca, &abs).map_err(|e| numerics("loss rates", e))?;
        let phys = EmitterPhysical {
            dipole: cfg.emitter.dipole,
            permittivity: cfg.emitter.permittivity,
            omega: m.transition_omega,
        };
        let gamma_sp = weisskopf_wigner(&phys).map_err(|e| CliError::core(format!("mode {}: emitter", m.mode), e))?;
        let kappa = coupling_from_purcell(m.purcell_ratio, rates.eta, rates.gamma_total, gamma_sp)
            .map_err(|e| numerics("coupling", e))?;
        let j = m.mode;
        for (name, v) in [
            (format!("gamma_rad{j}"), rates.gamma_rad),
            (format!("gamma_nonrad{j}"), rates.gamma_nonrad),
            (format!("gamma_sp_e{j}"), gamma_sp),
            (format!("kappa{j}"), kappa),
        ] {
            params.params.insert(name, ParamValue::Real(v));
        }
        modes.push(ModeReport {
            mode: j,
            center: 0.5 * (sca.center + abs.center),
            gamma_rad: rates.gamma_rad,
            gamma_nonrad: rates.gamma_nonrad,
            gamma_total: rates.gamma_total,
            eta: rates.eta,
            gamma_sp,
            purcell_ratio: m.purcell_ratio,
            kappa,
            residual_scattered: sca.residual_norm,
            residual_absorbed: abs.residual_norm,
        });
    }
    let mut text = format!("# nanosps {} parameter file from fit `{}`\n", env!("CARGO_PKG_VERSION"), cfg.name);
    for r in &modes {
        text.push_str(&format!(
            "# mode {}: center {:e} rad/s, eta {:.6}, total loss {:e} 1/s\n",
            r.mode, r.center, r.eta, r.gamma_total
        ));
    }
    text.push_str(&toml::to_string(&params).map_err(|e| CliError::Config(format!("serializing parameters: {e}")))?);
    let metadata = json!({
        "tool": "nanosps",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "name": cfg.name,
        "description": cfg.description,
        "emitter": cfg.emitter,
        "modes": modes,
        "inputs": cfg.modes,
    });
    Ok(FitOutcome { stem: cfg.stem().to_string(), modes, params, text, metadata })
}

pub fn write_fit(outcome: &FitOutcome, dir: &Path) -> Result<()> {
    io::ensure_dir(dir)?;
    io::write_text(&io::output_path(dir, &outcome.stem, "toml"), &outcome.text)?;
    io::write_json(&io::output_path(dir, &outcome.stem, "json"), &outcome.metadata)
}
