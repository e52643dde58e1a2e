//! Scenario files.
//!
//! A scenario is a TOML document whose layout is fixed by [`SCHEMA_VERSION`].
//! Every table rejects unknown keys, and parameter names are checked against
//! [`PARAMETERS`], so a typo is a config error rather than a silent default.
//! Frequencies are in rad/s, rates in 1/s, times in s.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nanosps_core::{EvolveOptions, Level, PulseTarget, PulseTrain, SpaceConfig, SystemParams, TimeGrid, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Every key accepted in a `[params]` table, in [`SystemParams`] order.
pub const PARAMETERS: [&str; 20] = [
    "omega_e",
    "omega_1",
    "omega_2",
    "omega_l",
    "omega_m1",
    "omega_m2",
    "kappa1",
    "kappa2",
    "drive",
    "gamma_rad1",
    "gamma_nonrad1",
    "gamma_rad2",
    "gamma_nonrad2",
    "gamma_sp_e1",
    "gamma_sp_e2",
    "gamma_12",
    "pump",
    "gamma_deph_1e",
    "gamma_deph_2e",
    "gamma_deph_12",
];

/// A parameter value: a real number or a `[re, im]` pair for the complex
/// couplings and drive.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Complex([f64; 2]),
}

enum Slot<'a> {
    Real(&'a mut f64),
    Complex(&'a mut C64),
}

fn slot<'a>(p: &'a mut SystemParams, name: &str) -> Option<Slot<'a>> {
    use Slot::{Complex, Real};
    Some(match name {
        "omega_e" => Real(&mut p.omega_e),
        "omega_1" => Real(&mut p.omega_1),
        "omega_2" => Real(&mut p.omega_2),
        "omega_l" => Real(&mut p.omega_l),
        "omega_m1" => Real(&mut p.omega_m1),
        "omega_m2" => Real(&mut p.omega_m2),
        "kappa1" => Complex(&mut p.kappa1),
        "kappa2" => Complex(&mut p.kappa2),
        "drive" => Complex(&mut p.drive),
        "gamma_rad1" => Real(&mut p.gamma_rad1),
        "gamma_nonrad1" => Real(&mut p.gamma_nonrad1),
        "gamma_rad2" => Real(&mut p.gamma_rad2),
        "gamma_nonrad2" => Real(&mut p.gamma_nonrad2),
        "gamma_sp_e1" => Real(&mut p.gamma_sp_e1),
        "gamma_sp_e2" => Real(&mut p.gamma_sp_e2),
        "gamma_12" => Real(&mut p.gamma_12),
        "pump" => Real(&mut p.pump),
        "gamma_deph_1e" => Real(&mut p.gamma_deph_1e),
        "gamma_deph_2e" => Real(&mut p.gamma_deph_2e),
        "gamma_deph_12" => Real(&mut p.gamma_deph_12),
        _ => return None,
    })
}

/// Sets one named parameter; complex values are only accepted by `kappa1`,
/// `kappa2` and `drive`.
pub fn set_param(p: &mut SystemParams, name: &str, value: ParamValue) -> Result<()> {
    match (slot(p, name), value) {
        (None, _) => Err(CliError::Config(format!("unknown parameter `{name}`"))),
        (Some(Slot::Real(x)), ParamValue::Real(v)) => {
            *x = v;
            Ok(())
        }
        (Some(Slot::Real(_)), ParamValue::Complex(_)) => {
            Err(CliError::Config(format!("parameter `{name}` is real, got a [re, im] pair")))
        }
        (Some(Slot::Complex(z)), ParamValue::Real(v)) => {
            *z = C64::new(v, 0.0);
            Ok(())
        }
        (Some(Slot::Complex(z)), ParamValue::Complex([re, im])) => {
            *z = C64::new(re, im);
            Ok(())
        }
    }
}

pub fn get_param(p: &SystemParams, name: &str) -> Option<ParamValue> {
    let mut copy = *p;
    slot(&mut copy, name).map(|s| match s {
        Slot::Real(x) => ParamValue::Real(*x),
        Slot::Complex(z) if z.im == 0.0 => ParamValue::Real(z.re),
        Slot::Complex(z) => ParamValue::Complex([z.re, z.im]),
    })
}

pub fn param_unit(name: &str) -> &'static str {
    if name.starts_with("omega") || name.starts_with("kappa") || name == "drive" {
        "rad/s"
    } else {
        "1/s"
    }
}

/// All parameters in schema order, for metadata and parameter files.
pub fn params_table(p: &SystemParams) -> BTreeMap<String, ParamValue> {
    PARAMETERS.iter().map(|&n| (n.to_string(), get_param(p, n).expect("listed parameter"))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Full,
    Effective,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, Serialize)]
pub enum Observable {
    #[serde(rename = "n1")]
    N1,
    #[serde(rename = "n2")]
    N2,
    #[serde(rename = "rho_11")]
    Rho11,
    #[serde(rename = "rho_22")]
    Rho22,
    #[serde(rename = "rho_ee")]
    RhoEe,
    #[serde(rename = "n_gen")]
    NGen,
    #[serde(rename = "drive_envelope")]
    DriveEnvelope,
    #[serde(rename = "pump_envelope")]
    PumpEnvelope,
    /// Zero-delay correlation of mode 2 (full model only).
    #[serde(rename = "g2")]
    G2,
    /// `ρ₂₂ = 1/(1+ξ)` from the closed form (effective sweeps only).
    #[serde(rename = "rho_22_formula")]
    Rho22Formula,
    /// Population of the highest retained Fock state (full model only).
    #[serde(rename = "fock_ceiling1")]
    FockCeiling1,
    #[serde(rename = "fock_ceiling2")]
    FockCeiling2,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Self::N1 => "n1",
            Self::N2 => "n2",
            Self::Rho11 => "rho_11",
            Self::Rho22 => "rho_22",
            Self::RhoEe => "rho_ee",
            Self::NGen => "n_gen",
            Self::DriveEnvelope => "drive_envelope",
            Self::PumpEnvelope => "pump_envelope",
            Self::G2 => "g2",
            Self::Rho22Formula => "rho_22_formula",
            Self::FockCeiling1 => "fock_ceiling1",
            Self::FockCeiling2 => "fock_ceiling2",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Self::DriveEnvelope => "rad/s",
            Self::PumpEnvelope => "1/s",
            _ => "1",
        }
    }

    fn full_only(self) -> bool {
        matches!(self, Self::G2 | Self::FockCeiling1 | Self::FockCeiling2)
    }

    fn stationary_only(self) -> bool {
        matches!(self, Self::Rho22Formula)
    }

    fn dynamic_only(self) -> bool {
        matches!(self, Self::NGen | Self::DriveEnvelope | Self::PumpEnvelope)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseKind {
    Drive,
    Pump,
}

impl From<PulseKind> for PulseTarget {
    fn from(k: PulseKind) -> Self {
        match k {
            PulseKind::Drive => PulseTarget::Drive,
            PulseKind::Pump => PulseTarget::Pump,
        }
    }
}

/// Gaussian pulses of common amplitude and width added on top of the
/// constant drive or pump.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    pub target: PulseKind,
    pub amplitude: f64,
    pub width: f64,
    pub centers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    2000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceBlock {
    #[serde(default = "default_n1")]
    pub n_max1: usize,
    #[serde(default = "default_n2")]
    pub n_max2: usize,
}

fn default_n1() -> usize {
    10
}

fn default_n2() -> usize {
    5
}

impl Default for SpaceBlock {
    fn default() -> Self {
        Self { n_max1: default_n1(), n_max2: default_n2() }
    }
}

/// Initial emitter level; both modes start in vacuum.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    #[serde(default = "default_level")]
    pub level: String,
}

fn default_level() -> String {
    "1".into()
}

impl Default for InitialBlock {
    fn default() -> Self {
        Self { level: default_level() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<usize>,
    pub krylov_dim: Option<usize>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One swept parameter: explicit `values`, or `start`/`stop`/`points`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBlock {
    pub parameter: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

impl AxisBlock {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let err = |m: &str| Err(CliError::Config(format!("sweep axis `{}`: {m}", self.parameter)));
        let values = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return err("points must be ≥ 1");
                }
                if self.spacing == Spacing::Log && !(a > 0.0 && b > 0.0) {
                    return err("log spacing needs positive bounds");
                }
                let frac = |k: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                (0..n)
                    .map(|k| match self.spacing {
                        Spacing::Linear => a + (b - a) * frac(k),
                        Spacing::Log => (a.ln() + (b.ln() - a.ln()) * frac(k)).exp(),
                    })
                    .collect()
            }
            _ => return err("give either `values` or all of `start`, `stop`, `points`"),
        };
        if values.is_empty() {
            return err("no grid values");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return err("grid values must be finite");
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub observables: Vec<Observable>,
    pub axes: Vec<AxisBlock>,
}

/// Pass window for the maximum relative `ρ_ee` deviation between models.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateBlock {
    #[serde(default)]
    pub min_deviation: f64,
    pub max_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// File stem for the table and metadata; defaults to the scenario name.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelKind,
    /// Parameter file (as written by `fit`) applied before `[params]`.
    pub params_file: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub space: SpaceBlock,
    pub time: Option<TimeBlock>,
    #[serde(default)]
    pub initial: InitialBlock,
    #[serde(default)]
    pub pulses: Vec<PulseBlock>,
    #[serde(default)]
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    pub sweep: Option<SweepBlock>,
    pub validate: Option<ValidateBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// A parameter file: a versioned `[params]` table.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub schema_version: u32,
    pub params: BTreeMap<String, ParamValue>,
}

impl ParamFile {
    pub fn load(path: &Path) -> Result<Self> {
        let file: Self = parse_toml(path)?;
        check_version(file.schema_version, path)?;
        Ok(file)
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    toml::from_str(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn check_version(found: u32, path: &Path) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{}: schema_version {found} is not supported (expected {SCHEMA_VERSION})",
            path.display()
        )));
    }
    Ok(())
}

/// What a scenario is being run for; decides which blocks are required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Validate,
}

/// A loaded scenario with its parameters resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: SystemParams,
    pub source: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let config: ScenarioConfig = parse_toml(path)?;
        Self::from_config(config, path)
    }

    /// Resolves parameters; a relative `params_file` is taken from the
    /// directory of `source`.
    pub fn from_config(config: ScenarioConfig, source: &Path) -> Result<Self> {
        check_version(config.schema_version, source)?;
        let mut params = SystemParams::default();
        if let Some(file) = &config.params_file {
            let path = match source.parent() {
                Some(dir) if file.is_relative() => dir.join(file),
                _ => file.clone(),
            };
            for (name, v) in ParamFile::load(&path)?.params {
                set_param(&mut params, &name, v)?;
            }
        }
        for (name, &v) in &config.params {
            set_param(&mut params, name, v)?;
        }
        Ok(Self { config, params, source: source.to_path_buf() })
    }

    pub fn stem(&self) -> &str {
        self.config.output.stem.as_deref().unwrap_or(&self.config.name)
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, raw) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
        let (key, raw) = (key.trim(), raw.trim());
        let bad = |e: &dyn fmt::Display| CliError::Config(format!("override `{key}`: {e}"));
        let float = || raw.parse::<f64>().map_err(|e| bad(&e));
        let int = || raw.parse::<usize>().map_err(|e| bad(&e));
        let integ = &mut self.config.integrator;
        match key {
            "rtol" => integ.rtol = Some(float()?),
            "atol" => integ.atol = Some(float()?),
            "max_step" => integ.max_step = Some(float()?),
            "max_steps" => integ.max_steps = Some(int()?),
            "krylov_dim" => integ.krylov_dim = Some(int()?),
            "validate.min_deviation" => {
                self.config.validate.get_or_insert_with(Default::default).min_deviation = float()?
            }
            "validate.max_deviation" => {
                self.config.validate.get_or_insert_with(Default::default).max_deviation = Some(float()?)
            }
            _ => {
                return Err(CliError::Config(format!(
                    "unknown override `{key}` (expected rtol, atol, max_step, max_steps, krylov_dim, \
                     validate.min_deviation or validate.max_deviation)"
                )))
            }
        }
        Ok(())
    }

    pub fn space(&self) -> SpaceConfig {
        SpaceConfig::new(self.config.space.n_max1, self.config.space.n_max2)
    }

    pub fn initial_level(&self) -> Result<Level> {
        Level::from_label(&self.config.initial.level).map_err(|e| CliError::core("initial.level", e))
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let d = EvolveOptions::default();
        let i = &self.config.integrator;
        EvolveOptions {
            rtol: i.rtol.unwrap_or(d.rtol),
            atol: i.atol.unwrap_or(d.atol),
            max_steps: i.max_steps.unwrap_or(d.max_steps),
            krylov_dim: i.krylov_dim.unwrap_or(d.krylov_dim),
            max_step: i.max_step.or(d.max_step),
            ..d
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        let t = self.config.time.ok_or_else(|| CliError::Config("a [time] block is required".into()))?;
        TimeGrid::linspace(t.t_start, t.t_end, t.points).map_err(|e| CliError::core("time", e))
    }

    /// Pulse trains per target, merged across blocks.
    pub fn pulse_trains(&self) -> Result<Vec<(PulseTarget, PulseTrain)>> {
        let mut out: Vec<(PulseTarget, PulseTrain)> = Vec::new();
        for (k, b) in self.config.pulses.iter().enumerate() {
            let target = PulseTarget::from(b.target);
            let train = PulseTrain::new(b.amplitude, b.width, &b.centers)
                .map_err(|e| CliError::core(format!("pulses[{k}]"), e))?;
            train.validate_for(target).map_err(|e| CliError::core(format!("pulses[{k}]"), e))?;
            match out.iter_mut().find(|(t, _)| *t == target) {
                Some((_, existing)) => *existing = existing.concat(&train),
                None => out.push((target, train)),
            }
        }
        Ok(out)
    }

    /// Schema-level checks for `command`, run before any computation.
    pub fn check(&self, command: Command) -> Result<()> {
        let c = &self.config;
        let cfg_err = |m: String| Err(CliError::Config(m));
        self.params.validate().map_err(|e| CliError::core("params", e))?;
        self.initial_level()?;
        let opts = self.evolve_options();
        if !(opts.rtol > 0.0 && opts.atol > 0.0) {
            return cfg_err(format!("integrator tolerances must be positive (rtol {}, atol {})", opts.rtol, opts.atol));
        }
        if let Some(h) = opts.max_step {
            if !(h > 0.0) {
                return cfg_err(format!("integrator.max_step must be positive, got {h}"));
            }
        }
        self.pulse_trains()?;
        let check_observables = |list: &[Observable], stationary: bool, model: ModelKind| -> Result<()> {
            if list.is_empty() {
                return cfg_err("observable list is empty".into());
            }
            for &o in list {
                if o.full_only() && model != ModelKind::Full {
                    return cfg_err(format!("observable `{o}` needs model = \"full\""));
                }
                if stationary && o.dynamic_only() {
                    return cfg_err(format!("observable `{o}` is not defined for a steady-state sweep"));
                }
                if !stationary && o.stationary_only() {
                    return cfg_err(format!("observable `{o}` is only defined for sweeps"));
                }
                if o == Observable::Rho22Formula && model != ModelKind::Effective {
                    return cfg_err(format!("observable `{o}` needs model = \"effective\""));
                }
            }
            Ok(())
        };
        match command {
            Command::Simulate => {
                self.grid()?;
                check_observables(
                    &c.observables,
                    false,
                    if c.model == ModelKind::Both { ModelKind::Effective } else { c.model },
                )?;
            }
            Command::Sweep => {
                let Some(sweep) = &c.sweep else { return cfg_err("a [sweep] block is required".into()) };
                if c.model == ModelKind::Both {
                    return cfg_err("sweeps run one model; use \"full\" or \"effective\"".into());
                }
                if !c.pulses.is_empty() {
                    return cfg_err("sweeps compute steady states; pulses are not allowed".into());
                }
                if sweep.axes.is_empty() {
                    return cfg_err("sweep needs at least one axis".into());
                }
                for axis in &sweep.axes {
                    if get_param(&SystemParams::default(), &axis.parameter).is_none() {
                        return cfg_err(format!("sweep axis names unknown parameter `{}`", axis.parameter));
                    }
                    axis.grid()?;
                }
                check_observables(&sweep.observables, true, c.model)?;
            }
            Command::Validate => {
                if c.model != ModelKind::Both {
                    return cfg_err("validation compares both models; set model = \"both\"".into());
                }
                if c.validate.is_none() {
                    return cfg_err("a [validate] block is required".into());
                }
                self.grid()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterBlock {
    /// Transition dipole moment (C·m).
    pub dipole: f64,
    /// Relative permittivity of the host medium.
    pub permittivity: f64,
}

/// One antenna mode to characterize from a spectrum file.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModeFitBlock {
    pub mode: u8,
    pub spectrum: PathBuf,
    /// Frequency window `[lo, hi]` (rad/s) restricting both channel fits.
    pub window: Option<[f64; 2]>,
    /// Emitter transition frequency coupled to this mode (rad/s).
    pub transition_omega: f64,
    /// Far-field scattering enhancement at resonance, `P_sca/P⁰_sca`.
    pub purcell_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub emitter: EmitterBlock,
    pub modes: Vec<ModeFitBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

impl FitConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = parse_toml(path)?;
        check_version(cfg.schema_version, path)?;
        if cfg.modes.is_empty() {
            return Err(CliError::Config("fit needs at least one [[modes]] entry".into()));
        }
        let mut seen = Vec::new();
        for m in &cfg.modes {
            if !(m.mode == 1 || m.mode == 2) || seen.contains(&m.mode) {
                return Err(CliError::Config(format!("modes must be 1 and/or 2, each once (got mode {})", m.mode)));
            }
            seen.push(m.mode);
            if let Some([lo, hi]) = m.window {
                if !(lo < hi) {
                    return Err(CliError::Config(format!("mode {}: window [{lo}, {hi}] is empty", m.mode)));
                }
            }
        }
        Ok(cfg)
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(&self.name)
    }
}
