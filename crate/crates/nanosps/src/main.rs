use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nanosps::{run, CliError, Command as Mode, FitConfig, Result, Scenario};

#[derive(Parser)]
#[command(name = "nanosps", version, about = "Triggered single-photon generation in a two-mode nanoantenna")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-resolved run of one scenario.
    Simulate(Common),
    /// Steady-state observables over a parameter grid.
    Sweep(Common),
    /// Loss rates and couplings from scattering and absorption spectra.
    Fit(Common),
    /// Compare the full and effective models; exits 1 outside the configured window.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario (or fit) configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps [default: $NANOSPS_WORKERS, else all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Override a tolerance, e.g. `rtol=1e-10` or `validate.max_deviation=0.05`.
    #[arg(long = "tolerance-override", value_name = "KEY=VAL")]
    overrides: Vec<String>,
}

fn scenario(c: &Common, mode: Mode) -> Result<Scenario> {
    let mut s = Scenario::load(&c.config)?;
    for o in &c.overrides {
        s.apply_override(o)?;
    }
    s.check(mode)?;
    Ok(s)
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Simulate(c) => {
            let s = scenario(&c, Mode::Simulate)?;
            let outputs = run::simulate(&s)?;
            run::write(&outputs, &c.out)?;
            for o in &outputs {
                eprintln!("wrote {}", c.out.join(format!("{}.csv", o.stem)).display());
            }
        }
        Command::Sweep(c) => {
            let s = scenario(&c, Mode::Sweep)?;
            let workers = run::resolve_workers(c.workers)?;
            let out = run::sweep(&s, workers)?;
            run::write(std::slice::from_ref(&out), &c.out)?;
            eprintln!("wrote {} ({} points)", c.out.join(format!("{}.csv", out.stem)).display(), out.table.rows.len());
        }
        Command::Fit(c) => {
            if !c.overrides.is_empty() {
                return Err(CliError::Config("fit takes no tolerance overrides".into()));
            }
            let cfg = FitConfig::load(&c.config)?;
            let outcome = run::fit(&cfg, base_dir(&c.config))?;
            run::write_fit(&outcome, &c.out)?;
            eprintln!("wrote {}", c.out.join(format!("{}.toml", outcome.stem)).display());
        }
        Command::Validate(c) => {
            let s = scenario(&c, Mode::Validate)?;
            let v = run::validate(&s)?;
            run::write(std::slice::from_ref(&v.output), &c.out)?;
            let verdict = if v.passed { "PASS" } else { "FAIL" };
            println!(
                "{verdict} {}: max relative rho_ee deviation {:.4e} (n2 {:.4e})",
                s.config.name, v.rho_ee_deviation, v.n2_deviation
            );
            if !v.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
