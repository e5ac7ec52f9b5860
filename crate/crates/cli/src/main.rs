//! `kerrcat`: closed forms, simulations and the named experiments.

mod config;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kerrcat::experiments::{
    rerun_file, run_chi_sweep, run_damping_contrast, run_fig1, run_moment_validation, run_moments,
    run_simulate, run_wigner, ContrastConfig, ExperimentOutput, Fig1Config, MomentModel,
    MomentsConfig, Numerics, SimulateConfig, SweepConfig, ValidationConfig, WignerConfig,
    DEFAULT_DT_FACTOR,
};
use kerrcat::{KerrError, Preset, C64};

use parse::{parse_real, DimList, Grid, RealList};

const EXIT_INVALID: u8 = 2;
const EXIT_LEAK: u8 = 3;
const EXIT_SANITY: u8 = 4;
const EXIT_IO: u8 = 5;

/// Kerr evolution with phase diffusion: closed-form moments, master-equation
/// simulation and cat-state diagnostics.
///
/// Times are given as χτ and accept pi-expressions such as `pi/2` or `3pi`.
/// Every run writes `<name>.csv`, `<name>.manifest` and `<name>.gp` to the
/// output directory.
#[derive(Debug, Parser)]
#[command(name = "kerrcat", version, args_override_self = true)]
struct Cli {
    /// Output directory.
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        env = "KERRCAT_OUT_DIR",
        default_value = "."
    )]
    out: PathBuf,

    /// TOML file of flag values (keys are flag names); flags given on the
    /// command line take precedence.
    #[arg(long, global = true, help_heading = "Global options")]
    config: Option<PathBuf>,

    /// Worker threads for independent parameter points [default: all cores].
    #[arg(long, global = true, help_heading = "Global options")]
    jobs: Option<usize>,

    /// Memory budget for stored state snapshots before switching to
    /// observable-only streaming.
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value_t = 512
    )]
    memory_budget_mb: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate a closed-form first moment on a χτ grid.
    Moments(MomentsArgs),
    /// Integrate the master equation from a coherent state and record observables.
    Simulate(SimulateArgs),
    /// Variance, |<a>|, YS fidelity and Wigner negativity versus χτ for two initial amplitudes.
    Fig1(Fig1Args),
    /// YS fidelity and negativity at χτ = π/2 across feedback gains.
    Sweep(SweepArgs),
    /// First-moment survival relative to pure Kerr: phase diffusion versus damping.
    Contrast(ContrastArgs),
    /// Closed forms versus the simulator on a (χ, |α₀|², χτ) grid; fails above tolerance.
    Validate(ValidateArgs),
    /// Wigner function of the evolved state on a square grid.
    Wigner(WignerArgs),
    /// Re-run an experiment from a written manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct AlphaArgs {
    /// |α₀|² of the initial coherent state (α₀ real positive).
    #[arg(long, default_value = "4.0", value_parser = parse_real)]
    alpha2: f64,

    /// Real part of α₀; with --alpha-im, overrides --alpha2.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
    alpha_re: Option<f64>,

    /// Imaginary part of α₀; with --alpha-re, overrides --alpha2.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
    alpha_im: Option<f64>,
}

impl AlphaArgs {
    fn alpha0(&self) -> C64 {
        if self.alpha_re.is_some() || self.alpha_im.is_some() {
            C64::new(self.alpha_re.unwrap_or(0.0), self.alpha_im.unwrap_or(0.0))
        } else {
            C64::new(self.alpha2.max(0.0).sqrt(), 0.0)
        }
    }

    fn validate(&self) -> Result<(), KerrError> {
        if self.alpha2 < 0.0 {
            return Err(KerrError::InvalidParameter(format!(
                "--alpha2 must be non-negative, got {}",
                self.alpha2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
struct NumericsArgs {
    /// Fixed time step in τ units [default: dt-factor × stability bound].
    #[arg(long, value_parser = parse_real)]
    dt: Option<f64>,

    /// Fraction of the stability bound used when --dt is not given.
    #[arg(long, default_value_t = DEFAULT_DT_FACTOR)]
    dt_factor: f64,
}

impl NumericsArgs {
    fn numerics(&self, memory_budget_mb: usize) -> Numerics {
        Numerics {
            dt_factor: self.dt_factor,
            dt: self.dt,
            memory_budget_bytes: memory_budget_mb.saturating_mul(1024 * 1024),
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model preset: kerr, dephasing (rate 2χ²) or damping (rate --gamma).
    #[arg(long, default_value = "dephasing")]
    model: Preset,

    /// Feedback gain χ.
    #[arg(long, default_value = "0.3", value_parser = parse_real)]
    chi: f64,

    /// Damping rate γ; required for --model damping only.
    #[arg(long, value_parser = parse_real)]
    gamma: Option<f64>,

    #[command(flatten)]
    alpha: AlphaArgs,

    /// Fock truncation [default: ceil(1.5(|α₀|²+6|α₀|+10))].
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    /// Closed form: sm (1/C² formula), kerr or dephasing.
    #[arg(long, default_value = "sm")]
    model: MomentModel,

    /// Feedback gain χ.
    #[arg(long, default_value = "0.3", value_parser = parse_real)]
    chi: f64,

    #[command(flatten)]
    alpha: AlphaArgs,

    /// χτ grid as start:end:count.
    #[arg(long, default_value = "0:3pi:601")]
    grid: Grid,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Final χτ.
    #[arg(long, default_value = "pi/2", value_parser = parse_real)]
    t_end_chitau: f64,

    /// Number of uniform samples including both endpoints.
    #[arg(long, default_value_t = 101)]
    samples: usize,

    #[command(flatten)]
    numerics: NumericsArgs,
}

#[derive(Debug, Args)]
struct Fig1Args {
    /// Feedback gain χ.
    #[arg(long, default_value = "0.3", value_parser = parse_real)]
    chi: f64,

    /// One curve per |α₀|².
    #[arg(long, default_value = "4.0,1.0")]
    alpha2: RealList,

    /// Fock truncation per curve.
    #[arg(long, default_value = "64,32")]
    dims: DimList,

    /// Final χτ.
    #[arg(long, default_value = "3pi", value_parser = parse_real)]
    t_end_chitau: f64,

    /// Samples per curve including both endpoints.
    #[arg(long, default_value_t = 601)]
    samples: usize,

    /// Wigner grid points per axis for the negativity column.
    #[arg(long, default_value_t = 101)]
    wigner_resolution: usize,

    #[command(flatten)]
    numerics: NumericsArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Feedback gains, strictly ascending.
    #[arg(long, default_value = "0.1,0.2,0.3,0.5,1.0")]
    chis: RealList,

    /// |α₀|² of the initial coherent state.
    #[arg(long, default_value = "4.0", value_parser = parse_real)]
    alpha2: f64,

    /// Fock truncation [default: ceil(1.5(|α₀|²+6|α₀|+10))].
    #[arg(long)]
    dim: Option<usize>,

    /// Wigner grid points per axis.
    #[arg(long, default_value_t = 201)]
    wigner_resolution: usize,

    #[command(flatten)]
    numerics: NumericsArgs,
}

#[derive(Debug, Args)]
struct ContrastArgs {
    /// Feedback gain χ.
    #[arg(long, default_value = "0.3", value_parser = parse_real)]
    chi: f64,

    /// Damping rate γ of the zero-temperature bath.
    #[arg(long, default_value = "0.2", value_parser = parse_real)]
    gamma: f64,

    /// Initial photon numbers |α₀|².
    #[arg(long, default_value = "1.0,4.0,9.0")]
    alpha2: RealList,

    /// Fock truncation per |α₀|² [default: ceil(1.5(|α₀|²+6|α₀|+10)) each].
    #[arg(long)]
    dims: Option<DimList>,

    /// Evaluation time χτ*.
    #[arg(long, default_value = "pi", value_parser = parse_real)]
    chi_tau: f64,

    #[command(flatten)]
    numerics: NumericsArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Feedback gains.
    #[arg(long, default_value = "0.1,0.3")]
    chis: RealList,

    /// Initial photon numbers |α₀|².
    #[arg(long, default_value = "1.0,4.0")]
    alpha2: RealList,

    /// Fock truncations; every (χ, |α₀|²) point runs at each.
    #[arg(long, default_value = "64")]
    dims: DimList,

    /// Final χτ.
    #[arg(long, default_value = "2pi", value_parser = parse_real)]
    t_end_chitau: f64,

    /// Samples per run including both endpoints.
    #[arg(long, default_value_t = 201)]
    samples: usize,

    /// Largest accepted simulator vs closed-form deviation.
    #[arg(long, default_value = "1e-6", value_parser = parse_real)]
    tol: f64,

    #[command(flatten)]
    numerics: NumericsArgs,
}

#[derive(Debug, Args)]
struct WignerArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Evolution time χτ at which the Wigner function is taken.
    #[arg(long, default_value = "pi/2", value_parser = parse_real)]
    at_chitau: f64,

    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    resolution: usize,

    /// Grid half-width [default: sqrt(<n>)+3, the smallest accepted].
    #[arg(long, value_parser = parse_real)]
    half_width: Option<f64>,

    #[command(flatten)]
    numerics: NumericsArgs,
}

#[derive(Debug, Args)]
struct RerunArgs {
    /// Manifest written by an earlier run.
    manifest: PathBuf,
}

fn run(cli: &Cli) -> Result<ExperimentOutput, KerrError> {
    let budget = cli.memory_budget_mb;
    match &cli.command {
        Command::Moments(a) => {
            a.alpha.validate()?;
            run_moments(&MomentsConfig {
                model: a.model,
                chi: a.chi,
                alpha0: a.alpha.alpha0(),
                start_chitau: a.grid.start,
                end_chitau: a.grid.end,
                count: a.grid.count,
            })
        }
        Command::Simulate(a) => {
            a.model.alpha.validate()?;
            run_simulate(&SimulateConfig {
                model: a.model.model,
                chi: a.model.chi,
                gamma: a.model.gamma,
                alpha0: a.model.alpha.alpha0(),
                dim: a.model.dim,
                t_end_chitau: a.t_end_chitau,
                samples: a.samples,
                numerics: a.numerics.numerics(budget),
            })
        }
        Command::Fig1(a) => run_fig1(&Fig1Config {
            chi: a.chi,
            alpha0_sq: a.alpha2.0.clone(),
            dims: a.dims.0.clone(),
            t_end_chitau: a.t_end_chitau,
            samples: a.samples,
            wigner_resolution: a.wigner_resolution,
            numerics: a.numerics.numerics(budget),
        }),
        Command::Sweep(a) => run_chi_sweep(&SweepConfig {
            chis: a.chis.0.clone(),
            alpha0_sq: a.alpha2,
            dim: a.dim,
            wigner_resolution: a.wigner_resolution,
            numerics: a.numerics.numerics(budget),
        }),
        Command::Contrast(a) => run_damping_contrast(&ContrastConfig {
            chi: a.chi,
            gamma: a.gamma,
            alpha0_sq: a.alpha2.0.clone(),
            dims: a.dims.as_ref().map(|d| d.0.clone()),
            chi_tau: a.chi_tau,
            numerics: a.numerics.numerics(budget),
        }),
        Command::Validate(a) => run_moment_validation(&ValidationConfig {
            chis: a.chis.0.clone(),
            alpha0_sq: a.alpha2.0.clone(),
            dims: a.dims.0.clone(),
            t_end_chitau: a.t_end_chitau,
            samples: a.samples,
            tolerance: a.tol,
            numerics: a.numerics.numerics(budget),
        }),
        Command::Wigner(a) => {
            a.model.alpha.validate()?;
            let m = &a.model;
            run_wigner(&WignerConfig {
                dim: m.dim,
                at_chitau: a.at_chitau,
                resolution: a.resolution,
                half_width: a.half_width,
                numerics: a.numerics.numerics(budget),
                ..WignerConfig::defaults_for(m.model, m.chi, m.gamma, m.alpha.alpha0())
            })
        }
        Command::Rerun(a) => rerun_file(&a.manifest),
    }
}

fn exit_code(err: &KerrError) -> u8 {
    match err {
        KerrError::TruncationLeak { .. } => EXIT_LEAK,
        KerrError::SanityViolation { .. } => EXIT_SANITY,
        KerrError::Io(_) => EXIT_IO,
        KerrError::DimensionMismatch { .. }
        | KerrError::InvalidParameter(_)
        | KerrError::StabilityViolation { .. }
        | KerrError::ExtentTooSmall { .. }
        | KerrError::Manifest(_) => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match config::parse_with_config(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(config::ParseFailure::Clap(e)) => e.exit(),
        Err(config::ParseFailure::Config(msg)) => {
            eprintln!("kerrcat: invalid configuration: {msg}");
            return ExitCode::from(EXIT_INVALID);
        }
    };

    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("kerrcat: invalid configuration: --jobs: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }

    let result = run(&cli).and_then(|out| {
        let files = out.write(&cli.out)?;
        Ok((out, files))
    });
    match result {
        Ok((out, files)) => {
            println!(
                "{}; max sanity defect {:.3e}; wrote {}",
                out.summary.message,
                out.summary.max_sanity_defect(),
                files.csv.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kerrcat: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
