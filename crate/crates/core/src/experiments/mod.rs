//! Named, reproducible experiment recipes.
//!
//! Every recipe is a pure function of its configuration. The configuration
//! round-trips through a [`Manifest`], so [`rerun`] on a written manifest
//! reproduces the CSV byte for byte on the same platform.

mod contrast;
mod fig1;
mod io;
mod recipes;
mod sweep;
mod validation;

use std::path::{Path, PathBuf};

use crate::diagnostics::X2_TILDE_CONVENTION;
use crate::error::{KerrError, Result};
use crate::fock::{coherent_state, recommended_dim, TruncatedFockSpace, C64};
use crate::models::{ChannelKind, ModelSpec};
use crate::propagator::{
    evolve_observed, stability_dt, IntegrationPlan, SampleRecord, Trajectory,
    DEFAULT_MEMORY_BUDGET_BYTES, HERMITICITY_TOL, LEAK_TOL, POSITIVITY_TOL, TRACE_TOL,
};
use crate::DensityMatrix;

pub use contrast::{contrast_rows, run_damping_contrast, ContrastConfig, ContrastRow};
pub use fig1::{run_fig1, Fig1Config};
pub use io::{format_real, Cell, Manifest, Table};
pub use recipes::{
    run_moments, run_simulate, run_wigner, MomentModel, MomentsConfig, SimulateConfig, WignerConfig,
};
pub use sweep::{run_chi_sweep, strictly_decreasing, sweep_rows, SweepConfig, SweepRow};
pub use validation::{run_moment_validation, ValidationConfig, DEFAULT_VALIDATION_TOL};

/// Fraction of the stability bound used as the default step.
pub const DEFAULT_DT_FACTOR: f64 = 0.5;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Dimension used when none is given: truncation rule plus 50% margin.
pub fn default_dim(alpha0_sq: f64) -> usize {
    recommended_dim(alpha0_sq.sqrt())
}

/// Real positive `α₀` with the given `|α₀|²`.
pub fn real_alpha(alpha0_sq: f64) -> Result<C64> {
    if !(alpha0_sq.is_finite() && alpha0_sq >= 0.0) {
        return Err(KerrError::InvalidParameter(format!(
            "|alpha0|^2 must be finite and non-negative, got {alpha0_sq}"
        )));
    }
    Ok(C64::new(alpha0_sq.sqrt(), 0.0))
}

/// Numerical health aggregated over every simulation in an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanityReport {
    pub runs: usize,
    pub max_trace_err: f64,
    pub max_herm_defect: f64,
    pub max_top_level_pop: f64,
    /// Smallest eigenvalue seen at the positivity check points.
    pub min_eigenvalue: f64,
    /// Fewest positivity check points in any single run.
    pub min_positivity_checks: usize,
    /// Largest per-step purity increase over runs of number-conserving models.
    pub max_purity_rise: f64,
    /// Largest `|⟨n⟩(τ) − ⟨n⟩(0)|` over runs of number-conserving models.
    pub max_n_drift: f64,
}

impl Default for SanityReport {
    fn default() -> Self {
        Self {
            runs: 0,
            max_trace_err: 0.0,
            max_herm_defect: 0.0,
            max_top_level_pop: 0.0,
            min_eigenvalue: f64::INFINITY,
            min_positivity_checks: usize::MAX,
            max_purity_rise: f64::NEG_INFINITY,
            max_n_drift: 0.0,
        }
    }
}

impl SanityReport {
    pub fn of(traj: &Trajectory, model: &ModelSpec) -> Self {
        let conserving = model
            .channels()
            .iter()
            .all(|c| c.kind() != ChannelKind::Damping || c.rate() == 0.0);
        Self {
            runs: 1,
            max_trace_err: traj.max_trace_err(),
            max_herm_defect: traj.max_herm_defect(),
            max_top_level_pop: traj.max_top_level_pop(),
            min_eigenvalue: traj.min_eigenvalue(),
            min_positivity_checks: traj.positivity.len(),
            max_purity_rise: if conserving {
                traj.max_purity_rise
            } else {
                f64::NEG_INFINITY
            },
            max_n_drift: if conserving { traj.mean_n_drift() } else { 0.0 },
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            runs: self.runs + other.runs,
            max_trace_err: self.max_trace_err.max(other.max_trace_err),
            max_herm_defect: self.max_herm_defect.max(other.max_herm_defect),
            max_top_level_pop: self.max_top_level_pop.max(other.max_top_level_pop),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
            min_positivity_checks: self.min_positivity_checks.min(other.min_positivity_checks),
            max_purity_rise: self.max_purity_rise.max(other.max_purity_rise),
            max_n_drift: self.max_n_drift.max(other.max_n_drift),
        }
    }

    pub fn merge_all<'a>(reports: impl IntoIterator<Item = &'a SanityReport>) -> Self {
        reports
            .into_iter()
            .fold(Self::default(), |acc, r| acc.merge(*r))
    }

    /// Largest of trace error and hermiticity defect.
    pub fn max_sanity_defect(&self) -> f64 {
        self.max_trace_err.max(self.max_herm_defect)
    }
}

/// Summary printed by the CLI after a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub sanity: SanityReport,
    pub message: String,
}

impl RunSummary {
    pub fn max_sanity_defect(&self) -> f64 {
        self.sanity.max_sanity_defect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub name: String,
    pub table: Table,
    pub manifest: Manifest,
    pub plot: Option<String>,
    pub summary: RunSummary,
}

/// Files produced by [`ExperimentOutput::write`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub plot: Option<PathBuf>,
}

impl ExperimentOutput {
    pub fn csv(&self) -> String {
        self.table.to_csv()
    }

    /// Writes `<name>.csv`, `<name>.manifest` and, if present, `<name>.gp`.
    pub fn write(&self, dir: &Path) -> Result<WrittenFiles> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.name));
        let manifest = dir.join(format!("{}.manifest", self.name));
        std::fs::write(&csv, self.csv())?;
        std::fs::write(&manifest, self.manifest.to_text())?;
        let plot = match &self.plot {
            Some(script) => {
                let p = dir.join(format!("{}.gp", self.name));
                std::fs::write(&p, script)?;
                Some(p)
            }
            None => None,
        };
        Ok(WrittenFiles {
            csv,
            manifest,
            plot,
        })
    }
}

/// Re-runs the experiment recorded in `manifest`.
pub fn rerun(manifest: &Manifest) -> Result<ExperimentOutput> {
    match manifest.require("experiment")? {
        "fig1" => run_fig1(&Fig1Config::from_manifest(manifest)?),
        "chi_sweep" => run_chi_sweep(&SweepConfig::from_manifest(manifest)?),
        "damping_contrast" => run_damping_contrast(&ContrastConfig::from_manifest(manifest)?),
        "moment_validation" => run_moment_validation(&ValidationConfig::from_manifest(manifest)?),
        "moments" => run_moments(&MomentsConfig::from_manifest(manifest)?),
        "simulate" => run_simulate(&SimulateConfig::from_manifest(manifest)?),
        "wigner" => run_wigner(&WignerConfig::from_manifest(manifest)?),
        other => Err(KerrError::Manifest(format!("unknown experiment `{other}`"))),
    }
}

pub fn rerun_file(path: &Path) -> Result<ExperimentOutput> {
    rerun(&Manifest::read(path)?)
}

/// Keys shared by every manifest.
fn base_manifest(experiment: &str) -> Manifest {
    let mut m = Manifest::new();
    m.set("experiment", experiment);
    m.set("code_version", CODE_VERSION);
    m.set("x2_tilde_convention", X2_TILDE_CONVENTION);
    m.set(
        "quadrature_convention",
        "X1=(a+adag)/2;X2=(a-adag)/(2i);vacuum_var=1/4",
    );
    m.set("alpha0_phase", "0 (alpha0 real positive)");
    m.set("time_axis", "chi_tau");
    m
}

fn set_tolerances(m: &mut Manifest) {
    m.set(
        "dt_rule",
        "dt_max=dt_factor*0.1/(chi*(dim-1)^2+sum(rates)*(dim-1)^2+1e-12); dt=largest step <= dt_max dividing the sample spacing",
    );
    m.set_real("trace_tol", TRACE_TOL);
    m.set_real("hermiticity_tol", HERMITICITY_TOL);
    m.set_real("leak_tol", LEAK_TOL);
    m.set_real("positivity_tol", POSITIVITY_TOL);
}

/// Numerical settings shared by every simulated recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub dt_factor: f64,
    /// Fixed step overriding the rule; must still satisfy the stability bound.
    pub dt: Option<f64>,
    pub memory_budget_bytes: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt_factor: DEFAULT_DT_FACTOR,
            dt: None,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET_BYTES,
        }
    }
}

impl Numerics {
    fn validate(&self) -> Result<()> {
        if !(self.dt_factor > 0.0 && self.dt_factor <= 1.0) {
            return Err(KerrError::InvalidParameter(format!(
                "dt_factor must lie in (0, 1], got {}",
                self.dt_factor
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(KerrError::InvalidParameter(format!(
                    "dt must be positive, got {dt}"
                )));
            }
        }
        Ok(())
    }

    fn write(&self, m: &mut Manifest) {
        m.set_real("dt_factor", self.dt_factor);
        match self.dt {
            Some(dt) => m.set_real("dt_override", dt),
            None => m.set("dt_override", "none"),
        }
        m.set("memory_budget_bytes", self.memory_budget_bytes);
        set_tolerances(m);
    }

    fn read(m: &Manifest) -> Result<Self> {
        Ok(Self {
            dt_factor: m.parse("dt_factor")?,
            dt: m.parse_optional("dt_override")?,
            memory_budget_bytes: m.parse("memory_budget_bytes")?,
        })
    }
}

/// Integrates a coherent initial state `|α₀⟩` under `model` over
/// `χτ ∈ [0, t_end_chitau]` with `samples` uniform samples.
fn simulate_coherent<F>(
    model: &ModelSpec,
    alpha0: C64,
    dim: usize,
    t_end_chitau: f64,
    samples: usize,
    numerics: &Numerics,
    observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&SampleRecord, &DensityMatrix) -> Result<()>,
{
    numerics.validate()?;
    if !(t_end_chitau.is_finite() && t_end_chitau >= 0.0) {
        return Err(KerrError::InvalidParameter(format!(
            "t_end (chi*tau) must be finite and non-negative, got {t_end_chitau}"
        )));
    }
    let space = TruncatedFockSpace::new(dim)?;
    let rho0 = coherent_state(alpha0, space).projector();
    let t_end = t_end_chitau / model.chi();
    let plan = match numerics.dt {
        Some(dt) => {
            let sub = if samples > 1 {
                let spacing = t_end / (samples - 1) as f64;
                (spacing / dt).round().max(1.0) as usize
            } else {
                (t_end / dt).round().max(1.0) as usize
            };
            IntegrationPlan::new(t_end, dt, sub)?
        }
        None => IntegrationPlan::uniform(
            t_end,
            samples,
            numerics.dt_factor * stability_dt(model, space),
        )?,
    }
    .with_memory_budget(numerics.memory_budget_bytes);
    evolve_observed(&rho0, model, &plan, observer)
}

fn gnuplot_header(csv: &str, xlabel: &str) -> String {
    format!(
        "# gnuplot script; run with: gnuplot -p <this file>\n\
         set datafile separator ','\n\
         set xlabel '{xlabel}'\n\
         set grid\n\
         csv = '{csv}'\n"
    )
}
