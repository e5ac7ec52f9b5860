//! Single-run recipes behind the `moments`, `simulate` and `wigner`
//! subcommands.

use std::fmt;
use std::str::FromStr;

use super::{
    base_manifest, default_dim, gnuplot_header, simulate_coherent, ExperimentOutput, Manifest,
    Numerics, RunSummary, SanityReport, Table,
};
use crate::closed_forms::{dephasing_first_moment, kerr_first_moment, sm_first_moment};
use crate::diagnostics::{
    negativity_volume, wigner, x2_tilde_variance, ys_fidelity, WignerSpec,
    DEFAULT_WIGNER_RESOLUTION,
};
use crate::error::{KerrError, Result};
use crate::fock::C64;
use crate::models::{preset, ModelSpec, Preset};

fn write_alpha(m: &mut Manifest, alpha0: C64) {
    m.set_real("alpha_re", alpha0.re);
    m.set_real("alpha_im", alpha0.im);
}

fn read_alpha(m: &Manifest) -> Result<C64> {
    Ok(C64::new(m.parse("alpha_re")?, m.parse("alpha_im")?))
}

fn write_model(m: &mut Manifest, model: Preset, chi: f64, gamma: Option<f64>) {
    m.set("model", model);
    m.set_real("chi", chi);
    match gamma {
        Some(g) => m.set_real("gamma", g),
        None => m.set("gamma", "none"),
    }
}

fn read_model(m: &Manifest) -> Result<(Preset, f64, Option<f64>)> {
    let model: Preset = m.require("model")?.parse().map_err(|_| {
        KerrError::Manifest(format!("unknown model `{}`", m.get("model").unwrap_or("")))
    })?;
    Ok((model, m.parse("chi")?, m.parse_optional("gamma")?))
}

/// Closed form tabulated by `moments`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentModel {
    /// The `1/C²` first-moment formula.
    Sm,
    Kerr,
    Dephasing,
}

impl MomentModel {
    pub fn name(self) -> &'static str {
        match self {
            MomentModel::Sm => "sm",
            MomentModel::Kerr => "kerr",
            MomentModel::Dephasing => "dephasing",
        }
    }

    fn first_moment(self, alpha0: C64, chi: f64, tau: f64) -> C64 {
        match self {
            MomentModel::Sm => sm_first_moment(alpha0, chi, tau).value,
            MomentModel::Kerr => kerr_first_moment(alpha0, chi, tau),
            MomentModel::Dephasing => dephasing_first_moment(alpha0, chi, tau),
        }
    }
}

impl fmt::Display for MomentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MomentModel {
    type Err = KerrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sm" => Ok(MomentModel::Sm),
            "kerr" | "pure_kerr" => Ok(MomentModel::Kerr),
            "dephasing" | "kerr_dephasing" => Ok(MomentModel::Dephasing),
            other => Err(KerrError::InvalidParameter(format!(
                "unknown closed-form model `{other}` (expected sm, kerr or dephasing)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsConfig {
    pub model: MomentModel,
    pub chi: f64,
    pub alpha0: C64,
    pub start_chitau: f64,
    pub end_chitau: f64,
    pub count: usize,
}

impl MomentsConfig {
    fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0) {
            return Err(KerrError::InvalidParameter(format!(
                "chi must be positive, got {}",
                self.chi
            )));
        }
        if self.count == 0 {
            return Err(KerrError::InvalidParameter(
                "grid needs at least one point".into(),
            ));
        }
        if !(self.start_chitau >= 0.0 && self.end_chitau >= self.start_chitau) {
            return Err(KerrError::InvalidParameter(
                "grid must satisfy 0 <= start <= end".into(),
            ));
        }
        Ok(())
    }

    /// `count` evenly spaced points, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start_chitau];
        }
        let step = (self.end_chitau - self.start_chitau) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start_chitau + i as f64 * step)
            .collect()
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("moments");
        m.set("model", self.model);
        m.set_real("chi", self.chi);
        write_alpha(&mut m, self.alpha0);
        m.set_real("grid_start_chitau", self.start_chitau);
        m.set_real("grid_end_chitau", self.end_chitau);
        m.set("grid_count", self.count);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        Ok(Self {
            model: m.require("model")?.parse()?,
            chi: m.parse("chi")?,
            alpha0: read_alpha(m)?,
            start_chitau: m.parse("grid_start_chitau")?,
            end_chitau: m.parse("grid_end_chitau")?,
            count: m.parse("grid_count")?,
        })
    }
}

pub fn run_moments(cfg: &MomentsConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut table = Table::new([
        "chi_tau",
        "tau",
        "mean_a_re",
        "mean_a_im",
        "abs_mean_a",
        "envelope",
    ]);
    for ct in cfg.grid() {
        let tau = ct / cfg.chi;
        let a = cfg.model.first_moment(cfg.alpha0, cfg.chi, tau);
        table.push(vec![
            ct.into(),
            tau.into(),
            a.re.into(),
            a.im.into(),
            a.norm().into(),
            (cfg.alpha0.norm() * (-cfg.chi * cfg.chi * tau).exp()).into(),
        ]);
    }
    let mut plot = gnuplot_header("moments.csv", "chi*tau");
    plot.push_str(
        "set ylabel '<a>'\n\
         plot csv using 1:3 skip 1 with lines title 'Re', \\\n     \
         csv using 1:4 skip 1 with lines title 'Im', \\\n     \
         csv using 1:5 skip 1 with lines title 'abs', \\\n     \
         csv using 1:6 skip 1 with lines dt 2 title '|alpha0| exp(-chi^2 tau)'\n",
    );
    Ok(ExperimentOutput {
        name: "moments".into(),
        table,
        manifest: cfg.to_manifest(),
        plot: Some(plot),
        summary: RunSummary {
            sanity: SanityReport::default(),
            message: format!("moments: {} closed form, {} points", cfg.model, cfg.count),
        },
    })
}

fn build_model(model: Preset, chi: f64, gamma: Option<f64>) -> Result<ModelSpec> {
    preset(model, chi, gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub model: Preset,
    pub chi: f64,
    pub gamma: Option<f64>,
    pub alpha0: C64,
    /// Defaults to the truncation rule with margin.
    pub dim: Option<usize>,
    pub t_end_chitau: f64,
    pub samples: usize,
    pub numerics: Numerics,
}

impl SimulateConfig {
    pub fn dim(&self) -> usize {
        self.dim
            .unwrap_or_else(|| default_dim(self.alpha0.norm_sqr()))
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("simulate");
        write_model(&mut m, self.model, self.chi, self.gamma);
        write_alpha(&mut m, self.alpha0);
        m.set("dim", self.dim());
        m.set_real("t_end_chitau", self.t_end_chitau);
        m.set("samples", self.samples);
        self.numerics.write(&mut m);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        let (model, chi, gamma) = read_model(m)?;
        Ok(Self {
            model,
            chi,
            gamma,
            alpha0: read_alpha(m)?,
            dim: Some(m.parse("dim")?),
            t_end_chitau: m.parse("t_end_chitau")?,
            samples: m.parse("samples")?,
            numerics: Numerics::read(m)?,
        })
    }
}

pub fn run_simulate(cfg: &SimulateConfig) -> Result<ExperimentOutput> {
    let model = build_model(cfg.model, cfg.chi, cfg.gamma)?;
    if cfg.samples == 0 {
        return Err(KerrError::InvalidParameter(
            "samples must be at least 1".into(),
        ));
    }
    let mut table = Table::new([
        "tau",
        "chi_tau",
        "mean_a_re",
        "mean_a_im",
        "abs_mean_a",
        "mean_a2_re",
        "mean_a2_im",
        "mean_n",
        "var_x2_tilde",
        "purity",
        "ys_fidelity",
        "ys_fidelity_plus",
        "trace_err",
        "herm_defect",
        "top_level_pop",
    ]);
    let traj = simulate_coherent(
        &model,
        cfg.alpha0,
        cfg.dim(),
        cfg.t_end_chitau,
        cfg.samples,
        &cfg.numerics,
        |rec, rho| {
            let fid = ys_fidelity(rho, cfg.alpha0)?;
            let m = &rec.moments;
            table.push(vec![
                rec.tau.into(),
                (cfg.chi * rec.tau).into(),
                m.a.re.into(),
                m.a.im.into(),
                m.a.norm().into(),
                m.a2.re.into(),
                m.a2.im.into(),
                m.n.into(),
                x2_tilde_variance(rho, rec.tau, cfg.chi, cfg.alpha0)?.into(),
                rec.purity.into(),
                fid.best().into(),
                fid.plus.into(),
                rec.sanity.trace_err.into(),
                rec.sanity.herm_defect.into(),
                rec.sanity.top_level_pop.into(),
            ]);
            Ok(())
        },
    )?;
    let mut manifest = cfg.to_manifest();
    manifest.set_real("dt_used", traj.dt);
    manifest.set(
        "steps",
        (cfg.t_end_chitau / cfg.chi / traj.dt).round() as u64,
    );

    let mut plot = gnuplot_header("simulate.csv", "chi*tau");
    plot.push_str(
        "set ylabel 'value'\n\
         plot csv using 2:5 skip 1 with lines title '|<a>|', \\\n     \
         csv using 2:9 skip 1 with lines title 'Var(X2~)', \\\n     \
         csv using 2:11 skip 1 with lines title 'YS fidelity', \\\n     \
         csv using 2:10 skip 1 with lines title 'purity'\n",
    );

    let last = traj.records.last().expect("at least one sample");
    Ok(ExperimentOutput {
        name: "simulate".into(),
        table,
        manifest,
        plot: Some(plot),
        summary: RunSummary {
            sanity: SanityReport::of(&traj, &model),
            message: format!(
                "simulate: {} chi={} dim={} dt={:.3e} samples={} final |<a>|={:.6e}",
                cfg.model,
                cfg.chi,
                cfg.dim(),
                traj.dt,
                traj.records.len(),
                last.moments.a.norm()
            ),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerConfig {
    pub model: Preset,
    pub chi: f64,
    pub gamma: Option<f64>,
    pub alpha0: C64,
    pub dim: Option<usize>,
    /// Evolution time at which the Wigner function is taken.
    pub at_chitau: f64,
    pub resolution: usize,
    /// Defaults to the smallest accepted extent.
    pub half_width: Option<f64>,
    pub numerics: Numerics,
}

impl WignerConfig {
    pub fn dim(&self) -> usize {
        self.dim
            .unwrap_or_else(|| default_dim(self.alpha0.norm_sqr()))
    }

    pub fn defaults_for(model: Preset, chi: f64, gamma: Option<f64>, alpha0: C64) -> Self {
        Self {
            model,
            chi,
            gamma,
            alpha0,
            dim: None,
            at_chitau: std::f64::consts::FRAC_PI_2,
            resolution: DEFAULT_WIGNER_RESOLUTION,
            half_width: None,
            numerics: Numerics::default(),
        }
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("wigner");
        write_model(&mut m, self.model, self.chi, self.gamma);
        write_alpha(&mut m, self.alpha0);
        m.set("dim", self.dim());
        m.set_real("at_chitau", self.at_chitau);
        m.set("resolution", self.resolution);
        match self.half_width {
            Some(h) => m.set_real("half_width", h),
            None => m.set("half_width", "none"),
        }
        self.numerics.write(&mut m);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        let (model, chi, gamma) = read_model(m)?;
        Ok(Self {
            model,
            chi,
            gamma,
            alpha0: read_alpha(m)?,
            dim: Some(m.parse("dim")?),
            at_chitau: m.parse("at_chitau")?,
            resolution: m.parse("resolution")?,
            half_width: m.parse_optional("half_width")?,
            numerics: Numerics::read(m)?,
        })
    }
}

pub fn run_wigner(cfg: &WignerConfig) -> Result<ExperimentOutput> {
    let model = build_model(cfg.model, cfg.chi, cfg.gamma)?;
    let traj = simulate_coherent(
        &model,
        cfg.alpha0,
        cfg.dim(),
        cfg.at_chitau,
        2,
        &cfg.numerics,
        |_, _| Ok(()),
    )?;
    let rho = &traj.final_state;
    let spec = match cfg.half_width {
        Some(h) => WignerSpec::square(h, cfg.resolution),
        None => WignerSpec::for_state(rho, cfg.resolution),
    };
    let grid = wigner(rho, &spec)?;
    let mut table = Table::new(["x", "p", "w"]);
    for (i, &x) in grid.xs.iter().enumerate() {
        for (j, &p) in grid.ps.iter().enumerate() {
            table.push(vec![x.into(), p.into(), grid.values[(i, j)].into()]);
        }
    }
    let neg = negativity_volume(&grid);
    let mut manifest = cfg.to_manifest();
    manifest.set_real("dt_used", traj.dt);

    let mut plot = gnuplot_header("wigner.csv", "x");
    plot.push_str(&format!(
        "set ylabel 'p'\n\
         set view map\n\
         set size square\n\
         set dgrid3d {0},{0}\n\
         splot csv using 1:2:3 skip 1 with pm3d notitle\n",
        cfg.resolution
    ));

    Ok(ExperimentOutput {
        name: "wigner".into(),
        table,
        manifest,
        plot: Some(plot),
        summary: RunSummary {
            sanity: SanityReport::of(&traj, &model),
            message: format!(
                "wigner: {}x{} grid at chi*tau={:.6}, integral={:.6}, min={:.6e}, negativity={:.6e}",
                cfg.resolution,
                cfg.resolution,
                cfg.at_chitau,
                grid.integral(),
                grid.min(),
                neg
            ),
        },
    })
}
