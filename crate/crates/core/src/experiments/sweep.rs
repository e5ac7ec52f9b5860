//! Cat quality at the first occurrence `χτ = π/2` as a function of χ.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use super::{
    base_manifest, default_dim, gnuplot_header, real_alpha, simulate_coherent, ExperimentOutput,
    Manifest, Numerics, RunSummary, SanityReport, Table,
};
use crate::diagnostics::{
    negativity_volume, wigner, ys_fidelity, WignerSpec, DEFAULT_WIGNER_RESOLUTION,
};
use crate::error::{KerrError, Result};
use crate::models::{preset, Preset};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Strictly ascending, all positive.
    pub chis: Vec<f64>,
    pub alpha0_sq: f64,
    /// Defaults to the truncation rule with margin.
    pub dim: Option<usize>,
    pub wigner_resolution: usize,
    pub numerics: Numerics,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            chis: vec![0.1, 0.2, 0.3, 0.5, 1.0],
            alpha0_sq: 4.0,
            dim: None,
            wigner_resolution: DEFAULT_WIGNER_RESOLUTION,
            numerics: Numerics::default(),
        }
    }
}

impl SweepConfig {
    pub fn dim(&self) -> usize {
        self.dim.unwrap_or_else(|| default_dim(self.alpha0_sq))
    }

    fn validate(&self) -> Result<()> {
        if self.chis.is_empty() {
            return Err(KerrError::InvalidParameter(
                "chi sweep needs at least one chi".into(),
            ));
        }
        if self.chis.iter().any(|&c| !(c > 0.0)) || !self.chis.windows(2).all(|w| w[0] < w[1]) {
            return Err(KerrError::InvalidParameter(
                "chi values must be positive and strictly ascending".into(),
            ));
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("chi_sweep");
        m.set("model", Preset::KerrDephasing);
        m.set_reals("chis", &self.chis);
        m.set_real("alpha0_sq", self.alpha0_sq);
        m.set("dim", self.dim());
        m.set_real("chi_tau", FRAC_PI_2);
        m.set("wigner_resolution", self.wigner_resolution);
        m.set("wigner_extent", "half-width sqrt(<n>)+3");
        self.numerics.write(&mut m);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        Ok(Self {
            chis: m.parse_list("chis")?,
            alpha0_sq: m.parse("alpha0_sq")?,
            dim: Some(m.parse("dim")?),
            wigner_resolution: m.parse("wigner_resolution")?,
            numerics: Numerics::read(m)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub chi: f64,
    pub dt: f64,
    /// Best over the `±i` branches.
    pub ys_fidelity: f64,
    pub ys_fidelity_plus: f64,
    pub negativity_volume: f64,
    /// `e^{−πχ/2}`, the first-moment damping factor at `χτ = π/2`.
    pub envelope: f64,
    pub sanity: SanityReport,
}

/// True when every element is strictly below its predecessor; vacuous for
/// fewer than two elements.
pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn sweep_point(cfg: &SweepConfig, chi: f64) -> Result<SweepRow> {
    let model = preset(Preset::KerrDephasing, chi, None)?;
    let alpha0 = real_alpha(cfg.alpha0_sq)?;
    let traj = simulate_coherent(
        &model,
        alpha0,
        cfg.dim(),
        FRAC_PI_2,
        2,
        &cfg.numerics,
        |_, _| Ok(()),
    )?;
    let rho = &traj.final_state;
    let fid = ys_fidelity(rho, alpha0)?;
    let grid = wigner(rho, &WignerSpec::for_state(rho, cfg.wigner_resolution))?;
    Ok(SweepRow {
        chi,
        dt: traj.dt,
        ys_fidelity: fid.best(),
        ys_fidelity_plus: fid.plus,
        negativity_volume: negativity_volume(&grid),
        envelope: (-FRAC_PI_2 * chi).exp(),
        sanity: SanityReport::of(&traj, &model),
    })
}

/// Runs the sweep and returns the typed rows alongside the table.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    cfg.chis
        .par_iter()
        .map(|&chi| sweep_point(cfg, chi))
        .collect()
}

pub fn run_chi_sweep(cfg: &SweepConfig) -> Result<ExperimentOutput> {
    let rows = sweep_rows(cfg)?;
    let mut table = Table::new([
        "chi",
        "alpha0_sq",
        "dim",
        "dt",
        "ys_fidelity",
        "ys_fidelity_plus",
        "negativity_volume",
        "envelope",
    ]);
    for r in &rows {
        table.push(vec![
            r.chi.into(),
            cfg.alpha0_sq.into(),
            cfg.dim().into(),
            r.dt.into(),
            r.ys_fidelity.into(),
            r.ys_fidelity_plus.into(),
            r.negativity_volume.into(),
            r.envelope.into(),
        ]);
    }
    let mut manifest = cfg.to_manifest();
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    manifest.set_reals("dt_used", &dts);

    let fids: Vec<f64> = rows.iter().map(|r| r.ys_fidelity).collect();
    let message = if rows.len() < 2 {
        "chi sweep: single point, no monotonicity check".to_string()
    } else {
        format!(
            "chi sweep: {} points, fidelity strictly decreasing: {}",
            rows.len(),
            strictly_decreasing(&fids)
        )
    };

    let mut plot = gnuplot_header("chi_sweep.csv", "chi");
    plot.push_str(
        "set ylabel 'value at chi*tau = pi/2'\n\
         set logscale x\n\
         plot csv using 1:5 skip 1 with linespoints title 'YS fidelity', \\\n     \
         csv using 1:7 skip 1 with linespoints title 'Wigner negativity', \\\n     \
         csv using 1:8 skip 1 with linespoints title 'exp(-pi*chi/2)'\n",
    );

    Ok(ExperimentOutput {
        name: "chi_sweep".into(),
        table,
        manifest,
        plot: Some(plot),
        summary: RunSummary {
            sanity: SanityReport::merge_all(rows.iter().map(|r| &r.sanity)),
            message,
        },
    })
}
