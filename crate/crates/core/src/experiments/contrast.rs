//! First-moment survival at `χτ = π` relative to pure Kerr, for phase
//! diffusion versus zero-temperature damping, across initial photon numbers.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{
    base_manifest, default_dim, gnuplot_header, real_alpha, simulate_coherent, ExperimentOutput,
    Manifest, Numerics, RunSummary, SanityReport, Table,
};
use crate::error::{KerrError, Result};
use crate::models::{preset, ModelSpec, Preset};

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastConfig {
    pub chi: f64,
    pub gamma: f64,
    pub alpha0_sq: Vec<f64>,
    /// Per-entry truncation; defaults to the truncation rule with margin.
    pub dims: Option<Vec<usize>>,
    pub chi_tau: f64,
    pub numerics: Numerics,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        Self {
            chi: 0.3,
            gamma: 0.2,
            alpha0_sq: vec![1.0, 4.0, 9.0],
            dims: None,
            chi_tau: PI,
            numerics: Numerics::default(),
        }
    }
}

impl ContrastConfig {
    pub fn dims(&self) -> Vec<usize> {
        match &self.dims {
            Some(d) => d.clone(),
            None => self.alpha0_sq.iter().map(|&a2| default_dim(a2)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alpha0_sq.is_empty() || self.dims().len() != self.alpha0_sq.len() {
            return Err(KerrError::InvalidParameter(
                "contrast needs one dim per |alpha0|^2 entry".into(),
            ));
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("damping_contrast");
        m.set("models", "kerr,dephasing,damping");
        m.set_real("chi", self.chi);
        m.set_real("gamma", self.gamma);
        m.set_reals("alpha0_sq", &self.alpha0_sq);
        m.set_list("dims", &self.dims());
        m.set_real("chi_tau", self.chi_tau);
        self.numerics.write(&mut m);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        Ok(Self {
            chi: m.parse("chi")?,
            gamma: m.parse("gamma")?,
            alpha0_sq: m.parse_list("alpha0_sq")?,
            dims: Some(m.parse_list("dims")?),
            chi_tau: m.parse("chi_tau")?,
            numerics: Numerics::read(m)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastRow {
    pub model: Preset,
    pub alpha0_sq: f64,
    pub dim: usize,
    pub abs_mean_a_model: f64,
    pub abs_mean_a_kerr: f64,
    /// `|⟨a⟩_model| / |⟨a⟩_kerr|`.
    pub ratio: f64,
    pub dt: f64,
    pub sanity: SanityReport,
}

struct Final {
    abs_a: f64,
    dt: f64,
    sanity: SanityReport,
}

fn final_abs_mean(
    cfg: &ContrastConfig,
    model: &ModelSpec,
    alpha0_sq: f64,
    dim: usize,
) -> Result<Final> {
    let traj = simulate_coherent(
        model,
        real_alpha(alpha0_sq)?,
        dim,
        cfg.chi_tau,
        2,
        &cfg.numerics,
        |_, _| Ok(()),
    )?;
    Ok(Final {
        abs_a: traj
            .records
            .last()
            .expect("at least one sample")
            .moments
            .a
            .norm(),
        dt: traj.dt,
        sanity: SanityReport::of(&traj, &model),
    })
}

/// Rows ordered by model (dephasing, then damping), then by `|α₀|²`.
pub fn contrast_rows(cfg: &ContrastConfig) -> Result<Vec<ContrastRow>> {
    cfg.validate()?;
    let kerr = preset(Preset::PureKerr, cfg.chi, None)?;
    let models = [
        preset(Preset::KerrDephasing, cfg.chi, None)?,
        preset(Preset::KerrDamping, cfg.chi, Some(cfg.gamma))?,
    ];
    let points: Vec<(f64, usize)> = cfg.alpha0_sq.iter().copied().zip(cfg.dims()).collect();

    let kerr_finals: Vec<Final> = points
        .par_iter()
        .map(|&(a2, d)| final_abs_mean(cfg, &kerr, a2, d))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|m| (0..points.len()).map(move |p| (m, p)))
        .collect();
    let finals: Vec<Final> = jobs
        .par_iter()
        .map(|&(m, p)| final_abs_mean(cfg, &models[m], points[p].0, points[p].1))
        .collect::<Result<_>>()?;

    Ok(jobs
        .iter()
        .zip(finals)
        .map(|(&(m, p), f)| {
            let k = &kerr_finals[p];
            ContrastRow {
                model: models[m].preset().expect("built from a preset"),
                alpha0_sq: points[p].0,
                dim: points[p].1,
                abs_mean_a_model: f.abs_a,
                abs_mean_a_kerr: k.abs_a,
                ratio: f.abs_a / k.abs_a,
                dt: f.dt,
                sanity: f.sanity.merge(k.sanity),
            }
        })
        .collect())
}

pub fn run_damping_contrast(cfg: &ContrastConfig) -> Result<ExperimentOutput> {
    let rows = contrast_rows(cfg)?;
    let tau = cfg.chi_tau / cfg.chi;
    let mut table = Table::new([
        "model",
        "alpha0_sq",
        "dim",
        "dt",
        "abs_mean_a_model",
        "abs_mean_a_kerr",
        "ratio",
        "dephasing_factor",
    ]);
    for r in &rows {
        table.push(vec![
            r.model.name().into(),
            r.alpha0_sq.into(),
            r.dim.into(),
            r.dt.into(),
            r.abs_mean_a_model.into(),
            r.abs_mean_a_kerr.into(),
            r.ratio.into(),
            (-cfg.chi * cfg.chi * tau).exp().into(),
        ]);
    }
    let mut manifest = cfg.to_manifest();
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    manifest.set_reals("dt_used", &dts);

    let mut plot = gnuplot_header("damping_contrast.csv", "|alpha0|^2");
    plot.push_str(
        "set ylabel '|<a>_model| / |<a>_kerr| at chi*tau = pi'\n\
         plot csv using 2:(strcol(1) eq 'dephasing' ? $7 : 1/0) skip 1 with linespoints title 'phase diffusion', \\\n     \
         csv using 2:(strcol(1) eq 'damping' ? $7 : 1/0) skip 1 with linespoints title 'zero-temperature damping'\n",
    );

    Ok(ExperimentOutput {
        name: "damping_contrast".into(),
        table,
        manifest,
        plot: Some(plot),
        summary: RunSummary {
            sanity: SanityReport::merge_all(rows.iter().map(|r| &r.sanity)),
            message: format!(
                "damping contrast: {} rows at chi*tau={:.6}, chi={}, gamma={}",
                rows.len(),
                cfg.chi_tau,
                cfg.chi,
                cfg.gamma
            ),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_fills_dims() {
        let cfg = ContrastConfig::default();
        let back = ContrastConfig::from_manifest(&cfg.to_manifest()).unwrap();
        assert_eq!(back.dims(), vec![26, 39, 56]);
        assert_eq!(back.alpha0_sq, cfg.alpha0_sq);
    }

    #[test]
    fn zero_gamma_matches_kerr() {
        let cfg = ContrastConfig {
            gamma: 0.0,
            alpha0_sq: vec![1.0],
            dims: Some(vec![20]),
            chi_tau: PI / 2.0,
            ..ContrastConfig::default()
        };
        let rows = contrast_rows(&cfg).unwrap();
        let damping = rows
            .iter()
            .find(|r| r.model == Preset::KerrDamping)
            .unwrap();
        assert!((damping.ratio - 1.0).abs() < 1e-8, "{}", damping.ratio);
    }
}
