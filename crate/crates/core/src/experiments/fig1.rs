//! Quadrature-variance curves for `|α₀|² ∈ {4, 1}` under Kerr with phase
//! diffusion at χ = 0.3, plus the cat diagnostics along the same runs.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{
    base_manifest, gnuplot_header, real_alpha, simulate_coherent, Cell, ExperimentOutput, Manifest,
    Numerics, RunSummary, SanityReport, Table,
};
use crate::closed_forms::dephasing_quadrature_variance;
use crate::diagnostics::{
    negativity_volume, wigner, x2_tilde_variance, ys_fidelity, QuadratureFrame, WignerSpec,
};
use crate::error::{KerrError, Result};
use crate::models::{preset, Preset};

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Config {
    pub chi: f64,
    /// One curve per entry, in output order.
    pub alpha0_sq: Vec<f64>,
    /// Truncation per curve, paired with `alpha0_sq`.
    pub dims: Vec<usize>,
    pub t_end_chitau: f64,
    pub samples: usize,
    /// Grid points per axis for the negativity column.
    pub wigner_resolution: usize,
    pub numerics: Numerics,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            chi: 0.3,
            alpha0_sq: vec![4.0, 1.0],
            dims: vec![64, 32],
            t_end_chitau: 3.0 * PI,
            samples: 601,
            wigner_resolution: 101,
            numerics: Numerics::default(),
        }
    }
}

impl Fig1Config {
    fn validate(&self) -> Result<()> {
        if self.alpha0_sq.is_empty() || self.alpha0_sq.len() != self.dims.len() {
            return Err(KerrError::InvalidParameter(
                "fig1 needs one dim per |alpha0|^2 entry".into(),
            ));
        }
        if self.samples < 2 {
            return Err(KerrError::InvalidParameter(
                "fig1 needs at least 2 samples".into(),
            ));
        }
        if self.wigner_resolution < 2 {
            return Err(KerrError::InvalidParameter(
                "wigner resolution must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("fig1");
        m.set("model", Preset::KerrDephasing);
        m.set_real("chi", self.chi);
        m.set_reals("alpha0_sq", &self.alpha0_sq);
        m.set_list("dims", &self.dims);
        m.set_real("t_end_chitau", self.t_end_chitau);
        m.set("samples", self.samples);
        m.set("wigner_resolution", self.wigner_resolution);
        m.set("wigner_extent", "half-width sqrt(<n>)+3");
        self.numerics.write(&mut m);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        Ok(Self {
            chi: m.parse("chi")?,
            alpha0_sq: m.parse_list("alpha0_sq")?,
            dims: m.parse_list("dims")?,
            t_end_chitau: m.parse("t_end_chitau")?,
            samples: m.parse("samples")?,
            wigner_resolution: m.parse("wigner_resolution")?,
            numerics: Numerics::read(m)?,
        })
    }
}

struct Curve {
    rows: Vec<Vec<Cell>>,
    dt: f64,
    sanity: SanityReport,
}

fn run_curve(cfg: &Fig1Config, alpha0_sq: f64, dim: usize) -> Result<Curve> {
    let model = preset(Preset::KerrDephasing, cfg.chi, None)?;
    let alpha0 = real_alpha(alpha0_sq)?;
    let frame = QuadratureFrame::new(alpha0, cfg.chi);
    let mut rows = Vec::with_capacity(cfg.samples);
    let traj = simulate_coherent(
        &model,
        alpha0,
        dim,
        cfg.t_end_chitau,
        cfg.samples,
        &cfg.numerics,
        |rec, rho| {
            let var = x2_tilde_variance(rho, rec.tau, cfg.chi, alpha0)?;
            let var_cf =
                dephasing_quadrature_variance(alpha0, cfg.chi, rec.tau, frame.theta(rec.tau));
            let fid = ys_fidelity(rho, alpha0)?;
            let grid = wigner(rho, &WignerSpec::for_state(rho, cfg.wigner_resolution))?;
            rows.push(vec![
                alpha0_sq.into(),
                (cfg.chi * rec.tau).into(),
                var.into(),
                var_cf.into(),
                rec.moments.a.norm().into(),
                fid.best().into(),
                fid.plus.into(),
                negativity_volume(&grid).into(),
            ]);
            Ok(())
        },
    )?;
    Ok(Curve {
        rows,
        dt: traj.dt,
        sanity: SanityReport::of(&traj, &model),
    })
}

pub fn run_fig1(cfg: &Fig1Config) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let curves: Vec<Curve> = cfg
        .alpha0_sq
        .par_iter()
        .zip(cfg.dims.par_iter())
        .map(|(&a2, &d)| run_curve(cfg, a2, d))
        .collect::<Result<_>>()?;

    let mut table = Table::new([
        "alpha0_sq",
        "chi_tau",
        "var_x2_tilde",
        "var_x2_tilde_closed_form",
        "abs_mean_a",
        "ys_fidelity",
        "ys_fidelity_plus",
        "negativity_volume",
    ]);
    for curve in &curves {
        for row in &curve.rows {
            table.push(row.clone());
        }
    }

    let mut manifest = cfg.to_manifest();
    let dts: Vec<f64> = curves.iter().map(|c| c.dt).collect();
    manifest.set_reals("dt_used", &dts);
    let sanity = SanityReport::merge_all(curves.iter().map(|c| &c.sanity));

    Ok(ExperimentOutput {
        name: "fig1".into(),
        table,
        manifest,
        plot: Some(plot_script(cfg)),
        summary: RunSummary {
            sanity,
            message: format!(
                "fig1: {} curves x {} samples, chi={}",
                curves.len(),
                cfg.samples,
                cfg.chi
            ),
        },
    })
}

fn plot_script(cfg: &Fig1Config) -> String {
    let mut s = gnuplot_header("fig1.csv", "chi*tau");
    s.push_str("set multiplot layout 2,2\n");
    for (col, label) in [
        (3, "Var(X2~)"),
        (5, "|<a>|"),
        (6, "YS fidelity"),
        (8, "Wigner negativity"),
    ] {
        writeln!(s, "set ylabel '{label}'").unwrap();
        let parts: Vec<String> = cfg
            .alpha0_sq
            .iter()
            .enumerate()
            .map(|(i, a2)| {
                format!(
                    "csv using 2:($1=={a2:?} ? ${col} : 1/0) skip 1 with lines dt {} title '|alpha0|^2={a2:?}'",
                    i + 1
                )
            })
            .collect();
        writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
    }
    s.push_str("unset multiplot\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Fig1Config {
        Fig1Config {
            alpha0_sq: vec![1.0],
            dims: vec![20],
            t_end_chitau: PI,
            samples: 5,
            wigner_resolution: 41,
            ..Fig1Config::default()
        }
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = Fig1Config::default();
        assert_eq!(Fig1Config::from_manifest(&cfg.to_manifest()).unwrap(), cfg);
        let text = cfg.to_manifest().to_text();
        assert!(text.contains("chi = 0.3\n"));
        assert!(text.contains("alpha0_sq = 4.0,1.0\n"));
    }

    #[test]
    fn small_run_landmarks() {
        let out = run_fig1(&small()).unwrap();
        assert_eq!(out.table.rows().len(), 5);
        let var = out.table.reals("var_x2_tilde").unwrap();
        let var_cf = out.table.reals("var_x2_tilde_closed_form").unwrap();
        assert!((var[0] - 0.25).abs() < 1e-10);
        for (a, b) in var.iter().zip(&var_cf) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        let abs_a = out.table.reals("abs_mean_a").unwrap();
        assert!((abs_a[4] - (-0.3 * PI).exp()).abs() < 1e-6);
        assert!(out.manifest.get("dt_used").is_some());
        assert!(out.plot.unwrap().contains("fig1.csv"));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let cfg = Fig1Config {
            dims: vec![20, 30],
            ..small()
        };
        assert!(matches!(
            run_fig1(&cfg),
            Err(KerrError::InvalidParameter(_))
        ));
    }
}
