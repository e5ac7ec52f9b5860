//! Closed-form first moment tabulated against the phase-diffusion moments
//! and the simulator.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{
    base_manifest, gnuplot_header, real_alpha, simulate_coherent, Cell, ExperimentOutput, Manifest,
    Numerics, RunSummary, SanityReport, Table,
};
use crate::closed_forms::{dephasing_first_moment, dephasing_second_moment, sm_first_moment};
use crate::error::{KerrError, Result};
use crate::models::{preset, Preset};

/// Largest accepted simulator vs closed-form deviation.
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    pub chis: Vec<f64>,
    pub alpha0_sq: Vec<f64>,
    /// Every `(χ, |α₀|²)` point runs at each of these dims.
    pub dims: Vec<usize>,
    pub t_end_chitau: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub numerics: Numerics,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            chis: vec![0.1, 0.3],
            alpha0_sq: vec![1.0, 4.0],
            dims: vec![64],
            t_end_chitau: 2.0 * PI,
            samples: 201,
            tolerance: DEFAULT_VALIDATION_TOL,
            numerics: Numerics::default(),
        }
    }
}

impl ValidationConfig {
    fn validate(&self) -> Result<()> {
        if self.chis.is_empty() || self.alpha0_sq.is_empty() || self.dims.is_empty() {
            return Err(KerrError::InvalidParameter(
                "validation grid needs at least one chi, |alpha0|^2 and dim".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(KerrError::InvalidParameter(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = base_manifest("moment_validation");
        m.set("model", Preset::KerrDephasing);
        m.set_reals("chis", &self.chis);
        m.set_reals("alpha0_sq", &self.alpha0_sq);
        m.set_list("dims", &self.dims);
        m.set_real("t_end_chitau", self.t_end_chitau);
        m.set("samples", self.samples);
        m.set_real("deviation_tol", self.tolerance);
        self.numerics.write(&mut m);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        Ok(Self {
            chis: m.parse_list("chis")?,
            alpha0_sq: m.parse_list("alpha0_sq")?,
            dims: m.parse_list("dims")?,
            t_end_chitau: m.parse("t_end_chitau")?,
            samples: m.parse("samples")?,
            tolerance: m.parse("deviation_tol")?,
            numerics: Numerics::read(m)?,
        })
    }
}

struct Block {
    rows: Vec<Vec<Cell>>,
    dt: f64,
    sanity: SanityReport,
    worst: (f64, f64),
}

fn run_point(cfg: &ValidationConfig, chi: f64, alpha0_sq: f64, dim: usize) -> Result<Block> {
    let model = preset(Preset::KerrDephasing, chi, None)?;
    let alpha0 = real_alpha(alpha0_sq)?;
    let mut rows = Vec::with_capacity(cfg.samples);
    let mut worst = (0.0, 0.0);
    let traj = simulate_coherent(
        &model,
        alpha0,
        dim,
        cfg.t_end_chitau,
        cfg.samples,
        &cfg.numerics,
        |rec, _| {
            let tau = rec.tau;
            let sm = sm_first_moment(alpha0, chi, tau).value;
            let d1 = dephasing_first_moment(alpha0, chi, tau);
            let d2 = dephasing_second_moment(alpha0, chi, tau);
            let s1 = rec.moments.a;
            let s2 = rec.moments.a2;
            let dev1 = (s1 - d1).norm();
            let dev2 = (s2 - d2).norm();
            let dev = dev1.max(dev2);
            if dev > worst.1 {
                worst = (tau, dev);
            }
            rows.push(vec![
                chi.into(),
                alpha0_sq.into(),
                dim.into(),
                (chi * tau).into(),
                sm.re.into(),
                sm.im.into(),
                sm.norm().into(),
                (alpha0.norm() * (-chi * chi * tau).exp()).into(),
                d1.re.into(),
                d1.im.into(),
                s1.re.into(),
                s1.im.into(),
                dev1.into(),
                d2.re.into(),
                d2.im.into(),
                s2.re.into(),
                s2.im.into(),
                dev2.into(),
            ]);
            Ok(())
        },
    )?;
    Ok(Block {
        rows,
        dt: traj.dt,
        sanity: SanityReport::of(&traj, &model),
        worst,
    })
}

/// Fails with `SanityViolation` if any simulator moment deviates from its
/// closed form by more than the configured tolerance.
pub fn run_moment_validation(cfg: &ValidationConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &chi in &cfg.chis {
        for &a2 in &cfg.alpha0_sq {
            for &d in &cfg.dims {
                points.push((chi, a2, d));
            }
        }
    }
    let blocks: Vec<Block> = points
        .par_iter()
        .map(|&(chi, a2, d)| run_point(cfg, chi, a2, d))
        .collect::<Result<_>>()?;

    let mut table = Table::new([
        "chi",
        "alpha0_sq",
        "dim",
        "chi_tau",
        "sm_re",
        "sm_im",
        "abs_sm",
        "bound",
        "dephasing_re",
        "dephasing_im",
        "sim_re",
        "sim_im",
        "deviation",
        "dephasing2_re",
        "dephasing2_im",
        "sim2_re",
        "sim2_im",
        "deviation2",
    ]);
    for b in &blocks {
        for row in &b.rows {
            table.push(row.clone());
        }
    }
    let (worst_tau, worst_dev) =
        blocks
            .iter()
            .map(|b| b.worst)
            .fold((0.0, 0.0), |acc, w| if w.1 > acc.1 { w } else { acc });

    let mut manifest = cfg.to_manifest();
    let dts: Vec<f64> = blocks.iter().map(|b| b.dt).collect();
    manifest.set_reals("dt_used", &dts);

    if worst_dev > cfg.tolerance {
        return Err(KerrError::SanityViolation {
            tau: worst_tau,
            what: "closed-form moment deviation",
            value: worst_dev,
        });
    }

    let mut plot = gnuplot_header("moment_validation.csv", "chi*tau");
    plot.push_str(
        "set ylabel '|<a>|'\n\
         plot csv using 4:7 skip 1 with lines title 'closed form (1/C^2 form)', \\\n     \
         csv using 4:8 skip 1 with lines title 'bound |alpha0| exp(-chi^2 tau)', \\\n     \
         csv using 4:(sqrt($11**2+$12**2)) skip 1 with points pt 7 ps 0.3 title 'simulator'\n",
    );

    Ok(ExperimentOutput {
        name: "moment_validation".into(),
        table,
        manifest,
        plot: Some(plot),
        summary: RunSummary {
            sanity: SanityReport::merge_all(blocks.iter().map(|b| &b.sanity)),
            message: format!(
                "moment validation: {} runs, max deviation {worst_dev:.3e} (tol {:.1e})",
                blocks.len(),
                cfg.tolerance
            ),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ValidationConfig {
        ValidationConfig {
            chis: vec![0.3],
            alpha0_sq: vec![1.0],
            dims: vec![20],
            t_end_chitau: PI,
            samples: 11,
            ..ValidationConfig::default()
        }
    }

    #[test]
    fn small_grid_within_tolerance() {
        let out = run_moment_validation(&small()).unwrap();
        assert_eq!(out.table.rows().len(), 11);
        let dev = out.table.reals("deviation").unwrap();
        assert!(dev.iter().all(|&d| d <= 1e-6));
        let sm = out.table.reals("sm_re").unwrap();
        assert_eq!(sm[0], 1.0);
        let abs_sm = out.table.reals("abs_sm").unwrap();
        let bound = out.table.reals("bound").unwrap();
        assert!(abs_sm.iter().zip(&bound).all(|(a, b)| *a <= b + 1e-14));
    }

    #[test]
    fn impossible_tolerance_is_a_sanity_violation() {
        let cfg = ValidationConfig {
            tolerance: 1e-300,
            ..small()
        };
        assert!(matches!(
            run_moment_validation(&cfg),
            Err(KerrError::SanityViolation { .. })
        ));
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = ValidationConfig::default();
        assert_eq!(
            ValidationConfig::from_manifest(&cfg.to_manifest()).unwrap(),
            cfg
        );
    }
}
