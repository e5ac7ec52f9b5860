//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.
//!
//! The last criterion runs the default figure twice and dominates wall time.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use kerrcat::closed_forms::sm_first_moment;
use kerrcat::experiments::{
    contrast_rows, rerun_file, run_fig1, run_moment_validation, run_simulate, strictly_decreasing,
    sweep_rows, ContrastConfig, Fig1Config, Numerics, SanityReport, SimulateConfig, SweepConfig,
    ValidationConfig,
};
use kerrcat::{Preset, C64};

// Tolerances.
const SM_T0_REL_TOL: f64 = 1e-15;
const SM_RECURRENCE_REL_TOL: f64 = 1e-12;
const SM_BOUND_TOL: f64 = 1e-14;
const VALIDATION_TOL: f64 = 1e-6;
const KERR_FIDELITY_TOL: f64 = 1e-8;
const KERR_MOMENT_TOL: f64 = 1e-8;
const NEGATIVITY_RATIO_REL_TOL: f64 = 0.05;
const DEPHASING_RATIO_TOL: f64 = 1e-8;
const ZERO_GAMMA_RATIO_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const MIN_EIGENVALUE_TOL: f64 = -1e-8;
const PURITY_RISE_TOL: f64 = 1e-10;
const MEAN_N_DRIFT_TOL: f64 = 1e-8;
const POSITIVITY_CHECKS: usize = 10;

// Reference values of `negativity(3π/2) / negativity(π/2)` at χ = 0.3.
const NEGATIVITY_RATIO_A1_DIM32: f64 = 0.028814729003807233;
const NEGATIVITY_RATIO_A4_DIM64: f64 = 0.35917287989486013;

type Outcome = Result<String, String>;

/// Sanity reports gathered from the simulating criteria, with the fewest
/// samples of any run that fed each report.
#[derive(Default)]
struct Collected {
    reports: Vec<(&'static str, SanityReport, usize)>,
}

impl Collected {
    fn add(&mut self, label: &'static str, report: SanityReport, min_samples: usize) {
        self.reports.push((label, report, min_samples));
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_identities() -> Outcome {
    let mut worst_t0: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for chi in [0.1, 0.3] {
        for a in [1.0, 2.0] {
            let alpha0 = C64::new(a, 0.0);
            let m0 = sm_first_moment(alpha0, chi, 0.0).value;
            worst_t0 = worst_t0.max((m0 - alpha0).norm() / alpha0.norm());
            for k in 1..=3 {
                let tau = k as f64 * PI / chi;
                let got = sm_first_moment(alpha0, chi, tau).value.norm();
                let want = a * (-(k as f64) * PI * chi).exp();
                worst_rec = worst_rec.max((got - want).abs() / want);
            }
        }
    }
    check(
        worst_t0 <= SM_T0_REL_TOL && worst_rec <= SM_RECURRENCE_REL_TOL,
        format!("rel err at t=0 {worst_t0:.2e}, at recurrences {worst_rec:.2e}"),
    )
}

fn closed_form_bound() -> Outcome {
    let per_point = 2500;
    let mut worst = f64::NEG_INFINITY;
    let mut points = 0;
    for chi in [0.1, 0.3] {
        for a in [1.0, 2.0] {
            let alpha0 = C64::new(a, 0.0);
            for i in 0..per_point {
                let chi_tau = 4.0 * PI * i as f64 / (per_point - 1) as f64;
                let tau = chi_tau / chi;
                let m = sm_first_moment(alpha0, chi, tau).value.norm();
                let bound = a * (-chi * chi * tau).exp();
                worst = worst.max(m - bound);
                points += 1;
            }
        }
    }
    check(
        points == 10_000 && worst <= SM_BOUND_TOL,
        format!("{points} points, max(|<a>| - bound) = {worst:.2e}"),
    )
}

fn moment_validation(col: &mut Collected) -> Outcome {
    let cfg = ValidationConfig {
        chis: vec![0.3],
        alpha0_sq: vec![1.0, 4.0],
        dims: vec![32, 64],
        tolerance: VALIDATION_TOL,
        ..ValidationConfig::default()
    };
    let out = run_moment_validation(&cfg).map_err(|e| e.to_string())?;
    let worst = ["deviation", "deviation2"]
        .iter()
        .flat_map(|c| out.table.reals(c).expect("deviation column"))
        .fold(0.0, f64::max);
    col.add("moment validation", out.summary.sanity, cfg.samples);
    check(
        worst <= VALIDATION_TOL,
        format!("{} rows, max deviation {worst:.2e}", out.table.rows().len()),
    )
}

fn pure_kerr_cat(col: &mut Collected) -> Outcome {
    let alpha0 = C64::new(2.0, 0.0);
    let cfg = SimulateConfig {
        model: Preset::PureKerr,
        chi: 0.3,
        gamma: None,
        alpha0,
        dim: Some(64),
        t_end_chitau: FRAC_PI_2,
        samples: 2,
        numerics: Numerics::default(),
    };
    let out = run_simulate(&cfg).map_err(|e| e.to_string())?;
    let last = out.table.rows().len() - 1;
    let col_at = |name: &str| out.table.reals(name).expect("column")[last];
    let fid = col_at("ys_fidelity");
    let a = C64::new(col_at("mean_a_re"), col_at("mean_a_im"));
    let want = -C64::i() * alpha0 * (-2.0 * alpha0.norm_sqr()).exp();
    let err = (a - want).norm();
    col.add("pure Kerr", out.summary.sanity, cfg.samples);
    check(
        fid >= 1.0 - KERR_FIDELITY_TOL && err <= KERR_MOMENT_TOL,
        format!("fidelity 1-{:.2e}, |<a> - want| {err:.2e}", 1.0 - fid),
    )
}

fn cat_degradation(col: &mut Collected) -> Outcome {
    let cfg = Fig1Config {
        t_end_chitau: 1.5 * PI,
        samples: 4,
        wigner_resolution: 201,
        ..Fig1Config::default()
    };
    let out = run_fig1(&cfg).map_err(|e| e.to_string())?;
    let a2 = out.table.reals("alpha0_sq").expect("column");
    let ct = out.table.reals("chi_tau").expect("column");
    let fid = out.table.reals("ys_fidelity").expect("column");
    let neg = out.table.reals("negativity_volume").expect("column");
    let at = |a: f64, t: f64| {
        (0..a2.len())
            .find(|&i| a2[i] == a && (ct[i] - t).abs() < 1e-12)
            .expect("sample present")
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for (a, golden) in [
        (4.0, NEGATIVITY_RATIO_A4_DIM64),
        (1.0, NEGATIVITY_RATIO_A1_DIM32),
    ] {
        let (i1, i3) = (at(a, FRAC_PI_2), at(a, 1.5 * PI));
        let ratio = neg[i3] / neg[i1];
        let rel = (ratio / golden - 1.0).abs();
        ok &= fid[i3] < fid[i1] && neg[i3] < neg[i1] && rel <= NEGATIVITY_RATIO_REL_TOL;
        detail.push(format!(
            "|a|^2={a}: F {:.4}->{:.4}, N {:.4}->{:.4}, ratio {ratio:.4} ({:+.2}% of ref)",
            fid[i1],
            fid[i3],
            neg[i1],
            neg[i3],
            100.0 * (ratio / golden - 1.0)
        ));
    }
    col.add("cat degradation", out.summary.sanity, cfg.samples);
    check(ok, detail.join("; "))
}

fn chi_sweep(col: &mut Collected) -> Outcome {
    let rows = sweep_rows(&SweepConfig::default()).map_err(|e| e.to_string())?;
    let fids: Vec<f64> = rows.iter().map(|r| r.ys_fidelity).collect();
    let env: Vec<f64> = rows.iter().map(|r| r.envelope).collect();
    col.add(
        "chi sweep",
        SanityReport::merge_all(rows.iter().map(|r| &r.sanity)),
        2,
    );
    let shown: Vec<String> = fids.iter().map(|f| format!("{f:.4}")).collect();
    check(
        rows.len() >= 2 && strictly_decreasing(&fids) && strictly_decreasing(&env),
        format!("fidelities [{}]", shown.join(", ")),
    )
}

fn damping_contrast(col: &mut Collected) -> Outcome {
    let cfg = ContrastConfig::default();
    let rows = contrast_rows(&cfg).map_err(|e| e.to_string())?;
    let factor = (-cfg.chi * cfg.chi * cfg.chi_tau / cfg.chi).exp();
    let dephasing_err = rows
        .iter()
        .filter(|r| r.model == Preset::KerrDephasing)
        .map(|r| (r.ratio - factor).abs())
        .fold(0.0, f64::max);
    let damping: Vec<f64> = rows
        .iter()
        .filter(|r| r.model == Preset::KerrDamping)
        .map(|r| r.ratio)
        .collect();
    col.add(
        "damping contrast",
        SanityReport::merge_all(rows.iter().map(|r| &r.sanity)),
        2,
    );

    let zero = ContrastConfig {
        gamma: 0.0,
        alpha0_sq: vec![1.0, 4.0],
        ..ContrastConfig::default()
    };
    let zero_rows = contrast_rows(&zero).map_err(|e| e.to_string())?;
    let zero_err = zero_rows
        .iter()
        .filter(|r| r.model == Preset::KerrDamping)
        .map(|r| (r.ratio - 1.0).abs())
        .fold(0.0, f64::max);
    col.add(
        "damping contrast, zero rate",
        SanityReport::merge_all(zero_rows.iter().map(|r| &r.sanity)),
        2,
    );

    let shown: Vec<String> = damping.iter().map(|r| format!("{r:.4}")).collect();
    check(
        dephasing_err <= DEPHASING_RATIO_TOL
            && damping.len() >= 2
            && strictly_decreasing(&damping)
            && zero_err <= ZERO_GAMMA_RATIO_TOL,
        format!(
            "dephasing ratio err {dephasing_err:.2e}, damping ratios [{}], zero-rate err {zero_err:.2e}",
            shown.join(", ")
        ),
    )
}

fn reproducibility(col: &mut Collected) -> Outcome {
    let cfg = Fig1Config::default();
    let first = run_fig1(&cfg).map_err(|e| e.to_string())?;
    let dir_a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir_b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let written = first.write(dir_a.path()).map_err(|e| e.to_string())?;
    col.add("default figure", first.summary.sanity, cfg.samples);

    let again = rerun_file(&written.manifest).map_err(|e| e.to_string())?;
    let rewritten = again.write(dir_b.path()).map_err(|e| e.to_string())?;
    let a = std::fs::read(&written.csv).map_err(|e| e.to_string())?;
    let b = std::fs::read(&rewritten.csv).map_err(|e| e.to_string())?;
    check(
        !a.is_empty() && a == b,
        format!("{} bytes, identical: {}", a.len(), a == b),
    )
}

fn sanity(col: &Collected) -> Outcome {
    let mut failures = Vec::new();
    for (label, r, min_samples) in &col.reports {
        let want_checks = POSITIVITY_CHECKS.min(*min_samples);
        let mut bad = Vec::new();
        if !(r.max_trace_err <= TRACE_TOL) {
            bad.push(format!("trace {:.2e}", r.max_trace_err));
        }
        if !(r.max_herm_defect <= HERMITICITY_TOL) {
            bad.push(format!("hermiticity {:.2e}", r.max_herm_defect));
        }
        if !(r.min_eigenvalue >= MIN_EIGENVALUE_TOL) {
            bad.push(format!("min eigenvalue {:.2e}", r.min_eigenvalue));
        }
        if !(r.max_purity_rise <= PURITY_RISE_TOL) {
            bad.push(format!("purity rise {:.2e}", r.max_purity_rise));
        }
        if !(r.max_n_drift <= MEAN_N_DRIFT_TOL) {
            bad.push(format!("<n> drift {:.2e}", r.max_n_drift));
        }
        if r.min_positivity_checks < want_checks {
            bad.push(format!(
                "{} positivity checks, want {want_checks}",
                r.min_positivity_checks
            ));
        }
        if !bad.is_empty() {
            failures.push(format!("{label}: {}", bad.join(", ")));
        }
    }
    let all = SanityReport::merge_all(col.reports.iter().map(|(_, r, _)| r));
    let summary = format!(
        "{} runs, trace {:.2e}, hermiticity {:.2e}, min eig {:.2e}, purity rise {:.2e}, <n> drift {:.2e}",
        all.runs,
        all.max_trace_err,
        all.max_herm_defect,
        all.min_eigenvalue,
        all.max_purity_rise,
        all.max_n_drift
    );
    if col.reports.is_empty() {
        return Err("no simulation reports collected".into());
    }
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn report(n: u32, label: &str, start: Instant, outcome: &Outcome) -> bool {
    let (tag, detail, ok) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!(
        "criterion {n} ({label}): {tag} {detail} [{:.1}s]",
        start.elapsed().as_secs_f64()
    );
    ok
}

fn main() {
    let mut col = Collected::default();
    let mut all_ok = true;

    let t = Instant::now();
    all_ok &= report(1, "closed-form identities", t, &closed_form_identities());
    let t = Instant::now();
    all_ok &= report(2, "closed-form envelope bound", t, &closed_form_bound());
    let t = Instant::now();
    let r = moment_validation(&mut col);
    all_ok &= report(3, "simulator vs exact moments", t, &r);
    let t = Instant::now();
    let r = pure_kerr_cat(&mut col);
    all_ok &= report(4, "pure Kerr cat at quarter period", t, &r);
    let t = Instant::now();
    let r = cat_degradation(&mut col);
    all_ok &= report(5, "cat degradation between occurrences", t, &r);
    let t = Instant::now();
    let r = chi_sweep(&mut col);
    all_ok &= report(6, "cat quality versus chi", t, &r);
    let t = Instant::now();
    let r = damping_contrast(&mut col);
    all_ok &= report(7, "phase diffusion versus damping", t, &r);
    // Criterion 9 runs before 8 so its simulations feed the sanity report.
    let t9 = Instant::now();
    let r9 = reproducibility(&mut col);
    let t = Instant::now();
    all_ok &= report(8, "numerical sanity", t, &sanity(&col));
    all_ok &= report(9, "rerun from manifest", t9, &r9);

    if !all_ok {
        std::process::exit(1);
    }
}
