//! Fixed-step classical Runge–Kutta integration of the master equation.
//!
//! After each step the state is re-symmetrized to `(ρ+ρ†)/2` and its trace
//! renormalized when it has drifted by more than `1e−12`. Samples carry the
//! low moments plus sanity metrics; full snapshots are kept only while they
//! fit the configured memory budget.

use nalgebra::DMatrix;

use crate::error::{KerrError, Result};
use crate::fock::{DensityMatrix, Moments, TruncatedFockSpace, C64};
use crate::models::{Liouvillian, ModelSpec};

pub const DEFAULT_MEMORY_BUDGET_BYTES: usize = 512 * 1024 * 1024;
pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-8;
pub const LEAK_TOL: f64 = 1e-6;
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Magnitude below which matrix entries are set to zero after each step.
const FLUSH_TOL: f64 = 1e-200;
const RENORMALIZE_TOL: f64 = 1e-12;

/// `0.1 / (χ(d−1)² + Σrates·(d−1)² + ε)`.
pub fn stability_dt(model: &ModelSpec, space: TruncatedFockSpace) -> f64 {
    let top = ((space.dim() - 1) as f64).powi(2);
    0.1 / (model.chi() * top + model.total_rate() * top + 1e-12)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationPlan {
    t_end: f64,
    dt: f64,
    sample_every: usize,
    memory_budget_bytes: usize,
    positivity_checks: usize,
}

impl IntegrationPlan {
    /// `t_end` must be an integer number of steps (to 1e−9 relative).
    pub fn new(t_end: f64, dt: f64, sample_every: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(KerrError::InvalidParameter(format!(
                "t_end must be finite and non-negative, got {t_end}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(KerrError::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if sample_every == 0 {
            return Err(KerrError::InvalidParameter(
                "sample_every must be at least 1".into(),
            ));
        }
        let steps = (t_end / dt).round();
        if (steps * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
            return Err(KerrError::InvalidParameter(format!(
                "t_end {t_end} is not a whole number of steps of {dt}"
            )));
        }
        Ok(Self {
            t_end,
            dt,
            sample_every,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET_BYTES,
            positivity_checks: 10,
        })
    }

    /// `samples` equally spaced samples over `[0, t_end]` with the largest
    /// step not exceeding `dt_max` that divides the sample spacing.
    pub fn uniform(t_end: f64, samples: usize, dt_max: f64) -> Result<Self> {
        if samples == 0 {
            return Err(KerrError::InvalidParameter(
                "samples must be at least 1".into(),
            ));
        }
        if !(dt_max.is_finite() && dt_max > 0.0) {
            return Err(KerrError::InvalidParameter(format!(
                "dt_max must be positive, got {dt_max}"
            )));
        }
        if t_end == 0.0 || samples == 1 {
            let dt = if t_end == 0.0 {
                dt_max
            } else {
                t_end / (t_end / dt_max).ceil()
            };
            let steps = (t_end / dt).round().max(1.0) as usize;
            return Self::new(t_end, dt, steps);
        }
        let spacing = t_end / (samples - 1) as f64;
        let sub = (spacing / dt_max).ceil().max(1.0) as usize;
        let dt = t_end / ((samples - 1) * sub) as f64;
        Self::new(t_end, dt, sub)
    }

    pub fn with_memory_budget(mut self, bytes: usize) -> Self {
        self.memory_budget_bytes = bytes;
        self
    }

    /// Number of samples at which the minimum eigenvalue is computed.
    pub fn with_positivity_checks(mut self, n: usize) -> Self {
        self.positivity_checks = n;
        self
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sample_every(&self) -> usize {
        self.sample_every
    }

    pub fn memory_budget_bytes(&self) -> usize {
        self.memory_budget_bytes
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Step indices at which samples are taken; always includes 0 and the
    /// final step.
    pub fn sample_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut out: Vec<usize> = (0..=n).step_by(self.sample_every).collect();
        if *out.last().unwrap() != n {
            out.push(n);
        }
        out
    }

    pub fn check_stability(&self, model: &ModelSpec, space: TruncatedFockSpace) -> Result<()> {
        let bound = stability_dt(model, space);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(KerrError::StabilityViolation { dt: self.dt, bound });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sanity {
    pub trace_err: f64,
    pub herm_defect: f64,
    /// Population of the top three Fock levels.
    pub top_level_pop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub step: usize,
    pub tau: f64,
    pub moments: Moments,
    pub purity: f64,
    pub sanity: Sanity,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<SampleRecord>,
    /// Snapshots aligned with `records`; `None` in streaming mode.
    pub states: Option<Vec<DensityMatrix>>,
    /// `(tau, min eigenvalue)` at the positivity check points.
    pub positivity: Vec<(f64, f64)>,
    /// Largest single-step increase of `tr ρ²` (negative if purity never rose).
    pub max_purity_rise: f64,
    pub final_state: DensityMatrix,
    pub dt: f64,
}

impl Trajectory {
    pub fn taus(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tau).collect()
    }

    pub fn is_streaming(&self) -> bool {
        self.states.is_none()
    }

    pub fn max_trace_err(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.sanity.trace_err)
            .fold(0.0, f64::max)
    }

    pub fn max_herm_defect(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.sanity.herm_defect)
            .fold(0.0, f64::max)
    }

    pub fn max_top_level_pop(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.sanity.top_level_pop)
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.positivity
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|⟨n⟩(τ) − ⟨n⟩(0)|` over samples.
    pub fn mean_n_drift(&self) -> f64 {
        let n0 = self.records[0].moments.n;
        self.records
            .iter()
            .map(|r| (r.moments.n - n0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest of trace error and hermiticity defect; the CLI summary value.
    pub fn max_sanity_defect(&self) -> f64 {
        self.max_trace_err().max(self.max_herm_defect())
    }
}

/// Reusable RK4 workspace.
struct Rk4 {
    gen: Liouvillian,
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    // Stability polynomial 1 + z + z²/2 + z³/6 + z⁴/24 at z = λdt, used when
    // the generator is diagonal (identical map to the staged form).
    amplification: Option<(f64, Vec<C64>)>,
}

impl Rk4 {
    fn new(gen: Liouvillian) -> Self {
        let n = gen.dim() * gen.dim();
        Self {
            gen,
            k1: vec![C64::default(); n],
            k2: vec![C64::default(); n],
            k3: vec![C64::default(); n],
            k4: vec![C64::default(); n],
            tmp: vec![C64::default(); n],
            amplification: None,
        }
    }

    fn step_staged(&mut self, y: &mut [C64], dt: f64) {
        let half = 0.5 * dt;
        self.gen.apply_into(y, &mut self.k1);
        for ((t, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = yi + k * half;
        }
        self.gen.apply_into(&self.tmp, &mut self.k2);
        for ((t, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = yi + k * half;
        }
        self.gen.apply_into(&self.tmp, &mut self.k3);
        for ((t, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = yi + k * dt;
        }
        self.gen.apply_into(&self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for i in 0..y.len() {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }

    fn step(&mut self, y: &mut [C64], dt: f64) {
        if !self.gen.is_diagonal() {
            return self.step_staged(y, dt);
        }
        let stale = !matches!(&self.amplification, Some((h, _)) if *h == dt);
        if stale {
            // Probe the staged map with unit entries to read off R(λdt).
            let mut ones = vec![C64::new(1.0, 0.0); y.len()];
            self.step_staged(&mut ones, dt);
            self.amplification = Some((dt, ones));
        }
        let (_, factors) = self.amplification.as_ref().unwrap();
        for (yi, &f) in y.iter_mut().zip(factors) {
            *yi *= f;
        }
    }
}

/// `(ρ+ρ†)/2` in place, then trace renormalization if needed; returns the
/// purity `Σ|ρ_ij|²` of the result. Parts below `FLUSH_TOL` are zeroed:
/// decayed coherences would otherwise go subnormal, which slows arithmetic by
/// orders of magnitude.
fn clean_up(m: &mut DMatrix<C64>) -> f64 {
    let flush = |x: f64| if x.abs() < FLUSH_TOL { 0.0 } else { x };
    let d = m.nrows();
    let s = m.as_mut_slice();
    let mut tr = 0.0;
    let mut diag_sq = 0.0;
    let mut off_sq = 0.0;
    for j in 0..d {
        let jj = j * d + j;
        let djj = flush(s[jj].re);
        s[jj] = C64::new(djj, 0.0);
        tr += djj;
        diag_sq += djj * djj;
        for i in j + 1..d {
            let (lo, hi) = (j * d + i, i * d + j);
            let avg = (s[lo] + s[hi].conj()) * 0.5;
            let avg = C64::new(flush(avg.re), flush(avg.im));
            s[lo] = avg;
            s[hi] = avg.conj();
            off_sq += avg.norm_sqr();
        }
    }
    let purity = diag_sq + 2.0 * off_sq;
    if (tr - 1.0).abs() > RENORMALIZE_TOL {
        *m /= C64::new(tr, 0.0);
        return purity / (tr * tr);
    }
    purity
}

/// One RK4 step followed by re-symmetrization and trace renormalization.
/// No stability check; see [`IntegrationPlan::check_stability`].
pub fn step(rho: &DensityMatrix, model: &ModelSpec, dt: f64) -> DensityMatrix {
    let mut rk = Rk4::new(Liouvillian::new(model, rho.space()));
    let mut m = rho.matrix().clone();
    rk.step_staged(m.as_mut_slice(), dt);
    clean_up(&mut m);
    DensityMatrix::from_raw(rho.space(), m)
}

fn record(step: usize, tau: f64, rho: &DensityMatrix) -> SampleRecord {
    SampleRecord {
        step,
        tau,
        moments: Moments::of(rho),
        purity: rho.purity(),
        sanity: Sanity {
            trace_err: (rho.trace() - C64::new(1.0, 0.0)).norm(),
            herm_defect: rho.hermiticity_defect(),
            top_level_pop: rho.top_level_population(),
        },
    }
}

fn check_record(r: &SampleRecord) -> Result<()> {
    if r.sanity.top_level_pop > LEAK_TOL {
        return Err(KerrError::TruncationLeak {
            tau: r.tau,
            population: r.sanity.top_level_pop,
        });
    }
    if !(r.sanity.trace_err <= TRACE_TOL) {
        return Err(KerrError::SanityViolation {
            tau: r.tau,
            what: "trace error",
            value: r.sanity.trace_err,
        });
    }
    if !(r.sanity.herm_defect <= HERMITICITY_TOL) {
        return Err(KerrError::SanityViolation {
            tau: r.tau,
            what: "hermiticity defect",
            value: r.sanity.herm_defect,
        });
    }
    Ok(())
}

/// Integrates `rho0` under `model` according to `plan`.
pub fn evolve(
    rho0: &DensityMatrix,
    model: &ModelSpec,
    plan: &IntegrationPlan,
) -> Result<Trajectory> {
    evolve_observed(rho0, model, plan, |_, _| Ok(()))
}

/// Like [`evolve`], calling `observer` with every sampled state in order.
/// An observer error aborts the run.
pub fn evolve_observed<F>(
    rho0: &DensityMatrix,
    model: &ModelSpec,
    plan: &IntegrationPlan,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&SampleRecord, &DensityMatrix) -> Result<()>,
{
    let space = rho0.space();
    plan.check_stability(model, space)?;

    let sample_steps = plan.sample_steps();
    let n_samples = sample_steps.len();
    let d = space.dim();
    let snapshot_bytes = n_samples
        .saturating_mul(d * d)
        .saturating_mul(std::mem::size_of::<C64>());
    let mut states =
        (snapshot_bytes <= plan.memory_budget_bytes).then(|| Vec::with_capacity(n_samples));
    if states.is_none() {
        log::info!("streaming mode: {n_samples} samples at dim {d} exceed the memory budget");
    }
    let check_at: Vec<usize> = match plan.positivity_checks {
        0 => vec![],
        1 => vec![n_samples - 1],
        p => {
            let mut v: Vec<usize> = (0..p)
                .map(|i| ((i * (n_samples - 1)) as f64 / (p - 1) as f64).round() as usize)
                .collect();
            v.dedup();
            v
        }
    };

    let mut rk = Rk4::new(Liouvillian::new(model, space));
    let mut m = rho0.matrix().clone();
    let mut records = Vec::with_capacity(n_samples);
    let mut positivity = Vec::with_capacity(check_at.len());
    let mut max_purity_rise = f64::NEG_INFINITY;
    let mut purity = rho0.purity();
    let mut next_sample = 0;
    let n_steps = plan.n_steps();

    for k in 0..=n_steps {
        if k > 0 {
            rk.step(m.as_mut_slice(), plan.dt);
            let p = clean_up(&mut m);
            max_purity_rise = max_purity_rise.max(p - purity);
            purity = p;
        }
        if next_sample < n_samples && sample_steps[next_sample] == k {
            let tau = k as f64 * plan.dt;
            let rho = DensityMatrix::from_raw(space, m.clone());
            let r = record(k, tau, &rho);
            check_record(&r)?;
            if check_at.binary_search(&next_sample).is_ok() {
                let min_eig = rho.min_eigenvalue();
                if min_eig < -POSITIVITY_TOL {
                    return Err(KerrError::SanityViolation {
                        tau,
                        what: "minimum eigenvalue",
                        value: min_eig,
                    });
                }
                positivity.push((tau, min_eig));
            }
            observer(&r, &rho)?;
            records.push(r);
            if let Some(s) = states.as_mut() {
                s.push(rho);
            }
            next_sample += 1;
        }
    }

    Ok(Trajectory {
        records,
        states,
        positivity,
        max_purity_rise,
        final_state: DensityMatrix::from_raw(space, m),
        dt: plan.dt,
    })
}
