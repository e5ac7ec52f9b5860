//! Cat-quality diagnostics: rotated quadrature variances, Yurke–Stoler
//! fidelity, Wigner function and its negativity volume.
//!
//! Quadratures follow `X_θ = (a e^{−iθ} + a† e^{iθ})/2` (vacuum variance
//! 1/4). The rotated frame quadrature `X̃₂` uses
//! `θ(τ) = arg α₀ + χτ + π/2`; the tag [`X2_TILDE_CONVENTION`] is written
//! into every experiment manifest.
//!
//! The Wigner function is the displaced parity
//! `W(β) = (2/π) tr[D†(β)ρD(β)Π] = (2/π) Σ ρ_{nm} (−1)ⁿ ⟨m|D(2β)|n⟩`,
//! with `β = x + ip` in `(X₁, X₂)` coordinates. The displacement matrix
//! elements are the untruncated ones, generated per grid point by a
//! normalized associated-Laguerre recurrence.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{KerrError, Result};
use crate::fock::{
    annihilation_op, cat_state, check_truncation, fidelity_pure, DensityMatrix, Moments, Operator,
    TruncatedFockSpace, TruncationWarning, C64,
};

pub const X2_TILDE_CONVENTION: &str =
    "theta(tau)=arg(alpha0)+chi*tau+pi/2;X=(a*exp(-i*theta)+adag*exp(i*theta))/2;vacuum_var=1/4";

pub const DEFAULT_WIGNER_RESOLUTION: usize = 201;

/// `θ(τ) = arg α₀ + χτ + π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFrame {
    pub alpha_arg: f64,
    pub chi: f64,
}

impl QuadratureFrame {
    pub fn new(alpha0: C64, chi: f64) -> Self {
        Self {
            alpha_arg: alpha0.arg(),
            chi,
        }
    }

    pub fn theta(&self, tau: f64) -> f64 {
        self.alpha_arg + self.chi * tau + FRAC_PI_2
    }
}

/// `V(X_θ) = ⟨X_θ²⟩ − ⟨X_θ⟩²`, with the truncated `aa†` (top level maps to 0).
pub fn quadrature_variance(rho: &DensityMatrix, theta: f64) -> Result<f64> {
    let m = Moments::of(rho);
    let mean = (C64::from_polar(1.0, -theta) * m.a).re;
    let second = (2.0 * (C64::from_polar(1.0, -2.0 * theta) * m.a2).re + m.a_adag + m.n) / 4.0;
    let v = second - mean * mean;
    if v < -1e-10 {
        return Err(KerrError::SanityViolation {
            tau: f64::NAN,
            what: "negative quadrature variance",
            value: v,
        });
    }
    Ok(v.max(0.0))
}

pub fn x2_tilde_variance(rho: &DensityMatrix, tau: f64, chi: f64, alpha0: C64) -> Result<f64> {
    quadrature_variance(rho, QuadratureFrame::new(alpha0, chi).theta(tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YsFidelity {
    /// Against `(|α⟩ + i|−α⟩)/√2`.
    pub plus: f64,
    /// Against `(|α⟩ − i|−α⟩)/√2`.
    pub minus: f64,
    pub warning: Option<TruncationWarning>,
}

impl YsFidelity {
    pub fn best(&self) -> f64 {
        self.plus.max(self.minus)
    }
}

/// Fidelity with the Yurke–Stoler state and with its opposite-branch partner.
pub fn ys_fidelity(rho: &DensityMatrix, alpha: C64) -> Result<YsFidelity> {
    let space = rho.space();
    let warning = check_truncation(alpha, space);
    let plus = fidelity_pure(rho, &cat_state(alpha, C64::i(), space))?;
    let minus = fidelity_pure(rho, &cat_state(alpha, -C64::i(), space))?;
    Ok(YsFidelity {
        plus,
        minus,
        warning,
    })
}

/// Fock populations `ρ_nn`.
pub fn photon_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.populations()
}

/// `D(β) = exp(βa† − β̄a)` on the truncated space by matrix exponential.
/// Accurate only for states well inside the space; `wigner` does not use it.
pub fn displacement_op(space: TruncatedFockSpace, beta: C64) -> Operator {
    let a = annihilation_op(space);
    let gen = a.matrix().adjoint() * beta - a.matrix() * beta.conj();
    Operator::from_matrix(space, gen.exp()).expect("same dimension")
}

/// `ρ ↦ e^{−iθn} ρ e^{iθn}`.
pub fn rotate(rho: &DensityMatrix, theta: f64) -> DensityMatrix {
    let d = rho.space().dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        rho.matrix()[(i, j)] * C64::from_polar(1.0, -theta * (i as f64 - j as f64))
    });
    DensityMatrix::new(rho.space(), m).expect("unitary rotation keeps the state valid")
}

/// Symmetric grid `[−x_max, x_max] × [−p_max, p_max]`, `resolution` points
/// per axis (endpoints included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSpec {
    pub x_max: f64,
    pub p_max: f64,
    pub resolution: usize,
}

impl WignerSpec {
    pub fn square(half_width: f64, resolution: usize) -> Self {
        Self {
            x_max: half_width,
            p_max: half_width,
            resolution,
        }
    }

    /// Half-width `√⟨n⟩ + 3`, the smallest extent accepted for `rho`.
    pub fn for_state(rho: &DensityMatrix, resolution: usize) -> Self {
        Self::square(required_half_width(rho), resolution)
    }
}

/// `√⟨n⟩ + 3`: the state's amplitude scale plus six vacuum standard deviations.
pub fn required_half_width(rho: &DensityMatrix) -> f64 {
    Moments::of(rho).n.max(0.0).sqrt() + 3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Row `i` is `x = xs[i]`, column `j` is `p = ps[j]`.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    pub fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    pub fn dp(&self) -> f64 {
        self.ps[1] - self.ps[0]
    }

    /// Riemann sum of `W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.dx() * self.dp()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }
}

fn axis(max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -max + 2.0 * max * i as f64 / (n - 1) as f64)
        .collect()
}

/// Hermitian-packed coherences used by the Wigner sum. Band `k` holds
/// `(−1)^j ρ_{j,j+k}` together with the coefficients of the normalized
/// Laguerre recurrence in `j`:
/// `u_{j+1} = ((2j+1+k)s_j − x s_j) u_j − √(j(j+k)) s_j u_{j−1}`,
/// `s_j = 1/√((j+1)(j+k+1))`.
struct Band {
    coherences: Vec<C64>,
    lead: Vec<f64>,
    scale: Vec<f64>,
    back: Vec<f64>,
}

struct Bands {
    bands: Vec<Band>,
    half_ln_fact: Vec<f64>,
}

impl Bands {
    fn new(rho: &DensityMatrix) -> Self {
        let d = rho.space().dim();
        let m = rho.matrix();
        let bands = (0..d)
            .map(|k| {
                let kf = k as f64;
                let len = d - k;
                let mut band = Band {
                    coherences: Vec::with_capacity(len),
                    lead: Vec::with_capacity(len),
                    scale: Vec::with_capacity(len),
                    back: Vec::with_capacity(len),
                };
                for j in 0..len {
                    let jf = j as f64;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let s = 1.0 / ((jf + 1.0) * (jf + kf + 1.0)).sqrt();
                    band.coherences.push(m[(j, j + k)] * sign);
                    band.scale.push(s);
                    band.lead.push((2.0 * jf + 1.0 + kf) * s);
                    band.back.push((jf * (jf + kf)).sqrt() * s);
                }
                band
            })
            .collect();
        let mut half_ln_fact = Vec::with_capacity(d);
        let mut acc = 0.0;
        for k in 0..d {
            if k > 0 {
                acc += (k as f64).ln();
            }
            half_ln_fact.push(0.5 * acc);
        }
        Self {
            bands,
            half_ln_fact,
        }
    }

    /// `Σ ρ_{nm} (−1)ⁿ ⟨m|D(γ)|n⟩` for Hermitian `ρ`, using
    /// `⟨j+k|D(γ)|j⟩ = u_{j,k} e^{ikφ}` with the normalized Laguerre values
    /// `u_{j,k} = √(j!/(j+k)!) |γ|^k e^{−|γ|²/2} L_j^{(k)}(|γ|²)`.
    fn parity_sum(&self, gamma: C64) -> f64 {
        let x = gamma.norm_sqr();
        let ln_abs = 0.5 * x.ln();
        let phase_step = C64::from_polar(1.0, gamma.arg());
        let mut phase = C64::new(1.0, 0.0);
        let mut total = 0.0;
        for (k, band) in self.bands.iter().enumerate() {
            if k > 0 {
                phase *= phase_step;
            }
            let u0 = if x == 0.0 {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-0.5 * x + k as f64 * ln_abs - self.half_ln_fact[k]).exp()
            };
            if u0 == 0.0 && x != 0.0 {
                continue;
            }
            let mut prev = 0.0;
            let mut cur = u0;
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..band.coherences.len() {
                let r = band.coherences[j];
                re += r.re * cur;
                im += r.im * cur;
                let next = (band.lead[j] - x * band.scale[j]) * cur - band.back[j] * prev;
                prev = cur;
                cur = next;
            }
            let contribution = re * phase.re - im * phase.im;
            total += if k == 0 {
                contribution
            } else {
                2.0 * contribution
            };
        }
        total
    }
}

/// Wigner function on `spec`'s grid. Rows are evaluated in parallel and
/// assembled in index order.
pub fn wigner(rho: &DensityMatrix, spec: &WignerSpec) -> Result<WignerGrid> {
    if spec.resolution < 2 {
        return Err(KerrError::InvalidParameter(
            "wigner resolution must be at least 2".into(),
        ));
    }
    let required = required_half_width(rho);
    let extent = spec.x_max.min(spec.p_max);
    if extent < required - 1e-12 {
        return Err(KerrError::ExtentTooSmall { extent, required });
    }
    let xs = axis(spec.x_max, spec.resolution);
    let ps = axis(spec.p_max, spec.resolution);
    let bands = Bands::new(rho);
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| {
            ps.iter()
                .map(|&p| 2.0 / PI * bands.parity_sum(C64::new(2.0 * x, 2.0 * p)))
                .collect()
        })
        .collect();
    let n = spec.resolution;
    let values = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(WignerGrid { xs, ps, values })
}

/// Single-point evaluation of `W(x + ip)`.
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    2.0 / PI * Bands::new(rho).parity_sum(C64::new(2.0 * x, 2.0 * p))
}

/// `Σ max(0, −W) dx dp`.
pub fn negativity_volume(grid: &WignerGrid) -> f64 {
    grid.values.iter().map(|&w| (-w).max(0.0)).sum::<f64>() * grid.dx() * grid.dp()
}
