//! Truncated Fock space: mode operators, reference states and the basic
//! expectation/fidelity primitives.
//!
//! Matrices are stored column-major (nalgebra), indexed `(row, col)` with
//! Fock labels `|0⟩..|dim−1⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{KerrError, Result};

pub type C64 = Complex64;

/// Tail mass above which a coherent-state truncation is reported.
pub const TRUNCATION_TAIL_TOL: f64 = 1e-10;

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Fock levels `|0⟩..|dim−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncatedFockSpace {
    dim: usize,
}

impl TruncatedFockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(KerrError::InvalidParameter(format!(
                "Fock dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn ensure_same(&self, other: &TruncatedFockSpace) -> Result<()> {
        if self.dim != other.dim {
            return Err(KerrError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Smallest dimension satisfying `|α|² + 6|α| + 10 ≤ dim`.
pub fn adequate_dim(alpha_abs: f64) -> usize {
    (alpha_abs * alpha_abs + 6.0 * alpha_abs + 10.0).ceil() as usize
}

/// [`adequate_dim`] with a 50% safety margin; the default for experiments.
pub fn recommended_dim(alpha_abs: f64) -> usize {
    (1.5 * (alpha_abs * alpha_abs + 6.0 * alpha_abs + 10.0)).ceil() as usize
}

/// A coherent amplitude that does not fit the truncated space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub alpha: C64,
    pub dim: usize,
    /// Poisson weight `Σ_{n≥dim} e^{−|α|²}|α|^{2n}/n!` discarded by truncation.
    pub tail_mass: f64,
}

impl std::fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "coherent amplitude {} loses tail mass {:e} at dim {}",
            self.alpha, self.tail_mass, self.dim
        )
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Untruncated Poisson tail `P(N ≥ dim)` for mean `|α|²`, summed upward
/// from the first discarded term.
pub fn truncation_tail_mass(alpha: C64, dim: usize) -> f64 {
    let mean = alpha.norm_sqr();
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = (-mean + dim as f64 * mean.ln() - ln_factorial(dim)).exp();
    let mut total = 0.0;
    let mut n = dim;
    loop {
        total += term;
        n += 1;
        term *= mean / n as f64;
        if term < total * 1e-17 || n > dim + 100_000 {
            break;
        }
    }
    total.min(1.0)
}

/// Returns a warning when the coherent amplitude does not fit the space.
pub fn check_truncation(alpha: C64, space: TruncatedFockSpace) -> Option<TruncationWarning> {
    let tail_mass = truncation_tail_mass(alpha, space.dim);
    (tail_mass > TRUNCATION_TAIL_TOL).then_some(TruncationWarning {
        alpha,
        dim: space.dim,
        tail_mass,
    })
}

/// An operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: TruncatedFockSpace,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(space: TruncatedFockSpace, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != space.dim || matrix.ncols() != space.dim {
            return Err(KerrError::DimensionMismatch {
                expected: space.dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> TruncatedFockSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        self.space.ensure_same(&rhs.space)?;
        Ok(Operator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        })
    }
}

/// `a|n⟩ = √n |n−1⟩`.
pub fn annihilation_op(space: TruncatedFockSpace) -> Operator {
    let d = space.dim;
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator { space, matrix: m }
}

pub fn creation_op(space: TruncatedFockSpace) -> Operator {
    annihilation_op(space).adjoint()
}

/// `a†a`, diagonal with exact integer entries.
pub fn number_op(space: TruncatedFockSpace) -> Operator {
    let d = space.dim;
    let diag = DVector::from_iterator(d, (0..d).map(|n| C64::new(n as f64, 0.0)));
    Operator {
        space,
        matrix: DMatrix::from_diagonal(&diag),
    }
}

pub fn identity_op(space: TruncatedFockSpace) -> Operator {
    Operator {
        space,
        matrix: DMatrix::identity(space.dim, space.dim),
    }
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: TruncatedFockSpace,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on a zero vector or a length mismatch.
    pub fn new(space: TruncatedFockSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim {
            return Err(KerrError::DimensionMismatch {
                expected: space.dim,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(KerrError::InvalidParameter(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        Ok(Self {
            space,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// The Fock state `|n⟩`.
    pub fn fock(space: TruncatedFockSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(KerrError::InvalidParameter(format!(
                "Fock level {n} outside dimension {}",
                space.dim
            )));
        }
        let mut v = DVector::zeros(space.dim);
        v[n] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes: v,
        })
    }

    pub fn space(&self) -> TruncatedFockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.ensure_same(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Coherent amplitudes `e^{−|α|²/2} αⁿ/√n!` by the recurrence
/// `c_{n+1} = c_n α/√(n+1)`, unnormalized.
fn coherent_amplitudes(alpha: C64, dim: usize) -> DVector<C64> {
    let mut c = DVector::zeros(dim);
    c[0] = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..dim {
        c[n] = c[n - 1] * alpha / (n as f64).sqrt();
    }
    c
}

/// `|α⟩` renormalized on the truncated space. Logs a warning when the
/// discarded tail exceeds [`TRUNCATION_TAIL_TOL`].
pub fn coherent_state(alpha: C64, space: TruncatedFockSpace) -> StateVector {
    if let Some(w) = check_truncation(alpha, space) {
        log::warn!("{w}");
    }
    let c = coherent_amplitudes(alpha, space.dim);
    StateVector::new(space, c).expect("coherent amplitudes have c_0 > 0")
}

/// Yurke–Stoler superposition `(|α⟩ + i|−α⟩)/√2`.
pub fn ys_state(alpha: C64, space: TruncatedFockSpace) -> StateVector {
    cat_state(alpha, C64::i(), space)
}

/// `(|α⟩ + w|−α⟩)` normalized. With `w = ±i` the cross terms cancel
/// (⟨α|−α⟩ is real), so the norm is exactly `√2`.
pub fn cat_state(alpha: C64, weight: C64, space: TruncatedFockSpace) -> StateVector {
    let plus = coherent_state(alpha, space);
    let minus = coherent_state(-alpha, space);
    let v = plus.amplitudes + minus.amplitudes * weight;
    StateVector::new(space, v).unwrap_or_else(|_| StateVector::fock(space, 0).unwrap())
}

/// Hermitian, unit-trace state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: TruncatedFockSpace,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace (both within 1e−10).
    pub fn new(space: TruncatedFockSpace, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != space.dim || matrix.ncols() != space.dim {
            return Err(KerrError::DimensionMismatch {
                expected: space.dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let rho = Self { space, matrix };
        let herm = rho.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(KerrError::SanityViolation {
                tau: 0.0,
                what: "hermiticity defect",
                value: herm,
            });
        }
        let tr_err = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if tr_err > TRACE_TOL {
            return Err(KerrError::SanityViolation {
                tau: 0.0,
                what: "trace error",
                value: tr_err,
            });
        }
        Ok(rho)
    }

    /// Maximally mixed state `I/dim`.
    pub fn maximally_mixed(space: TruncatedFockSpace) -> Self {
        let d = space.dim;
        Self {
            space,
            matrix: DMatrix::identity(d, d) / C64::new(d as f64, 0.0),
        }
    }

    /// Diagonal state with the given (normalized) populations.
    pub fn diagonal(space: TruncatedFockSpace, populations: &[f64]) -> Result<Self> {
        if populations.len() != space.dim {
            return Err(KerrError::DimensionMismatch {
                expected: space.dim,
                found: populations.len(),
            });
        }
        let diag = DVector::from_iterator(space.dim, populations.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(space, DMatrix::from_diagonal(&diag))
    }

    /// Trusted constructor for states produced by the integrator.
    pub(crate) fn from_raw(space: TruncatedFockSpace, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim);
        Self { space, matrix }
    }

    pub fn space(&self) -> TruncatedFockSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr ρ²`; equals `Σ|ρ_ij|²` for Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max |ρ − ρ†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.space.dim;
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in j..d {
                let diff = self.matrix[(i, j)] - self.matrix[(j, i)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Fock populations `ρ_nn`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.space.dim)
            .map(|n| self.matrix[(n, n)].re)
            .collect()
    }

    /// Population of the top three Fock levels (or all of them for `dim < 3`).
    pub fn top_level_population(&self) -> f64 {
        let d = self.space.dim;
        (d.saturating_sub(3)..d)
            .map(|n| self.matrix[(n, n)].re)
            .sum()
    }
}

impl From<&StateVector> for DensityMatrix {
    fn from(psi: &StateVector) -> Self {
        psi.projector()
    }
}

/// Low-order moments read directly off the Fock-basis entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `⟨a⟩ = Σ √n ρ_{n,n−1}`
    pub a: C64,
    /// `⟨a²⟩ = Σ √(n(n−1)) ρ_{n,n−2}`
    pub a2: C64,
    /// `⟨a†a⟩`
    pub n: f64,
    /// `⟨aa†⟩` for the truncated matrices (the top level contributes 0).
    pub a_adag: f64,
}

impl Moments {
    pub fn of(rho: &DensityMatrix) -> Self {
        let m = &rho.matrix;
        let d = rho.space.dim;
        let mut a = C64::new(0.0, 0.0);
        let mut a2 = C64::new(0.0, 0.0);
        let mut n_mean = 0.0;
        let mut a_adag = 0.0;
        for n in 0..d {
            let nf = n as f64;
            let pop = m[(n, n)].re;
            n_mean += nf * pop;
            if n + 1 < d {
                a_adag += (nf + 1.0) * pop;
            }
            if n >= 1 {
                a += m[(n, n - 1)] * nf.sqrt();
            }
            if n >= 2 {
                a2 += m[(n, n - 2)] * (nf * (nf - 1.0)).sqrt();
            }
        }
        Self {
            a,
            a2,
            n: n_mean,
            a_adag,
        }
    }
}

/// `tr(ρ·op)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    rho.space.ensure_same(&op.space)?;
    let d = rho.space.dim;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho.matrix[(i, j)] * op.matrix[(j, i)];
        }
    }
    Ok(acc)
}

/// `⟨ψ|ρ|ψ⟩` clamped to `[0, 1]`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    rho.space.ensure_same(&psi.space)?;
    let v = &psi.amplitudes;
    let f = v.dotc(&(&rho.matrix * v)).re;
    if f < -1e-12 {
        return Err(KerrError::SanityViolation {
            tau: f64::NAN,
            what: "negative fidelity",
            value: f,
        });
    }
    Ok(f.clamp(0.0, 1.0))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn trace(rho: &DensityMatrix) -> C64 {
    rho.trace()
}

pub fn hermiticity_defect(rho: &DensityMatrix) -> f64 {
    rho.hermiticity_defect()
}
