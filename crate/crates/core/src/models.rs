//! Lindblad generators for the three model presets.
//!
//! All presets share the Kerr Hamiltonian `H = χ(a†a)²`. Dissipation is a
//! list of channels: phase diffusion `L = a†a` or zero-temperature damping
//! `L = a`, each with `D[L]ρ = LρL† − ½{L†L, ρ}`.
//!
//! Every channel here is either diagonal in the Fock basis or a single
//! off-diagonal band, so the generator is applied entrywise in `O(dim²)`
//! through [`Liouvillian`] instead of dense matrix products.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{KerrError, Result};
use crate::fock::{DensityMatrix, TruncatedFockSpace, C64};

/// Kerr strength / feedback gain χ, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FeedbackGain(f64);

impl FeedbackGain {
    pub fn new(chi: f64) -> Result<Self> {
        if !(chi.is_finite() && chi > 0.0) {
            return Err(KerrError::InvalidParameter(format!(
                "chi must be positive and finite, got {chi}"
            )));
        }
        Ok(Self(chi))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// `L = a†a`
    Dephasing,
    /// `L = a`
    Damping,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    kind: ChannelKind,
    rate: f64,
}

impl Channel {
    pub fn new(kind: ChannelKind, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(KerrError::InvalidParameter(format!(
                "channel rate must be non-negative, got {rate}"
            )));
        }
        Ok(Self { kind, rate })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    PureKerr,
    KerrDephasing,
    KerrDamping,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::PureKerr => "kerr",
            Preset::KerrDephasing => "dephasing",
            Preset::KerrDamping => "damping",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = KerrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kerr" | "pure_kerr" => Ok(Preset::PureKerr),
            "dephasing" | "kerr_dephasing" => Ok(Preset::KerrDephasing),
            "damping" | "kerr_damping" => Ok(Preset::KerrDamping),
            other => Err(KerrError::InvalidParameter(format!(
                "unknown model preset `{other}`"
            ))),
        }
    }
}

/// Phase-diffusion rate giving `|n−m| = 1` coherences the decay `e^{−χ²τ}`.
pub fn dephasing_rate(chi: f64) -> f64 {
    2.0 * chi * chi
}

/// `H = χ(a†a)²` plus dissipation channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    preset: Option<Preset>,
    chi: FeedbackGain,
    channels: Vec<Channel>,
}

impl ModelSpec {
    pub fn new(chi: FeedbackGain, channels: Vec<Channel>) -> Self {
        Self {
            preset: None,
            chi,
            channels,
        }
    }

    pub fn preset(&self) -> Option<Preset> {
        self.preset
    }

    pub fn chi(&self) -> f64 {
        self.chi.value()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn total_rate(&self) -> f64 {
        self.channels.iter().map(|c| c.rate).sum()
    }
}

/// Builds a preset. `gamma` is required for (and only accepted by)
/// [`Preset::KerrDamping`].
pub fn preset(name: Preset, chi: f64, gamma: Option<f64>) -> Result<ModelSpec> {
    let chi = FeedbackGain::new(chi)?;
    let channels = match (name, gamma) {
        (Preset::PureKerr, None) => vec![],
        (Preset::KerrDephasing, None) => {
            vec![Channel::new(
                ChannelKind::Dephasing,
                dephasing_rate(chi.value()),
            )?]
        }
        (Preset::KerrDamping, Some(g)) => vec![Channel::new(ChannelKind::Damping, g)?],
        (Preset::KerrDamping, None) => {
            return Err(KerrError::InvalidParameter(
                "the damping preset requires gamma".into(),
            ))
        }
        (p, Some(_)) => {
            return Err(KerrError::InvalidParameter(format!(
                "gamma is only meaningful for the damping preset, not `{p}`"
            )))
        }
    };
    Ok(ModelSpec {
        preset: Some(name),
        chi,
        channels,
    })
}

/// The generator laid out for fast entrywise application:
///
/// `(dρ/dτ)_{nm} = λ_{nm} ρ_{nm} + κ_{nm} ρ_{n+1,m+1}`
///
/// with `λ` collecting the Kerr commutator, dephasing and the anticommutator
/// part of damping, and `κ = γ√((n+1)(m+1))` the damping jump term.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    diag: Vec<C64>,
    feed: Option<Vec<f64>>,
}

impl Liouvillian {
    pub fn new(model: &ModelSpec, space: TruncatedFockSpace) -> Self {
        let d = space.dim();
        let chi = model.chi();
        let (mut dephasing, mut damping) = (0.0, 0.0);
        for c in &model.channels {
            match c.kind {
                ChannelKind::Dephasing => dephasing += c.rate,
                ChannelKind::Damping => damping += c.rate,
            }
        }
        // column-major: index n + m·d
        let mut diag = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                let (nf, mf) = (n as f64, m as f64);
                let kerr = -chi * (nf * nf - mf * mf);
                let decay = -0.5 * dephasing * (nf - mf).powi(2) - 0.5 * damping * (nf + mf);
                diag.push(C64::new(decay, kerr));
            }
        }
        let feed = (damping > 0.0).then(|| {
            let mut k = Vec::with_capacity(d * d);
            for m in 0..d {
                for n in 0..d {
                    let v = if n + 1 < d && m + 1 < d {
                        damping * (((n + 1) * (m + 1)) as f64).sqrt()
                    } else {
                        0.0
                    };
                    k.push(v);
                }
            }
            k
        });
        Self { dim: d, diag, feed }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the generator has no jump (damping) term.
    pub fn is_diagonal(&self) -> bool {
        self.feed.is_none()
    }

    /// Writes `L(rho)` into `out`; both are column-major `dim×dim` slices.
    pub fn apply_into(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        debug_assert_eq!(out.len(), d * d);
        for ((o, &l), &r) in out.iter_mut().zip(&self.diag).zip(rho) {
            *o = l * r;
        }
        if let Some(feed) = &self.feed {
            for m in 0..d - 1 {
                let col = m * d;
                let next = (m + 1) * d;
                for n in 0..d - 1 {
                    out[col + n] += rho[next + n + 1] * feed[col + n];
                }
            }
        }
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        self.apply_into(rho.as_slice(), out.as_mut_slice());
        out
    }
}

/// `dρ/dτ = −i[χ(a†a)², ρ] + Σ rate·D[L]ρ`.
///
/// The result is a traceless Hermitian matrix, not a state, so it is
/// returned as a raw matrix.
pub fn generator_apply(model: &ModelSpec, rho: &DensityMatrix) -> DMatrix<C64> {
    Liouvillian::new(model, rho.space()).apply(rho.matrix())
}

/// Applies the generator to an arbitrary (not necessarily physical) matrix.
pub fn generator_apply_matrix(model: &ModelSpec, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if m.nrows() != m.ncols() {
        return Err(KerrError::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let space = TruncatedFockSpace::new(m.nrows())?;
    Ok(Liouvillian::new(model, space).apply(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation_op, coherent_state, number_op, StateVector};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // Dense reference: −i[H,ρ] + Σ rate (LρL† − ½{L†L,ρ}) by matrix products.
    fn dense_generator(model: &ModelSpec, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let space = TruncatedFockSpace::new(rho.nrows()).unwrap();
        let n = number_op(space).matrix().clone();
        let a = annihilation_op(space).matrix().clone();
        let h = &n * &n * c(model.chi(), 0.0);
        let mut out = (&h * rho - rho * &h) * c(0.0, -1.0);
        for ch in model.channels() {
            let l = match ch.kind() {
                ChannelKind::Dephasing => n.clone(),
                ChannelKind::Damping => a.clone(),
            };
            let ld = l.adjoint();
            let ldl = &ld * &l;
            let d = &l * rho * &ld - (&ldl * rho + rho * &ldl) * c(0.5, 0.0);
            out += d * c(ch.rate(), 0.0);
        }
        out
    }

    fn random_hermitian(d: usize, seed: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::from_fn(d, d, |i, j| {
            let k = (i * d + j) % seed.len();
            c(seed[k], seed[(k + 3) % seed.len()] * 0.5)
        });
        m = (&m + m.adjoint()) * c(0.5, 0.0);
        m
    }

    #[test]
    fn presets() {
        let m = preset(Preset::KerrDephasing, 0.3, None).unwrap();
        assert_eq!(m.channels().len(), 1);
        assert_eq!(m.channels()[0].kind(), ChannelKind::Dephasing);
        assert!((m.channels()[0].rate() - 0.18).abs() < 1e-15);

        assert!(preset(Preset::PureKerr, 0.1, None)
            .unwrap()
            .channels()
            .is_empty());

        let m = preset(Preset::KerrDamping, 0.3, Some(0.2)).unwrap();
        assert_eq!(m.channels().len(), 1);
        assert_eq!(m.channels()[0].kind(), ChannelKind::Damping);
        assert_eq!(m.channels()[0].rate(), 0.2);
    }

    #[test]
    fn preset_errors() {
        assert!(preset(Preset::PureKerr, 0.0, None).is_err());
        assert!(preset(Preset::PureKerr, -1.0, None).is_err());
        assert!(preset(Preset::KerrDamping, 0.3, None).is_err());
        assert!(preset(Preset::KerrDamping, 0.3, Some(-0.1)).is_err());
        assert!(preset(Preset::KerrDephasing, 0.3, Some(0.1)).is_err());
        assert!("kerr_dephasing".parse::<Preset>().is_ok());
        assert!("bogus".parse::<Preset>().is_err());
    }

    #[test]
    fn pure_kerr_annihilates_diagonal_states() {
        let s = TruncatedFockSpace::new(6).unwrap();
        let rho = DensityMatrix::diagonal(s, &[0.1, 0.2, 0.3, 0.1, 0.2, 0.1]).unwrap();
        let g = generator_apply(&preset(Preset::PureKerr, 0.7, None).unwrap(), &rho);
        assert!(g.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn dephasing_coherence_law_on_coherent_state() {
        let chi = 0.3;
        let s = TruncatedFockSpace::new(8).unwrap();
        let rho = coherent_state(c(1.0, 0.0), s).projector();
        let model = preset(Preset::KerrDephasing, chi, None).unwrap();
        let fast = generator_apply(&model, &rho);
        let dense = dense_generator(&model, rho.matrix());
        for n in 0..8 {
            for m in 0..8 {
                let (nf, mf) = (n as f64, m as f64);
                let lambda = c(-chi * chi * (nf - mf).powi(2), -chi * (nf * nf - mf * mf));
                let expected = lambda * rho.matrix()[(n, m)];
                assert!((fast[(n, m)] - expected).norm() < 1e-14);
                assert!((dense[(n, m)] - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn dephasing_eigen_action_on_fock_coherences() {
        let chi = 0.45;
        let model = preset(Preset::KerrDephasing, chi, None).unwrap();
        let d = 7;
        for n in 0..d {
            for m in 0..d {
                let mut e = DMatrix::zeros(d, d);
                e[(n, m)] = c(1.0, 0.0);
                let g = generator_apply_matrix(&model, &e).unwrap();
                let (nf, mf) = (n as f64, m as f64);
                let lambda = c(-chi * chi * (nf - mf).powi(2), -chi * (nf * nf - mf * mf));
                for i in 0..d {
                    for j in 0..d {
                        let want = if (i, j) == (n, m) {
                            lambda
                        } else {
                            c(0.0, 0.0)
                        };
                        assert_eq!(g[(i, j)], want);
                    }
                }
            }
        }
    }

    #[test]
    fn fast_generator_matches_dense_for_all_presets() {
        let seed = [0.3, -0.7, 0.11, 0.5, -0.2, 0.9, -0.41, 0.05, 0.66];
        let rho = random_hermitian(9, &seed);
        for model in [
            preset(Preset::PureKerr, 0.4, None).unwrap(),
            preset(Preset::KerrDephasing, 0.4, None).unwrap(),
            preset(Preset::KerrDamping, 0.4, Some(0.25)).unwrap(),
            ModelSpec::new(
                FeedbackGain::new(0.2).unwrap(),
                vec![
                    Channel::new(ChannelKind::Dephasing, 0.1).unwrap(),
                    Channel::new(ChannelKind::Damping, 0.3).unwrap(),
                ],
            ),
        ] {
            let fast = generator_apply_matrix(&model, &rho).unwrap();
            let dense = dense_generator(&model, &rho);
            assert!((fast - dense).camax() < 1e-12);
        }
    }

    #[test]
    fn damping_trace_vanishes_on_fock_state() {
        let s = TruncatedFockSpace::new(5).unwrap();
        let rho = StateVector::fock(s, 3).unwrap().projector();
        let g = generator_apply(&preset(Preset::KerrDamping, 0.2, Some(0.5)).unwrap(), &rho);
        assert!((g[(3, 3)] - c(-1.5, 0.0)).norm() < 1e-15);
        assert!((g[(2, 2)] - c(1.5, 0.0)).norm() < 1e-15);
        assert!(g.trace().norm() < 1e-15);
    }

    fn model_strategy() -> impl Strategy<Value = ModelSpec> {
        (0.05f64..1.5, 0u8..3, 0.0f64..1.0).prop_map(|(chi, which, gamma)| match which {
            0 => preset(Preset::PureKerr, chi, None).unwrap(),
            1 => preset(Preset::KerrDephasing, chi, None).unwrap(),
            _ => preset(Preset::KerrDamping, chi, Some(gamma)).unwrap(),
        })
    }

    fn matrix_strategy(d: usize) -> impl Strategy<Value = DMatrix<C64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
            .prop_map(move |v| DMatrix::from_iterator(d, d, v.into_iter().map(|(r, i)| c(r, i))))
    }

    proptest! {
        #[test]
        fn generator_is_linear(
            model in model_strategy(),
            r1 in matrix_strategy(6),
            r2 in matrix_strategy(6),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let combo = &r1 * c(a, 0.0) + &r2 * c(b, 0.0);
            let lhs = generator_apply_matrix(&model, &combo).unwrap();
            let rhs = generator_apply_matrix(&model, &r1).unwrap() * c(a, 0.0)
                + generator_apply_matrix(&model, &r2).unwrap() * c(b, 0.0);
            prop_assert!((lhs - rhs).camax() < 1e-12);
        }

        #[test]
        fn generator_preserves_hermiticity_and_trace(model in model_strategy(), r in matrix_strategy(6)) {
            let g = generator_apply_matrix(&model, &r).unwrap();
            let g_adj = generator_apply_matrix(&model, &r.adjoint()).unwrap();
            prop_assert!((g.adjoint() - g_adj).camax() < 1e-12);
            prop_assert!(g.trace().norm() < 1e-12);
        }
    }
}
