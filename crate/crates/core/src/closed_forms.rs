//! Exact moments.
//!
//! [`sm_first_moment`] is the first moment of the feedback master equation,
//! `⟨a(τ)⟩ = α₀ e^{−iχτ}/C² · exp(−2|α₀|²(C−1)/C) · e^{−χ²τ}` with
//! `C = 2 − e^{−2iχτ}`. It is kept apart from the Kerr and Kerr+dephasing
//! moments: those follow from the coherence law
//! `ρ_{nm}(τ) = ρ_{nm}(0) exp(−iχ(n²−m²)τ − χ²(n−m)²τ)` of the surrogate
//! model and serve as oracles for the integrator, whereas the `1/C²`
//! structure of the feedback moment does not follow from that model.
//!
//! All functions take `chi` and `tau` separately since `e^{−χ²τ}` is not a
//! function of the product alone.

use std::f64::consts::PI;

use crate::fock::C64;

/// `C(χτ) = 2 − e^{−2iχτ}`; `|C| ∈ [1, 3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFactor(pub C64);

impl CFactor {
    pub fn value(self) -> C64 {
        self.0
    }
}

pub fn c_factor(chi_tau: f64) -> CFactor {
    CFactor(C64::new(2.0, 0.0) - C64::from_polar(1.0, -2.0 * chi_tau))
}

/// Factorization of a first moment: `value = α₀ · rotation · interference · damping`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFactors {
    pub rotation: C64,
    pub interference: C64,
    pub damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    pub value: C64,
    pub factors: MomentFactors,
}

impl MomentResult {
    pub fn reconstruct(&self, alpha0: C64) -> C64 {
        alpha0 * self.factors.rotation * self.factors.interference * self.factors.damping
    }
}

/// First moment of the feedback master equation, with its factors:
/// rotation `e^{−iχτ}/C²`, interference `exp(−2|α₀|²(C−1)/C)`, damping
/// `e^{−χ²τ}`.
pub fn sm_first_moment(alpha0: C64, chi: f64, tau: f64) -> MomentResult {
    let chi_tau = chi * tau;
    let c = c_factor(chi_tau).value();
    let rotation = C64::from_polar(1.0, -chi_tau) / (c * c);
    let interference = (-2.0 * alpha0.norm_sqr() * (c - 1.0) / c).exp();
    let damping = (-chi * chi * tau).exp();
    MomentResult {
        value: alpha0 * rotation * interference * damping,
        factors: MomentFactors {
            rotation,
            interference,
            damping,
        },
    }
}

/// `α₀ e^{−iχτ} exp(|α₀|²(e^{−2iχτ} − 1))` for `H = χ(a†a)²`.
pub fn kerr_first_moment(alpha0: C64, chi: f64, tau: f64) -> C64 {
    let chi_tau = chi * tau;
    let z = C64::from_polar(1.0, -2.0 * chi_tau) - 1.0;
    alpha0 * C64::from_polar(1.0, -chi_tau) * (z * alpha0.norm_sqr()).exp()
}

/// Kerr moment times `e^{−χ²τ}`; exact for the dephasing preset.
pub fn dephasing_first_moment(alpha0: C64, chi: f64, tau: f64) -> C64 {
    kerr_first_moment(alpha0, chi, tau) * (-chi * chi * tau).exp()
}

/// `α₀² e^{−4iχτ} exp(|α₀|²(e^{−4iχτ} − 1)) e^{−4χ²τ}`, from the `(n+2, n)`
/// coherences.
pub fn dephasing_second_moment(alpha0: C64, chi: f64, tau: f64) -> C64 {
    let chi_tau = chi * tau;
    let z = C64::from_polar(1.0, -4.0 * chi_tau) - 1.0;
    alpha0
        * alpha0
        * C64::from_polar(1.0, -4.0 * chi_tau)
        * (z * alpha0.norm_sqr()).exp()
        * (-4.0 * chi * chi * tau).exp()
}

/// Variance of `X_θ = (a e^{−iθ} + a† e^{iθ})/2` under the dephasing preset:
/// `(1 + 2|α₀|² + 2Re(e^{−2iθ}⟨a²⟩))/4 − Re(e^{−iθ}⟨a⟩)²`.
pub fn dephasing_quadrature_variance(alpha0: C64, chi: f64, tau: f64, theta: f64) -> f64 {
    let m1 = dephasing_first_moment(alpha0, chi, tau);
    let m2 = dephasing_second_moment(alpha0, chi, tau);
    let mean = (C64::from_polar(1.0, -theta) * m1).re;
    let second =
        (1.0 + 2.0 * alpha0.norm_sqr() + 2.0 * (C64::from_polar(1.0, -2.0 * theta) * m2).re) / 4.0;
    (second - mean * mean).max(0.0)
}

/// `e^{−kπχ}`: surviving `|⟨a⟩|/|α₀|` at the `k`-th recurrence `χτ = kπ`.
pub fn recurrence_envelope(chi: f64, k: u32) -> f64 {
    (-(k as f64) * PI * chi).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation_op, coherent_state, expectation, ys_state, TruncatedFockSpace};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn c_factor_values() {
        assert_eq!(c_factor(0.0).value(), c(1.0, 0.0));
        assert!((c_factor(PI / 2.0).value() - c(3.0, 0.0)).norm() < 1e-15);
        assert!((c_factor(PI / 4.0).value() - c(2.0, 1.0)).norm() < 1e-15);
        for k in 0..200 {
            let m = c_factor(0.05 * k as f64).value().norm();
            assert!((1.0 - 1e-15..=3.0 + 1e-15).contains(&m));
        }
    }

    #[test]
    fn sm_at_origin_is_alpha() {
        let a0 = c(1.3, -0.2);
        let r = sm_first_moment(a0, 0.3, 0.0);
        assert_eq!(r.value, a0);
        assert_eq!(r.factors.damping, 1.0);
    }

    #[test]
    fn sm_reference_values() {
        // mpmath, 30 digits
        let r = sm_first_moment(c(2.0, 0.0), 0.3, PI / 0.3);
        assert!((r.value - c(-0.779322274750693589803969065235, 0.0)).norm() < 1e-12);
        let r = sm_first_moment(c(1.0, 0.0), 0.1, PI / 2.0 / 0.1);
        assert!((r.value - c(0.0, -0.0250310670563852238080097490285)).norm() < 1e-13);
    }

    #[test]
    fn sm_factors_reconstruct() {
        for &(a, chi, tau) in &[
            (c(2.0, 0.0), 0.3, 3.1),
            (c(0.4, 1.1), 1.7, 0.2),
            (c(1.0, 0.0), 0.1, 40.0),
        ] {
            let r = sm_first_moment(a, chi, tau);
            assert!((r.reconstruct(a) - r.value).norm() <= 1e-14 * r.value.norm().max(1e-300));
        }
    }

    #[test]
    fn kerr_values() {
        let a0 = c(2.0, 0.0);
        assert_eq!(kerr_first_moment(a0, 0.3, 0.0), a0);
        let rec = kerr_first_moment(a0, 0.3, PI / 0.3);
        assert!((rec + a0).norm() < 1e-12);
        let half = kerr_first_moment(a0, 0.3, PI / 2.0 / 0.3);
        assert!((half - c(0.0, -6.70925255805023677642778251562e-4)).norm() < 1e-15);
    }

    #[test]
    fn kerr_half_period_matches_ys_state() {
        let space = TruncatedFockSpace::new(64).unwrap();
        let rho = ys_state(c(2.0, 0.0), space).projector();
        let brute = expectation(&rho, &annihilation_op(space)).unwrap();
        let exact = kerr_first_moment(c(2.0, 0.0), 0.7, PI / 2.0 / 0.7);
        assert!((brute - exact).norm() < 1e-14);
    }

    #[test]
    fn dephasing_values() {
        assert_eq!(dephasing_first_moment(c(1.0, 0.0), 0.3, 0.0), c(1.0, 0.0));
        let v = dephasing_first_moment(c(1.0, 0.0), 0.3, PI / 0.3);
        assert!((v - c(-0.389661137375346808492852592115, 0.0)).norm() < 1e-12);
        for a0 in [c(0.5, 0.0), c(1.0, 1.0), c(3.0, 0.0)] {
            let ratio = dephasing_first_moment(a0, 0.4, 2.3) / kerr_first_moment(a0, 0.4, 2.3);
            assert!((ratio - c((-0.16f64 * 2.3).exp(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn second_moment_values() {
        assert_eq!(dephasing_second_moment(c(1.5, 0.0), 0.3, 0.0), c(2.25, 0.0));
        let v = dephasing_second_moment(c(1.0, 0.0), 0.3, PI / 2.0 / 0.3);
        // e^{−0.6π}
        assert!((v - c(0.151835801980648897474177621479, 0.0)).norm() < 1e-12);
        // damping factor is the fourth power of the first-moment one
        let chi: f64 = 0.37;
        let tau = 1.9;
        let a0 = c(1.2, 0.0);
        let undamped = dephasing_second_moment(a0, chi, tau) * (4.0 * chi * chi * tau).exp();
        let kerr1 = dephasing_first_moment(a0, chi, tau) / kerr_first_moment(a0, chi, tau);
        assert!((kerr1.re.powi(4) - (-4.0 * chi * chi * tau).exp()).abs() < 1e-14);
        assert!(
            (undamped.norm()
                - (a0.norm_sqr() * ((C64::from_polar(1.0, -4.0 * chi * tau) - 1.0).re)).exp()
                    * a0.norm_sqr())
            .abs()
                < 1e-13
        );
    }

    #[test]
    fn variance_limits_and_golden() {
        for theta in [0.0, 0.4, 1.3, PI] {
            assert!(
                (dephasing_quadrature_variance(c(2.0, 0.0), 0.3, 0.0, theta) - 0.25).abs() < 1e-14
            );
        }
        // strong dephasing: moments vanish
        let v = dephasing_quadrature_variance(c(2.0, 0.0), 50.0, 1.0, 0.3);
        assert!((v - 9.0 / 4.0).abs() < 1e-12);
        // χ = 0.3, |α₀|² = 4, χτ = π/2, θ = χτ + π/2 (mpmath)
        let v = dephasing_quadrature_variance(c(2.0, 0.0), 0.3, PI / 2.0 / 0.3, PI);
        assert!((v - 2.55367160396129777376502281903).abs() < 1e-12);
    }

    #[test]
    fn variance_matches_coherent_state_at_origin() {
        let space = TruncatedFockSpace::new(40).unwrap();
        let rho = coherent_state(c(2.0, 0.0), space).projector();
        let a = annihilation_op(space);
        let mean = expectation(&rho, &a).unwrap();
        assert!((mean - dephasing_first_moment(c(2.0, 0.0), 0.3, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn envelope_values() {
        assert!((recurrence_envelope(0.1, 1) - 0.730402691048645598134852598966).abs() < 1e-15);
        assert!((recurrence_envelope(0.3, 1) - 0.389661137375346808492852592115).abs() < 1e-15);
        assert_eq!(recurrence_envelope(0.3, 0), 1.0);
    }

    #[test]
    fn sm_bound_on_grid() {
        let mut worst: f64 = f64::NEG_INFINITY;
        for i in 0..100 {
            for j in 0..100 {
                let chi_tau = 4.0 * PI * i as f64 / 99.0;
                let a0 = c(0.1 + 3.0 * j as f64 / 99.0, 0.0);
                for chi in [0.1, 0.3, 1.0] {
                    let tau = chi_tau / chi;
                    let bound = a0.norm() * (-chi * chi * tau).exp();
                    worst = worst.max(sm_first_moment(a0, chi, tau).value.norm() - bound);
                }
            }
        }
        assert!(worst <= 1e-14, "worst excess {worst}");
    }

    proptest! {
        #[test]
        fn sm_equality_only_at_recurrences(chi in 0.05f64..2.0, k in 0u32..4, a in 0.2f64..3.0) {
            let tau = k as f64 * PI / chi;
            let v = sm_first_moment(c(a, 0.0), chi, tau).value.norm();
            let bound = a * (-chi * chi * tau).exp();
            prop_assert!((v - bound).abs() <= 1e-12 * a);
            let off = sm_first_moment(c(a, 0.0), chi, tau + 0.3 / chi).value.norm();
            prop_assert!(off < a * (-chi * chi * (tau + 0.3 / chi)).exp());
        }

        #[test]
        fn sm_periodic_up_to_damping(chi in 0.05f64..1.0, chi_tau in 0.0f64..7.0, a in 0.1f64..2.5) {
            let tau = chi_tau / chi;
            let shift = 2.0 * PI / chi;
            let v0 = sm_first_moment(c(a, 0.0), chi, tau).value;
            let v1 = sm_first_moment(c(a, 0.0), chi, tau + shift).value * (chi * chi * shift).exp();
            prop_assert!((v0 - v1).norm() <= 1e-10);
        }

        #[test]
        fn variance_is_nonnegative(a in 0.0f64..3.0, chi in 0.05f64..2.0, chi_tau in 0.0f64..10.0, theta in 0.0f64..6.3) {
            let v = dephasing_quadrature_variance(c(a, 0.0), chi, chi_tau / chi, theta);
            prop_assert!(v >= 0.0);
        }
    }
}
