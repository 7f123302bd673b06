//! Fidelity of a phase-shifted state with itself: exact spectrum sums,
//! per-family closed forms, multi-copy products, and the two analytic lower
//! envelopes that drive the mean- and variance-based limits.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::{pairwise_sum, solve_lambda};
use crate::spectra::NumberDistribution;

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("product model needs at least one factor")]
    EmptyProduct,
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: &'static str },
    #[error("tau = {tau} is outside the envelope's validity range [0, {limit}]; caller must clip")]
    DomainExceeded { tau: f64, limit: f64 },
}

/// |<psi| e^{-i n tau} |psi>|^2 as a function of the phase offset tau.
///
/// The closed variants duplicate what `Spectrum` computes term by term; both
/// routes are kept and cross-checked rather than collapsed.
#[derive(Debug, Clone, PartialEq)]
pub enum FidelityModel {
    /// Exact single-mode fidelity from a dense number distribution.
    Spectrum(NumberDistribution),
    /// Coherent state: exp(2 n_mean (cos tau - 1)).
    CoherentClosed { n_mean: f64 },
    /// Rectangle state: (sin((m+1) tau/2) / ((m+1) sin(tau/2)))^2.
    RectangleClosed { m: u32 },
    /// Vacuum-plus-sliver state: quadratic form in the Dirichlet ratio
    /// r = sin(m tau/2) / (m sin(tau/2)).
    RivasLuisClosed { epsilon: f64, m: u32 },
    /// Product of independent factors (multi-copy states).
    Product(Vec<FidelityModel>),
    /// max(0, 1 - 2 lambda h_plus tau): valid lower envelope for any state
    /// with mean h_plus above its lowest occupied level.
    LinearEnvelope { h_plus: f64 },
    /// cos^2(delta_h tau) up to tau = pi/(2 delta_h), clipped to 0 beyond:
    /// lower envelope for any state with number standard deviation delta_h.
    CosineEnvelope { delta_h: f64 },
}

impl FidelityModel {
    /// Check parameters without evaluating.
    pub fn validate(&self) -> Result<(), FidelityError> {
        match self {
            FidelityModel::Spectrum(_) => Ok(()),
            FidelityModel::CoherentClosed { n_mean } => {
                if n_mean.is_finite() && *n_mean >= 0.0 {
                    Ok(())
                } else {
                    Err(FidelityError::InvalidParameter { reason: "n_mean must be >= 0" })
                }
            }
            FidelityModel::RectangleClosed { .. } => Ok(()),
            FidelityModel::RivasLuisClosed { epsilon, m } => {
                if !epsilon.is_finite() || !(0.0..=1.0).contains(epsilon) {
                    return Err(FidelityError::InvalidParameter {
                        reason: "epsilon must lie in [0, 1]",
                    });
                }
                if *m == 0 {
                    return Err(FidelityError::InvalidParameter { reason: "m must be at least 1" });
                }
                Ok(())
            }
            FidelityModel::Product(factors) => {
                if factors.is_empty() {
                    return Err(FidelityError::EmptyProduct);
                }
                factors.iter().try_for_each(FidelityModel::validate)
            }
            FidelityModel::LinearEnvelope { h_plus } => {
                if h_plus.is_finite() && *h_plus >= 0.0 {
                    Ok(())
                } else {
                    Err(FidelityError::InvalidParameter { reason: "h_plus must be >= 0" })
                }
            }
            FidelityModel::CosineEnvelope { delta_h } => {
                if delta_h.is_finite() && *delta_h >= 0.0 {
                    Ok(())
                } else {
                    Err(FidelityError::InvalidParameter { reason: "delta_h must be >= 0" })
                }
            }
        }
    }

    /// Fidelity at phase offset `tau`, clamped to [0, 1]. Even in `tau`;
    /// exactly 1 at `tau = 0`. Envelope variants clip to 0 outside their
    /// validity range so they stay usable under an integral sign.
    pub fn eval(&self, tau: f64) -> f64 {
        let tau = tau.abs();
        if tau == 0.0 {
            return 1.0;
        }
        let raw = match self {
            FidelityModel::Spectrum(dist) => {
                let probs = dist.probs();
                let re: Vec<f64> =
                    probs.iter().enumerate().map(|(n, &p)| p * (n as f64 * tau).cos()).collect();
                let im: Vec<f64> =
                    probs.iter().enumerate().map(|(n, &p)| p * (n as f64 * tau).sin()).collect();
                let re = pairwise_sum(&re);
                let im = pairwise_sum(&im);
                re * re + im * im
            }
            FidelityModel::CoherentClosed { n_mean } => (2.0 * n_mean * (tau.cos() - 1.0)).exp(),
            FidelityModel::RectangleClosed { m } => {
                let r = dirichlet_ratio(f64::from(m + 1), 0.5 * tau);
                r * r
            }
            FidelityModel::RivasLuisClosed { epsilon, m } => {
                let e = *epsilon;
                let r = dirichlet_ratio(f64::from(*m), 0.5 * tau);
                let cos_top = (f64::from(m + 1) * 0.5 * tau).cos();
                (1.0 - e) * (1.0 - e) + 2.0 * e * (1.0 - e) * r * cos_top + e * e * r * r
            }
            FidelityModel::Product(factors) => {
                // Consecutive identical factors are evaluated once and
                // raised to their multiplicity, so a 100-copy product costs
                // one fidelity evaluation, not 100.
                let mut product = 1.0_f64;
                let mut i = 0;
                while i < factors.len() {
                    let mut run = 1;
                    while i + run < factors.len() && factors[i + run] == factors[i] {
                        run += 1;
                    }
                    let f = factors[i].eval(tau);
                    product *= if run == 1 {
                        f
                    } else if f > 1e-300 {
                        (run as f64 * f.ln()).exp()
                    } else {
                        0.0
                    };
                    i += run;
                }
                product
            }
            FidelityModel::LinearEnvelope { h_plus } => {
                let lambda = solve_lambda().lambda;
                1.0 - 2.0 * lambda * h_plus * tau
            }
            FidelityModel::CosineEnvelope { delta_h } => {
                if delta_h * tau >= 0.5 * PI {
                    0.0
                } else {
                    let c = (delta_h * tau).cos();
                    c * c
                }
            }
        };
        raw.clamp(0.0, 1.0)
    }
}

/// The mean-photon-number envelope max(0, 1 - 2 lambda h_plus tau).
pub fn linear_envelope(h_plus: f64, tau: f64) -> f64 {
    let lambda = solve_lambda().lambda;
    (1.0 - 2.0 * lambda * h_plus * tau).max(0.0)
}

/// The number-variance envelope cos^2(delta_h tau), only valid while the
/// cosine stays in its first quarter period.
pub fn cosine_envelope(delta_h: f64, tau: f64) -> Result<f64, FidelityError> {
    if !delta_h.is_finite() || delta_h < 0.0 {
        return Err(FidelityError::InvalidParameter { reason: "delta_h must be >= 0" });
    }
    let limit = 0.5 * PI / delta_h;
    if !(0.0..=limit).contains(&tau) {
        return Err(FidelityError::DomainExceeded { tau, limit });
    }
    let c = (delta_h * tau).cos();
    Ok(c * c)
}

/// Global fidelity minimum of the vacuum-plus-sliver family: 1 - 4e + 3e^2,
/// independent of the sliver width m.
pub fn rivas_luis_fidelity_floor(epsilon: f64) -> f64 {
    1.0 - 4.0 * epsilon + 3.0 * epsilon * epsilon
}

// Split of pi so that k*PI_HI + k*PI_LO reproduces k*pi to double-double
// accuracy for the k this module meets.
const PI_HI: f64 = std::f64::consts::PI;
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// sin(a u) / (a sin u) for integer-valued `a`, stable near the zeros of
/// sin u. The direct quotient loses accuracy when u sits close to a multiple
/// of pi, because a*u is rounded before the outer sine sees it (absolute
/// argument error ~ulp(a*u), which the small denominator then amplifies);
/// within |sin u| < 1e-3 the ratio is instead rebuilt from the distance
/// d = u - k pi, extracted exactly with a fused multiply-add.
pub(crate) fn dirichlet_ratio(a: f64, u: f64) -> f64 {
    debug_assert!(a >= 1.0 && a == a.trunc());
    let s = u.sin();
    if s.abs() >= 1e-3 {
        return (a * u).sin() / (a * s);
    }
    let k = (u / PI_HI).round();
    let hi = k * PI_HI;
    let hi_residual = k.mul_add(PI_HI, -hi);
    let d = ((u - hi) - hi_residual) - k * PI_LO;
    // sin(a u) = sin(a k pi + a d) = (-1)^(a k) sin(a d) for integer a, and
    // sin(u) = (-1)^k sin(d), so the quotient carries (-1)^((a-1) k).
    let flips = ((a - 1.0) * k).rem_euclid(2.0);
    let sign = if flips == 0.0 { 1.0 } else { -1.0 };
    let ad = a * d;
    if ad.abs() > 1e-2 {
        // d is exact and at most ~1e-3 here, so both sines are clean.
        return sign * ad.sin() / (a * d.sin());
    }
    sign * sinc_poly(ad) / sinc_poly(d)
}

/// sin(x)/x by its first three Maclaurin terms; |x| <= 1e-2 keeps the
/// truncation (x^6/5040) at round-off level.
fn sinc_poly(x: f64) -> f64 {
    let x2 = x * x;
    1.0 - x2 / 6.0 + x2 * x2 / 120.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_distribution, StateFamilySpec};

    fn spectrum(spec: StateFamilySpec) -> FidelityModel {
        FidelityModel::Spectrum(build_distribution(&spec, 1e-15).unwrap())
    }

    #[test]
    fn unity_at_zero_offset_for_every_variant() {
        let models = [
            spectrum(StateFamilySpec::Coherent { n_mean: 2.0 }),
            FidelityModel::CoherentClosed { n_mean: 2.0 },
            FidelityModel::RectangleClosed { m: 7 },
            FidelityModel::RivasLuisClosed { epsilon: 0.1, m: 19 },
            FidelityModel::Product(vec![FidelityModel::CoherentClosed { n_mean: 1.0 }; 3]),
            FidelityModel::LinearEnvelope { h_plus: 1.0 },
            FidelityModel::CosineEnvelope { delta_h: 1.0 },
        ];
        for m in &models {
            assert_eq!(m.eval(0.0), 1.0, "{m:?}");
        }
    }

    #[test]
    fn coherent_closed_matches_spectrum_at_pi() {
        let closed = FidelityModel::CoherentClosed { n_mean: 1.0 };
        let exact = spectrum(StateFamilySpec::Coherent { n_mean: 1.0 });
        let at_pi = closed.eval(PI);
        assert!((at_pi - 0.018_315_638_888_734_18).abs() < 1e-15, "e^-4 vs {at_pi}");
        assert!((at_pi - exact.eval(PI)).abs() <= 1e-10);
    }

    #[test]
    fn rectangle_m1_vanishes_at_pi() {
        let f = FidelityModel::RectangleClosed { m: 1 }.eval(PI);
        assert!(f < 1e-30, "got {f}");
    }

    #[test]
    fn rectangle_m19_first_dirichlet_zero() {
        let tau = 2.0 * PI / 20.0;
        let f = FidelityModel::RectangleClosed { m: 19 }.eval(tau);
        assert!(f <= 1e-20, "got {f}");
    }

    #[test]
    fn closed_forms_match_spectra_on_a_grid() {
        let pairs = [
            (
                FidelityModel::CoherentClosed { n_mean: 3.0 },
                spectrum(StateFamilySpec::Coherent { n_mean: 3.0 }),
            ),
            (
                FidelityModel::RectangleClosed { m: 19 },
                spectrum(StateFamilySpec::Rectangle { m: 19 }),
            ),
            (
                FidelityModel::RivasLuisClosed { epsilon: 0.1, m: 19 },
                spectrum(StateFamilySpec::RivasLuis { epsilon: 0.1, m: 19 }),
            ),
        ];
        for (closed, exact) in &pairs {
            for i in 0..=200 {
                let tau = 2.0 * PI * f64::from(i) / 200.0;
                let a = closed.eval(tau);
                let b = exact.eval(tau);
                assert!((a - b).abs() <= 1e-10, "{closed:?} at tau = {tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn periodicity_for_integer_spectra() {
        let models = [
            spectrum(StateFamilySpec::RivasLuis { epsilon: 0.3, m: 7 }),
            FidelityModel::CoherentClosed { n_mean: 2.5 },
            FidelityModel::RectangleClosed { m: 9 },
        ];
        for m in &models {
            for i in 1..=20 {
                let tau = 6.0 * f64::from(i) / 20.0;
                let diff = (m.eval(tau) - m.eval(tau + 2.0 * PI)).abs();
                assert!(diff <= 1e-12, "{m:?} at tau = {tau}: drift {diff}");
            }
        }
    }

    #[test]
    fn range_stays_in_unit_interval() {
        let m = spectrum(StateFamilySpec::Rectangle { m: 30 });
        for i in 0..=500 {
            let tau = 4.0 * PI * f64::from(i) / 500.0;
            let f = m.eval(tau);
            assert!((0.0..=1.0).contains(&f), "tau = {tau}: {f}");
        }
    }

    #[test]
    fn dirichlet_branch_agrees_with_spectrum_near_revival() {
        // tau/2 near pi exercises the reduced-argument branch (and, at the
        // last two deltas, the direct quotient just past the seam); the
        // 20-term spectrum sum is well conditioned there and serves as
        // reference.
        let closed = FidelityModel::RectangleClosed { m: 19 };
        let exact = spectrum(StateFamilySpec::Rectangle { m: 19 });
        for &delta in &[1e-9, 1e-7, 1e-6, 1e-5, 9e-4, 1.1e-3, 2e-3] {
            let tau = 2.0 * PI - 2.0 * delta;
            let a = closed.eval(tau);
            let b = exact.eval(tau);
            assert!((a - b).abs() <= 1e-12, "delta = {delta}: {a} vs {b}");
        }
    }

    #[test]
    fn dirichlet_ratio_limits() {
        assert!((dirichlet_ratio(20.0, 1e-9) - 1.0).abs() < 1e-12);
        assert!((dirichlet_ratio(3.0, PI) - 1.0).abs() < 1e-12);
        // sign flip: a even, k odd => (-1)^((a-1)k) = -1.
        let r = dirichlet_ratio(2.0, PI + 1e-9);
        assert!(r < 0.0, "got {r}");
        assert!((r + 1.0).abs() < 1e-6);
    }

    #[test]
    fn product_of_identical_factors_uses_one_eval() {
        let one = FidelityModel::CoherentClosed { n_mean: 1.0 };
        let four = FidelityModel::Product(vec![one.clone(); 4]);
        let merged = FidelityModel::CoherentClosed { n_mean: 4.0 };
        for i in 1..=20 {
            let tau = 2.0 * PI * f64::from(i) / 20.0;
            let a = four.eval(tau);
            assert!((a - merged.eval(tau)).abs() <= 1e-12, "tau = {tau}");
            let direct = one.eval(tau).powi(4);
            assert!((a - direct).abs() <= 1e-14 * direct.max(1e-300), "tau = {tau}");
        }
    }

    #[test]
    fn product_of_distinct_factors_multiplies() {
        let a = FidelityModel::CoherentClosed { n_mean: 1.0 };
        let b = FidelityModel::RectangleClosed { m: 4 };
        let prod = FidelityModel::Product(vec![a.clone(), b.clone()]);
        let tau = 0.83;
        assert_eq!(prod.eval(tau), a.eval(tau) * b.eval(tau));
    }

    #[test]
    fn linear_envelope_dominated_by_rectangle() {
        // Rectangle m = 4 has mean 2 above its ground level.
        let exact = FidelityModel::RectangleClosed { m: 4 };
        for i in 0..=200 {
            let tau = 2.0 * PI * f64::from(i) / 200.0;
            let env = linear_envelope(2.0, tau);
            assert!(exact.eval(tau) >= env - 1e-12, "tau = {tau}");
        }
    }

    #[test]
    fn cosine_envelope_dominated_by_coherent() {
        // Coherent n_mean = 1 has number variance 1.
        let exact = FidelityModel::CoherentClosed { n_mean: 1.0 };
        for i in 0..=200 {
            let tau = 0.5 * PI * f64::from(i) / 200.0;
            let env = cosine_envelope(1.0, tau).unwrap();
            assert!(exact.eval(tau) >= env - 1e-12, "tau = {tau}");
        }
    }

    #[test]
    fn cosine_envelope_domain_is_enforced() {
        assert!(matches!(
            cosine_envelope(2.0, 0.26 * PI),
            Err(FidelityError::DomainExceeded { .. })
        ));
        // The model variant clips instead, so integrands stay total.
        let m = FidelityModel::CosineEnvelope { delta_h: 2.0 };
        assert_eq!(m.eval(0.26 * PI), 0.0);
        assert_eq!(m.eval(10.0), 0.0);
    }

    #[test]
    fn floor_value_and_domination() {
        assert!((rivas_luis_fidelity_floor(0.1) - 0.63).abs() < 1e-15);
        assert_eq!(rivas_luis_fidelity_floor(0.0), 1.0);
        for &m in &[1_u32, 2, 5, 19, 40] {
            let model = FidelityModel::RivasLuisClosed { epsilon: 0.1, m };
            for i in 0..=400 {
                let tau = 2.0 * PI * f64::from(i) / 400.0;
                assert!(
                    model.eval(tau) >= 0.63 - 1e-12,
                    "m = {m}, tau = {tau}: {}",
                    model.eval(tau)
                );
            }
        }
    }

    #[test]
    fn validate_rejects_bad_models() {
        assert!(FidelityModel::Product(vec![]).validate().is_err());
        assert!(FidelityModel::CoherentClosed { n_mean: -1.0 }.validate().is_err());
        assert!(FidelityModel::RivasLuisClosed { epsilon: 1.5, m: 3 }.validate().is_err());
        assert!(FidelityModel::RivasLuisClosed { epsilon: 0.5, m: 0 }.validate().is_err());
        assert!(FidelityModel::Product(vec![FidelityModel::CoherentClosed { n_mean: f64::NAN }])
            .validate()
            .is_err());
        assert!(FidelityModel::RectangleClosed { m: 0 }.validate().is_ok());
    }

    #[test]
    fn evenness_in_tau() {
        let m = spectrum(StateFamilySpec::RivasLuis { epsilon: 0.2, m: 5 });
        assert_eq!(m.eval(-1.3), m.eval(1.3));
    }
}
