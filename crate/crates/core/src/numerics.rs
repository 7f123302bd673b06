//! Shared numerical kernel: adaptive Gauss-Kronrod quadrature, the imaginary
//! and complementary error functions, a bracketed root finder, valley
//! filling, and deterministic pairwise summation.
//!
//! Everything here is a pure function of its inputs. Reductions use a fixed
//! pairwise order so results do not depend on how callers parallelize.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_2_SQRT_PI, PI};
use std::sync::OnceLock;

use thiserror::Error;

/// sqrt(pi)
pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;
/// Largest x with exp(x) finite in f64.
const MAX_EXP_ARG: f64 = 709.782_712_893_384;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteEvaluation { x: f64 },
    #[error("invalid quadrature config: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("erfi({z}) overflows f64 (exp(z^2) saturates near z = 26.64); use erfi_scaled")]
    Overflow { z: f64 },
    #[error("argument {z} is negative; only z >= 0 is supported")]
    NegativeArgument { z: f64 },
    #[error("no sign change on bracket [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("non-finite value at sample index {index}")]
    NonFiniteSample { index: usize },
    #[error("abscissae must be strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },
}

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-9, max_subdivisions: 2000 }
    }
}

impl QuadratureConfig {
    /// Check the tolerances and budget without running anything.
    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.abs_tol <= 0.0 || !self.abs_tol.is_finite() {
            return Err(NumericsError::InvalidConfig { reason: "abs_tol must be positive and finite" });
        }
        if self.rel_tol <= 0.0 || !self.rel_tol.is_finite() {
            return Err(NumericsError::InvalidConfig { reason: "rel_tol must be positive and finite" });
        }
        if self.max_subdivisions == 0 {
            return Err(NumericsError::InvalidConfig { reason: "max_subdivisions must be at least 1" });
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of an adaptive integration.
///
/// A subdivision budget that runs out is not an error: the best value and an
/// honest error estimate are still returned, with `converged` cleared.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
    pub converged: bool,
    pub subdivisions: usize,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
// Even indices are Kronrod-only nodes, odd indices the embedded Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// QUADPACK's error rescaling: sharpen the raw |Kronrod - Gauss| difference
/// using the integral of |f - mean| and floor it at round-off level.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point panel: returns (integral, error estimate).
fn kronrod15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64), NumericsError>
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<f64, NumericsError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(NumericsError::NonFiniteEvaluation { x })
        }
    };

    let fc = eval(center)?;
    let mut flo = [0.0_f64; 7];
    let mut fhi = [0.0_f64; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        flo[j] = eval(center - dx)?;
        fhi[j] = eval(center + dx)?;
    }

    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut res_abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let pair = flo[j] + fhi[j];
        kronrod += WGK[j] * pair;
        res_abs += WGK[j] * (flo[j].abs() + fhi[j].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((flo[j] - mean).abs() + (fhi[j] - mean).abs());
    }

    let err = rescale_error((kronrod - gauss) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok((kronrod * half, err))
}

#[derive(Debug)]
struct Segment {
    err: f64,
    seq: u64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal && self.seq == other.seq
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; sequence number breaks ties deterministically.
        self.err.total_cmp(&other.err).then(self.seq.cmp(&other.seq))
    }
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// Globally refines the worst panel (by error estimate) with bisection until
/// the summed estimate meets `max(abs_tol, rel_tol * |value|)` or the
/// subdivision budget is spent.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Quadrature, NumericsError>
where
    F: Fn(f64) -> f64,
{
    integrate_segmented(f, &[a, b], cfg)
}

/// Like [`integrate`], but seeds the adaptive refinement with the given panel
/// breakpoints. Sharp features much narrower than the whole interval (e.g.
/// fidelity peaks of many-copy products) should get a breakpoint ladder so
/// the first 15-point pass cannot step over them.
pub fn integrate_segmented<F>(
    f: F,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Quadrature, NumericsError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if breakpoints.len() < 2 {
        return Err(NumericsError::InvalidInterval { a: f64::NAN, b: f64::NAN });
    }
    for (i, w) in breakpoints.windows(2).enumerate() {
        if !w[0].is_finite() || !w[1].is_finite() || w[0] > w[1] {
            return Err(NumericsError::InvalidInterval { a: w[0], b: w[1] });
        }
        let _ = i;
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0_u64;
    let mut sum_value = 0.0;
    let mut sum_err = 0.0;
    for w in breakpoints.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (value, err) = kronrod15(&f, w[0], w[1])?;
        sum_value += value;
        sum_err += err;
        heap.push(Segment { err, seq, a: w[0], b: w[1], value });
        seq += 1;
    }
    if heap.is_empty() {
        // Zero-width interval.
        return Ok(Quadrature { value: 0.0, err_estimate: 0.0, converged: true, subdivisions: 0 });
    }

    let mut subdivisions = 0_usize;
    while sum_err > cfg.target(sum_value) && subdivisions < cfg.max_subdivisions {
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel already at f64 resolution; nothing more to split.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid)?;
        let (v2, e2) = kronrod15(&f, mid, worst.b)?;
        sum_value += v1 + v2 - worst.value;
        sum_err += e1 + e2 - worst.err;
        heap.push(Segment { err: e1, seq, a: worst.a, b: mid, value: v1 });
        heap.push(Segment { err: e2, seq: seq + 1, a: mid, b: worst.b, value: v2 });
        seq += 2;
        subdivisions += 1;
    }

    // Recompute the totals with a fixed-order pairwise reduction over the
    // position-sorted panels; the incremental sums above only steer refinement.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.sort_by(|s, t| s.a.total_cmp(&t.a));
    let values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    let errs: Vec<f64> = segments.iter().map(|s| s.err).collect();
    let value = pairwise_sum(&values);
    let err_estimate = pairwise_sum(&errs);
    let converged = err_estimate <= cfg.target(value);
    Ok(Quadrature { value, err_estimate, converged, subdivisions })
}

/// Fixed-order pairwise (tree) sum. Deterministic for a given slice order and
/// accurate to O(log n) rounding, independent of caller parallelism.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Maclaurin series of erfi without the 2/sqrt(pi) prefactor:
/// sum_k z^(2k+1) / (k! (2k+1)). All terms are positive, so there is no
/// cancellation; usable well past z = 1 (we switch to the asymptotic form
/// only at z = 6).
fn erfi_series_sum(z: f64) -> f64 {
    let z2 = z * z;
    let mut power = z; // z^(2k+1) / k!
    let mut sum = z;
    let mut k = 0_u32;
    loop {
        k += 1;
        power *= z2 / f64::from(k);
        let term = power / f64::from(2 * k + 1);
        sum += term;
        if term < sum * 1e-17 || k > 400 {
            break;
        }
    }
    sum
}

/// Asymptotic factor A(z) with erfi(z) ~ e^(z^2) A(z) / (z sqrt(pi)),
/// A(z) = sum_k (2k-1)!! / (2 z^2)^k. The series diverges; summation stops at
/// the smallest term, which bounds the remainder (< 1e-16 for z >= 6).
fn erfi_asymptotic_factor(z: f64) -> f64 {
    let inv = 1.0 / (2.0 * z * z);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = 0_u32;
    loop {
        let next = term * f64::from(2 * k + 1) * inv;
        if next >= term {
            break; // divergence point reached
        }
        sum += next;
        term = next;
        k += 1;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

const ERFI_BRANCH_SWITCH: f64 = 6.0;

/// Imaginary error function erfi(z) = (2/sqrt(pi)) Int_0^z e^(u^2) du, z >= 0.
///
/// Power series below z = 6, asymptotic expansion above; both branches agree
/// with the defining integral to better than 1e-12 relative. For z beyond
/// ~26.6 the value exceeds f64 range and an [`NumericsError::Overflow`] is
/// returned; [`erfi_scaled`] covers that regime.
pub fn erfi(z: f64) -> Result<f64, NumericsError> {
    if z.is_nan() || z < 0.0 {
        return Err(NumericsError::NegativeArgument { z });
    }
    if z <= ERFI_BRANCH_SWITCH {
        return Ok(FRAC_2_SQRT_PI * erfi_series_sum(z));
    }
    let exponent = z * z;
    if exponent > MAX_EXP_ARG {
        return Err(NumericsError::Overflow { z });
    }
    Ok(exponent.exp() * erfi_asymptotic_factor(z) / (z * SQRT_PI))
}

/// exp(-z^2) * erfi(z), finite for every z >= 0.
pub fn erfi_scaled(z: f64) -> Result<f64, NumericsError> {
    if z.is_nan() || z < 0.0 {
        return Err(NumericsError::NegativeArgument { z });
    }
    if z <= ERFI_BRANCH_SWITCH {
        return Ok((-z * z).exp() * FRAC_2_SQRT_PI * erfi_series_sum(z));
    }
    Ok(erfi_asymptotic_factor(z) / (z * SQRT_PI))
}

/// erf via its alternating Maclaurin series; adequate for |x| < 2 where the
/// largest term is only ~10x the result.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x; // (-1)^k x^(2k+1) / k!
    let mut sum = x;
    let mut k = 0_u32;
    loop {
        k += 1;
        power *= -x2 / f64::from(k);
        let term = power / f64::from(2 * k + 1);
        sum += term;
        if term.abs() < sum.abs() * 1e-17 || k > 200 {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// Continued fraction for sqrt(pi) e^(x^2) erfc(x), x >= 2:
/// 1 / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), coefficients a_n = n/2,
/// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..=300 {
        let a = 0.5 * f64::from(n);
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (SQRT_PI * f)
}

/// Complementary error function, |erfc(x) - exact| / exact below 1e-13 over
/// the real line (series for |x| < 2, Lentz continued fraction beyond).
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Upper tail of the standard normal distribution, Q(u) = P(Z > u).
pub fn gaussian_tail(u: f64) -> f64 {
    0.5 * erfc(u / std::f64::consts::SQRT_2)
}

/// The phase-dispersion constant: `phi` solves sin(phi) = (1 - cos(phi))/phi
/// on (0, pi) and `lambda` is the common value (~0.7246) of both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaConstant {
    pub lambda: f64,
    pub phi: f64,
    pub residual: f64,
}

/// Solve for [`LambdaConstant`]. Cached after the first call, so repeated
/// calls are bit-identical and effectively free.
pub fn solve_lambda() -> LambdaConstant {
    static CACHE: OnceLock<LambdaConstant> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let g = |phi: f64| phi * phi.sin() - (1.0 - phi.cos());
        let phi = find_root(g, 0.1, PI - 0.1, 1e-14)
            .expect("g(0.1) > 0 > g(pi - 0.1); the bracket always straddles the root");
        let lambda = phi.sin();
        let residual = (phi.sin() - (1.0 - phi.cos()) / phi).abs();
        LambdaConstant { lambda, phi, residual }
    })
}

/// Bracketed root of `f` on `[a, b]` to relative width `tol`.
///
/// Alternates secant steps with bisection, so the bracket at least halves
/// every other iteration while simple roots still converge superlinearly.
pub fn find_root<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if !flo.is_finite() {
        return Err(NumericsError::NonFiniteEvaluation { x: lo });
    }
    if !fhi.is_finite() {
        return Err(NumericsError::NonFiniteEvaluation { x: hi });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericsError::NoSignChange { a, b });
    }

    for iteration in 0..200 {
        let secant = (lo * fhi - hi * flo) / (fhi - flo);
        let x = if iteration % 2 == 0 && secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(NumericsError::NonFiniteEvaluation { x });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Valley filling: replace each value with the maximum over itself and all
/// later samples (suffix maximum), yielding a non-increasing sequence.
///
/// Input abscissae must be strictly increasing and values finite. An empty
/// input yields an empty output.
pub fn valley_fill(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, NumericsError> {
    for (i, &(t, v)) in samples.iter().enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(NumericsError::NonFiniteSample { index: i });
        }
        if i > 0 && t <= samples[i - 1].0 {
            return Err(NumericsError::NotIncreasing { index: i });
        }
    }
    let mut filled = samples.to_vec();
    let mut running = f64::NEG_INFINITY;
    for sample in filled.iter_mut().rev() {
        running = running.max(sample.1);
        sample.1 = running;
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: QuadratureConfig =
        QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-12, max_subdivisions: 2000 };

    #[test]
    fn integrate_zero_integrand() {
        let q = integrate(|_| 0.0, 0.0, 2.0 * PI, &QuadratureConfig::default()).unwrap();
        assert_eq!(q.value, 0.0);
        assert!(q.converged);
    }

    #[test]
    fn integrate_linear_is_exact() {
        let q = integrate(|t| t, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((q.value - 0.5).abs() < 1e-15, "got {}", q.value);
    }

    #[test]
    fn integrate_matches_change_of_variable_oracle() {
        // Int_0^{2pi} sin(t/2) e^{2 cos t} dt = 2 e^{-2} Int_{-1}^{1} e^{4u^2} du
        // (substitute u = cos(t/2)); both sides evaluated independently.
        let lhs = integrate(|t| (0.5 * t).sin() * (2.0 * t.cos()).exp(), 0.0, 2.0 * PI, &TIGHT)
            .unwrap()
            .value;
        let rhs = 2.0 * (-2.0_f64).exp()
            * integrate(|u| (4.0 * u * u).exp(), -1.0, 1.0, &TIGHT).unwrap().value;
        assert!((lhs - rhs).abs() <= 1e-10, "lhs {lhs} rhs {rhs}");
        assert!((lhs - 4.453_242_077_262_958).abs() <= 1e-10);
    }

    #[test]
    fn integrate_rejects_bad_interval() {
        assert!(matches!(
            integrate(|t| t, 1.0, 0.0, &QuadratureConfig::default()),
            Err(NumericsError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate(|t| t, f64::NAN, 1.0, &QuadratureConfig::default()),
            Err(NumericsError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn integrate_zero_width_interval() {
        let q = integrate(|t| t.exp(), 3.0, 3.0, &QuadratureConfig::default()).unwrap();
        assert_eq!(q.value, 0.0);
        assert!(q.converged);
    }

    #[test]
    fn integrate_reports_non_finite_integrand() {
        let r = integrate(|t| 1.0 / t, -1.0, 1.0, &QuadratureConfig::default());
        // 1/t is evaluated arbitrarily close to 0 only after refinement; the
        // center of the first panel is exactly 0.
        assert!(matches!(r, Err(NumericsError::NonFiniteEvaluation { .. })));
    }

    #[test]
    fn integrate_flags_exhausted_budget() {
        let cfg = QuadratureConfig { abs_tol: 1e-16, rel_tol: 1e-16, max_subdivisions: 3 };
        let q = integrate(|t| t.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!(!q.converged);
        assert!(q.subdivisions == 3);
        assert!((q.value - 2.0 / 3.0).abs() < 1e-3, "best value still returned: {}", q.value);
    }

    #[test]
    fn integrate_segmented_matches_single_interval() {
        let f = |t: f64| t * (1.0 - t / 7.0) * (t.cos().powi(2));
        let whole = integrate(f, 0.0, 7.0, &TIGHT).unwrap().value;
        let pts = [0.0, 1e-4, 0.1, 3.5, 6.9, 7.0];
        let split = integrate_segmented(f, &pts, &TIGHT).unwrap().value;
        assert!((whole - split).abs() < 1e-12, "whole {whole} split {split}");
    }

    #[test]
    fn integrate_segmented_rejects_unordered_breakpoints() {
        assert!(matches!(
            integrate_segmented(|t| t, &[0.0, 2.0, 1.0], &QuadratureConfig::default()),
            Err(NumericsError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn pairwise_sum_basics() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.5]), 1.5);
        let xs = vec![0.1; 1000];
        assert!((pairwise_sum(&xs) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn erfi_at_zero_and_frozen_point() {
        assert_eq!(erfi(0.0).unwrap(), 0.0);
        // mpmath, 40 digits: erfi(2) = 18.56480241457555259870429191324101719415
        let e2 = erfi(2.0).unwrap();
        assert!((e2 - 18.564_802_414_575_553).abs() / 18.56 < 1e-14, "erfi(2) = {e2}");
    }

    #[test]
    fn erfi_matches_defining_integral() {
        for &z in &[0.3, 1.0, 2.0, 3.0, 4.5, 6.5, 8.0] {
            let byint =
                FRAC_2_SQRT_PI * integrate(|u| (u * u).exp(), 0.0, z, &TIGHT).unwrap().value;
            let direct = erfi(z).unwrap();
            assert!(
                ((direct - byint) / byint).abs() <= 1e-10,
                "z = {z}: series/asymptotic {direct} vs quadrature {byint}"
            );
        }
    }

    #[test]
    fn erfi_branches_agree_at_the_switch() {
        // Both branches evaluated at the same point, the switchover itself.
        let z = ERFI_BRANCH_SWITCH;
        let series = FRAC_2_SQRT_PI * erfi_series_sum(z);
        let asymptotic = (z * z).exp() * erfi_asymptotic_factor(z) / (z * SQRT_PI);
        assert!(((series - asymptotic) / series).abs() < 1e-13, "seam: {series} vs {asymptotic}");
    }

    #[test]
    fn erfi_asymptote_at_ten() {
        // erfi(z) sqrt(pi) z e^{-z^2} -> 1; at z = 10 the exact product is
        // 1.00507694375197056 (within the 1% the asymptote promises).
        let product = erfi_scaled(10.0).unwrap() * SQRT_PI * 10.0;
        assert!((product - 1.0).abs() < 0.01, "product {product}");
        assert!((product - 1.005_076_943_751_970_6).abs() < 1e-12);
    }

    #[test]
    fn erfi_strictly_increasing_on_grid() {
        let mut prev = -1.0;
        for i in 0..=50 {
            let z = 0.1 * f64::from(i);
            let v = erfi(z).unwrap();
            assert!(v > prev || (i == 0 && v == 0.0), "not increasing at z = {z}");
            prev = v;
        }
    }

    #[test]
    fn erfi_overflow_and_domain_errors() {
        assert!(matches!(erfi(27.0), Err(NumericsError::Overflow { .. })));
        assert!(matches!(erfi(-0.5), Err(NumericsError::NegativeArgument { .. })));
        // The scaled variant stays finite where plain erfi saturates.
        let s = erfi_scaled(27.0).unwrap();
        assert!(s.is_finite() && s > 0.0);
    }

    #[test]
    fn erfi_scaled_consistent_with_erfi() {
        for &z in &[0.5, 2.0, 5.0, 10.0, 20.0] {
            if let Ok(plain) = erfi(z) {
                let scaled = erfi_scaled(z).unwrap();
                let recon = plain * (-z * z).exp();
                assert!(((scaled - recon) / scaled).abs() < 1e-12, "z = {z}");
            }
        }
    }

    #[test]
    fn erfc_frozen_values() {
        // mpmath, 40 digits.
        assert!((erfc(0.5) - 0.479_500_122_186_953_5).abs() < 1e-15);
        assert!((erfc(2.0) - 4.677_734_981_047_266e-3).abs() < 1e-16);
        assert!(((erfc(5.0) - 1.537_459_794_428_035e-12) / 1.54e-12).abs() < 1e-13);
        assert!(((erfc(8.0) - 1.122_429_717_298_292_7e-29) / 1.12e-29).abs() < 1e-13);
        assert!((erfc(-0.5) - (2.0 - 0.479_500_122_186_953_5)).abs() < 1e-15);
        assert_eq!(erfc(0.0), 1.0);
    }

    #[test]
    fn erfc_branches_agree_at_the_switch() {
        let below = erfc(2.0 - 1e-12);
        let above = erfc(2.0);
        assert!(((below - above) / above).abs() < 1e-11, "seam: {below} vs {above}");
    }

    #[test]
    fn gaussian_tail_frozen_values() {
        assert!((gaussian_tail(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((gaussian_tail(3.0) - 1.349_898_031_630_094_5e-3).abs() < 1e-16);
        assert!((gaussian_tail(0.0) - 0.5).abs() < 1e-15);
        assert!((gaussian_tail(-1.0) - (1.0 - 0.158_655_253_931_457_05)).abs() < 1e-15);
    }

    #[test]
    fn lambda_constant_solves_the_implicit_equation() {
        let c = solve_lambda();
        assert!((c.lambda - 0.7246).abs() <= 5e-5);
        assert!(c.residual <= 1e-12);
        assert!(c.phi > 0.0 && c.phi < PI);
        assert!(c.lambda > 0.0 && c.lambda < 1.0);
        assert!((c.phi.sin() - c.lambda).abs() <= 1e-12);
        assert!(((1.0 - c.phi.cos()) / c.phi - c.lambda).abs() <= 1e-12);
        // mpmath: phi = 2.331122370414423, lambda = 0.7246113537767085
        assert!((c.phi - 2.331_122_370_414_422_6).abs() < 1e-12);
        assert!((c.lambda - 0.724_611_353_776_708_5).abs() < 1e-13);
    }

    #[test]
    fn lambda_constant_is_deterministic() {
        let a = solve_lambda();
        let b = solve_lambda();
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        assert_eq!(a.phi.to_bits(), b.phi.to_bits());
    }

    #[test]
    fn find_root_dottie_constant() {
        let x = find_root(|x| x - x.cos(), 0.0, 1.5, 1e-14).unwrap();
        assert!((x - 0.739_085_133_215_160_7).abs() < 1e-13);
    }

    #[test]
    fn find_root_requires_sign_change() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-14),
            Err(NumericsError::NoSignChange { .. })
        ));
    }

    #[test]
    fn valley_fill_examples() {
        let filled = valley_fill(&[(0.0, 1.0), (1.0, 0.2), (2.0, 0.5), (3.0, 0.1)]).unwrap();
        let values: Vec<f64> = filled.iter().map(|s| s.1).collect();
        assert_eq!(values, vec![1.0, 0.5, 0.5, 0.1]);

        let monotone = [(0.0, 3.0), (1.0, 2.0), (2.0, 1.0)];
        assert_eq!(valley_fill(&monotone).unwrap(), monotone.to_vec());

        let constant = [(0.0, 0.7), (0.5, 0.7), (1.0, 0.7)];
        assert_eq!(valley_fill(&constant).unwrap(), constant.to_vec());

        assert!(valley_fill(&[]).unwrap().is_empty());
    }

    #[test]
    fn valley_fill_is_idempotent() {
        let input = [(0.0, 0.3), (0.1, 0.9), (0.2, 0.1), (0.3, 0.4), (0.4, 0.2)];
        let once = valley_fill(&input).unwrap();
        let twice = valley_fill(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn valley_fill_rejects_bad_input() {
        assert!(matches!(
            valley_fill(&[(0.0, 1.0), (0.0, 2.0)]),
            Err(NumericsError::NotIncreasing { index: 1 })
        ));
        assert!(matches!(
            valley_fill(&[(0.0, f64::NAN)]),
            Err(NumericsError::NonFiniteSample { index: 0 })
        ));
    }
}
