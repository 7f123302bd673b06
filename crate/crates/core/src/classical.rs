//! Classical estimation side: binary-hypothesis error probabilities, the
//! classical Ziv-Zakai bound in its prior-weighted and equal-prior variants,
//! and a seeded Monte Carlo estimate of the exact minimum mean-square error
//! for the Gaussian-shift measurement model.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bounds::{BoundMethod, BoundResult, BoundsError, PriorSpec};
use crate::fidelity::FidelityModel;
use crate::numerics::{
    gaussian_tail, integrate, integrate_segmented, pairwise_sum, valley_fill, NumericsError,
    QuadratureConfig,
};

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: &'static str },
    #[error("error-probability function is for the {found} variant, not {requested}")]
    VariantMismatch { found: &'static str, requested: &'static str },
    #[error("{got} trials requested; the harness needs at least {min}")]
    TooFewTrials { got: u64, min: u64 },
    #[error("{degenerate} of {trials} trials produced a non-finite estimate")]
    DegenerateTrials { degenerate: u64, trials: u64 },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Measurement model of the classical comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LikelihoodSpec {
    /// Observation Y = X + sigma Z with standard normal Z.
    GaussianShift { sigma: f64 },
}

impl LikelihoodSpec {
    pub fn validate(&self) -> Result<(), ClassicalError> {
        match *self {
            LikelihoodSpec::GaussianShift { sigma } => {
                if sigma.is_finite() && sigma > 0.0 {
                    Ok(())
                } else {
                    Err(ClassicalError::InvalidParameter { reason: "sigma must be > 0" })
                }
            }
        }
    }
}

/// Which binary detection problem the Ziv-Zakai reduction poses at offset
/// tau: hypotheses weighted by the actual prior ratio, or forced to equal
/// weights (the commoner textbook form).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZzbVariant {
    Weighted,
    EqualPrior,
}

impl ZzbVariant {
    fn name(&self) -> &'static str {
        match self {
            ZzbVariant::Weighted => "weighted",
            ZzbVariant::EqualPrior => "equal_prior",
        }
    }
}

/// Minimum error probability of deciding between parameter values x and
/// x + tau, as a function of (x, tau). Values are clamped to [0, 1/2].
pub struct ErrorProbFn {
    variant: ZzbVariant,
    label: String,
    f: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ErrorProbFn {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        out.debug_struct("ErrorProbFn")
            .field("variant", &self.variant)
            .field("label", &self.label)
            .finish()
    }
}

/// Optimal likelihood-ratio-test error probability for a Gaussian shift of
/// size tau with hypothesis weights (w0, w1).
fn gaussian_lrt_error(sigma: f64, tau: f64, w0: f64) -> f64 {
    let w1 = 1.0 - w0;
    if w0 <= 0.0 || w1 <= 0.0 {
        return 0.0;
    }
    if tau == 0.0 {
        return w0.min(w1);
    }
    let half_sep = 0.5 * tau / sigma;
    let shift = sigma / tau * (w0 / w1).ln();
    (w0 * gaussian_tail(half_sep + shift) + w1 * gaussian_tail(half_sep - shift)).clamp(0.0, 0.5)
}

fn prior_density(prior: &PriorSpec, x: f64) -> f64 {
    match *prior {
        PriorSpec::UniformWindow { mu, w } => {
            if (x - mu).abs() <= 0.5 * w {
                1.0 / w
            } else {
                0.0
            }
        }
        PriorSpec::GaussianPrior { mean, variance } => {
            let d = x - mean;
            (-d * d / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
        }
    }
}

impl ErrorProbFn {
    pub fn new(
        variant: ZzbVariant,
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { variant, label: label.into(), f: Box::new(f) }
    }

    /// Constant error probability; mostly useful for exercising the bound's
    /// geometry (1/2 recovers the prior variance term exactly).
    pub fn constant(variant: ZzbVariant, value: f64) -> Result<Self, ClassicalError> {
        if !(0.0..=0.5).contains(&value) {
            return Err(ClassicalError::InvalidParameter {
                reason: "a binary error probability lives in [0, 1/2]",
            });
        }
        Ok(Self::new(variant, format!("constant({value})"), move |_, _| value))
    }

    /// Equal-prior Gaussian-shift detector: Pe(tau) = Q(tau / (2 sigma)).
    pub fn gaussian_shift_equal_prior(sigma: f64) -> Result<Self, ClassicalError> {
        LikelihoodSpec::GaussianShift { sigma }.validate()?;
        Ok(Self::new(
            ZzbVariant::EqualPrior,
            format!("gaussian_shift_equal_prior(sigma={sigma})"),
            move |_, tau| gaussian_lrt_error(sigma, tau, 0.5),
        ))
    }

    /// Prior-weighted Gaussian-shift detector: the test between x and
    /// x + tau carries weights proportional to the prior density at the two
    /// points.
    pub fn gaussian_shift_weighted(sigma: f64, prior: PriorSpec) -> Result<Self, ClassicalError> {
        LikelihoodSpec::GaussianShift { sigma }.validate()?;
        prior.validate()?;
        Ok(Self::new(
            ZzbVariant::Weighted,
            format!("gaussian_shift_weighted(sigma={sigma})"),
            move |x, tau| {
                let p0 = prior_density(&prior, x);
                let p1 = prior_density(&prior, x + tau);
                let total = p0 + p1;
                if total <= 0.0 {
                    return 0.0;
                }
                gaussian_lrt_error(sigma, tau, p0 / total)
            },
        ))
    }

    /// Quantum detector plugged into the classical machinery: the Helstrom
    /// error probability of the model's fidelity at offset tau. With this
    /// error function the equal-prior classical bound reproduces the quantum
    /// Ziv-Zakai integral.
    pub fn from_fidelity_model(model: FidelityModel) -> Result<Self, ClassicalError> {
        model.validate().map_err(BoundsError::from)?;
        Ok(Self::new(ZzbVariant::EqualPrior, "helstrom(fidelity)", move |_, tau| {
            crate::bounds::helstrom_pure(model.eval(tau), 0.5)
                .expect("fidelity eval is already clamped to [0, 1]")
        }))
    }

    pub fn variant(&self) -> ZzbVariant {
        self.variant
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64, tau: f64) -> f64 {
        (self.f)(x, tau.abs()).clamp(0.0, 0.5)
    }
}

/// Panel seed for the outer tau integral: geometric refinement toward 0,
/// where tau * Pe(tau) turns over sharply when the detector is good.
fn offset_ladder(t_max: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(29);
    pts.push(0.0);
    for k in (1..=26).rev() {
        pts.push(t_max * 2.0_f64.powi(-k));
    }
    pts.push(t_max);
    let mut ladder = Vec::with_capacity(pts.len());
    for p in pts {
        if ladder.last().is_none_or(|&last| p > last) {
            ladder.push(p);
        }
    }
    ladder
}

const FILL_GRID: usize = 2048;

/// Classical Ziv-Zakai bound
/// (1/2) Int_0^tmax tau V{ A(tau) } dtau, where A is the prior-overlap
/// integral of the detection error at offset tau and V the optional valley
/// filling.
///
/// The equal-prior variant uses the closed overlap of the prior with its
/// shift; the weighted variant integrates density times pointwise error
/// numerically, so the two reach the same uniform-window value through
/// genuinely different routes.
pub fn classical_zzb(
    prior: &PriorSpec,
    pe: &ErrorProbFn,
    variant: ZzbVariant,
    use_valley_fill: bool,
    cfg: &QuadratureConfig,
) -> Result<BoundResult, ClassicalError> {
    prior.validate()?;
    if pe.variant() != variant {
        return Err(ClassicalError::VariantMismatch {
            found: pe.variant().name(),
            requested: variant.name(),
        });
    }

    let inner_cfg = QuadratureConfig { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 400 };
    let (t_max, inner): (f64, Box<dyn Fn(f64) -> f64 + '_>) = match (*prior, variant) {
        (PriorSpec::UniformWindow { w, .. }, ZzbVariant::EqualPrior) => (
            w,
            Box::new(move |tau: f64| {
                if tau >= w {
                    return 0.0;
                }
                2.0 * (1.0 - tau / w) * pe.eval(0.0, tau)
            }),
        ),
        (PriorSpec::UniformWindow { mu, w }, ZzbVariant::Weighted) => (
            w,
            Box::new(move |tau: f64| {
                if tau >= w {
                    return 0.0;
                }
                let lo = mu - 0.5 * w;
                let hi = mu + 0.5 * w;
                integrate(
                    |x| {
                        (prior_density(prior, x) + prior_density(prior, x + tau))
                            * pe.eval(x, tau)
                    },
                    lo,
                    hi - tau,
                    &inner_cfg,
                )
                .map(|q| q.value)
                .unwrap_or(f64::NAN)
            }),
        ),
        (PriorSpec::GaussianPrior { mean, variance }, ZzbVariant::EqualPrior) => {
            let sd = variance.sqrt();
            (
                16.0 * sd,
                Box::new(move |tau: f64| {
                    4.0 * gaussian_tail(0.5 * tau / sd) * pe.eval(mean, tau)
                }),
            )
        }
        (PriorSpec::GaussianPrior { mean, variance }, ZzbVariant::Weighted) => {
            let sd = variance.sqrt();
            (
                16.0 * sd,
                Box::new(move |tau: f64| {
                    integrate(
                        |x| {
                            (prior_density(prior, x) + prior_density(prior, x + tau))
                                * pe.eval(x, tau)
                        },
                        mean - 8.0 * sd - tau,
                        mean + 8.0 * sd,
                        &inner_cfg,
                    )
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
                }),
            )
        }
    };

    // Valley filling: take the running maximum of A over a fixed grid to the
    // right of tau. For the monotone detectors shipped here the fill changes
    // nothing bit for bit; for an oscillating A it lifts the valleys.
    let fill_envelope = if use_valley_fill {
        let samples: Vec<(f64, f64)> = (0..=FILL_GRID)
            .map(|j| {
                let tau = t_max * j as f64 / FILL_GRID as f64;
                (tau, inner(tau))
            })
            .collect();
        Some(valley_fill(&samples)?)
    } else {
        None
    };
    let filled = |tau: f64| -> f64 {
        let raw = inner(tau);
        match &fill_envelope {
            None => raw,
            Some(env) => {
                let pos = (tau / t_max * FILL_GRID as f64).ceil() as usize;
                if pos > FILL_GRID {
                    raw
                } else {
                    raw.max(env[pos].1)
                }
            }
        }
    };

    let q = integrate_segmented(
        |tau: f64| 0.5 * tau * filled(tau),
        &offset_ladder(t_max),
        cfg,
    )?;
    Ok(BoundResult {
        value: q.value.max(0.0),
        method: BoundMethod::ClassicalZzb,
        err_estimate: q.err_estimate,
        converged: q.converged,
        window_ok: true,
    })
}

/// Both classical variants on the same prior and detector family, for the
/// uniform-window case where they must coincide.
#[derive(Debug, Clone, Copy)]
pub struct VariantEquivalence {
    pub weighted: f64,
    pub equal_prior: f64,
    pub diff: f64,
    pub agree: bool,
}

/// Run the weighted route (numeric density integral) and the equal-prior
/// route (closed window overlap) for a Gaussian-shift detector on a uniform
/// window and report whether they agree to 1e-9.
pub fn equal_prior_variant_equivalence(
    prior: &PriorSpec,
    sigma: f64,
    cfg: &QuadratureConfig,
) -> Result<VariantEquivalence, ClassicalError> {
    if !matches!(prior, PriorSpec::UniformWindow { .. }) {
        return Err(ClassicalError::InvalidParameter {
            reason: "the equivalence holds for the uniform-window prior",
        });
    }
    let weighted_pe = ErrorProbFn::gaussian_shift_weighted(sigma, *prior)?;
    let equal_pe = ErrorProbFn::gaussian_shift_equal_prior(sigma)?;
    let weighted = classical_zzb(prior, &weighted_pe, ZzbVariant::Weighted, false, cfg)?.value;
    let equal_prior = classical_zzb(prior, &equal_pe, ZzbVariant::EqualPrior, false, cfg)?.value;
    let diff = (weighted - equal_prior).abs();
    Ok(VariantEquivalence { weighted, equal_prior, diff, agree: diff <= 1e-9 })
}

/// Monte Carlo estimate of the Bayesian minimum mean-square error.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloResult {
    pub mse: f64,
    pub stderr: f64,
    pub trials: u64,
    pub degenerate: u64,
}

const MIN_TRIALS: u64 = 10_000;

/// Simulate `trials` draws of (X, Y), apply the exact conditional-mean
/// estimator, and return the average squared error with its standard error.
/// Same seed, same result, bit for bit, regardless of thread count.
pub fn monte_carlo_mmse(
    prior: &PriorSpec,
    likelihood: &LikelihoodSpec,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloResult, ClassicalError> {
    prior.validate()?;
    likelihood.validate()?;
    if trials < MIN_TRIALS {
        return Err(ClassicalError::TooFewTrials { got: trials, min: MIN_TRIALS });
    }
    let LikelihoodSpec::GaussianShift { sigma } = *likelihood;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sq_errors = Vec::with_capacity(trials as usize);
    let mut degenerate = 0_u64;

    match *prior {
        PriorSpec::UniformWindow { mu, w } => {
            let estimator = WindowPosteriorMean::new(mu, w, sigma);
            for _ in 0..trials {
                let x = mu - 0.5 * w + w * rng.gen::<f64>();
                let noise: f64 = rng.sample(StandardNormal);
                let y = x + sigma * noise;
                let est = estimator.eval(y);
                if est.is_finite() {
                    let d = est - x;
                    sq_errors.push(d * d);
                } else {
                    degenerate += 1;
                }
            }
        }
        PriorSpec::GaussianPrior { mean, variance } => {
            // Conjugate pair: the posterior mean is available in closed form.
            let precision = 1.0 / (sigma * sigma) + 1.0 / variance;
            for _ in 0..trials {
                let noise_x: f64 = rng.sample(StandardNormal);
                let x = mean + variance.sqrt() * noise_x;
                let noise: f64 = rng.sample(StandardNormal);
                let y = x + sigma * noise;
                let est = (y / (sigma * sigma) + mean / variance) / precision;
                if est.is_finite() {
                    let d = est - x;
                    sq_errors.push(d * d);
                } else {
                    degenerate += 1;
                }
            }
        }
    }

    if degenerate * 1000 > trials {
        return Err(ClassicalError::DegenerateTrials { degenerate, trials });
    }
    let used = sq_errors.len() as f64;
    let mse = pairwise_sum(&sq_errors) / used;
    let centered: Vec<f64> = sq_errors
        .iter()
        .map(|&s| {
            let d = s - mse;
            d * d
        })
        .collect();
    let sample_var = pairwise_sum(&centered) / (used - 1.0);
    let stderr = (sample_var / used).sqrt();
    Ok(MonteCarloResult { mse, stderr, trials, degenerate })
}

/// Posterior-mean estimator for a uniform window observed through Gaussian
/// noise, evaluated on a fixed midpoint grid.
///
/// Weights w_i = exp(-(x_i - y)^2 / (2 sigma^2)) are generated outward from
/// the grid point nearest y with the two-multiply recurrence
/// w_{i+1} = w_i u_i, u_{i+1} = u_i D (D = exp(-h^2/sigma^2 ... per-step
/// decay), anchored at weight 1, so no trial can underflow to an empty
/// posterior and each step costs two multiplications instead of an exp.
struct WindowPosteriorMean {
    lo: f64,
    h: f64,
    n: usize,
    precision: f64,
    step_decay: f64,
}

impl WindowPosteriorMean {
    fn new(mu: f64, w: f64, sigma: f64) -> Self {
        // Resolve the noise scale but keep the grid bounded.
        let wanted = (4.0 * w / sigma).clamp(2048.0, 131_072.0);
        let n = (wanted as usize).next_power_of_two().min(131_072);
        let h = w / n as f64;
        let precision = 1.0 / (sigma * sigma);
        Self { lo: mu - 0.5 * w, h, n, precision, step_decay: (-precision * h * h).exp() }
    }

    fn grid_x(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h
    }

    fn eval(&self, y: f64) -> f64 {
        const NEGLIGIBLE: f64 = 1e-20;
        let anchor = (((y - self.lo) / self.h - 0.5).round().max(0.0) as usize).min(self.n - 1);
        let x0 = self.grid_x(anchor);

        let mut sum_w = 1.0;
        let mut sum_wx = x0;

        // Upward sweep: ratio starts at w(x0 + h)/w(x0).
        let mut up = (-self.precision * self.h * ((x0 - y) + 0.5 * self.h)).exp();
        let mut w = 1.0;
        for i in anchor + 1..self.n {
            w *= up;
            up *= self.step_decay;
            if w < NEGLIGIBLE {
                break;
            }
            sum_w += w;
            sum_wx += w * self.grid_x(i);
        }

        // Downward sweep: ratio starts at w(x0 - h)/w(x0).
        let mut down = (self.precision * self.h * ((x0 - y) - 0.5 * self.h)).exp();
        w = 1.0;
        for i in (0..anchor).rev() {
            w *= down;
            down *= self.step_decay;
            if w < NEGLIGIBLE {
                break;
            }
            sum_w += w;
            sum_wx += w * self.grid_x(i);
        }

        sum_wx / sum_w
    }
}
