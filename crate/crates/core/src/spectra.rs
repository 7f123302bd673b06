//! Photon-number spectra: the three state families, dense number
//! distributions, their moments, and convolution (multi-copy composition).

use thiserror::Error;

use crate::numerics::pairwise_sum;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: &'static str },
    #[error("weight at index {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("weight at index {index} is negative")]
    NegativeWeight { index: usize },
    #[error("weights sum to zero; a distribution needs positive total mass")]
    ZeroMass,
}

/// Parametric family of single-mode states, identified by its photon-number
/// spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamilySpec {
    /// Coherent state with mean photon number `n_mean` (Poisson spectrum).
    Coherent { n_mean: f64 },
    /// Flat spectrum on number states 0..=m ("rectangle" state).
    Rectangle { m: u32 },
    /// Vacuum with probability 1 - epsilon, plus a flat sliver epsilon/m on
    /// each of the number states 1..=m.
    RivasLuis { epsilon: f64, m: u32 },
}

/// First two moments of a number distribution, plus the mean measured from
/// the lowest occupied level (the quantity the Heisenberg-style limit needs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub ground_offset_mean: f64,
}

/// Dense probability vector over photon numbers 0..=cutoff, normalized so
/// the probabilities sum to 1 (within accumulated rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    probs: Vec<f64>,
}

impl NumberDistribution {
    /// Normalize non-negative weights into a distribution. Trailing zero
    /// weights are dropped so `cutoff` always points at occupied mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, SpectraError> {
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(SpectraError::NonFiniteWeight { index });
            }
            if w < 0.0 {
                return Err(SpectraError::NegativeWeight { index });
            }
        }
        let last_occupied = match weights.iter().rposition(|&w| w > 0.0) {
            Some(i) => i,
            None => return Err(SpectraError::ZeroMass),
        };
        let mut probs = weights;
        probs.truncate(last_occupied + 1);
        let total = pairwise_sum(&probs);
        if total <= 0.0 || !total.is_finite() {
            return Err(SpectraError::ZeroMass);
        }
        for p in &mut probs {
            *p /= total;
        }
        Ok(Self { probs })
    }

    /// The vacuum-only distribution; convolution identity.
    pub fn delta_zero() -> Self {
        Self { probs: vec![1.0] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest occupied photon number.
    pub fn cutoff(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of photon number `n` (zero beyond the cutoff).
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Mean, central variance (two-pass), and mean above the lowest occupied
    /// level.
    pub fn moments(&self) -> Moments {
        let weighted: Vec<f64> =
            self.probs.iter().enumerate().map(|(n, &p)| p * n as f64).collect();
        let mean = pairwise_sum(&weighted);
        let centered: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(n, &p)| {
                let d = n as f64 - mean;
                p * d * d
            })
            .collect();
        let variance = pairwise_sum(&centered);
        let n_min = self.probs.iter().position(|&p| p > 0.0).unwrap_or(0);
        Moments { mean, variance, ground_offset_mean: mean - n_min as f64 }
    }

    /// Distribution of the total photon number across two independent modes.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = vec![0.0_f64; self.probs.len() + other.probs.len() - 1];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &q) in other.probs.iter().enumerate() {
                out[i + j] += p * q;
            }
        }
        Self::from_weights(out).expect("convolution of distributions keeps positive mass")
    }

    /// `copies`-fold convolution with itself (total photon number of
    /// `copies` independent identical modes).
    pub fn self_convolve(&self, copies: u32) -> Result<Self, SpectraError> {
        if copies == 0 {
            return Err(SpectraError::InvalidParameter { reason: "copies must be at least 1" });
        }
        let mut acc = self.clone();
        for _ in 1..copies {
            acc = acc.convolve(self);
        }
        Ok(acc)
    }
}

/// Materialize a family spec as a dense distribution.
///
/// `tail_tol` only matters for the coherent (Poisson) family: the spectrum is
/// truncated once the discarded upper tail is below `tail_tol`, then
/// renormalized. Rectangle and two-level spectra are finite and exact.
pub fn build_distribution(
    spec: &StateFamilySpec,
    tail_tol: f64,
) -> Result<NumberDistribution, SpectraError> {
    if tail_tol <= 0.0 || !tail_tol.is_finite() {
        return Err(SpectraError::InvalidParameter { reason: "tail_tol must be positive and finite" });
    }
    match *spec {
        StateFamilySpec::Coherent { n_mean } => {
            if !n_mean.is_finite() || n_mean < 0.0 {
                return Err(SpectraError::InvalidParameter { reason: "n_mean must be >= 0" });
            }
            if n_mean == 0.0 {
                return Ok(NumberDistribution::delta_zero());
            }
            // Log-space Poisson weights so large n_mean cannot underflow the
            // recurrence start; values below exp(-745) round to zero and are
            // covered by the renormalization.
            let ln_mean = n_mean.ln();
            let backstop = (n_mean + 40.0 * (n_mean + 1.0).sqrt() + 60.0) as usize;
            let mut weights = Vec::new();
            let mut ln_q = -n_mean;
            let mut n = 0_usize;
            loop {
                weights.push(ln_q.exp());
                // Geometric bound on the rest of the tail: for n + 2 > n_mean
                // the term ratio is below n_mean / (n + 2) < 1.
                let ratio = n_mean / (n as f64 + 2.0);
                let ln_next = ln_q + ln_mean - ((n + 1) as f64).ln();
                if ratio < 1.0 {
                    let tail_bound = ln_next.exp() / (1.0 - ratio);
                    if tail_bound < tail_tol {
                        break;
                    }
                }
                if n >= backstop {
                    break;
                }
                ln_q = ln_next;
                n += 1;
            }
            NumberDistribution::from_weights(weights)
        }
        StateFamilySpec::Rectangle { m } => {
            let p = 1.0 / f64::from(m + 1);
            NumberDistribution::from_weights(vec![p; m as usize + 1])
        }
        StateFamilySpec::RivasLuis { epsilon, m } => {
            if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
                return Err(SpectraError::InvalidParameter { reason: "epsilon must lie in [0, 1]" });
            }
            if m == 0 {
                return Err(SpectraError::InvalidParameter { reason: "m must be at least 1" });
            }
            let mut weights = vec![epsilon / f64::from(m); m as usize + 1];
            weights[0] = 1.0 - epsilon;
            NumberDistribution::from_weights(weights)
        }
    }
}
