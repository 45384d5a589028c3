//! Monte Carlo estimates and log-log power-law regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<F> {
    pub mean: F,
    pub stderr: F,
    pub trials: u64,
}

impl<F: Real> Estimate<F> {
    /// Bernoulli estimate: `stderr = sqrt(mean (1 - mean) / trials)`.
    pub fn from_successes(successes: u64, trials: u64) -> Self {
        assert!(trials >= 1 && successes <= trials, "{successes}/{trials}");
        let n = F::from_count(trials);
        let mean = F::from_count(successes) / n;
        let stderr = (mean * (F::one() - mean) / n).sqrt();
        Self { mean, stderr, trials }
    }

    /// Sample mean with the standard error of the mean (zero for one sample).
    pub fn from_samples(samples: &[F]) -> Self {
        assert!(!samples.is_empty(), "no samples");
        let n = F::from_count(samples.len() as u64);
        let mean = samples.iter().copied().sum::<F>() / n;
        let stderr = if samples.len() < 2 {
            F::zero()
        } else {
            let ss: F = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
            (ss / (n - F::one()) / n).sqrt()
        };
        Self { mean, stderr, trials: samples.len() as u64 }
    }

    /// `mean / stderr`; infinite when the error vanishes.
    pub fn z_score(&self) -> F {
        if self.stderr == F::zero() {
            if self.mean == F::zero() {
                F::zero()
            } else {
                F::infinity() * self.mean.signum()
            }
        } else {
            self.mean / self.stderr
        }
    }

    /// Bernoulli means below `5 / trials` are too noisy in log space to fit.
    pub fn is_fit_eligible(&self) -> bool {
        self.mean >= F::lit(5.0) / F::from_count(self.trials)
    }

    /// Ratio of two independent estimates with first-order error propagation.
    pub fn ratio(&self, other: &Self) -> Option<(F, F)> {
        if self.mean <= F::zero() || other.mean <= F::zero() {
            return None;
        }
        let r = self.mean / other.mean;
        let rel = ((self.stderr / self.mean).powi(2) + (other.stderr / other.mean).powi(2)).sqrt();
        Some((r, r * rel))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint<F> {
    pub x: F,
    pub y: F,
    pub weight: F,
}

impl<F: Real> FitPoint<F> {
    pub fn new(x: F, y: F) -> Self {
        Self { x, y, weight: F::one() }
    }

    pub fn weighted(x: F, y: F, weight: F) -> Self {
        Self { x, y, weight }
    }

    /// Weight = 1 / relative variance of the estimate, with the relative
    /// variance floored at `1 / trials²` so exact estimates stay finite.
    /// Returns `None` for estimates not eligible for fitting.
    pub fn from_estimate(x: F, est: &Estimate<F>) -> Option<Self> {
        if !est.is_fit_eligible() || est.mean <= F::zero() {
            return None;
        }
        let floor = F::one() / F::from_count(est.trials).powi(2);
        let rel_var = ((est.stderr / est.mean).powi(2)).max(floor);
        Some(Self { x, y: est.mean, weight: F::one() / rel_var })
    }
}

/// Fit of `y = A · x^slope` by least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit<F> {
    pub slope: F,
    pub slope_stderr: F,
    /// `ln A`.
    pub intercept: F,
    pub r_squared: F,
    pub points: usize,
}

impl<F: Real> PowerLawFit<F> {
    pub fn prefactor(&self) -> F {
        self.intercept.exp()
    }

    pub fn predict(&self, x: F) -> F {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Minimum ratio between the largest and smallest abscissa.
pub const MIN_X_SPAN: f64 = 4.0;

/// Weighted least squares on logarithms.
///
/// Requires at least three points, all coordinates and weights positive, and
/// an abscissa span of at least [`MIN_X_SPAN`].
pub fn fit_power_law<F: Real>(points: &[FitPoint<F>]) -> Result<PowerLawFit<F>> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 3", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.x > F::zero() && p.y > F::zero() && p.weight > F::zero())) {
        return Err(Error::InvalidParameter(format!(
            "power-law fit needs positive data, got x={} y={} w={}",
            p.x, p.y, p.weight
        )));
    }
    let x_min = points.iter().map(|p| p.x).fold(F::infinity(), F::min);
    let x_max = points.iter().map(|p| p.x).fold(F::neg_infinity(), F::max);
    if x_max / x_min < F::lit(MIN_X_SPAN) {
        return Err(Error::DegenerateFit(format!("x span {} below {MIN_X_SPAN}", x_max / x_min)));
    }

    let lx: Vec<F> = points.iter().map(|p| p.x.ln()).collect();
    let ly: Vec<F> = points.iter().map(|p| p.y.ln()).collect();
    let w: Vec<F> = points.iter().map(|p| p.weight).collect();
    let sw: F = w.iter().copied().sum();
    let mx = lx.iter().zip(&w).map(|(&x, &w)| w * x).sum::<F>() / sw;
    let my = ly.iter().zip(&w).map(|(&y, &w)| w * y).sum::<F>() / sw;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    let mut syy = F::zero();
    for k in 0..points.len() {
        let dx = lx[k] - mx;
        let dy = ly[k] - my;
        sxx = sxx + w[k] * dx * dx;
        sxy = sxy + w[k] * dx * dy;
        syy = syy + w[k] * dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: F = (0..points.len())
        .map(|k| {
            let r = ly[k] - intercept - slope * lx[k];
            w[k] * r * r
        })
        .sum();
    let dof = F::from_count(points.len() as u64 - 2);
    let slope_stderr = (ssr / dof / sxx).sqrt();
    let r_squared = if syy > F::zero() {
        (F::one() - ssr / syy).max(F::zero()).min(F::one())
    } else {
        F::one()
    };
    Ok(PowerLawFit { slope, slope_stderr, intercept, r_squared, points: points.len() })
}
