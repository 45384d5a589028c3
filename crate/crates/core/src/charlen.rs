//! Finite-size characteristic length `L_ε(p)` and its gradient analogue `σ_N^ε`.
//!
//! `L_ε(p)` is the smallest rhombus side `n` at which the probability of a
//! horizontal black crossing (white when `p > 1/2`) drops to `ε`. It is
//! located by doubling then bisection over `n`, each probe deciding
//! "`P ≤ ε`" with a sequential two-standard-error rule.
//!
//! `σ_N^ε` is the largest `σ` with `L_ε(1/2 - σ/2N) ≥ σ`. Since crossing
//! probabilities decrease in `n` off criticality, `L_ε(p) ≥ σ` holds exactly
//! when the probe at side `σ - 1` is still above `ε`, so each bisection step
//! on `σ` costs a single probe.

use serde::{Deserialize, Serialize};

use crate::arms::{arm_probability, arm_stream};
use crate::cluster::{crossing_count, Orientation};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::lattice::Region;
use crate::profile::{Color, DensityProfile, SeedSpec};
use crate::rng::stream_id;
use crate::scalar::Real;
use crate::Estimate;

/// Dimensionless reference values the estimators are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceExponents<F> {
    /// Correlation-length exponent.
    pub nu: F,
    /// `ν / (1 + ν)`: growth exponent of `σ_N` in `N`.
    pub sigma_exponent: F,
    pub alpha2: F,
    pub alpha4: F,
    /// Dimension of the front (and of critical interfaces).
    pub front_dimension: F,
}

impl<F: Real> ReferenceExponents<F> {
    pub fn new() -> Self {
        let nu = F::lit(4.0) / F::lit(3.0);
        Self {
            nu,
            sigma_exponent: nu / (F::one() + nu),
            alpha2: F::lit(0.25),
            alpha4: F::lit(1.25),
            front_dimension: F::lit(1.75),
        }
    }
}

impl<F: Real> Default for ReferenceExponents<F> {
    fn default() -> Self {
        Self::new()
    }
}

/// Distance from `1/2` below which `|p - 1/2| L² π₄(L)` is treated as near-critical.
pub const NEAR_CRITICAL_WINDOW: f64 = 0.125;

/// Smallest `|p - 1/2|` accepted by [`estimate_characteristic_length`].
pub const MIN_DISTANCE_FROM_CRITICAL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharLenParams {
    pub eps: f64,
    /// Trials at the first stage of every probe.
    pub trials: u64,
    /// Largest rhombus side examined.
    pub n_max: u32,
}

impl Default for CharLenParams {
    fn default() -> Self {
        Self { eps: 0.25, trials: 400, n_max: 2048 }
    }
}

impl CharLenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::InvalidParameter(format!("eps {} outside (0, 1/2)", self.eps)));
        }
        if self.trials < 100 {
            return Err(Error::InvalidParameter(format!("{} trials per probe, need >= 100", self.trials)));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AtMostEps,
    AboveEps,
}

/// One audited crossing-probability probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub p: f64,
    pub n: u32,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub verdict: Verdict,
    /// Whether the first stage was inconclusive and the trial count quadrupled.
    pub escalated: bool,
}

/// Stream for probes at `(p, n)`; independent of `ε` so probes are shared.
pub fn probe_seed(master_seed: u64, p: f64, n: u32) -> SeedSpec {
    SeedSpec::new(master_seed, stream_id("charlen-probe", &[p.to_bits(), n as u64]), 0)
}

/// Decides whether `P_p(C_H(n × n)) ≤ ε` (white crossings when `p > 1/2`).
///
/// First stage: `T` trials; conclusive when `p̂ ± 2 stderr` lies on one side
/// of `ε`. Otherwise `3T` more trials are drawn and the point estimate over
/// all `4T` is compared with `ε`.
pub fn probe_crossing(p: f64, n: u32, params: &CharLenParams, master_seed: u64, exec: &Executor) -> Result<Probe> {
    params.validate()?;
    let profile = DensityProfile::homogeneous(p)?;
    let color = if p <= 0.5 { Color::Black } else { Color::White };
    let region = Region::square(n.max(1));
    let seed = probe_seed(master_seed, p, n);
    let t = params.trials;
    let count = |range| crossing_count(&region, &profile, Orientation::Horizontal, color, seed, range, exec);
    let first = count(0..t)?;
    let est = Estimate::from_successes(first, t);
    let verdict = if est.mean + 2.0 * est.stderr < params.eps {
        Some(Verdict::AtMostEps)
    } else if est.mean - 2.0 * est.stderr > params.eps {
        Some(Verdict::AboveEps)
    } else {
        None
    };
    if let Some(verdict) = verdict {
        return Ok(Probe { p, n, trials: t, p_hat: est.mean, stderr: est.stderr, verdict, escalated: false });
    }
    let total = first + count(t..4 * t)?;
    let est = Estimate::from_successes(total, 4 * t);
    let verdict = if est.mean <= params.eps { Verdict::AtMostEps } else { Verdict::AboveEps };
    Ok(Probe { p, n, trials: 4 * t, p_hat: est.mean, stderr: est.stderr, verdict, escalated: true })
}

/// Whether the probe trace is consistent with a predicate monotone in `n`.
pub fn trace_is_monotone(probes: &[Probe]) -> bool {
    let mut sorted: Vec<_> = probes.iter().map(|p| (p.n, p.verdict)).collect();
    sorted.sort_by_key(|&(n, _)| n);
    let first_at_most = sorted.iter().position(|&(_, v)| v == Verdict::AtMostEps);
    match first_at_most {
        None => true,
        Some(k) => sorted[k..].iter().all(|&(_, v)| v == Verdict::AtMostEps),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LengthOutcome {
    Found { length: u32 },
    /// The crossing probability was still above `ε` at `n_max`.
    OutOfRange { n_max: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    pub p: f64,
    pub eps: f64,
    pub outcome: LengthOutcome,
    pub probes: Vec<Probe>,
    pub monotone: bool,
}

impl LengthEstimate {
    pub fn length(&self) -> Option<u32> {
        match self.outcome {
            LengthOutcome::Found { length } => Some(length),
            LengthOutcome::OutOfRange { .. } => None,
        }
    }
}

/// Bisection stopping width: one lattice unit below 64, 5% above.
fn resolution(hi: u32) -> u32 {
    if hi < 64 {
        1
    } else {
        (hi / 20).max(1)
    }
}

fn search_length(p: f64, params: &CharLenParams, master_seed: u64, exec: &Executor) -> Result<LengthEstimate> {
    params.validate()?;
    let mut probes = Vec::new();
    let mut lo = 0u32;
    let mut n = 1u32;
    let hi = loop {
        let probe = probe_crossing(p, n, params, master_seed, exec)?;
        probes.push(probe);
        if probe.verdict == Verdict::AtMostEps {
            break n;
        }
        lo = n;
        if n >= params.n_max {
            let monotone = trace_is_monotone(&probes);
            return Ok(LengthEstimate {
                p,
                eps: params.eps,
                outcome: LengthOutcome::OutOfRange { n_max: params.n_max },
                probes,
                monotone,
            });
        }
        n = (2 * n).min(params.n_max);
    };
    let mut hi = hi;
    while hi - lo > resolution(hi) {
        let mid = lo + (hi - lo) / 2;
        let probe = probe_crossing(p, mid, params, master_seed, exec)?;
        probes.push(probe);
        match probe.verdict {
            Verdict::AtMostEps => hi = mid,
            Verdict::AboveEps => lo = mid,
        }
    }
    let monotone = trace_is_monotone(&probes);
    Ok(LengthEstimate {
        p,
        eps: params.eps,
        outcome: LengthOutcome::Found { length: lo + 1 },
        probes,
        monotone,
    })
}

/// Estimates `L_ε(p)`: the largest probed side with the probability still
/// above `ε`, plus one.
pub fn estimate_characteristic_length(
    p: f64,
    params: &CharLenParams,
    master_seed: u64,
    exec: &Executor,
) -> Result<LengthEstimate> {
    if !(0.0..=1.0).contains(&p) || (p - 0.5).abs() < MIN_DISTANCE_FROM_CRITICAL {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must satisfy |p - 1/2| >= {MIN_DISTANCE_FROM_CRITICAL}"
        )));
    }
    search_length(p, params, master_seed, exec)
}

/// Gradient parameter at height `y` of a strip of half-height `N`.
pub fn gradient_p(half_height: u32, y: f64) -> f64 {
    0.5 - y / (2.0 * half_height as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaProbe {
    pub sigma: u32,
    /// Whether `L_ε(p(σ)) ≥ σ` was accepted.
    pub holds: bool,
    pub probe: Option<Probe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub half_height: u32,
    pub eps: f64,
    pub sigma: u32,
    pub probes: Vec<SigmaProbe>,
    /// Set when the crossing point sits at the ends of `[1, N]` (no stable
    /// crossing) or the probe trace is not monotone in `σ`.
    pub degenerate: bool,
}

/// Estimates `σ_N^ε = sup{σ : L_ε(p(σ)) ≥ σ}` by bisection over `σ ∈ [1, N]`.
pub fn estimate_sigma(half_height: u32, params: &CharLenParams, master_seed: u64, exec: &Executor) -> Result<SigmaEstimate> {
    if half_height < 16 {
        return Err(Error::InvalidParameter(format!("N = {half_height} below 16")));
    }
    params.validate()?;
    let mut probes = Vec::new();
    let mut holds = |sigma: u32| -> Result<bool> {
        let p = gradient_p(half_height, sigma as f64);
        let probe = probe_crossing(p, sigma - 1, params, master_seed, exec)?;
        let holds = probe.verdict == Verdict::AboveEps;
        probes.push(SigmaProbe { sigma, holds, probe: Some(probe) });
        Ok(holds)
    };
    // L ≥ 1 always; at σ = N the density vanishes and no crossing exists.
    let (mut lo, mut hi) = (1u32, half_height);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut sorted: Vec<_> = probes.iter().map(|p| (p.sigma, p.holds)).collect();
    sorted.sort_by_key(|&(s, _)| s);
    let monotone = sorted.windows(2).all(|w| w[0].1 || !w[1].1);
    let degenerate = !monotone || lo < 4 || lo > half_height / 2;
    Ok(SigmaEstimate { half_height, eps: params.eps, sigma: lo, probes, degenerate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRelation {
    pub p: f64,
    pub length: LengthEstimate,
    /// `π₄(0, L)` at `p = 1/2`.
    pub pi4: Option<Estimate>,
    /// `|p - 1/2| · L² · π₄(L)`.
    pub product: Option<f64>,
    pub near_critical: bool,
}

/// Evaluates `|p - 1/2| L_ε(p)² π₄(L_ε(p))` with `π₄` estimated at criticality.
pub fn check_scaling_relation(
    p: f64,
    params: &CharLenParams,
    arm_trials: u64,
    master_seed: u64,
    exec: &Executor,
) -> Result<ScalingRelation> {
    let length = estimate_characteristic_length(p, params, master_seed, exec)?;
    let delta = (p - 0.5).abs();
    let near_critical = delta <= NEAR_CRITICAL_WINDOW;
    let Some(l) = length.length() else {
        return Ok(ScalingRelation { p, length, pi4: None, product: None, near_critical });
    };
    let critical = DensityProfile::critical();
    let pi4 = arm_probability(4, 0, l, &critical, arm_trials, arm_stream(master_seed, 4, 0, l, &critical), exec)?;
    let product = (pi4.mean > 0.0).then(|| delta * (l as f64).powi(2) * pi4.mean);
    Ok(ScalingRelation { p, length, pi4: Some(pi4), product, near_critical })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> CharLenParams {
        CharLenParams { eps: 0.25, trials: 400, n_max: 512 }
    }

    #[test]
    fn reference_exponents_are_consistent() {
        let r = ReferenceExponents::<f64>::new();
        assert!((r.sigma_exponent - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(r.sigma_exponent, r.nu / (1.0 + r.nu));
        let r32 = ReferenceExponents::<f32>::new();
        assert!((r32.nu - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn params_validation() {
        assert!(CharLenParams { eps: 0.5, ..fast() }.validate().is_err());
        assert!(CharLenParams { trials: 99, ..fast() }.validate().is_err());
        assert!(fast().validate().is_ok());
        let exec = Executor::sequential();
        assert!(estimate_characteristic_length(0.499, &fast(), 1, &exec).is_err());
        assert!(estimate_sigma(8, &fast(), 1, &exec).is_err());
    }

    #[test]
    fn far_subcritical_length_is_tiny() {
        let est = estimate_characteristic_length(0.05, &fast(), 1, &Executor::sequential()).unwrap();
        assert!(est.length().unwrap() <= 8, "{est:?}");
        // At n = 8 the crossing probability is already far below 1/4.
        let probe = probe_crossing(0.05, 8, &fast(), 1, &Executor::sequential()).unwrap();
        assert!(probe.p_hat < 0.01);
    }

    #[test]
    fn cap_is_reported() {
        let params = CharLenParams { n_max: 8, ..fast() };
        let est = estimate_characteristic_length(0.49, &params, 1, &Executor::sequential()).unwrap();
        assert_eq!(est.outcome, LengthOutcome::OutOfRange { n_max: 8 });
        assert_eq!(est.length(), None);
    }

    #[test]
    fn monotone_trace_detection() {
        let mk = |n, verdict| Probe { p: 0.4, n, trials: 100, p_hat: 0.0, stderr: 0.0, verdict, escalated: false };
        use Verdict::*;
        assert!(trace_is_monotone(&[mk(1, AboveEps), mk(4, AtMostEps), mk(2, AboveEps)]));
        assert!(!trace_is_monotone(&[mk(1, AboveEps), mk(2, AtMostEps), mk(4, AboveEps)]));
    }

    #[test]
    fn probe_is_deterministic_and_sequential_rule_escalates() {
        let exec = Executor::sequential();
        let a = probe_crossing(0.45, 6, &fast(), 9, &exec).unwrap();
        let b = probe_crossing(0.45, 6, &fast(), 9, &exec).unwrap();
        assert_eq!(a, b);
        // p̂ close to ε must escalate.
        for probe in [a] {
            let conclusive = (probe.p_hat + 2.0 * probe.stderr < 0.25) || (probe.p_hat - 2.0 * probe.stderr > 0.25);
            assert!(probe.escalated || conclusive);
            assert_eq!(probe.trials, if probe.escalated { 1600 } else { 400 });
        }
    }
}
