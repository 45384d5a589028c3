//! The acceptance battery: one check per numbered criterion.
//!
//! Each criterion returns a pass flag, a one-line summary and the numeric
//! values it was decided on. Criterion 11 reruns criteria 1 to 10 with a
//! different worker count and compares those values bit for bit.

use gradperc::arms::{arm_probability, arm_stream, quasi_multiplicativity_ratio};
use gradperc::charlen::{check_scaling_relation, CharLenParams};
use gradperc::fitstats::fit_power_law;
use gradperc::front::StripSpec;
use gradperc::{DensityProfile, Estimate, Executor, FitPoint, Region};
use serde::{Deserialize, Serialize};

use crate::experiment::{
    arms_point, asymmetry_point, charlen_point, crossing_point, length_point, sigma_hat, sigma_point, strip_batch,
    PointResult, LENGTH_WINDOW_T,
};
use crate::oracle;

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const CRITERIA: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    /// Values the verdict was based on, compared bitwise by criterion 11.
    pub values: Vec<f64>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!("criterion {:>2} [{}] {}: {}", self.id, if self.passed { "PASS" } else { "FAIL" }, self.title, self.summary)
    }
}

pub struct SuiteContext {
    pub master_seed: u64,
    pub exec: Executor,
}

impl SuiteContext {
    pub fn new(master_seed: u64, workers: usize) -> anyhow::Result<Self> {
        Ok(Self { master_seed, exec: Executor::new(workers)? })
    }

    fn params(&self) -> CharLenParams {
        CharLenParams::default()
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "exact duality",
        2 => "small-instance oracles",
        3 => "nu band",
        4 => "sigma band",
        5 => "arm exponents",
        6 => "scaling relation",
        7 => "quasi-multiplicativity",
        8 => "localization",
        9 => "front length",
        10 => "asymmetry",
        11 => "reproducibility",
        _ => "unknown",
    }
}

fn outcome(id: u8, passed: bool, summary: String, values: Vec<f64>) -> CriterionOutcome {
    CriterionOutcome { id, title: title(id).into(), passed, summary, values }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi / lo
}

/// Runs criteria 1 to 10. Criterion 11 needs reference outcomes, see [`reproducibility`].
pub fn run_criterion(id: u8, ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    match id {
        1 => duality(ctx),
        2 => oracles(ctx),
        3 => nu_band(ctx),
        4 => sigma_band(ctx),
        5 => arm_exponents(ctx),
        6 => scaling_relation(ctx),
        7 => quasi_multiplicativity(ctx),
        8 => localization(ctx),
        9 => front_length(ctx),
        10 => asymmetry(ctx),
        other => anyhow::bail!("criterion {other} is not a standalone check"),
    }
}

fn duality(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut values = Vec::new();
    for n in [8, 16, 32, 64] {
        let PointResult::Crossing { estimate, duality_violations, .. } = crossing_point(n, 0.5, 10_000, ctx.master_seed, &ctx.exec)? else {
            unreachable!()
        };
        let z = (estimate.mean - 0.5) / estimate.stderr;
        ok &= z.abs() <= 3.0 && duality_violations == 0;
        parts.push(format!("n={n}: {:.4} (z {z:+.2}, {duality_violations} violations)", estimate.mean));
        values.extend([estimate.mean, duality_violations as f64]);
    }
    Ok(outcome(1, ok, parts.join("; "), values))
}

fn oracles(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let reports = oracle::run_all(ctx.master_seed);
    let ok = reports.iter().all(|(_, r)| r.mismatches == 0);
    let summary = reports
        .iter()
        .map(|(name, r)| format!("{name}: {}/{} mismatches", r.mismatches, r.configurations))
        .collect::<Vec<_>>()
        .join("; ");
    let values = reports.iter().flat_map(|(_, r)| [r.configurations as f64, r.mismatches as f64]).collect();
    Ok(outcome(2, ok, summary, values))
}

fn nu_band(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let mut points = Vec::new();
    let mut lengths = Vec::new();
    for p in [0.40, 0.42, 0.44, 0.46, 0.48] {
        let PointResult::Charlen { length, .. } = charlen_point(p, &ctx.params(), ctx.master_seed, &ctx.exec)? else {
            unreachable!()
        };
        let l = length.length().map(f64::from).unwrap_or(f64::NAN);
        lengths.push(l);
        if l > 0.0 {
            points.push(FitPoint::new((p - 0.5f64).abs(), l));
        }
    }
    let fit = fit_power_law(&points)?;
    let ok = points.len() == 5 && within(fit.slope, -1.7, -1.0);
    let summary = format!("L = {lengths:?}; slope {:.3} +/- {:.3} in [-1.7, -1.0]", fit.slope, fit.slope_stderr);
    let mut values = lengths;
    values.push(fit.slope);
    Ok(outcome(3, ok, summary, values))
}

fn sigma_band(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut consistent = true;
    let mut parts = Vec::new();
    for n in [64, 128, 256, 512, 1024] {
        let PointResult::Sigma { sigma, consistency, .. } = sigma_point(n, &ctx.params(), ctx.master_seed, &ctx.exec)? else {
            unreachable!()
        };
        let ratio = consistency.unwrap_or(f64::NAN);
        consistent &= !sigma.degenerate && within(ratio, 0.25, 4.0);
        parts.push(format!("N={n}: sigma {} L/sigma {ratio:.2}", sigma.sigma));
        points.push(FitPoint::new(n as f64, sigma.sigma as f64));
        values.extend([sigma.sigma as f64, ratio]);
    }
    let fit = fit_power_law(&points)?;
    let ok = consistent && within(fit.slope, 0.45, 0.70);
    values.push(fit.slope);
    Ok(outcome(
        4,
        ok,
        format!("{}; slope {:.3} in [0.45, 0.70], ratios in [1/4, 4]", parts.join(", "), fit.slope),
        values,
    ))
}

fn arm_fit(ctx: &SuiteContext, arms: u32, ns: &[u32], trials: u64) -> anyhow::Result<(f64, Vec<Estimate>)> {
    let mut points = Vec::new();
    let mut estimates = Vec::new();
    for &n in ns {
        let PointResult::Arms { estimate, .. } = arms_point(arms, 0, n, 0.5, trials, ctx.master_seed, &ctx.exec)? else {
            unreachable!()
        };
        if let Some(fp) = FitPoint::from_estimate(n as f64, &estimate) {
            points.push(fp);
        }
        estimates.push(estimate);
    }
    Ok((fit_power_law(&points)?.slope, estimates))
}

fn arm_exponents(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let (s2, e2) = arm_fit(ctx, 2, &[8, 16, 32, 64, 128, 256], 10_000)?;
    let (s4, e4) = arm_fit(ctx, 4, &[4, 8, 16, 32, 64], 100_000)?;
    let ok = within(s2, -0.35, -0.20) && within(s4, -1.5, -1.0);
    let fmt = |e: &[Estimate]| e.iter().map(|x| format!("{:.4}", x.mean)).collect::<Vec<_>>().join(",");
    let summary = format!(
        "pi2 slope {s2:.3} in [-0.35, -0.20] (pi2 {}), pi4 slope {s4:.3} in [-1.5, -1.0] (pi4 {})",
        fmt(&e2),
        fmt(&e4)
    );
    let mut values: Vec<f64> = e2.iter().chain(&e4).map(|e| e.mean).collect();
    values.extend([s2, s4]);
    Ok(outcome(5, ok, summary, values))
}

fn scaling_relation(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let mut products = Vec::new();
    let mut values = Vec::new();
    for p in [0.40, 0.44, 0.48] {
        let rel = check_scaling_relation(p, &ctx.params(), 20_000, ctx.master_seed, &ctx.exec)?;
        let product = rel.product.unwrap_or(f64::NAN);
        products.push(product);
        values.extend([rel.length.length().map(f64::from).unwrap_or(f64::NAN), product]);
    }
    let ratio = spread(&products);
    values.push(ratio);
    let ok = products.iter().all(|x| x.is_finite() && *x > 0.0) && ratio <= 10.0;
    let summary = format!(
        "products {} at p = 0.40, 0.44, 0.48; max/min {ratio:.2} <= 10",
        products.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
    );
    Ok(outcome(6, ok, summary, values))
}

fn quasi_multiplicativity(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let critical = DensityProfile::critical();
    let mut ratios = Vec::new();
    for n2 in [32, 64, 128] {
        let q = quasi_multiplicativity_ratio(2, 8, n2, &critical, 10_000, ctx.master_seed, &ctx.exec)?;
        ratios.push(q.ratio.unwrap_or(f64::NAN));
    }
    let near = DensityProfile::homogeneous(0.45)?;
    let trials = 10_000;
    let pi_near = arm_probability(2, 8, 32, &near, trials, arm_stream(ctx.master_seed, 2, 8, 32, &near), &ctx.exec)?;
    let pi_crit = arm_probability(2, 8, 32, &critical, trials, arm_stream(ctx.master_seed, 2, 8, 32, &critical), &ctx.exec)?;
    let invariance = pi_near.mean / pi_crit.mean;
    let l45 = match charlen_point(0.45, &ctx.params(), ctx.master_seed, &ctx.exec)? {
        PointResult::Charlen { length, .. } => length.length().map(f64::from).unwrap_or(f64::NAN),
        _ => unreachable!(),
    };
    let ok = ratios.iter().all(|&r| within(r, 0.1, 10.0)) && spread(&ratios) <= 5.0 && within(invariance, 0.2, 5.0);
    let summary = format!(
        "ratios (8, 32/64/128) {}; max/min {:.2}; pi2(8,32) p=0.45/p=0.5 = {invariance:.3} in [1/5, 5] (L(0.45) = {l45})",
        ratios.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", "),
        spread(&ratios)
    );
    let mut values = ratios;
    values.extend([pi_near.mean, pi_crit.mean, invariance, l45]);
    Ok(outcome(7, ok, summary, values))
}

fn localization(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let n = 256u32;
    let sigma = sigma_hat(n, &ctx.params(), ctx.master_seed, &ctx.exec)?.sigma;
    let strip = StripSpec::with_default_length(n, sigma)?;
    let (s, mid) = (sigma as i64, strip.length as i64 / 2);
    let window = Region::new(mid - 2 * s, mid + 2 * s, -(n as i64), n as i64)?;
    let strips = 500;
    let runs = strip_batch(&strip, strips, &[window], ctx.master_seed, &ctx.exec)?;
    let verified = runs.iter().all(|a| a.verified && a.chirality);
    let heights: Vec<f64> = runs.iter().map(|a| a.windows[0].map_or(0.0, |w| w.max_abs_y)).collect();
    let exit: Vec<f64> = (1..=4)
        .map(|u| heights.iter().filter(|&&h| h > (u * sigma) as f64).count() as f64 / strips as f64)
        .collect();
    let monotone = exit.windows(2).all(|w| w[1] <= w[0]);
    let stay = 1.0 - exit[0];
    let ok = verified && exit[3] <= 0.1 && stay <= 0.9 && monotone;
    let summary = format!(
        "N=256 sigma {sigma}, window 4 sigma, {strips} strips: P(exit u sigma) for u=1..4 = {exit:?}; exit(4) <= 0.1, stay(1) = {stay:.3} <= 0.9, monotone {monotone}"
    );
    let mut values = exit;
    values.push(sigma as f64);
    Ok(outcome(8, ok, summary, values))
}

fn front_length(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut ratios_ok = true;
    let mut parts = Vec::new();
    for n in [64, 128, 256, 512, 1024] {
        let PointResult::Length { sigma, edges, ratio, unverified, .. } = length_point(n, 100, &ctx.params(), ctx.master_seed, &ctx.exec)? else {
            unreachable!()
        };
        let ratio = ratio.unwrap_or(f64::NAN);
        ratios_ok &= unverified == 0;
        if [64, 256, 1024].contains(&n) {
            ratios_ok &= within(ratio, 0.125, 8.0);
            parts.push(format!("N={n}: ratio {ratio:.2}"));
        }
        points.push(FitPoint::new(sigma as f64, edges.mean));
        values.extend([sigma as f64, edges.mean, ratio]);
    }
    let fit = fit_power_law(&points)?;
    values.push(fit.slope);
    let ok = ratios_ok && within(fit.slope, 1.55, 1.95);
    let summary = format!(
        "edges/(t sigma^2 pi2(sigma)) with t={LENGTH_WINDOW_T}: {} in [1/8, 8]; edge-count slope vs sigma {:.3} in [1.55, 1.95]",
        parts.join(", "),
        fit.slope
    );
    Ok(outcome(9, ok, summary, values))
}

fn asymmetry(ctx: &SuiteContext) -> anyhow::Result<CriterionOutcome> {
    let PointResult::Asymmetry { sigma, full, lower, full_z, lower_z, unverified, .. } =
        asymmetry_point(1024, 300, &ctx.params(), ctx.master_seed, &ctx.exec)?
    else {
        unreachable!()
    };
    let (fz, lz) = (full_z.unwrap_or(f64::NAN), lower_z.unwrap_or(f64::NAN));
    let ok = unverified == 0 && full.mean > 0.0 && fz >= 3.0 && lower.mean > 0.0 && lz >= 3.0;
    let summary = format!(
        "N=1024 sigma {sigma}, 300 strips: full-window excess {:.1} +/- {:.1} (z {fz:.2}), j<0 window excess {:.1} +/- {:.1} (z {lz:.2}); need both z >= 3",
        full.mean, full.stderr, lower.mean, lower.stderr
    );
    Ok(outcome(10, ok, summary, vec![sigma as f64, full.mean, full.stderr, lower.mean, lower.stderr]))
}

/// Criterion 11 from reference outcomes and a rerun under another worker count.
pub fn reproducibility(reference: &[CriterionOutcome], rerun: &[CriterionOutcome], workers: (usize, usize)) -> CriterionOutcome {
    let mut differing = Vec::new();
    for r in reference {
        match rerun.iter().find(|o| o.id == r.id) {
            Some(o) => {
                let same = o.values.len() == r.values.len()
                    && o.values.iter().zip(&r.values).all(|(a, b)| a.to_bits() == b.to_bits());
                if !same {
                    differing.push(r.id);
                }
            }
            None => differing.push(r.id),
        }
    }
    let ids: Vec<u8> = reference.iter().map(|r| r.id).collect();
    let summary = if differing.is_empty() {
        format!("criteria {ids:?} bit-identical with {} and {} workers", workers.0, workers.1)
    } else {
        format!("criteria {differing:?} differ between {} and {} workers", workers.0, workers.1)
    };
    outcome(11, differing.is_empty(), summary, Vec::new())
}

/// Runs the whole battery: criteria 1 to 10 with `workers`, then again with
/// `other_workers` for criterion 11.
pub fn run_suite(
    master_seed: u64,
    workers: usize,
    other_workers: usize,
    mut report: impl FnMut(&CriterionOutcome),
) -> anyhow::Result<Vec<CriterionOutcome>> {
    let ctx = SuiteContext::new(master_seed, workers)?;
    let mut outcomes = Vec::new();
    for id in 1..=10 {
        let o = run_criterion(id, &ctx)?;
        report(&o);
        outcomes.push(o);
    }
    let other = SuiteContext::new(master_seed, other_workers)?;
    let rerun = (1..=10).map(|id| run_criterion(id, &other)).collect::<anyhow::Result<Vec<_>>>()?;
    let o = reproducibility(&outcomes, &rerun, (ctx.exec.workers(), other.exec.workers()));
    report(&o);
    outcomes.push(o);
    Ok(outcomes)
}
