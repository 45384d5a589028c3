//! Experiment specifications, grid execution and result records.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::ValueEnum;
use gradperc::arms::{arm_probability, arm_stream, quasi_multiplicativity_ratio, QuasiMultiplicativity};
use gradperc::charlen::{
    check_scaling_relation, estimate_characteristic_length, estimate_sigma, gradient_p, CharLenParams, LengthEstimate,
    ScalingRelation, SigmaEstimate, MIN_DISTANCE_FROM_CRITICAL,
};
use gradperc::cluster::{CrossingProbe, Orientation};
use gradperc::fitstats::fit_power_law;
use gradperc::front::{analyze_strip, FrontStats, StripAnalysis, StripSpec};
use gradperc::rng::stream_id;
use gradperc::{
    Color, Configuration, DensityProfile, Estimate, Executor, FitPoint, PowerLawFit, Region, SeedSpec,
};
use serde::{Deserialize, Serialize};

use crate::grid::Grid;

pub const TOOL_VERSION: &str = concat!("gradperc ", env!("CARGO_PKG_VERSION"));
pub const RECORD_SCHEMA: &str = "gradperc.record/1";
pub const RESULT_SCHEMA: &str = "gradperc.result/1";

/// Rhombus cap for characteristic-length searches.
pub const N_MAX: u32 = 2048;
/// Trials behind `π₂(σ̂)` in length experiments.
pub const LENGTH_PI2_TRIALS: u64 = 10_000;
/// Window length, in units of `σ̂`, for front-length experiments.
pub const LENGTH_WINDOW_T: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Crossing,
    Charlen,
    Sigma,
    Arms,
    Quasimult,
    Relation,
    Front,
    NuFit,
    SigmaFit,
    ArmFit,
    LengthFit,
    Asymmetry,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Crossing => "crossing",
            Self::Charlen => "charlen",
            Self::Sigma => "sigma",
            Self::Arms => "arms",
            Self::Quasimult => "quasimult",
            Self::Relation => "relation",
            Self::Front => "front",
            Self::NuFit => "nu-fit",
            Self::SigmaFit => "sigma-fit",
            Self::ArmFit => "arm-fit",
            Self::LengthFit => "length-fit",
            Self::Asymmetry => "asymmetry",
        }
    }

    pub fn default_grid(self) -> Grid {
        let p_grid = vec![0.40, 0.42, 0.44, 0.46, 0.48];
        let n_grid = vec![64, 128, 256, 512, 1024];
        match self {
            Self::Crossing => Grid { n: vec![8, 16, 32, 64], p: vec![0.5], ..Grid::default() },
            Self::Charlen | Self::NuFit => Grid { p: p_grid, ..Grid::default() },
            Self::Sigma | Self::SigmaFit | Self::LengthFit => Grid { half_height: n_grid, ..Grid::default() },
            Self::Arms | Self::ArmFit => Grid {
                arms: vec![2],
                n1: vec![0],
                n: vec![8, 16, 32, 64, 128, 256],
                p: vec![0.5],
                ..Grid::default()
            },
            Self::Quasimult => Grid { arms: vec![2], n1: vec![8], n: vec![32, 64, 128], p: vec![0.5], ..Grid::default() },
            Self::Relation => Grid { p: vec![0.40, 0.44, 0.48], ..Grid::default() },
            Self::Front => Grid { half_height: vec![64], ..Grid::default() },
            Self::Asymmetry => Grid { half_height: vec![1024], ..Grid::default() },
        }
    }

    /// Meaning depends on the kind: samples per point, strips per `N`, or
    /// arm-event trials for `relation`.
    pub fn default_trials(self) -> u64 {
        match self {
            Self::Crossing | Self::Arms | Self::ArmFit | Self::Quasimult => 10_000,
            Self::Charlen | Self::NuFit | Self::Sigma | Self::SigmaFit => 400,
            Self::Relation => 20_000,
            Self::Front => 10,
            Self::LengthFit => 100,
            Self::Asymmetry => 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub grid: Grid,
    pub eps: f64,
    pub trials: u64,
    /// Trials per crossing probe of the characteristic-length searches.
    pub probe_trials: u64,
    pub master_seed: u64,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            grid: kind.default_grid(),
            eps: 0.25,
            trials: kind.default_trials(),
            probe_trials: CharLenParams::default().trials,
            master_seed: 1,
            workers: 1,
            output: None,
        }
    }

    /// Fills grid keys left empty with the kind's defaults.
    pub fn resolved(mut self) -> Self {
        let d = self.kind.default_grid();
        let g = &mut self.grid;
        for (mine, default) in [(&mut g.n, d.n), (&mut g.half_height, d.half_height), (&mut g.n1, d.n1), (&mut g.arms, d.arms)] {
            if mine.is_empty() {
                *mine = default;
            }
        }
        if g.p.is_empty() {
            g.p = d.p;
        }
        self
    }

    pub fn charlen_params(&self) -> CharLenParams {
        CharLenParams { eps: self.eps, trials: self.probe_trials, n_max: N_MAX }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.charlen_params().validate()?;
        if self.trials == 0 {
            bail!("trials must be >= 1");
        }
        let g = &self.grid;
        use ExperimentKind::*;
        match self.kind {
            Crossing => {
                if g.n.iter().any(|&n| n == 0) {
                    bail!("crossing needs n >= 1");
                }
            }
            Charlen | NuFit | Relation => {
                if let Some(p) = g.p.iter().find(|p| (**p - 0.5).abs() < MIN_DISTANCE_FROM_CRITICAL) {
                    bail!("p = {p} too close to 1/2 (need |p - 1/2| >= {MIN_DISTANCE_FROM_CRITICAL})");
                }
            }
            Sigma | SigmaFit | Front | LengthFit | Asymmetry => {
                if let Some(n) = g.half_height.iter().find(|&&n| n < 16) {
                    bail!("N = {n} below 16");
                }
            }
            Arms | ArmFit | Quasimult => {
                if let Some(j) = g.arms.iter().find(|&&j| j != 2 && j != 4) {
                    bail!("arm count j = {j} not in {{2, 4}}");
                }
                for &n1 in &g.n1 {
                    for &n2 in &g.n {
                        if self.kind == Quasimult && (n1 < 2 || 2 * n1 >= n2) {
                            bail!("quasimult needs 2 <= n1 and 2 n1 < n, got n1={n1} n={n2}");
                        }
                        if n2 <= n1 {
                            bail!("annulus needs n > n1, got n1={n1} n={n2}");
                        }
                    }
                }
            }
        }
        if matches!(self.kind, NuFit | SigmaFit | ArmFit | LengthFit) {
            let count = match self.kind {
                NuFit => g.p.len(),
                ArmFit => {
                    if g.arms.len() != 1 || g.n1.len() != 1 || g.p.len() != 1 {
                        bail!("arm-fit takes a single j, n1 and p");
                    }
                    g.n.len()
                }
                _ => g.half_height.len(),
            };
            if count < 3 {
                bail!("{} needs at least 3 grid points", self.kind.name());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripResult {
    pub verified: bool,
    pub chirality: bool,
    pub edges: u64,
    pub stats: Option<FrontStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PointResult {
    Crossing { n: u32, p: f64, estimate: Estimate, duality_violations: u64 },
    Charlen { p: f64, length: LengthEstimate },
    Sigma { half_height: u32, sigma: SigmaEstimate, length_at_sigma: Option<LengthEstimate>, consistency: Option<f64> },
    Arms { arms: u32, n1: u32, n2: u32, p: f64, estimate: Estimate },
    Quasimult { p: f64, result: QuasiMultiplicativity },
    Relation { relation: ScalingRelation },
    Front { half_height: u32, sigma: u32, strip: StripSpec, window: Region, strips: Vec<StripResult> },
    Length { half_height: u32, sigma: u32, window: Region, edges: Estimate, pi2: Estimate, ratio: Option<f64>, unverified: u64 },
    Asymmetry { half_height: u32, sigma: u32, full: Estimate, lower: Estimate, full_z: Option<f64>, lower_z: Option<f64>, unverified: u64 },
}

/// One JSON-lines entry: a grid point with full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub schema: String,
    pub tool_version: String,
    pub spec: ExperimentSpec,
    pub grid_index: usize,
    pub point: PointResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: String,
    pub tool_version: String,
    pub spec: ExperimentSpec,
    pub points: Vec<PointResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<PowerLawFit>,
    /// Out-of-range, degenerate and verification problems, one line each.
    pub flags: Vec<String>,
    /// Excluded from numeric comparisons.
    pub wall_clock_seconds: f64,
}

impl ResultRecord {
    pub fn point_records(&self) -> Vec<PointRecord> {
        self.points
            .iter()
            .enumerate()
            .map(|(k, point)| PointRecord {
                schema: RECORD_SCHEMA.into(),
                tool_version: self.tool_version.clone(),
                spec: self.spec.clone(),
                grid_index: k,
                point: point.clone(),
            })
            .collect()
    }

    /// `(x, y)` pairs behind the fit, for plotting.
    pub fn fit_data(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(fit_xy).collect()
    }
}

fn fit_xy(point: &PointResult) -> Option<(f64, f64)> {
    match point {
        PointResult::Charlen { p, length } => length.length().map(|l| ((p - 0.5).abs(), l as f64)),
        PointResult::Sigma { half_height, sigma, .. } => Some((*half_height as f64, sigma.sigma as f64)),
        PointResult::Arms { n2, estimate, .. } => Some((*n2 as f64, estimate.mean)),
        PointResult::Length { sigma, edges, .. } => Some((*sigma as f64, edges.mean)),
        _ => None,
    }
}

// ---- point runners, shared with the acceptance battery ----

pub fn crossing_point(n: u32, p: f64, trials: u64, master_seed: u64, exec: &Executor) -> anyhow::Result<PointResult> {
    let region = Region::square(n);
    let profile = DensityProfile::homogeneous(p)?;
    let seed = SeedSpec::new(master_seed, stream_id("crossing", &[n as u64, p.to_bits()]), 0);
    let outcomes = exec.map_init(
        0..trials,
        || (Configuration::filled(region, Color::White), CrossingProbe::new()),
        |(c, probe), k| {
            c.resample(&profile, seed.with_trial(k)).expect("profile covers the rhombus");
            let black_h = probe.crosses(c, &region, Orientation::Horizontal, Color::Black);
            let white_v = probe.crosses(c, &region, Orientation::Vertical, Color::White);
            (black_h, black_h == white_v)
        },
    );
    let hits = outcomes.iter().filter(|o| o.0).count() as u64;
    let duality_violations = outcomes.iter().filter(|o| o.1).count() as u64;
    Ok(PointResult::Crossing { n, p, estimate: Estimate::from_successes(hits, trials), duality_violations })
}

pub fn charlen_point(p: f64, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<PointResult> {
    Ok(PointResult::Charlen { p, length: estimate_characteristic_length(p, params, master_seed, exec)? })
}

pub fn sigma_point(half_height: u32, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<PointResult> {
    let sigma = estimate_sigma(half_height, params, master_seed, exec)?;
    let p = gradient_p(half_height, sigma.sigma as f64);
    let (length_at_sigma, consistency) = if (p - 0.5).abs() >= MIN_DISTANCE_FROM_CRITICAL {
        let l = estimate_characteristic_length(p, params, master_seed, exec)?;
        let ratio = l.length().map(|l| l as f64 / sigma.sigma as f64);
        (Some(l), ratio)
    } else {
        (None, None)
    };
    Ok(PointResult::Sigma { half_height, sigma, length_at_sigma, consistency })
}

pub fn sigma_hat(half_height: u32, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<SigmaEstimate> {
    Ok(estimate_sigma(half_height, params, master_seed, exec)?)
}

pub fn arms_point(
    arms: u32,
    n1: u32,
    n2: u32,
    p: f64,
    trials: u64,
    master_seed: u64,
    exec: &Executor,
) -> anyhow::Result<PointResult> {
    let profile = DensityProfile::homogeneous(p)?;
    let estimate = arm_probability(arms, n1, n2, &profile, trials, arm_stream(master_seed, arms, n1, n2, &profile), exec)?;
    Ok(PointResult::Arms { arms, n1, n2, p, estimate })
}

/// Strip trials `0..strips` for half-height `N` with the default length for `sigma`.
pub fn strip_batch(
    spec: &StripSpec,
    strips: u64,
    windows: &[Region],
    master_seed: u64,
    exec: &Executor,
) -> anyhow::Result<Vec<StripAnalysis>> {
    let stream = stream_id("strip", &[spec.half_height as u64, spec.length as u64]);
    exec.map(0..strips, |k| analyze_strip(spec, SeedSpec::new(master_seed, stream, k), windows))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .context("strip trial failed")
}

/// Interior window `[2σ, T - 2σ] × rows`.
pub fn interior_window(spec: &StripSpec, sigma: u32, j_min: i64, j_max: i64) -> anyhow::Result<Region> {
    let s = 2 * sigma as i64;
    Ok(Region::new(s, spec.length as i64 - s, j_min, j_max)?)
}

fn strip_setup(half_height: u32, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<(u32, StripSpec)> {
    let sigma = sigma_hat(half_height, params, master_seed, exec)?.sigma;
    Ok((sigma, StripSpec::with_default_length(half_height, sigma)?))
}

pub fn front_point(half_height: u32, strips: u64, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<PointResult> {
    let (sigma, strip) = strip_setup(half_height, params, master_seed, exec)?;
    let n = half_height as i64;
    let window = interior_window(&strip, sigma, -n, n)?;
    let strips = strip_batch(&strip, strips, &[window], master_seed, exec)?
        .into_iter()
        .map(|a| StripResult { verified: a.verified, chirality: a.chirality, edges: a.edges, stats: a.windows[0] })
        .collect();
    Ok(PointResult::Front { half_height, sigma, strip, window, strips })
}

pub fn length_point(half_height: u32, strips: u64, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<PointResult> {
    let (sigma, strip) = strip_setup(half_height, params, master_seed, exec)?;
    let n = half_height as i64;
    let s = sigma as i64;
    let window = Region::new(2 * s, (2 + LENGTH_WINDOW_T as i64) * s, -n, n)?;
    let runs = strip_batch(&strip, strips, &[window], master_seed, exec)?;
    let unverified = runs.iter().filter(|a| !(a.verified && a.chirality)).count() as u64;
    let counts: Vec<f64> = runs.iter().map(|a| a.windows[0].map_or(0.0, |w| w.edge_count_in_window as f64)).collect();
    let edges = Estimate::from_samples(&counts);
    let critical = DensityProfile::critical();
    let pi2 = arm_probability(2, 0, sigma, &critical, LENGTH_PI2_TRIALS, arm_stream(master_seed, 2, 0, sigma, &critical), exec)?;
    let scale = LENGTH_WINDOW_T as f64 * (sigma as f64).powi(2) * pi2.mean;
    let ratio = (scale > 0.0).then(|| edges.mean / scale);
    Ok(PointResult::Length { half_height, sigma, window, edges, pi2, ratio, unverified })
}

pub fn asymmetry_point(half_height: u32, strips: u64, params: &CharLenParams, master_seed: u64, exec: &Executor) -> anyhow::Result<PointResult> {
    let (sigma, strip) = strip_setup(half_height, params, master_seed, exec)?;
    let n = half_height as i64;
    let full_window = interior_window(&strip, sigma, -n, n)?;
    let lower_window = interior_window(&strip, sigma, -n, -1)?;
    let runs = strip_batch(&strip, strips, &[full_window, lower_window], master_seed, exec)?;
    let unverified = runs.iter().filter(|a| !(a.verified && a.chirality)).count() as u64;
    let excess = |k: usize| -> Vec<f64> {
        runs.iter().map(|a| a.windows[k].map_or(0.0, |w| w.boundary_excess() as f64)).collect()
    };
    let full = Estimate::from_samples(&excess(0));
    let lower = Estimate::from_samples(&excess(1));
    Ok(PointResult::Asymmetry { half_height, sigma, full_z: finite(full.z_score()), lower_z: finite(lower.z_score()), full, lower, unverified })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

// ---- grid driver ----

fn flags_for(point: &PointResult) -> Vec<String> {
    let mut flags = Vec::new();
    match point {
        PointResult::Crossing { n, duality_violations, .. } if *duality_violations > 0 => {
            flags.push(format!("crossing n={n}: {duality_violations} duality violations"));
        }
        PointResult::Charlen { p, length } => {
            if length.length().is_none() {
                flags.push(format!("charlen p={p}: out of range (n_max {N_MAX})"));
            }
            if !length.monotone {
                flags.push(format!("charlen p={p}: non-monotone probe trace"));
            }
        }
        PointResult::Sigma { half_height, sigma, consistency, .. } => {
            if sigma.degenerate {
                flags.push(format!("sigma N={half_height}: degenerate"));
            }
            if consistency.is_none() {
                flags.push(format!("sigma N={half_height}: no consistency check (length out of range or p too close to 1/2)"));
            }
        }
        PointResult::Quasimult { result, .. } if result.ratio.is_none() => {
            flags.push(format!("quasimult n1={} n2={}: zero estimate, increase trials", result.n1, result.n2));
        }
        PointResult::Relation { relation } => {
            if relation.length.length().is_none() {
                flags.push(format!("relation p={}: length out of range", relation.p));
            }
            if !relation.near_critical {
                flags.push(format!("relation p={}: outside near-critical window", relation.p));
            }
        }
        PointResult::Front { half_height, strips, .. } => {
            let bad = strips.iter().filter(|s| !(s.verified && s.chirality)).count();
            if bad > 0 {
                flags.push(format!("front N={half_height}: {bad} strips failed verification"));
            }
            let empty = strips.iter().filter(|s| s.stats.is_none()).count();
            if empty > 0 {
                flags.push(format!("front N={half_height}: {empty} strips with an empty window"));
            }
        }
        PointResult::Length { half_height, unverified, .. } | PointResult::Asymmetry { half_height, unverified, .. }
            if *unverified > 0 =>
        {
            flags.push(format!("N={half_height}: {unverified} strips failed verification"));
        }
        _ => {}
    }
    flags
}

fn fit_points(points: &[PointResult]) -> (Vec<FitPoint>, Vec<String>) {
    let mut out = Vec::new();
    let mut flags = Vec::new();
    for point in points {
        match point {
            PointResult::Arms { n2, estimate, .. } => match FitPoint::from_estimate(*n2 as f64, estimate) {
                Some(fp) => out.push(fp),
                None => flags.push(format!("fit: n={n2} excluded (estimate {} below 5/trials)", estimate.mean)),
            },
            PointResult::Length { sigma, edges, .. } => match FitPoint::from_estimate(*sigma as f64, edges) {
                Some(fp) => out.push(fp),
                None => flags.push(format!("fit: sigma={sigma} excluded (no edges)")),
            },
            other => {
                if let Some((x, y)) = fit_xy(other) {
                    if x > 0.0 && y > 0.0 {
                        out.push(FitPoint::new(x, y));
                    }
                }
            }
        }
    }
    (out, flags)
}

pub fn run_experiment(spec: &ExperimentSpec) -> anyhow::Result<ResultRecord> {
    let spec = spec.clone().resolved();
    spec.validate()?;
    let start = Instant::now();
    let exec = Executor::new(spec.workers)?;
    let params = spec.charlen_params();
    let seed = spec.master_seed;
    let g = &spec.grid;
    let t = spec.trials;
    use ExperimentKind::*;
    let mut points = Vec::new();
    match spec.kind {
        Crossing => {
            for &n in &g.n {
                for &p in &g.p {
                    points.push(crossing_point(n, p, t, seed, &exec)?);
                }
            }
        }
        Charlen | NuFit => {
            for &p in &g.p {
                points.push(charlen_point(p, &params, seed, &exec)?);
            }
        }
        Sigma | SigmaFit => {
            for &n in &g.half_height {
                points.push(sigma_point(n, &params, seed, &exec)?);
            }
        }
        Arms | ArmFit => {
            for &j in &g.arms {
                for &n1 in &g.n1 {
                    for &n2 in &g.n {
                        for &p in &g.p {
                            points.push(arms_point(j, n1, n2, p, t, seed, &exec)?);
                        }
                    }
                }
            }
        }
        Quasimult => {
            for &j in &g.arms {
                for &n1 in &g.n1 {
                    for &n2 in &g.n {
                        for &p in &g.p {
                            let profile = DensityProfile::homogeneous(p)?;
                            let result = quasi_multiplicativity_ratio(j, n1, n2, &profile, t, seed, &exec)?;
                            points.push(PointResult::Quasimult { p, result });
                        }
                    }
                }
            }
        }
        Relation => {
            for &p in &g.p {
                points.push(PointResult::Relation { relation: check_scaling_relation(p, &params, t, seed, &exec)? });
            }
        }
        Front => {
            for &n in &g.half_height {
                points.push(front_point(n, t, &params, seed, &exec)?);
            }
        }
        LengthFit => {
            for &n in &g.half_height {
                points.push(length_point(n, t, &params, seed, &exec)?);
            }
        }
        Asymmetry => {
            for &n in &g.half_height {
                points.push(asymmetry_point(n, t, &params, seed, &exec)?);
            }
        }
    }
    let mut flags: Vec<String> = points.iter().flat_map(flags_for).collect();
    let fit = if matches!(spec.kind, NuFit | SigmaFit | ArmFit | LengthFit) {
        let (fp, mut fit_flags) = fit_points(&points);
        flags.append(&mut fit_flags);
        match fit_power_law(&fp) {
            Ok(fit) => Some(fit),
            Err(e) => {
                flags.push(format!("fit: {e}"));
                None
            }
        }
    } else {
        None
    };
    Ok(ResultRecord {
        schema: RESULT_SCHEMA.into(),
        tool_version: TOOL_VERSION.into(),
        spec,
        points,
        fit,
        flags,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}
