//! Alternating arm events in annuli.
//!
//! Detection uses the cyclic color-change criterion: flood the cluster of
//! every inner-boundary site inside the annulus, keep the colors of the sites
//! whose cluster reaches the outer boundary, and count color changes around
//! the inner cycle. `j` alternating disjoint arms exist iff there are at least
//! `j` changes. Two crossing sites of one color separated on the inner cycle
//! by crossing sites of the other color are split into different sectors by
//! the latter's arms, which is what makes the arms disjoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::lattice::{Annulus, SiteCoord, DIRECTIONS};
use crate::profile::{Color, Configuration, DensityProfile, SeedSpec};
use crate::rng::stream_id;
use crate::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmEventSpec {
    pub arms: u32,
    pub annulus: Annulus,
    pub profile: DensityProfile,
}

impl ArmEventSpec {
    pub fn new(arms: u32, annulus: Annulus, profile: DensityProfile) -> Result<Self> {
        check_arms(arms)?;
        profile.check_region(&annulus.outer_region())?;
        Ok(Self { arms, annulus, profile })
    }
}

fn check_arms(arms: u32) -> Result<()> {
    match arms {
        2 | 4 => Ok(()),
        other => Err(Error::UnsupportedArmCount(other)),
    }
}

/// Number of cyclic color changes in a sequence (repeats collapse).
pub fn cyclic_color_changes(seq: &[Color]) -> usize {
    if seq.len() < 2 {
        return 0;
    }
    (0..seq.len()).filter(|&k| seq[k] != seq[(k + 1) % seq.len()]).count()
}

/// Reusable scratch space for arm detection.
#[derive(Debug, Default, Clone)]
pub struct ArmDetector {
    mark: Vec<u32>,
    base: u32,
    reached: Vec<bool>,
    stack: Vec<u32>,
    cycle: Vec<SiteCoord>,
    cycle_for: Option<Annulus>,
}

impl ArmDetector {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, a: &Annulus) {
        let n = a.outer_region().site_count();
        if self.mark.len() < n {
            self.mark = vec![0; n];
            self.base = 0;
        }
        if self.cycle_for != Some(*a) {
            self.cycle = a.inner_cycle();
            self.cycle_for = Some(*a);
        }
        if self.base > u32::MAX - 2 * self.cycle.len() as u32 - 2 {
            self.mark.fill(0);
            self.base = 0;
        }
        self.reached.clear();
    }

    fn finish(&mut self) {
        self.base += self.reached.len() as u32 + 1;
    }

    /// Whether the cluster of `s` inside the annulus reaches the outer boundary.
    /// Floods stop at the first outer-boundary site; a later flood that runs
    /// into a stopped one inherits its answer.
    fn flood(&mut self, c: &Configuration, a: &Annulus, s: SiteCoord) -> bool {
        let region = a.outer_region();
        let k = region.index(s);
        let m = self.mark[k];
        if m > self.base {
            return self.reached[(m - self.base - 1) as usize];
        }
        let id = self.reached.len();
        self.reached.push(false);
        let stamp = self.base + id as u32 + 1;
        self.mark[k] = stamp;
        if a.on_outer_boundary(s) {
            self.reached[id] = true;
            return true;
        }
        let want = c.is_black(s);
        self.stack.clear();
        self.stack.push(k as u32);
        while let Some(k) = self.stack.pop() {
            let s = region.site(k as usize);
            for (di, dj) in DIRECTIONS {
                let t = SiteCoord::new(s.i + di, s.j + dj);
                if !a.contains(t) || c.is_black(t) != want {
                    continue;
                }
                let kt = region.index(t);
                let m = self.mark[kt];
                if m > self.base {
                    if m != stamp && self.reached[(m - self.base - 1) as usize] {
                        self.reached[id] = true;
                        return true;
                    }
                    continue;
                }
                self.mark[kt] = stamp;
                if a.on_outer_boundary(t) {
                    self.reached[id] = true;
                    return true;
                }
                self.stack.push(kt as u32);
            }
        }
        false
    }

    /// Colors of the crossing-cluster members along the inner cycle
    /// (`None` for sites whose cluster stays inside).
    pub fn crossing_sequence(&mut self, c: &Configuration, a: &Annulus) -> Vec<Option<Color>> {
        self.prepare(a);
        let cycle = std::mem::take(&mut self.cycle);
        let seq = cycle
            .iter()
            .map(|&s| self.flood(c, a, s).then(|| c.color(s)))
            .collect();
        self.cycle = cycle;
        self.finish();
        seq
    }

    /// Detector proper. The configuration must cover the annulus' outer box.
    pub fn detect(&mut self, c: &Configuration, a: &Annulus, arms: u32) -> bool {
        if arms == 2 {
            return self.detect_two(c, a);
        }
        let seq: Vec<Color> = self.crossing_sequence(c, a).into_iter().flatten().collect();
        cyclic_color_changes(&seq) >= arms as usize
    }

    fn detect_two(&mut self, c: &Configuration, a: &Annulus) -> bool {
        self.prepare(a);
        let mut found = [false; 2];
        let mut hit = false;
        for idx in 0..self.cycle.len() {
            let s = self.cycle[idx];
            let slot = c.is_black(s) as usize;
            if found[slot] {
                continue;
            }
            if self.flood(c, a, s) {
                found[slot] = true;
                if found[1 - slot] {
                    hit = true;
                    break;
                }
            }
        }
        self.finish();
        hit
    }
}

fn check_cover(c: &Configuration, a: &Annulus) -> Result<()> {
    let outer = a.outer_region();
    if !c.region().contains_region(&outer) {
        return Err(Error::RegionNotContained { inner: outer, outer: *c.region() });
    }
    Ok(())
}

/// Whether `arms` disjoint arms of alternating colors cross `a`.
pub fn detect_alternating_arms(c: &Configuration, a: &Annulus, arms: u32) -> Result<bool> {
    check_arms(arms)?;
    Annulus::new(a.n1, a.n2)?;
    check_cover(c, a)?;
    Ok(ArmDetector::new().detect(c, a, arms))
}

/// Per-trial arm indicators for trials `range` (stream `seed.with_trial(k)`).
pub fn arm_indicators(
    spec: &ArmEventSpec,
    seed: SeedSpec,
    range: std::ops::Range<u64>,
    exec: &Executor,
) -> Vec<bool> {
    let region = spec.annulus.outer_region();
    exec.map_init(
        range,
        || (Configuration::filled(region, Color::White), ArmDetector::new()),
        |(config, det), k| {
            config.resample(&spec.profile, seed.with_trial(k)).expect("profile checked");
            det.detect(config, &spec.annulus, spec.arms)
        },
    )
}

/// Monte Carlo estimate of `P(A_j(n1, n2))` under `profile`.
pub fn arm_probability(
    arms: u32,
    n1: u32,
    n2: u32,
    profile: &DensityProfile,
    trials: u64,
    seed: SeedSpec,
    exec: &Executor,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let spec = ArmEventSpec::new(arms, Annulus::new(n1, n2)?, *profile)?;
    let hits = arm_indicators(&spec, seed, 0..trials, exec).into_iter().filter(|&b| b).count();
    Ok(Estimate::from_successes(hits as u64, trials))
}

/// Stream used for `π_j(n1, n2)` estimates under a given master seed, so
/// that different experiments asking for the same quantity share samples.
pub fn arm_stream(master_seed: u64, arms: u32, n1: u32, n2: u32, profile: &DensityProfile) -> SeedSpec {
    let profile_key = match *profile {
        DensityProfile::Homogeneous { p } => p.to_bits(),
        DensityProfile::Gradient { half_height } => u64::MAX - half_height as u64,
    };
    SeedSpec::new(
        master_seed,
        stream_id("arms", &[arms as u64, n1 as u64, n2 as u64, profile_key]),
        0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiMultiplicativity {
    pub arms: u32,
    pub n1: u32,
    pub n2: u32,
    /// `π_j(0, n1/2)`.
    pub inner: Estimate,
    /// `π_j(2 n1, n2)`.
    pub outer: Estimate,
    /// `π_j(0, n2)`.
    pub whole: Estimate,
    /// `inner · outer / whole`; `None` when `whole` is zero (increase trials).
    pub ratio: Option<f64>,
}

/// `[π_j(0, n1/2) · π_j(2 n1, n2)] / π_j(0, n2)`.
pub fn quasi_multiplicativity_ratio(
    arms: u32,
    n1: u32,
    n2: u32,
    profile: &DensityProfile,
    trials: u64,
    master_seed: u64,
    exec: &Executor,
) -> Result<QuasiMultiplicativity> {
    if n1 < 2 || 2 * n1 >= n2 {
        return Err(Error::InvalidParameter(format!(
            "quasi-multiplicativity needs 2 <= n1 and 2 n1 < n2, got n1={n1} n2={n2}"
        )));
    }
    let est = |a: u32, b: u32| {
        arm_probability(arms, a, b, profile, trials, arm_stream(master_seed, arms, a, b, profile), exec)
    };
    let inner = est(0, n1 / 2)?;
    let outer = est(2 * n1, n2)?;
    let whole = est(0, n2)?;
    let ratio = (whole.mean > 0.0).then(|| inner.mean * outer.mean / whole.mean);
    Ok(QuasiMultiplicativity { arms, n1, n2, inner, outer, whole, ratio })
}
