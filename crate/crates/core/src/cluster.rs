//! Same-color connectivity and crossing events.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::lattice::{Region, SiteCoord, Side, DIRECTIONS};
use crate::profile::{Color, Configuration, DensityProfile, SeedSpec};
use crate::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Left side to right side.
    Horizontal,
    /// Bottom side to top side.
    Vertical,
}

impl Orientation {
    pub fn sides(self) -> (Side, Side) {
        match self {
            Orientation::Horizontal => (Side::Left, Side::Right),
            Orientation::Vertical => (Side::Bottom, Side::Top),
        }
    }
}

/// Disjoint sets whose representative is always the smallest member.
#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

const UNLABELED: u32 = u32::MAX;

/// Clusters of one color in the subgraph induced by a region.
///
/// A cluster's label is the row-major index (within the region) of its
/// smallest site, so labels do not depend on traversal order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabeling {
    region: Region,
    color: Color,
    labels: Vec<u32>,
    cluster_count: usize,
}

impl ClusterLabeling {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn label(&self, s: SiteCoord) -> Option<u32> {
        if !self.region.contains(s) {
            return None;
        }
        match self.labels[self.region.index(s)] {
            UNLABELED => None,
            l => Some(l),
        }
    }

    pub fn connected(&self, a: SiteCoord, b: SiteCoord) -> bool {
        matches!((self.label(a), self.label(b)), (Some(x), Some(y)) if x == y)
    }

    /// Labels of clusters touching the given side, sorted and deduplicated.
    pub fn labels_on_side(&self, side: Side) -> Vec<u32> {
        let mut out: Vec<u32> =
            self.region.boundary_sites(side).into_iter().filter_map(|s| self.label(s)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn cluster_size(&self, label: u32) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

fn check_contained(c: &Configuration, r: &Region) -> Result<()> {
    if !c.region().contains_region(r) {
        return Err(Error::RegionNotContained { inner: *r, outer: *c.region() });
    }
    Ok(())
}

/// Labels the clusters of `color` inside `r`.
pub fn label_clusters(c: &Configuration, r: &Region, color: Color) -> Result<ClusterLabeling> {
    check_contained(c, r)?;
    let want = color.is_black();
    let n = r.site_count();
    let w = r.width();
    let mut uf = UnionFind::new(n);
    let mut member = vec![false; n];
    for (k, s) in r.sites().enumerate() {
        member[k] = c.is_black(s) == want;
    }
    // Backward neighbors in row-major order: west, south, south-east.
    for k in 0..n {
        if !member[k] {
            continue;
        }
        let col = k % w;
        if col > 0 && member[k - 1] {
            uf.union(k as u32, (k - 1) as u32);
        }
        if k >= w {
            if member[k - w] {
                uf.union(k as u32, (k - w) as u32);
            }
            if col + 1 < w && member[k - w + 1] {
                uf.union(k as u32, (k - w + 1) as u32);
            }
        }
    }
    let mut labels = vec![UNLABELED; n];
    let mut cluster_count = 0;
    for k in 0..n {
        if member[k] {
            let root = uf.find(k as u32);
            if root == k as u32 {
                cluster_count += 1;
            }
            labels[k] = root;
        }
    }
    Ok(ClusterLabeling { region: *r, color, labels, cluster_count })
}

/// Reusable flood-fill state for repeated crossing checks.
#[derive(Debug, Default, Clone)]
pub struct CrossingProbe {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl CrossingProbe {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp = vec![0; n];
            self.epoch = 0;
        }
        if self.epoch == u32::MAX {
            self.stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.stack.clear();
    }

    /// Whether a `color` cluster inside `r` joins the two opposite sides.
    /// `r` must lie inside the configuration's region.
    pub fn crosses(&mut self, c: &Configuration, r: &Region, orientation: Orientation, color: Color) -> bool {
        let (from, to) = orientation.sides();
        let want = color.is_black();
        let n = r.site_count();
        self.begin(n);
        let epoch = self.epoch;
        for s in r.boundary_sites(from) {
            if c.is_black(s) == want {
                let k = r.index(s);
                if self.stamp[k] != epoch {
                    self.stamp[k] = epoch;
                    self.stack.push(k as u32);
                }
            }
        }
        while let Some(k) = self.stack.pop() {
            let s = r.site(k as usize);
            if r.is_on_side(s, to) {
                return true;
            }
            for (di, dj) in DIRECTIONS {
                let t = SiteCoord::new(s.i + di, s.j + dj);
                if !r.contains(t) {
                    continue;
                }
                let kt = r.index(t);
                if self.stamp[kt] != epoch && c.is_black(t) == want {
                    self.stamp[kt] = epoch;
                    self.stack.push(kt as u32);
                }
            }
        }
        false
    }
}

/// Whether a `color` path inside `r` joins the two sides selected by `orientation`.
pub fn has_crossing(c: &Configuration, r: &Region, orientation: Orientation, color: Color) -> Result<bool> {
    check_contained(c, r)?;
    Ok(CrossingProbe::new().crosses(c, r, orientation, color))
}

/// Number of trials `k ∈ trials` (stream `seed.with_trial(k)`) whose sample of
/// `region` has the crossing.
pub fn crossing_count(
    region: &Region,
    profile: &DensityProfile,
    orientation: Orientation,
    color: Color,
    seed: SeedSpec,
    trials: std::ops::Range<u64>,
    exec: &Executor,
) -> Result<u64> {
    profile.check_region(region)?;
    Ok(exec.count(
        trials,
        || (Configuration::filled(*region, Color::White), CrossingProbe::new()),
        |(config, probe), k| {
            config.resample(profile, seed.with_trial(k)).expect("region checked");
            probe.crosses(config, region, orientation, color)
        },
    ))
}

/// Monte Carlo estimate of the crossing probability over `trials` samples.
pub fn crossing_probability(
    region: &Region,
    profile: &DensityProfile,
    orientation: Orientation,
    color: Color,
    trials: u64,
    seed: SeedSpec,
    exec: &Executor,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let hits = crossing_count(region, profile, orientation, color, seed, 0..trials, exec)?;
    Ok(Estimate::from_successes(hits, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::sample_configuration;

    #[test]
    fn all_black_square_is_one_cluster() {
        let r = Region::square(3);
        let c = Configuration::filled(r, Color::Black);
        let l = label_clusters(&c, &r, Color::Black).unwrap();
        assert_eq!(l.cluster_count(), 1);
        assert_eq!(l.cluster_size(0), 9);
        assert_eq!(label_clusters(&c, &r, Color::White).unwrap().cluster_count(), 0);
    }

    #[test]
    fn isolated_site() {
        let r = Region::new(-2, 2, -2, 2).unwrap();
        let c = Configuration::from_fn(r, |s| Color::from_black(s == SiteCoord::ORIGIN));
        let l = label_clusters(&c, &r, Color::Black).unwrap();
        assert_eq!(l.cluster_count(), 1);
        assert_eq!(l.cluster_size(l.label(SiteCoord::ORIGIN).unwrap()), 1);
        assert_eq!(label_clusters(&c, &r, Color::White).unwrap().cluster_count(), 1);
    }

    // In the 2x2 rhombus every pair of sites is adjacent except (0,0)-(1,1),
    // so k black sites form one cluster unless the black set is exactly that pair.
    #[test]
    fn two_by_two_patterns_match_hand_count() {
        let r = Region::square(2);
        for mask in 0u32..16 {
            let c = Configuration::from_fn(r, |s| Color::from_black(mask >> r.index(s) & 1 == 1));
            let got = label_clusters(&c, &r, Color::Black).unwrap().cluster_count();
            let want = match mask {
                0 => 0,
                0b1001 => 2,
                _ => 1,
            };
            assert_eq!(got, want, "mask {mask:04b}");
        }
    }

    #[test]
    fn labels_are_smallest_index() {
        let r = Region::new(0, 4, 0, 1).unwrap();
        let c = Configuration::from_fn(r, |s| Color::from_black(s.i != 2));
        let l = label_clusters(&c, &r, Color::Black).unwrap();
        assert_eq!(l.cluster_count(), 2);
        assert_eq!(l.label(SiteCoord::new(1, 1)), Some(0));
        assert_eq!(l.label(SiteCoord::new(4, 1)), Some(3));
        assert!(!l.connected(SiteCoord::new(0, 0), SiteCoord::new(4, 0)));
    }

    #[test]
    fn crossing_on_uniform_regions() {
        let r = Region::rectangle(7, 4);
        let black = Configuration::filled(r, Color::Black);
        assert!(has_crossing(&black, &r, Orientation::Horizontal, Color::Black).unwrap());
        assert!(!has_crossing(&black, &r, Orientation::Horizontal, Color::White).unwrap());
    }

    #[test]
    fn crossing_requires_containment() {
        let c = Configuration::filled(Region::square(4), Color::Black);
        let outside = Region::new(0, 5, 0, 3).unwrap();
        assert!(matches!(
            has_crossing(&c, &outside, Orientation::Vertical, Color::Black),
            Err(Error::RegionNotContained { .. })
        ));
        assert!(label_clusters(&c, &outside, Color::Black).is_err());
    }

    #[test]
    fn crossing_must_stay_inside_subregion() {
        // A U-shaped black path that leaves the sub-region between its endpoints.
        let big = Region::new(0, 4, 0, 2).unwrap();
        let c = Configuration::from_fn(big, |s| Color::from_black(s.j == 2 || s.i == 0 || s.i == 4));
        let sub = Region::new(0, 4, 0, 1).unwrap();
        assert!(has_crossing(&c, &big, Orientation::Horizontal, Color::Black).unwrap());
        assert!(!has_crossing(&c, &sub, Orientation::Horizontal, Color::Black).unwrap());
    }

    #[test]
    fn unit_rhombus_enumeration_gives_one_half() {
        let r = Region::square(2);
        let hits = (0u32..16)
            .filter(|mask| {
                let c = Configuration::from_fn(r, |s| Color::from_black(mask >> r.index(s) & 1 == 1));
                has_crossing(&c, &r, Orientation::Horizontal, Color::Black).unwrap()
            })
            .count();
        assert_eq!(hits, 8);
    }

    #[test]
    fn degenerate_probability() {
        let r = Region::square(10);
        let e = crossing_probability(
            &r,
            &DensityProfile::homogeneous(1.0).unwrap(),
            Orientation::Horizontal,
            Color::Black,
            50,
            SeedSpec::new(1, 2, 0),
            &Executor::sequential(),
        )
        .unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.trials, 50);
    }

    #[test]
    fn duality_holds_per_sample() {
        let r = Region::square(12);
        let mut probe = CrossingProbe::new();
        for t in 0..300 {
            let c = sample_configuration(r, &DensityProfile::critical(), SeedSpec::new(3, 4, t)).unwrap();
            let h = probe.crosses(&c, &r, Orientation::Horizontal, Color::Black);
            let v = probe.crosses(&c, &r, Orientation::Vertical, Color::White);
            assert!(h ^ v, "trial {t}");
        }
    }

    #[test]
    fn adding_black_never_breaks_a_crossing() {
        let r = Region::rectangle(15, 9);
        let mut probe = CrossingProbe::new();
        for t in 0..200 {
            let mut c = sample_configuration(r, &DensityProfile::critical(), SeedSpec::new(9, 1, t)).unwrap();
            let before = probe.crosses(&c, &r, Orientation::Horizontal, Color::Black);
            let k = (t as usize * 37) % r.site_count();
            c.set(r.site(k), Color::Black);
            let after = probe.crosses(&c, &r, Orientation::Horizontal, Color::Black);
            assert!(!before || after);
        }
    }
}
