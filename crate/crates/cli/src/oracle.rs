//! Brute-force references for the small-instance checks of the battery.
//!
//! Crossings and cluster connectivity are checked against the transitive
//! closure of the adjacency relation; arm events against breadth-first
//! search (two arms) and vertex-disjoint path search by unit-capacity max
//! flow (four arms).

use std::collections::VecDeque;

use gradperc::arms::ArmDetector;
use gradperc::cluster::{has_crossing, label_clusters, Orientation};
use gradperc::lattice::Side;
use gradperc::{Annulus, Color, Configuration, DensityProfile, Region, SeedSpec, SiteCoord};

/// Disagreement counts from one oracle sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub configurations: u64,
    pub mismatches: u64,
}

impl OracleReport {
    fn add(&mut self, other: OracleReport) {
        self.configurations += other.configurations;
        self.mismatches += other.mismatches;
    }
}

fn closure(sites: &[SiteCoord], member: &[bool]) -> Vec<u64> {
    let n = sites.len();
    let mut reach: Vec<u64> = (0..n)
        .map(|a| {
            if !member[a] {
                return 0;
            }
            (0..n).filter(|&b| member[b] && (a == b || sites[a].is_adjacent(sites[b]))).fold(0, |m, b| m | 1 << b)
        })
        .collect();
    loop {
        let mut changed = false;
        for a in 0..n {
            let acc = (0..n).filter(|&b| reach[a] >> b & 1 == 1).fold(reach[a], |m, b| m | reach[b]);
            changed |= acc != reach[a];
            reach[a] = acc;
        }
        if !changed {
            return reach;
        }
    }
}

/// Every coloring of every listed `width × height` parallelogram (at most 12 sites).
pub fn check_crossings_exhaustively(shapes: &[(u32, u32)]) -> OracleReport {
    let mut report = OracleReport::default();
    for &(w, h) in shapes {
        let r = Region::rectangle(w, h);
        let sites: Vec<SiteCoord> = r.sites().collect();
        let n = sites.len();
        assert!(n <= 12, "exhaustive check limited to 12 sites");
        let side = |s: Side| sites.iter().enumerate().filter(|(_, &x)| r.is_on_side(x, s)).fold(0u64, |m, (k, _)| m | 1 << k);
        let (left, right, bottom, top) = (side(Side::Left), side(Side::Right), side(Side::Bottom), side(Side::Top));
        for mask in 0u64..(1 << n) {
            let c = Configuration::from_fn(r, |s| Color::from_black(mask >> r.index(s) & 1 == 1));
            report.configurations += 1;
            let mut ok = true;
            for color in [Color::Black, Color::White] {
                let member: Vec<bool> = (0..n).map(|k| (mask >> k & 1 == 1) == color.is_black()).collect();
                let reach = closure(&sites, &member);
                let joins = |from: u64, to: u64| (0..n).any(|k| from >> k & 1 == 1 && reach[k] & to != 0);
                ok &= has_crossing(&c, &r, Orientation::Horizontal, color).unwrap() == joins(left, right);
                ok &= has_crossing(&c, &r, Orientation::Vertical, color).unwrap() == joins(bottom, top);
                let labels = label_clusters(&c, &r, color).unwrap();
                for a in 0..n {
                    for b in 0..n {
                        ok &= labels.connected(sites[a], sites[b]) == (reach[a] >> b & 1 == 1);
                    }
                }
            }
            report.mismatches += !ok as u64;
        }
    }
    report
}

/// Annulus graph built from the definitions, with the inner boundary (sites
/// adjacent to the hole) sorted by angle.
pub struct AnnulusGraph {
    pub annulus: Annulus,
    pub sites: Vec<SiteCoord>,
    adj: Vec<Vec<usize>>,
    outer: Vec<bool>,
    inner: Vec<usize>,
}

impl AnnulusGraph {
    pub fn new(annulus: Annulus) -> Self {
        let (n1, n2) = (annulus.n1 as i64, annulus.n2 as i64);
        let norm = |s: SiteCoord| s.i.abs().max(s.j.abs());
        let in_hole = |s: SiteCoord| if n1 == 0 { norm(s) == 0 } else { norm(s) < n1 };
        let sites: Vec<SiteCoord> = (-n2..=n2)
            .flat_map(|j| (-n2..=n2).map(move |i| SiteCoord::new(i, j)))
            .filter(|&s| !in_hole(s))
            .collect();
        let adj = sites.iter().map(|&s| (0..sites.len()).filter(|&k| s.is_adjacent(sites[k])).collect()).collect();
        let outer = sites.iter().map(|&s| norm(s) == n2).collect();
        let mut inner: Vec<usize> = (0..sites.len()).filter(|&k| sites[k].neighbors().into_iter().any(in_hole)).collect();
        let angle = |k: usize| {
            let (x, y) = sites[k].embed::<f64>();
            y.atan2(x)
        };
        inner.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
        Self { annulus, sites, adj, outer, inner }
    }

    fn reaching_outer(&self, black: &[bool], want: bool) -> Vec<bool> {
        let mut seen: Vec<bool> = (0..self.sites.len()).map(|k| self.outer[k] && black[k] == want).collect();
        let mut queue: VecDeque<usize> = (0..self.sites.len()).filter(|&k| seen[k]).collect();
        while let Some(k) = queue.pop_front() {
            for &t in &self.adj[k] {
                if !seen[t] && black[t] == want {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Maximum number of vertex-disjoint monochromatic paths from `starts`
    /// to the outer boundary.
    fn disjoint_paths(&self, black: &[bool], want: bool, starts: &[usize]) -> usize {
        let n = self.sites.len();
        let (src, sink) = (2 * n, 2 * n + 1);
        let mut graph: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
        let mut to: Vec<usize> = Vec::new();
        let mut cap: Vec<i32> = Vec::new();
        let mut add = |u: usize, v: usize| {
            graph[u].push(to.len());
            to.push(v);
            cap.push(1);
            graph[v].push(to.len());
            to.push(u);
            cap.push(0);
        };
        for k in (0..n).filter(|&k| black[k] == want) {
            add(2 * k, 2 * k + 1);
            for &t in self.adj[k].iter().filter(|&&t| black[t] == want) {
                add(2 * k + 1, 2 * t);
            }
            if self.outer[k] {
                add(2 * k + 1, sink);
            }
        }
        for &s in starts {
            add(src, 2 * s);
        }
        let mut flow = 0;
        loop {
            let mut prev: Vec<Option<usize>> = vec![None; 2 * n + 2];
            let mut queue = VecDeque::from([src]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &graph[u] {
                    let v = to[e];
                    if cap[e] > 0 && v != src && prev[v].is_none() {
                        prev[v] = Some(e);
                        if v == sink {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if prev[sink].is_none() {
                return flow;
            }
            let mut v = sink;
            while let Some(e) = prev[v] {
                cap[e] -= 1;
                cap[e ^ 1] += 1;
                v = to[e ^ 1];
            }
            flow += 1;
        }
    }

    pub fn two_arms(&self, black: &[bool]) -> bool {
        [true, false].iter().all(|&want| {
            let reach = self.reaching_outer(black, want);
            self.inner.iter().any(|&k| black[k] == want && reach[k])
        })
    }

    /// Some cyclically interleaved quadruple b1 < w1 < b2 < w2 of inner sites
    /// carries two disjoint black and two disjoint white paths outward.
    pub fn four_arms(&self, black: &[bool]) -> bool {
        let candidates = |want: bool| -> Vec<usize> {
            let reach = self.reaching_outer(black, want);
            (0..self.inner.len()).filter(|&p| black[self.inner[p]] == want && reach[self.inner[p]]).collect()
        };
        let (bs, ws) = (candidates(true), candidates(false));
        if bs.len() < 2 || ws.len() < 2 {
            return false;
        }
        for x in 0..bs.len() {
            for &b2 in &bs[x + 1..] {
                let b1 = bs[x];
                let inside: Vec<usize> = ws.iter().copied().filter(|&p| b1 < p && p < b2).collect();
                let outside: Vec<usize> = ws.iter().copied().filter(|&p| p < b1 || p > b2).collect();
                if inside.is_empty() || outside.is_empty() {
                    continue;
                }
                if self.disjoint_paths(black, true, &[self.inner[b1], self.inner[b2]]) < 2 {
                    continue;
                }
                for &w1 in &inside {
                    for &w2 in &outside {
                        if self.disjoint_paths(black, false, &[self.inner[w1], self.inner[w2]]) == 2 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn agrees(&self, c: &Configuration, det: &mut ArmDetector) -> bool {
        let black: Vec<bool> = self.sites.iter().map(|&s| c.is_black(s)).collect();
        det.detect(c, &self.annulus, 2) == self.two_arms(&black) && det.detect(c, &self.annulus, 4) == self.four_arms(&black)
    }
}

/// Detector against path search on `samples` critical configurations.
pub fn check_arms_random(annulus: Annulus, samples: u64, master_seed: u64) -> OracleReport {
    let g = AnnulusGraph::new(annulus);
    let mut det = ArmDetector::new();
    let mut c = Configuration::filled(annulus.outer_region(), Color::White);
    let stream = gradperc::rng::stream_id("arm-oracle", &[annulus.n1 as u64, annulus.n2 as u64]);
    let mut report = OracleReport::default();
    for t in 0..samples {
        c.resample(&DensityProfile::critical(), SeedSpec::new(master_seed, stream, t)).expect("critical profile");
        report.configurations += 1;
        report.mismatches += !g.agrees(&c, &mut det) as u64;
    }
    report
}

/// Detector against path search on every coloring of annulus (1, 2) with its
/// four outer corners fixed (20 free sites).
pub fn check_arms_exhaustive() -> OracleReport {
    let annulus = Annulus::new(1, 2).expect("valid annulus");
    let g = AnnulusGraph::new(annulus);
    let fixed = [(SiteCoord::new(2, 2), true), (SiteCoord::new(-2, -2), false), (SiteCoord::new(2, -2), true), (SiteCoord::new(-2, 2), false)];
    let free: Vec<SiteCoord> = g.sites.iter().copied().filter(|s| fixed.iter().all(|f| f.0 != *s)).collect();
    debug_assert_eq!(free.len(), 20);
    let mut c = Configuration::filled(annulus.outer_region(), Color::White);
    for &(s, b) in &fixed {
        c.set(s, Color::from_black(b));
    }
    let mut det = ArmDetector::new();
    let mut report = OracleReport::default();
    for mask in 0u32..(1 << free.len()) {
        for (k, &s) in free.iter().enumerate() {
            c.set(s, Color::from_black(mask >> k & 1 == 1));
        }
        report.configurations += 1;
        report.mismatches += !g.agrees(&c, &mut det) as u64;
    }
    report
}

/// The whole small-instance sweep.
pub fn run_all(master_seed: u64) -> Vec<(&'static str, OracleReport)> {
    let mut arms_random = OracleReport::default();
    for (n1, n2) in [(1, 3), (0, 3)] {
        arms_random.add(check_arms_random(Annulus::new(n1, n2).expect("valid annulus"), 10_000, master_seed));
    }
    vec![
        ("crossings/labels, regions <= 12 sites", check_crossings_exhaustively(&[(3, 4), (4, 3), (2, 6), (6, 2), (3, 3), (12, 1)])),
        ("arms vs path search, random (1,3),(0,3)", arms_random),
        ("arms vs path search, exhaustive (1,2)", check_arms_exhaustive()),
    ]
}
