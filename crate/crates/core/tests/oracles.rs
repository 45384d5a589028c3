//! Exhaustive and path-search oracles for crossings, cluster labels and arms.

use std::collections::VecDeque;

use gradperc::arms::ArmDetector;
use gradperc::cluster::{has_crossing, label_clusters, Orientation};
use gradperc::lattice::Side;
use gradperc::{Annulus, Color, Configuration, DensityProfile, Region, SeedSpec, SiteCoord};

fn config_from_mask(r: Region, mask: u64) -> Configuration {
    Configuration::from_fn(r, |s| Color::from_black(mask >> r.index(s) & 1 == 1))
}

/// Reachability by iterating a boolean adjacency matrix to a fixed point.
fn closure(r: &Region, black: impl Fn(SiteCoord) -> bool, want: bool) -> Vec<u64> {
    let sites: Vec<SiteCoord> = r.sites().collect();
    let n = sites.len();
    let member: Vec<bool> = sites.iter().map(|&s| black(s) == want).collect();
    let mut reach: Vec<u64> = (0..n).map(|k| if member[k] { 1 << k } else { 0 }).collect();
    for a in 0..n {
        for b in 0..n {
            if member[a] && member[b] && sites[a].is_adjacent(sites[b]) {
                reach[a] |= 1 << b;
            }
        }
    }
    loop {
        let mut changed = false;
        for a in 0..n {
            let mut acc = reach[a];
            for b in 0..n {
                if reach[a] >> b & 1 == 1 {
                    acc |= reach[b];
                }
            }
            if acc != reach[a] {
                reach[a] = acc;
                changed = true;
            }
        }
        if !changed {
            return reach;
        }
    }
}

fn side_mask(r: &Region, side: Side) -> u64 {
    r.sites().filter(|&s| r.is_on_side(s, side)).fold(0, |m, s| m | 1 << r.index(s))
}

#[test]
fn crossings_and_labels_match_closure_on_small_regions() {
    let shapes = [(1, 1), (2, 2), (3, 3), (2, 5), (5, 2), (3, 4), (4, 3), (2, 6), (6, 2), (1, 12), (12, 1)];
    for (w, h) in shapes {
        let r = Region::new(0, w - 1, 0, h - 1).unwrap();
        let n = r.site_count();
        assert!(n <= 12);
        let sides = [Side::Left, Side::Right, Side::Bottom, Side::Top].map(|s| side_mask(&r, s));
        for mask in 0u64..(1 << n) {
            let c = config_from_mask(r, mask);
            for color in [Color::Black, Color::White] {
                let reach = closure(&r, |s| c.is_black(s), color.is_black());
                let crosses = |from: u64, to: u64| (0..n).any(|k| from >> k & 1 == 1 && reach[k] & to != 0);
                let h_expected = crosses(sides[0], sides[1]);
                let v_expected = crosses(sides[2], sides[3]);
                assert_eq!(has_crossing(&c, &r, Orientation::Horizontal, color).unwrap(), h_expected, "{w}x{h} {mask:b}");
                assert_eq!(has_crossing(&c, &r, Orientation::Vertical, color).unwrap(), v_expected, "{w}x{h} {mask:b}");

                let labels = label_clusters(&c, &r, color).unwrap();
                let sites: Vec<SiteCoord> = r.sites().collect();
                for a in 0..n {
                    for b in 0..n {
                        assert_eq!(labels.connected(sites[a], sites[b]), reach[a] >> b & 1 == 1, "{mask:b} {a} {b}");
                    }
                }
            }
        }
    }
}

#[test]
fn rhombus_duality_holds_exhaustively() {
    for n in 1..=3 {
        let r = Region::square(n);
        for mask in 0u64..(1 << r.site_count()) {
            let c = config_from_mask(r, mask);
            let black_h = has_crossing(&c, &r, Orientation::Horizontal, Color::Black).unwrap();
            let white_v = has_crossing(&c, &r, Orientation::Vertical, Color::White).unwrap();
            assert_ne!(black_h, white_v, "n={n} {mask:b}");
        }
    }
}

/// Annulus sites in a fixed order, the inner boundary sorted by angle, and
/// adjacency lists, all built from the definitions.
struct AnnulusGraph {
    sites: Vec<SiteCoord>,
    adj: Vec<Vec<usize>>,
    outer: Vec<bool>,
    inner: Vec<usize>,
}

impl AnnulusGraph {
    fn new(a: &Annulus) -> Self {
        let n2 = a.n2 as i64;
        let n1 = a.n1 as i64;
        let norm = |s: SiteCoord| s.i.abs().max(s.j.abs());
        let sites: Vec<SiteCoord> = (-n2..=n2)
            .flat_map(|j| (-n2..=n2).map(move |i| SiteCoord::new(i, j)))
            .filter(|&s| if n1 == 0 { norm(s) > 0 } else { norm(s) >= n1 })
            .collect();
        let adj = sites
            .iter()
            .map(|&s| (0..sites.len()).filter(|&k| s.is_adjacent(sites[k])).collect())
            .collect();
        let outer = sites.iter().map(|&s| norm(s) == n2).collect();
        let mut inner: Vec<usize> = (0..sites.len())
            .filter(|&k| {
                let s = sites[k];
                (0..6).map(|d| s.step(d)).any(|t| if n1 == 0 { norm(t) == 0 } else { norm(t) < n1 })
            })
            .collect();
        let angle = |k: usize| {
            let s = sites[k];
            let (x, y) = (s.i as f64 + 0.5 * s.j as f64, s.j as f64 * 3f64.sqrt() / 2.0);
            y.atan2(x)
        };
        inner.sort_by(|&a, &b| angle(a).partial_cmp(&angle(b)).unwrap());
        Self { sites, adj, outer, inner }
    }

    /// Inner sites of `color` joined to the outer boundary by a path of that color.
    fn crossing(&self, black: &[bool], want: bool) -> Vec<bool> {
        let n = self.sites.len();
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&k| self.outer[k] && black[k] == want).collect();
        for &k in &queue {
            seen[k] = true;
        }
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

    /// Maximum number of vertex-disjoint paths of one color from `starts` to
    /// the outer boundary (unit-capacity max flow with split vertices).
    fn disjoint_paths(&self, black: &[bool], want: bool, starts: &[usize]) -> usize {
        let n = self.sites.len();
        let (src, sink) = (2 * n, 2 * n + 1);
        let mut graph: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
        let mut to = Vec::new();
        let mut cap = Vec::new();
        let mut add = |graph: &mut Vec<Vec<usize>>, u: usize, v: usize| {
            graph[u].push(to.len());
            to.push(v);
            cap.push(1i32);
            graph[v].push(to.len());
            to.push(u);
            cap.push(0);
        };
        for k in (0..n).filter(|&k| black[k] == want) {
            add(&mut graph, 2 * k, 2 * k + 1);
            for &t in self.adj[k].iter().filter(|&&t| black[t] == want) {
                add(&mut graph, 2 * k + 1, 2 * t);
            }
            if self.outer[k] {
                add(&mut graph, 2 * k + 1, sink);
            }
        }
        for &s in starts {
            add(&mut graph, src, 2 * s);
        }
        let mut flow = 0;
        loop {
            let mut prev: Vec<Option<usize>> = vec![None; 2 * n + 2];
            let mut queue = VecDeque::from([src]);
            let mut found = false;
            while let Some(u) = queue.pop_front() {
                for &e in &graph[u] {
                    let v = to[e];
                    if cap[e] > 0 && v != src && prev[v].is_none() {
                        prev[v] = Some(e);
                        if v == sink {
                            found = true;
                            break;
                        }
                        queue.push_back(v);
                    }
                }
                if found {
                    break;
                }
            }
            if !found {
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

    fn two_arms(&self, black: &[bool]) -> bool {
        let b = self.crossing(black, true);
        let w = self.crossing(black, false);
        let has = |reach: &[bool], want: bool| self.inner.iter().any(|&k| black[k] == want && reach[k]);
        has(&b, true) && has(&w, false)
    }

    /// Four disjoint arms BWBW: some cyclically interleaved quadruple of
    /// inner sites b1 < w1 < b2 < w2 admits two disjoint black and two
    /// disjoint white paths to the outer boundary.
    fn four_arms(&self, black: &[bool]) -> bool {
        let b = self.crossing(black, true);
        let w = self.crossing(black, false);
        let m = self.inner.len();
        let cand = |want: bool, reach: &[bool]| -> Vec<usize> {
            (0..m).filter(|&p| black[self.inner[p]] == want && reach[self.inner[p]]).collect()
        };
        let (bs, ws) = (cand(true, &b), cand(false, &w));
        if bs.len() < 2 || ws.len() < 2 {
            return false;
        }
        for x in 0..bs.len() {
            for y in x + 1..bs.len() {
                let (b1, b2) = (bs[x], bs[y]);
                let between = ws.iter().filter(|&&p| b1 < p && p < b2).count();
                let outside = ws.len() - between;
                if between == 0 || outside == 0 {
                    continue;
                }
                if self.disjoint_paths(black, true, &[self.inner[b1], self.inner[b2]]) < 2 {
                    continue;
                }
                for &w1 in ws.iter().filter(|&&p| b1 < p && p < b2) {
                    for &w2 in ws.iter().filter(|&&p| p < b1 || p > b2) {
                        if self.disjoint_paths(black, false, &[self.inner[w1], self.inner[w2]]) == 2 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn check_detector(a: &Annulus, g: &AnnulusGraph, c: &Configuration, det: &mut ArmDetector) {
    let black: Vec<bool> = g.sites.iter().map(|&s| c.is_black(s)).collect();
    assert_eq!(det.detect(c, a, 2), g.two_arms(&black), "j=2 {a:?}");
    if det.detect(c, a, 4) != g.four_arms(&black) {
        let n2 = a.n2 as i64;
        for j in (-n2..=n2).rev() {
            let row: String = (-n2..=n2).map(|i| if c.is_black(SiteCoord::new(i, j)) { 'B' } else { '.' }).collect();
            eprintln!("{}{row}", " ".repeat((j + n2) as usize));
        }
        eprintln!("{:?}", det.crossing_sequence(c, a));
        panic!("j=4 mismatch {a:?} detector={}", det.detect(c, a, 4));
    }
}

#[test]
fn arm_detector_matches_path_search_on_random_samples() {
    let mut det = ArmDetector::new();
    for (n1, n2) in [(1, 3), (0, 3)] {
        let a = Annulus::new(n1, n2).unwrap();
        let g = AnnulusGraph::new(&a);
        let mut c = Configuration::filled(a.outer_region(), Color::White);
        let mut four = 0;
        for t in 0..10_000 {
            c.resample(&DensityProfile::critical(), SeedSpec::new(2024, n1 as u64, t)).unwrap();
            check_detector(&a, &g, &c, &mut det);
            four += det.detect(&c, &a, 4) as u32;
        }
        assert!(four > 100, "too few four-arm samples to be informative: {four}");
    }
}

#[test]
fn arm_detector_matches_path_search_exhaustively() {
    // Annulus (1, 2) has 24 sites; four outer corners are fixed, the other 20 enumerated.
    let a = Annulus::new(1, 2).unwrap();
    let g = AnnulusGraph::new(&a);
    let fixed = [(SiteCoord::new(2, 2), true), (SiteCoord::new(-2, -2), false), (SiteCoord::new(2, -2), true), (SiteCoord::new(-2, 2), false)];
    let free: Vec<SiteCoord> = g.sites.iter().copied().filter(|s| fixed.iter().all(|f| f.0 != *s)).collect();
    assert_eq!(free.len(), 20);
    let region = a.outer_region();
    let mut det = ArmDetector::new();
    let mut c = Configuration::filled(region, Color::White);
    for &(s, b) in &fixed {
        c.set(s, Color::from_black(b));
    }
    for mask in 0u32..(1 << 20) {
        for (k, &s) in free.iter().enumerate() {
            c.set(s, Color::from_black(mask >> k & 1 == 1));
        }
        check_detector(&a, &g, &c, &mut det);
    }
}
