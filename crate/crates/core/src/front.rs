//! Gradient strips and their front.
//!
//! A strip is the parallelogram `[0, T] × [-N, N]` colored under the gradient
//! profile. Column `i = 0` is forced black below the top row, so the
//! interface between the bottom-attached black cluster and the top-attached
//! white cluster starts at the top of that column. The front is extracted by
//! the usual exploration walk on hexagon edges, keeping black on the right.
//!
//! Geometry conventions: an edge is stored as its (black, white) hexagon pair
//! with `white = black + DIRECTIONS[k]`. It runs clockwise around the black
//! hexagon, from the corner shared with `black + DIRECTIONS[k+1]` to the
//! corner shared with `black + DIRECTIONS[k-1]`. Corners are stored as the
//! sum of the three hexagon centers that meet there, i.e. three times their
//! lattice coordinates.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cluster::label_clusters;
use crate::error::{Error, Result};
use crate::lattice::{Region, Side, SiteCoord, DIRECTIONS};
use crate::profile::{sample_configuration, Color, Configuration, DensityProfile, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripSpec {
    /// `N`.
    pub half_height: u32,
    /// `T`: the strip spans columns `0..=T`.
    pub length: u32,
    pub seed_column: bool,
}

/// `N^{4/7}`, the scale the default strip geometry is expressed in.
pub fn natural_scale(half_height: u32) -> f64 {
    (half_height as f64).powf(4.0 / 7.0)
}

impl StripSpec {
    pub fn new(half_height: u32, length: u32, seed_column: bool) -> Result<Self> {
        if half_height < 16 {
            return Err(Error::InvalidParameter(format!("strip half-height {half_height} below 16")));
        }
        let min_length = (4.0 * natural_scale(half_height)).ceil() as u32;
        if length < min_length {
            return Err(Error::InvalidParameter(format!(
                "strip length {length} below 4 N^(4/7) = {min_length}"
            )));
        }
        Ok(Self { half_height, length, seed_column })
    }

    /// Seeded strip of length `max(20 σ, 8 N^{4/7})`.
    pub fn with_default_length(half_height: u32, sigma: u32) -> Result<Self> {
        let length = (20 * sigma).max((8.0 * natural_scale(half_height)).ceil() as u32);
        Self::new(half_height, length, true)
    }

    pub fn region(&self) -> Region {
        let n = self.half_height as i64;
        Region { i_min: 0, i_max: self.length as i64, j_min: -n, j_max: n }
    }

    pub fn profile(&self) -> DensityProfile {
        DensityProfile::Gradient { half_height: self.half_height }
    }
}

/// Gradient sample of the strip, with the seed column forced if requested.
pub fn sample_strip(spec: &StripSpec, seed: SeedSpec) -> Result<Configuration> {
    let mut c = sample_configuration(spec.region(), &spec.profile(), seed)?;
    if spec.seed_column {
        let n = spec.half_height as i64;
        for j in -n..n {
            c.set(SiteCoord::new(0, j), Color::Black);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrontEdge {
    pub black: SiteCoord,
    pub white: SiteCoord,
}

impl FrontEdge {
    /// Direction index `k` with `white = black + DIRECTIONS[k]`.
    pub fn direction(&self) -> usize {
        let d = (self.white.i - self.black.i, self.white.j - self.black.j);
        DIRECTIONS.iter().position(|&x| x == d).expect("front edge joins adjacent hexagons")
    }

    pub fn start(&self) -> Corner {
        let k = self.direction();
        Corner::of(self.black, self.white, self.black.step(k + 1))
    }

    pub fn end(&self) -> Corner {
        let k = self.direction();
        Corner::of(self.black, self.white, self.black.step(k + 5))
    }

    /// Twice the lattice coordinates of the edge midpoint.
    fn doubled_midpoint(&self) -> (i64, i64) {
        (self.black.i + self.white.i, self.black.j + self.white.j)
    }
}

/// Hexagon corner, stored as three times its lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Corner {
    pub i3: i64,
    pub j3: i64,
}

impl Corner {
    fn of(a: SiteCoord, b: SiteCoord, c: SiteCoord) -> Self {
        Self { i3: a.i + b.i + c.i, j3: a.j + b.j + c.j }
    }

    /// Horizontal lattice coordinate `i`.
    pub fn i(&self) -> f64 {
        self.i3 as f64 / 3.0
    }

    /// Row coordinate `j`.
    pub fn j(&self) -> f64 {
        self.j3 as f64 / 3.0
    }

    pub fn euclidean(&self) -> (f64, f64) {
        let (i, j) = (self.i(), self.j());
        (i + 0.5 * j, j * 3f64.sqrt() / 2.0)
    }

    fn in_window(&self, w: &Region) -> bool {
        let inside = |v3: i64, lo: i64, hi: i64| 6 * lo - 3 <= 2 * v3 && 2 * v3 <= 6 * hi + 3;
        inside(self.i3, w.i_min, w.i_max) && inside(self.j3, w.j_min, w.j_max)
    }
}

/// The front as an ordered walk of directed hexagon edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPath {
    pub edges: Vec<FrontEdge>,
}

impl FrontPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Corner sequence: the start of the first edge, then every edge's end.
    pub fn corners(&self) -> Vec<Corner> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        if let Some(first) = self.edges.first() {
            out.push(first.start());
        }
        out.extend(self.edges.iter().map(FrontEdge::end));
        out
    }

    pub fn euclidean_vertices(&self) -> Vec<(f64, f64)> {
        self.corners().iter().map(Corner::euclidean).collect()
    }

    /// Every edge joins a black hexagon (on the right) to a white one (on the
    /// left) and consecutive edges share a corner.
    pub fn check_chirality(&self, c: &Configuration) -> bool {
        let n = c.region().j_max;
        let colors_ok = self.edges.iter().all(|e| {
            e.black.is_adjacent(e.white) && hex_is_black(c, n, e.black) && !hex_is_black(c, n, e.white)
        });
        colors_ok && self.edges.windows(2).all(|w| w[0].end() == w[1].start())
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.edges.len());
        self.edges.iter().all(|e| seen.insert(*e))
    }

    /// Number of times the walk passes from `i ≤ i_lo` to `i ≥ i_hi` or back.
    /// A unique crossing of the band gives 1; a bounce back across it adds 2.
    pub fn band_traversals(&self, i_lo: f64, i_hi: f64) -> u32 {
        let mut side: Option<bool> = None;
        let mut count = 0;
        for corner in self.corners() {
            let x = corner.i();
            let now = if x <= i_lo {
                Some(false)
            } else if x >= i_hi {
                Some(true)
            } else {
                None
            };
            if let Some(now) = now {
                if side.is_some_and(|s| s != now) {
                    count += 1;
                }
                side = Some(now);
            }
        }
        count
    }
}

/// Colors outside the sampled strip: black below it, white above it, and at
/// `i < 0` black below the top row. Beyond the right edge rows below 0 are black.
#[inline]
fn hex_is_black(c: &Configuration, half_height: i64, s: SiteCoord) -> bool {
    if c.region().contains(s) {
        return c.is_black(s);
    }
    if s.j > half_height {
        false
    } else if s.j < -half_height {
        true
    } else if s.i < 0 {
        s.j < half_height
    } else {
        s.j < 0
    }
}

fn strip_bounds(c: &Configuration) -> Result<(i64, i64)> {
    let r = c.region();
    if r.i_min != 0 || r.j_min != -r.j_max || r.j_max < 1 || r.i_max < 1 {
        return Err(Error::InvalidParameter(format!("{r:?} is not a strip [0, T] x [-N, N]")));
    }
    Ok((r.j_max, r.i_max))
}

/// Extracts the front of a seeded strip configuration.
pub fn extract_front(c: &Configuration) -> Result<FrontPath> {
    let (n, t) = strip_bounds(c)?;
    if (-n..n).any(|j| !c.is_black(SiteCoord::new(0, j))) || c.is_black(SiteCoord::new(0, n)) {
        return Err(Error::MissingSeedColumn);
    }
    let budget = 4 * c.region().site_count();
    let mut black = SiteCoord::new(0, n - 1);
    let mut white = SiteCoord::new(0, n);
    let mut k = 1usize;
    let mut edges = vec![FrontEdge { black, white }];
    while black.i < t && white.i < t {
        let ahead = black.step(k + 5);
        if hex_is_black(c, n, ahead) {
            black = ahead;
            k = (k + 1) % 6;
        } else {
            white = ahead;
            k = (k + 5) % 6;
        }
        edges.push(FrontEdge { black, white });
        if edges.len() > budget {
            return Err(Error::StepBudgetExceeded { budget });
        }
    }
    Ok(FrontPath { edges })
}

/// Checks every edge against an independent cluster labeling: the black side
/// must be in a cluster touching the bottom row, the white side in a cluster
/// touching the top row.
pub fn verify_front(path: &FrontPath, c: &Configuration) -> bool {
    if path.is_empty() {
        return false;
    }
    let region = *c.region();
    let (Ok(black), Ok(white)) = (label_clusters(c, &region, Color::Black), label_clusters(c, &region, Color::White))
    else {
        return false;
    };
    let bottom = black.labels_on_side(Side::Bottom);
    let top = white.labels_on_side(Side::Top);
    path.edges.iter().all(|e| {
        e.black.is_adjacent(e.white)
            && black.label(e.black).is_some_and(|l| bottom.binary_search(&l).is_ok())
            && white.label(e.white).is_some_and(|l| top.binary_search(&l).is_ok())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontStats {
    /// Largest `|j|` over front corners in the window (lattice rows).
    pub max_abs_y: f64,
    /// Front edges whose midpoint lies in the window.
    pub edge_count_in_window: u64,
    /// Largest leftward excursion `i(s) - i(s')`, `s < s'`, over corners in the window.
    pub max_backtrack: f64,
    /// Distinct black hexagons in the window adjacent to the front.
    pub boundary_black: u64,
    /// Distinct white hexagons in the window adjacent to the front.
    pub boundary_white: u64,
    pub window: Region,
}

impl FrontStats {
    pub fn boundary_excess(&self) -> i64 {
        self.boundary_black as i64 - self.boundary_white as i64
    }

    pub fn boundary_total(&self) -> u64 {
        self.boundary_black + self.boundary_white
    }
}

/// Measures the front inside `window` (a sub-parallelogram of the strip).
/// Corners and edge midpoints count as inside when they fall within half a
/// lattice unit of the window's site range.
pub fn front_statistics(path: &FrontPath, c: &Configuration, window: &Region) -> Result<FrontStats> {
    if !c.region().contains_region(window) {
        return Err(Error::RegionNotContained { inner: *window, outer: *c.region() });
    }
    let mid_inside = |e: &FrontEdge| {
        let (mi, mj) = e.doubled_midpoint();
        2 * window.i_min - 1 <= mi && mi <= 2 * window.i_max + 1 && 2 * window.j_min - 1 <= mj && mj <= 2 * window.j_max + 1
    };
    let edge_count = path.edges.iter().filter(|e| mid_inside(e)).count() as u64;
    if edge_count == 0 {
        return Err(Error::EmptyWindow);
    }

    let mut max_abs_y = 0.0f64;
    let mut max_backtrack = 0.0f64;
    let mut running_max = f64::NEG_INFINITY;
    for corner in path.corners().iter().filter(|k| k.in_window(window)) {
        max_abs_y = max_abs_y.max(corner.j().abs());
        running_max = running_max.max(corner.i());
        max_backtrack = max_backtrack.max(running_max - corner.i());
    }

    let mut black: Vec<usize> = Vec::new();
    let mut white: Vec<usize> = Vec::new();
    for e in &path.edges {
        if window.contains(e.black) {
            black.push(window.index(e.black));
        }
        if window.contains(e.white) {
            white.push(window.index(e.white));
        }
    }
    for v in [&mut black, &mut white] {
        v.sort_unstable();
        v.dedup();
    }
    Ok(FrontStats {
        max_abs_y,
        edge_count_in_window: edge_count,
        max_backtrack,
        boundary_black: black.len() as u64,
        boundary_white: white.len() as u64,
        window: *window,
    })
}

/// Result of one strip trial: sample, extract, verify, measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripAnalysis {
    pub verified: bool,
    pub chirality: bool,
    pub edges: u64,
    /// One entry per requested window; `None` when the front misses it.
    pub windows: Vec<Option<FrontStats>>,
}

pub fn analyze_strip(spec: &StripSpec, seed: SeedSpec, windows: &[Region]) -> Result<StripAnalysis> {
    let c = sample_strip(spec, seed)?;
    let path = extract_front(&c)?;
    let verified = verify_front(&path, &c);
    let chirality = path.check_chirality(&c);
    let windows = windows
        .iter()
        .map(|w| match front_statistics(&path, &c, w) {
            Ok(s) => Ok(Some(s)),
            Err(Error::EmptyWindow) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StripAnalysis { verified, chirality, edges: path.len() as u64, windows })
}
