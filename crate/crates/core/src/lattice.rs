//! Triangular-lattice geometry.
//!
//! Sites are written in the basis `(1, e^{iπ/3})`: the site `(i, j)` sits at
//! the Euclidean point `(i + j/2, j·√3/2)`. Each site is the center of a
//! hexagon of the dual honeycomb, so "site" and "hexagon" are used
//! interchangeably.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Neighbor offsets in counterclockwise order, starting east.
pub const DIRECTIONS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteCoord {
    pub i: i64,
    pub j: i64,
}

impl SiteCoord {
    pub const ORIGIN: SiteCoord = SiteCoord { i: 0, j: 0 };

    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }

    /// Neighbor in direction `k` (taken mod 6) of [`DIRECTIONS`].
    #[inline]
    pub fn step(self, k: usize) -> Self {
        let (di, dj) = DIRECTIONS[k % 6];
        Self::new(self.i + di, self.j + dj)
    }

    pub fn neighbors(self) -> [SiteCoord; 6] {
        std::array::from_fn(|k| self.step(k))
    }

    pub fn is_adjacent(self, other: SiteCoord) -> bool {
        DIRECTIONS.contains(&(other.i - self.i, other.j - self.j))
    }

    /// Euclidean position of the site.
    pub fn embed<F: Real>(self) -> (F, F) {
        let i = F::from_i64(self.i).expect("coordinate representable");
        let j = F::from_i64(self.j).expect("coordinate representable");
        let half = F::lit(0.5);
        (i + j * half, j * F::lit(3.0).sqrt() * half)
    }

    /// Sup-norm in lattice coordinates; the box `S_n` is `{s : s.box_norm() <= n}`.
    pub fn box_norm(self) -> i64 {
        self.i.abs().max(self.j.abs())
    }
}

/// Returns the six neighbors of `s`.
pub fn neighbors(s: SiteCoord) -> [SiteCoord; 6] {
    s.neighbors()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
        }
    }
}

/// Parallelogram `[i_min, i_max] × [j_min, j_max]` with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub i_min: i64,
    pub i_max: i64,
    pub j_min: i64,
    pub j_max: i64,
}

impl Region {
    pub fn new(i_min: i64, i_max: i64, j_min: i64, j_max: i64) -> Result<Self> {
        let r = Self { i_min, i_max, j_min, j_max };
        if i_min > i_max || j_min > j_max {
            return Err(Error::InvalidRegion(r));
        }
        Ok(r)
    }

    /// Rhombus with `n` sites per side anchored at the origin.
    pub fn square(n: u32) -> Self {
        Self::rectangle(n, n)
    }

    /// Parallelogram with `width` columns and `height` rows anchored at the origin.
    pub fn rectangle(width: u32, height: u32) -> Self {
        assert!(width >= 1 && height >= 1, "empty parallelogram");
        Self { i_min: 0, i_max: width as i64 - 1, j_min: 0, j_max: height as i64 - 1 }
    }

    /// The box `S_n = [-n, n] × [-n, n]`.
    pub fn centered_box(n: u32) -> Self {
        let n = n as i64;
        Self { i_min: -n, i_max: n, j_min: -n, j_max: n }
    }

    pub fn is_valid(&self) -> bool {
        self.i_min <= self.i_max && self.j_min <= self.j_max
    }

    #[inline]
    pub fn width(&self) -> usize {
        (self.i_max - self.i_min + 1) as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn site_count(&self) -> usize {
        self.width() * self.height()
    }

    #[inline]
    pub fn contains(&self, s: SiteCoord) -> bool {
        s.i >= self.i_min && s.i <= self.i_max && s.j >= self.j_min && s.j <= self.j_max
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        other.i_min >= self.i_min
            && other.i_max <= self.i_max
            && other.j_min >= self.j_min
            && other.j_max <= self.j_max
    }

    /// Row-major index (by `j`, then `i`). Caller guarantees containment.
    #[inline]
    pub fn index(&self, s: SiteCoord) -> usize {
        (s.j - self.j_min) as usize * self.width() + (s.i - self.i_min) as usize
    }

    #[inline]
    pub fn site(&self, index: usize) -> SiteCoord {
        let w = self.width();
        SiteCoord::new(self.i_min + (index % w) as i64, self.j_min + (index / w) as i64)
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        (self.j_min..=self.j_max)
            .flat_map(move |j| (self.i_min..=self.i_max).map(move |i| SiteCoord::new(i, j)))
    }

    pub fn is_on_side(&self, s: SiteCoord, side: Side) -> bool {
        match side {
            Side::Left => s.i == self.i_min,
            Side::Right => s.i == self.i_max,
            Side::Bottom => s.j == self.j_min,
            Side::Top => s.j == self.j_max,
        }
    }

    pub fn boundary_sites(&self, side: Side) -> Vec<SiteCoord> {
        match side {
            Side::Left => (self.j_min..=self.j_max).map(|j| SiteCoord::new(self.i_min, j)).collect(),
            Side::Right => (self.j_min..=self.j_max).map(|j| SiteCoord::new(self.i_max, j)).collect(),
            Side::Bottom => (self.i_min..=self.i_max).map(|i| SiteCoord::new(i, self.j_min)).collect(),
            Side::Top => (self.i_min..=self.i_max).map(|i| SiteCoord::new(i, self.j_max)).collect(),
        }
    }
}

/// Returns the sites of `r` on the given side.
pub fn boundary_sites(r: &Region, side: Side) -> Vec<SiteCoord> {
    r.boundary_sites(side)
}

/// Annulus `S_{n2} \ interior(S_{n1})` between concentric parallelogram boxes.
///
/// With `n1 = 0` the origin itself is removed and its six neighbors form the
/// inner boundary, so arms are counted "from the origin hexagon" regardless of
/// the origin's own color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annulus {
    pub n1: u32,
    pub n2: u32,
}

impl Annulus {
    pub fn new(n1: u32, n2: u32) -> Result<Self> {
        if n2 <= n1 {
            return Err(Error::MalformedAnnulus { n1, n2 });
        }
        Ok(Self { n1, n2 })
    }

    pub fn outer_region(&self) -> Region {
        Region::centered_box(self.n2)
    }

    #[inline]
    pub fn contains(&self, s: SiteCoord) -> bool {
        let r = s.box_norm();
        if r > self.n2 as i64 {
            return false;
        }
        if self.n1 == 0 {
            r > 0
        } else {
            r >= self.n1 as i64
        }
    }

    #[inline]
    pub fn on_outer_boundary(&self, s: SiteCoord) -> bool {
        s.box_norm() == self.n2 as i64
    }

    pub fn site_count(&self) -> usize {
        let outer = (2 * self.n2 as usize + 1).pow(2);
        let hole = if self.n1 == 0 { 1 } else { (2 * self.n1 as usize - 1).pow(2) };
        outer - hole
    }

    /// Inner boundary as a cycle in counterclockwise order, starting at the
    /// bottom-right corner `(n1, -n1)` (or at the neighbor `(1, -1)` when `n1 = 0`).
    /// Consecutive entries, including last-to-first, are adjacent.
    ///
    /// Only sites adjacent to the hole belong to it. The ring corners
    /// `(n1, n1)` and `(-n1, -n1)` are left out: their two ring neighbors are
    /// adjacent to each other, so the corners sit in a pocket off the cycle.
    pub fn inner_cycle(&self) -> Vec<SiteCoord> {
        if self.n1 == 0 {
            return (0..6).map(|k| SiteCoord::ORIGIN.step(k + 5)).collect();
        }
        let n = self.n1 as i64;
        let mut cycle = Vec::with_capacity(8 * n as usize - 2);
        for j in -n..n {
            cycle.push(SiteCoord::new(n, j));
        }
        for i in (-n + 1..n).rev() {
            cycle.push(SiteCoord::new(i, n));
        }
        for j in (-n + 1..=n).rev() {
            cycle.push(SiteCoord::new(-n, j));
        }
        for i in -n + 1..n {
            cycle.push(SiteCoord::new(i, -n));
        }
        cycle
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn neighbors_of_origin() {
        let got: HashSet<_> = neighbors(SiteCoord::ORIGIN).into_iter().collect();
        let want: HashSet<_> = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]
            .into_iter()
            .map(|(i, j)| SiteCoord::new(i, j))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbors_translate() {
        let base = SiteCoord::new(2, 3);
        for (k, n) in neighbors(base).into_iter().enumerate() {
            let o = SiteCoord::ORIGIN.step(k);
            assert_eq!(n, SiteCoord::new(o.i + 2, o.j + 3));
        }
    }

    #[test]
    fn adjacency_symmetric_on_patch() {
        let patch = Region::new(-2, 2, -2, 2).unwrap();
        for s in patch.sites() {
            for t in patch.sites() {
                let st = neighbors(t).contains(&s);
                let ts = neighbors(s).contains(&t);
                assert_eq!(st, ts, "{s:?} {t:?}");
            }
            let distinct: HashSet<_> = neighbors(s).into_iter().collect();
            assert_eq!(distinct.len(), 6);
        }
    }

    #[test]
    fn neighbors_are_unit_distance() {
        for n in neighbors(SiteCoord::new(-3, 7)) {
            let (x0, y0) = SiteCoord::new(-3, 7).embed::<f64>();
            let (x1, y1) = n.embed::<f64>();
            assert!(((x1 - x0).hypot(y1 - y0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_of_small_region() {
        let r = Region::new(0, 3, 0, 2).unwrap();
        assert_eq!(
            r.boundary_sites(Side::Left),
            vec![SiteCoord::new(0, 0), SiteCoord::new(0, 1), SiteCoord::new(0, 2)]
        );
        let single = Region::new(0, 0, 0, 0).unwrap();
        for side in [Side::Left, Side::Right, Side::Top, Side::Bottom] {
            assert_eq!(single.boundary_sites(side), vec![SiteCoord::ORIGIN]);
        }
    }

    #[test]
    fn perimeter_count() {
        let r = Region::new(0, 4, 0, 4).unwrap();
        let total: usize = [Side::Left, Side::Right, Side::Top, Side::Bottom]
            .iter()
            .map(|&s| r.boundary_sites(s).len())
            .sum();
        let direct = r
            .sites()
            .filter(|s| s.i == 0 || s.i == 4 || s.j == 0 || s.j == 4)
            .count();
        assert_eq!(direct, 16);
        assert_eq!(total - 4, direct);
    }

    #[test]
    fn opposite_sides_disjoint() {
        let r = Region::new(-1, 1, 5, 6).unwrap();
        let l: HashSet<_> = r.boundary_sites(Side::Left).into_iter().collect();
        let rr: HashSet<_> = r.boundary_sites(Side::Right).into_iter().collect();
        assert!(l.is_disjoint(&rr));
        let b: HashSet<_> = r.boundary_sites(Side::Bottom).into_iter().collect();
        let t: HashSet<_> = r.boundary_sites(Side::Top).into_iter().collect();
        assert!(b.is_disjoint(&t));
    }

    #[test]
    fn invalid_region_rejected() {
        assert!(Region::new(1, 0, 0, 0).is_err());
        assert!(Annulus::new(3, 3).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let r = Region::new(-3, 4, 2, 9).unwrap();
        for (k, s) in r.sites().enumerate() {
            assert_eq!(r.index(s), k);
            assert_eq!(r.site(k), s);
        }
    }

    #[test]
    fn inner_cycles_are_cycles() {
        for n1 in 0..5 {
            let a = Annulus::new(n1, n1 + 2).unwrap();
            let c = a.inner_cycle();
            let expected = if n1 == 0 { 6 } else { 8 * n1 as usize - 2 };
            assert_eq!(c.len(), expected);
            let distinct: HashSet<_> = c.iter().copied().collect();
            assert_eq!(distinct.len(), c.len());
            for k in 0..c.len() {
                assert!(c[k].is_adjacent(c[(k + 1) % c.len()]), "n1={n1} k={k}");
                assert!(a.contains(c[k]));
                assert!(c[k].neighbors().iter().any(|&t| t.box_norm() <= a.n1 as i64 && !a.contains(t)));
                // Induced: no chords.
                for m in k + 2..c.len() {
                    if (m + 1) % c.len() != k {
                        assert!(!c[k].is_adjacent(c[m]), "chord n1={n1} {k} {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn annulus_site_count_matches_enumeration() {
        for (n1, n2) in [(0, 1), (0, 3), (1, 3), (2, 5)] {
            let a = Annulus::new(n1, n2).unwrap();
            let counted = a.outer_region().sites().filter(|&s| a.contains(s)).count();
            assert_eq!(counted, a.site_count());
        }
    }
}
