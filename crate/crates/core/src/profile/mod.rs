//! Density profiles and seeded colorings.

pub mod io;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Region, SiteCoord};
use crate::rng::BernoulliWord;
pub use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    #[inline]
    pub fn from_black(black: bool) -> Color {
        if black {
            Color::Black
        } else {
            Color::White
        }
    }

    #[inline]
    pub fn is_black(self) -> bool {
        self == Color::Black
    }
}

/// Probability that a site is black.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DensityProfile {
    Homogeneous { p: f64 },
    /// `p(j) = 1/2 - j/(2N)` on rows `j ∈ [-N, N]`.
    Gradient { half_height: u32 },
}

impl DensityProfile {
    pub fn homogeneous(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        Ok(DensityProfile::Homogeneous { p })
    }

    pub fn gradient(half_height: u32) -> Result<Self> {
        if half_height == 0 {
            return Err(Error::InvalidParameter("gradient half-height must be >= 1".into()));
        }
        Ok(DensityProfile::Gradient { half_height })
    }

    pub fn critical() -> Self {
        DensityProfile::Homogeneous { p: 0.5 }
    }

    fn check_row(&self, j: i64) -> Result<()> {
        match *self {
            DensityProfile::Gradient { half_height } if j.abs() > half_height as i64 => {
                Err(Error::RowOutsideProfile { row: j, half_height })
            }
            _ => Ok(()),
        }
    }

    pub fn check_region(&self, r: &Region) -> Result<()> {
        self.check_row(r.j_min)?;
        self.check_row(r.j_max)
    }

    /// Row sampler with the probability quantized to 32 bits. Gradient rows
    /// are quantized with exact integer arithmetic.
    pub fn row_sampler(&self, j: i64) -> Result<BernoulliWord> {
        self.check_row(j)?;
        Ok(match *self {
            DensityProfile::Homogeneous { p } => BernoulliWord::new(p),
            DensityProfile::Gradient { half_height } => {
                let n = half_height as u64;
                let num = ((n as i64 - j) as u64) << 32;
                let den = 2 * n;
                BernoulliWord::from_fixed((num + den / 2) / den)
            }
        })
    }
}

/// Black probability of site `s`; depends only on its row.
///
/// Generic over the number type so that gradient probabilities can be
/// evaluated exactly (for instance with a rational type).
pub fn site_probability<T>(profile: &DensityProfile, s: SiteCoord) -> Result<T>
where
    T: Num + FromPrimitive,
{
    profile.check_row(s.j)?;
    match *profile {
        DensityProfile::Homogeneous { p } => T::from_f64(p)
            .ok_or_else(|| Error::InvalidParameter(format!("probability {p} not representable"))),
        DensityProfile::Gradient { half_height } => {
            let n = half_height as i64;
            let num = T::from_i64(n - s.j).expect("row representable");
            let den = T::from_i64(2 * n).expect("half-height representable");
            Ok(num / den)
        }
    }
}

/// Bit-packed coloring of a region, rows stored bottom to top.
///
/// Bit `k` of word `w` in row `j` is the site `(i_min + 64 w + k, j)`;
/// set bits are black. Padding bits past `i_max` are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    region: Region,
    words_per_row: usize,
    bits: Vec<u64>,
    profile: Option<DensityProfile>,
    seed: Option<SeedSpec>,
}

impl Configuration {
    pub fn filled(region: Region, color: Color) -> Self {
        let words_per_row = region.width().div_ceil(64);
        let mut c = Self {
            region,
            words_per_row,
            bits: vec![0; words_per_row * region.height()],
            profile: None,
            seed: None,
        };
        if color.is_black() {
            c.bits.fill(u64::MAX);
            c.clear_padding();
        }
        c
    }

    pub fn from_fn(region: Region, mut f: impl FnMut(SiteCoord) -> Color) -> Self {
        let mut c = Self::filled(region, Color::White);
        for s in region.sites() {
            if f(s).is_black() {
                c.set(s, Color::Black);
            }
        }
        c
    }

    pub(crate) fn from_parts(
        region: Region,
        bits: Vec<u64>,
        profile: Option<DensityProfile>,
        seed: Option<SeedSpec>,
    ) -> Result<Self> {
        let words_per_row = region.width().div_ceil(64);
        if bits.len() != words_per_row * region.height() {
            return Err(Error::Format(format!(
                "expected {} words, found {}",
                words_per_row * region.height(),
                bits.len()
            )));
        }
        let mut c = Self { region, words_per_row, bits, profile, seed };
        c.clear_padding();
        Ok(c)
    }

    fn clear_padding(&mut self) {
        let rem = self.region.width() % 64;
        if rem == 0 {
            return;
        }
        let mask = (1u64 << rem) - 1;
        for row in self.bits.chunks_exact_mut(self.words_per_row) {
            *row.last_mut().expect("non-empty row") &= mask;
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn profile(&self) -> Option<&DensityProfile> {
        self.profile.as_ref()
    }

    pub fn seed(&self) -> Option<&SeedSpec> {
        self.seed.as_ref()
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    /// Packed words, row-major by `j` then `i`.
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn row_words(&self, j: i64) -> &[u64] {
        let r = (j - self.region.j_min) as usize;
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    fn locate(&self, s: SiteCoord) -> (usize, u32) {
        let col = (s.i - self.region.i_min) as usize;
        let row = (s.j - self.region.j_min) as usize;
        (row * self.words_per_row + col / 64, (col % 64) as u32)
    }

    /// Whether `s` is black. Caller guarantees `s` is inside the region.
    #[inline]
    pub fn is_black(&self, s: SiteCoord) -> bool {
        debug_assert!(self.region.contains(s), "{s:?} outside {:?}", self.region);
        let (w, b) = self.locate(s);
        (self.bits[w] >> b) & 1 == 1
    }

    #[inline]
    pub fn color(&self, s: SiteCoord) -> Color {
        Color::from_black(self.is_black(s))
    }

    pub fn get(&self, s: SiteCoord) -> Option<Color> {
        self.region.contains(s).then(|| self.color(s))
    }

    pub fn set(&mut self, s: SiteCoord, color: Color) {
        assert!(self.region.contains(s), "{s:?} outside {:?}", self.region);
        let (w, b) = self.locate(s);
        match color {
            Color::Black => self.bits[w] |= 1 << b,
            Color::White => self.bits[w] &= !(1 << b),
        }
    }

    pub fn count_black(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Same region with every color exchanged.
    pub fn flipped(&self) -> Configuration {
        let mut c = self.clone();
        for w in &mut c.bits {
            *w = !*w;
        }
        c.clear_padding();
        c.profile = None;
        c
    }

    /// Redraws every site in place from `seed` under `profile`.
    pub fn resample(&mut self, profile: &DensityProfile, seed: SeedSpec) -> Result<()> {
        profile.check_region(&self.region)?;
        let mut rng = seed.rng();
        for (r, row) in self.bits.chunks_exact_mut(self.words_per_row).enumerate() {
            let sampler = profile.row_sampler(self.region.j_min + r as i64)?;
            for w in row.iter_mut() {
                *w = sampler.draw(&mut rng);
            }
        }
        self.clear_padding();
        self.profile = Some(*profile);
        self.seed = Some(seed);
        Ok(())
    }
}

/// Independent coloring of `region`: each site black with its profile probability.
pub fn sample_configuration(
    region: Region,
    profile: &DensityProfile,
    seed: SeedSpec,
) -> Result<Configuration> {
    let mut c = Configuration::filled(region, Color::White);
    c.resample(profile, seed)?;
    Ok(c)
}
