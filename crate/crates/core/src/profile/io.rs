//! Portable configuration dumps.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! magic "GPCF" | version u16 = 1
//! i_min i64 | i_max i64 | j_min i64 | j_max i64
//! profile tag u8: 0 none, 1 homogeneous (+ p f64), 2 gradient (+ N u32)
//! seed tag u8:    0 none, 1 present (+ master u64, stream u64, trial u64)
//! word count u64 | packed words u64...   (row-major, bottom row first)
//! ```
//!
//! The ASCII form carries the same header as `#` comment lines followed by
//! one line of `0`/`1` per row, top row first.

use std::io::{self, BufRead, Read, Write};

use super::{Configuration, DensityProfile};
use crate::error::{Error, Result};
use crate::lattice::{Region, SiteCoord};
use crate::rng::SeedSpec;

const MAGIC: &[u8; 4] = b"GPCF";
const VERSION: u16 = 1;

fn io_err(e: io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_binary<W: Write>(c: &Configuration, mut out: W) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let r = c.region();
    for v in [r.i_min, r.i_max, r.j_min, r.j_max] {
        out.write_all(&v.to_le_bytes())?;
    }
    match c.profile() {
        None => out.write_all(&[0])?,
        Some(DensityProfile::Homogeneous { p }) => {
            out.write_all(&[1])?;
            out.write_all(&p.to_le_bytes())?;
        }
        Some(DensityProfile::Gradient { half_height }) => {
            out.write_all(&[2])?;
            out.write_all(&half_height.to_le_bytes())?;
        }
    }
    match c.seed() {
        None => out.write_all(&[0])?,
        Some(s) => {
            out.write_all(&[1])?;
            for v in [s.master_seed, s.stream, s.trial_index] {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.write_all(&(c.words().len() as u64).to_le_bytes())?;
    for w in c.words() {
        out.write_all(&w.to_le_bytes())?;
    }
    Ok(())
}

fn take<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    input.read_exact(&mut buf).map_err(io_err)?;
    Ok(buf)
}

fn take_u64<R: Read>(input: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(take(input)?))
}

fn take_i64<R: Read>(input: &mut R) -> Result<i64> {
    Ok(i64::from_le_bytes(take(input)?))
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Configuration> {
    if &take::<4, _>(&mut input)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(&mut input)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let region = Region::new(
        take_i64(&mut input)?,
        take_i64(&mut input)?,
        take_i64(&mut input)?,
        take_i64(&mut input)?,
    )?;
    let profile = match take::<1, _>(&mut input)?[0] {
        0 => None,
        1 => Some(DensityProfile::homogeneous(f64::from_le_bytes(take(&mut input)?))?),
        2 => Some(DensityProfile::gradient(u32::from_le_bytes(take(&mut input)?))?),
        t => return Err(Error::Format(format!("unknown profile tag {t}"))),
    };
    let seed = match take::<1, _>(&mut input)?[0] {
        0 => None,
        1 => Some(SeedSpec::new(take_u64(&mut input)?, take_u64(&mut input)?, take_u64(&mut input)?)),
        t => return Err(Error::Format(format!("unknown seed tag {t}"))),
    };
    let count = take_u64(&mut input)? as usize;
    let expected = region.width().div_ceil(64) * region.height();
    if count != expected {
        return Err(Error::Format(format!("expected {expected} words, header says {count}")));
    }
    let words = (0..count).map(|_| take_u64(&mut input)).collect::<Result<Vec<_>>>()?;
    Configuration::from_parts(region, words, profile, seed)
}

pub fn write_ascii<W: Write>(c: &Configuration, mut out: W) -> io::Result<()> {
    let r = c.region();
    writeln!(out, "# gradperc configuration v{VERSION}")?;
    writeln!(out, "# region {} {} {} {}", r.i_min, r.i_max, r.j_min, r.j_max)?;
    match c.profile() {
        None => writeln!(out, "# profile none")?,
        Some(DensityProfile::Homogeneous { p }) => writeln!(out, "# profile homogeneous {p:?}")?,
        Some(DensityProfile::Gradient { half_height }) => {
            writeln!(out, "# profile gradient {half_height}")?
        }
    }
    match c.seed() {
        None => writeln!(out, "# seed none")?,
        Some(s) => writeln!(out, "# seed {} {} {}", s.master_seed, s.stream, s.trial_index)?,
    }
    let mut line = String::with_capacity(r.width());
    for j in (r.j_min..=r.j_max).rev() {
        line.clear();
        for i in r.i_min..=r.i_max {
            line.push(if c.is_black(SiteCoord::new(i, j)) { '1' } else { '0' });
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad or missing {what}")))
}

pub fn read_ascii<R: BufRead>(input: R) -> Result<Configuration> {
    let mut region = None;
    let mut profile = None;
    let mut seed = None;
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line.map_err(io_err)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let mut f = header.split_whitespace();
            match f.next() {
                Some("region") => {
                    region = Some(Region::new(
                        parse(f.next(), "i_min")?,
                        parse(f.next(), "i_max")?,
                        parse(f.next(), "j_min")?,
                        parse(f.next(), "j_max")?,
                    )?)
                }
                Some("profile") => {
                    profile = match f.next() {
                        Some("none") => None,
                        Some("homogeneous") => {
                            Some(DensityProfile::homogeneous(parse(f.next(), "p")?)?)
                        }
                        Some("gradient") => Some(DensityProfile::gradient(parse(f.next(), "N")?)?),
                        other => return Err(Error::Format(format!("unknown profile {other:?}"))),
                    }
                }
                Some("seed") => {
                    let first = f.next();
                    seed = match first {
                        Some("none") => None,
                        _ => Some(SeedSpec::new(
                            parse(first, "master seed")?,
                            parse(f.next(), "stream")?,
                            parse(f.next(), "trial")?,
                        )),
                    }
                }
                _ => {}
            }
            continue;
        }
        rows.push(line.to_owned());
    }
    let region = region.ok_or_else(|| Error::Format("missing region header".into()))?;
    if rows.len() != region.height() {
        return Err(Error::Format(format!("expected {} rows, found {}", region.height(), rows.len())));
    }
    let mut c = Configuration::filled(region, super::Color::White);
    for (k, row) in rows.iter().enumerate() {
        let j = region.j_max - k as i64;
        if row.len() != region.width() {
            return Err(Error::Format(format!("row {j} has {} cells", row.len())));
        }
        for (d, ch) in row.chars().enumerate() {
            let s = SiteCoord::new(region.i_min + d as i64, j);
            match ch {
                '1' => c.set(s, super::Color::Black),
                '0' => {}
                other => return Err(Error::Format(format!("unexpected cell {other:?}"))),
            }
        }
    }
    Configuration::from_parts(region, c.words().to_vec(), profile, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::sample_configuration;
    use proptest::prelude::*;

    fn sample(w: i64, h: i64, seed: u64) -> Configuration {
        let r = Region::new(-3, -3 + w, -h, h).unwrap();
        let g = DensityProfile::gradient(h.max(1) as u32).unwrap();
        sample_configuration(r, &g, SeedSpec::new(seed, 1, 2)).unwrap()
    }

    proptest! {
        #[test]
        fn both_formats_roundtrip(w in 0i64..150, h in 1i64..6, seed in any::<u64>()) {
            let c = sample(w, h, seed);
            let mut bin = Vec::new();
            write_binary(&c, &mut bin).unwrap();
            prop_assert_eq!(&read_binary(bin.as_slice()).unwrap(), &c);
            let mut txt = Vec::new();
            write_ascii(&c, &mut txt).unwrap();
            prop_assert_eq!(&read_ascii(txt.as_slice()).unwrap(), &c);
        }
    }

    #[test]
    fn ascii_layout_is_top_row_first() {
        let r = Region::new(0, 2, 0, 1).unwrap();
        let c = Configuration::from_fn(r, |s| super::super::Color::from_black(s.j == 0 && s.i != 1));
        let mut txt = Vec::new();
        write_ascii(&c, &mut txt).unwrap();
        let txt = String::from_utf8(txt).unwrap();
        let rows: Vec<_> = txt.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows, vec!["000", "101"]);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        assert!(read_binary(&b"NOPE"[..]).is_err());
        let c = sample(10, 2, 1);
        let mut bin = Vec::new();
        write_binary(&c, &mut bin).unwrap();
        bin.truncate(bin.len() - 3);
        assert!(read_binary(bin.as_slice()).is_err());
        assert!(read_ascii(&b"# region 0 1 0 0\n01\n11\n"[..]).is_err());
    }
}
