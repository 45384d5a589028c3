//! Parameter grids given on the command line.
//!
//! A grid is a `;`-separated list of `key=values` entries. Values are either
//! comma lists (`0.40,0.44`), arithmetic ranges `start:stop:step`, or
//! geometric ranges `start:stop:*factor`; ranges include both ends when they
//! land on them. Keys: `p` (density), `n` (box or outer radius), `N`
//! (strip half-height), `n1` (inner radius), `j` (arm count).

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u32>,
    #[serde(default, rename = "N", skip_serializing_if = "Vec::is_empty")]
    pub half_height: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n1: Vec<u32>,
    #[serde(default, rename = "j", skip_serializing_if = "Vec::is_empty")]
    pub arms: Vec<u32>,
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn parse_values(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
            .collect(),
        [start, stop, step] => {
            let start: f64 = start.parse().with_context(|| format!("bad range start {start:?}"))?;
            let stop: f64 = stop.parse().with_context(|| format!("bad range stop {stop:?}"))?;
            let mut out = Vec::new();
            if let Some(factor) = step.strip_prefix('*') {
                let factor: f64 = factor.parse().with_context(|| format!("bad factor {factor:?}"))?;
                if !(factor > 1.0 && start > 0.0) {
                    bail!("geometric range needs start > 0 and factor > 1");
                }
                let mut v = start;
                while v <= stop * (1.0 + 1e-12) {
                    out.push(round12(v));
                    v *= factor;
                }
            } else {
                let step: f64 = step.parse().with_context(|| format!("bad step {step:?}"))?;
                if !(step > 0.0) {
                    bail!("range step must be positive");
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 {
                    bail!("empty range {s:?}");
                }
                out.extend((0..=count as u64).map(|k| round12(start + k as f64 * step)));
            }
            Ok(out)
        }
        _ => bail!("cannot parse values {s:?}"),
    }
}

fn to_ints(key: &str, values: Vec<f64>) -> anyhow::Result<Vec<u32>> {
    values
        .into_iter()
        .map(|v| {
            if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
                Err(anyhow!("{key} takes non-negative integers, got {v}"))
            } else {
                Ok(v as u32)
            }
        })
        .collect()
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let mut grid = Grid::default();
        for entry in s.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, values) = entry.split_once('=').ok_or_else(|| anyhow!("grid entry {entry:?} lacks '='"))?;
            let values = parse_values(values)?;
            match key.trim() {
                "p" => {
                    if let Some(p) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                        bail!("p = {p} outside [0, 1]");
                    }
                    grid.p = values;
                }
                "n" => grid.n = to_ints("n", values)?,
                "N" => grid.half_height = to_ints("N", values)?,
                "n1" => grid.n1 = to_ints("n1", values)?,
                "j" => grid.arms = to_ints("j", values)?,
                other => bail!("unknown grid key {other:?} (expected p, n, N, n1, j)"),
            }
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        let mut parts = Vec::new();
        if !self.p.is_empty() {
            parts.push(format!("p={}", self.p.iter().map(f64::to_string).collect::<Vec<_>>().join(",")));
        }
        for (key, v) in [("n", &self.n), ("N", &self.half_height), ("n1", &self.n1), ("j", &self.arms)] {
            if !v.is_empty() {
                parts.push(format!("{key}={}", join(v)));
            }
        }
        write!(f, "{}", parts.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        let g: Grid = "p=0.40:0.48:0.02; n=8:256:*2; N=64,256; j=2".parse().unwrap();
        assert_eq!(g.p, vec![0.4, 0.42, 0.44, 0.46, 0.48]);
        assert_eq!(g.n, vec![8, 16, 32, 64, 128, 256]);
        assert_eq!(g.half_height, vec![64, 256]);
        assert_eq!(g.arms, vec![2]);
        assert!(g.n1.is_empty());
    }

    #[test]
    fn display_round_trips() {
        let g: Grid = "p=0.4,0.5;n=3:9:3;n1=0".parse().unwrap();
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["p=1.5", "n=2.5", "x=1", "n", "n=5:1:1", "p=0.1:0.2:0", "n=0:8:*2"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }
}
