//! Flat `key = value` configuration text.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may not repeat.
//! Vector values are comma-separated (`dims = 64,64,64`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::Vec3;
use crate::synth::{Bump, DeformationSpec, PhantomSpec};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse(format!("config line {}: empty key", n + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("config line {}: duplicate key '{k}'", n + 1)));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&crate::error::read_text(path.as_ref())?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get_str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{v}'")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get_str(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{v}'")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn get_triple<T: FromStr + Copy>(&self, key: &str) -> Result<Option<[T; 3]>> {
        match self.get_list::<T>(key)? {
            None => Ok(None),
            Some(v) if v.len() == 3 => Ok(Some([v[0], v[1], v[2]])),
            Some(v) if v.len() == 1 => Ok(Some([v[0]; 3])),
            Some(v) => Err(Error::Parse(format!("config key '{key}': expected 1 or 3 values, got {}", v.len()))),
        }
    }

    /// Serializes in key order, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes `seed`, `dims`, `spacing`, `blobs` and `noise_sigma`.
pub fn put_phantom(cfg: &mut Config, spec: &PhantomSpec) {
    cfg.set("seed", spec.seed);
    cfg.set("dims", spec.dims.map(|d| d.to_string()).join(","));
    cfg.set("spacing", join(&spec.spacing));
    cfg.set("blobs", spec.blob_count);
    cfg.set("noise_sigma", spec.noise_sigma);
}

pub fn get_phantom(cfg: &Config, default_seed: u64) -> Result<PhantomSpec> {
    Ok(PhantomSpec {
        seed: cfg.get_or("seed", default_seed)?,
        dims: cfg.get_triple("dims")?.unwrap_or([64; 3]),
        spacing: cfg.get_triple("spacing")?.unwrap_or([1.0; 3]),
        blob_count: cfg.get_or("blobs", 24)?,
        noise_sigma: cfg.get_or("noise_sigma", 0.0)?,
    })
}

/// Writes each bump as `bump.<i> = cx,cy,cz,ax,ay,az,width`.
pub fn put_deformation(cfg: &mut Config, spec: &DeformationSpec) {
    for (i, b) in spec.bumps().iter().enumerate() {
        let mut v = Vec::with_capacity(7);
        v.extend_from_slice(&b.center);
        v.extend_from_slice(&b.amplitude);
        v.push(b.width);
        cfg.set(&format!("bump.{i}"), join(&v));
    }
}

/// Explicit `bump.<i>` entries, or `None` if there are none.
pub fn get_deformation(cfg: &Config) -> Result<Option<DeformationSpec>> {
    let mut indexed: Vec<(usize, Bump)> = Vec::new();
    for key in cfg.keys() {
        let Some(idx) = key.strip_prefix("bump.") else { continue };
        let idx: usize = idx.parse().map_err(|_| Error::Parse(format!("bad bump key '{key}'")))?;
        let v: Vec<f64> = cfg.get_list(key)?.unwrap_or_default();
        if v.len() != 7 {
            return Err(Error::Parse(format!("'{key}' needs 7 values (center, amplitude, width)")));
        }
        let c: Vec3 = [v[0], v[1], v[2]];
        let a: Vec3 = [v[3], v[4], v[5]];
        indexed.push((idx, Bump { center: c, amplitude: a, width: v[6] }));
    }
    if indexed.is_empty() {
        return Ok(None);
    }
    indexed.sort_by_key(|(i, _)| *i);
    DeformationSpec::new(indexed.into_iter().map(|(_, b)| b).collect()).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic() {
        let c = Config::parse("# comment\n\nseed = 7\nmetric=hi\ndims = 4, 5 ,6\nspacing = 0.5\n").unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(c.get_str("metric"), Some("hi"));
        assert_eq!(c.get_triple::<usize>("dims").unwrap(), Some([4, 5, 6]));
        assert_eq!(c.get_triple::<f64>("spacing").unwrap(), Some([0.5; 3]));
        assert_eq!(c.get::<u64>("missing").unwrap(), None);
        assert!(c.get::<u64>("metric").is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(Config::parse("seed 7").is_err());
        assert!(Config::parse("a = 1\na = 2").is_err());
        assert!(Config::parse(" = 2").is_err());
    }

    #[test]
    fn synth_specs_round_trip() {
        let phantom = PhantomSpec { seed: 11, dims: [8, 9, 10], spacing: [0.5, 1.0, 1.5], blob_count: 3, noise_sigma: 0.125 };
        let def = DeformationSpec::new(vec![
            Bump { center: [1.0, 2.0, 3.0], amplitude: [0.1, -0.2, 1.0 / 3.0], width: 5.5 },
            Bump { center: [4.0; 3], amplitude: [0.0; 3], width: 1.0 },
        ])
        .unwrap();
        let mut c = Config::default();
        put_phantom(&mut c, &phantom);
        put_deformation(&mut c, &def);
        let back = Config::parse(&c.to_text()).unwrap();
        assert_eq!(get_phantom(&back, 0).unwrap(), phantom);
        assert_eq!(get_deformation(&back).unwrap(), Some(def));
        assert_eq!(get_deformation(&Config::default()).unwrap(), None);
    }
}
