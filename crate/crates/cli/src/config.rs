//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use swnoon_core::wave::{PulseWaveVectors, WaveVector};

use crate::error::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "order",
    "atoms",
    "lifetime_us",
    "k_gr_a",
    "k_ra_sa",
    "k_gr_b",
    "k_rb_sb",
    "displacement",
    "direction",
    "shots",
    "seed",
    "out",
    "min",
    "max",
    "steps",
    "offset",
    "orders",
    "shifts",
    "lifetimes",
    "n",
    "radius_um",
    "density_cm3",
    "target_shift_mhz",
    "shift_tolerance",
    "target_error",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {line_no}: expected `key = value`")))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Usage(format!("config line {line_no}: unknown key `{key}`")));
            }
            if values.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
                return Err(CliError::Usage(format!("config line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(ConfigFile { values })
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config line {line}: bad value for `{key}`: {e}"))),
        }
    }

    /// Flag value if given, else the config value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Like [`resolve`](Self::resolve) but with no default.
    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => self
                .get(key)?
                .ok_or_else(|| CliError::Usage(format!("missing required --{} (or `{key}` in config)", key.replace('_', "-")))),
        }
    }
}

/// A comma-separated triple such as `8,0,0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl FromStr for Vec3 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated numbers, got `{s}`"));
        }
        let mut out = [0.0; 3];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"))?;
            if !o.is_finite() {
                return Err(format!("`{p}` is not finite"));
            }
        }
        Ok(Vec3(out))
    }
}

/// A comma-separated list of values.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<T>().map_err(|_| format!("`{p}` is not a valid item")))
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err("list is empty".into());
        }
        Ok(List(items))
    }
}

/// Beam wave vectors from flags, then config, then the counter-propagating defaults.
pub fn resolve_waves(config: &ConfigFile, flags: [Option<Vec3>; 4]) -> Result<PulseWaveVectors, CliError> {
    let d = PulseWaveVectors::default();
    let defaults = [d.gr_a, d.ra_sa, d.gr_b, d.rb_sb];
    let keys = ["k_gr_a", "k_ra_sa", "k_gr_b", "k_rb_sb"];
    let mut out = [WaveVector::ZERO; 4];
    for i in 0..4 {
        out[i] = match config.resolve(flags[i], keys[i], Vec3(defaults[i].to_array()))? {
            Vec3(v) => WaveVector::from(v),
        };
    }
    Ok(PulseWaveVectors::new(out[0], out[1], out[2], out[3]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let c = ConfigFile::parse("# header\norder = 5  # inline\n\n  shots=100\nk_gr_a = 1, 2, 3\n").unwrap();
        assert_eq!(c.get::<u32>("order").unwrap(), Some(5));
        assert_eq!(c.get::<u64>("shots").unwrap(), Some(100));
        assert_eq!(c.get::<Vec3>("k_gr_a").unwrap(), Some(Vec3([1.0, 2.0, 3.0])));
        assert_eq!(c.get::<u32>("atoms").unwrap(), None);
    }

    #[test]
    fn flags_win() {
        let c = ConfigFile::parse("order = 5").unwrap();
        assert_eq!(c.resolve(Some(7u32), "order", 20).unwrap(), 7);
        assert_eq!(c.resolve(None, "order", 20u32).unwrap(), 5);
        assert_eq!(c.resolve(None, "atoms", 400.0).unwrap(), 400.0);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("order 5").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("order = 1\norder = 2").is_err());
        let c = ConfigFile::parse("order = five").unwrap();
        assert!(c.get::<u32>("order").is_err());
        assert!("1,2".parse::<Vec3>().is_err());
        assert!("".parse::<List<u32>>().is_err());
        assert_eq!("5, 10,15".parse::<List<u32>>().unwrap(), List(vec![5, 10, 15]));
    }
}
