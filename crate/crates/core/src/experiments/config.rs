//! Run configuration: TOML text, per-subcommand defaults and command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{config_error, Family, GeoMode};
use crate::darcy::SolverKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Quadcheck,
    Converge,
    Cornerpoint,
    Selftest,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Quadcheck => "quadcheck",
            Subcommand::Converge => "converge",
            Subcommand::Cornerpoint => "cornerpoint",
            Subcommand::Selftest => "selftest",
        }
    }
}

/// Inclusive level range, written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Levels {
    pub first: usize,
    pub last: usize,
}

impl Levels {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.first..=self.last
    }

    pub fn count(&self) -> usize {
        self.last + 1 - self.first
    }
}

impl FromStr for Levels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Levels> {
        let bad = || config_error(format!("levels must look like `a..b` (got `{s}`)"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let first = a.trim().parse().map_err(|_| bad())?;
        let last = b.trim().parse().map_err(|_| bad())?;
        if first > last {
            return Err(config_error(format!("empty level range {s}")));
        }
        Ok(Levels { first, last })
    }
}

impl TryFrom<String> for Levels {
    type Error = Error;

    fn try_from(s: String) -> Result<Levels> {
        s.parse()
    }
}

impl From<Levels> for String {
    fn from(l: Levels) -> String {
        l.to_string()
    }
}

impl fmt::Display for Levels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

/// Which chart modes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeoSelection {
    #[serde(rename = "withGeo")]
    WithGeo,
    #[serde(rename = "noGeo")]
    NoGeo,
    #[serde(rename = "both")]
    Both,
}

impl GeoSelection {
    pub fn modes(&self) -> Vec<GeoMode> {
        match self {
            GeoSelection::WithGeo => vec![GeoMode::WithGeo],
            GeoSelection::NoGeo => vec![GeoMode::NoGeo],
            GeoSelection::Both => vec![GeoMode::WithGeo, GeoMode::NoGeo],
        }
    }
}

impl FromStr for GeoSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<GeoSelection> {
        match s {
            "withGeo" => Ok(GeoSelection::WithGeo),
            "noGeo" => Ok(GeoSelection::NoGeo),
            "both" => Ok(GeoSelection::Both),
            _ => Err(config_error(format!("geo must be withGeo, noGeo or both (got `{s}`)"))),
        }
    }
}

/// Everything a study needs. The canonical text form is TOML and parses back
/// to an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    /// Families of the convergence study.
    pub families: Vec<Family>,
    pub levels: Levels,
    pub k: Vec<usize>,
    pub geo: GeoSelection,
    /// Quadrature degree of the local integrals instead of `2k + 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_degree: Option<usize>,
    /// Gauss points per direction of the quadrature check.
    pub gauss_degrees: Vec<usize>,
    pub solver: SolverKind,
    /// Write measured solve times; otherwise the column holds zeros and the
    /// tables are byte-identical across runs.
    pub record_timings: bool,
    pub out: PathBuf,
    pub seed: u64,
    /// Mesh file validated by the self test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(sub: Subcommand) -> RunConfig {
        let (levels, k) = match sub {
            Subcommand::Cornerpoint => (Levels { first: 1, last: 3 }, vec![2]),
            Subcommand::Selftest => (Levels { first: 0, last: 1 }, vec![1, 2, 3]),
            _ => (Levels { first: 0, last: 3 }, vec![1, 2, 3]),
        };
        RunConfig {
            subcommand: sub,
            families: Family::ALL.to_vec(),
            levels,
            k,
            geo: GeoSelection::Both,
            quad_degree: None,
            gauss_degrees: vec![1, 2, 3],
            solver: SolverKind::default(),
            record_timings: false,
            out: PathBuf::from("out").join(sub.name()),
            seed: 20240917,
            mesh_file: None,
        }
    }

    /// Defaults of `sub` overridden by the keys of `text`.
    pub fn from_toml(sub: Subcommand, text: &str) -> Result<RunConfig> {
        let user: toml::Table = text.parse().map_err(|e| config_error(format!("{e}")))?;
        if let Some(v) = user.get("subcommand") {
            if v.as_str() != Some(sub.name()) {
                return Err(config_error(format!(
                    "configuration is for `{v}`, not `{}`",
                    sub.name()
                )));
            }
        }
        let mut table = toml::Table::try_from(RunConfig::defaults(sub))
            .map_err(|e| config_error(format!("{e}")))?;
        for (key, v) in user {
            table.insert(key, v);
        }
        let cfg: RunConfig = table.try_into().map_err(|e| config_error(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Parses a full canonical text (no defaults are filled in).
    pub fn parse_canonical(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_error(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `--k 1,2,3`.
    pub fn set_k_list(&mut self, s: &str) -> Result<()> {
        self.k = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| config_error(format!("bad degree `{t}` in `{s}`")))
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.is_empty() || self.k.iter().any(|&k| !(1..=4).contains(&k)) {
            return Err(config_error(format!("degrees must lie in 1..=4 (got {:?})", self.k)));
        }
        if let Some(d) = self.quad_degree {
            if d == 0 {
                return Err(config_error("quad_degree must be positive"));
            }
        }
        match self.subcommand {
            Subcommand::Converge => {
                if self.levels.count() < 3 {
                    return Err(config_error("slope fitting needs at least 3 levels"));
                }
                if self.families.is_empty() {
                    return Err(config_error("no families selected"));
                }
            }
            Subcommand::Cornerpoint => {
                if self.levels.first == 0 {
                    return Err(config_error("corner-point levels start at 1"));
                }
                if self.levels.count() < 2 {
                    return Err(config_error("profile convergence needs at least 2 levels"));
                }
            }
            Subcommand::Quadcheck => {
                if self.gauss_degrees.is_empty() || self.gauss_degrees.contains(&0) {
                    return Err(config_error("gauss_degrees must be positive"));
                }
            }
            Subcommand::Selftest => {}
        }
        Ok(())
    }
}
