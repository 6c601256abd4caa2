//! Run configuration: a flat `key = value` file overridden by flags.

use std::collections::BTreeMap;
use std::path::Path;

use crate::domains::{DomainSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

const KEYS: &[&str] = &[
    "domain",
    "dimension",
    "ellipsoid_exponents",
    "weight",
    "quad_rel_tol",
    "quad_max_depth",
    "quad_boundary_transform",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// `disc`, `ball` or `ellipsoid`.
    pub domain: String,
    pub dimension: usize,
    pub ellipsoid_exponents: (u32, u32),
    pub weight: WeightSpec,
    pub quad: QuadratureSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: "ball".into(),
            dimension: 2,
            ellipsoid_exponents: (2, 1),
            weight: WeightSpec::Exponential,
            quad: QuadratureSpec::default(),
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidConfig(format!("bad value for {key}: '{value}'"))
}

pub fn parse_pair(value: &str) -> Result<(u32, u32)> {
    let (a, b) = value
        .split_once(',')
        .ok_or_else(|| bad("ellipsoid_exponents", value))?;
    let p = |s: &str| s.trim().parse::<u32>().map_err(|_| bad("ellipsoid_exponents", value));
    Ok((p(a)?, p(b)?))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "domain" => match value {
                "disc" | "ball" | "ellipsoid" => self.domain = value.to_owned(),
                _ => return Err(bad(key, value)),
            },
            "dimension" => self.dimension = value.parse().map_err(|_| bad(key, value))?,
            "ellipsoid_exponents" => self.ellipsoid_exponents = parse_pair(value)?,
            "weight" => self.weight = value.parse()?,
            "quad_rel_tol" => self.quad.rel_tol = value.parse().map_err(|_| bad(key, value))?,
            "quad_max_depth" => self.quad.max_depth = value.parse().map_err(|_| bad(key, value))?,
            "quad_boundary_transform" => {
                self.quad.boundary_transform = value.parse().map_err(|_| bad(key, value))?
            }
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown key '{key}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        self.quad.validate()?;
        match self.domain.as_str() {
            "disc" => Ok(DomainSpec::disc()),
            "ball" => DomainSpec::ball(self.dimension),
            "ellipsoid" => DomainSpec::ellipsoid(self.ellipsoid_exponents.0, self.ellipsoid_exponents.1),
            other => Err(bad("domain", other)),
        }
    }

    /// Every key with its effective value.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let (a, b) = self.ellipsoid_exponents;
        [
            ("domain", self.domain.clone()),
            ("dimension", self.dimension.to_string()),
            ("ellipsoid_exponents", format!("{a},{b}")),
            ("weight", self.weight.label()),
            ("quad_rel_tol", format!("{:e}", self.quad.rel_tol)),
            ("quad_max_depth", self.quad.max_depth.to_string()),
            ("quad_boundary_transform", self.quad.boundary_transform.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
    }
}
