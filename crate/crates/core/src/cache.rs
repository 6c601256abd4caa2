//! On-disk persistence of moment tables.
//!
//! Values are stored as raw `f64` bit patterns so a reload is bit-identical.
//! A file only loads into a table with the same domain, weight, quadrature
//! settings and evaluation method.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{Moment, MomentTable};
use crate::numerics::LogValue;

const FORMAT: &str = "bergman-lab-moment-cache";
const VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "BERGMAN_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub domain: String,
    pub weight: String,
    pub quad_rel_tol_bits: u64,
    pub quad_max_depth: u32,
    pub boundary_transform: bool,
    pub method: String,
}

impl Fingerprint {
    pub fn of(t: &MomentTable) -> Self {
        let q = t.quad_spec();
        Fingerprint {
            domain: t.domain().label(),
            weight: t.weight().label(),
            quad_rel_tol_bits: q.rel_tol.to_bits(),
            quad_max_depth: q.max_depth,
            boundary_transform: q.boundary_transform,
            method: format!("{:?}", t.method()).to_lowercase(),
        }
    }

    /// Differences from `other`, as `key: ours vs theirs`.
    fn diff(&self, other: &Fingerprint) -> Vec<String> {
        let mut out = Vec::new();
        let mut cmp = |k: &str, a: String, b: String| {
            if a != b {
                out.push(format!("{k}: {a} vs {b}"));
            }
        };
        cmp("domain", self.domain.clone(), other.domain.clone());
        cmp("weight", self.weight.clone(), other.weight.clone());
        cmp(
            "quad_rel_tol",
            f64::from_bits(self.quad_rel_tol_bits).to_string(),
            f64::from_bits(other.quad_rel_tol_bits).to_string(),
        );
        cmp("quad_max_depth", self.quad_max_depth.to_string(), other.quad_max_depth.to_string());
        cmp(
            "boundary_transform",
            self.boundary_transform.to_string(),
            other.boundary_transform.to_string(),
        );
        cmp("method", self.method.clone(), other.method.clone());
        out
    }

    /// A file name unique to this fingerprint.
    pub fn file_name(&self) -> String {
        let clean = |s: &str| s.replace([':', '/', '.', ','], "-");
        format!(
            "moments_{}_{}_{:016x}_{}_{}_{}.json",
            clean(&self.domain),
            clean(&self.weight),
            self.quad_rel_tol_bits,
            self.quad_max_depth,
            u8::from(self.boundary_transform),
            self.method
        )
    }
}

#[derive(Serialize, Deserialize)]
struct StoredMoment {
    sign: i8,
    logmag: u64,
    rel_err: u64,
}

impl From<&Moment> for StoredMoment {
    fn from(m: &Moment) -> Self {
        StoredMoment {
            sign: m.value.sign(),
            logmag: m.value.logmag().to_bits(),
            rel_err: m.rel_err.to_bits(),
        }
    }
}

impl StoredMoment {
    fn restore(&self) -> Result<Moment> {
        if !(-1..=1).contains(&self.sign) || f64::from_bits(self.logmag).is_nan() {
            return Err(Error::Parse("malformed cached moment".into()));
        }
        Ok(Moment {
            value: LogValue::new(self.sign, f64::from_bits(self.logmag)),
            rel_err: f64::from_bits(self.rel_err),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    fingerprint: Fingerprint,
    moments: Vec<(Vec<u64>, StoredMoment)>,
    profiles: Vec<(u64, StoredMoment)>,
}

/// Writes every cached moment of `t` to `path`, replacing the file
/// atomically.
pub fn save(t: &MomentTable, path: &Path) -> Result<()> {
    let mut moments: Vec<(Vec<u64>, StoredMoment)> = t
        .cached_moments()
        .iter()
        .map(|(s, m)| (s.iter().map(|x| x.to_bits()).collect(), m.into()))
        .collect();
    moments.sort_by(|a, b| a.0.cmp(&b.0));
    let mut profiles: Vec<(u64, StoredMoment)> = t
        .cached_profiles()
        .iter()
        .map(|(c, m)| (c.to_bits(), m.into()))
        .collect();
    profiles.sort_by_key(|p| p.0);
    let file = CacheFile {
        format: FORMAT.into(),
        version: VERSION,
        fingerprint: Fingerprint::of(t),
        moments,
        profiles,
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Seeds `t` from `path` and returns the number of entries read. Refuses
/// files written for a different table.
pub fn load(t: &MomentTable, path: &Path) -> Result<usize> {
    let text = fs::read_to_string(path)?;
    let file: CacheFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if file.format != FORMAT || file.version != VERSION {
        return Err(Error::Parse(format!(
            "{}: unsupported cache format {} v{}",
            path.display(),
            file.format,
            file.version
        )));
    }
    let diff = Fingerprint::of(t).diff(&file.fingerprint);
    if !diff.is_empty() {
        return Err(Error::FingerprintMismatch(format!("{}: {}", path.display(), diff.join(", "))));
    }
    let moments = file
        .moments
        .iter()
        .map(|(s, m)| Ok((s.iter().map(|&b| f64::from_bits(b)).collect(), m.restore()?)))
        .collect::<Result<Vec<_>>>()?;
    let profiles = file
        .profiles
        .iter()
        .map(|(c, m)| Ok((f64::from_bits(*c), m.restore()?)))
        .collect::<Result<Vec<_>>>()?;
    let n = moments.len() + profiles.len();
    t.seed(moments, profiles);
    Ok(n)
}

/// Default cache file for `t` inside `dir`.
pub fn default_path(dir: &Path, t: &MomentTable) -> PathBuf {
    dir.join(Fingerprint::of(t).file_name())
}
