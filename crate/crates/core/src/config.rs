//! Run configuration and the on-disk table cache.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::TableSet;
use crate::dynamics::TAU_ZERO;
use crate::error::{Error, Result};
use crate::fiber::{full_fiber, FiberOptions, LabeledFiber};
use crate::lift::{Embedding, LiftOptions};
use crate::poly::{C64, TAU_SEP};
use crate::reference::Reference;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    /// Base configuration in `C_n` as `[re, im]` pairs; `None` picks the
    /// default for `n`.
    pub base: Option<Vec<[f64; 2]>>,
    /// Angle of the `n = 2` base `{e^(i eps)/2, -e^(i eps)/2}`.
    pub epsilon: f64,
    pub embedding: Embedding,
    pub samples: usize,
    pub tau_sep: f64,
    pub tau_zero: f64,
    pub residual_tol: f64,
    pub seed: u64,
    pub phi_max_depth: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::for_n(3)
    }
}

impl RunConfig {
    pub fn for_n(n: usize) -> Self {
        RunConfig {
            n,
            base: None,
            epsilon: 0.8,
            embedding: Embedding::Roots,
            samples: 100,
            tau_sep: TAU_SEP,
            tau_zero: TAU_ZERO,
            residual_tol: 1e-10,
            seed: 0,
            phi_max_depth: None,
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        for (name, v) in [("tau_sep", self.tau_sep), ("tau_zero", self.tau_zero), ("residual_tol", self.residual_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if let Some(b) = &self.base {
            if b.len() != self.n {
                return Err(Error::Config(format!("base has {} points, expected {}", b.len(), self.n)));
            }
        }
        Ok(())
    }

    pub fn base_points(&self) -> Vec<C64> {
        if let Some(b) = &self.base {
            return b.iter().map(|p| C64::new(p[0], p[1])).collect();
        }
        match self.n {
            2 => {
                let a = C64::from_polar(0.5, self.epsilon);
                vec![a, -a]
            }
            3 => vec![C64::new(0.0, 0.0), C64::from_polar(1.0, PI / 4.0), C64::new(2.0, 0.0)],
            n => (0..n).map(|k| C64::new(k as f64, (k * k) as f64 / n as f64)).collect(),
        }
    }

    pub fn fiber_options(&self) -> FiberOptions {
        FiberOptions { tau_sep: self.tau_sep, seed: self.seed, ..FiberOptions::default() }
    }

    pub fn lift_options(&self) -> LiftOptions {
        LiftOptions { samples: self.samples, tau_sep: self.tau_sep, residual_tol: self.residual_tol, ..LiftOptions::default() }
    }

    /// Content hash of everything the tables depend on.
    pub fn cache_key(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            n: usize,
            base: Vec<[u64; 2]>,
            embedding: Embedding,
            samples: usize,
            tau_sep: u64,
            residual_tol: u64,
            seed: u64,
            version: &'a str,
        }
        let key = Key {
            n: self.n,
            base: self.base_points().iter().map(|z| [z.re.to_bits(), z.im.to_bits()]).collect(),
            embedding: self.embedding,
            samples: self.samples,
            tau_sep: self.tau_sep.to_bits(),
            residual_tol: self.residual_tol.to_bits(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
        };
        let bytes = serde_json::to_vec(&key).expect("key serialises");
        hex::encode(Sha256::digest(bytes))
    }

    fn cache_path(&self, what: &str) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(format!("{what}-n{}-{}.json", self.n, &self.cache_key()[..16])))
    }

    pub fn reference(&self) -> Option<Reference> {
        Reference::for_n(self.n).filter(|r| r.matches_base(&self.base_points()))
    }

    pub fn fiber(&self) -> Result<LabeledFiber> {
        self.validate()?;
        cached(self.cache_path("fiber"), || full_fiber(&self.base_points(), &self.fiber_options(), self.reference().as_ref()))
    }

    pub fn tables(&self, fiber: &LabeledFiber) -> Result<TableSet> {
        self.validate()?;
        let t: TableSet = cached(self.cache_path("tables"), || TableSet::build(fiber, self.embedding, &self.lift_options()))?;
        if t.base_hash != fiber.hash {
            return Err(Error::BasePointMismatch);
        }
        Ok(t.rebuild())
    }
}

fn cached<T: Serialize + DeserializeOwned>(path: Option<PathBuf>, build: impl FnOnce() -> Result<T>) -> Result<T> {
    let Some(path) = path else { return build() };
    if let Ok(text) = fs::read_to_string(&path) {
        match serde_json::from_str(&text) {
            Ok(v) => {
                log::debug!("cache hit {}", path.display());
                return Ok(v);
            }
            Err(e) => log::warn!("ignoring unreadable cache file {}: {e}", path.display()),
        }
    }
    log::debug!("cache miss {}", path.display());
    let v = build()?;
    write_atomic(&path, &serde_json::to_vec(&v).map_err(|e| Error::Io(e.to_string()))?)?;
    Ok(v)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = dir.join(format!(".{}.tmp", path.file_name().and_then(|s| s.to_str()).unwrap_or("out")));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::for_n(2);
        let b = c.base_points();
        assert!(((b[0] - b[1]) - C64::from_polar(1.0, 0.8)).norm() < 1e-15);
        assert!(c.reference().is_some());
        assert!(RunConfig::for_n(3).reference().is_some());
        assert_eq!(RunConfig::for_n(4).base_points().len(), 4);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = RunConfig::for_n(3);
        c.tau_sep = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::for_n(3);
        c.base = Some(vec![[0.0, 0.0]]);
        assert!(c.validate().is_err());
        assert!(RunConfig::for_n(1).validate().is_err());
    }

    #[test]
    fn key_tracks_numerics() {
        let a = RunConfig::for_n(3);
        let mut b = a.clone();
        assert_eq!(a.cache_key(), b.cache_key());
        b.residual_tol = 1e-9;
        assert_ne!(a.cache_key(), b.cache_key());
        let mut c = a.clone();
        c.embedding = Embedding::CriticalPoints;
        assert_ne!(a.cache_key(), c.cache_key());
        let mut d = a.clone();
        d.cache_dir = Some("/elsewhere".into());
        assert_eq!(a.cache_key(), d.cache_key());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::for_n(2);
        c.cache_dir = Some(dir.path().to_path_buf());
        let f = c.fiber().unwrap();
        let t = c.tables(&f).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
        let t2 = c.tables(&f).unwrap();
        assert_eq!(t.tables[&1].perm, t2.tables[&1].perm);
        assert_eq!(c.fiber().unwrap().hash, f.hash);
    }
}
