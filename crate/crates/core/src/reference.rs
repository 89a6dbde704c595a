//! Published reference tables shipped with the crate (n = 2 and n = 3).

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::braid::{BraidWord, Perm};
use crate::error::{Error, Result};
use crate::poly::C64;

const N2: &str = include_str!("../data/reference_n2.json");
const N3: &str = include_str!("../data/reference_n3.json");

#[derive(Clone, Debug, Deserialize)]
pub struct GeneratorData {
    pub perm: String,
    pub roots: Vec<String>,
    #[serde(default)]
    pub critical_points: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Reference {
    pub n: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    base: Vec<[f64; 2]>,
    /// Residue class of the labels lying over the strand at real-order
    /// position `s`.
    pub residue_of_position: Vec<usize>,
    pub match_tolerance: f64,
    labels: Vec<Vec<[f64; 2]>>,
    pub generators: BTreeMap<String, GeneratorData>,
    #[serde(default)]
    pub level2: BTreeMap<String, String>,
}

fn c(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl Reference {
    pub fn for_n(n: usize) -> Option<Reference> {
        let text = match n {
            2 => N2,
            3 => N3,
            _ => return None,
        };
        Some(serde_json::from_str(text).expect("shipped reference data is valid"))
    }

    pub fn base(&self) -> Vec<C64> {
        self.base.iter().map(c).collect()
    }

    /// Nonzero roots of each published label.
    pub fn label_roots(&self) -> Vec<Vec<C64>> {
        self.labels.iter().map(|l| l.iter().map(c).collect()).collect()
    }

    fn generator(&self, i: usize) -> Result<&GeneratorData> {
        self.generators.get(&i.to_string()).ok_or(Error::MissingTable(i))
    }

    pub fn perm(&self, i: usize) -> Result<Perm> {
        Perm::parse_cycles(self.labels.len(), &self.generator(i)?.perm)
    }

    pub fn root_braids(&self, i: usize) -> Result<Vec<BraidWord>> {
        self.generator(i)?.roots.iter().map(|s| BraidWord::parse(self.n, s)).collect()
    }

    pub fn critical_point_braids(&self, i: usize) -> Result<Option<Vec<BraidWord>>> {
        match &self.generator(i)?.critical_points {
            None => Ok(None),
            Some(list) => Ok(Some(list.iter().map(|s| BraidWord::parse(self.n, s)).collect::<Result<_>>()?)),
        }
    }

    pub fn level2_perm(&self, word: &str) -> Result<Option<Perm>> {
        let m = self.labels.len() * self.labels.len();
        self.level2.get(word).map(|s| Perm::parse_cycles(m, s)).transpose()
    }

    /// True when `base` is the reference base up to ordering.
    pub fn matches_base(&self, base: &[C64]) -> bool {
        crate::poly::set_distance(&self.base(), base) < 1e-9
    }
}
