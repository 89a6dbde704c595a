//! Invariants built from nested lift sequences.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::{levels, TableSet};
use crate::braid::{burau_reduced, BraidWord, Perm};
use crate::error::{Error, Result};
use crate::lift::Embedding;

/// `B, {B_{1,i}}, {B_{2,i}}, ...` for one word and one base point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftSequence {
    pub root: BraidWord,
    /// `levels[j - 1][i] = B_{j,i}`
    pub levels: Vec<Vec<BraidWord>>,
    /// `perms[j - 1] = rho_j`
    pub perms: Vec<Perm>,
    pub embedding: Embedding,
    pub base_hash: String,
}

pub fn lift_sequence(w: &BraidWord, depth: usize, tables: &TableSet) -> Result<LiftSequence> {
    let data = levels(w, depth, tables)?;
    let (perms, levels) = data.into_iter().unzip();
    Ok(LiftSequence { root: w.clone(), levels, perms, embedding: tables.embedding, base_hash: tables.base_hash.clone() })
}

impl LiftSequence {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `0` is the root word.
    pub fn level(&self, j: usize) -> Vec<BraidWord> {
        if j == 0 {
            vec![self.root.clone()]
        } else {
            self.levels[j - 1].clone()
        }
    }

    fn comparable(&self, other: &LiftSequence) -> Result<()> {
        if self.base_hash != other.base_hash || self.embedding != other.embedding {
            return Err(Error::BasePointMismatch);
        }
        if self.root.strands() != other.root.strands() {
            return Err(Error::StrandMismatch { left: self.root.strands(), right: other.root.strands() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleLoop {
    pub cycle: Vec<usize>,
    /// Lifted braids concatenated around the cycle, starting at its first
    /// entry.
    pub braid: BraidWord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyCycleData {
    pub level: usize,
    pub cycles: Vec<CycleLoop>,
}

impl ConjugacyCycleData {
    /// Conjugation-invariant summary: sorted `(length, exponent sum, Burau
    /// trace)` triples.
    pub fn signature(&self) -> Vec<(usize, i64, String)> {
        let mut v: Vec<_> = self
            .cycles
            .iter()
            .map(|c| (c.cycle.len(), c.braid.exponent_sum(), burau_reduced(&c.braid).trace().to_string()))
            .collect();
        v.sort();
        v
    }
}

pub fn cycle_data(perm: &Perm, braids: &[BraidWord], level: usize) -> ConjugacyCycleData {
    let cycles = perm
        .cycles()
        .into_iter()
        .map(|cycle| {
            let mut b = BraidWord::identity(braids[0].strands());
            for &i in &cycle {
                b = b.concat(&braids[i]).expect("same strand count");
            }
            CycleLoop { cycle, braid: b.free_reduce() }
        })
        .collect();
    ConjugacyCycleData { level, cycles }
}

pub fn conjugacy_sequence(w: &BraidWord, depth: usize, tables: &TableSet) -> Result<Vec<ConjugacyCycleData>> {
    let seq = lift_sequence(w, depth, tables)?;
    Ok(seq.perms.iter().zip(&seq.levels).enumerate().map(|(j, (p, b))| cycle_data(p, b, j + 1)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseInvariant {
    ExponentSum,
    CycleType,
    BurauTrace,
}

impl BaseInvariant {
    pub const ALL: [BaseInvariant; 3] = [BaseInvariant::ExponentSum, BaseInvariant::CycleType, BaseInvariant::BurauTrace];

    pub fn name(self) -> &'static str {
        match self {
            BaseInvariant::ExponentSum => "exponent_sum",
            BaseInvariant::CycleType => "cycle_type",
            BaseInvariant::BurauTrace => "burau_trace",
        }
    }

    pub fn eval(self, b: &BraidWord) -> InvariantValue {
        match self {
            BaseInvariant::ExponentSum => InvariantValue::Int(b.exponent_sum()),
            BaseInvariant::CycleType => InvariantValue::CycleType(b.perm_rep().cycle_type()),
            BaseInvariant::BurauTrace => InvariantValue::Poly(burau_reduced(b).trace().to_string()),
        }
    }
}

impl std::str::FromStr for BaseInvariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BaseInvariant::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown invariant {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InvariantValue {
    Int(i64),
    CycleType(Vec<usize>),
    Poly(String),
}

/// `stream[j]` lists the invariant on every level-`j` entry (level 0 is the
/// root word).
pub fn invariant_stream(seq: &LiftSequence, base: BaseInvariant) -> Vec<Vec<InvariantValue>> {
    (0..=seq.depth()).map(|j| seq.level(j).iter().map(|b| base.eval(b)).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Distinguished { level: usize, invariant: BaseInvariant },
    Indistinguishable { depth: usize },
}

pub fn distinguish_sequences(a: &LiftSequence, b: &LiftSequence) -> Result<Verdict> {
    a.comparable(b)?;
    let depth = a.depth().min(b.depth());
    for j in 0..=depth {
        let (la, lb) = (a.level(j), b.level(j));
        for inv in BaseInvariant::ALL {
            let differs = la.len() != lb.len() || la.iter().zip(&lb).any(|(x, y)| inv.eval(x) != inv.eval(y));
            if differs {
                return Ok(Verdict::Distinguished { level: j, invariant: inv });
            }
        }
    }
    Ok(Verdict::Indistinguishable { depth })
}

pub fn distinguish(a: &BraidWord, b: &BraidWord, depth: usize, tables: &TableSet) -> Result<Verdict> {
    if a.strands() != b.strands() {
        return Err(Error::StrandMismatch { left: a.strands(), right: b.strands() });
    }
    distinguish_sequences(&lift_sequence(a, depth, tables)?, &lift_sequence(b, depth, tables)?)
}

/// Sum of exponent sums of the level-`(j+1)` lifts of each level-`j` entry.
pub fn exponent_sum_budget(seq: &LiftSequence, j: usize) -> BTreeMap<usize, i64> {
    let width = seq.level(j).len();
    let mut out = BTreeMap::new();
    if j >= seq.depth() {
        return out;
    }
    for (idx, b) in seq.levels[j].iter().enumerate() {
        *out.entry(idx % width).or_insert(0) += b.exponent_sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tables;

    fn w(n: usize, s: &str) -> BraidWord {
        BraidWord::parse(n, s).unwrap()
    }

    #[test]
    fn n2_halving_sequence() {
        let seq = lift_sequence(&w(2, "s1^12"), 2, tables(2)).unwrap();
        assert!(seq.levels[0].iter().all(|b| *b == w(2, "s1^6")));
        assert_eq!(seq.levels[1].len(), 16);
        assert!(seq.levels[1].iter().all(|b| *b == w(2, "s1^3")));
        let s = invariant_stream(&seq, BaseInvariant::ExponentSum);
        assert_eq!(s[1], vec![InvariantValue::Int(6); 4]);
        assert_eq!(s[2], vec![InvariantValue::Int(3); 16]);
    }

    #[test]
    fn trivial_word() {
        let seq = lift_sequence(&BraidWord::identity(2), 3, tables(2)).unwrap();
        assert!(seq.levels.iter().flatten().all(|b| b.is_empty()));
        let c = conjugacy_sequence(&BraidWord::identity(2), 1, tables(2)).unwrap();
        assert!(c[0].cycles.iter().all(|x| x.cycle.len() == 1 && x.braid.is_empty()));
    }

    #[test]
    fn n2_cycle_loop() {
        let c = conjugacy_sequence(&w(2, "s1"), 1, tables(2)).unwrap();
        assert_eq!(c[0].cycles.len(), 1);
        assert_eq!(c[0].cycles[0].braid, w(2, "s1^2"));
    }

    #[test]
    fn n3_cycles_and_beta() {
        let c = conjugacy_sequence(&w(3, "s1"), 1, tables(3)).unwrap();
        let mut lens: Vec<usize> = c[0].cycles.iter().map(|x| x.cycle.len()).filter(|&l| l > 1).collect();
        lens.sort();
        assert_eq!(lens, vec![2, 2, 2, 3, 3, 3, 4, 4, 4]);
        let beta = w(3, "s1^12 s2^12 s1^-12 s2^-12");
        let seq = lift_sequence(&beta, 1, tables(3)).unwrap();
        let s = w(3, "s2^6 s1^6 s2^-6 s1^-6");
        let t = w(3, "s1^6 s2^6 s1^-6 s2^-6");
        for (i, b) in seq.levels[0].iter().enumerate() {
            let want = match i {
                _ if i % 3 != 2 => BraidWord::identity(3),
                2 | 14 | 26 => s.clone(),
                _ => t.clone(),
            };
            assert_eq!(b, &want, "entry {i}");
        }
    }

    #[test]
    fn distinguishing() {
        let t = tables(3);
        let v = distinguish(&w(3, "s1"), &w(3, "s1^-1"), 2, t).unwrap();
        assert_eq!(v, Verdict::Distinguished { level: 0, invariant: BaseInvariant::ExponentSum });
        assert_eq!(distinguish(&w(3, "s1 s2"), &w(3, "s1 s2"), 1, t).unwrap(), Verdict::Indistinguishable { depth: 1 });
        assert_eq!(
            distinguish(&w(3, "s1 s2 s1"), &w(3, "s2 s1 s2"), 2, t).unwrap(),
            Verdict::Indistinguishable { depth: 2 }
        );
        let v = distinguish(&w(3, "s1 s2"), &w(3, "s2 s1"), 2, t).unwrap();
        assert!(matches!(v, Verdict::Distinguished { .. }));
    }

    #[test]
    fn refuses_other_base() {
        let t = tables(2);
        let a = lift_sequence(&w(2, "s1"), 1, t).unwrap();
        let mut b = a.clone();
        b.base_hash = "other".into();
        assert_eq!(distinguish_sequences(&a, &b), Err(Error::BasePointMismatch));
    }
}
