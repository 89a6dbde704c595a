//! Wreath-product tables, level permutations and the two actions on adic
//! prefixes.

mod group;
pub mod phi;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidWord, Letter, Perm};
use crate::error::{Error, Result};
use crate::fiber::LabeledFiber;
use crate::lift::{generator_loop, lift_path, project_to_v, Embedding, LiftOptions};

pub use group::{group_order, orbits};
pub use phi::{phi_apply, phi_level_perm, PhiTower};

/// Largest permutation `rho_level` will materialise.
pub const RHO_POINT_LIMIT: usize = 1_000_000;

/// `h(B)`: the braids of the lifts from every fiber label, and where they end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathTable {
    pub n: usize,
    pub lifted: Vec<BraidWord>,
    pub perm: Perm,
    pub embedding: Embedding,
}

impl WreathTable {
    pub fn identity(n: usize, embedding: Embedding) -> Self {
        let m = n.pow(n as u32);
        WreathTable { n, lifted: vec![BraidWord::identity(n); m], perm: Perm::identity(m), embedding }
    }

    /// `self` followed by `other`: entry `i` is `A_i` then `B_{sigma(A)(i)}`.
    pub fn then(&self, other: &WreathTable) -> WreathTable {
        let lifted = self
            .lifted
            .iter()
            .enumerate()
            .map(|(i, a)| a.concat(&other.lifted[self.perm.apply(i)]).expect("same strand count").free_reduce())
            .collect();
        WreathTable { n: self.n, lifted, perm: self.perm.then(&other.perm), embedding: self.embedding }
    }

    pub fn inverse(&self) -> WreathTable {
        let inv = self.perm.inverse();
        let lifted = (0..self.lifted.len()).map(|i| self.lifted[inv.apply(i)].inverse()).collect();
        WreathTable { n: self.n, lifted, perm: inv, embedding: self.embedding }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.is_identity() && self.lifted.iter().all(|b| b.free_reduce().is_empty())
    }

    /// Labels over `x_s` go to labels over `x_{pi(s)}` where `pi` is the
    /// permutation of `w`.
    pub fn residues_compatible(&self, w: &BraidWord, fiber: &LabeledFiber) -> bool {
        let pi = w.perm_rep();
        (0..self.perm.size()).all(|l| fiber.covers[self.perm.apply(l)] == pi.apply(fiber.covers[l]))
    }
}

/// Lifts the `i`-th generator loop from every fiber label.
pub fn generator_table(i: usize, fiber: &LabeledFiber, embedding: Embedding, opts: &LiftOptions) -> Result<WreathTable> {
    let n = fiber.n;
    let path = generator_loop(i, &fiber.base, opts.samples)?;
    let vpaths = (0..n).map(|s| project_to_v(&path, s)).collect::<Result<Vec<_>>>()?;
    let lifts = (0..fiber.len())
        .into_par_iter()
        .map(|l| lift_path(&vpaths[fiber.covers[l]], l, fiber, opts))
        .collect::<Result<Vec<_>>>()?;
    let perm = Perm::from_images(lifts.iter().map(|p| p.end_label.expect("labelled lift")).collect())
        .map_err(|_| Error::EndpointUnmatched)?;
    let lifted = lifts.into_iter().map(|p| p.braid(embedding).clone()).collect();
    Ok(WreathTable { n, lifted, perm, embedding })
}

/// Generator tables and their inverses for one base and embedding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableSet {
    pub n: usize,
    pub embedding: Embedding,
    pub base_hash: String,
    pub tables: BTreeMap<usize, WreathTable>,
    #[serde(skip)]
    inverses: BTreeMap<usize, WreathTable>,
}

impl TableSet {
    pub fn new(n: usize, embedding: Embedding, base_hash: String, tables: BTreeMap<usize, WreathTable>) -> Self {
        let inverses = tables.iter().map(|(&i, t)| (i, t.inverse())).collect();
        TableSet { n, embedding, base_hash, tables, inverses }
    }

    pub fn build(fiber: &LabeledFiber, embedding: Embedding, opts: &LiftOptions) -> Result<Self> {
        let mut tables = BTreeMap::new();
        for i in 1..fiber.n {
            tables.insert(i, generator_table(i, fiber, embedding, opts)?);
        }
        Ok(TableSet::new(fiber.n, embedding, fiber.hash.clone(), tables))
    }

    /// Restores the derived inverse tables after deserialisation.
    pub fn rebuild(self) -> Self {
        TableSet::new(self.n, self.embedding, self.base_hash, self.tables)
    }

    pub fn points(&self) -> usize {
        self.n.pow(self.n as u32)
    }

    pub fn letter(&self, l: Letter) -> Result<&WreathTable> {
        let map = if l.sign > 0 { &self.tables } else { &self.inverses };
        map.get(&l.index).ok_or(Error::MissingTable(l.index))
    }
}

/// Wreath-product image of a word.
pub fn h_of_word(w: &BraidWord, tables: &TableSet) -> Result<WreathTable> {
    if w.strands() != tables.n {
        return Err(Error::StrandMismatch { left: w.strands(), right: tables.n });
    }
    let mut acc = WreathTable::identity(tables.n, tables.embedding);
    for &l in w.letters() {
        acc = acc.then(tables.letter(l)?);
    }
    Ok(acc)
}

/// Permutations and lifted braids of levels `1..=depth`: level `j` holds
/// `rho_j` on `(n^n)^j` points and the braids `B_{j,i}`.
pub fn levels(w: &BraidWord, depth: usize, tables: &TableSet) -> Result<Vec<(Perm, Vec<BraidWord>)>> {
    if depth == 0 {
        return Ok(vec![]);
    }
    let big_n = tables.points();
    if big_n.checked_pow(depth as u32).filter(|&m| m <= RHO_POINT_LIMIT).is_none() {
        let max = (1..).take_while(|&k| big_n.checked_pow(k as u32).is_some_and(|m| m <= RHO_POINT_LIMIT)).last();
        return Err(Error::DepthExceeded { requested: depth, max: max.unwrap_or(0) });
    }
    let h = h_of_word(&w.free_reduce(), tables)?;
    let mut out = vec![(h.perm, h.lifted)];
    let mut width = big_n;
    for _ in 1..depth {
        let (rho, braids) = out.last().unwrap();
        let hs = braids.par_iter().map(|b| h_of_word(b, tables)).collect::<Result<Vec<_>>>()?;
        let mut next_rho = vec![0; width * big_n];
        let mut next_braids = vec![BraidWord::identity(tables.n); width * big_n];
        for (i, hi) in hs.into_iter().enumerate() {
            for k in 0..big_n {
                next_rho[width * k + i] = width * hi.perm.apply(k) + rho.apply(i);
            }
            for (k, b) in hi.lifted.into_iter().enumerate() {
                next_braids[width * k + i] = b;
            }
        }
        out.push((Perm::from_images(next_rho)?, next_braids));
        width *= big_n;
    }
    Ok(out)
}

/// Level-`j` permutation on `(n^n)^j` points together with the level-`j`
/// lifted braids.
pub fn rho_level_with_braids(w: &BraidWord, j: usize, tables: &TableSet) -> Result<(Perm, Vec<BraidWord>)> {
    if j == 0 {
        return Err(Error::Config("level must be at least 1".into()));
    }
    Ok(levels(w, j, tables)?.pop().unwrap())
}

pub fn rho_level(w: &BraidWord, j: usize, tables: &TableSet) -> Result<Perm> {
    rho_level_with_braids(w, j, tables).map(|r| r.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Psi,
    Phi,
}

/// Finite digit prefix of an adic integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdicPrefix {
    pub kind: ActionKind,
    pub n: usize,
    pub digits: Vec<usize>,
}

impl AdicPrefix {
    pub fn radix(kind: ActionKind, n: usize, j: usize) -> usize {
        match (kind, j) {
            (ActionKind::Psi, _) => n.pow(n as u32),
            (ActionKind::Phi, 0) => n,
            (ActionKind::Phi, _) => n.pow(n as u32 - 1),
        }
    }

    pub fn new(kind: ActionKind, n: usize, digits: Vec<usize>) -> Result<Self> {
        if n < 2 || digits.is_empty() {
            return Err(Error::BadPrefix("need n >= 2 and at least one digit".into()));
        }
        for (j, &d) in digits.iter().enumerate() {
            let r = AdicPrefix::radix(kind, n, j);
            if d >= r {
                return Err(Error::BadPrefix(format!("digit {} = {d} is not below its radix {r}", j + 1)));
            }
        }
        Ok(AdicPrefix { kind, n, digits })
    }

    /// Builds a prefix from its successive residues `a mod R_1, a mod R_1 R_2,
    /// ...` where `R_j` are the digit radices.
    pub fn from_residues(kind: ActionKind, n: usize, residues: &[u128]) -> Result<Self> {
        let mut digits = Vec::with_capacity(residues.len());
        let mut scale: u128 = 1;
        let mut prev: u128 = 0;
        for (j, &r) in residues.iter().enumerate() {
            let radix = AdicPrefix::radix(kind, n, j) as u128;
            let next = scale.checked_mul(radix).ok_or_else(|| Error::BadPrefix("prefix too long".into()))?;
            if r >= next || r % scale != prev {
                return Err(Error::BadPrefix(format!("residue {r} is inconsistent at position {}", j + 1)));
            }
            digits.push(((r - prev) / scale) as usize);
            prev = r;
            scale = next;
        }
        AdicPrefix::new(kind, n, digits)
    }

    /// The residues `a mod R_1 ... R_j` for `j = 1..len`.
    pub fn residues(&self) -> Result<Vec<u128>> {
        let mut out = Vec::with_capacity(self.digits.len());
        let mut scale: u128 = 1;
        let mut acc: u128 = 0;
        for (j, &d) in self.digits.iter().enumerate() {
            acc = (d as u128).checked_mul(scale).and_then(|x| x.checked_add(acc)).ok_or_else(|| Error::BadPrefix("prefix too long".into()))?;
            out.push(acc);
            scale = scale.saturating_mul(AdicPrefix::radix(self.kind, self.n, j) as u128);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Number of leading digits shared with `other`.
    pub fn common_prefix(&self, other: &AdicPrefix) -> usize {
        self.digits.iter().zip(&other.digits).take_while(|(a, b)| a == b).count()
    }

    /// `n^{-ord}` style distance at the digit level: `R^{-k}` where `k` is the
    /// common prefix length, or 0 for equal prefixes.
    pub fn distance(&self, other: &AdicPrefix) -> f64 {
        let k = self.common_prefix(other);
        if k == self.len().min(other.len()) && self.len() == other.len() {
            return 0.0;
        }
        (0..k).map(|j| 1.0 / AdicPrefix::radix(self.kind, self.n, j) as f64).product()
    }
}

/// `psi(w, a)`: digit `j` moves by the permutation of the wreath image of the
/// level-`(j-1)` lifted braid along the prefix.
pub fn psi_apply(w: &BraidWord, a: &AdicPrefix, tables: &TableSet) -> Result<AdicPrefix> {
    if a.kind != ActionKind::Psi || a.n != tables.n {
        return Err(Error::BadPrefix("psi needs a psi prefix for the table's n".into()));
    }
    let mut b = w.free_reduce();
    let mut out = Vec::with_capacity(a.len());
    for &d in &a.digits {
        let h = h_of_word(&b, tables)?;
        out.push(h.perm.apply(d));
        b = h.lifted[d].clone();
    }
    AdicPrefix::new(ActionKind::Psi, a.n, out)
}

/// Either action's level structure.
#[derive(Clone, Copy)]
pub enum Level<'a> {
    Psi(&'a TableSet),
    Phi(&'a PhiTower),
}

impl Level<'_> {
    pub fn n(&self) -> usize {
        match self {
            Level::Psi(t) => t.n,
            Level::Phi(p) => p.fiber().n,
        }
    }

    pub fn kind(&self) -> ActionKind {
        match self {
            Level::Psi(_) => ActionKind::Psi,
            Level::Phi(_) => ActionKind::Phi,
        }
    }

    /// Permutation of the level-`j` points. Psi points are integers mod
    /// `(n^n)^j`; phi points are mixed-radix prefixes of length `j + 1`.
    pub fn perm(&self, w: &BraidWord, j: usize) -> Result<Perm> {
        match self {
            Level::Psi(t) => rho_level(w, j, t),
            Level::Phi(p) => phi_level_perm(w, j, p),
        }
    }

    pub fn points(&self, j: usize) -> usize {
        let n = self.n();
        match self {
            Level::Psi(_) => n.pow(n as u32).pow(j as u32),
            Level::Phi(_) => n * n.pow(n as u32 - 1).pow(j as u32),
        }
    }

    fn generator_perms(&self, j: usize) -> Result<Vec<Perm>> {
        let n = self.n();
        (1..n).map(|i| self.perm(&BraidWord::generator_power(n, i, 1)?, j)).collect()
    }
}

/// True when `w` acts trivially on level `j`.
pub fn kernel_membership(w: &BraidWord, j: usize, level: Level<'_>) -> Result<bool> {
    Ok(level.perm(w, j)?.is_identity())
}

/// Default bound on stored permutation entries for `image_order`.
pub const ORDER_BUDGET: usize = 50_000_000;

pub fn image_order(j: usize, level: Level<'_>) -> Result<BigUint> {
    group_order(&level.generator_perms(j)?, ORDER_BUDGET)
}

pub fn orbit_partition(j: usize, level: Level<'_>) -> Result<Vec<Vec<usize>>> {
    Ok(orbits(level.points(j), &level.generator_perms(j)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::Reference;

    pub(crate) fn n2_tables() -> &'static TableSet {
        crate::testutil::tables(2)
    }

    fn s1(k: i64) -> BraidWord {
        BraidWord::generator_power(2, 1, k).unwrap()
    }

    #[test]
    fn n2_generator_table() {
        let t = n2_tables();
        let g = &t.tables[&1];
        assert_eq!(g.perm.to_string(), "(0 1 2 3)");
        let want: Vec<BraidWord> = ["e", "s1", "e", "s1"].iter().map(|s| BraidWord::parse(2, s).unwrap()).collect();
        assert_eq!(g.lifted, want);
    }

    #[test]
    fn n2_level_two() {
        let t = n2_tables();
        let r = Reference::for_n(2).unwrap();
        assert_eq!(rho_level(&s1(1), 2, t).unwrap(), r.level2_perm("s1").unwrap().unwrap());
        assert_eq!(rho_level(&s1(12), 2, t).unwrap(), r.level2_perm("s1^12").unwrap().unwrap());
    }

    #[test]
    fn wreath_identities() {
        let t = n2_tables();
        assert!(h_of_word(&BraidWord::identity(2), t).unwrap().is_identity());
        assert!(h_of_word(&BraidWord::parse(2, "s1 s1^-1").unwrap(), t).unwrap().is_identity());
        let g = &t.tables[&1];
        assert!(g.then(&g.inverse()).is_identity());
    }

    #[test]
    fn halving() {
        let t = n2_tables();
        for k in 0..9i64 {
            let h = h_of_word(&s1(k), t).unwrap();
            for (l, b) in h.lifted.iter().enumerate() {
                let e = if k % 2 == 0 { k / 2 } else if l % 2 == 1 { (k + 1) / 2 } else { k / 2 };
                assert_eq!(b, &s1(e), "k = {k}, label {l}");
            }
        }
    }

    #[test]
    fn psi_examples() {
        let t = n2_tables();
        let a = AdicPrefix::new(ActionKind::Psi, 2, vec![1]).unwrap();
        assert_eq!(psi_apply(&s1(1), &a, t).unwrap().digits, vec![2]);
        let b = AdicPrefix::from_residues(ActionKind::Psi, 2, &[1, 1]).unwrap();
        let c = psi_apply(&s1(12), &b, t).unwrap();
        assert_eq!(c.residues().unwrap(), vec![1, 9]);
        assert_eq!(psi_apply(&BraidWord::identity(2), &b, t).unwrap(), b);
    }

    #[test]
    fn prefix_validation() {
        assert!(AdicPrefix::new(ActionKind::Psi, 2, vec![4]).is_err());
        assert!(AdicPrefix::new(ActionKind::Phi, 3, vec![2, 8]).is_ok());
        assert!(AdicPrefix::new(ActionKind::Phi, 3, vec![3]).is_err());
        assert!(AdicPrefix::new(ActionKind::Psi, 2, vec![]).is_err());
        let p = AdicPrefix::new(ActionKind::Phi, 3, vec![2, 5, 7]).unwrap();
        assert_eq!(p.residues().unwrap(), vec![2, 17, 206]);
        assert_eq!(AdicPrefix::from_residues(ActionKind::Phi, 3, &[2, 17, 206]).unwrap(), p);
        assert!(AdicPrefix::from_residues(ActionKind::Psi, 2, &[1, 2]).is_err());
    }

    #[test]
    fn kernels_and_orders() {
        let t = n2_tables();
        let lv = Level::Psi(t);
        assert!(kernel_membership(&BraidWord::identity(2), 3, lv).unwrap());
        assert!(!kernel_membership(&s1(1), 1, lv).unwrap());
        assert!(kernel_membership(&s1(4), 1, lv).unwrap());
        assert!(!kernel_membership(&s1(4), 2, lv).unwrap());
        assert_eq!(image_order(1, lv).unwrap(), BigUint::from(4u32));
        assert_eq!(image_order(2, lv).unwrap(), BigUint::from(8u32));
        let orb = orbit_partition(2, lv).unwrap();
        assert_eq!(orb.iter().map(|o| o.len()).collect::<Vec<_>>(), vec![8, 8]);
    }

    #[test]
    fn depth_guard() {
        let t = n2_tables();
        assert!(matches!(rho_level(&s1(1), 11, t), Err(Error::DepthExceeded { requested: 11, max: 9 })));
    }
}
