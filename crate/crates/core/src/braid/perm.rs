use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `{0..m-1}`, stored as its image list.
///
/// Composition is left to right: `a.then(&b)` applies `a` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Perm {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Perm {
    type Error = Error;
    fn try_from(images: Vec<usize>) -> Result<Self> {
        Perm::from_images(images)
    }
}

impl From<Perm> for Vec<usize> {
    fn from(p: Perm) -> Self {
        p.images
    }
}

impl Perm {
    pub fn identity(m: usize) -> Self {
        Perm { images: (0..m).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x >= m || seen[x] {
                return Err(Error::BadPermutation(format!("{images:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Perm { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Perm::from_images(images.clone()).is_ok());
        Perm { images }
    }

    /// Builds a permutation of `m` points from disjoint cycles.
    pub fn from_cycles(m: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..m).collect();
        let mut touched = vec![false; m];
        for cyc in cycles {
            for (k, &x) in cyc.iter().enumerate() {
                if x >= m || touched[x] {
                    return Err(Error::BadPermutation(format!("cycle entry {x} repeated or out of range")));
                }
                touched[x] = true;
                images[x] = cyc[(k + 1) % cyc.len()];
            }
        }
        Perm::from_images(images)
    }

    /// Parses cycle notation such as `"(0 1 6 7)(2 3)"`.
    pub fn parse_cycles(m: usize, text: &str) -> Result<Self> {
        let mut cycles = Vec::new();
        for chunk in text.split('(').skip(1) {
            let body = chunk
                .split(')')
                .next()
                .ok_or_else(|| Error::BadPermutation(format!("unbalanced cycle in {text:?}")))?;
            let cyc = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| Error::BadPermutation(format!("bad entry {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            cycles.push(cyc);
        }
        Perm::from_cycles(m, &cycles)
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self` followed by `other`: `x -> other(self(x))`.
    pub fn then(&self, other: &Perm) -> Perm {
        assert_eq!(self.size(), other.size(), "permutation sizes differ");
        Perm { images: self.images.iter().map(|&x| other.images[x]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.size()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Perm { images: inv }
    }

    pub fn pow(&self, k: i64) -> Perm {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Perm::identity(self.size());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&sq);
            }
            sq = sq.then(&sq);
            e >>= 1;
        }
        acc
    }

    /// Disjoint cycles, each starting at its smallest element, sorted by that
    /// element. Fixed points are included as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.images[x];
            }
            out.push(cyc);
        }
        out
    }

    /// Sorted cycle lengths (descending), fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn order(&self) -> u128 {
        self.cycles().iter().fold(1u128, |acc, c| num_integer::lcm(acc, c.len() as u128))
    }

    /// Relabels points: the result maps `f(x)` to `f(self(x))`.
    pub fn conjugate_by(&self, f: &Perm) -> Perm {
        f.inverse().then(self).then(f)
    }
}

impl fmt::Display for Perm {
    /// Cycle notation without fixed points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for c in self.cycles() {
            if c.len() < 2 {
                continue;
            }
            any = true;
            let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_round_trip() {
        let p = Perm::parse_cycles(16, "(0 1 6 7 8 9 14 15)(2 3 4 5 10 11 12 13)").unwrap();
        assert_eq!(p.to_string(), "(0 1 6 7 8 9 14 15)(2 3 4 5 10 11 12 13)");
        assert_eq!(p.order(), 8);
        assert_eq!(p.cycle_type(), vec![8, 8]);
    }

    #[test]
    fn composition_is_left_to_right() {
        let a = Perm::parse_cycles(3, "(0 1)").unwrap();
        let b = Perm::parse_cycles(3, "(1 2)").unwrap();
        // 0 -a-> 1 -b-> 2
        assert_eq!(a.then(&b).apply(0), 2);
        assert!(a.then(&a.inverse()).is_identity());
    }

    #[test]
    fn powers() {
        let c = Perm::parse_cycles(4, "(0 1 2 3)").unwrap();
        assert!(c.pow(4).is_identity());
        assert_eq!(c.pow(-1), c.inverse());
        assert_eq!(c.pow(3), c.inverse());
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::parse_cycles(3, "(0 1)(1 2)").is_err());
        assert!(serde_json::from_str::<Perm>("[1,2]").is_err());
    }
}
