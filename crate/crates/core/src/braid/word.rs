use std::fmt;

use serde::{Deserialize, Serialize};

use crate::braid::Perm;
use crate::error::{Error, Result};

/// One letter `σ_index^sign` of a braid word. Generator indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, i8)", into = "(usize, i8)")]
pub struct Letter {
    pub index: usize,
    pub sign: i8,
}

impl Letter {
    pub fn pos(index: usize) -> Self {
        Letter { index, sign: 1 }
    }

    pub fn neg(index: usize) -> Self {
        Letter { index, sign: -1 }
    }

    pub fn inverse(self) -> Self {
        Letter { index: self.index, sign: -self.sign }
    }
}

impl From<(usize, i8)> for Letter {
    fn from((index, sign): (usize, i8)) -> Self {
        Letter { index, sign: if sign < 0 { -1 } else { 1 } }
    }
}

impl From<Letter> for (usize, i8) {
    fn from(l: Letter) -> Self {
        (l.index, l.sign)
    }
}

/// A word in the Artin generators on `strands` strands, read left to right
/// as path concatenation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawWord", into = "RawWord")]
pub struct BraidWord {
    strands: usize,
    letters: Vec<Letter>,
}

#[derive(Serialize, Deserialize)]
struct RawWord {
    strands: usize,
    letters: Vec<Letter>,
}

impl TryFrom<RawWord> for BraidWord {
    type Error = Error;
    fn try_from(raw: RawWord) -> Result<Self> {
        BraidWord::new(raw.strands, raw.letters)
    }
}

impl From<BraidWord> for RawWord {
    fn from(w: BraidWord) -> Self {
        RawWord { strands: w.strands, letters: w.letters }
    }
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<Letter>) -> Result<Self> {
        if strands == 0 {
            return Err(Error::BadGenerator { index: 0, strands });
        }
        for l in &letters {
            if l.index == 0 || l.index >= strands || (l.sign != 1 && l.sign != -1) {
                return Err(Error::BadGenerator { index: l.index, strands });
            }
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn identity(strands: usize) -> Self {
        BraidWord { strands, letters: Vec::new() }
    }

    /// `σ_index^power`; negative powers give inverse letters.
    pub fn generator_power(strands: usize, index: usize, power: i64) -> Result<Self> {
        let letter = if power >= 0 { Letter::pos(index) } else { Letter::neg(index) };
        BraidWord::new(strands, vec![letter; power.unsigned_abs() as usize])
    }

    /// Builds a word from signed generator indices, e.g. `[1, -2, 1]`.
    pub fn from_signed(strands: usize, letters: &[i64]) -> Result<Self> {
        let letters = letters
            .iter()
            .map(|&s| {
                if s == 0 {
                    Err(Error::BadGenerator { index: 0, strands })
                } else {
                    Ok(Letter { index: s.unsigned_abs() as usize, sign: s.signum() as i8 })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        BraidWord::new(strands, letters)
    }

    /// Parses the compact form `"s1 s2^-1 s1^3"`; `"e"` or an empty string is
    /// the identity.
    pub fn parse(strands: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in text.split(|c: char| c.is_whitespace() || c == '*' || c == ',') {
            if token.is_empty() || token == "e" {
                continue;
            }
            let body = token
                .strip_prefix('s')
                .or_else(|| token.strip_prefix('σ'))
                .ok_or_else(|| Error::Parse(format!("token {token:?} does not start with 's'")))?;
            let (idx, pow) = match body.split_once('^') {
                Some((i, p)) => (i, p),
                None => (body, "1"),
            };
            let index: usize =
                idx.parse().map_err(|_| Error::Parse(format!("bad generator index in {token:?}")))?;
            let power: i64 = pow.parse().map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?;
            let letter = if power >= 0 { Letter::pos(index) } else { Letter::neg(index) };
            letters.extend(std::iter::repeat(letter).take(power.unsigned_abs() as usize));
        }
        BraidWord::new(strands, letters)
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        BraidWord {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &BraidWord) -> Result<Self> {
        if self.strands != other.strands {
            return Err(Error::StrandMismatch { left: self.strands, right: other.strands });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { strands: self.strands, letters })
    }

    pub fn push(&mut self, letter: Letter) {
        assert!(letter.index >= 1 && letter.index < self.strands);
        self.letters.push(letter);
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        BraidWord { strands: self.strands, letters }
    }

    /// Cancels adjacent `σ_i σ_i^{-1}` pairs until none remain.
    pub fn free_reduce(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            match out.last() {
                Some(&last) if last == l.inverse() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        BraidWord { strands: self.strands, letters: out }
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.sign as i64).sum()
    }

    /// Image in the symmetric group: `σ_i` swaps strand positions `i-1` and `i`
    /// (0-indexed). Position `p` at the top ends at position `perm(p)`.
    pub fn perm_rep(&self) -> Perm {
        // track which strand sits at each position
        let mut at: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            at.swap(l.index - 1, l.index);
        }
        let mut images = vec![0; self.strands];
        for (pos, &strand) in at.iter().enumerate() {
            images[strand] = pos;
        }
        Perm::from_images_unchecked(images)
    }

    /// True when no generator occurs with both signs.
    pub fn is_homogeneous(&self) -> bool {
        let mut seen = vec![0i8; self.strands];
        for l in &self.letters {
            let s = &mut seen[l.index];
            if *s == 0 {
                *s = l.sign;
            } else if *s != l.sign {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut j = i;
            while j < self.letters.len() && self.letters[j] == l {
                j += 1;
            }
            let power = (j - i) as i64 * l.sign as i64;
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if power == 1 {
                write!(f, "s{}", l.index)?;
            } else {
                write!(f, "s{}^{}", l.index, power)?;
            }
            i = j;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> BraidWord {
        BraidWord::parse(n, s).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        assert!(w(2, "s1 s1^-1").free_reduce().is_empty());
        assert!(BraidWord::identity(3).free_reduce().is_empty());
        assert_eq!(w(3, "s1 s2 s2^-1 s1").free_reduce(), w(3, "s1^2"));
    }

    #[test]
    fn perm_rep_generators() {
        assert_eq!(w(3, "s1").perm_rep().images(), &[1, 0, 2]);
        assert_eq!(w(3, "s2").perm_rep().images(), &[0, 2, 1]);
        assert!(w(3, "e").perm_rep().is_identity());
    }

    #[test]
    fn exponent_sums() {
        let inner = w(3, "s1^-1 s2^-2 s1^-1 s2 s1^-1 s2^-2 s1^-1");
        let b = inner.pow(2).concat(&w(3, "s1^-2")).unwrap().pow(2);
        assert_eq!(b.exponent_sum(), -32);
        assert_eq!(BraidWord::identity(2).exponent_sum(), 0);
        assert_eq!(w(2, "s1^2").exponent_sum(), 2);
    }

    #[test]
    fn parse_and_display_round_trip() {
        let b = w(3, "s1 s2^-1 s1^3");
        assert_eq!(b.len(), 5);
        assert_eq!(b.to_string(), "s1 s2^-1 s1^3");
        assert_eq!(w(3, &b.to_string()), b);
        assert_eq!(BraidWord::identity(4).to_string(), "e");
    }

    #[test]
    fn rejects_out_of_range_generators() {
        assert!(BraidWord::parse(2, "s2").is_err());
        assert!(BraidWord::parse(3, "s0").is_err());
        assert!(BraidWord::parse(3, "x1").is_err());
    }

    #[test]
    fn json_is_list_of_pairs() {
        let b = w(3, "s1 s2^-1");
        let js = serde_json::to_string(&b).unwrap();
        assert_eq!(js, r#"{"strands":3,"letters":[[1,1],[2,-1]]}"#);
        let back: BraidWord = serde_json::from_str(&js).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<BraidWord>(r#"{"strands":2,"letters":[[2,1]]}"#).is_err());
    }

    #[test]
    fn homogeneity() {
        assert!(w(3, "s1 s2^-1 s1 s2^-1").is_homogeneous());
        assert!(!w(2, "s1 s1^-1").is_homogeneous());
        assert!(BraidWord::identity(3).is_homogeneous());
    }
}
