use std::fmt;

use serde::Serialize;

use crate::braid::{BraidWord, LaurentPoly, Letter};
use crate::error::{Error, Result};

/// Square matrix over integer Laurent polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LaurentMatrix {
    dim: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![LaurentPoly::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = LaurentPoly::one();
        }
        LaurentMatrix { dim, entries }
    }

    pub fn from_entries(dim: usize, entries: Vec<LaurentPoly>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        LaurentMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &LaurentPoly {
        &self.entries[r * self.dim + c]
    }

    fn set(&mut self, r: usize, c: usize, v: LaurentPoly) {
        self.entries[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &LaurentMatrix) -> LaurentMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = LaurentMatrix { dim: d, entries: vec![LaurentPoly::zero(); d * d] };
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = &out.entries[i * d + j] + &(a * b);
                    out.entries[i * d + j] = cur;
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == LaurentMatrix::identity(self.dim)
    }

    pub fn trace(&self) -> LaurentPoly {
        (0..self.dim).fold(LaurentPoly::zero(), |acc, i| &acc + self.get(i, i))
    }

    /// `I - self`
    pub fn one_minus(&self) -> LaurentMatrix {
        let mut m = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let e = if r == c { &LaurentPoly::one() - self.get(r, c) } else { -self.get(r, c).clone() };
                m.set(r, c, e);
            }
        }
        m
    }

    /// Determinant by cofactor expansion along the first row, skipping zero
    /// entries. Dimensions here stay small.
    pub fn det(&self) -> LaurentPoly {
        let idx: Vec<usize> = (0..self.dim).collect();
        self.minor_det(0, &idx)
    }

    fn minor_det(&self, row: usize, cols: &[usize]) -> LaurentPoly {
        match cols.len() {
            0 => LaurentPoly::one(),
            1 => self.get(row, cols[0]).clone(),
            _ => {
                let mut acc = LaurentPoly::zero();
                for (k, &c) in cols.iter().enumerate() {
                    let a = self.get(row, c);
                    if a.is_zero() {
                        continue;
                    }
                    let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = a * &self.minor_det(row + 1, &rest);
                    acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn t(k: i64) -> LaurentPoly {
    LaurentPoly::monomial(1, k)
}

fn mono(c: i64, k: i64) -> LaurentPoly {
    LaurentPoly::monomial(c, k)
}

/// Reduced Burau matrix of a single letter on `n` strands.
pub fn burau_letter(n: usize, l: Letter) -> LaurentMatrix {
    assert!(n >= 2);
    let d = n - 1;
    let mut m = LaurentMatrix::identity(d);
    if d == 1 {
        let e = if l.sign > 0 { mono(-1, 1) } else { mono(-1, -1) };
        m.set(0, 0, e);
        return m;
    }
    let r = l.index - 1;
    let pos = l.sign > 0;
    // the (r, r) entry and its neighbours in row r
    m.set(r, r, if pos { mono(-1, 1) } else { mono(-1, -1) });
    if r > 0 {
        m.set(r, r - 1, if pos { t(1) } else { LaurentPoly::one() });
    }
    if r + 1 < d {
        m.set(r, r + 1, if pos { LaurentPoly::one() } else { t(-1) });
    }
    m
}

pub fn burau_reduced(w: &BraidWord) -> LaurentMatrix {
    let n = w.strands().max(2);
    w.letters().iter().fold(LaurentMatrix::identity(n - 1), |acc, &l| acc.mul(&burau_letter(n, l)))
}

/// Outcome of a group-element comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Equality {
    pub equal: bool,
    /// False when the answer rests on a test that is not known to be
    /// complete for this strand count.
    pub authoritative: bool,
}

pub fn braids_equal(a: &BraidWord, b: &BraidWord) -> Result<Equality> {
    if a.strands() != b.strands() {
        return Err(Error::StrandMismatch { left: a.strands(), right: b.strands() });
    }
    let n = a.strands();
    if n == 1 {
        return Ok(Equality { equal: true, authoritative: true });
    }
    let fa = a.free_reduce();
    let fb = b.free_reduce();
    if fa == fb {
        return Ok(Equality { equal: true, authoritative: true });
    }
    if fa.perm_rep() != fb.perm_rep() || fa.exponent_sum() != fb.exponent_sum() {
        return Ok(Equality { equal: false, authoritative: true });
    }
    let same = burau_reduced(&fa) == burau_reduced(&fb);
    Ok(Equality { equal: same, authoritative: n <= 3 || !same })
}

/// Convenience wrapper for strand counts where the Burau test is decisive.
pub fn same_braid(a: &BraidWord, b: &BraidWord) -> bool {
    braids_equal(a, b).map(|e| e.equal).unwrap_or(false)
}

/// Single-variable Alexander polynomial of the closure together with its
/// breadth (the degree of the Conway polynomial).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Alexander {
    pub poly: LaurentPoly,
    pub breadth: u64,
    /// Breadth of `det(I - burau)` before dividing out `1 + t + ... + t^(n-1)`.
    pub det_breadth: u64,
}

pub fn alexander_poly(w: &BraidWord) -> Result<Alexander> {
    let n = w.strands();
    if n < 2 {
        return Ok(Alexander { poly: LaurentPoly::one(), breadth: 0, det_breadth: 0 });
    }
    let det = burau_reduced(w).one_minus().det();
    if det.is_zero() {
        return Err(Error::DegenerateClosure);
    }
    let ones = LaurentPoly::from_i64(0, &vec![1; n]);
    let q = det.div_exact(&ones).ok_or(Error::DegenerateClosure)?;
    let poly = q.normalize_unit();
    let breadth = poly.breadth();
    Ok(Alexander { poly, breadth, det_breadth: det.breadth() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> BraidWord {
        BraidWord::parse(n, s).unwrap()
    }

    #[test]
    fn homomorphism_basics() {
        assert!(burau_reduced(&BraidWord::identity(3)).is_identity());
        for n in 2..5 {
            for i in 1..n {
                let g = BraidWord::generator_power(n, i, 1).unwrap();
                assert!(burau_reduced(&g.concat(&g.inverse()).unwrap()).is_identity());
            }
        }
    }

    #[test]
    fn braid_relations() {
        assert_eq!(burau_reduced(&w(3, "s1 s2 s1")), burau_reduced(&w(3, "s2 s1 s2")));
        assert_eq!(burau_reduced(&w(4, "s1 s3")), burau_reduced(&w(4, "s3 s1")));
        assert_eq!(burau_reduced(&w(4, "s2 s3 s2")), burau_reduced(&w(4, "s3 s2 s3")));
    }

    #[test]
    fn equality() {
        assert!(braids_equal(&w(3, "s1 s2 s1"), &w(3, "s2 s1 s2")).unwrap().equal);
        assert!(!braids_equal(&w(3, "s1"), &w(3, "s2")).unwrap().equal);
        assert!(braids_equal(&w(3, "s1"), &w(2, "s1")).is_err());
        let e = braids_equal(&w(4, "s1 s2 s1"), &w(4, "s2 s1 s2")).unwrap();
        assert!(e.equal && !e.authoritative);
    }

    #[test]
    fn alexander_examples() {
        assert_eq!(alexander_poly(&w(2, "s1^3")).unwrap().poly.to_string(), "t^2 - t + 1");
        assert!(alexander_poly(&w(2, "s1")).unwrap().poly.is_one());
        assert_eq!(alexander_poly(&w(3, "s1 s2^-1 s1 s2^-1")).unwrap().poly.to_string(), "t^2 - 3t + 1");
        assert_eq!(alexander_poly(&BraidWord::identity(2)), Err(Error::DegenerateClosure));
    }
}
