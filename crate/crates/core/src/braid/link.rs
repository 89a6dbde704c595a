use std::collections::BTreeMap;

use serde::Serialize;

use crate::braid::BraidWord;

/// Pairwise linking numbers of the components of a braid closure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkingData {
    /// Components as lists of strand positions (cycles of the permutation).
    pub components: Vec<Vec<usize>>,
    /// `(i, j) -> lk(C_i, C_j)` for every `i < j`.
    pub pairs: BTreeMap<(usize, usize), i64>,
}

impl LinkingData {
    pub fn values(&self) -> Vec<i64> {
        self.pairs.values().copied().collect()
    }

    pub fn total(&self) -> i64 {
        self.pairs.values().sum()
    }

    pub fn abs_total(&self) -> i64 {
        self.pairs.values().map(|v| v.abs()).sum()
    }
}

pub fn linking_numbers(w: &BraidWord) -> LinkingData {
    let n = w.strands();
    let components = w.perm_rep().cycles();
    let mut comp_of = vec![0; n];
    for (ci, cyc) in components.iter().enumerate() {
        for &s in cyc {
            comp_of[s] = ci;
        }
    }
    let mut twice = BTreeMap::new();
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            twice.insert((i, j), 0i64);
        }
    }
    // at[p] = starting position of the strand currently at position p
    let mut at: Vec<usize> = (0..n).collect();
    for l in w.letters() {
        let a = comp_of[at[l.index - 1]];
        let b = comp_of[at[l.index]];
        if a != b {
            *twice.get_mut(&(a.min(b), a.max(b))).unwrap() += l.sign as i64;
        }
        at.swap(l.index - 1, l.index);
    }
    let pairs = twice.into_iter().map(|(k, v)| (k, v / 2)).collect();
    LinkingData { components, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hopf_and_trivial() {
        let hopf = linking_numbers(&BraidWord::parse(2, "s1^2").unwrap());
        assert_eq!(hopf.values(), vec![1]);
        let triv = linking_numbers(&BraidWord::identity(2));
        assert_eq!(triv.values(), vec![0]);
        let knot = linking_numbers(&BraidWord::parse(2, "s1^3").unwrap());
        assert!(knot.pairs.is_empty());
    }
}

#[cfg(test)]
mod three_component {
    use super::*;
    use crate::braid::alexander_poly;

    #[test]
    fn pure_three_strand_example() {
        let inner = BraidWord::parse(3, "s1^-1 s2^-2 s1^-1 s2 s1^-1 s2^-2 s1^-1").unwrap();
        let b = inner.pow(2).concat(&BraidWord::parse(3, "s1^-2").unwrap()).unwrap().pow(2);
        let lk = linking_numbers(&b);
        let mut v = lk.values();
        v.sort();
        assert_eq!(v, vec![-10, -8, 2]);
        assert_eq!(2 * lk.total(), b.exponent_sum());
        let a = alexander_poly(&b).unwrap();
        assert_eq!(a.breadth, 30, "{}", a.poly);
        assert_eq!(a.det_breadth, 32);
        // (t - 1)^2 divides the polynomial of a 3-component link
        let sq = crate::braid::LaurentPoly::from_i64(0, &[1, -2, 1]);
        assert!(a.poly.div_exact(&sq).is_some());
    }
}
