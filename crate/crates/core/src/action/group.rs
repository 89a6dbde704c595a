//! Orders and orbits of permutation groups given by generators.

use num_bigint::BigUint;

use crate::braid::Perm;
use crate::error::{Error, Result};

type P = Vec<u32>;

fn compose(s: &P, u: &P) -> P {
    // apply u, then s
    u.iter().map(|&x| s[x as usize]).collect()
}

fn invert(p: &P) -> P {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

fn is_id(p: &P) -> bool {
    p.iter().enumerate().all(|(i, &x)| i as u32 == x)
}

struct Level {
    base: usize,
    /// `trans[x]` maps the base point to `x`.
    trans: Vec<Option<P>>,
    orbit: Vec<usize>,
}

/// Stabilizer chain built by the incremental Schreier-Sims algorithm.
struct Chain {
    degree: usize,
    levels: Vec<Level>,
    /// Strong generators with the level they were added at.
    gens: Vec<(usize, P)>,
    work: Vec<(usize, usize, usize)>,
    stored: usize,
    budget: usize,
}

impl Chain {
    fn new_level(&mut self, g: &P) -> usize {
        let base = g.iter().enumerate().find(|&(i, &x)| i as u32 != x).map(|(i, _)| i).expect("non-identity");
        let mut trans = vec![None; self.degree];
        trans[base] = Some((0..self.degree as u32).collect());
        self.levels.push(Level { base, trans, orbit: vec![base] });
        self.levels.len() - 1
    }

    /// Sifts `g` from level `k`; returns the residue and its level if it is
    /// not the identity.
    fn sift(&self, mut k: usize, mut g: P) -> Option<(usize, P)> {
        while k < self.levels.len() {
            if is_id(&g) {
                return None;
            }
            let lv = &self.levels[k];
            let y = g[lv.base] as usize;
            match &lv.trans[y] {
                Some(t) => {
                    g = compose(&invert(t), &g);
                    k += 1;
                }
                None => return Some((k, g)),
            }
        }
        (!is_id(&g)).then_some((k, g))
    }

    fn add_gen(&mut self, k: usize, g: P) -> Result<()> {
        let k = if k == self.levels.len() { self.new_level(&g) } else { k };
        self.gens.push((k, g));
        let gi = self.gens.len() - 1;
        for lvl in 0..=k {
            for &x in &self.levels[lvl].orbit {
                self.work.push((lvl, x, gi));
            }
        }
        self.stored += self.degree;
        if self.stored > self.budget {
            return Err(Error::EnumerationBudgetExceeded(self.stored / self.degree));
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        while let Some((k, x, gi)) = self.work.pop() {
            let h = compose(&self.gens[gi].1, self.levels[k].trans[x].as_ref().unwrap());
            let y = h[self.levels[k].base] as usize;
            if let Some(uy) = &self.levels[k].trans[y] {
                let s = compose(&invert(uy), &h);
                if let Some((m, r)) = self.sift(k + 1, s) {
                    self.add_gen(m, r)?;
                }
            } else {
                self.levels[k].trans[y] = Some(h);
                self.levels[k].orbit.push(y);
                self.stored += self.degree;
                if self.stored > self.budget {
                    return Err(Error::EnumerationBudgetExceeded(self.stored / self.degree));
                }
                for (j, (lvl, _)) in self.gens.iter().enumerate() {
                    if *lvl >= k {
                        self.work.push((k, y, j));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Order of the group generated by `gens`. `budget` bounds the number of
/// permutation entries stored.
pub fn group_order(gens: &[Perm], budget: usize) -> Result<BigUint> {
    let Some(first) = gens.first() else { return Ok(BigUint::from(1u32)) };
    let degree = first.size();
    let mut chain = Chain { degree, levels: vec![], gens: vec![], work: vec![], stored: 0, budget };
    for g in gens {
        let p: P = g.images().iter().map(|&x| x as u32).collect();
        if let Some((k, r)) = chain.sift(0, p) {
            chain.add_gen(k, r)?;
            chain.run()?;
        }
    }
    Ok(chain.levels.iter().fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len())))
}

/// Orbits of the group generated by `gens` on `0..degree`, each sorted, listed
/// by smallest element.
pub fn orbits(degree: usize, gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..degree).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for g in gens {
        for x in 0..degree {
            let (a, b) = (find(&mut parent, x), find(&mut parent, g.apply(x)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; degree];
    for x in 0..degree {
        let r = find(&mut parent, x);
        if index[r] == usize::MAX {
            index[r] = out.len();
            out.push(vec![]);
        }
        out[index[r]].push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(gens: &[Perm]) -> u64 {
        group_order(gens, 1 << 24).unwrap().try_into().unwrap()
    }

    #[test]
    fn symmetric_and_cyclic_groups() {
        for m in 2..8usize {
            let cyc = Perm::from_images((1..m).chain([0]).collect()).unwrap();
            let tr = Perm::from_cycles(m, &[vec![0, 1]]).unwrap();
            let fact: u64 = (1..=m as u64).product();
            assert_eq!(order(&[cyc.clone(), tr]), fact);
            assert_eq!(order(&[cyc]), m as u64);
        }
    }

    #[test]
    fn alternating_and_small_groups() {
        let a = Perm::from_cycles(5, &[vec![0, 1, 2]]).unwrap();
        let b = Perm::from_cycles(5, &[vec![0, 1, 2, 3, 4]]).unwrap();
        assert_eq!(order(&[a, b]), 60);
        // dihedral group of the square
        let r = Perm::from_cycles(4, &[vec![0, 1, 2, 3]]).unwrap();
        let s = Perm::from_cycles(4, &[vec![1, 3]]).unwrap();
        assert_eq!(order(&[r, s]), 8);
        assert_eq!(order(&[Perm::identity(3)]), 1);
    }

    #[test]
    fn budget_guard() {
        let cyc = Perm::from_images((1..40).chain([0]).collect()).unwrap();
        let tr = Perm::from_cycles(40, &[vec![0, 1]]).unwrap();
        assert!(matches!(group_order(&[cyc, tr], 2000), Err(Error::EnumerationBudgetExceeded(_))));
    }

    #[test]
    fn orbit_partition() {
        let g = Perm::from_cycles(6, &[vec![0, 2], vec![3, 5]]).unwrap();
        assert_eq!(orbits(6, &[g]), vec![vec![0, 2], vec![1], vec![3, 5], vec![4]]);
    }

    fn closure_size(gens: &[Perm]) -> usize {
        let m = gens[0].size();
        let mut seen = std::collections::HashSet::from([Perm::identity(m)]);
        let mut queue = vec![Perm::identity(m)];
        while let Some(p) = queue.pop() {
            for g in gens {
                let q = p.then(g);
                if seen.insert(q.clone()) {
                    queue.push(q);
                }
            }
        }
        seen.len()
    }

    proptest::proptest! {
        #[test]
        fn order_matches_closure(seed in 0u64..10_000, m in 2usize..7, k in 1usize..4) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gens: Vec<Perm> = (0..k)
                .map(|_| {
                    let mut v: Vec<usize> = (0..m).collect();
                    v.shuffle(&mut rng);
                    Perm::from_images(v).unwrap()
                })
                .collect();
            proptest::prop_assert_eq!(order(&gens), closure_size(&gens) as u64);
        }
    }
}
