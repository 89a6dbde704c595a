//! The action by recursive lifting through the tower of coverings.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::action::{ActionKind, AdicPrefix};
use crate::braid::{BraidWord, Perm};
use crate::error::{Error, Result};
use crate::fiber::{solve_fiber, FiberOptions, LabeledFiber};
use crate::lift::{lift_from, lift_path, project_to_v, word_loop, Embedding, LiftOptions, PolyPath, SampledPath};
use crate::poly::{best_matching, set_distance, MonicPoly, C64};

/// Labeled base fiber plus lazily solved fibers over deeper tower levels.
///
/// A level-`j` point is named by a chain `[L, d_3, ..., d_{j+1}]`: a base
/// fiber label followed by indices into the fibers over the strand points
/// (roots, or critical points) of the previous level. Each deeper fiber is
/// ordered canonically by sorted critical points.
pub struct PhiTower {
    fiber: LabeledFiber,
    pub embedding: Embedding,
    pub lift_opts: LiftOptions,
    pub fiber_opts: FiberOptions,
    pub max_depth: usize,
    cache: Mutex<HashMap<Vec<usize>, Arc<Vec<MonicPoly>>>>,
}

pub fn default_max_depth(n: usize) -> usize {
    match n {
        2 => 3,
        3 => 2,
        _ => 1,
    }
}

impl PhiTower {
    pub fn new(fiber: LabeledFiber, embedding: Embedding, lift_opts: LiftOptions, fiber_opts: FiberOptions) -> Self {
        let max_depth = default_max_depth(fiber.n);
        PhiTower { fiber, embedding, lift_opts, fiber_opts, max_depth, cache: Mutex::new(HashMap::new()) }
    }

    pub fn fiber(&self) -> &LabeledFiber {
        &self.fiber
    }

    fn strand_points(&self, p: &MonicPoly) -> Vec<C64> {
        match self.embedding {
            Embedding::Roots => p.nonzero_roots().to_vec(),
            Embedding::CriticalPoints => p.critical_points.clone(),
        }
    }

    /// The polynomial named by `chain`.
    pub fn poly(&self, chain: &[usize]) -> Result<MonicPoly> {
        match chain {
            [] => Err(Error::BadPrefix("empty chain".into())),
            [l] => self.fiber.points.get(*l).cloned().ok_or_else(|| Error::BadPrefix(format!("no label {l}"))),
            _ => {
                let (last, parent) = chain.split_last().unwrap();
                let f = self.fiber_over(parent)?;
                f.get(*last).cloned().ok_or_else(|| Error::BadPrefix(format!("no fiber index {last}")))
            }
        }
    }

    /// The fiber over the strand points of the polynomial named by `chain`.
    pub fn fiber_over(&self, chain: &[usize]) -> Result<Arc<Vec<MonicPoly>>> {
        if let Some(f) = self.cache.lock().unwrap().get(chain) {
            return Ok(f.clone());
        }
        let p = self.poly(chain)?;
        let f = Arc::new(solve_fiber(&self.strand_points(&p), &self.fiber_opts)?);
        self.cache.lock().unwrap().insert(chain.to_vec(), f.clone());
        Ok(f)
    }

    pub fn points(&self, depth: usize) -> usize {
        let n = self.fiber.n;
        n * n.pow(n as u32 - 1).pow(depth as u32)
    }
}

struct LiftNode {
    path: PolyPath,
    end: Vec<usize>,
}

/// Memoised lifts of one loop through the tower.
struct Run<'a> {
    tower: &'a PhiTower,
    vpaths: Vec<SampledPath>,
    end_positions: Vec<usize>,
    memo: Mutex<HashMap<Vec<usize>, Arc<LiftNode>>>,
}

impl<'a> Run<'a> {
    fn new(tower: &'a PhiTower, w: &BraidWord) -> Result<Self> {
        let f = &tower.fiber;
        if w.strands() != f.n {
            return Err(Error::StrandMismatch { left: w.strands(), right: f.n });
        }
        let path = word_loop(w, &f.base, tower.lift_opts.samples)?;
        let end = path.end();
        let mut order: Vec<usize> = (0..f.n).collect();
        order.sort_by(|&a, &b| end[a].re.total_cmp(&end[b].re));
        let mut end_positions = vec![0; f.n];
        for (pos, &s) in order.iter().enumerate() {
            end_positions[s] = pos;
        }
        let vpaths = (0..f.n).map(|s| project_to_v(&path, s)).collect::<Result<Vec<_>>>()?;
        Ok(Run { tower, vpaths, end_positions, memo: Mutex::new(HashMap::new()) })
    }

    fn lift(&self, chain: &[usize]) -> Result<Arc<LiftNode>> {
        if let Some(n) = self.memo.lock().unwrap().get(chain) {
            return Ok(n.clone());
        }
        let t = self.tower;
        let node = if let [l] = chain {
            let pp = lift_path(&self.vpaths[t.fiber.covers[*l]], *l, &t.fiber, &t.lift_opts)?;
            let end = vec![pp.end_label.unwrap()];
            LiftNode { path: pp, end }
        } else {
            let (_, parent_chain) = chain.split_last().unwrap();
            let parent = self.lift(parent_chain)?;
            let vpath = parent.path.strand_path(t.embedding);
            let p = t.poly(chain)?;
            let (perm, _) = best_matching(vpath.start(), &p.critical_values);
            let c_start: Vec<C64> = perm.iter().map(|&j| p.critical_points[j]).collect();
            let pp = lift_from(&vpath, &c_start, &t.lift_opts)?;
            let end_poly = pp.end_poly()?;
            let target = t.fiber_over(&parent.end)?;
            let scale = 1.0 + end_poly.critical_points.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let (idx, d) = target
                .iter()
                .enumerate()
                .map(|(i, q)| (i, set_distance(&q.critical_points, &end_poly.critical_points)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or(Error::EndpointUnmatched)?;
            if d > 1e-6 * scale {
                return Err(Error::EndpointUnmatched);
            }
            let mut end = parent.end.clone();
            end.push(idx);
            LiftNode { path: pp, end }
        };
        let node = Arc::new(node);
        self.memo.lock().unwrap().insert(chain.to_vec(), node.clone());
        Ok(node)
    }

    fn apply(&self, a: &AdicPrefix) -> Result<AdicPrefix> {
        let f = &self.tower.fiber;
        let n = f.n;
        let s = a.digits[0];
        let mut out = vec![self.end_positions[s]];
        if a.len() > 1 {
            let mut chain = vec![f.residue_of_position[s] + n * a.digits[1]];
            chain.extend_from_slice(&a.digits[2..]);
            let node = self.lift(&chain)?;
            let l = node.end[0];
            if f.covers[l] != out[0] {
                return Err(Error::EndpointUnmatched);
            }
            out.push(l / n);
            out.extend_from_slice(&node.end[1..]);
        }
        AdicPrefix::new(ActionKind::Phi, n, out)
    }
}

fn check_depth(tower: &PhiTower, depth: usize) -> Result<()> {
    if depth > tower.max_depth {
        return Err(Error::DepthExceeded { requested: depth, max: tower.max_depth });
    }
    Ok(())
}

/// `phi(w, a)`. The first digit is a strand position, moved by the
/// permutation of `w`; the second digit together with the first names a base
/// fiber label (`residue(d_1) + n d_2`); deeper digits index tower fibers.
pub fn phi_apply(w: &BraidWord, a: &AdicPrefix, tower: &PhiTower) -> Result<AdicPrefix> {
    if a.kind != ActionKind::Phi || a.n != tower.fiber.n {
        return Err(Error::BadPrefix("phi needs a phi prefix for the tower's n".into()));
    }
    check_depth(tower, a.len() - 1)?;
    Run::new(tower, w)?.apply(a)
}

/// The action on all `n (n^(n-1))^j` prefixes of length `j + 1`, indexed in
/// mixed radix `d_1 + n d_2 + n^n d_3 + ...`.
pub fn phi_level_perm(w: &BraidWord, j: usize, tower: &PhiTower) -> Result<Perm> {
    check_depth(tower, j)?;
    let n = tower.fiber.n;
    let total = tower.points(j);
    let run = Run::new(tower, w)?;
    let images = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut digits = Vec::with_capacity(j + 1);
            let mut rest = idx;
            for k in 0..=j {
                let r = AdicPrefix::radix(ActionKind::Phi, n, k);
                digits.push(rest % r);
                rest /= r;
            }
            let a = AdicPrefix::new(ActionKind::Phi, n, digits)?;
            let b = run.apply(&a)?;
            let mut out = 0;
            let mut scale = 1;
            for (k, &d) in b.digits.iter().enumerate() {
                out += d * scale;
                scale *= AdicPrefix::radix(ActionKind::Phi, n, k);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Perm::from_images(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{orbit_partition, tests::n2_tables, Level};
    use crate::fiber::full_fiber;
    use crate::reference::Reference;

    fn tower(n: usize) -> PhiTower {
        let r = Reference::for_n(n).unwrap();
        let f = full_fiber(&r.base(), &FiberOptions::default(), Some(&r)).unwrap();
        PhiTower::new(f, Embedding::Roots, LiftOptions::default(), FiberOptions::default())
    }

    #[test]
    fn first_digit_is_the_permutation_representation() {
        let t = tower(3);
        for i in 1..3 {
            let w = BraidWord::generator_power(3, i, 1).unwrap();
            for s in 0..3 {
                let a = AdicPrefix::new(ActionKind::Phi, 3, vec![s]).unwrap();
                assert_eq!(phi_apply(&w, &a, &t).unwrap().digits[0], w.perm_rep().apply(s));
            }
        }
    }

    #[test]
    fn n2_level_one_agrees_with_psi() {
        let t = tower(2);
        let psi = n2_tables();
        let w = BraidWord::generator_power(2, 1, 1).unwrap();
        let f = t.fiber();
        for d1 in 0..2 {
            for d2 in 0..2 {
                let a = AdicPrefix::new(ActionKind::Phi, 2, vec![d1, d2]).unwrap();
                let b = phi_apply(&w, &a, &t).unwrap();
                let l = f.residue_of_position[d1] + 2 * d2;
                let l2 = f.residue_of_position[b.digits[0]] + 2 * b.digits[1];
                assert_eq!(l2, psi.tables[&1].perm.apply(l));
            }
        }
        let orb = orbit_partition(1, Level::Phi(&t)).unwrap();
        assert_eq!(orb.len(), 1);
    }

    #[test]
    fn depth_guard() {
        let t = tower(2);
        let w = BraidWord::generator_power(2, 1, 1).unwrap();
        let a = AdicPrefix::new(ActionKind::Phi, 2, vec![0; 5]).unwrap();
        assert!(matches!(phi_apply(&w, &a, &t), Err(Error::DepthExceeded { requested: 4, max: 3 })));
    }

    #[test]
    fn n2_deeper_levels_are_bijective_and_compatible() {
        let t = tower(2);
        let w = BraidWord::generator_power(2, 1, 1).unwrap();
        let p2 = phi_level_perm(&w, 2, &t).unwrap();
        let p1 = phi_level_perm(&w, 1, &t).unwrap();
        for x in 0..p2.size() {
            assert_eq!(p2.apply(x) % 4, p1.apply(x % 4));
        }
    }
}
