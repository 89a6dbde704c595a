//! Fibers of the critical-value map.

use std::f64::consts::TAU;

use pathfinding::prelude::{kuhn_munkres_min, Matrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::braid::Perm;
use crate::error::{Error, Result};
use crate::poly::{newton_critical_points, set_distance, ConfigKind, ConfigPoint, MonicPoly, C64, TAU_SEP};
use crate::reference::Reference;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberOptions {
    pub tau_sep: f64,
    pub seed: u64,
    pub starts_per_ordering: usize,
    pub max_rounds: usize,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions { tau_sep: TAU_SEP, seed: 0, starts_per_ordering: 48, max_rounds: 12 }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Halton point `index` mapped into a product of disks of radius `r`.
fn halton_start(index: u64, dim: usize, r: f64) -> Vec<C64> {
    (0..dim)
        .map(|k| {
            let u = radical_inverse(index, PRIMES[2 * k % PRIMES.len()]);
            let a = radical_inverse(index, PRIMES[(2 * k + 1) % PRIMES.len()]);
            C64::from_polar(r * u.sqrt(), TAU * a)
        })
        .collect()
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

fn canonical_cmp(a: &MonicPoly, b: &MonicPoly) -> std::cmp::Ordering {
    let ka = a.sorted_critical_points();
    let kb = b.sorted_critical_points();
    for (x, y) in ka.iter().zip(&kb) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn same_poly(a: &MonicPoly, b: &MonicPoly, tol: f64) -> bool {
    set_distance(&a.critical_points, &b.critical_points) <= tol
}

pub fn fiber_degree(n: usize) -> usize {
    n.pow(n as u32 - 1)
}

/// All `n^(n-1)` polynomials whose critical values are the entries of `v`.
pub fn solve_fiber(v: &[C64], opts: &FiberOptions) -> Result<Vec<MonicPoly>> {
    let point = ConfigPoint::checked(ConfigKind::V, v.to_vec(), opts.tau_sep)?;
    let d = point.points.len();
    let n = d + 1;
    let expected = fiber_degree(n);
    let vmax = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let radius = 3.0 * vmax.powf(1.0 / n as f64);
    let dedup_tol = 1e-7 * (1.0 + radius);
    let orderings = permutations(d);
    let mut found: Vec<MonicPoly> = Vec::new();
    let omega = C64::from_polar(1.0, TAU / n as f64);

    for round in 0..opts.max_rounds {
        let first = opts.seed * 7919 + 1 + (round * opts.starts_per_ordering) as u64;
        let jobs: Vec<(usize, u64)> = orderings
            .iter()
            .enumerate()
            .flat_map(|(oi, _)| (0..opts.starts_per_ordering as u64).map(move |s| (oi, first + s)))
            .collect();
        let mut sols: Vec<(usize, u64, Vec<C64>)> = jobs
            .par_iter()
            .filter_map(|&(oi, idx)| {
                let target: Vec<C64> = orderings[oi].iter().map(|&k| point.points[k]).collect();
                let start = halton_start(idx, d, radius);
                newton_critical_points(&start, &target, 60, 1e-13).map(|c| (oi, idx, c))
            })
            .collect();
        sols.sort_by_key(|s| (s.0, s.1));
        for (_, _, c) in sols {
            let Ok(p) = MonicPoly::from_critical_points(&c) else { continue };
            if !p.in_z(opts.tau_sep) || set_distance(&p.critical_values, v) > 1e-8 * (1.0 + vmax) {
                continue;
            }
            let mut rot = C64::new(1.0, 0.0);
            for _ in 0..n {
                if let Ok(q) = p.scaled(rot) {
                    if !found.iter().any(|f| same_poly(f, &q, dedup_tol)) {
                        found.push(q);
                    }
                }
                rot *= omega;
            }
        }
        if found.len() >= expected {
            break;
        }
    }
    if found.len() != expected {
        return Err(Error::FiberIncomplete { found: found.len(), expected });
    }
    found.sort_by(canonical_cmp);
    Ok(found)
}

/// The `n` rotations of `p` by powers of `e^(2 pi i / n)`.
pub fn root_of_unity_orbit(p: &MonicPoly) -> Result<Vec<MonicPoly>> {
    let n = p.degree;
    (0..n).map(|k| p.scaled(C64::from_polar(1.0, TAU * k as f64 / n as f64))).collect()
}

/// The `n^n` labeled preimages of the `n` points `x_s` obtained from a base
/// configuration by differences.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledFiber {
    pub n: usize,
    /// Base points sorted by real part.
    pub base: Vec<C64>,
    /// `v_points[s]` = `z_k - z_s` for `k != s` (in position order).
    pub v_points: Vec<Vec<C64>>,
    /// `points[label]`
    pub points: Vec<MonicPoly>,
    /// Real-order position of the base strand each label lies over.
    pub covers: Vec<usize>,
    pub residue_of_position: Vec<usize>,
    pub hash: String,
}

/// Sorts base points by real part and rejects near-ties.
pub fn sort_base(base: &[C64], tau: f64) -> Result<Vec<C64>> {
    let mut b = base.to_vec();
    b.sort_by(|x, y| x.re.total_cmp(&y.re));
    for w in b.windows(2) {
        if (w[1].re - w[0].re).abs() <= tau {
            return Err(Error::NonGenericBase(format!("real parts of {} and {} coincide", w[0], w[1])));
        }
    }
    Ok(b)
}

pub fn differences(base: &[C64], s: usize) -> Vec<C64> {
    base.iter().enumerate().filter(|&(k, _)| k != s).map(|(_, &z)| z - base[s]).collect()
}

pub fn base_hash(n: usize, base: &[C64], residues: &[usize]) -> String {
    let mut h = Sha256::new();
    h.update(format!("n={n};"));
    for z in base {
        h.update(format!("{:.12e},{:.12e};", z.re, z.im));
    }
    h.update(format!("{residues:?}"));
    hex::encode(h.finalize())
}

/// Default residue convention: position `s` carries residue `(s + 1) mod n`.
pub fn default_residues(n: usize) -> Vec<usize> {
    (0..n).map(|s| (s + 1) % n).collect()
}

/// Builds the labeled fiber. With a reference whose base matches, labels
/// follow the reference table; otherwise labels inside each residue class
/// follow the canonical order of sorted critical points.
pub fn full_fiber(base: &[C64], opts: &FiberOptions, reference: Option<&Reference>) -> Result<LabeledFiber> {
    let n = base.len();
    if n < 2 {
        return Err(Error::Config("need at least two base points".into()));
    }
    let sorted = sort_base(base, opts.tau_sep)?;
    ConfigPoint::checked(ConfigKind::C, sorted.clone(), opts.tau_sep)
        .map_err(|e| Error::NonGenericBase(e.to_string()))?;
    let reference = reference.filter(|r| r.n == n && r.matches_base(&sorted));
    let residues = reference.map(|r| r.residue_of_position.clone()).unwrap_or_else(|| default_residues(n));
    let v_points: Vec<Vec<C64>> = (0..n).map(|s| differences(&sorted, s)).collect();
    let fibers: Vec<Vec<MonicPoly>> =
        v_points.par_iter().map(|v| solve_fiber(v, opts)).collect::<Result<Vec<_>>>()?;

    let total = n.pow(n as u32);
    let mut points: Vec<Option<MonicPoly>> = vec![None; total];
    let mut covers = vec![0; total];
    let ref_roots = reference.map(|r| r.label_roots());
    for (s, fib) in fibers.into_iter().enumerate() {
        let r = residues[s];
        let labels: Vec<usize> = (0..fib.len()).map(|k| r + n * k).collect();
        let order: Vec<usize> = match &ref_roots {
            Some(rr) => {
                let targets: Vec<Vec<C64>> = labels.iter().map(|&l| rr[l].clone()).collect();
                let computed: Vec<Vec<C64>> = fib.iter().map(|p| p.nonzero_roots().to_vec()).collect();
                let (assign, dev) = assign_min_cost(&computed, &targets)?;
                let tol = reference.unwrap().match_tolerance;
                if dev > tol {
                    return Err(Error::NoConsistentMatching(format!("deviation {dev:.3e} over position {s}")));
                }
                assign
            }
            None => (0..fib.len()).collect(),
        };
        for (k, p) in fib.into_iter().enumerate() {
            let label = labels[order[k]];
            covers[label] = s;
            points[label] = Some(p);
        }
    }
    let points: Vec<MonicPoly> = points.into_iter().map(|p| p.expect("every label assigned")).collect();
    let hash = base_hash(n, &sorted, &residues);
    Ok(LabeledFiber { n, base: sorted, v_points, points, covers, residue_of_position: residues, hash })
}

/// Minimal-cost bijection between root tuples (compared as unordered sets);
/// returns `assign[i]` (index into `targets`) and the largest matched
/// deviation.
pub fn assign_min_cost(computed: &[Vec<C64>], targets: &[Vec<C64>]) -> Result<(Vec<usize>, f64)> {
    let m = computed.len();
    if m != targets.len() {
        return Err(Error::NoConsistentMatching(format!("{m} computed vs {} reference points", targets.len())));
    }
    if m == 0 {
        return Ok((vec![], 0.0));
    }
    let dist: Vec<Vec<f64>> = computed.iter().map(|a| targets.iter().map(|b| set_cost(a, b)).collect()).collect();
    // integer weights for the assignment solver
    let weights = Matrix::from_rows(
        dist.iter().map(|row| row.iter().map(|&x| (x.min(1e6) * 1e9).round() as i64).collect::<Vec<_>>()),
    )
    .expect("rectangular cost matrix");
    let (_, assign) = kuhn_munkres_min(&weights);
    let dev = (0..m).map(|i| set_distance(&computed[i], &targets[assign[i]])).fold(0.0, f64::max);
    Ok((assign, dev))
}

fn set_cost(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let (p, cost) = crate::poly::best_matching(a, b);
    let _ = p;
    cost
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceMatch {
    /// `relabel[i]` = reference label of computed label `i`.
    pub relabel: Perm,
    pub max_deviation: f64,
}

/// Aligns computed labels with published coordinates.
pub fn match_to_reference(f: &LabeledFiber, reference: &[Vec<C64>], tol: f64) -> Result<ReferenceMatch> {
    let computed: Vec<Vec<C64>> = f.points.iter().map(|p| p.nonzero_roots().to_vec()).collect();
    let (assign, dev) = assign_min_cost(&computed, reference)?;
    if dev > tol {
        return Err(Error::NoConsistentMatching(format!("max deviation {dev:.3e} exceeds {tol:.1e}")));
    }
    Ok(ReferenceMatch { relabel: Perm::from_images(assign)?, max_deviation: dev })
}

/// Empirical check of the negation symmetry: for how many fiber points `y`
/// over the same `x` is there another point sharing a root with `-y_1`.
#[derive(Clone, Debug, Serialize)]
pub struct NegationReport {
    pub checked: usize,
    pub satisfied: usize,
}

pub fn negation_symmetry(f: &LabeledFiber, tol: f64) -> NegationReport {
    let mut checked = 0;
    let mut satisfied = 0;
    for (i, p) in f.points.iter().enumerate() {
        for &y in p.nonzero_roots() {
            checked += 1;
            let hit = f.points.iter().enumerate().any(|(j, q)| {
                j != i && f.covers[j] == f.covers[i] && q.nonzero_roots().iter().any(|&r| (r + y).norm() < tol)
            });
            if hit {
                satisfied += 1;
            }
        }
    }
    NegationReport { checked, satisfied }
}

impl LabeledFiber {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The position whose `x_s` a given critical-value set equals, if any.
    pub fn position_of_values(&self, values: &[C64], tol: f64) -> Option<usize> {
        (0..self.n).find(|&s| set_distance(&self.v_points[s], values) <= tol)
    }

    /// Label of the fiber point closest to `p` (by critical points), if within
    /// `tol`.
    pub fn label_of(&self, p: &MonicPoly, tol: f64) -> Option<usize> {
        let (best, d) = self
            .points
            .iter()
            .enumerate()
            .map(|(i, q)| (i, set_distance(&q.critical_points, &p.critical_points)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        (d <= tol).then_some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn quadratic_fibers() {
        let eps: f64 = 0.8;
        let x = C64::from_polar(1.0, eps);
        let fib = solve_fiber(&[x], &FiberOptions::default()).unwrap();
        assert_eq!(fib.len(), 2);
        let want = C64::from_polar(2.0, (eps + std::f64::consts::PI) / 2.0);
        for p in &fib {
            let z = p.nonzero_roots()[0];
            assert!((z - want).norm() < 1e-12 || (z + want).norm() < 1e-12);
        }
    }

    #[test]
    fn cubic_fiber_count_and_residual() {
        let v = [C64::from_polar(1.0, std::f64::consts::FRAC_PI_4), c(2.0, 0.0)];
        let fib = solve_fiber(&v, &FiberOptions::default()).unwrap();
        assert_eq!(fib.len(), 9);
        for p in &fib {
            assert!(set_distance(&p.critical_values, &v) < 1e-8);
        }
    }

    #[test]
    fn orbit_properties() {
        let p = MonicPoly::from_nonzero_roots(&[c(0.0, 2.0)]).unwrap();
        let orb = root_of_unity_orbit(&p).unwrap();
        assert_eq!(orb.len(), 2);
        assert!((orb[1].nonzero_roots()[0] - c(0.0, -2.0)).norm() < 1e-12);
        for q in &orb {
            assert!(set_distance(&q.critical_values, &p.critical_values) < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(solve_fiber(&[c(0.0, 0.0)], &FiberOptions::default()), Err(Error::NotInV(_))));
        let base = [c(0.0, 0.0), c(0.0, 1.0)];
        assert!(matches!(full_fiber(&base, &FiberOptions::default(), None), Err(Error::NonGenericBase(_))));
    }

    #[test]
    fn self_match_is_identity() {
        let base = [c(-0.5, 0.1), c(0.5, -0.1)];
        let f = full_fiber(&base, &FiberOptions::default(), None).unwrap();
        assert_eq!(f.len(), 4);
        let own: Vec<Vec<C64>> = f.points.iter().map(|p| p.nonzero_roots().to_vec()).collect();
        let m = match_to_reference(&f, &own, 1e-3).unwrap();
        assert!(m.relabel.is_identity());
        assert!(m.max_deviation == 0.0);
        let rotated: Vec<Vec<C64>> = (0..4).map(|i| own[(i + 1) % 4].clone()).collect();
        let m = match_to_reference(&f, &rotated, 1e-3).unwrap();
        assert_eq!(m.relabel.images(), &[3, 0, 1, 2]);
    }

    #[test]
    fn reference_labels_reproduced() {
        for n in [2, 3] {
            let r = Reference::for_n(n).unwrap();
            let f = full_fiber(&r.base(), &FiberOptions::default(), Some(&r)).unwrap();
            assert_eq!(f.len(), n.pow(n as u32));
            let m = match_to_reference(&f, &r.label_roots(), r.match_tolerance).unwrap();
            assert!(m.relabel.is_identity(), "n = {n}");
            assert!(m.max_deviation < r.match_tolerance);
            for (l, &s) in f.covers.iter().enumerate() {
                assert_eq!(l % n, r.residue_of_position[s]);
            }
        }
    }
}
