//! Monic complex polynomials with zero constant term, represented by their
//! critical points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const TAU_SEP: f64 = 1e-8;

/// Ascending coefficients of `prod (u - r)`.
pub fn coeffs_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (k, &a) in c.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        c = next;
    }
    c
}

/// Evaluates ascending coefficients at `z`.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `sum |a_k| |z|^k`, the natural scale for the rounding error of `horner`.
pub fn horner_scale(coeffs: &[C64], z: C64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Antiderivative with zero constant term, scaled by `scale`.
fn integrate(coeffs: &[C64], scale: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    out.extend(coeffs.iter().enumerate().map(|(k, &a)| a * (scale / (k as f64 + 1.0))));
    out
}

/// Coefficients of `f(u) = n * int_0^u prod (w - c_i) dw`, monic of degree
/// `n = c.len() + 1` with constant term 0.
pub fn coeffs_from_critical_points(c: &[C64]) -> Vec<C64> {
    let n = c.len() + 1;
    integrate(&coeffs_from_roots(c), n as f64)
}

#[derive(Clone, Debug)]
pub struct RootReport {
    pub roots: Vec<C64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Simultaneous Aberth iteration on ascending coefficients (leading nonzero).
/// Deterministic start: points on a circle with a fixed angular offset.
pub fn aberth(coeffs: &[C64], max_iter: usize) -> RootReport {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return RootReport { roots: vec![], converged: true, iterations: 0 };
    }
    let lead = coeffs[deg];
    let p: Vec<C64> = coeffs.iter().map(|&a| a / lead).collect();
    let dp = derivative(&p);
    if deg == 1 {
        return RootReport { roots: vec![-p[0]], converged: true, iterations: 0 };
    }
    // Fujiwara-type bound for the start radius
    let mut radius: f64 = 0.0;
    for k in 1..=deg {
        let a = p[deg - k].norm();
        let b = if k == deg { (a / 2.0).powf(1.0 / k as f64) } else { a.powf(1.0 / k as f64) };
        radius = radius.max(b);
    }
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut best = RootReport { roots: vec![], converged: false, iterations: 0 };
    for attempt in 0..4 {
        let offset = 0.4 + 0.37 * attempt as f64;
        let shrink = [1.0, 0.5, 1.3, 0.8][attempt];
        let mut z: Vec<C64> = (0..deg)
            .map(|k| C64::from_polar(radius * shrink, offset + std::f64::consts::TAU * k as f64 / deg as f64))
            .collect();
        let mut done = vec![false; deg];
        let mut iters = 0;
        while iters < max_iter && done.iter().any(|d| !d) {
            iters += 1;
            for k in 0..deg {
                if done[k] {
                    continue;
                }
                let pz = horner(&p, z[k]);
                let scale = horner_scale(&p, z[k]);
                if pz.norm() <= 1e-15 * scale {
                    done[k] = true;
                    continue;
                }
                let ratio = pz / horner(&dp, z[k]);
                let mut sum = C64::new(0.0, 0.0);
                for j in 0..deg {
                    if j != k {
                        sum += 1.0 / (z[k] - z[j]);
                    }
                }
                let step = ratio / (1.0 - ratio * sum);
                if !step.is_finite() {
                    break;
                }
                z[k] -= step;
                if step.norm() <= 1e-15 * (1.0 + z[k].norm()) {
                    done[k] = true;
                }
            }
        }
        let converged = done.iter().all(|&d| d) && z.iter().all(|v| v.is_finite());
        if converged || attempt == 0 {
            best = RootReport { roots: z, converged, iterations: iters };
        }
        if converged {
            break;
        }
    }
    best
}

/// Newton polishing of individual roots; keeps the input if a step fails.
fn polish(coeffs: &[C64], roots: &mut [C64]) {
    let dp = derivative(coeffs);
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let d = horner(&dp, *z);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(coeffs, *z) / d;
            if !step.is_finite() {
                break;
            }
            *z -= step;
        }
    }
}

/// All roots of ascending `coeffs`, with the residual check
/// `|f(z)| <= tol * sum |a_k| |z|^k`.
pub fn roots_of(coeffs: &[C64], tol: f64) -> Result<Vec<C64>> {
    let rep = aberth(coeffs, 500);
    let mut roots = rep.roots;
    polish(coeffs, &mut roots);
    for &z in &roots {
        if !z.is_finite() || horner(coeffs, z).norm() > tol * horner_scale(coeffs, z).max(1.0) {
            return Err(Error::NoConvergence { iterations: rep.iterations });
        }
    }
    Ok(roots)
}

/// Roots without the residual gate, for degenerate inputs (repeated roots)
/// where only approximate locations are needed.
pub fn roots_lenient(coeffs: &[C64]) -> Vec<C64> {
    let mut roots = aberth(coeffs, 2000).roots;
    polish(coeffs, &mut roots);
    roots
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    /// `n` distinct points (a point of the configuration space)
    C,
    /// `n - 1` distinct nonzero points (a point of `V_n`)
    V,
}

/// Unordered tuple of complex numbers; order is kept only for bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigPoint {
    pub kind: ConfigKind,
    pub points: Vec<C64>,
}

impl ConfigPoint {
    pub fn new(kind: ConfigKind, points: Vec<C64>) -> Self {
        ConfigPoint { kind, points }
    }

    pub fn checked(kind: ConfigKind, points: Vec<C64>, tau_sep: f64) -> Result<Self> {
        let p = ConfigPoint { kind, points };
        match p.defect(tau_sep) {
            None => Ok(p),
            Some(why) => Err(Error::NotInV(why)),
        }
    }

    /// `None` when valid, otherwise a description of the collision.
    pub fn defect(&self, tau_sep: f64) -> Option<String> {
        for (i, a) in self.points.iter().enumerate() {
            if !a.is_finite() {
                return Some(format!("entry {i} is not finite"));
            }
            if self.kind == ConfigKind::V && a.norm() <= tau_sep {
                return Some(format!("entry {i} vanishes"));
            }
            for (j, b) in self.points.iter().enumerate().skip(i + 1) {
                if (a - b).norm() <= tau_sep {
                    return Some(format!("entries {i} and {j} collide"));
                }
            }
        }
        None
    }

    pub fn is_valid(&self, tau_sep: f64) -> bool {
        self.defect(tau_sep).is_none()
    }

    /// Minimum pairwise distance, including distance to 0 for `V` points.
    pub fn min_separation(&self) -> f64 {
        min_separation(&self.points, self.kind == ConfigKind::V)
    }
}

pub fn min_separation(points: &[C64], include_zero: bool) -> f64 {
    let mut m = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        if include_zero {
            m = m.min(a.norm());
        }
        for b in &points[i + 1..] {
            m = m.min((a - b).norm());
        }
    }
    m
}

/// A point of `Z_n` (or a degenerate monic polynomial with `f(0) = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonicPoly {
    pub degree: usize,
    pub critical_points: Vec<C64>,
    /// Ascending coefficients; `coeffs[0] == 0`, `coeffs[degree] == 1`.
    pub coeffs: Vec<C64>,
    /// `roots[0] == 0` exactly, followed by the nonzero roots.
    pub roots: Vec<C64>,
    /// `critical_values[k] = f(critical_points[k])`.
    pub critical_values: Vec<C64>,
}

impl MonicPoly {
    pub fn from_critical_points(c: &[C64]) -> Result<Self> {
        let coeffs = coeffs_from_critical_points(c);
        let inner = &coeffs[1..];
        let mut roots = vec![C64::new(0.0, 0.0)];
        roots.extend(roots_of(inner, 1e-10)?);
        let critical_values = c.iter().map(|&x| horner(&coeffs, x)).collect();
        Ok(MonicPoly { degree: c.len() + 1, critical_points: c.to_vec(), coeffs, roots, critical_values })
    }

    /// Builds `u * prod (u - z_k)` from its nonzero roots.
    pub fn from_nonzero_roots(z: &[C64]) -> Result<Self> {
        let mut all = vec![C64::new(0.0, 0.0)];
        all.extend_from_slice(z);
        let coeffs = coeffs_from_roots(&all);
        let n = all.len();
        let dcoef: Vec<C64> = derivative(&coeffs).iter().map(|&a| a / n as f64).collect();
        let cps = roots_of(&dcoef, 1e-10)?;
        let critical_values = cps.iter().map(|&x| horner(&coeffs, x)).collect();
        Ok(MonicPoly { degree: n, critical_points: cps, coeffs, roots: all, critical_values })
    }

    /// Like `from_nonzero_roots` but tolerates repeated roots.
    pub fn from_nonzero_roots_lenient(z: &[C64]) -> Self {
        let mut all = vec![C64::new(0.0, 0.0)];
        all.extend_from_slice(z);
        let coeffs = coeffs_from_roots(&all);
        let n = all.len();
        let dcoef: Vec<C64> = derivative(&coeffs).iter().map(|&a| a / n as f64).collect();
        let cps = roots_lenient(&dcoef);
        let critical_values = cps.iter().map(|&x| horner(&coeffs, x)).collect();
        MonicPoly { degree: n, critical_points: cps, coeffs, roots: all, critical_values }
    }

    pub fn nonzero_roots(&self) -> &[C64] {
        &self.roots[1..]
    }

    pub fn eval(&self, u: C64) -> C64 {
        horner(&self.coeffs, u)
    }

    pub fn critical_values(&self) -> ConfigPoint {
        ConfigPoint::new(ConfigKind::V, self.critical_values.clone())
    }

    /// Membership in `Z_n`: distinct roots, distinct nonzero critical values.
    pub fn in_z(&self, tau_sep: f64) -> bool {
        ConfigPoint::new(ConfigKind::C, self.roots.clone()).is_valid(tau_sep)
            && self.critical_values().is_valid(tau_sep)
    }

    /// Roots and critical points multiplied by `lambda` (critical values scale
    /// by `lambda^n`).
    pub fn scaled(&self, lambda: C64) -> Result<Self> {
        let c: Vec<C64> = self.critical_points.iter().map(|&x| x * lambda).collect();
        MonicPoly::from_critical_points(&c)
    }

    /// Sorted critical points, used as a canonical key.
    pub fn sorted_critical_points(&self) -> Vec<C64> {
        let mut c = self.critical_points.clone();
        c.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        c
    }
}

/// `poly_from_critical_points`
pub fn poly_from_critical_points(c: &[C64]) -> Result<MonicPoly> {
    MonicPoly::from_critical_points(c)
}

/// `all_roots`
pub fn all_roots(p: &MonicPoly) -> Vec<C64> {
    p.roots.clone()
}

/// `F_k(c) = f_c(c_k) - v_k`
pub fn crit_residual(c: &[C64], v: &[C64]) -> Vec<C64> {
    let coeffs = coeffs_from_critical_points(c);
    c.iter().zip(v).map(|(&ck, &vk)| horner(&coeffs, ck) - vk).collect()
}

/// Jacobian of `crit_residual` in `c`:
/// `J[k][m] = -n * int_0^{c_k} prod_{i != m} (w - c_i) dw`.
/// (The term from `f'(c_k) = 0` drops out.)
pub fn crit_jacobian(c: &[C64]) -> DMatrix<C64> {
    let d = c.len();
    let n = d + 1;
    let mut j = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for m in 0..d {
        let others: Vec<C64> = c.iter().enumerate().filter(|&(i, _)| i != m).map(|(_, &x)| x).collect();
        let q = integrate(&coeffs_from_roots(&others), -(n as f64));
        for k in 0..d {
            j[(k, m)] = horner(&q, c[k]);
        }
    }
    j
}

/// Newton's method on the critical-point system `f_c(c_k) = v_k`.
/// Returns the solution when the residual falls below
/// `tol * max(1, max |v|)`.
pub fn newton_critical_points(c0: &[C64], v: &[C64], max_iter: usize, tol: f64) -> Option<Vec<C64>> {
    let d = c0.len();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.norm()));
    let mut c = c0.to_vec();
    for _ in 0..max_iter {
        let f = crit_residual(&c, v);
        let res = f.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        if !res.is_finite() {
            return None;
        }
        let jac = crit_jacobian(&c);
        let rhs = DVector::from_iterator(d, f.iter().copied());
        let step = jac.lu().solve(&rhs)?;
        let mut step_norm: f64 = 0.0;
        for k in 0..d {
            c[k] -= step[k];
            step_norm = step_norm.max(step[k].norm());
        }
        if c.iter().any(|x| !x.is_finite() || x.norm() > 1e8) {
            return None;
        }
        if res <= tol * scale && step_norm <= 1e-9 * (1.0 + c.iter().fold(0.0f64, |m, x| m.max(x.norm()))) {
            return Some(c);
        }
    }
    let f = crit_residual(&c, v);
    let res = f.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    (res <= tol * scale).then_some(c)
}

/// Minimal-cost assignment between two equal-length point lists, by brute
/// force over permutations (lists here have at most a handful of entries).
/// Returns `perm` with `a[i]` matched to `b[perm[i]]` and the summed distance.
pub fn best_matching(a: &[C64], b: &[C64]) -> (Vec<usize>, f64) {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = (idx.clone(), f64::INFINITY);
    permute(&mut idx, 0, &mut |p| {
        let cost: f64 = (0..n).map(|i| (a[i] - b[p[i]]).norm()).sum();
        if cost < best.1 {
            best = (p.to_vec(), cost);
        }
    });
    best
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Distance between two point sets under the best matching (max over pairs).
pub fn set_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let (p, _) = best_matching(a, b);
    (0..a.len()).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn construction_examples() {
        let p = poly_from_critical_points(&[c(1.0, 0.0)]).unwrap();
        assert!(close(p.coeffs[1], c(-2.0, 0.0), 1e-15) && close(p.coeffs[2], c(1.0, 0.0), 1e-15));
        let q = poly_from_critical_points(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let want = [c(0.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (a, b) in q.coeffs.iter().zip(want) {
            assert!(close(*a, b, 1e-14));
        }
        let mut cv: Vec<f64> = q.critical_values.iter().map(|z| z.re).collect();
        cv.sort_by(f64::total_cmp);
        assert!((cv[0] + 2.0).abs() < 1e-14 && (cv[1] - 2.0).abs() < 1e-14);
        let mut r: Vec<f64> = q.roots.iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 3f64.sqrt()).abs() < 1e-12 && r[1] == 0.0 && (r[2] - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_with_given_root() {
        let z = c(0.3, -1.7);
        let p = poly_from_critical_points(&[z / 2.0]).unwrap();
        assert!(close(p.critical_values[0], -z * z / 4.0, 1e-14));
        assert!(p.roots.iter().any(|r| close(*r, z, 1e-12)));
    }

    #[test]
    fn degenerate_value_flagged() {
        let p = poly_from_critical_points(&[c(0.0, 0.0)]).unwrap();
        assert!(!p.critical_values().is_valid(TAU_SEP));
        assert!(!p.in_z(TAU_SEP));
    }

    #[test]
    fn roots_of_cubic() {
        let p = MonicPoly::from_nonzero_roots(&[c(0.0, 2.0), c(0.0, -2.0)]).unwrap();
        let r = roots_of(&p.coeffs, 1e-10).unwrap();
        assert_eq!(r.len(), 3);
        for want in [c(0.0, 0.0), c(0.0, 2.0), c(0.0, -2.0)] {
            assert!(r.iter().any(|z| close(*z, want, 1e-10)));
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cp = vec![c(0.3, 0.4), c(-0.7, 0.2), c(0.1, -0.9)];
        let j = crit_jacobian(&cp);
        let v = vec![c(0.0, 0.0); 3];
        let h = 1e-6;
        for m in 0..3 {
            let mut cp2 = cp.clone();
            cp2[m] += h;
            let f1 = crit_residual(&cp2, &v);
            let f0 = crit_residual(&cp, &v);
            for k in 0..3 {
                let fd = (f1[k] - f0[k]) / h;
                assert!(close(fd, j[(k, m)], 1e-5), "{k} {m}");
            }
        }
    }

    #[test]
    fn newton_recovers_critical_points() {
        let cp = vec![c(0.5, 0.5), c(-1.0, 0.2)];
        let v = crit_residual(&cp, &[c(0.0, 0.0), c(0.0, 0.0)]);
        let start = vec![cp[0] + c(0.05, -0.03), cp[1] + c(-0.02, 0.04)];
        let got = newton_critical_points(&start, &v, 50, 1e-12).unwrap();
        assert!(close(got[0], cp[0], 1e-10) && close(got[1], cp[1], 1e-10));
    }
}
