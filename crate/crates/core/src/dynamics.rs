//! Iterated preimages and forward images of the critical-value map.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{solve_fiber, FiberOptions};
use crate::poly::{coeffs_from_critical_points, coeffs_from_roots, horner, roots_lenient, ConfigKind, ConfigPoint, C64};

pub const TAU_ZERO: f64 = 1e-7;
pub const TREE_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PreimageTree {
    pub root: Vec<C64>,
    /// `tuples[j]`: the depth-`j` preimage tuples (nonzero roots), in
    /// breadth-first order; `parents[j][k]` indexes `tuples[j - 1]`.
    pub tuples: Vec<Vec<Vec<C64>>>,
    pub parents: Vec<Vec<usize>>,
}

impl PreimageTree {
    pub fn depth(&self) -> usize {
        self.tuples.len() - 1
    }

    /// All entries of the depth-`j` tuples.
    pub fn level_points(&self, j: usize) -> Vec<C64> {
        self.tuples[j].iter().flatten().copied().collect()
    }

    /// `(depth, point)` for every depth `>= 1`.
    pub fn all_points(&self) -> Vec<(usize, C64)> {
        (1..self.tuples.len()).flat_map(|j| self.level_points(j).into_iter().map(move |z| (j, z))).collect()
    }

    pub fn modulus_range(&self, j: usize) -> Option<(f64, f64)> {
        let pts = self.level_points(j);
        if pts.is_empty() {
            return None;
        }
        Some(pts.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.norm()), hi.max(z.norm()))))
    }
}

/// A tree cut short by a failing fiber solve.
#[derive(Clone, Debug)]
pub struct PartialTree {
    pub error: Error,
    pub tree: PreimageTree,
}

impl std::fmt::Display for PartialTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (tree complete to depth {})", self.error, self.tree.depth())
    }
}

pub fn preimage_tree(x: &[C64], depth: usize, opts: &FiberOptions) -> std::result::Result<PreimageTree, PartialTree> {
    let mut tree = PreimageTree { root: x.to_vec(), tuples: vec![vec![x.to_vec()]], parents: vec![vec![]] };
    if let Err(error) = ConfigPoint::checked(ConfigKind::V, x.to_vec(), opts.tau_sep) {
        return Err(PartialTree { error, tree });
    }
    let n = x.len() + 1;
    let branching = n.pow(n as u32 - 1);
    let mut total = 1usize;
    for _ in 0..depth {
        let prev = tree.tuples.last().unwrap();
        total = total.saturating_add(prev.len().saturating_mul(branching));
        if total > TREE_NODE_BUDGET {
            return Err(PartialTree { error: Error::EnumerationBudgetExceeded(total), tree });
        }
        let solved: Vec<Result<Vec<Vec<C64>>>> = prev
            .par_iter()
            .map(|t| Ok(solve_fiber(t, opts)?.into_iter().map(|p| p.nonzero_roots().to_vec()).collect()))
            .collect();
        let mut next = Vec::new();
        let mut parents = Vec::new();
        for (k, r) in solved.into_iter().enumerate() {
            match r {
                Ok(children) => {
                    parents.extend(std::iter::repeat_n(k, children.len()));
                    next.extend(children);
                }
                Err(error) => return Err(PartialTree { error, tree }),
            }
        }
        tree.tuples.push(next);
        tree.parents.push(parents);
    }
    Ok(tree)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitMode {
    /// The tuple is the nonzero roots of `u prod (u - z_k)`.
    Roots,
    /// The tuple is the critical points of the normalised antiderivative.
    CriticalPoints,
}

/// Critical values of the polynomial attached to a tuple; repeated entries
/// are allowed.
pub fn theta(tuple: &[C64], mode: OrbitMode) -> Vec<C64> {
    match mode {
        OrbitMode::Roots => {
            let mut all = vec![C64::new(0.0, 0.0)];
            all.extend_from_slice(tuple);
            let coeffs = coeffs_from_roots(&all);
            let d: Vec<C64> = coeffs.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect();
            roots_lenient(&d).into_iter().map(|c| horner(&coeffs, c)).collect()
        }
        OrbitMode::CriticalPoints => {
            let coeffs = coeffs_from_critical_points(tuple);
            tuple.iter().map(|&c| horner(&coeffs, c)).collect()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForwardOrbit {
    pub start: Vec<C64>,
    pub mode: OrbitMode,
    /// Iterates rescaled to maximal modulus 1 (the count of zeros is
    /// invariant under rescaling).
    pub iterates: Vec<Vec<C64>>,
    /// `zero_counts[j]` counts entries of `iterates[j]` with modulus at most
    /// `tau_zero`.
    pub zero_counts: Vec<usize>,
    /// First iterate that is not a point of `V_n`, if any.
    pub leaves_v_at: Option<usize>,
    pub tau_zero: f64,
}

impl ForwardOrbit {
    pub fn limit(&self) -> usize {
        *self.zero_counts.last().unwrap()
    }

    pub fn is_monotone(&self) -> bool {
        self.zero_counts.windows(2).all(|w| w[0] <= w[1])
    }
}

fn normalise(v: &[C64]) -> Vec<C64> {
    let m = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if m == 0.0 || !m.is_finite() {
        return v.to_vec();
    }
    v.iter().map(|z| z / m).collect()
}

pub fn forward_orbit(start: &[C64], steps: usize, mode: OrbitMode, tau_zero: f64) -> ForwardOrbit {
    let count = |v: &[C64]| v.iter().filter(|z| z.norm() <= tau_zero).count();
    let first = normalise(start);
    let mut zero_counts = vec![count(&first)];
    let mut iterates = vec![first];
    let mut leaves_v_at = None;
    for j in 0..=steps {
        let cur = &iterates[j];
        if leaves_v_at.is_none() && !ConfigPoint::new(ConfigKind::V, cur.clone()).is_valid(tau_zero) {
            leaves_v_at = Some(j);
        }
        if j == steps {
            break;
        }
        // snap numerical zeros so that they stay exactly zero
        let snapped: Vec<C64> = cur.iter().map(|&z| if z.norm() <= tau_zero { C64::new(0.0, 0.0) } else { z }).collect();
        let next = normalise(&theta(&snapped, mode));
        zero_counts.push(count(&next));
        iterates.push(next);
    }
    ForwardOrbit { start: start.to_vec(), mode, iterates, zero_counts, leaves_v_at, tau_zero }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotFormat {
    Csv,
    Svg,
}

/// Scatter of `(depth, point)` pairs as CSV (`depth,re,im`) or SVG.
pub fn render_plot(points: &[(usize, C64)], format: PlotFormat) -> String {
    let mut out = String::new();
    match format {
        PlotFormat::Csv => {
            out.push_str("depth,re,im\n");
            for (d, z) in points {
                let _ = writeln!(out, "{d},{},{}", z.re, z.im);
            }
        }
        PlotFormat::Svg => {
            const SIZE: f64 = 600.0;
            let r = points.iter().fold(0.0f64, |m, (_, z)| m.max(z.re.abs()).max(z.im.abs())).max(1e-12) * 1.05;
            let max_depth = points.iter().map(|p| p.0).max().unwrap_or(1).max(1);
            let _ = writeln!(
                out,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
            );
            let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
            for (d, z) in points {
                let x = (z.re / r + 1.0) * SIZE / 2.0;
                let y = (1.0 - z.im / r) * SIZE / 2.0;
                let shade = 200 - (150 * d / max_depth) as u32;
                let _ = writeln!(
                    out,
                    "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.2\" fill=\"rgb({shade},{shade},255)\"/>"
                );
            }
            out.push_str("</svg>\n");
        }
    }
    out
}

pub fn export_plot(points: &[(usize, C64)], format: PlotFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_plot(points, format))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{set_distance, MonicPoly};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn n2_first_level() {
        let t = preimage_tree(&[c(1.0, 0.0)], 1, &FiberOptions::default()).unwrap();
        assert!(set_distance(&t.level_points(1), &[c(0.0, 2.0), c(0.0, -2.0)]) < 1e-12);
        let t0 = preimage_tree(&[c(1.0, 0.0)], 0, &FiberOptions::default()).unwrap();
        assert_eq!(t0.depth(), 0);
        assert!(t0.all_points().is_empty());
    }

    #[test]
    fn n2_moduli_recursion_and_limit() {
        let t = preimage_tree(&[c(1.0, 0.0)], 10, &FiberOptions::default()).unwrap();
        assert_eq!(t.tuples[10].len(), 1024);
        for j in 1..=10 {
            for (k, tup) in t.tuples[j].iter().enumerate() {
                let parent = &t.tuples[j - 1][t.parents[j][k]];
                assert!((tup[0].norm() - 2.0 * parent[0].norm().sqrt()).abs() < 1e-9);
            }
        }
        let (lo, hi) = t.modulus_range(10).unwrap();
        assert!((lo - 4.0).abs() <= 0.01 && (hi - 4.0).abs() <= 0.01);
    }

    #[test]
    fn theta_inverts_the_tree() {
        let x = [C64::from_polar(0.5, PI / 3.0), c(-1.0, 0.0)];
        let t = preimage_tree(&x, 2, &FiberOptions::default()).unwrap();
        assert_eq!(t.tuples[2].len(), 81);
        for tup in &t.tuples[2] {
            let mut v = tup.clone();
            for _ in 0..2 {
                v = MonicPoly::from_nonzero_roots(&v).unwrap().critical_values;
            }
            assert!(set_distance(&v, &x) < 1e-6);
        }
    }

    #[test]
    fn rotation_symmetry() {
        for (x, depth) in [(vec![c(1.0, 0.0)], 4usize), (vec![C64::from_polar(0.5, PI / 3.0), c(-1.0, 0.0)], 2)] {
            let n = x.len() + 1;
            let t = preimage_tree(&x, depth, &FiberOptions::default()).unwrap();
            for j in 1..=depth {
                let pts = t.level_points(j);
                let rot = C64::from_polar(1.0, 2.0 * PI / (n.pow(j as u32)) as f64);
                for z in &pts {
                    let w = z * rot;
                    assert!(pts.iter().any(|p| (p - w).norm() < 1e-6), "n = {n}, depth {j}");
                }
            }
        }
    }

    #[test]
    fn forward_orbit_examples() {
        let o = forward_orbit(&[c(1.0, 0.0), c(-1.0, 0.0)], 30, OrbitMode::Roots, TAU_ZERO);
        assert!(o.zero_counts.iter().all(|&a| a == 0));
        assert_eq!(o.leaves_v_at, None);
        let r = forward_orbit(&[c(0.3, 0.2), c(0.3, 0.2)], 10, OrbitMode::Roots, TAU_ZERO);
        assert_eq!(r.zero_counts[0], 0);
        assert!(r.zero_counts[1..].iter().all(|&a| a >= 1));
        assert_eq!(r.leaves_v_at, Some(0));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g: Vec<C64> = (0..2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let o = forward_orbit(&g, 60, OrbitMode::Roots, TAU_ZERO);
        assert_eq!(o.limit(), 1);
    }

    #[test]
    fn orbits_are_monotone_and_bounded() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for case in 0..100 {
            let n = 3 + case % 2;
            let start: Vec<C64> = (0..n - 1).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            for mode in [OrbitMode::Roots, OrbitMode::CriticalPoints] {
                let o = forward_orbit(&start, 40, mode, TAU_ZERO);
                assert!(o.is_monotone(), "{:?}", o.zero_counts);
                assert!(o.zero_counts.iter().all(|&a| a <= n - 2), "{:?}", o.zero_counts);
            }
        }
    }

    #[test]
    fn plots() {
        assert_eq!(render_plot(&[], PlotFormat::Csv), "depth,re,im\n");
        let svg = render_plot(&[], PlotFormat::Svg);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        let pts = [(1, c(0.0, 2.0)), (1, c(0.0, -2.0))];
        assert_eq!(render_plot(&pts, PlotFormat::Csv), render_plot(&pts, PlotFormat::Csv));
        assert_eq!(render_plot(&pts, PlotFormat::Svg).matches("<circle").count(), 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        export_plot(&pts, PlotFormat::Csv, &p).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap().lines().count(), 3);
    }
}
