//! Path lifting through the critical-value map and braid extraction.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidWord, Letter};
use crate::error::{Error, Result};
use crate::fiber::LabeledFiber;
use crate::poly::{
    best_matching, coeffs_from_critical_points, crit_jacobian, crit_residual, horner, min_separation, roots_lenient,
    ConfigKind, MonicPoly, C64, TAU_SEP,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftOptions {
    /// Samples per generator letter of a loop.
    pub samples: usize,
    pub h_min: f64,
    /// Accepted steps move every tracked point by less than this fraction of
    /// the smallest pairwise distance (0 included) at the previous sample.
    pub delta_factor: f64,
    pub residual_tol: f64,
    pub tau_sep: f64,
    /// Flip every crossing sign.
    pub flip_sign: bool,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { samples: 100, h_min: 1e-6, delta_factor: 0.1, residual_tol: 1e-10, tau_sep: TAU_SEP, flip_sign: false }
    }
}

/// A path sampled at increasing times in `[0, 1]`, entries matched across
/// samples. Between samples the path is the straight segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub kind: ConfigKind,
    pub ts: Vec<f64>,
    pub points: Vec<Vec<C64>>,
}

impl SampledPath {
    pub fn new(kind: ConfigKind, ts: Vec<f64>, points: Vec<Vec<C64>>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != points.len() {
            return Err(Error::Config("a sampled path needs at least two samples, one per time".into()));
        }
        if ts[0] != 0.0 || *ts.last().unwrap() != 1.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sample times must increase strictly from 0 to 1".into()));
        }
        let width = points[0].len();
        if points.iter().any(|p| p.len() != width) {
            return Err(Error::Config("samples have different numbers of entries".into()));
        }
        Ok(SampledPath { kind, ts, points })
    }

    /// Samples `f` at `m + 1` equally spaced times.
    pub fn from_fn(kind: ConfigKind, m: usize, f: impl Fn(f64) -> Vec<C64>) -> Result<Self> {
        let m = m.max(1);
        let ts: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        let points = ts.iter().map(|&t| f(t)).collect();
        SampledPath::new(kind, ts, points)
    }

    pub fn constant(kind: ConfigKind, p: Vec<C64>) -> Self {
        SampledPath { kind, ts: vec![0.0, 1.0], points: vec![p.clone(), p] }
    }

    pub fn width(&self) -> usize {
        self.points[0].len()
    }

    pub fn start(&self) -> &[C64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[C64] {
        self.points.last().unwrap()
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        crate::poly::set_distance(self.start(), self.end()) <= tol
    }

    /// Linear interpolation at time `t`.
    pub fn at(&self, t: f64) -> Vec<C64> {
        let k = match self.ts.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => return self.points[k].clone(),
            Err(k) => k.clamp(1, self.ts.len() - 1),
        };
        let (t0, t1) = (self.ts[k - 1], self.ts[k]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.points[k - 1].iter().zip(&self.points[k]).map(|(a, b)| a + (b - a) * s).collect()
    }

    /// Follows `self` then `other`, each in half the time. Entries of
    /// `other` are matched to the end of `self`.
    pub fn concat(&self, other: &SampledPath) -> Result<SampledPath> {
        if self.kind != other.kind || self.width() != other.width() {
            return Err(Error::Config("paths of different shapes".into()));
        }
        let (perm, _) = best_matching(self.end(), other.start());
        if (0..perm.len()).any(|i| (self.end()[i] - other.start()[perm[i]]).norm() > 1e-9 * (1.0 + self.end()[i].norm())) {
            return Err(Error::Config("paths do not meet".into()));
        }
        let mut ts: Vec<f64> = self.ts.iter().map(|t| t / 2.0).collect();
        let mut points = self.points.clone();
        for (t, p) in other.ts.iter().zip(&other.points).skip(1) {
            ts.push(0.5 + t / 2.0);
            points.push(perm.iter().map(|&j| p[j]).collect());
        }
        *ts.last_mut().unwrap() = 1.0;
        SampledPath::new(self.kind, ts, points)
    }

    pub fn reverse(&self) -> SampledPath {
        let ts = self.ts.iter().rev().map(|t| 1.0 - t).collect();
        let points = self.points.iter().rev().cloned().collect();
        SampledPath { kind: self.kind, ts, points }
    }

    /// Largest movement of an entry between consecutive samples relative to
    /// the separation at the earlier sample.
    pub fn max_relative_step(&self) -> f64 {
        let zero = self.kind == ConfigKind::V;
        self.points
            .windows(2)
            .map(|w| {
                let sep = min_separation(&w[0], zero);
                w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / sep
            })
            .fold(0.0, f64::max)
    }
}

/// Base points sorted by real part; near-equal real parts are rejected.
fn generic_base(base: &[C64], tau: f64) -> Result<Vec<C64>> {
    crate::fiber::sort_base(base, tau)
}

fn half_turn(cur: &[C64], l: Letter, s: f64) -> Vec<C64> {
    let mut order: Vec<usize> = (0..cur.len()).collect();
    order.sort_by(|&a, &b| cur[a].re.total_cmp(&cur[b].re));
    let (a, b) = (order[l.index - 1], order[l.index]);
    let mid = (cur[a] + cur[b]) / 2.0;
    let d = (cur[b] - cur[a]) / 2.0;
    let rot = C64::from_polar(1.0, l.sign as f64 * PI * s);
    let mut out = cur.to_vec();
    if s == 1.0 {
        out.swap(a, b);
        return out;
    }
    out[b] = mid + d * rot;
    out[a] = mid - d * rot;
    out
}

/// Loop in the configuration space realising `word`, starting at the base
/// sorted by real part; entry `k` follows the strand starting at position
/// `k`. Each letter is a half-turn of the two strands at adjacent real-order
/// positions about their midpoint, counterclockwise for positive letters.
pub fn word_loop(word: &BraidWord, base: &[C64], m: usize) -> Result<SampledPath> {
    let n = base.len();
    if word.strands() != n {
        return Err(Error::StrandMismatch { left: word.strands(), right: n });
    }
    let start = generic_base(base, TAU_SEP)?;
    let m = m.max(2);
    let letters = word.letters();
    if letters.is_empty() {
        return Ok(SampledPath::constant(ConfigKind::C, start));
    }
    let total = letters.len() * m;
    let mut ts = vec![0.0];
    let mut points = vec![start.clone()];
    let mut cur = start;
    for (li, &l) in letters.iter().enumerate() {
        for k in 1..=m {
            let p = half_turn(&cur, l, k as f64 / m as f64);
            if min_separation(&p, false) <= TAU_SEP {
                return Err(Error::NonGenericBase(format!("strands collide during letter {}", li + 1)));
            }
            ts.push((li * m + k) as f64 / total as f64);
            points.push(p);
        }
        cur = points.last().unwrap().clone();
        if generic_base(&cur, TAU_SEP).is_err() {
            return Err(Error::NonGenericBase("real parts collide after a half-turn".into()));
        }
    }
    *ts.last_mut().unwrap() = 1.0;
    SampledPath::new(ConfigKind::C, ts, points)
}

pub fn generator_loop(i: usize, base: &[C64], m: usize) -> Result<SampledPath> {
    let w = BraidWord::generator_power(base.len(), i, 1)?;
    word_loop(&w, base, m)
}

/// Differences `z_k(t) - z_i(t)`, `k != i`, as a path in `V_n`.
pub fn project_to_v(path: &SampledPath, strand: usize) -> Result<SampledPath> {
    if path.kind != ConfigKind::C || strand >= path.width() {
        return Err(Error::Config(format!("cannot project onto strand {strand}")));
    }
    let mut points = Vec::with_capacity(path.points.len());
    for (t, p) in path.ts.iter().zip(&path.points) {
        let v: Vec<C64> = crate::fiber::differences(p, strand);
        if min_separation(&v, true) <= TAU_SEP {
            return Err(Error::LeavesV { t: *t });
        }
        points.push(v);
    }
    Ok(SampledPath { kind: ConfigKind::V, ts: path.ts.clone(), points })
}

/// Tracked critical points and nonzero roots along a lifted path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub critical_points: Vec<C64>,
    pub roots: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    Roots,
    CriticalPoints,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyPath {
    pub samples: Vec<PathSample>,
    pub start_label: Option<usize>,
    pub end_label: Option<usize>,
    pub braid_roots: BraidWord,
    pub braid_crit: BraidWord,
}

impl PolyPath {
    pub fn start_poly(&self) -> Result<MonicPoly> {
        MonicPoly::from_critical_points(&self.samples[0].critical_points)
    }

    pub fn end_poly(&self) -> Result<MonicPoly> {
        MonicPoly::from_critical_points(&self.samples.last().unwrap().critical_points)
    }

    /// The tracked nonzero roots (or critical points) as a path in `V_n`.
    pub fn strand_path(&self, emb: Embedding) -> SampledPath {
        let ts = self.samples.iter().map(|s| s.t).collect();
        let points = self
            .samples
            .iter()
            .map(|s| match emb {
                Embedding::Roots => s.roots.clone(),
                Embedding::CriticalPoints => s.critical_points.clone(),
            })
            .collect();
        SampledPath { kind: ConfigKind::V, ts, points }
    }

    pub fn braid(&self, emb: Embedding) -> &BraidWord {
        match emb {
            Embedding::Roots => &self.braid_roots,
            Embedding::CriticalPoints => &self.braid_crit,
        }
    }

    /// CSV with columns `t, re_1, im_1, ...` for the chosen strands.
    pub fn write_csv(&self, out: &mut impl Write, emb: Embedding) -> Result<()> {
        let width = self.strand_path(emb).width();
        let mut header = vec!["t".to_string()];
        for k in 1..=width {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
        writeln!(out, "{}", header.join(","))?;
        for s in &self.samples {
            let pts = match emb {
                Embedding::Roots => &s.roots,
                Embedding::CriticalPoints => &s.critical_points,
            };
            let mut row = vec![format!("{}", s.t)];
            for z in pts {
                row.push(format!("{}", z.re));
                row.push(format!("{}", z.im));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// Newton corrector with a contraction requirement.
fn correct(c0: &[C64], v: &[C64], tol: f64) -> Option<Vec<C64>> {
    let d = c0.len();
    let scale = max_norm(v).max(1.0);
    let mut c = c0.to_vec();
    let mut last_step = f64::INFINITY;
    for _ in 0..8 {
        let f = crit_residual(&c, v);
        let res = max_norm(&f);
        if !res.is_finite() {
            return None;
        }
        if res <= tol * scale {
            return Some(c);
        }
        let rhs = DVector::from_iterator(d, f.iter().copied());
        let step = crit_jacobian(&c).lu().solve(&rhs)?;
        let sn = step.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        if sn > 0.75 * last_step && sn > 1e-12 * (1.0 + max_norm(&c)) {
            return None;
        }
        last_step = sn;
        for k in 0..d {
            c[k] -= step[k];
        }
    }
    (max_norm(&crit_residual(&c, v)) <= tol * scale).then_some(c)
}

/// Nonzero roots of the polynomial with critical points `c`, each continued
/// from `prev` by Newton; `None` if the continuation is ambiguous.
fn continue_roots(c: &[C64], prev: &[C64]) -> Option<Vec<C64>> {
    let coeffs = coeffs_from_critical_points(c);
    let q = &coeffs[1..];
    let dq: Vec<C64> = q.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect();
    let mut out = Vec::with_capacity(prev.len());
    for &r0 in prev {
        let mut r = r0;
        let mut ok = false;
        for _ in 0..30 {
            let step = horner(q, r) / horner(&dq, r);
            if !step.is_finite() {
                return None;
            }
            r -= step;
            if step.norm() <= 1e-14 * (1.0 + r.norm()) {
                ok = true;
                break;
            }
        }
        if !ok && horner(q, r).norm() > 1e-10 * crate::poly::horner_scale(q, r).max(1.0) {
            return None;
        }
        out.push(r);
    }
    Some(out)
}

fn roots_matched(c: &[C64], prev: &[C64]) -> Vec<C64> {
    let coeffs = coeffs_from_critical_points(c);
    let r = roots_lenient(&coeffs[1..]);
    let (perm, _) = best_matching(prev, &r);
    perm.iter().map(|&j| r[j]).collect()
}

fn moved_less(a: &[C64], b: &[C64], delta: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < delta)
}

/// Continues the polynomial with critical points `c_start` (ordered so that
/// its critical values follow `vpath` entrywise) along `vpath`.
pub fn track(vpath: &SampledPath, c_start: &[C64], opts: &LiftOptions) -> Result<Vec<PathSample>> {
    let v0 = vpath.start();
    let c0 = correct(c_start, v0, opts.residual_tol).ok_or(Error::PathTrackingFailure { t: 0.0, h_min: opts.h_min })?;
    let r0 = {
        let coeffs = coeffs_from_critical_points(&c0);
        let mut r = roots_lenient(&coeffs[1..]);
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    };
    let mut samples = vec![PathSample { t: 0.0, critical_points: c0, roots: r0 }];
    let mut prev_c: Option<(f64, Vec<C64>)> = None;
    let mut h = f64::INFINITY;
    let mut easy = 0usize;
    for k in 1..vpath.ts.len() {
        let t_knot = vpath.ts[k];
        let span = t_knot - vpath.ts[k - 1];
        h = h.min(span);
        loop {
            let cur = samples.last().unwrap();
            let t = cur.t;
            if t >= t_knot {
                break;
            }
            let mut t_next = (t + h).min(t_knot);
            if t_knot - t_next < 1e-3 * h {
                t_next = t_knot;
            }
            let dt = t_next - t;
            let pred: Vec<C64> = match &prev_c {
                Some((tp, cp)) if t - tp > 0.0 => {
                    let ratio = dt / (t - tp);
                    cur.critical_points.iter().zip(cp).map(|(a, b)| a + (a - b) * ratio).collect()
                }
                _ => cur.critical_points.clone(),
            };
            let v = if t_next == t_knot { vpath.points[k].clone() } else { vpath.at(t_next) };
            let mut all_c = vec![C64::new(0.0, 0.0)];
            all_c.extend_from_slice(&cur.critical_points);
            let mut all_r = vec![C64::new(0.0, 0.0)];
            all_r.extend_from_slice(&cur.roots);
            let dc = opts.delta_factor * min_separation(&all_c, false);
            let dr = opts.delta_factor * min_separation(&all_r, false);
            let accepted = correct(&pred, &v, opts.residual_tol).and_then(|c| {
                if !moved_less(&c, &cur.critical_points, dc) {
                    return None;
                }
                let r = continue_roots(&c, &cur.roots)?;
                let mut all = vec![C64::new(0.0, 0.0)];
                all.extend_from_slice(&r);
                if !moved_less(&r, &cur.roots, dr) || min_separation(&all, false) <= opts.tau_sep {
                    return None;
                }
                Some((c, r))
            });
            match accepted {
                Some((c, r)) => {
                    prev_c = Some((t, cur.critical_points.clone()));
                    samples.push(PathSample { t: t_next, critical_points: c, roots: r });
                    easy += 1;
                    if easy >= 4 {
                        h *= 2.0;
                        easy = 0;
                    }
                }
                None => {
                    easy = 0;
                    h /= 2.0;
                    if h < opts.h_min {
                        // last resort: re-solve roots from scratch at a tiny step
                        let c = correct(&pred, &v, opts.residual_tol);
                        if let Some(c) = c.filter(|c| moved_less(c, &cur.critical_points, dc)) {
                            let r = roots_matched(&c, &cur.roots);
                            if moved_less(&r, &cur.roots, dr) {
                                prev_c = Some((t, cur.critical_points.clone()));
                                samples.push(PathSample { t: t_next, critical_points: c, roots: r });
                                h = opts.h_min * 2.0;
                                continue;
                            }
                        }
                        return Err(Error::PathTrackingFailure { t, h_min: opts.h_min });
                    }
                }
            }
        }
    }
    samples.last_mut().unwrap().t = 1.0;
    Ok(samples)
}

/// Lifts `vpath` starting at fiber point `start`.
pub fn lift_path(vpath: &SampledPath, start: usize, fiber: &LabeledFiber, opts: &LiftOptions) -> Result<PolyPath> {
    let p = fiber.points.get(start).ok_or_else(|| Error::Config(format!("no fiber label {start}")))?;
    let (perm, _) = best_matching(vpath.start(), &p.critical_values);
    if (0..perm.len()).any(|i| (vpath.start()[i] - p.critical_values[perm[i]]).norm() > 1e-6 * (1.0 + max_norm(vpath.start())))
    {
        return Err(Error::Config(format!("path does not start under label {start}")));
    }
    let c_start: Vec<C64> = perm.iter().map(|&j| p.critical_points[j]).collect();
    let mut pp = lift_from(vpath, &c_start, opts)?;
    pp.start_label = Some(start);
    let end = pp.end_poly()?;
    let scale = 1.0 + max_norm(&end.critical_points);
    pp.end_label = Some(fiber.label_of(&end, 1e-6 * scale).ok_or(Error::EndpointUnmatched)?);
    Ok(pp)
}

/// Unlabelled lift from explicit starting critical points.
pub fn lift_from(vpath: &SampledPath, c_start: &[C64], opts: &LiftOptions) -> Result<PolyPath> {
    let samples = track(vpath, c_start, opts)?;
    let braid_roots = read_braid(&strands(&samples, Embedding::Roots), &ts(&samples), opts.flip_sign)?;
    let braid_crit = read_braid(&strands(&samples, Embedding::CriticalPoints), &ts(&samples), opts.flip_sign)?;
    Ok(PolyPath { samples, start_label: None, end_label: None, braid_roots, braid_crit })
}

fn ts(samples: &[PathSample]) -> Vec<f64> {
    samples.iter().map(|s| s.t).collect()
}

/// Strand positions per sample: the 0-strand followed by the chosen points.
fn strands(samples: &[PathSample], emb: Embedding) -> Vec<Vec<C64>> {
    samples
        .iter()
        .map(|s| {
            let mut v = vec![C64::new(0.0, 0.0)];
            v.extend_from_slice(match emb {
                Embedding::Roots => &s.roots,
                Embedding::CriticalPoints => &s.critical_points,
            });
            v
        })
        .collect()
}

pub fn braid_from_path(pp: &PolyPath, emb: Embedding, flip_sign: bool) -> Result<BraidWord> {
    read_braid(&strands(&pp.samples, emb), &ts(&pp.samples), flip_sign)
}

/// Reads the braid traced by matched strands: every exchange of adjacent
/// real-order positions `p, p+1` (0-based) is the letter `p+1`, positive when
/// the strand coming from the left is below at the crossing time.
pub fn read_braid(strands: &[Vec<C64>], ts: &[f64], flip_sign: bool) -> Result<BraidWord> {
    let n = strands[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| strands[0][a].re.total_cmp(&strands[0][b].re));
    for w in order.windows(2) {
        if (strands[0][w[0]].re - strands[0][w[1]].re).abs() <= TAU_SEP {
            return Err(Error::DegenerateProjection { t: ts[0] });
        }
    }
    let mut letters = Vec::new();
    for s in 1..strands.len() {
        let (p0, p1) = (&strands[s - 1], &strands[s]);
        let mut events: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let d0 = p0[a].re - p0[b].re;
                let d1 = p1[a].re - p1[b].re;
                if d1 == 0.0 {
                    // an exact tie at a sample: decided by the next sample
                    continue;
                }
                if d0 * d1 < 0.0 || (d0 == 0.0 && s > 1 && {
                    let dp = strands[s - 2][a].re - strands[s - 2][b].re;
                    dp * d1 < 0.0
                }) {
                    let tau = if d0 == 0.0 { 0.0 } else { d0 / (d0 - d1) };
                    events.push((tau, a, b));
                }
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (tau, a, b) in events {
            let pa = order.iter().position(|&x| x == a).unwrap();
            let pb = order.iter().position(|&x| x == b).unwrap();
            if pa.abs_diff(pb) != 1 {
                return Err(Error::DegenerateProjection { t: ts[s - 1] + tau * (ts[s] - ts[s - 1]) });
            }
            let (l, r) = if pa < pb { (a, b) } else { (b, a) };
            let iml = (p0[l] + (p1[l] - p0[l]) * tau).im;
            let imr = (p0[r] + (p1[r] - p0[r]) * tau).im;
            if (iml - imr).abs() <= TAU_SEP {
                return Err(Error::DegenerateProjection { t: ts[s - 1] + tau * (ts[s] - ts[s - 1]) });
            }
            let mut sign: i8 = if iml < imr { 1 } else { -1 };
            if flip_sign {
                sign = -sign;
            }
            letters.push(Letter { index: pa.min(pb) + 1, sign });
            order.swap(pa, pb);
        }
    }
    BraidWord::new(n, letters)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgVerdict {
    Increasing,
    Decreasing,
    Constant,
    Fails,
}

/// Sign of `d arg(v_i)/dt` from consecutive samples, per entry.
pub fn check_argument_monotone(vpath: &SampledPath) -> Vec<ArgVerdict> {
    const EPS: f64 = 1e-12;
    (0..vpath.width())
        .map(|i| {
            let (mut pos, mut neg, mut zero) = (0, 0, 0);
            for w in vpath.points.windows(2) {
                let d = (w[1][i] / w[0][i]).arg();
                if d > EPS {
                    pos += 1;
                } else if d < -EPS {
                    neg += 1;
                } else {
                    zero += 1;
                }
            }
            match (pos, neg, zero) {
                (_, 0, 0) if pos > 0 => ArgVerdict::Increasing,
                (0, _, 0) if neg > 0 => ArgVerdict::Decreasing,
                (0, 0, _) => ArgVerdict::Constant,
                _ => ArgVerdict::Fails,
            }
        })
        .collect()
}
