//! Certificates for braids whose squared closures are real algebraic, and
//! the homogeneity obstruction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::action::{h_of_word, TableSet};
use crate::braid::{alexander_poly, braids_equal, linking_numbers, BraidWord};
use crate::error::{Error, Result};
use crate::fiber::LabeledFiber;
use crate::lift::{check_argument_monotone, lift_path, ArgVerdict, Embedding, LiftOptions, SampledPath};
use crate::poly::{ConfigKind, C64};

/// The five building blocks `w_1 .. w_5`.
pub fn theorem_block(i: u8) -> Result<BraidWord> {
    let text = match i {
        1 => "s2",
        2 => "s1^2",
        3 => "s1 s2 s1 s1 s2 s1",
        4 => "s2 s1 s2^-1 s1 s2 s2 s1 s2^-1 s1 s2",
        5 => "s2^-1 s1 s2^2 s1",
        _ => return Err(Error::BadIndex(i)),
    };
    BraidWord::parse(3, text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremWord {
    pub epsilon: i8,
    pub indices: Vec<u8>,
}

impl TheoremWord {
    pub fn new(epsilon: i8, indices: Vec<u8>) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Config("epsilon must be +1 or -1".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| !(1..=5).contains(&i)) {
            return Err(Error::BadIndex(bad));
        }
        Ok(TheoremWord { epsilon, indices })
    }
}

/// `prod w_{i_j}^epsilon`, free-reduced.
pub fn expand_theorem_word(tw: &TheoremWord) -> Result<BraidWord> {
    let mut out = BraidWord::identity(3);
    for &i in &tw.indices {
        let b = theorem_block(i)?;
        let b = if tw.epsilon < 0 { b.inverse() } else { b };
        out = out.concat(&b)?;
    }
    Ok(out.free_reduce())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub explanation: String,
}

/// The hypothesis: some index is 3, or the word uses one of `{1, 4}` and one
/// of `{2, 5}`.
pub fn check_theorem_condition(tw: &TheoremWord) -> ConditionReport {
    let has = |set: &[u8]| tw.indices.iter().any(|i| set.contains(i));
    let three = has(&[3]);
    let first = has(&[1, 4]);
    let second = has(&[2, 5]);
    let holds = three || (first && second);
    let explanation = if three {
        "w_3 moves both critical values".to_string()
    } else {
        let group = |b: bool, name: &str| format!("{name} {}", if b { "used" } else { "missing" });
        format!(
            "no w_3; {}, {}",
            group(first, "first-value group {w_1, w_4}"),
            group(second, "second-value group {w_2, w_5}")
        )
    };
    ConditionReport { holds, explanation }
}

/// Which of the five loops in `V_3`, based at `{e^(i pi/4), 2}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaLoop {
    pub which: u8,
    pub power: usize,
    pub braid: BraidWord,
    pub path: SampledPath,
    pub verdicts: Vec<ArgVerdict>,
}

/// Loop-closing powers from the published list.
pub const BETA_POWERS: [usize; 5] = [1, 2, 6, 6, 3];

pub fn beta_braid(i: u8) -> Result<BraidWord> {
    let text = match i {
        1 => "s1^2",
        2 => "s2^-1 s1^2 s2",
        3 => "s1^2 s2",
        4 => "s1^2 s2^2",
        5 => "s2 s1^2 s2",
        _ => return Err(Error::BadIndex(i)),
    };
    BraidWord::parse(3, text)
}

/// Sampled parametrisation of `beta_i` (one period, `m + 1` samples).
pub fn beta_path(i: u8, m: usize) -> Result<SampledPath> {
    let e = |a: f64| C64::from_polar(1.0, a);
    let q = PI / 4.0;
    let f: Box<dyn Fn(f64) -> Vec<C64>> = match i {
        1 => Box::new(move |t| vec![e(q + 2.0 * PI * t), C64::new(2.0, 0.0)]),
        2 => Box::new(move |t| {
            let bump = ((1.0 + (2.0 * PI * t).cos()) / 2.0).powi(12);
            vec![e(q), (0.5 + 1.5 * bump) * e(2.0 * PI * t)]
        }),
        3 => Box::new(move |t| vec![(1.0 + t) * e(q + 7.0 * PI * t / 4.0), (2.0 - t) * e(PI * t / 4.0)]),
        4 => Box::new(move |t| {
            let r = 1.0 + 10.0 * (1.0 - (2.0 * PI * t).cos()) / 2.0;
            vec![r * e(q + 2.0 * PI * t), C64::new(2.0, 0.0)]
        }),
        5 => Box::new(move |t| vec![e(q), 2.0 * e(2.0 * PI * t)]),
        _ => return Err(Error::BadIndex(i)),
    };
    let mut p = SampledPath::from_fn(ConfigKind::V, m, f)?;
    // exact closure as a set
    let start = p.points[0].clone();
    let last = p.points.last_mut().unwrap();
    if i == 3 {
        *last = vec![start[1], start[0]];
    } else {
        *last = start;
    }
    Ok(p)
}

pub fn beta_loop(i: u8, m: usize) -> Result<BetaLoop> {
    let path = beta_path(i, m)?;
    let verdicts = check_argument_monotone(&path);
    Ok(BetaLoop { which: i, power: BETA_POWERS[(i - 1) as usize], braid: beta_braid(i)?, path, verdicts })
}

fn repeat(p: &SampledPath, k: usize) -> Result<SampledPath> {
    chain(&vec![p.clone(); k])
}

/// Concatenation of several loops, each squeezed into an equal time slot.
fn chain(paths: &[SampledPath]) -> Result<SampledPath> {
    let k = paths.len();
    let mut ts = Vec::new();
    let mut points: Vec<Vec<C64>> = Vec::new();
    for (r, p) in paths.iter().enumerate() {
        let mut p = p.clone();
        if let Some(prev) = points.last() {
            let (perm, _) = crate::poly::best_matching(prev, p.start());
            p.points = p.points.iter().map(|x| (0..prev.len()).map(|j| x[perm[j]]).collect()).collect();
        }
        for (idx, (t, x)) in p.ts.iter().zip(&p.points).enumerate() {
            if r > 0 && idx == 0 {
                continue;
            }
            ts.push((r as f64 + t) / k as f64);
            points.push(x.clone());
        }
    }
    *ts.last_mut().unwrap() = 1.0;
    SampledPath::new(ConfigKind::V, ts, points)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub granted: bool,
    pub reason: Option<String>,
    pub start_label: usize,
    pub end_label: Option<usize>,
    pub is_loop: bool,
    pub lifted_braid: Option<BraidWord>,
    pub verdicts: Vec<ArgVerdict>,
    pub monotone: bool,
}

fn verdicts_ok(v: &[ArgVerdict], epsilon: i8) -> bool {
    let good = if epsilon > 0 { ArgVerdict::Increasing } else { ArgVerdict::Decreasing };
    v.iter().all(|&x| x == good || x == ArgVerdict::Constant)
}

/// Combines per-segment verdicts: a strand may switch between constant and
/// moving but may not reverse direction.
pub fn combine_verdicts(segments: &[Vec<ArgVerdict>]) -> Vec<ArgVerdict> {
    let width = segments.first().map_or(0, |s| s.len());
    (0..width)
        .map(|i| {
            let mut acc = ArgVerdict::Constant;
            for s in segments {
                acc = match (acc, s[i]) {
                    (ArgVerdict::Fails, _) | (_, ArgVerdict::Fails) => ArgVerdict::Fails,
                    (a, ArgVerdict::Constant) => a,
                    (ArgVerdict::Constant, b) => b,
                    (a, b) if a == b => a,
                    _ => ArgVerdict::Fails,
                };
            }
            acc
        })
        .collect()
}

fn certify_path(
    vpath: &SampledPath,
    verdicts: Vec<ArgVerdict>,
    epsilon: i8,
    fiber: &LabeledFiber,
    start: usize,
    opts: &LiftOptions,
) -> Certificate {
    let monotone = verdicts_ok(&verdicts, epsilon);
    match lift_path(vpath, start, fiber, opts) {
        Err(e) => Certificate {
            granted: false,
            reason: Some(e.to_string()),
            start_label: start,
            end_label: None,
            is_loop: false,
            lifted_braid: None,
            verdicts,
            monotone,
        },
        Ok(pp) => {
            let is_loop = pp.end_label == Some(start);
            let reason = match (is_loop, monotone) {
                (true, true) => None,
                (false, _) => Some(format!("lift ends at label {} instead of {start}", pp.end_label.unwrap())),
                (true, false) => Some("a critical value has an argument-critical point".into()),
            };
            Certificate {
                granted: reason.is_none(),
                reason,
                start_label: start,
                end_label: pp.end_label,
                is_loop,
                lifted_braid: Some(pp.braid_roots.free_reduce()),
                verdicts,
                monotone,
            }
        }
    }
}

/// Lifts `bl` raised to `power` from `start`.
pub fn certify_lift_loop(
    bl: &BetaLoop,
    power: usize,
    fiber: &LabeledFiber,
    start: usize,
    opts: &LiftOptions,
) -> Result<Certificate> {
    if fiber.n != 3 {
        return Err(Error::Config("the loops live in V_3".into()));
    }
    let vpath = repeat(&bl.path, power.max(1))?;
    Ok(certify_path(&vpath, bl.verdicts.clone(), 1, fiber, start, opts))
}

/// Lifts the loop `prod beta_{i_j}^{k_{i_j}}` (reversed for `epsilon = -1`).
pub fn certify_theorem_word(tw: &TheoremWord, fiber: &LabeledFiber, m: usize, opts: &LiftOptions) -> Result<Certificate> {
    let mut segments = Vec::new();
    let mut verdicts = Vec::new();
    for &i in &tw.indices {
        let bl = beta_loop(i, m)?;
        let p = repeat(&bl.path, bl.power)?;
        let p = if tw.epsilon < 0 { p.reverse() } else { p };
        verdicts.push(check_argument_monotone(&p));
        segments.push(p);
    }
    if segments.is_empty() {
        let x = beta_path(1, 2)?.points[0].clone();
        segments.push(SampledPath::constant(ConfigKind::V, x.clone()));
        verdicts.push(vec![ArgVerdict::Constant; x.len()]);
    }
    let vpath = chain(&segments)?;
    Ok(certify_path(&vpath, combine_verdicts(&verdicts), tw.epsilon, fiber, 1, opts))
}

/// Order of the cycle of `rho(beta_i)` through label `start`.
pub fn closing_power(i: u8, tables: &TableSet, start: usize) -> Result<usize> {
    let h = h_of_word(&beta_braid(i)?, tables)?;
    let mut k = 1;
    let mut x = h.perm.apply(start);
    while x != start {
        x = h.perm.apply(x);
        k += 1;
    }
    Ok(k)
}

/// The lifted braid of `beta_i^k` from `start` by wreath composition.
pub fn table_lift(i: u8, k: usize, tables: &TableSet, start: usize) -> Result<BraidWord> {
    let h = h_of_word(&beta_braid(i)?.pow(k as i64), tables)?;
    Ok(h.lifted[start].free_reduce())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub components: usize,
    pub exponent_sum: i64,
    pub linking_numbers: Vec<((usize, usize), i64)>,
    pub linking_sum: i64,
    pub linking_abs_sum: i64,
    /// Degree of the Conway polynomial (breadth of the Alexander
    /// polynomial); `None` when it vanishes.
    pub conway_degree: Option<u64>,
    /// Breadth of `det(I - burau)` before dividing out the reduced factor.
    pub det_breadth: Option<u64>,
    pub bound: i64,
    pub inequality_holds: Option<bool>,
    pub homogeneous_word: bool,
    pub verdict: Option<String>,
}

/// `deg Conway >= 2 sum |lk| - k + 1` must hold for homogeneous closures.
pub fn homogeneity_obstruction(w: &BraidWord) -> Result<ObstructionReport> {
    let link = linking_numbers(w);
    let (conway_degree, det_breadth) = match alexander_poly(w) {
        Ok(a) => (Some(a.breadth), Some(a.det_breadth)),
        Err(Error::DegenerateClosure) => (None, None),
        Err(e) => return Err(e),
    };
    let k = link.components.len();
    let abs = link.abs_total();
    let bound = 2 * abs - k as i64 + 1;
    let inequality_holds = conway_degree.map(|d| d as i64 >= bound);
    let verdict = match inequality_holds {
        Some(false) => Some("cannot be the closure of a homogeneous braid".to_string()),
        _ => None,
    };
    Ok(ObstructionReport {
        components: k,
        exponent_sum: w.exponent_sum(),
        linking_numbers: link.pairs.iter().map(|(&p, &v)| (p, v)).collect(),
        linking_sum: link.total(),
        linking_abs_sum: abs,
        conway_degree,
        det_breadth,
        bound,
        inequality_holds,
        homogeneous_word: w.is_homogeneous(),
        verdict,
    })
}

pub fn homogeneous_check(w: &BraidWord) -> bool {
    w.is_homogeneous()
}

/// The three-component example: `((s1^-1 s2^-2 s1^-1 s2 s1^-1 s2^-2 s1^-1)^2 s1^-2)^2`.
pub fn example_braid() -> BraidWord {
    let inner = BraidWord::parse(3, "s1^-1 s2^-2 s1^-1 s2 s1^-1 s2^-2 s1^-1").unwrap();
    let outer = inner.pow(2).concat(&BraidWord::parse(3, "s1^-2").unwrap()).unwrap();
    outer.pow(2)
}

pub fn example_theorem_word() -> TheoremWord {
    TheoremWord { epsilon: -1, indices: vec![5, 5, 1, 5, 5, 1, 2] }
}

/// True when the squared expansion of the example word equals the example
/// braid.
pub fn example_matches() -> Result<bool> {
    let b = expand_theorem_word(&example_theorem_word())?.pow(2);
    Ok(braids_equal(&b, &example_braid())?.equal)
}

/// Which embedding the certificates read braids from.
pub const CERTIFICATE_EMBEDDING: Embedding = Embedding::Roots;
