use std::fs;
use std::process::ExitCode;

use adic_braid::action::phi::{phi_apply, phi_level_perm, PhiTower};
use adic_braid::action::{psi_apply, rho_level, ActionKind, AdicPrefix, TableSet};
use adic_braid::braid::{BraidWord, Perm};
use adic_braid::config::{write_atomic, RunConfig};
use adic_braid::dynamics::{forward_orbit, preimage_tree, render_plot, OrbitMode, PlotFormat};
use adic_braid::fiber::{solve_fiber, LabeledFiber};
use adic_braid::invariants::{conjugacy_sequence, distinguish_sequences, invariant_stream, lift_sequence, BaseInvariant};
use adic_braid::lift::{lift_path, project_to_v, word_loop, Embedding};
use adic_braid::poly::C64;
use adic_braid::realalg::{
    beta_loop, certify_lift_loop, certify_theorem_word, check_theorem_condition, example_braid, expand_theorem_word,
    homogeneity_obstruction, TheoremWord,
};
use adic_braid::verify::{render_table, run_all};
use serde_json::{json, Value};

use crate::{ActionCmd, Cli, Command, DynamicsCmd, EmbeddingArg, FormatArg, KindArg, ModeArg, RealalgCmd};

pub enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Compute(e.into())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// One-line JSON description of a failed computation.
pub fn diagnostic(e: &anyhow::Error) -> String {
    let kind = match e.downcast_ref::<adic_braid::Error>() {
        Some(inner) => format!("{inner:?}").split(['(', ' ', '{']).next().unwrap_or("Error").to_string(),
        None => "Error".to_string(),
    };
    let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
    json!({ "error": kind, "message": e.to_string(), "chain": chain }).to_string()
}

fn config(cli: &Cli) -> Result<RunConfig, Failure> {
    let g = &cli.global;
    let mut c = match &g.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::for_n(g.n.unwrap_or(3)),
    };
    if let Some(n) = g.n {
        c.n = n;
    }
    if let Some(b) = &g.base {
        c.base = Some(parse_points(b)?.iter().map(|z| [z.re, z.im]).collect());
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = g.$f { c.$f = v; })* };
    }
    set!(epsilon, samples, tau_sep, tau_zero, residual_tol, seed);
    if let Some(e) = g.embedding {
        c.embedding = embedding(e);
    }
    if g.phi_max_depth.is_some() {
        c.phi_max_depth = g.phi_max_depth;
    }
    if g.cache_dir.is_some() {
        c.cache_dir = g.cache_dir.clone();
    }
    c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(c)
}

fn embedding(e: EmbeddingArg) -> Embedding {
    match e {
        EmbeddingArg::Roots => Embedding::Roots,
        EmbeddingArg::CriticalPoints => Embedding::CriticalPoints,
    }
}

fn parse_points(text: &str) -> Result<Vec<C64>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [re, im] => match (re.parse::<f64>(), im.parse::<f64>()) {
                    (Ok(a), Ok(b)) => Ok(C64::new(a, b)),
                    _ => usage(format!("bad complex number {pair:?}")),
                },
                _ => usage(format!("expected `re,im`, got {pair:?}")),
            }
        })
        .collect()
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|_| Failure::Usage(format!("bad list entry {s:?}"))))
        .collect()
}

fn parse_word(n: usize, text: &str) -> Result<BraidWord, Failure> {
    BraidWord::parse(n, text).map_err(|e| Failure::Usage(e.to_string()))
}

fn c(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn cs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|&z| c(z)).collect()
}

fn perm_json(p: &Perm) -> Value {
    json!({ "cycles": p.to_string(), "images": p })
}

fn emit(cli: &Cli, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    match &cli.global.out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn fiber_json(f: &LabeledFiber) -> Value {
    let labels: Vec<Value> = f
        .points
        .iter()
        .enumerate()
        .map(|(l, p)| {
            json!({
                "label": l,
                "covers_position": f.covers[l],
                "nonzero_roots": cs(p.nonzero_roots()),
                "critical_points": cs(&p.critical_points),
                "critical_values": cs(&p.critical_values),
            })
        })
        .collect();
    json!({
        "n": f.n,
        "base": cs(&f.base),
        "base_hash": f.hash,
        "residue_of_position": f.residue_of_position,
        "labels": labels,
    })
}

fn tables(cfg: &RunConfig) -> Result<(LabeledFiber, TableSet), Failure> {
    let f = cfg.fiber()?;
    let t = cfg.tables(&f)?;
    Ok((f, t))
}

fn tower(cfg: &RunConfig) -> Result<PhiTower, Failure> {
    let mut t = PhiTower::new(cfg.fiber()?, cfg.embedding, cfg.lift_options(), cfg.fiber_options());
    if let Some(d) = cfg.phi_max_depth {
        t.max_depth = d;
    }
    Ok(t)
}

pub fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let cfg = config(cli)?;
    let n = cfg.n;
    let out = match &cli.command {
        Command::Fiber { v: None } => fiber_json(&cfg.fiber()?),
        Command::Fiber { v: Some(v) } => {
            let v = parse_points(v)?;
            if v.len() + 1 != n {
                return usage(format!("a point of V_{n} has {} entries", n - 1));
            }
            let f = solve_fiber(&v, &cfg.fiber_options())?;
            let polys: Vec<Value> = f
                .iter()
                .map(|p| json!({ "nonzero_roots": cs(p.nonzero_roots()), "critical_points": cs(&p.critical_points) }))
                .collect();
            json!({ "n": n, "v": cs(&v), "count": f.len(), "fiber": polys })
        }
        Command::Lift { word, label, csv } => {
            let w = parse_word(n, word)?;
            let f = cfg.fiber()?;
            if *label >= f.len() {
                return usage(format!("label must be below {}", f.len()));
            }
            let path = word_loop(&w, &f.base, cfg.samples)?;
            let vpath = project_to_v(&path, f.covers[*label])?;
            let pp = lift_path(&vpath, *label, &f, &cfg.lift_options())?;
            if let Some(p) = csv {
                let mut buf = Vec::new();
                pp.write_csv(&mut buf, cfg.embedding)?;
                write_atomic(p, &buf)?;
            }
            json!({
                "word": w.to_string(),
                "start_label": pp.start_label,
                "end_label": pp.end_label,
                "braid_roots": pp.braid_roots.free_reduce().to_string(),
                "braid_critical_points": pp.braid_crit.free_reduce().to_string(),
                "samples": pp.samples.len(),
            })
        }
        Command::Action(cmd) => action(&cfg, cmd)?,
        Command::Invariants { word, depth, other } => {
            let w = parse_word(n, word)?;
            let (_, t) = tables(&cfg)?;
            let seq = lift_sequence(&w, *depth, &t)?;
            let streams: serde_json::Map<String, Value> =
                BaseInvariant::ALL.iter().map(|b| (b.name().to_string(), json!(invariant_stream(&seq, *b)))).collect();
            let cycles: Vec<Value> = conjugacy_sequence(&w, *depth, &t)?
                .iter()
                .map(|d| json!({ "level": d.level, "signature": d.signature() }))
                .collect();
            let lifts: Vec<Vec<String>> = seq.levels.iter().map(|l| l.iter().map(|b| b.to_string()).collect()).collect();
            let mut v = json!({ "word": w.to_string(), "depth": depth, "lifts": lifts, "streams": streams, "cycle_data": cycles });
            if let Some(o) = other {
                let o = parse_word(n, o)?;
                let verdict = distinguish_sequences(&seq, &lift_sequence(&o, *depth, &t)?)?;
                v["other"] = json!(o.to_string());
                v["verdict"] = json!(verdict);
            }
            v
        }
        Command::Dynamics(cmd) => dynamics(&cfg, cmd)?,
        Command::Realalg(cmd) => realalg(&cfg, cmd)?,
        Command::VerifyPaper => {
            let rows = run_all(&cfg);
            eprint!("{}", render_table(&rows));
            let all = rows.iter().all(|r| r.passed);
            emit(cli, &json!({ "passed": all, "checks": rows }))?;
            return Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    };
    emit(cli, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn action(cfg: &RunConfig, cmd: &ActionCmd) -> Result<Value, Failure> {
    let n = cfg.n;
    Ok(match cmd {
        ActionCmd::Table => {
            let (_, t) = tables(cfg)?;
            let gens: serde_json::Map<String, Value> = t
                .tables
                .iter()
                .map(|(i, g)| {
                    let lifted: Vec<String> = g.lifted.iter().map(|b| b.to_string()).collect();
                    (format!("s{i}"), json!({ "perm": perm_json(&g.perm), "lifted": lifted }))
                })
                .collect();
            json!({ "n": n, "embedding": t.embedding, "base_hash": t.base_hash, "generators": gens })
        }
        ActionCmd::Rho { word, level, kind } => {
            let w = parse_word(n, word)?;
            let p = match kind {
                KindArg::Psi => rho_level(&w, *level, &tables(cfg)?.1)?,
                KindArg::Phi => phi_level_perm(&w, *level, &tower(cfg)?)?,
            };
            let orbits: Vec<usize> = p.cycles().iter().map(|c| c.len()).collect();
            json!({ "word": w.to_string(), "level": level, "kind": action_kind(*kind), "perm": perm_json(&p), "cycle_lengths": orbits })
        }
        ActionCmd::Act { word, prefix, kind, residues } => {
            let w = parse_word(n, word)?;
            let kind = action_kind(*kind);
            let a = if *residues {
                AdicPrefix::from_residues(kind, n, &parse_list::<u128>(prefix)?)
            } else {
                AdicPrefix::new(kind, n, parse_list::<usize>(prefix)?)
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            let b = match kind {
                ActionKind::Psi => psi_apply(&w, &a, &tables(cfg)?.1)?,
                ActionKind::Phi => phi_apply(&w, &a, &tower(cfg)?)?,
            };
            json!({
                "word": w.to_string(),
                "kind": kind,
                "input": { "digits": a.digits, "residues": a.residues()? },
                "output": { "digits": b.digits, "residues": b.residues()? },
            })
        }
    })
}

fn action_kind(k: KindArg) -> ActionKind {
    match k {
        KindArg::Psi => ActionKind::Psi,
        KindArg::Phi => ActionKind::Phi,
    }
}

fn dynamics(cfg: &RunConfig, cmd: &DynamicsCmd) -> Result<Value, Failure> {
    let n = cfg.n;
    Ok(match cmd {
        DynamicsCmd::Tree { point, depth, plot, format } => {
            let x = parse_points(point)?;
            if x.len() + 1 != n {
                return usage(format!("a point of V_{n} has {} entries", n - 1));
            }
            let (tree, error) = match preimage_tree(&x, *depth, &cfg.fiber_options()) {
                Ok(t) => (t, None),
                Err(p) => (p.tree, Some(p.error.to_string())),
            };
            if let Some(path) = plot {
                let fmt = match format {
                    FormatArg::Csv => PlotFormat::Csv,
                    FormatArg::Svg => PlotFormat::Svg,
                };
                write_atomic(path, render_plot(&tree.all_points(), fmt).as_bytes())?;
            }
            let levels: Vec<Value> = (0..=tree.depth())
                .map(|j| {
                    let (lo, hi) = tree.modulus_range(j).unwrap_or((0.0, 0.0));
                    json!({ "level": j, "tuples": tree.tuples[j].len(), "modulus_min": lo, "modulus_max": hi })
                })
                .collect();
            json!({ "root": cs(&x), "depth": tree.depth(), "levels": levels, "error": error })
        }
        DynamicsCmd::Orbit { point, steps, mode } => {
            let x = parse_points(point)?;
            if x.len() + 1 != n {
                return usage(format!("the tuple has {} entries for n = {n}", n - 1));
            }
            let mode = match mode {
                ModeArg::Roots => OrbitMode::Roots,
                ModeArg::CriticalPoints => OrbitMode::CriticalPoints,
            };
            let o = forward_orbit(&x, *steps, mode, cfg.tau_zero);
            let iterates: Vec<Vec<[f64; 2]>> = o.iterates.iter().map(|v| cs(v)).collect();
            json!({
                "start": cs(&x),
                "mode": mode,
                "zero_counts": o.zero_counts,
                "limit": o.limit(),
                "monotone": o.is_monotone(),
                "leaves_v_at": o.leaves_v_at,
                "iterates": iterates,
            })
        }
    })
}

fn theorem_word(sign: i8, indices: &str) -> Result<TheoremWord, Failure> {
    TheoremWord::new(sign, parse_list::<u8>(indices)?).map_err(|e| Failure::Usage(e.to_string()))
}

fn realalg(cfg: &RunConfig, cmd: &RealalgCmd) -> Result<Value, Failure> {
    Ok(match cmd {
        RealalgCmd::Check { sign, indices } => {
            let tw = theorem_word(*sign, indices)?;
            let w = expand_theorem_word(&tw)?;
            let cond = check_theorem_condition(&tw);
            json!({
                "sign": tw.epsilon,
                "indices": tw.indices,
                "braid": w.to_string(),
                "squared": w.pow(2).to_string(),
                "condition": cond,
            })
        }
        RealalgCmd::Certify { beta, power, start, sign, indices, loop_samples } => {
            if cfg.n != 3 {
                return usage("certificates need --n 3");
            }
            let f = cfg.fiber()?;
            let lo = cfg.lift_options();
            match (beta, indices) {
                (Some(i), _) => {
                    let bl = beta_loop(*i, *loop_samples).map_err(|e| Failure::Usage(e.to_string()))?;
                    let k = power.unwrap_or(bl.power);
                    let cert = certify_lift_loop(&bl, k, &f, *start, &lo)?;
                    json!({ "beta": i, "power": k, "loop_braid": bl.braid.to_string(), "certificate": cert_json(&cert) })
                }
                (None, Some(ix)) => {
                    let tw = theorem_word(*sign, ix)?;
                    let cert = certify_theorem_word(&tw, &f, *loop_samples, &lo)?;
                    json!({ "sign": tw.epsilon, "indices": tw.indices, "expected": expand_theorem_word(&tw)?.to_string(), "certificate": cert_json(&cert) })
                }
                (None, None) => return usage("give --beta or --indices"),
            }
        }
        RealalgCmd::Obstruct { word } => {
            let w = match word {
                Some(s) => parse_word(cfg.n, s)?,
                None => example_braid(),
            };
            json!({ "word": w.to_string(), "report": homogeneity_obstruction(&w)? })
        }
    })
}

fn cert_json(c: &adic_braid::realalg::Certificate) -> Value {
    json!({
        "granted": c.granted,
        "reason": c.reason,
        "start_label": c.start_label,
        "end_label": c.end_label,
        "is_loop": c.is_loop,
        "lifted_braid": c.lifted_braid.as_ref().map(|b| b.to_string()),
        "monotone": c.monotone,
        "verdicts": c.verdicts,
    })
}
