use std::f64::consts::PI;
use std::sync::OnceLock;

use adic_braid::action::{h_of_word, psi_apply, rho_level, ActionKind, AdicPrefix, TableSet};
use adic_braid::braid::{braids_equal, burau_reduced, linking_numbers, BraidWord};
use adic_braid::fiber::{full_fiber, root_of_unity_orbit, solve_fiber, FiberOptions, LabeledFiber};
use adic_braid::invariants::{exponent_sum_budget, lift_sequence};
use adic_braid::lift::{lift_path, project_to_v, word_loop, Embedding, LiftOptions};
use adic_braid::poly::{all_roots, coeffs_from_roots, poly_from_critical_points, set_distance, MonicPoly, C64};
use adic_braid::realalg::{expand_theorem_word, theorem_block, TheoremWord};
use adic_braid::reference::Reference;
use proptest::prelude::*;

fn fixture(n: usize) -> &'static (LabeledFiber, TableSet) {
    static F2: OnceLock<(LabeledFiber, TableSet)> = OnceLock::new();
    static F3: OnceLock<(LabeledFiber, TableSet)> = OnceLock::new();
    let cell = if n == 2 { &F2 } else { &F3 };
    cell.get_or_init(|| {
        let r = Reference::for_n(n).unwrap();
        let f = full_fiber(&r.base(), &FiberOptions::default(), Some(&r)).unwrap();
        let t = TableSet::build(&f, Embedding::Roots, &LiftOptions::default()).unwrap();
        (f, t)
    })
}

fn word(n: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
    let m = n as i64 - 1;
    prop::collection::vec((1..=m, any::<bool>()), 0..=max_len)
        .prop_map(move |v| BraidWord::from_signed(n, &v.iter().map(|&(i, s)| if s { i } else { -i }).collect::<Vec<_>>()).unwrap())
}

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn v_point(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((0.2f64..3.0, 0.0..2.0 * PI), n - 1)
        .prop_map(|v| v.into_iter().map(|(r, a)| C64::from_polar(r, a)).collect::<Vec<_>>())
        .prop_filter("separated", |v| v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).norm() > 0.1)))
}

fn insert_cancelling(w: &BraidWord, pos: usize, gen: usize, sign: bool) -> BraidWord {
    let n = w.strands() as i64;
    let mut s: Vec<i64> = w.letters().iter().map(|l| l.index as i64 * l.sign as i64).collect();
    let g = (gen as i64 % (n - 1)) + 1;
    let g = if sign { g } else { -g };
    let p = pos % (s.len() + 1);
    s.splice(p..p, [g, -g]);
    BraidWord::from_signed(w.strands(), &s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn word_invariants_ignore_cancelling_pairs(w in word(4, 40), pos in 0usize..50, g in 0usize..3, s in any::<bool>()) {
        let v = insert_cancelling(&w, pos, g, s);
        prop_assert_eq!(v.free_reduce(), w.free_reduce());
        prop_assert_eq!(v.perm_rep(), w.perm_rep());
        prop_assert_eq!(v.exponent_sum(), w.exponent_sum());
        prop_assert_eq!(burau_reduced(&v), burau_reduced(&w));
    }

    #[test]
    fn representations_are_homomorphisms(a in word(4, 12), b in word(4, 12)) {
        let ab = a.concat(&b).unwrap();
        prop_assert_eq!(ab.perm_rep(), a.perm_rep().then(&b.perm_rep()));
        prop_assert_eq!(burau_reduced(&ab), burau_reduced(&a).mul(&burau_reduced(&b)));
    }

    #[test]
    fn pure_braid_exponent_sum_is_twice_total_linking(w in word(4, 10)) {
        let k = w.perm_rep().order() as i64;
        let p = w.pow(k);
        prop_assert_eq!(p.exponent_sum(), 2 * linking_numbers(&p).total());
    }

    #[test]
    fn critical_point_round_trip(n in 2usize..=4, c in prop::collection::vec(complex(2.0), 3)) {
        let c = &c[..n - 1];
        let p = poly_from_critical_points(c).unwrap();
        let q = coeffs_from_roots(&all_roots(&p));
        let scale = 1.0 + p.coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for (a, b) in p.coeffs.iter().zip(&q) {
            prop_assert!((a - b).norm() <= 1e-9 * scale);
        }
        prop_assert_eq!(p.critical_values.len(), n - 1);
    }

    #[test]
    fn scaling_critical_points_scales_values(n in 2usize..=4, c in prop::collection::vec(complex(2.0), 3), lam in complex(1.5)) {
        prop_assume!(lam.norm() > 0.1);
        let p = MonicPoly::from_critical_points(&c[..n - 1]).unwrap();
        let q = p.scaled(lam).unwrap();
        let f = lam.powi(n as i32);
        for (a, b) in p.critical_values.iter().zip(&q.critical_values) {
            prop_assert!((a * f - b).norm() <= 1e-9 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn theorem_word_exponent_sums_add(eps in prop::sample::select(vec![1i8, -1]), ix in prop::collection::vec(1u8..=5, 0..8)) {
        let tw = TheoremWord::new(eps, ix.clone()).unwrap();
        let sq = expand_theorem_word(&tw).unwrap().pow(2);
        let sum: i64 = ix.iter().map(|&i| theorem_block(i).unwrap().exponent_sum()).sum();
        prop_assert_eq!(sq.exponent_sum(), 2 * eps as i64 * sum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn fiber_counts_and_residuals(n in 2usize..=3, v in v_point(3)) {
        let v = &v[..n - 1];
        let f = solve_fiber(v, &FiberOptions::default()).unwrap();
        prop_assert_eq!(f.len(), n.pow(n as u32 - 1));
        let scale = 1.0 + v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for p in &f {
            prop_assert!(set_distance(&p.critical_values, v) <= 1e-8 * scale);
        }
        prop_assert_eq!(solve_fiber(v, &FiberOptions::default()).unwrap(), f);
    }

    #[test]
    fn psi_homomorphism_and_compatibility(n in 2usize..=3, a in word(3, 8), b in word(3, 8), j in 1usize..=2) {
        let (a, b) = if n == 2 { (collapse(&a), collapse(&b)) } else { (a, b) };
        let t = &fixture(n).1;
        let ab = rho_level(&a.concat(&b).unwrap(), j, t).unwrap();
        let pa = rho_level(&a, j, t).unwrap();
        prop_assert_eq!(&ab, &pa.then(&rho_level(&b, j, t).unwrap()));
        let upper = rho_level(&a, j + 1, t).unwrap();
        let m = pa.size();
        for x in 0..upper.size() {
            prop_assert_eq!(upper.apply(x) % m, pa.apply(x % m));
        }
    }

    #[test]
    fn psi_inverse_and_isometry(a in word(3, 8), d in prop::collection::vec(0usize..27, 3), e in prop::collection::vec(0usize..27, 3), split in 0usize..3) {
        let t = &fixture(3).1;
        let x = AdicPrefix::new(ActionKind::Psi, 3, d.clone()).unwrap();
        let mut e2 = d[..split].to_vec();
        e2.extend_from_slice(&e[split..]);
        let y = AdicPrefix::new(ActionKind::Psi, 3, e2).unwrap();
        let gx = psi_apply(&a, &x, t).unwrap();
        prop_assert_eq!(&psi_apply(&a.inverse(), &gx, t).unwrap(), &x);
        prop_assert_eq!(gx.common_prefix(&psi_apply(&a, &y, t).unwrap()), x.common_prefix(&y));
    }

    #[test]
    fn halving(k in -40i64..40) {
        let t = &fixture(2).1;
        let h = h_of_word(&BraidWord::generator_power(2, 1, k).unwrap(), t).unwrap();
        for (l, b) in h.lifted.iter().enumerate() {
            let e = b.exponent_sum();
            let want = if k % 2 == 0 { k / 2 } else if l % 2 == 1 { k.div_euclid(2) + 1 } else { k.div_euclid(2) };
            prop_assert_eq!(e, want, "label {}", l);
            prop_assert_eq!(b.free_reduce(), BraidWord::generator_power(2, 1, e).unwrap());
        }
    }

    #[test]
    fn exponent_sum_budget_is_linear(a in word(3, 6)) {
        let (_, t) = fixture(3);
        let per_generator: i64 = t.tables[&1].lifted.iter().map(|b| b.exponent_sum()).sum();
        let seq = lift_sequence(&a, 2, t).unwrap();
        for j in 0..2 {
            let budget = exponent_sum_budget(&seq, j);
            for (i, b) in seq.level(j).iter().enumerate() {
                prop_assert_eq!(budget.get(&i).copied().unwrap_or(0), per_generator * b.exponent_sum());
            }
        }
    }

    #[test]
    fn lifts_stable_under_resampling_and_match_tables(a in word(3, 3), label in 0usize..27) {
        let (f, t) = fixture(3);
        let h = h_of_word(&a, t).unwrap();
        let mut ends = Vec::new();
        for m in [100usize, 200] {
            let path = word_loop(&a, &f.base, m).unwrap();
            let v = project_to_v(&path, f.covers[label]).unwrap();
            let pp = lift_path(&v, label, f, &LiftOptions { samples: m, ..LiftOptions::default() }).unwrap();
            prop_assert_eq!(pp.end_label, Some(h.perm.apply(label)));
            prop_assert!(braids_equal(&pp.braid_roots, &h.lifted[label]).unwrap().equal);
            ends.push(pp);
        }
        // reversal
        let path = word_loop(&a, &f.base, 100).unwrap().reverse();
        let end = h.perm.apply(label);
        let at = f.base[f.covers[end]];
        let entry = (0..3).min_by(|&x, &y| (path.start()[x] - at).norm().total_cmp(&(path.start()[y] - at).norm())).unwrap();
        let v = project_to_v(&path, entry).unwrap();
        let back = lift_path(&v, end, f, &LiftOptions::default()).unwrap();
        prop_assert_eq!(back.end_label, Some(label));
        prop_assert!(braids_equal(&back.braid_roots, &h.lifted[label].inverse()).unwrap().equal);
        prop_assert!(h.residues_compatible(&a, f));
    }

    #[test]
    fn fiber_closed_under_roots_of_unity(l in 0usize..27) {
        let (f, _) = fixture(3);
        for q in root_of_unity_orbit(&f.points[l]).unwrap() {
            prop_assert!(f.label_of(&q, 1e-6).is_some());
        }
    }
}

fn collapse(w: &BraidWord) -> BraidWord {
    BraidWord::generator_power(2, 1, w.exponent_sum()).unwrap()
}

#[test]
fn braid_relations_hold() {
    for n in [3usize, 4] {
        for i in 1..n - 1 {
            let a = BraidWord::from_signed(n, &[i as i64, i as i64 + 1, i as i64]).unwrap();
            let b = BraidWord::from_signed(n, &[i as i64 + 1, i as i64, i as i64 + 1]).unwrap();
            assert!(braids_equal(&a, &b).unwrap().equal);
        }
        if n == 4 {
            let a = BraidWord::from_signed(4, &[1, 3]).unwrap();
            let b = BraidWord::from_signed(4, &[3, 1]).unwrap();
            assert!(braids_equal(&a, &b).unwrap().equal);
        }
    }
}

#[test]
fn psi_two_faithful_at_finite_levels() {
    let t = &fixture(2).1;
    for m in 0..=5u32 {
        for q in [1i64, 3, -1, -5] {
            let k = 2i64.pow(m) * q;
            let p = rho_level(&BraidWord::generator_power(2, 1, k).unwrap(), m as usize + 1, t).unwrap();
            assert!(!p.is_identity(), "k = {k}");
        }
    }
}
