mod common;

use std::collections::BTreeSet;

use common::*;
use dfan_core::basis::{lemma_utile_check, Budget, MarkedBasis};
use dfan_core::fan::{basis_at, proposition_check, FanCell, Slope, VGroebnerFan};
use dfan_core::oracle::{DegreeWindow, Oracle, RingKind};
use dfan_core::order::{OrderSpec, VForm};
use dfan_core::weyl::{DiffOp, Exponent};
use dfan_core::Rat;

fn p2_ideals() -> Vec<(usize, usize, Vec<&'static str>)> {
    vec![(2, 2, vec!["x1", "x2"]), (1, 2, vec!["x1", "x1"]), (1, 2, vec!["x1^2", "x1"]), (2, 2, vec!["x1*x2", "x1"])]
}

fn q(a: i64, b: i64) -> Rat {
    Rat::new(a.into(), b.into())
}

fn samples() -> Vec<Slope> {
    let mut v = vec![Slope::Infinity];
    for num in 0..=40 {
        for den in [1, 2, 3, 7] {
            v.push(Slope::Finite(q(num, den)));
        }
    }
    v
}

fn gens(fan: &VGroebnerFan) -> Vec<DiffOp> {
    fan.saturated.ops().cloned().collect()
}

/// Three rational slopes strictly inside a 2-cell.
fn interior(cell: &FanCell) -> Vec<Slope> {
    let iv = &cell.interval;
    match (&iv.lo, &iv.hi) {
        (Slope::Finite(a), Slope::Finite(b)) => (1..=3).map(|k| Slope::Finite(a + (b - a) * q(k, 4))).collect(),
        (Slope::Finite(a), Slope::Infinity) => (1..=3).map(|k| Slope::Finite(a + q(k * k, 1))).collect(),
        _ => unreachable!("cells start at a finite slope"),
    }
}

#[test]
fn cells_tile_the_quadrant() {
    for (n, p, fs) in p2_ideals() {
        let fan = presentation(n, p, &fs).fan().clone();
        let c = &fan.cells;
        assert_eq!(c[0].interval.lo, Slope::Finite(q(0, 1)));
        assert!(c[0].interval.lo_closed);
        let last = &c[c.len() - 1].interval;
        assert_eq!(last.hi, Slope::Infinity);
        assert!(last.hi_closed);
        for w in c.windows(2) {
            assert_eq!(w[0].interval.hi, w[1].interval.lo);
            assert!(w[0].interval.hi_closed != w[1].interval.lo_closed, "{fs:?}");
        }
        for s in samples() {
            assert_eq!(c.iter().filter(|cell| cell.interval.contains(&s)).count(), 1, "{fs:?} at {s}");
        }
    }
}

#[test]
fn bases_are_stable_inside_cells() {
    for (n, p, fs) in p2_ideals() {
        let fan = presentation(n, p, &fs).fan().clone();
        let sg = sig(n, p);
        for cell in fan.maximal_cells() {
            for s in interior(cell) {
                let b = basis_at(&gens(&fan), sg, &s.form(), Budget::default()).unwrap();
                assert!(b.same_marked_elements(&cell.basis), "{fs:?}: {} at {s}", cell.interval);
            }
        }
        for cell in fan.cells.iter().filter(|c| c.dim == 1) {
            let s = cell.interval.lo.clone();
            let b = basis_at(&gens(&fan), sg, &s.form(), Budget::default()).unwrap();
            assert!(b.same_marked_elements(&cell.basis));
        }
    }
}

#[test]
fn walls_separate_distinct_bases() {
    for (n, p, fs) in p2_ideals() {
        let fan = presentation(n, p, &fs).fan().clone();
        let marks = |b: &MarkedBasis| b.marks().cloned().collect::<BTreeSet<Exponent>>();
        for w in fan.cells.windows(2) {
            assert_ne!(marks(&w[0].basis), marks(&w[1].basis), "{fs:?}: {} | {}", w[0].interval, w[1].interval);
        }
    }
}

#[test]
fn limit_orders_bridge_walls() {
    for (n, p, fs) in p2_ideals() {
        let fan = presentation(n, p, &fs).fan().clone();
        let sg = sig(n, p);
        for cell in fan.maximal_cells() {
            for l in cell.generators() {
                assert!(proposition_check(cell, &l).unwrap(), "{fs:?}: {} at {l}", cell.interval);
                if l.same_ray(&cell.witness) {
                    continue;
                }
                let lim = OrderSpec::ConeLimit { l: l.clone(), direction: cell.witness.clone() }.compile(sg).unwrap();
                assert!(lemma_utile_check(&cell.basis, &lim));
                let near = l.combine(&q(99, 100), &cell.witness.primitive().unwrap(), &q(1, 100));
                assert!(lemma_utile_check(&cell.basis, &OrderSpec::hom_v(&near, sg).compile(sg).unwrap()));
            }
        }
        for cell in fan.cells.iter().filter(|c| c.dim == 1) {
            assert!(proposition_check(cell, &cell.witness).unwrap());
        }
    }
}

#[test]
fn skeleton_is_minimal() {
    for (n, p, fs) in p2_ideals() {
        let fan = presentation(n, p, &fs).fan().clone();
        let ends: BTreeSet<Slope> = fan.cells.iter().flat_map(|c| [c.interval.lo.clone(), c.interval.hi.clone()]).collect();
        let sk: BTreeSet<Slope> = fan.skeleton.iter().map(Slope::of).collect();
        assert_eq!(ends, sk, "{fs:?}");
        for w in fan.skeleton.windows(2) {
            assert!(Slope::of(&w[0]) < Slope::of(&w[1]));
        }
    }
}

#[test]
fn normal_crossing_has_one_maximal_cell() {
    let fan = presentation(2, 2, &["x1", "x2"]).fan().clone();
    assert_eq!(fan.maximal_cells().count(), 1);
    assert_eq!(fan.skeleton, vec![VForm::from_ints(&[1, 0]), VForm::from_ints(&[0, 1])]);
}

#[test]
fn duplicated_x_has_a_wall_at_one() {
    let pres = presentation(1, 2, &["x1", "x1"]);
    let fan = pres.fan();
    let sg = sig(1, 2);
    let wall = fan.cells.iter().find(|c| c.interval.is_point() && c.interval.lo == Slope::Finite(q(1, 1)));
    assert!(wall.is_some());
    // Oracle leading exponents at slopes 1/2, 1, 2 against the engine's bases.
    let window = DegreeWindow { bound: 5 };
    let oracle = Oracle::new(gens(fan), RingKind::Homogenized, window, map(1, 2, &["x1", "x1"]).grading()).unwrap();
    let mut seen = Vec::new();
    for s in [Slope::Finite(q(1, 2)), Slope::Finite(q(1, 1)), Slope::Finite(q(2, 1))] {
        let b = basis_at(&gens(fan), sg, &s.form(), Budget::default()).unwrap();
        let cell = fan.cell_of(&s).unwrap();
        assert!(b.same_marked_elements(&cell.basis));
        let stairs = b.staircase();
        let leads = oracle.leading_exponents(b.order(), None, Some(1));
        assert!(!leads.is_empty());
        for e in &leads {
            assert!(stairs.contains(e), "at {s}: {e:?}");
        }
        for (qop, mark) in b.elements() {
            if qop.hom_degree() == Some(1) && qop.terms().all(|(e, _)| e.total_degree() <= window.bound) {
                assert!(leads.contains(mark), "at {s}: mark {mark:?}");
            }
        }
        seen.push(b.marks().cloned().collect::<BTreeSet<_>>());
    }
    assert_ne!(seen[0], seen[2]);
    assert_ne!(seen[0], seen[1]);
    assert_ne!(seen[1], seen[2]);
}
