mod common;

use std::collections::BTreeMap;

use common::*;
use dfan_core::order::{LinearForm, VForm};
use dfan_core::syntax::parse_operator;
use dfan_core::weyl::{dehomogenize, homogenize, l_order, l_symbol, DiffOp, Exponent, Signature};
use dfan_core::Rat;
use num_traits::Zero;
use proptest::prelude::*;

/// Words over the letters `0..2m` (variables) and `2m` (z), reduced by the
/// rules `∂_v · v -> v · ∂_v + z` and plain swaps for every other pair.
struct Rewriter {
    sig: Signature,
    memo: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>>,
}

impl Rewriter {
    fn new(sig: Signature) -> Self {
        Rewriter { sig, memo: BTreeMap::new() }
    }

    fn normal(&mut self, w: Vec<usize>) -> BTreeMap<Vec<usize>, Rat> {
        if let Some(r) = self.memo.get(&w) {
            return r.clone();
        }
        let m = self.sig.m();
        let mut out = BTreeMap::new();
        match (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1]) {
            None => {
                out.insert(w.clone(), Rat::from_integer(1.into()));
            }
            Some(i) => {
                let (a, b) = (w[i], w[i + 1]);
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                for (k, c) in self.normal(swapped) {
                    *out.entry(k).or_insert_with(Rat::zero) += c;
                }
                if a >= m && a < 2 * m && a - m == b {
                    let mut shorter = w.clone();
                    shorter.splice(i..i + 2, [2 * m]);
                    for (k, c) in self.normal(shorter) {
                        *out.entry(k).or_insert_with(Rat::zero) += c;
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        self.memo.insert(w, out.clone());
        out
    }

    fn word(&self, e: &Exponent) -> Vec<usize> {
        let mut w = Vec::new();
        for (v, &a) in e.as_slice().iter().enumerate() {
            w.extend(std::iter::repeat_n(v, a as usize));
        }
        w
    }

    fn exponent(&self, w: &[usize]) -> Exponent {
        let mut v = vec![0u32; self.sig.len()];
        for &l in w {
            v[l] += 1;
        }
        Exponent::from_slice(&v)
    }

    fn product(&mut self, a: &DiffOp, b: &DiffOp) -> DiffOp {
        let mut terms = Vec::new();
        for (ea, ca) in a.terms() {
            for (eb, cb) in b.terms() {
                let mut w = self.word(ea);
                w.extend(self.word(eb));
                for (k, c) in self.normal(w) {
                    terms.push((self.exponent(&k), c * ca * cb));
                }
            }
        }
        DiffOp::from_terms(a.signature(), terms)
    }
}

fn u_forms(m: usize) -> Vec<LinearForm> {
    let r = |v: &[i64]| v.iter().map(|x| rat(*x)).collect::<Vec<_>>();
    vec![
        LinearForm::zero(m),
        LinearForm::new(r(&vec![-1; m]), r(&vec![2; m])).unwrap(),
        LinearForm::new(r(&vec![0; m]), r(&vec![1; m])).unwrap(),
        LinearForm::new(r(&(0..m as i64).map(|i| -i).collect::<Vec<_>>()), r(&(0..m as i64).map(|i| i + 1).collect::<Vec<_>>())).unwrap(),
    ]
}

fn forms() -> Vec<VForm> {
    [[1, 0], [0, 1], [1, 1], [2, 1], [1, 3]].iter().map(|l| VForm::from_ints(l)).collect()
}

#[test]
fn commutation() {
    let s = sig(1, 1);
    let a = parse_operator(s, "dt1").unwrap();
    let b = parse_operator(s, "t1").unwrap();
    assert_eq!(&(&a * &b) - &(&b * &a), parse_operator(s, "z").unwrap());
    assert_eq!(Rewriter::new(s).product(&a, &b), &a * &b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_matches_rewriting(a in op(sig(2, 2), 3, 2, true), b in op(sig(2, 2), 3, 2, true)) {
        let mut rw = Rewriter::new(sig(2, 2));
        prop_assert_eq!(&a * &b, rw.product(&a, &b));
    }

    #[test]
    fn ring_axioms(a in op(sig(1, 2), 3, 2, true), b in op(sig(1, 2), 3, 2, true), c in op(sig(1, 2), 3, 2, true)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        let one = DiffOp::one(sig(1, 2));
        prop_assert_eq!(&one * &a, a.clone());
        prop_assert_eq!(&a * &one, a);
    }

    #[test]
    fn v_order_and_symbol_multiplicative(a in op(sig(2, 2), 3, 2, true), b in op(sig(2, 2), 3, 2, true)) {
        let ab = &a * &b;
        for l in forms() {
            let sum = match (l_order(&a, &l), l_order(&b, &l)) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            prop_assert_eq!(l_order(&ab, &l), sum);
            if !ab.is_zero() {
                prop_assert_eq!(l_symbol(&ab, &l).unwrap(), &l_symbol(&a, &l).unwrap() * &l_symbol(&b, &l).unwrap());
            }
        }
    }

    #[test]
    fn order_additive_on_u(a in op(sig(2, 1), 3, 2, true), b in op(sig(2, 1), 3, 2, true)) {
        let ab = &a * &b;
        for l in u_forms(3) {
            prop_assert!(l.in_u());
            let sum = match (l_order(&a, &l), l_order(&b, &l)) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            prop_assert_eq!(l_order(&ab, &l), sum);
        }
    }

    #[test]
    fn homogenize_products(a in op(sig(1, 1), 3, 2, false), b in op(sig(1, 1), 3, 2, false)) {
        let ha = homogenize(&a).unwrap();
        let hb = homogenize(&b).unwrap();
        let prod = dehomogenize(&(&a * &b));
        prop_assert_eq!(dehomogenize(&(&ha * &hb)), prod.clone());
        if !prod.is_zero() {
            let hp = homogenize(&prod).unwrap();
            let hh = &ha * &hb;
            let gap = hh.hom_degree().unwrap() - hp.hom_degree().unwrap();
            prop_assert_eq!(hp.mul_z_pow(gap), hh);
        }
    }

    #[test]
    fn homogenization_round_trip(a in op(sig(2, 1), 4, 3, false)) {
        let h = homogenize(&a).unwrap();
        prop_assert!(h.is_homogeneous());
        prop_assert_eq!(dehomogenize(&h), a);
    }

    #[test]
    fn display_round_trip(a in op(sig(2, 2), 4, 3, true)) {
        prop_assert_eq!(parse_operator(sig(2, 2), &a.to_string()).unwrap(), a);
    }
}
