#![allow(dead_code)]

use dfan_core::basis::Budget;
use dfan_core::malgrange::{build_presentation, PolynomialMap};
use dfan_core::syntax::parse_d_operator;
use dfan_core::vfilt::IdealPresentation;
use dfan_core::weyl::{DiffOp, Exponent, Signature};
use dfan_core::Rat;
use proptest::prelude::*;

pub fn sig(n: usize, p: usize) -> Signature {
    Signature::new(n, p).unwrap()
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn exponent(sig: Signature, max: u32, with_z: bool) -> impl Strategy<Value = Exponent> {
    let len = sig.len();
    proptest::collection::vec(0..=max, len).prop_map(move |mut v| {
        if !with_z {
            v[len - 1] = 0;
        }
        Exponent::from_slice(&v)
    })
}

pub fn op(sig: Signature, terms: usize, max: u32, with_z: bool) -> impl Strategy<Value = DiffOp> {
    proptest::collection::vec((exponent(sig, max, with_z), -4i64..=4), 1..=terms)
        .prop_map(move |ts| DiffOp::from_terms(sig, ts.into_iter().map(|(e, c)| (e, rat(if c == 0 { 1 } else { c })))))
}

pub fn map(n: usize, p: usize, fs: &[&str]) -> PolynomialMap {
    let s = sig(n, p);
    let f: Vec<DiffOp> = fs.iter().map(|t| parse_d_operator(s, t).unwrap()).collect();
    PolynomialMap::new(s, &f).unwrap()
}

pub fn presentation(n: usize, p: usize, fs: &[&str]) -> IdealPresentation {
    build_presentation(&map(n, p, fs), Budget::default()).unwrap()
}

/// Weight `x, t ↦ 1`, derivations `↦ −1`, `z ↦ 0`.
pub fn unit_weight(sig: Signature, e: &Exponent) -> i64 {
    let m = sig.m();
    let s = e.as_slice();
    s[..m].iter().map(|&a| a as i64).sum::<i64>() - s[m..2 * m].iter().map(|&a| a as i64).sum::<i64>()
}

/// Homogeneous operators whose terms share one `unit_weight`; divisions by
/// these stay in finite-dimensional graded pieces.
pub fn graded_op(sig: Signature, terms: usize, max: u32) -> impl Strategy<Value = DiffOp> {
    op(sig, terms, max, false).prop_map(move |p| {
        let first = p.terms().next().map(|(e, _)| unit_weight(sig, e)).unwrap_or(0);
        let kept = p.filter(|e| unit_weight(sig, e) == first);
        dfan_core::weyl::homogenize(&kept).unwrap()
    })
}
