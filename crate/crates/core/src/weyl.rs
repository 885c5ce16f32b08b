//! Operators of the homogenized Weyl algebra `D_{n+p}<z>`.
//!
//! An operator is stored fully expanded as a finite sum of normally ordered
//! monomials `x^α t^μ ∂x^β ∂t^ν z^k` (coordinates to the left of derivations)
//! with exact rational coefficients. The only non-trivial relation is
//! `[∂v, v] = z` for each coordinate `v`; `z` is central. Elements with no
//! `z` are the elements of the ordinary ring `D_{n+p}` (where `z = 1`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::Rat;

/// Counts of `x`- and `t`-variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub n: usize,
    pub p: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, p={})", self.n, self.p)
    }
}

impl Signature {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n == 0 && p == 0 {
            return Err(Error::Precondition("signature needs n >= 1 or p >= 1".into()));
        }
        Ok(Signature { n, p })
    }

    /// Number of coordinates `n + p`.
    pub fn m(&self) -> usize {
        self.n + self.p
    }

    /// Length of an exponent vector, `2(n+p) + 1`.
    pub fn len(&self) -> usize {
        2 * self.m() + 1
    }

    pub fn x(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        i
    }
    pub fn t(&self, j: usize) -> usize {
        debug_assert!(j < self.p);
        self.n + j
    }
    pub fn dx(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        self.m() + i
    }
    pub fn dt(&self, j: usize) -> usize {
        debug_assert!(j < self.p);
        self.m() + self.n + j
    }
    pub fn z(&self) -> usize {
        2 * self.m()
    }

    /// Display names of the variables in exponent-vector order.
    pub fn variable_names(&self) -> Vec<String> {
        let mut v = Vec::with_capacity(self.len());
        v.extend((1..=self.n).map(|i| format!("x{i}")));
        v.extend((1..=self.p).map(|j| format!("t{j}")));
        v.extend((1..=self.n).map(|i| format!("dx{i}")));
        v.extend((1..=self.p).map(|j| format!("dt{j}")));
        v.push("z".into());
        v
    }
}

/// Exponent vector laid out as `(α, μ, β, ν, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(pub SmallVec<[u32; 12]>);

impl Exponent {
    pub fn zero(sig: Signature) -> Self {
        Exponent(SmallVec::from_elem(0, sig.len()))
    }

    pub fn from_slice(s: &[u32]) -> Self {
        Exponent(SmallVec::from_slice(s))
    }

    pub fn unit(sig: Signature, idx: usize) -> Self {
        let mut e = Self::zero(sig);
        e.0[idx] = 1;
        e
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn k(&self) -> u32 {
        *self.0.last().expect("exponent vectors are never empty")
    }

    /// `|β| + |ν|`, the total derivation degree.
    pub fn derivation_degree(&self, sig: Signature) -> u32 {
        self.0[sig.m()..2 * sig.m()].iter().sum()
    }

    /// `k + |β| + |ν|`, the grading degree in `D<z>`.
    pub fn hom_degree(&self, sig: Signature) -> u32 {
        self.derivation_degree(sig) + self.k()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, `None` unless `other` divides `self`.
    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Exponent(out))
    }

    pub fn divides(&self, other: &Exponent) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn join(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(other.0.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn with_k(&self, k: u32) -> Exponent {
        let mut e = self.clone();
        *e.0.last_mut().unwrap() = k;
        e
    }
}

/// Finite sum of normally ordered monomials with nonzero rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffOp {
    sig: Signature,
    terms: BTreeMap<Exponent, Rat>,
}

/// The Newton diagram of an operator: the exponents carrying a nonzero coefficient.
pub type NewtonDiagram = std::collections::BTreeSet<Exponent>;

impl DiffOp {
    pub fn zero(sig: Signature) -> Self {
        DiffOp { sig, terms: BTreeMap::new() }
    }

    pub fn one(sig: Signature) -> Self {
        Self::monomial(sig, Exponent::zero(sig), Rat::one())
    }

    pub fn constant(sig: Signature, c: Rat) -> Self {
        Self::monomial(sig, Exponent::zero(sig), c)
    }

    pub fn monomial(sig: Signature, e: Exponent, c: Rat) -> Self {
        assert_eq!(e.0.len(), sig.len(), "exponent length does not match signature");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        DiffOp { sig, terms }
    }

    /// The single variable at exponent index `idx`.
    pub fn var(sig: Signature, idx: usize) -> Self {
        Self::monomial(sig, Exponent::unit(sig, idx), Rat::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Rat)>>(sig: Signature, it: I) -> Self {
        let mut op = Self::zero(sig);
        for (e, c) in it {
            op.add_term(e, c);
        }
        op
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn newton_diagram(&self) -> NewtonDiagram {
        self.terms.keys().cloned().collect()
    }

    pub fn add_term(&mut self, e: Exponent, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn remove_term(&mut self, e: &Exponent) -> Option<Rat> {
        self.terms.remove(e)
    }

    pub fn scale(&self, c: &Rat) -> DiffOp {
        if c.is_zero() {
            return DiffOp::zero(self.sig);
        }
        DiffOp {
            sig: self.sig,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Retain the terms whose exponents satisfy `keep`.
    pub fn filter<F: Fn(&Exponent) -> bool>(&self, keep: F) -> DiffOp {
        DiffOp {
            sig: self.sig,
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn has_z(&self) -> bool {
        self.terms.keys().any(|e| e.k() > 0)
    }

    /// Total degree in the derivations `∂x, ∂t` (for elements of `D_{n+p}`).
    pub fn derivation_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.derivation_degree(self.sig)).max()
    }

    /// The degree `d` when every term satisfies `k + |β| + |ν| = d`.
    pub fn hom_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.hom_degree(self.sig));
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.hom_degree().is_some()
    }

    /// Largest power of `z` dividing every term.
    pub fn z_valuation(&self) -> u32 {
        self.terms.keys().map(|e| e.k()).min().unwrap_or(0)
    }

    /// Multiply by `z^k`.
    pub fn mul_z_pow(&self, k: u32) -> DiffOp {
        if k == 0 {
            return self.clone();
        }
        DiffOp {
            sig: self.sig,
            terms: self.terms.iter().map(|(e, c)| (e.with_k(e.k() + k), c.clone())).collect(),
        }
    }

    /// Divide by `z^k`; `k` must not exceed [`DiffOp::z_valuation`].
    pub fn div_z_pow(&self, k: u32) -> DiffOp {
        assert!(k <= self.z_valuation() || self.is_zero());
        DiffOp {
            sig: self.sig,
            terms: self.terms.iter().map(|(e, c)| (e.with_k(e.k() - k), c.clone())).collect(),
        }
    }

    pub fn checked_add(&self, other: &DiffOp) -> Result<DiffOp> {
        self.check_sig(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &DiffOp) -> Result<DiffOp> {
        self.check_sig(other)?;
        Ok(self * other)
    }

    fn check_sig(&self, other: &DiffOp) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch(self.sig, other.sig));
        }
        Ok(())
    }

    /// Left product of a normally ordered monomial with this operator.
    pub fn mul_monomial_left(&self, e: &Exponent, c: &Rat) -> DiffOp {
        let mut out = DiffOp::zero(self.sig);
        for (f, d) in &self.terms {
            for (g, w) in monomial_product(self.sig, e, f) {
                out.add_term(g, Rat::from_integer(w) * c * d);
            }
        }
        out
    }
}

/// Product of two normally ordered monomials.
///
/// Variables with different indices commute, so the product factors over
/// coordinates. For one coordinate,
/// `∂^b x^c = Σ_i C(b,i) c(c-1)…(c-i+1) x^(c-i) ∂^(b-i) z^i`, which is the
/// closed form of rewriting `∂·x -> x·∂ + z` until no derivation stands left
/// of its coordinate.
pub fn monomial_product(sig: Signature, a: &Exponent, b: &Exponent) -> Vec<(Exponent, BigInt)> {
    let m = sig.m();
    let mut out: Vec<(Exponent, BigInt)> = vec![(a.add(b), BigInt::one())];
    for v in 0..m {
        let der = a.0[m + v];
        let coord = b.0[v];
        let top = der.min(coord);
        if top == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * (top as usize + 1));
        let mut w = BigInt::one();
        for i in 0..=top {
            if i > 0 {
                // C(der,i)·falling(coord,i) from the (i-1) value.
                w = w * BigInt::from(der - i + 1) * BigInt::from(coord - i + 1) / BigInt::from(i);
            }
            for (e, c) in &out {
                let mut f = e.clone();
                f.0[v] -= i;
                f.0[m + v] -= i;
                f.0[2 * m] += i;
                next.push((f, c * &w));
            }
        }
        out = next;
    }
    out
}

impl<'a> Add<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp { sig: self.sig, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
}

impl<'a> Mul<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        let mut acc: BTreeMap<Exponent, Rat> = BTreeMap::new();
        for (e, c) in &self.terms {
            for (f, d) in &rhs.terms {
                let cd = c * d;
                for (g, w) in monomial_product(self.sig, e, f) {
                    *acc.entry(g).or_insert_with(Rat::zero) += &cd * Rat::from_integer(w);
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        DiffOp { sig: self.sig, terms: acc }
    }
}

/// Product in `D_{n+p}<z>`; rejects operands of different signatures.
pub fn multiply(p: &DiffOp, q: &DiffOp) -> Result<DiffOp> {
    p.checked_mul(q)
}

/// `h(P) = Σ c x^α t^μ ∂^(β,ν) z^(d - |β| - |ν|)` with `d = deg P`.
pub fn homogenize(p: &DiffOp) -> Result<DiffOp> {
    if p.has_z() {
        return Err(Error::ContainsZ);
    }
    let sig = p.sig;
    let Some(d) = p.derivation_degree() else {
        return Ok(DiffOp::zero(sig));
    };
    Ok(DiffOp {
        sig,
        terms: p.terms.iter().map(|(e, c)| (e.with_k(d - e.derivation_degree(sig)), c.clone())).collect(),
    })
}

/// The specialization `z ↦ 1`.
pub fn dehomogenize(p: &DiffOp) -> DiffOp {
    DiffOp::from_terms(p.sig, p.terms.iter().map(|(e, c)| (e.with_k(0), c.clone())))
}

/// A linear function on exponent vectors (the `z` component never contributes).
pub trait Weight {
    fn eval(&self, sig: Signature, e: &Exponent) -> Rat;
}

/// `ord^L(P) = max L(DN(P))`; `None` stands for `-∞` (the zero operator).
pub fn l_order<W: Weight + ?Sized>(p: &DiffOp, l: &W) -> Option<Rat> {
    p.terms.keys().map(|e| l.eval(p.sig, e)).max()
}

/// The principal `L`-symbol: the terms on which `L` attains `ord^L(P)`.
pub fn l_symbol<W: Weight + ?Sized>(p: &DiffOp, l: &W) -> Result<DiffOp> {
    let top = l_order(p, l).ok_or(Error::ZeroOperator("l_symbol"))?;
    Ok(p.filter(|e| l.eval(p.sig, e) == top))
}

impl fmt::Display for DiffOp {
    /// Canonical text form, re-parseable by [`crate::syntax::parse_operator`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.sig.variable_names();
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &a) in e.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], a)),
                }
            }
            let coef = if abs.is_integer() { abs.numer().to_string() } else { format!("{}/{}", abs.numer(), abs.denom()) };
            if factors.is_empty() {
                write!(f, "{coef}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", coef, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::VForm;
    use crate::syntax::parse_operator;

    fn sig(n: usize, p: usize) -> Signature {
        Signature::new(n, p).unwrap()
    }

    fn op(s: Signature, text: &str) -> DiffOp {
        parse_operator(s, text).unwrap()
    }

    #[test]
    fn commutation_relation() {
        let s = sig(1, 1);
        assert_eq!(&op(s, "dx1") * &op(s, "x1"), op(s, "x1*dx1 + z"));
        assert_eq!(&op(s, "x1") * &op(s, "dx1"), op(s, "x1*dx1"));
        assert_eq!(&op(s, "dt1") * &op(s, "t1^2"), op(s, "t1^2*dt1 + 2*t1*z"));
    }

    #[test]
    fn multiply_rejects_signature_mismatch() {
        let a = DiffOp::one(sig(1, 1));
        let b = DiffOp::one(sig(1, 2));
        assert!(matches!(multiply(&a, &b), Err(Error::SignatureMismatch(..))));
    }

    #[test]
    fn homogenize_examples() {
        let s = sig(1, 1);
        assert_eq!(homogenize(&op(s, "dx1^2 + x1*dx1 + 1")).unwrap(), op(s, "dx1^2 + x1*dx1*z + z^2"));
        assert_eq!(homogenize(&op(s, "t1 - x1")).unwrap(), op(s, "t1 - x1"));
        assert_eq!(homogenize(&op(s, "dx1 + 2*x1*dt1")).unwrap(), op(s, "dx1 + 2*x1*dt1"));
        assert_eq!(homogenize(&op(s, "z")), Err(Error::ContainsZ));
    }

    #[test]
    fn dehomogenize_examples() {
        let s = sig(1, 1);
        assert_eq!(dehomogenize(&op(s, "dx1^2 + x1*dx1*z + z^2")), op(s, "dx1^2 + x1*dx1 + 1"));
        assert_eq!(dehomogenize(&op(s, "z")), DiffOp::one(s));
        assert!(dehomogenize(&DiffOp::zero(s)).is_zero());
    }

    #[test]
    fn l_order_examples() {
        let s = sig(1, 1);
        let v1 = VForm::basis(1, 0);
        assert_eq!(l_order(&op(s, "t1"), &v1), Some(Rat::from_integer((-1).into())));
        assert_eq!(l_order(&op(s, "dt1"), &v1), Some(Rat::one()));
        assert_eq!(l_order(&op(s, "x1*dx1 + t1*dt1"), &v1), Some(Rat::zero()));
        assert_eq!(l_order(&DiffOp::zero(s), &v1), None);
    }

    #[test]
    fn l_symbol_examples() {
        let s = sig(1, 1);
        let v1 = VForm::basis(1, 0);
        assert_eq!(l_symbol(&op(s, "dt1 + t1"), &v1).unwrap(), op(s, "dt1"));
        assert_eq!(l_symbol(&op(s, "x1*dx1"), &v1).unwrap(), op(s, "x1*dx1"));
        let s2 = sig(1, 2);
        let l = VForm::from_ints(&[1, 2]);
        assert_eq!(l_symbol(&op(s2, "dt1*z^2 + dt2*z^2"), &l).unwrap(), op(s2, "dt2*z^2"));
        assert!(l_symbol(&DiffOp::zero(s), &v1).is_err());
    }

    #[test]
    fn zero_signature_rejected() {
        assert!(Signature::new(0, 0).is_err());
    }
}
