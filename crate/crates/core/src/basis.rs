//! Standard bases of left ideals of `D<z>`: completion, minimal reduction,
//! and saturation by `z`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::One;

use crate::division::{divide_marked, DivisionResult};
use crate::error::{Error, Result};
use crate::order::{LinearForm, OrderSpec, TermOrder};
use crate::weyl::{DiffOp, Exponent, Signature};
use crate::Rat;

/// Step and pair limits for completions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Term steps allowed in a single division.
    pub division_steps: usize,
    /// Critical pairs processed per completion.
    pub pairs: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { division_steps: 200_000, pairs: 20_000 }
    }
}

/// A standard basis candidate whose elements carry their leading exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedBasis {
    order: TermOrder,
    elements: Vec<(DiffOp, Exponent)>,
    homogeneous: bool,
}

impl MarkedBasis {
    /// Mark each element by its leading exponent under `order`.
    pub fn new(elements: Vec<DiffOp>, order: TermOrder) -> Result<Self> {
        let mut marked = Vec::with_capacity(elements.len());
        for q in elements {
            if q.signature() != order.signature() {
                return Err(Error::SignatureMismatch(order.signature(), q.signature()));
            }
            let e = order.leading_exponent(&q)?;
            marked.push((q, e));
        }
        let homogeneous = marked.iter().all(|(q, _)| q.is_homogeneous());
        Ok(MarkedBasis { order, elements: marked, homogeneous })
    }

    pub fn order(&self) -> &TermOrder {
        &self.order
    }

    pub fn signature(&self) -> Signature {
        self.order.signature()
    }

    pub fn elements(&self) -> &[(DiffOp, Exponent)] {
        &self.elements
    }

    pub fn ops(&self) -> impl Iterator<Item = &DiffOp> {
        self.elements.iter().map(|(q, _)| q)
    }

    pub fn marks(&self) -> impl Iterator<Item = &Exponent> {
        self.elements.iter().map(|(_, e)| e)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn staircase(&self) -> Staircase {
        Staircase::from_corners(self.marks().cloned())
    }

    /// The same elements and marks, certified for another order.
    ///
    /// Only meaningful after [`lemma_utile_check`] returned true.
    pub fn relabel(&self, order: TermOrder) -> MarkedBasis {
        MarkedBasis { order, elements: self.elements.clone(), homogeneous: self.homogeneous }
    }

    /// Same marked elements, ignoring the certifying order and list order.
    pub fn same_marked_elements(&self, other: &MarkedBasis) -> bool {
        fn sorted(b: &MarkedBasis) -> Vec<&(DiffOp, Exponent)> {
            let mut v: Vec<&(DiffOp, Exponent)> = b.elements.iter().collect();
            v.sort_by(|a, b| a.1.cmp(&b.1));
            v
        }
        sorted(self) == sorted(other)
    }

    /// Divide by the elements in list order under the basis order.
    pub fn divide(&self, p: &DiffOp, budget: usize) -> Result<DivisionResult> {
        let divisors: Vec<(&DiffOp, Exponent, Rat)> =
            self.elements.iter().map(|(q, e)| (q, e.clone(), q.coeff(e))).collect();
        divide_marked(p, &divisors, &self.order, budget)
    }
}

/// The monomial ideal `∪ (e_j + ℕ^{2m+1})` spanned by leading exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Staircase {
    corners: Vec<Exponent>,
}

impl Staircase {
    /// Keeps only the minimal corners, sorted canonically.
    pub fn from_corners<I: IntoIterator<Item = Exponent>>(it: I) -> Self {
        let mut all: Vec<Exponent> = it.into_iter().collect();
        all.sort();
        all.dedup();
        let corners = all
            .iter()
            .filter(|e| !all.iter().any(|f| f != *e && f.divides(e)))
            .cloned()
            .collect();
        Staircase { corners }
    }

    pub fn corners(&self) -> &[Exponent] {
        &self.corners
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.corners.iter().any(|c| c.divides(e))
    }
}

/// Audit log of a completion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompletionLog {
    pub pairs_processed: usize,
    pub zero_reductions: usize,
    pub division_steps: usize,
}

/// A completion that ran out of budget, with the basis reached so far.
#[derive(Clone, Debug)]
pub struct Incomplete {
    pub reason: String,
    pub partial: MarkedBasis,
    pub log: CompletionLog,
}

impl fmt::Display for Incomplete {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (partial basis of {} elements)", self.reason, self.partial.len())
    }
}

impl From<Incomplete> for Error {
    fn from(i: Incomplete) -> Self {
        Error::Budget(i.to_string())
    }
}

/// `m_A·A/c_A − m_B·B/c_B`, where the monomials lift both leading exponents
/// to their join.
pub fn s_pair(a: &DiffOp, b: &DiffOp, ord: &TermOrder) -> Result<DiffOp> {
    let (ea, ca) = ord.leading_term(a)?;
    let (eb, cb) = ord.leading_term(b)?;
    Ok(s_pair_marked(a, &ea, &ca, b, &eb, &cb))
}

fn s_pair_marked(a: &DiffOp, ea: &Exponent, ca: &Rat, b: &DiffOp, eb: &Exponent, cb: &Rat) -> DiffOp {
    let j = ea.join(eb);
    let ma = j.checked_sub(ea).expect("join dominates");
    let mb = j.checked_sub(eb).expect("join dominates");
    let left = a.mul_monomial_left(&ma, &(Rat::one() / ca));
    let right = b.mul_monomial_left(&mb, &(Rat::one() / cb));
    &left - &right
}

fn unitary(q: &DiffOp, ord: &TermOrder) -> Result<(DiffOp, Exponent)> {
    let (e, c) = ord.leading_term(q)?;
    Ok((q.scale(&(Rat::one() / c)), e))
}

/// Buchberger completion under `ord`, normal pair selection.
pub fn buchberger(
    generators: &[DiffOp],
    ord: &TermOrder,
    budget: Budget,
) -> std::result::Result<(MarkedBasis, CompletionLog), Incomplete> {
    let mut log = CompletionLog::default();
    let mut basis: Vec<(DiffOp, Exponent)> = Vec::new();
    let mut pairs: Vec<(usize, usize, Exponent)> = Vec::new();

    let snapshot = |basis: &Vec<(DiffOp, Exponent)>| MarkedBasis {
        order: ord.clone(),
        homogeneous: basis.iter().all(|(q, _)| q.is_homogeneous()),
        elements: basis.clone(),
    };

    let push = |basis: &mut Vec<(DiffOp, Exponent)>, pairs: &mut Vec<(usize, usize, Exponent)>, q: DiffOp| {
        let (q, e) = unitary(&q, ord).expect("nonzero");
        let new = basis.len();
        for (i, (_, f)) in basis.iter().enumerate() {
            pairs.push((i, new, f.join(&e)));
        }
        basis.push((q, e));
    };

    for g in generators {
        if g.signature() != ord.signature() {
            return Err(Incomplete {
                reason: format!("generator signature {} does not match the order", g.signature()),
                partial: snapshot(&basis),
                log,
            });
        }
        if !g.is_zero() {
            push(&mut basis, &mut pairs, g.clone());
        }
    }

    while !pairs.is_empty() {
        if log.pairs_processed >= budget.pairs {
            return Err(Incomplete { reason: "pair budget exhausted".into(), partial: snapshot(&basis), log });
        }
        let best = (0..pairs.len())
            .min_by(|&x, &y| ord.cmp(&pairs[x].2, &pairs[y].2).then_with(|| (pairs[x].0, pairs[x].1).cmp(&(pairs[y].0, pairs[y].1))))
            .expect("nonempty");
        let (i, j, _) = pairs.swap_remove(best);
        log.pairs_processed += 1;
        let (a, ea) = &basis[i];
        let (b, eb) = &basis[j];
        let s = s_pair_marked(a, ea, &Rat::one(), b, eb, &Rat::one());
        let divisors: Vec<(&DiffOp, Exponent, Rat)> = basis.iter().map(|(q, e)| (q, e.clone(), Rat::one())).collect();
        let res = divide_marked(&s, &divisors, ord, budget.division_steps).map_err(|e| Incomplete {
            reason: e.to_string(),
            partial: snapshot(&basis),
            log: log.clone(),
        })?;
        log.division_steps += res.steps;
        if res.truncated {
            return Err(Incomplete {
                reason: format!("division budget of {} steps exhausted", budget.division_steps),
                partial: snapshot(&basis),
                log,
            });
        }
        if res.remainder.is_zero() {
            log.zero_reductions += 1;
        } else {
            push(&mut basis, &mut pairs, res.remainder);
        }
    }
    Ok((snapshot(&basis), log))
}

/// The minimal reduced standard basis spanned by a standard basis: corner
/// elements only, unitary, tails outside the staircase, sorted by mark.
pub fn minimal_reduce(basis: &MarkedBasis) -> Result<MarkedBasis> {
    minimal_reduce_with(basis, Budget::default().division_steps)
}

pub fn minimal_reduce_with(basis: &MarkedBasis, steps: usize) -> Result<MarkedBasis> {
    let ord = &basis.order;
    let mut kept: Vec<(DiffOp, Exponent)> = Vec::new();
    for (i, (q, e)) in basis.elements.iter().enumerate() {
        let redundant = basis.elements.iter().enumerate().any(|(j, (_, f))| {
            if i == j {
                return false;
            }
            f.divides(e) && (f != e || j < i)
        });
        if !redundant {
            let c = q.coeff(e);
            kept.push((q.scale(&(Rat::one() / c)), e.clone()));
        }
    }
    let mut reduced = Vec::with_capacity(kept.len());
    {
        let divisors: Vec<(&DiffOp, Exponent, Rat)> = kept.iter().map(|(q, e)| (q, e.clone(), Rat::one())).collect();
        for (q, e) in &kept {
            let tail = q.filter(|f| f != e);
            let res = divide_marked(&tail, &divisors, ord, steps)?;
            if res.truncated {
                return Err(Error::Budget("tail reduction did not finish".into()));
            }
            let mut out = res.remainder;
            out.add_term(e.clone(), Rat::one());
            reduced.push((out, e.clone()));
        }
    }
    reduced.sort_by(|(_, a), (_, b)| ord.cmp(a, b));
    let homogeneous = reduced.iter().all(|(q, _)| q.is_homogeneous());
    Ok(MarkedBasis { order: ord.clone(), elements: reduced, homogeneous })
}

/// Completion followed by minimal reduction.
pub fn reduced_basis(generators: &[DiffOp], ord: &TermOrder, budget: Budget) -> Result<MarkedBasis> {
    let (b, _) = buchberger(generators, ord, budget)?;
    minimal_reduce_with(&b, budget.division_steps)
}

/// Standard basis of `(J : z^∞)` for the ideal `J` spanned by a homogeneous basis.
///
/// Saturation runs under the zero-form homogenized order, in which the
/// leading term of a homogeneous element has the smallest `z`-power of all
/// its terms; there a reduced basis with no element divisible by `z` spans a
/// saturated ideal. The result is re-completed under the input basis order.
pub fn z_saturate(basis: &MarkedBasis, budget: Budget) -> Result<MarkedBasis> {
    if !basis.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    let sig = basis.signature();
    let zero_ord = OrderSpec::HomForm(LinearForm::zero(sig.m())).compile(sig)?;
    let max_rounds = sig.len();
    let mut current = reduced_basis(&basis.ops().cloned().collect::<Vec<_>>(), &zero_ord, budget)?;
    let mut rounds = 0;
    while current.ops().any(|q| q.z_valuation() > 0) {
        if rounds == max_rounds {
            return Err(Error::Budget(format!("z-saturation not stable after {max_rounds} rounds")));
        }
        let stripped: Vec<DiffOp> = current.ops().map(|q| q.div_z_pow(q.z_valuation())).collect();
        current = reduced_basis(&stripped, &zero_ord, budget)?;
        rounds += 1;
    }
    if basis.order.spec() == zero_ord.spec() {
        return Ok(current);
    }
    reduced_basis(&current.ops().cloned().collect::<Vec<_>>(), &basis.order, budget)
}

/// Whether every element's leading exponent under `other` equals its mark.
pub fn lemma_utile_check(basis: &MarkedBasis, other: &TermOrder) -> bool {
    basis.elements.iter().all(|(q, e)| other.leading_exponent(q).map(|f| &f == e).unwrap_or(false))
}

/// Every S-pair of the basis has remainder zero.
pub fn is_standard(basis: &MarkedBasis, steps: usize) -> Result<bool> {
    let els = basis.elements();
    for i in 0..els.len() {
        for j in i + 1..els.len() {
            let (a, ea) = &els[i];
            let (b, eb) = &els[j];
            let s = s_pair_marked(a, ea, &a.coeff(ea), b, eb, &b.coeff(eb));
            let r = basis.divide(&s, steps)?;
            if r.truncated {
                return Err(Error::Budget("division budget exhausted in S-pair check".into()));
            }
            if !r.remainder.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Remainder of the division of `P` by the basis; zero iff `P` is in the
/// ideal when the basis is standard.
pub fn normal_form(p: &DiffOp, basis: &MarkedBasis, budget: usize) -> Result<DiffOp> {
    let r = basis.divide(p, budget)?;
    if r.truncated {
        return Err(Error::Budget(format!("normal form did not finish in {budget} steps")));
    }
    Ok(r.remainder)
}

/// Deterministic comparison of marked bases by their marks, then elements.
pub fn cmp_marks(a: &MarkedBasis, b: &MarkedBasis) -> Ordering {
    a.marks().cmp(b.marks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::VForm;
    use crate::syntax::parse_operator;

    fn d1() -> (Signature, TermOrder) {
        let sig = Signature::new(1, 0).unwrap();
        let ord = OrderSpec::HomForm(LinearForm::zero(1)).compile(sig).unwrap();
        (sig, ord)
    }

    fn op(sig: Signature, s: &str) -> DiffOp {
        parse_operator(sig, s).unwrap()
    }

    #[test]
    fn s_pair_examples() {
        let (sig, ord) = d1();
        assert_eq!(s_pair(&op(sig, "x1"), &op(sig, "dx1"), &ord).unwrap(), op(sig, "z"));
        let a = op(sig, "x1*dx1 + 3*z");
        assert!(s_pair(&a, &a, &ord).unwrap().is_zero());

        let sig2 = Signature::new(2, 2).unwrap();
        let ord2 = OrderSpec::hom_v(&VForm::from_ints(&[1, 1]), sig2).compile(sig2).unwrap();
        let a = op(sig2, "t1 - x1");
        let b = op(sig2, "t2 - x2");
        let s = s_pair(&a, &b, &ord2).unwrap();
        let basis = MarkedBasis::new(vec![a, b], ord2).unwrap();
        assert!(normal_form(&s, &basis, 1000).unwrap().is_zero());
    }

    #[test]
    fn completion_of_x_and_dx() {
        let (sig, ord) = d1();
        let b = reduced_basis(&[op(sig, "x1"), op(sig, "dx1")], &ord, Budget::default()).unwrap();
        let ops: Vec<DiffOp> = b.ops().cloned().collect();
        assert_eq!(ops.len(), 3);
        for g in ["x1", "dx1", "z"] {
            assert!(ops.contains(&op(sig, g)), "{g} missing");
        }
        assert!(normal_form(&op(sig, "z"), &b, 100).unwrap().is_zero());
        assert_eq!(normal_form(&DiffOp::one(sig), &b, 100).unwrap(), DiffOp::one(sig));
    }

    #[test]
    fn single_generator_is_normalized() {
        let (sig, ord) = d1();
        let b = reduced_basis(&[op(sig, "2*x1*dx1 + 4*z")], &ord, Budget::default()).unwrap();
        assert_eq!(b.ops().cloned().collect::<Vec<_>>(), vec![op(sig, "x1*dx1 + 2*z")]);
    }

    #[test]
    fn minimal_reduce_drops_redundant() {
        let (sig, ord) = d1();
        let b = MarkedBasis::new(vec![op(sig, "x1"), op(sig, "dx1"), op(sig, "z"), op(sig, "x1*z")], ord.clone()).unwrap();
        let m = minimal_reduce(&b).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(minimal_reduce(&m).unwrap(), m);
        let scaled = MarkedBasis::new(vec![op(sig, "3*x1"), op(sig, "-dx1"), op(sig, "2*z")], ord).unwrap();
        let ms = minimal_reduce(&scaled).unwrap();
        assert_eq!(ms.ops().cloned().collect::<Vec<_>>(), m.ops().cloned().collect::<Vec<_>>());
    }

    #[test]
    fn saturation_strips_z() {
        let sig = Signature::new(1, 1).unwrap();
        let ord = OrderSpec::hom_v(&VForm::basis(1, 0), sig).compile(sig).unwrap();
        let b = MarkedBasis::new(vec![op(sig, "z*x1 - z*t1")], ord.clone()).unwrap();
        let s = z_saturate(&b, Budget::default()).unwrap();
        assert_eq!(s.ops().cloned().collect::<Vec<_>>(), vec![op(sig, "x1 - t1")]);
        let stable = minimal_reduce(&MarkedBasis::new(vec![op(sig, "x1 - t1"), op(sig, "dx1 + dt1")], ord).unwrap()).unwrap();
        let again = z_saturate(&stable, Budget::default()).unwrap();
        assert!(again.same_marked_elements(&stable));
        let nonhom = MarkedBasis::new(vec![op(sig, "dx1 + 1")], stable.order().clone()).unwrap();
        assert!(z_saturate(&nonhom, Budget::default()).is_err());
    }

    #[test]
    fn lemma_utile_single_monomial() {
        let sig = Signature::new(1, 2).unwrap();
        let a = OrderSpec::hom_v(&VForm::from_ints(&[1, 0]), sig).compile(sig).unwrap();
        let b = OrderSpec::hom_v(&VForm::from_ints(&[0, 1]), sig).compile(sig).unwrap();
        let basis = MarkedBasis::new(vec![op(sig, "t1*dx1")], a).unwrap();
        assert!(lemma_utile_check(&basis, &b));
        let basis = MarkedBasis::new(vec![op(sig, "t1 - t2")], basis.order().clone()).unwrap();
        assert!(!lemma_utile_check(&basis, &b));
    }

    #[test]
    fn staircase_membership() {
        let sig = Signature::new(1, 0).unwrap();
        let e = |s: &str| op(sig, s).terms().next().unwrap().0.clone();
        let st = Staircase::from_corners(vec![e("x1"), e("x1*z"), e("dx1")]);
        assert_eq!(st.corners().len(), 2);
        assert!(st.contains(&e("x1^2*dx1")));
        assert!(!st.contains(&e("z^3")));
    }
}
