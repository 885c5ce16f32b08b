//! Division by a list of operators with the staircase partition
//! `Δ_1, …, Δ_r, Δ̄` of the exponent space.
//!
//! `Δ_j` is the set of exponents divisible by the `j`-th leading exponent and
//! by none of the earlier ones, so divisor order matters. The running
//! expression is consumed from its greatest term down; on termination
//! `P = Σ q_j Q_j + R` with `DN(q_j) + e_j ⊆ Δ_j` and `DN(R) ⊆ Δ̄`.

use crate::error::{Error, Result};
use crate::order::TermOrder;
use crate::weyl::{DiffOp, Exponent};
use crate::Rat;

/// Which cell of the partition an exponent falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Delta(usize),
    Complement,
}

/// The partition defined by an ordered list of leading exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    pub leads: Vec<Exponent>,
}

impl PartitionSpec {
    pub fn region(&self, e: &Exponent) -> Region {
        self.leads.iter().position(|l| l.divides(e)).map(Region::Delta).unwrap_or(Region::Complement)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionResult {
    pub quotients: Vec<DiffOp>,
    pub remainder: DiffOp,
    /// Unprocessed part of the running expression; zero unless `truncated`.
    pub tail: DiffOp,
    pub truncated: bool,
    pub steps: usize,
    pub partition: PartitionSpec,
}

impl DivisionResult {
    /// Check `P = Σ q_j Q_j + R + E` and the region constraints on every term.
    pub fn verify(&self, p: &DiffOp, divisors: &[DiffOp]) -> Result<()> {
        let mut acc = &self.remainder + &self.tail;
        for (q, d) in self.quotients.iter().zip(divisors) {
            acc = &acc + &(q * d);
        }
        if &acc != p {
            return Err(Error::Invariant("division does not reconstruct the dividend".into()));
        }
        for (j, q) in self.quotients.iter().enumerate() {
            for (e, _) in q.terms() {
                if self.partition.region(&e.add(&self.partition.leads[j])) != Region::Delta(j) {
                    return Err(Error::Invariant(format!("quotient {j} leaves its region")));
                }
            }
        }
        if self.remainder.terms().any(|(e, _)| self.partition.region(e) != Region::Complement) {
            return Err(Error::Invariant("remainder term inside the staircase".into()));
        }
        Ok(())
    }
}

/// Divide `P` by `divisors` under `ord`, with at most `budget` term steps.
pub fn divide(p: &DiffOp, divisors: &[DiffOp], ord: &TermOrder, budget: usize) -> Result<DivisionResult> {
    let mut marked = Vec::with_capacity(divisors.len());
    for d in divisors {
        if d.signature() != p.signature() {
            return Err(Error::SignatureMismatch(p.signature(), d.signature()));
        }
        let (e, c) = ord.leading_term(d).map_err(|_| Error::ZeroOperator("divisor"))?;
        marked.push((d, e, c));
    }
    divide_marked(p, &marked, ord, budget)
}

/// Division where each divisor comes with its marked leading exponent and
/// leading coefficient. The marks must be the `ord`-leading exponents.
pub(crate) fn divide_marked(
    p: &DiffOp,
    divisors: &[(&DiffOp, Exponent, Rat)],
    ord: &TermOrder,
    budget: usize,
) -> Result<DivisionResult> {
    if budget == 0 {
        return Err(Error::Precondition("division budget must be positive".into()));
    }
    let sig = p.signature();
    let partition = PartitionSpec { leads: divisors.iter().map(|(_, e, _)| e.clone()).collect() };
    let mut quotients = vec![DiffOp::zero(sig); divisors.len()];
    let mut remainder = DiffOp::zero(sig);
    let mut running = p.clone();
    let mut steps = 0;
    while !running.is_zero() {
        if steps >= budget {
            return Ok(DivisionResult { quotients, remainder, tail: running, truncated: true, steps, partition });
        }
        steps += 1;
        let (m, c) = ord.leading_term(&running)?;
        match partition.region(&m) {
            Region::Delta(j) => {
                let (q, e, lc) = &divisors[j];
                let shift = m.checked_sub(e).expect("region membership implies divisibility");
                let coef = &c / lc;
                quotients[j].add_term(shift.clone(), coef.clone());
                let sub = q.mul_monomial_left(&shift, &coef);
                debug_assert_eq!(ord.leading_exponent(&sub).ok(), Some(m.clone()));
                running = &running - &sub;
                // Exact cancellation of the leading term.
                debug_assert!(running.coeff(&m) == Rat::from_integer(0.into()));
            }
            Region::Complement => {
                running.remove_term(&m);
                remainder.add_term(m, c);
            }
        }
    }
    Ok(DivisionResult { quotients, remainder, tail: running, truncated: false, steps, partition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{OrderSpec, VForm};
    use crate::syntax::parse_operator;
    use crate::weyl::Signature;

    fn setup() -> (Signature, TermOrder) {
        let sig = Signature::new(1, 1).unwrap();
        let ord = OrderSpec::hom_v(&VForm::basis(1, 0), sig).compile(sig).unwrap();
        (sig, ord)
    }

    #[test]
    fn leibniz_quotient() {
        let (sig, ord) = setup();
        let p = parse_operator(sig, "x1*dx1 + z").unwrap();
        let d = vec![parse_operator(sig, "x1").unwrap()];
        let r = divide(&p, &d, &ord, 100).unwrap();
        assert_eq!(r.quotients[0], parse_operator(sig, "dx1").unwrap());
        assert!(r.remainder.is_zero());
        r.verify(&p, &d).unwrap();
    }

    #[test]
    fn nothing_to_reduce() {
        let (sig, ord) = setup();
        let p = parse_operator(sig, "z^2").unwrap();
        let d = vec![parse_operator(sig, "x1").unwrap()];
        let r = divide(&p, &d, &ord, 100).unwrap();
        assert!(r.quotients[0].is_zero());
        assert_eq!(r.remainder, p);
    }

    #[test]
    fn commuting_quotient() {
        let (sig, ord) = setup();
        let p = parse_operator(sig, "x1^2*dx1*z").unwrap();
        let d = vec![parse_operator(sig, "x1*dx1").unwrap()];
        let r = divide(&p, &d, &ord, 100).unwrap();
        assert_eq!(r.quotients[0], parse_operator(sig, "x1*z").unwrap());
        assert!(r.remainder.is_zero());
    }

    #[test]
    fn zero_divisor_rejected() {
        let (sig, ord) = setup();
        let p = parse_operator(sig, "x1").unwrap();
        assert!(matches!(divide(&p, &[DiffOp::zero(sig)], &ord, 10), Err(Error::ZeroOperator(_))));
        assert!(divide(&p, &[p.clone()], &ord, 0).is_err());
    }

    #[test]
    fn truncation_keeps_identity() {
        // Dividing 1 by (1 - x1) for a form that makes 1 the leading term never ends.
        let (sig, ord) = setup();
        let p = DiffOp::one(sig);
        let d = vec![parse_operator(sig, "1 - x1").unwrap()];
        let r = divide(&p, &d, &ord, 25).unwrap();
        assert!(r.truncated);
        assert_eq!(r.steps, 25);
        assert!(!r.tail.is_zero());
        r.verify(&p, &d).unwrap();
    }

    #[test]
    fn divisor_order_is_significant() {
        let (sig, ord) = setup();
        let a = parse_operator(sig, "x1").unwrap();
        let b = parse_operator(sig, "x1 + t1").unwrap();
        let p = parse_operator(sig, "x1^2").unwrap();
        let r1 = divide(&p, &[a.clone(), b.clone()], &ord, 100).unwrap();
        let r2 = divide(&p, &[b.clone(), a.clone()], &ord, 100).unwrap();
        assert_eq!(r1.quotients[0], a);
        assert!(r1.quotients[1].is_zero());
        assert!(r2.quotients[1].is_zero());
        assert_eq!(r2.remainder, parse_operator(sig, "t1^2").unwrap());
        r2.verify(&p, &[b, a]).unwrap();
    }
}
