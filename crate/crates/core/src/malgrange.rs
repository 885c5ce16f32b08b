//! Malgrange's ideal `I ⊂ D_{n+p}` of `f^s` for a polynomial map
//! `f = (f_1, …, f_p)`, with the formal action used to check it.

use num_traits::{One, Zero};

use crate::basis::Budget;
use crate::error::{Error, Result};
use crate::oracle::Grading;
use crate::poly::Poly;
use crate::vfilt::IdealPresentation;
use crate::weyl::{DiffOp, Exponent, Signature};
use crate::Rat;

/// `p` nonzero polynomials in `x_1 … x_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialMap {
    sig: Signature,
    f: Vec<Poly>,
}

impl PolynomialMap {
    /// Each `f_j` is given as an operator with only `x`-exponents.
    pub fn new(sig: Signature, f: &[DiffOp]) -> Result<Self> {
        if f.len() != sig.p {
            return Err(Error::Precondition(format!("expected {} polynomials, got {}", sig.p, f.len())));
        }
        let mut polys = Vec::with_capacity(f.len());
        for (j, fj) in f.iter().enumerate() {
            if fj.signature() != sig {
                return Err(Error::SignatureMismatch(sig, fj.signature()));
            }
            if fj.is_zero() {
                return Err(Error::ZeroOperator("f_j"));
            }
            let mut p = Poly::zero(sig.n);
            for (e, c) in fj.terms() {
                if e.0[sig.n..].iter().any(|&a| a != 0) {
                    return Err(Error::Precondition(format!("f{} is not a polynomial in x", j + 1)));
                }
                p.add_term(e.0[..sig.n].to_vec(), c.clone());
            }
            polys.push(p);
        }
        Ok(PolynomialMap { sig, f: polys })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn polys(&self) -> &[Poly] {
        &self.f
    }

    fn to_op(&self, p: &Poly) -> DiffOp {
        DiffOp::from_terms(
            self.sig,
            p.terms().map(|(a, c)| {
                let mut e = Exponent::zero(self.sig);
                e.0[..self.sig.n].copy_from_slice(a);
                (e, c.clone())
            }),
        )
    }

    /// Positive integer weights on `x` for which every `f_j` is
    /// quasi-homogeneous, searched in `{1,…,4}^n`, as a grading of `D<z>`:
    /// `x_i ↦ w_i`, `t_j ↦ deg f_j`, derivations negated, `z ↦ 0`.
    pub fn grading(&self) -> Option<Grading> {
        let n = self.sig.n;
        let mut w = vec![1i64; n];
        loop {
            let degs: Option<Vec<i64>> = self.f.iter().map(|p| quasi_degree(p, &w)).collect();
            if let Some(degs) = degs {
                let sig = self.sig;
                let mut g = vec![0i64; sig.len()];
                for i in 0..n {
                    g[sig.x(i)] = w[i];
                    g[sig.dx(i)] = -w[i];
                }
                for (j, d) in degs.iter().enumerate() {
                    g[sig.t(j)] = *d;
                    g[sig.dt(j)] = -*d;
                }
                return Some(Grading::new(g));
            }
            let mut i = 0;
            loop {
                if i == n {
                    return None;
                }
                w[i] += 1;
                if w[i] <= 4 {
                    break;
                }
                w[i] = 1;
                i += 1;
            }
        }
    }
}

fn quasi_degree(p: &Poly, w: &[i64]) -> Option<i64> {
    let mut d = None;
    for (e, _) in p.terms() {
        let v: i64 = e.iter().zip(w).map(|(a, b)| *a as i64 * b).sum();
        match d {
            None => d = Some(v),
            Some(x) if x != v => return None,
            _ => {}
        }
    }
    d
}

/// `t_j − f_j` for every `j`, then `∂x_i + Σ_j (∂f_j/∂x_i) ∂t_j` for every `i`.
pub fn annihilator_generators(f: &PolynomialMap) -> Vec<DiffOp> {
    let sig = f.sig;
    let mut out = Vec::with_capacity(sig.m());
    for (j, fj) in f.f.iter().enumerate() {
        out.push(&DiffOp::var(sig, sig.t(j)) - &f.to_op(fj));
    }
    for i in 0..sig.n {
        let mut g = DiffOp::var(sig, sig.dx(i));
        for (j, fj) in f.f.iter().enumerate() {
            let d = f.to_op(&fj.derivative(i));
            g = &g + &(&d * &DiffOp::var(sig, sig.dt(j)));
        }
        out.push(g);
    }
    out
}

/// `N(x, s) · Π f_j^{s_j − c_j}`.
#[derive(Clone, Debug)]
struct FsElement {
    num: Poly,
    c: Vec<i64>,
}

struct Action<'a> {
    f: &'a PolynomialMap,
    /// `f_j` lifted to the ring `ℚ[x, s]`.
    lifted: Vec<Poly>,
}

impl<'a> Action<'a> {
    fn new(f: &'a PolynomialMap) -> Self {
        let nv = f.sig.n + f.sig.p;
        Action { f, lifted: f.f.iter().map(|p| p.extend(nv)).collect() }
    }

    fn nv(&self) -> usize {
        self.f.sig.n + self.f.sig.p
    }

    fn s(&self, j: usize) -> usize {
        self.f.sig.n + j
    }

    fn apply_var(&self, v: usize, el: FsElement) -> FsElement {
        let sig = self.f.sig;
        let nv = self.nv();
        let FsElement { num, mut c } = el;
        if v < sig.n {
            FsElement { num: num.mul(&Poly::var(nv, v)), c }
        } else if v < sig.m() {
            let j = v - sig.n;
            c[j] -= 1;
            FsElement { num: num.shift(self.s(j), 1), c }
        } else if v < sig.m() + sig.n {
            let i = v - sig.m();
            let all = self.lifted.iter().fold(Poly::one(nv), |acc, p| acc.mul(p));
            let mut out = num.derivative(i).mul(&all);
            for j in 0..sig.p {
                let others = (0..sig.p).filter(|&k| k != j).fold(Poly::one(nv), |acc, k| acc.mul(&self.lifted[k]));
                let coef = Poly::var(nv, self.s(j)).add(&Poly::constant(nv, Rat::from_integer((-c[j]).into())));
                out = out.add(&num.mul(&coef).mul(&self.lifted[j].derivative(i)).mul(&others));
            }
            for cj in c.iter_mut() {
                *cj += 1;
            }
            FsElement { num: out, c }
        } else {
            let j = v - sig.m() - sig.n;
            c[j] += 1;
            let minus_s = Poly::var(nv, self.s(j)).scale(&-Rat::one());
            FsElement { num: minus_s.mul(&num.shift(self.s(j), -1)), c }
        }
    }

    fn apply_monomial(&self, e: &Exponent) -> FsElement {
        let sig = self.f.sig;
        let mut el = FsElement { num: Poly::one(self.nv()), c: vec![0; sig.p] };
        // Rightmost factors act first: ∂t, then ∂x, then t, then x.
        for block in [(sig.m() + sig.n)..(2 * sig.m()), sig.m()..(sig.m() + sig.n), sig.n..sig.m(), 0..sig.n] {
            for v in block {
                for _ in 0..e.0[v] {
                    el = self.apply_var(v, el);
                }
            }
        }
        el
    }
}

/// Whether `P · f^s = 0` as a formal identity in `x` and `s`.
pub fn annihilates(p: &DiffOp, f: &PolynomialMap) -> Result<bool> {
    if p.signature() != f.sig {
        return Err(Error::SignatureMismatch(f.sig, p.signature()));
    }
    if p.has_z() {
        return Err(Error::ContainsZ);
    }
    let act = Action::new(f);
    let parts: Vec<(FsElement, Rat)> = p.terms().map(|(e, c)| (act.apply_monomial(e), c.clone())).collect();
    let sig = f.sig;
    let cmax: Vec<i64> = (0..sig.p).map(|j| parts.iter().map(|(el, _)| el.c[j]).max().unwrap_or(0)).collect();
    let mut total = Poly::zero(act.nv());
    for (el, c) in parts {
        let mut num = el.num.scale(&c);
        for j in 0..sig.p {
            num = num.mul(&act.lifted[j].pow((cmax[j] - el.c[j]) as u32));
        }
        total = total.add(&num);
    }
    Ok(total.is_zero())
}

/// Every generator annihilates `f^s`.
pub fn check_generators(f: &PolynomialMap, gens: &[DiffOp]) -> Result<()> {
    for g in gens {
        if !annihilates(g, f)? {
            return Err(Error::Invariant(format!("{g} does not annihilate f^s")));
        }
    }
    Ok(())
}

impl PolynomialMap {
    /// `f_j` as an operator.
    pub fn component(&self, j: usize) -> DiffOp {
        self.to_op(&self.f[j])
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.f[j].terms().all(|(e, _)| e.iter().all(|a| a.is_zero()))
    }
}

/// Malgrange's ideal of `f` with its V-Gröbner fan and, when `f` is
/// quasi-homogeneous, the grading that bounds every computation.
pub fn build_presentation(f: &PolynomialMap, budget: Budget) -> Result<IdealPresentation> {
    let gens = annihilator_generators(f);
    check_generators(f, &gens)?;
    IdealPresentation::new(gens, f.grading(), budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_d_operator;

    fn map(n: usize, p: usize, fs: &[&str]) -> PolynomialMap {
        let sig = Signature::new(n, p).unwrap();
        let ops: Vec<DiffOp> = fs.iter().map(|s| parse_d_operator(sig, s).unwrap()).collect();
        PolynomialMap::new(sig, &ops).unwrap()
    }

    fn ops(sig: Signature, v: &[&str]) -> Vec<DiffOp> {
        v.iter().map(|s| parse_d_operator(sig, s).unwrap()).collect()
    }

    #[test]
    fn generator_formulas() {
        let f = map(1, 1, &["x1"]);
        assert_eq!(annihilator_generators(&f), ops(f.signature(), &["t1 - x1", "dx1 + dt1"]));
        let f = map(2, 2, &["x1", "x2"]);
        assert_eq!(
            annihilator_generators(&f),
            ops(f.signature(), &["t1 - x1", "t2 - x2", "dx1 + dt1", "dx2 + dt2"])
        );
        let f = map(1, 1, &["x1^2"]);
        assert_eq!(annihilator_generators(&f), ops(f.signature(), &["t1 - x1^2", "dx1 + 2*x1*dt1"]));
    }

    #[test]
    fn generators_annihilate() {
        for (n, p, fs) in [(1, 1, vec!["x1"]), (2, 2, vec!["x1", "x2"]), (1, 2, vec!["x1", "x1"]), (1, 1, vec!["x1^2"]), (2, 1, vec!["x1^2 + x2^3"])] {
            let f = map(n, p, &fs);
            check_generators(&f, &annihilator_generators(&f)).unwrap();
        }
    }

    #[test]
    fn non_annihilators_detected() {
        let f = map(1, 1, &["x1"]);
        let sig = f.signature();
        for s in ["1", "dt1", "x1", "dx1", "t1 - x1^2"] {
            assert!(!annihilates(&parse_d_operator(sig, s).unwrap(), &f).unwrap(), "{s}");
        }
        assert!(annihilates(&parse_d_operator(sig, "x1*dx1 + dt1*t1").unwrap(), &f).unwrap());
        assert!(!annihilates(&parse_d_operator(sig, "x1*dx1 + t1*dt1").unwrap(), &f).unwrap());
        let comm = parse_d_operator(sig, "dt1*t1 - t1*dt1").unwrap();
        assert!(!annihilates(&comm, &f).unwrap());
    }

    #[test]
    fn gradings() {
        let g = map(1, 1, &["x1^2"]).grading().unwrap();
        let sig = Signature::new(1, 1).unwrap();
        for gen in annihilator_generators(&map(1, 1, &["x1^2"])) {
            assert!(g.degree(&gen).is_some());
        }
        assert_eq!(g.weights()[sig.t(0)], 2);
        let g = map(2, 1, &["x1^2 + x2^3"]).grading().unwrap();
        assert_eq!(&g.weights()[..2], &[3, 2]);
        assert!(map(1, 1, &["x1 + x1^2"]).grading().is_none());
    }
}
