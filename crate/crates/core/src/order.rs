//! Admissible linear forms and the term orders built from them.
//!
//! Every order here is a lexicographic cascade of integer weight vectors
//! followed by the reversal of the base well-order `<_0`, which is fixed as
//! graded lexicographic on `(α, μ, β, ν, k)` with variable precedence
//! `x1 < … < xn < t1 < … < tp < ∂x1 < … < ∂tp < z`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::weyl::{DiffOp, Exponent, Signature, Weight};
use crate::Rat;

/// `L(α,μ,β,ν) = Σ e_i (α,μ)_i + Σ f_i (β,ν)_i`; the `z` exponent has weight 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub e: Vec<Rat>,
    pub f: Vec<Rat>,
}

impl LinearForm {
    pub fn new(e: Vec<Rat>, f: Vec<Rat>) -> Result<Self> {
        if e.len() != f.len() {
            return Err(Error::InvalidForm(format!("e has {} entries, f has {}", e.len(), f.len())));
        }
        Ok(LinearForm { e, f })
    }

    pub fn zero(m: usize) -> Self {
        LinearForm { e: vec![Rat::zero(); m], f: vec![Rat::zero(); m] }
    }

    /// Membership in `U`: `e_i <= 0` and `e_i + f_i >= 0` for all `i`.
    pub fn in_u(&self) -> bool {
        self.e.iter().zip(&self.f).all(|(e, f)| !e.is_positive() && !(e + f).is_negative())
    }

    /// Weight vector over the full exponent layout (z last, weight 0).
    fn coefficients(&self) -> Vec<Rat> {
        let mut v: Vec<Rat> = self.e.iter().chain(self.f.iter()).cloned().collect();
        v.push(Rat::zero());
        v
    }
}

/// Membership in `U`.
pub fn in_u(form: &LinearForm) -> bool {
    form.in_u()
}

impl Weight for LinearForm {
    fn eval(&self, sig: Signature, e: &Exponent) -> Rat {
        debug_assert_eq!(self.e.len(), sig.m());
        let m = sig.m();
        let mut acc = Rat::zero();
        for i in 0..m {
            if !self.e[i].is_zero() && e.0[i] != 0 {
                acc += &self.e[i] * Rat::from_integer(BigInt::from(e.0[i]));
            }
            if !self.f[i].is_zero() && e.0[m + i] != 0 {
                acc += &self.f[i] * Rat::from_integer(BigInt::from(e.0[m + i]));
            }
        }
        acc
    }
}

/// `L = l1 V1 + … + lp Vp` with `l_j >= 0`, evaluating to `Σ l_j (ν_j - μ_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VForm {
    l: Vec<Rat>,
}

impl VForm {
    pub fn new(l: Vec<Rat>) -> Result<Self> {
        if l.iter().any(|x| x.is_negative()) {
            return Err(Error::InvalidForm("V-form coefficients must be nonnegative".into()));
        }
        Ok(VForm { l })
    }

    pub fn from_ints(l: &[i64]) -> Self {
        Self::new(l.iter().map(|&x| Rat::from_integer(x.into())).collect()).expect("nonnegative coefficients")
    }

    /// `V_{j+1}` in a ring with `p` t-variables.
    pub fn basis(p: usize, j: usize) -> Self {
        let mut l = vec![Rat::zero(); p];
        l[j] = Rat::one();
        VForm { l }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.l
    }

    pub fn p(&self) -> usize {
        self.l.len()
    }

    pub fn is_zero(&self) -> bool {
        self.l.iter().all(|x| x.is_zero())
    }

    /// Coerce into `U`: `e_{t_j} = -l_j`, `f_{∂t_j} = l_j`, zero on `x`.
    pub fn to_linear(&self, sig: Signature) -> LinearForm {
        let m = sig.m();
        let mut e = vec![Rat::zero(); m];
        let mut f = vec![Rat::zero(); m];
        for (j, l) in self.l.iter().enumerate() {
            e[sig.n + j] = -l.clone();
            f[sig.n + j] = l.clone();
        }
        LinearForm { e, f }
    }

    /// `L(w) = Σ l_j w_j`.
    pub fn eval_weight(&self, w: &[i64]) -> Rat {
        self.l.iter().zip(w).map(|(l, &x)| l * Rat::from_integer(x.into())).sum()
    }

    /// Values `(V_1(e), …, V_p(e))` of an exponent.
    pub fn v_values(sig: Signature, e: &Exponent) -> Vec<i64> {
        (0..sig.p).map(|j| e.0[sig.dt(j)] as i64 - e.0[sig.t(j)] as i64).collect()
    }

    /// Integral with gcd 1 (the zero form is not primitive).
    pub fn is_primitive(&self) -> bool {
        self.l.iter().all(|x| x.is_integer()) && !self.is_zero() && {
            let g = self.l.iter().fold(BigInt::zero(), |g, x| g.gcd(x.numer()));
            g.is_one()
        }
    }

    /// The primitive integral form on the same ray.
    pub fn primitive(&self) -> Result<VForm> {
        if self.is_zero() {
            return Err(Error::InvalidForm("the zero form spans no ray".into()));
        }
        let ints = integerize(&self.l);
        let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        Ok(VForm { l: ints.into_iter().map(|x| Rat::from_integer(x / &g)).collect() })
    }

    /// `l2 / l1` for `p = 2`, `None` for the ray of `V2`.
    pub fn slope(&self) -> Option<Rat> {
        assert_eq!(self.l.len(), 2, "slopes are defined for p = 2");
        if self.l[0].is_zero() {
            None
        } else {
            Some(&self.l[1] / &self.l[0])
        }
    }

    /// Whether two forms span the same ray.
    pub fn same_ray(&self, other: &VForm) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        self.primitive().ok() == other.primitive().ok()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: &Rat, other: &VForm, b: &Rat) -> VForm {
        VForm { l: self.l.iter().zip(&other.l).map(|(x, y)| a * x + b * y).collect() }
    }
}

impl Weight for VForm {
    fn eval(&self, sig: Signature, e: &Exponent) -> Rat {
        let mut acc = Rat::zero();
        for (j, l) in self.l.iter().enumerate() {
            let v = e.0[sig.dt(j)] as i64 - e.0[sig.t(j)] as i64;
            if v != 0 && !l.is_zero() {
                acc += l * Rat::from_integer(v.into());
            }
        }
        acc
    }
}

impl fmt::Display for VForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.l.iter().map(|x| x.to_string()).collect();
        write!(f, "V:{}", parts.join(","))
    }
}

fn integerize(v: &[Rat]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect()
}

fn to_i64_weights(v: &[Rat]) -> Result<Vec<i64>> {
    integerize(v)
        .into_iter()
        .map(|x| x.to_i64().ok_or_else(|| Error::InvalidForm("form weights overflow i64 after scaling".into())))
        .collect()
}

/// The comparison families used downstream.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OrderSpec {
    /// `<_L^h`: degree `k+|β|+|ν|`, then `<_L`.
    HomForm(LinearForm),
    /// `<_L`: `L`, then `|β|+|ν|`, then reversed `<_0`.
    Form(LinearForm),
    /// `⊴_L^σ` with `L_σ = direction`: degree, then `L`, then `<_{direction}`.
    ConeLimit { l: VForm, direction: VForm },
    /// `⊴_L` of the `p = 2` analysis: degree, then `L`, then `<_{V1}`.
    Section3(VForm),
}

impl OrderSpec {
    pub fn hom_v(l: &VForm, sig: Signature) -> OrderSpec {
        OrderSpec::HomForm(l.to_linear(sig))
    }

    /// The primary form of the cascade (the `L` that defines `ord^L`).
    pub fn primary_form(&self, sig: Signature) -> LinearForm {
        match self {
            OrderSpec::HomForm(l) | OrderSpec::Form(l) => l.clone(),
            OrderSpec::ConeLimit { l, .. } | OrderSpec::Section3(l) => l.to_linear(sig),
        }
    }

    /// Build the comparator for one signature.
    pub fn compile(&self, sig: Signature) -> Result<TermOrder> {
        let len = sig.len();
        let m = sig.m();
        let mut dbar = vec![0i64; len];
        for w in dbar.iter_mut().take(2 * m).skip(m) {
            *w = 1;
        }
        let mut degree = dbar.clone();
        degree[2 * m] = 1;

        let lin = |l: &LinearForm| -> Result<Vec<i64>> {
            if l.e.len() != m {
                return Err(Error::InvalidForm(format!("form has {} coordinates, ring has {}", l.e.len(), m)));
            }
            if !l.in_u() {
                return Err(Error::InvalidForm("form is not in U".into()));
            }
            to_i64_weights(&l.coefficients())
        };
        let vlin = |v: &VForm| -> Result<Vec<i64>> {
            if v.p() != sig.p {
                return Err(Error::InvalidForm(format!("V-form has {} coefficients, ring has p={}", v.p(), sig.p)));
            }
            lin(&v.to_linear(sig))
        };
        let tiers = match self {
            OrderSpec::HomForm(l) => vec![degree, lin(l)?, dbar],
            OrderSpec::Form(l) => vec![lin(l)?, dbar],
            OrderSpec::ConeLimit { l, direction } => {
                if l.same_ray(direction) {
                    return Err(Error::InvalidForm("cone-limit direction must differ from L as a ray".into()));
                }
                vec![degree, vlin(l)?, vlin(direction)?, dbar]
            }
            OrderSpec::Section3(l) => {
                let v1 = VForm::basis(sig.p, 0);
                vec![degree, vlin(l)?, vlin(&v1)?, dbar]
            }
        };
        Ok(TermOrder { spec: self.clone(), sig, tiers })
    }
}

impl fmt::Display for OrderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lf = |l: &LinearForm| {
            let e: Vec<String> = l.e.iter().map(|x| x.to_string()).collect();
            let g: Vec<String> = l.f.iter().map(|x| x.to_string()).collect();
            format!("e=[{}];f=[{}]", e.join(","), g.join(","))
        };
        match self {
            OrderSpec::HomForm(l) => write!(f, "hom({})", lf(l)),
            OrderSpec::Form(l) => write!(f, "form({})", lf(l)),
            OrderSpec::ConeLimit { l, direction } => write!(f, "lim({l};{direction})"),
            OrderSpec::Section3(l) => write!(f, "s3({l})"),
        }
    }
}

/// A compiled term order: integer weight tiers, then reversed graded lex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermOrder {
    spec: OrderSpec,
    sig: Signature,
    tiers: Vec<Vec<i64>>,
}

fn dot(w: &[i64], e: &Exponent) -> i64 {
    w.iter().zip(e.0.iter()).map(|(a, &b)| a * b as i64).sum()
}

/// The base well-order `<_0`: graded lexicographic, last variable most significant.
pub fn base_cmp(a: &Exponent, b: &Exponent) -> Ordering {
    a.total_degree().cmp(&b.total_degree()).then_with(|| a.0.iter().rev().cmp(b.0.iter().rev()))
}

impl TermOrder {
    pub fn spec(&self) -> &OrderSpec {
        &self.spec
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn primary_form(&self) -> LinearForm {
        self.spec.primary_form(self.sig)
    }

    /// Strict total order; `Equal` only for identical exponents.
    pub fn cmp(&self, a: &Exponent, b: &Exponent) -> Ordering {
        for w in &self.tiers {
            match dot(w, a).cmp(&dot(w, b)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        base_cmp(b, a)
    }

    pub fn leading_exponent(&self, p: &DiffOp) -> Result<Exponent> {
        self.leading_term(p).map(|(e, _)| e)
    }

    pub fn leading_term(&self, p: &DiffOp) -> Result<(Exponent, crate::Rat)> {
        p.terms()
            .max_by(|(a, _), (b, _)| self.cmp(a, b))
            .map(|(e, c)| (e.clone(), c.clone()))
            .ok_or(Error::ZeroOperator("leading_exponent"))
    }
}

/// Compare two exponents under `ord`.
pub fn compare(a: &Exponent, b: &Exponent, ord: &TermOrder) -> Ordering {
    ord.cmp(a, b)
}

/// The `ord`-greatest exponent of `P`.
pub fn leading_exponent(p: &DiffOp, ord: &TermOrder) -> Result<Exponent> {
    ord.leading_exponent(p)
}
