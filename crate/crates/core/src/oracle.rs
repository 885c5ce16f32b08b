//! Brute-force membership by exact linear algebra inside a degree window.
//!
//! An operator `P` is tested against the span of all products `m·g` with
//! `m` a monomial, `g` a generator and `deg(m) + deg(g) ≤ D`. Answers are
//! one-sided: a certificate is returned and re-checked by multiplication, or
//! the answer is "unknown at this bound". When every generator is
//! homogeneous for a grading, the system splits into graded components.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::order::{TermOrder, VForm};
use crate::weyl::{dehomogenize, l_order, DiffOp, Exponent, Signature, Weight};
use crate::Rat;

/// Integer weights on the variables; `z` must have weight 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grading {
    w: Vec<i64>,
}

impl Grading {
    pub fn new(w: Vec<i64>) -> Self {
        Grading { w }
    }

    pub fn weights(&self) -> &[i64] {
        &self.w
    }

    pub fn weight(&self, e: &Exponent) -> i64 {
        e.0.iter().zip(&self.w).map(|(a, b)| *a as i64 * b).sum()
    }

    /// The common weight of all terms, if `P` is nonzero and homogeneous.
    pub fn degree(&self, p: &DiffOp) -> Option<i64> {
        let mut it = p.terms().map(|(e, _)| self.weight(e));
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }
}

/// Which ring the span is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    /// `D_{n+p}`: monomials without `z`, products evaluated at `z = 1`.
    Weyl,
    /// `D_{n+p}<z>`.
    Homogenized,
}

/// All monomials of total degree at most `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeWindow {
    pub bound: u32,
}

impl DegreeWindow {
    pub const DEFAULT: DegreeWindow = DegreeWindow { bound: 6 };

    /// Deterministic enumeration: by total degree, then exponent order.
    pub fn monomials(&self, sig: Signature, with_z: bool) -> Vec<Exponent> {
        let nv = if with_z { sig.len() } else { 2 * sig.m() };
        let mut out = Vec::new();
        let mut cur = Exponent::zero(sig);
        fn rec(i: usize, nv: usize, left: u32, cur: &mut Exponent, out: &mut Vec<Exponent>) {
            if i == nv {
                out.push(cur.clone());
                return;
            }
            for a in 0..=left {
                cur.0[i] = a;
                rec(i + 1, nv, left - a, cur, out);
            }
            cur.0[i] = 0;
        }
        rec(0, nv, self.bound, &mut cur, &mut out);
        out.sort_by(|a, b| a.total_degree().cmp(&b.total_degree()).then_with(|| a.cmp(b)));
        out
    }
}

/// `P = Σ_i multipliers[i] · g_i` (evaluated at `z = 1` in the Weyl ring).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub multipliers: Vec<DiffOp>,
}

impl Certificate {
    pub fn combination(&self, gens: &[DiffOp], ring: RingKind) -> DiffOp {
        let sig = gens.first().map(|g| g.signature()).expect("nonempty generator list");
        let mut acc = DiffOp::zero(sig);
        for (q, g) in self.multipliers.iter().zip(gens) {
            acc = &acc + &(q * g);
        }
        match ring {
            RingKind::Weyl => dehomogenize(&acc),
            RingKind::Homogenized => acc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member(Certificate),
    UnknownAtBound(u32),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VfiltMembership {
    /// `ord^L(witness) ≤ k` and `P − witness = Σ multipliers[i]·g_i`.
    Member { witness: DiffOp, certificate: Certificate },
    UnknownAtBound(u32),
}

impl VfiltMembership {
    pub fn witness(&self) -> Option<&DiffOp> {
        match self {
            VfiltMembership::Member { witness, .. } => Some(witness),
            VfiltMembership::UnknownAtBound(_) => None,
        }
    }
}

/// Answer for `V̄_w`: one witness per form, in the order given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VbarMembership {
    Member(Vec<(VForm, DiffOp)>),
    UnknownAtBound(u32),
}

type ComponentKey = (Option<i64>, Option<u32>);
type FilterKey = Option<(VForm, Rat)>;

struct System {
    /// (generator index, monomial) of each column.
    columns: Vec<(usize, Exponent)>,
    products: Vec<DiffOp>,
    rows: HashMap<Exponent, usize>,
    echelon: Echelon,
}

/// A generator set with its window, gradings and cached eliminations.
pub struct Oracle {
    sig: Signature,
    gens: Vec<DiffOp>,
    ring: RingKind,
    window: DegreeWindow,
    grading: Option<Grading>,
    graded_by_degree: bool,
    monomials: Vec<Exponent>,
    cache: Mutex<HashMap<(ComponentKey, FilterKey), Arc<System>>>,
}

impl Oracle {
    /// `grading` is used only if every generator is homogeneous for it.
    pub fn new(gens: Vec<DiffOp>, ring: RingKind, window: DegreeWindow, grading: Option<Grading>) -> Result<Self> {
        let sig = gens.first().map(|g| g.signature()).ok_or(Error::Precondition("oracle needs at least one generator".into()))?;
        if let Some(g) = gens.iter().find(|g| g.signature() != sig) {
            return Err(Error::SignatureMismatch(sig, g.signature()));
        }
        if ring == RingKind::Weyl && gens.iter().any(|g| g.has_z()) {
            return Err(Error::ContainsZ);
        }
        let gens: Vec<DiffOp> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        let grading = grading.filter(|gr| gr.w.len() == sig.len() && gr.w[sig.z()] == 0 && gens.iter().all(|g| gr.degree(g).is_some()));
        let graded_by_degree = ring == RingKind::Homogenized && gens.iter().all(|g| g.is_homogeneous());
        let monomials = window.monomials(sig, ring == RingKind::Homogenized);
        Ok(Oracle { sig, gens, ring, window, grading, graded_by_degree, monomials, cache: Mutex::new(HashMap::new()) })
    }

    pub fn generators(&self) -> &[DiffOp] {
        &self.gens
    }

    pub fn ring(&self) -> RingKind {
        self.ring
    }

    pub fn bound(&self) -> u32 {
        self.window.bound
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    fn component_of(&self, e: &Exponent) -> ComponentKey {
        (
            self.grading.as_ref().map(|g| g.weight(e)),
            self.graded_by_degree.then(|| e.hom_degree(self.sig)),
        )
    }

    fn split(&self, p: &DiffOp) -> BTreeMap<ComponentKey, DiffOp> {
        let mut out: BTreeMap<ComponentKey, DiffOp> = BTreeMap::new();
        for (e, c) in p.terms() {
            out.entry(self.component_of(e)).or_insert_with(|| DiffOp::zero(self.sig)).add_term(e.clone(), c.clone());
        }
        out
    }

    fn product(&self, m: &Exponent, g: &DiffOp) -> DiffOp {
        let q = g.mul_monomial_left(m, &Rat::from_integer(1.into()));
        match self.ring {
            RingKind::Weyl => dehomogenize(&q),
            RingKind::Homogenized => q,
        }
    }

    fn columns_for(&self, comp: ComponentKey) -> Vec<(usize, Exponent)> {
        let mut cols = Vec::new();
        for (i, g) in self.gens.iter().enumerate() {
            let gdeg = g.terms().map(|(e, _)| e.total_degree()).max().unwrap_or(0);
            if gdeg > self.window.bound {
                continue;
            }
            let left = self.window.bound - gdeg;
            let gw = self.grading.as_ref().and_then(|gr| gr.degree(g));
            let gh = if self.graded_by_degree { g.hom_degree() } else { None };
            for m in &self.monomials {
                if m.total_degree() > left {
                    break;
                }
                if let (Some(target), Some(gw)) = (comp.0, gw) {
                    if self.grading.as_ref().unwrap().weight(m) + gw != target {
                        continue;
                    }
                }
                if let (Some(target), Some(gh)) = (comp.1, gh) {
                    if m.hom_degree(self.sig) + gh != target {
                        continue;
                    }
                }
                cols.push((i, m.clone()));
            }
        }
        cols
    }

    fn system(&self, comp: ComponentKey, filter: &FilterKey) -> Arc<System> {
        let key = (comp, filter.clone());
        if let Some(s) = self.cache.lock().expect("oracle cache").get(&key) {
            return s.clone();
        }
        let columns = self.columns_for(comp);
        let mut rows: HashMap<Exponent, usize> = HashMap::new();
        let mut echelon = Echelon::new();
        let mut products = Vec::with_capacity(columns.len());
        for (id, (i, m)) in columns.iter().enumerate() {
            let prod = self.product(m, &self.gens[*i]);
            let mut col = BTreeMap::new();
            for (e, c) in prod.terms() {
                if let Some((l, k)) = filter {
                    if l.eval(self.sig, e) <= *k {
                        continue;
                    }
                }
                let next = rows.len();
                let r = *rows.entry(e.clone()).or_insert(next);
                col.insert(r, c.clone());
            }
            if !col.is_empty() {
                echelon.insert(id, &col);
            }
            products.push(prod);
        }
        let sys = Arc::new(System { columns, products, rows, echelon });
        self.cache.lock().expect("oracle cache").insert(key, sys.clone());
        sys
    }

    /// Solve `target = Σ c·col` over the filtered rows of one component.
    fn solve_component(&self, comp: ComponentKey, filter: &FilterKey, target: &DiffOp) -> Option<(Vec<DiffOp>, DiffOp)> {
        let sys = self.system(comp, filter);
        let mut b = BTreeMap::new();
        for (e, c) in target.terms() {
            if let Some((l, k)) = filter {
                if l.eval(self.sig, e) <= *k {
                    continue;
                }
            }
            b.insert(*sys.rows.get(e)?, c.clone());
        }
        let sol = if b.is_empty() { BTreeMap::new() } else { sys.echelon.solve(&b)? };
        let mut mult = vec![DiffOp::zero(self.sig); self.gens.len()];
        let mut used = DiffOp::zero(self.sig);
        for (id, c) in sol {
            let (i, m) = &sys.columns[id];
            mult[*i].add_term(m.clone(), c.clone());
            used = &used + &sys.products[id].scale(&c);
        }
        Some((mult, used))
    }

    fn check(&self, cert: &Certificate, expect: &DiffOp) -> Result<()> {
        if &cert.combination(&self.gens, self.ring) != expect {
            return Err(Error::Invariant("oracle certificate failed re-multiplication".into()));
        }
        Ok(())
    }

    fn accumulate(&self, acc: &mut [DiffOp], mult: Vec<DiffOp>) {
        for (a, m) in acc.iter_mut().zip(mult) {
            *a = &*a + &m;
        }
    }

    pub fn ideal_membership(&self, p: &DiffOp) -> Result<Membership> {
        self.check_input(p)?;
        let mut total = vec![DiffOp::zero(self.sig); self.gens.len()];
        for (comp, part) in self.split(p) {
            match self.solve_component(comp, &None, &part) {
                Some((mult, _)) => self.accumulate(&mut total, mult),
                None => return Ok(Membership::UnknownAtBound(self.window.bound)),
            }
        }
        let cert = Certificate { multipliers: total };
        self.check(&cert, p)?;
        Ok(Membership::Member(cert))
    }

    /// Search a representative `P'` of `P` modulo the ideal with `ord^L(P') ≤ k`.
    pub fn vfilt_membership(&self, p: &DiffOp, l: &VForm, k: &Rat) -> Result<VfiltMembership> {
        self.check_input(p)?;
        if l.p() != self.sig.p {
            return Err(Error::InvalidForm(format!("form {l} does not match p={}", self.sig.p)));
        }
        let filter = Some((l.clone(), k.clone()));
        let mut total = vec![DiffOp::zero(self.sig); self.gens.len()];
        let mut witness = p.clone();
        for (comp, part) in self.split(p) {
            let bad = part.filter(|e| l.eval(self.sig, e) > *k);
            if bad.is_zero() {
                continue;
            }
            match self.solve_component(comp, &filter, &part) {
                Some((mult, used)) => {
                    witness = &witness - &used;
                    self.accumulate(&mut total, mult);
                }
                None => return Ok(VfiltMembership::UnknownAtBound(self.window.bound)),
            }
        }
        if l_order(&witness, l).is_some_and(|o| o > *k) {
            return Err(Error::Invariant("oracle witness exceeds the requested order".into()));
        }
        let cert = Certificate { multipliers: total };
        self.check(&cert, &(p - &witness))?;
        Ok(VfiltMembership::Member { witness, certificate: cert })
    }

    /// `P ∈ ∩_L V^L_{L(w)}` for the given forms, with one witness per form.
    pub fn vbar_membership(&self, p: &DiffOp, forms: &[VForm], w: &[i64]) -> Result<VbarMembership> {
        let mut out = Vec::with_capacity(forms.len());
        for l in forms {
            match self.vfilt_membership(p, l, &l.eval_weight(w))? {
                VfiltMembership::Member { witness, .. } => out.push((l.clone(), witness)),
                VfiltMembership::UnknownAtBound(b) => return Ok(VbarMembership::UnknownAtBound(b)),
            }
        }
        Ok(VbarMembership::Member(out))
    }

    /// Leading exponents under `ord` of the span of the window's products
    /// lying in one graded component; `None` keys mean "all".
    pub fn leading_exponents(&self, ord: &TermOrder, weight: Option<i64>, hom_degree: Option<u32>) -> Vec<Exponent> {
        let comp = (
            if self.grading.is_some() { weight } else { None },
            if self.graded_by_degree { hom_degree } else { None },
        );
        let columns = self.columns_for(comp);
        let products: Vec<DiffOp> = columns.iter().map(|(i, m)| self.product(m, &self.gens[*i])).collect();
        let mut exps: Vec<Exponent> = products
            .iter()
            .flat_map(|q| q.terms().map(|(e, _)| e.clone()))
            .filter(|e| weight.is_none() || self.grading.as_ref().is_none_or(|g| g.weight(e) == weight.unwrap()))
            .filter(|e| hom_degree.is_none() || e.hom_degree(self.sig) == hom_degree.unwrap())
            .collect();
        exps.sort_by(|a, b| ord.cmp(a, b));
        exps.dedup();
        let index: HashMap<&Exponent, usize> = exps.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut ech = Echelon::new();
        for (id, q) in products.iter().enumerate() {
            let col: BTreeMap<usize, Rat> = q
                .terms()
                .filter_map(|(e, c)| index.get(e).map(|r| (*r, c.clone())))
                .collect();
            if !col.is_empty() {
                ech.insert(id, &col);
            }
        }
        let mut leads: Vec<Exponent> = ech.leads().map(|r| exps[r].clone()).collect();
        leads.sort_by(|a, b| ord.cmp(a, b));
        leads
    }

    fn check_input(&self, p: &DiffOp) -> Result<()> {
        if p.signature() != self.sig {
            return Err(Error::SignatureMismatch(self.sig, p.signature()));
        }
        if self.ring == RingKind::Weyl && p.has_z() {
            return Err(Error::ContainsZ);
        }
        Ok(())
    }
}

fn ring_of(p: &DiffOp, gens: &[DiffOp]) -> RingKind {
    if p.has_z() || gens.iter().any(|g| g.has_z()) {
        RingKind::Homogenized
    } else {
        RingKind::Weyl
    }
}

/// One-shot membership test; the ring is `D<z>` if anything mentions `z`.
pub fn ideal_membership_bf(p: &DiffOp, gens: &[DiffOp], d: u32) -> Result<Membership> {
    if gens.iter().all(|g| g.is_zero()) {
        return Ok(if p.is_zero() {
            Membership::Member(Certificate { multipliers: gens.to_vec() })
        } else {
            Membership::UnknownAtBound(d)
        });
    }
    Oracle::new(gens.to_vec(), ring_of(p, gens), DegreeWindow { bound: d }, None)?.ideal_membership(p)
}

pub fn vfilt_membership_bf(p: &DiffOp, l: &VForm, k: &Rat, gens: &[DiffOp], d: u32) -> Result<VfiltMembership> {
    if gens.iter().all(|g| g.is_zero()) {
        let ok = l_order(p, l).is_none_or(|o| o <= *k);
        return Ok(if ok {
            VfiltMembership::Member { witness: p.clone(), certificate: Certificate { multipliers: gens.to_vec() } }
        } else {
            VfiltMembership::UnknownAtBound(d)
        });
    }
    Oracle::new(gens.to_vec(), RingKind::Weyl, DegreeWindow { bound: d }, None)?.vfilt_membership(p, l, k)
}

pub fn vbar_membership_bf(p: &DiffOp, skeleton: &[VForm], w: &[i64], gens: &[DiffOp], d: u32) -> Result<VbarMembership> {
    let mut out = Vec::new();
    for l in skeleton {
        match vfilt_membership_bf(p, l, &l.eval_weight(w), gens, d)? {
            VfiltMembership::Member { witness, .. } => out.push((l.clone(), witness)),
            VfiltMembership::UnknownAtBound(b) => return Ok(VbarMembership::UnknownAtBound(b)),
        }
    }
    Ok(VbarMembership::Member(out))
}
