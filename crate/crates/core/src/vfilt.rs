//! V-filtration predicates on representatives, the single-form reduction
//! and its V1-controlled variant, and the constants `κ`.
//!
//! Module elements `m = P·δ` of `M = D/I` are handled through
//! representatives; every identity in `M` is discharged by a normal form
//! of `h(P − P')` against a standard basis of `h(I)`.

use std::fmt;

use crate::basis::{lemma_utile_check, normal_form, Budget, MarkedBasis};
use crate::division::DivisionResult;
use crate::error::{Error, Result};
use crate::fan::{traverse_fan, FanCell, Slope, VGroebnerFan};
use crate::oracle::Grading;
use crate::order::{OrderSpec, TermOrder, VForm};
use crate::weyl::{dehomogenize, homogenize, l_order, l_symbol, DiffOp, Signature, Weight};
use crate::Rat;

/// A left ideal `I ⊂ D_{n+p}` with its V-Gröbner fan.
#[derive(Clone, Debug)]
pub struct IdealPresentation {
    generators: Vec<DiffOp>,
    fan: VGroebnerFan,
    grading: Option<Grading>,
    budget: Budget,
}

impl IdealPresentation {
    /// `generators` live in `D_{n+p}` (no `z`).
    pub fn new(generators: Vec<DiffOp>, grading: Option<Grading>, budget: Budget) -> Result<Self> {
        let hom: Vec<DiffOp> = generators.iter().map(homogenize).collect::<Result<_>>()?;
        if hom.iter().all(|g| g.is_zero()) {
            return Err(Error::Precondition("the zero ideal has no fan to compute".into()));
        }
        let hom: Vec<DiffOp> = hom.into_iter().filter(|g| !g.is_zero()).collect();
        let fan = traverse_fan(&hom, budget)?;
        Ok(IdealPresentation { generators, fan, grading, budget })
    }

    pub fn signature(&self) -> Signature {
        self.fan.signature()
    }

    pub fn generators(&self) -> &[DiffOp] {
        &self.generators
    }

    pub fn fan(&self) -> &VGroebnerFan {
        &self.fan
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_ref()
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// Standard basis of `h(I)` used for membership certificates.
    pub fn global_basis(&self) -> &MarkedBasis {
        &self.fan.saturated
    }

    /// `P ∈ I`, decided by the normal form of `h(P)`.
    pub fn in_ideal(&self, p: &DiffOp) -> Result<bool> {
        if p.is_zero() {
            return Ok(true);
        }
        let r = normal_form(&homogenize(p)?, &self.fan.saturated, self.budget.division_steps)?;
        Ok(r.is_zero())
    }

    fn require_in_ideal(&self, p: &DiffOp, what: &str) -> Result<()> {
        if self.in_ideal(p)? {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what}: difference {p} is not in the ideal")))
        }
    }
}

/// `w ∈ ℤ^p`, with `L(w) = Σ l_j w_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn eval(&self, l: &VForm) -> Rat {
        l.eval_weight(&self.0)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Values of the controlled-reduction claims at one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimAudit {
    pub kappa: Rat,
    pub w1: i64,
    pub ord_v1_w: Option<Rat>,
    pub ord_v1_sigma_w: Option<Rat>,
    pub j1: usize,
    pub j2: usize,
    /// `ord^{V1}(m2 σ^{L2}(Q_{j2}))` and `ord^{V1}(m1 σ^{L2}(Q_{j1}))`.
    pub c_lhs: Option<Rat>,
    pub c_rhs: Option<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    /// Forms of `before` and `after`.
    pub forms: Vec<VForm>,
    /// Form whose order the step drives down.
    pub target: VForm,
    /// `W|_{z=1}`, an element of `I`.
    pub subtracted: DiffOp,
    pub before: Vec<Option<Rat>>,
    pub after: Vec<Option<Rat>>,
    pub claims: Option<ClaimAudit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub forms: Vec<VForm>,
    pub initial: DiffOp,
    pub steps: Vec<ReductionStep>,
    pub result: DiffOp,
}

impl ReductionTrace {
    fn new(forms: Vec<VForm>, initial: DiffOp) -> Self {
        ReductionTrace { forms, result: initial.clone(), initial, steps: Vec::new() }
    }

    fn profile(&self, p: &DiffOp) -> Vec<Option<Rat>> {
        profile(p, &self.forms)
    }

    fn extend(&mut self, other: ReductionTrace) {
        self.steps.extend(other.steps);
        self.result = other.result;
    }
}

fn profile(p: &DiffOp, forms: &[VForm]) -> Vec<Option<Rat>> {
    forms.iter().map(|l| l_order(p, l)).collect()
}

fn le(a: &Option<Rat>, b: &Rat) -> bool {
    a.as_ref().is_none_or(|x| x <= b)
}

fn lt_opt(a: &Option<Rat>, b: &Option<Rat>) -> bool {
    match (a, b) {
        (None, Some(_)) => true,
        (Some(x), Some(y)) => x < y,
        _ => false,
    }
}

fn le_opt(a: &Option<Rat>, b: &Option<Rat>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(x), Some(y)) => x <= y,
        (Some(_), None) => false,
    }
}

/// `ord^{V_j}(P) ≤ w_j` for every `j`.
pub fn vw_membership(p: &DiffOp, w: &WeightVector) -> bool {
    let sig = p.signature();
    (0..sig.p).all(|j| le(&l_order(p, &VForm::basis(sig.p, j)), &Rat::from_integer(w.0[j].into())))
}

/// `ord^L(P) ≤ L(w)` for every primitive generator `L` of the cell closure.
pub fn sigma_vw_membership(p: &DiffOp, cell: &FanCell, w: &WeightVector) -> bool {
    cell.generators().iter().all(|l| le(&l_order(p, l), &w.eval(l)))
}

/// `(z^l h(P), z^{l1} h(P1))` of equal degree.
fn lift_pair(p: &DiffOp, p1: &DiffOp) -> Result<(DiffOp, DiffOp)> {
    let h = homogenize(p)?;
    let h1 = homogenize(p1)?;
    let d = h.hom_degree().unwrap_or(0).max(h1.hom_degree().unwrap_or(0));
    let lift = |q: DiffOp| -> DiffOp {
        match q.hom_degree() {
            Some(k) => q.mul_z_pow(d - k),
            None => q,
        }
    };
    Ok((lift(h), lift(h1)))
}

/// The division order `⊴_L^σ` of a cell: the cone limit at `L` toward the
/// cell witness, or `<^h_L` when `L` spans the witness ray.
fn cell_order(cell: &FanCell, l: &VForm) -> Result<TermOrder> {
    let sig = cell.basis.signature();
    if l.same_ray(&cell.witness) {
        OrderSpec::hom_v(l, sig).compile(sig)
    } else {
        OrderSpec::ConeLimit { l: l.clone(), direction: cell.witness.clone() }.compile(sig)
    }
}

/// The cell basis certified for `ord`; fails if a mark moves.
fn basis_for(cell: &FanCell, ord: TermOrder) -> Result<MarkedBasis> {
    if !lemma_utile_check(&cell.basis, &ord) {
        return Err(Error::Invariant(format!("cell {} basis marks are not leading for {}", cell.interval, ord.spec())));
    }
    Ok(cell.basis.relabel(ord))
}

fn divide_exact(h0: &DiffOp, basis: &MarkedBasis, budget: Budget) -> Result<DivisionResult> {
    let res = basis.divide(h0, budget.division_steps)?;
    if res.truncated {
        return Err(Error::Budget(format!("division of H0 did not finish in {} steps", budget.division_steps)));
    }
    if !res.remainder.is_zero() {
        return Err(Error::Invariant(format!("H0 has nonzero remainder {} against the cell basis", res.remainder)));
    }
    Ok(res)
}

/// Indices `j` with `ord^L(q_j Q_j) = ord^L(H0)` and `W = Σ_{j∈J} σ^L(q_j) Q_j`.
fn symbol_part(res: &DivisionResult, basis: &MarkedBasis, l: &VForm, top: &Rat) -> Result<(Vec<usize>, DiffOp)> {
    let sig = basis.signature();
    let mut js = Vec::new();
    let mut w = DiffOp::zero(sig);
    for (j, (q, (qj, _))) in res.quotients.iter().zip(basis.elements()).enumerate() {
        if q.is_zero() {
            continue;
        }
        let prod = q * qj;
        if l_order(&prod, l).as_ref() == Some(top) {
            js.push(j);
            w = &w + &(&l_symbol(q, l)? * qj);
        }
    }
    Ok((js, w))
}

/// One application of the single-form reduction: lower `ord^{L_{i0}}` of `P`
/// without raising the order for the other forms, given a representative
/// `P1` of the same element with smaller `L_{i0}`-order.
pub fn reduce_step(
    p: &DiffOp,
    forms: &[VForm],
    i0: usize,
    cert: &DiffOp,
    pres: &IdealPresentation,
    cell: &FanCell,
    budget: Budget,
) -> Result<(DiffOp, ReductionTrace)> {
    let sig = pres.signature();
    let l = forms.get(i0).ok_or_else(|| Error::Precondition(format!("form index {i0} out of range")))?;
    if p.has_z() || cert.has_z() {
        return Err(Error::ContainsZ);
    }
    for f in forms {
        if sig.p == 2 && !cell.interval.closure_contains(&Slope::of(f)) {
            return Err(Error::Precondition(format!("{f} is not in the closure of the cell {}", cell.interval)));
        }
    }
    let ord_p = l_order(p, l);
    let ord_c = l_order(cert, l);
    if !lt_opt(&ord_c, &ord_p) {
        return Err(Error::Precondition(format!(
            "certificate does not improve the {l}-order ({:?} vs {:?})",
            ord_c.map(|x| x.to_string()),
            ord_p.map(|x| x.to_string())
        )));
    }
    pres.require_in_ideal(&(p - cert), "reduce_step certificate")?;

    let basis = basis_for(cell, cell_order(cell, l)?)?;
    let (h, h1) = lift_pair(p, cert)?;
    let h0 = &h - &h1;
    let res = divide_exact(&h0, &basis, budget)?;
    let top = l_order(&h0, l).expect("H0 is nonzero");
    let (_, w) = symbol_part(&res, &basis, l, &top)?;
    let subtracted = dehomogenize(&w);
    let p_new = p - &subtracted;

    let mut trace = ReductionTrace::new(forms.to_vec(), p.clone());
    let before = trace.profile(p);
    let after = trace.profile(&p_new);
    if !lt_opt(&after[i0], &before[i0]) {
        return Err(Error::Invariant(format!("reduction did not lower the {l}-order of {p}")));
    }
    for i in 0..forms.len() {
        if !le_opt(&after[i], &before[i]) {
            return Err(Error::Invariant(format!("reduction raised the {}-order of {p}", forms[i])));
        }
    }
    pres.require_in_ideal(&subtracted, "reduce_step subtracted element").map_err(|e| Error::Invariant(e.to_string()))?;
    trace.steps.push(ReductionStep { forms: forms.to_vec(), target: l.clone(), subtracted, before, after, claims: None });
    trace.result = p_new.clone();
    Ok((p_new, trace))
}

/// A representative of `P·δ` of least `L`-order: the normal form of `h(P)`
/// for the division order of the cell containing `L`.
pub fn minimal_representative(p: &DiffOp, l: &VForm, pres: &IdealPresentation) -> Result<DiffOp> {
    if p.is_zero() {
        return Ok(p.clone());
    }
    let fan = pres.fan();
    let cell = if pres.signature().p == 1 {
        &fan.cells[0]
    } else {
        fan.cell_of(&Slope::of(l)).ok_or_else(|| Error::Precondition(format!("{l} lies in no cell")))?
    };
    let basis = basis_for(cell, cell_order(cell, l)?)?;
    let r = normal_form(&homogenize(p)?, &basis, pres.budget().division_steps)?;
    Ok(dehomogenize(&r))
}

/// One certificate per skeleton form, each of least order.
pub fn skeleton_certificates(p: &DiffOp, pres: &IdealPresentation) -> Result<Vec<(VForm, DiffOp)>> {
    pres.fan().skeleton.iter().map(|l| Ok((l.clone(), minimal_representative(p, l, pres)?))).collect()
}

fn check_certs(pres: &IdealPresentation, certs: &[&DiffOp]) -> Result<()> {
    for pair in certs.windows(2) {
        if !pres.in_ideal(&(pair[0] - pair[1]))? {
            return Err(Error::Precondition("certificates do not represent the same module element".into()));
        }
    }
    Ok(())
}

const MAX_ROUNDS: usize = 10_000;

/// A single representative `P̃` with `ord^{L_i}(P̃) ≤ L_i(w)` for every
/// generator `L_i` of the cell closure, built from one certificate per form.
pub fn theorem1_witness(
    certs: &[(DiffOp, VForm)],
    cell: &FanCell,
    w: &WeightVector,
    pres: &IdealPresentation,
    budget: Budget,
) -> Result<(DiffOp, ReductionTrace)> {
    let forms = cell.generators();
    let mut ordered = Vec::with_capacity(forms.len());
    for l in &forms {
        let (c, _) = certs
            .iter()
            .find(|(_, f)| f.same_ray(l))
            .ok_or_else(|| Error::Precondition(format!("no certificate for {l}")))?;
        if !le(&l_order(c, l), &w.eval(l)) {
            return Err(Error::Precondition(format!("certificate for {l} exceeds {}", w.eval(l))));
        }
        ordered.push(c);
    }
    check_certs(pres, &ordered)?;
    let mut cur = ordered[0].clone();
    let mut trace = ReductionTrace::new(forms.clone(), cur.clone());
    for i0 in 1..forms.len() {
        let l = &forms[i0];
        let mut rounds = 0;
        while !le(&l_order(&cur, l), &w.eval(l)) {
            rounds += 1;
            if rounds > MAX_ROUNDS {
                return Err(Error::Budget(format!("theorem1_witness exceeded {MAX_ROUNDS} reductions for {l}")));
            }
            let (next, t) = reduce_step(&cur, &forms, i0, ordered[i0], pres, cell, budget)?;
            trace.extend(t);
            cur = next;
        }
    }
    trace.result = cur.clone();
    debug_assert!(sigma_vw_membership(&cur, cell, w));
    Ok((cur, trace))
}

fn kappa_cell(cell: &FanCell, v: &VForm, l: &VForm) -> Result<Rat> {
    let mut k = Rat::from_integer(0.into());
    for (q, _) in cell.basis.elements() {
        let full = l_order(q, v).expect("basis elements are nonzero");
        let sym = l_order(&l_symbol(q, l)?, v).expect("symbols are nonzero");
        let d = full - sym;
        if d > k {
            k = d;
        }
    }
    Ok(k)
}

fn maximal_generators(cell: &FanCell) -> Result<(VForm, VForm)> {
    if cell.dim != 2 {
        return Err(Error::Precondition(format!("cell {} is not of maximal dimension", cell.interval)));
    }
    let g = cell.generators();
    Ok((g[0].clone(), g[1].clone()))
}

/// `κ_σ¹ = max_j ord^{V1}(Q_j) − ord^{V1}(σ^{L2}(Q_j))` for a maximal cell
/// with generators `L1 < L2`.
pub fn kappa_sigma(cell: &FanCell) -> Result<Rat> {
    let (_, l2) = maximal_generators(cell)?;
    let sig = cell.basis.signature();
    let v1 = VForm::basis(2, 0);
    let k = kappa_cell(cell, &v1, &l2)?;
    // Same value through the leading exponent for ⊴_{L2}.
    let s3 = OrderSpec::Section3(l2.clone()).compile(sig)?;
    let mut k2 = Rat::from_integer(0.into());
    for (q, _) in cell.basis.elements() {
        let e = s3.leading_exponent(q)?;
        let d = l_order(q, &v1).expect("nonzero") - v1.eval(sig, &e);
        if d > k2 {
            k2 = d;
        }
    }
    if k != k2 {
        return Err(Error::Invariant(format!("κ through symbols ({k}) and through ⊴ leaders ({k2}) differ")));
    }
    Ok(k)
}

/// The symmetric constant on the `V2` side, using the lower generator.
pub fn kappa_sigma_v2(cell: &FanCell) -> Result<Rat> {
    let (l1, _) = maximal_generators(cell)?;
    kappa_cell(cell, &VForm::basis(2, 1), &l1)
}

/// `κ¹`: the maximum of `κ_σ¹` over maximal cells; 0 when `p = 1`.
pub fn kappa_global(fan: &VGroebnerFan) -> Result<Rat> {
    if fan.signature().p != 2 {
        return Ok(Rat::from_integer(0.into()));
    }
    let mut k = Rat::from_integer(0.into());
    for c in fan.maximal_cells() {
        k = k.max(kappa_sigma(c)?);
    }
    Ok(k)
}

/// `κ²`, the `V2`-side analogue; 0 when `p = 1`.
pub fn kappa_global_v2(fan: &VGroebnerFan) -> Result<Rat> {
    if fan.signature().p != 2 {
        return Ok(Rat::from_integer(0.into()));
    }
    let mut k = Rat::from_integer(0.into());
    for c in fan.maximal_cells() {
        k = k.max(kappa_sigma_v2(c)?);
    }
    Ok(k)
}

fn lead_monomial(q: &DiffOp, ord: &TermOrder) -> Result<DiffOp> {
    let e = ord.leading_exponent(q)?;
    Ok(DiffOp::monomial(q.signature(), e, Rat::from_integer(1.into())))
}

/// Lower the `L2`-order of `P` to `L2(w)` on a maximal cell with generators
/// `L1 < L2`, keeping `ord^{L1}(P) ≤ L1(w)` and the `V1`-order below
/// `max(ord^{V1}(P), w1 + κ_σ¹)`.
pub fn controlled_reduce(
    p: &DiffOp,
    cert2: &DiffOp,
    cell: &FanCell,
    w: &WeightVector,
    pres: &IdealPresentation,
    budget: Budget,
) -> Result<(DiffOp, ReductionTrace)> {
    let sig = pres.signature();
    if sig.p != 2 {
        return Err(Error::Unsupported("controlled reduction needs p = 2".into()));
    }
    let (l1, l2) = maximal_generators(cell)?;
    let v1 = VForm::basis(2, 0);
    let forms = vec![l1.clone(), l2.clone(), v1.clone()];
    let mut trace = ReductionTrace::new(forms.clone(), p.clone());
    if !le(&l_order(p, &l1), &w.eval(&l1)) {
        return Err(Error::Precondition(format!("ord^{l1}(P) exceeds {}", w.eval(&l1))));
    }
    if !le(&l_order(cert2, &l2), &w.eval(&l2)) {
        return Err(Error::Precondition(format!("certificate exceeds {} for {l2}", w.eval(&l2))));
    }
    if le(&l_order(p, &l2), &w.eval(&l2)) {
        return Ok((p.clone(), trace));
    }
    pres.require_in_ideal(&(p - cert2), "controlled_reduce certificate")?;

    let kappa = kappa_sigma(cell)?;
    let w1 = Rat::from_integer(w.0[0].into());
    let ord_s3 = OrderSpec::Section3(l2.clone()).compile(sig)?;
    let basis = basis_for(cell, ord_s3.clone())?;
    let v1_start = l_order(p, &v1);
    let mut cur = p.clone();
    let mut rounds = 0;
    while !le(&l_order(&cur, &l2), &w.eval(&l2)) {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(Error::Budget(format!("controlled reduction exceeded {MAX_ROUNDS} steps")));
        }
        let (h, h2) = lift_pair(&cur, cert2)?;
        let h0 = &h - &h2;
        let res = divide_exact(&h0, &basis, budget)?;
        let top = l_order(&h0, &l2).expect("H0 is nonzero");
        let (js, wop) = symbol_part(&res, &basis, &l2, &top)?;

        // Claim audit.
        let ord_w = l_order(&wop, &v1);
        let sigma_w = l_symbol(&wop, &l2)?;
        let ord_sw = l_order(&sigma_w, &v1);
        let fail = |what: &str| Error::Invariant(format!("claim ({what}) fails at step {} of controlled reduction:\n{}", trace.steps.len(), render(&trace)));
        let exp_w = ord_s3.leading_exponent(&wop)?;
        let j1 = *js
            .iter()
            .find(|&&j| {
                let q = &res.quotients[j];
                let m = ord_s3.leading_exponent(q).expect("nonzero quotient");
                m.add(&basis.elements()[j].1) == exp_w
            })
            .ok_or_else(|| fail("c: no index carries the leading exponent"))?;
        let j2 = *js
            .iter()
            .max_by(|&&a, &&b| {
                let oa = l_order(&(&l_symbol(&res.quotients[a], &l2).unwrap() * &basis.elements()[a].0), &v1);
                let ob = l_order(&(&l_symbol(&res.quotients[b], &l2).unwrap() * &basis.elements()[b].0), &v1);
                oa.cmp(&ob).then(b.cmp(&a))
            })
            .expect("J is nonempty");
        let m1 = lead_monomial(&res.quotients[j1], &ord_s3)?;
        let m2 = lead_monomial(&res.quotients[j2], &ord_s3)?;
        let c_rhs = l_order(&(&m1 * &l_symbol(&basis.elements()[j1].0, &l2)?), &v1);
        let c_lhs = l_order(&(&m2 * &l_symbol(&basis.elements()[j2].0, &l2)?), &v1);
        let audit = ClaimAudit {
            kappa: kappa.clone(),
            w1: w.0[0],
            ord_v1_w: ord_w.clone(),
            ord_v1_sigma_w: ord_sw.clone(),
            j1,
            j2,
            c_lhs: c_lhs.clone(),
            c_rhs: c_rhs.clone(),
        };
        if !le(&ord_w, &(&w1 + &kappa)) {
            return Err(fail("a"));
        }
        if let (Some(a), Some(b)) = (&ord_w, &ord_sw) {
            if a - b > kappa {
                return Err(fail("b"));
            }
        }
        if !le_opt(&c_lhs, &c_rhs) {
            return Err(fail("c"));
        }

        let subtracted = dehomogenize(&wop);
        let next = &cur - &subtracted;
        let before = profile(&cur, &forms);
        let after = profile(&next, &forms);
        if !lt_opt(&after[1], &before[1]) || !le_opt(&after[0], &before[0]) {
            return Err(Error::Invariant(format!("controlled step broke the order contract:\n{}", render(&trace))));
        }
        pres.require_in_ideal(&subtracted, "controlled step").map_err(|e| Error::Invariant(e.to_string()))?;
        trace.steps.push(ReductionStep { forms: forms.to_vec(), target: l2.clone(), subtracted, before, after, claims: Some(audit) });
        cur = next;
    }
    let bound = match &v1_start {
        Some(s) => s.clone().max(&w1 + &kappa),
        None => &w1 + &kappa,
    };
    if !le(&l_order(&cur, &v1), &bound) || !sigma_vw_membership(&cur, cell, w) {
        return Err(Error::Invariant(format!("controlled reduction missed its bounds:\n{}", render(&trace))));
    }
    trace.result = cur.clone();
    Ok((cur, trace))
}

/// From one certificate per skeleton form, a representative `T` with
/// `ord^{V1}(T) ≤ w1 + κ¹` and `ord^{V2}(T) ≤ w2`.
pub fn theorem2bis_normalize(
    certs: &[(VForm, DiffOp)],
    w: &WeightVector,
    pres: &IdealPresentation,
    budget: Budget,
) -> Result<(DiffOp, ReductionTrace)> {
    let fan = pres.fan();
    if pres.signature().p != 2 {
        return Err(Error::Unsupported("normalization needs p = 2".into()));
    }
    let sk = &fan.skeleton;
    let mut ordered = Vec::with_capacity(sk.len());
    for l in sk {
        let c = certs
            .iter()
            .find(|(f, _)| f.same_ray(l))
            .map(|(_, c)| c)
            .ok_or_else(|| Error::Precondition(format!("missing certificate for skeleton form {l}")))?;
        if !le(&l_order(c, l), &w.eval(l)) {
            return Err(Error::Precondition(format!("certificate for {l} exceeds {}", w.eval(l))));
        }
        ordered.push(c);
    }
    check_certs(pres, &ordered)?;
    let kappa = kappa_global(fan)?;
    let v1 = VForm::basis(2, 0);
    let v2 = VForm::basis(2, 1);
    let mut t = ordered[0].clone();
    let mut trace = ReductionTrace::new(vec![v1.clone(), v2.clone()], t.clone());
    for i in 1..sk.len() {
        let mid = Slope::of(&sk[i - 1].combine(&Rat::from_integer(1.into()), &sk[i], &Rat::from_integer(1.into())));
        let cell = fan
            .maximal_cells()
            .find(|c| c.interval.contains(&mid))
            .ok_or_else(|| Error::Invariant(format!("no maximal cell between {} and {}", sk[i - 1], sk[i])))?;
        let (next, sub) = controlled_reduce(&t, ordered[i], cell, w, pres, budget)
            .map_err(|e| annotate(e, &format!("cell {} ({})", i, cell.interval)))?;
        let v1_bound = Rat::from_integer(w.0[0].into()) + &kappa;
        if !le(&l_order(&next, &v1), &v1_bound) {
            return Err(Error::Invariant(format!("T_{i} exceeds the V1 bound {v1_bound}")));
        }
        trace.extend(sub);
        t = next;
    }
    if !le(&l_order(&t, &v1), &(Rat::from_integer(w.0[0].into()) + &kappa)) || !le(&l_order(&t, &v2), &Rat::from_integer(w.0[1].into())) {
        return Err(Error::Invariant("normalized representative misses V_{w+(κ¹,0)}".into()));
    }
    trace.result = t.clone();
    Ok((t, trace))
}

fn annotate(e: Error, at: &str) -> Error {
    match e {
        Error::Budget(m) => Error::Budget(format!("{at}: {m}")),
        Error::Invariant(m) => Error::Invariant(format!("{at}: {m}")),
        Error::Precondition(m) => Error::Precondition(format!("{at}: {m}")),
        other => other,
    }
}

fn fmt_ord(o: &Option<Rat>) -> String {
    o.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "-inf".into())
}

/// Plain-text rendering of a trace.
pub fn render(t: &ReductionTrace) -> String {
    let forms: Vec<String> = t.forms.iter().map(|f| f.to_string()).collect();
    let mut s = format!("forms: {}\ninitial: {}\n", forms.join(" "), t.initial);
    for (i, st) in t.steps.iter().enumerate() {
        let b: Vec<String> = st.before.iter().map(fmt_ord).collect();
        let a: Vec<String> = st.after.iter().map(fmt_ord).collect();
        s.push_str(&format!("step {i} [{}]: subtract {} | orders {} -> {}\n", st.target, st.subtracted, b.join(","), a.join(",")));
    }
    s.push_str(&format!("result: {}\n", t.result));
    s
}
