//! The V-Gröbner fan of `h(I)` for two t-variables.
//!
//! A V-form `l1 V1 + l2 V2` is parameterized by its slope `λ = l2/l1` in
//! `[0, ∞]`. Cells are maximal slope intervals on which the minimal reduced
//! standard basis, with its marked exponents, does not change.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::basis::{reduced_basis, z_saturate, Budget, MarkedBasis};
use crate::error::{Error, Result};
use crate::order::{LinearForm, OrderSpec, TermOrder, VForm};
use crate::weyl::{l_order, DiffOp, Signature, Weight};
use crate::Rat;

/// A point of `[0, ∞]`. `Finite` sorts before `Infinity`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slope {
    Finite(Rat),
    Infinity,
}

impl Slope {
    pub fn of(form: &VForm) -> Slope {
        form.slope().map(Slope::Finite).unwrap_or(Slope::Infinity)
    }

    /// The primitive integral form with this slope: `a/b ↦ (b, a)`.
    pub fn form(&self) -> VForm {
        match self {
            Slope::Finite(r) => VForm::new(vec![Rat::from_integer(r.denom().clone()), Rat::from_integer(r.numer().clone())])
                .expect("slopes are nonnegative"),
            Slope::Infinity => VForm::from_ints(&[0, 1]),
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(r) => write!(f, "{r}"),
            Slope::Infinity => write!(f, "inf"),
        }
    }
}

/// A nonempty interval of slopes with open or closed ends.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlopeInterval {
    pub lo: Slope,
    pub lo_closed: bool,
    pub hi: Slope,
    pub hi_closed: bool,
}

impl SlopeInterval {
    pub fn point(s: Slope) -> Self {
        SlopeInterval { lo: s.clone(), lo_closed: true, hi: s, hi_closed: true }
    }

    pub fn contains(&self, s: &Slope) -> bool {
        let above = match s.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let below = match s.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    /// Membership in the closure.
    pub fn closure_contains(&self, s: &Slope) -> bool {
        *s >= self.lo && *s <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Midpoint when bounded, `lo + 1` when unbounded, the point itself for
    /// a single point.
    pub fn witness_slope(&self) -> Slope {
        match (&self.lo, &self.hi) {
            (a, b) if a == b => a.clone(),
            (Slope::Finite(a), Slope::Finite(b)) => Slope::Finite((a + b) / Rat::from_integer(2.into())),
            (Slope::Finite(a), Slope::Infinity) => Slope::Finite(a + Rat::one()),
            (Slope::Infinity, _) => Slope::Infinity,
        }
    }

    fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Greater => true,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Less => false,
        }
    }
}

impl fmt::Display for SlopeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanCell {
    pub interval: SlopeInterval,
    /// 2 for sectors, 1 for rays.
    pub dim: u8,
    pub basis: MarkedBasis,
    pub witness: VForm,
}

impl FanCell {
    /// Primitive generators of the closure, by increasing slope.
    pub fn generators(&self) -> Vec<VForm> {
        if self.basis.signature().p == 1 {
            return vec![VForm::from_ints(&[1])];
        }
        let mut out = vec![self.interval.lo.form()];
        if !self.interval.is_point() {
            out.push(self.interval.hi.form());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VGroebnerFan {
    pub cells: Vec<FanCell>,
    pub skeleton: Vec<VForm>,
    /// Standard basis of `h(I)` for the zero-form order.
    pub saturated: MarkedBasis,
}

impl VGroebnerFan {
    pub fn signature(&self) -> Signature {
        self.saturated.signature()
    }

    pub fn cell_of(&self, s: &Slope) -> Option<&FanCell> {
        self.cells.iter().find(|c| c.interval.contains(s))
    }

    pub fn maximal_cells(&self) -> impl Iterator<Item = &FanCell> {
        let p = self.signature().p;
        self.cells.iter().filter(move |c| c.dim as usize == p)
    }
}

fn tiebreak_order(sig: Signature) -> Result<TermOrder> {
    OrderSpec::HomForm(LinearForm::zero(sig.m())).compile(sig)
}

/// Slopes where every element's mark stays the `<^h`-leading exponent.
///
/// For a competing term `m` of an element marked `e`, with
/// `d = (V1(e) − V1(m), V2(e) − V2(m))`, the mark wins at slope `λ` iff
/// `d1 + λ d2 > 0`, or `= 0` and the `L`-free tail of the cascade prefers
/// `e`. At `∞` only `d2` counts. The result is the component of the finite
/// solution set, closed at `∞` when the mark also wins there.
pub fn cone_of_basis(basis: &MarkedBasis) -> Result<SlopeInterval> {
    let sig = basis.signature();
    if sig.p != 2 {
        return Err(Error::Unsupported("slope intervals need p = 2".into()));
    }
    let tie = tiebreak_order(sig)?;
    let mut lo = (Rat::zero(), true);
    let mut hi: Option<(Rat, bool)> = None;
    let mut finite_empty = false;
    let mut inf_ok = true;
    for (q, e) in basis.elements() {
        let de = e.hom_degree(sig);
        let ve = VForm::v_values(sig, e);
        for (m, _) in q.terms() {
            if m == e {
                continue;
            }
            match de.cmp(&m.hom_degree(sig)) {
                Ordering::Greater => continue,
                Ordering::Less => return Err(Error::Invariant(format!("mark of {q} is below another term in degree"))),
                Ordering::Equal => {}
            }
            let vm = VForm::v_values(sig, m);
            let d1 = Rat::from_integer((ve[0] - vm[0]).into());
            let d2 = Rat::from_integer((ve[1] - vm[1]).into());
            let wins_tie = tie.cmp(e, m) == Ordering::Greater;
            // At ∞.
            if d2.is_negative() || (d2.is_zero() && !wins_tie) {
                inf_ok = false;
            }
            // Finite slopes: d1 + λ d2 (>= or >) 0.
            if d2.is_zero() {
                if d1.is_negative() || (d1.is_zero() && !wins_tie) {
                    finite_empty = true;
                }
                continue;
            }
            let root = -&d1 / &d2;
            if d2.is_positive() {
                // λ >= root (closed iff ties go to e).
                match root.cmp(&lo.0) {
                    Ordering::Greater => lo = (root, wins_tie),
                    Ordering::Equal => lo.1 &= wins_tie,
                    Ordering::Less => {}
                }
            } else {
                let cand = (root, wins_tie);
                hi = Some(match hi {
                    None => cand,
                    Some(h) => match cand.0.cmp(&h.0) {
                        Ordering::Less => cand,
                        Ordering::Equal => (h.0, h.1 && cand.1),
                        Ordering::Greater => h,
                    },
                });
            }
        }
    }
    let iv = if finite_empty {
        None
    } else {
        let iv = match hi {
            Some((h, hc)) => SlopeInterval { lo: Slope::Finite(lo.0), lo_closed: lo.1, hi: Slope::Finite(h), hi_closed: hc },
            None => SlopeInterval { lo: Slope::Finite(lo.0), lo_closed: lo.1, hi: Slope::Infinity, hi_closed: inf_ok },
        };
        (!iv.is_empty()).then_some(iv)
    };
    match iv {
        Some(iv) => Ok(iv),
        None if inf_ok => Ok(SlopeInterval::point(Slope::Infinity)),
        None => Err(Error::Invariant("basis marks are not simultaneously leading for any V-form".into())),
    }
}

/// Minimal reduced standard basis of the ideal spanned by `gens` for `<^h_L`.
pub fn basis_at(gens: &[DiffOp], sig: Signature, l: &VForm, budget: Budget) -> Result<MarkedBasis> {
    let ord = OrderSpec::hom_v(l, sig).compile(sig)?;
    reduced_basis(gens, &ord, budget).map_err(|e| match e {
        Error::Budget(msg) => Error::Budget(format!("at {l}: {msg}")),
        other => other,
    })
}

fn saturate_seed(seed: &[DiffOp], budget: Budget) -> Result<MarkedBasis> {
    let sig = seed.first().map(|g| g.signature()).ok_or(Error::Precondition("empty seed".into()))?;
    let ord = tiebreak_order(sig)?;
    let start = reduced_basis(seed, &ord, budget)?;
    z_saturate(&start, budget)
}

/// Sweep `[0, ∞]` from `λ = 0` upward and return the cells, the skeleton
/// and the saturated basis.
pub fn traverse_fan(seed: &[DiffOp], budget: Budget) -> Result<VGroebnerFan> {
    let saturated = saturate_seed(seed, budget)?;
    let sig = saturated.signature();
    let gens: Vec<DiffOp> = saturated.ops().cloned().collect();
    match sig.p {
        1 => {
            let v1 = VForm::from_ints(&[1]);
            let basis = basis_at(&gens, sig, &v1, budget)?;
            let cell = FanCell { interval: SlopeInterval::point(Slope::Finite(Rat::zero())), dim: 1, basis, witness: v1.clone() };
            return Ok(VGroebnerFan { cells: vec![cell], skeleton: vec![v1], saturated });
        }
        2 => {}
        p => return Err(Error::Unsupported(format!("fan traversal needs p = 1 or 2, got p = {p}"))),
    }

    let mut cells = Vec::new();
    let mut pos = Slope::Finite(Rat::zero());
    let mut inclusive = true;
    loop {
        if inclusive {
            let form = pos.form();
            let basis = basis_at(&gens, sig, &form, budget)?;
            let iv = cone_of_basis(&basis)?;
            if !(iv.lo == pos && iv.lo_closed) {
                return Err(Error::Invariant(format!("cell of slope {pos} starts at {iv}")));
            }
            if iv.is_point() {
                cells.push(FanCell { interval: iv, dim: 1, basis, witness: form });
                if pos == Slope::Infinity {
                    break;
                }
                inclusive = false;
            } else {
                let ws = iv.witness_slope();
                let witness = ws.form();
                let basis = if ws == pos { basis } else { basis.relabel(OrderSpec::hom_v(&witness, sig).compile(sig)?) };
                let (next, closed) = (iv.hi.clone(), iv.hi_closed);
                cells.push(FanCell { interval: iv, dim: 2, basis, witness });
                if next == Slope::Infinity && closed {
                    break;
                }
                pos = next;
                inclusive = !closed;
            }
        } else {
            let Slope::Finite(l) = &pos else { unreachable!("no cells beyond infinity") };
            let beyond = Slope::Finite(l + Rat::one()).form();
            let lim = OrderSpec::ConeLimit { l: pos.form(), direction: beyond }.compile(sig)?;
            let lim_basis = reduced_basis(&gens, &lim, budget)?;
            let iv = cone_of_basis(&lim_basis)?;
            if !(iv.lo == pos && !iv.lo_closed) || iv.is_point() {
                return Err(Error::Invariant(format!("limit basis beyond slope {pos} spans {iv}")));
            }
            let witness = iv.witness_slope().form();
            let basis = basis_at(&gens, sig, &witness, budget)?;
            if !basis.same_marked_elements(&lim_basis) {
                return Err(Error::Invariant(format!("limit basis beyond slope {pos} differs from the basis at {witness}")));
            }
            let (next, closed) = (iv.hi.clone(), iv.hi_closed);
            cells.push(FanCell { interval: iv, dim: 2, basis, witness });
            if next == Slope::Infinity && closed {
                break;
            }
            pos = next;
            inclusive = !closed;
        }
    }
    let mut fan = VGroebnerFan { cells, skeleton: Vec::new(), saturated };
    fan.skeleton = skeleton(&fan);
    Ok(fan)
}

/// Primitive generators of all cell closures, with `V1` and `V2`, by slope.
pub fn skeleton(fan: &VGroebnerFan) -> Vec<VForm> {
    if fan.signature().p == 1 {
        return vec![VForm::from_ints(&[1])];
    }
    let mut slopes: Vec<Slope> = vec![Slope::Finite(Rat::zero()), Slope::Infinity];
    for c in &fan.cells {
        slopes.push(c.interval.lo.clone());
        slopes.push(c.interval.hi.clone());
    }
    slopes.sort();
    slopes.dedup();
    slopes.iter().map(Slope::form).collect()
}

/// The limit-order statement on a cell closure: for every element, the
/// `⊴_L^σ` leader (direction = witness) is the `<^h` leader at three forms of
/// `]L, L_σ]`, and `ord^L(Q_j) = L(mark)`.
pub fn proposition_check(cell: &FanCell, l: &VForm) -> Result<bool> {
    let sig = cell.basis.signature();
    if sig.p != 2 || l.p() != 2 {
        return Err(Error::Unsupported("proposition_check needs p = 2".into()));
    }
    if l.is_zero() || !cell.interval.closure_contains(&Slope::of(l)) {
        return Err(Error::Precondition(format!("{l} is not in the closure of the cell {}", cell.interval)));
    }
    let w = &cell.witness;
    // Scale both forms so that neither dominates the segment.
    let lp = l.primitive()?;
    let wp = w.primitive()?;
    let samples = [Rat::one(), Rat::new(1.into(), 2.into()), Rat::new(1.into(), 10.into())];
    let limit = if lp.same_ray(&wp) { None } else { Some(OrderSpec::ConeLimit { l: lp.clone(), direction: wp.clone() }.compile(sig)?) };
    for (q, mark) in cell.basis.elements() {
        let lead = match &limit {
            Some(o) => o.leading_exponent(q)?,
            None => OrderSpec::hom_v(&lp, sig).compile(sig)?.leading_exponent(q)?,
        };
        for eps in &samples {
            let mix = lp.combine(&(Rat::one() - eps), &wp, eps);
            let ord = OrderSpec::hom_v(&mix, sig).compile(sig)?;
            if ord.leading_exponent(q)? != lead {
                return Ok(false);
            }
        }
        if l_order(q, &lp) != Some(lp.eval(sig, mark)) {
            return Ok(false);
        }
    }
    Ok(true)
}
