//! Fraction-free sparse elimination over ℤ with combination tracking.
//!
//! Each stored pivot vector remembers which input columns it is built from,
//! so a reduced right-hand side yields an explicit solution.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Rat;

type SparseVec = BTreeMap<usize, BigInt>;

const RHS: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Tracked {
    entries: SparseVec,
    comb: SparseVec,
}

impl Tracked {
    fn lead(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    fn normalize(&mut self) {
        let mut g = BigInt::zero();
        for v in self.entries.values().chain(self.comb.values()) {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        for v in self.entries.values_mut().chain(self.comb.values_mut()) {
            *v /= &g;
        }
    }

    /// `self ← a·self − b·other`.
    fn combine(&mut self, a: &BigInt, b: &BigInt, other: &Tracked) {
        fn lin(x: &mut SparseVec, a: &BigInt, b: &BigInt, y: &SparseVec) {
            if !a.is_one() {
                for v in x.values_mut() {
                    *v *= a;
                }
            }
            for (k, w) in y {
                let slot = x.entry(*k).or_insert_with(BigInt::zero);
                *slot -= b * w;
                if slot.is_zero() {
                    x.remove(k);
                }
            }
        }
        lin(&mut self.entries, a, b, &other.entries);
        lin(&mut self.comb, a, b, &other.comb);
    }
}

/// Row-echelon form of a growing set of integer columns.
#[derive(Clone, Debug, Default)]
pub(crate) struct Echelon {
    pivots: BTreeMap<usize, Tracked>,
    scales: BTreeMap<usize, Rat>,
}

fn integerize(v: &BTreeMap<usize, Rat>) -> (SparseVec, Rat) {
    let mut l = BigInt::one();
    for c in v.values() {
        l = l.lcm(c.denom());
    }
    let lr = Rat::from_integer(l.clone());
    let ints = v.iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (*k, (c * &lr).to_integer())).collect();
    (ints, lr)
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Leading row indices of the pivots.
    pub fn leads(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    fn reduce(&self, t: &mut Tracked) {
        while let Some(lead) = t.lead() {
            let Some(p) = self.pivots.get(&lead) else { break };
            let a = &p.entries[&lead];
            let b = &t.entries[&lead];
            let g = a.gcd(b);
            let (mut fa, mut fb) = (a / &g, b / &g);
            if fa.is_negative() {
                fa = -fa;
                fb = -fb;
            }
            t.combine(&fa, &fb, p);
            t.normalize();
        }
    }

    /// Add column `id`. Returns false if it was dependent on earlier columns.
    pub fn insert(&mut self, id: usize, col: &BTreeMap<usize, Rat>) -> bool {
        assert!(id != RHS);
        let (entries, scale) = integerize(col);
        self.scales.insert(id, scale);
        let mut t = Tracked { entries, comb: SparseVec::from([(id, BigInt::one())]) };
        self.reduce(&mut t);
        match t.lead() {
            Some(l) => {
                self.pivots.insert(l, t);
                true
            }
            None => false,
        }
    }

    /// Coefficients `c` with `b = Σ c_id · col_id`, if `b` is in the span.
    pub fn solve(&self, b: &BTreeMap<usize, Rat>) -> Option<BTreeMap<usize, Rat>> {
        let (entries, bscale) = integerize(b);
        let mut t = Tracked { entries, comb: SparseVec::from([(RHS, BigInt::one())]) };
        self.reduce(&mut t);
        if t.lead().is_some() {
            return None;
        }
        // 0 = f·b_int + Σ c·col_int, with b_int = s_b·b and col_int = s_c·col.
        let f = Rat::from_integer(t.comb.get(&RHS).cloned().unwrap_or_else(BigInt::zero));
        if f.is_zero() {
            return None;
        }
        let mut out = BTreeMap::new();
        for (id, c) in &t.comb {
            if *id == RHS {
                continue;
            }
            let coef = -Rat::from_integer(c.clone()) * &self.scales[id] / (&f * &bscale);
            out.insert(*id, coef);
        }
        Some(out)
    }
}
