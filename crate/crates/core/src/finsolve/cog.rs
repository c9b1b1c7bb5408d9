//! Cogs and the operator Δ.
//!
//! For `w` supported on tuples over a k-set `A` and a bijection `σ: A → S`
//! with `S` disjoint from `A`, the cog is `Σ_{I ⊆ A} (−1)^{|I|} σ_I(w)`
//! where `σ_I` moves exactly the atoms of `I`. It vanishes on every tuple
//! that misses some atom of `A ∪ S` in the sense made precise by the
//! cancellation property tested below.

use std::collections::{BTreeMap, BTreeSet};

use crate::atoms::{Atom, Nominal};
use crate::error::{Error, Result};
use crate::ring::{Ring, RingElem};

use super::instance::InstVec;

/// A strict total order on a finite set of atoms, listed from least to
/// greatest.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TotalOrder(pub Vec<Atom>);

impl TotalOrder {
    /// The natural order on `atoms`.
    pub fn natural<'a, I: IntoIterator<Item = &'a Atom>>(atoms: I) -> TotalOrder {
        let set: BTreeSet<Atom> = atoms.into_iter().copied().collect();
        TotalOrder(set.into_iter().collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    /// The atoms of `set` in increasing order. Atoms outside the order come
    /// last, in natural order.
    pub fn sort(&self, set: &BTreeSet<Atom>) -> Vec<Atom> {
        let mut out: Vec<Atom> = self.0.iter().copied().filter(|a| set.contains(a)).collect();
        out.extend(set.iter().copied().filter(|a| !self.0.contains(a)));
        out
    }

    pub fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> TotalOrder {
        TotalOrder(self.0.iter().map(|&a| f(a)).collect())
    }
}

/// Every `(sign, σ_I)` for `I ⊆ dom(σ)`; `σ_I` is given as a map on `dom(σ)`
/// (identity outside `I`).
pub fn partial_moves(sigma: &BTreeMap<Atom, Atom>) -> Vec<(bool, BTreeMap<Atom, Atom>)> {
    let dom: Vec<Atom> = sigma.keys().copied().collect();
    (0u32..(1 << dom.len()))
        .map(|mask| {
            let map = dom
                .iter()
                .enumerate()
                .map(|(i, &a)| (a, if mask & (1 << i) != 0 { sigma[&a] } else { a }))
                .collect();
            (mask.count_ones() % 2 == 1, map)
        })
        .collect()
}

/// The cog of `w` under `σ: A → S`.
pub fn cog(w: &InstVec, sigma: &BTreeMap<Atom, Atom>, ring: &Ring) -> Result<InstVec> {
    let a: BTreeSet<Atom> = sigma.keys().copied().collect();
    let s: BTreeSet<Atom> = sigma.values().copied().collect();
    let k = a.len();
    if s.len() != k {
        return Err(Error::Precondition("cog needs a bijection".into()));
    }
    if !a.is_disjoint(&s) {
        return Err(Error::Precondition("cog needs disjoint source and target sets".into()));
    }
    for c in w.entries().keys() {
        if c.arity() != k || c.atom_set() != a {
            return Err(Error::Precondition("cog input must live on tuples over A".into()));
        }
    }
    let mut out = InstVec::new();
    let minus = ring.from_int(-1);
    for (odd, map) in partial_moves(sigma) {
        let moved = w.rename(&|x| *map.get(&x).unwrap_or(&x));
        out.add_scaled(&moved, &if odd { minus.clone() } else { ring.one() });
    }
    Ok(out)
}

/// The bijection from `a_sorted` onto `s_sorted` matching positions.
pub fn order_map(a_sorted: &[Atom], s_sorted: &[Atom]) -> BTreeMap<Atom, Atom> {
    a_sorted.iter().copied().zip(s_sorted.iter().copied()).collect()
}

/// `Δ^< w`: the sum over atom sets `A` of the k-component of `w` of the cog
/// of `w↾A` under the order-preserving bijection `A → S`.
///
/// `s` must be sorted; its length fixes `k`.
pub fn delta(w: &InstVec, s: &[Atom], order: &TotalOrder, ring: &Ring) -> Result<InstVec> {
    let k = s.len();
    let s_set: BTreeSet<Atom> = s.iter().copied().collect();
    if s_set.len() != k {
        return Err(Error::Precondition("S must consist of distinct atoms".into()));
    }
    let main = w.component(k);
    if !main.support().is_disjoint(&s_set) {
        return Err(Error::Precondition("S must avoid the atoms of w".into()));
    }
    let mut out = InstVec::new();
    for a in main.atom_sets(k) {
        let sigma = order_map(&order.sort(&a), s);
        out.add_scaled(&cog(&main.restrict_to_set(&a), &sigma, ring)?, &ring.one());
    }
    Ok(out)
}

/// `ι`-style sign helper: `(−1)^{odd}`.
pub fn sign(odd: bool, ring: &Ring) -> RingElem {
    if odd {
        ring.from_int(-1)
    } else {
        ring.one()
    }
}
