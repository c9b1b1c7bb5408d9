//! One dimension-reduction step.
//!
//! A fresh k-set `S` is chosen, every representative `v` is replaced by the
//! finitely many vectors `v − Δ^< ṽ` (one per relevant order), the target by
//! `t − Δ^{<0} t̃`, and main-component tuples, which now all meet `S`, are
//! renamed to the tuple of their non-`S` atoms with the positions of `S`
//! folded into the slot.

use std::collections::{BTreeMap, BTreeSet};

use crate::atoms::Atom;
use crate::error::{Error, Result};

use super::cog::{delta, TotalOrder};
use super::instance::{Coord, InstVec, Instance};

/// Bookkeeping of a reduction, enough to pull solutions back.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// The chosen set, ascending.
    pub s: Vec<Atom>,
    /// For each new representative: its parent and the order that made it.
    pub parents: Vec<(usize, TotalOrder)>,
    /// Number of distinct orders tried per parent.
    pub orders_per_rep: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum SlotKey {
    /// A main-component tuple: where `S` sat (index into `S` per position).
    Main(Vec<Option<usize>>, usize),
    Other(usize, usize),
}

/// The `k` smallest atoms not in `used`.
pub fn fresh_set(used: &BTreeSet<Atom>, k: usize) -> Vec<Atom> {
    (1u32..).map(Atom::new).filter(|a| !used.contains(a)).take(k).collect()
}

/// The order signatures of `w`: one order per distinct choice of induced
/// orders on `w`'s atom sets that some total order realizes.
pub fn relevant_orders(w: &InstVec, k: usize) -> Vec<TotalOrder> {
    let sets: Vec<Vec<Atom>> = w.atom_sets(k).into_iter().map(|a| a.into_iter().collect()).collect();
    let atoms: Vec<Atom> = w.component(k).support_vec();
    let mut out = Vec::new();
    let mut chains: Vec<Vec<Atom>> = Vec::new();
    search(&sets, &atoms, &mut chains, &mut out);
    out
}

fn search(sets: &[Vec<Atom>], atoms: &[Atom], chains: &mut Vec<Vec<Atom>>, out: &mut Vec<TotalOrder>) {
    if chains.len() == sets.len() {
        out.push(topo(atoms, chains).expect("checked acyclic"));
        return;
    }
    for chain in permutations(&sets[chains.len()]) {
        chains.push(chain);
        if topo(atoms, chains).is_some() {
            search(sets, atoms, chains, out);
        }
        chains.pop();
    }
}

fn permutations(xs: &[Atom]) -> Vec<Vec<Atom>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// A total order extending all chains (smallest available atom first), or
/// `None` on a cycle.
fn topo(atoms: &[Atom], chains: &[Vec<Atom>]) -> Option<TotalOrder> {
    let mut succ: BTreeMap<Atom, BTreeSet<Atom>> = BTreeMap::new();
    let mut indeg: BTreeMap<Atom, usize> = atoms.iter().map(|&a| (a, 0)).collect();
    for c in chains {
        for w in c.windows(2) {
            if succ.entry(w[0]).or_default().insert(w[1]) {
                *indeg.get_mut(&w[1]).expect("chain atoms are listed") += 1;
            }
        }
    }
    let mut ready: BTreeSet<Atom> = indeg.iter().filter(|(_, d)| **d == 0).map(|(a, _)| *a).collect();
    let mut order = Vec::with_capacity(atoms.len());
    while let Some(a) = ready.pop_first() {
        order.push(a);
        for b in succ.get(&a).into_iter().flatten() {
            let d = indeg.get_mut(b).expect("listed");
            *d -= 1;
            if *d == 0 {
                ready.insert(*b);
            }
        }
    }
    (order.len() == atoms.len()).then_some(TotalOrder(order))
}

impl InstVec {
    fn support_vec(&self) -> Vec<Atom> {
        let mut s = BTreeSet::new();
        for c in self.entries().keys() {
            s.extend(c.tuple.iter().copied());
        }
        s.into_iter().collect()
    }
}

/// Performs the reduction. The instance should be locally solvable; the
/// result is then equisolvable and of strictly smaller atom dimension.
pub fn reduce_dimension(inst: &Instance) -> Result<(Instance, Reduction)> {
    let k = inst.max_arity();
    if k == 0 {
        return Err(Error::Precondition("nothing to reduce in atom dimension 0".into()));
    }
    let ring = &inst.ring;
    let s = fresh_set(&inst.atoms(), k);

    let mut bars: Vec<InstVec> = Vec::new();
    let mut parents = Vec::new();
    let mut orders_per_rep = Vec::new();
    let mut seen = BTreeSet::new();
    for (pi, v) in inst.reps.iter().enumerate() {
        let main = v.component(k);
        let orders = relevant_orders(&main, k);
        orders_per_rep.push(orders.len());
        for ord in orders {
            let bar = v.sub(&delta(&main, &s, &ord, ring)?, ring);
            if bar.is_zero() || !seen.insert(bar.clone()) {
                continue;
            }
            bars.push(bar);
            parents.push((pi, ord));
        }
    }
    let t_main = inst.target.component(k);
    let t_bar = inst.target.sub(&delta(&t_main, &s, &TotalOrder::natural(&t_main.support_vec()), ring)?, ring);

    let key_of = |c: &Coord| -> Result<(Vec<Atom>, SlotKey)> {
        let theta: Vec<Option<usize>> = c.tuple.iter().map(|a| s.iter().position(|x| x == a)).collect();
        let rest: Vec<Atom> = c.tuple.iter().copied().filter(|a| !s.contains(a)).collect();
        if c.arity() == k {
            if rest.len() == k {
                return Err(Error::Verification("a main-component tuple avoids S after the reduction".into()));
            }
            Ok((rest, SlotKey::Main(theta, c.slot)))
        } else {
            if rest.len() != c.arity() {
                return Err(Error::Verification("a lower component meets S".into()));
            }
            Ok((rest, SlotKey::Other(c.arity(), c.slot)))
        }
    };

    let mut keys: BTreeMap<usize, BTreeSet<SlotKey>> = BTreeMap::new();
    for v in bars.iter().chain(std::iter::once(&t_bar)) {
        for c in v.entries().keys() {
            let (tuple, key) = key_of(c)?;
            keys.entry(tuple.len()).or_default().insert(key);
        }
    }
    let index: BTreeMap<(usize, SlotKey), usize> = keys
        .iter()
        .flat_map(|(ar, ks)| ks.iter().enumerate().map(move |(i, key)| ((*ar, key.clone()), i)))
        .collect();
    let map = |v: &InstVec| -> Result<InstVec> {
        let mut out = InstVec::new();
        for (c, x) in v.iter() {
            let (tuple, key) = key_of(c)?;
            let slot = index[&(tuple.len(), key)];
            out.add_at(Coord { tuple, slot }, x);
        }
        Ok(out)
    };
    let reps = bars.iter().map(map).collect::<Result<Vec<_>>>()?;
    let target = map(&t_bar)?;
    let widths = keys.iter().map(|(ar, ks)| (*ar, ks.len())).collect();
    let next = Instance::new(ring.clone(), widths, reps, target)?;
    if next.max_arity() >= k && !(next.reps.is_empty() && next.target.is_zero()) {
        return Err(Error::Verification("reduction did not lower the atom dimension".into()));
    }
    Ok((
        next,
        Reduction {
            s,
            parents,
            orders_per_rep,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::atoms;
    use crate::ring::{Ring, RingElem};

    fn one(ring: &Ring, t: &[u32], n: i64) -> InstVec {
        InstVec::from_entries([(Coord { tuple: atoms(t), slot: 0 }, ring.from_int(n))])
    }

    fn scalar(inst: &InstVec) -> Option<RingElem> {
        inst.get(&Coord { tuple: vec![], slot: 0 }).cloned()
    }

    #[test]
    fn unit_vector_against_two_points() {
        for ring in [Ring::Integer, Ring::Rational] {
            let mut t = one(&ring, &[1], 1);
            t.add_scaled(&one(&ring, &[2], 1), &ring.one());
            let inst = Instance::new(ring.clone(), [(1, 1)].into(), vec![one(&ring, &[1], 1)], t).unwrap();
            let (next, red) = reduce_dimension(&inst).unwrap();
            assert_eq!(red.s, atoms(&[3]));
            assert_eq!(next.max_arity(), 0);
            assert_eq!(next.reps.len(), 1);
            assert_eq!(scalar(&next.reps[0]), Some(ring.one()));
            assert_eq!(scalar(&next.target), Some(ring.from_int(2)));
            assert!(ring.solve_finite(&[vec![ring.one()]], &[ring.from_int(2)]).unwrap().is_some());
        }
    }

    #[test]
    fn doubled_unit_vector() {
        for (ring, solvable) in [(Ring::Integer, false), (Ring::Rational, true)] {
            let inst = Instance::new(ring.clone(), [(1, 1)].into(), vec![one(&ring, &[1], 2)], one(&ring, &[1], 1)).unwrap();
            let (next, _) = reduce_dimension(&inst).unwrap();
            assert_eq!(scalar(&next.reps[0]), Some(ring.from_int(2)));
            assert_eq!(scalar(&next.target), Some(ring.one()));
            let got = ring.solve_finite(&[vec![ring.from_int(2)]], &[ring.one()]).unwrap();
            assert_eq!(got.is_some(), solvable);
        }
    }

    #[test]
    fn zero_target_stays_zero() {
        let z = Ring::Integer;
        let inst = Instance::new(z.clone(), [(1, 1)].into(), vec![one(&z, &[1], 2)], InstVec::new()).unwrap();
        assert!(reduce_dimension(&inst).unwrap().0.target.is_zero());
    }

    #[test]
    fn orders_respect_shared_atoms() {
        let z = Ring::Integer;
        // atom sets {1,2}, {2,3}, {1,3}: 8 chain choices, 2 of them cyclic
        let mut w = one(&z, &[1, 2], 1);
        w.add_scaled(&one(&z, &[2, 3], 1), &z.one());
        w.add_scaled(&one(&z, &[1, 3], 1), &z.one());
        assert_eq!(relevant_orders(&w, 2).len(), 6);
        assert_eq!(relevant_orders(&InstVec::new(), 2).len(), 1);
    }

    #[test]
    fn pairs_reduce_to_lower_dimension() {
        let z = Ring::Integer;
        let mut v = one(&z, &[1, 2], 1);
        v.add_scaled(&one(&z, &[2, 1], 1), &z.one());
        let inst = Instance::new(z.clone(), [(2, 1)].into(), vec![v.clone()], v).unwrap();
        let (next, red) = reduce_dimension(&inst).unwrap();
        assert!(next.max_arity() < 2);
        assert_eq!(red.orders_per_rep, vec![2]);
    }
}
