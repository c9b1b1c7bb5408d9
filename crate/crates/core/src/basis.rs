//! The tight-orbit basis: every finitely supported vector is a unique
//! finite combination of characteristic vectors of tight orbits.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::atoms::Atom;
use crate::error::{Error, Result};
use crate::linvec::{FinVector, SymVector};
use crate::orbits::{OrbitSet, Pattern, TightFamilies, TightOrbit};
use crate::ring::{Ring, RingElem};

/// Coordinates of a vector over the tight-orbit basis.
#[derive(Clone, Debug)]
pub struct BasisCoords {
    pub families: Arc<TightFamilies>,
    pub coords: FinVector,
}

/// One orbit of a domain, viewed as a standalone component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainComponent {
    pub orbit: usize,
    pub id: String,
    pub arity: usize,
    pub group_order: usize,
    /// Equivariant orbits are already tight for the empty support, so the
    /// tightening bijection is the identity.
    pub tightening_is_identity: bool,
}

/// Splits a domain into its orbits. A vector over the union is the tuple of
/// its restrictions, and the basis of the union is the union of the
/// per-orbit bases.
pub fn normalize_domain(set: &OrbitSet) -> Vec<DomainComponent> {
    set.orbits()
        .iter()
        .enumerate()
        .map(|(i, o)| DomainComponent {
            orbit: i,
            id: o.id.clone(),
            arity: o.arity,
            group_order: o.group.order(),
            tightening_is_identity: true,
        })
        .collect()
}

/// `1_O` for a tight orbit, written over S-orbits of `S ∪ sup(O)`.
pub fn expand_tight(domain: &Arc<OrbitSet>, ring: &Ring, t: &TightOrbit, s: &BTreeSet<Atom>) -> SymVector {
    let own = t.support();
    let support: BTreeSet<Atom> = s.union(&own).copied().collect();
    let entries = domain
        .refine(&t.pattern, &own, &support)
        .into_iter()
        .map(|p| (p, ring.one()))
        .collect();
    SymVector::from_entries(domain.clone(), ring.clone(), support, entries).expect("refined patterns are canonical")
}

/// Coordinates of `v`: repeatedly take a nonzero S-orbit of largest
/// dimension, read it as a tight orbit and subtract its multiple.
pub fn decompose(families: &Arc<TightFamilies>, v: &SymVector) -> Result<BasisCoords> {
    if **v.domain() != *families.source {
        return Err(Error::DomainMismatch("vector is not over the families' source set".into()));
    }
    let domain = v.domain();
    let ring = v.ring();
    let s = v.support();
    let mut work: BTreeMap<(Reverse<usize>, Pattern), RingElem> =
        v.entries().iter().map(|(p, c)| ((Reverse(p.dim()), p.clone()), c.clone())).collect();
    let mut coords = FinVector::zero(families.set.clone(), ring.clone());
    while let Some(((_, p), c)) = work.pop_first() {
        let tight = TightOrbit::new(p.clone());
        coords.add_at(&families.from_tight(&tight), &c);
        for q in domain.refine(&p, &tight.support(), s) {
            if q == p {
                continue;
            }
            let key = (Reverse(q.dim()), q);
            let left = work.get(&key).cloned().unwrap_or_else(|| ring.zero());
            let next = &left - &c;
            if next.is_zero() {
                work.remove(&key);
            } else {
                work.insert(key, next);
            }
        }
    }
    Ok(BasisCoords {
        families: families.clone(),
        coords,
    })
}

/// `Σ c(O)·1_O` over the union of the orbits' supports.
pub fn recombine(c: &BasisCoords) -> SymVector {
    let domain = c.families.source.clone();
    let ring = c.coords.ring.clone();
    let support = c.coords.atoms();
    let mut out = SymVector::zero(domain.clone(), ring.clone()).refine(&support);
    for (e, coef) in c.coords.entries() {
        let t = c.families.to_tight(e);
        out = out
            .add(&expand_tight(&domain, &ring, &t, &support).scale(coef))
            .expect("same domain and ring");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{atom_set, PermGroup};
    use crate::orbits::{Entry, OrbitDecl};
    use proptest::prelude::*;

    fn a(i: u32) -> Entry {
        Entry::Atom(Atom::new(i))
    }
    fn x(i: u32) -> Entry {
        Entry::Var(i)
    }
    fn z(n: i64) -> RingElem {
        Ring::Integer.from_int(n)
    }

    fn pairs() -> Arc<TightFamilies> {
        Arc::new(TightFamilies::new(Arc::new(OrbitSet::single(OrbitDecl::tuples("C", 2)))).unwrap())
    }

    #[test]
    fn expand_examples() {
        let f = pairs();
        let d = f.source.clone();
        let all = TightOrbit::new(d.full_pattern(0));
        let v = expand_tight(&d, &Ring::Integer, &all, &atom_set(&[1]));
        let pats: BTreeSet<Vec<Entry>> = v.entries().keys().map(|p| p.entries.clone()).collect();
        assert_eq!(
            pats,
            [vec![a(1), x(0)], vec![x(0), a(1)], vec![x(0), x(1)]].into_iter().collect()
        );
        let point = TightOrbit::new(d.pattern(0, vec![a(1), a(2)]).unwrap());
        assert_eq!(expand_tight(&d, &Ring::Integer, &point, &atom_set(&[1, 2])).entries().len(), 1);
        let first = TightOrbit::new(d.pattern(0, vec![a(1), x(0)]).unwrap());
        assert_eq!(expand_tight(&d, &Ring::Integer, &first, &atom_set(&[1])).entries().len(), 1);
    }

    /// Closed formula on pairs with S = {1, 2}: v = c·1 + c₁·1_{1_} + …,
    /// derived by hand from the values on each S-orbit.
    #[test]
    fn decompose_two_plus_three() {
        let f = pairs();
        let d = f.source.clone();
        let s = atom_set(&[1, 2]);
        let v = SymVector::constant(d.clone(), Ring::Integer, z(2))
            .add(&expand_tight(&d, &Ring::Integer, &TightOrbit::new(d.pattern(0, vec![a(1), x(0)]).unwrap()), &s).scale(&z(3)))
            .unwrap();
        let c = decompose(&f, &v).unwrap();
        assert_eq!(c.coords.len(), 2);
        let all = f.from_tight(&TightOrbit::new(d.full_pattern(0)));
        let first = f.from_tight(&TightOrbit::new(d.pattern(0, vec![a(1), x(0)]).unwrap()));
        assert_eq!(c.coords.get(&all), z(2));
        assert_eq!(c.coords.get(&first), z(3));
        assert_eq!(recombine(&c), v);
    }

    #[test]
    fn trivial_decompositions() {
        let f = pairs();
        let d = f.source.clone();
        assert!(decompose(&f, &SymVector::zero(d.clone(), Ring::Integer)).unwrap().coords.is_zero());
        let t = TightOrbit::new(d.pattern(0, vec![x(0), a(4)]).unwrap());
        let c = decompose(&f, &expand_tight(&d, &Ring::Integer, &t, &atom_set(&[4, 5]))).unwrap();
        assert_eq!(c.coords.len(), 1);
        assert_eq!(c.coords.get(&f.from_tight(&t)), z(1));
    }

    #[test]
    fn components() {
        let set = OrbitSet::new(vec![OrbitDecl::tuples("A", 1), OrbitDecl::new("B", PermGroup::symmetric(2).unwrap())]).unwrap();
        let comps = normalize_domain(&set);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[1].group_order, 2);
    }

    /// Values of 1_O on every S-orbit, read off by the closed formula for
    /// pairs: v = v(O••)·1 + Σ_α (v(O_α•) − v(O••))·1_{α_} + ….
    fn closed_formula(v: &SymVector) -> SymVector {
        let d = v.domain().clone();
        let s = v.support().clone();
        let ring = Ring::Integer;
        let val = |e: Vec<Entry>| v.value_at(&d.pattern(0, e).unwrap());
        let base = val(vec![x(0), x(1)]);
        let mut out = SymVector::constant(d.clone(), ring.clone(), base.clone());
        for &al in &s {
            let l = &val(vec![Entry::Atom(al), x(0)]) - &base;
            let r = &val(vec![x(0), Entry::Atom(al)]) - &base;
            let lt = TightOrbit::new(d.pattern(0, vec![Entry::Atom(al), x(0)]).unwrap());
            let rt = TightOrbit::new(d.pattern(0, vec![x(0), Entry::Atom(al)]).unwrap());
            out = out.add(&expand_tight(&d, &ring, &lt, &s).scale(&l)).unwrap();
            out = out.add(&expand_tight(&d, &ring, &rt, &s).scale(&r)).unwrap();
        }
        for &al in &s {
            for &be in &s {
                if al == be {
                    continue;
                }
                let point = val(vec![Entry::Atom(al), Entry::Atom(be)]);
                let corr = &(&(&point - &val(vec![Entry::Atom(al), x(0)])) - &val(vec![x(0), Entry::Atom(be)])) + &base;
                let t = TightOrbit::new(d.pattern(0, vec![Entry::Atom(al), Entry::Atom(be)]).unwrap());
                out = out.add(&expand_tight(&d, &ring, &t, &s).scale(&corr)).unwrap();
            }
        }
        out
    }

    fn arb_pair_vector() -> impl Strategy<Value = SymVector> {
        (proptest::collection::btree_set(1u32..=5, 0..=3), proptest::collection::vec(-3i64..=3, 16)).prop_map(|(s, cs)| {
            let d = pairs().source.clone();
            let s: BTreeSet<Atom> = s.into_iter().map(Atom::new).collect();
            let entries = d.s_orbits(0, &s).into_iter().zip(cs).map(|(p, c)| (p, z(c))).collect();
            SymVector::from_entries(d, Ring::Integer, s, entries).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_formula_matches_decomposition(v in arb_pair_vector()) {
            prop_assert_eq!(closed_formula(&v), v.clone());
            prop_assert_eq!(recombine(&decompose(&pairs(), &v).unwrap()), v);
        }

        #[test]
        fn emitted_orbits_stay_inside_the_support(v in arb_pair_vector()) {
            let f = pairs();
            let c = decompose(&f, &v).unwrap();
            for e in c.coords.entries().keys() {
                prop_assert!(f.to_tight(e).support().is_subset(v.support()));
            }
        }
    }
}
