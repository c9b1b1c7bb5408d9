//! Instances in canonical form: finitary vectors over components
//! `ATOMS^(k) → K^ℓ`, a finite list of representatives whose equivariant
//! closure spans the candidate columns, and a target.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::atoms::{act, Atom, FreshAtoms, Nominal};
use crate::basis::decompose;
use crate::error::{Error, Result};
use crate::linvec::{FinVector, SymMatrix, SymVector};
use crate::orbits::{Element, TightFamilies};
use crate::ring::{Ring, RingElem};

/// A coordinate: a non-repeating tuple (its length names the component) and
/// a slot below the component's width.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub tuple: Vec<Atom>,
    pub slot: usize,
}

impl Coord {
    pub fn arity(&self) -> usize {
        self.tuple.len()
    }

    pub fn atom_set(&self) -> BTreeSet<Atom> {
        self.tuple.iter().copied().collect()
    }
}

/// A finitary vector of an instance. Zero values are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstVec {
    entries: BTreeMap<Coord, RingElem>,
}

impl InstVec {
    pub fn new() -> InstVec {
        InstVec::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (Coord, RingElem)>>(it: I) -> InstVec {
        let mut v = InstVec::new();
        for (c, x) in it {
            v.add_at(c, &x);
        }
        v
    }

    pub fn add_at(&mut self, c: Coord, x: &RingElem) {
        if x.is_zero() {
            return;
        }
        match self.entries.get_mut(&c) {
            Some(y) => {
                let s = &*y + x;
                if s.is_zero() {
                    self.entries.remove(&c);
                } else {
                    *y = s;
                }
            }
            None => {
                self.entries.insert(c, x.clone());
            }
        }
    }

    pub fn get(&self, c: &Coord) -> Option<&RingElem> {
        self.entries.get(c)
    }

    pub fn entries(&self) -> &BTreeMap<Coord, RingElem> {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coord, &RingElem)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add_scaled(&mut self, other: &InstVec, q: &RingElem) {
        for (c, x) in &other.entries {
            self.add_at(c.clone(), &(x * q));
        }
    }

    pub fn scale(&self, q: &RingElem) -> InstVec {
        let mut out = InstVec::new();
        out.add_scaled(self, q);
        out
    }

    pub fn sub(&self, other: &InstVec, ring: &Ring) -> InstVec {
        let mut out = self.clone();
        out.add_scaled(other, &ring.from_int(-1));
        out
    }

    /// The part in the component of arity `k`.
    pub fn component(&self, k: usize) -> InstVec {
        InstVec {
            entries: self.entries.iter().filter(|(c, _)| c.arity() == k).map(|(c, x)| (c.clone(), x.clone())).collect(),
        }
    }

    /// Restriction to tuples whose atoms form exactly `set`.
    pub fn restrict_to_set(&self, set: &BTreeSet<Atom>) -> InstVec {
        InstVec {
            entries: self
                .entries
                .iter()
                .filter(|(c, _)| c.arity() == set.len() && c.atom_set() == *set)
                .map(|(c, x)| (c.clone(), x.clone()))
                .collect(),
        }
    }

    /// The atom sets of the tuples of arity `k` in the domain.
    pub fn atom_sets(&self, k: usize) -> BTreeSet<BTreeSet<Atom>> {
        self.entries.keys().filter(|c| c.arity() == k).map(|c| c.atom_set()).collect()
    }

    pub fn max_arity(&self) -> Option<usize> {
        self.entries.keys().map(|c| c.arity()).max()
    }
}

impl Nominal for InstVec {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        InstVec {
            entries: self
                .entries
                .iter()
                .map(|(c, x)| {
                    (
                        Coord {
                            tuple: c.tuple.rename(f),
                            slot: c.slot,
                        },
                        x.clone(),
                    )
                })
                .collect(),
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        for c in self.entries.keys() {
            out.extend(c.tuple.iter().copied());
        }
    }
}

impl fmt::Display for InstVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, x)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let t: Vec<String> = c.tuple.iter().map(|a| a.to_string()).collect();
            write!(f, "{x}·({})#{}", t.join(","), c.slot)?;
        }
        Ok(())
    }
}

/// Applies an injective atom map given on (at least) the atoms of `v`.
pub fn apply_map(v: &InstVec, map: &BTreeMap<Atom, Atom>) -> InstVec {
    v.rename(&|a| *map.get(&a).unwrap_or(&a))
}

/// An instance: is `target` a finite combination of renamings of `reps`?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub ring: Ring,
    /// Component arity ↦ width.
    pub widths: BTreeMap<usize, usize>,
    pub reps: Vec<InstVec>,
    pub target: InstVec,
}

impl Instance {
    /// Checks that every coordinate fits its component and that all values
    /// live in the instance ring.
    pub fn new(ring: Ring, widths: BTreeMap<usize, usize>, reps: Vec<InstVec>, target: InstVec) -> Result<Instance> {
        let inst = Instance { ring, widths, reps, target };
        for v in inst.reps.iter().chain(std::iter::once(&inst.target)) {
            for (c, x) in v.iter() {
                let w = inst.widths.get(&c.arity()).copied().unwrap_or(0);
                if c.slot >= w {
                    return Err(Error::DimensionMismatch(format!(
                        "slot {} outside component of arity {} (width {w})",
                        c.slot,
                        c.arity()
                    )));
                }
                let distinct = c.atom_set();
                if distinct.len() != c.arity() {
                    return Err(Error::MalformedPattern("repeated atom in an instance coordinate".into()));
                }
                if !inst.ring.contains(x) {
                    return Err(Error::DomainMismatch(format!("{x} is not an element of {}", inst.ring)));
                }
            }
        }
        Ok(inst)
    }

    /// Atom dimension: the largest component arity.
    pub fn max_arity(&self) -> usize {
        self.widths.keys().copied().max().unwrap_or(0)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = self.target.support();
        for r in &self.reps {
            r.collect_atoms(&mut out);
        }
        out
    }
}

/// Where a representative of a to-instance conversion came from.
#[derive(Clone, Debug)]
pub struct ColumnOrigin {
    pub column: Element,
}

/// The instance of a matrix-target pair together with the bookkeeping needed
/// to read solutions back as vectors over the columns.
#[derive(Clone, Debug)]
pub struct Conversion {
    pub instance: Instance,
    pub origins: Vec<ColumnOrigin>,
    /// Atoms fixed by the pinning step (the matrix support).
    pub pinned: Vec<Atom>,
    pub row_families: Arc<TightFamilies>,
}

/// Converts `(A, t)` into an instance with the same finitary solvability.
///
/// Columns are sampled once per `sup(A)`-orbit of `C`, rewritten in the
/// tight-orbit basis of `B`, and straightened (each class of a family's
/// group spreads its coefficient over all tuples in the class). When `A`
/// has a nonempty support `T`, the atoms of `T` move from the coordinates
/// into the slots (see `pin`).
impl Conversion {
    /// The instance label of an unpinned atom.
    pub fn label(&self, a: Atom) -> Atom {
        unpin(&self.pinned, a)
    }

    /// The atom carrying an instance label.
    pub fn atom_of(&self, label: Atom) -> Atom {
        repin(&self.pinned, label)
    }
}

pub fn to_instance(a: &SymMatrix, t: &SymVector) -> Result<Conversion> {
    if **a.rows() != **t.domain() {
        return Err(Error::DomainMismatch("target is not over the matrix rows".into()));
    }
    if a.ring() != t.ring() {
        return Err(Error::DomainMismatch("matrix and target use different rings".into()));
    }
    let ring = a.ring().clone();
    let families = Arc::new(TightFamilies::new(a.rows().clone())?);

    // slot of each family inside its arity component
    let mut widths: BTreeMap<usize, usize> = BTreeMap::new();
    let mut slot_of = Vec::new();
    for decl in families.set.orbits() {
        let w = widths.entry(decl.arity).or_insert(0);
        slot_of.push(*w);
        *w += 1;
    }

    let straighten = |coords: &FinVector| -> InstVec {
        let mut out = InstVec::new();
        for (e, x) in coords.entries() {
            let group = &families.set.orbit(e.orbit).group;
            for h in group.elements() {
                out.add_at(
                    Coord {
                        tuple: act(h, &e.tuple),
                        slot: slot_of[e.orbit],
                    },
                    x,
                );
            }
        }
        out
    };

    let mut used = a.support().clone();
    used.extend(t.support().iter().copied());
    let mut fresh = FreshAtoms::above(&used);
    let cols = a.cols();
    let mut reps = Vec::new();
    let mut origins = Vec::new();
    for o in 0..cols.len() {
        for p in cols.s_orbits(o, a.support()) {
            let (c0, _) = cols.instantiate(&p, &mut fresh);
            let column = a.column(&c0);
            let coords = decompose(&families, &column)?;
            reps.push(straighten(&coords.coords));
            origins.push(ColumnOrigin { column: c0 });
        }
    }
    let target = straighten(&decompose(&families, t)?.coords);

    let pinned: Vec<Atom> = a.support().iter().copied().collect();
    let instance = if pinned.is_empty() {
        Instance::new(ring, widths, reps, target)?
    } else {
        pin(ring, &pinned, reps, target)?
    };
    Ok(Conversion {
        instance,
        origins,
        pinned,
        row_families: families,
    })
}

/// Tags every coordinate with the tuple `T`: `(a, s)` becomes
/// `(a ∖ T ++ T, (θ(a), |a|, s))` where `θ` records where `T` occurred.
/// Removes the pinned atoms `T` from every coordinate, recording where they
/// sat in the slot, and relabels the remaining atoms onto all of `ATOMS`.
/// Permutations fixing `T` are exactly the permutations of `ATOMS \ T`, so
/// the representatives generate an equivariant set over the new labels and
/// the atom dimension does not grow.
fn pin(ring: Ring, tags: &[Atom], reps: Vec<InstVec>, target: InstVec) -> Result<Instance> {
    type Key = (Vec<Option<usize>>, usize);
    let key_of = |c: &Coord| -> (Vec<Atom>, Key) {
        let theta: Vec<Option<usize>> = c.tuple.iter().map(|a| tags.iter().position(|t| t == a)).collect();
        let tuple: Vec<Atom> = c.tuple.iter().copied().filter(|a| !tags.contains(a)).map(|a| unpin(tags, a)).collect();
        (tuple, (theta, c.slot))
    };
    let mut keys: BTreeMap<usize, BTreeSet<Key>> = BTreeMap::new();
    for v in reps.iter().chain(std::iter::once(&target)) {
        for c in v.entries().keys() {
            let (tuple, key) = key_of(c);
            keys.entry(tuple.len()).or_default().insert(key);
        }
    }
    let index: BTreeMap<(usize, Key), usize> = keys
        .iter()
        .flat_map(|(ar, ks)| ks.iter().enumerate().map(move |(i, k)| ((*ar, k.clone()), i)))
        .collect();
    let widths = keys.iter().map(|(ar, ks)| (*ar, ks.len())).collect();
    let map = |v: &InstVec| -> InstVec {
        InstVec::from_entries(v.iter().map(|(c, x)| {
            let (tuple, key) = key_of(c);
            let slot = index[&(tuple.len(), key)];
            (Coord { tuple, slot }, x.clone())
        }))
    };
    let reps = reps.iter().map(map).collect();
    let target = map(&target);
    Instance::new(ring, widths, reps, target)
}

/// The order-preserving bijection `ATOMS \ tags → ATOMS` (`tags` sorted).
fn unpin(tags: &[Atom], a: Atom) -> Atom {
    Atom::new(a.id() - tags.iter().filter(|t| **t < a).count() as u32)
}

/// Its inverse.
fn repin(tags: &[Atom], b: Atom) -> Atom {
    let mut id = b.id();
    for t in tags {
        if t.id() <= id {
            id += 1;
        }
    }
    Atom::new(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::atoms;

    pub(crate) fn c(t: &[u32], slot: usize) -> Coord {
        Coord { tuple: atoms(t), slot }
    }

    #[test]
    fn instvec_arithmetic_drops_zeros() {
        let z = Ring::Integer;
        let mut v = InstVec::new();
        v.add_at(c(&[1, 2], 0), &z.from_int(2));
        v.add_at(c(&[1, 2], 0), &z.from_int(-2));
        assert!(v.is_zero());
        v.add_at(c(&[3], 0), &z.from_int(1));
        let w = v.scale(&z.from_int(3));
        assert_eq!(w.get(&c(&[3], 0)), Some(&z.from_int(3)));
        assert!(w.sub(&w, &z).is_zero());
    }

    #[test]
    fn instance_validation() {
        let z = Ring::Integer;
        let v = InstVec::from_entries([(c(&[1], 1), z.from_int(1))]);
        assert!(Instance::new(z.clone(), [(1, 1)].into(), vec![v.clone()], InstVec::new()).is_err());
        assert!(Instance::new(z, [(1, 2)].into(), vec![v], InstVec::new()).is_ok());
    }
}
