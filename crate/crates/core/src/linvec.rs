//! Finitary and finitely supported vectors, symbolic matrices, and the
//! products between them.
//!
//! A [`SymVector`] with support `S` stores one value per S-orbit of its
//! domain (absent orbits are zero). A [`SymMatrix`] does the same with
//! S-orbits of `B × C`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::atoms::{act, Atom, FreshAtoms, Nominal};
use crate::error::{Error, Result};
use crate::orbits::{Element, Entry, OrbitSet, Pattern, ProductPattern};
use crate::ring::{Ring, RingElem};

fn same_domain(a: &Arc<OrbitSet>, b: &Arc<OrbitSet>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::DomainMismatch("vectors live over different orbit sets".into()))
    }
}

fn same_ring(a: &Ring, b: &Ring) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!("rings {a} and {b} differ")))
    }
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, RingElem>, k: K, c: &RingElem) {
    if c.is_zero() {
        return;
    }
    match map.entry(k) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c.clone());
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// A vector that is zero outside finitely many elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinVector {
    pub domain: Arc<OrbitSet>,
    pub ring: Ring,
    entries: BTreeMap<Element, RingElem>,
}

impl FinVector {
    pub fn zero(domain: Arc<OrbitSet>, ring: Ring) -> FinVector {
        FinVector {
            domain,
            ring,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `c` at `e` (canonicalized first).
    pub fn add_at(&mut self, e: &Element, c: &RingElem) {
        let e = self.domain.canonical_element(e);
        add_into(&mut self.entries, e, c);
    }

    pub fn get(&self, e: &Element) -> RingElem {
        let e = self.domain.canonical_element(e);
        self.entries.get(&e).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn entries(&self) -> &BTreeMap<Element, RingElem> {
        &self.entries
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

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.entries.keys().flat_map(|e| e.tuple.iter().copied()).collect()
    }

    /// The same vector as a symbolic vector supported by its atoms.
    pub fn to_sym(&self) -> SymVector {
        let support = self.atoms();
        let entries = self
            .entries
            .iter()
            .map(|(e, c)| (Pattern::from_element(e), c.clone()))
            .collect();
        SymVector {
            domain: self.domain.clone(),
            ring: self.ring.clone(),
            support,
            entries,
        }
    }
}

/// A finitely supported vector, constant on each S-orbit of its support `S`.
#[derive(Clone, Debug)]
pub struct SymVector {
    domain: Arc<OrbitSet>,
    ring: Ring,
    support: BTreeSet<Atom>,
    entries: BTreeMap<Pattern, RingElem>,
}

impl SymVector {
    pub fn zero(domain: Arc<OrbitSet>, ring: Ring) -> SymVector {
        SymVector {
            domain,
            ring,
            support: BTreeSet::new(),
            entries: BTreeMap::new(),
        }
    }

    /// The vector equal to `c` everywhere.
    pub fn constant(domain: Arc<OrbitSet>, ring: Ring, c: RingElem) -> SymVector {
        let entries = (0..domain.len()).map(|o| (domain.full_pattern(o), c.clone())).collect();
        SymVector::from_entries(domain, ring, BTreeSet::new(), entries).expect("full patterns are valid")
    }

    /// Sums the given values per pattern. Patterns are canonicalized and must
    /// only use atoms from `support`.
    pub fn from_entries(
        domain: Arc<OrbitSet>,
        ring: Ring,
        support: BTreeSet<Atom>,
        entries: Vec<(Pattern, RingElem)>,
    ) -> Result<SymVector> {
        let mut map = BTreeMap::new();
        for (p, c) in entries {
            if !ring.contains(&c) {
                return Err(Error::DomainMismatch(format!("{c} is not an element of {ring}")));
            }
            let p = domain.pattern(p.orbit, p.entries)?;
            if !p.concretes().is_subset(&support) {
                return Err(Error::MalformedPattern(format!(
                    "pattern {} uses atoms outside the declared support",
                    p.display(&domain)
                )));
            }
            add_into(&mut map, p, &c);
        }
        Ok(SymVector {
            domain,
            ring,
            support,
            entries: map,
        })
    }

    /// `c · 1_O` for the S-orbit `O` named by `p` (relative to `support`).
    pub fn indicator(domain: Arc<OrbitSet>, ring: Ring, support: BTreeSet<Atom>, p: Pattern, c: RingElem) -> Result<SymVector> {
        SymVector::from_entries(domain, ring, support, vec![(p, c)])
    }

    pub fn domain(&self) -> &Arc<OrbitSet> {
        &self.domain
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn support(&self) -> &BTreeSet<Atom> {
        &self.support
    }

    pub fn entries(&self) -> &BTreeMap<Pattern, RingElem> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Re-expresses the vector over S-orbits of a larger support.
    pub fn refine(&self, new: &BTreeSet<Atom>) -> SymVector {
        let target: BTreeSet<Atom> = self.support.union(new).copied().collect();
        if target == self.support {
            return self.clone();
        }
        let mut entries = BTreeMap::new();
        for (p, c) in &self.entries {
            for q in self.domain.refine(p, &self.support, &target) {
                add_into(&mut entries, q, c);
            }
        }
        SymVector {
            domain: self.domain.clone(),
            ring: self.ring.clone(),
            support: target,
            entries,
        }
    }

    /// The value at `e`: the coefficient of the S-orbit containing it.
    pub fn eval(&self, e: &Element) -> RingElem {
        let p = self.domain.pattern_of(e, &self.support);
        self.entries.get(&p).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn value_at(&self, p: &Pattern) -> RingElem {
        self.entries.get(p).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn add(&self, other: &SymVector) -> Result<SymVector> {
        same_domain(&self.domain, &other.domain)?;
        same_ring(&self.ring, &other.ring)?;
        let mut a = self.refine(&other.support);
        let b = other.refine(&self.support);
        for (p, c) in &b.entries {
            add_into(&mut a.entries, p.clone(), c);
        }
        Ok(a)
    }

    pub fn sub(&self, other: &SymVector) -> Result<SymVector> {
        self.add(&other.scale(&self.ring.from_int(-1)))
    }

    pub fn scale(&self, c: &RingElem) -> SymVector {
        let entries = self
            .entries
            .iter()
            .map(|(p, v)| (p.clone(), v * c))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        SymVector {
            domain: self.domain.clone(),
            ring: self.ring.clone(),
            support: self.support.clone(),
            entries,
        }
    }

    /// Equality as functions: compare after refining to the union support.
    pub fn same(&self, other: &SymVector) -> bool {
        if same_domain(&self.domain, &other.domain).is_err() || self.ring != other.ring {
            return false;
        }
        self.refine(&other.support).entries == other.refine(&self.support).entries
    }

    /// Restriction to one orbit of the domain.
    pub fn restrict_orbit(&self, orbit: usize) -> SymVector {
        SymVector {
            domain: self.domain.clone(),
            ring: self.ring.clone(),
            support: self.support.clone(),
            entries: self.entries.iter().filter(|(p, _)| p.orbit == orbit).map(|(p, c)| (p.clone(), c.clone())).collect(),
        }
    }

    /// Reads the vector as finitary, if every nonzero orbit is a singleton.
    pub fn to_fin(&self) -> Option<FinVector> {
        let mut v = FinVector::zero(self.domain.clone(), self.ring.clone());
        for (p, c) in &self.entries {
            v.add_at(&p.to_element()?, c);
        }
        Some(v)
    }
}

impl PartialEq for SymVector {
    fn eq(&self, other: &SymVector) -> bool {
        self.same(other)
    }
}

impl Nominal for SymVector {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        let support = self.support.rename(f);
        let entries = self
            .entries
            .iter()
            .map(|(p, c)| (self.domain.canonicalize(&p.rename(f)), c.clone()))
            .collect();
        SymVector {
            domain: self.domain.clone(),
            ring: self.ring.clone(),
            support,
            entries,
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        out.extend(self.support.iter().copied());
    }
}

/// `x · y`, or `None` when infinitely many elements have both entries
/// nonzero.
pub fn inner(x: &SymVector, y: &SymVector) -> Result<Option<RingElem>> {
    same_domain(&x.domain, &y.domain)?;
    same_ring(&x.ring, &y.ring)?;
    let xr = x.refine(&y.support);
    let yr = y.refine(&x.support);
    let mut total = x.ring.zero();
    for (p, c) in &xr.entries {
        if let Some(d) = yr.entries.get(p) {
            if !p.is_ground() {
                return Ok(None);
            }
            total += &(c * d);
        }
    }
    Ok(Some(total))
}

/// A finitely supported matrix over `B × C`.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    rows: Arc<OrbitSet>,
    cols: Arc<OrbitSet>,
    ring: Ring,
    support: BTreeSet<Atom>,
    entries: BTreeMap<ProductPattern, RingElem>,
}

impl SymMatrix {
    pub fn zero(rows: Arc<OrbitSet>, cols: Arc<OrbitSet>, ring: Ring) -> SymMatrix {
        SymMatrix {
            rows,
            cols,
            ring,
            support: BTreeSet::new(),
            entries: BTreeMap::new(),
        }
    }

    /// Sums values per canonical product pattern.
    pub fn from_entries(
        rows: Arc<OrbitSet>,
        cols: Arc<OrbitSet>,
        ring: Ring,
        support: BTreeSet<Atom>,
        entries: Vec<(ProductPattern, RingElem)>,
    ) -> Result<SymMatrix> {
        let mut map = BTreeMap::new();
        for (pp, c) in entries {
            if !ring.contains(&c) {
                return Err(Error::DomainMismatch(format!("{c} is not an element of {ring}")));
            }
            let pp = ProductPattern::new(&rows, &cols, pp.row, pp.col)?;
            if !pp.concretes().is_subset(&support) {
                return Err(Error::MalformedPattern("matrix pattern uses atoms outside the declared support".into()));
            }
            add_into(&mut map, pp, &c);
        }
        Ok(SymMatrix {
            rows,
            cols,
            ring,
            support,
            entries: map,
        })
    }

    pub fn rows(&self) -> &Arc<OrbitSet> {
        &self.rows
    }

    pub fn cols(&self) -> &Arc<OrbitSet> {
        &self.cols
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn support(&self) -> &BTreeSet<Atom> {
        &self.support
    }

    pub fn entries(&self) -> &BTreeMap<ProductPattern, RingElem> {
        &self.entries
    }

    /// The same matrix over a different ring, converting coefficients
    /// through their rational value.
    pub fn with_ring(&self, ring: Ring) -> Result<SymMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|(p, c)| Ok((p.clone(), ring.from_rational(&c.to_rational())?)))
            .collect::<Result<Vec<_>>>()?;
        SymMatrix::from_entries(self.rows.clone(), self.cols.clone(), ring, self.support.clone(), entries)
    }

    pub fn refine(&self, new: &BTreeSet<Atom>) -> SymMatrix {
        let target: BTreeSet<Atom> = self.support.union(new).copied().collect();
        let mut entries = BTreeMap::new();
        for (pp, c) in &self.entries {
            for q in pp.refine(&self.rows, &self.cols, &self.support, &target) {
                add_into(&mut entries, q, c);
            }
        }
        SymMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            ring: self.ring.clone(),
            support: target,
            entries,
        }
    }

    /// `A(b, _)`, supported by `S ∪ sup(b)`.
    pub fn row(&self, b: &Element) -> SymVector {
        self.slice(b, true)
    }

    /// `A(_, c)`, supported by `S ∪ sup(c)`.
    pub fn column(&self, c: &Element) -> SymVector {
        self.slice(c, false)
    }

    fn slice(&self, e: &Element, by_row: bool) -> SymVector {
        let (fixed_set, free_set) = if by_row { (&self.rows, &self.cols) } else { (&self.cols, &self.rows) };
        let mut support = self.support.clone();
        support.extend(e.tuple.iter().copied());
        let mut entries = BTreeMap::new();
        for (pp, coef) in &self.entries {
            let (fixed, free) = if by_row { (&pp.row, &pp.col) } else { (&pp.col, &pp.row) };
            if fixed.orbit != e.orbit {
                continue;
            }
            let mut hits = BTreeSet::new();
            'group: for g in fixed_set.orbit(e.orbit).group.elements() {
                let t = act(g, &e.tuple);
                let mut bind = BTreeMap::new();
                for (pe, a) in fixed.entries.iter().zip(&t) {
                    match pe {
                        Entry::Atom(b) if b == a => {}
                        Entry::Var(v) if !self.support.contains(a) => {
                            bind.insert(*v, *a);
                        }
                        _ => continue 'group,
                    }
                }
                let entries: Vec<Entry> = free
                    .entries
                    .iter()
                    .map(|x| match x {
                        Entry::Var(v) => bind.get(v).map_or(*x, |a| Entry::Atom(*a)),
                        _ => *x,
                    })
                    .collect();
                hits.insert(Pattern {
                    orbit: free.orbit,
                    entries: free_set.canonical_entries(free.orbit, &entries),
                });
            }
            for p in hits {
                add_into(&mut entries, p, coef);
            }
        }
        SymVector {
            domain: free_set.clone(),
            ring: self.ring.clone(),
            support,
            entries,
        }
    }
}

impl PartialEq for SymMatrix {
    fn eq(&self, other: &SymMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.ring == other.ring
            && self.refine(&other.support).entries == other.refine(&self.support).entries
    }
}

/// `A · x` by grounding, or `None` when the product is ill-defined.
///
/// For every S-orbit of `B` (with `S = sup(A) ∪ sup(x)`) a representative
/// row is built from fresh atoms and multiplied with `x`; a second,
/// disjoint representative must give the same value.
pub fn mat_vec(a: &SymMatrix, x: &SymVector) -> Result<Option<SymVector>> {
    same_domain(&a.cols, &x.domain)?;
    same_ring(&a.ring, &x.ring)?;
    let s: BTreeSet<Atom> = a.support.union(&x.support).copied().collect();
    let mut fresh = FreshAtoms::above(&s);
    let mut out = Vec::new();
    for p in a.rows.all_s_orbits(&s) {
        let (b1, _) = a.rows.instantiate(&p, &mut fresh);
        let Some(v1) = inner(&a.row(&b1), x)? else {
            return Ok(None);
        };
        if !p.is_ground() {
            let (b2, _) = a.rows.instantiate(&p, &mut fresh);
            let v2 = inner(&a.row(&b2), x)?;
            if v2.as_ref() != Some(&v1) {
                return Err(Error::Verification(format!(
                    "product not constant on the orbit {}",
                    p.display(&a.rows)
                )));
            }
        }
        out.push((p, v1));
    }
    SymVector::from_entries(a.rows.clone(), a.ring.clone(), s, out).map(Some)
}
