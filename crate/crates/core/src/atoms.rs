//! Equality atoms, finite-support permutations and coordinate permutation
//! groups.
//!
//! Atoms are the positive integers. Algorithms only ever test atoms for
//! equality; the numeric order is consulted solely to pick canonical
//! representatives.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the degree of coordinate permutation groups. Groups are
/// materialized element by element, so the cost is factorial in the degree.
pub const DEFAULT_DEGREE_CAP: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom(u32);

impl Atom {
    /// Panics on `0`; atoms start at 1.
    pub fn new(id: u32) -> Atom {
        assert!(id >= 1, "atoms are positive integers");
        Atom(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Values that carry atoms and can be renamed.
///
/// `rename` must be structural: it replaces every atom `a` by `f(a)` and
/// touches nothing else.
pub trait Nominal: Sized {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self;

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>);

    /// The set of atoms occurring in the value. For symbolic objects this is
    /// their declared support, which is a support but not necessarily the
    /// least one.
    fn support(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }
}

impl Nominal for Atom {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        f(*self)
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        out.insert(*self);
    }
}

impl<T: Nominal> Nominal for Vec<T> {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        self.iter().map(|x| x.rename(f)).collect()
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        for x in self {
            x.collect_atoms(out);
        }
    }
}

impl Nominal for BTreeSet<Atom> {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        self.iter().map(|a| f(*a)).collect()
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        out.extend(self.iter().copied());
    }
}

/// A permutation of the atoms that moves only finitely many of them.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FsPermutation {
    moved: BTreeMap<Atom, Atom>,
}

impl FsPermutation {
    pub fn identity() -> FsPermutation {
        FsPermutation::default()
    }

    /// Builds a permutation from explicit `a ↦ b` pairs. The pairs must form
    /// a bijection of their key set onto itself.
    pub fn from_pairs<I: IntoIterator<Item = (Atom, Atom)>>(pairs: I) -> Result<FsPermutation> {
        let mut moved = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(prev) = moved.insert(a, b) {
                if prev != b {
                    return Err(Error::MalformedPermutation(format!(
                        "atom {a} mapped to both {prev} and {b}"
                    )));
                }
            }
        }
        let keys: BTreeSet<Atom> = moved.keys().copied().collect();
        let values: BTreeSet<Atom> = moved.values().copied().collect();
        if values.len() != moved.len() {
            return Err(Error::MalformedPermutation("map is not injective".into()));
        }
        if keys != values {
            return Err(Error::MalformedPermutation(
                "image differs from the set of moved atoms".into(),
            ));
        }
        moved.retain(|a, b| a != b);
        Ok(FsPermutation { moved })
    }

    pub fn swap(a: Atom, b: Atom) -> FsPermutation {
        FsPermutation::from_pairs([(a, b), (b, a)]).expect("a transposition is a bijection")
    }

    pub fn image(&self, a: Atom) -> Atom {
        self.moved.get(&a).copied().unwrap_or(a)
    }

    pub fn is_identity(&self) -> bool {
        self.moved.is_empty()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &FsPermutation) -> FsPermutation {
        let mut domain: BTreeSet<Atom> = self.moved.keys().copied().collect();
        domain.extend(other.moved.keys().copied());
        let moved = domain
            .into_iter()
            .map(|a| (a, self.image(other.image(a))))
            .filter(|(a, b)| a != b)
            .collect();
        FsPermutation { moved }
    }

    pub fn inverse(&self) -> FsPermutation {
        FsPermutation {
            moved: self.moved.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    pub fn apply<T: Nominal>(&self, x: &T) -> T {
        x.rename(&|a| self.image(a))
    }

    pub fn moved(&self) -> impl Iterator<Item = (Atom, Atom)> + '_ {
        self.moved.iter().map(|(a, b)| (*a, *b))
    }
}

/// A permutation of coordinate positions `0..k`, stored as its image list.
pub type Perm = Vec<usize>;

/// `(tuple ∘ g)[i] = tuple[g[i]]`: the coordinate action used throughout.
pub fn act<T: Clone>(g: &[usize], tuple: &[T]) -> Vec<T> {
    g.iter().map(|&i| tuple[i].clone()).collect()
}

fn compose_perm(g: &[usize], h: &[usize]) -> Perm {
    // (g ∘ h)(i) = g(h(i))
    h.iter().map(|&i| g[i]).collect()
}

/// A subgroup of the symmetric group on `k` coordinates, materialized.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
}

impl PermGroup {
    pub fn trivial(degree: usize) -> PermGroup {
        PermGroup {
            degree,
            generators: Vec::new(),
            elements: vec![(0..degree).collect()],
        }
    }

    pub fn symmetric(degree: usize) -> Result<PermGroup> {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut cycle: Perm = (1..degree).collect();
            cycle.push(0);
            gens.push(cycle);
            let mut swap: Perm = (0..degree).collect();
            swap.swap(0, 1);
            gens.push(swap);
        }
        PermGroup::generate(degree, gens)
    }

    /// Closure of `generators` (0-based image lists) under composition.
    pub fn generate(degree: usize, generators: Vec<Perm>) -> Result<PermGroup> {
        PermGroup::generate_with_cap(degree, generators, DEFAULT_DEGREE_CAP)
    }

    pub fn generate_with_cap(degree: usize, generators: Vec<Perm>, cap: usize) -> Result<PermGroup> {
        if degree > cap {
            return Err(Error::DegreeTooLarge { degree, cap });
        }
        for g in &generators {
            check_perm(degree, g)?;
        }
        let identity: Perm = (0..degree).collect();
        let mut seen: BTreeSet<Perm> = BTreeSet::new();
        seen.insert(identity.clone());
        let mut queue = VecDeque::from([identity]);
        while let Some(p) = queue.pop_front() {
            for g in &generators {
                let q = compose_perm(g, &p);
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        Ok(PermGroup {
            degree,
            generators,
            elements: seen.into_iter().collect(),
        })
    }

    /// Parses 1-based cycle notation, one entry per generator, e.g.
    /// `["(1 2 3)", "(1 2)(3 4)"]` style cycles already split into lists.
    pub fn from_cycles(degree: usize, generators: &[Vec<Vec<usize>>]) -> Result<PermGroup> {
        let mut perms = Vec::new();
        for cycles in generators {
            let mut p: Perm = (0..degree).collect();
            let mut touched = BTreeSet::new();
            for cycle in cycles {
                for &x in cycle {
                    if x == 0 || x > degree {
                        return Err(Error::MalformedPermutation(format!(
                            "position {x} outside 1..={degree}"
                        )));
                    }
                    if !touched.insert(x) {
                        return Err(Error::MalformedPermutation(format!(
                            "position {x} repeated across cycles"
                        )));
                    }
                }
                for (i, &x) in cycle.iter().enumerate() {
                    let y = cycle[(i + 1) % cycle.len()];
                    p[x - 1] = y - 1;
                }
            }
            perms.push(p);
        }
        PermGroup::generate(degree, perms)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Generators written as 1-based disjoint cycles, fixed points omitted.
    pub fn generator_cycles(&self) -> Vec<Vec<Vec<usize>>> {
        self.generators.iter().map(|g| to_cycles(g)).collect()
    }
}

fn check_perm(degree: usize, g: &[usize]) -> Result<()> {
    if g.len() != degree {
        return Err(Error::MalformedPermutation(format!(
            "expected {degree} images, got {}",
            g.len()
        )));
    }
    let mut seen = vec![false; degree];
    for &x in g {
        if x >= degree || seen[x] {
            return Err(Error::MalformedPermutation(format!(
                "{g:?} is not a bijection of 0..{degree}"
            )));
        }
        seen[x] = true;
    }
    Ok(())
}

fn to_cycles(g: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    for start in 0..g.len() {
        if seen[start] || g[start] == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push(x + 1);
            x = g[x];
        }
        out.push(cycle);
    }
    out
}

/// Source of atoms not used so far. Threaded explicitly through algorithms
/// so that runs are reproducible.
#[derive(Clone, Debug)]
pub struct FreshAtoms {
    next: u32,
}

impl FreshAtoms {
    /// Starts above every atom in `used`.
    pub fn above<'a, I: IntoIterator<Item = &'a Atom>>(used: I) -> FreshAtoms {
        let max = used.into_iter().map(|a| a.id()).max().unwrap_or(0);
        FreshAtoms { next: max + 1 }
    }

    pub fn fresh(&mut self) -> Atom {
        let a = Atom::new(self.next);
        self.next += 1;
        a
    }

    pub fn take(&mut self, n: usize) -> Vec<Atom> {
        (0..n).map(|_| self.fresh()).collect()
    }

    /// Makes sure future atoms are larger than `a`.
    pub fn avoid(&mut self, a: Atom) {
        if a.id() >= self.next {
            self.next = a.id() + 1;
        }
    }
}

pub fn atoms(ids: &[u32]) -> Vec<Atom> {
    ids.iter().map(|&i| Atom::new(i)).collect()
}

pub fn atom_set(ids: &[u32]) -> BTreeSet<Atom> {
    ids.iter().map(|&i| Atom::new(i)).collect()
}
