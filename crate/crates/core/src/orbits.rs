//! Orbit-finite sets as lists of `ATOMS^(k)/G` declarations, and the
//! equality-type patterns that name their S-orbits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::atoms::{act, Atom, FreshAtoms, Nominal, PermGroup};
use crate::error::{Error, Result};

/// One pattern position: a concrete atom or a fresh variable. Concrete atoms
/// sort below variables, which is the tie-break canonical forms rely on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Entry {
    Atom(Atom),
    Var(u32),
}

impl Entry {
    pub fn atom(self) -> Option<Atom> {
        match self {
            Entry::Atom(a) => Some(a),
            Entry::Var(_) => None,
        }
    }

    pub fn var(self) -> Option<u32> {
        match self {
            Entry::Var(v) => Some(v),
            Entry::Atom(_) => None,
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Atom(a) => write!(f, "{a}"),
            Entry::Var(v) => write!(f, "x{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitDecl {
    pub id: String,
    pub arity: usize,
    pub group: PermGroup,
}

impl OrbitDecl {
    pub fn new(id: impl Into<String>, group: PermGroup) -> OrbitDecl {
        OrbitDecl {
            id: id.into(),
            arity: group.degree(),
            group,
        }
    }

    /// `ATOMS^(k)` with the trivial group.
    pub fn tuples(id: impl Into<String>, arity: usize) -> OrbitDecl {
        OrbitDecl::new(id, PermGroup::trivial(arity))
    }
}

/// A disjoint union of orbit declarations. Orbits are addressed by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitSet {
    orbits: Vec<OrbitDecl>,
}

/// An element: an orbit index and the G-minimal representative tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub orbit: usize,
    pub tuple: Vec<Atom>,
}

/// An S-orbit of one declared orbit, in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub orbit: usize,
    pub entries: Vec<Entry>,
}

/// An S-orbit of a product `B × C`. Row and column share one variable
/// namespace; distinct variables always denote distinct atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductPattern {
    pub row: Pattern,
    pub col: Pattern,
}

/// A pattern read relative to its own concrete atoms. Every element of the
/// orbit contains all of them, so the orbit is tight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TightOrbit {
    pub pattern: Pattern,
}

pub type Assignment = BTreeMap<u32, Atom>;

impl Nominal for Element {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Element {
            orbit: self.orbit,
            tuple: self.tuple.rename(f),
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        out.extend(self.tuple.iter().copied());
    }
}

fn renumber(entries: &mut [Entry], map: &mut BTreeMap<u32, u32>) {
    for e in entries.iter_mut() {
        if let Entry::Var(v) = *e {
            let next = map.len() as u32;
            *e = Entry::Var(*map.entry(v).or_insert(next));
        }
    }
}

fn check_entries(entries: &[Entry]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for e in entries {
        if !seen.insert(*e) {
            return Err(Error::MalformedPattern(format!("repeated entry {e}")));
        }
    }
    Ok(())
}

/// Injective partial maps from `vars` into `atoms`, as lists aligned with
/// `vars` (`None` = stays a variable).
fn partial_injections(vars: &[u32], atoms: &[Atom]) -> Vec<Vec<Option<Atom>>> {
    fn go(i: usize, n: usize, atoms: &[Atom], used: &mut Vec<bool>, cur: &mut Vec<Option<Atom>>, out: &mut Vec<Vec<Option<Atom>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        go(i + 1, n, atoms, used, cur, out);
        cur.pop();
        for (j, a) in atoms.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                cur.push(Some(*a));
                go(i + 1, n, atoms, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, vars.len(), atoms, &mut vec![false; atoms.len()], &mut Vec::new(), &mut out);
    out
}

fn substitute(entries: &[Entry], map: &BTreeMap<u32, Atom>) -> Vec<Entry> {
    entries
        .iter()
        .map(|e| match e {
            Entry::Var(v) => map.get(v).map_or(*e, |a| Entry::Atom(*a)),
            _ => *e,
        })
        .collect()
}

impl OrbitSet {
    pub fn new(orbits: Vec<OrbitDecl>) -> Result<OrbitSet> {
        let mut ids = BTreeSet::new();
        for o in &orbits {
            if !ids.insert(o.id.clone()) {
                return Err(Error::DomainMismatch(format!("duplicate orbit id {}", o.id)));
            }
        }
        Ok(OrbitSet { orbits })
    }

    pub fn single(orbit: OrbitDecl) -> OrbitSet {
        OrbitSet { orbits: vec![orbit] }
    }

    pub fn orbits(&self) -> &[OrbitDecl] {
        &self.orbits
    }

    pub fn orbit(&self, i: usize) -> &OrbitDecl {
        &self.orbits[i]
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.orbits.iter().position(|o| o.id == id)
    }

    pub fn max_arity(&self) -> usize {
        self.orbits.iter().map(|o| o.arity).max().unwrap_or(0)
    }

    fn group(&self, orbit: usize) -> &PermGroup {
        &self.orbits[orbit].group
    }

    fn check_orbit(&self, orbit: usize, len: usize) -> Result<()> {
        let decl = self
            .orbits
            .get(orbit)
            .ok_or_else(|| Error::DomainMismatch(format!("no orbit with index {orbit}")))?;
        if decl.arity != len {
            return Err(Error::MalformedPattern(format!(
                "orbit {} has arity {}, got {} entries",
                decl.id, decl.arity, len
            )));
        }
        Ok(())
    }

    /// Builds the element named by a non-repeating tuple.
    pub fn element(&self, orbit: usize, tuple: Vec<Atom>) -> Result<Element> {
        self.check_orbit(orbit, tuple.len())?;
        let distinct: BTreeSet<Atom> = tuple.iter().copied().collect();
        if distinct.len() != tuple.len() {
            return Err(Error::MalformedPattern("repeated atom in tuple".into()));
        }
        Ok(Element {
            orbit,
            tuple: self.canonical_tuple(orbit, &tuple),
        })
    }

    pub fn canonical_tuple(&self, orbit: usize, tuple: &[Atom]) -> Vec<Atom> {
        self.group(orbit)
            .elements()
            .iter()
            .map(|g| act(g, tuple))
            .min()
            .expect("groups contain the identity")
    }

    pub fn canonical_element(&self, e: &Element) -> Element {
        Element {
            orbit: e.orbit,
            tuple: self.canonical_tuple(e.orbit, &e.tuple),
        }
    }

    /// Validates and canonicalizes a pattern.
    pub fn pattern(&self, orbit: usize, entries: Vec<Entry>) -> Result<Pattern> {
        self.check_orbit(orbit, entries.len())?;
        check_entries(&entries)?;
        Ok(Pattern {
            orbit,
            entries: self.canonical_entries(orbit, &entries),
        })
    }

    /// The minimum over the group of the permuted entries, variables
    /// renumbered by first occurrence.
    pub fn canonical_entries(&self, orbit: usize, entries: &[Entry]) -> Vec<Entry> {
        self.group(orbit)
            .elements()
            .iter()
            .map(|g| {
                let mut e = act(g, entries);
                renumber(&mut e, &mut BTreeMap::new());
                e
            })
            .min()
            .expect("groups contain the identity")
    }

    pub fn canonicalize(&self, p: &Pattern) -> Pattern {
        Pattern {
            orbit: p.orbit,
            entries: self.canonical_entries(p.orbit, &p.entries),
        }
    }

    /// The pattern with every position a variable: the whole orbit.
    pub fn full_pattern(&self, orbit: usize) -> Pattern {
        Pattern {
            orbit,
            entries: (0..self.orbits[orbit].arity as u32).map(Entry::Var).collect(),
        }
    }

    /// Splits an S-orbit into the S′-orbits it contains, for `S ⊆ S′`.
    pub fn refine(&self, p: &Pattern, old: &BTreeSet<Atom>, new: &BTreeSet<Atom>) -> Vec<Pattern> {
        let extra: Vec<Atom> = new.difference(old).copied().filter(|a| !p.entries.contains(&Entry::Atom(*a))).collect();
        let vars = p.vars();
        let mut out = BTreeSet::new();
        for choice in partial_injections(&vars, &extra) {
            let map: BTreeMap<u32, Atom> = vars
                .iter()
                .zip(&choice)
                .filter_map(|(v, a)| a.map(|a| (*v, a)))
                .collect();
            out.insert(Pattern {
                orbit: p.orbit,
                entries: self.canonical_entries(p.orbit, &substitute(&p.entries, &map)),
            });
        }
        out.into_iter().collect()
    }

    /// All S-orbits of one declared orbit.
    pub fn s_orbits(&self, orbit: usize, s: &BTreeSet<Atom>) -> Vec<Pattern> {
        self.refine(&self.full_pattern(orbit), &BTreeSet::new(), s)
    }

    /// All S-orbits of the whole set.
    pub fn all_s_orbits(&self, s: &BTreeSet<Atom>) -> Vec<Pattern> {
        (0..self.orbits.len()).flat_map(|o| self.s_orbits(o, s)).collect()
    }

    /// The S-orbit containing `e`.
    pub fn pattern_of(&self, e: &Element, s: &BTreeSet<Atom>) -> Pattern {
        let mut next = 0;
        let entries: Vec<Entry> = e
            .tuple
            .iter()
            .map(|a| {
                if s.contains(a) {
                    Entry::Atom(*a)
                } else {
                    next += 1;
                    Entry::Var(next - 1)
                }
            })
            .collect();
        Pattern {
            orbit: e.orbit,
            entries: self.canonical_entries(e.orbit, &entries),
        }
    }

    /// The variable assignment under which `p` (relative to `s`) produces
    /// `e`, if `e` lies in the S-orbit `p`.
    pub fn match_element(&self, p: &Pattern, s: &BTreeSet<Atom>, e: &Element) -> Option<Assignment> {
        if p.orbit != e.orbit {
            return None;
        }
        'group: for g in self.group(e.orbit).elements() {
            let t = act(g, &e.tuple);
            let mut asg = Assignment::new();
            for (pe, a) in p.entries.iter().zip(&t) {
                match pe {
                    Entry::Atom(b) if b == a => {}
                    Entry::Var(v) if !s.contains(a) => {
                        asg.insert(*v, *a);
                    }
                    _ => continue 'group,
                }
            }
            return Some(asg);
        }
        None
    }

    /// S-orbits lying in both `p` (relative to `sp`) and `q` (relative to
    /// `sq`), as patterns relative to `sp ∪ sq`.
    pub fn unify(&self, p: &Pattern, sp: &BTreeSet<Atom>, q: &Pattern, sq: &BTreeSet<Atom>) -> Vec<Pattern> {
        if p.orbit != q.orbit {
            return Vec::new();
        }
        let u: BTreeSet<Atom> = sp.union(sq).copied().collect();
        let left: BTreeSet<Pattern> = self.refine(p, sp, &u).into_iter().collect();
        self.refine(q, sq, &u).into_iter().filter(|r| left.contains(r)).collect()
    }

    /// Picks the element obtained by sending the variables to fresh atoms.
    pub fn instantiate(&self, p: &Pattern, fresh: &mut FreshAtoms) -> (Element, Assignment) {
        let asg: Assignment = p.vars().into_iter().map(|v| (v, fresh.fresh())).collect();
        let tuple = p
            .entries
            .iter()
            .map(|e| match e {
                Entry::Atom(a) => *a,
                Entry::Var(v) => asg[v],
            })
            .collect::<Vec<_>>();
        (
            Element {
                orbit: p.orbit,
                tuple: self.canonical_tuple(p.orbit, &tuple),
            },
            asg,
        )
    }
}

impl Pattern {
    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<u32> {
        let mut seen = Vec::new();
        for e in &self.entries {
            if let Entry::Var(v) = e {
                if !seen.contains(v) {
                    seen.push(*v);
                }
            }
        }
        seen
    }

    /// Number of variables: the dimension of the orbit over its support.
    pub fn dim(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e, Entry::Var(_))).count()
    }

    pub fn concretes(&self) -> BTreeSet<Atom> {
        self.entries.iter().filter_map(|e| e.atom()).collect()
    }

    pub fn is_ground(&self) -> bool {
        self.dim() == 0
    }

    /// Reads a variable-free pattern as an element.
    pub fn to_element(&self) -> Option<Element> {
        let tuple: Option<Vec<Atom>> = self.entries.iter().map(|e| e.atom()).collect();
        tuple.map(|tuple| Element { orbit: self.orbit, tuple })
    }

    pub fn from_element(e: &Element) -> Pattern {
        Pattern {
            orbit: e.orbit,
            entries: e.tuple.iter().map(|a| Entry::Atom(*a)).collect(),
        }
    }

    pub fn display<'a>(&'a self, set: &'a OrbitSet) -> impl fmt::Display + 'a {
        DisplayPattern { set, p: self }
    }
}

struct DisplayPattern<'a> {
    set: &'a OrbitSet,
    p: &'a Pattern,
}

impl fmt::Display for DisplayPattern<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.set.orbit(self.p.orbit).id)?;
        for (i, e) in self.p.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl Nominal for Pattern {
    fn rename(&self, f: &dyn Fn(Atom) -> Atom) -> Self {
        Pattern {
            orbit: self.orbit,
            entries: self
                .entries
                .iter()
                .map(|e| match e {
                    Entry::Atom(a) => Entry::Atom(f(*a)),
                    v => *v,
                })
                .collect(),
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        out.extend(self.concretes());
    }
}

impl ProductPattern {
    /// Validates and canonicalizes a product pattern: row first, then column,
    /// minimized over `G_row × G_col` with one joint renumbering.
    pub fn new(rows: &OrbitSet, cols: &OrbitSet, row: Pattern, col: Pattern) -> Result<ProductPattern> {
        rows.check_orbit(row.orbit, row.entries.len())?;
        cols.check_orbit(col.orbit, col.entries.len())?;
        check_entries(&row.entries)?;
        check_entries(&col.entries)?;
        Ok(ProductPattern::canonical(rows, cols, &row, &col))
    }

    pub fn canonical(rows: &OrbitSet, cols: &OrbitSet, row: &Pattern, col: &Pattern) -> ProductPattern {
        let mut best: Option<(Vec<Entry>, Vec<Entry>)> = None;
        for gr in rows.group(row.orbit).elements() {
            let r0 = act(gr, &row.entries);
            for gc in cols.group(col.orbit).elements() {
                let mut r = r0.clone();
                let mut c = act(gc, &col.entries);
                let mut map = BTreeMap::new();
                renumber(&mut r, &mut map);
                renumber(&mut c, &mut map);
                let cand = (r, c);
                if best.as_ref().map_or(true, |b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        let (r, c) = best.expect("groups contain the identity");
        ProductPattern {
            row: Pattern { orbit: row.orbit, entries: r },
            col: Pattern { orbit: col.orbit, entries: c },
        }
    }

    pub fn vars(&self) -> Vec<u32> {
        let mut seen: Vec<u32> = Vec::new();
        for e in self.row.entries.iter().chain(&self.col.entries) {
            if let Entry::Var(v) = e {
                if !seen.contains(v) {
                    seen.push(*v);
                }
            }
        }
        seen
    }

    pub fn concretes(&self) -> BTreeSet<Atom> {
        let mut s = self.row.concretes();
        s.extend(self.col.concretes());
        s
    }

    /// Variables of the column that do not occur in the row.
    pub fn column_only_vars(&self) -> Vec<u32> {
        let row_vars = self.row.vars();
        self.col.vars().into_iter().filter(|v| !row_vars.contains(v)).collect()
    }

    pub fn refine(&self, rows: &OrbitSet, cols: &OrbitSet, old: &BTreeSet<Atom>, new: &BTreeSet<Atom>) -> Vec<ProductPattern> {
        let present = self.concretes();
        let extra: Vec<Atom> = new.difference(old).copied().filter(|a| !present.contains(a)).collect();
        let vars = self.vars();
        let mut out = BTreeSet::new();
        for choice in partial_injections(&vars, &extra) {
            let map: BTreeMap<u32, Atom> = vars
                .iter()
                .zip(&choice)
                .filter_map(|(v, a)| a.map(|a| (*v, a)))
                .collect();
            let row = Pattern { orbit: self.row.orbit, entries: substitute(&self.row.entries, &map) };
            let col = Pattern { orbit: self.col.orbit, entries: substitute(&self.col.entries, &map) };
            out.insert(ProductPattern::canonical(rows, cols, &row, &col));
        }
        out.into_iter().collect()
    }
}

impl TightOrbit {
    pub fn new(pattern: Pattern) -> TightOrbit {
        TightOrbit { pattern }
    }

    /// The defining support: the concrete atoms.
    pub fn support(&self) -> BTreeSet<Atom> {
        self.pattern.concretes()
    }
}

/// One family of tight orbits: all orbits whose concrete positions form a
/// given profile (up to the group).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub orbit: usize,
    /// Sorted concrete positions of the representative profile.
    pub profile: Vec<usize>,
}

/// The tight orbits of an orbit set, indexed by a new orbit set.
///
/// Family `(orbit, profile)` has arity `|profile|`. Its tuple `a` names the
/// tight orbit whose pattern carries `a` at the profile positions and
/// variables elsewhere; the induced group makes this naming bijective.
#[derive(Clone, Debug)]
pub struct TightFamilies {
    pub source: Arc<OrbitSet>,
    pub set: Arc<OrbitSet>,
    families: Vec<Family>,
}

fn profile_image(g: &[usize], profile: &[usize]) -> Vec<usize> {
    // concrete positions of act(g, entries) when `profile` is concrete
    let mut out: Vec<usize> = (0..g.len()).filter(|&i| profile.contains(&g[i])).collect();
    out.sort_unstable();
    out
}

fn subsets(k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

impl TightFamilies {
    pub fn new(source: Arc<OrbitSet>) -> Result<TightFamilies> {
        let mut decls = Vec::new();
        let mut families = Vec::new();
        for (oi, decl) in source.orbits().iter().enumerate() {
            let mut reps: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
            for p in subsets(decl.arity) {
                let rep = decl
                    .group
                    .elements()
                    .iter()
                    .map(|g| profile_image(g, &p))
                    .min()
                    .expect("groups contain the identity");
                reps.insert((rep.len(), rep));
            }
            for (_, profile) in reps {
                let mut induced = BTreeSet::new();
                for g in decl.group.elements() {
                    if profile_image(g, &profile) == profile {
                        let h: Vec<usize> = profile
                            .iter()
                            .map(|&pi| profile.iter().position(|&x| x == g[pi]).expect("g stabilizes the profile"))
                            .collect();
                        induced.insert(h);
                    }
                }
                let group = PermGroup::generate(profile.len(), induced.into_iter().collect())?;
                let marks: Vec<String> = profile.iter().map(|p| (p + 1).to_string()).collect();
                decls.push(OrbitDecl::new(format!("{}{{{}}}", decl.id, marks.join(",")), group));
                families.push(Family { orbit: oi, profile });
            }
        }
        Ok(TightFamilies {
            source,
            set: Arc::new(OrbitSet::new(decls)?),
            families,
        })
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn family(&self, i: usize) -> &Family {
        &self.families[i]
    }

    /// Family element to tight orbit.
    pub fn to_tight(&self, e: &Element) -> TightOrbit {
        let fam = &self.families[e.orbit];
        let arity = self.source.orbit(fam.orbit).arity;
        let mut next = 0;
        let entries: Vec<Entry> = (0..arity)
            .map(|i| match fam.profile.iter().position(|&p| p == i) {
                Some(j) => Entry::Atom(e.tuple[j]),
                None => {
                    next += 1;
                    Entry::Var(next - 1)
                }
            })
            .collect();
        TightOrbit::new(Pattern {
            orbit: fam.orbit,
            entries: self.source.canonical_entries(fam.orbit, &entries),
        })
    }

    /// Tight orbit to family element.
    pub fn from_tight(&self, t: &TightOrbit) -> Element {
        let p = &t.pattern;
        let group = self.source.group(p.orbit);
        let mut best: Option<Element> = None;
        for g in group.elements() {
            let permuted = act(g, &p.entries);
            let profile: Vec<usize> = (0..permuted.len()).filter(|&i| permuted[i].atom().is_some()).collect();
            let Some(fi) = self.families.iter().position(|f| f.orbit == p.orbit && f.profile == profile) else {
                continue;
            };
            let cand = Element {
                orbit: fi,
                tuple: profile.iter().map(|&i| permuted[i].atom().expect("concrete position")).collect(),
            };
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        best.expect("every profile class has a representative family")
    }
}
