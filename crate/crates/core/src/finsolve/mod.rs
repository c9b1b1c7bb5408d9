//! Finitary solvability: is `t` a finite combination of columns of `A`?
//!
//! The system is rewritten as an [`Instance`] over tuple components, then
//! the atom dimension is lowered one step at a time (checking local
//! solvability before each step) until a plain finite system remains.
//! Every step is constructive, so a solution of the final system is carried
//! back up to a combination of columns.

pub mod cog;
pub mod instance;
pub mod local;
pub mod reduce;

use std::collections::{BTreeMap, BTreeSet};

use crate::atoms::{Atom, FreshAtoms, Nominal};
use crate::error::{Error, Result};
use crate::linvec::{FinVector, SymMatrix, SymVector};
use crate::ring::RingElem;

pub use cog::{cog, delta, TotalOrder};
pub use instance::{to_instance, Conversion, Coord, InstVec, Instance};
pub use local::{local_solutions, locally_solvable, restricted_solutions, LocalSolution};
pub use reduce::{reduce_dimension, Reduction};

use cog::{order_map, partial_moves, sign};
use instance::apply_map;

/// `coef · map(reps[rep])`; `map` is given on exactly the atoms of the
/// representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coef: RingElem,
    pub rep: usize,
    pub map: BTreeMap<Atom, Atom>,
}

/// Summary of one level of the reduction chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTrace {
    pub atom_dimension: usize,
    /// `(arity, width)` per component.
    pub components: Vec<(usize, usize)>,
    pub representatives: usize,
    pub target_entries: usize,
    pub locally_solvable: bool,
    /// The fresh set chosen when this level was reduced.
    pub chosen: Vec<Atom>,
    pub orders: usize,
}

#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub solvable: bool,
    /// A combination of the top-level representatives equal to the target.
    pub combination: Option<Vec<Term>>,
    pub trace: Vec<LevelTrace>,
    /// Set when a YES answer could not be turned into a combination.
    pub note: Option<String>,
}

struct Level {
    instance: Instance,
    local: Vec<LocalSolution>,
    reduction: Reduction,
}

fn trace_of(inst: &Instance, locally: bool) -> LevelTrace {
    LevelTrace {
        atom_dimension: inst.max_arity(),
        components: inst.widths.iter().map(|(a, w)| (*a, *w)).collect(),
        representatives: inst.reps.len(),
        target_entries: inst.target.len(),
        locally_solvable: locally,
        chosen: Vec::new(),
        orders: 0,
    }
}

/// Decides an instance and, on YES, extracts a combination.
pub fn solve_instance(inst: &Instance) -> Result<InstanceOutcome> {
    let mut levels: Vec<Level> = Vec::new();
    let mut trace = Vec::new();
    let mut cur = inst.clone();
    let bottom: Vec<Term> = loop {
        if cur.target.is_zero() {
            trace.push(trace_of(&cur, true));
            break Vec::new();
        }
        let Some(local) = local_solutions(&cur)? else {
            trace.push(trace_of(&cur, false));
            return Ok(InstanceOutcome {
                solvable: false,
                combination: None,
                trace,
                note: None,
            });
        };
        let mut tr = trace_of(&cur, true);
        if cur.max_arity() == 0 {
            trace.push(tr);
            match solve_scalars(&cur)? {
                Some(terms) => break terms,
                None => {
                    return Ok(InstanceOutcome {
                        solvable: false,
                        combination: None,
                        trace,
                        note: None,
                    })
                }
            }
        }
        let (next, reduction) = reduce_dimension(&cur)?;
        tr.chosen = reduction.s.clone();
        tr.orders = reduction.orders_per_rep.iter().sum();
        trace.push(tr);
        levels.push(Level {
            instance: cur,
            local,
            reduction,
        });
        cur = next;
    };

    let mut terms = bottom;
    let mut below = cur;
    for level in levels.iter().rev() {
        match pull_back(level, &below, terms) {
            Ok(t) => terms = t,
            Err(e) => {
                return Ok(InstanceOutcome {
                    solvable: true,
                    combination: None,
                    trace,
                    note: Some(format!("witness extraction failed: {e}")),
                })
            }
        }
        below = level.instance.clone();
    }
    Ok(InstanceOutcome {
        solvable: true,
        combination: Some(terms),
        trace,
        note: None,
    })
}

fn solve_scalars(inst: &Instance) -> Result<Option<Vec<Term>>> {
    let mut rows: BTreeSet<Coord> = inst.target.entries().keys().cloned().collect();
    for r in &inst.reps {
        rows.extend(r.entries().keys().cloned());
    }
    let zero = inst.ring.zero();
    let at = |v: &InstVec, c: &Coord| v.get(c).cloned().unwrap_or_else(|| zero.clone());
    let m: Vec<Vec<RingElem>> = rows.iter().map(|c| inst.reps.iter().map(|r| at(r, c)).collect()).collect();
    let b: Vec<RingElem> = rows.iter().map(|c| at(&inst.target, c)).collect();
    Ok(inst.ring.solve_finite(&m, &b)?.map(|x| {
        x.into_iter()
            .enumerate()
            .filter(|(_, q)| !q.is_zero())
            .map(|(rep, coef)| Term {
                coef,
                rep,
                map: BTreeMap::new(),
            })
            .collect()
    }))
}

/// Evaluates a combination.
pub fn combine(inst: &Instance, terms: &[Term]) -> InstVec {
    let mut out = InstVec::new();
    for t in terms {
        out.add_scaled(&apply_map(&inst.reps[t.rep], &t.map), &t.coef);
    }
    out
}

/// Turns a combination for the reduced instance into one for the level
/// above: undo `v ↦ v − Δ^< ṽ` by adding back the cog expansions, then add
/// the expansion of `Δ^{<0} t̃` built from the local solutions.
fn pull_back(level: &Level, below: &Instance, terms: Vec<Term>) -> Result<Vec<Term>> {
    let cur = &level.instance;
    let red = &level.reduction;
    let ring = &cur.ring;
    let s = &red.s;
    let k = s.len();
    let keep = below.target.support();

    let mut used = cur.atoms();
    used.extend(below.atoms());
    used.extend(s.iter().copied());
    for t in &terms {
        used.extend(t.map.values().copied());
    }
    let mut fresh = FreshAtoms::above(&used);
    let mut out: BTreeMap<(usize, Vec<(Atom, Atom)>), RingElem> = BTreeMap::new();
    let mut emit = |coef: RingElem, rep: usize, map: BTreeMap<Atom, Atom>| {
        let key = (rep, map.into_iter().collect::<Vec<_>>());
        let e = out.entry(key).or_insert_with(|| ring.zero());
        *e += &coef;
    };

    let mut moved: BTreeMap<Atom, Atom> = BTreeMap::new();
    for term in terms {
        let (parent, ord) = &red.parents[term.rep];
        let v = &cur.reps[*parent];
        let mut rho = BTreeMap::new();
        for a in v.support() {
            let img = match term.map.get(&a) {
                Some(b) if keep.contains(b) => *b,
                Some(b) => *moved.entry(*b).or_insert_with(|| fresh.fresh()),
                None => fresh.fresh(),
            };
            rho.insert(a, img);
        }
        emit(term.coef.clone(), *parent, rho.clone());
        let main = v.component(k);
        for set in main.atom_sets(k) {
            let sigma = order_map(&ord.sort(&set), s);
            for (odd, part) in partial_moves(&sigma) {
                let map = rho
                    .iter()
                    .map(|(a, b)| match part.get(a) {
                        Some(m) if m != a => (*a, *m),
                        _ => (*a, *b),
                    })
                    .collect();
                emit(-(&term.coef * &sign(odd, ring)), *parent, map);
            }
        }
    }

    for sol in &level.local {
        let sorted: Vec<Atom> = sol.set.iter().copied().collect();
        let sigma = order_map(&sorted, s);
        for (c, r, beta) in &sol.terms {
            let mut pi = BTreeMap::new();
            for a in cur.reps[*r].support() {
                pi.insert(a, beta.get(&a).copied().unwrap_or_else(|| fresh.fresh()));
            }
            for (odd, part) in partial_moves(&sigma) {
                let map = pi.iter().map(|(a, b)| (*a, *part.get(b).unwrap_or(b))).collect();
                emit(c * &sign(odd, ring), *r, map);
            }
        }
    }

    let result: Vec<Term> = out
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((rep, map), coef)| Term {
            coef,
            rep,
            map: map.into_iter().collect(),
        })
        .collect();
    if combine(cur, &result) != cur.target {
        return Err(Error::Verification("pulled-back combination misses the target".into()));
    }
    Ok(result)
}

/// Outcome of the finitary problem for a matrix-target pair.
#[derive(Clone, Debug)]
pub struct FinSolveOutcome {
    pub solvable: bool,
    /// A finitary vector over the columns with `A · x = t`.
    pub witness: Option<FinVector>,
    pub trace: Vec<LevelTrace>,
    pub note: Option<String>,
}

/// Decides whether `t` is a finite combination of columns of `A`.
pub fn finsolve(a: &SymMatrix, t: &SymVector) -> Result<FinSolveOutcome> {
    let conv = to_instance(a, t)?;
    let out = solve_instance(&conv.instance)?;
    let mut result = FinSolveOutcome {
        solvable: out.solvable,
        witness: None,
        trace: out.trace,
        note: out.note,
    };
    if let Some(terms) = out.combination {
        match witness_from_terms(a, t, &conv, &terms) {
            Ok(w) => result.witness = Some(w),
            Err(e) => result.note = Some(format!("witness extraction failed: {e}")),
        }
    }
    Ok(result)
}

fn witness_from_terms(a: &SymMatrix, t: &SymVector, conv: &Conversion, terms: &[Term]) -> Result<FinVector> {
    let pinned: BTreeSet<Atom> = conv.pinned.iter().copied().collect();
    // instance renamings act on labels; read them back as atoms fixing T
    let maps: Vec<BTreeMap<Atom, Atom>> = terms
        .iter()
        .map(|term| term.map.iter().map(|(p, q)| (conv.atom_of(*p), conv.atom_of(*q))).collect())
        .collect();
    let mut used: BTreeSet<Atom> = pinned.clone();
    used.extend(a.support().iter().copied());
    used.extend(t.support().iter().copied());
    for m in &maps {
        used.extend(m.values().copied());
    }
    for o in &conv.origins {
        used.extend(o.column.tuple.iter().copied());
    }
    let mut fresh = FreshAtoms::above(&used);
    let cols = a.cols();
    let mut x = FinVector::zero(cols.clone(), a.ring().clone());
    for (term, map) in terms.iter().zip(maps) {
        if conv.instance.reps[term.rep].is_zero() {
            continue;
        }
        let c0 = &conv.origins[term.rep].column;
        let mut rho = map;
        for &b in &c0.tuple {
            if pinned.contains(&b) {
                rho.insert(b, b);
            } else if !rho.contains_key(&b) {
                rho.insert(b, fresh.fresh());
            }
        }
        let e = cols.canonical_element(&c0.rename(&|b| rho[&b]));
        x.add_at(&e, &term.coef);
    }
    if !column_combination(a, &x)?.same(t) {
        return Err(Error::Verification("finitary witness does not reproduce the target".into()));
    }
    Ok(x)
}

/// `Σ x(c) · A(_, c)` for finitary `x`.
pub fn column_combination(a: &SymMatrix, x: &FinVector) -> Result<SymVector> {
    let mut out = SymVector::zero(a.rows().clone(), a.ring().clone()).refine(a.support());
    for (c, q) in x.entries() {
        out = out.add(&a.column(c).scale(q))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::local::bijections;
    use super::*;
    use crate::atoms::{atoms, PermGroup};
    use crate::orbits::{Entry, OrbitDecl, OrbitSet, Pattern, ProductPattern};
    use crate::ring::Ring;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn c(t: &[u32], slot: usize) -> Coord {
        Coord { tuple: atoms(t), slot }
    }

    fn vecof(ring: &Ring, items: &[(&[u32], usize, i64)]) -> InstVec {
        InstVec::from_entries(items.iter().map(|(t, s, x)| (c(t, *s), ring.from_int(*x))))
    }

    fn check(inst: &Instance) -> InstanceOutcome {
        let out = solve_instance(inst).unwrap();
        if out.solvable {
            assert_eq!(out.note, None);
            assert_eq!(combine(inst, out.combination.as_ref().unwrap()), inst.target);
        }
        out
    }

    #[test]
    fn one_dimensional_examples() {
        for ring in [Ring::Integer, Ring::Rational] {
            let inst = Instance::new(ring.clone(), [(1, 1)].into(), vec![vecof(&ring, &[(&[1], 0, 1)])], vecof(&ring, &[(&[1], 0, 1), (&[2], 0, 1)])).unwrap();
            assert!(check(&inst).solvable);
            let inst = Instance::new(ring.clone(), [(1, 1)].into(), vec![vecof(&ring, &[(&[1], 0, 2)])], vecof(&ring, &[(&[1], 0, 1)])).unwrap();
            assert_eq!(check(&inst).solvable, ring == Ring::Rational);
        }
    }

    /// Differences `(x) − (y)` span exactly the vectors with total sum 0.
    #[test]
    fn differences() {
        let z = Ring::Integer;
        let rep = vecof(&z, &[(&[1], 0, 1), (&[2], 0, -1)]);
        let yes = vecof(&z, &[(&[5], 0, 3), (&[6], 0, -1), (&[7], 0, -2)]);
        let no = vecof(&z, &[(&[5], 0, 3), (&[6], 0, -1)]);
        assert!(check(&Instance::new(z.clone(), [(1, 1)].into(), vec![rep.clone()], yes).unwrap()).solvable);
        let out = check(&Instance::new(z, [(1, 1)].into(), vec![rep], no).unwrap());
        assert!(!out.solvable);
        // locally fine, rejected only at the bottom
        assert!(out.trace[0].locally_solvable);
        assert_eq!(out.trace.last().unwrap().atom_dimension, 0);
    }

    #[test]
    fn pairs_with_lower_component() {
        let z = Ring::Integer;
        let rep = vecof(&z, &[(&[1, 2], 0, 1), (&[2, 1], 0, 1), (&[], 0, 1)]);
        let t = vecof(&z, &[(&[3, 4], 0, 1), (&[4, 3], 0, 1), (&[5, 6], 0, 2), (&[6, 5], 0, 2), (&[], 0, 3)]);
        let out = check(&Instance::new(z.clone(), [(0, 1), (2, 1)].into(), vec![rep.clone()], t).unwrap());
        assert!(out.solvable);
        let bad = vecof(&z, &[(&[3, 4], 0, 1), (&[4, 3], 0, 1), (&[], 0, 2)]);
        assert!(!check(&Instance::new(z, [(0, 1), (2, 1)].into(), vec![rep], bad).unwrap()).solvable);
    }

    fn pat(entries: Vec<Entry>) -> Pattern {
        Pattern { orbit: 0, entries }
    }

    #[test]
    fn symmetric_pairs_have_no_finitary_solution() {
        let rows = Arc::new(OrbitSet::single(OrbitDecl::new("B", PermGroup::symmetric(2).unwrap())));
        let cols = Arc::new(OrbitSet::single(OrbitDecl::tuples("C", 2)));
        for ring in [Ring::Rational, Ring::Integer] {
            let pp = ProductPattern {
                row: pat(vec![Entry::Var(0), Entry::Var(1)]),
                col: pat(vec![Entry::Var(0), Entry::Var(1)]),
            };
            let a = SymMatrix::from_entries(rows.clone(), cols.clone(), ring.clone(), BTreeSet::new(), vec![(pp, ring.one())]).unwrap();
            let t = SymVector::constant(rows.clone(), ring.clone(), ring.one());
            let conv = to_instance(&a, &t).unwrap();
            assert_eq!(conv.instance.target.len(), 1);
            assert_eq!(conv.instance.reps.len(), 1);
            assert_eq!(conv.instance.reps[0].len(), 2);
            assert!(!finsolve(&a, &t).unwrap().solvable);
        }
    }

    #[test]
    fn single_ground_column() {
        let rows = Arc::new(OrbitSet::single(OrbitDecl::tuples("B", 1)));
        let cols = Arc::new(OrbitSet::single(OrbitDecl::tuples("C", 2)));
        let z = Ring::Integer;
        let pp = ProductPattern {
            row: pat(vec![Entry::Var(0)]),
            col: pat(vec![Entry::Var(0), Entry::Var(1)]),
        };
        let a = SymMatrix::from_entries(rows.clone(), cols.clone(), z.clone(), BTreeSet::new(), vec![(pp, z.one())]).unwrap();
        let c0 = cols.element(0, atoms(&[1, 2])).unwrap();
        let t = a.column(&c0);
        let out = finsolve(&a, &t).unwrap();
        assert!(out.solvable);
        let w = out.witness.unwrap();
        assert!(column_combination(&a, &w).unwrap().same(&t));
        // the constant target needs infinitely many columns
        assert!(!finsolve(&a, &SymVector::constant(rows, z.clone(), z.one())).unwrap().solvable);
        // zero system
        let zero = SymMatrix::zero(a.rows().clone(), cols, z.clone());
        let out = finsolve(&zero, &SymVector::zero(a.rows().clone(), z)).unwrap();
        assert!(out.solvable && out.witness.unwrap().is_zero());
    }

    /// Three support atoms on pairs used to push the instance to arity 5;
    /// without growth it stays at the pair dimension.
    #[test]
    fn wide_support_keeps_the_dimension() {
        let text = "\
ring Z
set R = orbit(k=2)
set C = orbit(k=2)
rows R
cols C
entry row (a,3) col (b,1) = 1
entry row (a,b) col (3,c) = 2
entry row (2,b) col (b,a) = 2
target row (2,1) = -1
target row (a,b) = 1
";
        let sys = crate::cli::parse(text, None).unwrap();
        assert_eq!(sys.matrix.support().len(), 3);
        let conv = to_instance(&sys.matrix, &sys.target).unwrap();
        assert!(conv.instance.max_arity() <= 2);
        let out = finsolve(&sys.matrix, &sys.target).unwrap();
        if let Some(x) = out.witness {
            assert!(column_combination(&sys.matrix, &x).unwrap().same(&sys.target));
        }
    }

    /// Identity on singletons, except that the column of 7 is zero.
    #[test]
    fn matrix_with_support_is_pinned() {
        let rows = Arc::new(OrbitSet::single(OrbitDecl::tuples("B", 1)));
        let z = Ring::Integer;
        let pp = ProductPattern {
            row: pat(vec![Entry::Var(0)]),
            col: pat(vec![Entry::Var(0)]),
        };
        let support: BTreeSet<Atom> = [Atom::new(7)].into();
        let a = SymMatrix::from_entries(rows.clone(), rows.clone(), z.clone(), support.clone(), vec![(pp, z.one())]).unwrap();
        let point = |n: u32| {
            SymVector::indicator(rows.clone(), z.clone(), [Atom::new(n)].into(), pat(vec![Entry::Atom(Atom::new(n))]), z.one()).unwrap()
        };
        let conv = to_instance(&a, &point(3)).unwrap();
        assert_eq!(conv.pinned, atoms(&[7]));
        assert_eq!(conv.instance.max_arity(), 1);
        assert_eq!((conv.label(Atom::new(9)), conv.atom_of(Atom::new(8))), (Atom::new(8), Atom::new(9)));
        assert_eq!(conv.atom_of(Atom::new(7)), Atom::new(8));
        let yes = finsolve(&a, &point(3)).unwrap();
        assert!(yes.solvable);
        assert!(column_combination(&a, &yes.witness.unwrap()).unwrap().same(&point(3)));
        assert!(!finsolve(&a, &point(7)).unwrap().solvable);
        let both = point(3).add(&point(9)).unwrap();
        assert!(finsolve(&a, &both).unwrap().witness.is_some());
    }

    /// All renamings of the representatives into a fixed pool, solved as one
    /// finite system. A hit proves solvability.
    fn pool_solvable(inst: &Instance, extra: usize) -> bool {
        let mut pool: Vec<Atom> = inst.atoms().into_iter().collect();
        let mut fresh = FreshAtoms::above(&pool);
        pool.extend(fresh.take(extra));
        let mut cols: Vec<InstVec> = Vec::new();
        for r in &inst.reps {
            let from: Vec<Atom> = r.support().into_iter().collect();
            for sub in choose(&pool, from.len()) {
                for m in bijections(&from, &sub) {
                    cols.push(apply_map(r, &m));
                }
            }
        }
        let mut rows: BTreeSet<Coord> = inst.target.entries().keys().cloned().collect();
        for col in &cols {
            rows.extend(col.entries().keys().cloned());
        }
        let zero = inst.ring.zero();
        let m: Vec<Vec<RingElem>> = rows.iter().map(|r| cols.iter().map(|v| v.get(r).cloned().unwrap_or(zero.clone())).collect()).collect();
        let b: Vec<RingElem> = rows.iter().map(|r| inst.target.get(r).cloned().unwrap_or(zero.clone())).collect();
        inst.ring.solve_finite(&m, &b).unwrap().is_some()
    }

    fn choose(xs: &[Atom], n: usize) -> Vec<Vec<Atom>> {
        if n == 0 {
            return vec![vec![]];
        }
        if xs.len() < n {
            return vec![];
        }
        let mut out: Vec<Vec<Atom>> = choose(&xs[1..], n - 1)
            .into_iter()
            .map(|mut v| {
                v.insert(0, xs[0]);
                v
            })
            .collect();
        out.extend(choose(&xs[1..], n));
        out
    }

    fn arb_vec(k: usize) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
        proptest::collection::vec(
            (
                proptest::sample::subsequence(vec![1u32, 2, 3], 0..=k).prop_shuffle(),
                -2i64..=2,
            ),
            0..=3,
        )
    }

    fn build(ring: &Ring, items: &[(Vec<u32>, i64)]) -> InstVec {
        InstVec::from_entries(items.iter().map(|(t, x)| (Coord { tuple: atoms(t), slot: 0 }, ring.from_int(*x))))
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (1usize..=2, any::<bool>()).prop_flat_map(|(k, integer)| {
            (proptest::collection::vec(arb_vec(k), 1..=2), arb_vec(k), Just(k), Just(integer)).prop_map(|(reps, t, k, integer)| {
                let ring = if integer { Ring::Integer } else { Ring::Rational };
                let widths: BTreeMap<usize, usize> = (0..=k).map(|a| (a, 1)).collect();
                let reps = reps.iter().map(|r| build(&ring, r)).collect();
                Instance::new(ring.clone(), widths, reps, build(&ring, &t)).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn agrees_with_pool_search(inst in arb_instance()) {
            let out = check(&inst);
            if pool_solvable(&inst, 3) {
                prop_assert!(out.solvable);
            }
            if local_solutions(&inst).unwrap().is_none() {
                prop_assert!(!out.solvable);
            }
        }

        /// Targets built from renamed representatives are always solvable.
        #[test]
        fn combinations_are_found(inst in arb_instance(), coefs in proptest::collection::vec(-2i64..=2, 3), shift in 3u32..6) {
            let ring = inst.ring.clone();
            let mut t = InstVec::new();
            for (i, q) in coefs.iter().enumerate() {
                let r = &inst.reps[i % inst.reps.len()];
                let moved = r.rename(&|a| Atom::new(a.id() + shift * i as u32));
                t.add_scaled(&moved, &ring.from_int(*q));
            }
            let inst = Instance { target: t, ..inst };
            prop_assert!(check(&inst).solvable);
        }

        /// Each step strictly lowers the atom dimension.
        #[test]
        fn reduction_lowers_dimension(inst in arb_instance()) {
            if inst.max_arity() > 0 && locally_solvable(&inst).unwrap() {
                let (next, _) = reduce_dimension(&inst).unwrap();
                prop_assert!(next.max_arity() < inst.max_arity() || next.reps.iter().all(|r| r.is_zero()) && next.target.is_zero());
            }
        }
    }
}
