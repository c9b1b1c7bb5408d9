//! One-sided checks used to cross-examine the solver.
//!
//! `pool_search` only ever proves YES: it looks for a solution built from
//! columns (or tight orbits) whose atoms come from a small pool, and
//! verifies anything it finds. `necessary_check` only ever proves NO: it
//! solves finite restrictions that every solution must satisfy.

use std::collections::BTreeSet;

use crate::atoms::{Atom, FreshAtoms};
use crate::basis::expand_tight;
use crate::error::Result;
use crate::finsolve::{restricted_solutions, to_instance};
use crate::linvec::{mat_vec, SymMatrix, SymVector};
use crate::orbits::{OrbitSet, Pattern, TightFamilies};
use crate::ring::RingElem;
use crate::solve::{build_tilde_matrix, is_exact, verify};

/// Which solutions count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Finitely supported solutions.
    Solv,
    /// Finitary solutions.
    FinSolv,
}

#[derive(Clone, Debug)]
pub struct Sandwich {
    pub sufficient_yes: bool,
    pub necessary_yes: bool,
    /// The answer when one side settles it.
    pub forced: Option<bool>,
    pub witness: Option<SymVector>,
}

impl Sandwich {
    /// Whether `answer` is consistent with both sides.
    pub fn admits(&self, answer: bool) -> bool {
        self.forced.is_none_or(|f| f == answer)
    }
}

/// Atoms in the supports plus three per unit of the largest arity.
pub fn default_pool(a: &SymMatrix, t: &SymVector) -> usize {
    let base: BTreeSet<Atom> = a.support().union(t.support()).copied().collect();
    base.len() + 3 * a.rows().max_arity().max(a.cols().max_arity())
}

fn tuples_over(pool: &[Atom], k: usize) -> Vec<Vec<Atom>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for t in tuples_over(pool, k - 1) {
        for &a in pool {
            if !t.contains(&a) {
                let mut u = t.clone();
                u.push(a);
                out.push(u);
            }
        }
    }
    out
}

fn elements_over(set: &OrbitSet, pool: &[Atom]) -> BTreeSet<(usize, Vec<Atom>)> {
    let mut out = BTreeSet::new();
    for (o, decl) in set.orbits().iter().enumerate() {
        for t in tuples_over(pool, decl.arity) {
            out.insert((o, set.canonical_tuple(o, &t)));
        }
    }
    out
}

/// Searches for a solution using only atoms from a pool of `m` atoms that
/// contains both supports. Any hit is verified before it is returned.
pub fn pool_search(a: &SymMatrix, t: &SymVector, mode: Mode, m: usize) -> Result<Option<SymVector>> {
    let base: BTreeSet<Atom> = a.support().union(t.support()).copied().collect();
    let mut pool: Vec<Atom> = base.iter().copied().collect();
    let mut fresh = FreshAtoms::above(&base);
    while pool.len() < m {
        pool.push(fresh.fresh());
    }
    let star: BTreeSet<Atom> = pool.iter().copied().collect();
    let ring = a.ring();
    let cols = a.cols();

    let mut unknowns: Vec<(SymVector, SymVector)> = Vec::new();
    match mode {
        Mode::FinSolv => {
            for (o, tuple) in elements_over(cols, &pool) {
                let e = cols.element(o, tuple)?;
                let x = SymVector::indicator(cols.clone(), ring.clone(), e.tuple.iter().copied().collect(), Pattern::from_element(&e), ring.one())?;
                unknowns.push((x, a.column(&e)));
            }
        }
        Mode::Solv => {
            let families = TightFamilies::new(cols.clone())?;
            for (o, tuple) in elements_over(&families.set, &pool) {
                let e = families.set.element(o, tuple)?;
                let x = expand_tight(cols, ring, &families.to_tight(&e), &BTreeSet::new());
                if !is_exact(a, &x)?.exact {
                    continue;
                }
                if let Some(y) = mat_vec(a, &x)? {
                    unknowns.push((x, y));
                }
            }
        }
    }

    let images: Vec<SymVector> = unknowns.iter().map(|(_, y)| y.refine(&star)).collect();
    let goal = t.refine(&star);
    let mut rows: BTreeSet<Pattern> = goal.entries().keys().cloned().collect();
    for y in &images {
        rows.extend(y.entries().keys().cloned());
    }
    let matrix: Vec<Vec<RingElem>> = rows.iter().map(|p| images.iter().map(|y| y.value_at(p)).collect()).collect();
    let rhs: Vec<RingElem> = rows.iter().map(|p| goal.value_at(p)).collect();
    let Some(q) = ring.solve_finite(&matrix, &rhs)? else {
        return Ok(None);
    };
    let mut x = SymVector::zero(cols.clone(), ring.clone());
    for ((xj, _), qj) in unknowns.iter().zip(&q) {
        if !qj.is_zero() {
            x = x.add(&xj.scale(qj))?;
        }
    }
    Ok(verify(a, &x, t)?.then_some(x))
}

/// False only when some finite restriction that every solution satisfies
/// is unsolvable: the restrictions of each component of the finitary
/// instance (for `Solv`, the instance of the extended matrix).
pub fn necessary_check(a: &SymMatrix, t: &SymVector, mode: Mode) -> Result<bool> {
    let inst = match mode {
        Mode::FinSolv => to_instance(a, t)?.instance,
        Mode::Solv => to_instance(&build_tilde_matrix(a)?.matrix, t)?.instance,
    };
    let mut arities: BTreeSet<usize> = inst.widths.keys().copied().collect();
    arities.extend(inst.target.entries().keys().map(|c| c.arity()));
    for k in arities {
        if restricted_solutions(&inst, k)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn sandwich(a: &SymMatrix, t: &SymVector, mode: Mode, m: usize) -> Result<Sandwich> {
    let witness = pool_search(a, t, mode, m)?;
    let necessary_yes = necessary_check(a, t, mode)?;
    let sufficient_yes = witness.is_some();
    let forced = if sufficient_yes {
        Some(true)
    } else if !necessary_yes {
        Some(false)
    } else {
        None
    };
    Ok(Sandwich {
        sufficient_yes,
        necessary_yes,
        forced,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::PermGroup;
    use crate::orbits::{Entry, OrbitDecl, ProductPattern};
    use crate::ring::Ring;
    use std::sync::Arc;

    fn pat(entries: Vec<Entry>) -> Pattern {
        Pattern { orbit: 0, entries }
    }

    fn system(cols: OrbitDecl, ring: Ring) -> (SymMatrix, SymVector) {
        let rows = Arc::new(OrbitSet::single(OrbitDecl::tuples("B", 1)));
        let pp = ProductPattern {
            row: pat(vec![Entry::Var(0)]),
            col: pat(vec![Entry::Var(0), Entry::Var(1)]),
        };
        let a = SymMatrix::from_entries(rows.clone(), Arc::new(OrbitSet::single(cols)), ring.clone(), BTreeSet::new(), vec![(pp, ring.one())]).unwrap();
        let t = SymVector::constant(rows, ring.clone(), ring.one());
        (a, t)
    }

    #[test]
    fn ordered_pairs_have_a_pool_solution() {
        let (a, t) = system(OrbitDecl::tuples("C", 2), Ring::Integer);
        let x = pool_search(&a, &t, Mode::Solv, 4).unwrap().expect("found");
        assert!(verify(&a, &x, &t).unwrap());
        assert!(necessary_check(&a, &t, Mode::Solv).unwrap());
        assert!(pool_search(&a, &t, Mode::FinSolv, 4).unwrap().is_none());
        assert!(pool_search(&a, &t, Mode::Solv, 6).unwrap().is_some());
    }

    #[test]
    fn unordered_pairs_have_none() {
        for ring in [Ring::Rational, Ring::Integer] {
            let (a, t) = system(OrbitDecl::new("C", PermGroup::symmetric(2).unwrap()), ring);
            for m in 2..=5 {
                assert!(pool_search(&a, &t, Mode::Solv, m).unwrap().is_none());
            }
        }
    }

    #[test]
    fn zero_target() {
        let (a, t) = system(OrbitDecl::tuples("C", 2), Ring::Integer);
        let zero = SymVector::zero(t.domain().clone(), Ring::Integer);
        let x = pool_search(&a, &zero, Mode::FinSolv, 2).unwrap().unwrap();
        assert!(x.is_zero());
        assert!(necessary_check(&a, &zero, Mode::FinSolv).unwrap());
        let s = sandwich(&a, &zero, Mode::Solv, 2).unwrap();
        assert_eq!(s.forced, Some(true));
    }

    /// Rows {α, β} against columns αβ and βα: only ½ everywhere works.
    #[test]
    fn symmetric_sum_fails_over_the_integers() {
        let rows = Arc::new(OrbitSet::single(OrbitDecl::new("B", PermGroup::symmetric(2).unwrap())));
        let cols = Arc::new(OrbitSet::single(OrbitDecl::tuples("C", 2)));
        for (ring, nec_solv) in [(Ring::Integer, false), (Ring::Rational, true)] {
            let pp = ProductPattern {
                row: pat(vec![Entry::Var(0), Entry::Var(1)]),
                col: pat(vec![Entry::Var(0), Entry::Var(1)]),
            };
            let a = SymMatrix::from_entries(rows.clone(), cols.clone(), ring.clone(), BTreeSet::new(), vec![(pp, ring.one())]).unwrap();
            let t = SymVector::constant(rows.clone(), ring.clone(), ring.one());
            assert!(!necessary_check(&a, &t, Mode::FinSolv).unwrap());
            assert_eq!(necessary_check(&a, &t, Mode::Solv).unwrap(), nec_solv);
            assert_eq!(sandwich(&a, &t, Mode::Solv, 4).unwrap().forced, if nec_solv { Some(true) } else { Some(false) });
        }
    }
}
