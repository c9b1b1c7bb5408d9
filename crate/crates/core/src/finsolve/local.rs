//! Local solvability: for every k-set `A`, the restriction of the target's
//! main component to `A^(k)` must be a finite combination of restrictions
//! of renamed representatives.
//!
//! Only atom sets that actually occur in the target matter (elsewhere the
//! restricted target is zero). For those, a renamed representative `π(v)`
//! restricts to something nonzero only when `π` maps one of `v`'s own atom
//! sets `D` onto `A`, and the restriction depends on `π↾D` alone. So the
//! unknowns are indexed by (representative, D, bijection D → A).

use std::collections::{BTreeMap, BTreeSet};

use crate::atoms::Atom;
use crate::error::Result;
use crate::ring::RingElem;

use super::instance::{apply_map, Coord, InstVec, Instance};

/// A solution of one restricted system: `t̃↾A = Σ coef · β(ṽ_rep↾D)`.
#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub set: BTreeSet<Atom>,
    pub terms: Vec<(RingElem, usize, BTreeMap<Atom, Atom>)>,
}

pub(crate) fn bijections(from: &[Atom], to: &[Atom]) -> Vec<BTreeMap<Atom, Atom>> {
    if from.is_empty() {
        return vec![BTreeMap::new()];
    }
    let mut out = Vec::new();
    for (i, &b) in to.iter().enumerate() {
        let mut rest = to.to_vec();
        rest.remove(i);
        for mut m in bijections(&from[1..], &rest) {
            m.insert(from[0], b);
            out.push(m);
        }
    }
    out
}

/// Solves every restriction of the main component; `None` as soon as one
/// is unsolvable.
pub fn local_solutions(inst: &Instance) -> Result<Option<Vec<LocalSolution>>> {
    restricted_solutions(inst, inst.max_arity())
}

/// The same for the component of arity `k`. Restrictions of any component
/// are necessary conditions; only the main one drives the reduction.
pub fn restricted_solutions(inst: &Instance, k: usize) -> Result<Option<Vec<LocalSolution>>> {
    let main_t = inst.target.component(k);
    let mains: Vec<InstVec> = inst.reps.iter().map(|r| r.component(k)).collect();
    let mut out = Vec::new();
    for a in main_t.atom_sets(k) {
        let target_a: Vec<Atom> = a.iter().copied().collect();
        let mut columns: Vec<(InstVec, usize, BTreeMap<Atom, Atom>)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (ri, m) in mains.iter().enumerate() {
            for d in m.atom_sets(k) {
                let piece = m.restrict_to_set(&d);
                let from: Vec<Atom> = d.iter().copied().collect();
                for beta in bijections(&from, &target_a) {
                    let col = apply_map(&piece, &beta);
                    if seen.insert(col.clone()) {
                        columns.push((col, ri, beta));
                    }
                }
            }
        }
        let goal = main_t.restrict_to_set(&a);
        let mut rows: BTreeSet<Coord> = goal.entries().keys().cloned().collect();
        for (c, _, _) in &columns {
            rows.extend(c.entries().keys().cloned());
        }
        let zero = inst.ring.zero();
        let matrix: Vec<Vec<RingElem>> = rows
            .iter()
            .map(|r| columns.iter().map(|(c, _, _)| c.get(r).cloned().unwrap_or_else(|| zero.clone())).collect())
            .collect();
        let rhs: Vec<RingElem> = rows.iter().map(|r| goal.get(r).cloned().unwrap_or_else(|| zero.clone())).collect();
        let Some(x) = inst.ring.solve_finite(&matrix, &rhs)? else {
            return Ok(None);
        };
        let terms = x
            .into_iter()
            .zip(columns)
            .filter(|(q, _)| !q.is_zero())
            .map(|(q, (_, ri, beta))| (q, ri, beta))
            .collect();
        out.push(LocalSolution { set: a, terms });
    }
    Ok(Some(out))
}

pub fn locally_solvable(inst: &Instance) -> Result<bool> {
    Ok(local_solutions(inst)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::atoms;
    use crate::ring::Ring;

    fn one(ring: &Ring, t: &[u32], n: i64) -> InstVec {
        InstVec::from_entries([(Coord { tuple: atoms(t), slot: 0 }, ring.from_int(n))])
    }

    fn inst(ring: Ring, rep: InstVec, t: InstVec) -> Instance {
        Instance::new(ring, [(1, 1)].into(), vec![rep], t).unwrap()
    }

    #[test]
    fn unit_vectors_solve_everything_locally() {
        let q = Ring::Rational;
        let mut t = one(&q, &[1], 1);
        t.add_scaled(&one(&q, &[2], 1), &q.one());
        assert!(locally_solvable(&inst(q.clone(), one(&q, &[1], 1), t)).unwrap());
    }

    #[test]
    fn two_does_not_divide_one() {
        let z = Ring::Integer;
        assert!(!locally_solvable(&inst(z.clone(), one(&z, &[1], 2), one(&z, &[1], 1))).unwrap());
        assert!(locally_solvable(&inst(Ring::Rational, one(&Ring::Rational, &[1], 2), one(&Ring::Rational, &[1], 1))).unwrap());
    }

    #[test]
    fn zero_target() {
        let z = Ring::Integer;
        assert!(locally_solvable(&inst(z.clone(), one(&z, &[1], 2), InstVec::new())).unwrap());
    }

    #[test]
    fn bijection_count() {
        assert_eq!(bijections(&atoms(&[1, 2, 3]), &atoms(&[4, 5, 6])).len(), 6);
        assert_eq!(bijections(&[], &[]).len(), 1);
    }
}
