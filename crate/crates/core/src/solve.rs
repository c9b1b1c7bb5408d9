//! General solvability: `t = A · x` for a finitely supported `x`.
//!
//! Any such `x` is a finite combination of tight-orbit indicators, and the
//! product is well-defined exactly when it is for each indicator used. So
//! the problem becomes finitary solvability for the matrix `Ã` whose
//! columns are the products `A · 1_O` over all tight orbits `O` of the
//! columns (zero where the product is ill-defined).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::atoms::{Atom, FreshAtoms};
use crate::basis::expand_tight;
use crate::error::{Error, Result};
use crate::finsolve::{finsolve, LevelTrace};
use crate::linvec::{mat_vec, SymMatrix, SymVector};
use crate::orbits::{Entry, Pattern, ProductPattern, TightFamilies, TightOrbit};
use crate::ring::RingElem;

/// Where a product `A · x` breaks down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// An entry of `A` (relative to `sup(A) ∪ sup(x)`).
    pub entry: ProductPattern,
    /// The S-orbit of columns where `x` is nonzero.
    pub pattern: Pattern,
    /// A column variable not pinned by the row.
    pub variable: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub exact: bool,
    pub violation: Option<Violation>,
}

/// `A · x` is well-defined iff no entry of `A` with a column-only variable
/// meets a nonzero orbit of `x`: such an entry would pair one row with
/// infinitely many columns of that orbit.
pub fn is_exact(a: &SymMatrix, x: &SymVector) -> Result<ExactnessReport> {
    if **a.cols() != **x.domain() {
        return Err(Error::DomainMismatch("vector is not over the matrix columns".into()));
    }
    let s: BTreeSet<Atom> = a.support().union(x.support()).copied().collect();
    let ar = a.refine(&s);
    let xr = x.refine(&s);
    for pp in ar.entries().keys() {
        let Some(&variable) = pp.column_only_vars().first() else {
            continue;
        };
        let q = a.cols().canonicalize(&pp.col);
        if xr.entries().contains_key(&q) {
            return Ok(ExactnessReport {
                exact: false,
                violation: Some(Violation {
                    entry: pp.clone(),
                    pattern: q,
                    variable,
                }),
            });
        }
    }
    Ok(ExactnessReport {
        exact: true,
        violation: None,
    })
}

/// The extended matrix over `B × F`, where `F` indexes the tight orbits of
/// the columns.
#[derive(Clone, Debug)]
pub struct TildeMatrix {
    pub matrix: SymMatrix,
    /// Reads an element of `F` back as a tight orbit of the columns.
    pub families: Arc<TightFamilies>,
    /// Orbits of `F` (relative to `sup(A)`) whose product is ill-defined;
    /// their columns are zero.
    pub dropped: Vec<Pattern>,
}

pub fn build_tilde_matrix(a: &SymMatrix) -> Result<TildeMatrix> {
    let families = Arc::new(TightFamilies::new(a.cols().clone())?);
    let f = &families.set;
    let s = a.support();
    let mut fresh = FreshAtoms::above(s);
    let mut entries: BTreeMap<ProductPattern, RingElem> = BTreeMap::new();
    let mut dropped = Vec::new();
    for o in 0..f.len() {
        for pf in f.s_orbits(o, s) {
            let (e, asg) = f.instantiate(&pf, &mut fresh);
            let x = expand_tight(a.cols(), a.ring(), &families.to_tight(&e), &BTreeSet::new());
            if !is_exact(a, &x)?.exact {
                dropped.push(pf);
                continue;
            }
            let col = mat_vec(a, &x)?.ok_or_else(|| Error::Verification("an exact product came out ill-defined".into()))?;
            let back: BTreeMap<Atom, u32> = asg.iter().map(|(v, b)| (*b, *v)).collect();
            let offset = pf.vars().iter().max().map_or(0, |m| m + 1);
            for (q, c) in col.entries() {
                let row = q
                    .entries
                    .iter()
                    .map(|en| match en {
                        Entry::Atom(b) => back.get(b).map_or(*en, |v| Entry::Var(*v)),
                        Entry::Var(v) => Entry::Var(v + offset),
                    })
                    .collect();
                // different row orbits of one column can name the same
                // product orbit when the family group moves the column
                let pp = ProductPattern::new(a.rows(), f, Pattern { orbit: q.orbit, entries: row }, pf.clone())?;
                match entries.get(&pp) {
                    Some(prev) if prev != c => {
                        return Err(Error::Verification("a column of the extended matrix is not invariant".into()));
                    }
                    Some(_) => {}
                    None => {
                        entries.insert(pp, c.clone());
                    }
                }
            }
        }
    }
    let matrix = SymMatrix::from_entries(a.rows().clone(), f.clone(), a.ring().clone(), s.clone(), entries.into_iter().collect())?;
    Ok(TildeMatrix {
        matrix,
        families,
        dropped,
    })
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub solvable: bool,
    /// A verified solution.
    pub witness: Option<SymVector>,
    /// The witness as a combination of tight orbits.
    pub terms: Option<Vec<(TightOrbit, RingElem)>>,
    pub trace: Vec<LevelTrace>,
    pub note: Option<String>,
}

/// `Σ q · 1_O` over the columns.
pub fn witness_vector(a: &SymMatrix, terms: &[(TightOrbit, RingElem)]) -> Result<SymVector> {
    let mut x = SymVector::zero(a.cols().clone(), a.ring().clone());
    for (t, q) in terms {
        x = x.add(&expand_tight(a.cols(), a.ring(), t, &BTreeSet::new()).scale(q))?;
    }
    Ok(x)
}

/// Decides whether `t` is in the span of `A`, returning a verified witness
/// on YES whenever extraction succeeds.
pub fn solve(a: &SymMatrix, t: &SymVector) -> Result<SolveOutcome> {
    let tilde = build_tilde_matrix(a)?;
    let fin = finsolve(&tilde.matrix, t)?;
    let mut out = SolveOutcome {
        solvable: fin.solvable,
        witness: None,
        terms: None,
        trace: fin.trace,
        note: fin.note,
    };
    if let Some(w) = fin.witness {
        let terms: Vec<(TightOrbit, RingElem)> = w.entries().iter().map(|(e, q)| (tilde.families.to_tight(e), q.clone())).collect();
        let x = witness_vector(a, &terms)?;
        if !verify(a, &x, t)? {
            return Err(Error::Verification("the reconstructed solution does not satisfy the system".into()));
        }
        out.witness = Some(x);
        out.terms = Some(terms);
    }
    Ok(out)
}

/// True iff `A · x` is well-defined and equals `t`.
pub fn verify(a: &SymMatrix, x: &SymVector, t: &SymVector) -> Result<bool> {
    if **a.rows() != **t.domain() {
        return Err(Error::DomainMismatch("target is not over the matrix rows".into()));
    }
    if !is_exact(a, x)?.exact {
        return Ok(false);
    }
    Ok(mat_vec(a, x)?.is_some_and(|y| y.same(t)))
}
