//! Linear equations over orbit-finite sets of atom tuples.
//!
//! [`solve::solve`] decides finitely supported solvability and
//! [`finsolve::finsolve`] finitary solvability. Both return verified
//! witnesses on YES.

pub mod atoms;
pub mod error;
pub mod ring;
pub mod orbits;
pub mod linvec;
pub mod basis;
pub mod finsolve;
pub mod solve;
pub mod oracle;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/orbits.md")]
    mod orbits {}
    #[doc = include_str!("../../../book/src/vectors.md")]
    mod vectors {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/finitary.md")]
    mod finitary {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/format.md")]
    mod format {}
}
