//! Effective commutative rings: ℚ, ℤ and ℤ/m, each with a solver for finite
//! linear systems.

mod linear;
mod snf;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use linear::solve_rational;
pub use snf::{smith_normal_form, solve_integer, Snf};

/// The coefficient ring of a system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Rational,
    Integer,
    /// Residues modulo `m ≥ 2`.
    Modular(BigInt),
}

/// An exact ring value tagged with its backend.
///
/// Arithmetic between values of different backends (or different moduli)
/// is a programming error and panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingElem {
    Rational(BigRational),
    Integer(BigInt),
    Residue { value: BigInt, modulus: BigInt },
}

impl Ring {
    pub fn modular(m: impl Into<BigInt>) -> Result<Ring> {
        let m = m.into();
        if m < BigInt::from(2) {
            return Err(Error::Ring(format!("modulus must be at least 2, got {m}")));
        }
        Ok(Ring::Modular(m))
    }

    pub fn zero(&self) -> RingElem {
        self.from_int(0)
    }

    pub fn one(&self) -> RingElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: impl Into<BigInt>) -> RingElem {
        self.from_bigint(n.into())
    }

    pub fn from_bigint(&self, n: BigInt) -> RingElem {
        match self {
            Ring::Rational => RingElem::Rational(BigRational::from_integer(n)),
            Ring::Integer => RingElem::Integer(n),
            Ring::Modular(m) => RingElem::Residue {
                value: n.mod_floor(m),
                modulus: m.clone(),
            },
        }
    }

    /// Converts a rational literal. Fractions are only accepted in ℚ; in
    /// ℤ/m a denominator would need an inverse, which we do not guess.
    pub fn from_rational(&self, q: &BigRational) -> Result<RingElem> {
        match self {
            Ring::Rational => Ok(RingElem::Rational(q.clone())),
            _ if q.is_integer() => Ok(self.from_bigint(q.to_integer())),
            _ => Err(Error::Ring(format!("fraction {q} is not an element of {self}"))),
        }
    }

    pub fn contains(&self, x: &RingElem) -> bool {
        match (self, x) {
            (Ring::Rational, RingElem::Rational(_)) => true,
            (Ring::Integer, RingElem::Integer(_)) => true,
            (Ring::Modular(m), RingElem::Residue { modulus, .. }) => m == modulus,
            _ => false,
        }
    }

    /// Decides `M·x = b` and returns a witness when one exists.
    pub fn solve_finite(&self, m: &[Vec<RingElem>], b: &[RingElem]) -> Result<Option<Vec<RingElem>>> {
        let cols = check_dims(m, b)?;
        for x in m.iter().flatten().chain(b) {
            if !self.contains(x) {
                return Err(Error::DomainMismatch(format!("{x:?} is not an element of {self}")));
            }
        }
        match self {
            Ring::Rational => {
                let mq: Vec<Vec<BigRational>> =
                    m.iter().map(|r| r.iter().map(|x| x.as_rational().clone()).collect()).collect();
                let bq: Vec<BigRational> = b.iter().map(|x| x.as_rational().clone()).collect();
                Ok(solve_rational(&mq, &bq, cols).map(|x| x.into_iter().map(RingElem::Rational).collect()))
            }
            Ring::Integer => {
                let mz = to_int_matrix(m);
                let bz: Vec<BigInt> = b.iter().map(|x| x.to_bigint()).collect();
                Ok(solve_integer(&mz, &bz, cols).map(|x| x.into_iter().map(RingElem::Integer).collect()))
            }
            Ring::Modular(modulus) => {
                // M·x ≡ b (mod m)  ⇔  [M | m·I]·(x, y) = b over ℤ
                let n = m.len();
                let mut lifted = to_int_matrix(m);
                for (i, row) in lifted.iter_mut().enumerate() {
                    row.extend((0..n).map(|j| if i == j { modulus.clone() } else { BigInt::zero() }));
                }
                let bz: Vec<BigInt> = b.iter().map(|x| x.to_bigint()).collect();
                Ok(solve_integer(&lifted, &bz, cols + n)
                    .map(|x| x.into_iter().take(cols).map(|v| self.from_bigint(v)).collect()))
            }
        }
    }
}

fn check_dims(m: &[Vec<RingElem>], b: &[RingElem]) -> Result<usize> {
    if m.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows but target has {} entries",
            m.len(),
            b.len()
        )));
    }
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix".into()));
    }
    Ok(cols)
}

fn to_int_matrix(m: &[Vec<RingElem>]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|x| x.to_bigint()).collect()).collect()
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Rational => write!(f, "Q"),
            Ring::Integer => write!(f, "Z"),
            Ring::Modular(m) => write!(f, "Zmod {m}"),
        }
    }
}

impl RingElem {
    pub fn is_zero(&self) -> bool {
        match self {
            RingElem::Rational(q) => q.is_zero(),
            RingElem::Integer(n) => n.is_zero(),
            RingElem::Residue { value, .. } => value.is_zero(),
        }
    }

    pub fn ring(&self) -> Ring {
        match self {
            RingElem::Rational(_) => Ring::Rational,
            RingElem::Integer(_) => Ring::Integer,
            RingElem::Residue { modulus, .. } => Ring::Modular(modulus.clone()),
        }
    }

    fn as_rational(&self) -> &BigRational {
        match self {
            RingElem::Rational(q) => q,
            other => panic!("expected a rational, got {other:?}"),
        }
    }

    /// The integer representative (residues in `[0, m)`). Panics on a
    /// rational value.
    pub fn to_bigint(&self) -> BigInt {
        match self {
            RingElem::Integer(n) => n.clone(),
            RingElem::Residue { value, .. } => value.clone(),
            RingElem::Rational(q) => panic!("expected an integer, got {q}"),
        }
    }

    /// Value as a rational number, for display and cross-ring checks.
    pub fn to_rational(&self) -> BigRational {
        match self {
            RingElem::Rational(q) => q.clone(),
            RingElem::Integer(n) | RingElem::Residue { value: n, .. } => BigRational::from_integer(n.clone()),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            RingElem::Rational(q) => q.is_one(),
            RingElem::Integer(n) | RingElem::Residue { value: n, .. } => n.is_one(),
        }
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElem::Rational(q) => write!(f, "{q}"),
            RingElem::Integer(n) => write!(f, "{n}"),
            RingElem::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

fn binop(
    a: &RingElem,
    b: &RingElem,
    fq: impl Fn(&BigRational, &BigRational) -> BigRational,
    fz: impl Fn(&BigInt, &BigInt) -> BigInt,
) -> RingElem {
    match (a, b) {
        (RingElem::Rational(x), RingElem::Rational(y)) => RingElem::Rational(fq(x, y)),
        (RingElem::Integer(x), RingElem::Integer(y)) => RingElem::Integer(fz(x, y)),
        (RingElem::Residue { value: x, modulus: m }, RingElem::Residue { value: y, modulus: m2 }) if m == m2 => {
            RingElem::Residue {
                value: fz(x, y).mod_floor(m),
                modulus: m.clone(),
            }
        }
        _ => panic!("mixed ring backends: {a:?} and {b:?}"),
    }
}

impl<'a> Add<&'a RingElem> for &'a RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        binop(self, rhs, |x, y| x + y, |x, y| x + y)
    }
}

impl<'a> Sub<&'a RingElem> for &'a RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        binop(self, rhs, |x, y| x - y, |x, y| x - y)
    }
}

impl<'a> Mul<&'a RingElem> for &'a RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        binop(self, rhs, |x, y| x * y, |x, y| x * y)
    }
}

impl Add for RingElem {
    type Output = RingElem;
    fn add(self, rhs: RingElem) -> RingElem {
        &self + &rhs
    }
}

impl Sub for RingElem {
    type Output = RingElem;
    fn sub(self, rhs: RingElem) -> RingElem {
        &self - &rhs
    }
}

impl Mul for RingElem {
    type Output = RingElem;
    fn mul(self, rhs: RingElem) -> RingElem {
        &self * &rhs
    }
}

impl AddAssign<&RingElem> for RingElem {
    fn add_assign(&mut self, rhs: &RingElem) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&RingElem> for RingElem {
    fn sub_assign(&mut self, rhs: &RingElem) {
        *self = &*self - rhs;
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        match self {
            RingElem::Rational(q) => RingElem::Rational(-q),
            RingElem::Integer(n) => RingElem::Integer(-n),
            RingElem::Residue { value, modulus } => RingElem::Residue {
                value: (-value).mod_floor(modulus),
                modulus: modulus.clone(),
            },
        }
    }
}

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

/// `M·x` over any backend.
pub fn mat_mul_vec(m: &[Vec<RingElem>], x: &[RingElem], ring: &Ring) -> Vec<RingElem> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(ring.zero(), |acc, (a, b)| &acc + &(a * b))
        })
        .collect()
}

/// Parses `n`, `-n` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}
