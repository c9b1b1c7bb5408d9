use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// `D = U·M·V` with `U`, `V` unimodular and `D` diagonal, `d₁ | d₂ | …`,
/// all diagonal entries nonnegative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snf {
    pub u: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub rank: usize,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect()
}

/// row_i -= q·row_j, mirrored on `u`
fn row_axpy(d: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], i: usize, j: usize, q: &BigInt) {
    for k in 0..d[i].len() {
        let t = q * &d[j][k];
        d[i][k] -= t;
    }
    for k in 0..u[i].len() {
        let t = q * &u[j][k];
        u[i][k] -= t;
    }
}

/// col_i -= q·col_j, mirrored on `v`
fn col_axpy(d: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], i: usize, j: usize, q: &BigInt) {
    for row in d.iter_mut() {
        let t = q * &row[j];
        row[i] -= t;
    }
    for row in v.iter_mut() {
        let t = q * &row[j];
        row[i] -= t;
    }
}

fn swap_cols(d: &mut [Vec<BigInt>], i: usize, j: usize) {
    for row in d.iter_mut() {
        row.swap(i, j);
    }
}

/// Smith normal form. The pivot is the entry of least absolute value in the
/// remaining block (first in row-major order on ties).
pub fn smith_normal_form(m: &[Vec<BigInt>], cols: usize) -> Snf {
    let n = m.len();
    let mut d: Vec<Vec<BigInt>> = m.to_vec();
    let mut u = identity(n);
    let mut v = identity(cols);
    let mut rank = 0;

    for t in 0..n.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..cols {
                    if !d[i][j].is_zero()
                        && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(u, d, v, rank);
            };
            d.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..n {
                if !d[i][t].is_zero() {
                    let q = d[i][t].div_floor(&d[t][t]);
                    row_axpy(&mut d, &mut u, i, t, &q);
                    clean &= d[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !d[t][j].is_zero() {
                    let q = d[t][j].div_floor(&d[t][t]);
                    col_axpy(&mut d, &mut v, j, t, &q);
                    clean &= d[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into the pivot row
            let offending = (t + 1..n).find(|&i| (t + 1..cols).any(|j| !d[i][j].is_multiple_of(&d[t][t])));
            match offending {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    row_axpy(&mut d, &mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        rank += 1;
    }
    finish(u, d, v, rank)
}

fn finish(u: Vec<Vec<BigInt>>, d: Vec<Vec<BigInt>>, v: Vec<Vec<BigInt>>, rank: usize) -> Snf {
    Snf { u, d, v, rank }
}

/// Integer solutions of `M·x = b` via the Smith form: `D·y = U·b`, `x = V·y`.
pub fn solve_integer(m: &[Vec<BigInt>], b: &[BigInt], cols: usize) -> Option<Vec<BigInt>> {
    let snf = smith_normal_form(m, cols);
    let ub: Vec<BigInt> = snf
        .u
        .iter()
        .map(|row| row.iter().zip(b).map(|(a, c)| a * c).sum())
        .collect();
    let mut y = vec![BigInt::zero(); cols];
    for (i, c) in ub.iter().enumerate() {
        if i < snf.rank {
            let (q, r) = c.div_rem(&snf.d[i][i]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !c.is_zero() {
            return None;
        }
    }
    Some(
        snf.v
            .iter()
            .map(|row| row.iter().zip(&y).map(|(a, c)| a * c).sum())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], inner: usize, cols: usize) -> Vec<Vec<BigInt>> {
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    fn det(m: &[Vec<BigInt>]) -> BigInt {
        if m.is_empty() {
            return BigInt::from(1);
        }
        let mut total = BigInt::zero();
        for (j, x) in m[0].iter().enumerate() {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = x * det(&minor);
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    fn check(m: &[Vec<BigInt>], cols: usize) -> Snf {
        let s = smith_normal_form(m, cols);
        let n = m.len();
        assert_eq!(mul(&mul(&s.u, m, n, cols), &s.v, cols, cols), s.d);
        assert_eq!(det(&s.u).abs(), BigInt::from(1));
        assert_eq!(det(&s.v).abs(), BigInt::from(1));
        for i in 0..n {
            for j in 0..cols {
                if i != j {
                    assert!(s.d[i][j].is_zero());
                }
            }
        }
        for i in 1..s.rank {
            assert!(s.d[i][i].is_multiple_of(&s.d[i - 1][i - 1]));
        }
        s
    }

    #[test]
    fn small_examples() {
        let s = check(&mat(&[&[2, 4], &[6, 8]]), 2);
        assert_eq!(s.d, mat(&[&[2, 0], &[0, 4]]));
        // |det D| = |det M|
        assert_eq!(det(&mat(&[&[2, 4], &[6, 8]])).abs(), BigInt::from(8));

        let id = mat(&[&[1, 0], &[0, 1]]);
        let s = check(&id, 2);
        assert_eq!((s.u, s.d, s.v), (id.clone(), id.clone(), id));

        let zero = mat(&[&[0, 0], &[0, 0]]);
        let s = check(&zero, 2);
        assert_eq!(s.d, zero);
        assert_eq!(s.u, mat(&[&[1, 0], &[0, 1]]));
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn divisibility_fixup() {
        let s = check(&mat(&[&[2, 0], &[0, 3]]), 2);
        assert_eq!(s.d, mat(&[&[1, 0], &[0, 6]]));
    }

    proptest! {
        #[test]
        fn snf_reconstructs(rows in 0usize..5, cols in 0usize..5,
                            seed in proptest::collection::vec(-9i64..=9, 25)) {
            let m: Vec<Vec<BigInt>> = (0..rows)
                .map(|i| (0..cols).map(|j| BigInt::from(seed[i * 5 + j])).collect())
                .collect();
            check(&m, cols);
        }
    }
}
