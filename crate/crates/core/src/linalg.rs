//! Dense exact linear algebra: rank and determinant over a [`Field`], and
//! fraction-free elimination over ℤ[Γ].

use crate::field::Field;
use crate::gamma::Laurent;

/// Row echelon form in place; returns the rank.
pub fn rank<F: Field>(f: &F, m: &mut [Vec<F::Elem>]) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !f.is_zero(&m[i][c])) else { continue };
        m.swap(r, p);
        let inv = f.inv(&m[r][c]).expect("nonzero pivot");
        for i in r + 1..rows {
            if f.is_zero(&m[i][c]) {
                continue;
            }
            let k = f.mul(&m[i][c], &inv);
            for j in c..cols {
                let t = f.mul(&k, &m[r][j]);
                m[i][j] = f.sub(&m[i][j], &t);
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Determinant by Gaussian elimination.
pub fn det<F: Field>(f: &F, mut m: Vec<Vec<F::Elem>>) -> F::Elem {
    let n = m.len();
    let mut acc = f.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !f.is_zero(&m[i][c])) else { return f.zero() };
        if p != c {
            m.swap(c, p);
            acc = f.neg(&acc);
        }
        acc = f.mul(&acc, &m[c][c]);
        let inv = f.inv(&m[c][c]).expect("nonzero pivot");
        for i in c + 1..n {
            if f.is_zero(&m[i][c]) {
                continue;
            }
            let k = f.mul(&m[i][c], &inv);
            for j in c..n {
                let t = f.mul(&k, &m[c][j]);
                m[i][j] = f.sub(&m[i][j], &t);
            }
        }
    }
    acc
}

/// Rank over the fraction field of ℤ[Γ] by Bareiss elimination; every
/// division is exact.
pub fn rank_laurent(mut m: Vec<Vec<Laurent>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut prev: Option<Laurent> = None;
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let mut v = m[r][c].mul(&m[i][j]);
                v.sub_assign(&m[i][c].mul(&m[r][j]));
                m[i][j] = match &prev {
                    Some(d) => v.div_exact(d).expect("Bareiss division is exact"),
                    None => v,
                };
            }
            m[i][c] = Laurent::zero();
        }
        prev = Some(m[r][c].clone());
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}
