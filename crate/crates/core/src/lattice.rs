//! Integer lattices in Z[beta] kept in Hermite normal form.
//!
//! Coordinates are power-basis coefficients. Pivots are taken from the highest power of
//! beta downwards, pivots are positive and entries above a pivot lie in `[0, pivot)`, so a
//! rank-one lattice generated by `beta - 3` is stored as that element.

use num_bigint::BigInt;
use num_integer::Integer;
use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::field::BetaField;

/// Row-style Hermite normal form of the lattice spanned by `rows`.
pub fn hnf(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let d = rows[0].len();
    let mut m: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|c| !c.is_zero())).cloned().collect();
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    for col in (0..d).rev() {
        // Euclid on the column among remaining rows
        loop {
            let nz: Vec<usize> = (0..m.len()).filter(|&i| !m[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| m[i][col].abs()).unwrap();
            for &i in &nz {
                if i == piv {
                    continue;
                }
                let q = m[i][col].div_floor(&m[piv][col]);
                let prow = m[piv].clone();
                for (a, b) in m[i].iter_mut().zip(prow.iter()) {
                    *a -= &q * b;
                }
            }
        }
        if let Some(pos) = (0..m.len()).find(|&i| !m[i][col].is_zero()) {
            let mut row = m.remove(pos);
            if row[col].is_negative() {
                for c in row.iter_mut() {
                    *c = -&*c;
                }
            }
            out.push(row);
            let pivot_row = out.len() - 1;
            // reduce earlier rows at this pivot column
            for r in 0..pivot_row {
                let q = out[r][col].div_floor(&out[pivot_row][col]);
                if !q.is_zero() {
                    let prow = out[pivot_row].clone();
                    for (a, b) in out[r].iter_mut().zip(prow.iter()) {
                        *a -= &q * b;
                    }
                }
            }
        }
        m.retain(|r| r.iter().any(|c| !c.is_zero()));
    }
    out
}

fn pivot_col(row: &[BigInt]) -> Option<usize> {
    (0..row.len()).rev().find(|&i| !row[i].is_zero())
}

/// Whether `v` lies in the lattice whose HNF basis is `basis`.
pub fn contains(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut r = v.to_vec();
    for row in basis {
        let c = match pivot_col(row) {
            Some(c) => c,
            None => continue,
        };
        if r[c].is_zero() {
            continue;
        }
        if !(&r[c] % &row[c]).is_zero() {
            return false;
        }
        let q = &r[c] / &row[c];
        for (a, b) in r.iter_mut().zip(row.iter()) {
            *a -= &q * b;
        }
    }
    r.iter().all(|c| c.is_zero())
}

pub(crate) fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        let pv = a[c][c];
        for x in a[c].iter_mut() {
            *x /= pv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    let rowc = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(&rowc) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Integral vectors whose real value lies in `real` (up to float slack; callers re-check
/// exactly) and whose conjugate at each non-dominant place lies in the given disc.
pub fn scan(f: &BetaField, real: (f64, f64), discs: &[(Complex64, f64)], cap: u64) -> Result<Vec<Vec<i64>>> {
    let d = f.degree();
    let mut mid = vec![(real.0 + real.1) / 2.0];
    let mut half = vec![(real.1 - real.0) / 2.0];
    for (pl, (c, r)) in f.places().iter().zip(discs) {
        mid.push(c.re);
        half.push(*r);
        if pl.complex {
            mid.push(c.im);
            half.push(*r);
        }
    }
    let minv = invert(&f.embedding_matrix()).ok_or(Error::Overflow)?;
    let ranges: Vec<(i64, i64)> = (1..d)
        .map(|i| {
            let c: f64 = minv[i].iter().zip(&mid).map(|(a, m)| a * m).sum();
            let s: f64 = minv[i].iter().zip(&half).map(|(a, h)| a.abs() * h).sum();
            let s = s * (1.0 + 1e-6) + 1e-6 * (1.0 + c.abs());
            ((c - s).floor() as i64, (c + s).ceil() as i64)
        })
        .collect();
    let mut total: u64 = 1;
    for (lo, hi) in &ranges {
        total = total.saturating_mul((hi - lo + 1) as u64);
    }
    let width = (real.1 - real.0).max(0.0).ceil() as u64 + 2;
    if total.saturating_mul(width) > cap {
        return Err(Error::BoxTooLarge(total.saturating_mul(width)));
    }
    let beta = f.beta_f64();
    let places: Vec<Complex64> = f.places().iter().map(|p| p.approx).collect();
    let mut out = Vec::new();
    let mut c: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let mut rest = 0.0;
        let mut p = beta;
        for &ci in &c {
            rest += ci as f64 * p;
            p *= beta;
        }
        let slack = 1e-9 * (1.0 + rest.abs());
        let lo = (real.0 - rest - slack).ceil() as i64;
        let hi = (real.1 - rest + slack).floor() as i64;
        for c0 in lo..=hi {
            let mut v = Vec::with_capacity(d);
            v.push(c0);
            v.extend_from_slice(&c);
            let ok = places.iter().zip(discs).all(|(z, (cen, r))| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in v.iter().rev() {
                    acc = acc * z + t as f64;
                }
                (acc - cen).norm() <= r * (1.0 + 1e-9) + 1e-9
            });
            if ok {
                out.push(v);
            }
        }
        let mut k = 0;
        loop {
            if k == c.len() {
                return Ok(out);
            }
            if c[k] < ranges[k].1 {
                c[k] += 1;
                break;
            }
            c[k] = ranges[k].0;
            k += 1;
        }
    }
}
