//! Prime-field arithmetic and dense Gauss–Jordan elimination over `F_p`.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_PRIME: u64 = 997;

/// Deterministic trial division; moduli here are small.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u64> {
    if p > 2 && is_prime(p) && p < (1 << 31) {
        Ok(p)
    } else {
        Err(Error::NotPrime(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    p: u64,
}

impl FieldElement {
    pub fn new(value: i64, p: u64) -> Self {
        Self {
            value: reduce(value, p),
            p,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

/// Maps a signed integer into `[0, p-1]`.
pub fn reduce(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    (a + b) % p
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    (a + p - b) % p
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    (a * b) % p
}

pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse by the extended Euclidean algorithm.
pub fn inv(a: u64, p: u64) -> Result<u64> {
    let a = a % p;
    if a == 0 {
        return Err(Error::ZeroInverse { p });
    }
    let (mut old_r, mut r) = (a as i64, p as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    Ok(reduce(old_s, p))
}

pub fn modular_inverse(a: FieldElement) -> Result<FieldElement> {
    Ok(FieldElement {
        value: inv(a.value, a.p)?,
        p: a.p,
    })
}

/// Dense row-major matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    p: u64,
    data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u64) -> Self {
        Self {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        }
    }

    /// Builds from signed integers, reducing each into `[0, p-1]`.
    pub fn from_i64(rows: usize, cols: usize, p: u64, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Self {
            rows,
            cols,
            p,
            data: entries.iter().map(|&x| reduce(x, p)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, p: u64, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j) % p);
            }
        }
        Self { rows, cols, p, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &r in keep {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: keep.len(),
            cols: self.cols,
            p: self.p,
            data,
        }
    }

    pub fn select_cols(&self, keep: &[usize]) -> Self {
        Self::from_fn(self.rows, keep.len(), self.p, |i, j| self.get(i, keep[j]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.p, |i, j| self.get(j, i))
    }
}

/// Outcome of eliminating a tall matrix down to a maximal square minor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationReport {
    pub rank: usize,
    /// Original indices of rows outside the nonsingular maximal minor, ascending.
    pub removed_rows: Vec<usize>,
    /// Determinant of the kept rows (ascending original order) mod p; 0 when rank-deficient.
    pub minor_det: u64,
}

/// Gauss–Jordan elimination with row pivoting.
///
/// Column by column, the pivot is the unused row with the lowest original
/// index holding a nonzero entry. The determinant of the kept rows taken in
/// ascending order is the product of pivots times the sign of the
/// permutation that sorts the pivot rows.
pub fn eliminate_maximal_minor(m: &FieldMatrix) -> Result<EliminationReport> {
    if m.rows < m.cols {
        return Err(Error::ShapeMismatch {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let p = m.p;
    let cols = m.cols;
    let mut work = m.data.clone();
    let mut used = vec![false; m.rows];
    let mut pivots = Vec::with_capacity(cols);
    let mut det = 1 % p;

    for c in 0..cols {
        let Some(pr) = (0..m.rows).find(|&r| !used[r] && work[r * cols + c] != 0) else {
            return Ok(EliminationReport {
                rank: pivots.len(),
                removed_rows: Vec::new(),
                minor_det: 0,
            });
        };
        used[pr] = true;
        pivots.push(pr);
        let pv = work[pr * cols + c];
        det = mul(det, pv, p);
        let pinv = inv(pv, p)?;
        for x in &mut work[pr * cols + c..(pr + 1) * cols] {
            *x = mul(*x, pinv, p);
        }
        let pivot_row: Vec<u64> = work[pr * cols + c..(pr + 1) * cols].to_vec();
        for r in 0..m.rows {
            if r == pr {
                continue;
            }
            let factor = work[r * cols + c];
            if factor == 0 {
                continue;
            }
            let row = &mut work[r * cols + c..(r + 1) * cols];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = sub(*x, mul(factor, y, p), p);
            }
        }
    }

    if permutation_is_odd(&pivots) {
        det = sub(0, det, p);
    }
    let removed_rows = (0..m.rows).filter(|&r| !used[r]).collect();
    Ok(EliminationReport {
        rank: cols,
        removed_rows,
        minor_det: det,
    })
}

/// Parity of the permutation sorting `seq` (distinct entries).
fn permutation_is_odd(seq: &[usize]) -> bool {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Determinant of a square matrix mod p.
pub fn determinant(m: &FieldMatrix) -> Result<u64> {
    if m.rows != m.cols {
        return Err(Error::ShapeMismatch {
            rows: m.rows,
            cols: m.cols,
        });
    }
    Ok(eliminate_maximal_minor(m)?.minor_det)
}

/// Rank over `F_p` of a matrix of any shape.
pub fn rank(m: &FieldMatrix) -> usize {
    let tall = if m.rows >= m.cols { m.clone() } else { m.transpose() };
    let p = tall.p;
    let cols = tall.cols;
    let mut work = tall.data.clone();
    let mut used = vec![false; tall.rows];
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (0..tall.rows).find(|&r| !used[r] && work[r * cols + c] != 0) else {
            continue;
        };
        used[pr] = true;
        rank += 1;
        let pinv = inv(work[pr * cols + c], p).expect("nonzero pivot");
        let pivot_row: Vec<u64> = work[pr * cols..(pr + 1) * cols]
            .iter()
            .map(|&x| mul(x, pinv, p))
            .collect();
        for r in 0..tall.rows {
            if used[r] {
                continue;
            }
            let factor = work[r * cols + c];
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                work[r * cols + j] = sub(work[r * cols + j], mul(factor, pivot_row[j], p), p);
            }
        }
    }
    rank
}

/// `(p^d - 1) / (p - 1)`, saturating.
pub fn pairwise_capacity(d: usize, p: u64) -> u128 {
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..d {
        total = total.saturating_add(power);
        power = power.saturating_mul(p as u128);
    }
    total
}

/// Scales so the first nonzero coordinate is 1; identifies projective points.
fn projective_key(v: &[u64], p: u64) -> Option<Vec<u64>> {
    let lead = *v.iter().find(|&&x| x != 0)?;
    let s = inv(lead, p).ok()?;
    Some(v.iter().map(|&x| mul(x, s, p)).collect())
}

/// Draws `count` vectors of `F_p^d`, rejecting zero and any scalar multiple
/// of a vector already drawn.
pub fn sample_pairwise_independent<R: Rng + ?Sized>(
    d: usize,
    count: usize,
    p: u64,
    rng: &mut R,
) -> Result<Vec<Vec<u64>>> {
    let capacity = pairwise_capacity(d, p);
    if count as u128 > capacity {
        return Err(Error::Capacity {
            requested: count,
            capacity,
            dim: d,
            p,
        });
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<u64> = (0..d).map(|_| rng.random_range(0..p)).collect();
        if let Some(key) = projective_key(&v, p) {
            if seen.insert(key) {
                out.push(v);
            }
        }
    }
    Ok(out)
}
