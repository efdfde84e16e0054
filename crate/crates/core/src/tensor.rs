//! CP decomposition of order-3, order-4 and symmetric order-4 tensors.
//!
//! The tensor is flattened along its first two modes, the rank-1 matrices
//! `a ⊗ b` are recovered from the column span, and the remaining factors
//! come from a linear solve.

use std::fmt::Write as _;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::ProblemShape;
use crate::error::{Error, Result};
use crate::linalg;
use crate::recover;
use crate::rng::{stream, Role};

/// Relative singular value threshold for the rank of a flattening.
pub const FLATTEN_RANK_TOL: f64 = 1e-10;

/// Maximum entrywise deviation accepted for a symmetric tensor.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if !(3..=4).contains(&dims.len()) {
            return Err(Error::Shape(format!("tensor order must be 3 or 4, got {}", dims.len())));
        }
        if dims.contains(&0) {
            return Err(Error::Shape(format!("zero dimension in {dims:?}")));
        }
        let count: usize = dims.iter().product();
        if data.len() != count {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {count} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let count = dims.iter().product();
        Self::new(dims, vec![0.0; count])
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `weight · f_1 ⊗ ... ⊗ f_d` added in place.
    pub fn add_rank1(&mut self, weight: f64, factors: &[&DVector<f64>]) {
        assert_eq!(factors.len(), self.order());
        let mut acc = vec![weight];
        for f in factors {
            acc = acc.iter().flat_map(|&a| f.iter().map(move |&x| a * x)).collect();
        }
        for (d, a) in self.data.iter_mut().zip(acc) {
            *d += a;
        }
    }

    /// Largest `|T[idx] - T[σ(idx)]|` over all entries and mode permutations.
    pub fn max_asymmetry(&self) -> f64 {
        let d = self.order();
        let n = self.dims[0];
        if self.dims.iter().any(|&x| x != n) {
            return f64::INFINITY;
        }
        let perms = permutations(d);
        let mut worst: f64 = 0.0;
        let mut idx = vec![0; d];
        for flat in 0..self.data.len() {
            let mut rem = flat;
            for k in (0..d).rev() {
                idx[k] = rem % n;
                rem /= n;
            }
            let x = self.data[flat];
            for p in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                worst = worst.max((x - self.get(&permuted)).abs());
            }
        }
        worst
    }
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out
}

/// Matrix with rows indexed by the `left_modes` multi-indices and columns
/// by the remaining modes, both lexicographic in increasing mode order.
/// Modes are zero-based.
pub fn flatten(t: &DenseTensor, left_modes: &[usize]) -> Result<DMatrix<f64>> {
    let d = t.order();
    let mut left = left_modes.to_vec();
    left.sort_unstable();
    left.dedup();
    if left.len() != left_modes.len() || left.is_empty() || left.len() >= d || left.iter().any(|&k| k >= d) {
        return Err(Error::Mode(format!(
            "{left_modes:?} is not a proper nonempty subset of the modes 0..{d}"
        )));
    }
    let right: Vec<usize> = (0..d).filter(|k| !left.contains(k)).collect();
    let size = |modes: &[usize]| modes.iter().map(|&k| t.dims[k]).product::<usize>();
    let (rows, cols) = (size(&left), size(&right));
    let mut out = DMatrix::zeros(rows, cols);
    let mut idx = vec![0; d];
    for flat in 0..t.data.len() {
        let mut rem = flat;
        for k in (0..d).rev() {
            idx[k] = rem % t.dims[k];
            rem /= t.dims[k];
        }
        let r = left.iter().fold(0, |acc, &k| acc * t.dims[k] + idx[k]);
        let c = right.iter().fold(0, |acc, &k| acc * t.dims[k] + idx[k]);
        out[(r, c)] = t.data[flat];
    }
    Ok(out)
}

/// `Σ_i weights[i] · factors[0][i] ⊗ ... ⊗ factors[d-1][i]` with unit-norm
/// factors.
#[derive(Debug, Clone, PartialEq)]
pub struct CPDecomposition {
    pub weights: Vec<f64>,
    /// `factors[mode][term]`.
    pub factors: Vec<Vec<DVector<f64>>>,
}

impl CPDecomposition {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.first().map_or(0, |v| v.len())).collect()
    }

    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mut t = DenseTensor::zeros(self.dims())?;
        for (i, &w) in self.weights.iter().enumerate() {
            let fs: Vec<&DVector<f64>> = self.factors.iter().map(|f| &f[i]).collect();
            t.add_rank1(w, &fs);
        }
        Ok(t)
    }

    /// `‖T - Σ terms‖_F / ‖T‖_F`.
    pub fn residual(&self, t: &DenseTensor) -> Result<f64> {
        let rec = self.reconstruct()?;
        if rec.dims != t.dims {
            return Err(Error::Shape(format!("decomposition has dims {:?}, tensor {:?}", rec.dims, t.dims)));
        }
        let diff: f64 = rec.data.iter().zip(&t.data).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = t.norm();
        Ok(if norm > 0.0 { diff / norm } else { diff })
    }

    /// Normalizes each factor to unit norm with first nonzero entry
    /// positive, moving scale and sign into the weight.
    fn normalize(&mut self) {
        for i in 0..self.rank() {
            for mode in self.factors.iter_mut() {
                let v = &mut mode[i];
                let n = v.norm();
                if n > 0.0 {
                    *v /= n;
                    self.weights[i] *= n;
                }
                if linalg::sign_normalize_vec(v) {
                    self.weights[i] = -self.weights[i];
                }
            }
        }
    }
}

/// Worst per-mode greedy matching error between factor lists.
pub fn factor_matching_error(truth: &CPDecomposition, est: &CPDecomposition) -> Result<f64> {
    if truth.factors.len() != est.factors.len() {
        return Err(Error::Shape(format!(
            "orders differ: {} vs {}",
            truth.factors.len(),
            est.factors.len()
        )));
    }
    let as_mats = |fs: &[DVector<f64>]| -> Vec<DMatrix<f64>> {
        fs.iter().map(|v| DMatrix::from_column_slice(v.len(), 1, v.as_slice())).collect()
    };
    let mut worst: f64 = 0.0;
    for (a, b) in truth.factors.iter().zip(&est.factors) {
        worst = worst.max(recover::matching_error(&as_mats(a), &as_mats(b))?);
    }
    Ok(worst)
}

/// Bound enforcement for the decomposition routines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Run even when `R` exceeds the rank bound (logs a warning).
    pub override_bound: bool,
}

/// `min{(n1-1)(n2-2)/2, n3}`.
pub fn bound3(dims: &[usize]) -> usize {
    ((dims[0] - 1) * dims[1].saturating_sub(2) / 2).min(dims[2])
}

/// `min{(n1-1)(n2-2)/2, n2·n3}`, as printed. The flattening argument
/// would give `n3·n4` in place of `n2·n3`.
pub fn bound4(dims: &[usize]) -> usize {
    ((dims[0] - 1) * dims[1].saturating_sub(2) / 2).min(dims[1] * dims[2])
}

/// `⌊sqrt(n²(n²-1)/6 + 1/4) + 1/2⌋`.
pub fn bound_sym4(n: usize) -> usize {
    let n = n as f64;
    ((n * n * (n * n - 1.0) / 6.0 + 0.25).sqrt() + 0.5 + 1e-9).floor() as usize
}

fn check_bound(r: usize, bound: usize, what: &str, opts: DecomposeOptions) -> Result<()> {
    if r == 0 {
        return Err(Error::Precondition("rank must be positive".into()));
    }
    if r > bound {
        let msg = format!("R = {r} exceeds the {what} bound {bound}");
        if !opts.override_bound {
            return Err(Error::Bound(msg));
        }
        warn!("{msg}; continuing because the bound is overridden");
    }
    Ok(())
}

/// Orthonormal basis of the column span of `flat` as `rows × cols` matrices.
fn column_span(flat: &DMatrix<f64>, r: usize, rows: usize, cols: usize) -> Result<Vec<DMatrix<f64>>> {
    let svd = linalg::thin_svd(flat);
    let rank = linalg::numerical_rank(&svd.singular_values, FLATTEN_RANK_TOL);
    if rank != r {
        return Err(Error::Rank { rank, expected: r });
    }
    Ok((0..r)
        .map(|k| {
            let col: Vec<f64> = svd.u.column(k).iter().copied().collect();
            linalg::unvectorize(&col, rows, cols)
        })
        .collect())
}

fn recover_rank1<R: Rng + ?Sized>(
    basis: &[DMatrix<f64>],
    shape: &ProblemShape,
    r: usize,
    rng: &mut R,
) -> Result<Vec<DMatrix<f64>>> {
    let res = recover::jlv(basis, shape, rng, None)?;
    if res.recovered.len() != r {
        return Err(Error::Degenerate(format!(
            "found {} rank-1 matrices in the column span, expected {r}",
            res.recovered.len()
        )));
    }
    Ok(res.recovered)
}

/// Recovers `(a^i, b^i)` from the mode-(1,2) flattening and solves for the
/// right factors; returns `(a, b, right)` with `right` the `R × cols` solution.
fn split_first_two<R: Rng + ?Sized>(
    t: &DenseTensor,
    r: usize,
    rng: &mut R,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>, DMatrix<f64>)> {
    let (n1, n2) = (t.dims[0], t.dims[1]);
    let flat = flatten(t, &[0, 1])?;
    let basis = column_span(&flat, r, n1, n2)?;
    let shape = ProblemShape::general(n1, n2)?;
    let mats = recover_rank1(&basis, &shape, r, rng)?;
    let mut a = Vec::with_capacity(r);
    let mut b = Vec::with_capacity(r);
    let mut k = DMatrix::zeros(n1 * n2, r);
    for (i, m) in mats.iter().enumerate() {
        let (_, u, v) = linalg::best_rank1(m);
        k.set_column(i, &linalg::vectorize(&(&u * v.transpose())));
        a.push(u);
        b.push(v);
    }
    let right = linalg::lstsq(&k, &flat);
    Ok((a, b, right))
}

pub fn decompose3<R: Rng + ?Sized>(
    t: &DenseTensor,
    r: usize,
    opts: DecomposeOptions,
    rng: &mut R,
) -> Result<CPDecomposition> {
    if t.order() != 3 {
        return Err(Error::Shape(format!("expected an order-3 tensor, got order {}", t.order())));
    }
    check_bound(r, bound3(&t.dims), "order-3", opts)?;
    let (a, b, right) = split_first_two(t, r, rng)?;
    let c = (0..r).map(|i| right.row(i).transpose()).collect();
    let mut cp = CPDecomposition {
        weights: vec![1.0; r],
        factors: vec![a, b, c],
    };
    cp.normalize();
    Ok(cp)
}

pub fn decompose4<R: Rng + ?Sized>(
    t: &DenseTensor,
    r: usize,
    opts: DecomposeOptions,
    rng: &mut R,
) -> Result<CPDecomposition> {
    if t.order() != 4 {
        return Err(Error::Shape(format!("expected an order-4 tensor, got order {}", t.order())));
    }
    check_bound(r, bound4(&t.dims), "order-4", opts)?;
    let (n3, n4) = (t.dims[2], t.dims[3]);
    let (a, b, right) = split_first_two(t, r, rng)?;
    let mut weights = Vec::with_capacity(r);
    let mut c = Vec::with_capacity(r);
    let mut e = Vec::with_capacity(r);
    for i in 0..r {
        let row: Vec<f64> = right.row(i).iter().copied().collect();
        let (sigma, u, v) = linalg::best_rank1(&linalg::unvectorize(&row, n3, n4));
        weights.push(sigma);
        c.push(u);
        e.push(v);
    }
    let mut cp = CPDecomposition {
        weights,
        factors: vec![a, b, c, e],
    };
    cp.normalize();
    Ok(cp)
}

pub fn decompose_sym4<R: Rng + ?Sized>(
    t: &DenseTensor,
    r: usize,
    opts: DecomposeOptions,
    rng: &mut R,
) -> Result<CPDecomposition> {
    if t.order() != 4 {
        return Err(Error::Shape(format!("expected an order-4 tensor, got order {}", t.order())));
    }
    let asym = t.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Symmetry(asym));
    }
    let n = t.dims[0];
    check_bound(r, bound_sym4(n), "symmetric order-4", opts)?;
    let flat = flatten(t, &[0, 1])?;
    let basis: Vec<DMatrix<f64>> = column_span(&flat, r, n, n)?
        .into_iter()
        .map(|m| (&m + m.transpose()) * 0.5)
        .collect();
    let shape = ProblemShape::symmetric(n)?;
    let mats = recover_rank1(&basis, &shape, r, rng)?;
    let xs: Vec<DVector<f64>> = mats.iter().map(|m| linalg::best_rank1(m).1).collect();
    // weights from T = Σ λ_i x_i^{⊗4}, flattened
    let mut k = DMatrix::zeros(n * n * n * n, r);
    for (i, x) in xs.iter().enumerate() {
        let xx = linalg::vectorize(&(x * x.transpose()));
        let col = &xx * xx.transpose();
        k.set_column(i, &linalg::vectorize(&col));
    }
    let target = DMatrix::from_column_slice(t.data.len(), 1, &t.data);
    let lambda = linalg::lstsq(&k, &target);
    let mut cp = CPDecomposition {
        weights: lambda.column(0).iter().copied().collect(),
        factors: vec![xs; 4],
    };
    cp.normalize();
    Ok(cp)
}

/// Gaussian factors, normalized, with unit weights. Mode `k` uses the
/// stream `(seed, Aux, k)`.
pub fn planted(dims: &[usize], r: usize, seed: u64) -> CPDecomposition {
    let factors = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let mut rng = stream(seed, Role::Aux, k as u64);
            (0..r)
                .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
                .collect()
        })
        .collect();
    let mut cp = CPDecomposition {
        weights: vec![1.0; r],
        factors,
    };
    cp.normalize();
    cp
}

/// Symmetric order-4 planted decomposition `Σ x_i^{⊗4}` on `R^n`.
pub fn planted_symmetric(n: usize, r: usize, seed: u64) -> CPDecomposition {
    let mut cp = planted(&[n], r, seed);
    let xs = cp.factors.pop().expect("one mode");
    let mut cp = CPDecomposition {
        weights: vec![1.0; r],
        factors: vec![xs; 4],
    };
    cp.normalize();
    cp
}

/// `tensor <order> <dims...>` on the first line, then the row-major entries
/// one per line.
pub fn to_text(t: &DenseTensor) -> String {
    let mut out = format!("tensor {}", t.order());
    for d in &t.dims {
        write!(out, " {d}").unwrap();
    }
    out.push('\n');
    for x in &t.data {
        writeln!(out, "{x}").unwrap();
    }
    out
}

pub fn from_text(s: &str) -> Result<DenseTensor> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Schema("empty tensor file".into()))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("tensor") {
        return Err(Error::Schema(format!("bad header {header:?}")));
    }
    let nums: Vec<usize> = words
        .map(|w| w.parse().map_err(|_| Error::Schema(format!("bad header field {w:?}"))))
        .collect::<Result<_>>()?;
    let (order, dims) = nums
        .split_first()
        .ok_or_else(|| Error::Schema("header lacks the order".into()))?;
    if dims.len() != *order {
        return Err(Error::Schema(format!("order {order} but {} dims", dims.len())));
    }
    let data: Vec<f64> = lines
        .flat_map(|l| l.split_whitespace())
        .map(|w| w.parse().map_err(|_| Error::Schema(format!("bad entry {w:?}"))))
        .collect::<Result<_>>()?;
    DenseTensor::new(dims.to_vec(), data).map_err(|e| Error::Schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tensor(cp: &CPDecomposition) -> DenseTensor {
        cp.reconstruct().unwrap()
    }

    fn rng(seed: u64) -> rand_chacha::ChaCha20Rng {
        stream(seed, Role::Mixing, 0)
    }

    #[test]
    fn flatten_examples() {
        let t = DenseTensor::new(vec![2, 2, 2], (0..8).map(f64::from).collect()).unwrap();
        let f = flatten(&t, &[0, 1]).unwrap();
        assert_eq!(f.shape(), (4, 2));
        for (i, j, k) in itertools(2, 2, 2) {
            assert_eq!(f[(i * 2 + j, k)], t.get(&[i, j, k]));
        }
        let t4 = DenseTensor::zeros(vec![2, 3, 4, 5]).unwrap();
        assert_eq!(flatten(&t4, &[0, 1]).unwrap().shape(), (6, 20));
        assert_eq!(flatten(&t4, &[1, 3]).unwrap().shape(), (15, 8));
        for bad in [&[][..], &[0, 1, 2, 3], &[4], &[1, 1]] {
            assert!(matches!(flatten(&t4, bad), Err(Error::Mode(_))));
        }
    }

    fn itertools(a: usize, b: usize, c: usize) -> impl Iterator<Item = (usize, usize, usize)> {
        (0..a).flat_map(move |i| (0..b).flat_map(move |j| (0..c).map(move |k| (i, j, k))))
    }

    #[test]
    fn rank1_flattening_has_rank1() {
        let cp = planted(&[3, 4, 5], 1, 2);
        let f = flatten(&tensor(&cp), &[0, 1]).unwrap();
        let sv = linalg::thin_svd(&f).singular_values;
        assert_eq!(linalg::numerical_rank(&sv, 1e-12), 1);
        let ab = &cp.factors[0][0] * cp.factors[1][0].transpose();
        let expected = linalg::vectorize(&ab) * cp.factors[2][0].transpose() * cp.weights[0];
        assert!((f - expected).amax() < 1e-14);
    }

    #[test]
    fn bounds_as_printed() {
        assert_eq!(bound3(&[4, 4, 3]), 3);
        assert_eq!(bound3(&[6, 6, 10]), 10);
        assert_eq!(bound4(&[6, 6, 6, 6]), 10);
        assert_eq!(bound_sym4(4), 6);
        assert_eq!(bound_sym4(2), 2);
    }

    #[test]
    fn decompose3_generic() {
        let truth = planted(&[4, 4, 3], 3, 0);
        let t = tensor(&truth);
        let cp = decompose3(&t, 3, DecomposeOptions::default(), &mut rng(0)).unwrap();
        assert!(cp.residual(&t).unwrap() <= 1e-8);
        assert!(factor_matching_error(&truth, &cp).unwrap() <= 1e-8);
    }

    #[test]
    fn decompose3_rank_one() {
        let truth = planted(&[3, 4, 2], 1, 5);
        let t = tensor(&truth);
        let cp = decompose3(&t, 1, DecomposeOptions::default(), &mut rng(1)).unwrap();
        assert!(cp.residual(&t).unwrap() <= 1e-12);
        assert!((cp.weights[0] - truth.weights[0]).abs() <= 1e-12);
    }

    #[test]
    fn decompose3_rejects_bad_rank() {
        let t = tensor(&planted(&[4, 4, 3], 3, 0));
        let err = decompose3(&t, 5, DecomposeOptions::default(), &mut rng(0));
        assert!(matches!(err, Err(Error::Bound(_))));
        let t = tensor(&planted(&[4, 4, 3], 2, 0));
        let err = decompose3(&t, 3, DecomposeOptions::default(), &mut rng(0));
        assert!(matches!(err, Err(Error::Rank { rank: 2, expected: 3 })));
    }

    #[test]
    fn decompose4_rank_one_and_bound() {
        let truth = planted(&[3, 4, 2, 3], 1, 7);
        let t = tensor(&truth);
        let cp = decompose4(&t, 1, DecomposeOptions::default(), &mut rng(2)).unwrap();
        assert!(cp.residual(&t).unwrap() <= 1e-12);
        assert!(factor_matching_error(&truth, &cp).unwrap() <= 1e-12);
        let err = decompose4(&t, 4, DecomposeOptions::default(), &mut rng(2));
        assert!(matches!(err, Err(Error::Bound(_))));
    }

    #[test]
    fn decompose4_generic() {
        let truth = planted(&[4, 5, 3, 3], 4, 3);
        let t = tensor(&truth);
        let cp = decompose4(&t, 4, DecomposeOptions::default(), &mut rng(3)).unwrap();
        assert!(cp.residual(&t).unwrap() <= 1e-8);
        assert!(factor_matching_error(&truth, &cp).unwrap() <= 1e-8);
    }

    #[test]
    fn symmetric_rank_one_and_asymmetry() {
        let truth = planted_symmetric(3, 1, 4);
        let t = tensor(&truth);
        assert!(t.max_asymmetry() <= 1e-15);
        let cp = decompose_sym4(&t, 1, DecomposeOptions::default(), &mut rng(4)).unwrap();
        assert!(cp.residual(&t).unwrap() <= 1e-12);
        let cos = cp.factors[0][0].dot(&truth.factors[0][0]).abs();
        assert!((1.0 - cos).abs() <= 1e-12);

        let asym = tensor(&planted(&[3, 3, 3, 3], 1, 4));
        assert!(matches!(
            decompose_sym4(&asym, 1, DecomposeOptions::default(), &mut rng(4)),
            Err(Error::Symmetry(_))
        ));
    }

    #[test]
    fn symmetric_generic() {
        let truth = planted_symmetric(4, 4, 8);
        let t = tensor(&truth);
        let cp = decompose_sym4(&t, 4, DecomposeOptions::default(), &mut rng(8)).unwrap();
        assert!(cp.residual(&t).unwrap() <= 1e-7);
        assert!(factor_matching_error(&truth, &cp).unwrap() <= 1e-7);
    }

    #[test]
    fn text_round_trip() {
        let t = tensor(&planted(&[2, 3, 2], 2, 9));
        let back = from_text(&to_text(&t)).unwrap();
        assert_eq!(back, t);
        assert!(matches!(from_text("tensor 3 2 2\n1\n"), Err(Error::Schema(_))));
        assert!(matches!(from_text("tensor 3 2 2 2\n1\n"), Err(Error::Schema(_))));
        assert!(matches!(from_text("matrix 2 2\n"), Err(Error::Schema(_))));
    }

    proptest! {
        #[test]
        fn flattening_is_linear(seed in any::<u64>(), r in 1usize..4) {
            let cp = planted(&[2, 3, 2, 2], r, seed);
            let whole = flatten(&tensor(&cp), &[0, 2]).unwrap();
            let mut sum = DMatrix::zeros(whole.nrows(), whole.ncols());
            for i in 0..r {
                let mut t = DenseTensor::zeros(vec![2, 3, 2, 2]).unwrap();
                let fs: Vec<_> = cp.factors.iter().map(|f| &f[i]).collect();
                t.add_rank1(cp.weights[i], &fs);
                sum += flatten(&t, &[0, 2]).unwrap();
            }
            prop_assert!((whole - sum).amax() <= 1e-12);
        }
    }
}
