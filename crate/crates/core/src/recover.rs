//! Floating-point recovery of planted rank-1 matrices.
//!
//! The kernel of the all-pairs constraint matrix gives the symmetric
//! 2-tensors in `S²(U)` orthogonal to every minor form. When that
//! intersection is spanned by the squares of the planted matrices, a
//! simultaneous diagonalization of the kernel elements returns them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::{self, PlantSpec, ProblemShape};
use crate::error::{Error, Result};
use crate::linalg;
use crate::minor_forms::{self, PairIndex};
use crate::rng::{stream, Role};
use crate::subspaces;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Singular values of `M` at or below this are zero regardless of
/// `σ_max`. Entries of `M` are bounded by 1 for an orthonormal basis, so
/// this only matters when all of `M` is round-off (e.g. `R = 1`).
pub const ABS_RANK_FLOOR: f64 = 1e-12;

/// Basis of `S²(U) ∩ span{E_abcd}^⊥`.
#[derive(Debug, Clone)]
pub struct IntersectionBasis {
    /// Symmetric `D × D` matrices of unit Frobenius norm; `D = mn`, or
    /// `m(m+1)/2` in symmetric coordinates.
    pub elements: Vec<DMatrix<f64>>,
    /// Kernel vectors, indexed like `pairs`.
    pub alphas: Vec<DVector<f64>>,
    pub pairs: Vec<PairIndex>,
    pub ker_dim: usize,
    /// Smallest singular value of the all-pairs matrix (0 when it is wide).
    pub s_val: f64,
    /// Largest singular value of the all-pairs matrix.
    pub sigma_max: f64,
}

fn coordinates(u: &DMatrix<f64>, shape: &ProblemShape) -> DVector<f64> {
    if shape.is_symmetric() {
        linalg::sym_coords(u)
    } else {
        linalg::vectorize(u)
    }
}

fn from_coordinates(v: &DVector<f64>, shape: &ProblemShape) -> DMatrix<f64> {
    if shape.is_symmetric() {
        linalg::from_sym_coords(v.as_slice(), shape.m())
    } else {
        linalg::unvectorize(v.as_slice(), shape.m(), shape.n())
    }
}

/// `Σ α_ij u^i ∨ u^j` on the coordinate vectors of the basis.
pub fn symmetric_combination(coords: &[DVector<f64>], pairs: &[PairIndex], alpha: &DVector<f64>) -> DMatrix<f64> {
    let d = coords.first().map(|c| c.len()).unwrap_or(0);
    let mut out = DMatrix::zeros(d, d);
    for (k, &PairIndex { i, j }) in pairs.iter().enumerate() {
        let a = alpha[k];
        if a == 0.0 {
            continue;
        }
        out.ger(0.5 * a, &coords[i], &coords[j], 1.0);
        out.ger(0.5 * a, &coords[j], &coords[i], 1.0);
    }
    out
}

pub fn intersection_basis(
    basis: &[DMatrix<f64>],
    shape: &ProblemShape,
    rank_tol: f64,
) -> IntersectionBasis {
    let pairs = minor_forms::all_pairs(basis.len());
    let rows = minor_forms::row_index(shape);
    let nrows = rows.len();
    let m = minor_forms::build_real(basis, rows, pairs.clone());
    let mat = m.real().expect("real matrix");
    let svd = linalg::full_svd(mat);
    let ncols = pairs.len();
    let sigma_top = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = (rank_tol * sigma_top).max(ABS_RANK_FLOOR);
    let rank = svd.singular_values.iter().filter(|&&x| x > cutoff).count();
    let ker_dim = ncols - rank;
    let sigma_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let s_val = if nrows >= ncols {
        svd.singular_values.last().copied().unwrap_or(0.0)
    } else {
        0.0
    };
    let coords: Vec<DVector<f64>> = basis.iter().map(|u| coordinates(u, shape)).collect();
    let mut elements = Vec::with_capacity(ker_dim);
    let mut alphas = Vec::with_capacity(ker_dim);
    for k in rank..ncols {
        let alpha = svd.vt.row(k).transpose();
        let mut p = symmetric_combination(&coords, &pairs, &alpha);
        let norm = p.norm();
        if norm > 0.0 {
            p /= norm;
        }
        elements.push(p);
        alphas.push(alpha);
    }
    IntersectionBasis {
        elements,
        alphas,
        pairs,
        ker_dim,
        s_val,
        sigma_max,
    }
}

#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// Unit vectors `w_l`, one per basis element.
    pub vectors: Vec<DVector<f64>>,
    /// `c[(k, l)]`: weight of `w_l w_l^T` in the k-th input element.
    pub amplitudes: DMatrix<f64>,
    /// `max_k ‖P_k − Π(P_k)‖_F / ‖P_k‖_F` for the projection `Π` onto the
    /// span of the recovered `w_l w_l^T`.
    pub decomp_error: f64,
}

/// Greedy pairing of two value lists by proximity: repeatedly take the
/// closest unmatched pair, ties to the lowest indices.
fn greedy_pairs(a: &[f64], b: &[f64]) -> Vec<(usize, usize)> {
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    for _ in 0..a.len().min(b.len()) {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, x) in a.iter().enumerate().filter(|(i, _)| !used_a[*i]) {
            for (j, y) in b.iter().enumerate().filter(|(j, _)| !used_b[*j]) {
                let d = (x - y).abs();
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("unmatched entries remain");
        used_a[i] = true;
        used_b[j] = true;
        out.push((i, j));
    }
    out.sort_unstable();
    out
}

/// Recovers `w_1..w_K` from `K` symmetric matrices spanning
/// `span{w_l w_l^T}`.
pub fn simultaneous_diagonalization<R: Rng + ?Sized>(
    elements: &[DMatrix<f64>],
    rng: &mut R,
) -> Result<Diagonalization> {
    let k = elements.len();
    if k == 0 {
        return Err(Error::Degenerate("no elements to diagonalize".into()));
    }
    let d = elements[0].nrows();

    // common column space
    let mut stacked = DMatrix::zeros(d, d * k);
    for (i, p) in elements.iter().enumerate() {
        stacked.view_mut((0, i * d), (d, d)).copy_from(p);
    }
    let svd = linalg::thin_svd(&stacked);
    if linalg::numerical_rank(&svd.singular_values, 1e-12) == 0 {
        return Err(Error::Degenerate("common column space has rank 0".into()));
    }
    let q = svd.u.columns(0, k.min(svd.u.ncols())).into_owned();

    let mut combo = || {
        let mut acc = DMatrix::zeros(d, d);
        for p in elements {
            let g: f64 = rng.sample(StandardNormal);
            acc += p * g;
        }
        let reduced = q.transpose() * acc * &q;
        (&reduced + reduced.transpose()) * 0.5
    };
    let a = combo();
    let b = combo();

    let b_inv = b
        .clone()
        .try_inverse()
        .unwrap_or_else(|| linalg::lstsq(&b, &DMatrix::identity(b.nrows(), b.ncols())));
    // A B^{-1} has right eigenvectors Q^T w_l; its transpose has the same
    // spectrum, computed independently and paired by proximity
    let x1 = &a * &b_inv;
    let x2 = x1.transpose();
    let (l1, g) = linalg::real_eigen(&x1);
    let l2 = linalg::real_eigenvalues(&x2);

    let mut vectors = Vec::with_capacity(l1.len());
    for (i, _) in greedy_pairs(&l1, &l2) {
        let mut w = &q * g.column(i);
        let norm = w.norm();
        if norm > 0.0 {
            w /= norm;
        }
        linalg::sign_normalize_vec(&mut w);
        vectors.push(w);
    }

    // amplitudes and residual in the recovered rank-1 frame
    let design = DMatrix::from_fn(d * d, vectors.len(), |r, l| {
        vectors[l][r / d] * vectors[l][r % d]
    });
    let targets = DMatrix::from_fn(d * d, k, |r, c| elements[c][(r / d, r % d)]);
    let coef = linalg::lstsq(&design, &targets);
    let fitted = &design * &coef;
    let mut decomp_error: f64 = 0.0;
    for c in 0..k {
        let norm = targets.column(c).norm();
        if norm > 0.0 {
            let resid = (targets.column(c) - fitted.column(c)).norm() / norm;
            decomp_error = decomp_error.max(resid);
        }
    }
    Ok(Diagonalization {
        vectors,
        amplitudes: coef.transpose(),
        decomp_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Rank-1, unit Frobenius norm, sign-normalized.
    pub recovered: Vec<DMatrix<f64>>,
    pub ker_dim: usize,
    pub s_val: f64,
    pub sigma_max: f64,
    pub decomp_error: f64,
    /// Matching error against the ground truth, when one was given and is
    /// nonempty.
    pub w: Option<f64>,
}

/// Nearest rank-1 matrix, scaled to unit Frobenius norm, sign-normalized.
pub fn rank1_projection(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (_, u, v) = linalg::best_rank1(m);
    let mut out = u * v.transpose();
    let norm = out.norm();
    if norm > 0.0 {
        out /= norm;
    }
    linalg::sign_normalize(&mut out);
    out
}

/// Full pipeline from an orthonormal basis of `U`.
pub fn jlv<R: Rng + ?Sized>(
    basis: &[DMatrix<f64>],
    shape: &ProblemShape,
    rng: &mut R,
    truth: Option<&[DMatrix<f64>]>,
) -> Result<RecoveryResult> {
    jlv_with_tol(basis, shape, rng, truth, DEFAULT_RANK_TOL)
}

pub fn jlv_with_tol<R: Rng + ?Sized>(
    basis: &[DMatrix<f64>],
    shape: &ProblemShape,
    rng: &mut R,
    truth: Option<&[DMatrix<f64>]>,
    rank_tol: f64,
) -> Result<RecoveryResult> {
    let ib = intersection_basis(basis, shape, rank_tol);
    let (recovered, decomp_error) = if ib.ker_dim == 0 {
        (Vec::new(), 0.0)
    } else {
        let diag = simultaneous_diagonalization(&ib.elements, rng)?;
        let mats = diag
            .vectors
            .iter()
            .map(|w| rank1_projection(&from_coordinates(w, shape)))
            .collect();
        (mats, diag.decomp_error)
    };
    let w = match truth {
        Some(t) if !t.is_empty() => Some(greedy_matching(t, &recovered)?),
        _ => None,
    };
    Ok(RecoveryResult {
        recovered,
        ker_dim: ib.ker_dim,
        s_val: ib.s_val,
        sigma_max: ib.sigma_max,
        decomp_error,
        w,
    })
}

fn abs_cosine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("zero matrix in matching".into()));
    }
    if a.shape() != b.shape() {
        return Err(Error::Degenerate(format!(
            "cannot compare {:?} with {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok((linalg::frobenius_inner(a, b).abs() / (na * nb)).min(1.0))
}

/// Greedy matching that tolerates unequal list lengths: truths left
/// without a partner count as cosine 0.
pub fn greedy_matching(truth: &[DMatrix<f64>], recovered: &[DMatrix<f64>]) -> Result<f64> {
    if truth.is_empty() {
        return Ok(0.0);
    }
    let mut cos = vec![vec![0.0; recovered.len()]; truth.len()];
    for (t, a) in truth.iter().enumerate() {
        for (r, b) in recovered.iter().enumerate() {
            cos[t][r] = abs_cosine(a, b)?;
        }
    }
    let mut used_t = vec![false; truth.len()];
    let mut used_r = vec![false; recovered.len()];
    let mut worst: f64 = 1.0;
    for _ in 0..truth.len().min(recovered.len()) {
        let mut best: Option<(f64, usize, usize)> = None;
        for t in (0..truth.len()).filter(|&t| !used_t[t]) {
            for r in (0..recovered.len()).filter(|&r| !used_r[r]) {
                if best.is_none_or(|(c, _, _)| cos[t][r] > c) {
                    best = Some((cos[t][r], t, r));
                }
            }
        }
        let (c, t, r) = best.expect("unmatched entries remain");
        used_t[t] = true;
        used_r[r] = true;
        worst = worst.min(c);
    }
    if truth.len() > recovered.len() {
        worst = 0.0;
    }
    Ok((1.0 - worst).clamp(0.0, 1.0))
}

/// `1 − min` absolute cosine over a greedy one-to-one matching.
pub fn matching_error(truth: &[DMatrix<f64>], recovered: &[DMatrix<f64>]) -> Result<f64> {
    if truth.len() != recovered.len() {
        return Err(Error::LengthMismatch {
            truth: truth.len(),
            recovered: recovered.len(),
        });
    }
    greedy_matching(truth, recovered)
}

/// One numerical test: the seeded real witness, its orthonormal basis and
/// the JLV pipeline with mixing stream `(seed, Mixing, 0)`.
pub fn run_case(shape: ProblemShape, spec: PlantSpec, seed: u64) -> Result<RecoveryResult> {
    let u = subspaces::generate_real(shape, spec, seed)?;
    let basis = subspaces::orthonormal_basis(&u)?;
    let truth = u.planted();
    jlv(&basis, &shape, &mut stream(seed, Role::Mixing, 0), Some(&truth))
}

/// Result of [`run_case`] for one sweep entry.
#[derive(Debug, Clone)]
pub struct NumericalReport {
    pub shape: ProblemShape,
    pub spec: PlantSpec,
    pub seed: u64,
    pub result: std::result::Result<RecoveryResult, String>,
    pub seconds: f64,
}

/// Runs every case, on `jobs` worker threads when `jobs > 1`. Reports come
/// back in input order.
pub fn run_cases(cases: &[(ProblemShape, PlantSpec)], seed: u64, jobs: usize) -> Vec<NumericalReport> {
    let run = |&(shape, spec): &(ProblemShape, PlantSpec)| {
        let start = std::time::Instant::now();
        let result = run_case(shape, spec, seed).map_err(|e| e.to_string());
        NumericalReport {
            shape,
            spec,
            seed,
            result,
            seconds: start.elapsed().as_secs_f64(),
        }
    };
    if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| cases.par_iter().map(run).collect())
    } else {
        cases.iter().map(run).collect()
    }
}

/// Cases one past the boundary: `R = R_max(s) + 1` for
/// `0 <= s <= R_max + 1`, keeping `s <= R <= ` the identifiability bound.
pub fn overbound_specs(shape: &ProblemShape) -> Vec<PlantSpec> {
    let cap = bounds::identifiability_bound(shape);
    (0..=bounds::r_max(shape) + 1)
        .filter_map(|s| {
            let r = bounds::r_max_given_s(shape, s) + 1;
            (r <= cap && s <= r).then(|| PlantSpec::new(s, r).expect("s <= R"))
        })
        .collect()
}

/// `C(R+1,2) - rows`: the kernel dimension forced by counting alone.
pub fn forced_kernel_dim(shape: &ProblemShape, spec: &PlantSpec) -> usize {
    bounds::binom2(spec.r() + 1).saturating_sub(bounds::num_rows(shape))
}
