//! Small dense real linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Row-major vectorization.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = m.shape();
    DVector::from_iterator(r * c, (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])))
}

pub fn unvectorize(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), rows * cols);
    DMatrix::from_row_slice(rows, cols, v)
}

/// Upper-triangle coordinates `(i, j), i <= j`, lexicographic.
pub fn sym_coords(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_iterator(
        n * (n + 1) / 2,
        (0..n).flat_map(|i| (i..n).map(move |j| m[(i, j)])),
    )
}

pub fn from_sym_coords(v: &[f64], n: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), n * (n + 1) / 2);
    let mut out = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[(i, j)] = v[k];
            out[(j, i)] = v[k];
            k += 1;
        }
    }
    out
}

/// faer defaults to the rayon pool, whose reduction order depends on the
/// thread count; sequential kernels keep results bit-identical.
fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    static SEQUENTIAL: std::sync::Once = std::sync::Once::new();
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `m = u diag(s) vt` with singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub u: DMatrix<f64>,
    pub vt: DMatrix<f64>,
}

pub fn thin_svd(m: &DMatrix<f64>) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            singular_values: Vec::new(),
            u: DMatrix::zeros(r, 0),
            vt: DMatrix::zeros(0, c),
        };
    }
    let svd = to_faer(m).thin_svd().expect("svd converges");
    let s = svd.S().column_vector();
    Svd {
        singular_values: (0..s.nrows()).map(|i| s[i]).collect(),
        u: from_faer(svd.U()),
        vt: from_faer(svd.V()).transpose(),
    }
}

/// Singular values (descending, padded with zeros to `cols` entries) with
/// the matching right singular vectors as rows of `vt`; `vt` is always
/// square `cols × cols`, so its trailing rows span the null space.
pub struct FullSvd {
    pub singular_values: Vec<f64>,
    pub u: DMatrix<f64>,
    pub vt: DMatrix<f64>,
}

pub fn full_svd(m: &DMatrix<f64>) -> FullSvd {
    let (r, c) = m.shape();
    if c == 0 {
        return FullSvd {
            singular_values: Vec::new(),
            u: DMatrix::zeros(r, 0),
            vt: DMatrix::zeros(0, 0),
        };
    }
    if r == 0 {
        return FullSvd {
            singular_values: vec![0.0; c],
            u: DMatrix::zeros(0, 0),
            vt: DMatrix::identity(c, c),
        };
    }
    let svd = to_faer(m).svd().expect("svd converges");
    let s = svd.S().column_vector();
    let mut singular_values: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    singular_values.resize(c, 0.0);
    FullSvd {
        singular_values,
        u: from_faer(svd.U()),
        vt: from_faer(svd.V()).transpose(),
    }
}

/// Eigenvalues and eigenvectors (columns) of a general square matrix,
/// real parts only. Each eigenvector is first rotated so its largest
/// component is real.
pub fn real_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let evd = to_faer(m).eigen().expect("eigendecomposition converges");
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..s.nrows()).map(|i| s[i].re).collect();
    let mut vectors = DMatrix::zeros(u.nrows(), u.ncols());
    for j in 0..u.ncols() {
        let lead = (0..u.nrows())
            .map(|i| u[(i, j)])
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default();
        let phase = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { lead.conj() + 1.0 };
        for i in 0..u.nrows() {
            vectors[(i, j)] = (u[(i, j)] * phase).re;
        }
    }
    (values, vectors)
}

/// Real parts of the eigenvalues of a general square matrix.
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let values = to_faer(m).eigenvalues().expect("eigenvalues converge");
    values.iter().map(|z| z.re).collect()
}

/// Number of singular values above `rel_tol * largest`.
pub fn numerical_rank(singular_values: &[f64], rel_tol: f64) -> usize {
    let top = singular_values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Best rank-1 approximation `sigma * u v^T` with unit `u`, `v`.
pub fn best_rank1(m: &DMatrix<f64>) -> (f64, DVector<f64>, DVector<f64>) {
    let svd = thin_svd(m);
    (
        svd.singular_values[0],
        svd.u.column(0).into_owned(),
        svd.vt.row(0).transpose(),
    )
}

/// Flips sign so the first entry (row-major) with magnitude above `1e-12`
/// is positive. Returns whether the sign was flipped.
pub fn sign_normalize_slice(v: &mut [f64]) -> bool {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12).copied() {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
            return true;
        }
    }
    false
}

pub fn sign_normalize(m: &mut DMatrix<f64>) -> bool {
    // nalgebra is column-major; walk in row-major order
    let (r, c) = m.shape();
    for i in 0..r {
        for j in 0..c {
            let x = m[(i, j)];
            if x.abs() > 1e-12 {
                if x < 0.0 {
                    m.neg_mut();
                    return true;
                }
                return false;
            }
        }
    }
    false
}

pub fn sign_normalize_vec(v: &mut DVector<f64>) -> bool {
    sign_normalize_slice(v.as_mut_slice())
}

/// Minimum-norm least-squares solution of `a x = b` (columns of `b` solved
/// independently).
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = thin_svd(a);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let eps = top * 1e-13 * (a.nrows().max(a.ncols()) as f64);
    let mut utb = svd.u.transpose() * b;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let scale = if s > eps { 1.0 / s } else { 0.0 };
        utb.row_mut(i).scale_mut(scale);
    }
    svd.vt.transpose() * utb
}

pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorization_is_row_major() {
        let m = DMatrix::from_row_slice(2, 3, &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(vectorize(&m).as_slice(), &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(unvectorize(&[1., 2., 3., 4., 5., 6.], 2, 3), m);
    }

    #[test]
    fn sym_coords_round_trip() {
        let m = DMatrix::from_row_slice(3, 3, &[1., 2., 3., 2., 4., 5., 3., 5., 6.]);
        let v = sym_coords(&m);
        assert_eq!(v.as_slice(), &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(from_sym_coords(v.as_slice(), 3), m);
    }

    #[test]
    fn full_svd_null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1., 1., 0.]);
        let svd = full_svd(&m);
        assert_eq!(svd.vt.shape(), (3, 3));
        assert_eq!(numerical_rank(&svd.singular_values, 1e-10), 1);
        for k in 1..3 {
            let v = svd.vt.row(k).transpose();
            assert!((&m * v).norm() < 1e-12);
        }
    }

    #[test]
    fn rank1_of_outer_product_is_exact() {
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.25]);
        let y = DVector::from_vec(vec![1.0, 0.5, -0.7, 0.1, 2.0]);
        let m = &x * y.transpose();
        let (s, u, v) = best_rank1(&m);
        assert!((s - x.norm() * y.norm()).abs() < 1e-13);
        assert!((m - u * v.transpose() * s).norm() < 1e-13);
    }

    #[test]
    fn eigen_of_diagonalizable_matrix() {
        let p = DMatrix::from_row_slice(3, 3, &[1., 2., 0., 0., 1., 1., 1., 0., 3.]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2., -1., 5.]));
        let a = &p * d * p.clone().try_inverse().unwrap();
        let (vals, vecs) = real_eigen(&a);
        for (k, &l) in vals.iter().enumerate() {
            let v = vecs.column(k);
            assert!((&a * v - v * l).norm() < 1e-10);
        }
        let mut sorted = real_eigenvalues(&a);
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] + 1.0).abs() < 1e-10 && (sorted[2] - 5.0).abs() < 1e-10);
    }

    #[test]
    fn lstsq_solves_consistent_systems() {
        let a = DMatrix::from_row_slice(3, 2, &[1., 0., 1., 1., 0., 2.]);
        let x = DMatrix::from_row_slice(2, 1, &[0.5, -3.0]);
        let b = &a * &x;
        assert!((lstsq(&a, &b) - x).norm() < 1e-12);
    }

    #[test]
    fn sign_convention() {
        let mut m = DMatrix::from_row_slice(2, 2, &[0., -2., 1., 0.]);
        assert!(sign_normalize(&mut m));
        assert_eq!(m[(0, 1)], 2.0);
        assert!(!sign_normalize(&mut m));
    }
}
