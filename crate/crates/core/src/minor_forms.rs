//! Minor forms `E_abcd`, their pairings with `v^i ∨ v^j`, and the constraint
//! matrix `M` whose rows are minors and whose columns are generator pairs.
//!
//! Row order is fixed: `a` outer, then `c > a`, then `b`, then `d > b`.
//! Certificate row indices refer to this order (or to the selected symmetric
//! basis, which is a subsequence of it).

use nalgebra::DMatrix;

use crate::bounds::ProblemShape;
use crate::field::{self, FieldMatrix};
use crate::subspaces::{Generators, PlantedSubspace};

/// A 2×2 minor on rows `{a, c}` and columns `{b, d}`, zero-based, `a < c`,
/// `b < d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinorIndex {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl MinorIndex {
    pub fn new(a: usize, b: usize, c: usize, d: usize) -> Self {
        assert!(a < c && b < d, "minor index needs a < c and b < d");
        Self { a, b, c, d }
    }

    /// Builds from unordered row and column pairs.
    pub fn from_sets(rows: (usize, usize), cols: (usize, usize)) -> Self {
        Self::new(
            rows.0.min(rows.1),
            cols.0.min(cols.1),
            rows.0.max(rows.1),
            cols.0.max(cols.1),
        )
    }
}

/// A pair of generator indices `i <= j`, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
}

pub fn minor_indices(m: usize, n: usize) -> Vec<MinorIndex> {
    let mut out = Vec::with_capacity(m * (m - 1) / 2 * n * (n - 1) / 2);
    for a in 0..m {
        for c in a + 1..m {
            for b in 0..n {
                for d in b + 1..n {
                    out.push(MinorIndex { a, b, c, d });
                }
            }
        }
    }
    out
}

/// `Ω`: all `i < j`, plus `(i, i)` for the non-planted `i >= s`,
/// lexicographic.
pub fn omega(s: usize, r: usize) -> Vec<PairIndex> {
    assert!(s <= r);
    let mut out = Vec::new();
    for i in 0..r {
        for j in i..r {
            if i < j || i >= s {
                out.push(PairIndex { i, j });
            }
        }
    }
    out
}

pub fn all_pairs(r: usize) -> Vec<PairIndex> {
    omega(0, r)
}

/// `⟨v^i ∨ v^j, E_abcd⟩ = ½(v^i_ab v^j_cd + v^i_cd v^j_ab − v^i_ad v^j_cb − v^i_cb v^j_ad)`.
pub fn m_entry(vi: &DMatrix<f64>, vj: &DMatrix<f64>, idx: MinorIndex) -> f64 {
    let MinorIndex { a, b, c, d } = idx;
    // grouped so that swapping vi and vj gives a bitwise-identical result
    let plus = vi[(a, b)] * vj[(c, d)] + vi[(c, d)] * vj[(a, b)];
    let minus = vi[(a, d)] * vj[(c, b)] + vi[(c, b)] * vj[(a, d)];
    0.5 * (plus - minus)
}

/// Same pairing over `F_p`; the ½ is the inverse of 2 mod p.
pub fn m_entry_mod(vi: &FieldMatrix, vj: &FieldMatrix, idx: MinorIndex) -> u64 {
    let p = vi.modulus();
    let MinorIndex { a, b, c, d } = idx;
    let plus = field::add(
        field::mul(vi.get(a, b), vj.get(c, d), p),
        field::mul(vi.get(c, d), vj.get(a, b), p),
        p,
    );
    let minus = field::add(
        field::mul(vi.get(a, d), vj.get(c, b), p),
        field::mul(vi.get(c, b), vj.get(a, d), p),
        p,
    );
    let half = (p + 1) / 2;
    field::mul(half, field::sub(plus, minus, p), p)
}

/// Row set of `M` for a shape: every minor in the general case, the
/// independent symmetric basis otherwise.
pub fn row_index(shape: &ProblemShape) -> Vec<MinorIndex> {
    if shape.is_symmetric() {
        symmetric_basis(shape.m())
    } else {
        minor_indices(shape.m(), shape.n())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnMode {
    /// `Ω` for the subspace's own `s`.
    Omega,
    /// Every `i <= j`; used when `s` is unknown.
    AllPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MEntries {
    Real(DMatrix<f64>),
    Modular(FieldMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MMatrix {
    pub row_index: Vec<MinorIndex>,
    pub col_index: Vec<PairIndex>,
    pub entries: MEntries,
}

impl MMatrix {
    pub fn nrows(&self) -> usize {
        self.row_index.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_index.len()
    }

    pub fn real(&self) -> Option<&DMatrix<f64>> {
        match &self.entries {
            MEntries::Real(m) => Some(m),
            MEntries::Modular(_) => None,
        }
    }

    pub fn modular(&self) -> Option<&FieldMatrix> {
        match &self.entries {
            MEntries::Modular(m) => Some(m),
            MEntries::Real(_) => None,
        }
    }
}

fn columns_for(mode: ColumnMode, s: usize, r: usize) -> Vec<PairIndex> {
    match mode {
        ColumnMode::Omega => omega(s, r),
        ColumnMode::AllPairs => all_pairs(r),
    }
}

pub fn build_real(
    mats: &[DMatrix<f64>],
    rows: Vec<MinorIndex>,
    cols: Vec<PairIndex>,
) -> MMatrix {
    let entries = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        let PairIndex { i, j } = cols[c];
        m_entry(&mats[i], &mats[j], rows[r])
    });
    MMatrix {
        row_index: rows,
        col_index: cols,
        entries: MEntries::Real(entries),
    }
}

pub fn build_modular(mats: &[FieldMatrix], rows: Vec<MinorIndex>, cols: Vec<PairIndex>) -> MMatrix {
    let p = mats.first().map(|m| m.modulus()).unwrap_or(field::DEFAULT_PRIME);
    let entries = FieldMatrix::from_fn(rows.len(), cols.len(), p, |r, c| {
        let PairIndex { i, j } = cols[c];
        m_entry_mod(&mats[i], &mats[j], rows[r])
    });
    MMatrix {
        row_index: rows,
        col_index: cols,
        entries: MEntries::Modular(entries),
    }
}

pub fn build_m_matrix(u: &PlantedSubspace, mode: ColumnMode) -> MMatrix {
    let rows = row_index(&u.shape);
    let cols = columns_for(mode, u.spec.s(), u.spec.r());
    match &u.generators {
        Generators::Real { mats, .. } => build_real(mats, rows, cols),
        Generators::Modular { mats, .. } => build_modular(mats, rows, cols),
    }
}

/// Coefficients of a minor as a quadratic form in the symmetric coordinates,
/// indexed by upper-triangle monomials `(k1, k2), k1 <= k2`.
pub fn symmetric_form_coefficients(m: usize, idx: MinorIndex) -> Vec<i64> {
    let dim = m * (m + 1) / 2;
    let mono = |k1: usize, k2: usize| coord(dim, k1, k2);
    let mut coeffs = vec![0i64; dim * (dim + 1) / 2];
    let MinorIndex { a, b, c, d } = idx;
    coeffs[mono(coord(m, a, b), coord(m, c, d))] += 1;
    coeffs[mono(coord(m, a, d), coord(m, c, b))] -= 1;
    coeffs
}

/// Upper-triangle index, lexicographic over `(i, j), i <= j`.
pub fn coord(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    // rows 0..i contribute m + (m-1) + ... + (m-i+1) entries
    i * m - i * i.saturating_sub(1) / 2 + (j - i)
}

const SELECTION_PRIME: u64 = 2_147_483_647;

/// Greedy maximal independent subset of the 2×2 minors of a symmetric
/// `m × m` matrix, taken in row order. Independence is decided over
/// `F_{2^31 - 1}` on the integer coefficient vectors.
pub fn symmetric_basis(m: usize) -> Vec<MinorIndex> {
    let p = SELECTION_PRIME;
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for idx in minor_indices(m, m) {
        let mut v: Vec<u64> = symmetric_form_coefficients(m, idx)
            .into_iter()
            .map(|x| field::reduce(x, p))
            .collect();
        for (pivot, row) in &basis {
            let f = v[*pivot];
            if f != 0 {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = field::sub(*x, field::mul(f, y, p), p);
                }
            }
        }
        if let Some(pivot) = v.iter().position(|&x| x != 0) {
            let s = field::inv(v[pivot], p).expect("nonzero");
            v.iter_mut().for_each(|x| *x = field::mul(*x, s, p));
            // keep earlier rows reduced against the new pivot
            for (_, row) in basis.iter_mut() {
                let f = row[pivot];
                if f != 0 {
                    for (x, &y) in row.iter_mut().zip(&v) {
                        *x = field::sub(*x, field::mul(f, y, p), p);
                    }
                }
            }
            basis.push((pivot, v));
            chosen.push(idx);
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{self, PlantSpec};
    use crate::subspaces;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    fn e(m: usize, n: usize, a: usize, b: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m, n);
        out[(a, b)] = 1.0;
        out
    }

    /// u ∨ w = ½(u ⊗ w + w ⊗ u) as an (mn × mn) matrix.
    fn vee(u: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        let uu = crate::linalg::vectorize(u);
        let ww = crate::linalg::vectorize(w);
        (&uu * ww.transpose() + &ww * uu.transpose()) * 0.5
    }

    fn contraction(vi: &DMatrix<f64>, vj: &DMatrix<f64>, idx: MinorIndex) -> f64 {
        let (m, n) = vi.shape();
        let MinorIndex { a, b, c, d } = idx;
        let big_e = vee(&e(m, n, a, b), &e(m, n, c, d)) - vee(&e(m, n, a, d), &e(m, n, c, b));
        crate::linalg::frobenius_inner(&vee(vi, vj), &big_e)
    }

    fn gauss(m: usize, n: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn omega_examples() {
        let p = |i, j| PairIndex { i, j };
        assert_eq!(omega(1, 2), vec![p(0, 1), p(1, 1)]);
        assert_eq!(omega(3, 3), vec![p(0, 1), p(0, 2), p(1, 2)]);
        assert_eq!(omega(0, 2), vec![p(0, 0), p(0, 1), p(1, 1)]);
        for r in 0..=10 {
            for s in 0..=r {
                let spec = PlantSpec::new(s, r).unwrap();
                assert_eq!(omega(s, r).len(), bounds::num_cols(&spec));
            }
        }
    }

    #[test]
    fn entry_examples() {
        let i = MinorIndex::new(0, 0, 1, 1);
        assert_eq!(m_entry(&e(2, 2, 0, 0), &e(2, 2, 1, 1), i), 0.5);
        assert_eq!(m_entry(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2), i), 1.0);
        let x = nalgebra::DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let y = nalgebra::DVector::from_vec(vec![0.5, 4.0, -1.0, 2.0]);
        let r1 = &x * y.transpose();
        for idx in minor_indices(3, 4) {
            assert!(m_entry(&r1, &r1, idx).abs() < 1e-12);
        }
    }

    #[test]
    fn entry_matches_full_contraction() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for _ in 0..100 {
            let vi = gauss(4, 5, &mut rng);
            let vj = gauss(4, 5, &mut rng);
            for idx in minor_indices(4, 5) {
                let f = m_entry(&vi, &vj, idx);
                assert!((f - contraction(&vi, &vj, idx)).abs() <= 1e-12);
                assert_eq!(f, m_entry(&vj, &vi, idx));
            }
        }
    }

    #[test]
    fn modular_entry_matches_integer_formula() {
        let p = 997;
        let vi = FieldMatrix::from_i64(2, 2, p, &[3, 5, 7, 11]);
        let vj = FieldMatrix::from_i64(2, 2, p, &[2, 4, 6, 8]);
        let idx = MinorIndex::new(0, 0, 1, 1);
        // 2*entry = 3*8 + 11*2 - 5*6 - 7*4 = -12
        let twice = field::mul(2, m_entry_mod(&vi, &vj, idx), p);
        assert_eq!(twice, field::reduce(-12, p));
    }

    #[test]
    fn single_generator_entry_is_determinant() {
        let shape = ProblemShape::general(2, 2).unwrap();
        let u = subspaces::generate_real(shape, PlantSpec::new(0, 1).unwrap(), 3).unwrap();
        let m = build_m_matrix(&u, ColumnMode::Omega);
        let v = &u.real_generators().unwrap()[0];
        assert_eq!(m.real().unwrap().shape(), (1, 1));
        let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        assert!((m.real().unwrap()[(0, 0)] - det).abs() < 1e-14);
    }

    #[test]
    fn m_matrix_dimensions() {
        let shape = ProblemShape::general(3, 3).unwrap();
        let u = subspaces::generate_real(shape, PlantSpec::new(0, 3).unwrap(), 0).unwrap();
        let m = build_m_matrix(&u, ColumnMode::Omega);
        assert_eq!((m.nrows(), m.ncols()), (9, 6));
        assert_eq!(m.row_index[0], MinorIndex::new(0, 0, 1, 1));
        assert_eq!(m.row_index[1], MinorIndex::new(0, 0, 1, 2));
        assert_eq!(m.row_index[3], MinorIndex::new(0, 0, 2, 1));
        let u = subspaces::generate_real(shape, PlantSpec::new(2, 4).unwrap(), 0).unwrap();
        assert_eq!(build_m_matrix(&u, ColumnMode::AllPairs).ncols(), 10);
        assert_eq!(build_m_matrix(&u, ColumnMode::Omega).ncols(), 8);
    }

    #[test]
    fn modular_planted_columns_full_rank_when_boundary_holds() {
        let shape = ProblemShape::general(3, 3).unwrap();
        let u = subspaces::generate_modular(shape, PlantSpec::new(4, 4).unwrap(), 997, 0).unwrap();
        let m = build_m_matrix(&u, ColumnMode::Omega);
        assert!(m.col_index.iter().all(|p| p.i < p.j));
        assert_eq!(field::rank(m.modular().unwrap()), m.ncols());
    }

    #[test]
    fn coordinates_are_lexicographic() {
        let m = 4;
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                assert_eq!(coord(m, i, j), k);
                assert_eq!(coord(m, j, i), k);
                k += 1;
            }
        }
    }

    #[test]
    fn symmetric_basis_sizes() {
        for m in 2..=6 {
            let shape = ProblemShape::symmetric(m).unwrap();
            assert_eq!(symmetric_basis(m).len(), bounds::num_rows(&shape), "m={m}");
        }
        assert_eq!(symmetric_basis(2).len(), 1);
        assert_eq!(symmetric_basis(3).len(), 6);
        assert_eq!(symmetric_basis(4).len(), 20);
    }

    #[test]
    fn rank_lower_bound_when_boundary_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = rng.random_range(2..=4);
            let n = rng.random_range(2..=4);
            let shape = ProblemShape::general(m, n).unwrap();
            let r = (bounds::r_max_given_s(&shape, 0) + 1).min(m * n);
            let spec = PlantSpec::new(0, r).unwrap();
            if bounds::conjecture_holds(&shape, &spec) {
                continue;
            }
            let u = subspaces::generate_real(shape, spec, rng.random()).unwrap();
            let mm = build_m_matrix(&u, ColumnMode::AllPairs);
            let svd = crate::linalg::full_svd(mm.real().unwrap());
            let rank = crate::linalg::numerical_rank(&svd.singular_values, 1e-10);
            let kernel = mm.ncols() - rank;
            assert!(kernel >= bounds::num_cols(&spec) - bounds::num_rows(&shape));
        }
    }
}
