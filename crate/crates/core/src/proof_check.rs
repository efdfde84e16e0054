//! Exact check of the square submatrix `M''` used to show the constraint
//! matrix has full column rank for `R <= (m-1)k`, `k = ⌊(n-1)/2⌋`.
//!
//! Generators are sampled with most coordinates forced to zero so that
//! `M''` becomes block-upper-triangular. The checks here confirm on
//! concrete assignments that the forced zeros appear where claimed, that
//! the diagonal blocks take their closed forms, and that the determinant
//! is nonzero.
//!
//! Indices are zero-based: the special row is `m - 1`, the special column
//! is `k`, and column `g` is duplicated by column `g + k + 1`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::{PlantSpec, ProblemShape};
use crate::error::{Error, Result};
use crate::field::{self, FieldMatrix};
use crate::minor_forms::{omega, MinorIndex, PairIndex};
use crate::rng::{stream, Role};

/// `φ(ℓ) = (f(ℓ), g(ℓ))` into the top-left `(m-1) × k` block, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub k: usize,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

impl Injection {
    fn position_index(&self) -> HashMap<(usize, usize), usize> {
        (0..self.f.len()).map(|l| ((self.f[l], self.g[l]), l)).collect()
    }
}

pub fn make_injection(shape: &ProblemShape, r: usize) -> Result<Injection> {
    let k = shape.n().saturating_sub(1) / 2;
    let capacity = (shape.m() - 1) * k;
    if r > capacity {
        return Err(Error::Bound(format!(
            "R = {r} exceeds (m-1)k = {capacity} for m={}, n={}",
            shape.m(),
            shape.n()
        )));
    }
    Ok(Injection {
        k,
        f: (0..r).map(|l| l / k).collect(),
        g: (0..r).map(|l| l % k).collect(),
    })
}

/// Rows and columns where generator `ℓ` may be nonzero.
pub fn zero_pattern(l: usize, phi: &Injection, shape: &ProblemShape) -> ([usize; 2], [usize; 3]) {
    let k = phi.k;
    (
        [phi.f[l], shape.m() - 1],
        [phi.g[l], k, phi.g[l] + k + 1],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinLabel {
    Bin1,
    Bin2,
    Bin3,
    Bin4,
}

pub fn bin_of(pair: PairIndex, phi: &Injection) -> BinLabel {
    let PairIndex { i, j } = pair;
    if i == j {
        return BinLabel::Bin1;
    }
    match (phi.f[i] == phi.f[j], phi.g[i] == phi.g[j]) {
        (true, false) => BinLabel::Bin2,
        (false, true) => BinLabel::Bin3,
        (false, false) => BinLabel::Bin4,
        (true, true) => unreachable!("injection maps distinct indices to distinct cells"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowClass {
    I,
    II,
    III,
    IV,
    V,
}

impl RowClass {
    /// Diagonal block of `M''` the class belongs to (IV and V share one).
    fn block(self) -> usize {
        match self {
            RowClass::I => 1,
            RowClass::II => 2,
            RowClass::III => 3,
            RowClass::IV | RowClass::V => 4,
        }
    }
}

impl BinLabel {
    fn block(self) -> usize {
        match self {
            BinLabel::Bin1 => 1,
            BinLabel::Bin2 => 2,
            BinLabel::Bin3 => 3,
            BinLabel::Bin4 => 4,
        }
    }
}

/// Rows selected for a column. Bin-4 columns get their Class IV row and,
/// through the partner group, the Class V row; see [`layout`].
pub fn rows_for_pair(pair: PairIndex, bin: BinLabel, phi: &Injection, shape: &ProblemShape) -> Vec<(RowClass, MinorIndex)> {
    let (f, g, k, last) = (&phi.f, &phi.g, phi.k, shape.m() - 1);
    let PairIndex { i, j } = pair;
    match bin {
        BinLabel::Bin1 => vec![(RowClass::I, MinorIndex::from_sets((f[i], last), (g[i], k)))],
        BinLabel::Bin2 => vec![(RowClass::II, MinorIndex::from_sets((f[i], last), (g[i], g[j])))],
        BinLabel::Bin3 => vec![(RowClass::III, MinorIndex::from_sets((f[i], f[j]), (g[i], k)))],
        BinLabel::Bin4 => vec![
            (RowClass::IV, MinorIndex::from_sets((f[i], f[j]), (g[i], g[j]))),
            (
                RowClass::V,
                MinorIndex::from_sets((f[i], f[j]), (g[i] + k + 1, g[j] + k + 1)),
            ),
        ],
    }
}

/// The Bin-4 column sharing row and column sets with `pair`, when the
/// swapped cells are both in the image of `φ`.
pub fn partner(pair: PairIndex, phi: &Injection) -> Option<PairIndex> {
    let index = phi.position_index();
    let PairIndex { i, j } = pair;
    let a = *index.get(&(phi.f[i], phi.g[j]))?;
    let b = *index.get(&(phi.f[j], phi.g[i]))?;
    Some(PairIndex { i: a.min(b), j: a.max(b) })
}

/// Row/column ordering of `M''` and its diagonal blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub columns: Vec<(PairIndex, BinLabel)>,
    pub rows: Vec<(RowClass, MinorIndex)>,
    /// Diagonal blocks as `(first index, size)`; rows and columns share them.
    pub blocks: Vec<(usize, usize)>,
    /// Bin-4 columns with no partner column.
    pub unpaired: Vec<PairIndex>,
}

pub fn layout(shape: &ProblemShape, spec: &PlantSpec, phi: &Injection) -> Layout {
    let cols = omega(spec.s(), spec.r());
    let mut by_bin: [Vec<PairIndex>; 4] = Default::default();
    for &p in &cols {
        by_bin[bin_of(p, phi).block() - 1].push(p);
    }
    let mut columns = Vec::with_capacity(cols.len());
    let mut rows = Vec::with_capacity(cols.len());
    let mut blocks = Vec::new();
    for (b, bin) in [BinLabel::Bin1, BinLabel::Bin2, BinLabel::Bin3].into_iter().enumerate() {
        for &p in &by_bin[b] {
            blocks.push((columns.len(), 1));
            columns.push((p, bin));
            rows.push(rows_for_pair(p, bin, phi, shape)[0]);
        }
    }
    let mut placed = std::collections::HashSet::new();
    let mut unpaired = Vec::new();
    for &p in &by_bin[3] {
        if !placed.insert(p) {
            continue;
        }
        let bin4 = rows_for_pair(p, BinLabel::Bin4, phi, shape);
        match partner(p, phi) {
            Some(q) if q != p => {
                placed.insert(q);
                blocks.push((columns.len(), 2));
                columns.push((p, BinLabel::Bin4));
                columns.push((q, BinLabel::Bin4));
                rows.extend(bin4);
            }
            _ => {
                blocks.push((columns.len(), 1));
                columns.push((p, BinLabel::Bin4));
                rows.push(bin4[0]);
                unpaired.push(p);
            }
        }
    }
    Layout {
        columns,
        rows,
        blocks,
        unpaired,
    }
}

/// Arithmetic for one scalar field.
trait Ops {
    type T: Copy + PartialEq + fmt::Debug;
    fn zero(&self) -> Self::T;
    fn add(&self, a: Self::T, b: Self::T) -> Self::T;
    fn sub(&self, a: Self::T, b: Self::T) -> Self::T;
    fn mul(&self, a: Self::T, b: Self::T) -> Self::T;
    fn half(&self, a: Self::T) -> Self::T;
    fn neg(&self, a: Self::T) -> Self::T {
        self.sub(self.zero(), a)
    }
    fn is_zero(&self, a: Self::T) -> bool;
    fn close(&self, a: Self::T, b: Self::T) -> bool {
        self.is_zero(self.sub(a, b))
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::T;
    fn nonsingular(&self, m: &[Vec<Self::T>]) -> bool;
}

struct Modular(u64);

impl Ops for Modular {
    type T = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        field::add(a, b, self.0)
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        field::sub(a, b, self.0)
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        field::mul(a, b, self.0)
    }
    fn half(&self, a: u64) -> u64 {
        field::mul(a, self.0.div_ceil(2), self.0)
    }
    fn is_zero(&self, a: u64) -> bool {
        a == 0
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random_range(0..self.0)
    }
    fn nonsingular(&self, m: &[Vec<u64>]) -> bool {
        let n = m.len();
        let fm = FieldMatrix::from_fn(n, n, self.0, |i, j| m[i][j]);
        field::determinant(&fm).expect("square") != 0
    }
}

struct Real(f64);

impl Ops for Real {
    type T = f64;
    fn zero(&self) -> f64 {
        0.0
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn half(&self, a: f64) -> f64 {
        0.5 * a
    }
    fn is_zero(&self, a: f64) -> bool {
        a.abs() <= self.0
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }
    /// `σ_min / σ_max` above the tolerance; a raw determinant of a large
    /// well-conditioned matrix can still underflow any fixed threshold.
    fn nonsingular(&self, m: &[Vec<f64>]) -> bool {
        let n = m.len();
        let sv = crate::linalg::thin_svd(&DMatrix::from_fn(n, n, |i, j| m[i][j])).singular_values;
        match (sv.first(), sv.last()) {
            (Some(&top), Some(&low)) => top > 0.0 && low / top > self.0,
            _ => true,
        }
    }}

/// Generators as row-major `m × n` grids.
type Gens<T> = Vec<Vec<T>>;

fn sample_generators<O: Ops, R: Rng + ?Sized>(
    ops: &O,
    shape: &ProblemShape,
    spec: &PlantSpec,
    phi: &Injection,
    rng: &mut R,
) -> Gens<O::T> {
    let (m, n) = (shape.m(), shape.n());
    (0..spec.r())
        .map(|l| {
            let (rows, cols) = zero_pattern(l, phi, shape);
            let mut v = vec![ops.zero(); m * n];
            if l < spec.s() {
                let mut x = vec![ops.zero(); m];
                let mut y = vec![ops.zero(); n];
                for &a in &rows {
                    x[a] = ops.sample(rng);
                }
                for &b in &cols {
                    y[b] = ops.sample(rng);
                }
                for a in 0..m {
                    for b in 0..n {
                        v[a * n + b] = ops.mul(x[a], y[b]);
                    }
                }
            } else {
                for &a in &rows {
                    for &b in &cols {
                        v[a * n + b] = ops.sample(rng);
                    }
                }
            }
            v
        })
        .collect()
}

fn entry<O: Ops>(ops: &O, n: usize, vi: &[O::T], vj: &[O::T], idx: MinorIndex) -> O::T {
    let MinorIndex { a, b, c, d } = idx;
    let at = |v: &[O::T], r: usize, col: usize| v[r * n + col];
    let plus = ops.add(ops.mul(at(vi, a, b), at(vj, c, d)), ops.mul(at(vi, c, d), at(vj, a, b)));
    let minus = ops.add(ops.mul(at(vi, a, d), at(vj, c, b)), ops.mul(at(vi, c, b), at(vj, a, d)));
    ops.half(ops.sub(plus, minus))
}

/// Closed form for entry `(row, col)` of a diagonal
/// block, or `None` when no closed form is known for the position.
fn closed_form<O: Ops>(
    ops: &O,
    n: usize,
    phi: &Injection,
    last: usize,
    v: &Gens<O::T>,
    col: (PairIndex, BinLabel),
    row: (RowClass, MinorIndex),
) -> Option<O::T> {
    let (PairIndex { i, j }, bin) = col;
    let (class, idx) = row;
    let (f, g, k) = (&phi.f, &phi.g, phi.k);
    let at = |l: usize, r: usize, c: usize| v[l][r * n + c];
    match (bin, class) {
        (BinLabel::Bin1, RowClass::I) => Some(ops.sub(
            ops.mul(at(i, f[i], g[i]), at(i, last, k)),
            ops.mul(at(i, f[i], k), at(i, last, g[i])),
        )),
        (BinLabel::Bin2, RowClass::II) => {
            let base = ops.sub(
                ops.mul(at(i, f[i], g[i]), at(j, last, g[j])),
                ops.mul(at(i, last, g[i]), at(j, f[j], g[j])),
            );
            let sign = idx.b == g[i];
            Some(ops.half(if sign { base } else { ops.neg(base) }))
        }
        (BinLabel::Bin3, RowClass::III) => {
            let base = ops.sub(
                ops.mul(at(i, f[i], g[i]), at(j, f[j], k)),
                ops.mul(at(i, f[i], k), at(j, f[j], g[j])),
            );
            let sign = idx.a == f[i];
            Some(ops.half(if sign { base } else { ops.neg(base) }))
        }
        (BinLabel::Bin4, RowClass::IV) | (BinLabel::Bin4, RowClass::V) => {
            let shift = if class == RowClass::V { k + 1 } else { 0 };
            let base = ops.mul(at(i, f[i], g[i] + shift), at(j, f[j], g[j] + shift));
            // + when the cell of i is the top-left or bottom-right corner
            let sign = (idx.a == f[i]) == (idx.b == g[i] + shift);
            Some(ops.half(if sign { base } else { ops.neg(base) }))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Assignment {
    Modular(u64),
    /// Gaussian values; comparisons use the given absolute tolerance.
    Real(f64),
}

/// Outcome of the structural checks over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub shape: ProblemShape,
    pub spec: PlantSpec,
    pub injection: Injection,
    pub layout: Layout,
    pub square: bool,
    /// Entries outside the row/column supports of their generators vanish.
    pub zero_block: bool,
    /// Off-diagonal entries in the diagonal class block and everything
    /// below it vanish.
    pub block_triangular: bool,
    /// Diagonal blocks match their closed forms.
    pub diagonal_forms: bool,
    pub trials: usize,
    /// First trial (zero-based) with every diagonal block nonsingular.
    pub blocks_nonsingular_at: Option<usize>,
    /// First trial (zero-based) with `det(M'') != 0`.
    pub det_nonzero_at: Option<usize>,
    /// Human-readable descriptions of the first few violations.
    pub violations: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.square
            && self.zero_block
            && self.block_triangular
            && self.diagonal_forms
            && self.blocks_nonsingular_at.is_some()
            && self.det_nonzero_at.is_some()
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yes = |b: bool| if b { "pass" } else { "FAIL" };
        let n = self.layout.columns.len();
        writeln!(
            f,
            "m={} n={} s={} R={} k={}: M'' is {}x{}",
            self.shape.m(),
            self.shape.n(),
            self.spec.s(),
            self.spec.r(),
            self.injection.k,
            self.layout.rows.len(),
            n
        )?;
        writeln!(f, "  square            {}", yes(self.square))?;
        writeln!(f, "  zero block        {}", yes(self.zero_block))?;
        writeln!(f, "  block triangular  {}", yes(self.block_triangular))?;
        writeln!(f, "  diagonal forms    {}", yes(self.diagonal_forms))?;
        writeln!(
            f,
            "  diagonal blocks   {}",
            yes(self.blocks_nonsingular_at.is_some())
        )?;
        write!(
            f,
            "  det != 0          {} ({} trial(s))",
            yes(self.det_nonzero_at.is_some()),
            self.trials
        )?;
        for v in &self.violations {
            write!(f, "\n  ! {v}")?;
        }
        Ok(())
    }
}

const MAX_VIOLATIONS: usize = 8;

/// Builds `M''` for `trials` random assignments and checks its structure.
pub fn build_m_double_prime(
    shape: &ProblemShape,
    spec: &PlantSpec,
    assignment: Assignment,
    trials: usize,
    seed: u64,
) -> Result<StructureReport> {
    if shape.is_symmetric() {
        return Err(Error::Precondition("no M'' construction for symmetric shapes".into()));
    }
    let phi = make_injection(shape, spec.r())?;
    let layout = layout(shape, spec, &phi);
    let mut report = StructureReport {
        shape: *shape,
        spec: *spec,
        injection: phi.clone(),
        square: layout.rows.len() == layout.columns.len()
            && layout.columns.len() == crate::bounds::num_cols(spec),
        layout,
        zero_block: true,
        block_triangular: true,
        diagonal_forms: true,
        trials,
        blocks_nonsingular_at: None,
        det_nonzero_at: None,
        violations: Vec::new(),
    };
    match assignment {
        Assignment::Modular(p) => {
            field::check_prime(p)?;
            run_trials(&Modular(p), &mut report, seed)
        }
        Assignment::Real(tol) => run_trials(&Real(tol), &mut report, seed),
    }
    Ok(report)
}

fn run_trials<O: Ops>(ops: &O, report: &mut StructureReport, seed: u64) {
    let shape = report.shape;
    let spec = report.spec;
    let phi = report.injection.clone();
    let lay = report.layout.clone();
    let (n, last, k) = (shape.n(), shape.m() - 1, phi.k);
    let size = lay.columns.len();
    let mut group = vec![0; size];
    for (b, &(start, len)) in lay.blocks.iter().enumerate() {
        for slot in group.iter_mut().skip(start).take(len) {
            *slot = b;
        }
    }
    let note = |report: &mut StructureReport, msg: String| {
        if report.violations.len() < MAX_VIOLATIONS {
            report.violations.push(msg);
        }
    };

    for t in 0..report.trials {
        let mut rng = stream(seed, Role::Aux, t as u64);
        let v = sample_generators(ops, &shape, &spec, &phi, &mut rng);
        let mut mat = vec![vec![ops.zero(); size]; lay.rows.len()];
        for (r, &(class, idx)) in lay.rows.iter().enumerate() {
            for (c, &(PairIndex { i, j }, bin)) in lay.columns.iter().enumerate() {
                let x = entry(ops, n, &v[i], &v[j], idx);
                mat[r][c] = x;

                let rows_ok = [idx.a, idx.c].iter().all(|&a| a == phi.f[i] || a == phi.f[j] || a == last);
                let support = [phi.g[i], phi.g[j], k, phi.g[i] + k + 1, phi.g[j] + k + 1];
                let cols_ok = [idx.b, idx.d].iter().all(|b| support.contains(b));
                if (!rows_ok || !cols_ok) && !ops.is_zero(x) {
                    report.zero_block = false;
                    note(report, format!("trial {t}: zero block fails at row {r} column {c}"));
                }

                let same_block = group[r] == group[c];
                if class.block() >= bin.block() && !same_block && !ops.is_zero(x) {
                    report.block_triangular = false;
                    note(report, format!("trial {t}: nonzero off-diagonal entry at row {r} column {c}"));
                }
                if same_block {
                    let expected = closed_form(ops, n, &phi, last, &v, (PairIndex { i, j }, bin), (class, idx));
                    if expected.is_none_or(|e| !ops.close(e, x)) {
                        report.diagonal_forms = false;
                        note(report, format!("trial {t}: diagonal entry at row {r} column {c} differs from its closed form"));
                    }
                }
            }
        }
        if report.blocks_nonsingular_at.is_none() {
            let all = lay.blocks.iter().all(|&(start, len)| {
                let sub: Vec<Vec<O::T>> = (start..start + len)
                    .map(|r| mat[r][start..start + len].to_vec())
                    .collect();
                ops.nonsingular(&sub)
            });
            if all {
                report.blocks_nonsingular_at = Some(t);
            }
        }
        if report.det_nonzero_at.is_none() && report.square && ops.nonsingular(&mat) {
            report.det_nonzero_at = Some(t);
        }
    }
}

/// Every `(m, n, R)` with `m <= m_max`, `n <= n_max`, `1 <= R <= (m-1)(n-2)/2`
/// and the `s` values `{0, ⌊R/2⌋, R}`.
pub fn grid(m_max: usize, n_max: usize) -> Vec<(ProblemShape, PlantSpec)> {
    let mut out = Vec::new();
    for m in 2..=m_max {
        for n in 2..=n_max {
            let shape = ProblemShape::general(m, n).expect("m, n >= 2");
            let top = (m - 1) * n.saturating_sub(2) / 2;
            for r in 1..=top {
                let mut ss = vec![0, r / 2, r];
                ss.dedup();
                for s in ss {
                    out.push((shape, PlantSpec::new(s, r).expect("s <= R")));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(m: usize, n: usize) -> ProblemShape {
        ProblemShape::general(m, n).unwrap()
    }

    #[test]
    fn injection_examples() {
        let phi = make_injection(&gen(3, 5), 4).unwrap();
        assert_eq!(phi.k, 2);
        assert_eq!(phi.f, vec![0, 0, 1, 1]);
        assert_eq!(phi.g, vec![0, 1, 0, 1]);
        assert!(matches!(make_injection(&gen(3, 5), 5), Err(Error::Bound(_))));
        let phi = make_injection(&gen(4, 7), 6).unwrap();
        assert_eq!(phi.k, 3);
        let cells: std::collections::HashSet<_> = phi.f.iter().zip(&phi.g).collect();
        assert_eq!(cells.len(), 6);
    }

    #[test]
    fn zero_pattern_example() {
        let shape = gen(3, 5);
        let phi = make_injection(&shape, 4).unwrap();
        // φ(0) = (0, 0): rows {0, 2}, columns {0, 2, 3}
        assert_eq!(zero_pattern(0, &phi, &shape), ([0, 2], [0, 2, 3]));
    }

    #[test]
    fn planted_generators_stay_rank_one() {
        let shape = gen(3, 5);
        let spec = PlantSpec::new(4, 4).unwrap();
        let phi = make_injection(&shape, 4).unwrap();
        let mut rng = stream(0, Role::Aux, 0);
        let v = sample_generators(&Real(1e-12), &shape, &spec, &phi, &mut rng);
        for g in v {
            let m = DMatrix::from_row_slice(3, 5, &g);
            let sv = crate::linalg::thin_svd(&m).singular_values;
            assert!(sv[1] <= 1e-12 * sv[0]);
        }
    }

    #[test]
    fn bin_examples() {
        let phi = make_injection(&gen(3, 5), 4).unwrap();
        let p = |i, j| PairIndex { i, j };
        assert_eq!(bin_of(p(2, 2), &phi), BinLabel::Bin1);
        assert_eq!(bin_of(p(0, 1), &phi), BinLabel::Bin2);
        assert_eq!(bin_of(p(0, 2), &phi), BinLabel::Bin3);
        assert_eq!(bin_of(p(0, 3), &phi), BinLabel::Bin4);
        assert_eq!(partner(p(0, 3), &phi), Some(p(1, 2)));
    }

    #[test]
    fn class_rows() {
        let shape = gen(3, 5);
        let phi = make_injection(&shape, 4).unwrap();
        let p = PairIndex { i: 0, j: 0 };
        assert_eq!(
            rows_for_pair(p, BinLabel::Bin1, &phi, &shape),
            vec![(RowClass::I, MinorIndex::new(0, 0, 2, 2))]
        );
        let p = PairIndex { i: 0, j: 1 };
        assert_eq!(
            rows_for_pair(p, BinLabel::Bin2, &phi, &shape),
            vec![(RowClass::II, MinorIndex::new(0, 0, 2, 1))]
        );
        let spec = PlantSpec::new(2, 4).unwrap();
        assert_eq!(layout(&shape, &spec, &phi).rows.len(), 10 - 2);
    }

    #[test]
    fn partition_covers_omega() {
        for (shape, spec) in grid(5, 9) {
            let phi = make_injection(&shape, spec.r()).unwrap();
            let lay = layout(&shape, &spec, &phi);
            let mut cols: Vec<_> = lay.columns.iter().map(|c| c.0).collect();
            cols.sort();
            assert_eq!(cols, omega(spec.s(), spec.r()));
            let rows: std::collections::HashSet<_> = lay.rows.iter().map(|r| r.1).collect();
            assert_eq!(rows.len(), lay.rows.len(), "rows must be distinct");
        }
    }

    #[test]
    fn examples_pass() {
        for s in [0, 2] {
            let spec = PlantSpec::new(s, 4).unwrap();
            let r = build_m_double_prime(&gen(3, 5), &spec, Assignment::Modular(997), 5, 0).unwrap();
            assert!(r.passed(), "{r}");
            assert_eq!(r.layout.columns.len(), 10 - s);
        }
        let spec = PlantSpec::new(0, 5).unwrap();
        assert!(matches!(
            build_m_double_prime(&gen(3, 5), &spec, Assignment::Modular(997), 5, 0),
            Err(Error::Bound(_))
        ));
    }

    #[test]
    fn real_assignments_agree() {
        let spec = PlantSpec::new(3, 7).unwrap();
        let r = build_m_double_prime(&gen(4, 7), &spec, Assignment::Real(1e-10), 3, 1).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn unpaired_bin4_columns_are_handled() {
        // R = 5 with k = 2 leaves cell (2, 1) empty, so the pair
        // φ^{-1}(1, 1), φ^{-1}(2, 0) has no partner.
        let shape = gen(4, 5);
        let spec = PlantSpec::new(0, 5).unwrap();
        let r = build_m_double_prime(&shape, &spec, Assignment::Modular(997), 5, 0).unwrap();
        assert!(!r.layout.unpaired.is_empty());
        assert!(r.passed(), "{r}");
    }
}
