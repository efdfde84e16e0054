//! Planted subspaces `span{x^1 (y^1)^T, ..., x^s (y^s)^T, z^{s+1}, ..., z^R}`
//! drawn over the reals or over `F_p`, in general or symmetric ambient space.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::{PlantSpec, ProblemShape};
use crate::error::{Error, Result};
use crate::field::{self, FieldMatrix};
use crate::linalg;
use crate::rng::{stream, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarField {
    Real,
    Prime(u64),
}

/// Generators and the factors of the planted ones. In the symmetric case
/// `y` repeats `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generators {
    Real {
        mats: Vec<DMatrix<f64>>,
        x: Vec<DVector<f64>>,
        y: Vec<DVector<f64>>,
    },
    Modular {
        mats: Vec<FieldMatrix>,
        x: Vec<Vec<u64>>,
        y: Vec<Vec<u64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSubspace {
    pub shape: ProblemShape,
    pub spec: PlantSpec,
    pub seed: u64,
    pub field: ScalarField,
    pub generators: Generators,
}

impl PlantedSubspace {
    pub fn real_generators(&self) -> Option<&[DMatrix<f64>]> {
        match &self.generators {
            Generators::Real { mats, .. } => Some(mats),
            Generators::Modular { .. } => None,
        }
    }

    pub fn modular_generators(&self) -> Option<&[FieldMatrix]> {
        match &self.generators {
            Generators::Modular { mats, .. } => Some(mats),
            Generators::Real { .. } => None,
        }
    }

    /// The planted rank-1 generators `v^1..v^s` (reals only).
    pub fn planted(&self) -> Vec<DMatrix<f64>> {
        self.real_generators()
            .map(|g| g[..self.spec.s()].to_vec())
            .unwrap_or_default()
    }
}

fn gaussian_vec(len: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn validate(shape: &ProblemShape, spec: &PlantSpec) -> Result<()> {
    PlantSpec::for_shape(spec.s(), spec.r(), shape).map(|_| ())
}

/// Gaussian planted subspace. Planted factors and non-planted entries are
/// i.i.d. standard normal; symmetric non-planted generators draw the upper
/// triangle and mirror it.
pub fn generate_real(shape: ProblemShape, spec: PlantSpec, seed: u64) -> Result<PlantedSubspace> {
    validate(&shape, &spec)?;
    let (m, n) = (shape.m(), shape.n());
    let mut mats = Vec::with_capacity(spec.r());
    let mut xs = Vec::with_capacity(spec.s());
    let mut ys = Vec::with_capacity(spec.s());
    for i in 0..spec.s() {
        let x = gaussian_vec(m, &mut stream(seed, Role::X, i as u64));
        let y = if shape.is_symmetric() {
            x.clone()
        } else {
            gaussian_vec(n, &mut stream(seed, Role::Y, i as u64))
        };
        mats.push(&x * y.transpose());
        xs.push(x);
        ys.push(y);
    }
    for i in spec.s()..spec.r() {
        let mut rng = stream(seed, Role::Z, i as u64);
        let z = if shape.is_symmetric() {
            let coords: Vec<f64> = (0..shape.ambient_dim())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            linalg::from_sym_coords(&coords, m)
        } else {
            let entries: Vec<f64> = (0..m * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            DMatrix::from_row_slice(m, n, &entries)
        };
        mats.push(z);
    }
    Ok(PlantedSubspace {
        shape,
        spec,
        seed,
        field: ScalarField::Real,
        generators: Generators::Real { mats, x: xs, y: ys },
    })
}

/// Uniform planted subspace over `F_p`: planted factor sets pairwise
/// linearly independent, non-planted generators uniform.
pub fn generate_modular(
    shape: ProblemShape,
    spec: PlantSpec,
    p: u64,
    seed: u64,
) -> Result<PlantedSubspace> {
    field::check_prime(p)?;
    let (m, n) = (shape.m(), shape.n());
    let s = spec.s();
    for d in [m, n] {
        let capacity = field::pairwise_capacity(d, p);
        if s as u128 > capacity {
            return Err(Error::Capacity { requested: s, capacity, dim: d, p });
        }
    }
    validate(&shape, &spec)?;
    let xs = field::sample_pairwise_independent(m, s, p, &mut stream(seed, Role::X, 0))?;
    let ys = if shape.is_symmetric() {
        xs.clone()
    } else {
        field::sample_pairwise_independent(n, s, p, &mut stream(seed, Role::Y, 0))?
    };
    let mut mats = Vec::with_capacity(spec.r());
    for (x, y) in xs.iter().zip(&ys) {
        mats.push(FieldMatrix::from_fn(m, n, p, |i, j| field::mul(x[i], y[j], p)));
    }
    for i in s..spec.r() {
        let mut rng = stream(seed, Role::Z, i as u64);
        let z = if shape.is_symmetric() {
            let mut z = FieldMatrix::zeros(m, m, p);
            for a in 0..m {
                for b in a..m {
                    let v = rng.random_range(0..p);
                    z.set(a, b, v);
                    z.set(b, a, v);
                }
            }
            z
        } else {
            FieldMatrix::from_fn(m, n, p, |_, _| rng.random_range(0..p))
        };
        mats.push(z);
    }
    Ok(PlantedSubspace {
        shape,
        spec,
        seed,
        field: ScalarField::Prime(p),
        generators: Generators::Modular { mats, x: xs, y: ys },
    })
}

/// Relative singular-value threshold for numerical rank of generator sets.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Row `k` of the result is the row-major vectorization of `mats[k]`.
pub fn stack_vectorized(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = mats.first().map(|m| m.len()).unwrap_or(0);
    let mut out = DMatrix::zeros(mats.len(), d);
    for (k, m) in mats.iter().enumerate() {
        out.row_mut(k).copy_from(&linalg::vectorize(m).transpose());
    }
    out
}

/// Orthonormal basis (in the Frobenius inner product) spanning the same
/// subspace as `mats`, from the SVD of the stacked vectorizations.
pub fn orthonormal_basis_of(mats: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let (m, n) = first.shape();
    let r = mats.len();
    // columns are the vectorized generators
    let a = stack_vectorized(mats).transpose();
    let svd = linalg::thin_svd(&a);
    let rank = linalg::numerical_rank(&svd.singular_values, RANK_REL_TOL);
    if rank < r {
        return Err(Error::RankDeficient { rank, expected: r });
    }
    Ok((0..r)
        .map(|k| {
            let col: Vec<f64> = svd.u.column(k).iter().copied().collect();
            linalg::unvectorize(&col, m, n)
        })
        .collect())
}

pub fn orthonormal_basis(u: &PlantedSubspace) -> Result<Vec<DMatrix<f64>>> {
    let mats = u
        .real_generators()
        .ok_or_else(|| Error::Precondition("orthonormalization needs a real subspace".into()))?;
    let mut basis = orthonormal_basis_of(mats)?;
    if u.shape.is_symmetric() {
        // combinations of symmetric matrices are symmetric; remove round-off
        for b in &mut basis {
            let t = b.transpose();
            *b = (&*b + t) * 0.5;
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
        let s = stack_vectorized(mats);
        &s * s.transpose()
    }

    fn vec_rank(mats: &[DMatrix<f64>]) -> usize {
        let s = stack_vectorized(mats);
        linalg::numerical_rank(&linalg::thin_svd(&s).singular_values, 1e-10)
    }

    #[test]
    fn real_generation_examples() {
        let s33 = ProblemShape::general(3, 3).unwrap();
        let u = generate_real(s33, PlantSpec::new(0, 2).unwrap(), 11).unwrap();
        assert_eq!(vec_rank(u.real_generators().unwrap()), 2);

        let u = generate_real(s33, PlantSpec::new(2, 2).unwrap(), 11).unwrap();
        for g in u.real_generators().unwrap() {
            let sv = g.singular_values();
            let mut sv: Vec<f64> = sv.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            assert!(sv[1] < 1e-12 * sv[0]);
        }

        let sym = ProblemShape::symmetric(3).unwrap();
        let u = generate_real(sym, PlantSpec::new(1, 2).unwrap(), 5).unwrap();
        let g = u.real_generators().unwrap();
        for v in g {
            assert_eq!(v, &v.transpose());
        }
        let eig = g[0].clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|x| x.abs()).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        assert!(ev[1] < 1e-12 * ev[0]);
    }

    #[test]
    fn planted_generators_are_outer_products() {
        let shape = ProblemShape::general(4, 5).unwrap();
        let u = generate_real(shape, PlantSpec::new(3, 6).unwrap(), 2).unwrap();
        let Generators::Real { mats, x, y } = &u.generators else { panic!() };
        for i in 0..3 {
            assert_eq!(mats[i], &x[i] * y[i].transpose());
        }
    }

    #[test]
    fn modular_generation_examples() {
        let s22 = ProblemShape::general(2, 2).unwrap();
        let u = generate_modular(s22, PlantSpec::new(2, 2).unwrap(), 997, 0).unwrap();
        let Generators::Modular { x, y, mats } = &u.generators else { panic!() };
        for fac in [x, y] {
            let (a, b) = (&fac[0], &fac[1]);
            assert!((0..997u64).all(|l| !(a[0] == field::mul(l, b[0], 997) && a[1] == field::mul(l, b[1], 997))));
        }
        for (k, g) in mats.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(g.get(i, j), field::mul(x[k][i], y[k][j], 997));
                }
            }
        }

        let s33 = ProblemShape::general(3, 3).unwrap();
        let u = generate_modular(s33, PlantSpec::new(0, 4).unwrap(), 997, 0).unwrap();
        let mats = u.modular_generators().unwrap();
        assert_eq!(mats.len(), 4);
        assert!(mats.iter().all(|g| (0..3).all(|i| (0..3).all(|j| g.get(i, j) < 997))));

        let err = generate_modular(s22, PlantSpec::new(999, 999).unwrap(), 997, 0).unwrap_err();
        assert!(matches!(err, Error::Capacity { capacity: 998, .. }));
    }

    #[test]
    fn symmetric_modular_generators_are_symmetric() {
        let sym = ProblemShape::symmetric(4).unwrap();
        let u = generate_modular(sym, PlantSpec::new(2, 6).unwrap(), 997, 3).unwrap();
        for g in u.modular_generators().unwrap() {
            assert_eq!(g, &g.transpose());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let shape = ProblemShape::general(3, 4).unwrap();
        let spec = PlantSpec::new(2, 5).unwrap();
        assert_eq!(generate_real(shape, spec, 9).unwrap(), generate_real(shape, spec, 9).unwrap());
        assert_ne!(generate_real(shape, spec, 9).unwrap(), generate_real(shape, spec, 10).unwrap());
        assert_eq!(
            generate_modular(shape, spec, 997, 9).unwrap(),
            generate_modular(shape, spec, 997, 9).unwrap()
        );
    }

    #[test]
    fn real_generators_independent_across_seeds() {
        for seed in 0..20 {
            for (m, n, s, r) in [(3, 3, 2, 9), (2, 5, 1, 10), (4, 4, 4, 7)] {
                let shape = ProblemShape::general(m, n).unwrap();
                let u = generate_real(shape, PlantSpec::new(s, r).unwrap(), seed).unwrap();
                assert_eq!(vec_rank(u.real_generators().unwrap()), r, "seed {seed}");
            }
        }
    }

    #[test]
    fn orthonormal_basis_examples() {
        let s33 = ProblemShape::general(3, 3).unwrap();
        let u = generate_real(s33, PlantSpec::new(1, 4).unwrap(), 4).unwrap();
        let b = orthonormal_basis(&u).unwrap();
        assert_eq!(b.len(), 4);
        let g = gram(&b);
        assert!((g - DMatrix::identity(4, 4)).abs().max() < 1e-12);
        // mutual projection: every generator lies in span(b)
        let q = stack_vectorized(&b);
        for v in u.real_generators().unwrap() {
            let x = linalg::vectorize(v);
            let proj = q.transpose() * (&q * &x);
            assert!((proj - &x).norm() <= 1e-10 * x.norm());
        }

        // already orthonormal input keeps its span
        let e: Vec<DMatrix<f64>> = (0..3)
            .map(|k| {
                let mut m = DMatrix::zeros(3, 3);
                m[(k, k)] = 1.0;
                m
            })
            .collect();
        let b = orthonormal_basis_of(&e).unwrap();
        assert!((gram(&b) - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        let q = stack_vectorized(&b);
        for v in &e {
            let x = linalg::vectorize(v);
            assert!((q.transpose() * (&q * &x) - &x).norm() < 1e-12);
        }

        let dup = vec![e[0].clone(), e[0].clone()];
        assert!(matches!(orthonormal_basis_of(&dup), Err(Error::RankDeficient { rank: 1, expected: 2 })));
    }
}
