//! Closed-form parameter arithmetic: constraint-matrix dimensions, the
//! success boundary `rows >= C(R+1,2) - s`, and identifiability limits.
//!
//! Every quantity is evaluated in exact integer arithmetic. The square-root
//! closed forms are rewritten as `isqrt(8N + 1)` expressions so perfect
//! squares at the boundary cannot be misrounded.

use crate::error::{Error, Result};

/// Ambient matrix space: `m × n` general matrices or `m × m` symmetric ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProblemShape {
    m: usize,
    n: usize,
    symmetric: bool,
}

impl ProblemShape {
    pub fn general(m: usize, n: usize) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::Shape(format!("need m, n >= 2, got {m}x{n}")));
        }
        Ok(Self {
            m,
            n,
            symmetric: false,
        })
    }

    pub fn symmetric(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Shape(format!("need m >= 2, got {m}")));
        }
        Ok(Self {
            m,
            n: m,
            symmetric: true,
        })
    }

    pub fn new(m: usize, n: usize, symmetric: bool) -> Result<Self> {
        if symmetric {
            if m != n {
                return Err(Error::Shape(format!(
                    "symmetric shape needs m = n, got {m}x{n}"
                )));
            }
            Self::symmetric(m)
        } else {
            Self::general(m, n)
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Dimension of the ambient space: `mn`, or `m(m+1)/2` when symmetric.
    pub fn ambient_dim(&self) -> usize {
        if self.symmetric {
            self.m * (self.m + 1) / 2
        } else {
            self.m * self.n
        }
    }
}

/// Planted parameters: `s` rank-1 generators among `R` total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlantSpec {
    s: usize,
    r: usize,
}

impl PlantSpec {
    pub fn new(s: usize, r: usize) -> Result<Self> {
        if s > r {
            return Err(Error::Spec(format!("need s <= R, got s={s}, R={r}")));
        }
        Ok(Self { s, r })
    }

    /// Checks `R` against the ambient dimension so the generators can be
    /// linearly independent.
    pub fn for_shape(s: usize, r: usize, shape: &ProblemShape) -> Result<Self> {
        let spec = Self::new(s, r)?;
        if r > shape.ambient_dim() {
            return Err(Error::Spec(format!(
                "R={r} exceeds ambient dimension {}",
                shape.ambient_dim()
            )));
        }
        Ok(spec)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

pub fn binom2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Number of independent minor constraints (rows of the constraint matrix).
pub fn num_rows(shape: &ProblemShape) -> usize {
    let m = shape.m;
    if shape.symmetric {
        (m + 1) * m * m * (m - 1) / 12
    } else {
        binom2(m) * binom2(shape.n)
    }
}

/// `C(R+1, 2) - s`, the number of pair columns.
pub fn num_cols(spec: &PlantSpec) -> usize {
    binom2(spec.r + 1) - spec.s
}

pub fn conjecture_holds(shape: &ProblemShape, spec: &PlantSpec) -> bool {
    num_rows(shape) >= num_cols(spec)
}

fn isqrt(x: u128) -> u128 {
    x.isqrt()
}

/// Largest `R` with `C(R+1,2) <= rows + s`.
pub fn r_max_given_s(shape: &ProblemShape, s: usize) -> usize {
    let budget = (num_rows(shape) + s) as u128;
    ((isqrt(8 * budget + 1) - 1) / 2) as usize
}

/// Largest `R` for which `s = R` satisfies the boundary inequality.
pub fn r_max(shape: &ProblemShape) -> usize {
    let rows = num_rows(shape) as u128;
    ((isqrt(8 * rows + 1) + 1) / 2) as usize
}

/// Smallest `s` at which `r_max_given_s` reaches `r_max`.
pub fn s_star(shape: &ProblemShape) -> usize {
    let top = r_max(shape);
    (0..=top)
        .find(|&s| r_max_given_s(shape, s) == top)
        .unwrap_or(top)
}

/// `(m-1)(n-1)` in general, `m(m+1)/2 - m` when symmetric.
pub fn identifiability_bound(shape: &ProblemShape) -> usize {
    if shape.symmetric {
        shape.m * (shape.m + 1) / 2 - shape.m
    } else {
        (shape.m - 1) * (shape.n - 1)
    }
}

/// Every `(s, R)` satisfying the boundary inequality, `1 <= R`, in
/// `(s, R)` lexicographic order.
pub fn admissible_pairs(shape: &ProblemShape) -> Vec<PlantSpec> {
    let mut out = Vec::new();
    for s in 0..=r_max(shape) {
        for r in s.max(1)..=r_max_given_s(shape, s) {
            out.push(PlantSpec { s, r });
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

    // linear search over the raw inequality C(R+1,2) - s <= rows
    fn brute_r_given_s(shape: &ProblemShape, s: usize) -> usize {
        (0..10_000usize)
            .take_while(|&r| binom2(r + 1) <= num_rows(shape) + s)
            .last()
            .unwrap()
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(ProblemShape::general(1, 3).is_err());
        assert!(ProblemShape::general(3, 1).is_err());
        assert!(ProblemShape::symmetric(1).is_err());
        assert!(ProblemShape::new(3, 4, true).is_err());
        assert!(PlantSpec::new(3, 2).is_err());
        assert!(PlantSpec::for_shape(0, 10, &gen(3, 3)).is_err());
        assert!(PlantSpec::for_shape(0, 7, &ProblemShape::symmetric(3).unwrap()).is_err());
    }

    #[test]
    fn row_counts() {
        assert_eq!(num_rows(&gen(3, 3)), 9);
        assert_eq!(num_rows(&ProblemShape::symmetric(2).unwrap()), 1);
        // C(4,2) - C(5,4) = 1 at m = 2
        assert_eq!(binom2(binom2(3) + 1) - 5, 1);
        assert_eq!(num_rows(&ProblemShape::symmetric(3).unwrap()), 6);
    }

    #[test]
    fn col_counts() {
        assert_eq!(num_cols(&PlantSpec::new(0, 3).unwrap()), 6);
        assert_eq!(num_cols(&PlantSpec::new(1, 2).unwrap()), 2);
        assert_eq!(num_cols(&PlantSpec::new(4, 4).unwrap()), 6);
    }

    #[test]
    fn boundary_examples() {
        let s33 = gen(3, 3);
        assert!(conjecture_holds(&s33, &PlantSpec::new(0, 3).unwrap()));
        assert!(!conjecture_holds(&s33, &PlantSpec::new(0, 4).unwrap()));
        assert!(conjecture_holds(&s33, &PlantSpec::new(4, 4).unwrap()));

        assert_eq!(r_max_given_s(&s33, 0), 3);
        assert_eq!(r_max_given_s(&gen(2, 2), 0), 1);
        let sym3 = ProblemShape::symmetric(3).unwrap();
        assert_eq!(r_max_given_s(&sym3, 0), 3);

        assert_eq!(r_max(&s33), 4);
        assert_eq!(r_max(&gen(2, 2)), 2);
        assert_eq!(r_max(&sym3), 4);

        assert_eq!(s_star(&s33), 1);
        assert_eq!(s_star(&gen(2, 2)), 2);

        assert_eq!(identifiability_bound(&s33), 4);
        assert_eq!(identifiability_bound(&gen(5, 7)), 24);
        assert_eq!(identifiability_bound(&ProblemShape::symmetric(4).unwrap()), 6);
    }

    #[test]
    fn closed_forms_match_linear_search() {
        for m in 2..=12 {
            for n in 2..=12 {
                for sym in [false, true] {
                    if sym && m != n {
                        continue;
                    }
                    let shape = ProblemShape::new(m, n, sym).unwrap();
                    for s in 0..=200 {
                        assert_eq!(r_max_given_s(&shape, s), brute_r_given_s(&shape, s));
                    }
                    let top = r_max(&shape);
                    let brute_top = (0..=400)
                        .filter(|&s| s <= r_max_given_s(&shape, s))
                        .max()
                        .unwrap();
                    assert_eq!(top, brute_top, "{m}x{n} sym={sym}");
                    assert_eq!(r_max_given_s(&shape, s_star(&shape)), top);
                }
            }
        }
    }

    #[test]
    fn r_max_given_s_steps_by_one() {
        for m in 2..=12 {
            for n in 2..=12 {
                let shape = gen(m, n);
                let top = r_max(&shape);
                let vals: Vec<usize> = (0..=top).map(|s| r_max_given_s(&shape, s)).collect();
                assert!(vals.windows(2).all(|w| w[0] <= w[1]));
                if top >= 1 {
                    let spread = vals.iter().max().unwrap() - vals.iter().min().unwrap();
                    assert_eq!(spread, 1, "{m}x{n}: {vals:?}");
                }
                let ss = s_star(&shape);
                for (s, v) in vals.iter().enumerate() {
                    let want = if s < ss { top - 1 } else { top };
                    assert_eq!(*v, want);
                }
            }
        }
    }

    #[test]
    fn admissible_pairs_satisfy_boundary() {
        let shape = gen(3, 4);
        let pairs = admissible_pairs(&shape);
        assert!(!pairs.is_empty());
        for p in &pairs {
            assert!(conjecture_holds(&shape, p));
            assert!(p.s <= p.r);
        }
        let over: Vec<_> = (0..=r_max(&shape))
            .map(|s| PlantSpec { s, r: r_max_given_s(&shape, s) + 1 })
            .collect();
        assert!(over.iter().all(|p| !conjecture_holds(&shape, p)));
    }
}
