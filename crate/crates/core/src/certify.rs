//! Exact full-rank certificates for the constraint matrix over `F_p`.
//!
//! A certificate names a parameter case, a prime and a seed. The seed alone
//! regenerates the witness subspace; deleting `rm_rows` from its constraint
//! matrix leaves a square matrix whose determinant mod p is `det_mod_p`.

use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{self, PlantSpec, ProblemShape};
use crate::error::{Error, Result};
use crate::field;
use crate::minor_forms::{build_m_matrix, ColumnMode};
use crate::subspaces;

pub const DEFAULT_MAX_RESAMPLES: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub shape: ProblemShape,
    pub spec: PlantSpec,
    pub seed: u64,
    pub p: u64,
    pub det_mod_p: u64,
    pub rm_rows: Vec<usize>,
}

/// Every attempt from `seed` to `seed + attempts - 1` gave a singular minor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyFailure {
    pub shape: ProblemShape,
    pub spec: PlantSpec,
    pub p: u64,
    pub seed: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Certified(Certificate),
    Failed(CertifyFailure),
}

impl Outcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Outcome::Certified(c) => Some(c),
            Outcome::Failed(_) => None,
        }
    }
}

/// Tries seeds `seed, seed + 1, ..., seed + max_resamples` until the
/// constraint matrix of the witness has full column rank mod p.
pub fn certify_case(
    shape: ProblemShape,
    spec: PlantSpec,
    p: u64,
    seed: u64,
    max_resamples: u32,
) -> Result<Outcome> {
    if !bounds::conjecture_holds(&shape, &spec) {
        return Err(Error::Precondition(format!(
            "{} rows < {} columns for m={}, n={}, s={}, R={}",
            bounds::num_rows(&shape),
            bounds::num_cols(&spec),
            shape.m(),
            shape.n(),
            spec.s(),
            spec.r()
        )));
    }
    for attempt in 0..=max_resamples {
        let case_seed = seed.wrapping_add(attempt as u64);
        let u = subspaces::generate_modular(shape, spec, p, case_seed)?;
        let m = build_m_matrix(&u, ColumnMode::Omega);
        let report = field::eliminate_maximal_minor(m.modular().expect("modular subspace"))?;
        if report.rank == m.ncols() && report.minor_det != 0 {
            return Ok(Outcome::Certified(Certificate {
                shape,
                spec,
                seed: case_seed,
                p,
                det_mod_p: report.minor_det,
                rm_rows: report.removed_rows,
            }));
        }
        log::debug!(
            "m={} n={} s={} R={} seed={case_seed}: singular, resampling",
            shape.m(),
            shape.n(),
            spec.s(),
            spec.r()
        );
    }
    Ok(Outcome::Failed(CertifyFailure {
        shape,
        spec,
        p,
        seed,
        attempts: max_resamples + 1,
    }))
}

/// Recomputes the certified minor from scratch.
pub fn verify_certificate(cert: &Certificate) -> Result<bool> {
    field::check_prime(cert.p).map_err(|_| Error::Schema(format!("{} is not an odd prime", cert.p)))?;
    if cert.det_mod_p >= cert.p {
        return Err(Error::Schema(format!(
            "det {} not reduced mod {}",
            cert.det_mod_p, cert.p
        )));
    }
    let rows = bounds::num_rows(&cert.shape);
    let cols = bounds::num_cols(&cert.spec);
    if rows < cols || cert.rm_rows.len() != rows - cols {
        return Err(Error::Schema(format!(
            "expected {} removed rows, got {}",
            rows.saturating_sub(cols),
            cert.rm_rows.len()
        )));
    }
    if cert.rm_rows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Schema("rm_rows must be strictly increasing".into()));
    }
    if cert.rm_rows.last().is_some_and(|&r| r >= rows) {
        return Err(Error::Schema(format!("rm_rows index out of range 0..{rows}")));
    }
    let u = subspaces::generate_modular(cert.shape, cert.spec, cert.p, cert.seed)
        .map_err(|e| Error::Schema(e.to_string()))?;
    let m = build_m_matrix(&u, ColumnMode::Omega);
    let keep: Vec<usize> = (0..rows).filter(|r| cert.rm_rows.binary_search(r).is_err()).collect();
    let square = m.modular().expect("modular subspace").select_rows(&keep);
    let det = field::determinant(&square)?;
    Ok(det != 0 && det == cert.det_mod_p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestType {
    /// Boundary `(s, R_max(s))` for every `s` (every admissible pair when exhaustive).
    All,
    /// `s = 0`, `R = R_max(0)`.
    Null,
    /// `s = R = R_max`.
    Cpd,
}

impl TestType {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestType::All => "all",
            TestType::Null => "null",
            TestType::Cpd => "cpd",
        }
    }
}

impl std::str::FromStr for TestType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(TestType::All),
            "null" => Ok(TestType::Null),
            "cpd" => Ok(TestType::Cpd),
            other => Err(Error::Precondition(format!("unknown test type {other:?}"))),
        }
    }
}

/// The shape statistic used to select sweep cases: `mn/√2`, or `m²/√6`
/// for symmetric shapes.
pub fn shape_size(shape: &ProblemShape) -> f64 {
    let (m, n) = (shape.m() as f64, shape.n() as f64);
    if shape.is_symmetric() {
        m * m / 6f64.sqrt()
    } else {
        m * n / 2f64.sqrt()
    }
}

/// Shapes with `lo <= shape_size <= hi`, `2 <= m <= n`, ordered by `(m, n)`.
pub fn sweep_shapes(lo: f64, hi: f64, symmetric: bool) -> Vec<ProblemShape> {
    let mut out = Vec::new();
    if symmetric {
        let mut m = 2;
        loop {
            let shape = ProblemShape::symmetric(m).expect("m >= 2");
            let size = shape_size(&shape);
            if size > hi {
                break;
            }
            if size >= lo {
                out.push(shape);
            }
            m += 1;
        }
    } else {
        let mut m = 2;
        while (m * m) as f64 / 2f64.sqrt() <= hi {
            let mut n = m;
            loop {
                let shape = ProblemShape::general(m, n).expect("m, n >= 2");
                let size = shape_size(&shape);
                if size > hi {
                    break;
                }
                if size >= lo {
                    out.push(shape);
                }
                n += 1;
            }
            m += 1;
        }
    }
    out
}

/// Parameter pairs certified for one shape.
pub fn sweep_specs(shape: &ProblemShape, test_type: TestType, exhaustive: bool) -> Vec<PlantSpec> {
    let spec = |s, r| PlantSpec::new(s, r).expect("s <= R by construction");
    match test_type {
        TestType::All if exhaustive => bounds::admissible_pairs(shape),
        TestType::All => (0..=bounds::r_max(shape))
            .map(|s| spec(s, bounds::r_max_given_s(shape, s)))
            .filter(|p| p.r() >= 1)
            .collect(),
        TestType::Null => vec![spec(0, bounds::r_max_given_s(shape, 0))],
        TestType::Cpd => {
            let r = bounds::r_max(shape);
            vec![spec(r, r)]
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub test_type: TestType,
    pub bound_min: f64,
    pub bound_max: f64,
    pub p: u64,
    pub symmetric: bool,
    pub base_seed: u64,
    pub max_resamples: u32,
    pub exhaustive: bool,
    /// Worker threads; 0 or 1 runs on the calling thread.
    pub jobs: usize,
}

impl SweepConfig {
    pub fn new(test_type: TestType, bound_max: f64) -> Self {
        Self {
            test_type,
            bound_min: 0.0,
            bound_max,
            p: field::DEFAULT_PRIME,
            symmetric: false,
            base_seed: 0,
            max_resamples: DEFAULT_MAX_RESAMPLES,
            exhaustive: false,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub shape: ProblemShape,
    pub spec: PlantSpec,
    /// `Err` holds the message of a case that could not be attempted at all.
    pub outcome: std::result::Result<Outcome, String>,
    pub base_seed: u64,
    pub seconds: f64,
}

impl CaseReport {
    /// Seed increments needed before the case certified.
    pub fn resamples(&self) -> Option<u64> {
        match &self.outcome {
            Ok(Outcome::Certified(c)) => Some(c.seed.wrapping_sub(self.base_seed)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub cases: Vec<CaseReport>,
}

impl SweepReport {
    pub fn certificates(&self) -> Vec<&Certificate> {
        self.cases
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok().and_then(Outcome::certificate))
            .collect()
    }

    pub fn failures(&self) -> Vec<&CaseReport> {
        self.cases
            .iter()
            .filter(|c| !matches!(c.outcome, Ok(Outcome::Certified(_))))
            .collect()
    }

    pub fn all_certified(&self) -> bool {
        self.failures().is_empty()
    }
}

pub fn sweep_cases(config: &SweepConfig) -> Vec<(ProblemShape, PlantSpec)> {
    sweep_shapes(config.bound_min, config.bound_max, config.symmetric)
        .into_iter()
        .flat_map(|shape| {
            sweep_specs(&shape, config.test_type, config.exhaustive)
                .into_iter()
                .map(move |spec| (shape, spec))
        })
        .collect()
}

/// Certifies every case of the sweep. Each case depends only on its own
/// parameters and the base seed, so the report is identical for any `jobs`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.bound_min > config.bound_max {
        return Err(Error::Precondition(format!(
            "bound_min {} > bound_max {}",
            config.bound_min, config.bound_max
        )));
    }
    field::check_prime(config.p)?;
    let cases = sweep_cases(config);
    let run = |&(shape, spec): &(ProblemShape, PlantSpec)| {
        let start = Instant::now();
        let outcome = certify_case(shape, spec, config.p, config.base_seed, config.max_resamples)
            .map_err(|e| e.to_string());
        let seconds = start.elapsed().as_secs_f64();
        if !matches!(outcome, Ok(Outcome::Certified(_))) {
            log::warn!(
                "m={} n={} s={} R={}: certification failed: {:?}",
                shape.m(),
                shape.n(),
                spec.s(),
                spec.r(),
                outcome
            );
        }
        CaseReport {
            shape,
            spec,
            outcome,
            base_seed: config.base_seed,
            seconds,
        }
    };
    let reports: Vec<CaseReport> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?;
        pool.install(|| cases.par_iter().map(run).collect())
    } else {
        cases.iter().map(run).collect()
    };
    Ok(SweepReport { cases: reports })
}
