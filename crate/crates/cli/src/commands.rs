use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rankone_core::bounds::{self, PlantSpec, ProblemShape};
use rankone_core::certify::{self, Outcome, SweepConfig};
use rankone_core::proof_check::{self, Assignment};
use rankone_core::recover::{self, NumericalReport};
use rankone_core::rng::{stream, Role};
use rankone_core::tensor::{self, CPDecomposition, DecomposeOptions, DenseTensor};

use crate::rows::{self, CertificateRow, NumericalRow};
use crate::{CertifyArgs, CliError, GlobalArgs, OverboundArgs, ProofcheckArgs, RecoverArgs, TensorArgs, VerifyArgs, BoundsArgs};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn log_path(g: &GlobalArgs, csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    g.out_dir.join("log").join(format!("{stem}.log"))
}

fn shape_of(m: usize, n: Option<usize>, sym: bool) -> Result<ProblemShape, CliError> {
    Ok(ProblemShape::new(m, n.unwrap_or(m), sym)?)
}

pub fn certify(g: &GlobalArgs, a: &CertifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.bound_min > a.bound_max {
        return Err(CliError::Usage(format!(
            "--bound-min {} exceeds --bound-max {}",
            a.bound_min, a.bound_max
        )));
    }
    let mut config = SweepConfig::new(a.test_type.into(), f64::from(a.bound_max));
    config.bound_min = f64::from(a.bound_min);
    config.p = a.prime;
    config.symmetric = a.sym;
    config.base_seed = g.seed;
    config.max_resamples = a.max_resamples;
    config.exhaustive = a.exhaustive;
    config.jobs = g.jobs;
    let name = rows::output_filename(config.test_type.as_str(), a.sym, a.bound_min, a.bound_max, a.prime);
    let path = a.out.clone().unwrap_or_else(|| g.out_dir.join("certificates").join(&name));

    let report = certify::run_sweep(&config)?;
    let certs: Vec<CertificateRow> = report
        .certificates()
        .into_iter()
        .map(CertificateRow::from_certificate)
        .collect();
    rows::write_certificates(create(&path)?, a.prime, &certs)?;

    let mut log = create(&log_path(g, &path))?;
    for c in &report.cases {
        let status = match &c.outcome {
            Ok(Outcome::Certified(_)) => "certified".to_owned(),
            Ok(Outcome::Failed(f)) => format!("failed after {} attempts", f.attempts),
            Err(e) => format!("error: {e}"),
        };
        writeln!(
            log,
            "m={} n={} s={} R={} seconds={:.6} resamples={} status={status}",
            c.shape.m(),
            c.shape.n(),
            c.spec.s(),
            c.spec.r(),
            c.seconds,
            c.resamples().map_or("-".into(), |r| r.to_string()),
        )?;
    }
    log.flush()?;

    writeln!(out, "{} of {} cases certified; wrote {}", certs.len(), report.cases.len(), path.display())?;
    let failures = report.failures();
    if failures.is_empty() {
        return Ok(());
    }
    for f in &failures {
        writeln!(out, "FAILED m={} n={} s={} R={}", f.shape.m(), f.shape.n(), f.spec.s(), f.spec.r())?;
    }
    Err(CliError::Failed(format!("{} case(s) failed certification", failures.len())))
}

pub fn recover(g: &GlobalArgs, a: &RecoverArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let shape = shape_of(a.m, a.n, a.sym)?;
    let spec = PlantSpec::for_shape(a.s, a.r, &shape)?;
    if !bounds::conjecture_holds(&shape, &spec) {
        warn!("m={} n={} s={} R={} is past the boundary; expect spurious kernel elements", shape.m(), shape.n(), spec.s(), spec.r());
    }
    let res = recover::run_case(shape, spec, g.seed)?;
    let row = NumericalRow::new(&shape, &spec, g.seed, &res);
    rows::write_numerical(out, &[row])?;
    Ok(())
}

/// Every overbound case of the shapes in `[lo, hi]`, in sweep order.
pub fn overbound_cases(lo: f64, hi: f64, symmetric: bool) -> Vec<(ProblemShape, PlantSpec)> {
    certify::sweep_shapes(lo, hi, symmetric)
        .into_iter()
        .flat_map(|shape| recover::overbound_specs(&shape).into_iter().map(move |spec| (shape, spec)))
        .collect()
}

/// Rows for successful reports; failed ones are logged and skipped.
pub fn numerical_rows(reports: &[NumericalReport]) -> Vec<NumericalRow> {
    reports
        .iter()
        .filter_map(|r| match &r.result {
            Ok(res) => Some(NumericalRow::new(&r.shape, &r.spec, r.seed, res)),
            Err(e) => {
                warn!("m={} n={} s={} R={}: {e}", r.shape.m(), r.shape.n(), r.spec.s(), r.spec.r());
                None
            }
        })
        .collect()
}

pub fn overbound(g: &GlobalArgs, a: &OverboundArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.bound_min > a.bound_max {
        return Err(CliError::Usage(format!(
            "--bound-min {} exceeds --bound-max {}",
            a.bound_min, a.bound_max
        )));
    }
    let name = rows::output_filename("overbound", a.sym, a.bound_min, a.bound_max, a.prime);
    let path = a.out.clone().unwrap_or_else(|| g.out_dir.join("numerical").join(&name));
    let cases = overbound_cases(f64::from(a.bound_min), f64::from(a.bound_max), a.sym);
    let reports = recover::run_cases(&cases, g.seed, g.jobs);
    let rows_out = numerical_rows(&reports);
    rows::write_numerical(create(&path)?, &rows_out)?;

    let mut log = create(&log_path(g, &path))?;
    let mut anomalies = 0;
    for r in &reports {
        let note = match &r.result {
            Ok(res) => {
                let forced = recover::forced_kernel_dim(&r.shape, &r.spec);
                let mut notes = Vec::new();
                if res.ker_dim != forced {
                    notes.push(format!("ker_dim {} != {forced}", res.ker_dim));
                }
                if res.w.is_some_and(|w| w < 0.01) {
                    notes.push(format!("w {} < 0.01", rows::fmt_float(res.w.unwrap_or(0.0))));
                }
                if notes.is_empty() {
                    "ok".to_owned()
                } else {
                    anomalies += 1;
                    notes.join("; ")
                }
            }
            Err(e) => {
                anomalies += 1;
                format!("error: {e}")
            }
        };
        writeln!(
            log,
            "m={} n={} s={} R={} seconds={:.6} status={note}",
            r.shape.m(),
            r.shape.n(),
            r.spec.s(),
            r.spec.r(),
            r.seconds
        )?;
    }
    log.flush()?;
    if anomalies > 0 {
        warn!("{anomalies} overbound case(s) flagged; see {}", log_path(g, &path).display());
    }
    writeln!(out, "{} overbound cases; wrote {}", rows_out.len(), path.display())?;
    Ok(())
}

/// `term,weight,mode,index,value`, one line per factor entry.
pub fn write_factors<W: Write>(w: W, cp: &CPDecomposition) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["term", "weight", "mode", "index", "value"])?;
    for (i, &weight) in cp.weights.iter().enumerate() {
        for (mode, fs) in cp.factors.iter().enumerate() {
            for (k, &x) in fs[i].iter().enumerate() {
                out.write_record([
                    i.to_string(),
                    rows::fmt_float(weight),
                    mode.to_string(),
                    k.to_string(),
                    rows::fmt_float(x),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn tensor_dims(a: &TensorArgs) -> Result<Vec<usize>, CliError> {
    if a.sym {
        return match a.dims.as_slice() {
            [n] => Ok(vec![*n; 4]),
            [n, rest @ ..] if rest.len() == 3 && rest.iter().all(|d| d == n) => Ok(a.dims.clone()),
            _ => Err(CliError::Usage("--sym takes --dims n or four equal values".into())),
        };
    }
    let order = a.order.unwrap_or(a.dims.len());
    if !(3..=4).contains(&order) || a.dims.len() != order {
        return Err(CliError::Usage(format!(
            "--order {order} needs exactly {order} --dims values, got {:?}",
            a.dims
        )));
    }
    Ok(a.dims.clone())
}

pub fn tensor(g: &GlobalArgs, a: &TensorArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (t, truth): (DenseTensor, Option<CPDecomposition>) = match &a.in_file {
        Some(path) => (tensor::from_text(&fs::read_to_string(path)?)?, None),
        None => {
            let dims = tensor_dims(a)?;
            let truth = if a.sym {
                tensor::planted_symmetric(dims[0], a.rank, g.seed)
            } else {
                tensor::planted(&dims, a.rank, g.seed)
            };
            (truth.reconstruct()?, Some(truth))
        }
    };
    if let Some(path) = &a.tensor_out {
        create(path)?.write_all(tensor::to_text(&t).as_bytes())?;
    }
    let opts = DecomposeOptions {
        override_bound: a.override_bound,
    };
    let mut rng = stream(g.seed, Role::Mixing, 0);
    let cp = match (a.sym, t.order()) {
        (true, 4) => tensor::decompose_sym4(&t, a.rank, opts, &mut rng)?,
        (true, k) => return Err(CliError::Usage(format!("--sym needs an order-4 tensor, got order {k}"))),
        (false, 3) => tensor::decompose3(&t, a.rank, opts, &mut rng)?,
        (false, _) => tensor::decompose4(&t, a.rank, opts, &mut rng)?,
    };
    let dims: Vec<String> = t.dims().iter().map(|d| d.to_string()).collect();
    writeln!(
        out,
        "order {} dims {} rank {}{}",
        t.order(),
        dims.join("x"),
        a.rank,
        if a.sym { " symmetric" } else { "" }
    )?;
    let residual = cp.residual(&t)?;
    writeln!(out, "residual {}", rows::fmt_float(residual))?;
    if let Some(truth) = &truth {
        let w = tensor::factor_matching_error(truth, &cp)?;
        writeln!(out, "matching_error {}", rows::fmt_float(w))?;
    }
    let path = a
        .factors_out
        .clone()
        .unwrap_or_else(|| g.out_dir.join("numerical").join("tensor_factors.csv"));
    write_factors(create(&path)?, &cp)?;
    writeln!(out, "factors written to {}", path.display())?;
    info!("decomposition residual {residual:e}");
    Ok(())
}

pub fn bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let shape = shape_of(a.m, a.n, a.sym)?;
    writeln!(out, "m,n,sym,r_max,r_max_s0,s_star,identifiability")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        shape.m(),
        shape.n(),
        shape.is_symmetric(),
        bounds::r_max(&shape),
        bounds::r_max_given_s(&shape, 0),
        bounds::s_star(&shape),
        bounds::identifiability_bound(&shape)
    )?;
    Ok(())
}

pub fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sym = a.sym || a.file.file_name().is_some_and(|f| f.to_string_lossy().contains("_sym"));
    let (p, rows_in) = rows::read_certificates(File::open(&a.file)?)?;
    if rows_in.is_empty() {
        warn!("{} has no certificate rows", a.file.display());
    }
    let mut bad = 0;
    for (k, row) in rows_in.iter().enumerate() {
        let verdict = row
            .to_certificate(p, sym)
            .and_then(|c| certify::verify_certificate(&c));
        let status = match verdict {
            Ok(true) => "ok".to_owned(),
            Ok(false) => "FAIL determinant mismatch".to_owned(),
            Err(e) => format!("FAIL {e}"),
        };
        if status != "ok" {
            bad += 1;
        }
        writeln!(out, "row {}: m={} n={} R={} s={} {status}", k + 1, row.m, row.n, row.r, row.s)?;
    }
    writeln!(out, "{} of {} rows verified", rows_in.len() - bad, rows_in.len())?;
    if bad > 0 {
        return Err(CliError::Failed(format!("{bad} certificate(s) failed verification")));
    }
    Ok(())
}

pub fn proofcheck(g: &GlobalArgs, a: &ProofcheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let shape = ProblemShape::general(a.m, a.n)?;
    let spec = PlantSpec::new(a.s, a.r)?;
    let assignment = if a.real {
        Assignment::Real(1e-10)
    } else {
        Assignment::Modular(a.prime)
    };
    let report = proof_check::build_m_double_prime(&shape, &spec, assignment, a.trials, g.seed)?;
    writeln!(out, "{report}")?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed("structure check failed".into()))
    }
}
