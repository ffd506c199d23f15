//! The three subcommands. Each returns its rendered output and whether every
//! check it ran passed.

use ashgeo::checks::Executor;
use ashgeo::geometry::{densitize, frame_det};
use ashgeo::spin::{holonomy_pair, so3_drift, su2_drift};
use ashgeo::{AshtekarConnection, Beta, Binding, CheckContext, LieFormField, Mat3, Status};
use nalgebra::Matrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, HolonomyInput, RunConfig};
use crate::error::CliError;

pub const HOLONOMY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for C {
    fn from(z: Complex64) -> Self {
        C { re: z.re, im: z.im }
    }
}

type Rows<T> = Vec<Vec<T>>;

fn rows<R: nalgebra::Dim, K: nalgebra::Dim, S, T: nalgebra::Scalar + Copy, U>(
    m: &Matrix<T, R, K, S>,
    f: impl Fn(T) -> U,
) -> Rows<U>
where
    S: nalgebra::RawStorage<T, R, K>,
{
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(m[(r, c)])).collect()).collect()
}

fn real(m: &Mat3) -> Rows<f64> {
    rows(m, |v| v)
}

/// One evaluated sample; index conventions are listed in the README.
#[derive(Debug, Serialize)]
pub struct EvalRecord {
    pub index: usize,
    pub point: [f64; 3],
    pub beta: C,
    pub q: Rows<f64>,
    pub e: Rows<f64>,
    pub det_e: f64,
    #[serde(rename = "E")]
    pub big_e: Rows<f64>,
    #[serde(rename = "K")]
    pub k_form: Rows<f64>,
    #[serde(rename = "W")]
    pub w: Rows<f64>,
    #[serde(rename = "Gamma")]
    pub gamma: Rows<f64>,
    pub k: Rows<f64>,
    #[serde(rename = "A")]
    pub a: Rows<C>,
}

#[derive(Debug, Serialize)]
struct EvalOutput<'a> {
    model: &'a str,
    tau: f64,
    seed: u64,
    results: Vec<EvalRecord>,
}

fn eval_point(conn: &AshtekarConnection, index: usize, x: [f64; 3]) -> Result<EvalRecord, CliError> {
    let p = Binding::slice(x);
    let num = |e: ashgeo::Error| CliError::numeric(format!("sample {index} at {x:?}: {e}"));
    let q = conn.metric().at(&p).map_err(num)?;
    let frame = conn.frame().at(&p).map_err(num)?;
    let big_e = densitize(&frame).map_err(num)?;
    let w = conn.weingarten().at(&p).map_err(num)?;
    let k_form = (q * w).transpose();
    let pc = conn.physics_components(conn.frame(), &p).map_err(num)?;
    Ok(EvalRecord {
        index,
        point: x,
        beta: conn.beta().value().into(),
        q: real(&q),
        // row i is the frame vector e_i
        e: real(&frame.0.transpose()),
        det_e: frame_det(&frame),
        big_e: real(&big_e.0.transpose()),
        k_form: real(&k_form),
        w: real(&w),
        gamma: real(&pc.gamma),
        k: real(&pc.k),
        a: rows(&pc.a, C::from),
    })
}

pub fn eval(cfg: &RunConfig) -> Result<String, CliError> {
    let conns: Vec<AshtekarConnection> = cfg
        .betas
        .iter()
        .map(|&b| AshtekarConnection::new(b, &cfg.model.metric, &cfg.model.weingarten))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.points.len()).flat_map(|i| (0..conns.len()).map(move |b| (i, b))).collect();
    let results = jobs
        .par_iter()
        .map(|&(i, b)| eval_point(&conns[b], i, cfg.points[i]))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    match cfg.format {
        Format::Json => Ok(serde_json::to_string_pretty(&EvalOutput {
            model: &cfg.model.label,
            tau: cfg.tau,
            seed: cfg.seed,
            results,
        })? + "\n"),
        Format::Csv => eval_csv(&results),
    }
}

#[derive(Serialize)]
struct EvalCsvRow<'a> {
    index: usize,
    x1: f64,
    x2: f64,
    x3: f64,
    beta_re: f64,
    beta_im: f64,
    quantity: &'a str,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

fn eval_csv(results: &[EvalRecord]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        let mut emit = |quantity: &str, row: usize, col: usize, re: f64, im: f64| {
            w.serialize(EvalCsvRow {
                index: r.index,
                x1: r.point[0],
                x2: r.point[1],
                x3: r.point[2],
                beta_re: r.beta.re,
                beta_im: r.beta.im,
                quantity,
                row,
                col,
                re,
                im,
            })
        };
        for (name, m) in [
            ("q", &r.q),
            ("e", &r.e),
            ("E", &r.big_e),
            ("K", &r.k_form),
            ("W", &r.w),
            ("Gamma", &r.gamma),
            ("k", &r.k),
        ] {
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    emit(name, i, j, *v, 0.0)?;
                }
            }
        }
        emit("det_e", 0, 0, r.det_e, 0.0)?;
        for (i, row) in r.a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                emit("A", i, j, v.re, v.im)?;
            }
        }
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Runs samples on the current rayon pool; results are reduced in index order.
pub struct Parallel;

impl Executor for Parallel {
    fn max_over(&self, n: usize, f: &(dyn Fn(usize) -> ashgeo::Result<f64> + Sync)) -> ashgeo::Result<f64> {
        let values: Vec<ashgeo::Result<f64>> = (0..n).into_par_iter().map(f).collect();
        let mut worst: f64 = 0.0;
        for v in values {
            worst = worst.max(v?);
        }
        Ok(worst)
    }
}

#[derive(Debug, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub status: &'static str,
    pub max_error: Option<f64>,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: Option<String>,
}

#[derive(Debug, Serialize)]
struct CheckOutput<'a> {
    model: &'a str,
    tau: f64,
    seed: u64,
    betas: Vec<C>,
    passed: bool,
    suites: Vec<SuiteRow>,
}

pub fn check(cfg: &RunConfig) -> Result<(String, bool), CliError> {
    let mut ctx = CheckContext::new(cfg.model.clone(), cfg.betas.clone(), cfg.seed).map_err(|e| CliError::invalid("config", e))?;
    if cfg.explicit_points {
        ctx = ctx.with_points(cfg.points.clone()).map_err(|e| CliError::invalid("config.samples.points", e))?;
    }
    let reports: Vec<_> = cfg
        .suites
        .iter()
        .map(|&s| ctx.run(s, cfg.tolerances.get(&s).copied(), &Parallel))
        .collect();
    let passed = reports.iter().all(|r| matches!(r.status, Status::Passed | Status::Skipped));
    let suites: Vec<SuiteRow> = reports
        .into_iter()
        .map(|r| SuiteRow {
            status: r.status.as_str(),
            max_error: r.max_error.is_finite().then_some(r.max_error),
            tolerance: r.tolerance,
            samples: r.samples,
            detail: r.detail,
            name: r.name,
        })
        .collect();
    let text = match cfg.format {
        Format::Json => {
            serde_json::to_string_pretty(&CheckOutput {
                model: &cfg.model.label,
                tau: cfg.tau,
                seed: cfg.seed,
                betas: cfg.betas.iter().map(|b| b.value().into()).collect(),
                passed,
                suites,
            })? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &suites {
                w.serialize(row)?;
            }
            finish_csv(w)?
        }
    };
    Ok((text, passed))
}

#[derive(Debug, Serialize)]
pub struct HolonomyRecord {
    pub path: usize,
    pub beta: Option<C>,
    pub so3: Rows<C>,
    pub su2: Rows<C>,
    pub residual: f64,
    /// Group-membership drift; `None` when the connection is complex.
    pub so3_drift: Option<f64>,
    pub su2_drift: Option<f64>,
}

#[derive(Debug, Serialize)]
struct HolonomyOutput<'a> {
    model: &'a str,
    tau: f64,
    tolerance: f64,
    passed: bool,
    results: Vec<HolonomyRecord>,
}

pub fn holonomy(cfg: &RunConfig, input: &HolonomyInput, tolerance: Option<f64>) -> Result<(String, bool), CliError> {
    let tolerance = tolerance.unwrap_or(HOLONOMY_TOLERANCE);
    let forms: Vec<(Option<Beta>, LieFormField)> = match &input.form {
        Some(re) => {
            let mut f = LieFormField::zero();
            f.re = re.clone();
            vec![(None, f)]
        }
        None => cfg
            .betas
            .iter()
            .map(|&b| {
                let conn = AshtekarConnection::new(b, &cfg.model.metric, &cfg.model.weingarten);
                (Some(b), conn.connection_field(conn.frame()))
            })
            .collect(),
    };
    let jobs: Vec<(usize, usize)> =
        (0..input.paths.len()).flat_map(|k| (0..forms.len()).map(move |f| (k, f))).collect();
    let results = jobs
        .par_iter()
        .map(|&(k, f)| {
            let (beta, form) = &forms[f];
            let pair = holonomy_pair(form, &input.paths[k]).map_err(|e| CliError::numeric(format!("path {k}: {e}")))?;
            let real = form.is_real();
            Ok(HolonomyRecord {
                path: k,
                beta: beta.map(|b| b.value().into()),
                so3: rows(&pair.so3, C::from),
                su2: rows(&pair.su2, C::from),
                residual: pair.residual,
                so3_drift: real.then(|| so3_drift(&pair.so3)),
                su2_drift: real.then(|| su2_drift(&pair.su2)),
            })
        })
        .collect::<Vec<Result<_, CliError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let passed = results.iter().all(|r| r.residual < tolerance);
    let text = match cfg.format {
        Format::Json => {
            serde_json::to_string_pretty(&HolonomyOutput {
                model: &cfg.model.label,
                tau: cfg.tau,
                tolerance,
                passed,
                results,
            })? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["path", "beta_re", "beta_im", "group", "row", "col", "re", "im", "residual"])?;
            for r in &results {
                let (bre, bim) = r.beta.map_or((String::new(), String::new()), |b| (b.re.to_string(), b.im.to_string()));
                for (group, m) in [("SO3", &r.so3), ("SU2", &r.su2)] {
                    for (i, row) in m.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            w.write_record([
                                r.path.to_string(),
                                bre.clone(),
                                bim.clone(),
                                group.to_string(),
                                i.to_string(),
                                j.to_string(),
                                v.re.to_string(),
                                v.im.to_string(),
                                r.residual.to_string(),
                            ])?;
                        }
                    }
                }
            }
            finish_csv(w)?
        }
    };
    Ok((text, passed))
}
