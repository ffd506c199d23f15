//! Run configuration: a JSON document deserialized into raw types, then
//! validated into a [`RunConfig`] with field paths on every error.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ashgeo::frw::DEFAULT_TIME;
use ashgeo::{
    parse, parse_with, Beta, Chart, EndoField, Expr, FrwModel, PathSpec, SampleRng, SliceMetric, SliceModel,
    SpacetimeSplit, Suite,
};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_BETAS: [&str; 3] = ["1", "0.2374", "i"];
pub const DEFAULT_DOMAIN: [(f64, f64); 3] = [(-1.0, 1.0); 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ExprText {
    Text(String),
    Number(f64),
}

impl ExprText {
    fn to_expr(&self, path: &str, vars: Option<&[&str]>) -> Result<Expr, CliError> {
        match self {
            ExprText::Number(v) => Ok(Expr::constant(*v)),
            ExprText::Text(s) => match vars {
                Some(v) => parse_with(s, v),
                None => parse(s),
            }
            .map_err(|e| CliError::invalid(path, e)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixText {
    Full([[ExprText; 3]; 3]),
    Upper([ExprText; 6]),
}

impl MatrixText {
    fn to_exprs(&self, path: &str) -> Result<[[Expr; 3]; 3], CliError> {
        let mut out: [[Expr; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
        match self {
            MatrixText::Full(m) => {
                for a in 0..3 {
                    for b in 0..3 {
                        out[a][b] = m[a][b].to_expr(&format!("{path}[{a}][{b}]"), None)?;
                    }
                }
            }
            MatrixText::Upper(u) => {
                let mut k = 0;
                for a in 0..3 {
                    for b in a..3 {
                        let e = u[k].to_expr(&format!("{path}[{k}]"), None)?;
                        out[a][b] = e.clone();
                        out[b][a] = e;
                        k += 1;
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BetaText {
    Text(String),
    Number(f64),
    Parts { re: f64, im: f64 },
}

impl BetaText {
    fn to_beta(&self, path: &str) -> Result<Beta, CliError> {
        let value = match self {
            BetaText::Text(s) => Complex64::from_str(s.trim())
                .map_err(|_| CliError::invalid(path, format!("cannot read `{s}` as a complex number (expected e.g. \"0.5+1i\")")))?,
            BetaText::Number(v) => Complex64::new(*v, 0.0),
            BetaText::Parts { re, im } => Complex64::new(*re, *im),
        };
        Beta::new(value).map_err(|e| CliError::invalid(path, e))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Many(Vec<BetaText>),
    One(BetaText),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    #[serde(default)]
    pub lapse: Option<ExprText>,
    pub metric: MatrixText,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub metric: MatrixText,
    #[serde(default)]
    pub weingarten: Option<MatrixText>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub scale: Option<ExprText>,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    #[serde(default)]
    pub slice: Option<SliceSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default)]
    pub points: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub beta: Option<BetaSpec>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub time: Option<(f64, f64)>,
    #[serde(default)]
    pub domain: Option<[(f64, f64); 3]>,
    #[serde(default)]
    pub samples: Option<SampleSpec>,
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default)]
    pub tolerances: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub format: Option<String>,
}

/// Overrides given on the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub suites: Vec<String>,
    pub tolerances: Vec<String>,
}

#[derive(Debug)]
pub struct RunConfig {
    pub model: SliceModel,
    pub betas: Vec<Beta>,
    pub tau: f64,
    pub points: Vec<[f64; 3]>,
    pub explicit_points: bool,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub tolerances: BTreeMap<Suite, f64>,
    pub format: Format,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(what, format!("cannot read {}: {e}", path.display())))?;
    from_json(&text, what)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { what.to_string() } else { format!("{what}.{path}") };
        CliError::invalid(&path, e.into_inner())
    })
}

fn suite_by_name(name: &str, path: &str) -> Result<Suite, CliError> {
    Suite::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        CliError::invalid(path, format!("unknown suite `{name}`; known suites: {}", known.join(", ")))
    })
}

fn positive_tolerance(v: f64, path: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(path, format!("tolerance must be positive, got {v}")))
    }
}

impl RawConfig {
    pub fn validate(self, ov: &Overrides) -> Result<RunConfig, CliError> {
        let tau = self.tau.unwrap_or(0.0);
        if !tau.is_finite() {
            return Err(CliError::invalid("config.tau", "must be finite"));
        }
        let time = self.time.unwrap_or(DEFAULT_TIME);
        let model = build_model(&self.model, tau, time, self.domain)?;

        let betas = match &self.beta {
            None => DEFAULT_BETAS
                .iter()
                .map(|s| BetaText::Text(s.to_string()).to_beta("config.beta"))
                .collect::<Result<_, _>>()?,
            Some(BetaSpec::One(b)) => vec![b.to_beta("config.beta")?],
            Some(BetaSpec::Many(list)) => {
                if list.is_empty() {
                    return Err(CliError::invalid("config.beta", "list of values must not be empty"));
                }
                list.iter()
                    .enumerate()
                    .map(|(i, b)| b.to_beta(&format!("config.beta[{i}]")))
                    .collect::<Result<_, _>>()?
            }
        };

        let spec = self.samples.unwrap_or(SampleSpec {
            points: None,
            count: None,
            seed: None,
        });
        let seed = ov.seed.or(spec.seed).unwrap_or(0);
        let (points, explicit_points) = match (spec.points, spec.count) {
            (Some(_), Some(_)) => {
                return Err(CliError::invalid("config.samples", "give either `points` or `count`, not both"))
            }
            (Some(points), None) => {
                if points.is_empty() {
                    return Err(CliError::invalid("config.samples.points", "sample count must be at least 1"));
                }
                for (i, p) in points.iter().enumerate() {
                    model
                        .chart
                        .check_point(p)
                        .map_err(|e| CliError::invalid(&format!("config.samples.points[{i}]"), e))?;
                }
                (points, true)
            }
            (None, count) => {
                let count = count.unwrap_or(1);
                if count == 0 {
                    return Err(CliError::invalid("config.samples.count", "sample count must be at least 1"));
                }
                let mut rng = SampleRng::new(seed);
                let pts = (0..count).map(|_| rng.point_in(&model.chart, 0.0)).collect();
                (pts, false)
            }
        };

        let mut suites = Vec::new();
        let names: Vec<(String, String)> = if !ov.suites.is_empty() {
            ov.suites.iter().map(|n| (n.clone(), "--suite".to_string())).collect()
        } else if let Some(list) = &self.suites {
            list.iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), format!("config.suites[{i}]")))
                .collect()
        } else {
            Vec::new()
        };
        for (name, path) in names {
            let s = suite_by_name(&name, &path)?;
            if !suites.contains(&s) {
                suites.push(s);
            }
        }
        if suites.is_empty() {
            suites = Suite::ALL.to_vec();
        }

        let mut tolerances = BTreeMap::new();
        for (name, v) in self.tolerances.unwrap_or_default() {
            let path = format!("config.tolerances.{name}");
            tolerances.insert(suite_by_name(&name, &path)?, positive_tolerance(v, &path)?);
        }
        for item in &ov.tolerances {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::invalid("--tol", format!("expected SUITE=EPS, got `{item}`")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::invalid("--tol", format!("cannot read `{value}` as a number")))?;
            tolerances.insert(suite_by_name(name.trim(), "--tol")?, positive_tolerance(v, "--tol")?);
        }

        let format = match (ov.format, &self.format) {
            (Some(f), _) => f,
            (None, Some(text)) => text.parse().map_err(|e: String| CliError::invalid("config.format", e))?,
            (None, None) => Format::Json,
        };

        Ok(RunConfig {
            model,
            betas,
            tau,
            points,
            explicit_points,
            seed,
            suites,
            tolerances,
            format,
        })
    }
}

fn chart_for(domain: Option<[(f64, f64); 3]>, default: [(f64, f64); 3]) -> Result<Chart, CliError> {
    Chart::new(domain.unwrap_or(default)).map_err(|e| CliError::invalid("config.domain", e))
}

fn build_model(spec: &ModelSpec, tau: f64, time: (f64, f64), domain: Option<[(f64, f64); 3]>) -> Result<SliceModel, CliError> {
    let given = [spec.preset.is_some(), spec.split.is_some(), spec.slice.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(CliError::invalid("config.model", "exactly one of `preset`, `split`, `slice` is required"));
    }
    if spec.scale.is_some() && spec.preset.is_none() {
        return Err(CliError::invalid("config.model.scale", "only valid together with an FRW preset"));
    }
    let time_check = |t: f64| {
        if !(time.0 < time.1) {
            return Err(CliError::invalid("config.time", "interval must satisfy lo < hi"));
        }
        if t < time.0 || t > time.1 {
            return Err(CliError::invalid("config.tau", format!("{t} outside the time interval [{}, {}]", time.0, time.1)));
        }
        Ok(())
    };

    if let Some(preset) = &spec.preset {
        time_check(tau)?;
        let name = preset
            .strip_prefix("frw:")
            .ok_or_else(|| CliError::invalid("config.model.preset", format!("unknown preset `{preset}` (expected frw:flat, frw:closed or frw:open)")))?;
        let curvature = ashgeo::Curvature::from_name(name).map_err(|e| CliError::invalid("config.model.preset", e))?;
        let scale = match &spec.scale {
            Some(s) => s.to_expr("config.model.scale", None)?,
            None => Expr::one(),
        };
        let frw = FrwModel::new(curvature, scale, time).map_err(|e| CliError::invalid("config.model.scale", e))?;
        let chart = match domain {
            Some(d) => chart_for(Some(d), d)?,
            None => frw.chart().clone(),
        };
        let mut model = SliceModel::from_frw(&frw, tau).map_err(|e| CliError::invalid("config.model", e))?;
        model.chart = chart;
        return Ok(model);
    }

    let chart = chart_for(domain, DEFAULT_DOMAIN)?;
    if let Some(split) = &spec.split {
        time_check(tau)?;
        let lapse = match &split.lapse {
            Some(l) => l.to_expr("config.model.split.lapse", None)?,
            None => Expr::one(),
        };
        let metric = SliceMetric::new(split.metric.to_exprs("config.model.split.metric")?)
            .map_err(|e| CliError::invalid("config.model.split.metric", e))?;
        let st = SpacetimeSplit::new(lapse, metric, time).map_err(|e| CliError::invalid("config.model.split", e))?;
        return SliceModel::from_split("split", chart, &st, tau).map_err(|e| CliError::invalid("config.model.split", e));
    }

    let slice = spec.slice.as_ref().expect("one source present");
    let metric = SliceMetric::new(slice.metric.to_exprs("config.model.slice.metric")?)
        .map_err(|e| CliError::invalid("config.model.slice.metric", e))?;
    let w = match &slice.weingarten {
        Some(m) => EndoField::new(m.to_exprs("config.model.slice.weingarten")?),
        None => EndoField::zero(),
    };
    SliceModel::from_slice("slice", chart, metric, w).map_err(|e| CliError::invalid("config.model.slice", e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPath {
    pub components: [String; 3],
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPathFile {
    pub paths: Vec<RawPath>,
    /// Optional connection components `A_a^i` (real) replacing the model's connection.
    #[serde(default)]
    pub form: Option<[[ExprText; 3]; 3]>,
}

pub const DEFAULT_PATH_STEPS: usize = 200;

pub struct HolonomyInput {
    pub paths: Vec<PathSpec>,
    pub form: Option<[[Expr; 3]; 3]>,
}

impl RawPathFile {
    pub fn validate(self, chart: &Chart) -> Result<HolonomyInput, CliError> {
        if self.paths.is_empty() {
            return Err(CliError::invalid("path.paths", "at least one path is required"));
        }
        let mut paths = Vec::new();
        for (k, raw) in self.paths.iter().enumerate() {
            let base = format!("path.paths[{k}]");
            let comps: [&str; 3] = std::array::from_fn(|i| raw.components[i].as_str());
            let steps = raw.steps.unwrap_or(DEFAULT_PATH_STEPS);
            let mut parsed = Vec::new();
            for (i, c) in comps.iter().enumerate() {
                parsed.push(
                    parse_with(c, &[ashgeo::spin::PATH_PARAM]).map_err(|e| CliError::invalid(&format!("{base}.components[{i}]"), e))?,
                );
            }
            let parsed: [Expr; 3] = parsed.try_into().expect("three components");
            let path = PathSpec::new(parsed, steps).map_err(|e| CliError::invalid(&format!("{base}.steps"), e))?;
            path.check_within(chart).map_err(|e| CliError::invalid(&base, e))?;
            paths.push(path);
        }
        let form = match &self.form {
            None => None,
            Some(m) => {
                let mut out: [[Expr; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
                for a in 0..3 {
                    for i in 0..3 {
                        let p = format!("path.form[{a}][{i}]");
                        out[a][i] = m[a][i].to_expr(&p, Some(&ashgeo::expr::COORDS))?;
                    }
                }
                Some(out)
            }
        };
        Ok(HolonomyInput { paths, form })
    }
}
