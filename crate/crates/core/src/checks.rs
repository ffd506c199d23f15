//! Identity suites run against a slice model: each suite draws its own
//! samples, measures the worst deviation of an identity from zero and compares
//! it with a tolerance.
//!
//! Sample `i` of a suite uses its own generator, seeded from the run seed, the
//! suite name and `i`. Samples are therefore independent and can be evaluated
//! in any order (or in parallel) with identical results.

use std::sync::Arc;

use num_complex::Complex64;

use crate::ashtekar::{
    bilinear, complexify, densitize_field, derive_inner, so3_components, AshtekarConnection, Beta, CMat3,
    TriadGeometry,
};
use crate::error::{Error, Result};
use crate::expr::{Binding, Expr, TIME};
use crate::frw::FrwModel;
use crate::geometry::{
    densitize, induce_slice_metric, reconstruct_frame, Chart, Frame, SliceMetric, SpacetimeSplit, Vec3,
};
use crate::hypersurface::{EndoField, Hypersurface};
use crate::levi_civita::{LeviCivita, VecField};
use crate::sampling::SampleRng;
use crate::spin::{covering_map, holonomy_pair, lambda_star, so3_exp, su2_exp, su2_from_components, PathSpec};
use crate::vecprod::{ivp_field, ivp_hodge_at, ivp_with_frame, VectorProduct};

/// Fraction of each chart side kept clear of the boundary when sampling points.
pub const POINT_MARGIN: f64 = 0.05;
/// Integration steps for holonomy paths.
pub const PATH_STEPS: usize = 200;

/// A slice with its metric and Weingarten field, both as expressions in `x1..x3`.
#[derive(Debug, Clone)]
pub struct SliceModel {
    pub label: String,
    pub chart: Chart,
    pub tau0: f64,
    pub metric: SliceMetric,
    pub weingarten: EndoField,
    pub frw: Option<FrwModel>,
}

impl SliceModel {
    pub fn from_slice(label: impl Into<String>, chart: Chart, metric: SliceMetric, weingarten: EndoField) -> Result<Self> {
        for (what, exprs) in [("metric", metric.components()), ("weingarten", weingarten.components())] {
            if exprs.iter().flatten().any(|e| e.depends_on(TIME)) {
                return Err(Error::Invalid(format!("slice {what} must not depend on {TIME}")));
            }
        }
        Ok(Self {
            label: label.into(),
            chart,
            tau0: 0.0,
            metric,
            weingarten,
            frw: None,
        })
    }

    /// The slice `τ = τ0` of a split spacetime, with `W` computed from the spacetime metric.
    pub fn from_split(label: impl Into<String>, chart: Chart, split: &SpacetimeSplit, tau0: f64) -> Result<Self> {
        split.check_time(tau0)?;
        let metric = induce_slice_metric(split, tau0)?;
        let weingarten = Hypersurface::new(split)
            .weingarten_field()
            .substitute(TIME, &Expr::constant(tau0));
        Ok(Self {
            label: label.into(),
            chart,
            tau0,
            metric,
            weingarten,
            frw: None,
        })
    }

    pub fn from_frw(model: &FrwModel, tau0: f64) -> Result<Self> {
        let label = format!("frw:{}", model.curvature().name());
        let mut out = Self::from_split(label, model.chart().clone(), model.split(), tau0)?;
        out.frw = Some(model.clone());
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Antisymmetry,
    Cyclicity,
    TripleProduct,
    Jacobi,
    FrameIndependence,
    Hodge,
    LeibnizLc,
    TorsionFree,
    MetricCompatibility,
    MetricityA,
    LeibnizA,
    TorsionDual,
    CurvatureDual,
    CurvatureSymmetries,
    FrwWeingarten,
    FrwTorsion,
    FrwCurvature,
    FrwKoszul,
    ConstantCurvature,
    Decomposition,
    TriadRoundtrip,
    WeingartenRoundtrip,
    Reconstruction,
    SpinCover,
    HolonomyCover,
}

impl Suite {
    pub const ALL: [Suite; 25] = [
        Suite::Antisymmetry,
        Suite::Cyclicity,
        Suite::TripleProduct,
        Suite::Jacobi,
        Suite::FrameIndependence,
        Suite::Hodge,
        Suite::LeibnizLc,
        Suite::TorsionFree,
        Suite::MetricCompatibility,
        Suite::MetricityA,
        Suite::LeibnizA,
        Suite::TorsionDual,
        Suite::CurvatureDual,
        Suite::CurvatureSymmetries,
        Suite::FrwWeingarten,
        Suite::FrwTorsion,
        Suite::FrwCurvature,
        Suite::FrwKoszul,
        Suite::ConstantCurvature,
        Suite::Decomposition,
        Suite::TriadRoundtrip,
        Suite::WeingartenRoundtrip,
        Suite::Reconstruction,
        Suite::SpinCover,
        Suite::HolonomyCover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Antisymmetry => "antisymmetry",
            Suite::Cyclicity => "cyclicity",
            Suite::TripleProduct => "triple_product",
            Suite::Jacobi => "jacobi",
            Suite::FrameIndependence => "frame_independence",
            Suite::Hodge => "hodge",
            Suite::LeibnizLc => "leibniz_lc",
            Suite::TorsionFree => "torsion_free",
            Suite::MetricCompatibility => "metric_compatibility",
            Suite::MetricityA => "metricity_a",
            Suite::LeibnizA => "leibniz_a",
            Suite::TorsionDual => "torsion_dual",
            Suite::CurvatureDual => "curvature_dual",
            Suite::CurvatureSymmetries => "curvature_symmetries",
            Suite::FrwWeingarten => "frw_weingarten",
            Suite::FrwTorsion => "frw_torsion",
            Suite::FrwCurvature => "frw_curvature",
            Suite::FrwKoszul => "frw_koszul",
            Suite::ConstantCurvature => "constant_curvature",
            Suite::Decomposition => "decomposition",
            Suite::TriadRoundtrip => "triad_roundtrip",
            Suite::WeingartenRoundtrip => "weingarten_roundtrip",
            Suite::Reconstruction => "reconstruction",
            Suite::SpinCover => "spin_cover",
            Suite::HolonomyCover => "holonomy_cover",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::FrameIndependence | Suite::Hodge | Suite::TorsionFree => 1e-10,
            Suite::TriadRoundtrip => 1e-12,
            Suite::LeibnizLc
            | Suite::LeibnizA
            | Suite::TorsionDual
            | Suite::CurvatureDual
            | Suite::CurvatureSymmetries
            | Suite::FrwCurvature
            | Suite::ConstantCurvature
            | Suite::Reconstruction
            | Suite::SpinCover => 1e-8,
            Suite::HolonomyCover => 1e-6,
            _ => 1e-9,
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::Antisymmetry | Suite::Cyclicity | Suite::TripleProduct | Suite::Jacobi | Suite::Hodge => 200,
            Suite::FrameIndependence | Suite::LeibnizLc | Suite::SpinCover => 50,
            Suite::Reconstruction => 30,
            Suite::HolonomyCover => 10,
            _ => 100,
        }
    }

    pub fn requires_frw(self) -> bool {
        matches!(
            self,
            Suite::FrwWeingarten | Suite::FrwTorsion | Suite::FrwCurvature | Suite::FrwKoszul | Suite::ConstantCurvature
        )
    }
}

/// Maps a per-sample error function over `0..n` and returns the largest value.
pub trait Executor: Sync {
    fn max_over(&self, n: usize, f: &(dyn Fn(usize) -> Result<f64> + Sync)) -> Result<f64>;
}

pub struct Sequential;

impl Executor for Sequential {
    fn max_over(&self, n: usize, f: &(dyn Fn(usize) -> Result<f64> + Sync)) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(f(i)?);
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
    Skipped,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Passed => "pass",
            Status::Failed => "fail",
            Status::Skipped => "skipped",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub status: Status,
    pub detail: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Passed
    }
}

/// Everything a suite run needs, with the expensive symbolic pieces built once.
pub struct CheckContext {
    model: SliceModel,
    betas: Vec<Beta>,
    seed: u64,
    points: Option<Vec<[f64; 3]>>,
    lc: Arc<LeviCivita>,
    connections: Vec<AshtekarConnection>,
    triad: std::sync::OnceLock<Result<TriadGeometry>>,
}

impl CheckContext {
    pub fn new(model: SliceModel, betas: Vec<Beta>, seed: u64) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::Invalid("at least one value of beta is required".into()));
        }
        let lc = Arc::new(LeviCivita::new(&model.metric));
        let connections = betas
            .iter()
            .map(|&b| AshtekarConnection::with_levi_civita(b, Arc::clone(&lc), &model.weingarten))
            .collect();
        Ok(Self {
            model,
            betas,
            seed,
            points: None,
            lc,
            connections,
            triad: std::sync::OnceLock::new(),
        })
    }

    /// Evaluate at these points (cycled) instead of drawing random ones.
    pub fn with_points(mut self, points: Vec<[f64; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("explicit point list is empty".into()));
        }
        for p in &points {
            self.model.chart.check_point(p)?;
        }
        self.points = Some(points);
        Ok(self)
    }

    pub fn model(&self) -> &SliceModel {
        &self.model
    }

    pub fn betas(&self) -> &[Beta] {
        &self.betas
    }

    fn rng(&self, suite: Suite, i: usize) -> SampleRng {
        SampleRng::new(sample_seed(self.seed, suite.name(), i as u64))
    }

    fn point(&self, rng: &mut SampleRng, i: usize) -> Binding {
        match &self.points {
            Some(pts) => Binding::slice(pts[i % pts.len()]),
            None => Binding::slice(rng.point_in(&self.model.chart, POINT_MARGIN)),
        }
    }

    fn triad_geometry(&self) -> Result<&TriadGeometry> {
        self.triad
            .get_or_init(|| TriadGeometry::new(&densitize_field(self.connections[0].frame())))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn run(&self, suite: Suite, tolerance: Option<f64>, exec: &dyn Executor) -> SuiteReport {
        self.run_with(suite, tolerance, None, exec)
    }

    /// Like [`Self::run`] with an explicit sample count.
    pub fn run_with(&self, suite: Suite, tolerance: Option<f64>, samples: Option<usize>, exec: &dyn Executor) -> SuiteReport {
        let tolerance = tolerance.unwrap_or_else(|| suite.default_tolerance());
        let samples = samples.unwrap_or_else(|| suite.default_samples());
        let mut report = SuiteReport {
            name: suite.name().to_string(),
            max_error: 0.0,
            tolerance,
            samples,
            status: Status::Skipped,
            detail: None,
        };
        if suite.requires_frw() && self.model.frw.is_none() {
            report.samples = 0;
            report.detail = Some("requires an FRW model".into());
            return report;
        }
        match exec.max_over(samples, &|i| self.sample_error(suite, i)) {
            Ok(err) => {
                report.max_error = err;
                report.status = if err < tolerance { Status::Passed } else { Status::Failed };
            }
            Err(e) => {
                report.max_error = f64::NAN;
                report.status = Status::Error;
                report.detail = Some(e.to_string());
            }
        }
        report
    }

    pub fn run_all(&self, suites: &[Suite], exec: &dyn Executor) -> Vec<SuiteReport> {
        suites.iter().map(|&s| self.run(s, None, exec)).collect()
    }

    /// The error measured by sample `i` of `suite`.
    pub fn sample_error(&self, suite: Suite, i: usize) -> Result<f64> {
        let mut rng = self.rng(suite, i);
        let p = self.point(&mut rng, i);
        let err = match suite {
            Suite::Antisymmetry | Suite::Cyclicity | Suite::TripleProduct | Suite::Jacobi | Suite::Hodge => {
                let q = self.model.metric.at(&p)?;
                let vp = VectorProduct::for_metric(&q)?;
                let (x, y, z) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
                let inner = |u: &Vec3, v: &Vec3| (u.transpose() * q * v)[(0, 0)];
                match suite {
                    Suite::Antisymmetry => (vp.apply(&x, &y) + vp.apply(&y, &x)).norm(),
                    Suite::Cyclicity => (inner(&vp.apply(&x, &y), &z) - inner(&x, &vp.apply(&y, &z))).abs(),
                    Suite::TripleProduct => {
                        (vp.apply(&x, &vp.apply(&y, &z)) - (inner(&x, &z) * y - inner(&x, &y) * z)).norm()
                    }
                    Suite::Jacobi => {
                        (vp.apply(&x, &vp.apply(&y, &z)) + vp.apply(&y, &vp.apply(&z, &x)) + vp.apply(&z, &vp.apply(&x, &y)))
                            .norm()
                    }
                    _ => (vp.apply(&x, &y) - ivp_hodge_at(&q, &x, &y)?).norm(),
                }
            }
            Suite::FrameIndependence => {
                let e = self.connections[0].frame().at(&p)?;
                let rotated = e.rotated(&rng.rotation());
                let (x, y) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
                (ivp_with_frame(&e, &x, &y)? - ivp_with_frame(&rotated, &x, &y)?).norm()
            }
            Suite::LeibnizLc => {
                let frame = self.connections[0].frame();
                let (y, z) = (rng.vector_field(1), rng.vector_field(1));
                let x = rng.vec3(-1.0, 1.0);
                let vp = VectorProduct::for_metric(&self.model.metric.at(&p)?)?;
                let lhs = self.lc.cov_deriv(&x, &ivp_field(&self.model.metric, frame, &y, &z), &p)?;
                let rhs = vp.apply(&self.lc.cov_deriv(&x, &y, &p)?, &z.at(&p)?)
                    + vp.apply(&y.at(&p)?, &self.lc.cov_deriv(&x, &z, &p)?);
                (lhs - rhs).norm()
            }
            Suite::TorsionFree => {
                let (x, y) = (rng.vector_field(1), rng.vector_field(1));
                let t = self.lc.cov_deriv(&x.at(&p)?, &y, &p)? - self.lc.cov_deriv(&y.at(&p)?, &x, &p)?
                    - x.bracket(&y).at(&p)?;
                t.norm()
            }
            Suite::MetricCompatibility => {
                let (y, z) = (rng.vector_field(1), rng.vector_field(1));
                let x = rng.vec3(-1.0, 1.0);
                let q = self.model.metric.at(&p)?;
                let lhs = derive_inner(&self.model.metric, &x, &y, &z, &p)?;
                let rhs = (self.lc.cov_deriv(&x, &y, &p)?.transpose() * q * z.at(&p)?)[(0, 0)]
                    + (y.at(&p)?.transpose() * q * self.lc.cov_deriv(&x, &z, &p)?)[(0, 0)];
                (lhs - rhs).abs()
            }
            Suite::MetricityA | Suite::LeibnizA => {
                let (y, z) = (rng.vector_field(1), rng.vector_field(1));
                let x = rng.vec3(-1.0, 1.0);
                let q = self.model.metric.at(&p)?;
                let (yp, zp) = (complexify(&y.at(&p)?), complexify(&z.at(&p)?));
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    let (dy, dz) = (conn.deriv(&x, &y, &p)?, conn.deriv(&x, &z, &p)?);
                    let err = if suite == Suite::MetricityA {
                        let lhs = derive_inner(&self.model.metric, &x, &y, &z, &p)?;
                        (bilinear(&q, &dy, &zp) + bilinear(&q, &yp, &dz) - lhs).norm()
                    } else {
                        let vp = VectorProduct::for_metric(&q)?;
                        let lhs = conn.deriv(&x, &ivp_field(&self.model.metric, conn.frame(), &y, &z), &p)?;
                        (lhs - vp.apply_complex(&dy, &zp) - vp.apply_complex(&yp, &dz)).norm()
                    };
                    worst = worst.max(err);
                }
                worst
            }
            Suite::TorsionDual => {
                let (x, y) = (rng.vector_field(1), rng.vector_field(1));
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    worst = worst.max(conn.torsion(&x, &y, &p)?.discrepancy());
                }
                worst
            }
            Suite::CurvatureDual => {
                let (x, y, z) = (rng.vector_field(1), rng.vector_field(1), rng.vector_field(1));
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    worst = worst.max(conn.curvature(&x, &y, &z, &p)?.discrepancy());
                }
                worst
            }
            Suite::CurvatureSymmetries => {
                let [x, y, z, v] = [0, 1, 2, 3].map(|_| VecField::constant(&rng.vec3(-1.0, 1.0)));
                let q = self.model.metric.at(&p)?;
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    let rxy_z = conn.curvature(&x, &y, &z, &p)?.definitional;
                    let ryx_z = conn.curvature(&y, &x, &z, &p)?.definitional;
                    let rxy_v = conn.curvature(&x, &y, &v, &p)?.definitional;
                    let skew = (rxy_z + ryx_z).norm();
                    let metric = (bilinear(&q, &rxy_z, &complexify(&v.at(&p)?))
                        + bilinear(&q, &complexify(&z.at(&p)?), &rxy_v))
                    .norm();
                    worst = worst.max(skew).max(metric);
                }
                worst
            }
            Suite::FrwWeingarten | Suite::FrwTorsion | Suite::FrwCurvature => {
                let frw = self.model.frw.as_ref().expect("checked by run");
                let tau0 = self.model.tau0;
                let (x, y, z) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    let o = crate::frw::frw_oracles(frw, conn.beta(), tau0, &x, &y, &z, &p)?;
                    let err = match suite {
                        Suite::FrwWeingarten => (self.model.weingarten.at(&p)? * x - o.weingarten).norm(),
                        Suite::FrwTorsion => {
                            let (fx, fy) = (VecField::constant(&x), VecField::constant(&y));
                            (conn.torsion(&fx, &fy, &p)?.definitional - o.torsion).norm()
                        }
                        _ => {
                            let [fx, fy, fz] = [x, y, z].map(|v| VecField::constant(&v));
                            (conn.curvature(&fx, &fy, &fz, &p)?.definitional - o.curvature).norm()
                        }
                    };
                    worst = worst.max(err);
                }
                worst
            }
            Suite::FrwKoszul => {
                let frw = self.model.frw.as_ref().expect("checked by run");
                let coords = p.coords().expect("slice point");
                let st = Binding::spacetime(self.model.tau0, coords);
                let q = self.model.metric.at(&p)?;
                let qw = q * self.model.weingarten.at(&p)?;
                let mut worst: f64 = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        let rhs = frw.split().spatial().component(a, b).diff(TIME).eval(&st)?;
                        worst = worst.max((2.0 * qw[(b, a)] - rhs).abs());
                    }
                }
                worst
            }
            Suite::ConstantCurvature => {
                let frw = self.model.frw.as_ref().expect("checked by run");
                let kappa = frw.kappa_eff(self.model.tau0)?;
                let q = self.model.metric.at(&p)?;
                let vp = VectorProduct::for_metric(&q)?;
                let (x, y, z) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
                let inner = |u: &Vec3, v: &Vec3| (u.transpose() * q * v)[(0, 0)];
                let r = self.lc.riemann(&x, &y, &z, &p)?;
                let classic = kappa * (inner(&z, &y) * x - inner(&z, &x) * y);
                let product = kappa * vp.apply(&z, &vp.apply(&x, &y));
                (r - classic).norm().max((r - product).norm())
            }
            Suite::Decomposition => {
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    let frame = conn.frame();
                    let form = conn.local_form(frame, &p)?;
                    let pc = conn.physics_components(frame, &p)?;
                    let comps = form.components();
                    for a in 0..3 {
                        for i in 0..3 {
                            worst = worst.max((comps[a][i] - pc.a[(a, i)]).norm());
                        }
                    }
                    worst = worst.max(form.antisymmetry_residual());
                }
                worst
            }
            Suite::TriadRoundtrip => {
                let e = self.connections[0].frame().at(&p)?;
                let random = Frame(rng.oriented_matrix());
                let mut worst: f64 = 0.0;
                for f in [e, random] {
                    let back = reconstruct_frame(&densitize(&f)?)?;
                    worst = worst.max((back.0 - f.0).abs().max());
                }
                worst
            }
            Suite::WeingartenRoundtrip => {
                let q = self.model.metric.at(&p)?;
                let w = self.model.weingarten.at(&p)?;
                let vp = VectorProduct::for_metric(&q)?;
                let mut worst: f64 = 0.0;
                for &beta in &self.betas {
                    let got = crate::ashtekar::reconstruct_w(beta, &q, |x, y| {
                        Ok(complexify(&vp.apply(&(w * x), y)).map(|v| beta.value() * v))
                    })?;
                    worst = worst.max(max_abs(&(got - w.map(Complex64::from))));
                }
                worst
            }
            Suite::Reconstruction => {
                let geometry = self.triad_geometry()?;
                let q = self.model.metric.at(&p)?;
                let k = (q * self.model.weingarten.at(&p)?).transpose().map(Complex64::from);
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    let rec = geometry.reconstruct(conn.beta(), |x, y, b| conn.deriv(x, y, b), &p)?;
                    worst = worst
                        .max((rec.metric - q).abs().max())
                        .max(max_abs(&(rec.second_fundamental_form - k)));
                }
                worst
            }
            Suite::SpinCover => {
                let comps = [0, 1, 2].map(|_| Complex64::from(rng.range(-3.0, 3.0)));
                let xi = su2_from_components(&comps);
                let t = Complex64::from(rng.uniform());
                let u = su2_exp(&(xi * t))?;
                let lhs = covering_map(&u)?;
                if covering_map(&-u)? != lhs {
                    return Ok(f64::INFINITY);
                }
                let rhs = so3_exp(&(lambda_star(&xi)? * t))?;
                max_abs(&(lhs.map(Complex64::from) - rhs))
            }
            Suite::HolonomyCover => {
                let path = self.random_path(&mut rng)?;
                let mut worst: f64 = 0.0;
                for conn in &self.connections {
                    let form = conn.connection_field(conn.frame());
                    worst = worst.max(holonomy_pair(&form, &path)?.residual);
                }
                worst
            }
        };
        Ok(err)
    }

    /// A smooth path inside the chart: a chord with a sinusoidal bulge.
    fn random_path(&self, rng: &mut SampleRng) -> Result<PathSpec> {
        let chart = &self.model.chart;
        let inner_margin = 0.2;
        let from = rng.point_in(chart, inner_margin);
        let to = rng.point_in(chart, inner_margin);
        let t = Expr::var(crate::spin::PATH_PARAM);
        let bulge = (std::f64::consts::PI * &t).sin();
        let comps = std::array::from_fn(|k| {
            let (lo, hi) = chart.domain()[k];
            let amp = rng.range(-0.1, 0.1) * (hi - lo);
            from[k] + (to[k] - from[k]) * &t + amp * &bulge
        });
        let path = PathSpec::new(comps, PATH_STEPS)?;
        path.check_within(chart)?;
        Ok(path)
    }
}

fn max_abs(m: &CMat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Seed of sample `i` of the named suite: FNV-1a of the name, mixed with the
/// run seed and the index.
pub fn sample_seed(seed: u64, suite: &str, i: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in suite.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    seed ^ h ^ i.wrapping_mul(0x9e3779b97f4a7c15)
}

/// The `[a][i]` so(3) components of a local form, for reporting.
pub fn form_components(m: &[CMat3; 3]) -> [[Complex64; 3]; 3] {
    std::array::from_fn(|a| so3_components(&m[a]))
}
