//! Friedmann–Robertson–Walker models `g = −dτ² + a(τ)² q` with `q` of constant
//! sectional curvature `κ`, and the closed forms `W = h𝟙`,
//! `T^A(X,Y) = 2βh X•Y`, `R^A(X,Y)Z = [(βh)² − κ](X•Y)•Z`.
//!
//! Slice quantities use the induced metric `a(τ0)² q`, whose sectional curvature
//! is `κ / a(τ0)²`. That is the `κ` entering the curvature closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::ashtekar::{complexify, Beta};
use crate::error::{Error, Result};
use crate::expr::{Binding, Expr, TIME};
use crate::geometry::{induce_slice_metric, Chart, SliceMetric, SpacetimeSplit, TangentVec, Vec3};
use crate::hypersurface::{EndoField, Hypersurface};
use crate::vecprod::{CVec3, VectorProduct};

/// Time interval used by [`make_frw`].
pub const DEFAULT_TIME: (f64, f64) = (-1.0, 2.0);

/// Keeps the closed and open charts away from their coordinate singularities.
const POLAR_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Open,
    Flat,
    Closed,
}

impl Curvature {
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        match kappa {
            -1.0 => Ok(Self::Open),
            0.0 => Ok(Self::Flat),
            1.0 => Ok(Self::Closed),
            k => Err(Error::Invalid(format!("unsupported sectional curvature {k}; expected -1, 0 or 1"))),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "open" => Ok(Self::Open),
            "flat" => Ok(Self::Flat),
            "closed" => Ok(Self::Closed),
            other => Err(Error::Invalid(format!("unknown FRW preset `{other}`; expected flat, closed or open"))),
        }
    }

    pub fn kappa(self) -> f64 {
        match self {
            Self::Open => -1.0,
            Self::Flat => 0.0,
            Self::Closed => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Open => "open",
            Self::Flat => "flat",
            Self::Closed => "closed",
        }
    }

    /// The reference metric `q` of unit curvature radius.
    pub fn reference_metric(self) -> SliceMetric {
        let x1 = Expr::coord(0);
        let x2 = Expr::coord(1);
        let radial = match self {
            Self::Flat => return SliceMetric::euclidean(),
            Self::Closed => x1.sin(),
            Self::Open => 0.5 * (x1.exp() - (-x1).exp()),
        };
        let r2 = radial.powi(2);
        SliceMetric::diagonal([Expr::one(), r2.clone(), r2 * x2.sin().powi(2)])
    }

    pub fn chart(self) -> Chart {
        let polar = (POLAR_MARGIN, PI - POLAR_MARGIN);
        let domain = match self {
            Self::Flat => [(-1.0, 1.0); 3],
            Self::Closed => [polar, polar, (-PI, PI)],
            Self::Open => [(POLAR_MARGIN, 2.0), polar, (-PI, PI)],
        };
        Chart::new(domain).expect("built-in charts are valid")
    }
}

#[derive(Debug, Clone)]
pub struct FrwModel {
    curvature: Curvature,
    scale: Expr,
    reference: SliceMetric,
    chart: Chart,
    split: SpacetimeSplit,
}

impl FrwModel {
    pub fn new(curvature: Curvature, scale: Expr, time: (f64, f64)) -> Result<Self> {
        if let Some(v) = scale.variables().into_iter().find(|v| v != TIME) {
            return Err(Error::Invalid(format!("scale factor may depend on {TIME} only, found `{v}`")));
        }
        const GRID: usize = 32;
        for k in 0..=GRID {
            let t = time.0 + (time.1 - time.0) * k as f64 / GRID as f64;
            let a = scale.eval(&Binding::new().with(TIME, t))?;
            if a <= 0.0 {
                return Err(Error::NonPositiveScaleFactor(a));
            }
        }
        let reference = curvature.reference_metric();
        let spatial = reference.scaled(&scale.powi(2));
        let split = SpacetimeSplit::new(Expr::one(), spatial, time)?;
        let chart = curvature.chart().with_time(time.0, time.1)?;
        Ok(Self {
            curvature,
            scale,
            reference,
            chart,
            split,
        })
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn kappa(&self) -> f64 {
        self.curvature.kappa()
    }

    pub fn scale_factor(&self) -> &Expr {
        &self.scale
    }

    pub fn reference_metric(&self) -> &SliceMetric {
        &self.reference
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn split(&self) -> &SpacetimeSplit {
        &self.split
    }

    pub fn scale_at(&self, tau0: f64) -> Result<f64> {
        self.split.check_time(tau0)?;
        self.scale.eval(&Binding::new().with(TIME, tau0))
    }

    /// `h = ȧ/a` at `τ0`.
    pub fn hubble(&self, tau0: f64) -> Result<f64> {
        let b = Binding::new().with(TIME, tau0);
        self.split.check_time(tau0)?;
        Ok(self.scale.diff(TIME).eval(&b)? / self.scale.eval(&b)?)
    }

    /// Sectional curvature `κ / a(τ0)²` of the induced slice metric.
    pub fn kappa_eff(&self, tau0: f64) -> Result<f64> {
        Ok(self.kappa() / self.scale_at(tau0)?.powi(2))
    }

    /// The induced metric `a(τ0)² q`.
    pub fn slice_metric(&self, tau0: f64) -> Result<SliceMetric> {
        induce_slice_metric(&self.split, tau0)
    }

    /// The Weingarten field of the slice computed from the spacetime metric.
    pub fn weingarten_field(&self, tau0: f64) -> Result<EndoField> {
        self.split.check_time(tau0)?;
        let w = Hypersurface::new(&self.split).weingarten_field();
        Ok(w.substitute(TIME, &Expr::constant(tau0)))
    }

    /// The same model with `a` rescaled so that `a(τ0) = 1`.
    pub fn normalized_at(&self, tau0: f64) -> Result<Self> {
        let a0 = self.scale_at(tau0)?;
        Self::new(self.curvature, &self.scale / a0, self.split.time_interval())
    }
}

pub fn make_frw(kappa: f64, scale: Expr) -> Result<FrwModel> {
    FrwModel::new(Curvature::from_kappa(kappa)?, scale, DEFAULT_TIME)
}

pub fn hubble(model: &FrwModel, tau0: f64) -> Result<f64> {
    model.hubble(tau0)
}

/// Closed-form expectations at one point of the slice `τ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrwOracles {
    /// `W(X) = hX`.
    pub weingarten: TangentVec,
    /// `T^A(X,Y) = 2βh X•Y`.
    pub torsion: CVec3,
    /// `R^A(X,Y)Z = [(βh)² − κ_eff](X•Y)•Z`.
    pub curvature: CVec3,
}

pub fn frw_oracles(
    model: &FrwModel,
    beta: Beta,
    tau0: f64,
    x: &Vec3,
    y: &Vec3,
    z: &Vec3,
    p: &Binding,
) -> Result<FrwOracles> {
    let h = model.hubble(tau0)?;
    let kappa = model.kappa_eff(tau0)?;
    let vp = VectorProduct::for_metric(&model.slice_metric(tau0)?.at(p)?)?;
    let xy = vp.apply(x, y);
    let b = beta.value();
    let torsion = complexify(&xy).map(|v| 2.0 * b * h * v);
    let factor = (b * h) * (b * h) - Complex64::from(kappa);
    let curvature = complexify(&vp.apply(&xy, z)).map(|v| factor * v);
    Ok(FrwOracles {
        weingarten: x * h,
        torsion,
        curvature,
    })
}
