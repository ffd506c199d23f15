//! Charts, slice metrics, frames and densitized triads.
//!
//! Frames are stored column-wise: column `i` of a [`Frame`] holds the
//! components `e_i^a` of `e(𝔢_i)` in the coordinate basis `∂_a`. All
//! determinants are taken with respect to that coordinate basis.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::expr::{Binding, Evaluator, Expr, COORDS, TIME};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
/// Tangent vector components in the coordinate basis at a point.
pub type TangentVec = Vector3<f64>;

const SINGULAR_DET: f64 = 1e-12;

/// A rectangular coordinate patch for a slice, optionally with a time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: [String; 3],
    domain: [(f64, f64); 3],
    time: Option<(f64, f64)>,
}

impl Chart {
    pub fn new(domain: [(f64, f64); 3]) -> Result<Self> {
        for (i, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Invalid(format!(
                    "empty interval ({lo}, {hi}) for coordinate {}",
                    COORDS[i]
                )));
            }
        }
        Ok(Self {
            names: COORDS.map(str::to_string),
            domain,
            time: None,
        })
    }

    pub fn with_time(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Invalid(format!("empty time interval ({lo}, {hi})")));
        }
        self.time = Some((lo, hi));
        Ok(self)
    }

    pub fn names(&self) -> &[String; 3] {
        &self.names
    }

    pub fn domain(&self) -> &[(f64, f64); 3] {
        &self.domain
    }

    pub fn time_interval(&self) -> Option<(f64, f64)> {
        self.time
    }

    /// Whether `x` lies in the open box.
    pub fn contains(&self, x: &[f64; 3]) -> bool {
        x.iter().zip(&self.domain).all(|(&v, &(lo, hi))| lo < v && v < hi)
    }

    pub fn check_point(&self, x: &[f64; 3]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!("{x:?} not in {:?}", self.domain)))
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        match self.time {
            Some((lo, hi)) if !(lo < t && t < hi) => {
                Err(Error::OutOfDomain(format!("time {t} not in ({lo}, {hi})")))
            }
            _ => Ok(()),
        }
    }

    /// Map a point of the unit cube `[0,1)^3` affinely into the box.
    pub fn from_unit(&self, u: [f64; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for i in 0..3 {
            let (lo, hi) = self.domain[i];
            x[i] = lo + (hi - lo) * u[i];
        }
        x
    }
}

/// Evaluate a 3×3 array of expressions.
pub fn eval_matrix(m: &[[Expr; 3]; 3], ev: &mut Evaluator) -> Result<Mat3> {
    let mut out = Mat3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            out[(r, c)] = ev.eval(&m[r][c])?;
        }
    }
    Ok(out)
}

/// Leading principal minors test.
pub fn is_positive_definite(q: &Mat3) -> bool {
    let m1 = q[(0, 0)];
    let m2 = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
    let m3 = q.determinant();
    m1 > 0.0 && m2 > 0.0 && m3 > 0.0
}

/// A Riemannian metric `q_ab` on the slice, symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMetric {
    q: [[Expr; 3]; 3],
}

impl SliceMetric {
    /// Build from a full matrix; fails unless `q_ab` and `q_ba` are the same expression.
    pub fn new(q: [[Expr; 3]; 3]) -> Result<Self> {
        for a in 0..3 {
            for b in (a + 1)..3 {
                if q[a][b] != q[b][a] && q[a][b].to_string() != q[b][a].to_string() {
                    return Err(Error::Invalid(format!(
                        "metric not symmetric: q[{a}][{b}] and q[{b}][{a}] differ"
                    )));
                }
            }
        }
        Ok(Self { q })
    }

    /// Build from the upper triangle `[q11, q12, q13, q22, q23, q33]`.
    pub fn from_upper(u: [Expr; 6]) -> Self {
        let [q11, q12, q13, q22, q23, q33] = u;
        Self {
            q: [
                [q11, q12.clone(), q13.clone()],
                [q12, q22, q23.clone()],
                [q13, q23, q33],
            ],
        }
    }

    pub fn diagonal(d: [Expr; 3]) -> Self {
        let z = Expr::zero;
        let [a, b, c] = d;
        Self::from_upper([a, z(), z(), b, z(), c])
    }

    /// The flat metric `δ_ab`.
    pub fn euclidean() -> Self {
        Self::diagonal([Expr::one(), Expr::one(), Expr::one()])
    }

    /// Metric with constant components.
    pub fn constant(m: &Mat3) -> Self {
        let c = |a: usize, b: usize| Expr::constant(0.5 * (m[(a, b)] + m[(b, a)]));
        Self::from_upper([c(0, 0), c(0, 1), c(0, 2), c(1, 1), c(1, 2), c(2, 2)])
    }

    pub fn component(&self, a: usize, b: usize) -> &Expr {
        &self.q[a][b]
    }

    pub fn components(&self) -> &[[Expr; 3]; 3] {
        &self.q
    }

    /// Every component multiplied by `factor`.
    pub fn scaled(&self, factor: &Expr) -> Self {
        Self {
            q: std::array::from_fn(|a| std::array::from_fn(|b| factor * &self.q[a][b])),
        }
    }

    pub fn substitute(&self, var: &str, value: &Expr) -> Self {
        Self {
            q: std::array::from_fn(|a| std::array::from_fn(|b| self.q[a][b].substitute(var, value))),
        }
    }

    /// Component matrix at a point, without a definiteness check.
    pub fn eval(&self, ev: &mut Evaluator) -> Result<Mat3> {
        eval_matrix(&self.q, ev)
    }

    /// Component matrix at a point; fails if it is not positive definite.
    pub fn at(&self, p: &Binding) -> Result<Mat3> {
        let q = self.eval(&mut Evaluator::new(p))?;
        if is_positive_definite(&q) {
            Ok(q)
        } else {
            Err(Error::NotPositiveDefinite)
        }
    }

    /// `⟨X, Y⟩` as an expression.
    pub fn inner(&self, x: &[Expr; 3], y: &[Expr; 3]) -> Expr {
        let mut terms = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                if x[a].is_zero() || y[b].is_zero() {
                    continue;
                }
                terms.push(&x[a] * &self.q[a][b] * &y[b]);
            }
        }
        terms.into_iter().sum()
    }

    /// Determinant and adjugate as expressions, so that `Q^{-1} = adj / det`.
    pub fn det_and_adjugate(&self) -> (Expr, [[Expr; 3]; 3]) {
        let q = &self.q;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            &q[r0][c0] * &q[r1][c1] - &q[r0][c1] * &q[r1][c0]
        };
        // adj[i][j] = cofactor(j, i); symmetric here
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let det = &q[0][0] * &adj[0][0] + &q[0][1] * &adj[1][0] + &q[0][2] * &adj[2][0];
        (det, adj)
    }

    /// Inverse metric `Q^{ab}` as expressions.
    pub fn inverse(&self) -> [[Expr; 3]; 3] {
        let (det, adj) = self.det_and_adjugate();
        std::array::from_fn(|a| std::array::from_fn(|b| &adj[a][b] / &det))
    }
}

/// The split `g = −f dτ² + g_τ` of a globally hyperbolic spacetime.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeSplit {
    lapse: Expr,
    spatial: SliceMetric,
    time: (f64, f64),
}

impl SpacetimeSplit {
    /// `lapse` may depend on `t` only. The lapse is checked for positivity on a grid of the interval.
    pub fn new(lapse: Expr, spatial: SliceMetric, time: (f64, f64)) -> Result<Self> {
        if let Some(v) = lapse.variables().into_iter().find(|v| v != TIME) {
            return Err(Error::Invalid(format!("lapse may depend on `t` only, found `{v}`")));
        }
        if !(time.0 < time.1) {
            return Err(Error::Invalid(format!("empty time interval {time:?}")));
        }
        for k in 0..=32 {
            let t = time.0 + (time.1 - time.0) * (k as f64) / 32.0;
            let f = lapse.eval(&Binding::new().with(TIME, t))?;
            if f <= 0.0 {
                return Err(Error::NonPositiveLapse(f));
            }
        }
        Ok(Self {
            lapse,
            spatial,
            time,
        })
    }

    pub fn lapse(&self) -> &Expr {
        &self.lapse
    }

    /// The family `g_τ`, as expressions in `t` and `x`.
    pub fn spatial(&self) -> &SliceMetric {
        &self.spatial
    }

    pub fn time_interval(&self) -> (f64, f64) {
        self.time
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.time;
        if lo < t && t < hi {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!("time {t} not in ({lo}, {hi})")))
        }
    }
}

/// The metric of the Cauchy slice `{τ0} × Σ`.
pub fn induce_slice_metric(st: &SpacetimeSplit, tau0: f64) -> Result<SliceMetric> {
    st.check_time(tau0)?;
    Ok(st.spatial.substitute(TIME, &Expr::constant(tau0)))
}

/// A frame at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame(pub Mat3);

impl Frame {
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// The vector `e(𝔢_i)`.
    pub fn vector(&self, i: usize) -> TangentVec {
        self.0.column(i).into_owned()
    }

    /// Apply the frame as a map `ℝ³ → T_xΣ`.
    pub fn apply(&self, v: &Vec3) -> TangentVec {
        self.0 * v
    }

    /// Right action by `L`: the frame `e ∘ L`.
    pub fn rotated(&self, l: &Mat3) -> Frame {
        Frame(self.0 * l)
    }

    /// `max |eᵀ Q e − I|`.
    pub fn orthonormality_residual(&self, q: &Mat3) -> f64 {
        (self.0.transpose() * q * self.0 - Mat3::identity()).abs().max()
    }
}

/// A densitized frame `E = e / det e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitizedTriad(pub Mat3);

impl DensitizedTriad {
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }
}

/// Oriented orthonormal frame by Gram–Schmidt on `∂_1, ∂_2, ∂_3` at a point.
pub fn orthonormal_frame(q: &SliceMetric, p: &Binding) -> Result<Frame> {
    orthonormal_frame_at(&q.at(p)?)
}

/// Gram–Schmidt for a metric given by its component matrix.
pub fn orthonormal_frame_at(q: &Mat3) -> Result<Frame> {
    if !is_positive_definite(q) {
        return Err(Error::NotPositiveDefinite);
    }
    let inner = |u: &Vec3, v: &Vec3| (u.transpose() * q * v)[(0, 0)];
    let mut e = Mat3::zeros();
    for i in 0..3 {
        let mut u = Vec3::zeros();
        u[i] = 1.0;
        for j in 0..i {
            let ej = e.column(j).into_owned();
            u -= ej * inner(&u, &ej);
        }
        let n2 = inner(&u, &u);
        if n2 <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        e.set_column(i, &(u / n2.sqrt()));
    }
    Ok(Frame(e))
}

/// A frame field with expression components; `e[a][i] = e_i^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    e: [[Expr; 3]; 3],
}

impl FrameField {
    pub fn new(e: [[Expr; 3]; 3]) -> Self {
        Self { e }
    }

    pub fn components(&self) -> &[[Expr; 3]; 3] {
        &self.e
    }

    pub fn component(&self, a: usize, i: usize) -> &Expr {
        &self.e[a][i]
    }

    /// `e(𝔢_i)` as a vector field.
    pub fn vector(&self, i: usize) -> [Expr; 3] {
        std::array::from_fn(|a| self.e[a][i].clone())
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Result<Frame> {
        eval_matrix(&self.e, ev).map(Frame)
    }

    pub fn at(&self, p: &Binding) -> Result<Frame> {
        self.eval(&mut Evaluator::new(p))
    }
}

/// Gram–Schmidt on `∂_1, ∂_2, ∂_3` carried out symbolically.
///
/// Agrees with [`orthonormal_frame`] pointwise; the expression form is what
/// lets covariant derivatives of the frame be taken exactly.
pub fn orthonormal_frame_field(q: &SliceMetric) -> FrameField {
    let mut cols: Vec<[Expr; 3]> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut u: [Expr; 3] = std::array::from_fn(|a| if a == i { Expr::one() } else { Expr::zero() });
        for ej in &cols {
            let c = q.inner(&u, ej);
            u = std::array::from_fn(|a| &u[a] - &c * &ej[a]);
        }
        let norm = q.inner(&u, &u).sqrt();
        cols.push(std::array::from_fn(|a| &u[a] / &norm));
    }
    FrameField::new(std::array::from_fn(|a| std::array::from_fn(|i| cols[i][a].clone())))
}

/// Determinant of the component matrix.
pub fn frame_det(e: &Frame) -> f64 {
    e.0.determinant()
}

pub fn densitize(e: &Frame) -> Result<DensitizedTriad> {
    let det = frame_det(e);
    if det.abs() <= SINGULAR_DET {
        return Err(Error::SingularFrame(det));
    }
    Ok(DensitizedTriad(e.0 / det))
}

/// Invert [`densitize`] on the oriented branch: `e = (det E)^{-1/2} E`.
pub fn reconstruct_frame(big_e: &DensitizedTriad) -> Result<Frame> {
    let det = big_e.0.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPositiveDensity(det));
    }
    Ok(Frame(big_e.0 / det.sqrt()))
}

/// The metric making `e` an isometry: `Q = (e eᵀ)^{-1}`.
pub fn metric_from_frame(e: &Frame) -> Result<Mat3> {
    let det = frame_det(e);
    if det.abs() <= SINGULAR_DET {
        return Err(Error::SingularFrame(det));
    }
    let inv = e.0.try_inverse().ok_or(Error::SingularFrame(det))?;
    let q = inv.transpose() * inv;
    Ok(0.5 * (q + q.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn origin() -> Binding {
        Binding::spacetime(0.0, [0.1, 0.2, 0.3])
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new([(0.0, 1.0), (1.0, 1.0), (0.0, 1.0)]).is_err());
        let c = Chart::new([(0.0, 1.0); 3]).unwrap();
        assert!(c.contains(&[0.5, 0.5, 0.5]));
        assert!(!c.contains(&[1.0, 0.5, 0.5]));
        assert!(c.check_point(&[1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn induce_examples() {
        let g = SliceMetric::diagonal([parse("exp(2*0.7*t)").unwrap(), parse("exp(2*0.7*t)").unwrap(), parse("exp(2*0.7*t)").unwrap()]);
        let st = SpacetimeSplit::new(Expr::one(), g, (-1.0, 1.0)).unwrap();
        let q = induce_slice_metric(&st, 0.0).unwrap();
        assert_eq!(q, SliceMetric::euclidean());
        assert!(induce_slice_metric(&st, 2.0).is_err());

        let a2 = parse("(1 + t)^2").unwrap();
        let st = SpacetimeSplit::new(Expr::one(), SliceMetric::euclidean().scaled(&a2), (-0.5, 2.0)).unwrap();
        let q = induce_slice_metric(&st, 1.0).unwrap().at(&origin()).unwrap();
        assert_eq!(q, Mat3::identity() * 4.0);
    }

    #[test]
    fn split_rejects_bad_lapse() {
        let bad = SpacetimeSplit::new(parse("x1").unwrap(), SliceMetric::euclidean(), (0.0, 1.0));
        assert!(matches!(bad, Err(Error::Invalid(_))));
        let neg = SpacetimeSplit::new(parse("t - 0.5").unwrap(), SliceMetric::euclidean(), (0.0, 1.0));
        assert!(matches!(neg, Err(Error::NonPositiveLapse(_))));
    }

    #[test]
    fn metric_symmetry_is_enforced() {
        let x = Expr::var("x1");
        let z = Expr::zero;
        let bad = SliceMetric::new([
            [Expr::one(), x.clone(), z()],
            [z(), Expr::one(), z()],
            [z(), z(), Expr::one()],
        ]);
        assert!(bad.is_err());
        let good = SliceMetric::new([
            [Expr::one(), parse("x1").unwrap(), z()],
            [parse("x1").unwrap(), Expr::one(), z()],
            [z(), z(), Expr::one()],
        ]);
        assert!(good.is_ok());
    }

    #[test]
    fn orthonormal_frame_examples() {
        let e = orthonormal_frame(&SliceMetric::euclidean(), &origin()).unwrap();
        assert_eq!(e.0, Mat3::identity());

        let q = SliceMetric::constant(&Mat3::from_diagonal(&Vec3::new(4.0, 9.0, 25.0)));
        let e = orthonormal_frame(&q, &origin()).unwrap();
        assert!((e.0 - Mat3::from_diagonal(&Vec3::new(0.5, 1.0 / 3.0, 0.2))).abs().max() < 1e-15);
        assert!((frame_det(&e) - 1.0 / 30.0).abs() < 1e-15);

        let bad = SliceMetric::constant(&Mat3::from_diagonal(&Vec3::new(1.0, -1.0, 1.0)));
        assert_eq!(orthonormal_frame(&bad, &origin()), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn densitize_examples() {
        let id = Frame(Mat3::identity());
        assert_eq!(densitize(&id).unwrap().0, Mat3::identity());
        let e = Frame(Mat3::from_diagonal(&Vec3::new(0.5, 1.0 / 3.0, 0.2)));
        let big_e = densitize(&e).unwrap();
        assert!((big_e.0 - Mat3::from_diagonal(&Vec3::new(15.0, 10.0, 6.0))).abs().max() < 1e-12);
        let back = reconstruct_frame(&big_e).unwrap();
        assert!((back.0 - e.0).abs().max() < 1e-15);
        assert!(matches!(densitize(&Frame(Mat3::zeros())), Err(Error::SingularFrame(_))));
        let flipped = DensitizedTriad(-Mat3::identity());
        assert!(matches!(reconstruct_frame(&flipped), Err(Error::NonPositiveDensity(_))));
    }

    #[test]
    fn metric_from_frame_examples() {
        assert_eq!(metric_from_frame(&Frame(Mat3::identity())).unwrap(), Mat3::identity());
        let e = Frame(Mat3::from_diagonal(&Vec3::new(0.5, 1.0 / 3.0, 0.2)));
        let q = metric_from_frame(&e).unwrap();
        assert!((q - Mat3::from_diagonal(&Vec3::new(4.0, 9.0, 25.0))).abs().max() < 1e-12);
    }

    #[test]
    fn symbolic_gram_schmidt_matches_numeric() {
        let q = SliceMetric::from_upper([
            parse("2 + sin(x1)").unwrap(),
            parse("0.3*x2").unwrap(),
            parse("0.1").unwrap(),
            parse("3 + x1*x1").unwrap(),
            parse("0.2*cos(x3)").unwrap(),
            parse("1.5 + exp(0.1*x2)").unwrap(),
        ]);
        let field = orthonormal_frame_field(&q);
        let p = Binding::slice([0.4, -0.7, 1.1]);
        let e_sym = field.at(&p).unwrap();
        let e_num = orthonormal_frame(&q, &p).unwrap();
        assert!((e_sym.0 - e_num.0).abs().max() < 1e-13);
        assert!(e_num.orthonormality_residual(&q.at(&p).unwrap()) < 1e-12);
        // upper triangular with positive diagonal
        assert!(e_num.0[(1, 0)] == 0.0 && e_num.0[(2, 0)] == 0.0 && e_num.0[(2, 1)] == 0.0);
        assert!(frame_det(&e_num) > 0.0);
    }

    #[test]
    fn symbolic_inverse() {
        let q = SliceMetric::from_upper([
            parse("2 + x1^2").unwrap(),
            parse("0.5").unwrap(),
            Expr::zero(),
            parse("3").unwrap(),
            parse("x2").unwrap(),
            parse("4").unwrap(),
        ]);
        let p = Binding::slice([0.3, 0.2, 0.0]);
        let inv = eval_matrix(&q.inverse(), &mut Evaluator::new(&p)).unwrap();
        let qm = q.at(&p).unwrap();
        assert!((inv * qm - Mat3::identity()).abs().max() < 1e-14);
    }
}
