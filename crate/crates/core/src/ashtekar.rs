//! The Ashtekar connection `∇^A_X Y = ∇_X Y + β W(X)•Y` on the slice tangent
//! bundle, its torsion and curvature, and its local connection 1-forms.
//!
//! Metric and frames stay real. When `β` has an imaginary part only the
//! outputs (vectors, forms) are complex.

use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Binding, Evaluator, Expr};
use crate::geometry::{
    orthonormal_frame_at, orthonormal_frame_field, DensitizedTriad, Frame, FrameField, Mat3, SliceMetric,
    TangentVec, Vec3,
};
use crate::hypersurface::EndoField;
use crate::levi_civita::{directional_derivative, LeviCivita, VecField};
use crate::vecprod::{ivp_field, levi_civita_symbol, CVec3, VectorProduct};

pub type CMat3 = Matrix3<Complex64>;

const ORTHONORMAL_TOL: f64 = 1e-8;

/// The Barbero–Immirzi parameter; never zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta(Complex64);

impl Beta {
    pub fn new(value: Complex64) -> Result<Self> {
        if value == Complex64::new(0.0, 0.0) || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::ZeroBeta);
        }
        Ok(Self(value))
    }

    pub fn real(value: f64) -> Result<Self> {
        Self::new(Complex64::new(value, 0.0))
    }

    /// `β = i`, the self-dual choice.
    pub fn imaginary_unit() -> Self {
        Self(Complex64::new(0.0, 1.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn is_real(&self) -> bool {
        self.0.im == 0.0
    }
}

/// A complex vector field stored as real and imaginary expression parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVecField {
    pub re: VecField,
    pub im: VecField,
}

impl ComplexVecField {
    pub fn real(re: VecField) -> Self {
        Self { re, im: VecField::zero() }
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Result<CVec3> {
        let re = self.re.eval(ev)?;
        let im = self.im.eval(ev)?;
        Ok(CVec3::from_fn(|c, _| Complex64::new(re[c], im[c])))
    }

    pub fn at(&self, p: &Binding) -> Result<CVec3> {
        self.eval(&mut Evaluator::new(p))
    }
}

pub fn complexify(v: &Vec3) -> CVec3 {
    v.map(Complex64::from)
}

/// Complex-bilinear `⟨U, V⟩` for a real metric matrix.
pub fn bilinear(q: &Mat3, u: &CVec3, v: &CVec3) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..3 {
        for b in 0..3 {
            s += u[a] * q[(a, b)] * v[b];
        }
    }
    s
}

/// Definitional and closed-form values of a torsion or curvature evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualRoute {
    pub definitional: CVec3,
    pub closed_form: CVec3,
}

impl DualRoute {
    pub fn discrepancy(&self) -> f64 {
        (self.definitional - self.closed_form).norm()
    }
}

/// The so(3) basis `(M_i)_{jk} = −ε_{ijk}`.
pub fn so3_basis(i: usize) -> Mat3 {
    Mat3::from_fn(|j, k| -levi_civita_symbol(i, j, k))
}

/// Components `c^i` of an antisymmetric matrix `Σ c^i M_i`.
pub fn so3_components(m: &CMat3) -> [Complex64; 3] {
    std::array::from_fn(|i| {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                s -= 0.5 * levi_civita_symbol(i, j, k) * m[(j, k)];
            }
        }
        s
    })
}

pub fn so3_from_components(c: &[Complex64; 3]) -> CMat3 {
    (0..3).fold(CMat3::zeros(), |acc, i| acc + so3_basis(i).map(|v| c[i] * v))
}

/// A local connection 1-form: one matrix per coordinate direction, `A(∂_a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLieForm {
    pub mats: [CMat3; 3],
}

impl LocalLieForm {
    pub fn zero() -> Self {
        Self { mats: [CMat3::zeros(); 3] }
    }

    /// `A_a = A_a^i M_i` from the components `[a][i]`.
    pub fn from_components(c: &[[Complex64; 3]; 3]) -> Self {
        Self {
            mats: std::array::from_fn(|a| so3_from_components(&c[a])),
        }
    }

    /// `A_a^i`, indexed `[a][i]`.
    pub fn components(&self) -> [[Complex64; 3]; 3] {
        std::array::from_fn(|a| so3_components(&self.mats[a]))
    }

    /// `max |A_a + A_aᵀ|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| (m + m.transpose()).iter().map(|c| c.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// `A(X) = X^a A_a`.
    pub fn contract(&self, x: &Vec3) -> CMat3 {
        (0..3).fold(CMat3::zeros(), |acc, a| acc + self.mats[a] * Complex64::from(x[a]))
    }
}

/// Physics-notation components at a point, each indexed `[a][i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsComponents {
    /// Spin connection `Γ_a^i`.
    pub gamma: Mat3,
    /// Extrinsic curvature `k_a^i = K(∂_a, e_i)`.
    pub k: Mat3,
    /// `A_a^i = Γ_a^i + β k_a^i`.
    pub a: CMat3,
}

/// A 1-form field `A_a^i M_i` with expression components, real and imaginary parts indexed `[a][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieFormField {
    pub re: [[Expr; 3]; 3],
    pub im: [[Expr; 3]; 3],
}

impl LieFormField {
    pub fn zero() -> Self {
        let z = || std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
        Self { re: z(), im: z() }
    }

    /// Constant components.
    pub fn constant(c: &[[Complex64; 3]; 3]) -> Self {
        Self {
            re: std::array::from_fn(|a| std::array::from_fn(|i| Expr::constant(c[a][i].re))),
            im: std::array::from_fn(|a| std::array::from_fn(|i| Expr::constant(c[a][i].im))),
        }
    }

    pub fn components(&self, ev: &mut Evaluator) -> Result<[[Complex64; 3]; 3]> {
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for a in 0..3 {
            for i in 0..3 {
                out[a][i] = Complex64::new(ev.eval(&self.re[a][i])?, ev.eval(&self.im[a][i])?);
            }
        }
        Ok(out)
    }

    pub fn at(&self, p: &Binding) -> Result<LocalLieForm> {
        Ok(LocalLieForm::from_components(&self.components(&mut Evaluator::new(p))?))
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().flatten().all(Expr::is_zero)
    }

    pub fn substitute(&self, var: &str, value: &Expr) -> Self {
        Self {
            re: std::array::from_fn(|a| std::array::from_fn(|i| self.re[a][i].substitute(var, value))),
            im: std::array::from_fn(|a| std::array::from_fn(|i| self.im[a][i].substitute(var, value))),
        }
    }
}

/// The Ashtekar connection built from a slice metric, a Weingarten-type
/// endomorphism field and `β`.
#[derive(Debug)]
pub struct AshtekarConnection {
    beta: Beta,
    metric: SliceMetric,
    weingarten: EndoField,
    lc: Arc<LeviCivita>,
    frame: FrameField,
}

impl AshtekarConnection {
    pub fn new(beta: Beta, metric: &SliceMetric, weingarten: &EndoField) -> Self {
        Self::with_levi_civita(beta, Arc::new(LeviCivita::new(metric)), weingarten)
    }

    /// Share an already built Levi-Civita connection (and its cached derivatives).
    pub fn with_levi_civita(beta: Beta, lc: Arc<LeviCivita>, weingarten: &EndoField) -> Self {
        let metric = lc.metric().clone();
        Self {
            beta,
            frame: orthonormal_frame_field(&metric),
            metric,
            weingarten: weingarten.clone(),
            lc,
        }
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn metric(&self) -> &SliceMetric {
        &self.metric
    }

    pub fn weingarten(&self) -> &EndoField {
        &self.weingarten
    }

    pub fn levi_civita(&self) -> &LeviCivita {
        &self.lc
    }

    /// The Gram–Schmidt frame field used for the vector product and the local forms.
    pub fn frame(&self) -> &FrameField {
        &self.frame
    }

    /// The induced product at `p`.
    pub fn product_at(&self, p: &Binding) -> Result<VectorProduct> {
        VectorProduct::for_metric(&self.metric.at(p)?)
    }

    /// `∇^A_X Y` at `p`.
    pub fn deriv(&self, x: &TangentVec, y: &VecField, p: &Binding) -> Result<CVec3> {
        self.deriv_complex(x, &ComplexVecField::real(y.clone()), p)
    }

    /// `∇^A_X Y` at `p` for a complex field `Y`.
    pub fn deriv_complex(&self, x: &TangentVec, y: &ComplexVecField, p: &Binding) -> Result<CVec3> {
        let vp = self.product_at(p)?;
        let lc_re = self.lc.cov_deriv(x, &y.re, p)?;
        let lc_im = self.lc.cov_deriv(x, &y.im, p)?;
        let wx = self.weingarten.at(p)? * x;
        let y_at = y.at(p)?;
        let twist = vp.apply_mixed(&wx, &y_at);
        Ok(CVec3::from_fn(|c, _| Complex64::new(lc_re[c], lc_im[c]) + self.beta.0 * twist[c]))
    }

    /// `∇^A_X Y` as a complex vector field.
    pub fn deriv_field(&self, x: &VecField, y: &ComplexVecField) -> ComplexVecField {
        let wx = self.weingarten.apply(x);
        let wy_re = ivp_field(&self.metric, &self.frame, &wx, &y.re);
        let wy_im = ivp_field(&self.metric, &self.frame, &wx, &y.im);
        let (br, bi) = (self.beta.0.re, self.beta.0.im);
        let lc_re = self.lc.cov_deriv_field(x, &y.re);
        let lc_im = self.lc.cov_deriv_field(x, &y.im);
        let re = VecField::new(std::array::from_fn(|c| {
            lc_re.component(c) + br * wy_re.component(c) - bi * wy_im.component(c)
        }));
        let im = VecField::new(std::array::from_fn(|c| {
            lc_im.component(c) + bi * wy_re.component(c) + br * wy_im.component(c)
        }));
        ComplexVecField { re, im }
    }

    /// Torsion by `∇^A_X Y − ∇^A_Y X − [X,Y]` and by `β[W(X)•Y − W(Y)•X]`.
    pub fn torsion(&self, x: &VecField, y: &VecField, p: &Binding) -> Result<DualRoute> {
        let xv = x.at(p)?;
        let yv = y.at(p)?;
        let bracket = complexify(&x.bracket(y).at(p)?);
        let definitional = self.deriv(&xv, y, p)? - self.deriv(&yv, x, p)? - bracket;
        let vp = self.product_at(p)?;
        let w = self.weingarten.at(p)?;
        let closed = vp.apply(&(w * xv), &yv) - vp.apply(&(w * yv), &xv);
        Ok(DualRoute {
            definitional,
            closed_form: complexify(&closed).map(|c| self.beta.0 * c),
        })
    }

    /// Curvature by `∇^A_X∇^A_Y Z − ∇^A_Y∇^A_X Z − ∇^A_{[X,Y]}Z` and by
    /// `R(X,Y)Z + β[(∇_X W)Y − (∇_Y W)X]•Z + β²[W(X)•W(Y)]•Z`.
    pub fn curvature(&self, x: &VecField, y: &VecField, z: &VecField, p: &Binding) -> Result<DualRoute> {
        let xv = x.at(p)?;
        let yv = y.at(p)?;
        let zv = z.at(p)?;
        let zc = ComplexVecField::real(z.clone());

        let ay_z = self.deriv_field(y, &zc);
        let ax_z = self.deriv_field(x, &zc);
        let definitional = self.deriv_complex(&xv, &ay_z, p)?
            - self.deriv_complex(&yv, &ax_z, p)?
            - self.deriv(&x.bracket(y).at(p)?, z, p)?;

        let vp = self.product_at(p)?;
        let w = self.weingarten.at(p)?;
        let r = self.lc.riemann(&xv, &yv, &zv, p)?;
        // (∇_X W)Y = ∇_X(W(Y)) − W(∇_X Y)
        let dw_xy = self.lc.cov_deriv(&xv, &self.weingarten.apply(y), p)? - w * self.lc.cov_deriv(&xv, y, p)?;
        let dw_yx = self.lc.cov_deriv(&yv, &self.weingarten.apply(x), p)? - w * self.lc.cov_deriv(&yv, x, p)?;
        let linear = vp.apply(&(dw_xy - dw_yx), &zv);
        let quadratic = vp.apply(&vp.apply(&(w * xv), &(w * yv)), &zv);
        let beta = self.beta.0;
        let closed_form = CVec3::from_fn(|c, _| r[c] + beta * linear[c] + beta * beta * quadratic[c]);
        Ok(DualRoute {
            definitional,
            closed_form,
        })
    }

    /// `⟨A(∂_a)𝔵, 𝔶⟩ = ⟨∇^A_{∂_a} e(𝔵), e(𝔶)⟩` for an arbitrary frame field; `gl(3)`-valued.
    pub fn local_form_general(&self, frame: &FrameField, p: &Binding) -> Result<LocalLieForm> {
        let q = self.metric.at(p)?;
        let e = frame.at(p)?;
        let mut mats = [CMat3::zeros(); 3];
        for (a, mat) in mats.iter_mut().enumerate() {
            let mut dir = Vec3::zeros();
            dir[a] = 1.0;
            for i in 0..3 {
                let d = self.deriv(&dir, &VecField::new(frame.vector(i)), p)?;
                for j in 0..3 {
                    mat[(j, i)] = bilinear(&q, &d, &complexify(&e.vector(j)));
                }
            }
        }
        Ok(LocalLieForm { mats })
    }

    /// Local connection form along an oriented orthonormal frame field; `so(3)`-valued.
    pub fn local_form(&self, frame: &FrameField, p: &Binding) -> Result<LocalLieForm> {
        let q = self.metric.at(p)?;
        let e = frame.at(p)?;
        let residual = e.orthonormality_residual(&q);
        if residual > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(residual));
        }
        let det = e.0.determinant();
        if det <= 0.0 {
            return Err(Error::Invalid(format!("frame is not oriented (det = {det})")));
        }
        self.local_form_general(frame, p)
    }

    /// `Γ_a^k = ½ ε_{ijk} ⟨∇_{∂_a} e_i, e_j⟩`, `k_a^i = K(∂_a, e_i)` and `A_a^i = Γ_a^i + β k_a^i`.
    pub fn physics_components(&self, frame: &FrameField, p: &Binding) -> Result<PhysicsComponents> {
        let q = self.metric.at(p)?;
        let e = frame.at(p)?;
        let residual = e.orthonormality_residual(&q);
        if residual > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(residual));
        }
        let w = self.weingarten.at(p)?;
        let k_form = q * w; // K_ab = (Q W)_{ba}; K symmetric so either order
        let mut gamma = Mat3::zeros();
        let mut k = Mat3::zeros();
        for a in 0..3 {
            let mut dir = Vec3::zeros();
            dir[a] = 1.0;
            let nabla: Vec<Vec3> = (0..3)
                .map(|i| self.lc.cov_deriv(&dir, &VecField::new(frame.vector(i)), p))
                .collect::<Result<_>>()?;
            for kk in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let eps = levi_civita_symbol(i, j, kk);
                        if eps != 0.0 {
                            s += 0.5 * eps * (nabla[i].transpose() * q * e.vector(j))[(0, 0)];
                        }
                    }
                }
                gamma[(a, kk)] = s;
            }
            for i in 0..3 {
                k[(a, i)] = (0..3).map(|b| k_form[(b, a)] * e.0[(b, i)]).sum();
            }
        }
        let beta = self.beta.0;
        let a = CMat3::from_fn(|r, c| Complex64::from(gamma[(r, c)]) + beta * k[(r, c)]);
        Ok(PhysicsComponents { gamma, k, a })
    }

    /// `A_a^i` as expressions, along the given orthonormal frame field.
    pub fn connection_field(&self, frame: &FrameField) -> LieFormField {
        let k_form = self.weingarten.lowered(&self.metric);
        let mut re: [[Expr; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
        let mut im = re.clone();
        let (br, bi) = (self.beta.0.re, self.beta.0.im);
        for a in 0..3 {
            let dir = VecField::coordinate(a);
            let nabla: Vec<VecField> = (0..3)
                .map(|i| self.lc.cov_deriv_field(&dir, &VecField::new(frame.vector(i))))
                .collect();
            for kk in 0..3 {
                let mut gamma = Expr::zero();
                for i in 0..3 {
                    for j in 0..3 {
                        let eps = levi_civita_symbol(i, j, kk);
                        if eps != 0.0 {
                            gamma = gamma
                                + (0.5 * eps) * self.metric.inner(nabla[i].components(), &frame.vector(j));
                        }
                    }
                }
                let k: Expr = (0..3).map(|b| &k_form[a][b] * frame.component(b, kk)).sum();
                re[a][kk] = gamma + br * &k;
                im[a][kk] = bi * k;
            }
        }
        LieFormField { re, im }
    }
}

pub fn ashtekar_deriv(
    beta: Beta,
    q: &SliceMetric,
    w: &EndoField,
    x: &TangentVec,
    y: &VecField,
    p: &Binding,
) -> Result<CVec3> {
    AshtekarConnection::new(beta, q, w).deriv(x, y, p)
}

pub fn torsion_a(beta: Beta, q: &SliceMetric, w: &EndoField, x: &VecField, y: &VecField, p: &Binding) -> Result<DualRoute> {
    AshtekarConnection::new(beta, q, w).torsion(x, y, p)
}

pub fn curvature_a(
    beta: Beta,
    q: &SliceMetric,
    w: &EndoField,
    x: &VecField,
    y: &VecField,
    z: &VecField,
    p: &Binding,
) -> Result<DualRoute> {
    AshtekarConnection::new(beta, q, w).curvature(x, y, z, p)
}

pub fn local_form(beta: Beta, q: &SliceMetric, w: &EndoField, e: &FrameField, p: &Binding) -> Result<LocalLieForm> {
    AshtekarConnection::new(beta, q, w).local_form(e, p)
}

pub fn physics_components(
    beta: Beta,
    q: &SliceMetric,
    w: &EndoField,
    e: &FrameField,
    p: &Binding,
) -> Result<PhysicsComponents> {
    AshtekarConnection::new(beta, q, w).physics_components(e, p)
}

/// Recover `W` at a point from samples of `B(X, Y) = β W(X)•Y` via
/// `W(X) = (1/2β) Σ_i e_i • B(X, e_i)`. Column `a` of the result is `W(∂_a)`.
pub fn reconstruct_w<F>(beta: Beta, q: &Mat3, b: F) -> Result<CMat3>
where
    F: Fn(&Vec3, &Vec3) -> Result<CVec3>,
{
    let e = orthonormal_frame_at(q)?;
    let vp = VectorProduct::for_metric(q)?;
    let scale = Complex64::new(1.0, 0.0) / (2.0 * beta.0);
    let mut out = CMat3::zeros();
    for a in 0..3 {
        let mut x = Vec3::zeros();
        x[a] = 1.0;
        let mut sum = CVec3::zeros();
        for i in 0..3 {
            let ei = e.vector(i);
            sum += vp.apply_mixed(&ei, &b(&x, &ei)?);
        }
        out.set_column(a, &(sum * scale));
    }
    Ok(out)
}

/// Metric and second fundamental form recovered from `(E, ∇^A)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub metric: Mat3,
    pub weingarten: CMat3,
    /// `K_ab`, indexed `[a][b]`.
    pub second_fundamental_form: CMat3,
}

/// The metric and Levi-Civita connection determined by a densitized triad field.
#[derive(Debug)]
pub struct TriadGeometry {
    metric: SliceMetric,
    lc: LeviCivita,
}

impl TriadGeometry {
    pub fn new(triad: &[[Expr; 3]; 3]) -> Result<Self> {
        let metric = metric_from_triad_field(triad)?;
        let lc = LeviCivita::new(&metric);
        Ok(Self { metric, lc })
    }

    pub fn metric(&self) -> &SliceMetric {
        &self.metric
    }

    /// Recover `W` and `K` at `p` from a black-box Ashtekar derivative `(X, Y, p) ↦ ∇^A_X Y`.
    pub fn reconstruct<F>(&self, beta: Beta, nabla_a: F, p: &Binding) -> Result<Reconstruction>
    where
        F: Fn(&TangentVec, &VecField, &Binding) -> Result<CVec3>,
    {
        let q = self.metric.at(p)?;
        let w = reconstruct_w(beta, &q, |x, y| {
            let field = VecField::constant(y);
            let full = nabla_a(x, &field, p)?;
            let lc_part = self.lc.cov_deriv(x, &field, p)?;
            Ok(full - complexify(&lc_part))
        })?;
        let qc = q.map(Complex64::from);
        // K_ab = q_cb W^c_a
        let k = (qc * w).transpose();
        Ok(Reconstruction {
            metric: q,
            weingarten: w,
            second_fundamental_form: k,
        })
    }
}

/// Recover `q` from a densitized triad field, then `W` and `K` from a black-box
/// Ashtekar derivative.
pub fn reconstruct_from_ashtekar<F>(beta: Beta, triad: &[[Expr; 3]; 3], nabla_a: F, p: &Binding) -> Result<Reconstruction>
where
    F: Fn(&TangentVec, &VecField, &Binding) -> Result<CVec3>,
{
    TriadGeometry::new(triad)?.reconstruct(beta, nabla_a, p)
}

/// `q = (e eᵀ)^{-1}` with `e = (det E)^{-1/2} E`, symbolically.
pub fn metric_from_triad_field(triad: &[[Expr; 3]; 3]) -> Result<SliceMetric> {
    // det(e) = det(E)^{-1/2}, so (e eᵀ)^{-1} = det(E) (E Eᵀ)^{-1}
    let det_big_e = det3(triad);
    let upper = |f: &dyn Fn(usize, usize) -> Expr| [f(0, 0), f(0, 1), f(0, 2), f(1, 1), f(1, 2), f(2, 2)];
    let gram = SliceMetric::from_upper(upper(&|a, b| (0..3).map(|i| &triad[a][i] * &triad[b][i]).sum()));
    let inv = gram.inverse();
    Ok(SliceMetric::from_upper(upper(&|a, b| &det_big_e * &inv[a][b])))
}

/// The densitized triad field `E = e / det e` of a frame field.
pub fn densitize_field(frame: &FrameField) -> [[Expr; 3]; 3] {
    let det = det3(frame.components());
    std::array::from_fn(|a| std::array::from_fn(|i| frame.component(a, i) / &det))
}

fn det3(m: &[[Expr; 3]; 3]) -> Expr {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Evaluate a triad at a point.
pub fn triad_at(triad: &[[Expr; 3]; 3], p: &Binding) -> Result<DensitizedTriad> {
    crate::geometry::eval_matrix(triad, &mut Evaluator::new(p)).map(DensitizedTriad)
}

/// `X⟨Y,Z⟩` at `p`.
pub fn derive_inner(q: &SliceMetric, x: &TangentVec, y: &VecField, z: &VecField, p: &Binding) -> Result<f64> {
    let f = q.inner(y.components(), z.components());
    directional_derivative(x, &f, &mut Evaluator::new(p))
}

/// A frame field rotated by a constant matrix: `e ∘ L`.
pub fn rotate_frame_field(frame: &FrameField, l: &Mat3) -> FrameField {
    FrameField::new(std::array::from_fn(|a| {
        std::array::from_fn(|i| (0..3).map(|k| frame.component(a, k) * l[(k, i)]).sum())
    }))
}

/// A numeric frame as a constant frame field.
pub fn constant_frame_field(e: &Frame) -> FrameField {
    FrameField::new(std::array::from_fn(|a| std::array::from_fn(|i| Expr::constant(e.0[(a, i)]))))
}
