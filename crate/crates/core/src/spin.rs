//! su(2), the isomorphism `λ_*: su(2) → so(3)`, the double cover
//! `λ: SU(2) → SO(3)` and path holonomies in both groups.
//!
//! The slice is parallelizable, so the spin bundle is trivial and lifting a
//! local form is the basis swap `M_i ↦ τ_i` on its components.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::ashtekar::{so3_basis, so3_components, CMat3, LieFormField, LocalLieForm};
use crate::error::{Error, Result};
use crate::expr::{parse_with, Binding, Evaluator, Expr};
use crate::geometry::{Chart, Mat3};

pub type CMat2 = Matrix2<Complex64>;

/// Curve parameter used in path expressions, running over `[0, 1]`.
pub const PATH_PARAM: &str = "t";
pub const MIN_STEPS: usize = 10;

const ALGEBRA_TOL: f64 = 1e-12;
const GROUP_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<Complex64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `τ_j = −(i/2) σ_j`.
pub fn su2_basis(j: usize) -> CMat2 {
    let z = c(0.0, 0.0);
    let half = 0.5;
    match j {
        0 => CMat2::new(z, c(0.0, -half), c(0.0, -half), z),
        1 => CMat2::new(z, c(-half, 0.0), c(half, 0.0), z),
        2 => CMat2::new(c(0.0, -half), z, z, c(0.0, half)),
        _ => panic!("su(2) basis index {j} out of range"),
    }
}

pub fn su2_from_components(comps: &[Complex64; 3]) -> CMat2 {
    (0..3).fold(CMat2::zeros(), |acc, i| acc + su2_basis(i) * comps[i])
}

/// Components against `{τ_i}`; `tr(τ_i τ_j) = −½ δ_ij`.
pub fn su2_components(xi: &CMat2) -> Result<[Complex64; 3]> {
    let comps = std::array::from_fn(|i| -2.0 * (su2_basis(i) * xi).trace());
    let residual = max_abs(&(xi - su2_from_components(&comps)));
    if residual > ALGEBRA_TOL * max_abs(xi).max(1.0) {
        return Err(Error::NotInAlgebra(residual));
    }
    Ok(comps)
}

/// `λ_*(Σ c^i τ_i) = Σ c^i M_i`.
pub fn lambda_star(xi: &CMat2) -> Result<CMat3> {
    let comps = su2_components(xi)?;
    Ok((0..3).fold(CMat3::zeros(), |acc, i| acc + so3_basis(i).map(|v| comps[i] * v)))
}

/// `λ_*^{-1}(Σ c^i M_i) = Σ c^i τ_i`.
pub fn lambda_star_inv(m: &CMat3) -> Result<CMat2> {
    let residual = max_abs(&(m + m.transpose()));
    if residual > ALGEBRA_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotInAlgebra(residual));
    }
    Ok(su2_from_components(&so3_components(m)))
}

/// An su(2)-valued local form, one matrix per coordinate direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Form {
    pub mats: [CMat2; 3],
}

impl Su2Form {
    pub fn components(&self) -> Result<[[Complex64; 3]; 3]> {
        let mut out = [[c(0.0, 0.0); 3]; 3];
        for (a, m) in self.mats.iter().enumerate() {
            out[a] = su2_components(m)?;
        }
        Ok(out)
    }
}

pub fn lift_connection(form: &LocalLieForm) -> Result<Su2Form> {
    let mut mats = [CMat2::zeros(); 3];
    for (a, m) in form.mats.iter().enumerate() {
        mats[a] = lambda_star_inv(m)?;
    }
    Ok(Su2Form { mats })
}

pub fn lower_connection(form: &Su2Form) -> Result<LocalLieForm> {
    let mut mats = [CMat3::zeros(); 3];
    for (a, m) in form.mats.iter().enumerate() {
        mats[a] = lambda_star(m)?;
    }
    Ok(LocalLieForm { mats })
}

/// `‖U†U − I‖` and `|det U − 1|`, the larger of the two.
pub fn su2_drift(u: &CMat2) -> f64 {
    let unitary = max_abs(&(u.adjoint() * u - CMat2::identity()));
    unitary.max((u.determinant() - 1.0).norm())
}

/// `‖RᵀR − I‖` and `|det R − 1|`, the larger of the two (complex entries allowed).
pub fn so3_drift(r: &CMat3) -> f64 {
    let orth = max_abs(&(r.transpose() * r - CMat3::identity()));
    orth.max((r.determinant() - 1.0).norm())
}

/// Adjoint action `U τ_i U⁻¹ = Σ_j R_ji τ_j`, defined for any invertible `U`.
pub fn adjoint_action(u: &CMat2) -> Result<CMat3> {
    let det = u.determinant();
    let inv = u.try_inverse().ok_or(Error::NotInGroup(det.norm()))?;
    let mut r = CMat3::zeros();
    for i in 0..3 {
        let conj = u * su2_basis(i) * inv;
        for j in 0..3 {
            r[(j, i)] = -2.0 * (su2_basis(j) * conj).trace();
        }
    }
    Ok(r)
}

/// The double cover `λ: SU(2) → SO(3)`.
pub fn covering_map(u: &CMat2) -> Result<Mat3> {
    let drift = su2_drift(u);
    if drift > GROUP_TOL {
        return Err(Error::NotInGroup(drift));
    }
    Ok(adjoint_action(u)?.map(|z| z.re))
}

fn sinc_and_cos(w2: Complex64) -> (Complex64, Complex64) {
    // sin(w)/w and cos(w) as functions of w², so the branch of √ is irrelevant
    if w2.norm() < 1e-8 {
        return (1.0 - w2 / 6.0, 1.0 - w2 / 2.0);
    }
    let w = w2.sqrt();
    (w.sin() / w, w.cos())
}

/// `exp(ξ)` for `ξ ∈ su(2) ⊗ ℂ`, using `ξ² = −(c·c/4) I`.
pub fn su2_exp(xi: &CMat2) -> Result<CMat2> {
    let comps = su2_components(xi)?;
    let w2: Complex64 = comps.iter().map(|v| v * v).sum::<Complex64>() / 4.0;
    let (sinc, cos) = sinc_and_cos(w2);
    Ok(CMat2::identity() * cos + xi * sinc)
}

/// `exp(m)` for `m ∈ so(3) ⊗ ℂ` by the Rodrigues formula.
pub fn so3_exp(m: &CMat3) -> Result<CMat3> {
    let residual = max_abs(&(m + m.transpose()));
    if residual > ALGEBRA_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotInAlgebra(residual));
    }
    let comps = so3_components(m);
    let th2: Complex64 = comps.iter().map(|v| v * v).sum();
    let (sinc, _) = sinc_and_cos(th2);
    // (1 − cos θ)/θ² = ½ sinc(θ/2)²
    let (half_sinc, _) = sinc_and_cos(th2 / 4.0);
    let second = 0.5 * half_sinc * half_sinc;
    Ok(CMat3::identity() + m * sinc + m * m * second)
}

/// A curve `c(t)`, `t ∈ [0, 1]`, in chart coordinates, with an integration step count.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    components: [Expr; 3],
    velocity: [Expr; 3],
    steps: usize,
}

impl PathSpec {
    pub fn new(components: [Expr; 3], steps: usize) -> Result<Self> {
        if steps < MIN_STEPS {
            return Err(Error::Invalid(format!("path needs at least {MIN_STEPS} steps, got {steps}")));
        }
        for comp in &components {
            if let Some(v) = comp.variables().into_iter().find(|v| v != PATH_PARAM) {
                return Err(Error::UnboundVariable(v));
            }
        }
        let velocity = std::array::from_fn(|i| components[i].diff(PATH_PARAM));
        Ok(Self {
            components,
            velocity,
            steps,
        })
    }

    /// Parse the three components as expressions in `t`.
    pub fn parse(components: [&str; 3], steps: usize) -> Result<Self> {
        let mut parsed = Vec::with_capacity(3);
        for text in components {
            parsed.push(parse_with(text, &[PATH_PARAM])?);
        }
        let parsed: [Expr; 3] = parsed.try_into().expect("three components");
        Self::new(parsed, steps)
    }

    /// The straight segment from `from` to `to`.
    pub fn segment(from: [f64; 3], to: [f64; 3], steps: usize) -> Result<Self> {
        let t = Expr::var(PATH_PARAM);
        Self::new(std::array::from_fn(|i| from[i] + (to[i] - from[i]) * &t), steps)
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.components
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The same curve traversed backwards, `t ↦ 1 − t`.
    pub fn reversed(&self) -> Self {
        let flipped = 1.0 - Expr::var(PATH_PARAM);
        let comps = std::array::from_fn(|i| self.components[i].substitute(PATH_PARAM, &flipped));
        Self::new(comps, self.steps).expect("reversal keeps a valid path")
    }

    pub fn point(&self, t: f64) -> Result<[f64; 3]> {
        let b = Binding::new().with(PATH_PARAM, t);
        let mut ev = Evaluator::new(&b);
        Ok([ev.eval(&self.components[0])?, ev.eval(&self.components[1])?, ev.eval(&self.components[2])?])
    }

    pub fn velocity(&self, t: f64) -> Result<[f64; 3]> {
        let b = Binding::new().with(PATH_PARAM, t);
        let mut ev = Evaluator::new(&b);
        Ok([ev.eval(&self.velocity[0])?, ev.eval(&self.velocity[1])?, ev.eval(&self.velocity[2])?])
    }

    /// Every node visited by the integrator lies in the chart.
    pub fn check_within(&self, chart: &Chart) -> Result<()> {
        for k in 0..=2 * self.steps {
            let t = k as f64 / (2 * self.steps) as f64;
            chart.check_point(&self.point(t)?)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    So3,
    Su2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupElement {
    So3(CMat3),
    Su2(CMat2),
}

/// `A(c'(t))` as its components against the chosen basis.
fn generator(form: &LieFormField, path: &PathSpec, t: f64) -> Result<[Complex64; 3]> {
    let x = path.point(t)?;
    let v = path.velocity(t)?;
    let comps = form.components(&mut Evaluator::new(&Binding::slice(x)))?;
    Ok(std::array::from_fn(|i| (0..3).map(|a| comps[a][i] * v[a]).sum()))
}

fn rk4<M, F>(path: &PathSpec, identity: M, rhs: F) -> Result<M>
where
    M: Copy + std::ops::Add<Output = M> + std::ops::Mul<Complex64, Output = M>,
    F: Fn(f64, &M) -> Result<M>,
{
    let n = path.steps;
    let h = 1.0 / n as f64;
    let hc = Complex64::from(h);
    let mut u = identity;
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = rhs(t, &u)?;
        let k2 = rhs(t + 0.5 * h, &(u + k1 * (hc * 0.5)))?;
        let k3 = rhs(t + 0.5 * h, &(u + k2 * (hc * 0.5)))?;
        let k4 = rhs(t + h, &(u + k3 * hc))?;
        u = u + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * (hc / 6.0);
    }
    Ok(u)
}

/// Solve `U' = −A(c'(t)) U`, `U(0) = I` with classical RK4. The components
/// `A_a^i` are read against `M_i` for SO(3) and against `τ_i` for SU(2), which
/// is exactly the lifted connection in the latter case.
pub fn holonomy(form: &LieFormField, path: &PathSpec, group: Group) -> Result<GroupElement> {
    match group {
        Group::So3 => rk4(path, CMat3::identity(), |t, u| {
            let g = generator(form, path, t)?;
            let a = (0..3).fold(CMat3::zeros(), |acc, i| acc + so3_basis(i).map(|v| g[i] * v));
            Ok(-(a * u))
        })
        .map(GroupElement::So3),
        Group::Su2 => rk4(path, CMat2::identity(), |t, u| {
            let a = su2_from_components(&generator(form, path, t)?);
            Ok(-(a * u))
        })
        .map(GroupElement::Su2),
    }
}

pub fn holonomy_so3(form: &LieFormField, path: &PathSpec) -> Result<CMat3> {
    match holonomy(form, path, Group::So3)? {
        GroupElement::So3(m) => Ok(m),
        GroupElement::Su2(_) => unreachable!(),
    }
}

pub fn holonomy_su2(form: &LieFormField, path: &PathSpec) -> Result<CMat2> {
    match holonomy(form, path, Group::Su2)? {
        GroupElement::Su2(m) => Ok(m),
        GroupElement::So3(_) => unreachable!(),
    }
}

/// Both holonomies and `‖Ad(U_SU2) − H_SO3‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomyPair {
    pub so3: CMat3,
    pub su2: CMat2,
    pub residual: f64,
}

pub fn holonomy_pair(form: &LieFormField, path: &PathSpec) -> Result<HolonomyPair> {
    let so3 = holonomy_so3(form, path)?;
    let su2 = holonomy_su2(form, path)?;
    let residual = max_abs(&(adjoint_action(&su2)? - so3));
    Ok(HolonomyPair { so3, su2, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SampleRng;
    use crate::vecprod::levi_civita_symbol;

    fn random_comps(rng: &mut SampleRng, complex: bool) -> [Complex64; 3] {
        std::array::from_fn(|_| c(rng.range(-1.0, 1.0), if complex { rng.range(-1.0, 1.0) } else { 0.0 }))
    }

    #[test]
    fn basis_brackets() {
        for i in 0..3 {
            for j in 0..3 {
                let lhs = su2_basis(i) * su2_basis(j) - su2_basis(j) * su2_basis(i);
                let rhs = (0..3).fold(CMat2::zeros(), |acc, k| acc + su2_basis(k) * c(levi_civita_symbol(i, j, k), 0.0));
                assert_eq!(lhs, rhs);
            }
            assert_eq!(su2_basis(i).trace(), c(0.0, 0.0));
            assert_eq!(su2_basis(i).adjoint(), -su2_basis(i));
        }
    }

    #[test]
    fn lambda_star_basics() {
        assert_eq!(lambda_star(&su2_basis(2)).unwrap(), so3_basis(2).map(Complex64::from));
        assert_eq!(lambda_star(&CMat2::zeros()).unwrap(), CMat3::zeros());
        assert!(matches!(lambda_star(&CMat2::identity()), Err(Error::NotInAlgebra(_))));
        assert!(matches!(lambda_star_inv(&CMat3::identity()), Err(Error::NotInAlgebra(_))));
    }

    #[test]
    fn lambda_star_is_bracket_homomorphism() {
        let mut rng = SampleRng::new(101);
        for complex in [false, true] {
            for _ in 0..50 {
                let x = su2_from_components(&random_comps(&mut rng, complex));
                let y = su2_from_components(&random_comps(&mut rng, complex));
                let lhs = lambda_star(&(x * y - y * x)).unwrap();
                let (lx, ly) = (lambda_star(&x).unwrap(), lambda_star(&y).unwrap());
                assert!(max_abs(&(lhs - (lx * ly - ly * lx))) < 1e-12);
                assert!(max_abs(&(lambda_star_inv(&lx).unwrap() - x)) < 1e-12);
            }
        }
    }

    #[test]
    fn lift_round_trip() {
        let mut rng = SampleRng::new(103);
        let comps: [[Complex64; 3]; 3] = std::array::from_fn(|_| random_comps(&mut rng, true));
        let form = LocalLieForm::from_components(&comps);
        let lifted = lift_connection(&form).unwrap();
        let lc = lifted.components().unwrap();
        for a in 0..3 {
            for i in 0..3 {
                assert!((lc[a][i] - comps[a][i]).norm() < 1e-12);
            }
        }
        let back = lower_connection(&lifted).unwrap();
        for a in 0..3 {
            assert!(max_abs(&(back.mats[a] - form.mats[a])) < 1e-12);
        }
        assert_eq!(lift_connection(&LocalLieForm::zero()).unwrap().mats, [CMat2::zeros(); 3]);
    }

    #[test]
    fn covering_map_kernel_and_axis() {
        assert_eq!(covering_map(&CMat2::identity()).unwrap(), Mat3::identity());
        assert_eq!(covering_map(&-CMat2::identity()).unwrap(), Mat3::identity());
        for theta in [0.3, std::f64::consts::PI, 2.0 * std::f64::consts::PI] {
            let u = su2_exp(&(su2_basis(2) * c(theta, 0.0))).unwrap();
            let r = covering_map(&u).unwrap();
            let oracle = (so3_basis(2) * theta).exp();
            assert!((r - oracle).abs().max() < 1e-12, "θ = {theta}");
        }
        assert!(matches!(covering_map(&(CMat2::identity() * c(2.0, 0.0))), Err(Error::NotInGroup(_))));
    }

    #[test]
    fn covering_map_is_homomorphism_and_sign_blind() {
        let mut rng = SampleRng::new(107);
        for _ in 0..50 {
            let u = su2_exp(&su2_from_components(&random_comps(&mut rng, false).map(|z| z * 3.0))).unwrap();
            let v = su2_exp(&su2_from_components(&random_comps(&mut rng, false).map(|z| z * 3.0))).unwrap();
            let (ru, rv) = (covering_map(&u).unwrap(), covering_map(&v).unwrap());
            assert!((covering_map(&(u * v)).unwrap() - ru * rv).abs().max() < 1e-10);
            assert_eq!(covering_map(&-u).unwrap(), ru);
            assert!((ru.transpose() * ru - Mat3::identity()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn exponentials_match_generic_oracle() {
        let mut rng = SampleRng::new(109);
        for complex in [false, true] {
            for _ in 0..30 {
                let comps = random_comps(&mut rng, complex).map(|z| z * 2.0);
                let xi = su2_from_components(&comps);
                assert!(max_abs(&(su2_exp(&xi).unwrap() - xi.exp())) < 1e-12);
                let m = lambda_star(&xi).unwrap();
                assert!(max_abs(&(so3_exp(&m).unwrap() - m.exp())) < 1e-12);
            }
        }
        let tiny = su2_basis(0) * c(1e-10, 0.0);
        assert!(max_abs(&(su2_exp(&tiny).unwrap() - tiny.exp())) < 1e-15);
    }

    #[test]
    fn lambda_is_differential_of_cover() {
        let mut rng = SampleRng::new(113);
        for _ in 0..50 {
            let xi = su2_from_components(&random_comps(&mut rng, false).map(|z| z * 4.0));
            let t = rng.uniform();
            let lhs = covering_map(&su2_exp(&(xi * c(t, 0.0))).unwrap()).unwrap();
            let rhs = so3_exp(&(lambda_star(&xi).unwrap() * c(t, 0.0))).unwrap();
            assert!((lhs.map(Complex64::from) - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-8);
        }
    }

    #[test]
    fn path_validation() {
        assert!(PathSpec::segment([0.0; 3], [1.0, 0.0, 0.0], 9).is_err());
        assert!(matches!(PathSpec::parse(["t", "x1", "0"], 20), Err(Error::UnknownIdentifier { .. })));
        let chart = Chart::new([(-0.5, 0.5); 3]).unwrap();
        let p = PathSpec::segment([0.0; 3], [1.0, 0.0, 0.0], 10).unwrap();
        assert!(matches!(p.check_within(&chart), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn zero_form_has_trivial_holonomy() {
        let p = PathSpec::parse(["cos(2*pi*t)", "sin(2*pi*t)", "t"], 50).unwrap();
        let pair = holonomy_pair(&LieFormField::zero(), &p).unwrap();
        assert_eq!(pair.so3, CMat3::identity());
        assert_eq!(pair.su2, CMat2::identity());
        assert_eq!(pair.residual, 0.0);
    }

    #[test]
    fn constant_form_gives_exponential() {
        let theta = 0.8;
        let mut comps = [[c(0.0, 0.0); 3]; 3];
        comps[0][2] = c(theta, 0.0);
        let form = LieFormField::constant(&comps);
        let p = PathSpec::segment([0.0; 3], [1.0, 0.0, 0.0], 100).unwrap();
        let h = holonomy_so3(&form, &p).unwrap();
        let oracle = (so3_basis(2) * -theta).exp().map(Complex64::from);
        assert!(max_abs(&(h - oracle)) < 1e-8);
    }

    fn random_form(rng: &mut SampleRng, complex: bool) -> LieFormField {
        let mut f = LieFormField::zero();
        for a in 0..3 {
            for i in 0..3 {
                f.re[a][i] = rng.smooth_scalar(1);
                if complex {
                    f.im[a][i] = 0.3 * rng.smooth_scalar(1);
                }
            }
        }
        f
    }

    fn random_path(rng: &mut SampleRng) -> PathSpec {
        let t = Expr::var(PATH_PARAM);
        let comps = std::array::from_fn(|_| {
            let (a, b, w) = (rng.range(-0.5, 0.5), rng.range(-0.5, 0.5), rng.range(1.0, 6.0));
            a + b * (w * &t).sin()
        });
        PathSpec::new(comps, 200).unwrap()
    }

    #[test]
    fn double_cover_consistency_and_reversal() {
        let mut rng = SampleRng::new(127);
        for complex in [false, true] {
            for _ in 0..5 {
                let form = random_form(&mut rng, complex);
                let path = random_path(&mut rng);
                let pair = holonomy_pair(&form, &path).unwrap();
                assert!(pair.residual < 1e-6, "{}", pair.residual);
                if !complex {
                    assert!(so3_drift(&pair.so3) < 1e-6);
                    assert!(su2_drift(&pair.su2) < 1e-6);
                }
                let back = holonomy_pair(&form, &path.reversed()).unwrap();
                assert!(max_abs(&(back.so3 * pair.so3 - CMat3::identity())) < 1e-7);
                assert!(max_abs(&(back.su2 * pair.su2 - CMat2::identity())) < 1e-7);
            }
        }
    }
}
