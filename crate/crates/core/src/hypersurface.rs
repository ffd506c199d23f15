//! The slice `{τ0} × Σ` inside a split spacetime `g = −f dτ² + g_τ`.
//!
//! Spacetime indices run over `(t, x1, x2, x3)`, index 0 being time.

use nalgebra::Vector4;

use crate::error::{Error, Result};
use crate::expr::{Binding, Evaluator, Expr, COORDS, TIME};
use crate::geometry::{eval_matrix, Mat3, SliceMetric, SpacetimeSplit, TangentVec};
use crate::levi_civita::VecField;

const SPACETIME: [&str; 4] = [TIME, COORDS[0], COORDS[1], COORDS[2]];

/// A pointwise linear map on the slice tangent space; `w[b][a] = W^b_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndoField {
    w: [[Expr; 3]; 3],
}

impl EndoField {
    pub fn new(w: [[Expr; 3]; 3]) -> Self {
        Self { w }
    }

    pub fn zero() -> Self {
        Self::new(std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())))
    }

    /// `s · 𝟙`.
    pub fn scalar(s: &Expr) -> Self {
        Self::new(std::array::from_fn(|b| {
            std::array::from_fn(|a| if a == b { s.clone() } else { Expr::zero() })
        }))
    }

    /// `W^b_a = Q^{bc} K_{ca}`.
    pub fn from_second_fundamental_form(q: &SliceMetric, k: &[[Expr; 3]; 3]) -> Self {
        let inv = q.inverse();
        Self::new(std::array::from_fn(|b| {
            std::array::from_fn(|a| (0..3).map(|c| &inv[b][c] * &k[c][a]).sum())
        }))
    }

    pub fn component(&self, b: usize, a: usize) -> &Expr {
        &self.w[b][a]
    }

    pub fn components(&self) -> &[[Expr; 3]; 3] {
        &self.w
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Result<Mat3> {
        eval_matrix(&self.w, ev)
    }

    pub fn at(&self, p: &Binding) -> Result<Mat3> {
        self.eval(&mut Evaluator::new(p))
    }

    /// `W(X)` as a vector field.
    pub fn apply(&self, x: &VecField) -> VecField {
        VecField::new(std::array::from_fn(|b| {
            (0..3)
                .filter(|&a| !x.component(a).is_zero() && !self.w[b][a].is_zero())
                .map(|a| &self.w[b][a] * x.component(a))
                .sum()
        }))
    }

    /// `K_ab = q_cb W^c_a`, so that `K(X,Y) = ⟨W(X), Y⟩`.
    pub fn lowered(&self, q: &SliceMetric) -> [[Expr; 3]; 3] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| (0..3).map(|c| q.component(c, b) * &self.w[c][a]).sum())
        })
    }

    pub fn substitute(&self, var: &str, value: &Expr) -> Self {
        Self::new(std::array::from_fn(|b| std::array::from_fn(|a| self.w[b][a].substitute(var, value))))
    }
}

/// The future unit normal `n = f^{-1/2} ∂_τ`.
pub fn unit_normal(st: &SpacetimeSplit) -> [Expr; 4] {
    [
        Expr::one() / st.lapse().sqrt(),
        Expr::zero(),
        Expr::zero(),
        Expr::zero(),
    ]
}

/// The embedding of the slices of a split spacetime, with its 4D Levi-Civita connection.
#[derive(Debug)]
pub struct Hypersurface {
    split: SpacetimeSplit,
    metric: [[Expr; 4]; 4],
    // gamma[l][m][n] = ⁴Γ^l_{mn}
    gamma: [[[Expr; 4]; 4]; 4],
    normal: [Expr; 4],
}

impl Hypersurface {
    pub fn new(st: &SpacetimeSplit) -> Self {
        let g3 = st.spatial();
        let metric: [[Expr; 4]; 4] = std::array::from_fn(|m| {
            std::array::from_fn(|n| match (m, n) {
                (0, 0) => -st.lapse(),
                (0, _) | (_, 0) => Expr::zero(),
                _ => g3.component(m - 1, n - 1).clone(),
            })
        });
        let inv3 = g3.inverse();
        let inverse: [[Expr; 4]; 4] = std::array::from_fn(|m| {
            std::array::from_fn(|n| match (m, n) {
                (0, 0) => Expr::constant(-1.0) / st.lapse(),
                (0, _) | (_, 0) => Expr::zero(),
                _ => inv3[m - 1][n - 1].clone(),
            })
        });
        let dg: [[[Expr; 4]; 4]; 4] = std::array::from_fn(|s| {
            std::array::from_fn(|m| std::array::from_fn(|n| metric[m][n].diff(SPACETIME[s])))
        });
        let gamma = std::array::from_fn(|l| {
            std::array::from_fn(|m| {
                std::array::from_fn(|n| {
                    (0..4)
                        .filter(|&s| !inverse[l][s].is_zero())
                        .map(|s| &inverse[l][s] * (0.5 * (&dg[m][s][n] + &dg[n][s][m] - &dg[s][m][n])))
                        .sum()
                })
            })
        });
        Self {
            split: st.clone(),
            metric,
            gamma,
            normal: unit_normal(st),
        }
    }

    pub fn split(&self) -> &SpacetimeSplit {
        &self.split
    }

    pub fn normal(&self) -> &[Expr; 4] {
        &self.normal
    }

    /// `g(U, V)` at `p` for spacetime vectors.
    pub fn spacetime_inner(&self, u: &Vector4<f64>, v: &Vector4<f64>, p: &Binding) -> Result<f64> {
        let mut ev = Evaluator::new(p);
        let mut s = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                if u[m] != 0.0 && v[n] != 0.0 {
                    s += u[m] * ev.eval(&self.metric[m][n])? * v[n];
                }
            }
        }
        Ok(s)
    }

    pub fn normal_at(&self, p: &Binding) -> Result<Vector4<f64>> {
        let mut ev = Evaluator::new(p);
        Ok(Vector4::new(
            ev.eval(&self.normal[0])?,
            ev.eval(&self.normal[1])?,
            ev.eval(&self.normal[2])?,
            ev.eval(&self.normal[3])?,
        ))
    }

    /// `(⁴∇_{∂_a} n)^ν` for all four `ν`; entry `[ν][a]`.
    pub fn shape_components(&self) -> [[Expr; 3]; 4] {
        std::array::from_fn(|nu| {
            std::array::from_fn(|a| {
                let m = a + 1;
                let mut s = self.normal[nu].diff(SPACETIME[m]);
                for l in 0..4 {
                    if !self.normal[l].is_zero() {
                        s = s + &self.gamma[nu][m][l] * &self.normal[l];
                    }
                }
                s
            })
        })
    }

    /// The Weingarten map as an endomorphism field in `(t, x)`.
    pub fn weingarten_field(&self) -> EndoField {
        let s = self.shape_components();
        EndoField::new(std::array::from_fn(|b| std::array::from_fn(|a| s[b + 1][a].clone())))
    }

    /// `⁴∇_X n` at `p` for a spacetime vector `X` tangent to the slice; all four components.
    pub fn covariant_normal(&self, x: &Vector4<f64>, p: &Binding) -> Result<Vector4<f64>> {
        if x[0] != 0.0 {
            return Err(Error::NotTangent(x[0]));
        }
        self.split.check_time(p.time().ok_or_else(|| Error::UnboundVariable(TIME.into()))?)?;
        let s = self.shape_components();
        let mut ev = Evaluator::new(p);
        let mut out = Vector4::zeros();
        for nu in 0..4 {
            for a in 0..3 {
                if x[a + 1] != 0.0 {
                    out[nu] += ev.eval(&s[nu][a])? * x[a + 1];
                }
            }
        }
        Ok(out)
    }

    /// `W(X) = ⁴∇_X n`, returned as a slice vector.
    pub fn weingarten(&self, x: &Vector4<f64>, p: &Binding) -> Result<TangentVec> {
        let v = self.covariant_normal(x, p)?;
        Ok(TangentVec::new(v[1], v[2], v[3]))
    }

    /// `K(X,Y) = ⟨W(X), Y⟩` with the induced metric `g_τ`.
    pub fn second_fundamental_form(&self, x: &TangentVec, y: &TangentVec, p: &Binding) -> Result<f64> {
        let w = self.weingarten(&Vector4::new(0.0, x[0], x[1], x[2]), p)?;
        let q = self.split.spatial().at(p)?;
        Ok((w.transpose() * q * y)[(0, 0)])
    }

    /// `K_ab = (1/(2√f)) ∂_τ (g_τ)_ab`, contracted with `X` and `Y`.
    pub fn second_fundamental_form_split(&self, x: &TangentVec, y: &TangentVec, p: &Binding) -> Result<f64> {
        let mut ev = Evaluator::new(p);
        let f = ev.eval(self.split.lapse())?;
        if f <= 0.0 {
            return Err(Error::NonPositiveLapse(f));
        }
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += x[a] * ev.eval(&self.split.spatial().component(a, b).diff(TIME))? * y[b];
            }
        }
        Ok(s / (2.0 * f.sqrt()))
    }
}

pub fn weingarten(st: &SpacetimeSplit, x: &Vector4<f64>, p: &Binding) -> Result<TangentVec> {
    Hypersurface::new(st).weingarten(x, p)
}

pub fn second_fundamental_form(st: &SpacetimeSplit, x: &TangentVec, y: &TangentVec, p: &Binding) -> Result<f64> {
    Hypersurface::new(st).second_fundamental_form(x, y, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::sampling::SampleRng;

    fn tangent(v: &TangentVec) -> Vector4<f64> {
        Vector4::new(0.0, v[0], v[1], v[2])
    }

    #[test]
    fn normal_examples() {
        let st = SpacetimeSplit::new(Expr::constant(4.0), SliceMetric::euclidean(), (-1.0, 1.0)).unwrap();
        let hs = Hypersurface::new(&st);
        let p = Binding::spacetime(0.0, [0.0; 3]);
        assert_eq!(hs.normal_at(&p).unwrap(), Vector4::new(0.5, 0.0, 0.0, 0.0));
        let n = hs.normal_at(&p).unwrap();
        assert!((hs.spacetime_inner(&n, &n, &p).unwrap() + 1.0).abs() < 1e-12);

        let st = SpacetimeSplit::new(Expr::one(), SliceMetric::euclidean(), (-1.0, 1.0)).unwrap();
        assert_eq!(Hypersurface::new(&st).normal_at(&p).unwrap(), Vector4::new(1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn static_slice_has_no_extrinsic_curvature() {
        let g = SliceMetric::diagonal([parse("1 + x2^2").unwrap(), Expr::one(), parse("2 + sin(x1)").unwrap()]);
        let st = SpacetimeSplit::new(Expr::one(), g, (-1.0, 1.0)).unwrap();
        let hs = Hypersurface::new(&st);
        let p = Binding::spacetime(0.2, [0.1, 0.4, -0.3]);
        let w = hs.weingarten(&Vector4::new(0.0, 0.3, -1.0, 2.0), &p).unwrap();
        assert!(w.norm() < 1e-15);
        let x = TangentVec::new(1.0, 2.0, 3.0);
        assert!(hs.second_fundamental_form(&x, &x, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn expanding_flat_slice() {
        let a2 = parse("exp(2*0.5*t)").unwrap();
        let st = SpacetimeSplit::new(Expr::one(), SliceMetric::euclidean().scaled(&a2), (-2.0, 2.0)).unwrap();
        let hs = Hypersurface::new(&st);
        let p = Binding::spacetime(0.3, [0.1, 0.2, 0.3]);
        let x = TangentVec::new(0.2, -0.7, 1.1);
        let w = hs.weingarten(&tangent(&x), &p).unwrap();
        assert!((w - 0.5 * x).norm() < 1e-12);
        let y = TangentVec::new(1.0, 0.5, -0.2);
        let q = st.spatial().at(&p).unwrap();
        let k = hs.second_fundamental_form(&x, &y, &p).unwrap();
        assert!((k - 0.5 * (x.transpose() * q * y)[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_tangent_vectors() {
        let st = SpacetimeSplit::new(Expr::one(), SliceMetric::euclidean(), (-1.0, 1.0)).unwrap();
        let err = weingarten(&st, &Vector4::new(1.0, 0.0, 0.0, 0.0), &Binding::spacetime(0.0, [0.0; 3]));
        assert_eq!(err, Err(Error::NotTangent(1.0)));
    }

    #[test]
    fn random_split_tangency_symmetry_and_dual_formula() {
        let mut rng = SampleRng::new(53);
        for _ in 0..3 {
            let st = rng.split_metric(1, (-1.0, 1.0));
            let hs = Hypersurface::new(&st);
            for _ in 0..5 {
                let x0 = rng.vec3(-1.0, 1.0);
                let p = Binding::spacetime(rng.range(-0.8, 0.8), [x0.x, x0.y, x0.z]);
                let (x, y) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
                let full = hs.covariant_normal(&tangent(&x), &p).unwrap();
                let n = hs.normal_at(&p).unwrap();
                assert!(hs.spacetime_inner(&full, &n, &p).unwrap().abs() < 1e-10);
                let kxy = hs.second_fundamental_form(&x, &y, &p).unwrap();
                let kyx = hs.second_fundamental_form(&y, &x, &p).unwrap();
                assert!((kxy - kyx).abs() < 1e-9);
                let split = hs.second_fundamental_form_split(&x, &y, &p).unwrap();
                assert!((kxy - split).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weingarten_recoverable_from_second_fundamental_form() {
        let mut rng = SampleRng::new(59);
        let st = rng.split_metric(1, (-1.0, 1.0));
        let hs = Hypersurface::new(&st);
        let w = hs.weingarten_field();
        let k = w.lowered(st.spatial());
        let back = EndoField::from_second_fundamental_form(st.spatial(), &k);
        let p = Binding::spacetime(0.4, [0.3, -0.2, 0.6]);
        assert!((w.at(&p).unwrap() - back.at(&p).unwrap()).abs().max() < 1e-9);
    }
}
