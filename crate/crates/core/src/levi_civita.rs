//! The Levi-Civita connection of a slice metric in coordinates.
//!
//! Christoffel symbols are kept as expressions so that their derivatives,
//! needed for the Riemann tensor, are exact.

use std::sync::OnceLock;

use crate::error::Result;
use crate::expr::{Binding, Evaluator, Expr, COORDS};
use crate::geometry::{SliceMetric, TangentVec, Vec3};

/// A vector field with expression components in the coordinate basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VecField([Expr; 3]);

impl VecField {
    pub fn new(components: [Expr; 3]) -> Self {
        Self(components)
    }

    pub fn zero() -> Self {
        Self([Expr::zero(), Expr::zero(), Expr::zero()])
    }

    /// The coordinate field `∂_a`.
    pub fn coordinate(a: usize) -> Self {
        Self(std::array::from_fn(|c| if c == a { Expr::one() } else { Expr::zero() }))
    }

    pub fn constant(v: &Vec3) -> Self {
        Self(std::array::from_fn(|c| Expr::constant(v[c])))
    }

    pub fn component(&self, c: usize) -> &Expr {
        &self.0[c]
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.0
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Result<Vec3> {
        Ok(Vec3::new(ev.eval(&self.0[0])?, ev.eval(&self.0[1])?, ev.eval(&self.0[2])?))
    }

    pub fn at(&self, p: &Binding) -> Result<Vec3> {
        self.eval(&mut Evaluator::new(p))
    }

    /// Partial derivative of every component along `x_a`.
    pub fn partial(&self, a: usize) -> VecField {
        Self(std::array::from_fn(|c| self.0[c].diff(COORDS[a])))
    }

    pub fn scale(&self, s: &Expr) -> VecField {
        Self(std::array::from_fn(|c| s * &self.0[c]))
    }

    /// Directional derivative `X(f)` as an expression.
    pub fn derive(&self, f: &Expr) -> Expr {
        (0..3)
            .filter(|&a| !self.0[a].is_zero())
            .map(|a| &self.0[a] * f.diff(COORDS[a]))
            .sum()
    }

    /// Coordinate Lie bracket `[X, Y]^c = X(Y^c) − Y(X^c)`.
    pub fn bracket(&self, other: &VecField) -> VecField {
        Self(std::array::from_fn(|c| self.derive(&other.0[c]) - other.derive(&self.0[c])))
    }
}

impl std::ops::Add for &VecField {
    type Output = VecField;
    fn add(self, rhs: &VecField) -> VecField {
        VecField(std::array::from_fn(|c| &self.0[c] + &rhs.0[c]))
    }
}

impl std::ops::Sub for &VecField {
    type Output = VecField;
    fn sub(self, rhs: &VecField) -> VecField {
        VecField(std::array::from_fn(|c| &self.0[c] - &rhs.0[c]))
    }
}

/// `X(f)` at a point for a tangent vector `X`.
pub fn directional_derivative(x: &TangentVec, f: &Expr, ev: &mut Evaluator) -> Result<f64> {
    let mut s = 0.0;
    for a in 0..3 {
        if x[a] != 0.0 {
            s += x[a] * ev.eval(&f.diff(COORDS[a]))?;
        }
    }
    Ok(s)
}

/// Christoffel symbols `Γ^c_{ab}` at a point, indexed `[c][a][b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelAtPoint(pub [[[f64; 3]; 3]; 3]);

impl ChristoffelAtPoint {
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.0[c][a][b]
    }

    /// `Γ^c_{ab} X^a Y^b`.
    pub fn contract(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    out[c] += self.0[c][a][b] * x[a] * y[b];
                }
            }
        }
        out
    }
}

type Symbols = [[[Expr; 3]; 3]; 3];

/// The Levi-Civita connection of a slice metric.
#[derive(Debug)]
pub struct LeviCivita {
    metric: SliceMetric,
    gamma: Symbols,
    // d_gamma[d][c][a][b] = ∂_d Γ^c_{ab}
    d_gamma: OnceLock<[Symbols; 3]>,
}

impl LeviCivita {
    pub fn new(metric: &SliceMetric) -> Self {
        let inv = metric.inverse();
        let dq: [[[Expr; 3]; 3]; 3] = std::array::from_fn(|d| {
            std::array::from_fn(|a| std::array::from_fn(|b| metric.component(a, b).diff(COORDS[d])))
        });
        // lowered[d][a][b] = ½(∂_a q_db + ∂_b q_da − ∂_d q_ab)
        let lowered: Symbols = std::array::from_fn(|d| {
            std::array::from_fn(|a| {
                std::array::from_fn(|b| 0.5 * (&dq[a][d][b] + &dq[b][d][a] - &dq[d][a][b]))
            })
        });
        let mut gamma: Symbols = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())));
        for c in 0..3 {
            for a in 0..3 {
                for b in a..3 {
                    let g: Expr = (0..3)
                        .filter(|&d| !lowered[d][a][b].is_zero())
                        .map(|d| &inv[c][d] * &lowered[d][a][b])
                        .sum();
                    gamma[c][a][b] = g.clone();
                    gamma[c][b][a] = g;
                }
            }
        }
        Self {
            metric: metric.clone(),
            gamma,
            d_gamma: OnceLock::new(),
        }
    }

    pub fn metric(&self) -> &SliceMetric {
        &self.metric
    }

    /// `Γ^c_{ab}` as an expression.
    pub fn symbol(&self, c: usize, a: usize, b: usize) -> &Expr {
        &self.gamma[c][a][b]
    }

    fn d_gamma(&self) -> &[Symbols; 3] {
        self.d_gamma.get_or_init(|| {
            std::array::from_fn(|d| {
                std::array::from_fn(|c| {
                    std::array::from_fn(|a| std::array::from_fn(|b| self.gamma[c][a][b].diff(COORDS[d])))
                })
            })
        })
    }

    /// Christoffel symbols at `p`; fails where the metric is not positive definite.
    pub fn christoffel(&self, p: &Binding) -> Result<ChristoffelAtPoint> {
        self.metric.at(p)?;
        let mut ev = Evaluator::new(p);
        self.christoffel_eval(&mut ev)
    }

    fn christoffel_eval(&self, ev: &mut Evaluator) -> Result<ChristoffelAtPoint> {
        let mut out = [[[0.0; 3]; 3]; 3];
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    out[c][a][b] = ev.eval(&self.gamma[c][a][b])?;
                }
            }
        }
        Ok(ChristoffelAtPoint(out))
    }

    /// `(∇_X Y)^c = X^a ∂_a Y^c + Γ^c_{ab} X^a Y^b` at `p`.
    pub fn cov_deriv(&self, x: &TangentVec, y: &VecField, p: &Binding) -> Result<TangentVec> {
        self.metric.at(p)?;
        let mut ev = Evaluator::new(p);
        let gamma = self.christoffel_eval(&mut ev)?;
        let y_at = y.eval(&mut ev)?;
        let mut out = gamma.contract(x, &y_at);
        for c in 0..3 {
            out[c] += directional_derivative(x, y.component(c), &mut ev)?;
        }
        Ok(out)
    }

    /// `∇_X Y` as a vector field.
    pub fn cov_deriv_field(&self, x: &VecField, y: &VecField) -> VecField {
        VecField::new(std::array::from_fn(|c| {
            let mut terms = vec![x.derive(y.component(c))];
            for a in 0..3 {
                for b in 0..3 {
                    if x.component(a).is_zero() || y.component(b).is_zero() || self.gamma[c][a][b].is_zero() {
                        continue;
                    }
                    terms.push(&self.gamma[c][a][b] * x.component(a) * y.component(b));
                }
            }
            terms.into_iter().sum()
        }))
    }

    /// `R^d_{cab}` at `p`, indexed `[d][c][a][b]`, for `R(∂_a, ∂_b)∂_c = R^d_{cab} ∂_d`.
    pub fn riemann_tensor(&self, p: &Binding) -> Result<[[[[f64; 3]; 3]; 3]; 3]> {
        self.metric.at(p)?;
        let mut ev = Evaluator::new(p);
        let g = self.christoffel_eval(&mut ev)?;
        let dg = self.d_gamma();
        let mut out = [[[[0.0; 3]; 3]; 3]; 3];
        for d in 0..3 {
            for c in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        let mut v = ev.eval(&dg[a][d][b][c])? - ev.eval(&dg[b][d][a][c])?;
                        for e in 0..3 {
                            v += g.0[d][a][e] * g.0[e][b][c] - g.0[d][b][e] * g.0[e][a][c];
                        }
                        out[d][c][a][b] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z` at `p` (tensorial in all slots).
    pub fn riemann(&self, x: &TangentVec, y: &TangentVec, z: &TangentVec, p: &Binding) -> Result<TangentVec> {
        let r = self.riemann_tensor(p)?;
        Ok(contract_riemann(&r, x, y, z))
    }
}

pub fn contract_riemann(r: &[[[[f64; 3]; 3]; 3]; 3], x: &Vec3, y: &Vec3, z: &Vec3) -> Vec3 {
    let mut out = Vec3::zeros();
    for d in 0..3 {
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    out[d] += r[d][c][a][b] * x[a] * y[b] * z[c];
                }
            }
        }
    }
    out
}

pub fn christoffel(q: &SliceMetric, p: &Binding) -> Result<ChristoffelAtPoint> {
    LeviCivita::new(q).christoffel(p)
}

pub fn cov_deriv(q: &SliceMetric, x: &TangentVec, y: &VecField, p: &Binding) -> Result<TangentVec> {
    LeviCivita::new(q).cov_deriv(x, y, p)
}

pub fn riemann(q: &SliceMetric, x: &TangentVec, y: &TangentVec, z: &TangentVec, p: &Binding) -> Result<TangentVec> {
    LeviCivita::new(q).riemann(x, y, z, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::Mat3;
    use crate::sampling::SampleRng;

    fn round_sphere() -> SliceMetric {
        SliceMetric::diagonal([
            Expr::one(),
            parse("sin(x1)^2").unwrap(),
            parse("sin(x1)^2 * sin(x2)^2").unwrap(),
        ])
    }

    #[test]
    fn flat_metric_has_no_symbols() {
        let g = christoffel(&SliceMetric::euclidean(), &Binding::slice([0.3, 0.1, 0.2])).unwrap();
        assert!(g.0.iter().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn sphere_symbol_against_finite_difference_koszul() {
        // Γ^1_{22} = −½ ∂_1 q_22 (q diagonal, q_11 = 1), derivative by central differences
        let q = round_sphere();
        let p = Binding::slice([0.7, 1.1, 0.4]);
        let h = 1e-5;
        let q22 = q.component(1, 1);
        let d1 = (q22.eval(&p.shifted("x1", h)).unwrap() - q22.eval(&p.shifted("x1", -h)).unwrap()) / (2.0 * h);
        let oracle = -0.5 * d1;
        let g = christoffel(&q, &p).unwrap();
        assert!((g.get(0, 1, 1) - oracle).abs() < 1e-9);
        assert!((g.get(0, 1, 1) + 0.7f64.sin() * 0.7f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn metric_compatibility_identity() {
        let mut rng = SampleRng::new(31);
        for _ in 0..5 {
            let q = rng.metric_field(1);
            let lc = LeviCivita::new(&q);
            let x = rng.vec3(-1.0, 1.0);
            let p = Binding::slice([x.x, x.y, x.z]);
            let g = lc.christoffel(&p).unwrap();
            let qm = q.at(&p).unwrap();
            for c in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        let lhs = q.component(a, b).diff(COORDS[c]).eval(&p).unwrap();
                        let rhs: f64 = (0..3)
                            .map(|d| g.get(d, c, a) * qm[(d, b)] + g.get(d, c, b) * qm[(a, d)])
                            .sum();
                        assert!((lhs - rhs).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn flat_cov_deriv_examples() {
        let q = SliceMetric::euclidean();
        let p = Binding::slice([0.2, 0.5, -0.1]);
        let zero = cov_deriv(&q, &Vec3::new(1.0, 2.0, 3.0), &VecField::constant(&Vec3::new(1.0, 1.0, 1.0)), &p).unwrap();
        assert_eq!(zero, Vec3::zeros());
        let y = VecField::new([Expr::var("x2"), Expr::zero(), Expr::zero()]);
        let v = cov_deriv(&q, &Vec3::new(0.0, 1.0, 0.0), &y, &p).unwrap();
        assert_eq!(v, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn field_and_point_covariant_derivatives_agree() {
        let mut rng = SampleRng::new(37);
        let q = rng.metric_field(1);
        let lc = LeviCivita::new(&q);
        let x = rng.vector_field(1);
        let y = rng.vector_field(1);
        let field = lc.cov_deriv_field(&x, &y);
        let p = Binding::slice([0.3, -0.4, 0.8]);
        let direct = lc.cov_deriv(&x.at(&p).unwrap(), &y, &p).unwrap();
        assert!((field.at(&p).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn round_sphere_has_unit_curvature() {
        let q = round_sphere();
        let lc = LeviCivita::new(&q);
        let mut rng = SampleRng::new(41);
        for _ in 0..10 {
            let p = Binding::slice([rng.range(0.4, 2.7), rng.range(0.4, 2.7), rng.range(-3.0, 3.0)]);
            let qm = q.at(&p).unwrap();
            let (x, y, z) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
            let ip = |u: &Vec3, v: &Vec3| (u.transpose() * qm * v)[(0, 0)];
            let expected = x * ip(&z, &y) - y * ip(&z, &x);
            assert!((lc.riemann(&x, &y, &z, &p).unwrap() - expected).norm() < 1e-8);
        }
    }

    #[test]
    fn curvature_matches_second_covariant_derivatives() {
        // R(X,Y)Z against ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z with field-level derivatives
        let mut rng = SampleRng::new(43);
        let q = rng.metric_field(1);
        let lc = LeviCivita::new(&q);
        let (x, y, z) = (rng.vector_field(1), rng.vector_field(1), rng.vector_field(1));
        let p = Binding::slice([0.1, 0.2, -0.3]);
        let xv = x.at(&p).unwrap();
        let yv = y.at(&p).unwrap();
        let lhs = lc.cov_deriv(&xv, &lc.cov_deriv_field(&y, &z), &p).unwrap()
            - lc.cov_deriv(&yv, &lc.cov_deriv_field(&x, &z), &p).unwrap()
            - lc.cov_deriv(&x.bracket(&y).at(&p).unwrap(), &z, &p).unwrap();
        let rhs = lc.riemann(&xv, &yv, &z.at(&p).unwrap(), &p).unwrap();
        assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn riemann_antisymmetries_on_random_metric() {
        let mut rng = SampleRng::new(47);
        let q = rng.metric_field(1);
        let lc = LeviCivita::new(&q);
        let p = Binding::slice([0.5, 0.1, -0.2]);
        let qm: Mat3 = q.at(&p).unwrap();
        let (x, y, z, w) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
        let r_xy = lc.riemann(&x, &y, &z, &p).unwrap();
        let r_yx = lc.riemann(&y, &x, &z, &p).unwrap();
        assert!((r_xy + r_yx).norm() < 1e-9);
        let a = (lc.riemann(&x, &y, &z, &p).unwrap().transpose() * qm * w)[(0, 0)];
        let b = (lc.riemann(&x, &y, &w, &p).unwrap().transpose() * qm * z)[(0, 0)];
        assert!((a + b).abs() < 1e-9);
    }
}
