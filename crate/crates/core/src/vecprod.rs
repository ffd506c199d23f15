//! The vector product induced on each tangent space by an oriented
//! orthonormal frame: `X • Y = e[e⁻¹X × e⁻¹Y]`.
//!
//! The result depends only on the metric and orientation. [`ivp_hodge`]
//! computes the same product as `∗(X ∧ Y)` and is kept as an independent
//! check on signs and orientation.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Binding, Expr};
use crate::geometry::{
    is_positive_definite, orthonormal_frame, orthonormal_frame_at, Frame, FrameField, Mat3,
    SliceMetric, TangentVec, Vec3,
};
use crate::levi_civita::VecField;

pub type CVec3 = Vector3<Complex64>;

/// Levi-Civita symbol with `ε_123 = +1`.
pub fn levi_civita_symbol(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// The induced product at one point, tabulated on coordinate basis pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorProduct {
    // table[a][b] = ∂_a • ∂_b
    table: [[Vec3; 3]; 3],
}

impl VectorProduct {
    /// Product induced by any invertible frame.
    pub fn from_frame(e: &Frame) -> Result<Self> {
        let det = e.0.determinant();
        let inv = e.0.try_inverse().ok_or(Error::SingularFrame(det))?;
        let table = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let xa = inv.column(a).into_owned();
                let xb = inv.column(b).into_owned();
                e.0 * xa.cross(&xb)
            })
        });
        Ok(Self { table })
    }

    /// Product for the metric with component matrix `q`.
    pub fn for_metric(q: &Mat3) -> Result<Self> {
        Self::from_frame(&orthonormal_frame_at(q)?)
    }

    pub fn basis_product(&self, a: usize, b: usize) -> Vec3 {
        self.table[a][b]
    }

    pub fn apply(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    out += self.table[a][b] * (x[a] * y[b]);
                }
            }
        }
        out
    }

    /// Complex-bilinear extension.
    pub fn apply_complex(&self, x: &CVec3, y: &CVec3) -> CVec3 {
        let mut out = CVec3::zeros();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    let s = x[a] * y[b];
                    out += self.table[a][b].map(|v| s * v);
                }
            }
        }
        out
    }

    /// `X • Y` with real `X` and complex `Y`.
    pub fn apply_mixed(&self, x: &Vec3, y: &CVec3) -> CVec3 {
        self.apply_complex(&x.map(Complex64::from), y)
    }
}

/// `e[e⁻¹X × e⁻¹Y]` for an explicit frame.
pub fn ivp_with_frame(e: &Frame, x: &TangentVec, y: &TangentVec) -> Result<TangentVec> {
    let det = e.0.determinant();
    let inv = e.0.try_inverse().ok_or(Error::SingularFrame(det))?;
    Ok(e.0 * (inv * x).cross(&(inv * y)))
}

/// The induced vector product at `p`, through the Gram–Schmidt frame.
pub fn ivp(q: &SliceMetric, x: &TangentVec, y: &TangentVec, p: &Binding) -> Result<TangentVec> {
    ivp_with_frame(&orthonormal_frame(q, p)?, x, y)
}

/// `(X•Y)^c = √det Q · Q^{cd} ε_{dab} X^a Y^b` at a metric matrix.
pub fn ivp_hodge_at(q: &Mat3, x: &Vec3, y: &Vec3) -> Result<Vec3> {
    if !is_positive_definite(q) {
        return Err(Error::NotPositiveDefinite);
    }
    let det = q.determinant();
    let inv = q.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let mut lowered = Vec3::zeros();
    for d in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                lowered[d] += levi_civita_symbol(d, a, b) * x[a] * y[b];
            }
        }
    }
    Ok(det.sqrt() * inv * lowered)
}

pub fn ivp_hodge(q: &SliceMetric, x: &TangentVec, y: &TangentVec, p: &Binding) -> Result<TangentVec> {
    ivp_hodge_at(&q.at(p)?, x, y)
}

/// The product of two vector fields as a vector field, built from an
/// orthonormal frame field (so `e⁻¹ = eᵀQ`).
pub fn ivp_field(q: &SliceMetric, frame: &FrameField, x: &VecField, y: &VecField) -> VecField {
    let e = frame.components();
    let coframe = |v: &VecField| -> [Expr; 3] {
        std::array::from_fn(|i| {
            let mut terms = Vec::new();
            for a in 0..3 {
                for b in 0..3 {
                    if v.component(b).is_zero() || e[a][i].is_zero() {
                        continue;
                    }
                    terms.push(&e[a][i] * q.component(a, b) * v.component(b));
                }
            }
            terms.into_iter().sum()
        })
    };
    let u = coframe(x);
    let v = coframe(y);
    let cross: [Expr; 3] = [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ];
    VecField::new(std::array::from_fn(|c| {
        (0..3).map(|k| &e[c][k] * &cross[k]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::orthonormal_frame_field;
    use crate::sampling::SampleRng;

    fn origin() -> Binding {
        Binding::slice([0.0; 3])
    }

    fn basis(i: usize) -> Vec3 {
        let mut v = Vec3::zeros();
        v[i] = 1.0;
        v
    }

    #[test]
    fn flat_product_is_cross_product() {
        let q = SliceMetric::euclidean();
        for a in 0..3 {
            for b in 0..3 {
                let expected = basis(a).cross(&basis(b));
                let via_frame = ivp(&q, &basis(a), &basis(b), &origin()).unwrap();
                let via_hodge = ivp_hodge(&q, &basis(a), &basis(b), &origin()).unwrap();
                assert!((via_frame - expected).norm() < 1e-15);
                assert!((via_hodge - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn stretched_metric_example() {
        // e = diag(1/2, 1, 1): ∂1 • ∂2 = e[(2,0,0) × (0,1,0)] = e[(0,0,2)] = 2 ∂3
        let q = SliceMetric::constant(&Mat3::from_diagonal(&Vec3::new(4.0, 1.0, 1.0)));
        let v = ivp(&q, &basis(0), &basis(1), &origin()).unwrap();
        assert!((v - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-15);
        let h = ivp_hodge(&q, &basis(0), &basis(1), &origin()).unwrap();
        assert!((h - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn self_product_vanishes() {
        let mut rng = SampleRng::new(5);
        let q = rng.spd(0.1, 10.0);
        let x = rng.vec3(-1.0, 1.0);
        let vp = VectorProduct::for_metric(&q).unwrap();
        assert!(vp.apply(&x, &x).norm() < 1e-15);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let q = SliceMetric::constant(&Mat3::from_diagonal(&Vec3::new(1.0, 0.0, 1.0)));
        assert_eq!(ivp(&q, &basis(0), &basis(1), &origin()), Err(Error::NotPositiveDefinite));
        assert_eq!(ivp_hodge(&q, &basis(0), &basis(1), &origin()), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn frame_route_matches_hodge_on_random_metrics() {
        let mut rng = SampleRng::new(19);
        for _ in 0..200 {
            let q = rng.spd(0.1, 10.0);
            let x = rng.vec3(-1.0, 1.0);
            let y = rng.vec3(-1.0, 1.0);
            let a = VectorProduct::for_metric(&q).unwrap().apply(&x, &y);
            let b = ivp_hodge_at(&q, &x, &y).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn field_product_matches_pointwise() {
        let mut rng = SampleRng::new(23);
        let q = rng.metric_field(1);
        let frame = orthonormal_frame_field(&q);
        let x = rng.vector_field(1);
        let y = rng.vector_field(1);
        let xy = ivp_field(&q, &frame, &x, &y);
        for _ in 0..10 {
            let p = rng.vec3(-1.0, 1.0);
            let b = Binding::slice([p.x, p.y, p.z]);
            let direct = ivp(&q, &x.at(&b).unwrap(), &y.at(&b).unwrap(), &b).unwrap();
            assert!((xy.at(&b).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn complex_extension_is_bilinear() {
        let mut rng = SampleRng::new(29);
        let vp = VectorProduct::for_metric(&rng.spd(0.5, 2.0)).unwrap();
        let (xr, xi, yr, yi) = (rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0), rng.vec3(-1.0, 1.0));
        let join = |r: &Vec3, i: &Vec3| CVec3::from_fn(|k, _| Complex64::new(r[k], i[k]));
        let z = vp.apply_complex(&join(&xr, &xi), &join(&yr, &yi));
        let re = vp.apply(&xr, &yr) - vp.apply(&xi, &yi);
        let im = vp.apply(&xr, &yi) + vp.apply(&xi, &yr);
        assert!((z.map(|c| c.re) - re).norm() < 1e-14);
        assert!((z.map(|c| c.im) - im).norm() < 1e-14);
    }
}
