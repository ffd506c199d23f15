//! Seeded sampling of points, matrices and random expression fields.
//!
//! The generator is SplitMix64 seeded directly with the user's 64-bit seed.
//! A uniform double in `[0, 1)` is `(next_u64() >> 11) * 2^-53`; every other
//! draw is built from that, so sample points are reproducible across
//! implementations that follow the same recipe.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::expr::{Expr, COORDS, TIME};
use crate::geometry::{Chart, Mat3, SliceMetric, SpacetimeSplit, Vec3};
use crate::hypersurface::EndoField;
use crate::levi_civita::VecField;

#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: SplitMix64,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn vec3(&mut self, lo: f64, hi: f64) -> Vec3 {
        Vec3::new(self.range(lo, hi), self.range(lo, hi), self.range(lo, hi))
    }

    /// A point of the chart, kept `margin` (as a fraction of each side) away from the boundary.
    pub fn point_in(&mut self, chart: &Chart, margin: f64) -> [f64; 3] {
        let u = [0, 1, 2].map(|_| self.range(margin, 1.0 - margin));
        chart.from_unit(u)
    }

    /// Uniformly distributed rotation (unit quaternion from four normals).
    pub fn rotation(&mut self) -> Mat3 {
        let (w, x, y, z) = loop {
            let q = [self.normal(), self.normal(), self.normal(), self.normal()];
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-6 {
                break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
            }
        };
        Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Symmetric positive definite matrix with eigenvalues in `[lo, hi]`.
    pub fn spd(&mut self, lo: f64, hi: f64) -> Mat3 {
        let r = self.rotation();
        let d = Mat3::from_diagonal(&self.vec3(lo, hi));
        let m = r * d * r.transpose();
        0.5 * (m + m.transpose())
    }

    /// Invertible matrix with positive determinant.
    pub fn oriented_matrix(&mut self) -> Mat3 {
        loop {
            let m = Mat3::from_fn(|_, _| self.range(-1.0, 1.0)) + Mat3::identity();
            let det = m.determinant();
            if det > 0.1 {
                return m;
            }
        }
    }

    /// A random smooth scalar field in `x1..x3`, bounded on `[-2, 2]^3`.
    pub fn smooth_scalar(&mut self, depth: u32) -> Expr {
        if depth == 0 {
            return self.leaf(false);
        }
        let a = self.smooth_scalar(depth - 1);
        match self.index(5) {
            0 => a + self.smooth_scalar(depth - 1),
            1 => a * self.smooth_scalar(depth - 1),
            2 => {
                let c = self.range(0.3, 1.2);
                (c * a).sin()
            }
            3 => {
                let c = self.range(0.3, 1.2);
                (c * a).cos()
            }
            _ => {
                let c = self.range(-0.4, 0.4);
                (c * a).exp()
            }
        }
    }

    /// Like [`Self::smooth_scalar`] but also depending on `t`.
    pub fn smooth_spacetime_scalar(&mut self, depth: u32) -> Expr {
        let base = self.smooth_scalar(depth);
        let timed = self.leaf(true);
        let c = self.range(0.2, 0.8);
        base + c * timed * self.smooth_scalar(depth.saturating_sub(1))
    }

    fn leaf(&mut self, with_time: bool) -> Expr {
        let var = if with_time {
            Expr::var(TIME)
        } else {
            Expr::var(COORDS[self.index(3)])
        };
        let c0 = self.range(-1.0, 1.0);
        let c1 = self.range(-1.0, 1.0);
        match self.index(3) {
            0 => c0 + c1 * var,
            1 => c0 * (c1 * var + self.range(-1.0, 1.0)).sin(),
            _ => {
                let other = Expr::var(COORDS[self.index(3)]);
                c0 + 0.5 * c1 * var * other
            }
        }
    }

    pub fn vector_field(&mut self, depth: u32) -> VecField {
        VecField::new([0, 1, 2].map(|_| self.smooth_scalar(depth)))
    }

    /// `q = Lᵀ L + s·I` with smooth `L`; positive definite everywhere.
    pub fn metric_field(&mut self, depth: u32) -> SliceMetric {
        let l: [[Expr; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| 0.5 * self.smooth_scalar(depth)));
        let shift = self.range(0.5, 1.5);
        gram_plus_shift(&l, Expr::constant(shift))
    }

    /// A symmetric bilinear form with smooth components.
    pub fn symmetric_field(&mut self, depth: u32) -> [[Expr; 3]; 3] {
        let upper: Vec<Expr> = (0..6).map(|_| self.smooth_scalar(depth)).collect();
        let idx = |a: usize, b: usize| {
            let (i, j) = if a <= b { (a, b) } else { (b, a) };
            i * 3 - i * (i + 1) / 2 + j
        };
        std::array::from_fn(|a| std::array::from_fn(|b| upper[idx(a, b)].clone()))
    }

    /// A q-symmetric Weingarten-type field `W = Q^{-1} K` for a random symmetric `K`.
    pub fn weingarten_field(&mut self, q: &SliceMetric, depth: u32) -> EndoField {
        let k = self.symmetric_field(depth);
        EndoField::from_second_fundamental_form(q, &k)
    }

    /// A random split `g = −f dτ² + g_τ` with `f` depending on `t` only.
    pub fn split_metric(&mut self, depth: u32, time: (f64, f64)) -> SpacetimeSplit {
        let t = Expr::var(TIME);
        let lapse = match self.index(3) {
            0 => Expr::constant(self.range(0.5, 2.0)),
            1 => (self.range(-0.5, 0.5) * &t).exp(),
            _ => self.range(0.5, 1.5) + self.range(0.05, 0.3) * &t * &t,
        };
        let l: [[Expr; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| 0.5 * self.smooth_spacetime_scalar(depth)));
        let shift = self.range(0.5, 1.5) + self.range(0.0, 0.3) * &t * &t;
        let spatial = gram_plus_shift(&l, shift);
        SpacetimeSplit::new(lapse, spatial, time).expect("generated lapse is positive")
    }
}

fn gram_plus_shift(l: &[[Expr; 3]; 3], shift: Expr) -> SliceMetric {
    let entry = |a: usize, b: usize| {
        let s: Expr = (0..3).map(|k| &l[k][a] * &l[k][b]).sum();
        if a == b {
            s + &shift
        } else {
            s
        }
    };
    SliceMetric::from_upper([
        entry(0, 0),
        entry(0, 1),
        entry(0, 2),
        entry(1, 1),
        entry(1, 2),
        entry(2, 2),
    ])
}
