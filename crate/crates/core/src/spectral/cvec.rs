//! Small helpers for complex 3-vectors. Two-dimensional fields leave the
//! third slot at zero.

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use num_complex::Complex64;

use crate::spectral::Mode;

/// A complex velocity coefficient `u_k`.
pub type CVec = [Complex64; 3];

pub const ZERO: CVec = [Complex64::new(0.0, 0.0); 3];

/// Bilinear (unconjugated) product `(v | k)`.
#[inline]
pub fn dot_k(v: &CVec, k: &[f64; 3]) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

/// Hermitian product `sum conj(a_i) b_i`.
#[inline]
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

#[inline]
pub fn norm_sq(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

#[inline]
pub fn norm(v: &CVec) -> f64 {
    norm_sq(v).sqrt()
}

#[inline]
pub fn conj(v: &CVec) -> CVec {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

#[inline]
pub fn scale(v: &CVec, s: Complex64) -> CVec {
    [v[0] * s, v[1] * s, v[2] * s]
}

#[inline]
pub fn scale_re(v: &CVec, s: f64) -> CVec {
    [v[0] * s, v[1] * s, v[2] * s]
}

#[inline]
pub fn add(a: &CVec, b: &CVec) -> CVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &CVec, b: &CVec) -> CVec {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `⊓_k v = v - ((v|k)/|k|^2) k`, the projection onto the plane orthogonal to `k`.
#[inline]
pub fn leray_project(k: &Mode, v: &CVec) -> CVec {
    let kf = k.as_f64();
    let s = dot_k(v, &kf) / (k.norm_sq() as f64);
    [v[0] - s * kf[0], v[1] - s * kf[1], v[2] - s * kf[2]]
}

/// `(I - ⊓_k) v`, the component of `v` along `k`.
#[inline]
pub fn longitudinal(k: &Mode, v: &CVec) -> CVec {
    let kf = k.as_f64();
    let s = dot_k(v, &kf) / (k.norm_sq() as f64);
    [s * kf[0], s * kf[1], s * kf[2]]
}

/// Real orthonormal basis of the plane orthogonal to `k`
/// (one vector for `d = 2`, two for `d = 3`).
pub fn perp_basis(k: &Mode) -> ([f64; 3], Option<[f64; 3]>) {
    let kf = k.as_f64();
    let n = k.norm();
    match k.dim() {
        crate::spectral::Dim::Two => ([-kf[1] / n, kf[0] / n, 0.0], None),
        crate::spectral::Dim::Three => {
            // Cross with the coordinate axis least aligned with k.
            let ax = (0..3)
                .min_by(|&a, &b| kf[a].abs().total_cmp(&kf[b].abs()))
                .unwrap_or(0);
            let mut e = [0.0; 3];
            e[ax] = 1.0;
            let c = cross(&kf, &e);
            let cn = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let e1 = [c[0] / cn, c[1] / cn, c[2] / cn];
            let e2 = cross(&[kf[0] / n, kf[1] / n, kf[2] / n], &e1);
            (e1, Some(e2))
        }
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Neumaier-compensated accumulator for a complex 3-vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedVec {
    sum: [f64; 6],
    comp: [f64; 6],
}

impl CompensatedVec {
    #[inline]
    pub fn add(&mut self, v: &CVec) {
        let parts = [v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im];
        for (i, x) in parts.into_iter().enumerate() {
            let s = self.sum[i];
            let t = s + x;
            if s.abs() >= x.abs() {
                self.comp[i] += (s - t) + x;
            } else {
                self.comp[i] += (x - t) + s;
            }
            self.sum[i] = t;
        }
    }

    #[inline]
    pub fn value(&self) -> CVec {
        let v: [f64; 6] = core::array::from_fn(|i| self.sum[i] + self.comp[i]);
        [
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
        ]
    }
}

/// Neumaier-compensated scalar sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut c = Compensated::default();
        for x in iter {
            c.add(x);
        }
        c
    }
}
