//! Jacobian of the Galerkin vector field in real coordinates, and the
//! logarithmic norms built on it.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::spectral::cvec::{self, CVec, ZERO};
use crate::spectral::{Mode, ModeSet, PhysicsParams, SpectralField};
use crate::trapping::ProjectionInfo;

/// Real coordinates on the admissible subspace of a mode set: one
/// representative per conjugate pair, its coefficient written as
/// `sum_j α_j e_j` over an orthonormal basis of the plane orthogonal to `k`,
/// and each `α_j` split into real and imaginary parts.
///
/// The Euclidean norm satisfies `|u|^2 = 2 |x|^2`.
#[derive(Debug, Clone)]
pub struct RealCoordinates {
    modes: Arc<ModeSet>,
    reps: Vec<usize>,
    basis: Vec<[[f64; 3]; 2]>,
    per_mode: usize,
}

impl RealCoordinates {
    pub fn new(modes: &Arc<ModeSet>) -> Self {
        let reps: Vec<usize> = modes.representatives().collect();
        let basis = reps
            .iter()
            .map(|&i| {
                let (e1, e2) = cvec::perp_basis(&modes.modes()[i]);
                [e1, e2.unwrap_or([0.0; 3])]
            })
            .collect();
        RealCoordinates {
            modes: Arc::clone(modes),
            reps,
            basis,
            per_mode: modes.dim().get() - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len() * self.per_mode * 2
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    fn coeffs_of(&self, r: usize, v: &CVec) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (j, o) in out.iter_mut().enumerate().take(self.per_mode) {
            let e = &self.basis[r][j];
            *o = v[0] * e[0] + v[1] * e[1] + v[2] * e[2];
        }
        out
    }

    fn write(&self, r: usize, v: &CVec, x: &mut [f64]) {
        let a = self.coeffs_of(r, v);
        for j in 0..self.per_mode {
            let base = (r * self.per_mode + j) * 2;
            x[base] = a[j].re;
            x[base + 1] = a[j].im;
        }
    }

    pub fn to_real(&self, u: &SpectralField) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        for (r, &i) in self.reps.iter().enumerate() {
            self.write(r, &u.coeffs()[i], x.as_mut_slice());
        }
        x
    }

    pub fn to_field(&self, x: &DVector<f64>) -> SpectralField {
        let mut u = SpectralField::zeros(Arc::clone(&self.modes));
        for (r, &i) in self.reps.iter().enumerate() {
            let mut v = ZERO;
            for j in 0..self.per_mode {
                let base = (r * self.per_mode + j) * 2;
                let a = Complex64::new(x[base], x[base + 1]);
                v = cvec::add(&v, &cvec::scale(&real_vec(&self.basis[r][j]), a));
            }
            u.coeffs_mut()[self.modes.negation(i)] = cvec::conj(&v);
            u.coeffs_mut()[i] = v;
        }
        u
    }
}

fn real_vec(e: &[f64; 3]) -> CVec {
    [e[0].into(), e[1].into(), e[2].into()]
}

/// `-i ⊓_k [(a|k) b]`
#[inline]
fn triad(k: &Mode, a: &CVec, b: &CVec) -> CVec {
    let kf = k.as_f64();
    cvec::scale(&cvec::leray_project(k, &cvec::scale(b, cvec::dot_k(a, &kf))), Complex64::new(0.0, -1.0))
}

/// Jacobian of `N(u) - ν|k|^2 u` in [`RealCoordinates`].
///
/// A column perturbs one coordinate of the pair `±p`; the derivative
/// `N'(u)w = B(u, w) + B(w, u)` then only involves `u_{k∓p}`.
pub fn jacobian(u: &SpectralField, p: &PhysicsParams) -> DMatrix<f64> {
    jacobian_in(&RealCoordinates::new(u.modes()), u, p)
}

pub fn jacobian_in(coords: &RealCoordinates, u: &SpectralField, p: &PhysicsParams) -> DMatrix<f64> {
    let set = coords.modes();
    let n = coords.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut col = alloc::vec![0.0; n];
    let lookup = |k: [i32; 3]| -> CVec { set.position_raw(&k).map_or(ZERO, |i| u.coeffs()[i]) };
    for (rp, &ip) in coords.reps.iter().enumerate() {
        let pm = set.modes()[ip].array();
        for j in 0..coords.per_mode {
            let e = real_vec(&coords.basis[rp][j]);
            for part in 0..2 {
                let c = (rp * coords.per_mode + j) * 2 + part;
                let alpha = if part == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
                let wp = cvec::scale(&e, alpha);
                let wm = cvec::conj(&wp);
                for (r, &ik) in coords.reps.iter().enumerate() {
                    let k = set.modes()[ik];
                    let ka = k.array();
                    let km = [ka[0] - pm[0], ka[1] - pm[1], ka[2] - pm[2]];
                    let kp = [ka[0] + pm[0], ka[1] + pm[1], ka[2] + pm[2]];
                    let u_km = lookup(km);
                    let u_kp = lookup(kp);
                    let mut d = ZERO;
                    if u_km != ZERO {
                        d = cvec::add(&d, &triad(&k, &u_km, &wp));
                        d = cvec::add(&d, &triad(&k, &wp, &u_km));
                    }
                    if u_kp != ZERO {
                        d = cvec::add(&d, &triad(&k, &u_kp, &wm));
                        d = cvec::add(&d, &triad(&k, &wm, &u_kp));
                    }
                    if r == rp {
                        d = cvec::add(&d, &cvec::scale_re(&wp, p.linear_rate(&k)));
                    }
                    coords.write(r, &d, &mut col);
                }
                jac.set_column(c, &DVector::from_column_slice(&col));
                col.iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
    jac
}

fn symmetric_part(j: &DMatrix<f64>) -> DMatrix<f64> {
    (j + j.transpose()) * 0.5
}

/// Largest eigenvalue of `(J + J^T)/2`.
pub fn lognorm_euclidean(j: &DMatrix<f64>) -> f64 {
    assert!(j.is_square(), "log norm needs a square matrix");
    if j.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    SymmetricEigen::new(symmetric_part(j))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `max_k [S_kk + sum_{i != k} |S_ki|]` for `S = (J + J^T)/2`.
pub fn lognorm_gershgorin(j: &DMatrix<f64>) -> f64 {
    assert!(j.is_square(), "log norm needs a square matrix");
    let s = symmetric_part(j);
    (0..s.nrows())
        .map(|r| {
            let off: f64 = (0..s.ncols()).filter(|&c| c != r).map(|c| s[(r, c)].abs()).sum();
            s[(r, r)] + off
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LogNormMethod {
    EuclideanEig,
    Gershgorin,
    ConditionD,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogNormBound {
    pub projection: ProjectionInfo,
    pub method: LogNormMethod,
    pub value: f64,
    /// What states the value covers.
    pub states: String,
}

/// Both matrix log norms of the Jacobian at `u`.
pub fn lognorm_bounds(u: &SpectralField, p: &PhysicsParams, states: &str) -> [LogNormBound; 2] {
    let j = jacobian(u, p);
    let info = ProjectionInfo::of(u.modes());
    [
        LogNormBound {
            projection: info.clone(),
            method: LogNormMethod::EuclideanEig,
            value: lognorm_euclidean(&j),
            states: String::from(states),
        },
        LogNormBound {
            projection: info,
            method: LogNormMethod::Gershgorin,
            value: lognorm_gershgorin(&j),
            states: String::from(states),
        },
    ]
}

/// Uniform-in-dimension bound expressed as a [`LogNormBound`].
pub fn condition_d_bound(modes: &ModeSet, l: f64, states: &str) -> LogNormBound {
    LogNormBound {
        projection: ProjectionInfo::of(modes),
        method: LogNormMethod::ConditionD,
        value: l,
        states: String::from(states),
    }
}
