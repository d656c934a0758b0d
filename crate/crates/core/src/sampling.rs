//! Seeded random fields. Every draw comes from a ChaCha8 stream selected by
//! `(seed, index)`, so work split across threads reproduces the sequential
//! result exactly.

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use alloc::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::cvec::{self, CVec};
use crate::spectral::{Mode, ModeSet, SpectralField};

pub type Stream = ChaCha8Rng;

/// Independent generator number `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point on the unit sphere of `R^N`, by rejection from the cube.
pub fn unit_sphere<const N: usize, R: Rng + ?Sized>(rng: &mut R) -> [f64; N] {
    loop {
        let x: [f64; N] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 > 1e-12 && r2 <= 1.0 {
            let r = r2.sqrt();
            return x.map(|v| v / r);
        }
    }
}

/// Uniformly distributed complex unit vector orthogonal to `k`.
pub fn unit_perp<R: Rng + ?Sized>(k: &Mode, rng: &mut R) -> CVec {
    let (e1, e2) = cvec::perp_basis(k);
    let embed = |e: &[f64; 3], a: Complex64| -> CVec { [a * e[0], a * e[1], a * e[2]] };
    match e2 {
        None => {
            let [c, s] = unit_sphere::<2, _>(rng);
            embed(&e1, Complex64::new(c, s))
        }
        Some(e2) => {
            let [a, b, c, d] = unit_sphere::<4, _>(rng);
            cvec::add(&embed(&e1, Complex64::new(a, b)), &embed(&e2, Complex64::new(c, d)))
        }
    }
}

/// Random admissible field with `|u_k| = cap(k) · U_k^p`, `U_k` uniform on
/// `[0, 1)`, and independent random directions. `p = 0` saturates every cap.
pub fn random_field<R, F>(modes: &Arc<ModeSet>, rng: &mut R, power: f64, cap: F) -> SpectralField
where
    R: Rng + ?Sized,
    F: Fn(&Mode) -> f64,
{
    let mut u = SpectralField::zeros(Arc::clone(modes));
    for i in modes.representatives() {
        let k = modes.modes()[i];
        let frac: f64 = if power == 0.0 {
            1.0
        } else {
            rng.random::<f64>().powf(power)
        };
        let v = cvec::scale_re(&unit_perp(&k, rng), cap(&k) * frac);
        u.coeffs_mut()[modes.negation(i)] = cvec::conj(&v);
        u.coeffs_mut()[i] = v;
    }
    u
}

/// Field in `W(D, γ)` with amplitudes uniform in `[0, D/|k|^γ)`.
pub fn random_in_envelope<R: Rng + ?Sized>(
    modes: &Arc<ModeSet>,
    rng: &mut R,
    d: f64,
    gamma: f64,
) -> SpectralField {
    random_field(modes, rng, 1.0, |k| d / k.norm().powf(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Dim, INVARIANT_TOL};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, 3).random();
        let b: u64 = substream(7, 3).random();
        let c: u64 = substream(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn perp_vectors_are_unit_and_orthogonal() {
        let mut rng = substream(1, 0);
        for k in [Mode::d2(3, -1).unwrap(), Mode::d3(1, 2, -2).unwrap()] {
            for _ in 0..50 {
                let v = unit_perp(&k, &mut rng);
                assert!((cvec::norm(&v) - 1.0).abs() < 1e-14);
                assert!(cvec::dot_k(&v, &k.as_f64()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn envelope_fields_are_admissible() {
        let set = Arc::new(ModeSet::ball(Dim::Three, 4.0));
        let u = random_in_envelope(&set, &mut substream(9, 0), 1.0, 4.0);
        u.validate(INVARIANT_TOL).unwrap();
        assert!(u.iter().all(|(k, v)| cvec::norm(v) <= 1.0 / k.norm().powi(4)));
    }
}
