//! Lattice sums behind the nonlinear-term bounds, each reported as a finite
//! truncation plus an integral-comparison tail.

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sampling;
use crate::spectral::cvec::{self, Compensated, CompensatedVec};
use crate::spectral::{Dim, Mode, ModeSet, SpectralField};

/// Which constant an estimate stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConstantKind {
    /// `sup_k |k|^γ sum_{k1} |k1|^-γ |k-k1|^-γ`
    #[cfg_attr(feature = "serde", serde(rename = "C_Q"))]
    ConvolutionSup,
    /// Empirical constant of the linear-in-`D` bound on the nonlinear term.
    #[cfg_attr(feature = "serde", serde(rename = "C_estmLin"))]
    EnstrophyModulus,
    /// `sum_{k != 0} |k|^-γ`
    #[cfg_attr(feature = "serde", serde(rename = "C_dgamma"))]
    Zeta,
    /// Bound `|k1| / |k - k1| < A |k|`.
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    RatioBound,
}

/// A numerically estimated constant together with how it was obtained.
///
/// `value` is the finite part; [`reported`](Self::reported) adds the tail
/// and is the number downstream constructions use.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantEstimate {
    pub name: ConstantKind,
    pub dimension: Dim,
    pub gamma: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub epsilon: Option<f64>,
    pub value: f64,
    pub truncation_radius: u32,
    pub tail_bound: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub mode_of_supremum: Option<Mode>,
    /// Monte Carlo sample count, when the value is a sampled supremum.
    #[cfg_attr(feature = "serde", serde(default))]
    pub samples: Option<u64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: Option<u64>,
    pub note: String,
}

impl ConstantEstimate {
    pub fn reported(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `A = 2` in `|k1| / |k - k1| < A |k|`.
pub fn ratio_bound(dim: Dim) -> ConstantEstimate {
    ConstantEstimate {
        name: ConstantKind::RatioBound,
        dimension: dim,
        gamma: 0.0,
        epsilon: None,
        value: 2.0,
        truncation_radius: 0,
        tail_bound: 0.0,
        mode_of_supremum: None,
        samples: None,
        seed: None,
        note: String::from("exact"),
    }
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Upper bound on `sum_{|k| > R} |k|^-s` over `Z^d`.
///
/// Each lattice point owns the unit cube around it; on that cube
/// `|x| <= |k| (1 + sqrt(d) / 2R)` and `|x| >= R - sqrt(d)/2`, which gives
/// `(1 + sqrt(d)/2R)^s ω_d (R - sqrt(d)/2)^(d-s) / (s - d)`.
pub fn lattice_tail(dim: Dim, s: f64, radius: f64) -> Result<f64> {
    let d = dim.get() as f64;
    if !(s > d) {
        return Err(Error::Hypothesis(alloc::format!(
            "lattice sum of |k|^-{s} diverges in dimension {d}"
        )));
    }
    let h = d.sqrt() / 2.0;
    if !(radius > h) {
        return Err(Error::Parameter(alloc::format!(
            "tail radius {radius} must exceed {h}"
        )));
    }
    Ok((1.0 + h / radius).powf(s) * dim.sphere_area() * (radius - h).powf(d - s) / (s - d))
}

/// `counts[n]` = number of `k ∈ Z^d` with `|k|^2 = n`, for `0 <= n <= n_max`.
pub fn norm_counts(dim: Dim, n_max: i64) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; n_max as usize + 1];
    let b = isqrt(n_max);
    for x in -b..=b {
        let rx = n_max - x * x;
        let by = isqrt(rx);
        for y in -by..=by {
            let ry = rx - y * y;
            match dim {
                Dim::Two => counts[(x * x + y * y) as usize] += 1,
                Dim::Three => {
                    let bz = isqrt(ry);
                    for z in -bz..=bz {
                        counts[(x * x + y * y + z * z) as usize] += 1;
                    }
                }
            }
        }
    }
    counts
}

fn default_zeta_radius(dim: Dim) -> u32 {
    match dim {
        Dim::Two => 400,
        Dim::Three => 80,
    }
}

/// `C(d, s) = sum_{k != 0} |k|^-s`, truncated at `radius` plus tail.
pub fn zeta_sum(dim: Dim, s: f64, radius: u32) -> Result<ConstantEstimate> {
    let tail = lattice_tail(dim, s, radius as f64)?;
    let counts = norm_counts(dim, radius as i64 * radius as i64);
    let value = counts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| **c > 0)
        .map(|(n, c)| *c as f64 * (n as f64).powf(-s / 2.0))
        .collect::<Compensated>()
        .value();
    Ok(ConstantEstimate {
        name: ConstantKind::Zeta,
        dimension: dim,
        gamma: s,
        epsilon: None,
        value,
        truncation_radius: radius,
        tail_bound: tail,
        mode_of_supremum: None,
        samples: None,
        seed: None,
        note: String::from("truncated lattice sum plus integral tail"),
    })
}

/// Memo of `C(d, s)` keyed by dimension and exponent.
#[derive(Debug, Clone, Default)]
pub struct ZetaCache {
    entries: Vec<ConstantEstimate>,
}

impl ZetaCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, dim: Dim, s: f64) -> Result<ConstantEstimate> {
        if let Some(e) = self
            .entries
            .iter()
            .find(|e| e.dimension == dim && e.gamma.to_bits() == s.to_bits())
        {
            return Ok(e.clone());
        }
        let e = zeta_sum(dim, s, default_zeta_radius(dim))?;
        self.entries.push(e.clone());
        Ok(e)
    }
}

fn weight_table(gamma: f64, n_max: i64) -> Vec<f64> {
    let mut w = Vec::with_capacity(n_max as usize + 1);
    w.push(0.0);
    for n in 1..=n_max {
        w.push((n as f64).powf(-gamma / 2.0));
    }
    w
}

/// `sum_{0 < |k1| <= R, k1 != k} w[|k1|^2] w[|k-k1|^2]` with `w[0] = 0`,
/// which drops `k1 = 0` and `k1 = k` without a branch.
fn truncated_convolution(dim: Dim, k: &[i32; 3], radius: i64, w: &[f64]) -> f64 {
    let r2 = radius * radius;
    let [kx, ky, kz] = k.map(|c| c as i64);
    let mut total = Compensated::default();
    for x in -radius..=radius {
        let rx = r2 - x * x;
        let by = isqrt(rx);
        let dx = (kx - x) * (kx - x);
        for y in -by..=by {
            let n1 = x * x + y * y;
            let n2 = dx + (ky - y) * (ky - y);
            match dim {
                Dim::Two => total.add(w[n1 as usize] * w[n2 as usize]),
                Dim::Three => {
                    let bz = isqrt(rx - y * y);
                    let mut line = 0.0;
                    for z in -bz..=bz {
                        let a = w[(n1 + z * z) as usize];
                        let b = w[(n2 + (kz - z) * (kz - z)) as usize];
                        line += a * b;
                    }
                    total.add(line);
                }
            }
        }
    }
    total.value()
}

fn check_gamma_exceeds_dim(dim: Dim, gamma: f64) -> Result<()> {
    if !(gamma > dim.get() as f64) {
        return Err(Error::Hypothesis(alloc::format!(
            "convolution bound needs γ > d, got γ = {gamma}, d = {dim}"
        )));
    }
    Ok(())
}

fn convolution_tail(dim: Dim, gamma: f64, knorm: f64, radius: f64) -> Result<f64> {
    // For |k1| > R >= 2|k|: |k - k1| >= |k1| (1 - |k|/R).
    Ok((radius / (radius - knorm)).powf(gamma) * lattice_tail(dim, 2.0 * gamma, radius)?)
}

/// `S(k) = sum_{0 < |k1| <= radius, k1 != k} |k1|^-γ |k - k1|^-γ` and a
/// bound on the omitted remainder.
pub fn convolution_lattice_sum(k: &Mode, gamma: f64, radius: u32) -> Result<(f64, f64)> {
    let dim = k.dim();
    check_gamma_exceeds_dim(dim, gamma)?;
    let kn = k.norm();
    if (radius as f64) < 2.0 * kn {
        return Err(Error::Parameter(alloc::format!(
            "radius {radius} is below 2|k| = {}",
            2.0 * kn
        )));
    }
    let r = radius as i64;
    let n_max: i64 = k.array().iter().map(|&c| (r + c.abs() as i64).pow(2)).sum();
    let w = weight_table(gamma, n_max);
    let value = truncated_convolution(dim, &k.array(), r, &w);
    Ok((value, convolution_tail(dim, gamma, kn, radius as f64)?))
}

/// Modes with `0 <= k_1 <= ... <= k_d`, `0 < |k| <= k_max`: one per orbit of
/// the signed permutations, which leave `S(k)` unchanged.
fn canonical_modes(dim: Dim, k_max: u32) -> Vec<Mode> {
    let m = k_max as i32;
    let m2 = (k_max as i64).pow(2);
    let mut out = Vec::new();
    match dim {
        Dim::Two => {
            for a in 0..=m {
                for b in a..=m {
                    let n = (a * a + b * b) as i64;
                    if n > 0 && n <= m2 {
                        out.push(Mode::d2(a, b).expect("nonzero"));
                    }
                }
            }
        }
        Dim::Three => {
            for a in 0..=m {
                for b in a..=m {
                    for c in b..=m {
                        let n = (a * a + b * b + c * c) as i64;
                        if n > 0 && n <= m2 {
                            out.push(Mode::d3(a, b, c).expect("nonzero"));
                        }
                    }
                }
            }
        }
    }
    out
}

/// One row of a `C_Q` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionScanEntry {
    pub mode: Mode,
    pub radius: u32,
    /// `|k|^γ S(k)` over the truncation.
    pub scaled_value: f64,
    /// `|k|^γ` times the remainder bound.
    pub scaled_tail: f64,
}

/// `|k|^γ S(k)` for every canonical `0 < |k| <= k_max`, each truncated at
/// `max(radius, ceil(2|k|))`.
pub fn convolution_scan(dim: Dim, gamma: f64, k_max: u32, radius: u32) -> Result<Vec<ConvolutionScanEntry>> {
    check_gamma_exceeds_dim(dim, gamma)?;
    let modes = canonical_modes(dim, k_max);
    let r_max = radius.max(2 * k_max) as i64;
    let n_max = dim.get() as i64 * (r_max + k_max as i64).pow(2);
    let w = weight_table(gamma, n_max);
    let mut out = Vec::with_capacity(modes.len());
    for k in modes {
        let kn = k.norm();
        let r = radius.max((2.0 * kn).ceil() as u32);
        let value = truncated_convolution(dim, &k.array(), r as i64, &w);
        let tail = convolution_tail(dim, gamma, kn, r as f64)?;
        let scale = kn.powf(gamma);
        out.push(ConvolutionScanEntry {
            mode: k,
            radius: r,
            scaled_value: scale * value,
            scaled_tail: scale * tail,
        });
    }
    Ok(out)
}

/// Scanned supremum of `|k|^γ S(k)` over `0 < |k| <= k_max`.
///
/// `value` is the largest truncated product and `tail_bound` the largest
/// scaled remainder, so `reported()` dominates `|k|^γ S(k)` on the whole
/// scan. Modes beyond `k_max` are not examined.
pub fn estimate_cq(dim: Dim, gamma: f64, k_max: u32, radius: u32) -> Result<ConstantEstimate> {
    let scan = convolution_scan(dim, gamma, k_max, radius)?;
    let mut best: Option<&ConvolutionScanEntry> = None;
    let mut tail: f64 = 0.0;
    for e in &scan {
        tail = tail.max(e.scaled_tail);
        if best.map_or(true, |b| e.scaled_value > b.scaled_value) {
            best = Some(e);
        }
    }
    let best = best.ok_or_else(|| Error::Parameter(String::from("k_max must be at least 1")))?;
    Ok(ConstantEstimate {
        name: ConstantKind::ConvolutionSup,
        dimension: dim,
        gamma,
        epsilon: None,
        value: best.scaled_value,
        truncation_radius: radius,
        tail_bound: tail,
        mode_of_supremum: Some(best.mode),
        samples: None,
        seed: None,
        note: alloc::format!(
            "supremum scanned over 0 < |k| <= {k_max}; larger |k| are not scanned"
        ),
    })
}

/// Partial sums of one case of the three-way split of `k1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaseTerms {
    /// `|sum_{k1 in case} (u_{k1}|k) ⊓_k u_{k-k1}|`
    pub partial: f64,
    /// `sum_{k1 in case} |u_{k1}| |k-k1| |u_{k-k1}|`
    pub majorant: f64,
    /// The bound the majorant is compared with for this case.
    pub stage_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstmLinEntry {
    pub mode: Mode,
    /// `|N(u)_k|`
    pub nonlinear: f64,
    pub ratio: f64,
    /// Case I `|k1| <= |k|/2`, II `|k|/2 < |k1| <= 2|k|`, III `|k1| > 2|k|`.
    /// Boundary points go to the lower case.
    pub cases: [CaseTerms; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstmLinReport {
    /// `γ - d/2`, less `ε` when `d = 2`.
    pub exponent: f64,
    pub max_ratio: f64,
    pub mode_of_max: Option<Mode>,
    pub entries: Vec<EstmLinEntry>,
}

impl EstmLinReport {
    /// Every partial sum is below its majorant and every majorant below its
    /// case bound (relative slack `1e-12`).
    pub fn stage_bounds_hold(&self) -> bool {
        self.entries.iter().all(|e| {
            e.cases.iter().all(|c| {
                c.partial <= c.majorant * (1.0 + 1e-12) + 1e-300
                    && c.majorant <= c.stage_bound * (1.0 + 1e-12) + 1e-300
            })
        })
    }
}

fn check_in_envelope(u: &SpectralField, v0: f64, d: f64, gamma: f64) -> Result<()> {
    if !(v0 > 0.0 && d > 0.0) {
        return Err(Error::Parameter(alloc::format!(
            "V0 and D must be positive, got V0 = {v0}, D = {d}"
        )));
    }
    for (i, (k, v)) in u.iter().enumerate() {
        let cap = d / k.norm().powf(gamma);
        if cvec::norm(v) > cap * (1.0 + 1e-12) {
            return Err(Error::Hypothesis(alloc::format!(
                "|u_k| = {} exceeds D/|k|^γ = {cap} at {k} (index {i})",
                cvec::norm(v)
            )));
        }
    }
    let v = u.enstrophy();
    if v > v0 * (1.0 + 1e-12) {
        return Err(Error::Hypothesis(alloc::format!(
            "enstrophy {v} exceeds V0 = {v0}"
        )));
    }
    Ok(())
}

/// Lattice data shared by every field checked against the same target.
struct StageTables {
    counts: Vec<u64>,
    zeta: ConstantEstimate,
}

impl StageTables {
    fn new(dim: Dim, gamma: f64, target: &ModeSet) -> Result<Self> {
        let k2_max = target.iter().map(Mode::norm_sq).max().unwrap_or(1);
        let radius = default_zeta_radius(dim).max((2.0 * (k2_max as f64).sqrt()).ceil() as u32 + 1);
        Ok(StageTables {
            counts: norm_counts(dim, 16 * k2_max),
            zeta: zeta_sum(dim, 2.0 * gamma - 2.0, radius)?,
        })
    }
}

/// Measures `|N(u)_k| |k|^e / (sqrt(V0) D)` at every representative of
/// `target`, with `e = γ - d/2` (`γ - 1 - ε` in two dimensions), and splits
/// each convolution into its three cases.
pub fn estmlin_bound_check(
    u: &SpectralField,
    v0: f64,
    d: f64,
    gamma: f64,
    epsilon: f64,
    target: &ModeSet,
) -> Result<EstmLinReport> {
    check_estmlin_gamma(u.dim(), gamma)?;
    let tables = StageTables::new(u.dim(), gamma, target)?;
    estmlin_with_tables(u, v0, d, gamma, epsilon, target, &tables)
}

fn check_estmlin_gamma(dim: Dim, gamma: f64) -> Result<()> {
    if !(gamma > 1.0 + dim.get() as f64 / 2.0) {
        return Err(Error::Hypothesis(alloc::format!(
            "the enstrophy-modulus bound needs γ > 1 + d/2, got {gamma}"
        )));
    }
    Ok(())
}

fn estmlin_with_tables(
    u: &SpectralField,
    v0: f64,
    d: f64,
    gamma: f64,
    epsilon: f64,
    target: &ModeSet,
    tables: &StageTables,
) -> Result<EstmLinReport> {
    let dim = u.dim();
    check_in_envelope(u, v0, d, gamma)?;
    let exponent = match dim {
        Dim::Two => gamma - 1.0 - epsilon,
        Dim::Three => gamma - 1.5,
    };
    let sv = v0.sqrt();

    let set = u.modes();
    let mut entries = Vec::new();
    let mut best: Option<(f64, Mode)> = None;
    for i in target.representatives() {
        let k = target.modes()[i];
        let kk = k.array();
        let kf = k.as_f64();
        let nk = k.norm_sq();
        let mut partial = [CompensatedVec::default(); 3];
        let mut majorant = [Compensated::default(); 3];
        for (k1, a) in u.iter() {
            let k1a = k1.array();
            let k2 = [kk[0] - k1a[0], kk[1] - k1a[1], kk[2] - k1a[2]];
            let Some(j2) = set.position_raw(&k2) else {
                continue;
            };
            let b = &u.coeffs()[j2];
            let n1 = k1.norm_sq();
            let case = if 4 * n1 <= nk {
                0
            } else if n1 <= 4 * nk {
                1
            } else {
                2
            };
            let term = cvec::leray_project(&k, &cvec::scale(b, cvec::dot_k(a, &kf)));
            partial[case].add(&term);
            let n2 = (k2[0] as f64).powi(2) + (k2[1] as f64).powi(2) + (k2[2] as f64).powi(2);
            majorant[case].add(cvec::norm(a) * n2.sqrt() * cvec::norm(b));
        }
        let total = cvec::add(&cvec::add(&partial[0].value(), &partial[1].value()), &partial[2].value());
        let nonlinear = cvec::norm(&total);

        let kn = k.norm();
        let mut inv_sq = Compensated::default();
        let mut mid_count = 0u64;
        let mut near = Compensated::default();
        for (n, &c) in tables.counts.iter().enumerate().take(4 * nk as usize + 1).skip(1) {
            let n = n as i64;
            if c == 0 {
                continue;
            }
            if 4 * n <= nk {
                inv_sq.add(c as f64 / n as f64);
            } else {
                mid_count += c;
            }
            near.add(c as f64 * (n as f64).powf(1.0 - gamma));
        }
        let far = (tables.zeta.reported() - near.value()).max(0.0);
        let stage = [
            2f64.powf(gamma - 1.0) * d / kn.powf(gamma - 1.0) * sv * inv_sq.value().sqrt(),
            2f64.powf(gamma) * d / kn.powf(gamma) * sv * (mid_count as f64).sqrt(),
            sv * d / kn * far.sqrt(),
        ];
        let cases = core::array::from_fn(|c| CaseTerms {
            partial: cvec::norm(&partial[c].value()),
            majorant: majorant[c].value(),
            stage_bound: stage[c],
        });
        let ratio = nonlinear * kn.powf(exponent) / (sv * d);
        if best.map_or(true, |(r, _)| ratio > r) {
            best = Some((ratio, k));
        }
        entries.push(EstmLinEntry {
            mode: k,
            nonlinear,
            ratio,
            cases,
        });
    }
    Ok(EstmLinReport {
        exponent,
        max_ratio: best.map_or(0.0, |(r, _)| r),
        mode_of_max: best.map(|(_, k)| k),
        entries,
    })
}

/// Monte Carlo estimate of the enstrophy-modulus constant: the largest
/// ratio over `fields` saturated fields `|u_k| = 1/|k|^γ` with random
/// directions on the ball of `radius`, each with `V0 = V(u)`.
///
/// The ratio is invariant under `u -> c u`, `D -> c D`, `V0 -> c^2 V0`, so
/// `D = 1` loses nothing.
pub fn estimate_estmlin_constant(
    dim: Dim,
    gamma: f64,
    epsilon: f64,
    radius: u32,
    fields: u64,
    seed: u64,
) -> Result<ConstantEstimate> {
    check_estmlin_gamma(dim, gamma)?;
    let modes = Arc::new(ModeSet::ball(dim, radius as f64));
    let tables = StageTables::new(dim, gamma, &modes)?;
    let mut best: Option<(f64, Mode)> = None;
    for s in 0..fields {
        let mut rng = sampling::substream(seed, s);
        let u = sampling::random_field(&modes, &mut rng, 0.0, |k| k.norm().powf(-gamma));
        let v0 = u.enstrophy();
        let report = estmlin_with_tables(&u, v0, 1.0, gamma, epsilon, &modes, &tables)?;
        if let Some(k) = report.mode_of_max {
            if best.map_or(true, |(r, _)| report.max_ratio > r) {
                best = Some((report.max_ratio, k));
            }
        }
    }
    let (value, mode) = best.ok_or_else(|| Error::Parameter(String::from("need at least one field")))?;
    Ok(ConstantEstimate {
        name: ConstantKind::EnstrophyModulus,
        dimension: dim,
        gamma,
        epsilon: (dim == Dim::Two).then_some(epsilon),
        value,
        truncation_radius: radius,
        tail_bound: 0.0,
        mode_of_supremum: Some(mode),
        samples: Some(fields),
        seed: Some(seed),
        note: String::from(
            "empirical: largest sampled ratio over saturated random fields; not a proven bound",
        ),
    })
}

/// Uniform bound on symmetrized Jacobian row sums plus `λ_k = -ν|k|^2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionD {
    pub l: f64,
    /// `|k|` at which the maximum is attained.
    pub norm_at_max: f64,
    /// Vertex `(D C(d,γ) + A D C(d,γ-1)) / 2ν` of the bracket as a parabola in `|k|`.
    pub vertex: f64,
    pub k_max: u32,
    /// True when the vertex lies inside the scanned range, so no larger `|k|` can exceed `l`.
    pub exhaustive: bool,
    pub c_gamma: ConstantEstimate,
    pub c_gamma_minus_one: ConstantEstimate,
    pub a: ConstantEstimate,
}

/// `l = max_{0 < |k| <= k_max} (D C(d,γ) + 2 D C(d,γ-1)) |k| - ν|k|^2`.
pub fn estimate_condition_d_bound(
    d: f64,
    gamma: f64,
    dim: Dim,
    nu: f64,
    k_max: u32,
    cache: &mut ZetaCache,
) -> Result<ConditionD> {
    if !(gamma > dim.get() as f64 + 1.0) {
        return Err(Error::Hypothesis(alloc::format!(
            "condition D needs γ > d + 1, got γ = {gamma}, d = {dim}"
        )));
    }
    if !(nu > 0.0) || !(d >= 0.0) || k_max == 0 {
        return Err(Error::Parameter(alloc::format!(
            "need ν > 0, D >= 0, k_max >= 1 (got {nu}, {d}, {k_max})"
        )));
    }
    let cg = cache.get(dim, gamma)?;
    let cg1 = cache.get(dim, gamma - 1.0)?;
    let a = ratio_bound(dim);
    let slope = d * cg.reported() + a.value * d * cg1.reported();
    let counts = norm_counts(dim, (k_max as i64).pow(2));
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (n, &c) in counts.iter().enumerate().skip(1) {
        if c == 0 {
            continue;
        }
        let r = (n as f64).sqrt();
        let v = slope * r - nu * r * r;
        if v > best.0 {
            best = (v, r);
        }
    }
    let vertex = slope / (2.0 * nu);
    Ok(ConditionD {
        l: best.0,
        norm_at_max: best.1,
        vertex,
        k_max,
        exhaustive: vertex <= k_max as f64,
        c_gamma: cg,
        c_gamma_minus_one: cg1,
        a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_small_cases() {
        let c = norm_counts(Dim::Two, 5);
        assert_eq!(&c[..6], &[1, 4, 4, 0, 4, 8]);
        let c = norm_counts(Dim::Three, 3);
        assert_eq!(&c[..4], &[1, 6, 12, 8]);
    }

    #[test]
    fn tail_shrinks_with_radius() {
        let a = lattice_tail(Dim::Two, 4.0, 10.0).unwrap();
        let b = lattice_tail(Dim::Two, 4.0, 20.0).unwrap();
        assert!(b < a && b > 0.0);
        assert!(lattice_tail(Dim::Three, 3.0, 10.0).is_err());
    }

    #[test]
    fn zeta_bracket_contains_known_value() {
        // sum_{k in Z^2 \ 0} |k|^-4 = 4 ζ(2) β(2) = 6.0268120396...
        let z = zeta_sum(Dim::Two, 4.0, 200).unwrap();
        assert!(z.value < 6.026812039609 && z.reported() > 6.026812039609);
        assert!(z.tail_bound < 1e-4);
    }

    #[test]
    fn convolution_sum_is_symmetric() {
        let k = Mode::d2(2, -1).unwrap();
        let a = convolution_lattice_sum(&k, 4.0, 20).unwrap();
        let b = convolution_lattice_sum(&-k, 4.0, 20).unwrap();
        assert_eq!(a, b);
        assert!(convolution_lattice_sum(&k, 2.0, 20).is_err());
        assert!(convolution_lattice_sum(&k, 4.0, 3).is_err());
    }

    #[test]
    fn condition_d_monotone_in_nu() {
        let mut cache = ZetaCache::new();
        let a = estimate_condition_d_bound(1.0, 4.0, Dim::Two, 1.0, 50, &mut cache).unwrap();
        let b = estimate_condition_d_bound(1.0, 4.0, Dim::Two, 2.0, 50, &mut cache).unwrap();
        assert!(b.l < a.l);
        assert!(estimate_condition_d_bound(1.0, 3.0, Dim::Two, 1.0, 50, &mut cache).is_err());
    }
}
