//! Boundary sampling: draw states on each facet of a region and check that
//! the Galerkin vector field points strictly inward there.
//!
//! Sampling is evidence, not proof. Certificates carry the seed, the sample
//! count and the constants the region was built from.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is in the build graph
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::ConstantEstimate;
use crate::sampling::{self, Stream};
use crate::spectral::cvec;
use crate::spectral::{
    enstrophy_rate, nonlinear_at, rhs_at, rhs_with_plan, ConvolutionPlan, Dim, ForceField, Mode, ModeSet,
    PhysicsParams, Shape, SpectralField,
};
use crate::trapping::region::{EnvelopeKind, TrapRegion};

/// A piece of a region's boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "facet", rename_all = "snake_case"))]
pub enum Facet {
    /// `V(u) = V0`
    Enstrophy,
    /// `|u_k|` equal to the binding envelope at `k`.
    Modulus { mode: Mode },
}

/// A facet together with the reason it was not sampled.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkippedFacet {
    pub facet: Facet,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProjectionInfo {
    pub dimension: Dim,
    pub shape: Shape,
    pub modes: usize,
}

impl ProjectionInfo {
    pub fn of(set: &ModeSet) -> Self {
        ProjectionInfo {
            dimension: set.dim(),
            shape: set.shape(),
            modes: set.len(),
        }
    }
}

/// Result of one sampled boundary state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleOutcome {
    pub facet: Facet,
    pub facet_index: usize,
    pub sample: u64,
    pub time: f64,
    /// Outward rate: `dV/dt` on the enstrophy facet,
    /// `d|u_k|/dt - envelope'(t)` on a modulus facet.
    pub margin: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub envelope: Option<EnvelopeKind>,
    pub digest: u64,
}

impl SampleOutcome {
    /// Larger margin first, then smaller digest, facet and sample index.
    fn worse_than(&self, other: &SampleOutcome) -> bool {
        match self.margin.total_cmp(&other.margin) {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => {
                (self.digest, self.facet_index, self.sample)
                    < (other.digest, other.facet_index, other.sample)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub region: TrapRegion,
    pub projection: ProjectionInfo,
    /// Samples per facet.
    pub samples: u64,
    pub seed: u64,
    pub facets_checked: usize,
    pub facets_skipped: Vec<SkippedFacet>,
    pub evaluations: u64,
    pub worst_margin: f64,
    pub worst_state_digest: u64,
    pub worst_facet: Facet,
    #[cfg_attr(feature = "serde", serde(default))]
    pub worst_envelope: Option<EnvelopeKind>,
    pub worst_time: f64,
    pub constants_used: Vec<ConstantEstimate>,
    pub verdict: Verdict,
    pub note: String,
}

/// Facet enumeration plus everything needed to evaluate one sample.
#[derive(Debug, Clone)]
pub struct Certifier {
    region: TrapRegion,
    projection: Arc<ModeSet>,
    plan: Option<ConvolutionPlan>,
    force: ForceField,
    params: PhysicsParams,
    samples: u64,
    seed: u64,
    facets: Vec<Facet>,
    skipped: Vec<SkippedFacet>,
    hypotheses_checked: bool,
}

impl Certifier {
    pub fn new(
        region: &TrapRegion,
        projection: &Arc<ModeSet>,
        f: &ForceField,
        p: &PhysicsParams,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        region.validate(f, p)?;
        Self::build(region, projection, f, p, samples, seed, true)
    }

    /// Like [`Certifier::new`] but accepts regions that violate their
    /// construction inequalities, e.g. to confirm that such regions fail.
    pub fn unchecked(
        region: &TrapRegion,
        projection: &Arc<ModeSet>,
        f: &ForceField,
        p: &PhysicsParams,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        Self::build(region, projection, f, p, samples, seed, false)
    }

    fn build(
        region: &TrapRegion,
        projection: &Arc<ModeSet>,
        f: &ForceField,
        p: &PhysicsParams,
        samples: u64,
        seed: u64,
        hypotheses_checked: bool,
    ) -> Result<Self> {
        if projection.dim() != region.dim() {
            return Err(Error::DimensionMismatch {
                expected: region.dim().get(),
                found: projection.dim().get(),
            });
        }
        if samples == 0 {
            return Err(Error::Parameter(String::from("need at least one sample per facet")));
        }
        let mut facets = Vec::new();
        let mut skipped = Vec::new();
        if region.v0().is_some() {
            let free = projection
                .representatives()
                .any(|i| region.binding_envelope(&projection.modes()[i], 0.0).is_none());
            if free {
                facets.push(Facet::Enstrophy);
            } else {
                skipped.push(SkippedFacet {
                    facet: Facet::Enstrophy,
                    reason: String::from("every projected mode carries an envelope"),
                });
            }
        }
        for i in projection.representatives() {
            let k = projection.modes()[i];
            let Some(env) = region.binding_envelope(&k, 0.0) else {
                continue;
            };
            let facet = Facet::Modulus { mode: k };
            match region.v0() {
                // The pair alone would already exceed the enstrophy bound.
                Some(v0) if 2.0 * k.norm_sq() as f64 * env.value * env.value > v0 => {
                    skipped.push(SkippedFacet {
                        facet,
                        reason: String::from("unreachable inside the enstrophy ball"),
                    });
                }
                _ => facets.push(facet),
            }
        }
        if facets.is_empty() {
            return Err(Error::Parameter(String::from("the projection meets no facet of the region")));
        }
        let plan = region.v0().map(|_| ConvolutionPlan::galerkin(projection));
        Ok(Certifier {
            region: region.clone(),
            projection: Arc::clone(projection),
            plan,
            force: f.clone(),
            params: *p,
            samples,
            seed,
            facets,
            skipped,
            hypotheses_checked,
        })
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn skipped(&self) -> &[SkippedFacet] {
        &self.skipped
    }

    /// Number of independent sample tasks.
    pub fn tasks(&self) -> u64 {
        self.facets.len() as u64 * self.samples
    }

    fn sample_time(&self, rng: &mut Stream) -> f64 {
        match self.region.horizon() {
            Some(t0) => t0 * rng.random::<f64>(),
            None => 0.0,
        }
    }

    /// Random state inside the region at time `t`; moduli are drawn as
    /// `cap · U^{1/4}`, which favours states near the boundary.
    fn interior_state(&self, rng: &mut Stream, t: f64) -> SpectralField {
        random_state(&self.region, &self.projection, rng, t, 0.25)
    }

    /// Zero except on one random pair of modes `k1`, `k - k1` of the
    /// projection, both saturated; these states push hardest on `k`.
    fn triad_state(&self, rng: &mut Stream, k: &Mode, t: f64) -> SpectralField {
        let set = &self.projection;
        let ka = k.array();
        let partners: Vec<usize> = (0..set.len())
            .filter(|&j| {
                let a = set.modes()[j].array();
                let rest = [ka[0] - a[0], ka[1] - a[1], ka[2] - a[2]];
                rest != ka && rest != [0; 3] && set.position_raw(&rest).is_some()
                    && rest != [-ka[0], -ka[1], -ka[2]]
            })
            .collect();
        let full = random_state(&self.region, set, rng, t, 0.0);
        let mut u = SpectralField::zeros(Arc::clone(set));
        if partners.is_empty() {
            return u;
        }
        let j = partners[rng.random_range(0..partners.len())];
        let a = set.modes()[j].array();
        let l = set.position_raw(&[ka[0] - a[0], ka[1] - a[1], ka[2] - a[2]]).expect("partner in set");
        for m in [j, l] {
            u.coeffs_mut()[m] = full.coeffs()[m];
            u.coeffs_mut()[set.negation(m)] = full.coeffs()[set.negation(m)];
        }
        u
    }

    /// Evaluates task `index` (`facet * samples + sample`). Odd samples on a
    /// modulus facet start from a single-triad state instead of a full one.
    pub fn run_task(&self, index: u64) -> Result<SampleOutcome> {
        let facet_index = (index / self.samples) as usize;
        let sample = index % self.samples;
        let facet = self.facets[facet_index];
        let mut rng = sampling::substream(self.seed, index);
        let t = self.sample_time(&mut rng);
        let mut u = self.interior_state(&mut rng, t);
        let set = Arc::clone(&self.projection);
        let (margin, envelope) = match facet {
            Facet::Enstrophy => {
                let v0 = self.region.v0().expect("enstrophy facet implies V0");
                saturate_enstrophy(&mut u, &self.region, v0, t);
                let plan = self.plan.as_ref().expect("plan built when V0 exists");
                let r = rhs_with_plan(plan, &u, &self.force, &self.params);
                (enstrophy_rate(&u, &r), None)
            }
            Facet::Modulus { mode } => {
                let env = self
                    .region
                    .binding_envelope(&mode, t)
                    .expect("modulus facets carry an envelope");
                let i = set.position(&mode).expect("facet mode in projection");
                if sample % 2 == 1 {
                    u = self.triad_state(&mut rng, &mode, t);
                }
                let v = cvec::scale_re(&sampling::unit_perp(&mode, &mut rng), env.value);
                u.coeffs_mut()[i] = v;
                u.coeffs_mut()[set.negation(i)] = cvec::conj(&v);
                if let Some(v0) = self.region.v0() {
                    fit_enstrophy_around(&mut u, i, v0);
                }
                // N_k does not involve u_{±k}, so the most outward point of
                // the facet points u_k along N_k + ⊓f_k.
                let push = cvec::add(&nonlinear_at(&u, &mode), &self.force.projected(&mode));
                let len = cvec::norm(&push);
                if len > 0.0 {
                    let v = cvec::scale_re(&push, env.value / len);
                    u.coeffs_mut()[i] = v;
                    u.coeffs_mut()[set.negation(i)] = cvec::conj(&v);
                }
                let m = cvec::norm(&u.coeffs()[i]);
                if m == 0.0 {
                    return Err(Error::DegenerateFacet(mode));
                }
                let r = rhs_at(&u, &self.force, &self.params, &mode);
                (cvec::inner(&u.coeffs()[i], &r).re / m - env.rate, Some(env.kind))
            }
        };
        Ok(SampleOutcome {
            facet,
            facet_index,
            sample,
            time: t,
            margin,
            envelope,
            digest: u.digest(),
        })
    }

    /// Deterministic reduction of any permutation of all task outcomes.
    pub fn assemble(&self, outcomes: &[SampleOutcome]) -> Result<Certificate> {
        let worst = outcomes
            .iter()
            .fold(None::<&SampleOutcome>, |w, o| match w {
                Some(w) if !o.worse_than(w) => Some(w),
                _ => Some(o),
            })
            .ok_or_else(|| Error::Parameter(String::from("no outcomes to assemble")))?;
        let mut note = String::from(
            "verdict from pseudo-random boundary samples; a pass is evidence, not a proof",
        );
        if !self.hypotheses_checked {
            note.push_str("; region construction inequalities were not checked");
        }
        if matches!(self.region, TrapRegion::Poly(_) | TrapRegion::Exp(_) | TrapRegion::TimeExp(_)) {
            note.push_str("; the enstrophy-modulus constant is a sampled estimate");
        }
        Ok(Certificate {
            region: self.region.clone(),
            projection: ProjectionInfo::of(&self.projection),
            samples: self.samples,
            seed: self.seed,
            facets_checked: self.facets.len(),
            facets_skipped: self.skipped.clone(),
            evaluations: outcomes.len() as u64,
            worst_margin: worst.margin,
            worst_state_digest: worst.digest,
            worst_facet: worst.facet,
            worst_envelope: worst.envelope,
            worst_time: worst.time,
            constants_used: self.region.constants(),
            verdict: if worst.margin < 0.0 {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            note,
        })
    }
}

/// Moduli `cap · U^power` with random admissible directions, where `cap`
/// is the binding envelope or `sqrt(V0/2)/|k|` on modes without one.
fn random_state(
    region: &TrapRegion,
    projection: &Arc<ModeSet>,
    rng: &mut Stream,
    t: f64,
    power: f64,
) -> SpectralField {
    let v0 = region.v0();
    sampling::random_field(projection, rng, power, |k| match region.binding_envelope(k, t) {
        Some(env) => env.value,
        None => (v0.unwrap_or(0.0) / 2.0).sqrt() / k.norm(),
    })
}

/// A state strictly inside `region` at time `t`: a random state scaled by
/// `fill`, shrunk further if its enstrophy exceeds `fill · V0`.
pub fn sample_interior(
    region: &TrapRegion,
    projection: &Arc<ModeSet>,
    rng: &mut Stream,
    t: f64,
    fill: f64,
) -> Result<SpectralField> {
    if !(fill > 0.0 && fill < 1.0) {
        return Err(Error::Parameter(alloc::format!("fill must lie in (0, 1), got {fill}")));
    }
    let mut u = random_state(region, projection, rng, t, 0.5).scaled(fill);
    if let Some(v0) = region.v0() {
        let v = u.enstrophy();
        if v > fill * v0 {
            u = u.scaled((fill * v0 / v).sqrt());
        }
    }
    Ok(u)
}

/// Scales the modes without an envelope so that `V(u) = V0` exactly.
fn saturate_enstrophy(u: &mut SpectralField, region: &TrapRegion, v0: f64, t: f64) {
    let set = Arc::clone(u.modes());
    let free: Vec<bool> = set
        .iter()
        .map(|k| region.binding_envelope(k, t).is_none())
        .collect();
    let part = |u: &SpectralField, want: bool| -> f64 {
        u.iter()
            .zip(&free)
            .filter(|(_, f)| **f == want)
            .map(|((k, v), _)| k.norm_sq() as f64 * cvec::norm_sq(v))
            .sum()
    };
    let mut v_env = part(u, false);
    if v_env >= v0 {
        let s = (0.5 * v0 / v_env).sqrt();
        for (c, f) in u.coeffs_mut().iter_mut().zip(&free) {
            if !*f {
                *c = cvec::scale_re(c, s);
            }
        }
        v_env = part(u, false);
    }
    let v_free = part(u, true);
    if v_free > 0.0 {
        let s = ((v0 - v_env) / v_free).sqrt();
        for (c, f) in u.coeffs_mut().iter_mut().zip(&free) {
            if *f {
                *c = cvec::scale_re(c, s);
            }
        }
    }
}

/// Shrinks every mode other than the pair at `i` until `V(u) <= V0`.
fn fit_enstrophy_around(u: &mut SpectralField, i: usize, v0: f64) {
    let set = Arc::clone(u.modes());
    let j = set.negation(i);
    let v_pair = 2.0 * set.modes()[i].norm_sq() as f64 * cvec::norm_sq(&u.coeffs()[i]);
    let v_rest = u.enstrophy() - v_pair;
    let budget = v0 - v_pair;
    if v_rest > budget && v_rest > 0.0 {
        let s = (budget.max(0.0) / v_rest).sqrt();
        for (n, c) in u.coeffs_mut().iter_mut().enumerate() {
            if n != i && n != j {
                *c = cvec::scale_re(c, s);
            }
        }
    }
}

/// Sequential certification over every facet and sample.
pub fn certify_inward(
    region: &TrapRegion,
    projection: &Arc<ModeSet>,
    f: &ForceField,
    p: &PhysicsParams,
    samples: u64,
    seed: u64,
) -> Result<Certificate> {
    let c = Certifier::new(region, projection, f, p, samples, seed)?;
    let outcomes = (0..c.tasks()).map(|i| c.run_task(i)).collect::<Result<Vec<_>>>()?;
    c.assemble(&outcomes)
}
