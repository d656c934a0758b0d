//! One function per subcommand. Each returns what the manifest records.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use galerkin_core::flow::{
    condition_d_bound, galerkin_difference_experiment, integrate, lognorm_bounds, IntegratorConfig, LogNormBound,
    Scheme, Trajectory,
};
use galerkin_core::lattice::{
    estimate_condition_d_bound, estimate_cq, estimate_estmlin_constant, zeta_sum, ConditionD, ConstantEstimate,
    ZetaCache,
};
use galerkin_core::trapping::{check_conditions, check_region_conditions, Certificate, Certifier, TrapRegion, Verdict};
use galerkin_core::{Dim, ForceField, ModeSet, PhysicsParams, SpectralField};
use rayon::prelude::*;

use crate::cli::{
    CertifyArgs, CheckConditionsArgs, Command, ConstantArg, ConstantsArgs, ConvergeArgs, LognormArgs, SchemeArg,
    SimulateArgs,
};
use crate::fields::{load_force, load_init, parse_generator};
use crate::recipe::{load_region, RegionFile};

/// What a finished command reports back to the runner.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// False only for a failed certificate.
    pub passed: bool,
    pub seed: Option<u64>,
    pub constants: Vec<ConstantEstimate>,
    pub outputs: Vec<PathBuf>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            seed: None,
            constants: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

pub fn dispatch(command: &Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Certify(a) => certify(a),
        Command::Constants(a) => constants(a),
        Command::Converge(a) => converge(a),
        Command::Lognorm(a) => lognorm(a),
        Command::CheckConditions(a) => check(a),
        Command::Replay(_) => bail!("a manifest cannot record a replay"),
    }
}

/// Writes `text` to `out`, or to stdout when there is no path.
fn emit(out: Option<&Path>, text: &str, outcome: &mut Outcome) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| path.display().to_string())?;
            outcome.outputs.push(path.to_path_buf());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn force_or_zero(path: Option<&Path>, symmetrize: bool, dim: Dim) -> anyhow::Result<ForceField> {
    let Some(path) = path else {
        return Ok(ForceField::zero(dim));
    };
    let f = load_force(path, symmetrize).with_context(|| format!("loading force {}", path.display()))?;
    if f.dim() != dim {
        bail!("force is {}-dimensional, expected {dim}", f.dim());
    }
    Ok(f)
}

fn init_field(source: &str, symmetrize: bool, radius: Option<f64>) -> anyhow::Result<(SpectralField, Option<u64>)> {
    let u = load_init(source, symmetrize).with_context(|| format!("loading initial field {source:?}"))?;
    let seed = parse_generator(source).ok().map(|g| g.seed);
    let u = match radius {
        Some(r) => u.project(&Arc::new(ModeSet::ball(u.dim(), r))),
        None => u,
    };
    Ok((u, seed))
}

fn region_dim(file: &RegionFile) -> Dim {
    match file {
        RegionFile::Recipe(r) => r.dim(),
        RegionFile::Built(r) => r.dim(),
    }
}

/// Loads a region and, for recipes, builds it against `f`.
pub fn resolve_region(file: RegionFile, f: &ForceField, margin: Option<f64>) -> anyhow::Result<TrapRegion> {
    match file {
        RegionFile::Recipe(mut r) => {
            if let Some(m) = margin {
                r.margin = m;
            }
            r.build(f).context("building region")
        }
        RegionFile::Built(r) => {
            if margin.is_some() {
                bail!("--margin only applies to region recipes");
            }
            Ok(r)
        }
    }
}

fn scheme(s: SchemeArg) -> Scheme {
    match s {
        SchemeArg::Rk4If => Scheme::Rk4IntegratingFactor,
        SchemeArg::Rk4 => Scheme::Rk4Plain,
    }
}

/// `time`, then `re`/`im` of every component of every representative mode,
/// then `enstrophy`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let set = traj.modes();
    let d = set.dim().get();
    let reps: Vec<usize> = set.representatives().collect();
    let axes = ["x", "y", "z"];
    let mut out = String::from("time");
    for &i in &reps {
        let k = set.modes()[i].components().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
        for axis in &axes[..d] {
            let _ = write!(out, ",u({k}).{axis}.re,u({k}).{axis}.im");
        }
    }
    out.push_str(",enstrophy\n");
    for ((t, u), v) in traj.times.iter().zip(&traj.states).zip(&traj.enstrophy) {
        let _ = write!(out, "{t:?}");
        for &i in &reps {
            for c in &u.coeffs()[i][..d] {
                let _ = write!(out, ",{:?},{:?}", c.re, c.im);
            }
        }
        let _ = writeln!(out, ",{v:?}");
    }
    out
}

fn simulate(a: &SimulateArgs) -> anyhow::Result<Outcome> {
    let (u, seed) = init_field(&a.init, a.symmetrize, a.radius)?;
    let f = force_or_zero(a.force.as_deref(), a.symmetrize, u.dim())?;
    let p = PhysicsParams::new(a.nu, u.dim())?;
    let cfg = IntegratorConfig::new(a.h, a.t_end)
        .with_stride(a.stride)
        .with_scheme(scheme(a.scheme));
    let traj = integrate(&u, &f, &p, &cfg)?;
    let mut outcome = Outcome::new();
    outcome.seed = seed;
    emit(Some(&a.out), &trajectory_csv(&traj), &mut outcome)?;
    Ok(outcome)
}

/// Runs every task of `certifier` on the current rayon pool.
pub fn certify_parallel(certifier: &Certifier) -> galerkin_core::Result<Certificate> {
    let outcomes = (0..certifier.tasks())
        .into_par_iter()
        .map(|i| certifier.run_task(i))
        .collect::<galerkin_core::Result<Vec<_>>>()?;
    certifier.assemble(&outcomes)
}

fn certify(a: &CertifyArgs) -> anyhow::Result<Outcome> {
    let file = load_region(&a.region)?;
    let dim = region_dim(&file);
    let f = force_or_zero(a.force.as_deref(), false, dim)?;
    let region = resolve_region(file, &f, a.margin)?;
    let p = PhysicsParams::new(region.nu(), dim)?;
    let projection = Arc::new(ModeSet::ball(dim, a.proj_radius));
    let certifier = if a.unchecked {
        Certifier::unchecked(&region, &projection, &f, &p, a.samples, a.seed)?
    } else {
        Certifier::new(&region, &projection, &f, &p, a.samples, a.seed)?
    };
    let cert = certify_parallel(&certifier)?;
    let mut outcome = Outcome::new();
    outcome.passed = cert.verdict == Verdict::Pass;
    outcome.seed = Some(a.seed);
    outcome.constants = cert.constants_used.clone();
    emit(a.out.as_deref(), &json(&cert)?, &mut outcome)?;
    if !outcome.passed {
        eprintln!(
            "certification failed: margin {:e} on {:?} at t = {}",
            cert.worst_margin, cert.worst_facet, cert.worst_time
        );
    }
    Ok(outcome)
}

fn estimate(a: &ConstantsArgs, dim: Dim, gamma: f64) -> galerkin_core::Result<ConstantEstimate> {
    match a.kind {
        ConstantArg::CQ => estimate_cq(dim, gamma, a.kmax, a.radius),
        ConstantArg::EstmLin => estimate_estmlin_constant(dim, gamma, a.epsilon, a.radius, a.fields, a.seed),
        ConstantArg::Zeta => zeta_sum(dim, gamma, a.radius),
    }
}

fn constants(a: &ConstantsArgs) -> anyhow::Result<Outcome> {
    let dim = Dim::try_from(a.d)?;
    let mut outcome = Outcome::new();
    if a.kind == ConstantArg::EstmLin {
        outcome.seed = Some(a.seed);
    }
    let text = if a.table {
        let rows = a
            .gammas
            .par_iter()
            .map(|&g| estimate(a, dim, g))
            .collect::<galerkin_core::Result<Vec<_>>>()?;
        let mut text = format!("{:>8} {:>22} {:>12} {:>22} {:>12}\n", "gamma", "value", "tail", "reported", "sup at");
        for e in &rows {
            let at = e.mode_of_supremum.map_or_else(|| "-".to_string(), |k| k.to_string());
            let _ = writeln!(
                text,
                "{:>8} {:>22.15e} {:>12.3e} {:>22.15e} {:>12}",
                e.gamma,
                e.value,
                e.tail_bound,
                e.reported(),
                at
            );
        }
        outcome.constants = rows;
        text
    } else {
        let e = estimate(a, dim, a.gamma)?;
        let text = json(&e)?;
        outcome.constants.push(e);
        text
    };
    emit(a.out.as_deref(), &text, &mut outcome)?;
    Ok(outcome)
}

fn condition_d(region: &TrapRegion, kmax: u32) -> galerkin_core::Result<ConditionD> {
    estimate_condition_d_bound(region.d(), region.gamma(), region.dim(), region.nu(), kmax, &mut ZetaCache::new())
}

fn condition_d_constants(cd: &ConditionD) -> Vec<ConstantEstimate> {
    vec![cd.c_gamma.clone(), cd.c_gamma_minus_one.clone(), cd.a.clone()]
}

fn converge(a: &ConvergeArgs) -> anyhow::Result<Outcome> {
    let (u, seed) = init_field(&a.init, a.symmetrize, None)?;
    let dim = u.dim();
    let big = Arc::new(ModeSet::ball(dim, a.m));
    let u0 = u.project(&big);
    let f = force_or_zero(a.force.as_deref(), a.symmetrize, dim)?;
    let p = PhysicsParams::new(a.nu, dim)?;
    let mut outcome = Outcome::new();
    outcome.seed = seed;
    let l = match (a.l, &a.region) {
        (Some(l), _) => l,
        (None, Some(path)) => {
            let region = resolve_region(load_region(path)?, &f, None)?;
            if region.nu() != a.nu || region.dim() != dim {
                bail!("region was built for ν = {}, d = {}", region.nu(), region.dim());
            }
            let cd = condition_d(&region, a.kmax)?;
            outcome.constants = region.constants();
            outcome.constants.extend(condition_d_constants(&cd));
            cd.l
        }
        (None, None) => bail!("converge needs --l or --region to fix the log-norm bound"),
    };
    let cfg = IntegratorConfig::new(a.h, a.t_end).with_stride(a.stride);
    let reports = a
        .ladder
        .par_iter()
        .map(|&n| galerkin_difference_experiment(&u0, &f, &p, &cfg, &Arc::new(ModeSet::ball(dim, n)), &big, l))
        .collect::<galerkin_core::Result<Vec<_>>>()?;
    let mut text = String::from("n,delta_n,rho,min_slack,max_slack,holds\n");
    for (n, r) in a.ladder.iter().zip(&reports) {
        let max_slack = r.rhs.iter().zip(&r.lhs).map(|(b, x)| b - x).fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(text, "{n:?},{:?},{:?},{:?},{max_slack:?},{}", r.delta, r.rho, r.min_slack, r.holds);
    }
    emit(Some(&a.out), &text, &mut outcome)?;
    Ok(outcome)
}

fn lognorm(a: &LognormArgs) -> anyhow::Result<Outcome> {
    let (u, seed) = init_field(&a.init, a.symmetrize, a.radius)?;
    let p = PhysicsParams::new(a.nu, u.dim())?;
    let mut outcome = Outcome::new();
    outcome.seed = seed;
    let mut bounds: Vec<LogNormBound> = lognorm_bounds(&u, &p, "the given state").into();
    if let Some(path) = &a.region {
        let file = load_region(path)?;
        let f = force_or_zero(a.force.as_deref(), a.symmetrize, region_dim(&file))?;
        let region = resolve_region(file, &f, None)?;
        if region.dim() != u.dim() {
            bail!("region is {}-dimensional, state is {}-dimensional", region.dim(), u.dim());
        }
        let cd = condition_d(&region, a.kmax)?;
        outcome.constants = condition_d_constants(&cd);
        bounds.push(condition_d_bound(u.modes(), cd.l, "every state of the region's power-law envelope"));
    }
    emit(a.out.as_deref(), &json(&bounds)?, &mut outcome)?;
    Ok(outcome)
}

fn check(a: &CheckConditionsArgs) -> anyhow::Result<Outcome> {
    let report = match &a.region {
        Some(path) => {
            let file = load_region(path)?;
            let f = force_or_zero(a.force.as_deref(), false, region_dim(&file))?;
            check_region_conditions(&resolve_region(file, &f, None)?)?
        }
        None => {
            let (Some(gamma), Some(amp)) = (a.gamma, a.amp) else {
                bail!("check-conditions needs --region or both --gamma and --amp");
            };
            check_conditions(gamma, amp, Dim::try_from(a.d)?)?
        }
    };
    let mut outcome = Outcome::new();
    emit(a.out.as_deref(), &json(&report)?, &mut outcome)?;
    Ok(outcome)
}
