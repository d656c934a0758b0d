//! Field files: JSON `{dimension, modes: [[k], [re], [im]]}` and a flat CSV
//! with one row per mode and velocity component.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use clap::Parser;
use galerkin_core::sampling::{random_in_envelope, substream};
use galerkin_core::spectral::cvec::{self, CVec, ZERO};
use galerkin_core::{Dim, ForceField, Mode, ModeSet, SpectralField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON field: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV field: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed field: {0}")]
    Schema(String),
    #[error("mode {0} is present but its conjugate is missing (use --symmetrize to complete it)")]
    MissingConjugate(Mode),
    #[error("mode {0} is listed twice")]
    Duplicate(Mode),
    #[error("rejected field: {0}")]
    Invalid(#[from] galerkin_core::Error),
    #[error("bad generator: {0}")]
    Generator(String),
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;

#[derive(Debug, Serialize, Deserialize)]
struct FieldJson {
    dimension: usize,
    modes: Vec<(Vec<i32>, Vec<f64>, Vec<f64>)>,
}

/// Raw coefficients as read from a file, before any invariant checks.
#[derive(Debug, Clone)]
struct Entries {
    dim: Dim,
    coeffs: Vec<(Mode, CVec)>,
}

impl Entries {
    /// Mode set and coefficient vector, completing conjugates when asked.
    fn assemble(self, symmetrize: bool) -> Result<(Arc<ModeSet>, Vec<CVec>)> {
        let mut seen = std::collections::BTreeMap::new();
        for (k, v) in &self.coeffs {
            if seen.insert(*k, *v).is_some() {
                return Err(FieldError::Duplicate(*k));
            }
        }
        for (k, v) in &self.coeffs {
            if !seen.contains_key(&-*k) {
                if !symmetrize {
                    return Err(FieldError::MissingConjugate(*k));
                }
                seen.insert(-*k, cvec::conj(v));
            }
        }
        let set = Arc::new(ModeSet::from_modes(self.dim, seen.keys().copied())?);
        let coeffs = set.iter().map(|k| seen[k]).collect();
        Ok((set, coeffs))
    }

    fn into_field(self, symmetrize: bool) -> Result<SpectralField> {
        let (set, coeffs) = self.assemble(symmetrize)?;
        Ok(SpectralField::new(set, coeffs)?)
    }

    fn into_force(self, symmetrize: bool) -> Result<ForceField> {
        let (set, coeffs) = self.assemble(symmetrize)?;
        Ok(ForceField::new(set, coeffs)?)
    }
}

fn dim_of(d: usize) -> Result<Dim> {
    Dim::try_from(d).map_err(FieldError::Invalid)
}

fn mode_of(dim: Dim, k: &[i32]) -> Result<Mode> {
    if k.len() != dim.get() {
        return Err(FieldError::Schema(format!("wave vector {k:?} has {} components, expected {dim}", k.len())));
    }
    Ok(Mode::new(dim, k)?)
}

fn vector_of(dim: Dim, re: &[f64], im: &[f64]) -> Result<CVec> {
    if re.len() != dim.get() || im.len() != dim.get() {
        return Err(FieldError::Schema(format!(
            "coefficient needs {dim} real and {dim} imaginary parts, got {} and {}",
            re.len(),
            im.len()
        )));
    }
    let mut v = ZERO;
    for j in 0..dim.get() {
        v[j] = Complex64::new(re[j], im[j]);
    }
    Ok(v)
}

fn entries_from_json(text: &str) -> Result<Entries> {
    let raw: FieldJson = serde_json::from_str(text)?;
    let dim = dim_of(raw.dimension)?;
    let coeffs = raw
        .modes
        .iter()
        .map(|(k, re, im)| Ok((mode_of(dim, k)?, vector_of(dim, re, im)?)))
        .collect::<Result<_>>()?;
    Ok(Entries { dim, coeffs })
}

fn entries_from_csv(text: &str) -> Result<Entries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let dim = match headers.len() {
        5 => Dim::Two,
        6 => Dim::Three,
        n => return Err(FieldError::Schema(format!("expected 5 or 6 columns, found {n}"))),
    };
    let d = dim.get();
    let mut coeffs: Vec<(Mode, CVec)> = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |what: &str| FieldError::Schema(format!("row {}: bad {what}", line + 2));
        let k: Vec<i32> = (0..d)
            .map(|j| row[j].parse().map_err(|_| bad("wave vector")))
            .collect::<Result<_>>()?;
        let k = mode_of(dim, &k)?;
        let c: usize = row[d].parse().map_err(|_| bad("component index"))?;
        if c >= d {
            return Err(bad("component index"));
        }
        let re: f64 = row[d + 1].parse().map_err(|_| bad("real part"))?;
        let im: f64 = row[d + 2].parse().map_err(|_| bad("imaginary part"))?;
        let slot = match coeffs.last_mut() {
            Some((last, v)) if *last == k => v,
            _ => {
                if coeffs.iter().any(|(m, _)| *m == k) {
                    return Err(FieldError::Schema(format!("rows for mode {k} are not contiguous")));
                }
                coeffs.push((k, ZERO));
                &mut coeffs.last_mut().expect("just pushed").1
            }
        };
        slot[c] = Complex64::new(re, im);
    }
    Ok(Entries { dim, coeffs })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FieldError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn entries_from_path(path: &Path) -> Result<Entries> {
    let text = read(path)?;
    if is_csv(path) {
        entries_from_csv(&text)
    } else {
        entries_from_json(&text)
    }
}

pub fn field_from_json(text: &str, symmetrize: bool) -> Result<SpectralField> {
    entries_from_json(text)?.into_field(symmetrize)
}

pub fn field_from_csv(text: &str, symmetrize: bool) -> Result<SpectralField> {
    entries_from_csv(text)?.into_field(symmetrize)
}

/// Reads a velocity field; `.csv` files use the flat form, anything else JSON.
pub fn load_field(path: &Path, symmetrize: bool) -> Result<SpectralField> {
    entries_from_path(path)?.into_field(symmetrize)
}

/// Same schema as a velocity field, but incompressibility is not required.
pub fn load_force(path: &Path, symmetrize: bool) -> Result<ForceField> {
    entries_from_path(path)?.into_force(symmetrize)
}

pub fn field_to_json(u: &SpectralField) -> String {
    let d = u.dim().get();
    let raw = FieldJson {
        dimension: d,
        modes: u
            .iter()
            .map(|(k, v)| {
                (
                    k.components().to_vec(),
                    v[..d].iter().map(|c| c.re).collect(),
                    v[..d].iter().map(|c| c.im).collect(),
                )
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("field JSON is always serializable")
}

pub fn field_to_csv(u: &SpectralField) -> String {
    let d = u.dim().get();
    let mut out = String::new();
    let axes = ["k1", "k2", "k3"];
    out.push_str(&axes[..d].join(","));
    out.push_str(",component,re,im\n");
    for (k, v) in u.iter() {
        for (j, c) in v[..d].iter().enumerate() {
            for x in k.components() {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{j},{:?},{:?}\n", c.re, c.im));
        }
    }
    out
}

pub fn save_field(path: &Path, u: &SpectralField) -> std::io::Result<()> {
    let text = if is_csv(path) { field_to_csv(u) } else { field_to_json(u) };
    fs::write(path, text)
}

/// Power-law envelope `D/|k|^γ`, written `D=1,gamma=4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeArg {
    pub d: f64,
    pub gamma: f64,
}

impl std::str::FromStr for EnvelopeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (mut d, mut gamma) = (None, None);
        for part in s.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let value: f64 = value.trim().parse().map_err(|_| format!("{key} is not a number"))?;
            match key.trim() {
                "D" | "d" => d = Some(value),
                "gamma" => gamma = Some(value),
                other => return Err(format!("unknown envelope key {other:?}")),
            }
        }
        Ok(EnvelopeArg {
            d: d.ok_or("envelope needs D")?,
            gamma: gamma.ok_or("envelope needs gamma")?,
        })
    }
}

/// `random --radius R --envelope D=..,gamma=.. [--seed S] [--dim 2|3]`
#[derive(Debug, Clone, Parser)]
#[command(name = "random")]
pub struct RandomGenerator {
    #[arg(long)]
    pub radius: f64,
    #[arg(long)]
    pub envelope: EnvelopeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

impl RandomGenerator {
    pub fn generate(&self) -> Result<SpectralField> {
        let dim = dim_of(self.dim)?;
        let set = Arc::new(ModeSet::ball(dim, self.radius));
        if set.is_empty() {
            return Err(FieldError::Generator(format!("ball of radius {} holds no modes", self.radius)));
        }
        let EnvelopeArg { d, gamma } = self.envelope;
        Ok(random_in_envelope(&set, &mut substream(self.seed, 0), d, gamma))
    }
}

/// Parses a generator string such as `random --radius 6 --envelope D=1,gamma=4 --seed 7`.
pub fn parse_generator(text: &str) -> Result<RandomGenerator> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    match tokens.first() {
        Some(&"random") => RandomGenerator::try_parse_from(tokens).map_err(|e| FieldError::Generator(e.to_string())),
        _ => Err(FieldError::Generator(format!("unknown generator {text:?}"))),
    }
}

/// A field from a generator string (anything starting with `random`) or a file.
pub fn load_init(source: &str, symmetrize: bool) -> Result<SpectralField> {
    if source.split_whitespace().next() == Some("random") {
        parse_generator(source)?.generate()
    } else {
        load_field(Path::new(source), symmetrize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectralField {
        RandomGenerator {
            radius: 3.0,
            envelope: EnvelopeArg { d: 1.0, gamma: 4.0 },
            seed: 3,
            dim: 3,
        }
        .generate()
        .unwrap()
    }

    #[test]
    fn json_and_csv_round_trip_bitwise() {
        let u = sample();
        let a = field_from_json(&field_to_json(&u), false).unwrap();
        let b = field_from_csv(&field_to_csv(&u), false).unwrap();
        for w in [a, b] {
            assert_eq!(w.modes(), u.modes());
            for (x, y) in w.coeffs().iter().zip(u.coeffs()) {
                for (p, q) in x.iter().zip(y) {
                    assert_eq!(p.re.to_bits(), q.re.to_bits());
                    assert_eq!(p.im.to_bits(), q.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn missing_conjugate_needs_symmetrize() {
        let text = r#"{"dimension":2,"modes":[[[1,0],[0.0,0.5],[0.0,-0.25]]]}"#;
        match field_from_json(text, false) {
            Err(FieldError::MissingConjugate(k)) => assert_eq!(k, Mode::d2(1, 0).unwrap()),
            other => panic!("unexpected {other:?}"),
        }
        let u = field_from_json(text, true).unwrap();
        assert_eq!(u.modes().len(), 2);
        assert_eq!(u.get(&Mode::d2(-1, 0).unwrap())[1], Complex64::new(0.5, 0.25));
    }

    #[test]
    fn non_solenoidal_rejection_names_mode() {
        let text = r#"{"dimension":2,"modes":[[[0,2],[0.0,1.0],[0.0,0.0]],[[0,-2],[0.0,1.0],[0.0,0.0]]]}"#;
        let err = field_from_json(text, false).unwrap_err().to_string();
        assert!(err.contains("(0, -2)") || err.contains("(0, 2)"), "{err}");
        assert!(err.contains("Incompressibility"), "{err}");
    }

    #[test]
    fn envelope_spec_parses() {
        let e: EnvelopeArg = "D=1,gamma=4".parse().unwrap();
        assert_eq!(e, EnvelopeArg { d: 1.0, gamma: 4.0 });
        assert!("D=1".parse::<EnvelopeArg>().is_err());
        assert!("D=1,beta=2".parse::<EnvelopeArg>().is_err());
    }

    #[test]
    fn generator_rejects_unknown_kind() {
        assert!(parse_generator("gaussian --radius 3").is_err());
        assert!(parse_generator("random --envelope D=1,gamma=4").is_err());
    }
}
