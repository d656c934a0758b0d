//! Region files: either a built region (tagged by `kind`) or a recipe
//! tagged by `build`, whose constants are computed when absent.

use std::path::Path;

use galerkin_core::lattice::{estimate_cq, estimate_estmlin_constant, ConstantEstimate};
use galerkin_core::trapping::{build_smalldata_3d, build_trap1, build_trap2, build_trap3, TrapRegion};
use galerkin_core::{Dim, ForceField, PhysicsParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionFamily {
    Poly,
    Exp,
    TimeExp,
    #[serde(rename = "small_data_3d")]
    SmallData3D,
}

/// Parameters for the region builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionRecipe {
    pub build: RegionFamily,
    pub nu: f64,
    pub gamma: f64,
    /// Enstrophy bound; unused by the small-data region.
    #[serde(default)]
    pub v0: Option<f64>,
    pub margin: f64,
    /// `D2` (or `D3`) as a multiple of the base `D`.
    #[serde(default = "default_refine_factor")]
    pub refine_factor: f64,
    /// Margin of the refinement step, which must lie in (0, 1).
    #[serde(default)]
    pub refine_margin: Option<f64>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Enstrophy-modulus constant; estimated from `c_fields` saturated
    /// fields on a ball of radius `c_radius` when absent.
    #[serde(default)]
    pub c: Option<ConstantEstimate>,
    #[serde(default = "default_c_fields")]
    pub c_fields: u64,
    #[serde(default = "default_c_radius")]
    pub c_radius: u32,
    #[serde(default = "default_c_seed")]
    pub c_seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Convolution constant; scanned up to `cq_kmax` when absent.
    #[serde(default)]
    pub c_q: Option<ConstantEstimate>,
    #[serde(default = "default_cq_kmax")]
    pub cq_kmax: u32,
    #[serde(default = "default_cq_radius")]
    pub cq_radius: u32,
}

fn default_refine_factor() -> f64 {
    10.0
}
fn default_t0() -> f64 {
    1.0
}
fn default_c_fields() -> u64 {
    200
}
fn default_c_radius() -> u32 {
    12
}
fn default_c_seed() -> u64 {
    11
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_cq_kmax() -> u32 {
    40
}
fn default_cq_radius() -> u32 {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionFile {
    Recipe(RegionRecipe),
    Built(TrapRegion),
}

impl RegionRecipe {
    pub fn dim(&self) -> Dim {
        match self.build {
            RegionFamily::SmallData3D => Dim::Three,
            _ => Dim::Two,
        }
    }

    fn enstrophy_constant(&self) -> anyhow::Result<ConstantEstimate> {
        match &self.c {
            Some(c) => Ok(c.clone()),
            None => Ok(estimate_estmlin_constant(
                Dim::Two,
                self.gamma,
                self.epsilon,
                self.c_radius,
                self.c_fields,
                self.c_seed,
            )?),
        }
    }

    fn convolution_constant(&self) -> anyhow::Result<ConstantEstimate> {
        match &self.c_q {
            Some(c) => Ok(c.clone()),
            None => Ok(estimate_cq(self.dim(), self.gamma, self.cq_kmax, self.cq_radius)?),
        }
    }

    /// Runs the builder for this family against the force `f`.
    pub fn build(&self, f: &ForceField) -> anyhow::Result<TrapRegion> {
        let p = PhysicsParams::new(self.nu, self.dim())?;
        if self.build == RegionFamily::SmallData3D {
            let c_q = self.convolution_constant()?;
            return Ok(build_smalldata_3d(self.gamma, f, &p, &c_q, self.margin)?);
        }
        let v0 = self.v0.ok_or_else(|| anyhow::anyhow!("recipe {:?} needs v0", self.build))?;
        let base = build_trap1(v0, self.gamma, f, &p, &self.enstrophy_constant()?, self.margin)?;
        let refine_margin = self.refine_margin.unwrap_or(self.margin);
        Ok(match self.build {
            RegionFamily::Poly => base,
            RegionFamily::Exp => {
                let d2 = self.refine_factor * base.d();
                build_trap2(&base, d2, f, &p, &self.convolution_constant()?, refine_margin)?
            }
            RegionFamily::TimeExp => {
                let d3 = self.refine_factor * base.d();
                build_trap3(&base, d3, self.t0, f, &p, &self.convolution_constant()?, refine_margin)?
            }
            RegionFamily::SmallData3D => unreachable!("handled above"),
        })
    }
}

pub fn parse_region(text: &str) -> anyhow::Result<RegionFile> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    // Decide on the tag so that schema errors come from the right variant.
    if value.get("build").is_some() {
        Ok(RegionFile::Recipe(serde_json::from_value(value)?))
    } else if value.get("kind").is_some() {
        Ok(RegionFile::Built(serde_json::from_value(value)?))
    } else {
        anyhow::bail!("region file needs either a \"kind\" (built region) or a \"build\" (recipe) field")
    }
}

pub fn load_region(path: &Path) -> anyhow::Result<RegionFile> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    parse_region(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
