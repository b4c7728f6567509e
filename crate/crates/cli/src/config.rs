//! Run configuration: a flat TOML file with a `[domain]` table, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use mps_core::geometry::DomainSpec;
use mps_core::scanner::{BasisConfig, ProblemSpec};
use mps_core::tension::{BoundaryCondition, DEFAULT_HIGHER, DEFAULT_REG_EPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BcArg {
    Dirichlet,
    Neumann,
    NeumannRaw,
}

impl From<BcArg> for BoundaryCondition {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Dirichlet => BoundaryCondition::Dirichlet,
            BcArg::Neumann => BoundaryCondition::NeumannFiltered,
            BcArg::NeumannRaw => BoundaryCondition::NeumannUnfiltered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Mfs,
    FourierBessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub bc: BcArg,
    pub basis: BasisKind,
    pub mfs_points: usize,
    pub mfs_offset: f64,
    pub fb_max_order: usize,
    pub n_boundary: usize,
    pub interior_radial: usize,
    pub interior_angular: usize,
    pub reg_eps: f64,
    pub n_higher: usize,
    pub e_lo: f64,
    pub e_hi: f64,
    pub n_grid: usize,
    pub grid_n: usize,
    pub freq_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub domain: DomainSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bc: BcArg::Dirichlet,
            basis: BasisKind::FourierBessel,
            mfs_points: 400,
            mfs_offset: 0.1,
            fb_max_order: 40,
            n_boundary: 256,
            interior_radial: 24,
            interior_angular: 160,
            reg_eps: DEFAULT_REG_EPS,
            n_higher: DEFAULT_HIGHER,
            e_lo: 5.0,
            e_hi: 6.0,
            n_grid: 50,
            grid_n: 200,
            freq_max: 60.0,
            e_star: None,
            format: None,
            out: None,
            threads: None,
            domain: DomainSpec::unit_disc(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        toml::to_string(self).context("cannot serialize configuration")
    }

    pub fn problem(&self) -> ProblemSpec {
        let basis = match self.basis {
            BasisKind::Mfs => BasisConfig::Mfs {
                points: self.mfs_points,
                offset: self.mfs_offset,
            },
            BasisKind::FourierBessel => BasisConfig::FourierBessel {
                max_order: self.fb_max_order,
            },
        };
        ProblemSpec {
            n_boundary: self.n_boundary,
            interior_radial: self.interior_radial,
            interior_angular: self.interior_angular,
            reg_eps: self.reg_eps,
            n_higher: self.n_higher,
            ..ProblemSpec::new(self.domain.clone(), basis, self.bc.into())
        }
    }

    /// Checks everything the solver modules would reject, before any work.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.problem().validate()?;
        if !(self.e_lo > 0.0 && self.e_lo < self.e_hi && self.e_hi.is_finite()) {
            bail!(
                "energy window [{}, {}] must satisfy 0 < e_lo < e_hi",
                self.e_lo,
                self.e_hi
            );
        }
        if self.bc == BcArg::Neumann && self.e_lo <= 1.0 {
            bail!("filtered Neumann windows need e_lo > 1 (got {})", self.e_lo);
        }
        if self.n_grid < 3 {
            bail!("n_grid must be at least 3 (got {})", self.n_grid);
        }
        if self.grid_n == 0 {
            bail!("grid_n must be positive");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        Ok(())
    }
}
