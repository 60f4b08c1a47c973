//! The run configuration. Every field has an explicit default so the resolved
//! config echoed into a report is self-contained.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    VerifyForms,
    Solve,
    Regularity,
    Report,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub coefficients: CoefficientSource,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub criteria: CriteriaConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub fem: FemConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiFamilyName {
    Power,
    ExpSquare,
    TruncatedPower,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiConfig {
    pub family: PhiFamilyName,
    /// Exponent of the power and truncated families.
    pub p: f64,
    /// Truncation level of the truncated family.
    pub k: f64,
    /// Largest `t` used for `Λ∞`.
    pub horizon: f64,
    pub nodes_per_decade: usize,
    /// Nodes of the Λ(t) profile written as plot data.
    pub profile_nodes: usize,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig { family: PhiFamilyName::Power, p: 4.0, k: 3.0, horizon: 1e8, nodes_per_decade: 20, profile_nodes: 200 }
    }
}

/// Lamé coefficients on the grid of [`GridConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSource {
    Constant { lambda: f64, mu: f64 },
    /// `λ` linear in `x` from `lambda_left` to `lambda_right`.
    Ramp { lambda_left: f64, lambda_right: f64, mu: f64 },
    /// Alternating `block × block` node squares of `(λ, μ) = a` and `b`.
    Checkerboard { block: usize, a: [f64; 2], b: [f64; 2] },
    /// `base + bump` at the centre, decaying over `width`.
    Radial { base: [f64; 2], bump: [f64; 2], width: f64 },
    /// Grid text file; the path is relative to the config file.
    File { path: PathBuf },
}

impl Default for CoefficientSource {
    fn default() -> Self {
        CoefficientSource::Constant { lambda: 1.0, mu: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `[x0, x1, y0, y1]`
    pub domain: [f64; 4],
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { domain: [0.0, 1.0, 0.0, 1.0], nx: 33, ny: 33 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriteriaConfig {
    /// Constant of the commutator estimate.
    pub c0: f64,
    /// Strictness constant; `None` picks 0.9 of the admissible bound.
    pub kappa: Option<f64>,
    pub boundary_rtol: f64,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        CriteriaConfig { c0: 1.0, kappa: None, boundary_rtol: 1e-10 }
    }
}

/// Sweep of the power exponent with the coefficients held fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub p_min: f64,
    pub p_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Bisection tolerance for the location of a verdict flip.
    #[serde(default = "default_ptol")]
    pub p_tol: f64,
}

fn default_steps() -> usize {
    41
}

fn default_ptol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub poly: usize,
    pub affine: usize,
    pub oscillatory: usize,
    /// Shift used for the strict margin; `None` takes the verdict's κ or 0.
    pub kappa: Option<f64>,
    /// Largest octave of the counterexample sweep.
    pub max_octave: u32,
    /// Amplitude `A` of the oscillatory counterexample.
    pub amplitude: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { poly: 20, affine: 20, oscillatory: 20, kappa: None, max_octave: 10, amplitude: 40.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsPreset {
    Zero,
    /// `F_ij = cos(π(x_i + 2x_j)) + x₀x₁/2`.
    Smooth,
    /// Data of a known solution; 2-D with constant coefficients only.
    Manufactured,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FemConfig {
    pub dim: usize,
    /// Cells per side of the unit box.
    pub cells: usize,
    pub rhs: RhsPreset,
    pub cg_tol: f64,
    pub check_admissibility: bool,
    /// Multipliers `c` of `F` for the regularity ratio.
    pub scales: Vec<f64>,
    /// Cells per side for the refinement study.
    pub refinements: Vec<usize>,
    /// Allowed relative spread of the ratio across scalings.
    pub scale_rtol: f64,
    /// Allowed max/min factor of the ratio across refinements.
    pub refinement_factor: f64,
}

impl Default for FemConfig {
    fn default() -> Self {
        FemConfig {
            dim: 2,
            cells: 16,
            rhs: RhsPreset::Smooth,
            cg_tol: 1e-10,
            check_admissibility: true,
            scales: vec![0.5, 1.0, 2.0, 4.0],
            refinements: vec![8, 16, 32],
            scale_rtol: 1e-6,
            refinement_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Line-delimited JSON report.
    pub report: PathBuf,
    /// Directory for CSV plot data; nothing is written when unset.
    pub plot_dir: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { report: PathBuf::from("report.jsonl"), plot_dir: None }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing the config")?;
        cfg.check_ranges()?;
        Ok(cfg)
    }

    /// Reads a config file and makes the coefficient path absolute.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text)?;
        if let CoefficientSource::File { path: p } = &mut cfg.coefficients {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
            if !p.exists() {
                bail!("coefficient file {} does not exist", p.display());
            }
        }
        Ok(cfg)
    }

    fn check_ranges(&self) -> anyhow::Result<()> {
        let phi = &self.phi;
        match phi.family {
            PhiFamilyName::Power if !(phi.p > 1.0) => bail!("phi.p must exceed 1"),
            PhiFamilyName::TruncatedPower if !(phi.p >= 2.0 && phi.k > 1.0) => {
                bail!("the truncated family needs p >= 2 and k > 1")
            }
            _ => {}
        }
        if !(phi.horizon > 1.0) || phi.nodes_per_decade == 0 || phi.profile_nodes < 2 {
            bail!("phi.horizon must exceed 1 and the node counts must be positive");
        }
        let g = &self.grid;
        if !(g.domain[1] > g.domain[0] && g.domain[3] > g.domain[2]) || g.nx < 2 || g.ny < 2 {
            bail!("grid needs a nonempty domain and at least 2 nodes per axis");
        }
        if !(self.criteria.c0 > 0.0) {
            bail!("criteria.c0 must be positive");
        }
        if let Some(s) = &self.sweep {
            if !(s.p_max > s.p_min && s.p_min > 1.0) || s.steps < 2 || !(s.p_tol > 0.0) {
                bail!("sweep needs 1 < p_min < p_max, steps >= 2 and p_tol > 0");
            }
        }
        let f = &self.fem;
        if !(f.dim == 2 || f.dim == 3) {
            bail!("fem.dim must be 2 or 3");
        }
        if f.cells < 8 || f.refinements.iter().any(|&n| n < 8) {
            bail!("fem meshes need at least 8 cells per side");
        }
        if f.scales.is_empty() || f.scales.iter().any(|c| !(*c > 0.0)) {
            bail!("fem.scales must be positive");
        }
        Ok(())
    }
}
