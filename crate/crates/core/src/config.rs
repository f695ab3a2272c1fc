//! JSON description of a surface, its initial data and a flow run.
//!
//! ```json
//! {
//!   "surface": {
//!     "n": 3, "k": 1.0, "mode": "axisymmetric",
//!     "profile": {"type": "perturbed_sphere", "r0": 1.0, "eps": 0.1},
//!     "grid": {"n_theta": 256}
//!   },
//!   "initial": {"type": "zonal_u", "mean": 1.2, "amp": 0.2},
//!   "flow": {"rho_max": 6.0}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{init_u, FlowConfig, FlowState};
use crate::mass::NullDirection;
use crate::sampling::{null_directions, DIRECTION_COUNT};
use crate::surface::{build_leaf, ConvexityPolicy, Grid, Mode, Profile, SurfaceLeaf, SurfaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Sphere { r0: f64 },
    PerturbedSphere { r0: f64, eps: f64 },
    OffCenterSphere { radius: f64, offset: f64 },
    Harmonic { r0: f64, eps: f64 },
    /// One radius per node, row-major in `(theta, phi)`.
    Table { radii: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_theta: usize,
    #[serde(default = "one")]
    pub n_phi: usize,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub n: usize,
    #[serde(default = "unit")]
    pub k: f64,
    pub mode: Mode,
    pub profile: ProfileConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub center_shift: f64,
    #[serde(default)]
    pub convexity: ConvexityPolicy,
}

impl SurfaceConfig {
    pub fn to_spec(&self) -> Result<SurfaceSpec<f64>> {
        let profile = match &self.profile {
            ProfileConfig::Sphere { r0 } => Profile::Sphere { r0: *r0 },
            ProfileConfig::PerturbedSphere { r0, eps } => Profile::PerturbedSphere { r0: *r0, eps: *eps },
            ProfileConfig::OffCenterSphere { radius, offset } => {
                Profile::OffCenterSphere { radius: *radius, offset: *offset }
            }
            ProfileConfig::Harmonic { r0, eps } => Profile::Harmonic { r0: *r0, eps: *eps },
            ProfileConfig::Table { radii } => Profile::Table(radii.clone()),
        };
        let grid = Grid::new(self.mode, self.grid.n_theta, self.grid.n_phi)?;
        let mut spec = SurfaceSpec::new(self.n, self.k, grid, profile)?;
        spec.center_shift = self.center_shift;
        spec.convexity = self.convexity;
        spec.validate()?;
        Ok(spec)
    }
}

/// Initial data on `Sigma`: either `u` directly or the mean curvature `H`
/// of the region, giving `u = H_0 / H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    ConstantU { value: f64 },
    ConstantH { value: f64 },
    /// `mean + amp cos^2 theta`.
    ZonalU { mean: f64, amp: f64 },
    /// `mean + amp cos theta`.
    DipoleU { mean: f64, amp: f64 },
    /// One value of `H` per node.
    TableH { values: Vec<f64> },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::ConstantU { value: 1.0 }
    }
}

impl InitialData {
    pub fn state(&self, leaf: SurfaceLeaf<f64>) -> Result<FlowState<f64>> {
        let grid = *leaf.grid();
        let theta = |node: usize| grid.theta::<f64>(grid.ij(node).0);
        let field = |f: &dyn Fn(usize) -> f64| (0..leaf.len()).map(f).collect::<Vec<f64>>();
        match self {
            InitialData::ConstantU { value } => {
                let u = field(&|_| *value);
                FlowState::new(leaf, u)
            }
            InitialData::ZonalU { mean, amp } => {
                let u = field(&|i| mean + amp * theta(i).cos().powi(2));
                FlowState::new(leaf, u)
            }
            InitialData::DipoleU { mean, amp } => {
                let u = field(&|i| mean + amp * theta(i).cos());
                FlowState::new(leaf, u)
            }
            InitialData::ConstantH { value } => {
                let h = field(&|_| *value);
                init_u(leaf, &h)
            }
            InitialData::TableH { values } => init_u(leaf, values),
        }
    }
}

/// Null directions for the mass checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectionConfig {
    /// Size of the sampled set (`+-e_i` first).
    pub count: usize,
    /// Spatial part of the direction used for the trace's `dmass_*`
    /// columns; `e_1` when absent.
    pub trace: Option<Vec<f64>>,
}

impl Default for DirectionConfig {
    fn default() -> Self {
        Self { count: DIRECTION_COUNT, trace: None }
    }
}

impl DirectionConfig {
    pub fn sampled(&self, n: usize) -> Result<Vec<NullDirection<f64>>> {
        if self.count == 0 {
            return Err(Error::InvalidInput("direction count must be positive".into()));
        }
        null_directions(n, self.count)
    }

    pub fn trace_direction(&self, n: usize) -> Result<NullDirection<f64>> {
        match &self.trace {
            Some(v) if v.len() != n => Err(Error::DimensionMismatch { expected: n, found: v.len() }),
            Some(v) => NullDirection::from_spatial(v),
            None => {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                NullDirection::from_spatial(&e)
            }
        }
    }
}

/// Input of the `flow` and `mass` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub directions: DirectionConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.flow.validate()?;
        Ok(cfg)
    }

    /// Builds `Sigma_0` and the initial state.
    pub fn initial_state(&self) -> Result<FlowState<f64>> {
        let leaf = build_leaf(&self.surface.to_spec()?)?;
        self.initial.state(leaf)
    }
}
