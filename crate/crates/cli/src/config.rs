//! Experiment configuration: a JSON document with an `experiment` tag, a
//! kind-specific `params` block, and optional output settings. Unknown
//! keys are rejected everywhere.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub experiment: String,
    pub params: serde_json::Value,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

// --- shared building blocks ----------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelCfg {
    Free { mass: f64 },
    ConstantForce { mass: f64, force: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub extent: f64,
    pub points: usize,
}

impl Default for GridCfg {
    fn default() -> Self {
        Self { extent: 40.0, points: 256 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketCfg {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl Default for PacketCfg {
    fn default() -> Self {
        Self { center: 0.0, width: 1.0, momentum: 0.0 }
    }
}

/// Two-axis dynamics; `coupling` is the bilinear pair potential
/// `V = -k q1 q2` carried by axis 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsCfg {
    pub mass1: f64,
    pub mass2: f64,
    #[serde(default)]
    pub coupling: Option<f64>,
    #[serde(default)]
    pub dt_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureCfg {
    #[serde(default)]
    pub n_points: Option<usize>,
    #[serde(default)]
    pub epsilon_ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub rel_tolerance: Option<f64>,
}

/// Matrix-valued Hamiltonians for the operator-level experiments.
/// `linear-in-time` means `H(t) = t_axis * matrix`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianCfg {
    Constant { matrix: Vec<Vec<[f64; 2]>> },
    LinearInTime { axis: usize, matrix: Vec<Vec<[f64; 2]>> },
    Pauli {
        which: String,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialCfg {
    Zero,
    Linear { force: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDumpCfg {
    pub data: String,
    pub header: String,
    pub encoding: multitime::wavegrid::FieldEncoding,
}

// --- per-experiment parameter blocks --------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEvalParams {
    pub kernel: KernelCfg,
    pub q_f: f64,
    pub t_f: f64,
    pub q_i: f64,
    pub t_i: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeCheckParams {
    /// Used for both factors and for the full-interval reference.
    pub kernel: KernelCfg,
    pub q_i: f64,
    pub t_i: f64,
    pub t_mid: f64,
    pub q_f: f64,
    pub t_f: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub quadrature: Option<QuadratureCfg>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaLimitParams {
    pub kernel: KernelCfg,
    /// `gaussian` (exp(-q^2)), `one`, or `linear` (q).
    pub test_function: String,
    pub q_eval: f64,
    pub dt_ladder: Vec<f64>,
    pub final_tolerance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseInvarianceParams {
    pub steps_axis1: usize,
    pub steps_axis2: usize,
    pub duration_axis1: f64,
    pub duration_axis2: f64,
    pub dynamics: DynamicsCfg,
    #[serde(default)]
    pub grid: Option<GridCfg>,
    #[serde(default)]
    pub packets: Option<[PacketCfg; 2]>,
    pub tolerance: f64,
    #[serde(default)]
    pub dump_field: Option<FieldDumpCfg>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopCheckParams {
    /// Compact path text, e.g. `1:+1,2:+1,1:-1,2:-1`.
    pub path: String,
    pub dynamics: DynamicsCfg,
    #[serde(default)]
    pub grid: Option<GridCfg>,
    #[serde(default)]
    pub packets: Option<[PacketCfg; 2]>,
    pub tolerance: f64,
    /// `trivial` asserts deviation < tolerance, `nontrivial` the opposite.
    pub expect: Expectation,
    #[serde(default)]
    pub dump_field: Option<FieldDumpCfg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionDiscrepancyParams {
    pub coupling: f64,
    pub mass: f64,
    pub q1_initial: f64,
    pub q1_final: f64,
    pub q2_initial: f64,
    pub q2_final: f64,
    pub dt1: f64,
    #[serde(default)]
    pub expected: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureParams {
    pub hamiltonians: Vec<HamiltonianCfg>,
    pub j: usize,
    pub k: usize,
    pub at: Vec<f64>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub expected: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyParams {
    pub hamiltonians: Vec<HamiltonianCfg>,
    pub path: String,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    pub tolerance: f64,
    pub expect: Expectation,
}

fn default_substeps() -> usize {
    16
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesParams {
    pub hamiltonians: Vec<HamiltonianCfg>,
    pub eps1: f64,
    pub eps2: f64,
    /// Axis taken first by the rectangle; `2` pairs the holonomy log with
    /// `-i F_12 eps1 eps2`.
    #[serde(default = "default_axis_first")]
    pub axis_first: usize,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    pub tolerance: f64,
}

fn default_axis_first() -> usize {
    2
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianResidualParams {
    /// One expression per particle over `qdot_i`, `q_i`, `t_i`.
    pub lagrangians: Vec<String>,
    pub i: usize,
    pub j: usize,
    pub qdot: Vec<f64>,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub expected: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonResidualParams {
    /// One expression per particle over `q_k`, `p_k`, `t_k`.
    pub hamiltonians: Vec<String>,
    pub i: usize,
    pub j: usize,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub expected: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionInvarianceParams {
    pub lagrangians: Vec<String>,
    pub path_a: String,
    pub path_b: String,
    /// Straight-line coordinate trajectories `q_i(t_i) = v_i t_i`.
    pub velocities: Vec<f64>,
    #[serde(default = "default_samples_per_leg")]
    pub samples_per_leg: usize,
    pub tolerance: f64,
}

fn default_samples_per_leg() -> usize {
    32
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathintConvergeParams {
    pub potential: PotentialCfg,
    pub mass: f64,
    pub q_i: f64,
    pub t_i: f64,
    pub q_f: f64,
    pub t_f: f64,
    pub n_list: Vec<usize>,
    /// `closed-form` compares against the matching exact kernel; `self`
    /// uses the finest run as the reference.
    pub reference: ReferenceKind,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub ratio_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    ClosedForm,
    SelfReference,
}
