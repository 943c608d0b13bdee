//! Run configuration and task parameters.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use subhj_core::verify::ResidualOptions;
use subhj_core::{DomainSpec, GroupSpec, HamiltonianDescriptor, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Distance,
    Solve,
    Verify,
    Compare,
    Stability,
    Probe,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Distance => "distance",
            Task::Solve => "solve",
            Task::Verify => "verify",
            Task::Compare => "compare",
            Task::Stability => "stability",
            Task::Probe => "probe",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub spacing: f64,
    /// Defaults to the stencil of the group's rank.
    #[serde(default)]
    pub stencil_directions: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupSpec,
    pub domain: DomainSpec,
    pub hamiltonian: HamiltonianDescriptor,
    pub grid: Grid,
    /// Width of the band added around the domain for the extended graph.
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Cc,
    #[default]
    Optical,
    Koranyi,
}

/// Analytic data as a formula in `y1..yn`, or a `y1..yn,g` CSV relative to the
/// config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum BoundarySpec {
    Formula { formula: String },
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PointSet {
    Explicit(Vec<Vec<f64>>),
    Random {
        random: usize,
        /// Sampling box; defaults to the middle half of the domain box.
        #[serde(default)]
        region: Option<Vec<(f64, f64)>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PairSet {
    Explicit(Vec<(Vec<f64>, Vec<f64>)>),
    Random {
        random: usize,
        #[serde(default)]
        region: Option<Vec<(f64, f64)>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceParams {
    #[serde(default)]
    pub metric: MetricKind,
    pub source: Vec<f64>,
    #[serde(default)]
    pub targets: Vec<Vec<f64>>,
    /// `reverse` computes distances to `source` instead of from it.
    #[serde(default)]
    pub reverse: bool,
    /// Search the margin-enlarged graph with the extension instead of the domain graph.
    #[serde(default)]
    pub extended: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub override_bcc: bool,
    #[serde(default)]
    pub probes: Option<PointSet>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    HopfLax {
        boundary: BoundarySpec,
        #[serde(default)]
        override_bcc: bool,
    },
    /// `d_σ*(vertex, ·)`.
    Cone { vertex: Vec<f64> },
    Formula { formula: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Require {
    #[default]
    Solution,
    Subsolution,
    Supersolution,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeParams {
    pub h_fd: f64,
    #[serde(default = "default_tau_fd")]
    pub tau_fd: f64,
}

fn default_tau_fd() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    pub field: FieldSpec,
    pub probes: PointSet,
    /// Explicit radius schedule; otherwise `r, r/2, r/4, r/8`.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub require: Require,
    #[serde(default)]
    pub ae: Option<AeParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderedPair {
    pub sub: BoundarySpec,
    #[serde(rename = "super")]
    pub sup: BoundarySpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    #[serde(default)]
    pub pairs: Vec<OrderedPair>,
    /// Number of seeded random ordered pairs of affine data added to `pairs`.
    #[serde(default)]
    pub random: usize,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityParams {
    pub sequence: Vec<HamiltonianDescriptor>,
    pub boundary: BoundarySpec,
    pub pairs: PairSet,
    pub probes: PointSet,
    /// Explicit radius schedule; otherwise `r, r/2, r/4, r/8`.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeParams {
    #[serde(default)]
    pub metric: MetricKind,
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    /// Decreasing; defaults to the grid spacing and its half.
    #[serde(default)]
    pub spacings: Option<Vec<f64>>,
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn default_region(domain: &DomainSpec) -> Vec<(f64, f64)> {
    domain.bounds().iter().map(|&(a, b)| (0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b)).collect()
}

/// Uniform in `region ∩ domain` by rejection.
fn sample(rng: &mut ChaCha8Rng, domain: &DomainSpec, region: &[(f64, f64)]) -> Result<Point, String> {
    for _ in 0..10_000 {
        let p: Vec<f64> = region.iter().map(|&(a, b)| rng.random_range(a..=b)).collect();
        if domain.contains(&p) {
            return Ok(Point::new(p));
        }
    }
    Err("sampling region misses the domain".into())
}

impl PointSet {
    pub fn points(&self, rng: &mut ChaCha8Rng, domain: &DomainSpec) -> Result<Vec<Point>, String> {
        match self {
            PointSet::Explicit(v) => Ok(v.iter().cloned().map(Point::new).collect()),
            PointSet::Random { random, region } => {
                let region = region.clone().unwrap_or_else(|| default_region(domain));
                check_region(&region, domain)?;
                (0..*random).map(|_| sample(rng, domain, &region)).collect()
            }
        }
    }
}

impl PairSet {
    pub fn pairs(&self, rng: &mut ChaCha8Rng, domain: &DomainSpec) -> Result<Vec<(Point, Point)>, String> {
        match self {
            PairSet::Explicit(v) => Ok(v.iter().map(|(a, b)| (Point::new(a.clone()), Point::new(b.clone()))).collect()),
            PairSet::Random { random, region } => {
                let region = region.clone().unwrap_or_else(|| default_region(domain));
                check_region(&region, domain)?;
                (0..*random).map(|_| Ok((sample(rng, domain, &region)?, sample(rng, domain, &region)?))).collect()
            }
        }
    }
}

fn check_region(region: &[(f64, f64)], domain: &DomainSpec) -> Result<(), String> {
    if region.len() != domain.dim() || region.iter().any(|&(a, b)| !(a <= b)) {
        return Err(format!("sampling region {region:?} does not fit a {}-dimensional domain", domain.dim()));
    }
    Ok(())
}

pub fn residual_options(radii: &Option<Vec<f64>>, r: Option<f64>, tau: Option<f64>) -> Result<ResidualOptions, String> {
    let mut o = match (radii, r) {
        (Some(v), None) => ResidualOptions { radii: v.clone(), tau: None },
        (None, Some(r)) => ResidualOptions::dyadic(r),
        _ => return Err("give exactly one of `radii` and `r`".into()),
    };
    o.tau = tau;
    Ok(o)
}
