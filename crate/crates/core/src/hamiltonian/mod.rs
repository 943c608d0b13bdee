//! Hamiltonians `H(x, p)` represented by their zero-sublevel sets `Z(x)`.
//!
//! `H` enters the Monge theory only through `Z(x)` and the support function
//! `σ*(x, v) = sup {⟨-ξ, v⟩ : ξ ∈ Z(x)}`, so that is what is stored. The
//! canonical value returned by [`Hamiltonian::eval`] is `gauge_{Z(x)}(p) - 1`.
//!
//! Spatial dependence is piecewise: an ordered list of `(region predicate,
//! ZSet)` pieces where the first matching piece wins. This realizes Hamiltonians
//! that are discontinuous in `x` across the region interfaces.

mod zset;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::expr::Predicate;
use crate::group::{euclidean, GroupSpec, HorizontalVector, Point};

pub use zset::{Ellipsoid, Polytope, ZSet, ZSetDescriptor};

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub region: Predicate,
    pub zset: ZSet,
}

type ZFn = dyn Fn(&[f64]) -> ZSet + Send + Sync;

/// Spatial dependence of `Z(x)`.
#[derive(Clone)]
pub enum ZMap {
    Uniform(ZSet),
    Piecewise(Vec<Piece>),
    /// `inside` on the closure of `domain`, `outside` elsewhere.
    Extended { inside: Box<ZMap>, domain: DomainSpec, outside: Box<ZMap> },
    /// Arbitrary pure function; not serializable.
    Custom(Arc<ZFn>),
}

impl fmt::Debug for ZMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZMap::Uniform(z) => f.debug_tuple("Uniform").field(z).finish(),
            ZMap::Piecewise(p) => f.debug_tuple("Piecewise").field(p).finish(),
            ZMap::Extended { inside, domain, outside } => f
                .debug_struct("Extended")
                .field("inside", inside)
                .field("domain", domain)
                .field("outside", outside)
                .finish(),
            ZMap::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ZMap {
    fn with_zset<R>(&self, x: &[f64], f: impl FnOnce(&ZSet) -> R) -> Result<R> {
        match self {
            ZMap::Uniform(z) => Ok(f(z)),
            ZMap::Piecewise(pieces) => pieces
                .iter()
                .find(|p| p.region.eval(x))
                .map(|p| f(&p.zset))
                .ok_or_else(|| Error::domain(format!("no Hamiltonian piece covers {x:?}"))),
            ZMap::Extended { inside, domain, outside } => {
                if domain.contains(x) {
                    inside.with_zset(x, f)
                } else {
                    outside.with_zset(x, f)
                }
            }
            ZMap::Custom(func) => Ok(f(&func(x))),
        }
    }

    fn zsets(&self, out: &mut Vec<ZSet>) {
        match self {
            ZMap::Uniform(z) => out.push(z.clone()),
            ZMap::Piecewise(p) => out.extend(p.iter().map(|p| p.zset.clone())),
            ZMap::Extended { inside, outside, .. } => {
                inside.zsets(out);
                outside.zsets(out);
            }
            ZMap::Custom(_) => {}
        }
    }

    fn max_arity(&self) -> usize {
        match self {
            ZMap::Uniform(_) | ZMap::Custom(_) => 0,
            ZMap::Piecewise(p) => p.iter().map(|p| p.region.arity()).max().unwrap_or(0),
            ZMap::Extended { inside, domain, outside } => inside
                .max_arity()
                .max(outside.max_arity())
                .max(domain.interior().map_or(0, |p| p.arity())),
        }
    }

    fn descriptor(&self) -> Option<serde_json::Value> {
        Some(match self {
            ZMap::Uniform(z) => serde_json::json!({ "uniform": z }),
            ZMap::Piecewise(p) => serde_json::json!({
                "pieces": p.iter().map(|p| serde_json::json!({"where": p.region, "zset": p.zset})).collect::<Vec<_>>()
            }),
            ZMap::Extended { inside, domain, outside } => serde_json::json!({
                "inside": inside.descriptor()?, "domain": domain, "outside": outside.descriptor()?
            }),
            ZMap::Custom(_) => return None,
        })
    }
}

/// A Hamiltonian satisfying the structural assumptions for a declared `alpha`:
/// Borel measurable in `x`, closed convex sublevel sets, and
/// `B(0, 1/alpha) ⊂ Z(x) ⊂ B(0, alpha)`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    alpha: f64,
    zmap: ZMap,
    domain: Option<DomainSpec>,
}

impl Hamiltonian {
    pub fn new(alpha: f64, zmap: ZMap) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::input(format!("alpha must exceed 1, got {alpha}")));
        }
        Ok(Hamiltonian { alpha, zmap, domain: None })
    }

    pub fn uniform(alpha: f64, z: ZSet) -> Result<Self> {
        Self::new(alpha, ZMap::Uniform(z))
    }

    pub fn piecewise(alpha: f64, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::input("piecewise Hamiltonian needs at least one piece"));
        }
        Self::new(alpha, ZMap::Piecewise(pieces))
    }

    /// Restricts the points where `Z(x)` may be queried.
    pub fn on_domain(mut self, domain: DomainSpec) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn zmap(&self) -> &ZMap {
        &self.zmap
    }

    /// `None` means globally defined.
    pub fn domain(&self) -> Option<&DomainSpec> {
        self.domain.as_ref()
    }

    /// Number of coordinates the region predicates reference.
    pub fn arity(&self) -> usize {
        self.zmap.max_arity()
    }

    /// Whether `Z(x)` is the same set everywhere (a continuous Hamiltonian).
    pub fn is_uniform(&self) -> bool {
        match &self.zmap {
            ZMap::Uniform(_) => true,
            ZMap::Piecewise(p) => p.len() == 1,
            _ => false,
        }
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        match &self.domain {
            Some(d) if !d.contains(x) => Err(Error::domain(format!("{x:?} is outside the Hamiltonian's domain"))),
            _ => Ok(()),
        }
    }

    pub fn zset_at(&self, x: &[f64]) -> Result<ZSet> {
        self.check_domain(x)?;
        self.zmap.with_zset(x, ZSet::clone)
    }

    /// `H(x, p) = gauge_{Z(x)}(p) - 1`: negative inside `Z(x)`, zero on its boundary.
    pub fn eval(&self, x: &Point, p: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        self.zmap.with_zset(x, |z| z.gauge(p) - 1.0)
    }

    /// `σ*(x, v) = sup {⟨-ξ, v⟩ : ξ ∈ Z(x)}`.
    pub fn sigma_star(&self, x: &Point, v: &HorizontalVector) -> Result<f64> {
        self.check_domain(x)?;
        self.zmap.with_zset(x, |z| z.sigma_star(v))
    }

    /// Unchecked variant for hot loops: skips the domain test.
    #[inline]
    pub(crate) fn sigma_star_raw(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        self.zmap.with_zset(x, |z| z.sigma_star(v))
    }

    /// Member of the extension family built by replacing `Z(x)` with the ball
    /// of radius `alpha` outside `omega`. Globally defined, same `alpha`.
    pub fn extend(&self, omega: &DomainSpec) -> Hamiltonian {
        self.extend_with(omega, ZMap::Uniform(ZSet::Ball(self.alpha)))
    }

    /// Extension with a caller-chosen exterior `Z`. Validate the result with
    /// [`validate`] to confirm it is still admissible for `alpha`.
    pub fn extend_with(&self, omega: &DomainSpec, outside: ZMap) -> Hamiltonian {
        Hamiltonian {
            alpha: self.alpha,
            zmap: ZMap::Extended { inside: Box::new(self.zmap.clone()), domain: omega.clone(), outside: Box::new(outside) },
            domain: None,
        }
    }

    /// Canonical description, when one exists (not for custom zmaps).
    pub fn descriptor(&self) -> Option<serde_json::Value> {
        let z = self.zmap.descriptor()?;
        Some(serde_json::json!({ "alpha": self.alpha, "zmap": z, "domain": self.domain }))
    }

    /// Hex SHA-256 of the canonical description, or `"custom"`.
    pub fn fingerprint(&self) -> String {
        match self.descriptor() {
            Some(d) => hex::encode(Sha256::digest(d.to_string().as_bytes())),
            None => "custom".into(),
        }
    }

    /// Checks that every stored set fits the rank (balls fit anything).
    pub fn check_rank(&self, m: usize) -> Result<()> {
        let mut sets = Vec::new();
        self.zmap.zsets(&mut sets);
        for z in &sets {
            if let Some(d) = z.dim() {
                if d != m {
                    return Err(Error::input(format!("Z set of dimension {d} used with a rank-{m} group")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    /// Distance from the origin to the boundary of `Z(x)` along `direction`.
    pub radius: f64,
    /// `"inner"` when the radius is below `1/alpha`, `"outer"` when above `alpha`.
    pub bound: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub alpha: f64,
    pub samples: usize,
    pub directions: usize,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

/// 64 directions in `R^m`, deterministic: the circle for `m = 2`, a seeded
/// Gaussian draw otherwise (`±1` for `m = 1`).
pub fn probe_directions(m: usize) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    const COUNT: usize = 64;
    match m {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..COUNT)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / COUNT as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            let mut dirs: Vec<Vec<f64>> = (0..m)
                .flat_map(|i| {
                    [1.0, -1.0].map(|s| {
                        let mut e = vec![0.0; m];
                        e[i] = s;
                        e
                    })
                })
                .collect();
            while dirs.len() < COUNT.max(2 * m) {
                let v: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = euclidean(&v);
                if n > 1e-6 {
                    dirs.push(v.into_iter().map(|x| x / n).collect());
                }
            }
            dirs
        }
    }
}

/// Probes the sandwich `1/alpha ≤ radius_Z(x)(d) ≤ alpha` along 64 directions at
/// every sample. Convexity and closedness hold by construction of [`ZSet`].
pub fn validate(h: &Hamiltonian, g: &GroupSpec, samples: &[Point]) -> Result<ValidationReport> {
    if samples.is_empty() {
        return Err(Error::input("validation needs at least one sample point"));
    }
    h.check_rank(g.rank())?;
    let dirs = probe_directions(g.rank());
    let alpha = h.alpha;
    let tol = 1e-12;
    let mut violations = Vec::new();
    for x in samples {
        g.check_point(x)?;
        let z = h.zset_at(x)?;
        for d in &dirs {
            let radius = 1.0 / z.gauge(d);
            let bound = if radius < (1.0 / alpha) * (1.0 - tol) {
                "inner"
            } else if radius > alpha * (1.0 + tol) {
                "outer"
            } else {
                continue;
            };
            violations.push(Violation { point: x.0.clone(), direction: d.clone(), radius, bound });
        }
    }
    Ok(ValidationReport { alpha, samples: samples.len(), directions: dirs.len(), passed: violations.is_empty(), violations })
}

/// Config-file form: `{"alpha": 2.0, "pieces": [{"where": "x1 < 0", "zset": {...}}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDescriptor {
    pub alpha: f64,
    pub pieces: Vec<PieceDescriptor>,
    /// Exterior pieces of a custom extension; defaults to the ball of radius `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<Vec<PieceDescriptor>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDescriptor {
    #[serde(rename = "where", default = "Predicate::always")]
    pub region: Predicate,
    pub zset: ZSet,
}

fn pieces_to_zmap(pieces: &[PieceDescriptor]) -> Result<ZMap> {
    if pieces.is_empty() {
        return Err(Error::input("at least one piece is required"));
    }
    if pieces.len() == 1 && pieces[0].region.source() == "true" {
        return Ok(ZMap::Uniform(pieces[0].zset.clone()));
    }
    Ok(ZMap::Piecewise(pieces.iter().map(|p| Piece { region: p.region.clone(), zset: p.zset.clone() }).collect()))
}

impl HamiltonianDescriptor {
    pub fn build(&self) -> Result<Hamiltonian> {
        Hamiltonian::new(self.alpha, pieces_to_zmap(&self.pieces)?)
    }

    /// The member of the extension family to use outside `omega`.
    pub fn build_extension(&self, omega: &DomainSpec) -> Result<Hamiltonian> {
        let h = self.build()?;
        Ok(match &self.extension {
            None => h.extend(omega),
            Some(pieces) => h.extend_with(omega, pieces_to_zmap(pieces)?),
        })
    }
}
