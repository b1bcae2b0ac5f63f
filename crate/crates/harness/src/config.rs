use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use kac_kawasaki::dynamics::{AffineBoundary, BoundaryProfile, ConstantBoundary, ConstantTilt, FnTilt, NoTilt, TiltFields};
use kac_kawasaki::lattice_gas::{KacKernel, Lattice, LatticeGeometry};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Oracle,
    Hydro,
    Current,
    Tilt,
    Rate,
    Stationary,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::Hydro => "hydro",
            ExperimentKind::Current => "current",
            ExperimentKind::Tilt => "tilt",
            ExperimentKind::Rate => "rate",
            ExperimentKind::Stationary => "stationary",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "oracle" => ExperimentKind::Oracle,
            "hydro" => ExperimentKind::Hydro,
            "current" => ExperimentKind::Current,
            "tilt" => ExperimentKind::Tilt,
            "rate" => ExperimentKind::Rate,
            "stationary" => ExperimentKind::Stationary,
            other => bail!("unknown experiment kind `{other}`"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Constant,
    Affine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    /// Affine interpolation of the two reservoir densities.
    Affine,
    /// Affine interpolation plus `initial_bump · cos(πu₁/2)`.
    Smooth,
    /// `initial_value` everywhere.
    Constant,
    /// PDE stationary profile (affine at β = 0).
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiltKind {
    None,
    /// `V = tilt_v`, `H = tilt_h`.
    Constant,
    /// `V = ∇F₀`, `F₀ = tilt_amplitude · cos(πu₁/2)(1 + ½ sin 2πu₂)`, `H = 0`.
    Gradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatePair {
    /// Hydrodynamic solution with its current.
    Hydro,
    /// Solution of the tilted equation with its current.
    Tilted,
    /// Hydrodynamic density with `W ≡ 0`.
    Violating,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(n) => vec![n],
        OneOrMany::Many(v) => v,
    })
}

fn one() -> usize {
    1
}
fn default_beta() -> f64 {
    0.0
}
fn default_boundary() -> BoundaryKind {
    BoundaryKind::Affine
}
fn default_left() -> f64 {
    0.8
}
fn default_right() -> f64 {
    0.2
}
fn default_kernel() -> String {
    "cosine".into()
}
fn default_t_end() -> f64 {
    1.0
}
fn default_observations() -> usize {
    10
}
fn default_initial() -> InitialKind {
    InitialKind::Affine
}
fn default_half() -> f64 {
    0.5
}
fn default_tilt() -> TiltKind {
    TiltKind::None
}
fn default_replicas() -> usize {
    4
}
fn default_mesh() -> Vec<usize> {
    vec![100]
}
fn default_pde_tol() -> f64 {
    1e-8
}
fn default_eps() -> f64 {
    0.15
}
fn default_events() -> u64 {
    1_000_000
}
fn default_betas() -> Vec<f64> {
    vec![0.0, 1.0]
}
fn default_girsanov_n() -> usize {
    4
}
fn default_girsanov_replicas() -> usize {
    10_000
}
fn default_cells() -> usize {
    20
}
fn default_rate_pair() -> RatePair {
    RatePair::Hydro
}
fn default_samples() -> usize {
    20
}
fn default_max_tv() -> f64 {
    0.01
}
fn default_max_l1() -> f64 {
    0.05
}
fn default_current_tol() -> f64 {
    0.05
}
fn default_profile_tol() -> f64 {
    0.02
}
fn default_rate_tol() -> f64 {
    0.01
}

/// Flat `key = value` experiment description (a TOML subset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment kind; when absent the CLI subcommand decides.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default = "one")]
    pub d: usize,
    /// Scaling parameter(s); a sweep must be strictly increasing.
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryKind,
    #[serde(default = "default_left")]
    pub boundary_left: f64,
    #[serde(default = "default_right")]
    pub boundary_right: f64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Number of observation intervals on `[0, T]`.
    #[serde(default = "default_observations")]
    pub observations: usize,
    /// Macroscopic times at which densities are compared; defaults to `[T]`.
    #[serde(default)]
    pub sample_times: Vec<f64>,
    #[serde(default = "default_initial")]
    pub initial: InitialKind,
    #[serde(default = "default_half")]
    pub initial_value: f64,
    #[serde(default)]
    pub initial_bump: f64,
    #[serde(default = "default_tilt")]
    pub tilt: TiltKind,
    #[serde(default)]
    pub tilt_v: Vec<f64>,
    #[serde(default)]
    pub tilt_h: f64,
    #[serde(default = "default_half")]
    pub tilt_amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// PDE mesh: `M₁` followed by the transverse cell counts.
    #[serde(default = "default_mesh")]
    pub mesh: Vec<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_pde_tol")]
    pub pde_tol: f64,
    #[serde(default = "default_eps")]
    pub mollifier_eps: f64,
    #[serde(default)]
    pub burn_in: f64,
    #[serde(default = "default_events")]
    pub oracle_events: u64,
    #[serde(default = "default_betas")]
    pub oracle_betas: Vec<f64>,
    #[serde(default = "default_girsanov_n")]
    pub girsanov_n: usize,
    #[serde(default = "default_girsanov_replicas")]
    pub girsanov_replicas: usize,
    #[serde(default = "default_half")]
    pub girsanov_t: f64,
    /// Cells for binned stationary profiles.
    #[serde(default = "default_cells")]
    pub profile_cells: usize,
    #[serde(default = "default_rate_pair")]
    pub rate_pair: RatePair,
    /// Stored path-pair directory for `rate`; overrides `rate_pair`.
    #[serde(default)]
    pub rate_input: Option<String>,
    #[serde(default = "default_samples")]
    pub contraction_samples: usize,
    #[serde(default = "default_max_tv")]
    pub max_tv: f64,
    #[serde(default = "default_max_l1")]
    pub max_l1: f64,
    #[serde(default = "default_current_tol")]
    pub current_tol: f64,
    #[serde(default = "default_profile_tol")]
    pub profile_tol: f64,
    #[serde(default = "default_rate_tol")]
    pub rate_tol: f64,
    #[serde(default)]
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("every key has a default")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("malformed configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// SHA-256 of the canonical serialisation.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.d >= 1, "d must be at least 1");
        ensure!(self.n.windows(2).all(|w| w[0] < w[1]), "the N-sweep must be strictly increasing");
        ensure!(self.n.iter().all(|&n| n >= 1), "N must be positive");
        ensure!(self.beta >= 0.0 && self.beta.is_finite(), "β must be finite and non-negative");
        ensure!(self.t_end >= 0.0 && self.t_end.is_finite(), "T must be finite and non-negative");
        ensure!(self.observations >= 1, "at least one observation interval is needed");
        ensure!(
            self.sample_times.iter().all(|t| (0.0..=self.t_end).contains(t)),
            "sample times must lie in [0, T]"
        );
        ensure!(self.mesh.len() == self.d, "mesh needs one entry per dimension");
        ensure!(self.mesh.iter().all(|&m| m >= 1), "mesh entries must be positive");
        KacKernel::by_name(&self.kernel)?;
        for c in [self.boundary_left, self.boundary_right] {
            ensure!(c > 0.0 && c < 1.0, "reservoir densities must lie in (0, 1)");
        }
        if self.tilt == TiltKind::Constant {
            ensure!(self.tilt_v.len() == self.d, "tilt_v needs one entry per dimension");
        }
        ensure!(self.replicas >= 1, "at least one replica is needed");
        ensure!(self.mollifier_eps > 0.0, "mollifier width must be positive");
        Ok(())
    }

    pub fn sweep(&self) -> Result<&[usize]> {
        ensure!(!self.n.is_empty(), "this experiment needs `n`");
        Ok(&self.n)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        if self.sample_times.is_empty() {
            vec![self.t_end]
        } else {
            self.sample_times.clone()
        }
    }

    pub fn boundary_profile(&self) -> Result<Arc<dyn BoundaryProfile>> {
        Ok(match self.boundary {
            BoundaryKind::Constant => Arc::new(ConstantBoundary::new(self.boundary_left)?),
            BoundaryKind::Affine => Arc::new(AffineBoundary::new(self.boundary_left, self.boundary_right)?),
        })
    }

    fn right_value(&self) -> f64 {
        match self.boundary {
            BoundaryKind::Constant => self.boundary_left,
            BoundaryKind::Affine => self.boundary_right,
        }
    }

    /// Initial profile as a function of the macroscopic point, for the
    /// non-stationary kinds.
    pub fn initial_profile(&self) -> impl Fn(&[f64]) -> f64 + Send + Sync + Clone + 'static {
        let (l, r) = (self.boundary_left, self.right_value());
        let (kind, c, bump) = (self.initial, self.initial_value, self.initial_bump);
        move |u: &[f64]| match kind {
            InitialKind::Constant => c,
            InitialKind::Smooth => l + (r - l) * (u[0] + 1.0) / 2.0 + bump * (std::f64::consts::PI * u[0] / 2.0).cos(),
            InitialKind::Affine | InitialKind::Stationary => l + (r - l) * (u[0] + 1.0) / 2.0,
        }
    }

    pub fn tilt_fields(&self) -> Arc<dyn TiltFields> {
        match self.tilt {
            TiltKind::None => Arc::new(NoTilt),
            TiltKind::Constant => Arc::new(ConstantTilt::new(self.tilt_v.clone(), self.tilt_h)),
            TiltKind::Gradient => gradient_tilt(self.tilt_amplitude),
        }
    }

    pub fn lattice(&self, n: usize) -> Result<Arc<Lattice>> {
        let geom = LatticeGeometry::new(self.d, n)?;
        Ok(Arc::new(Lattice::new(geom, KacKernel::by_name(&self.kernel)?)))
    }
}

/// `∇F₀` for `F₀ = a cos(πu₁/2)(1 + ½ sin 2πu₂)`, which vanishes on `Γ`.
pub fn gradient_tilt(a: f64) -> Arc<dyn TiltFields> {
    use std::f64::consts::PI;
    Arc::new(FnTilt::new(
        move |_, u, k| {
            let m = 1.0 + 0.5 * u.get(1).map_or(0.0, |x| (2.0 * PI * x).sin());
            match k {
                0 => -a * PI / 2.0 * (PI * u[0] / 2.0).sin() * m,
                1 => a * (PI * u[0] / 2.0).cos() * PI * (2.0 * PI * u[1]).cos(),
                _ => 0.0,
            }
        },
        a.abs() * 5.0,
        |_, _, _| 0.0,
        0.0,
        false,
    ))
}

/// Potential `F₀` of [`gradient_tilt`].
pub fn gradient_potential(a: f64, u: &[f64]) -> f64 {
    use std::f64::consts::PI;
    a * (PI * u[0] / 2.0).cos() * (1.0 + 0.5 * u.get(1).map_or(0.0, |x| (2.0 * PI * x).sin()))
}
