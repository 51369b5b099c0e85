//! Scenario runner: a strictly parsed configuration file names one command
//! and its inputs, [`run`] executes it and answers with a [`Report`].
//!
//! Relative file references inside a configuration resolve against the
//! directory of the configuration file. The report digest is the SHA-256 of
//! the canonical JSON of the configuration after command-line overrides, so
//! two runs with the same digest produce the same report apart from
//! `wall_time_ms`.

use crate::body::{named, BodyFile, ConvexBody};
use crate::error::{Error, Result};
use crate::functional::{
    find_center, functional_santalo_verify, prekopa_geometric_check, CenterOptions, FunctionalOptions, PrekopaOptions,
    TAG_FUNCTIONAL,
};
use crate::fuzz::{self, FuzzFamily, FuzzOptions};
use crate::legendre::{
    biconjugate_check, legendre_santalo_verify, legendre_transform, optimal_center, uniform_axis, CenterSolveOptions,
    GridFn, LegendreOptions, TAG_LEGENDRE,
};
use crate::logconcave::{Evaluator, Family, LogConcaveFn, Profile};
use crate::measure::{measure_product_check, DensityMeasure, MeasureOptions};
use crate::polar::{bs_check, polar, santalo_point, volume_product, SantaloOptions, TAG_BS};
use crate::report::{Relation, Report};
use crate::rho::{Rho, RhoFamily};
use crate::sphere::SphereGrid;
use crate::steiner::{ellipsoid_report, is_centrally_symmetric, vp_monotonicity};
use crate::vector::{self, unit_ball_volume};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Polar,
    SantaloPoint,
    VolumeProduct,
    MeasureCheck,
    FunctionalCheck,
    PrekopaCheck,
    Legendre,
    CenterFind,
    Steiner,
    Fuzz,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Polar,
        Command::SantaloPoint,
        Command::VolumeProduct,
        Command::MeasureCheck,
        Command::FunctionalCheck,
        Command::PrekopaCheck,
        Command::Legendre,
        Command::CenterFind,
        Command::Steiner,
        Command::Fuzz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Polar => "polar",
            Command::SantaloPoint => "santalo-point",
            Command::VolumeProduct => "volume-product",
            Command::MeasureCheck => "measure-check",
            Command::FunctionalCheck => "functional-check",
            Command::PrekopaCheck => "prekopa-check",
            Command::Legendre => "legendre",
            Command::CenterFind => "center-find",
            Command::Steiner => "steiner",
            Command::Fuzz => "fuzz",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }

    fn stochastic(self) -> bool {
        matches!(
            self,
            Command::MeasureCheck | Command::FunctionalCheck | Command::PrekopaCheck | Command::Fuzz
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A body by built-in name, inline, or as a path to a body file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodySpec {
    Named(String),
    File { file: PathBuf },
    Inline(BodyFile),
}

/// `"auto"` selects the natural centre of the command, a number `c` means
/// `(c, ..., c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterSpec {
    Point(Vec<f64>),
    Constant(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionInput {
    Named(String),
    Spec(FunctionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `scale * exp(-|T (x - shift)|^2)`; `T` defaults to the identity.
    Gaussian {
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        shift: Option<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
    },
    Indicator {
        body: BodySpec,
        #[serde(default)]
        shift: Option<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
    },
    ExpGauge {
        body: BodySpec,
        #[serde(default)]
        shift: Option<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
    },
    Product {
        profiles: Vec<Profile>,
        #[serde(default)]
        shift: Option<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoInput {
    Named(String),
    Family(RhoFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureInput {
    Named(String),
    Spec(DensityMeasure),
}

/// `phi(x) = |T (x - center)|^2 / 2 + constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub constant: f64,
}

/// `phi(x) = max_i (<slopes[i], x> + intercepts[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxAffineSpec {
    pub slopes: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridFnSpec {
    /// Sampled on `[-extent, extent]^n` with `nodes` points per axis.
    Quadratic { quadratic: QuadraticSpec, extent: f64, nodes: usize },
    MaxAffine { max_affine: MaxAffineSpec, extent: f64, nodes: usize },
    File { file: PathBuf },
    Inline(GridFn),
}

/// `factor * prod_i profile(dilation * x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledProfile {
    pub profile: Profile,
    #[serde(default = "one")]
    pub dilation: f64,
    #[serde(default = "one")]
    pub factor: f64,
}

impl ScaledProfile {
    fn eval(&self, x: &[f64]) -> f64 {
        self.factor * x.iter().map(|t| self.profile.ln_eval(self.dilation * t).exp()).product::<f64>()
    }
}

/// Either three explicit functions, or the family
/// `f1 = d f3(c x)`, `f2 = f3(x / c) / d` with `f3(x) = exp(-|x|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrekopaSpec {
    #[serde(default = "one_usize")]
    pub dim: usize,
    #[serde(default)]
    pub f1: Option<ScaledProfile>,
    #[serde(default)]
    pub f2: Option<ScaledProfile>,
    #[serde(default)]
    pub f3: Option<ScaledProfile>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub extent: Option<f64>,
}

impl PrekopaSpec {
    fn functions(&self) -> Result<[ScaledProfile; 3]> {
        match (&self.f1, &self.f2, &self.f3, self.c, self.d) {
            (Some(a), Some(b), Some(c), None, None) => Ok([a.clone(), b.clone(), c.clone()]),
            (None, None, None, Some(c), Some(d)) => {
                positive("prekopa.c", c)?;
                positive("prekopa.d", d)?;
                let f3 = Profile::Laplace { width: 1.0 };
                Ok([
                    ScaledProfile { profile: f3.clone(), dilation: c, factor: d },
                    ScaledProfile { profile: f3.clone(), dilation: 1.0 / c, factor: 1.0 / d },
                    ScaledProfile { profile: f3, dilation: 1.0, factor: 1.0 },
                ])
            }
            _ => Err(Error::InvalidInput("prekopa needs either f1, f2, f3 or c, d".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Where `polar`, `steiner` and `legendre` write the body or grid
    /// function they produce.
    #[serde(default)]
    pub artifact: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Dimension for named functions and measures.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub body: Option<BodySpec>,
    #[serde(default)]
    pub z: Option<CenterSpec>,
    #[serde(default, alias = "f")]
    pub function: Option<FunctionInput>,
    #[serde(default)]
    pub g: Option<FunctionInput>,
    #[serde(default, alias = "kernel")]
    pub rho: Option<RhoInput>,
    #[serde(default)]
    pub measure: Option<MeasureInput>,
    #[serde(default)]
    pub gridfn: Option<GridFnSpec>,
    #[serde(default)]
    pub prekopa: Option<PrekopaSpec>,
    #[serde(default)]
    pub directions: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub family: Option<FuzzFamily>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

fn positive_count(name: &str, v: Option<usize>) -> Result<()> {
    match v {
        Some(0) => Err(Error::InvalidInput(format!("{name} must be positive"))),
        _ => Ok(()),
    }
}

/// Parses a configuration, reporting the failing field path together with
/// the line and column.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::InvalidInput(format!("config field '{path}': {inner}"))
    })
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

/// Output of a run: the report and, for commands that construct an object,
/// that object serialized as JSON.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub artifact: Option<String>,
}

impl ScenarioConfig {
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.command.stochastic() && self.seed.is_none() {
            return Err(Error::InvalidInput(format!("command {} needs a seed", self.command.name())));
        }
        if self.command == Command::Steiner && self.directions.is_none() && self.seed.is_none() {
            return Err(Error::InvalidInput("steiner with random directions needs a seed".into()));
        }
        if let Some(t) = self.tolerance {
            positive("tolerance", t)?;
        }
        positive_count("dim", self.dim)?;
        positive_count("count", self.count)?;
        positive_count("grid_size", self.grid_size)?;
        positive_count("samples", self.samples)?;
        positive_count("max_iter", self.max_iter)?;
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn read(&self, p: &Path) -> Result<String> {
        let full = self.resolve(p);
        std::fs::read_to_string(&full).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", full.display())))
    }

    fn require<'a, T>(&self, v: &'a Option<T>, field: &str) -> Result<&'a T> {
        v.as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("command {} needs '{field}'", self.command.name())))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn body_from(&self, spec: &BodySpec) -> Result<ConvexBody> {
        match spec {
            BodySpec::Named(name) => named(name),
            BodySpec::Inline(file) => file.clone().into_body(),
            BodySpec::File { file } => {
                let text = self.read(file)?;
                let f: BodyFile = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidInput(format!("body file {}: {e}", file.display())))?;
                f.into_body()
            }
        }
    }

    fn body(&self) -> Result<ConvexBody> {
        self.body_from(self.require(&self.body, "body")?)
    }

    /// `None` means "auto".
    fn center(&self, n: usize, default_auto: bool) -> Result<Option<Vec<f64>>> {
        let z = match &self.z {
            None if default_auto => return Ok(None),
            None => vec![0.0; n],
            Some(CenterSpec::Auto(_)) => return Ok(None),
            Some(CenterSpec::Constant(c)) => vec![*c; n],
            Some(CenterSpec::Point(p)) => p.clone(),
        };
        crate::error::check_dim(n, z.len())?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("z must be finite".into()));
        }
        Ok(Some(z))
    }

    fn rho(&self) -> Result<Rho> {
        match &self.rho {
            None => Ok(Rho::exp()),
            Some(RhoInput::Family(f)) => Rho::new(f.clone()),
            Some(RhoInput::Named(name)) => match name.as_str() {
                "exp" => Ok(Rho::exp()),
                "indicator" => Ok(Rho::indicator()),
                "gaussian" => Rho::new(RhoFamily::Gaussian),
                other => Err(Error::InvalidInput(format!("unknown kernel '{other}'"))),
            },
        }
    }

    fn dim(&self) -> usize {
        self.dim.unwrap_or(2)
    }

    fn polytope(&self, spec: &BodySpec) -> Result<crate::polytope::PolytopeV> {
        match self.body_from(spec)? {
            ConvexBody::Polytope(p) => Ok(p),
            ConvexBody::Star(_) => Err(Error::Unsupported("function bodies must be polytopes".into())),
        }
    }

    fn function(&self, input: &FunctionInput) -> Result<LogConcaveFn> {
        let spec = match input {
            FunctionInput::Spec(s) => s.clone(),
            FunctionInput::Named(name) => match name.as_str() {
                "gaussian" => FunctionSpec::Gaussian { dim: Some(self.dim()), matrix: None, shift: None, scale: 1.0 },
                other => return Err(Error::InvalidInput(format!("unknown function '{other}'"))),
            },
        };
        match spec {
            FunctionSpec::Gaussian { dim, matrix, shift, scale } => {
                let t = match (matrix, dim) {
                    (Some(m), _) => m,
                    (None, d) => {
                        let n = d.unwrap_or(self.dim());
                        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
                    }
                };
                LogConcaveFn::new(Family::Gaussian { t }, shift, scale)
            }
            FunctionSpec::Indicator { body, shift, scale } => {
                LogConcaveFn::new(Family::Indicator(self.polytope(&body)?), shift, scale)
            }
            FunctionSpec::ExpGauge { body, shift, scale } => {
                LogConcaveFn::new(Family::ExpGauge(self.polytope(&body)?), shift, scale)
            }
            FunctionSpec::Product { profiles, shift, scale } => LogConcaveFn::new(Family::Product(profiles), shift, scale),
        }
    }

    fn measure(&self) -> Result<DensityMeasure> {
        match self.require(&self.measure, "measure")? {
            MeasureInput::Spec(m) => {
                m.validate()?;
                Ok(m.clone())
            }
            MeasureInput::Named(name) => match name.as_str() {
                "gaussian" => Ok(DensityMeasure::gaussian(self.dim())),
                "gaussian-radial" => Ok(DensityMeasure::gaussian_radial(self.dim())),
                other => Err(Error::InvalidInput(format!("unknown measure '{other}'"))),
            },
        }
    }

    fn gridfn(&self) -> Result<GridFn> {
        let sampled = |extent: f64, nodes: usize, n: usize, f: &dyn Fn(&[f64]) -> f64| -> Result<GridFn> {
            positive("gridfn.extent", extent)?;
            if nodes < 3 {
                return Err(Error::InvalidInput("gridfn.nodes must be at least 3".into()));
            }
            let axes = vec![uniform_axis(-extent, extent, nodes); n];
            GridFn::from_fn(axes, f)
        };
        match self.require(&self.gridfn, "gridfn")? {
            GridFnSpec::Inline(g) => Ok(g.clone()),
            GridFnSpec::File { file } => {
                let text = self.read(file)?;
                serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("gridfn file {}: {e}", file.display())))
            }
            GridFnSpec::Quadratic { quadratic: q, extent, nodes } => {
                let n = q.matrix.len();
                if q.matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidInput("quadratic matrix must be square".into()));
                }
                let c = q.center.clone().unwrap_or_else(|| vec![0.0; n]);
                crate::error::check_dim(n, c.len())?;
                sampled(*extent, *nodes, n, &|x| {
                    let d = vector::sub(x, &c);
                    0.5 * q.matrix.iter().map(|r| vector::dot(r, &d).powi(2)).sum::<f64>() + q.constant
                })
            }
            GridFnSpec::MaxAffine { max_affine: m, extent, nodes } => {
                let n = m.slopes.first().map_or(0, Vec::len);
                if n == 0 || m.slopes.len() != m.intercepts.len() || m.slopes.iter().any(|s| s.len() != n) {
                    return Err(Error::InvalidInput("max_affine needs equally many slopes and intercepts".into()));
                }
                sampled(*extent, *nodes, n, &|x| {
                    m.slopes
                        .iter()
                        .zip(&m.intercepts)
                        .map(|(s, b)| vector::dot(s, x) + b)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
            }
        }
    }

    fn sphere_grid(&self, n: usize) -> Result<Option<Arc<SphereGrid>>> {
        self.grid_size.map(|m| SphereGrid::new(n, m).map(Arc::new)).transpose()
    }
}

/// Validates and executes one scenario.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let (mut report, artifact) = dispatch(config)?;
    report.scenario = config.command.name().to_string();
    report.digest = config.digest();
    if let Some(s) = config.seed {
        report.seeds = vec![s];
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RunOutput { report, artifact })
}

fn json<T: Serialize>(v: &T) -> Option<String> {
    Some(serde_json::to_string_pretty(v).expect("artifact serializes"))
}

fn santalo_opts(c: &ScenarioConfig) -> SantaloOptions {
    let mut o = SantaloOptions::default();
    if let Some(m) = c.max_iter {
        o.max_iter = m;
    }
    o
}

fn dispatch(c: &ScenarioConfig) -> Result<(Report, Option<String>)> {
    match c.command {
        Command::Polar => {
            let body = c.body()?;
            let n = body.dim();
            let z = match c.center(n, false)? {
                Some(z) => z,
                None => santalo_point(&body, &santalo_opts(c))?.point,
            };
            let p = polar(&body, &z)?;
            let mut r = Report::new("polar");
            r.vector("z", &z)
                .value("volume", body.volume())
                .value("polar_volume", p.volume())
                .value("volume_product", body.volume() * p.volume());
            if let ConvexBody::Polytope(_) = body {
                // `p` is `(K - z)°`, centred at the origin.
                let back = polar(&p, &vec![0.0; n])?.translate(&z)?;
                r.check("bipolar_volume", TAG_BS, Relation::Close, back.volume(), body.volume(), 1e-9);
            }
            Ok((r, json(&p.to_file())))
        }
        Command::SantaloPoint => {
            let body = c.body()?;
            let sp = santalo_point(&body, &santalo_opts(c))?;
            let tol = c.tolerance.unwrap_or(1e-6);
            let mut r = Report::new("santalo-point");
            r.vector("point", &sp.point)
                .value("residual", sp.residual)
                .value("volume", sp.volume)
                .value("polar_volume", sp.polar_volume)
                .value("volume_product", sp.volume_product)
                .value("iterations", sp.iterations as f64)
                .value("probe_ratio", sp.probe_ratio)
                .flag("probes_ok", sp.probes_ok);
            r.check("fixed_point_residual", TAG_BS, Relation::CloseAbs, sp.residual, 0.0, tol);
            Ok((r, None))
        }
        Command::VolumeProduct => {
            let body = c.body()?;
            let n = body.dim();
            let tol = c.tolerance.unwrap_or(1e-2);
            match c.center(n, true)? {
                None => Ok((bs_check(&body, tol, &santalo_opts(c))?, None)),
                Some(z) => {
                    let vp = volume_product(&body, &z)?;
                    let bound = unit_ball_volume(n).powi(2);
                    let mut r = Report::new("volume-product");
                    r.vector("z", &z).value("volume_product", vp).value("bound", bound);
                    // For a symmetric body the origin is its Santaló point.
                    if vector::norm(&z) == 0.0 && is_centrally_symmetric(&body, 1e-9) {
                        r.value("margin", (bound - vp) / bound);
                        r.check("blaschke_santalo", TAG_BS, Relation::Le, vp, bound, tol);
                    }
                    Ok((r, None))
                }
            }
        }
        Command::MeasureCheck => {
            let mu = c.measure()?;
            let body = c.body()?;
            let mut o = MeasureOptions { seed: c.seed(), grid: c.sphere_grid(mu.dim())?, ..Default::default() };
            if let Some(s) = c.samples {
                o.mc_samples = s;
            }
            if let Some(t) = c.tolerance {
                o.tol = t;
            }
            Ok((measure_product_check(&mu, &body, &o)?, None))
        }
        Command::FunctionalCheck => {
            let f = c.function(c.require(&c.function, "function")?)?;
            let n = f.dim();
            let rho = c.rho()?;
            let g = c.g.as_ref().map(|g| c.function(g)).transpose()?;
            let z = c.center(n, true)?;
            let mut o = FunctionalOptions::for_dim(n);
            if let Some(grid) = c.sphere_grid(n)? {
                o.grid = grid;
            }
            o.hypothesis.seed = c.seed();
            if let Some(s) = c.samples {
                o.hypothesis.samples = s;
            }
            if let Some(t) = c.tolerance {
                o.tol = t;
            }
            let g_ref = g.as_ref().map(|g| g as &dyn Evaluator);
            Ok((functional_santalo_verify(&f, g_ref, &rho, z.as_deref(), &o)?, None))
        }
        Command::PrekopaCheck => {
            let spec = c.require(&c.prekopa, "prekopa")?;
            let fs = spec.functions()?;
            let mut o = PrekopaOptions { seed: c.seed(), ..Default::default() };
            o.unconditional = fs.iter().all(|f| f.profile.is_even());
            if let Some(e) = spec.extent {
                positive("prekopa.extent", e)?;
                o.extent = e;
            }
            if let Some(s) = c.samples {
                o.samples = s;
            }
            if let Some(t) = c.tolerance {
                o.tol = t;
            }
            let [a, b, d] = &fs;
            let (f1, f2, f3) = (|x: &[f64]| a.eval(x), |x: &[f64]| b.eval(x), |x: &[f64]| d.eval(x));
            Ok((prekopa_geometric_check([&f1, &f2, &f3], spec.dim, &o)?, None))
        }
        Command::Legendre => {
            let phi = c.gridfn()?;
            let n = phi.dim();
            match &c.rho {
                Some(_) => {
                    let rho = c.rho()?;
                    let z = c.center(n, true)?;
                    let mut o = LegendreOptions::default();
                    if let Some(t) = c.tolerance {
                        o.tol = t;
                    }
                    if let Some(m) = c.max_iter {
                        o.center.max_iter = m;
                    }
                    let r = legendre_santalo_verify(&phi, &rho, z.as_deref(), &o)?;
                    let z = r.vectors.get("z").cloned().unwrap_or_else(|| vec![0.0; n]);
                    let psi = legendre_transform(&phi, &z, None)?;
                    Ok((r, json(&psi.psi)))
                }
                None => {
                    let z = c.center(n, false)?.expect("explicit centre");
                    let r = biconjugate_check(&phi, &z, None)?;
                    let psi = legendre_transform(&phi, &z, None)?;
                    Ok((r, json(&psi.psi)))
                }
            }
        }
        Command::CenterFind => center_find(c),
        Command::Steiner => steiner(c),
        Command::Fuzz => {
            let family = *c.require(&c.family, "family")?;
            let mut o = FuzzOptions::new(family, c.count.unwrap_or(100), c.seed());
            o.dim = c.dim;
            if let Some(t) = c.tolerance {
                o.tol = t;
            }
            Ok((fuzz::fuzz(&o), None))
        }
    }
}

fn center_find(c: &ScenarioConfig) -> Result<(Report, Option<String>)> {
    let tol = c.tolerance.unwrap_or(1e-6);
    let mut r = Report::new("center-find");
    if let Some(input) = &c.function {
        let f = c.function(input)?;
        let n = f.dim();
        let grid = c.sphere_grid(n)?.unwrap_or_else(|| FunctionalOptions::for_dim(n).grid);
        let mut o = CenterOptions::default();
        if let Some(m) = c.max_iter {
            o.max_iter = m;
        }
        let pair = find_center(&f, grid, &o)?;
        let scale = f.reach();
        r.vector("z0", &pair.z0)
            .value("residual", pair.residual)
            .value("iterations", pair.iterations as f64)
            .value("body_volume", pair.body.volume());
        r.check("centroid_at_center", TAG_FUNCTIONAL, Relation::CloseAbs, pair.residual, 0.0, tol * scale);
        return Ok((r, None));
    }
    let phi = c.gridfn()?;
    let rho = c.rho()?;
    let mut o = CenterSolveOptions::default();
    if let Some(m) = c.max_iter {
        o.max_iter = m;
    }
    let res = optimal_center(&phi, &rho, &o)?;
    r.vector("z0", &res.z0)
        .value("objective", res.objective)
        .value("iterations", res.iterations as f64)
        .flag("nonunique_possible", res.nonunique_possible);
    if res.nonunique_possible {
        r.warn("kernel is not strictly convex: the optimal centre may not be unique");
    }
    if res.residual.is_finite() {
        r.value("residual", res.residual);
        r.check("fixed_point_residual", TAG_LEGENDRE, Relation::CloseAbs, res.residual, 0.0, tol);
    }
    Ok((r, None))
}

fn steiner(c: &ScenarioConfig) -> Result<(Report, Option<String>)> {
    let mut body = c.body()?;
    let n = body.dim();
    let tol = c.tolerance.unwrap_or(1e-2);
    let dirs: Vec<Vec<f64>> = match &c.directions {
        Some(d) => d.clone(),
        None => {
            let mut rng = crate::rng::stream(c.seed(), 0x57e1);
            (0..c.count.unwrap_or(1)).map(|_| crate::rng::unit_vector(&mut rng, n)).collect()
        }
    };
    let mut r = Report::new("steiner");
    for (k, u) in dirs.iter().enumerate() {
        crate::error::check_dim(n, u.len())?;
        let (next, step) = vp_monotonicity(&body, u, tol)?;
        r.absorb(&format!("step{k}"), step);
        body = next;
    }
    r.value("steps", dirs.len() as f64);
    r.absorb("final", ellipsoid_report(&body)?);
    Ok((r, json(&body.to_file())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_volume_product_runs() {
        let c = parse_config(r#"{"command": "volume-product", "body": "cube3", "z": 0}"#).unwrap();
        let out = run(&c).unwrap();
        assert!(out.report.passed());
        assert!((out.report.get("volume_product").unwrap() - 32.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn parse_error_names_field() {
        let e = parse_config("{\"command\": \"polar\",\n \"body\": \"cube3\",\n \"tolerence\": 1}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("tolerence"), "{msg}");
    }

    #[test]
    fn stochastic_command_needs_seed() {
        let c = parse_config(r#"{"command": "measure-check", "measure": "gaussian", "body": "square"}"#).unwrap();
        assert!(run(&c).unwrap_err().is_input_error());
    }

    #[test]
    fn digest_ignores_base_dir() {
        let mut c = parse_config(r#"{"command": "polar", "body": "square"}"#).unwrap();
        let d = c.digest();
        c.base_dir = Some(PathBuf::from("/tmp"));
        assert_eq!(d, c.digest());
    }
}
