//! Config-driven experiment runner behind the `waveshell` binary.
//!
//! # Config grammar
//!
//! One `key = value` per line; `#` starts a comment; blank lines are ignored.
//! Lists are comma separated, and `rays` separates vectors with `;`.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `dimension` | `1` | `d ∈ {1, 2, 3}` |
//! | `dispersion` | `zero` | `zero`, `cubic` or `full_sqrt` |
//! | `c`, `d0` | `1`, `1` | wave speed, fourth-order coefficient |
//! | `b3` | `d0/(2c)` | cubic coefficient |
//! | `rho` | `0.25` | regularizer cutoff |
//! | `tau` | `1` | rescaled time |
//! | `epsilon` | `0.4, 0.2, 0.1` | scale list |
//! | `k_norm` | `1` | list of `|k|` values |
//! | `k_direction` | `e₁` | direction of every `k` |
//! | `initial_data` | `default` | `default`, `gaussian` or `tabulated:<path>` |
//! | `z_min`, `z_max`, `z_nodes` | `-64`, `64`, `4096` | profile grid |
//! | `z_truncation` | `48` | profile truncation radius |
//! | `tail_tolerance` | `1e-4` | allowed profile mass beyond the truncation |
//! | `quad_scale` | `1` | sphere-quadrature refinement factor `≥ 1` |
//! | `azimuth_nodes` | `16` | azimuthal nodes in `d = 3` |
//! | `test_fn` | `cap-quadratic` | stationary-phase test function |
//! | `sphere_nodes` | automatic | fixed polar node count for `stationary-phase` |
//! | `n_list` | per command | `N` values for `stationary-phase` and `fresnel` |
//! | `beta` | `0.3` | oscillatory-integral exponent |
//! | `grid_dx`, `grid_cap` | `0.1`, `4194304` | bench grid spacing and largest grid actually run |
//! | `t` | `τ/ε²` | physical time for `reconstruct` (first `epsilon`) |
//! | `rays`, `ray_samples` | `k_direction`, `512` | `reconstruct` rays and samples per ray |
//! | `output` | stdout | CSV destination |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::analysis::{front_radius, pointwise_convergence_study, ConvergenceReport, PolarEvalConfig};
use crate::dispersion::{DispersionKind, DispersionSpec};
use crate::error::{Error, Result};
use crate::initial_data::{load_tabulated, named_spectrum};
use crate::operators::{reconstruct, Regularizer};
use crate::spectral::{inverse_transform_d, norm, FourierField, Grid1D, GridD};
use crate::stationary_phase::{
    fresnel_oracle, oscillatory_integral, oscillatory_limit, stationary_phase_functional, to_vec3, HalfSphereTestFn,
    OscillatoryIntegralSpec, SphereQuadrature,
};

pub const CONVERGE_HEADER: &str = "d,b_kind,rho,tau,epsilon,k_norm,abs_error,a_term_re,a_term_im,g_abs,wall_ms";
pub const STATIONARY_PHASE_HEADER: &str = "d,N,re,im,abs_error_vs_phi_kappa,nodes";
pub const FRESNEL_HEADER: &str = "beta,N,re,im,abs_error";
pub const BENCH_HEADER: &str = "epsilon,recon_wall_ms,recon_peak_mem_est,grid_cells_required,grid_wall_ms,grid_status";
pub const RECONSTRUCT_HEADER: &str = "x_coord,re,im";

#[derive(Debug, Parser)]
#[command(
    name = "waveshell",
    version,
    about = "Shell reconstruction experiments with CSV output"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config file (`key = value` lines)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path; overrides the config's `output`
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel sections
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Sphere-quadrature refinement factor (>= 1); overrides the config
    #[arg(long = "quad-scale", global = true)]
    pub quad_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Pointwise convergence study over epsilon and k
    Converge,
    /// Spherical stationary-phase functional over an N list
    StationaryPhase,
    /// Oscillatory integral against its Fresnel limit
    Fresnel,
    /// Reconstruction cost versus direct grid cost over epsilon
    Bench,
    /// Shell field samples along rays
    Reconstruct,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Named(String),
    Tabulated(PathBuf),
}

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub dispersion: String,
    pub c: f64,
    pub d0: f64,
    pub b3: Option<f64>,
    pub rho: f64,
    pub tau: f64,
    pub epsilon: Vec<f64>,
    pub k_norm: Vec<f64>,
    pub k_direction: Vec<f64>,
    pub initial_data: InitialData,
    pub z_min: f64,
    pub z_max: f64,
    pub z_nodes: usize,
    pub z_truncation: f64,
    pub tail_tolerance: f64,
    pub quad_scale: f64,
    pub azimuth_nodes: usize,
    pub test_fn: String,
    pub sphere_nodes: Option<usize>,
    pub n_list: Option<Vec<f64>>,
    pub beta: f64,
    pub grid_dx: f64,
    pub grid_cap: usize,
    pub t: Option<f64>,
    pub rays: Option<Vec<Vec<f64>>>,
    pub ray_samples: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            dispersion: "zero".into(),
            c: 1.0,
            d0: 1.0,
            b3: None,
            rho: 0.25,
            tau: 1.0,
            epsilon: vec![0.4, 0.2, 0.1],
            k_norm: vec![1.0],
            k_direction: vec![1.0],
            initial_data: InitialData::Named("default".into()),
            z_min: -64.0,
            z_max: 64.0,
            z_nodes: 4096,
            z_truncation: 48.0,
            tail_tolerance: 1e-4,
            quad_scale: 1.0,
            azimuth_nodes: 16,
            test_fn: "cap-quadratic".into(),
            sphere_nodes: None,
            n_list: None,
            beta: 0.3,
            grid_dx: 0.1,
            grid_cap: 1 << 22,
            t: None,
            rays: None,
            ray_samples: 512,
            output: None,
        }
    }
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| config_error(line, key, format!("`{v}` is not a finite number")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| config_error(line, key, format!("`{v}` is not a non-negative integer")))
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_f64(line, key, s)).collect()
}

impl ExperimentConfig {
    /// Parses config text. Relative `tabulated:` paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line_no, content, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(config_error(line_no, key, "duplicate key"));
            }
            lines.push((line_no, key.to_string()));
            match key {
                "dimension" => cfg.dimension = parse_usize(line_no, key, value)?,
                "dispersion" => cfg.dispersion = value.to_string(),
                "c" => cfg.c = parse_f64(line_no, key, value)?,
                "d0" => cfg.d0 = parse_f64(line_no, key, value)?,
                "b3" => cfg.b3 = Some(parse_f64(line_no, key, value)?),
                "rho" => cfg.rho = parse_f64(line_no, key, value)?,
                "tau" => cfg.tau = parse_f64(line_no, key, value)?,
                "epsilon" => cfg.epsilon = parse_list(line_no, key, value)?,
                "k_norm" => cfg.k_norm = parse_list(line_no, key, value)?,
                "k_direction" => cfg.k_direction = parse_list(line_no, key, value)?,
                "initial_data" => {
                    cfg.initial_data = match value.strip_prefix("tabulated:") {
                        Some(p) => {
                            let p = PathBuf::from(p.trim());
                            InitialData::Tabulated(match base {
                                Some(b) if p.is_relative() => b.join(p),
                                _ => p,
                            })
                        }
                        None => InitialData::Named(value.to_string()),
                    }
                }
                "z_min" => cfg.z_min = parse_f64(line_no, key, value)?,
                "z_max" => cfg.z_max = parse_f64(line_no, key, value)?,
                "z_nodes" => cfg.z_nodes = parse_usize(line_no, key, value)?,
                "z_truncation" => cfg.z_truncation = parse_f64(line_no, key, value)?,
                "tail_tolerance" => cfg.tail_tolerance = parse_f64(line_no, key, value)?,
                "quad_scale" => cfg.quad_scale = parse_f64(line_no, key, value)?,
                "azimuth_nodes" => cfg.azimuth_nodes = parse_usize(line_no, key, value)?,
                "test_fn" => cfg.test_fn = value.to_string(),
                "sphere_nodes" => cfg.sphere_nodes = Some(parse_usize(line_no, key, value)?),
                "n_list" => cfg.n_list = Some(parse_list(line_no, key, value)?),
                "beta" => cfg.beta = parse_f64(line_no, key, value)?,
                "grid_dx" => cfg.grid_dx = parse_f64(line_no, key, value)?,
                "grid_cap" => cfg.grid_cap = parse_usize(line_no, key, value)?,
                "t" => cfg.t = Some(parse_f64(line_no, key, value)?),
                "rays" => {
                    cfg.rays = Some(
                        value
                            .split(';')
                            .map(|r| parse_list(line_no, key, r))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "ray_samples" => cfg.ray_samples = parse_usize(line_no, key, value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                other => return Err(config_error(line_no, other, "unknown key")),
            }
        }
        if !seen.contains("k_direction") {
            cfg.k_direction = vec![0.0; cfg.dimension.max(1)];
            cfg.k_direction[0] = 1.0;
        }
        cfg.validate(&lines)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    fn validate(&self, lines: &[(usize, String)]) -> Result<()> {
        let line_of = |key: &str| lines.iter().find(|(_, k)| k == key).map_or(0, |(l, _)| *l);
        let fail = |key: &str, msg: String| Err(config_error(line_of(key), key, msg));
        if !(1..=3).contains(&self.dimension) {
            return fail(
                "dimension",
                format!("dimension must be 1, 2 or 3, got {}", self.dimension),
            );
        }
        if !["zero", "cubic", "full_sqrt"].contains(&self.dispersion.as_str()) {
            return fail(
                "dispersion",
                format!("unknown law `{}` (zero, cubic, full_sqrt)", self.dispersion),
            );
        }
        for (key, v) in [
            ("c", self.c),
            ("d0", self.d0),
            ("rho", self.rho),
            ("tau", self.tau),
            ("grid_dx", self.grid_dx),
        ] {
            if v <= 0.0 {
                return fail(key, format!("must be positive, got {v}"));
            }
        }
        if let Some(e) = self.epsilon.iter().find(|e| **e <= 0.0) {
            return fail("epsilon", format!("every epsilon must be positive, got {e}"));
        }
        if let Some(k) = self.k_norm.iter().find(|k| **k <= 0.0) {
            return fail("k_norm", format!("every |k| must be positive, got {k}"));
        }
        if self.k_direction.len() != self.dimension || norm(&self.k_direction) == 0.0 {
            return fail(
                "k_direction",
                format!("needs {} components, not all zero", self.dimension),
            );
        }
        if self.z_nodes < 16 || self.z_min >= self.z_max {
            return fail(
                "z_nodes",
                "profile grid needs z_min < z_max and at least 16 nodes".into(),
            );
        }
        if self.z_truncation <= 0.0 || self.tail_tolerance <= 0.0 {
            return fail(
                "z_truncation",
                "truncation radius and tail tolerance must be positive".into(),
            );
        }
        if !(self.quad_scale >= 1.0) {
            return fail("quad_scale", format!("must be >= 1, got {}", self.quad_scale));
        }
        if self.azimuth_nodes == 0 {
            return fail("azimuth_nodes", "must be positive".into());
        }
        if !crate::stationary_phase::TEST_FUNCTIONS.contains(&self.test_fn.as_str()) {
            return fail(
                "test_fn",
                format!(
                    "unknown test function `{}` ({:?})",
                    self.test_fn,
                    crate::stationary_phase::TEST_FUNCTIONS
                ),
            );
        }
        if let Some(n) = self.n_list.iter().flatten().find(|n| **n <= 0.0) {
            return fail("n_list", format!("every N must be positive, got {n}"));
        }
        if let Some(t) = self.t {
            if t <= 0.0 {
                return fail("t", format!("must be positive, got {t}"));
            }
        }
        if let Some(rays) = &self.rays {
            if rays.iter().any(|r| r.len() != self.dimension || norm(r) == 0.0) {
                return fail(
                    "rays",
                    format!("each ray needs {} components, not all zero", self.dimension),
                );
            }
        }
        if self.ray_samples == 0 {
            return fail("ray_samples", "must be positive".into());
        }
        if let InitialData::Named(n) = &self.initial_data {
            if n != "default" && n != "gaussian" {
                return fail("initial_data", format!("unknown initial data `{n}`"));
            }
        }
        self.dispersion_spec(self.epsilon.first().copied().unwrap_or(1.0))
            .map_err(|e| config_error(line_of("dispersion"), "dispersion", e.to_string()))?;
        Ok(())
    }

    pub fn dispersion_spec(&self, epsilon: f64) -> Result<DispersionSpec> {
        let kind = match self.dispersion.as_str() {
            "zero" => DispersionKind::Zero,
            "cubic" => DispersionKind::Cubic {
                b3: self.b3.unwrap_or(self.d0 / (2.0 * self.c)),
            },
            _ => DispersionKind::FullSqrt { d0: self.d0 },
        };
        DispersionSpec::new(kind, self.c, epsilon)
    }

    pub fn initial_spectrum(&self) -> Result<FourierField> {
        match &self.initial_data {
            InitialData::Named(n) => named_spectrum(n, self.dimension),
            InitialData::Tabulated(p) => load_tabulated(p, self.dimension),
        }
    }

    pub fn polar_config(&self) -> Result<PolarEvalConfig> {
        PolarEvalConfig::new(
            Grid1D::new(self.z_min, self.z_max, self.z_nodes)?,
            self.z_truncation,
            self.tail_tolerance,
            self.quad_scale,
            self.azimuth_nodes,
        )
    }

    pub fn regularizer(&self) -> Result<Regularizer> {
        Regularizer::new(self.rho, self.dimension)
    }

    pub fn unit_direction(&self) -> Vec<f64> {
        let n = norm(&self.k_direction);
        self.k_direction.iter().map(|v| v / n).collect()
    }

    pub fn k_vectors(&self) -> Vec<Vec<f64>> {
        let dir = self.unit_direction();
        self.k_norm
            .iter()
            .map(|&k| dir.iter().map(|v| v * k).collect())
            .collect()
    }
}

/// Full-precision float formatting used in every CSV.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

/// Runs the pointwise study and renders its CSV.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<(ConvergenceReport, String)> {
    let u0 = cfg.initial_spectrum()?;
    let spec = cfg.dispersion_spec(cfg.epsilon.first().copied().unwrap_or(1.0))?;
    let reg = cfg.regularizer()?;
    let report = pointwise_convergence_study(
        &u0,
        &spec,
        Some(&reg),
        &cfg.k_vectors(),
        cfg.tau,
        &cfg.epsilon,
        &cfg.polar_config()?,
    )?;
    let ks = cfg.k_vectors();
    let mut out = format!("{CONVERGE_HEADER}\n");
    for r in &report.records {
        // report the configured |k| rather than the norm of the rotated vector
        let k_norm = ks.iter().position(|k| k == &r.k).map_or(r.k_norm, |i| cfg.k_norm[i]);
        out.push_str(&csv_row(&[
            r.dim.to_string(),
            r.b_kind.to_string(),
            fmt_f64(r.rho.unwrap_or(0.0)),
            fmt_f64(r.tau),
            fmt_f64(r.epsilon),
            fmt_f64(k_norm),
            fmt_f64(r.abs_error),
            fmt_f64(r.a_term.re),
            fmt_f64(r.a_term.im),
            fmt_f64(r.g_term.norm()),
            fmt_f64(r.wall_ms),
        ]));
    }
    Ok((report, out))
}

/// Least-squares slope of `log(error)` against `log(ε)` per `k` block.
pub fn rate_fits(report: &ConvergenceReport) -> Vec<(f64, Option<f64>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < report.records.len() {
        let k = &report.records[i].k;
        let block: Vec<_> = report.records[i..].iter().take_while(|r| &r.k == k).collect();
        let pts: Vec<(f64, f64)> = block
            .iter()
            .filter(|r| r.abs_error > 0.0)
            .map(|r| (r.epsilon.ln(), r.abs_error.ln()))
            .collect();
        let slope = (pts.len() >= 2).then(|| {
            let n = pts.len() as f64;
            let (mx, my) = (
                pts.iter().map(|p| p.0).sum::<f64>() / n,
                pts.iter().map(|p| p.1).sum::<f64>() / n,
            );
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        });
        out.push((block[0].k_norm, slope));
        i += block.len();
    }
    out
}

pub fn run_stationary_phase(cfg: &ExperimentConfig) -> Result<String> {
    let d = cfg.dimension;
    let kappa = to_vec3(&cfg.unit_direction());
    let phi = HalfSphereTestFn::named(&cfg.test_fn, d, kappa)?;
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![1e2, 1e3, 1e4]);
    let mut out = format!("{STATIONARY_PHASE_HEADER}\n");
    for n in n_list {
        let quad = match (cfg.sphere_nodes, d) {
            (Some(m), 2) => SphereQuadrature::circle(m)?,
            (Some(m), 3) => SphereQuadrature::sphere(m, cfg.azimuth_nodes, kappa)?,
            _ => SphereQuadrature::for_oscillation(d, n, kappa, cfg.quad_scale, cfg.azimuth_nodes)?,
        };
        let value = stationary_phase_functional(&phi, n, &quad)?;
        let err = (value - phi.eval(&kappa)).norm();
        out.push_str(&csv_row(&[
            d.to_string(),
            fmt_f64(n),
            fmt_f64(value.re),
            fmt_f64(value.im),
            fmt_f64(err),
            quad.len().to_string(),
        ]));
    }
    Ok(out)
}

pub fn run_fresnel(cfg: &ExperimentConfig) -> Result<String> {
    let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![1e4, 1e5, 1e6]);
    if !(cfg.beta > 1.0 / 6.0 && cfg.beta < 0.5) {
        return Err(Error::TheoremScope(format!(
            "beta = {} is outside (1/6, 1/2), where the oscillatory integral has its Fresnel limit",
            cfg.beta
        )));
    }
    let (c, s) = fresnel_oracle();
    let limit = Complex64::new(c, s) * 2f64.sqrt();
    let mut out = format!("{FRESNEL_HEADER}\n");
    for n in n_list {
        let value = oscillatory_integral(&OscillatoryIntegralSpec::new(cfg.beta, n)?)?;
        out.push_str(&csv_row(&[
            fmt_f64(cfg.beta),
            fmt_f64(n),
            fmt_f64(value.re),
            fmt_f64(value.im),
            fmt_f64((value - limit).norm()),
        ]));
    }
    debug_assert!((limit - oscillatory_limit()).norm() < 1e-12);
    Ok(out)
}

/// One bench row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub epsilon: f64,
    pub recon_wall_ms: f64,
    pub recon_peak_mem_est: usize,
    pub grid_cells_required: u64,
    pub grid_wall_ms: f64,
    pub grid_measured: bool,
}

const BENCH_REPEATS: usize = 5;
const BENCH_POINTS: usize = 2048;
const BENCH_DIRECTIONS: usize = 64;

fn bench_directions(dim: usize, pole: &[f64], azimuth: usize) -> Result<SphereQuadrature> {
    match dim {
        1 => Ok(SphereQuadrature::pair()),
        2 => SphereQuadrature::circle(BENCH_DIRECTIONS),
        _ => SphereQuadrature::sphere(BENCH_DIRECTIONS, azimuth, to_vec3(pole)),
    }
}

/// Cost of one direct spectral grid solve with `n` nodes per axis.
fn grid_solve_ms(u0: &FourierField, spec: &DispersionSpec, dim: usize, n: usize, dx: f64, t: f64) -> Result<f64> {
    let half = n as f64 * dx / 2.0;
    let x_grid = GridD::new(vec![Grid1D::with_spacing(-half, dx, n)?; dim])?;
    let k_grid = x_grid.dual();
    let start = Instant::now();
    let values = (0..k_grid.len())
        .map(|flat| {
            let k = k_grid.point(flat);
            Ok(spec.multiplier(norm(&k), t) * u0.eval(&k)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let field = FourierField::from_samples(k_grid, values)?;
    std::hint::black_box(inverse_transform_d(&field, &x_grid)?);
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

/// Reconstruction cost (fixed directions, a fixed batch of shell
/// evaluations) against the grid a direct solve would need at each `ε`.
pub fn run_bench(cfg: &ExperimentConfig) -> Result<(Vec<BenchRow>, String)> {
    let d = cfg.dimension;
    let u0 = cfg.initial_spectrum()?;
    let reg = cfg.regularizer()?;
    let polar = cfg.polar_config()?;
    let dir = cfg.unit_direction();
    let dirs = Arc::new(bench_directions(d, &dir, cfg.azimuth_nodes)?);
    let mut rows = Vec::new();
    let mut calibration: Option<(f64, f64)> = None;
    for &eps in &cfg.epsilon {
        let spec = cfg.dispersion_spec(eps)?;
        let t = cfg.tau / (eps * eps);
        let radius = front_radius(cfg.c, eps, cfg.tau);
        let mut best = f64::INFINITY;
        for _ in 0..BENCH_REPEATS {
            let start = Instant::now();
            let field = reconstruct(&u0, &spec, Some(&reg), Arc::clone(&dirs), polar.z_grid(), t)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..BENCH_POINTS {
                let r = radius
                    + polar.z_grid().min()
                    + (i as f64 + 0.5) / BENCH_POINTS as f64 * (polar.z_grid().max() - polar.z_grid().min());
                let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
                acc += field.eval(&x);
            }
            std::hint::black_box(acc);
            best = best.min(start.elapsed().as_secs_f64() * 1e3);
        }
        let window = u0.support_radius().map_or(polar.z_grid().len() / 2, |s| {
            (s / polar.z_grid().dual().spacing()).ceil() as usize
        });
        let mem = dirs.len() * (polar.z_grid().len() + window) * std::mem::size_of::<Complex64>();
        let per_axis = (2.0 * radius / cfg.grid_dx).ceil();
        let cells = per_axis.powi(d as i32);
        let (grid_ms, measured) = if d < 3 && cells <= cfg.grid_cap as f64 {
            let ms = grid_solve_ms(&u0, &spec, d, per_axis as usize, cfg.grid_dx, t)?;
            calibration = Some((cells, ms));
            (ms, true)
        } else {
            let (cal_cells, cal_ms) = match calibration {
                Some(c) => c,
                None => {
                    let n = ((cfg.grid_cap as f64).powf(1.0 / d as f64).floor() as usize).clamp(16, 256);
                    let ms = grid_solve_ms(&u0, &spec, d, n, cfg.grid_dx, t)?;
                    let c = ((n as f64).powi(d as i32), ms);
                    calibration = Some(c);
                    c
                }
            };
            (cal_ms * cells * cells.log2() / (cal_cells * cal_cells.log2()), false)
        };
        rows.push(BenchRow {
            epsilon: eps,
            recon_wall_ms: best,
            recon_peak_mem_est: mem,
            grid_cells_required: cells as u64,
            grid_wall_ms: grid_ms,
            grid_measured: measured,
        });
    }
    let mut out = format!("{BENCH_HEADER}\n");
    for r in &rows {
        out.push_str(&csv_row(&[
            fmt_f64(r.epsilon),
            fmt_f64(r.recon_wall_ms),
            r.recon_peak_mem_est.to_string(),
            r.grid_cells_required.to_string(),
            fmt_f64(r.grid_wall_ms),
            if r.grid_measured { "measured" } else { "estimated" }.to_string(),
        ]));
    }
    Ok((rows, out))
}

/// Shell field samples `r ↦ (S V)(r·ray)` for `r ∈ [0, 2ct)`, one block per ray.
pub fn run_reconstruct(cfg: &ExperimentConfig) -> Result<String> {
    let d = cfg.dimension;
    let eps = *cfg
        .epsilon
        .first()
        .ok_or_else(|| config_error(0, "epsilon", "reconstruct needs at least one epsilon"))?;
    let spec = cfg.dispersion_spec(eps)?;
    let t = cfg.t.unwrap_or(cfg.tau / (eps * eps));
    let u0 = cfg.initial_spectrum()?;
    let reg = cfg.regularizer()?;
    let polar = cfg.polar_config()?;
    let dir = cfg.unit_direction();
    let kmax = u0.support_radius().unwrap_or(1.0);
    let k: Vec<f64> = dir.iter().map(|v| v * kmax).collect();
    let dirs = Arc::new(polar.directions(d, &k, cfg.c * t)?);
    let field = reconstruct(&u0, &spec, Some(&reg), dirs, polar.z_grid(), t)?;
    let rays = cfg.rays.clone().unwrap_or_else(|| vec![dir.clone()]);
    let reach = 2.0 * cfg.c * t;
    let mut out = format!("{RECONSTRUCT_HEADER}\n");
    for ray in rays {
        let n = norm(&ray);
        let unit: Vec<f64> = ray.iter().map(|v| v / n).collect();
        for i in 0..cfg.ray_samples {
            let r = reach * i as f64 / cfg.ray_samples as f64;
            let x: Vec<f64> = unit.iter().map(|v| v * r).collect();
            let v = field.eval(&x);
            let _ = writeln!(out, "{},{},{}", fmt_f64(r), fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    Ok(out)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Executes a parsed command line; the error carries the exit code.
pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidParameter("--threads must be positive".into()));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.quad_scale {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(config_error(0, "quad-scale", format!("must be >= 1, got {s}")));
        }
        cfg.quad_scale = s;
    }
    let out_path = cli.out.clone().or_else(|| cfg.output.clone());
    let text = match cli.command {
        Command::Converge => {
            let (report, text) = run_converge(&cfg)?;
            for (k, slope) in rate_fits(&report) {
                if let Some(p) = slope {
                    eprintln!("rate fit |k| = {k}: error ~ epsilon^{p:.3}");
                }
            }
            text
        }
        Command::StationaryPhase => run_stationary_phase(&cfg)?,
        Command::Fresnel => run_fresnel(&cfg)?,
        Command::Bench => run_bench(&cfg)?.1,
        Command::Reconstruct => run_reconstruct(&cfg)?,
    };
    write_output(out_path.as_deref(), &text)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
