//! Polar evaluation of the reconstruction in Fourier space and its error
//! diagnostics.
//!
//! With front radius `R = cτ/ε²`, the reconstructed Fourier coefficient times
//! its carrier phase is
//!
//! ```text
//! Q(k) = e^{i|k|R} ∫_{|z|<R} ∫_S (R + z)^{d-1} R^{-(d-1)/2} e^{-iq·k(R+z)} V(z, q, τ) dS dz
//! ```
//!
//! evaluated by summing over the `z` nodes of the profile grid and a sphere
//! quadrature, never on a `d`-dimensional grid. Replacing `(R + z)^{d-1}` by
//! `R^{d-1}` (and, in `d = 3`, by `R² + 2Rz`) gives the sphere-only terms
//!
//! ```text
//! A₀ = e^{i|k|R} Σ_q w_q R^{(d-1)/2} e^{-iq·k R} V̂(q·k, q)
//! A₁ = A₀ + e^{i|k|R} Σ_q w_q (2/R) R^{(d-1)/2} e^{-iq·k R} i∂_ξV̂(q·k, q)
//! ```
//!
//! and `G = Q - A` collects the kernel difference and the part of `V̂` with
//! `|z| ≥ R`. Here `V̂` is the discrete transform of the truncated profile,
//! `V̂(ξ, q) = Σ_{|z_j| ≤ Z} Δz e^{-iξz_j} V(z_j, q)`, over the same nodes as
//! `Q`, so the split `Q = A + G` is exact up to rounding and `∂_ξV̂` is the
//! exact derivative of that sum.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::DispersionSpec;
use crate::error::{Error, Result};
use crate::operators::{evolve, restrict, restrict_regularized, ProfileFamily, Regularizer, ShellField};
use crate::spectral::{forward_transform_d, norm, FourierField, Grid1D, GridD, SampledField};
use crate::stationary_phase::{dot, to_vec3, SphereQuadrature};

pub const DEFAULT_Z_TRUNCATION: f64 = 48.0;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_AZIMUTH_NODES: usize = 16;

/// Profile grid, truncation and sphere-quadrature resolution for polar
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarEvalConfig {
    z_grid: Grid1D,
    z_truncation: f64,
    tail_tolerance: f64,
    quad_scale: f64,
    azimuth_nodes: usize,
}

impl Default for PolarEvalConfig {
    fn default() -> Self {
        Self {
            z_grid: Grid1D::new(-64.0, 64.0, 1 << 12).expect("static grid"),
            z_truncation: DEFAULT_Z_TRUNCATION,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            quad_scale: 1.0,
            azimuth_nodes: DEFAULT_AZIMUTH_NODES,
        }
    }
}

impl PolarEvalConfig {
    pub fn new(
        z_grid: Grid1D,
        z_truncation: f64,
        tail_tolerance: f64,
        quad_scale: f64,
        azimuth_nodes: usize,
    ) -> Result<Self> {
        if !(z_truncation > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "z truncation must be positive, got {z_truncation}"
            )));
        }
        if !(tail_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance must be positive, got {tail_tolerance}"
            )));
        }
        if !(quad_scale >= 1.0 && quad_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quadrature scale must be >= 1, got {quad_scale}"
            )));
        }
        if azimuth_nodes == 0 {
            return Err(Error::InvalidParameter("azimuth node count must be positive".into()));
        }
        Ok(Self {
            z_grid,
            z_truncation,
            tail_tolerance,
            quad_scale,
            azimuth_nodes,
        })
    }

    pub fn z_grid(&self) -> Grid1D {
        self.z_grid
    }

    pub fn z_truncation(&self) -> f64 {
        self.z_truncation
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn quad_scale(&self) -> f64 {
        self.quad_scale
    }

    pub fn azimuth_nodes(&self) -> usize {
        self.azimuth_nodes
    }

    pub fn with_quad_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quadrature scale must be >= 1, got {scale}"
            )));
        }
        self.quad_scale = scale;
        Ok(self)
    }

    /// Oscillation strength seen by the sphere quadrature:
    /// `|k| (R + min(Z, R))`.
    pub fn oscillation(&self, k_norm: f64, radius: f64) -> f64 {
        k_norm * (radius + self.z_truncation.min(radius))
    }

    /// Smallest admissible directions for evaluating at `k`; in `d = 3` the
    /// quadrature pole is `k/|k|`.
    pub fn directions(&self, dim: usize, k: &[f64], radius: f64) -> Result<SphereQuadrature> {
        let k_norm = norm(k);
        if k_norm == 0.0 {
            return Err(Error::TheoremScope(
                "k = 0 is excluded; the pointwise limit holds for k != 0".into(),
            ));
        }
        let kappa = to_vec3(&k.iter().map(|v| v / k_norm).collect::<Vec<_>>());
        SphereQuadrature::for_oscillation(
            dim,
            self.oscillation(k_norm, radius),
            kappa,
            self.quad_scale,
            self.azimuth_nodes,
        )
    }
}

/// `R = cτ/ε²`.
pub fn front_radius(c: f64, epsilon: f64, tau: f64) -> f64 {
    c * tau / (epsilon * epsilon)
}

/// An `A` term and its two parts; `correction` is zero for order 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ATerm {
    pub value: Complex64,
    pub leading: Complex64,
    pub correction: Complex64,
}

/// Everything the polar formula yields at one `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDecomposition {
    pub q: Complex64,
    pub a0: ATerm,
    pub g0: Complex64,
    /// First-order terms, `d = 3` only.
    pub a1: Option<ATerm>,
    pub g1: Option<Complex64>,
    /// `Σ_q w_q ∫_{|z|>Z} |V| dz`, the mass discarded by truncation.
    pub tail_mass: f64,
}

#[derive(Default, Clone, Copy)]
struct Sums {
    q: Complex64,
    a0: Complex64,
    a1_corr: Complex64,
    g0: Complex64,
    g1: Complex64,
    tail: f64,
}

impl std::ops::Add for Sums {
    type Output = Sums;
    fn add(self, o: Sums) -> Sums {
        Sums {
            q: self.q + o.q,
            a0: self.a0 + o.a0,
            a1_corr: self.a1_corr + o.a1_corr,
            g0: self.g0 + o.g0,
            g1: self.g1 + o.g1,
            tail: self.tail + o.tail,
        }
    }
}

/// `Σ_{|z_j| ≤ Z} Δz e^{-iξz_j} V_j`.
pub fn discrete_spectrum(samples: &[Complex64], z_grid: &Grid1D, z_truncation: f64, xi: f64) -> Complex64 {
    let dz = z_grid.spacing();
    (0..z_grid.len())
        .filter(|&j| z_grid.node(j).abs() <= z_truncation)
        .map(|j| samples[j] * Complex64::from_polar(dz, -xi * z_grid.node(j)))
        .sum()
}

/// Exact `ξ`-derivative of [`discrete_spectrum`].
pub fn discrete_spectrum_derivative(samples: &[Complex64], z_grid: &Grid1D, z_truncation: f64, xi: f64) -> Complex64 {
    let dz = z_grid.spacing();
    (0..z_grid.len())
        .filter(|&j| z_grid.node(j).abs() <= z_truncation)
        .map(|j| {
            let z = z_grid.node(j);
            samples[j] * Complex64::from_polar(dz * z, -xi * z) * Complex64::new(0.0, -1.0)
        })
        .sum()
}

/// Fourth-order central difference `f'(x) ≈ (f(x-2h) - 8f(x-h) + 8f(x+h) - f(x+2h)) / 12h`.
pub fn central_difference4(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (f(x - 2.0 * h) - f(x - h) * 8.0 + f(x + h) * 8.0 - f(x + 2.0 * h)) / (12.0 * h)
}

/// Polar formula and its `A`/`G` split at `k` for a profile already at `τ`.
pub fn polar_decomposition(
    profile: &ProfileFamily,
    k: &[f64],
    c: f64,
    epsilon: f64,
    tau: f64,
    cfg: &PolarEvalConfig,
) -> Result<PolarDecomposition> {
    let dim = profile.dim();
    if k.len() != dim {
        return Err(Error::GridMismatch(format!(
            "k has {} components, profile is {dim}-dimensional",
            k.len()
        )));
    }
    let k_norm = norm(k);
    if k_norm == 0.0 {
        return Err(Error::TheoremScope(
            "k = 0 is excluded; the pointwise limit holds for k != 0".into(),
        ));
    }
    if !(c > 0.0 && epsilon > 0.0 && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "polar evaluation needs c, epsilon, tau > 0 (got {c}, {epsilon}, {tau})"
        )));
    }
    if (profile.tau() - tau).abs() > 1e-12 * tau.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "profile is at tau = {} but evaluation requested at tau = {tau}",
            profile.tau()
        )));
    }
    let radius = front_radius(c, epsilon, tau);
    let z_grid = *profile.z_grid();
    let z_cut = cfg.z_truncation;
    let reach = z_cut.min(radius);
    if z_grid.min() > -reach || z_grid.max() < reach {
        return Err(Error::InvalidGrid(format!(
            "z grid [{}, {}] does not cover [-{reach}, {reach}]",
            z_grid.min(),
            z_grid.max()
        )));
    }
    let kappa = to_vec3(&k.iter().map(|v| v / k_norm).collect::<Vec<_>>());
    let directions = profile.directions();
    directions.check_resolution(cfg.oscillation(k_norm, radius), &kappa, "polar evaluation")?;

    let k3 = to_vec3(k);
    let half_power = radius.powf((dim as f64 - 1.0) / 2.0);
    let dz = z_grid.spacing();
    let nodes: Vec<(usize, f64)> = (0..z_grid.len())
        .map(|j| (j, z_grid.node(j)))
        .filter(|(_, z)| z.abs() <= z_cut)
        .collect();
    let sums = (0..directions.len())
        .into_par_iter()
        .map(|i| {
            let q = directions.nodes()[i];
            let w = directions.weights()[i];
            let xi = dot(&q, &k3);
            let v = profile.profile(i);
            let mut s = Sums::default();
            for (j, vj) in v.iter().enumerate() {
                let z = z_grid.node(j);
                if z.abs() > z_cut {
                    s.tail += vj.norm() * dz;
                }
            }
            let zero = Complex64::new(0.0, 0.0);
            let (mut vhat, mut dvhat, mut q_sum, mut g0, mut g1) = (zero, zero, zero, zero, zero);
            for &(j, z) in &nodes {
                let e: Complex64 = v[j] * Complex64::from_polar(dz, -xi * z);
                vhat += e;
                dvhat += e * z;
                if z.abs() < radius {
                    let kernel_gap = match dim {
                        1 => 0.0,
                        2 => z,
                        _ => z * (2.0 * radius + z),
                    };
                    q_sum += e * ((radius + z).powi(dim as i32 - 1) / half_power);
                    g0 += e * (kernel_gap / half_power);
                    if dim == 3 {
                        g1 += e * (z * z / radius);
                    }
                } else {
                    g0 -= e * half_power;
                    if dim == 3 {
                        g1 -= e * (radius + 2.0 * z);
                    }
                }
            }
            let outer = Complex64::from_polar(w, (k_norm - xi) * radius);
            Sums {
                q: outer * q_sum,
                a0: outer * vhat * half_power,
                // i∂_ξV̂ equals Σ z e^{-iξz} V Δz
                a1_corr: outer * dvhat * (2.0 / radius * half_power),
                g0: outer * g0,
                g1: outer * g1,
                tail: w * s.tail,
            }
        })
        .reduce(Sums::default, |a, b| a + b);
    let a0 = ATerm {
        value: sums.a0,
        leading: sums.a0,
        correction: Complex64::new(0.0, 0.0),
    };
    let (a1, g1) = if dim == 3 {
        (
            Some(ATerm {
                value: sums.a0 + sums.a1_corr,
                leading: sums.a0,
                correction: sums.a1_corr,
            }),
            Some(sums.g1),
        )
    } else {
        (None, None)
    };
    Ok(PolarDecomposition {
        q: sums.q,
        a0,
        g0: sums.g0,
        a1,
        g1,
        tail_mass: sums.tail,
    })
}

/// `e^{i|k|R} (F_d S V)(k, τ/ε²)` by the polar formula.
pub fn qhat_polar(
    profile: &ProfileFamily,
    k: &[f64],
    c: f64,
    epsilon: f64,
    tau: f64,
    cfg: &PolarEvalConfig,
) -> Result<Complex64> {
    Ok(polar_decomposition(profile, k, c, epsilon, tau, cfg)?.q)
}

fn check_order(dim: usize, order: usize) -> Result<()> {
    match (order, dim) {
        (0, _) | (1, 3) => Ok(()),
        (1, _) => Err(Error::InvalidParameter(format!(
            "first-order terms are defined for d = 3 only, got d = {dim}"
        ))),
        _ => Err(Error::InvalidParameter(format!("order must be 0 or 1, got {order}"))),
    }
}

pub fn a_term(
    profile: &ProfileFamily,
    k: &[f64],
    c: f64,
    epsilon: f64,
    tau: f64,
    order: usize,
    cfg: &PolarEvalConfig,
) -> Result<ATerm> {
    check_order(profile.dim(), order)?;
    let dec = polar_decomposition(profile, k, c, epsilon, tau, cfg)?;
    Ok(if order == 0 { dec.a0 } else { dec.a1.expect("d = 3") })
}

pub fn g_term(
    profile: &ProfileFamily,
    k: &[f64],
    c: f64,
    epsilon: f64,
    tau: f64,
    order: usize,
    cfg: &PolarEvalConfig,
) -> Result<Complex64> {
    check_order(profile.dim(), order)?;
    let dec = polar_decomposition(profile, k, c, epsilon, tau, cfg)?;
    Ok(if order == 0 { dec.g0 } else { dec.g1.expect("d = 3") })
}

/// `e^{-iΦ(k, t)} û₀(k)`.
pub fn reference_solution(u0: &FourierField, spec: &DispersionSpec, k: &[f64], t: f64) -> Result<Complex64> {
    Ok(spec.multiplier(norm(k), t) * u0.eval(k)?)
}

/// `e^{-ib(|k|)τ} û₀(k)`, the limit of the phase-corrected reconstruction.
pub fn profile_target(u0: &FourierField, spec: &DispersionSpec, k: &[f64], tau: f64) -> Result<Complex64> {
    Ok(Complex64::from_polar(1.0, -spec.eval_b(norm(k)) * tau) * u0.eval(k)?)
}

/// Profile family for evaluation at `k`: restriction (regularized when `reg`
/// is given) on admissible directions, evolved to `τ`.
pub fn profile_for(
    u0: &FourierField,
    spec: &DispersionSpec,
    reg: Option<&Regularizer>,
    k: &[f64],
    tau: f64,
    cfg: &PolarEvalConfig,
) -> Result<ProfileFamily> {
    let radius = front_radius(spec.c(), spec.epsilon(), tau);
    let dirs = std::sync::Arc::new(cfg.directions(u0.dim(), k, radius)?);
    let initial = match reg {
        Some(r) => restrict_regularized(u0, r, dirs, cfg.z_grid)?,
        None => restrict(u0, dirs, cfg.z_grid)?,
    };
    evolve(&initial, spec, tau)
}

/// One `(ε, k)` cell of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub dim: usize,
    pub b_kind: &'static str,
    pub rho: Option<f64>,
    pub tau: f64,
    pub epsilon: f64,
    pub k: Vec<f64>,
    pub k_norm: f64,
    /// Phase-corrected reconstruction `Q̂ e^{ic|k|τ/ε²}`.
    pub qhat: Complex64,
    pub reference: Complex64,
    pub abs_error: f64,
    pub a_term: Complex64,
    pub g_term: Complex64,
    pub tail_mass: f64,
    pub wall_ms: f64,
}

/// Records ordered by `k` (input order), then by decreasing `ε`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<StudyRecord>,
}

impl ConvergenceReport {
    /// Error sequences per `k`, each in decreasing-`ε` order.
    pub fn error_blocks(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut last: Option<&Vec<f64>> = None;
        for r in &self.records {
            if last != Some(&r.k) {
                out.push(Vec::new());
                last = Some(&r.k);
            }
            out.last_mut().expect("just pushed").push(r.abs_error);
        }
        out
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.error_blocks().iter().all(|b| b.windows(2).all(|w| w[1] < w[0]))
    }
}

/// Pointwise error of the phase-corrected reconstruction against
/// `e^{-ib(|k|)τ} û₀(k)` for every `(ε, k)`; cells run in parallel.
///
/// Refuses `|k| ≤ ρ` when a regularizer is given and any truncation whose
/// discarded profile mass exceeds the configured tail tolerance.
pub fn pointwise_convergence_study(
    u0: &FourierField,
    spec: &DispersionSpec,
    reg: Option<&Regularizer>,
    k_list: &[Vec<f64>],
    tau: f64,
    eps_list: &[f64],
    cfg: &PolarEvalConfig,
) -> Result<ConvergenceReport> {
    for k in k_list {
        let k_norm = norm(k);
        if k.len() != u0.dim() {
            return Err(Error::GridMismatch(format!(
                "k = {k:?} is not {}-dimensional",
                u0.dim()
            )));
        }
        if let Some(r) = reg {
            if k_norm <= r.rho() {
                return Err(Error::TheoremScope(format!(
                    "|k| = {k_norm} must exceed rho = {} for the pointwise limit",
                    r.rho()
                )));
            }
        } else if k_norm == 0.0 {
            return Err(Error::TheoremScope(
                "k = 0 is excluded; the pointwise limit holds for k != 0".into(),
            ));
        }
    }
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    let cells: Vec<(usize, f64)> = (0..k_list.len())
        .flat_map(|i| eps_sorted.iter().map(move |&e| (i, e)))
        .collect();
    let records = cells
        .par_iter()
        .map(|&(i, eps)| {
            let start = Instant::now();
            let k = &k_list[i];
            let law = spec.with_epsilon(eps)?;
            let profile = profile_for(u0, &law, reg, k, tau, cfg)?;
            let dec = polar_decomposition(&profile, k, law.c(), eps, tau, cfg)?;
            if dec.tail_mass > cfg.tail_tolerance {
                return Err(Error::InvalidParameter(format!(
                    "profile mass beyond |z| = {} is {:e}, above the tolerance {:e}; raise the truncation",
                    cfg.z_truncation, dec.tail_mass, cfg.tail_tolerance
                )));
            }
            let reference = profile_target(u0, &law, k, tau)?;
            Ok(StudyRecord {
                dim: u0.dim(),
                b_kind: law.kind_name(),
                rho: reg.map(Regularizer::rho),
                tau,
                epsilon: eps,
                k: k.clone(),
                k_norm: norm(k),
                qhat: dec.q,
                reference,
                abs_error: (dec.q - reference).norm(),
                a_term: dec.a0.value,
                g_term: dec.g0,
                tail_mass: dec.tail_mass,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { records })
}

/// `∫ (Q̂ û₀ e^{ic|k|τ/ε²} - e^{-ib(|k|)τ} û₀)(k) f(k) dk` per `ε`, with the
/// unregularized restriction and the tensor trapezoid rule on `k_grid`, which
/// should enclose the support of `f`. The node `k = 0`, if present, is
/// skipped.
pub fn weak_pairing_check(
    u0: &FourierField,
    spec: &DispersionSpec,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    k_grid: &GridD,
    tau: f64,
    eps_list: &[f64],
    cfg: &PolarEvalConfig,
) -> Result<Vec<Complex64>> {
    let dim = u0.dim();
    if k_grid.dim() != dim {
        return Err(Error::GridMismatch("k grid dimension differs from the data".into()));
    }
    let nodes: Vec<(Vec<f64>, f64)> = (0..k_grid.len())
        .filter_map(|flat| {
            let idx = k_grid.unflatten(flat);
            let k = k_grid.point(flat);
            let fv = f(&k);
            if fv == 0.0 || norm(&k) == 0.0 {
                return None;
            }
            let edge: f64 = idx
                .iter()
                .zip(k_grid.axes())
                .map(|(&i, g)| if i == 0 || i + 1 == g.len() { 0.5 } else { 1.0 })
                .product();
            Some((k, fv * edge * k_grid.cell_volume()))
        })
        .collect();
    eps_list
        .iter()
        .map(|&eps| {
            let law = spec.with_epsilon(eps)?;
            let shared = if dim < 3 && !nodes.is_empty() {
                let widest = nodes
                    .iter()
                    .max_by(|a, b| norm(&a.0).total_cmp(&norm(&b.0)))
                    .expect("nonempty");
                Some(profile_for(u0, &law, None, &widest.0, tau, cfg)?)
            } else {
                None
            };
            nodes
                .par_iter()
                .map(|(k, weight)| {
                    let local;
                    let profile = match &shared {
                        Some(p) => p,
                        None => {
                            local = profile_for(u0, &law, None, k, tau, cfg)?;
                            &local
                        }
                    };
                    let q = qhat_polar(profile, k, law.c(), eps, tau, cfg)?;
                    Ok((q - profile_target(u0, &law, k, tau)?) * *weight)
                })
                .sum::<Result<Complex64>>()
        })
        .collect()
}

/// Box `[-8π, 8π)^d` with `n` nodes per axis. Its dual grid has spacing
/// `1/8` and contains every multiple of `1/8` in range, so `|k| = 1` along
/// an axis is a node.
pub fn oracle_grid(dim: usize, n: usize) -> Result<GridD> {
    let axis = Grid1D::with_spacing(-8.0 * PI, 16.0 * PI / n as f64, n)?;
    GridD::new(vec![axis; dim])
}

/// `e^{i|k|ct} (F_d S V)(k)` from samples of the shell field on `x_grid`,
/// read at the dual-grid node `k` (no interpolation).
pub fn qhat_grid_oracle(field: &ShellField, x_grid: &GridD, k: &[f64]) -> Result<Complex64> {
    if field.dim() != x_grid.dim() || k.len() != x_grid.dim() {
        return Err(Error::GridMismatch("oracle grid, field and k dimensions differ".into()));
    }
    let values: Vec<Complex64> = (0..x_grid.len())
        .into_par_iter()
        .map(|flat| field.eval(&x_grid.point(flat)))
        .collect();
    let spectrum = forward_transform_d(&SampledField::new(x_grid.clone(), values)?)?;
    let dual = spectrum.grid().expect("transform output is sampled").clone();
    let idx = k
        .iter()
        .zip(dual.axes())
        .map(|(&kv, g)| {
            let s = (kv - g.min()) / g.spacing();
            let m = s.round();
            if (s - m).abs() > 1e-9 || m < 0.0 || m as usize >= g.len() {
                Err(Error::OutOfDomain { point: k.to_vec() })
            } else {
                Ok(m as usize)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let value = spectrum.node_value(&idx).expect("index checked");
    Ok(value * Complex64::from_polar(1.0, norm(k) * field.radius()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{default_spectrum, gaussian_spectrum};
    use crate::operators::reconstruct;
    use std::sync::Arc;

    fn cfg() -> PolarEvalConfig {
        PolarEvalConfig::default()
    }

    #[test]
    fn zero_profile_gives_zero() {
        let u0 = FourierField::analytic(2, |_| Complex64::new(0.0, 0.0))
            .unwrap()
            .with_support_radius(4.0)
            .unwrap();
        let law = DispersionSpec::zero(1.0, 0.4).unwrap();
        let p = profile_for(&u0, &law, None, &[1.0, 0.0], 1.0, &cfg()).unwrap();
        let dec = polar_decomposition(&p, &[1.0, 0.0], 1.0, 0.4, 1.0, &cfg()).unwrap();
        assert_eq!(dec.q, Complex64::default());
        assert_eq!(dec.a0.value, Complex64::default());
    }

    #[test]
    fn k_zero_and_bad_order_are_rejected() {
        let u0 = default_spectrum(1).unwrap();
        let law = DispersionSpec::zero(1.0, 0.4).unwrap();
        let p = profile_for(&u0, &law, None, &[1.0], 1.0, &cfg()).unwrap();
        assert!(matches!(
            qhat_polar(&p, &[0.0], 1.0, 0.4, 1.0, &cfg()),
            Err(Error::TheoremScope(_))
        ));
        assert!(a_term(&p, &[1.0], 1.0, 0.4, 1.0, 1, &cfg()).is_err());
    }

    #[test]
    fn under_resolved_directions_are_rejected() {
        let u0 = default_spectrum(2).unwrap();
        let law = DispersionSpec::zero(1.0, 0.1).unwrap();
        let coarse = Arc::new(SphereQuadrature::circle(32).unwrap());
        let p = evolve(&restrict(&u0, coarse, cfg().z_grid()).unwrap(), &law, 1.0).unwrap();
        assert!(matches!(
            qhat_polar(&p, &[1.0, 0.0], 1.0, 0.1, 1.0, &cfg()),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn split_is_exact_in_every_dimension() {
        for d in 1..=3 {
            let u0 = default_spectrum(d).unwrap();
            let reg = Regularizer::new(0.25, d).unwrap();
            let mut k = vec![0.0; d];
            k[0] = 0.6;
            k[d - 1] += 0.8;
            for eps in [0.4, 0.2] {
                let law = DispersionSpec::cubic(0.5, 1.0, eps).unwrap();
                let p = profile_for(&u0, &law, Some(&reg), &k, 1.0, &cfg()).unwrap();
                let dec = polar_decomposition(&p, &k, 1.0, eps, 1.0, &cfg()).unwrap();
                assert!((dec.q - dec.a0.value - dec.g0).norm() <= 1e-10 * dec.q.norm(), "d={d}");
                if let (Some(a1), Some(g1)) = (dec.a1, dec.g1) {
                    assert!((dec.q - a1.value - g1).norm() <= 1e-10 * dec.q.norm());
                }
            }
        }
    }

    #[test]
    fn discrete_derivative_matches_finite_difference() {
        let z = Grid1D::new(-20.0, 20.0, 801).unwrap();
        let v: Vec<Complex64> = z
            .nodes()
            .iter()
            .map(|&s| Complex64::from_polar((-s * s / 4.0).exp(), s))
            .collect();
        for xi in [0.3, 1.0, 1.7] {
            let exact = discrete_spectrum_derivative(&v, &z, 15.0, xi);
            let fd = central_difference4(|x| discrete_spectrum(&v, &z, 15.0, x), xi, 1e-3);
            assert!((exact - fd).norm() < 1e-8 * exact.norm().max(1.0), "{exact} vs {fd}");
        }
    }

    #[test]
    fn a1_correction_shrinks_like_epsilon_squared() {
        let u0 = default_spectrum(3).unwrap();
        let reg = Regularizer::new(0.25, 3).unwrap();
        let k = [0.0, 0.0, 1.0];
        let corr: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&eps| {
                let law = DispersionSpec::zero(1.0, eps).unwrap();
                let p = profile_for(&u0, &law, Some(&reg), &k, 1.0, &cfg()).unwrap();
                a_term(&p, &k, 1.0, eps, 1.0, 1, &cfg()).unwrap().correction.norm()
            })
            .collect();
        let ratio = corr[1] / corr[2];
        assert!(ratio > 3.0 && ratio < 6.0, "ratio {ratio}");
    }

    #[test]
    fn reference_solution_properties() {
        let u0 = gaussian_spectrum(2).unwrap();
        let law = DispersionSpec::cubic(0.5, 1.0, 0.1).unwrap();
        let k = [0.3, -1.1];
        assert_eq!(reference_solution(&u0, &law, &k, 0.0).unwrap(), u0.eval(&k).unwrap());
        let v = reference_solution(&u0, &law, &k, 77.0).unwrap();
        assert!((v.norm() - u0.eval(&k).unwrap().norm()).abs() < 1e-15);
    }

    #[test]
    fn full_sqrt_reference_approaches_cubic_surrogate() {
        let u0 = gaussian_spectrum(1).unwrap();
        let (k, tau) = ([1.2], 1.0);
        let diffs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&eps| {
                let t = tau / (eps * eps);
                let full = DispersionSpec::full_sqrt(1.0, 1.0, eps).unwrap();
                let zero = DispersionSpec::zero(1.0, eps).unwrap();
                let cubic = DispersionSpec::cubic_from_physical(1.0, 1.0, eps).unwrap();
                let a = reference_solution(&u0, &full, &k, t).unwrap();
                let b = reference_solution(&u0, &zero, &k, t).unwrap()
                    * Complex64::from_polar(1.0, -cubic.eval_b(1.2) * tau);
                (a - b).norm()
            })
            .collect();
        assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
    }

    #[test]
    fn study_rejects_k_inside_rho_and_handles_zero_data() {
        let u0 = default_spectrum(1).unwrap();
        let law = DispersionSpec::zero(1.0, 0.4).unwrap();
        let reg = Regularizer::new(0.25, 1).unwrap();
        let err = pointwise_convergence_study(&u0, &law, Some(&reg), &[vec![0.1]], 1.0, &[0.4], &cfg());
        assert!(matches!(err, Err(Error::TheoremScope(_))));
        let zero = FourierField::analytic(1, |_| Complex64::new(0.0, 0.0))
            .unwrap()
            .with_support_radius(4.0)
            .unwrap();
        let report =
            pointwise_convergence_study(&zero, &law, Some(&reg), &[vec![1.0]], 1.0, &[0.4, 0.2], &cfg()).unwrap();
        assert!(report.records.iter().all(|r| r.abs_error == 0.0));
    }

    #[test]
    fn d1_bump_study_decreases() {
        let u0 = default_spectrum(1).unwrap();
        let law = DispersionSpec::zero(1.0, 0.4).unwrap();
        let reg = Regularizer::new(0.25, 1).unwrap();
        let report =
            pointwise_convergence_study(&u0, &law, Some(&reg), &[vec![1.0]], 1.0, &[0.1, 0.4, 0.2], &cfg()).unwrap();
        let eps: Vec<f64> = report.records.iter().map(|r| r.epsilon).collect();
        assert_eq!(eps, vec![0.4, 0.2, 0.1]);
        assert!(report.strictly_decreasing(), "{:?}", report.error_blocks());
    }

    #[test]
    fn weak_pairing_with_vanishing_test_function_is_zero() {
        let u0 = default_spectrum(1).unwrap();
        let law = DispersionSpec::zero(1.0, 0.4).unwrap();
        let grid = GridD::cube(1, 0.5, 1.5, 21).unwrap();
        let out = weak_pairing_check(&u0, &law, &|_| 0.0, &grid, 1.0, &[0.4, 0.2], &cfg()).unwrap();
        assert!(out.iter().all(|v| *v == Complex64::default()));
    }

    #[test]
    fn polar_formula_matches_grid_oracle_in_one_dimension() {
        let u0 = default_spectrum(1).unwrap();
        let reg = Regularizer::new(0.25, 1).unwrap();
        let (eps, tau) = (0.3, 1.0);
        let law = DispersionSpec::zero(1.0, eps).unwrap();
        let k = [1.0];
        let p = profile_for(&u0, &law, Some(&reg), &k, tau, &cfg()).unwrap();
        let polar = qhat_polar(&p, &k, 1.0, eps, tau, &cfg()).unwrap();
        let field = reconstruct(
            &u0,
            &law,
            Some(&reg),
            p.directions_arc(),
            cfg().z_grid(),
            tau / (eps * eps),
        )
        .unwrap();
        let oracle = qhat_grid_oracle(&field, &oracle_grid(1, 1 << 14).unwrap(), &k).unwrap();
        assert!((polar - oracle).norm() < 1e-3 * oracle.norm(), "{polar} vs {oracle}");
    }

    #[test]
    fn polar_formula_matches_grid_oracle_in_three_dimensions() {
        let u0 = default_spectrum(3).unwrap();
        let reg = Regularizer::new(0.25, 3).unwrap();
        let (eps, tau) = (0.4, 1.0);
        let law = DispersionSpec::cubic(0.5, 1.0, eps).unwrap();
        let k = [1.0, 0.0, 0.0];
        let p = profile_for(&u0, &law, Some(&reg), &k, tau, &cfg()).unwrap();
        let polar = qhat_polar(&p, &k, 1.0, eps, tau, &cfg()).unwrap();
        let field = reconstruct(
            &u0,
            &law,
            Some(&reg),
            p.directions_arc(),
            cfg().z_grid(),
            tau / (eps * eps),
        )
        .unwrap();
        let oracle = qhat_grid_oracle(&field, &oracle_grid(3, 192).unwrap(), &k).unwrap();
        assert!((polar - oracle).norm() < 1e-3 * oracle.norm(), "{polar} vs {oracle}");
    }
}
