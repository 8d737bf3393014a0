//! Restriction, profile evolution, shell placement and their composition.
//!
//! With `d ∈ {1, 2, 3}`, `R = cτ/ε²`-independent building blocks are
//!
//! ```text
//! restrict:             V̂(ξ, q) = (ξ/2πi)^{(d-1)/2} 1_{ξ>0} û₀(ξq)
//! restrict_regularized: V̂(ξ, q) = (2πi)^{-(d-1)/2} W_ρ(ξ) û₀(ξq)
//! evolve:               V̂(ξ, q) ↦ e^{-ib(ξ)τ} V̂(ξ, q)
//! shell:                (S V)(x, t) = (ct)^{-(d-1)/2} 1_{|x|<2ct} V(|x| - ct, x/|x|)
//! ```
//!
//! and `reconstruct` is `shell ∘ F₁⁻¹ ∘ evolve ∘ restrict`. Complex roots use
//! the principal branch, so `(2πi)^{-(d-1)/2} = (2π)^{-(d-1)/2} e^{-iπ(d-1)/4}`.
//!
//! # Regularizer blend
//!
//! On `(0, ρ)` the cutoff is `W_ρ(ξ) = ξ^{(d-1)/2} s(ξ/ρ)` with the quintic
//! smoothstep `s(u) = 6u⁵ - 15u⁴ + 10u³`. Since `s` and its first two
//! derivatives vanish at `u = 0` and `s(1) = 1`, `s'(1) = s''(1) = 0`, the
//! blend is `C²` for every supported dimension and `0 ≤ W_ρ ≤ ξ^{(d-1)/2}`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::DispersionSpec;
use crate::error::{Error, Result};
use crate::spectral::{
    check_dimension, forward_transform_1, interpolate_cubic, inverse_transform_1, FourierField, Grid1D,
};
use crate::stationary_phase::{to_vec3, SphereQuadrature, Vec3};

/// Quintic smoothstep on `[0, 1]`, clamped outside.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// The smooth low-frequency cutoff `W_ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularizer {
    rho: f64,
    dim: usize,
}

impl Regularizer {
    pub fn new(rho: f64, dim: usize) -> Result<Self> {
        check_dimension(dim)?;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { rho, dim })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Guaranteed differentiability order `d - 1`.
    pub fn smoothness(&self) -> usize {
        self.dim - 1
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        let power = xi.powf((self.dim as f64 - 1.0) / 2.0);
        if xi >= self.rho {
            power
        } else {
            power * smoothstep(xi / self.rho)
        }
    }
}

/// `(2πi)^{-(d-1)/2}`.
pub fn branch_factor(dim: usize) -> Complex64 {
    let p = (dim as f64 - 1.0) / 2.0;
    Complex64::from_polar((2.0 * PI).powf(-p), -FRAC_PI_4 * (dim as f64 - 1.0))
}

/// `(ξ/2πi)^{(d-1)/2} 1_{ξ>0}`.
pub fn restriction_factor(dim: usize, xi: f64) -> Complex64 {
    if xi <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    branch_factor(dim) * xi.powf((dim as f64 - 1.0) / 2.0)
}

/// Single value of the (optionally regularized) restriction at `(ξ, q)`.
pub fn restrict_at(u0: &FourierField, reg: Option<&Regularizer>, xi: f64, q: &Vec3) -> Result<Complex64> {
    if xi <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let factor = match reg {
        Some(r) => branch_factor(u0.dim()) * r.eval(xi),
        None => restriction_factor(u0.dim(), xi),
    };
    let k: Vec<f64> = q[..u0.dim()].iter().map(|c| c * xi).collect();
    Ok(factor * u0.eval(&k)?)
}

/// Profile spectra `V̂(ξ, q)` on the dual of a physical `z` grid, for every
/// direction of a sphere quadrature, at rescaled time `τ`.
///
/// Only the `ξ` indices in [`window`](Self::window) are stored; all other
/// spectral values are zero. The window always lies in `ξ > 0`.
#[derive(Debug, Clone)]
pub struct ProfileFamily {
    z_grid: Grid1D,
    xi_grid: Grid1D,
    directions: Arc<SphereQuadrature>,
    tau: f64,
    window: Range<usize>,
    spectra: Vec<Complex64>,
}

impl ProfileFamily {
    /// Builds the family from `f(ξ, direction index, q)` evaluated on every
    /// positive `ξ` node up to `xi_max`.
    pub fn from_fn(
        z_grid: Grid1D,
        directions: Arc<SphereQuadrature>,
        tau: f64,
        xi_max: Option<f64>,
        f: impl Fn(f64, usize, &Vec3) -> Result<Complex64> + Sync,
    ) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be non-negative, got {tau}")));
        }
        let xi_grid = z_grid.dual();
        let n = xi_grid.len();
        let lo = (0..n).find(|&m| xi_grid.node(m) > 0.0).unwrap_or(n);
        let hi = match xi_max {
            Some(cap) => (lo..n).find(|&m| xi_grid.node(m) > cap).unwrap_or(n),
            None => n,
        };
        let width = hi - lo;
        let spectra = directions
            .nodes()
            .par_iter()
            .enumerate()
            .map(|(i, q)| (lo..hi).map(|m| f(xi_grid.node(m), i, q)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?
            .concat();
        debug_assert_eq!(spectra.len(), width * directions.len());
        Ok(Self {
            z_grid,
            xi_grid,
            directions,
            tau,
            window: lo..hi,
            spectra,
        })
    }

    pub fn dim(&self) -> usize {
        self.directions.dim()
    }

    pub fn z_grid(&self) -> &Grid1D {
        &self.z_grid
    }

    pub fn xi_grid(&self) -> &Grid1D {
        &self.xi_grid
    }

    pub fn directions(&self) -> &SphereQuadrature {
        &self.directions
    }

    pub fn directions_arc(&self) -> Arc<SphereQuadrature> {
        Arc::clone(&self.directions)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    /// Stored spectrum of direction `dir` over the window.
    pub fn spectrum(&self, dir: usize) -> &[Complex64] {
        let w = self.window.len();
        &self.spectra[dir * w..(dir + 1) * w]
    }

    /// `V̂(ξ_m, q_dir)` at any `ξ` index.
    pub fn spectrum_at(&self, dir: usize, m: usize) -> Complex64 {
        if self.window.contains(&m) {
            self.spectrum(dir)[m - self.window.start]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Spectrum of direction `dir` on the whole `ξ` grid.
    pub fn full_spectrum(&self, dir: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.xi_grid.len()];
        out[self.window.clone()].copy_from_slice(self.spectrum(dir));
        out
    }

    /// `V(z_j, q_dir)` on the `z` grid.
    pub fn profile(&self, dir: usize) -> Vec<Complex64> {
        inverse_transform_1(&self.full_spectrum(dir), &self.xi_grid, &self.z_grid)
            .expect("xi grid is the dual of z grid by construction")
    }

    /// All profiles, computed in parallel.
    pub fn profiles(&self) -> Vec<Vec<Complex64>> {
        (0..self.directions.len())
            .into_par_iter()
            .map(|i| self.profile(i))
            .collect()
    }

    /// `(Σ_q w_q ∫ |V̂(ξ, q)|² dξ)^{1/2}`.
    pub fn spectral_norm(&self) -> f64 {
        let dxi = self.xi_grid.spacing();
        let total: f64 = (0..self.directions.len())
            .into_par_iter()
            .map(|i| self.directions.weights()[i] * self.spectrum(i).iter().map(Complex64::norm_sqr).sum::<f64>())
            .sum();
        (total * dxi).sqrt()
    }

    /// `‖V‖_{X_S} = (Σ_q w_q ∫ |V(z, q)|² dz)^{1/2}`.
    pub fn profile_norm(&self) -> f64 {
        let dz = self.z_grid.spacing();
        let total: f64 = (0..self.directions.len())
            .into_par_iter()
            .map(|i| self.directions.weights()[i] * self.profile(i).iter().map(Complex64::norm_sqr).sum::<f64>())
            .sum();
        (total * dz).sqrt()
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        out.spectra.iter_mut().for_each(|v| *v *= alpha);
        out
    }
}

fn check_dims(u0: &FourierField, directions: &SphereQuadrature) -> Result<()> {
    if u0.dim() != directions.dim() {
        return Err(Error::GridMismatch(format!(
            "{}-dimensional data with directions on S^{}",
            u0.dim(),
            directions.dim() - 1
        )));
    }
    Ok(())
}

fn restrict_with(
    u0: &FourierField,
    reg: Option<&Regularizer>,
    directions: Arc<SphereQuadrature>,
    z_grid: Grid1D,
) -> Result<ProfileFamily> {
    check_dims(u0, &directions)?;
    if let Some(r) = reg {
        if r.dim() != u0.dim() {
            return Err(Error::GridMismatch(format!(
                "regularizer for d = {} applied to d = {} data",
                r.dim(),
                u0.dim()
            )));
        }
    }
    ProfileFamily::from_fn(z_grid, directions, 0.0, u0.support_radius(), |xi, _, q| {
        restrict_at(u0, reg, xi, q)
    })
}

/// `R û₀` on the dual of `z_grid`, at `τ = 0`.
///
/// Errors with [`Error::OutOfDomain`] when some `ξq` leaves the region where
/// `û₀` can be evaluated; declaring a support radius on `û₀` bounds the range.
pub fn restrict(u0: &FourierField, directions: Arc<SphereQuadrature>, z_grid: Grid1D) -> Result<ProfileFamily> {
    restrict_with(u0, None, directions, z_grid)
}

/// `R_ρ û₀`: as [`restrict`] with `ξ^{(d-1)/2} 1_{ξ>0}` replaced by `W_ρ(ξ)`.
pub fn restrict_regularized(
    u0: &FourierField,
    reg: &Regularizer,
    directions: Arc<SphereQuadrature>,
    z_grid: Grid1D,
) -> Result<ProfileFamily> {
    restrict_with(u0, Some(reg), directions, z_grid)
}

/// Advances the profiles by `tau`: `V̂ ↦ e^{-ib(ξ)τ} V̂`.
pub fn evolve(profile: &ProfileFamily, b: &DispersionSpec, tau: f64) -> Result<ProfileFamily> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be non-negative, got {tau}")));
    }
    let mut out = profile.clone();
    out.tau = profile.tau + tau;
    let w = profile.window.len();
    if w == 0 {
        return Ok(out);
    }
    let phases: Vec<f64> = profile
        .window
        .clone()
        .map(|m| b.eval_b(profile.xi_grid.node(m)) * tau)
        .collect();
    out.spectra.par_chunks_mut(w).for_each(|chunk| {
        for (v, &p) in chunk.iter_mut().zip(&phases) {
            if p != 0.0 {
                *v = Complex64::from_polar(v.norm(), v.arg() - p);
            }
        }
    });
    Ok(out)
}

/// `(S V)(·, t)`: profiles placed on the sphere of radius `ct`.
#[derive(Debug)]
pub struct ShellField {
    dim: usize,
    c: f64,
    epsilon: f64,
    t: f64,
    z_grid: Grid1D,
    directions: Arc<SphereQuadrature>,
    profiles: Arc<Vec<Vec<Complex64>>>,
    degenerate_hits: AtomicUsize,
}

impl Clone for ShellField {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            c: self.c,
            epsilon: self.epsilon,
            t: self.t,
            z_grid: self.z_grid,
            directions: Arc::clone(&self.directions),
            profiles: Arc::clone(&self.profiles),
            degenerate_hits: AtomicUsize::new(self.degenerate_hits.load(Ordering::Relaxed)),
        }
    }
}

impl ShellField {
    /// Shell field from profile samples `V(z_j, q_i)` given per direction.
    pub fn from_samples(
        z_grid: Grid1D,
        directions: Arc<SphereQuadrature>,
        profiles: Vec<Vec<Complex64>>,
        c: f64,
        epsilon: f64,
        t: f64,
    ) -> Result<Self> {
        if !(c > 0.0 && epsilon > 0.0 && t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shell needs c, epsilon, t > 0 (got c = {c}, epsilon = {epsilon}, t = {t})"
            )));
        }
        if profiles.len() != directions.len() || profiles.iter().any(|p| p.len() != z_grid.len()) {
            return Err(Error::GridMismatch(
                "profile samples do not match directions x z grid".into(),
            ));
        }
        Ok(Self {
            dim: directions.dim(),
            c,
            epsilon,
            t,
            z_grid,
            directions,
            profiles: Arc::new(profiles),
            degenerate_hits: AtomicUsize::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Front radius `ct`.
    pub fn radius(&self) -> f64 {
        self.c * self.t
    }

    pub fn z_grid(&self) -> &Grid1D {
        &self.z_grid
    }

    pub fn directions(&self) -> &SphereQuadrature {
        &self.directions
    }

    /// Profile samples of direction `dir`.
    pub fn profile(&self, dir: usize) -> &[Complex64] {
        &self.profiles[dir]
    }

    /// Number of evaluations at the origin, where the direction is undefined.
    pub fn degenerate_hits(&self) -> usize {
        self.degenerate_hits.load(Ordering::Relaxed)
    }

    /// `V(z, q)` for a unit vector `q`, zero outside the `z` grid.
    pub fn profile_value(&self, z: f64, q: &Vec3) -> Complex64 {
        if !self.z_grid.contains(z) {
            return Complex64::new(0.0, 0.0);
        }
        let at = |i: usize| interpolate_cubic(&self.z_grid, &self.profiles[i], z).unwrap_or_default();
        self.directions.interpolate(q, at)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.eval_flagged(x).0
    }

    /// Value at `x` and whether `x` is the degenerate origin.
    pub fn eval_flagged(&self, x: &[f64]) -> (Complex64, bool) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            self.degenerate_hits.fetch_add(1, Ordering::Relaxed);
            return (Complex64::new(0.0, 0.0), true);
        }
        let front = self.radius();
        if r >= 2.0 * front {
            return (Complex64::new(0.0, 0.0), false);
        }
        let q = to_vec3(&x.iter().map(|v| v / r).collect::<Vec<_>>());
        let scale = front.powf(-(self.dim as f64 - 1.0) / 2.0);
        (self.profile_value(r - front, &q) * scale, false)
    }
}

/// `S V` at `t`; the profile must already be at `τ = ε²t`.
pub fn shell(profile: &ProfileFamily, c: f64, epsilon: f64, t: f64) -> Result<ShellField> {
    let tau = epsilon * epsilon * t;
    if (profile.tau() - tau).abs() > 1e-12 * tau.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "profile is at tau = {} but the shell at t = {t}, epsilon = {epsilon} needs tau = {tau}",
            profile.tau()
        )));
    }
    ShellField::from_samples(
        *profile.z_grid(),
        profile.directions_arc(),
        profile.profiles(),
        c,
        epsilon,
        t,
    )
}

/// `Q_b û₀` at time `t`, with `R_ρ` in place of `R` when `reg` is given.
pub fn reconstruct(
    u0: &FourierField,
    b: &DispersionSpec,
    reg: Option<&Regularizer>,
    directions: Arc<SphereQuadrature>,
    z_grid: Grid1D,
    t: f64,
) -> Result<ShellField> {
    let initial = restrict_with(u0, reg, directions, z_grid)?;
    let tau = b.epsilon() * b.epsilon() * t;
    let evolved = evolve(&initial, b, tau)?;
    shell(&evolved, b.c(), b.epsilon(), t)
}

/// Profile spectra from physical samples: `V̂ = F₁ V` per direction,
/// restricted to `ξ > 0`.
pub fn profile_from_samples(
    z_grid: Grid1D,
    directions: Arc<SphereQuadrature>,
    tau: f64,
    samples: &[Vec<Complex64>],
) -> Result<ProfileFamily> {
    if samples.len() != directions.len() {
        return Err(Error::GridMismatch("one profile per direction required".into()));
    }
    let xi_grid = z_grid.dual();
    let spectra = samples
        .iter()
        .map(|s| forward_transform_1(s, &z_grid, &xi_grid))
        .collect::<Result<Vec<_>>>()?;
    let n = xi_grid.len();
    ProfileFamily::from_fn(z_grid, directions, tau, None, |xi, i, _| {
        let m = ((xi - xi_grid.min()) / xi_grid.spacing()).round() as usize;
        Ok(spectra[i][m.min(n - 1)])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_on;
    use approx::assert_relative_eq;

    fn gaussian(dim: usize) -> FourierField {
        FourierField::analytic(dim, |k| {
            Complex64::new((-k.iter().map(|x| x * x).sum::<f64>()).exp(), 0.0)
        })
        .unwrap()
        .with_support_radius(7.0)
        .unwrap()
    }

    #[test]
    fn regularizer_examples() {
        let r1 = Regularizer::new(0.5, 1).unwrap();
        assert_eq!(r1.eval(-1.0), 0.0);
        assert_eq!(r1.eval(1.0), 1.0);
        let r3 = Regularizer::new(0.1, 3).unwrap();
        assert_relative_eq!(r3.eval(0.2), 0.2);
        // ξ^{1/2} s(1/2) with s(1/2) = 1/2
        let r2 = Regularizer::new(0.5, 2).unwrap();
        assert_relative_eq!(r2.eval(0.25), 0.25, epsilon = 1e-15);
        assert!(Regularizer::new(0.0, 2).is_err());
        assert!(Regularizer::new(0.5, 4).is_err());
    }

    #[test]
    fn regularizer_bounds() {
        for d in 1..=3 {
            let r = Regularizer::new(0.3, d).unwrap();
            for i in 0..=400 {
                let xi = -0.5 + i as f64 * 0.0025;
                let w = r.eval(xi);
                let cap = xi.max(0.0).powf((d as f64 - 1.0) / 2.0);
                assert!(w >= 0.0 && w <= cap + 1e-15, "d={d} xi={xi}");
                if xi >= 0.3 {
                    assert_eq!(w, cap);
                }
                if xi <= 0.0 {
                    assert_eq!(w, 0.0);
                }
            }
        }
    }

    fn derivative(f: &dyn Fn(f64) -> f64, x: f64, order: usize, h: f64) -> f64 {
        match order {
            0 => f(x),
            _ => (derivative(f, x + h, order - 1, h) - derivative(f, x - h, order - 1, h)) / (2.0 * h),
        }
    }

    #[test]
    fn regularizer_derivatives_are_continuous() {
        for d in 1..=3 {
            let reg = Regularizer::new(0.4, d).unwrap();
            let f = |x: f64| reg.eval(x);
            for order in 0..=reg.smoothness() {
                for point in [0.0, 0.4] {
                    let h = 1e-5;
                    let left = derivative(&f, point - 4.0 * h, order, h);
                    let right = derivative(&f, point + 4.0 * h, order, h);
                    assert!(
                        (left - right).abs() < 0.02,
                        "d={d} order={order} at {point}: {left} vs {right}"
                    );
                }
            }
        }
    }

    #[test]
    fn restrict_pointwise_examples() {
        let u0 = gaussian(1);
        let v = restrict_at(&u0, None, 2.0, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(v.re, (-4.0f64).exp(), max_relative = 1e-15);
        assert_eq!(v.im, 0.0);
        for d in 1..=3 {
            assert_eq!(
                restrict_at(&gaussian(d), None, -1.0, &[1.0, 0.0, 0.0]).unwrap(),
                Complex64::default()
            );
        }
        let u2 = gaussian(2);
        let xi = 0.8f64;
        let expected = (xi / (2.0 * PI)).sqrt() * (-xi * xi).exp();
        for q in [[1.0, 0.0, 0.0], [0.6, -0.8, 0.0]] {
            assert_relative_eq!(
                restrict_at(&u2, None, xi, &q).unwrap().norm(),
                expected,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn regularized_matches_plain_above_rho() {
        let u0 = gaussian(3);
        let reg = Regularizer::new(0.25, 3).unwrap();
        let q = [0.0, 0.6, 0.8];
        for xi in [0.25, 0.5, 1.7] {
            let a = restrict_at(&u0, None, xi, &q).unwrap();
            let b = restrict_at(&u0, Some(&reg), xi, &q).unwrap();
            assert!((a - b).norm() <= 1e-15 * a.norm());
        }
    }

    #[test]
    fn restrict_parseval_and_regularized_bound() {
        let z = Grid1D::new(-64.0, 64.0, 4096).unwrap();
        for d in 1..=3 {
            // vanishes at k = 0 so the indicator jump carries no weight
            let u0 = FourierField::analytic(d, |k| {
                let r2: f64 = k.iter().map(|x| x * x).sum();
                Complex64::new(r2 * (-r2).exp(), 0.0)
            })
            .unwrap()
            .with_support_radius(7.0)
            .unwrap();
            let dirs = Arc::new(match d {
                1 => SphereQuadrature::pair(),
                2 => SphereQuadrature::circle(64).unwrap(),
                _ => SphereQuadrature::sphere(32, 32, [0.3, 0.2, 0.9]).unwrap(),
            });
            // ‖û₀‖² = |S^{d-1}| ∫ r^{d+3} e^{-2r²} dr
            let (r, w) = gauss_legendre_on(80, 0.0, 7.0);
            let radial: f64 = r
                .iter()
                .zip(&w)
                .map(|(r, w)| w * r.powi(d as i32 + 3) * (-2.0 * r * r).exp())
                .sum();
            let area = [2.0, 2.0 * PI, 4.0 * PI][d - 1];
            let target = (2.0 * PI).powf(-(d as f64 - 1.0) / 2.0) * (area * radial).sqrt();
            let plain = restrict(&u0, Arc::clone(&dirs), z).unwrap();
            let got = plain.spectral_norm();
            assert!((got - target).abs() <= 1e-6 * target, "d={d}: {got} vs {target}");
            let reg = Regularizer::new(0.5, d).unwrap();
            let smooth = restrict_regularized(&u0, &reg, dirs, z).unwrap();
            assert!(smooth.spectral_norm() <= target * (1.0 + 1e-9));
        }
    }

    #[test]
    fn restrict_rejects_unevaluable_data() {
        let grid = crate::spectral::GridD::cube(1, -2.0, 2.0, 33).unwrap();
        let u0 = FourierField::from_samples(grid, vec![Complex64::new(1.0, 0.0); 33]).unwrap();
        let z = Grid1D::new(-32.0, 32.0, 256).unwrap();
        assert!(matches!(
            restrict(&u0, Arc::new(SphereQuadrature::pair()), z),
            Err(Error::OutOfDomain { .. })
        ));
    }

    fn test_family(d: usize) -> ProfileFamily {
        let dirs = Arc::new(match d {
            1 => SphereQuadrature::pair(),
            2 => SphereQuadrature::circle(16).unwrap(),
            _ => SphereQuadrature::sphere(8, 8, [0.0, 0.0, 1.0]).unwrap(),
        });
        restrict(&gaussian(d), dirs, Grid1D::new(-40.0, 40.0, 1024).unwrap()).unwrap()
    }

    #[test]
    fn evolve_is_an_isometry_and_identity_for_zero_law() {
        let p = test_family(2);
        let zero = DispersionSpec::zero(1.0, 0.1).unwrap();
        let same = evolve(&p, &zero, 3.0).unwrap();
        assert_eq!(same.spectra, p.spectra);
        assert_eq!(same.tau(), 3.0);
        let cubic = DispersionSpec::cubic(0.7, 1.0, 0.1).unwrap();
        let moved = evolve(&p, &cubic, 3.0).unwrap();
        for (a, b) in moved.spectra.iter().zip(&p.spectra) {
            assert!((a.norm() - b.norm()).abs() <= 4.0 * f64::EPSILON * b.norm());
        }
        assert!(moved.spectra != p.spectra);
    }

    #[test]
    fn evolved_profile_solves_linearized_kdv() {
        let b3 = 0.5;
        let law = DispersionSpec::cubic(b3, 1.0, 0.1).unwrap();
        let dirs = Arc::new(SphereQuadrature::pair());
        let z = Grid1D::new(-40.0, 40.0, 8192).unwrap();
        let u0 = FourierField::analytic(1, |k| Complex64::new((-0.5 * (k[0] - 1.0).powi(2)).exp(), 0.0))
            .unwrap()
            .with_support_radius(10.0)
            .unwrap();
        let base = restrict(&u0, dirs, z).unwrap();
        let (tau, dtau) = (0.5, 1e-4);
        let at = |s: f64| evolve(&base, &law, s).unwrap().profile(0);
        let (minus, mid, plus) = (at(tau - dtau), at(tau), at(tau + dtau));
        let h = z.spacing();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 4000..4200 {
            let dt = (plus[j] - minus[j]) / (2.0 * dtau);
            // fourth-order central third derivative
            let d3 = (-mid[j + 3] + 8.0 * mid[j + 2] - 13.0 * mid[j + 1] + 13.0 * mid[j - 1] - 8.0 * mid[j - 2]
                + mid[j - 3])
                / (8.0 * h * h * h);
            worst = worst.max((dt - d3 * b3).norm());
            scale = scale.max(dt.norm());
        }
        assert!(worst < 1e-5 * scale.max(1e-3), "residual {worst} vs {scale}");
    }

    #[test]
    fn shell_of_indicator_profile_in_one_dimension() {
        let z = Grid1D::new(-8.0, 8.0, 1601).unwrap();
        let dirs = Arc::new(SphereQuadrature::pair());
        let plus: Vec<Complex64> = z
            .nodes()
            .iter()
            .map(|&s| Complex64::new(if s.abs() < 1.0 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let minus = vec![Complex64::new(0.0, 0.0); z.len()];
        let (c, t) = (1.0, 5.0);
        let field = ShellField::from_samples(z, dirs, vec![plus, minus], c, 0.1, t).unwrap();
        let expect = |x: f64| {
            let inside = x.abs() < 2.0 * c * t && (x.abs() - c * t).abs() < 1.0 && x > 0.0;
            if inside {
                1.0
            } else {
                0.0
            }
        };
        for x in [-5.0, -4.5, 0.5, 3.0, 4.5, 5.0, 5.5, 7.0, 9.9, 15.0] {
            assert_eq!(field.eval(&[x]).re, expect(x), "x = {x}");
        }
        assert_eq!(field.eval(&[3.0 * c * t]), Complex64::default());
        let (v, degenerate) = field.eval_flagged(&[0.0]);
        assert!(degenerate && v == Complex64::default());
        assert_eq!(field.degenerate_hits(), 1);
    }

    #[test]
    fn shell_vanishes_beyond_twice_the_front() {
        for d in 1..=3 {
            let p = test_family(d);
            let (c, eps, t) = (1.0, 0.5, 8.0);
            let evolved = evolve(&p, &DispersionSpec::zero(c, eps).unwrap(), eps * eps * t).unwrap();
            let field = shell(&evolved, c, eps, t).unwrap();
            let mut x = vec![0.0; d];
            x[0] = 2.0 * c * t;
            assert_eq!(field.eval(&x), Complex64::default());
        }
    }

    #[test]
    fn shell_rejects_mismatched_time() {
        let p = test_family(1);
        assert!(shell(&p, 1.0, 0.1, 5.0).is_err());
    }

    #[test]
    fn reconstruct_matches_manual_composition_and_is_linear() {
        let u0 = gaussian(2);
        let law = DispersionSpec::cubic(0.3, 1.0, 0.25).unwrap();
        let reg = Regularizer::new(0.25, 2).unwrap();
        let dirs = Arc::new(SphereQuadrature::circle(32).unwrap());
        let z = Grid1D::new(-30.0, 30.0, 512).unwrap();
        let t = 20.0;
        let q = reconstruct(&u0, &law, Some(&reg), Arc::clone(&dirs), z, t).unwrap();
        let manual = {
            let p = restrict_regularized(&u0, &reg, Arc::clone(&dirs), z).unwrap();
            let e = evolve(&p, &law, 0.25 * 0.25 * t).unwrap();
            shell(&e, 1.0, 0.25, t).unwrap()
        };
        let alpha = Complex64::new(-1.5, 0.25);
        let scaled_u0 = FourierField::analytic(2, move |k| alpha * (-k.iter().map(|x| x * x).sum::<f64>()).exp())
            .unwrap()
            .with_support_radius(7.0)
            .unwrap();
        let scaled = reconstruct(&scaled_u0, &law, Some(&reg), dirs, z, t).unwrap();
        for x in [[4.0, 1.0], [-3.0, 2.5], [0.2, -5.1], [0.0, 5.0]] {
            let v = q.eval(&x);
            assert_eq!(v, manual.eval(&x));
            assert!((scaled.eval(&x) - alpha * v).norm() <= 1e-13 * v.norm().max(1e-300));
        }
    }

    #[test]
    fn samples_round_trip_through_profile_family() {
        let z = Grid1D::new(-30.0, 30.0, 512).unwrap();
        let dirs = Arc::new(SphereQuadrature::pair());
        // analytic signal: spectrum supported in ξ > 0
        let v: Vec<Complex64> = z
            .nodes()
            .iter()
            .map(|&s| Complex64::from_polar((-s * s / 2.0).exp(), 8.0 * s))
            .collect();
        let fam = profile_from_samples(z, dirs, 0.0, &[v.clone(), v.clone()]).unwrap();
        let back = fam.profile(1);
        let err = back.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }
}
