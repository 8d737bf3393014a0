//! Sphere quadrature, the spherical stationary-phase functional
//!
//! ```text
//! A^N_φ = (2πi)^{-(d-1)/2} ∫_{S^{d-1}} N^{(d-1)/2} e^{i(1 - q·κ)N} φ(q) dS(q)  →  φ(κ)
//! ```
//!
//! the one-dimensional oscillatory integral
//! `I_N = ∫_0^{N^{-β}} N^{1/2} e^{i(1 - cos θ)N} dθ → ½√π(1 + i)`,
//! and a Fresnel-integral oracle for its limit.
//!
//! Quadrature layouts:
//! * `d = 1`: the two points `±1` with unit weights.
//! * `d = 2`: uniform trapezoid `θ_j = -π + 2π(j+1)/n`.
//! * `d = 3`: Gauss–Legendre in `u = q·p` on the two panels `[-1, 0]` and
//!   `[0, 1]`, times a uniform azimuth, in a frame whose pole `p` is chosen by
//!   the caller. Aligning the pole with `κ` confines the oscillation to `u`.
//!
//! The oscillation `e^{i(1 - q·κ)N}` has phase span `2N`; a quadrature resolves
//! it when its polar node count is at least `⌈8N/2π⌉ + 16`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, integrate_panels};
use crate::spectral::lagrange4;

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: Vec3) -> Option<Vec3> {
    let n = dot(&v, &v).sqrt();
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Pads a `d`-vector to three components.
pub fn to_vec3(v: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(v) {
        *o = *x;
    }
    out
}

/// Orthonormal frame `[p, e2, e3]` with first vector `p`.
fn frame_from_pole(p: Vec3) -> [Vec3; 3] {
    let helper = if p[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let proj = dot(&helper, &p);
    let e2 = normalize([
        helper[0] - proj * p[0],
        helper[1] - proj * p[1],
        helper[2] - proj * p[2],
    ])
    .expect("helper vector is never parallel to the pole");
    let e3 = [
        p[1] * e2[2] - p[2] * e2[1],
        p[2] * e2[0] - p[0] * e2[2],
        p[0] * e2[1] - p[1] * e2[0],
    ];
    [p, e2, e3]
}

/// Minimum polar node count resolving an oscillation of strength `n_osc`.
pub fn min_polar_nodes(n_osc: f64) -> usize {
    (8.0 * n_osc.max(0.0) / (2.0 * PI)).ceil() as usize + 16
}

#[derive(Debug, Clone, PartialEq)]
pub enum SphereLayout {
    Pair,
    Circle {
        n: usize,
    },
    Sphere {
        polar_u: Vec<f64>,
        n_azimuth: usize,
        frame: [Vec3; 3],
    },
}

/// Nodes and weights on `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    layout: SphereLayout,
}

impl SphereQuadrature {
    /// `S^0 = {+1, -1}`.
    pub fn pair() -> Self {
        Self {
            dim: 1,
            nodes: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
            weights: vec![1.0, 1.0],
            layout: SphereLayout::Pair,
        }
    }

    /// Uniform trapezoid rule on the circle with `n` nodes.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter(format!("circle rule needs n >= 4, got {n}")));
        }
        let h = 2.0 * PI / n as f64;
        let nodes = (0..n)
            .map(|j| {
                let t = -PI + h * (j + 1) as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        Ok(Self {
            dim: 2,
            nodes,
            weights: vec![h; n],
            layout: SphereLayout::Circle { n },
        })
    }

    /// Product rule on `S^2` about `pole`: `n_polar` Gauss–Legendre nodes in
    /// `u = q·pole` (split evenly over `[-1, 0]` and `[0, 1]`, rounded up to an
    /// even count) times `n_azimuth` uniform azimuth nodes.
    pub fn sphere(n_polar: usize, n_azimuth: usize, pole: Vec3) -> Result<Self> {
        if n_polar < 2 || n_azimuth < 1 {
            return Err(Error::InvalidParameter(format!(
                "sphere rule needs n_polar >= 2 and n_azimuth >= 1, got {n_polar} x {n_azimuth}"
            )));
        }
        let pole = normalize(pole).ok_or_else(|| Error::InvalidParameter("pole must be nonzero".into()))?;
        let half = n_polar.div_ceil(2);
        let (mut u, mut wu) = gauss_legendre_on(half, -1.0, 0.0);
        let (u2, w2) = gauss_legendre_on(half, 0.0, 1.0);
        u.extend(u2);
        wu.extend(w2);
        let frame = frame_from_pole(pole);
        let h = 2.0 * PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(u.len() * n_azimuth);
        let mut weights = Vec::with_capacity(u.len() * n_azimuth);
        for (&ui, &wi) in u.iter().zip(&wu) {
            let s = (1.0 - ui * ui).max(0.0).sqrt();
            for j in 0..n_azimuth {
                let phi = h * j as f64;
                let (c, sn) = (phi.cos(), phi.sin());
                nodes.push(std::array::from_fn(|a| {
                    ui * frame[0][a] + s * (c * frame[1][a] + sn * frame[2][a])
                }));
                weights.push(wi * h);
            }
        }
        Ok(Self {
            dim: 3,
            nodes,
            weights,
            layout: SphereLayout::Sphere {
                polar_u: u,
                n_azimuth,
                frame,
            },
        })
    }

    /// Smallest admissible rule for oscillation strength `n_osc`, scaled by
    /// `scale ≥ 1`. For `d = 3` the pole is `kappa`.
    pub fn for_oscillation(dim: usize, n_osc: f64, kappa: Vec3, scale: f64, n_azimuth: usize) -> Result<Self> {
        if !(scale >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature scale must be >= 1, got {scale}"
            )));
        }
        let polar = ((min_polar_nodes(n_osc) as f64) * scale).ceil() as usize;
        match dim {
            1 => Ok(Self::pair()),
            2 => Self::circle(polar.next_multiple_of(4)),
            3 => Self::sphere(polar.next_multiple_of(2), n_azimuth, kappa),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn layout(&self) -> &SphereLayout {
        &self.layout
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Number of nodes along the oscillating (polar) coordinate.
    pub fn polar_count(&self) -> usize {
        match &self.layout {
            SphereLayout::Pair => 2,
            SphereLayout::Circle { n } => *n,
            SphereLayout::Sphere { polar_u, .. } => polar_u.len(),
        }
    }

    pub fn pole(&self) -> Option<Vec3> {
        match &self.layout {
            SphereLayout::Sphere { frame, .. } => Some(frame[0]),
            _ => None,
        }
    }

    /// Angle parametrization of node `i`: `θ` (polar angle from the pole, or the
    /// circle angle) and azimuth `ϑ` (zero for `d ≤ 2`).
    pub fn angles(&self, i: usize) -> (f64, f64) {
        match &self.layout {
            SphereLayout::Pair => (if i == 0 { 0.0 } else { PI }, 0.0),
            SphereLayout::Circle { n } => (-PI + 2.0 * PI * (i + 1) as f64 / *n as f64, 0.0),
            SphereLayout::Sphere { polar_u, n_azimuth, .. } => {
                let (iu, ia) = (i / n_azimuth, i % n_azimuth);
                (polar_u[iu].acos(), 2.0 * PI * ia as f64 / *n_azimuth as f64)
            }
        }
    }

    /// Errors unless this rule resolves `e^{i(1 - q·κ)N}`.
    pub fn check_resolution(&self, n_osc: f64, kappa: &Vec3, context: &str) -> Result<()> {
        if self.dim == 1 {
            return Ok(());
        }
        if let Some(pole) = self.pole() {
            let alignment = dot(&pole, kappa);
            if alignment < 1.0 - 1e-12 {
                return Err(Error::MisalignedQuadrature { alignment });
            }
        }
        let required = min_polar_nodes(n_osc);
        let available = self.polar_count();
        if available < required {
            return Err(Error::UnderResolved {
                context: context.to_string(),
                required,
                available,
            });
        }
        Ok(())
    }

    /// Interpolates node values to an arbitrary unit vector `q`: exact for
    /// `d = 1`, periodic cubic in angle for `d = 2`, bilinear in `(u, azimuth)`
    /// for `d = 3`.
    pub fn interpolate(&self, q: &Vec3, value: impl Fn(usize) -> Complex64) -> Complex64 {
        match &self.layout {
            SphereLayout::Pair => value(if q[0] >= 0.0 { 0 } else { 1 }),
            SphereLayout::Circle { n } => {
                let n = *n;
                let h = 2.0 * PI / n as f64;
                let theta = q[1].atan2(q[0]);
                let s = (theta + PI) / h - 1.0;
                let cell = s.floor();
                let start = cell as isize - 1;
                let w = lagrange4(s - start as f64);
                (0..4)
                    .map(|j| value((start + j as isize).rem_euclid(n as isize) as usize) * w[j])
                    .sum()
            }
            SphereLayout::Sphere {
                polar_u,
                n_azimuth,
                frame,
            } => {
                let u = dot(q, &frame[0]).clamp(-1.0, 1.0);
                let az = dot(q, &frame[2]).atan2(dot(q, &frame[1])).rem_euclid(2.0 * PI);
                let nu = polar_u.len();
                let (iu, tu) = match polar_u.partition_point(|&x| x <= u) {
                    0 => (0, 0.0),
                    p if p >= nu => (nu - 2, 1.0),
                    p => (p - 1, (u - polar_u[p - 1]) / (polar_u[p] - polar_u[p - 1])),
                };
                let h = 2.0 * PI / *n_azimuth as f64;
                let sa = az / h;
                let ia = (sa.floor() as usize) % n_azimuth;
                let ta = sa - sa.floor();
                let ib = (ia + 1) % n_azimuth;
                let at = |a: usize, b: usize| value(a * n_azimuth + b);
                at(iu, ia) * ((1.0 - tu) * (1.0 - ta))
                    + at(iu, ib) * ((1.0 - tu) * ta)
                    + at(iu + 1, ia) * (tu * (1.0 - ta))
                    + at(iu + 1, ib) * (tu * ta)
            }
        }
    }
}

type TestFn = Arc<dyn Fn(&Vec3) -> Complex64 + Send + Sync>;

/// A `C¹` test function on `S^{d-1}` supported in `{q·κ ≥ 0}`.
#[derive(Clone)]
pub struct HalfSphereTestFn {
    dim: usize,
    kappa: Vec3,
    f: TestFn,
}

impl fmt::Debug for HalfSphereTestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HalfSphereTestFn")
            .field("dim", &self.dim)
            .field("kappa", &self.kappa)
            .finish()
    }
}

/// Names accepted by [`HalfSphereTestFn::named`].
pub const TEST_FUNCTIONS: [&str; 3] = ["cap-quadratic", "cap-skewed", "cap-cubic"];

impl HalfSphereTestFn {
    pub fn new(dim: usize, kappa: Vec3, f: impl Fn(&Vec3) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        crate::spectral::check_dimension(dim)?;
        let kappa = normalize(kappa).ok_or_else(|| Error::InvalidParameter("kappa must be nonzero".into()))?;
        if kappa[dim..].iter().any(|x| *x != 0.0) {
            return Err(Error::InvalidParameter(format!("kappa {kappa:?} is not in R^{dim}")));
        }
        Ok(Self {
            dim,
            kappa,
            f: Arc::new(f),
        })
    }

    /// Shipped test functions, all with `φ(κ) = 1`:
    /// * `cap-quadratic`: `max(q·κ, 0)²`
    /// * `cap-skewed`: `max(q·κ, 0)² (1 + ½ q·t)` with `t ⟂ κ` (no tilt in `d = 1`)
    /// * `cap-cubic`: `max(q·κ, 0)³`
    pub fn named(name: &str, dim: usize, kappa: Vec3) -> Result<Self> {
        let k = normalize(kappa).ok_or_else(|| Error::InvalidParameter("kappa must be nonzero".into()))?;
        let tangent = match dim {
            2 => [-k[1], k[0], 0.0],
            3 => frame_from_pole(k)[1],
            _ => [0.0; 3],
        };
        match name {
            "cap-quadratic" => Self::new(dim, k, move |q| {
                let s = dot(q, &k).max(0.0);
                Complex64::new(s * s, 0.0)
            }),
            "cap-skewed" => Self::new(dim, k, move |q| {
                let s = dot(q, &k).max(0.0);
                Complex64::new(s * s * (1.0 + 0.5 * dot(q, &tangent)), 0.0)
            }),
            "cap-cubic" => Self::new(dim, k, move |q| {
                let s = dot(q, &k).max(0.0);
                Complex64::new(s * s * s, 0.0)
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown test function `{other}` (expected one of {TEST_FUNCTIONS:?})"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> Vec3 {
        self.kappa
    }

    pub fn eval(&self, q: &Vec3) -> Complex64 {
        (self.f)(q)
    }

    /// Spot-checks the support condition on the given points.
    pub fn check_support(&self, points: &[Vec3]) -> Result<()> {
        for q in points {
            if dot(q, &self.kappa) < 0.0 && self.eval(q).norm() != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "test function is nonzero at {q:?}, outside the half sphere q·κ >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// `(2πi)^{-(d-1)/2} N^{(d-1)/2}` on the principal branch.
fn sphere_prefactor(dim: usize, n: f64) -> Complex64 {
    let p = (dim as f64 - 1.0) / 2.0;
    Complex64::from_polar((n / (2.0 * PI)).powf(p), -FRAC_PI_4 * (dim as f64 - 1.0))
}

/// Quadrature value of `A^N_φ`. In `d = 1` this is the exact two-term sum.
pub fn stationary_phase_functional(phi: &HalfSphereTestFn, n: f64, quad: &SphereQuadrature) -> Result<Complex64> {
    if quad.dim() != phi.dim() {
        return Err(Error::GridMismatch(format!(
            "{}-dimensional quadrature for a {}-dimensional test function",
            quad.dim(),
            phi.dim()
        )));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("N must be positive, got {n}")));
    }
    let kappa = phi.kappa();
    quad.check_resolution(n, &kappa, "stationary-phase functional")?;
    if phi.dim() == 1 {
        let q_plus = kappa;
        let q_minus = [-kappa[0], 0.0, 0.0];
        return Ok(phi.eval(&q_plus) + Complex64::from_polar(1.0, 2.0 * n) * phi.eval(&q_minus));
    }
    let sum: Complex64 = quad
        .nodes()
        .par_iter()
        .zip(quad.weights())
        .map(|(q, &w)| {
            let value = phi.eval(q);
            if value.norm_sqr() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::from_polar(w, (1.0 - dot(q, &kappa)) * n) * value
        })
        .sum();
    Ok(sphere_prefactor(phi.dim(), n) * sum)
}

/// Parameters of `I_N`, with `β ∈ (1/6, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryIntegralSpec {
    beta: f64,
    n: f64,
}

impl OscillatoryIntegralSpec {
    pub fn new(beta: f64, n: f64) -> Result<Self> {
        if !(beta > 1.0 / 6.0 && beta < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "beta = {beta} must lie strictly inside (1/6, 1/2)"
            )));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(format!("N must be positive, got {n}")));
        }
        Ok(Self { beta, n })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn upper_angle(&self) -> f64 {
        self.n.powf(-self.beta)
    }

    /// Upper limit of the substituted variable, `(1 - cos N^{-β}) N`.
    pub fn phase_span(&self) -> f64 {
        let h = (0.5 * self.upper_angle()).sin();
        2.0 * h * h * self.n
    }
}

/// The limit `½√π(1 + i)` of `I_N`.
pub fn oscillatory_limit() -> Complex64 {
    Complex64::new(0.5 * PI.sqrt(), 0.5 * PI.sqrt())
}

const GL_ORDER: usize = 16;
const REL_TOL: f64 = 1e-10;

fn adaptive_panels(span: f64, mut eval: impl FnMut(usize) -> Complex64) -> Result<(Complex64, usize)> {
    let mut panels = (span.ceil() as usize).max(4);
    let mut prev = eval(panels);
    for _ in 0..20 {
        panels *= 2;
        let next = eval(panels);
        if (next - prev).norm() <= REL_TOL * next.norm().max(f64::MIN_POSITIVE) {
            return Ok((next, panels));
        }
        prev = next;
    }
    Err(Error::QuadratureFailure(format!(
        "oscillatory integral did not settle with {panels} panels"
    )))
}

/// `I_N` by composite Gauss–Legendre in `θ` on panels of equal phase
/// increment, doubled until successive values agree to `1e-10` relative.
pub fn oscillatory_integral(spec: &OscillatoryIntegralSpec) -> Result<Complex64> {
    let n = spec.n();
    let span = spec.phase_span();
    let sqrt_n = n.sqrt();
    let (value, _) = adaptive_panels(span, |m| {
        // θ with (1 - cos θ) N = φ, i.e. θ = 2 asin(√(φ / 2N))
        let breaks: Vec<f64> = (0..=m)
            .map(|j| 2.0 * ((span * j as f64 / m as f64) / (2.0 * n)).sqrt().min(1.0).asin())
            .collect();
        integrate_panels(&breaks, GL_ORDER, |theta| {
            let h = (0.5 * theta).sin();
            Complex64::from_polar(sqrt_n, 2.0 * h * h * n)
        })
    })?;
    Ok(value)
}

/// `I_N` through the substitution `z = (1 - cos θ)N = p²`:
/// `∫_0^{√Z} e^{ip²} 2/√(2 - p²/N) dp`. Independent of the `θ` route.
pub fn oscillatory_integral_substituted(spec: &OscillatoryIntegralSpec) -> Result<Complex64> {
    let n = spec.n();
    let span = spec.phase_span();
    let top = span.sqrt();
    let (value, _) = adaptive_panels(span, |m| {
        let breaks: Vec<f64> = (0..=m).map(|j| top * (j as f64 / m as f64).sqrt()).collect();
        integrate_panels(&breaks, GL_ORDER, |p| {
            Complex64::from_polar(2.0 / (2.0 - p * p / n).sqrt(), p * p)
        })
    })?;
    Ok(value)
}

/// `(∫_0^∞ cos x² dx, ∫_0^∞ sin x² dx)`.
///
/// The integral over `[0, X]` with `X = 2.5` is the power series
/// `Σ iⁿ X^{2n+1} / (n!(2n+1))`. The tail `∫_X^∞ e^{it²} dt` equals
/// `½ e^{iπ/4} e^{iX²} K(X e^{-iπ/4})`, where `K(z) = √π e^{z²} erfc(z)` is
/// evaluated by its Laplace continued fraction
/// `1/(z + (1/2)/(z + 1/(z + (3/2)/(z + …))))`.
pub fn fresnel_oracle() -> (f64, f64) {
    const X: f64 = 2.5;
    let x2 = X * X;
    let mut head = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(X, 0.0); // iⁿ X^{2n+1} / n!
    for n in 0..200 {
        let term = power / (2.0 * n as f64 + 1.0);
        head += term;
        if term.norm() < 1e-20 {
            break;
        }
        power *= Complex64::new(0.0, x2 / (n as f64 + 1.0));
    }
    let z = Complex64::from_polar(X, -FRAC_PI_4);
    let cf = |depth: usize| {
        let mut acc = z;
        for k in (1..=depth).rev() {
            acc = z + (k as f64 / 2.0) / acc;
        }
        acc.inv()
    };
    let mut depth = 64;
    let mut k_val = cf(depth);
    while depth < 1 << 16 {
        depth *= 2;
        let next = cf(depth);
        let done = (next - k_val).norm() < 1e-17;
        k_val = next;
        if done {
            break;
        }
    }
    let tail = Complex64::from_polar(0.5, FRAC_PI_4 + x2) * k_val;
    let total = head + tail;
    (total.re, total.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_sphere_area() {
        assert_relative_eq!(SphereQuadrature::pair().total_weight(), 2.0);
        assert_relative_eq!(
            SphereQuadrature::circle(37).unwrap().total_weight(),
            2.0 * PI,
            max_relative = 1e-12
        );
        let s = SphereQuadrature::sphere(24, 9, [0.3, -0.2, 0.9]).unwrap();
        assert_relative_eq!(s.total_weight(), 4.0 * PI, max_relative = 1e-12);
        for q in s.nodes() {
            assert!((dot(q, q).sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_rule_integrates_harmonics() {
        let s = SphereQuadrature::sphere(20, 12, [0.0, 1.0, 1.0]).unwrap();
        let second_moment: f64 = s.nodes().iter().zip(s.weights()).map(|(q, w)| w * q[0] * q[0]).sum();
        assert_relative_eq!(second_moment, 4.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn circle_interpolation_is_periodic_cubic() {
        let f = |q: &Vec3| Complex64::new(q[0] * q[0] - q[1], 0.0);
        let max_err = |n: usize| {
            let c = SphereQuadrature::circle(n).unwrap();
            [-3.1, -1.0, 0.0, 0.77, 3.1]
                .iter()
                .map(|&t| {
                    let q = [f64::cos(t), f64::sin(t), 0.0];
                    (c.interpolate(&q, |i| f(&c.nodes()[i])) - f(&q)).norm()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (max_err(64), max_err(128));
        assert!(coarse < 1e-4, "{coarse}");
        assert!(coarse / fine > 12.0, "{coarse} / {fine}");
    }

    #[test]
    fn sphere_interpolation_hits_nodes() {
        let s = SphereQuadrature::sphere(10, 8, [0.0, 0.0, 1.0]).unwrap();
        for i in [0, 17, 40, 79] {
            let q = s.nodes()[i];
            let v = s.interpolate(&q, |j| Complex64::new(j as f64, 0.0));
            assert!((v.re - i as f64).abs() < 1e-9, "node {i}: {v}");
        }
    }

    #[test]
    fn d1_functional_is_exact() {
        let phi = HalfSphereTestFn::new(1, [1.0, 0.0, 0.0], |q| {
            if q[0] > 0.0 {
                Complex64::new(0.75, -0.25)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        for n in [1.0, 1e3, 1e9, 12345.678] {
            let a = stationary_phase_functional(&phi, n, &SphereQuadrature::pair()).unwrap();
            assert_eq!(a, Complex64::new(0.75, -0.25));
        }
    }

    #[test]
    fn zero_test_function_gives_zero() {
        for d in 1..=3 {
            let phi = HalfSphereTestFn::new(d, [1.0, 0.0, 0.0], |_| Complex64::new(0.0, 0.0)).unwrap();
            let q = SphereQuadrature::for_oscillation(d, 100.0, [1.0, 0.0, 0.0], 1.0, 8).unwrap();
            assert_eq!(
                stationary_phase_functional(&phi, 100.0, &q).unwrap(),
                Complex64::new(0.0, 0.0)
            );
        }
    }

    #[test]
    fn under_resolved_quadrature_is_rejected() {
        let phi = HalfSphereTestFn::named("cap-quadratic", 2, [1.0, 0.0, 0.0]).unwrap();
        let q = SphereQuadrature::circle(64).unwrap();
        assert!(matches!(
            stationary_phase_functional(&phi, 1e3, &q),
            Err(Error::UnderResolved { .. })
        ));
        let phi3 = HalfSphereTestFn::named("cap-quadratic", 3, [0.0, 0.0, 1.0]).unwrap();
        let q3 = SphereQuadrature::sphere(400, 8, [1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            stationary_phase_functional(&phi3, 10.0, &q3),
            Err(Error::MisalignedQuadrature { .. })
        ));
    }

    #[test]
    fn d2_converges_to_phi_kappa() {
        let phi = HalfSphereTestFn::named("cap-quadratic", 2, [1.0, 0.0, 0.0]).unwrap();
        let errs: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&n| {
                let q = SphereQuadrature::for_oscillation(2, n, phi.kappa(), 2.0, 1).unwrap();
                (stationary_phase_functional(&phi, n, &q).unwrap() - 1.0).norm()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn d3_closed_form_for_quadratic_cap() {
        // A = -iN ∫_0^1 e^{iN(1-u)} u² du, integrated by parts exactly
        let n = 250.0f64;
        let i = Complex64::i();
        let e = Complex64::from_polar(1.0, n);
        let exact = Complex64::new(1.0, 0.0) + 2.0 / (i * n) - 2.0 * (e - 1.0) / (i * n * i * n);
        let phi = HalfSphereTestFn::named("cap-quadratic", 3, [0.0, 1.0, 0.0]).unwrap();
        let q = SphereQuadrature::for_oscillation(3, n, phi.kappa(), 1.0, 4).unwrap();
        let a = stationary_phase_functional(&phi, n, &q).unwrap();
        assert!((a - exact).norm() < 1e-12, "{a} vs {exact}");
    }

    #[test]
    fn support_spot_check() {
        let bad = HalfSphereTestFn::new(2, [1.0, 0.0, 0.0], |_| Complex64::new(1.0, 0.0)).unwrap();
        let q = SphereQuadrature::circle(16).unwrap();
        assert!(bad.check_support(q.nodes()).is_err());
        let good = HalfSphereTestFn::named("cap-skewed", 2, [0.0, 1.0, 0.0]).unwrap();
        good.check_support(q.nodes()).unwrap();
        assert!(HalfSphereTestFn::named("nope", 2, [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn oscillatory_spec_range() {
        assert!(OscillatoryIntegralSpec::new(0.6, 10.0).is_err());
        assert!(OscillatoryIntegralSpec::new(1.0 / 6.0, 10.0).is_err());
        assert!(OscillatoryIntegralSpec::new(0.3, 0.0).is_err());
        assert!(OscillatoryIntegralSpec::new(0.3, 10.0).is_ok());
    }

    #[test]
    fn small_n_is_bounded_by_trivial_estimate() {
        for n in [2.0, 10.0, 50.0] {
            let spec = OscillatoryIntegralSpec::new(0.3, n).unwrap();
            let v = oscillatory_integral(&spec).unwrap();
            assert!(v.norm() <= n.sqrt() * n.powf(-0.3) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn both_routes_agree() {
        for n in [1e3, 1e5] {
            let spec = OscillatoryIntegralSpec::new(0.3, n).unwrap();
            let a = oscillatory_integral(&spec).unwrap();
            let b = oscillatory_integral_substituted(&spec).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn fresnel_components() {
        let (c, s) = fresnel_oracle();
        let exact = PI.sqrt() / (2.0 * 2f64.sqrt());
        assert!((c - exact).abs() < 1e-12, "C = {c}");
        assert!((s - exact).abs() < 1e-12, "S = {s}");
        assert!((c - s).abs() < 1e-10);
        let lim = Complex64::new(c, s) * 2f64.sqrt();
        assert!((lim - oscillatory_limit()).norm() < 1e-12);
        assert_relative_eq!(oscillatory_limit().re, 0.886_226_925_452_758, epsilon = 1e-12);
    }
}
