//! Grids and continuous-convention Fourier transforms.
//!
//! Conventions follow the continuous transforms
//!
//! ```text
//! (F_d u)(k)      = ∫ u(x) e^{-i k·x} dx
//! (F_d^{-1} û)(x) = (2π)^{-d} ∫ û(k) e^{i k·x} dk
//! ```
//!
//! Discrete sums are multiplied by the grid spacing (forward) and by
//! `spacing / 2π` per axis (inverse), so a DFT result approximates the integral
//! directly. A physical grid with spacing `h` and `n` nodes pairs with the
//! centered dual grid `ξ_m = (m - n/2)·2π/(n h)`; forward followed by inverse
//! on such a pair is the identity up to rounding.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const DUALITY_TOL: f64 = 1e-9;

/// Uniform one-dimensional grid `min, min + h, ..., max` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    min: f64,
    max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidGrid(format!(
                "extent [{min}, {max}] must be finite and increasing"
            )));
        }
        Ok(Self { min, max, n })
    }

    /// Builds a grid from explicit node coordinates, rejecting non-uniform spacing.
    pub fn from_nodes(nodes: &[f64]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        let n = nodes.len();
        let grid = Self::new(nodes[0], nodes[n - 1], n)?;
        let h = grid.spacing();
        let deviation = nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - grid.node(i)).abs() / h)
            .fold(0.0, f64::max);
        if deviation > 1e-8 {
            return Err(Error::NonUniformGrid { axis: 0, deviation });
        }
        Ok(grid)
    }

    /// Grid with `n` nodes and spacing `h`, starting at `min`.
    pub fn with_spacing(min: f64, h: f64, n: usize) -> Result<Self> {
        Self::new(min, min + h * (n as f64 - 1.0), n)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n as f64 - 1.0)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// The centered reciprocal grid used by the FFT pairing.
    pub fn dual(&self) -> Self {
        let n = self.n;
        let dk = 2.0 * PI / (n as f64 * self.spacing());
        let first = -((n / 2) as f64) * dk;
        Self {
            min: first,
            max: first + (n as f64 - 1.0) * dk,
            n,
        }
    }

    /// Checks that `other` has the node count and spacing of the FFT dual.
    pub fn check_dual(&self, other: &Grid1D) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch(format!(
                "node counts differ ({} vs {})",
                self.n, other.n
            )));
        }
        let product = self.spacing() * other.spacing() * self.n as f64;
        if ((product - 2.0 * PI) / (2.0 * PI)).abs() > DUALITY_TOL {
            return Err(Error::GridMismatch(format!(
                "spacing product h·Δξ·n = {product} differs from 2π"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Start index and weights of the local four-point cubic stencil at `x`.
    /// Returns `None` outside the grid or when the grid has fewer than 4 nodes.
    pub fn cubic_stencil(&self, x: f64) -> Option<(usize, [f64; 4])> {
        if self.n < 4 || !self.contains(x) {
            return None;
        }
        let s = (x - self.min) / self.spacing();
        let cell = (s.floor() as isize).clamp(0, self.n as isize - 2) as usize;
        let start = cell.saturating_sub(1).min(self.n - 4);
        let t = s - start as f64;
        Some((start, lagrange4(t)))
    }
}

/// Weights of the cubic Lagrange interpolant through nodes 0, 1, 2, 3 at `t`.
pub(crate) fn lagrange4(t: f64) -> [f64; 4] {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

/// Cubic interpolation of samples on `grid` at `x`; `None` outside the grid.
pub fn interpolate_cubic(grid: &Grid1D, values: &[Complex64], x: f64) -> Option<Complex64> {
    let (start, w) = grid.cubic_stencil(x)?;
    Some((0..4).map(|j| values[start + j] * w[j]).sum::<Complex64>())
}

/// Tensor-product uniform grid in `d ∈ {1, 2, 3}` dimensions, row-major with
/// the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridD {
    axes: Vec<Grid1D>,
}

impl GridD {
    pub fn new(axes: Vec<Grid1D>) -> Result<Self> {
        check_dimension(axes.len())?;
        Ok(Self { axes })
    }

    /// Cube `[min, max]^d` with `n` nodes per axis.
    pub fn cube(dim: usize, min: f64, max: f64, n: usize) -> Result<Self> {
        check_dimension(dim)?;
        let axis = Grid1D::new(min, max, n)?;
        Ok(Self { axes: vec![axis; dim] })
    }

    /// Builds a grid from per-axis node coordinates; rejects non-uniform axes.
    pub fn from_coordinates(coords: &[Vec<f64>]) -> Result<Self> {
        check_dimension(coords.len())?;
        let axes = coords
            .iter()
            .enumerate()
            .map(|(axis, c)| {
                Grid1D::from_nodes(c).map_err(|e| match e {
                    Error::NonUniformGrid { deviation, .. } => Error::NonUniformGrid { axis, deviation },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Grid1D] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Grid1D::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Grid1D::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `Π h_i`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Grid1D::spacing).product()
    }

    pub fn dual(&self) -> Self {
        Self {
            axes: self.axes.iter().map(Grid1D::dual).collect(),
        }
    }

    /// Multi-index of a flat row-major offset.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (axis, grid) in self.axes.iter().enumerate().rev() {
            idx[axis] = flat % grid.len();
            flat /= grid.len();
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, g)| acc * g.len() + i)
    }

    /// Coordinates of the node at a flat offset.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, g)| g.node(i))
            .collect()
    }
}

pub(crate) fn check_dimension(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// Complex samples of a function on a [`GridD`].
#[derive(Debug, Clone)]
pub struct SampledField {
    pub grid: GridD,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridD, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridD, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    /// Discrete L² norm `(Σ |u|² h^d)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(Complex64::norm_sqr).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}

pub type SpectralFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Fourier-space data `û(k)`: grid samples, an analytic evaluator, or both.
///
/// Off-grid queries use the evaluator when present, otherwise tensor-product
/// local cubic interpolation of the samples. With a declared support radius
/// `K`, every query with `|k| > K` returns exactly zero.
#[derive(Clone)]
pub struct FourierField {
    dim: usize,
    samples: Option<(GridD, Vec<Complex64>)>,
    closure: Option<SpectralFn>,
    support_radius: Option<f64>,
}

impl fmt::Debug for FourierField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierField")
            .field("dim", &self.dim)
            .field("grid", &self.samples.as_ref().map(|(g, _)| g))
            .field("analytic", &self.closure.is_some())
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl FourierField {
    pub fn from_samples(grid: GridD, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("Fourier samples must be finite".into()));
        }
        Ok(Self {
            dim: grid.dim(),
            samples: Some((grid, values)),
            closure: None,
            support_radius: None,
        })
    }

    pub fn analytic(dim: usize, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        check_dimension(dim)?;
        Ok(Self {
            dim,
            samples: None,
            closure: Some(Arc::new(f)),
            support_radius: None,
        })
    }

    /// Attaches an analytic evaluator used for off-grid queries.
    pub fn with_closure(mut self, f: SpectralFn) -> Self {
        self.closure = Some(f);
        self
    }

    /// Declares compact support in `|k| ≤ radius`. Grid samples outside the
    /// ball must already vanish.
    pub fn with_support_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "support radius must be positive, got {radius}"
            )));
        }
        if let Some((grid, values)) = &self.samples {
            for (i, v) in values.iter().enumerate() {
                let k = grid.point(i);
                if norm(&k) > radius && v.norm() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "sample at {k:?} is nonzero outside the declared support radius {radius}"
                    )));
                }
            }
        }
        self.support_radius = Some(radius);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> Option<&GridD> {
        self.samples.as_ref().map(|(g, _)| g)
    }

    pub fn values(&self) -> Option<&[Complex64]> {
        self.samples.as_ref().map(|(_, v)| v.as_slice())
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn is_analytic(&self) -> bool {
        self.closure.is_some()
    }

    /// Sample at a grid multi-index.
    pub fn node_value(&self, idx: &[usize]) -> Option<Complex64> {
        let (grid, values) = self.samples.as_ref()?;
        if idx.len() != grid.dim() || idx.iter().zip(grid.axes()).any(|(&i, g)| i >= g.len()) {
            return None;
        }
        Some(values[grid.flatten(idx)])
    }

    /// Evaluates `û(k)` at an arbitrary point.
    pub fn eval(&self, k: &[f64]) -> Result<Complex64> {
        if k.len() != self.dim {
            return Err(Error::GridMismatch(format!(
                "query of dimension {} for a {}-dimensional field",
                k.len(),
                self.dim
            )));
        }
        if let Some(r) = self.support_radius {
            if norm(k) > r {
                return Ok(Complex64::new(0.0, 0.0));
            }
        }
        if let Some(f) = &self.closure {
            return Ok(f(k));
        }
        let (grid, values) = self
            .samples
            .as_ref()
            .ok_or_else(|| Error::OutOfDomain { point: k.to_vec() })?;
        interpolate_tensor(grid, values, k).ok_or_else(|| Error::OutOfDomain { point: k.to_vec() })
    }

    /// Discrete `‖û‖_{L²}` over the sample grid.
    pub fn l2_norm_samples(&self) -> Option<f64> {
        let (grid, values) = self.samples.as_ref()?;
        Some((values.iter().map(Complex64::norm_sqr).sum::<f64>() * grid.cell_volume()).sqrt())
    }
}

fn interpolate_tensor(grid: &GridD, values: &[Complex64], k: &[f64]) -> Option<Complex64> {
    let stencils = grid
        .axes()
        .iter()
        .zip(k)
        .map(|(g, &x)| g.cubic_stencil(x))
        .collect::<Option<Vec<_>>>()?;
    let d = stencils.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; d];
    for combo in 0..4usize.pow(d as u32) {
        let mut c = combo;
        let mut w = 1.0;
        for axis in 0..d {
            let j = c % 4;
            c /= 4;
            idx[axis] = stencils[axis].0 + j;
            w *= stencils[axis].1[j];
        }
        if w != 0.0 {
            acc += values[grid.flatten(&idx)] * w;
        }
    }
    Some(acc)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

/// `out_m = scale · Σ_j v_j e^{sign·i·x_j·y_m}` for FFT-paired grids, in place.
fn continuous_dft(data: &mut [Complex64], src: &Grid1D, dst: &Grid1D, sign: f64, scale: f64, fft: &dyn Fft<f64>) {
    let (x0, dx) = (src.min(), src.spacing());
    let (y0, dy) = (dst.min(), dst.spacing());
    for (j, v) in data.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, sign * y0 * dx * j as f64);
    }
    fft.process(data);
    let global = sign * x0 * y0;
    for (m, v) in data.iter_mut().enumerate() {
        *v *= Complex64::from_polar(scale, global + sign * x0 * dy * m as f64);
    }
}

/// `F_1` of samples on `z_grid`, evaluated on its dual `xi_grid`.
pub fn forward_transform_1(values: &[Complex64], z_grid: &Grid1D, xi_grid: &Grid1D) -> Result<Vec<Complex64>> {
    transform_1(values, z_grid, xi_grid, true)
}

/// `F_1^{-1}` of a spectrum on `xi_grid`, evaluated on its dual `z_grid`:
/// `V(z) ≈ (1/2π) Σ_m V̂(ξ_m) e^{i z ξ_m} Δξ`.
pub fn inverse_transform_1(spectrum: &[Complex64], xi_grid: &Grid1D, z_grid: &Grid1D) -> Result<Vec<Complex64>> {
    transform_1(spectrum, xi_grid, z_grid, false)
}

fn transform_1(values: &[Complex64], src: &Grid1D, dst: &Grid1D, forward: bool) -> Result<Vec<Complex64>> {
    if values.len() != src.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a grid of {} nodes",
            values.len(),
            src.len()
        )));
    }
    src.check_dual(dst)?;
    let mut data = values.to_vec();
    let fft = plan(src.len(), forward);
    let (sign, scale) = if forward {
        (-1.0, src.spacing())
    } else {
        (1.0, src.spacing() / (2.0 * PI))
    };
    continuous_dft(&mut data, src, dst, sign, scale, fft.as_ref());
    Ok(data)
}

/// `F_d` of a sampled function; the result lives on the dual grid.
pub fn forward_transform_d(u: &SampledField) -> Result<FourierField> {
    check_dimension(u.grid.dim())?;
    let dual = u.grid.dual();
    let values = transform_d(&u.values, &u.grid, &dual, true)?;
    FourierField::from_samples(dual, values)
}

/// `F_d^{-1}` of grid samples of a Fourier field onto the physical grid `x_grid`.
pub fn inverse_transform_d(field: &FourierField, x_grid: &GridD) -> Result<SampledField> {
    let (k_grid, values) = field
        .samples
        .as_ref()
        .ok_or_else(|| Error::GridMismatch("inverse transform needs grid samples".into()))?;
    let out = transform_d(values, k_grid, x_grid, false)?;
    SampledField::new(x_grid.clone(), out)
}

fn transform_d(values: &[Complex64], src: &GridD, dst: &GridD, forward: bool) -> Result<Vec<Complex64>> {
    if src.dim() != dst.dim() {
        return Err(Error::GridMismatch("dimension mismatch".into()));
    }
    for (a, b) in src.axes().iter().zip(dst.axes()) {
        a.check_dual(b)?;
    }
    if values.len() != src.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a grid of {} nodes",
            values.len(),
            src.len()
        )));
    }
    let shape = src.shape();
    let mut data = values.to_vec();
    for axis in 0..src.dim() {
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let fft = plan(n, forward);
        let (g_src, g_dst) = (&src.axes()[axis], &dst.axes()[axis]);
        let (sign, scale) = if forward {
            (-1.0, g_src.spacing())
        } else {
            (1.0, g_src.spacing() / (2.0 * PI))
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                continuous_dft(&mut line, g_src, g_dst, sign, scale, fft.as_ref());
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
    Ok(data)
}

/// Direct (non-FFT) evaluation of `Σ_j h·v_j e^{-iξ z_j}` at one frequency.
pub fn transform_at(values: &[Complex64], z_grid: &Grid1D, xi: f64) -> Complex64 {
    let h = z_grid.spacing();
    let step = Complex64::from_polar(1.0, -xi * h);
    let mut phase = Complex64::from_polar(1.0, -xi * z_grid.min());
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        if j % 64 == 0 {
            phase = Complex64::from_polar(1.0, -xi * z_grid.node(j));
        }
        acc += v * phase;
        phase *= step;
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, 1.0, 4).is_err());
        assert!(matches!(
            Grid1D::from_nodes(&[0.0, 1.0, 2.5, 3.0]),
            Err(Error::NonUniformGrid { .. })
        ));
        assert!(matches!(
            GridD::cube(4, -1.0, 1.0, 8),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn non_uniform_axis_is_reported_with_its_index() {
        let err = GridD::from_coordinates(&[vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::NonUniformGrid { axis: 1, .. }));
    }

    #[test]
    fn dual_grid_spacing() {
        let g = Grid1D::new(-64.0, 64.0, 4096).unwrap();
        let d = g.dual();
        g.check_dual(&d).unwrap();
        assert_relative_eq!(d.spacing() * g.spacing() * 4096.0, 2.0 * PI, max_relative = 1e-12);
        assert_eq!(d.node(2048), 0.0);
        assert!(g.check_dual(&Grid1D::new(-1.0, 1.0, 4096).unwrap()).is_err());
    }

    #[test]
    fn delta_transforms_to_one() {
        let grid = GridD::cube(1, -8.0, 8.0, 257).unwrap();
        let h = grid.cell_volume();
        let u = SampledField::from_fn(grid, |x| if x[0].abs() < 1e-12 { c(1.0 / h) } else { c(0.0) });
        let uh = forward_transform_d(&u).unwrap();
        for v in uh.values().unwrap() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let grid = GridD::cube(1, -20.0, 20.0, 512).unwrap();
        let u = SampledField::from_fn(grid, |x| c((-x[0] * x[0] / 2.0).exp()));
        let uh = forward_transform_d(&u).unwrap();
        let kg = uh.grid().unwrap().clone();
        for (i, v) in uh.values().unwrap().iter().enumerate() {
            let k = kg.point(i)[0];
            let exact = (2.0 * PI).sqrt() * (-k * k / 2.0).exp();
            assert!((v - c(exact)).norm() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn gaussian_2d_matches_closed_form() {
        let grid = GridD::cube(2, -12.0, 12.0, 96).unwrap();
        let u = SampledField::from_fn(grid, |x| c((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()));
        let uh = forward_transform_d(&u).unwrap();
        let kg = uh.grid().unwrap().clone();
        for (i, v) in uh.values().unwrap().iter().enumerate() {
            let k = kg.point(i);
            let exact = 2.0 * PI * (-(k[0] * k[0] + k[1] * k[1]) / 2.0).exp();
            assert!((v - c(exact)).norm() < 1e-10);
        }
    }

    #[test]
    fn parseval_in_three_dimensions() {
        let grid = GridD::cube(3, -6.0, 6.0, 32).unwrap();
        let u = SampledField::from_fn(grid, |x| {
            let r2 = x[0] * x[0] + 2.0 * x[1] * x[1] + 0.5 * x[2] * x[2];
            Complex64::new((-r2).exp(), x[0] * (-r2).exp())
        });
        let uh = forward_transform_d(&u).unwrap();
        let lhs = uh.l2_norm_samples().unwrap() / (2.0 * PI).powf(1.5);
        assert_relative_eq!(lhs, u.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn inverse_of_indicator_is_sinc() {
        let z = Grid1D::new(-200.0, 200.0, 1 << 14).unwrap();
        let xi = z.dual();
        let a = 1.3;
        let spectrum: Vec<_> = xi
            .nodes()
            .iter()
            .map(|&x| if x.abs() <= a { c(1.0) } else { c(0.0) })
            .collect();
        // The discrete indicator covers [-m Δξ, m Δξ]; the trapezoid-consistent
        // oracle is the Dirichlet sum, which converges to sin(a z)/(π z).
        let v = inverse_transform_1(&spectrum, &xi, &z).unwrap();
        for &zj in &[0.7, 3.1, -5.2, 11.0] {
            let i = ((zj - z.min()) / z.spacing()).round() as usize;
            let zz = z.node(i);
            let exact = (a * zz).sin() / (PI * zz);
            assert!((v[i] - c(exact)).norm() < 2e-3, "z = {zz}: {} vs {exact}", v[i]);
        }
        let zero = inverse_transform_1(&vec![c(0.0); xi.len()], &xi, &z).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn round_trip_is_identity() {
        let z = Grid1D::new(-64.0, 64.0, 4096).unwrap();
        let xi = z.dual();
        let v: Vec<_> = z
            .nodes()
            .iter()
            .map(|&x| Complex64::new((-x * x / 2.0).exp(), (x * 0.3).sin() * (-x * x / 4.0).exp()))
            .collect();
        let vh = forward_transform_1(&v, &z, &xi).unwrap();
        let back = inverse_transform_1(&vh, &xi, &z).unwrap();
        let err = v.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn convention_lock_sign_and_scale() {
        let z = Grid1D::new(-40.0, 40.0, 2048).unwrap();
        let v: Vec<_> = z.nodes().iter().map(|&x| c((-x * x / 2.0).exp())).collect();
        let at_one = transform_at(&v, &z, 1.0);
        let expected = (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert!(at_one.re > 0.0);
        assert_relative_eq!(at_one.re, expected, max_relative = 1e-10);
        // a shifted bump picks up e^{-i ξ z0}: catches sign flips
        let shifted: Vec<_> = z
            .nodes()
            .iter()
            .map(|&x| c((-(x - 2.0) * (x - 2.0) / 2.0).exp()))
            .collect();
        let s = transform_at(&shifted, &z, 1.0);
        let expected_shift = Complex64::from_polar(expected, -2.0);
        assert!((s - expected_shift).norm() < 1e-10);
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics_and_nodes() {
        let g = Grid1D::new(-2.0, 3.0, 11).unwrap();
        let vals: Vec<_> = g.nodes().iter().map(|&x| c(x * x * x - 2.0 * x + 1.0)).collect();
        for &x in &[-2.0, -1.73, 0.0, 0.31, 2.99, 3.0] {
            let p = interpolate_cubic(&g, &vals, x).unwrap();
            assert_relative_eq!(p.re, x * x * x - 2.0 * x + 1.0, epsilon = 1e-12);
        }
        assert!(interpolate_cubic(&g, &vals, 3.01).is_none());
    }

    #[test]
    fn fourier_field_queries() {
        let grid = GridD::cube(2, -4.0, 4.0, 81).unwrap();
        let f = |k: &[f64]| c((-(k[0] * k[0] + k[1] * k[1])).exp());
        let vals = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        let field = FourierField::from_samples(grid, vals).unwrap();
        let v = field.eval(&[0.33, -0.71]).unwrap();
        assert!((v - f(&[0.33, -0.71])).norm() < 1e-4);
        assert!(matches!(field.eval(&[5.0, 0.0]), Err(Error::OutOfDomain { .. })));
        let analytic = FourierField::analytic(2, f).unwrap().with_support_radius(3.0).unwrap();
        assert_eq!(analytic.eval(&[3.5, 0.0]).unwrap(), c(0.0));
        assert_eq!(analytic.eval(&[0.5, 0.0]).unwrap(), f(&[0.5, 0.0]));
    }

    #[test]
    fn support_radius_is_validated_against_samples() {
        let grid = GridD::cube(1, -4.0, 4.0, 9).unwrap();
        let field = FourierField::from_samples(grid, vec![c(1.0); 9]).unwrap();
        assert!(field.with_support_radius(2.0).is_err());
    }
}
