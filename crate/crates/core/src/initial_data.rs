//! Built-in initial spectra and a loader for tabulated ones.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{check_dimension, norm, FourierField, GridD};

/// Support radius of [`default_spectrum`].
pub const DEFAULT_SUPPORT: f64 = 4.0;

/// Support radius declared for [`gaussian_spectrum`]; the tail beyond is
/// below `e^{-50}`.
pub const GAUSSIAN_SUPPORT: f64 = 10.0;

/// `û₀(k) = exp(-8(|k| - 1)²) exp(-|k|²/32)` for `|k| ≤ 4`, zero beyond.
pub fn default_spectrum(dim: usize) -> Result<FourierField> {
    FourierField::analytic(dim, |k| {
        let r = norm(k);
        Complex64::new((-8.0 * (r - 1.0).powi(2) - r * r / 32.0).exp(), 0.0)
    })?
    .with_support_radius(DEFAULT_SUPPORT)
}

/// `û₀(k) = exp(-|k|²/2)`.
pub fn gaussian_spectrum(dim: usize) -> Result<FourierField> {
    FourierField::analytic(dim, |k| {
        let r = norm(k);
        Complex64::new((-0.5 * r * r).exp(), 0.0)
    })?
    .with_support_radius(GAUSSIAN_SUPPORT)
}

/// Looks up a built-in spectrum by name (`default` or `gaussian`).
pub fn named_spectrum(name: &str, dim: usize) -> Result<FourierField> {
    match name {
        "default" => default_spectrum(dim),
        "gaussian" => gaussian_spectrum(dim),
        other => Err(Error::InvalidParameter(format!(
            "unknown initial data `{other}` (expected default, gaussian or tabulated:<path>)"
        ))),
    }
}

/// Parses a tabulated spectrum: CSV rows `k_1,...,k_d,re,im` covering a full
/// uniform tensor grid in any row order. A non-numeric first line is taken as
/// a header.
///
/// The field is declared supported in the largest ball inside the grid box.
/// Samples outside that ball must be negligible (`≤ 1e-12` of the peak
/// modulus); they are set to zero, anything larger is an error.
pub fn parse_tabulated(text: &str, dim: usize) -> Result<FourierField> {
    check_dimension(dim)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let fields = match fields {
            Ok(f) => f,
            Err(_) if rows.is_empty() && i == 0 => continue,
            Err(e) => return Err(Error::InvalidParameter(format!("tabulated line {}: {e}", i + 1))),
        };
        if fields.len() != dim + 2 {
            return Err(Error::InvalidParameter(format!(
                "tabulated line {}: expected {} columns, found {}",
                i + 1,
                dim + 2,
                fields.len()
            )));
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter("tabulated spectrum has no rows".into()));
    }
    let coords: Vec<Vec<f64>> = (0..dim)
        .map(|axis| {
            let mut c: Vec<f64> = rows.iter().map(|r| r[axis]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let grid = GridD::from_coordinates(&coords)?;
    if rows.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "{} rows do not fill a {:?} grid",
            rows.len(),
            grid.shape()
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    for r in &rows {
        let idx: Vec<usize> = (0..dim)
            .map(|axis| {
                let g = &grid.axes()[axis];
                ((r[axis] - g.min()) / g.spacing()).round() as usize
            })
            .collect();
        let flat = grid.flatten(&idx);
        if seen[flat] {
            return Err(Error::InvalidGrid(format!("duplicate tabulated node {:?}", &r[..dim])));
        }
        seen[flat] = true;
        values[flat] = Complex64::new(r[dim], r[dim + 1]);
    }
    let radius = grid
        .axes()
        .iter()
        .map(|g| g.min().abs().min(g.max().abs()))
        .fold(f64::INFINITY, f64::min);
    if grid.axes().iter().any(|g| g.min() >= 0.0 || g.max() <= 0.0) {
        return Err(Error::InvalidGrid(
            "tabulated grid must contain k = 0 in its interior".into(),
        ));
    }
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (i, v) in values.iter_mut().enumerate() {
        if norm(&grid.point(i)) > radius {
            if v.norm() > 1e-12 * peak {
                return Err(Error::InvalidParameter(format!(
                    "tabulated spectrum is {} at {:?}, outside the inscribed ball |k| <= {radius}",
                    v.norm(),
                    grid.point(i)
                )));
            }
            *v = Complex64::new(0.0, 0.0);
        }
    }
    FourierField::from_samples(grid, values)?.with_support_radius(radius)
}

pub fn load_tabulated(path: &Path, dim: usize) -> Result<FourierField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_tabulated(&text, dim)
}
