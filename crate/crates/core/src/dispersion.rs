//! Dispersion laws `b(ξ)` and the exact Fourier-multiplier phase.
//!
//! The weakly dispersive equation `∂²_t u − c²Δu + ε²d₀Δ²u = 0` has the exact
//! phase `√(c²|k|² + ε²d₀|k|⁴)·t`. At `t = τ/ε²` this is
//! `c|k|τ/ε² + b₃|k|³τ + O(ε²)` with `b₃ = d₀/(2c)`, which is the cubic law.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionKind {
    /// `b ≡ 0`: the pure wave equation.
    Zero,
    /// `b(ξ) = b₃ξ³`: linearized KdV profile evolution.
    Cubic { b3: f64 },
    /// Exact weakly dispersive phase with fourth-order coefficient `d₀`.
    FullSqrt { d0: f64 },
}

/// A dispersion law together with the wave speed `c` and scale `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSpec {
    kind: DispersionKind,
    c: f64,
    epsilon: f64,
}

impl DispersionSpec {
    pub fn new(kind: DispersionKind, c: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wave speed c must be positive, got {c}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        match kind {
            DispersionKind::Cubic { b3 } if !b3.is_finite() => {
                return Err(Error::InvalidParameter(format!("b3 must be finite, got {b3}")))
            }
            DispersionKind::FullSqrt { d0 } if !(d0 > 0.0 && d0.is_finite()) => {
                return Err(Error::InvalidParameter(format!("d0 must be positive, got {d0}")))
            }
            _ => {}
        }
        Ok(Self { kind, c, epsilon })
    }

    pub fn zero(c: f64, epsilon: f64) -> Result<Self> {
        Self::new(DispersionKind::Zero, c, epsilon)
    }

    pub fn cubic(b3: f64, c: f64, epsilon: f64) -> Result<Self> {
        Self::new(DispersionKind::Cubic { b3 }, c, epsilon)
    }

    /// Cubic law reduced from the weakly dispersive equation, `b₃ = d₀/(2c)`.
    pub fn cubic_from_physical(c: f64, d0: f64, epsilon: f64) -> Result<Self> {
        if !(d0 > 0.0) {
            return Err(Error::InvalidParameter(format!("d0 must be positive, got {d0}")));
        }
        Self::cubic(d0 / (2.0 * c), c, epsilon)
    }

    pub fn full_sqrt(d0: f64, c: f64, epsilon: f64) -> Result<Self> {
        Self::new(DispersionKind::FullSqrt { d0 }, c, epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.kind, self.c, epsilon)
    }

    pub fn kind(&self) -> DispersionKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DispersionKind::Zero => "zero",
            DispersionKind::Cubic { .. } => "cubic",
            DispersionKind::FullSqrt { .. } => "full_sqrt",
        }
    }

    /// The profile dispersion `b(ξ)`.
    ///
    /// For `FullSqrt` this is the exact remainder
    /// `sign(ξ)·(√(c²ξ² + ε²d₀ξ⁴) − c|ξ|)/ε²`, evaluated without cancellation;
    /// it tends to `d₀ξ³/(2c)` as `ε → 0`.
    pub fn eval_b(&self, xi: f64) -> f64 {
        match self.kind {
            DispersionKind::Zero => 0.0,
            DispersionKind::Cubic { b3 } => b3 * xi * xi * xi,
            DispersionKind::FullSqrt { d0 } => {
                let a = xi.abs();
                let root = (self.c * self.c * a * a + self.epsilon * self.epsilon * d0 * a.powi(4)).sqrt();
                let denom = root + self.c * a;
                if denom == 0.0 {
                    0.0
                } else {
                    xi.signum() * d0 * a.powi(4) / denom
                }
            }
        }
    }

    /// Total phase `Φ(k, t)` with `û(k, t) = e^{−iΦ} û₀(k)`.
    pub fn exact_multiplier_phase(&self, k_norm: f64, t: f64) -> f64 {
        match self.kind {
            DispersionKind::FullSqrt { d0 } => {
                (self.c * self.c * k_norm * k_norm + self.epsilon * self.epsilon * d0 * k_norm.powi(4)).sqrt() * t
            }
            _ => self.c * k_norm * t + self.eval_b(k_norm) * self.epsilon * self.epsilon * t,
        }
    }

    /// The unit-modulus multiplier `e^{−iΦ(k, t)}`.
    pub fn multiplier(&self, k_norm: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.exact_multiplier_phase(k_norm, t))
    }
}
