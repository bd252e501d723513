//! Legendre polynomials and Legendre functions `P_ν(cosh ξ)` of real or
//! conical degree.
//!
//! Both real degree and conical degree `ν = −½ + iτ` use the Mehler–Dirichlet
//! integral
//!
//! `P_ν(cosh ξ) = (1/π) ∫₀^ξ K(t) dt / √(sinh((ξ+t)/2) sinh((ξ−t)/2))`,
//!
//! with `K(t) = cos(τt)` or `cosh((ν+½)t)`. The substitution `t = ξ − v²`
//! turns the inverse square root at `t = ξ` into the smooth factor
//! `√(u / sinh u)`, `u = v²/2`, so plain composite Gauss–Legendre converges
//! spectrally. Unlike an angular substitution, this keeps nodes near `t = 0`
//! for large `ξ`, where a finite fraction of the integral sits.

use crate::quad::GaussRule;
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecialError {
    #[error("argument ξ = {0} must be positive")]
    NonPositiveXi(f64),
    #[error("conical parameter τ = {0} must be finite and non-negative")]
    BadTau(f64),
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `u / sinh u`, exact to rounding near zero.
fn u_over_sinh(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u / u.sinh()
    }
}

/// Gauss nodes `t_j` and weights `w_j` such that
/// `P(ξ) ≈ Σ_j w_j K(t_j)` for any smooth kernel `K`.
#[derive(Debug, Clone)]
pub struct MehlerQuadrature {
    xi: f64,
    t: Vec<f64>,
    w: Vec<f64>,
}

/// Nodes per panel of the composite rule.
pub const MEHLER_ORDER: usize = 16;
/// Minimum number of panels (128 nodes).
pub const MEHLER_MIN_PANELS: usize = 8;

impl MehlerQuadrature {
    /// Rule on `[0, ξ]` resolving kernels oscillating with frequency up to
    /// `tau_max` (or growing like `e^{tau_max t}`).
    pub fn new(xi: f64, tau_max: f64) -> Result<Self, SpecialError> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(SpecialError::NonPositiveXi(xi));
        }
        let panels = MEHLER_MIN_PANELS + (tau_max.abs() * xi / PI).ceil() as usize;
        let rule = GaussRule::new(MEHLER_ORDER);
        let (vs, vw) = rule.composite(0.0, xi.sqrt(), panels);
        let mut t = Vec::with_capacity(vs.len());
        let mut w = Vec::with_capacity(vs.len());
        for (v, wv) in vs.iter().zip(&vw) {
            let u = 0.5 * v * v;
            // 2v dv / √(sinh(ξ−u) sinh u) = 2√2 √(u/sinh u) / √sinh(ξ−u) dv
            let amp = 2.0 * SQRT_2 * u_over_sinh(u).sqrt() / (xi - u).sinh().sqrt();
            t.push(xi - v * v);
            w.push(wv * amp / PI);
        }
        Ok(MehlerQuadrature { xi, t, w })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `P_{−½+iτ}(cosh ξ)`.
    pub fn conical(&self, tau: f64) -> f64 {
        self.t.iter().zip(&self.w).map(|(t, w)| w * (tau * t).cos()).sum()
    }

    /// `P_ν(cosh ξ)` for real `ν ≥ −½`.
    pub fn real_degree(&self, nu: f64) -> f64 {
        let c = nu + 0.5;
        self.t.iter().zip(&self.w).map(|(t, w)| w * (c * t).cosh()).sum()
    }
}

/// Conical function `P_{−½+iτ}(cosh ξ)`.
pub fn conical_legendre(tau: f64, xi: f64) -> Result<f64, SpecialError> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(SpecialError::BadTau(tau));
    }
    Ok(MehlerQuadrature::new(xi, tau)?.conical(tau))
}

/// `P_ν(cosh ξ)` for real degree `ν ≥ −½` from the same integral; used to
/// validate the quadrature against Legendre polynomials at integer `ν`.
pub fn legendre_real_degree(nu: f64, xi: f64) -> Result<f64, SpecialError> {
    Ok(MehlerQuadrature::new(xi, nu + 0.5)?.real_degree(nu))
}
