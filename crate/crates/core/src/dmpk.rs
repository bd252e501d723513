//! Scaling of transmission eigenvalues with wire length: coordinate maps,
//! the exact β = 2 density, a stochastic oracle, transfer-matrix products
//! and the β = 2 decoupling into free particles.
//!
//! Coordinates: `T = 1/(1+λ)`, `λ = sinh²x`. Lengths `s` are in units of the
//! mean free path and `γ = βN + 2 − β`.
//!
//! # Stochastic oracle
//!
//! The scaling equation `∂_s P = (2/γ) Σ_i ∂_i λ_i(1+λ_i) J ∂_i (P/J)` with
//! `J = ∏|λ_j − λ_i|^β` is in divergence form `Σ ∂_i [B_i J ∂_i (P/J)]`,
//! `B_i = (2/γ) λ_i(1+λ_i)`. Expanding, `∂_s P = Σ ∂_i²(B_i P) − ∂_i(A_i P)`
//! with `A_i = ∂_i B_i + B_i ∂_i ln J`, so the Itô process is
//! `dλ_i = A_i ds + √(2B_i) dW_i`. In `x` (Itô's rule with
//! `dx/dλ = 1/sinh 2x`) the noise becomes additive:
//!
//! `dx_i = (1/γ)[coth 2x_i + (β/2) sinh 2x_i Σ_{j≠i} 1/(sinh²x_i − sinh²x_j)] ds + γ^{−1/2} dW_i`.
//!
//! The drift is `(1/2γ) ∂_i ln J_x` with
//! `J_x = ∏ sinh 2x_i ∏_{i<j} |sinh²x_j − sinh²x_i|^β`, the radial Jacobian
//! of the `C_N` system with `(m_o, m_l) = (β, 1)` at negative curvature.
//! Steps are capped by the distance to the nearest wall (with a floor); a
//! step that leaves the ordered region is split in two with a
//! Brownian-bridge midpoint.
//!
//! # Decoupling
//!
//! With `P = J_x^{1/2} Ψ` the generator becomes
//! `(1/2γ) J_x^{1/2} Δ_B J_x^{−1/2}` with `Δ_B` the radial Laplace–Beltrami
//! operator, equal to `(1/2γ)[Σ ∂_i² − W]`,
//! `W = Σ_i [½ ∂_i² ln J_x + ¼ (∂_i ln J_x)²]`. At `β = 2`,
//! `W + Σ_i sinh⁻² 2x_i` is the constant `N(4N² − 1)/3`, so the generator is
//! `−H₀ + U` with `H₀ = −(1/2γ) Σ (∂_i² + sinh⁻² 2x_i)` and
//! `U = −N(4N² − 1)/(6γ)`.

use crate::cartan::{
    flat_laplacian, radial_laplace_beltrami, CartanError, Curvature, RadialGeometry, RadialGrid, RadialGridFunction,
};
use crate::ensembles::{draw_rng, par_draws, transfer_slice, Beta, EnsembleError};
use crate::quad::{loglog_slope, GaussRule};
use crate::roots::{build_root_system, Family, Multiplicities};
use crate::special::{conical_legendre, MehlerQuadrature, SpecialError};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DmpkError {
    #[error("transmission {0} outside (0, 1]")]
    BadTransmission(f64),
    #[error("lambda {0} must be finite and non-negative")]
    BadLambda(f64),
    #[error("x {0} must be finite and non-negative")]
    BadX(f64),
    #[error("length s = {0} must be positive")]
    BadLength(f64),
    #[error("point {0:?} is outside the chamber 0 < x_1 < ... < x_N")]
    Chamber(Vec<f64>),
    #[error("exact density supports 1 <= N <= 4 channels, got {0}")]
    Channels(usize),
    #[error("time step {dt} must be positive and at most 1e-3 * s_final = {max}")]
    BadStep { dt: f64, max: f64 },
    #[error("walker {walker} left the ordered region near s = {s} after {halvings} step halvings")]
    Collision { walker: u64, s: f64, halvings: u32 },
    #[error("accumulated transfer matrix has condition number {0:.3e}")]
    Conditioning(f64),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("exact density at N = {n}, s = {s} is lost to cancellation in double precision (tail resolved only to {floor:.1e})")]
    Unresolved { n: usize, s: f64, floor: f64 },
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

pub fn gamma(beta: Beta, n: usize) -> f64 {
    let b = beta.as_f64();
    b * n as f64 + 2.0 - b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    T,
    Lambda,
    X,
}

pub fn lambda_from_t(t: f64) -> Result<f64, DmpkError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(DmpkError::BadTransmission(t));
    }
    Ok((1.0 - t) / t)
}

pub fn t_from_lambda(lambda: f64) -> Result<f64, DmpkError> {
    check_lambda(lambda)?;
    Ok(1.0 / (1.0 + lambda))
}

pub fn x_from_lambda(lambda: f64) -> Result<f64, DmpkError> {
    check_lambda(lambda)?;
    Ok(lambda.sqrt().asinh())
}

pub fn lambda_from_x(x: f64) -> Result<f64, DmpkError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(DmpkError::BadX(x));
    }
    Ok(x.sinh().powi(2))
}

fn check_lambda(lambda: f64) -> Result<(), DmpkError> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(DmpkError::BadLambda(lambda));
    }
    Ok(())
}

/// Exact map between any two of `T`, `λ`, `x`.
pub fn convert(value: f64, from: Coordinate, to: Coordinate) -> Result<f64, DmpkError> {
    let lambda = match from {
        Coordinate::T => lambda_from_t(value)?,
        Coordinate::Lambda => {
            check_lambda(value)?;
            value
        }
        Coordinate::X => lambda_from_x(value)?,
    };
    match to {
        Coordinate::T => t_from_lambda(lambda),
        Coordinate::Lambda => Ok(lambda),
        Coordinate::X => x_from_lambda(lambda),
    }
}

/// Transmission eigenvalues of one wire, as `λ_i ≥ 0` in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DMPKState {
    pub n: usize,
    pub beta: Beta,
    pub s: f64,
    pub lambdas: Vec<f64>,
}

impl DMPKState {
    pub fn new(beta: Beta, s: f64, mut lambdas: Vec<f64>) -> Result<Self, DmpkError> {
        for &l in &lambdas {
            check_lambda(l)?;
        }
        lambdas.sort_by(f64::total_cmp);
        Ok(DMPKState {
            n: lambdas.len(),
            beta,
            s,
            lambdas,
        })
    }

    pub fn gamma(&self) -> f64 {
        gamma(self.beta, self.n)
    }

    pub fn transmissions(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| 1.0 / (1.0 + l)).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.sqrt().asinh()).collect()
    }
}

/// `G/G₀ = Σ T_n`.
pub fn conductance(state: &DMPKState) -> f64 {
    state.lambdas.iter().map(|l| 1.0 / (1.0 + l)).sum()
}

/// Central-difference residual of the conical Legendre equation
/// `P'' + coth ξ P' + (τ² + ¼) P = 0` at step `h`.
pub fn conical_ode_residual(tau: f64, xi: f64, h: f64) -> Result<f64, DmpkError> {
    if !(h > 0.0) || h >= xi {
        return Err(DmpkError::Grid(format!("step {h} must lie in (0, xi)")));
    }
    let p0 = conical_legendre(tau, xi)?;
    let pp = conical_legendre(tau, xi + h)?;
    let pm = conical_legendre(tau, xi - h)?;
    let d2 = (pp - 2.0 * p0 + pm) / (h * h);
    let d1 = (pp - pm) / (2.0 * h);
    Ok((d2 + d1 / xi.tanh() + (tau * tau + 0.25) * p0).abs())
}

/// Fitted convergence order of [`conical_ode_residual`] over the steps `hs`.
pub fn conical_ode_order(tau: f64, xi: f64, hs: &[f64]) -> Result<f64, DmpkError> {
    let r: Result<Vec<f64>, DmpkError> = hs.iter().map(|&h| conical_ode_residual(tau, xi, h)).collect();
    Ok(loglog_slope(hs, &r?))
}

/// Truncation and quadrature settings of the exact density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// `k_max = k_max_factor · √(N/s)`.
    pub k_max_factor: f64,
    /// Composite Gauss nodes on `[0, k_max]` (multiple of 16).
    pub k_nodes: usize,
    /// Upper end of each `x` axis for moments; `None` picks the point where
    /// the density along the diagonal ray falls into round-off, at most `s + 8`.
    pub x_max: Option<f64>,
    /// Gauss nodes per `x` axis for moments; `None` picks 192, 192, 64, 32
    /// for `N = 1..4`.
    pub x_nodes: Option<usize>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            k_max_factor: 12.0,
            k_nodes: 400,
            x_max: None,
            x_nodes: None,
        }
    }
}

/// Unnormalized β = 2 density of `x_1 < … < x_N` at length `s`:
///
/// `∏_{i<j}(sinh²x_j − sinh²x_i) ∏_k sinh 2x_k · det[F_m(x_n)]`,
/// `F_m(x) = ∫₀^∞ e^{−k²s/4N} tanh(πk/2) k^{2m−1} P_{−½+ik/2}(cosh 2x) dk`,
/// with `m, n = 1..N`. An overall sign fixed where the density peaks makes
/// the value positive.
#[derive(Debug, Clone)]
pub struct ExactDensity {
    n: usize,
    s: f64,
    opts: ExactOptions,
    k: Vec<f64>,
    /// `weights[m][j]`: quadrature weight times the `k`-dependent factors.
    weights: Vec<Vec<f64>>,
    sign: f64,
    cutoff: f64,
    /// Smallest `|P|/max|P|` seen on the ray before round-off took over.
    floor: f64,
}

/// Normalization and conductance moments of the exact density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    /// `∫ P` over the ordered chamber (the inverse of `C(s)`).
    pub norm: f64,
    pub mean_g: f64,
    pub var_g: f64,
}

impl ExactDensity {
    pub fn new(n: usize, s: f64, opts: ExactOptions) -> Result<Self, DmpkError> {
        if n == 0 || n > 4 {
            return Err(DmpkError::Channels(n));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(DmpkError::BadLength(s));
        }
        let k_max = opts.k_max_factor * (n as f64 / s).sqrt();
        let panels = (opts.k_nodes / 16).max(1);
        let (k, w) = GaussRule::new(16).composite(0.0, k_max, panels);
        let weights = (1..=n)
            .map(|m| {
                k.iter()
                    .zip(&w)
                    .map(|(&k, &w)| {
                        w * (-k * k * s / (4.0 * n as f64)).exp() * (PI * k / 2.0).tanh() * k.powi(2 * m as i32 - 1)
                    })
                    .collect()
            })
            .collect();
        let mut d = ExactDensity {
            n,
            s,
            opts,
            k,
            weights,
            sign: 1.0,
            cutoff: 0.0,
            floor: 1.0,
        };
        let (sign, cutoff, floor) = d.scan()?;
        d.sign = sign;
        d.cutoff = cutoff;
        d.floor = floor;
        if d.opts.x_max.is_none() {
            d.opts.x_max = Some(cutoff);
        }
        Ok(d)
    }

    /// Largest coordinate up to which the diagonal-ray scan found the
    /// density above round-off.
    pub fn resolved_extent(&self) -> f64 {
        self.cutoff
    }

    /// Walks the ray `x_i = t·i/N` outwards. The sign is taken at the peak of
    /// `|P|`; the cutoff is where `|P|` falls below `1e−13` of the peak, or
    /// where it stops decreasing or changes sign. Past that point the
    /// determinant is cancellation noise amplified by the `sinh` prefactors.
    fn scan(&self) -> Result<(f64, f64, f64), DmpkError> {
        let n = self.n;
        let t_end = self.s + 8.0;
        let steps = 240;
        let mut vals = Vec::with_capacity(steps);
        for j in 1..=steps {
            let t = t_end * j as f64 / steps as f64;
            let x: Vec<f64> = (1..=n).map(|i| t * i as f64 / n as f64).collect();
            let cols: Vec<Vec<f64>> = x.iter().map(|&v| self.columns(v)).collect::<Result<_, _>>()?;
            vals.push((t, self.raw(&x, &cols)));
        }
        let (peak, &(_, top)) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))
            .expect("non-empty scan");
        let mut cutoff = t_end;
        let mut floor = 1.0f64;
        for w in vals[peak..].windows(2) {
            let (t, v) = w[1];
            if v.abs() < 1e-13 * top.abs() || v.signum() != top.signum() || v.abs() > w[0].1.abs() {
                cutoff = t;
                break;
            }
            floor = floor.min(v.abs() / top.abs());
        }
        Ok((top.signum(), cutoff, floor))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn options(&self) -> ExactOptions {
        self.opts
    }

    pub fn k_max(&self) -> f64 {
        self.k.last().copied().unwrap_or(0.0)
    }

    /// `(F_1(x), …, F_N(x))`.
    pub fn columns(&self, x: f64) -> Result<Vec<f64>, DmpkError> {
        let mq = MehlerQuadrature::new(2.0 * x, 0.5 * self.k_max())?;
        let p: Vec<f64> = self.k.iter().map(|k| mq.conical(0.5 * k)).collect();
        Ok(self
            .weights
            .iter()
            .map(|w| w.iter().zip(&p).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Signed density from precomputed columns; symmetric in the `x_i`.
    fn raw(&self, x: &[f64], cols: &[Vec<f64>]) -> f64 {
        let n = self.n;
        let sh: Vec<f64> = x.iter().map(|v| v.sinh().powi(2)).collect();
        let mut log_pref = 0.0;
        let mut sign = 1.0;
        for i in 0..n {
            log_pref += (2.0 * x[i]).sinh().abs().ln();
            for j in (i + 1)..n {
                let d = sh[j] - sh[i];
                if d == 0.0 {
                    return 0.0;
                }
                sign *= d.signum();
                log_pref += d.abs().ln();
            }
        }
        let m = DMatrix::from_fn(n, n, |r, c| cols[c][r]);
        sign * log_pref.exp() * m.determinant()
    }

    /// Unnormalized density at an ordered point `0 < x_1 < … < x_N`.
    pub fn density(&self, x: &[f64]) -> Result<f64, DmpkError> {
        if x.len() != self.n
            || !(x[0] > 0.0)
            || x.windows(2).any(|w| !(w[1] > w[0]))
            || x.iter().any(|v| !v.is_finite())
        {
            return Err(DmpkError::Chamber(x.to_vec()));
        }
        let cols: Vec<Vec<f64>> = x.iter().map(|&v| self.columns(v)).collect::<Result<_, _>>()?;
        Ok(self.sign * self.raw(x, &cols))
    }

    /// Tensor-product quadrature over `[0, x_max]^N`; the integrand is
    /// symmetric, so the cube integral is `N!` times the chamber integral.
    pub fn moments(&self) -> Result<ExactMoments, DmpkError> {
        let n = self.n;
        // Past the resolved tail the cube integral would pick up noise.
        if self.floor > 1e-6 {
            return Err(DmpkError::Unresolved {
                n,
                s: self.s,
                floor: self.floor,
            });
        }
        let x_max = self.opts.x_max.expect("set by the constructor");
        let nodes = self.opts.x_nodes.unwrap_or([192, 192, 64, 32][n - 1]);
        let (xs, ws) = GaussRule::new(16).composite(0.0, x_max, (nodes / 16).max(1));
        let cols: Vec<Vec<f64>> = xs.iter().map(|&x| self.columns(x)).collect::<Result<_, _>>()?;
        let g1: Vec<f64> = xs.iter().map(|x| 1.0 / x.cosh().powi(2)).collect();
        let m = xs.len();
        let total = m.pow(n as u32);
        let outer = m.pow(n as u32 - 1);
        // Reduce in a fixed order: parallel over the first index, then sum.
        let partial: Vec<[f64; 3]> = (0..m)
            .into_par_iter()
            .map(|first| {
                let mut acc = [0.0; 3];
                let mut pts = vec![0.0; n];
                let mut cs: Vec<Vec<f64>> = vec![Vec::new(); n];
                for rest in 0..outer {
                    let mut flat = first * outer + rest;
                    let mut w = 1.0;
                    let mut g = 0.0;
                    for d in (0..n).rev() {
                        let i = flat % m;
                        flat /= m;
                        pts[d] = xs[i];
                        cs[d] = cols[i].clone();
                        w *= ws[i];
                        g += g1[i];
                    }
                    let p = self.sign * self.raw(&pts, &cs) * w;
                    acc[0] += p;
                    acc[1] += p * g;
                    acc[2] += p * g * g;
                }
                acc
            })
            .collect();
        debug_assert_eq!(partial.len() * outer, total);
        let mut sum = [0.0; 3];
        for p in &partial {
            for k in 0..3 {
                sum[k] += p[k];
            }
        }
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let mean = sum[1] / sum[0];
        Ok(ExactMoments {
            norm: sum[0] / fact,
            mean_g: mean,
            var_g: sum[2] / sum[0] - mean * mean,
        })
    }
}

/// Unnormalized exact β = 2 density with default options.
pub fn exact_beta2_density(n: usize, s: f64, x: &[f64]) -> Result<f64, DmpkError> {
    ExactDensity::new(n, s, ExactOptions::default())?.density(x)
}

/// Monte Carlo ensemble of wires at one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmpkEnsemble {
    pub n: usize,
    pub beta: Beta,
    pub s: f64,
    pub states: Vec<DMPKState>,
}

/// Mean, standard error and variance of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub stderr: f64,
    pub var: f64,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SampleStats {
            mean,
            stderr: (var / n).sqrt(),
            var,
        }
    }
}

impl DmpkEnsemble {
    pub fn conductances(&self) -> Vec<f64> {
        self.states.iter().map(conductance).collect()
    }

    pub fn conductance_stats(&self) -> SampleStats {
        SampleStats::of(&self.conductances())
    }
}

/// Step control of the stochastic oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeOptions {
    /// Largest step; at most `1e−3 · s_final`.
    pub dt: f64,
    /// Initial condition `λ_i = i ε`.
    pub epsilon: f64,
    /// Step cap `wall_factor · γ · g²`, `g` the distance to the nearest wall.
    pub wall_factor: f64,
    /// The wall cap never drops below `min_step_fraction · min(dt, s)`.
    /// Near-contacts of a pair are scale invariant, so without a floor the
    /// step count per unit length has no bound; tying it to `s` keeps the
    /// start from the near-ballistic point resolved.
    pub min_step_fraction: f64,
    pub max_halvings: u32,
}

impl SdeOptions {
    pub fn with_dt(dt: f64) -> Self {
        SdeOptions {
            dt,
            epsilon: 1e-8,
            wall_factor: 0.05,
            min_step_fraction: 1e-4,
            max_halvings: 20,
        }
    }
}

fn sde_drift(x: &[f64], beta: f64, gamma: f64, out: &mut [f64]) {
    let sh: Vec<f64> = x.iter().map(|v| v.sinh().powi(2)).collect();
    for i in 0..x.len() {
        let pair: f64 = (0..x.len()).filter(|&j| j != i).map(|j| 1.0 / (sh[i] - sh[j])).sum();
        let s2 = (2.0 * x[i]).sinh();
        out[i] = (s2.recip() * (2.0 * x[i]).cosh() + 0.5 * beta * s2 * pair) / gamma;
    }
}

struct Walker<'a> {
    beta: f64,
    gamma: f64,
    opts: &'a SdeOptions,
    id: u64,
    drift: Vec<f64>,
}

impl Walker<'_> {
    /// One Euler step reflected at `x = 0`; `None` if it breaks the order.
    fn euler(&mut self, x: &[f64], h: f64, dw: &[f64]) -> Option<Vec<f64>> {
        sde_drift(x, self.beta, self.gamma, &mut self.drift);
        let noise = self.gamma.sqrt().recip();
        let y: Vec<f64> = x
            .iter()
            .zip(&self.drift)
            .zip(dw)
            .map(|((xi, a), w)| (xi + a * h + noise * w).abs())
            .collect();
        let ok = y.iter().all(|v| v.is_finite()) && y[0] > 0.0 && y.windows(2).all(|w| w[1] > w[0]);
        ok.then_some(y)
    }

    fn advance<R: Rng>(
        &mut self,
        x: &mut Vec<f64>,
        h: f64,
        dw: &[f64],
        depth: u32,
        s: f64,
        rng: &mut R,
    ) -> Result<(), DmpkError> {
        if let Some(y) = self.euler(x, h, dw) {
            *x = y;
            return Ok(());
        }
        if depth >= self.opts.max_halvings {
            return Err(DmpkError::Collision {
                walker: self.id,
                s,
                halvings: depth,
            });
        }
        // Brownian bridge: W(h/2) given W(h) = dw.
        let sd = (0.25 * h).sqrt();
        let mid: Vec<f64> = dw
            .iter()
            .map(|w| {
                let z: f64 = StandardNormal.sample(rng);
                0.5 * w + sd * z
            })
            .collect();
        let rest: Vec<f64> = dw.iter().zip(&mid).map(|(a, b)| a - b).collect();
        self.advance(x, 0.5 * h, &mid, depth + 1, s, rng)?;
        self.advance(x, 0.5 * h, &rest, depth + 1, s + 0.5 * h, rng)
    }
}

/// Integrates walkers from the ballistic point and records the ensemble at
/// each length in `s_grid` (strictly increasing, positive).
pub fn mc_dmpk_path(
    n: usize,
    beta: Beta,
    s_grid: &[f64],
    n_walkers: usize,
    opts: SdeOptions,
    seed: u64,
) -> Result<Vec<DmpkEnsemble>, DmpkError> {
    if n == 0 {
        return Err(DmpkError::Channels(n));
    }
    if s_grid.is_empty() || !(s_grid[0] > 0.0) || s_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DmpkError::Grid("lengths must be positive and increasing".into()));
    }
    let s_final = *s_grid.last().expect("non-empty");
    if !(opts.dt > 0.0) || opts.dt > 1e-3 * s_final * (1.0 + 1e-12) {
        return Err(DmpkError::BadStep {
            dt: opts.dt,
            max: 1e-3 * s_final,
        });
    }
    let g = gamma(beta, n);
    let b = beta.as_f64();
    let paths: Vec<Result<Vec<Vec<f64>>, DmpkError>> = par_draws(n_walkers, |id| {
        let mut rng = draw_rng(seed, id);
        let mut w = Walker {
            beta: b,
            gamma: g,
            opts: &opts,
            id,
            drift: vec![0.0; n],
        };
        let mut x: Vec<f64> = (1..=n).map(|i| (i as f64 * opts.epsilon).sqrt().asinh()).collect();
        let mut s = 0.0;
        let mut out = Vec::with_capacity(s_grid.len());
        let mut dw = vec![0.0; n];
        for &target in s_grid {
            while s < target {
                let wall = x.windows(2).map(|p| p[1] - p[0]).fold(x[0], f64::min);
                let h = (opts.wall_factor * g * wall * wall)
                    .max(opts.min_step_fraction * opts.dt.min(s))
                    .min(opts.dt)
                    .min(target - s);
                let sq = h.sqrt();
                for v in dw.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v = sq * z;
                }
                w.advance(&mut x, h, &dw, 0, s, &mut rng)?;
                s = if target - s - h < 1e-15 * target { target } else { s + h };
            }
            out.push(x.clone());
        }
        Ok(out)
    });
    let paths: Vec<Vec<Vec<f64>>> = paths.into_iter().collect::<Result<_, _>>()?;
    s_grid
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let states = paths
                .iter()
                .map(|p| DMPKState::new(beta, s, p[k].iter().map(|x| x.sinh().powi(2)).collect()))
                .collect::<Result<_, _>>()?;
            Ok(DmpkEnsemble { n, beta, s, states })
        })
        .collect()
}

/// Ensemble at `s_final` from the stochastic oracle with step `dt`.
pub fn mc_dmpk_evolve(
    n: usize,
    beta: Beta,
    s_final: f64,
    n_walkers: usize,
    dt: f64,
    seed: u64,
) -> Result<DmpkEnsemble, DmpkError> {
    if !(s_final > 0.0) {
        return Err(DmpkError::BadLength(s_final));
    }
    Ok(
        mc_dmpk_path(n, beta, &[s_final], n_walkers, SdeOptions::with_dt(dt), seed)?
            .pop()
            .expect("one length requested"),
    )
}

/// `λ` from `Q = ¼(M†M + (M†M)⁻¹ − 2)`, evaluated eigenvalue-wise on `M†M`
/// so no inverse is formed. Each `λ` appears twice (`μ` and `1/μ`); pairs
/// are merged.
pub fn transfer_lambdas(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mm = m.adjoint() * m;
    let mut q: Vec<f64> = SymmetricEigen::new(mm)
        .eigenvalues
        .iter()
        .map(|&mu| (0.25 * (mu + 1.0 / mu - 2.0)).max(0.0))
        .collect();
    q.sort_by(f64::total_cmp);
    q.chunks(2).map(|p| 0.5 * (p[0] + p[p.len() - 1])).collect()
}

/// Largest singular value over the smallest.
pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Newton–Schulz step toward the flux-conserving group:
/// `M ← M (3 − Σ M†Σ M)/2`, quadratically convergent near the group.
pub fn reproject_flux(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows() / 2;
    let sigma = crate::ensembles::sigma_z(n);
    let k = &sigma * m.adjoint() * &sigma * m;
    let three = DMatrix::<Complex64>::identity(2 * n, 2 * n) * Complex64::new(3.0, 0.0);
    m * (three - k) * Complex64::new(0.5, 0.0)
}

/// Slices between flux re-projections.
pub const REPROJECT_EVERY: usize = 32;
/// Largest tolerated condition number of an accumulated product.
pub const MAX_CONDITION: f64 = 1e14;

/// Products of `β = 2` slices of thickness `delta_s`, recorded after each
/// slice count in `checkpoints` (non-decreasing).
pub fn mc_transfer_path(
    n: usize,
    delta_s: f64,
    checkpoints: &[usize],
    n_wires: usize,
    seed: u64,
) -> Result<Vec<DmpkEnsemble>, DmpkError> {
    if n == 0 {
        return Err(DmpkError::Channels(n));
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(DmpkError::Grid("checkpoints must be non-decreasing".into()));
    }
    let wires: Vec<Result<Vec<Vec<f64>>, DmpkError>> = par_draws(n_wires, |id| {
        let mut rng = draw_rng(seed, id);
        let mut m = DMatrix::<Complex64>::identity(2 * n, 2 * n);
        let mut done = 0usize;
        let mut out = Vec::with_capacity(checkpoints.len());
        for &stop in checkpoints {
            while done < stop {
                m = transfer_slice(n, delta_s, &mut rng)? * m;
                done += 1;
                if done.is_multiple_of(REPROJECT_EVERY) {
                    m = reproject_flux(&m);
                    let c = condition_number(&m);
                    if !(c <= MAX_CONDITION) {
                        return Err(DmpkError::Conditioning(c));
                    }
                }
            }
            out.push(if stop == 0 { vec![0.0; n] } else { transfer_lambdas(&m) });
        }
        Ok(out)
    });
    let wires: Vec<Vec<Vec<f64>>> = wires.into_iter().collect::<Result<_, _>>()?;
    checkpoints
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let s = c as f64 * delta_s;
            let states = wires
                .iter()
                .map(|w| DMPKState::new(Beta::Two, s, w[k].clone()))
                .collect::<Result<_, _>>()?;
            Ok(DmpkEnsemble {
                n,
                beta: Beta::Two,
                s,
                states,
            })
        })
        .collect()
}

/// Ensemble after `n_slices` slices of thickness `delta_s`.
pub fn mc_transfer_product(
    n: usize,
    n_slices: usize,
    delta_s: f64,
    n_wires: usize,
    seed: u64,
) -> Result<DmpkEnsemble, DmpkError> {
    Ok(mc_transfer_path(n, delta_s, &[n_slices], n_wires, seed)?
        .pop()
        .expect("one checkpoint requested"))
}

/// `C_N` radial geometry with `(m_o, m_l) = (β, 1)` at negative curvature,
/// whose Jacobian is `J_x`. Its chamber is `x_1 > x_2 > … > x_N > 0`.
pub fn dmpk_geometry(beta: Beta, n: usize) -> Result<RadialGeometry, DmpkError> {
    let m = Multiplicities::new(beta.value(), 1, 0);
    let roots = build_root_system(Family::C, n, m).map_err(CartanError::from)?;
    Ok(RadialGeometry::new(roots, Curvature::Negative, 1.0)?)
}

/// Gradient and diagonal second derivatives of `ln J_x`.
pub fn log_jacobian_derivatives(beta: Beta, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let b = beta.as_f64();
    let sh: Vec<f64> = x.iter().map(|v| v.sinh().powi(2)).collect();
    let mut grad = Vec::with_capacity(x.len());
    let mut second = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let (s2, c2) = ((2.0 * x[i]).sinh(), (2.0 * x[i]).cosh());
        let mut g = 2.0 * c2 / s2;
        let mut h = -4.0 / (s2 * s2);
        for j in 0..x.len() {
            if j == i {
                continue;
            }
            let d = sh[i] - sh[j];
            g += b * s2 / d;
            h += b * (2.0 * c2 * d - s2 * s2) / (d * d);
        }
        grad.push(g);
        second.push(h);
    }
    (grad, second)
}

/// `U(x) = −(1/2γ) (W + Σ sinh⁻² 2x_i)`, constant in `x` only at `β = 2`.
pub fn decoupling_potential(beta: Beta, x: &[f64]) -> f64 {
    let (g, h) = log_jacobian_derivatives(beta, x);
    let w: f64 = g.iter().zip(&h).map(|(g, h)| 0.5 * h + 0.25 * g * g).sum();
    let free: f64 = x.iter().map(|v| (2.0 * v).sinh().powi(-2)).sum();
    -(w + free) / (2.0 * gamma(beta, x.len()))
}

/// Closed form of the constant at `β = 2`.
pub fn decoupling_constant_beta2(n: usize) -> f64 {
    let nf = n as f64;
    -nf * (4.0 * nf * nf - 1.0) / (6.0 * gamma(Beta::Two, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub beta: Beta,
    pub n: usize,
    pub h: f64,
    /// Largest residual over the test functions, relative to `max|Ψ|`.
    pub residual: f64,
    pub u_mean: f64,
    /// Standard deviation of `U(x)` over the grid divided by `|mean|`.
    pub u_rel_std: f64,
    /// `max U − min U` over the grid.
    pub u_spread: f64,
}

type TestFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

/// Smooth test functions centred in the grid box: a Gaussian, a compact
/// bump and a modulated Gaussian.
fn test_functions(lo: &[f64], hi: &[f64]) -> Vec<TestFn> {
    let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let r: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let (c1, c2, c3) = (c.clone(), c.clone(), c);
    let (r1, r2) = (r.clone(), r);
    vec![
        Box::new(move |x: &[f64]| x.iter().zip(&c1).map(|(x, c)| -(x - c).powi(2)).sum::<f64>().exp()),
        Box::new(move |x: &[f64]| {
            x.iter()
                .zip(&c2)
                .zip(&r1)
                .map(|((x, c), r)| {
                    let t = (x - c) / (0.9 * r);
                    if t.abs() < 1.0 {
                        (1.0 - 1.0 / (1.0 - t * t)).exp()
                    } else {
                        0.0
                    }
                })
                .product()
        }),
        Box::new(move |x: &[f64]| {
            x.iter()
                .zip(&c3)
                .zip(&r2)
                .map(|((x, c), r)| (3.0 * (x - c) / r).cos() * (-(x - c).powi(2)).exp())
                .product()
        }),
    ]
}

/// Compares `(1/2γ) J^{1/2} Δ_B J^{−1/2} Ψ` with `(−H₀ + U) Ψ` on the grid
/// for three test functions. The grid box must lie in the chamber
/// `x_1 > … > x_N > 0`.
pub fn schrodinger_decoupled_check(beta: Beta, grid: &RadialGrid) -> Result<DecouplingReport, DmpkError> {
    let n = grid.ndim();
    let geom = dmpk_geometry(beta, n)?;
    let inner = grid.shrink()?;
    let pot: Vec<f64> = (0..inner.len())
        .map(|k| decoupling_potential(beta, &inner.point(k)))
        .collect();
    let u_mean = pot.iter().sum::<f64>() / pot.len() as f64;
    let u_std = (pot.iter().map(|u| (u - u_mean).powi(2)).sum::<f64>() / pot.len() as f64).sqrt();
    let u_spread =
        pot.iter().copied().fold(f64::NEG_INFINITY, f64::max) - pot.iter().copied().fold(f64::INFINITY, f64::min);
    let g2 = 1.0 / (2.0 * gamma(beta, n));
    let lo = grid.lo().to_vec();
    let hi: Vec<f64> = (0..n)
        .map(|i| lo[i] + (grid.shape()[i] - 1) as f64 * grid.spacing()[i])
        .collect();
    let mut residual: f64 = 0.0;
    for f in test_functions(&lo, &hi) {
        let psi = RadialGridFunction::from_fn(grid.clone(), |x| f(x));
        let scaled = RadialGridFunction::from_fn(grid.clone(), |x| {
            f(x) * (-0.5 * geom.log_jacobian(x).unwrap_or(f64::NAN)).exp()
        });
        let lb = radial_laplace_beltrami(&geom, &scaled)?;
        let lap = flat_laplacian(&psi)?;
        let psi_in = psi.interior()?;
        let scale = psi.max_abs();
        for k in 0..inner.len() {
            let x = inner.point(k);
            let lhs = g2 * (0.5 * geom.log_jacobian(&x)?).exp() * lb.values[k];
            let free: f64 = x.iter().map(|v| (2.0 * v).sinh().powi(-2)).sum();
            let rhs = g2 * (lap.values[k] + free * psi_in.values[k]) + u_mean * psi_in.values[k];
            residual = residual.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(DecouplingReport {
        beta,
        n,
        h: grid.spacing()[0],
        residual,
        u_mean,
        u_rel_std: u_std / u_mean.abs(),
        u_spread,
    })
}
