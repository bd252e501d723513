//! Unfolding and spectral statistics: spacing histograms, number variance,
//! spectral rigidity and the β = 2 Hermite-kernel correlators.
//!
//! Window statistics slide windows of length `L` over the interior of each
//! unfolded spectrum, with starts on a grid of step `min(L, 1)/4`. Standard
//! errors come from independent units: whole spectra when the batch has at
//! least [`MIN_UNITS`] members, otherwise contiguous blocks of window starts.
//!
//! # Rigidity from number variance
//!
//! For a stationary unit-density process the least-squares residual of the
//! staircase over a window depends only on the counting variance:
//!
//! `Δ₃(L) = (2/L⁴) ∫₀^L (L³ − 2L²r + r³) Σ²(r) dr`.
//!
//! It follows by writing the fitted intercept and slope as linear functionals
//! of the staircase, expanding the mean squared residual into double
//! integrals of the staircase covariance `Cov(η(y), η(y′))`, and using
//! `2 Cov(η(y), η(y′)) = Σ²(y) + Σ²(y′) − Σ²(|y − y′|)`; the kernels of the
//! single integrals cancel and the remaining double integral collapses to the
//! weight above. With `Σ²(r) = r` (no correlations) it gives `L/15`.

use crate::ensembles::{Beta, Spectrum};
use crate::quad::GaussRule;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("need at least {need} levels, got {got}")]
    TooFewLevels { need: usize, got: usize },
    #[error("polynomial degree {0} outside 1..=15")]
    BadDegree(usize),
    #[error("fitted staircase of degree {degree} is not increasing near E = {at}; refit at a lower degree")]
    NonMonotone { degree: usize, at: f64 },
    #[error("empty batch")]
    EmptyBatch,
    #[error("window length {l} exceeds a quarter of the unfolded span {span}")]
    WindowTooLong { l: f64, span: f64 },
    #[error("unsupported beta {0}")]
    UnsupportedBeta(u32),
    #[error("size {0} outside the supported range 1..=200")]
    OutOfRange(usize),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("estimator failed: {0}")]
    Estimator(String),
}

/// Minimum number of independent units behind a standard error.
pub const MIN_UNITS: usize = 20;
/// Fraction of levels dropped from each edge before statistics.
pub const EDGE_TRIM: f64 = 0.05;
/// Default polynomial degree for Gaussian-ensemble staircases.
pub const DEFAULT_DEGREE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum UnfoldMethod {
    PolynomialStaircase {
        degree: usize,
    },
    LocalMeanSpacing {
        window: usize,
    },
    /// `x = density · E` for spectra of known uniform density, e.g. circular
    /// eigenphases with `density = N/2π`.
    Uniform {
        density: f64,
    },
    /// `x = N F(E)` with `F` the semicircle distribution of radius `2v`.
    Semicircle {
        n: usize,
        v: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSpectrum {
    pub levels: Vec<f64>,
    pub method: UnfoldMethod,
}

fn trim_count(n: usize) -> usize {
    (EDGE_TRIM * n as f64).floor() as usize
}

impl UnfoldedSpectrum {
    /// Levels with [`EDGE_TRIM`] of the levels removed at each end.
    pub fn interior(&self) -> &[f64] {
        let k = trim_count(self.levels.len());
        &self.levels[k..self.levels.len() - k]
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.interior().windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn interior_mean_spacing(&self) -> f64 {
        let x = self.interior();
        if x.len() < 2 {
            return f64::NAN;
        }
        (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64
    }
}

/// Chebyshev polynomials `T_0..=T_d` at `t`.
fn chebyshev(t: f64, d: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if d >= 1 {
        out[1] = t;
    }
    for k in 2..=d {
        out[k] = 2.0 * t * out[k - 1] - out[k - 2];
    }
}

/// Least-squares fit of the staircase points `(E_i, i + ½)` in a Chebyshev
/// basis over the data range.
struct StaircaseFit {
    mid: f64,
    half: f64,
    coef: Vec<f64>,
}

impl StaircaseFit {
    fn new(levels: &[f64], degree: usize) -> Self {
        let (lo, hi) = (levels[0], levels[levels.len() - 1]);
        let mid = 0.5 * (lo + hi);
        let half = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
        let n = levels.len();
        let mut a = DMatrix::<f64>::zeros(n, degree + 1);
        let mut row = vec![0.0; degree + 1];
        for (i, e) in levels.iter().enumerate() {
            chebyshev((e - mid) / half, degree, &mut row);
            for k in 0..=degree {
                a[(i, k)] = row[k];
            }
        }
        let b = DVector::from_fn(n, |i, _| i as f64 + 0.5);
        let coef = a
            .svd(true, true)
            .solve(&b, 1e-13)
            .expect("SVD computed with both factors")
            .iter()
            .copied()
            .collect();
        StaircaseFit { mid, half, coef }
    }

    fn eval(&self, e: f64) -> f64 {
        let d = self.coef.len() - 1;
        let mut row = vec![0.0; d + 1];
        chebyshev((e - self.mid) / self.half, d, &mut row);
        row.iter().zip(&self.coef).map(|(r, c)| r * c).sum()
    }
}

/// Semicircle distribution function of radius `2v`.
pub fn semicircle_cdf(e: f64, v: f64) -> f64 {
    let t = (e / (2.0 * v)).clamp(-1.0, 1.0);
    0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / PI
}

/// Semicircle level density `N/(2πv²) √(4v² − E²)`.
pub fn semicircle_density(e: f64, n: usize, v: f64) -> f64 {
    let r2 = 4.0 * v * v - e * e;
    if r2 <= 0.0 {
        0.0
    } else {
        n as f64 / (2.0 * PI * v * v) * r2.sqrt()
    }
}

/// Maps raw levels to unit mean spacing.
pub fn unfold(raw: &Spectrum, method: UnfoldMethod) -> Result<UnfoldedSpectrum, SpectraError> {
    let e = &raw.levels;
    let levels = match method {
        UnfoldMethod::PolynomialStaircase { degree } => {
            if !(1..=15).contains(&degree) {
                return Err(SpectraError::BadDegree(degree));
            }
            if e.len() < 50 {
                return Err(SpectraError::TooFewLevels { need: 50, got: e.len() });
            }
            let fit = StaircaseFit::new(e, degree);
            // Dense check between and across the levels.
            let dense = 8 * e.len();
            let (lo, hi) = (e[0], e[e.len() - 1]);
            let mut prev = fit.eval(lo);
            for k in 1..=dense {
                let x = lo + (hi - lo) * k as f64 / dense as f64;
                let y = fit.eval(x);
                if !(y > prev) {
                    return Err(SpectraError::NonMonotone { degree, at: x });
                }
                prev = y;
            }
            let xs: Vec<f64> = e.iter().map(|&x| fit.eval(x)).collect();
            if let Some(w) = xs.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(SpectraError::NonMonotone { degree, at: e[w + 1] });
            }
            xs
        }
        UnfoldMethod::LocalMeanSpacing { window } => {
            let n = e.len();
            if window < 2 || n <= window {
                return Err(SpectraError::TooFewLevels {
                    need: window.max(2) + 1,
                    got: n,
                });
            }
            let local = |i: usize| {
                let lo = i.saturating_sub(window / 2).min(n - 1 - window);
                (e[lo + window] - e[lo]) / window as f64
            };
            let mut xs = Vec::with_capacity(n);
            xs.push(0.0);
            let mut d_prev = local(0);
            for i in 0..n - 1 {
                let d_next = local(i + 1);
                let x = xs[i] + (e[i + 1] - e[i]) / (0.5 * (d_prev + d_next));
                xs.push(x);
                d_prev = d_next;
            }
            xs
        }
        UnfoldMethod::Uniform { density } => e.iter().map(|x| x * density).collect(),
        UnfoldMethod::Semicircle { n, v } => e.iter().map(|&x| n as f64 * semicircle_cdf(x, v)).collect(),
    };
    Ok(UnfoldedSpectrum { levels, method })
}

/// Polynomial unfolding that lowers the degree until the fitted staircase is
/// monotone.
pub fn unfold_with_fallback(raw: &Spectrum, degree: usize) -> Result<UnfoldedSpectrum, SpectraError> {
    let mut d = degree;
    loop {
        match unfold(raw, UnfoldMethod::PolynomialStaircase { degree: d }) {
            Err(SpectraError::NonMonotone { .. }) if d > 1 => d -= 1,
            other => return other,
        }
    }
}

/// `z_i = λ_i ρ₁(0)`: rescaling by the mean level density at the origin.
pub fn microscopic_rescale(raw: &Spectrum, rho0: f64) -> Vec<f64> {
    raw.levels.iter().map(|x| x * rho0).collect()
}

/// Abscissa, values and Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableCurve {
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl ObservableCurve {
    pub fn new(abscissa: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self, SpectraError> {
        if abscissa.len() != values.len() || values.len() != stderr.len() {
            return Err(SpectraError::BadGrid("length mismatch".into()));
        }
        check_grid(&abscissa)?;
        if stderr.iter().any(|e| !(*e >= 0.0)) {
            return Err(SpectraError::BadGrid("negative or NaN stderr".into()));
        }
        Ok(ObservableCurve {
            abscissa,
            values,
            stderr,
        })
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }
}

fn check_grid(g: &[f64]) -> Result<(), SpectraError> {
    if g.windows(2).any(|w| !(w[1] > w[0])) || g.iter().any(|x| !x.is_finite()) {
        return Err(SpectraError::BadGrid(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Wigner surmise constants `(a_β, b_β)` fixing unit norm and unit mean.
pub fn wigner_constants(beta: u32) -> Result<(f64, f64), SpectraError> {
    Beta::try_from(beta).map_err(|_| SpectraError::UnsupportedBeta(beta))?;
    let b = f64::from(beta);
    let g2 = gamma((b + 2.0) / 2.0);
    let g1 = gamma((b + 1.0) / 2.0);
    let a = 2.0 * g2.powf(b + 1.0) / g1.powf(b + 2.0);
    Ok((a, (g2 / g1).powi(2)))
}

/// `p_β(s) = a_β s^β exp(−b_β s²)`.
pub fn wigner_surmise(beta: u32, s: f64) -> Result<f64, SpectraError> {
    let (a, b) = wigner_constants(beta)?;
    Ok(if s < 0.0 {
        0.0
    } else {
        a * s.powi(beta as i32) * (-b * s * s).exp()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Binning {
    /// Width `2 IQR n^{−1/3}` from 0 to the largest sample.
    FreedmanDiaconis,
    Fixed {
        width: f64,
        max: f64,
    },
}

/// Normalized histogram; mass beyond the last edge is reported as overflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub curve: ObservableCurve,
    pub samples: usize,
    pub overflow: f64,
    pub mean: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// Density histogram of non-negative samples.
pub fn histogram(samples: &[f64], binning: Binning) -> Result<Histogram, SpectraError> {
    if samples.is_empty() {
        return Err(SpectraError::EmptyBatch);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (width, max) = match binning {
        Binning::FreedmanDiaconis => {
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            let top = sorted[n - 1];
            let w = if iqr > 0.0 {
                2.0 * iqr / (n as f64).cbrt()
            } else {
                top.max(1.0) / 10.0
            };
            let bins = (top / w).floor() as usize + 1;
            (w, bins as f64 * w)
        }
        Binning::Fixed { width, max } => {
            if !(width > 0.0) || !(max > width) {
                return Err(SpectraError::BadGrid("fixed binning needs 0 < width < max".into()));
            }
            (width, max)
        }
    };
    let bins = ((max / width).round() as usize).max(1);
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    let mut over = 0usize;
    for &s in &sorted {
        let k = (s / width).floor();
        if k >= 0.0 && (k as usize) < bins {
            counts[k as usize] += 1;
        } else {
            over += 1;
        }
    }
    let nf = n as f64;
    let centers = (0..bins).map(|k| (k as f64 + 0.5) * width).collect();
    let values = counts.iter().map(|&c| c as f64 / (nf * width)).collect();
    let stderr = counts.iter().map(|&c| (c as f64).sqrt() / (nf * width)).collect();
    Ok(Histogram {
        edges,
        curve: ObservableCurve::new(centers, values, stderr)?,
        samples: n,
        overflow: over as f64 / nf,
        mean: sorted.iter().sum::<f64>() / nf,
    })
}

/// Distances between a histogram and a reference density: `(L¹, sup)`.
///
/// The reference is averaged over each bin; the `L¹` distance includes the
/// reference mass beyond the last edge (up to `tail_end`) and the histogram
/// overflow.
pub fn histogram_distance<F: Fn(f64) -> f64>(h: &Histogram, reference: F, tail_end: f64) -> (f64, f64) {
    let rule = GaussRule::new(8);
    let mut l1 = 0.0;
    let mut sup: f64 = 0.0;
    for k in 0..h.curve.len() {
        let (a, b) = (h.edges[k], h.edges[k + 1]);
        let mean_ref = rule.integrate(a, b, 2, &reference) / (b - a);
        let d = (h.curve.values[k] - mean_ref).abs();
        l1 += d * (b - a);
        sup = sup.max(d);
    }
    let last = *h.edges.last().expect("at least one edge");
    let tail = if tail_end > last {
        rule.integrate(last, tail_end, 64, &reference)
    } else {
        0.0
    };
    (l1 + (tail - h.overflow).abs(), sup)
}

/// Interior nearest-neighbour spacings of a batch, in draw order.
pub fn pooled_spacings(batch: &[UnfoldedSpectrum]) -> Vec<f64> {
    batch.iter().flat_map(|u| u.spacings()).collect()
}

/// Normalized spacing histogram of the batch interiors.
pub fn spacing_distribution(batch: &[UnfoldedSpectrum], binning: Binning) -> Result<Histogram, SpectraError> {
    if batch.is_empty() {
        return Err(SpectraError::EmptyBatch);
    }
    histogram(&pooled_spacings(batch), binning)
}

/// Maximum-likelihood fit of `p(s) ∝ s^α exp(Σ_k c_k s^k + offset(s))` to
/// the samples inside `[lo, hi]`, `lo > 0`.
///
/// `free_terms` lists the powers `k` whose coefficients are fitted alongside
/// `α`; `offset` is a fixed log-density correction. The model is an
/// exponential family, so the log-likelihood is concave and Newton's method
/// with step halving converges. Returns `(α, stderr(α), samples used)`.
pub fn power_law_exponent<F: Fn(f64) -> f64>(
    samples: &[f64],
    lo: f64,
    hi: f64,
    free_terms: &[i32],
    offset: F,
) -> Result<(f64, f64, usize), SpectraError> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(SpectraError::BadGrid("need 0 < lo < hi".into()));
    }
    let used: Vec<f64> = samples.iter().copied().filter(|s| *s >= lo && *s <= hi).collect();
    let p = 1 + free_terms.len();
    if used.len() < 5 * p {
        return Err(SpectraError::Estimator(format!("only {} samples in range", used.len())));
    }
    let stats = |s: f64| -> Vec<f64> {
        let mut t = vec![s.ln()];
        t.extend(free_terms.iter().map(|&k| s.powi(k)));
        t
    };
    let nf = used.len() as f64;
    let mut tbar = vec![0.0; p];
    for &s in &used {
        for (a, b) in tbar.iter_mut().zip(stats(s)) {
            *a += b / nf;
        }
    }
    // Quadrature in y = ln s.
    let (ys, ws) = GaussRule::new(16).composite(lo.ln(), hi.ln(), 32);
    let nodes: Vec<(f64, f64, Vec<f64>)> = ys
        .iter()
        .zip(&ws)
        .map(|(&y, &w)| {
            let s = y.exp();
            (w * s, offset(s), stats(s))
        })
        .collect();
    // Log-likelihood per sample, mean statistics and covariance at θ.
    let moments = |theta: &[f64]| {
        let logs: Vec<f64> = nodes
            .iter()
            .map(|(w, off, t)| w.ln() + off + t.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
        let mut mean = vec![0.0; p];
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for (l, (_, _, t)) in logs.iter().zip(&nodes) {
            let q = (l - m).exp() / z;
            for i in 0..p {
                mean[i] += q * t[i];
            }
        }
        for (l, (_, _, t)) in logs.iter().zip(&nodes) {
            let q = (l - m).exp() / z;
            for i in 0..p {
                for j in 0..p {
                    cov[(i, j)] += q * (t[i] - mean[i]) * (t[j] - mean[j]);
                }
            }
        }
        let ll = theta.iter().zip(&tbar).map(|(a, b)| a * b).sum::<f64>() - (m + z.ln());
        (ll, mean, cov)
    };
    let mut theta = vec![0.0; p];
    let (mut ll, mut mean, mut cov) = moments(&theta);
    for _ in 0..200 {
        let g = DVector::from_iterator(p, tbar.iter().zip(&mean).map(|(a, b)| a - b));
        if g.amax() < 1e-12 {
            break;
        }
        let step = cov
            .clone()
            .cholesky()
            .ok_or_else(|| SpectraError::Estimator("singular Fisher information".into()))?
            .solve(&g);
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            let (l2, m2, c2) = moments(&cand);
            if l2 >= ll - 1e-15 || t < 1e-8 {
                theta = cand;
                ll = l2;
                mean = m2;
                cov = c2;
                break;
            }
            t *= 0.5;
        }
    }
    let inv = cov
        .try_inverse()
        .ok_or_else(|| SpectraError::Estimator("singular Fisher information".into()))?;
    Ok((theta[0], (inv[(0, 0)] / nf).sqrt(), used.len()))
}

/// Window starts over `[a, b − l]` with step `min(l, 1)/4`.
fn window_starts(a: f64, b: f64, l: f64) -> Vec<f64> {
    let step = l.min(1.0) / 4.0;
    let count = ((b - l - a) / step).floor() as usize + 1;
    (0..count).map(|k| a + k as f64 * step).collect()
}

fn count_in(x: &[f64], lo: f64, hi: f64) -> usize {
    x.partition_point(|v| *v < hi) - x.partition_point(|v| *v < lo)
}

/// Integrated squared residual per unit length of the best straight-line
/// fit to the staircase over `[lo, lo + l]`.
fn rigidity_window(x: &[f64], lo: f64, l: f64) -> f64 {
    let start = x.partition_point(|v| *v < lo);
    let end = x.partition_point(|v| *v < lo + l);
    let half = 0.5 * l;
    // η = j on [t_j, t_{j+1}) in the centred variable t ∈ [−L/2, L/2].
    let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
    let mut t_prev = -half;
    for (j, k) in (start..=end).enumerate() {
        let t_next = if k < end { x[k] - lo - half } else { half };
        let jf = j as f64;
        let dt = t_next - t_prev;
        i0 += jf * dt;
        i1 += jf * 0.5 * (t_next * t_next - t_prev * t_prev);
        i2 += jf * jf * dt;
        t_prev = t_next;
    }
    let res = i2 - i0 * i0 / l - 12.0 * i1 * i1 / (l * l * l);
    res.max(0.0) / l
}

enum WindowStat {
    Count,
    Rigidity,
}

/// Per-unit raw window values: unit index → values.
fn window_units(batch: &[UnfoldedSpectrum], l: f64, stat: &WindowStat) -> Result<Vec<Vec<f64>>, SpectraError> {
    if batch.is_empty() {
        return Err(SpectraError::EmptyBatch);
    }
    let blocks = MIN_UNITS.div_ceil(batch.len());
    let per: Vec<Result<Vec<Vec<f64>>, SpectraError>> = batch
        .par_iter()
        .map(|u| {
            let x = u.interior();
            if x.len() < 2 {
                return Err(SpectraError::TooFewLevels { need: 2, got: x.len() });
            }
            let (a, b) = (x[0], x[x.len() - 1]);
            if l > 0.25 * (b - a) {
                return Err(SpectraError::WindowTooLong { l, span: b - a });
            }
            let starts = window_starts(a, b, l);
            let vals: Vec<f64> = starts
                .iter()
                .map(|&s| match stat {
                    WindowStat::Count => count_in(x, s, s + l) as f64,
                    WindowStat::Rigidity => rigidity_window(x, s, l),
                })
                .collect();
            let chunk = vals.len().div_ceil(blocks).max(1);
            Ok(vals.chunks(chunk).map(|c| c.to_vec()).collect())
        })
        .collect();
    let mut units = Vec::new();
    for r in per {
        units.extend(r?);
    }
    Ok(units)
}

fn mean_and_stderr(unit_values: &[f64]) -> (f64, f64) {
    let u = unit_values.len() as f64;
    let m = unit_values.iter().sum::<f64>() / u;
    if unit_values.len() < 2 {
        return (m, 0.0);
    }
    let var = unit_values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (u - 1.0);
    (m, (var / u).sqrt())
}

/// Number variance `Σ²(L) = ⟨(n − n̄)²⟩` of the window counts, with the
/// mean count pooled over the whole batch.
pub fn number_variance(batch: &[UnfoldedSpectrum], l_grid: &[f64]) -> Result<ObservableCurve, SpectraError> {
    check_grid(l_grid)?;
    let mut values = Vec::new();
    let mut errs = Vec::new();
    for &l in l_grid {
        let units = window_units(batch, l, &WindowStat::Count)?;
        let total: usize = units.iter().map(Vec::len).sum();
        let nbar = units.iter().flatten().sum::<f64>() / total as f64;
        let per: Vec<f64> = units
            .iter()
            .map(|u| u.iter().map(|n| (n - nbar).powi(2)).sum::<f64>() / u.len() as f64)
            .collect();
        let pooled = units.iter().flatten().map(|n| (n - nbar).powi(2)).sum::<f64>() / total as f64;
        let (_, se) = mean_and_stderr(&per);
        values.push(pooled);
        errs.push(se);
    }
    ObservableCurve::new(l_grid.to_vec(), values, errs)
}

/// Spectral rigidity `Δ₃(L)`: window-averaged least-squares residual of the
/// staircase against a straight line.
pub fn spectral_rigidity(batch: &[UnfoldedSpectrum], l_grid: &[f64]) -> Result<ObservableCurve, SpectraError> {
    check_grid(l_grid)?;
    let mut values = Vec::new();
    let mut errs = Vec::new();
    for &l in l_grid {
        let units = window_units(batch, l, &WindowStat::Rigidity)?;
        let total: usize = units.iter().map(Vec::len).sum();
        let pooled = units.iter().flatten().sum::<f64>() / total as f64;
        let per: Vec<f64> = units.iter().map(|u| u.iter().sum::<f64>() / u.len() as f64).collect();
        let (_, se) = mean_and_stderr(&per);
        values.push(pooled);
        errs.push(se);
    }
    ObservableCurve::new(l_grid.to_vec(), values, errs)
}

/// `Σ²(L) = L − 2 ∫₀^L (L − r) Y₂(r) dr`.
pub fn sigma2_from_y2<F: Fn(f64) -> f64>(l: f64, y2: F) -> f64 {
    let panels = (4.0 * l).ceil().max(1.0) as usize;
    l - 2.0 * GaussRule::new(16).integrate(0.0, l, panels, |r| (l - r) * y2(r))
}

/// `Δ₃(L) = (2/L⁴) ∫₀^L (L³ − 2L²r + r³) Σ²(r) dr`.
pub fn delta3_from_sigma2<F: Fn(f64) -> f64>(l: f64, sigma2: F) -> f64 {
    let panels = (4.0 * l).ceil().max(1.0) as usize;
    let i = GaussRule::new(16).integrate(0.0, l, panels, |r| {
        (l.powi(3) - 2.0 * l * l * r + r.powi(3)) * sigma2(r)
    });
    2.0 * i / l.powi(4)
}

/// Monte Carlo cluster function `Y₂(r) = 1 − R₂(r)` on the given bin edges.
///
/// Reference levels are the interior levels lying at least `r_max` from
/// both ends of their spectrum; partners range over the whole spectrum.
pub fn cluster_function(batch: &[UnfoldedSpectrum], r_edges: &[f64]) -> Result<ObservableCurve, SpectraError> {
    if batch.is_empty() {
        return Err(SpectraError::EmptyBatch);
    }
    check_grid(r_edges)?;
    let bins = r_edges.len() - 1;
    let rmax = r_edges[bins];
    let per: Vec<(Vec<f64>, f64)> = batch
        .par_iter()
        .map(|u| {
            let x = &u.levels;
            let inner = u.interior();
            let (lo, hi) = (x[0] + rmax, x[x.len() - 1] - rmax);
            let mut counts = vec![0.0; bins];
            let mut refs = 0.0;
            for &xi in inner.iter().filter(|v| **v >= lo && **v <= hi) {
                refs += 1.0;
                let a = x.partition_point(|v| *v < xi - rmax);
                let b = x.partition_point(|v| *v <= xi + rmax);
                for &xj in &x[a..b] {
                    let d = (xj - xi).abs();
                    if d == 0.0 {
                        continue;
                    }
                    let k = r_edges.partition_point(|e| *e <= d);
                    if k >= 1 && k <= bins {
                        counts[k - 1] += 1.0;
                    }
                }
            }
            (counts, refs)
        })
        .collect();
    let total_refs: f64 = per.iter().map(|p| p.1).sum();
    if total_refs == 0.0 {
        return Err(SpectraError::TooFewLevels { need: 1, got: 0 });
    }
    let centers: Vec<f64> = r_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut values = Vec::with_capacity(bins);
    let mut errs = Vec::with_capacity(bins);
    for k in 0..bins {
        let w = r_edges[k + 1] - r_edges[k];
        let pooled: f64 = per.iter().map(|p| p.0[k]).sum::<f64>() / (2.0 * w * total_refs);
        values.push(1.0 - pooled);
        let unit: Vec<f64> = per
            .iter()
            .filter(|p| p.1 > 0.0)
            .map(|p| 1.0 - p.0[k] / (2.0 * w * p.1))
            .collect();
        errs.push(mean_and_stderr(&unit).1);
    }
    ObservableCurve::new(centers, values, errs)
}

/// Christoffel–Darboux kernel of the first `N` oscillator functions
/// `φ_n(x) = H_n(x) e^{−x²/2} / √(2ⁿ n! √π)`.
///
/// For the β = 2 Gaussian ensemble with semicircle radius `2v`, eigenvalue
/// `λ` corresponds to `x = λ √(N/(2v²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteKernel {
    n: usize,
}

impl HermiteKernel {
    pub fn new(n: usize) -> Result<Self, SpectraError> {
        if n == 0 || n > 200 {
            return Err(SpectraError::OutOfRange(n));
        }
        Ok(HermiteKernel { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `φ_0(x) … φ_{N−1}(x)`; the recurrence runs on a log-shifted scale so
    /// the Gaussian factor never underflows before the polynomial part grows.
    pub fn oscillators(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut scales = Vec::with_capacity(self.n);
        for k in 0..self.n {
            if k > 0 {
                let kf = k as f64;
                let next = (2.0 / kf).sqrt() * x * cur - ((kf - 1.0) / kf).sqrt() * prev;
                prev = cur;
                cur = next;
            }
            let m = cur.abs().max(prev.abs());
            if m > 1e100 || (m < 1e-100 && m > 0.0) {
                log_scale += m.ln();
                prev /= m;
                cur /= m;
            }
            out.push(cur);
            scales.push(log_scale);
        }
        out.iter().zip(&scales).map(|(v, s)| v * s.exp()).collect()
    }

    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        self.oscillators(x)
            .iter()
            .zip(self.oscillators(y))
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `ρ₁(x) = K_N(x, x)`.
    pub fn density(&self, x: f64) -> f64 {
        self.oscillators(x).iter().map(|v| v * v).sum()
    }

    /// `∫_a^b ρ₁`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let panels = ((b - a).abs() * 4.0).ceil().max(1.0) as usize;
        GaussRule::new(16).integrate(a, b, panels, |x| self.density(x))
    }

    /// `y > x0` with `∫_{x0}^y ρ₁ = r`.
    pub fn unfolded_offset(&self, x0: f64, r: f64) -> f64 {
        let mut y = x0 + r / self.density(x0);
        for _ in 0..50 {
            let f = self.mass(x0, y) - r;
            let step = f / self.density(y);
            y -= step;
            if step.abs() < 1e-14 * (1.0 + y.abs()) {
                break;
            }
        }
        y
    }

    /// `Y₂ = K(x,y)² / (K(x,x) K(y,y))` between `x0` and the point `r`
    /// mean spacings to its right.
    pub fn cluster(&self, x0: f64, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        let y = self.unfolded_offset(x0, r);
        let k = self.kernel(x0, y);
        k * k / (self.density(x0) * self.density(y))
    }
}

/// Kernel correlators at the band centre.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCorrelators {
    /// `ρ₁(0)` in oscillator units.
    pub rho0: f64,
    /// `Y₂(r)` on the unfolded scale (stderr identically zero).
    pub y2: ObservableCurve,
}

pub fn hermite_kernel_correlators(beta: u32, n: usize, r_grid: &[f64]) -> Result<KernelCorrelators, SpectraError> {
    if beta != 2 {
        return Err(SpectraError::UnsupportedBeta(beta));
    }
    let k = HermiteKernel::new(n)?;
    let values = r_grid.iter().map(|&r| k.cluster(0.0, r)).collect();
    Ok(KernelCorrelators {
        rho0: k.density(0.0),
        y2: ObservableCurve::new(r_grid.to_vec(), values, vec![0.0; r_grid.len()])?,
    })
}

/// Independent uniform levels on `[0, n)`: a density-one Poisson surrogate.
pub fn poisson_surrogate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Spectrum {
    let mut levels: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
    levels.sort_by(f64::total_cmp);
    Spectrum {
        levels,
        degeneracy_stride: 1,
    }
}
