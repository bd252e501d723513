//! Samplers for the Gaussian, circular and chiral ensembles and for
//! flux-conserving transfer-matrix slices.
//!
//! # Gaussian normalization
//!
//! With `σ² = v²/N`, every off-diagonal element has `E|H_ij|² = σ²`, spread
//! evenly over its `β` real components (variance `σ²/β` each), and diagonal
//! elements have variance `2σ²/β`. The joint density is then
//! `exp(−βN tr H² / (4v²))` for all three `β` (quaternion trace at `β = 4`)
//! and the spectrum fills a semicircle of radius `2v`. The same weight
//! written as `exp(−βN tr H²/(2w²))` has `w = √2 v`.
//!
//! | β | off-diagonal component variance | diagonal variance |
//! |---|---|---|
//! | 1 | `v²/N` | `2v²/N` |
//! | 2 | `v²/(2N)` (re and im) | `v²/N` |
//! | 4 | `v²/(4N)` (four components) | `v²/(2N)` |
//!
//! The exact second moment is `⟨Σ_i λ_i²⟩/N = v² (1 + (2/β − 1)/N)` over the
//! `N` distinct levels.
//!
//! `β = 4` matrices use the `2N × 2N` complex embedding
//! `H = [[A, B], [−B̄, Ā]]` with `A` hermitean and `B` antisymmetric, so every
//! level is doubly degenerate.
//!
//! # Seeds
//!
//! Draw `i` of a run with seed `s` uses a ChaCha8 stream seeded by
//! `splitmix64(s ^ splitmix64(i))`. Results do not depend on thread count.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("beta must be one of 1, 2, 4 (got {0})")]
    BadBeta(u32),
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error("delta_s must be positive, got {0}")]
    BadDeltaS(f64),
    #[error("matrix is not normal within tolerance (off-diagonal Schur mass {0:.3e})")]
    NotNormal(f64),
    #[error("levels {0} and {1} of a beta=4 spectrum are not Kramers degenerate")]
    NotKramers(f64, f64),
    #[error("matrix must be square")]
    NotSquare,
}

/// Dyson index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Beta {
    One,
    Two,
    Four,
}

impl Beta {
    pub fn value(self) -> u32 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
            Beta::Four => 4,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }
}

impl TryFrom<u32> for Beta {
    type Error = EnsembleError;
    fn try_from(b: u32) -> Result<Self, EnsembleError> {
        match b {
            1 => Ok(Beta::One),
            2 => Ok(Beta::Two),
            4 => Ok(Beta::Four),
            other => Err(EnsembleError::BadBeta(other)),
        }
    }
}

impl From<Beta> for u32 {
    fn from(b: Beta) -> u32 {
        b.value()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Gaussian,
    Circular,
    Chiral,
    TransferSlice,
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Circular => "circular",
            EnsembleKind::Chiral => "chiral",
            EnsembleKind::TransferSlice => "transfer_slice",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub beta: Beta,
    /// Matrix size (channels for transfer slices). Ignored for chiral.
    pub n: usize,
    /// Chiral block sizes, `p ≥ q ≥ 1`.
    pub p: usize,
    pub q: usize,
    /// Scale: semicircle radius `2v` for Gaussian, block scale for chiral.
    pub v: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn gaussian(beta: Beta, n: usize, v: f64, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Gaussian,
            beta,
            n,
            p: 0,
            q: 0,
            v,
            seed,
        }
    }

    pub fn circular(beta: Beta, n: usize, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Circular,
            beta,
            n,
            p: 0,
            q: 0,
            v: 1.0,
            seed,
        }
    }

    pub fn chiral(beta: Beta, p: usize, q: usize, v: f64, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Chiral,
            beta,
            n: p + q,
            p,
            q,
            v,
            seed,
        }
    }

    pub fn transfer_slice(n: usize, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::TransferSlice,
            beta: Beta::Two,
            n,
            p: 0,
            q: 0,
            v: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |m: &str| Err(EnsembleError::InvalidSpec(m.to_string()));
        if !(self.v > 0.0) || !self.v.is_finite() {
            return bad("v must be positive and finite");
        }
        match self.kind {
            EnsembleKind::Chiral => {
                if self.q == 0 || self.p < self.q {
                    return bad("chiral ensembles need p >= q >= 1");
                }
            }
            EnsembleKind::TransferSlice => {
                if self.beta != Beta::Two {
                    return bad("transfer slices are implemented for beta = 2 only");
                }
                if self.n == 0 {
                    return bad("n must be at least 1");
                }
            }
            _ => {
                if self.n == 0 {
                    return bad("n must be at least 1");
                }
            }
        }
        Ok(())
    }

    /// Number of zero modes `ν = p − q` (chiral only).
    pub fn nu(&self) -> usize {
        self.p.saturating_sub(self.q)
    }
}

/// One SplitMix64 step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for draw `index` of a run seeded with `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Maps `f` over draw indices in parallel, returning results in index order.
pub fn par_draws<T: Send, F: Fn(u64) -> T + Sync + Send>(draws: usize, f: F) -> Vec<T> {
    (0..draws as u64).into_par_iter().map(f).collect()
}

/// Hermitean ensemble matrix: real symmetric at `β = 1`, complex otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl EnsembleMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            EnsembleMatrix::Real(m) => m.nrows(),
            EnsembleMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            EnsembleMatrix::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            EnsembleMatrix::Complex(m) => m.clone(),
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

fn cnormal<R: Rng + ?Sized>(rng: &mut R, sd_component: f64) -> Complex64 {
    Complex64::new(normal(rng, sd_component), normal(rng, sd_component))
}

/// Gaussian matrix drawn from `rng` (see the module docs for variances).
pub fn gaussian_matrix<R: Rng + ?Sized>(beta: Beta, n: usize, v: f64, rng: &mut R) -> EnsembleMatrix {
    let s2 = v * v / n as f64;
    let b = beta.as_f64();
    let off = (s2 / b).sqrt();
    let diag = (2.0 * s2 / b).sqrt();
    match beta {
        Beta::One => {
            let mut h = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = normal(rng, diag);
                for j in (i + 1)..n {
                    let x = normal(rng, off);
                    h[(i, j)] = x;
                    h[(j, i)] = x;
                }
            }
            EnsembleMatrix::Real(h)
        }
        Beta::Two => {
            let mut h = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = Complex64::new(normal(rng, diag), 0.0);
                for j in (i + 1)..n {
                    let z = cnormal(rng, off);
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            EnsembleMatrix::Complex(h)
        }
        Beta::Four => {
            let mut a = DMatrix::<Complex64>::zeros(n, n);
            let mut bm = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                a[(i, i)] = Complex64::new(normal(rng, diag), 0.0);
                for j in (i + 1)..n {
                    let x = cnormal(rng, off);
                    a[(i, j)] = x;
                    a[(j, i)] = x.conj();
                    let y = cnormal(rng, off);
                    bm[(i, j)] = y;
                    bm[(j, i)] = -y;
                }
            }
            EnsembleMatrix::Complex(quaternion_embed(&a, &bm))
        }
    }
}

/// `[[A, B], [−B̄, Ā]]`.
pub fn quaternion_embed(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (r, c) = a.shape();
    let mut m = DMatrix::<Complex64>::zeros(2 * r, 2 * c);
    m.view_mut((0, 0), (r, c)).copy_from(a);
    m.view_mut((0, c), (r, c)).copy_from(b);
    m.view_mut((r, 0), (r, c)).copy_from(&b.map(|z| -z.conj()));
    m.view_mut((r, c), (r, c)).copy_from(&a.map(|z| z.conj()));
    m
}

/// Symplectic unit `J = [[0, I], [−I, 0]]` of size `2n`.
pub fn symplectic_unit(n: usize) -> DMatrix<Complex64> {
    let mut j = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = Complex64::new(1.0, 0.0);
        j[(n + i, i)] = Complex64::new(-1.0, 0.0);
    }
    j
}

pub fn sample_gaussian(spec: &EnsembleSpec, draw: u64) -> Result<EnsembleMatrix, EnsembleError> {
    spec.validate()?;
    if spec.kind != EnsembleKind::Gaussian {
        return Err(EnsembleError::InvalidSpec("kind must be gaussian".into()));
    }
    Ok(gaussian_matrix(
        spec.beta,
        spec.n,
        spec.v,
        &mut draw_rng(spec.seed, draw),
    ))
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// diagonal of `R` rotated to the positive real axis.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::<Complex64>::from_fn(n, n, |_, _| cnormal(rng, std::f64::consts::FRAC_1_SQRT_2));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Circular ensemble member: Haar (`β = 2`), `UᵀU` (`β = 1`) or the
/// self-dual `J Uᵀ Jᵀ U` on `2N` dimensions (`β = 4`).
pub fn circular_matrix<R: Rng + ?Sized>(beta: Beta, n: usize, rng: &mut R) -> DMatrix<Complex64> {
    match beta {
        Beta::Two => haar_unitary(n, rng),
        Beta::One => {
            let u = haar_unitary(n, rng);
            u.transpose() * u
        }
        Beta::Four => {
            let u = haar_unitary(2 * n, rng);
            let j = symplectic_unit(n);
            &j * u.transpose() * j.transpose() * u
        }
    }
}

pub fn sample_circular(spec: &EnsembleSpec, draw: u64) -> Result<DMatrix<Complex64>, EnsembleError> {
    spec.validate()?;
    if spec.kind != EnsembleKind::Circular {
        return Err(EnsembleError::InvalidSpec("kind must be circular".into()));
    }
    Ok(circular_matrix(spec.beta, spec.n, &mut draw_rng(spec.seed, draw)))
}

/// Chiral matrix `[[0, W], [W†, 0]]` with a `p × q` block of
/// `E|W_ij|² = v²/(p+q)`.
pub fn chiral_matrix<R: Rng + ?Sized>(beta: Beta, p: usize, q: usize, v: f64, rng: &mut R) -> EnsembleMatrix {
    let s2 = v * v / (p + q) as f64;
    let sd = (s2 / beta.as_f64()).sqrt();
    let block = |w: &DMatrix<Complex64>| {
        let (r, c) = w.shape();
        let mut h = DMatrix::<Complex64>::zeros(r + c, r + c);
        h.view_mut((0, r), (r, c)).copy_from(w);
        h.view_mut((r, 0), (c, r)).copy_from(&w.adjoint());
        h
    };
    match beta {
        Beta::One => {
            let w = DMatrix::<f64>::from_fn(p, q, |_, _| normal(rng, sd));
            let mut h = DMatrix::<f64>::zeros(p + q, p + q);
            h.view_mut((0, p), (p, q)).copy_from(&w);
            h.view_mut((p, 0), (q, p)).copy_from(&w.transpose());
            EnsembleMatrix::Real(h)
        }
        Beta::Two => {
            let w = DMatrix::<Complex64>::from_fn(p, q, |_, _| cnormal(rng, sd));
            EnsembleMatrix::Complex(block(&w))
        }
        Beta::Four => {
            let a = DMatrix::<Complex64>::from_fn(p, q, |_, _| cnormal(rng, sd));
            let b = DMatrix::<Complex64>::from_fn(p, q, |_, _| cnormal(rng, sd));
            EnsembleMatrix::Complex(block(&quaternion_embed(&a, &b)))
        }
    }
}

pub fn sample_chiral(spec: &EnsembleSpec, draw: u64) -> Result<EnsembleMatrix, EnsembleError> {
    spec.validate()?;
    if spec.kind != EnsembleKind::Chiral {
        return Err(EnsembleError::InvalidSpec("kind must be chiral".into()));
    }
    Ok(chiral_matrix(
        spec.beta,
        spec.p,
        spec.q,
        spec.v,
        &mut draw_rng(spec.seed, draw),
    ))
}

/// `Σ_z = diag(I_n, −I_n)`.
pub fn sigma_z(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })
}

/// `M = diag(u, u′) Γ(λ) diag(v, v′)` with
/// `Γ = [[√(1+Λ), √Λ], [√Λ, √(1+Λ)]]`.
pub fn transfer_slice_from_parts(
    u: &DMatrix<Complex64>,
    u2: &DMatrix<Complex64>,
    v: &DMatrix<Complex64>,
    v2: &DMatrix<Complex64>,
    lambdas: &[f64],
) -> DMatrix<Complex64> {
    let n = lambdas.len();
    // Γ diag(v, v′) row by row: [√(1+Λ) v, √Λ v′; √Λ v, √(1+Λ) v′].
    let mut gv = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        let c = (1.0 + lambdas[i]).sqrt();
        let s = lambdas[i].sqrt();
        for j in 0..n {
            gv[(i, j)] = v[(i, j)] * c;
            gv[(i, n + j)] = v2[(i, j)] * s;
            gv[(n + i, j)] = v[(i, j)] * s;
            gv[(n + i, n + j)] = v2[(i, j)] * c;
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    let top = u * gv.rows(0, n);
    let bottom = u2 * gv.rows(n, n);
    m.rows_mut(0, n).copy_from(&top);
    m.rows_mut(n, n).copy_from(&bottom);
    m
}

/// Thin slice with independent Haar blocks and `λ_i ~ Exp(mean δs)`.
///
/// The mean `δs` per channel makes `⟨Σλ⟩` grow at rate `N`, matching the
/// ballistic drift of the scaling equation at unit mean free path.
pub fn transfer_slice<R: Rng + ?Sized>(
    n: usize,
    delta_s: f64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>, EnsembleError> {
    if !(delta_s > 0.0) || !delta_s.is_finite() {
        return Err(EnsembleError::BadDeltaS(delta_s));
    }
    let exp = Exp::new(1.0 / delta_s).map_err(|_| EnsembleError::BadDeltaS(delta_s))?;
    let lambdas: Vec<f64> = (0..n).map(|_| exp.sample(rng)).collect();
    let u = haar_unitary(n, rng);
    let u2 = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let v2 = haar_unitary(n, rng);
    Ok(transfer_slice_from_parts(&u, &u2, &v, &v2, &lambdas))
}

pub fn sample_transfer_slice(
    spec: &EnsembleSpec,
    delta_s: f64,
    draw: u64,
) -> Result<DMatrix<Complex64>, EnsembleError> {
    spec.validate()?;
    if spec.kind != EnsembleKind::TransferSlice {
        return Err(EnsembleError::InvalidSpec("kind must be transfer_slice".into()));
    }
    transfer_slice(spec.n, delta_s, &mut draw_rng(spec.seed, draw))
}

/// `max |M†Σ_z M − Σ_z|`.
pub fn flux_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows() / 2;
    let s = sigma_z(n);
    (m.adjoint() * &s * m - s).iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Ascending levels; Kramers pairs are stored once with stride 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub levels: Vec<f64>,
    pub degeneracy_stride: usize,
}

impl Spectrum {
    /// Sorts the input; stride 2 collapses consecutive pairs after checking
    /// they coincide to `1e−10` relative to the spectral scale.
    pub fn from_raw(mut levels: Vec<f64>, stride: usize) -> Result<Self, EnsembleError> {
        levels.sort_by(f64::total_cmp);
        if stride == 2 {
            let scale = levels.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let mut out = Vec::with_capacity(levels.len() / 2);
            for pair in levels.chunks(2) {
                if pair.len() != 2 || (pair[0] - pair[1]).abs() > 1e-10 * scale {
                    return Err(EnsembleError::NotKramers(pair[0], *pair.get(1).unwrap_or(&f64::NAN)));
                }
                out.push(0.5 * (pair[0] + pair[1]));
            }
            levels = out;
        }
        Ok(Spectrum {
            levels,
            degeneracy_stride: stride.max(1),
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Eigenvalues of a hermitean ensemble matrix.
pub fn hermitian_eigenvalues(m: &EnsembleMatrix) -> Vec<f64> {
    match m {
        EnsembleMatrix::Real(a) => SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect(),
        EnsembleMatrix::Complex(a) => SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect(),
    }
}

/// Spectrum of a hermitean matrix; `stride = 2` for Kramers-degenerate input.
pub fn eigenvalues(m: &EnsembleMatrix, stride: usize) -> Result<Spectrum, EnsembleError> {
    if m.nrows() == 0 {
        return Spectrum::from_raw(Vec::new(), stride);
    }
    Spectrum::from_raw(hermitian_eigenvalues(m), stride)
}

/// Eigenphases in `(−π, π]` of a unitary (or any normal) matrix via the
/// complex Schur form.
pub fn unitary_eigenphases(s: &DMatrix<Complex64>, stride: usize) -> Result<Spectrum, EnsembleError> {
    if s.nrows() != s.ncols() {
        return Err(EnsembleError::NotSquare);
    }
    let n = s.nrows();
    let (_, t) = nalgebra::Schur::new(s.clone()).unpack();
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            off = off.max(t[(i, j)].norm());
        }
    }
    let scale = t.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    if off > 1e-8 * scale {
        return Err(EnsembleError::NotNormal(off));
    }
    let phases = (0..n)
        .map(|i| {
            let a = t[(i, i)].arg();
            if a <= -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                a
            }
        })
        .collect();
    Spectrum::from_raw(phases, stride)
}

/// Samples draw `draw` of `spec` and returns its spectrum (eigenphases for
/// circular ensembles). Transfer slices have no spectrum here.
pub fn sample_spectrum(spec: &EnsembleSpec, draw: u64) -> Result<Spectrum, EnsembleError> {
    let stride = if spec.beta == Beta::Four { 2 } else { 1 };
    match spec.kind {
        EnsembleKind::Gaussian => eigenvalues(&sample_gaussian(spec, draw)?, stride),
        EnsembleKind::Chiral => eigenvalues(&sample_chiral(spec, draw)?, stride),
        EnsembleKind::Circular => unitary_eigenphases(&sample_circular(spec, draw)?, stride),
        EnsembleKind::TransferSlice => Err(EnsembleError::InvalidSpec(
            "transfer slices are consumed by the dmpk module".into(),
        )),
    }
}

/// Draws `0..draws` of `spec` in parallel, in draw order.
pub fn sample_spectra(spec: &EnsembleSpec, draws: usize) -> Result<Vec<Spectrum>, EnsembleError> {
    spec.validate()?;
    par_draws(draws, |d| sample_spectrum(spec, d)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_parsing() {
        assert_eq!(Beta::try_from(4).unwrap(), Beta::Four);
        assert_eq!(Beta::try_from(3), Err(EnsembleError::BadBeta(3)));
    }

    #[test]
    fn goe_symmetric_and_deterministic() {
        let spec = EnsembleSpec::gaussian(Beta::One, 2, 1.0, 9);
        let a = sample_gaussian(&spec, 0).unwrap();
        let EnsembleMatrix::Real(m) = &a else { panic!("real") };
        assert_eq!(m, &m.transpose());
        assert_eq!(a, sample_gaussian(&spec, 0).unwrap());
        assert_ne!(a, sample_gaussian(&spec, 1).unwrap());
    }

    #[test]
    fn gse_kramers_and_symplectic() {
        let spec = EnsembleSpec::gaussian(Beta::Four, 3, 1.0, 1);
        let m = sample_gaussian(&spec, 0).unwrap();
        let h = m.to_complex();
        assert_eq!(h.nrows(), 6);
        // Self-duality: J H̄ Jᵀ = H.
        let j = symplectic_unit(3);
        let dual = &j * h.map(|z| z.conj()) * j.transpose();
        assert!((dual - &h).iter().all(|z| z.norm() < 1e-14));
        let s = eigenvalues(&m, 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.degeneracy_stride, 2);
    }

    #[test]
    fn simple_spectra() {
        let m = EnsembleMatrix::Real(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            3.0, 1.0, 2.0,
        ])));
        assert_eq!(eigenvalues(&m, 1).unwrap().levels, vec![1.0, 2.0, 3.0]);
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!(unitary_eigenphases(&id, 1).unwrap().levels.iter().all(|x| *x == 0.0));
        let nn = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(unitary_eigenphases(&nn, 1), Err(EnsembleError::NotNormal(_))));
    }

    #[test]
    fn circular_constructions() {
        let mut rng = draw_rng(3, 0);
        let s = circular_matrix(Beta::One, 5, &mut rng);
        assert!((&s - s.transpose()).iter().all(|z| z.norm() < 1e-12));
        let id = DMatrix::<Complex64>::identity(5, 5);
        assert!((s.adjoint() * &s - &id).iter().all(|z| z.norm() < 1e-12));
        let s4 = circular_matrix(Beta::Four, 3, &mut rng);
        let j = symplectic_unit(3);
        let dual = &j * s4.transpose() * j.transpose();
        assert!((dual - &s4).iter().all(|z| z.norm() < 1e-12));
        assert_eq!(unitary_eigenphases(&s4, 2).unwrap().len(), 3);
    }

    #[test]
    fn chiral_zero_modes() {
        for beta in [Beta::One, Beta::Two, Beta::Four] {
            let spec = EnsembleSpec::chiral(beta, 5, 3, 1.0, 11);
            let s = sample_spectrum(&spec, 0).unwrap();
            assert_eq!(s.levels.iter().filter(|x| x.abs() < 1e-10).count(), 2);
            let spec = EnsembleSpec::chiral(beta, 4, 4, 1.0, 11);
            let s = sample_spectrum(&spec, 0).unwrap();
            assert_eq!(s.levels.iter().filter(|x| x.abs() < 1e-10).count(), 0);
            // ±λ symmetry.
            let n = s.len();
            for i in 0..n {
                assert!((s.levels[i] + s.levels[n - 1 - i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transfer_slice_flux() {
        let mut rng = draw_rng(5, 0);
        for _ in 0..100 {
            let m = transfer_slice(3, 0.05, &mut rng).unwrap();
            assert!(flux_residual(&m) < 1e-10);
        }
        assert!(transfer_slice(3, 0.0, &mut rng).is_err());
        let u = haar_unitary(2, &mut rng);
        let m = transfer_slice_from_parts(&u, &u, &u, &u, &[0.0, 0.0]);
        assert!((m.adjoint() * &m - DMatrix::identity(4, 4))
            .iter()
            .all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn invalid_specs() {
        assert!(EnsembleSpec::chiral(Beta::Two, 2, 3, 1.0, 0).validate().is_err());
        assert!(EnsembleSpec::gaussian(Beta::Two, 4, 0.0, 0).validate().is_err());
        assert!(EnsembleSpec::gaussian(Beta::Two, 0, 1.0, 0).validate().is_err());
    }
}
