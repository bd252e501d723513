//! Structure constants, Killing forms, secular-equation coefficients and
//! quadratic Casimirs for small real Lie algebras.
//!
//! `C[i][j][k] = C^k_{ij}` with `[X_i, X_j] = C^k_{ij} X_k`. The adjoint
//! matrices are `(ad X_i)^r_s = C^r_{is}` and the Killing form is
//! `g_ij = tr(ad X_i ad X_j)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Jacobi-identity tolerance accepted by [`StructureConstants::new`], relative
/// to the squared largest constant when that exceeds 1.
pub const JACOBI_TOL: f64 = 1e-12;
/// Relative eigenvalue threshold below which the Killing form counts as zero.
pub const DEGENERACY_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum LieError {
    #[error("structure-constant array has length {got}, expected dim^3 = {expected}")]
    Shape { expected: usize, got: usize },
    #[error("antisymmetry violated at (i={i}, j={j}, k={k})")]
    NotAntisymmetric { i: usize, j: usize, k: usize },
    #[error("Jacobi identity residual {0:.3e} exceeds tolerance")]
    Jacobi(f64),
    #[error("Killing form is degenerate ({zeros} zero eigenvalues): algebra is not semisimple")]
    NonSemisimple { zeros: usize },
    #[error("representation matrices must be square and of equal size")]
    BadRepresentation,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("representation is not closed under commutators (residual {0:.3e})")]
    NotClosed(f64),
    #[error("generators are linearly dependent")]
    Dependent,
    #[error("basis change matrix is singular")]
    Singular,
    #[error("rescaling by i produces imaginary structure constant C^{k}_{{{i}{j}}}")]
    NotReal { i: usize, j: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    /// Validates antisymmetry (exact) and the Jacobi identity.
    pub fn new(dim: usize, c: Vec<f64>) -> Result<Self, LieError> {
        if c.len() != dim * dim * dim {
            return Err(LieError::Shape {
                expected: dim * dim * dim,
                got: c.len(),
            });
        }
        let sc = StructureConstants { dim, c };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if sc.get(i, j, k) != -sc.get(j, i, k) {
                        return Err(LieError::NotAntisymmetric { i, j, k });
                    }
                }
            }
        }
        let cmax = sc.c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r = sc.jacobi_residual();
        if r > JACOBI_TOL * cmax.powi(2).max(1.0) {
            return Err(LieError::Jacobi(r));
        }
        Ok(sc)
    }

    /// Builds from brackets `[X_i, X_j] = Σ val X_k` given as `(i, j, k, val)`;
    /// the antisymmetric partner is filled in.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<Self, LieError> {
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in brackets {
            c[(i * dim + j) * dim + k] += v;
            c[(j * dim + i) * dim + k] -= v;
        }
        Self::new(dim, c)
    }

    /// Expands each commutator of the representation matrices in the real
    /// span of the matrices themselves (least squares on the real trace
    /// inner product).
    pub fn from_representation(rep: &[DMatrix<Complex64>]) -> Result<Self, LieError> {
        let n = rep_size(rep)?;
        let dim = rep.len();
        let inner = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| -> f64 {
            a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
        };
        let gram = DMatrix::from_fn(dim, dim, |a, b| inner(&rep[a], &rep[b]));
        let chol = gram.clone().cholesky().ok_or(LieError::Dependent)?;
        let mut c = vec![0.0; dim * dim * dim];
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let br = &rep[i] * &rep[j] - &rep[j] * &rep[i];
                let rhs = DVector::from_fn(dim, |a, _| inner(&rep[a], &br));
                let coef = chol.solve(&rhs);
                let mut recon = DMatrix::<Complex64>::zeros(n, n);
                for k in 0..dim {
                    c[(i * dim + j) * dim + k] = coef[k];
                    recon += &rep[k] * Complex64::new(coef[k], 0.0);
                }
                worst = worst.max((recon - br).camax());
            }
        }
        if worst > 1e-10 {
            return Err(LieError::NotClosed(worst));
        }
        // Enforce exact antisymmetry from the numerically computed values.
        for i in 0..dim {
            for j in i..dim {
                for k in 0..dim {
                    let a = 0.5 * (c[(i * dim + j) * dim + k] - c[(j * dim + i) * dim + k]);
                    c[(i * dim + j) * dim + k] = a;
                    c[(j * dim + i) * dim + k] = -a;
                }
            }
        }
        Self::new(dim, c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `C^k_{ij}`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Matrix of `ad X_i` acting on coefficient vectors.
    pub fn adjoint(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, s| self.get(i, s, r))
    }

    /// Max over index triples of the Jacobi combination.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut s = 0.0;
                        for m in 0..d {
                            s += self.get(i, j, m) * self.get(m, k, l)
                                + self.get(j, k, m) * self.get(m, i, l)
                                + self.get(k, i, m) * self.get(m, j, l);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Structure constants in the basis `X'_i = Σ_j A_ji X_j`.
    pub fn change_basis(&self, a: &DMatrix<f64>) -> Result<Self, LieError> {
        let d = self.dim;
        if a.nrows() != d || a.ncols() != d {
            return Err(LieError::Dimension {
                expected: d,
                got: a.nrows(),
            });
        }
        let inv = a.clone().try_inverse().ok_or(LieError::Singular)?;
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                // [X'_i, X'_j] expressed in the old basis.
                let mut old = vec![0.0; d];
                for p in 0..d {
                    for q in 0..d {
                        let w = a[(p, i)] * a[(q, j)];
                        if w == 0.0 {
                            continue;
                        }
                        for (r, o) in old.iter_mut().enumerate() {
                            *o += w * self.get(p, q, r);
                        }
                    }
                }
                for k in 0..d {
                    c[(i * d + j) * d + k] = (0..d).map(|r| inv[(k, r)] * old[r]).sum();
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in 0..d {
                    let v = 0.5 * (c[(i * d + j) * d + k] - c[(j * d + i) * d + k]);
                    c[(i * d + j) * d + k] = v;
                    c[(j * d + i) * d + k] = -v;
                }
            }
        }
        StructureConstants::new(d, c)
    }

    /// Multiplies the generators flagged in `imaginary` by `i`. The new
    /// constants pick up `i^{e_i + e_j − e_k}`, which must be real.
    pub fn weyl_trick(&self, imaginary: &[bool]) -> Result<Self, LieError> {
        let d = self.dim;
        if imaginary.len() != d {
            return Err(LieError::Dimension {
                expected: d,
                got: imaginary.len(),
            });
        }
        let e = |i: usize| i32::from(imaginary[i]);
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self.get(i, j, k);
                    if v == 0.0 {
                        continue;
                    }
                    let p = (e(i) + e(j) - e(k)).rem_euclid(4);
                    let f = match p {
                        0 => 1.0,
                        2 => -1.0,
                        _ => return Err(LieError::NotReal { i, j, k }),
                    };
                    c[(i * d + j) * d + k] = f * v;
                }
            }
        }
        StructureConstants::new(d, c)
    }
}

fn rep_size(rep: &[DMatrix<Complex64>]) -> Result<usize, LieError> {
    let first = rep.first().ok_or(LieError::BadRepresentation)?;
    let n = first.nrows();
    if rep.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(LieError::BadRepresentation);
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KillingForm {
    pub g: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub signature: Signature,
}

impl KillingForm {
    pub fn from_matrix(g: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        let mut eigenvalues: Vec<f64> = eig.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let scale = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = DEGENERACY_REL_TOL * scale;
        let mut sig = Signature {
            plus: 0,
            minus: 0,
            zero: 0,
        };
        for &x in &eigenvalues {
            if scale == 0.0 || x.abs() <= tol {
                sig.zero += 1;
            } else if x > 0.0 {
                sig.plus += 1;
            } else {
                sig.minus += 1;
            }
        }
        KillingForm {
            g,
            eigenvalues,
            signature: sig,
        }
    }

    /// The form with rows and columns listed in `order`.
    pub fn permuted(&self, order: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(order.len(), order.len(), |a, b| self.g[(order[a], order[b])])
    }

    pub fn is_degenerate(&self) -> bool {
        self.signature.zero > 0
    }
}

/// `g_ij = Σ_{r,s} C^r_{is} C^s_{jr}`.
pub fn killing_form(sc: &StructureConstants) -> KillingForm {
    let d = sc.dim();
    let ads: Vec<DMatrix<f64>> = (0..d).map(|i| sc.adjoint(i)).collect();
    let mut g = DMatrix::from_fn(d, d, |i, j| (&ads[i] * &ads[j]).trace());
    // Symmetrize against summation-order round-off.
    g = (&g + g.transpose()) * 0.5;
    KillingForm::from_matrix(g)
}

/// Negative definiteness of a non-degenerate Killing form.
pub fn is_compact(kf: &KillingForm) -> Result<bool, LieError> {
    if kf.is_degenerate() {
        return Err(LieError::NonSemisimple {
            zeros: kf.signature.zero,
        });
    }
    Ok(kf.signature.plus == 0)
}

/// Coefficients `φ_0..φ_n` of `det(Σ t^i ρ(X_i) − λ) = Σ_k (−λ)^{n−k} φ_k`.
///
/// The determinant is sampled at `n+1` scaled roots of unity and the
/// polynomial recovered by an inverse discrete Fourier transform.
pub fn secular_casimir_coefficients(rep: &[DMatrix<Complex64>], t: &[f64]) -> Result<Vec<Complex64>, LieError> {
    let n = rep_size(rep)?;
    if t.len() != rep.len() {
        return Err(LieError::Dimension {
            expected: rep.len(),
            got: t.len(),
        });
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (ti, x) in t.iter().zip(rep) {
        m += x * Complex64::new(*ti, 0.0);
    }
    let radius = m.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
    let pts = n + 1;
    let samples: Vec<Complex64> = (0..pts)
        .map(|j| {
            let lam = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / pts as f64);
            let mut a = m.clone();
            for d in 0..n {
                a[(d, d)] -= lam;
            }
            a.determinant()
        })
        .collect();
    // c_p: coefficient of λ^p.
    let c: Vec<Complex64> = (0..pts)
        .map(|p| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * p) as f64 / pts as f64))
                .sum();
            s / (pts as f64 * radius.powi(p as i32))
        })
        .collect();
    Ok((0..=n)
        .map(|k| {
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            c[n - k] * sign
        })
        .collect())
}

/// Number of functionally independent secular coefficients at `t`: the rank
/// of the Jacobian of `(φ_1, …, φ_n)` with respect to `t`.
pub fn secular_functional_rank(rep: &[DMatrix<Complex64>], t: &[f64]) -> Result<usize, LieError> {
    let h = 1e-5;
    let base = secular_casimir_coefficients(rep, t)?;
    let nk = base.len() - 1;
    let mut jac = DMatrix::<f64>::zeros(2 * nk, t.len());
    for a in 0..t.len() {
        let mut tp = t.to_vec();
        let mut tm = t.to_vec();
        tp[a] += h;
        tm[a] -= h;
        let fp = secular_casimir_coefficients(rep, &tp)?;
        let fm = secular_casimir_coefficients(rep, &tm)?;
        for k in 1..=nk {
            let d = (fp[k] - fm[k]) / (2.0 * h);
            jac[(2 * (k - 1), a)] = d.re;
            jac[(2 * (k - 1) + 1, a)] = d.im;
        }
    }
    let sv = jac.singular_values();
    let smax = sv.iter().fold(0.0f64, |m, x| m.max(*x));
    Ok(sv.iter().filter(|s| **s > 1e-6 * smax.max(1e-300)).count())
}

/// Builds `C = g^{ij} ρ(X_i) ρ(X_j)` and returns it with
/// `max_i ‖[C, ρ(X_i)]‖_max`.
pub fn quadratic_casimir(
    sc: &StructureConstants,
    rep: &[DMatrix<Complex64>],
) -> Result<(DMatrix<Complex64>, f64), LieError> {
    let n = rep_size(rep)?;
    if rep.len() != sc.dim() {
        return Err(LieError::Dimension {
            expected: sc.dim(),
            got: rep.len(),
        });
    }
    let kf = killing_form(sc);
    if kf.is_degenerate() {
        return Err(LieError::NonSemisimple {
            zeros: kf.signature.zero,
        });
    }
    let ginv = kf.g.clone().try_inverse().ok_or(LieError::Singular)?;
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..sc.dim() {
        for j in 0..sc.dim() {
            let w = ginv[(i, j)];
            if w != 0.0 {
                c += &rep[i] * &rep[j] * Complex64::new(w, 0.0);
            }
        }
    }
    let residual = rep
        .iter()
        .map(|x| (&c * x - x * &c).iter().fold(0.0f64, |m, z| m.max(z.norm())))
        .fold(0.0, f64::max);
    Ok((c, residual))
}

/// Residual of [`quadratic_casimir`].
pub fn quadratic_casimir_check(sc: &StructureConstants, rep: &[DMatrix<Complex64>]) -> Result<f64, LieError> {
    quadratic_casimir(sc, rep).map(|(_, r)| r)
}

/// Worked low-dimensional algebras used as fixtures.
pub mod fixtures {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn levi_civita(scale: f64) -> Vec<(usize, usize, usize, f64)> {
        vec![(0, 1, 2, scale), (1, 2, 0, scale), (2, 0, 1, scale)]
    }

    /// so(3) with `[L_i, L_j] = ½ ε_ijk L_k`.
    pub fn so3() -> StructureConstants {
        StructureConstants::from_brackets(3, &levi_civita(0.5)).expect("valid fixture")
    }

    /// so(3) rescaled to `[L̃_i, L̃_j] = −ε_ijk L̃_k / √2`; its Killing form is `−1`.
    pub fn so3_normalized() -> StructureConstants {
        StructureConstants::from_brackets(3, &levi_civita(-1.0 / SQRT_2)).expect("valid fixture")
    }

    /// so(2,1) in the basis `(Σ_1, Σ_2, Σ_3)`:
    /// `[Σ_1,Σ_2] = −Σ_3/√2`, `[Σ_2,Σ_3] = −Σ_1/√2`, `[Σ_3,Σ_1] = Σ_2/√2`.
    pub fn so21() -> StructureConstants {
        let a = 1.0 / SQRT_2;
        StructureConstants::from_brackets(3, &[(0, 1, 2, -a), (1, 2, 0, -a), (2, 0, 1, a)]).expect("valid fixture")
    }

    /// Row/column order `(3, 1, 2)` used to display the so(2,1) form.
    pub const SO21_DISPLAY_ORDER: [usize; 3] = [2, 0, 1];

    /// The non-compact generators `Σ_1, Σ_3` of [`so21`].
    pub const SO21_NONCOMPACT: [bool; 3] = [true, false, true];

    /// e(2) in the basis `(J, P_1, P_2)`: `[P_1,P_2] = 0`, `[J,P_1] = −P_2`,
    /// `[J,P_2] = P_1`. The Killing form is `diag(−2, 0, 0)`.
    pub fn e2() -> StructureConstants {
        StructureConstants::from_brackets(3, &[(0, 1, 2, -1.0), (0, 2, 1, 1.0)]).expect("valid fixture")
    }

    /// e(2) with the rotation rescaled to `J/√2`; the Killing form is
    /// `diag(−1, 0, 0)`.
    pub fn e2_normalized() -> StructureConstants {
        let a = 1.0 / SQRT_2;
        StructureConstants::from_brackets(3, &[(0, 1, 2, -a), (0, 2, 1, a)]).expect("valid fixture")
    }

    /// One-dimensional abelian algebra.
    pub fn abelian1() -> StructureConstants {
        StructureConstants::new(1, vec![0.0]).expect("valid fixture")
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat(n: usize, entries: &[(usize, usize, Complex64)]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in entries {
            m[(i, j)] = v;
        }
        m
    }

    /// Defining representation of [`so3`]: `(L_i)_{jk} = −½ ε_ijk`.
    pub fn so3_defining() -> Vec<DMatrix<Complex64>> {
        let h = 0.5;
        vec![
            mat(3, &[(1, 2, c(-h, 0.0)), (2, 1, c(h, 0.0))]),
            mat(3, &[(0, 2, c(h, 0.0)), (2, 0, c(-h, 0.0))]),
            mat(3, &[(0, 1, c(-h, 0.0)), (1, 0, c(h, 0.0))]),
        ]
    }

    /// su(2) as `X_i = −iσ_i/2`, satisfying `[X_i, X_j] = ε_ijk X_k`.
    pub fn su2_defining() -> Vec<DMatrix<Complex64>> {
        let h = 0.5;
        vec![
            mat(2, &[(0, 1, c(0.0, -h)), (1, 0, c(0.0, -h))]),
            mat(2, &[(0, 1, c(-h, 0.0)), (1, 0, c(h, 0.0))]),
            mat(2, &[(0, 0, c(0.0, -h)), (1, 1, c(0.0, h))]),
        ]
    }

    /// Spin-1 representation `X_i = −i S_i` of the same algebra.
    pub fn su2_spin1() -> Vec<DMatrix<Complex64>> {
        let r = 1.0 / SQRT_2;
        let sx = mat(
            3,
            &[
                (0, 1, c(r, 0.0)),
                (1, 0, c(r, 0.0)),
                (1, 2, c(r, 0.0)),
                (2, 1, c(r, 0.0)),
            ],
        );
        let sy = mat(
            3,
            &[
                (0, 1, c(0.0, -r)),
                (1, 0, c(0.0, r)),
                (1, 2, c(0.0, -r)),
                (2, 1, c(0.0, r)),
            ],
        );
        let sz = mat(3, &[(0, 0, c(1.0, 0.0)), (2, 2, c(-1.0, 0.0))]);
        [sx, sy, sz].into_iter().map(|s| s * c(0.0, -1.0)).collect()
    }

    /// su(3) as `X_a = i λ_a / 2` with Gell-Mann matrices `λ_a`, in the
    /// order `X_1 … X_8`.
    pub fn su3_gell_mann() -> Vec<DMatrix<Complex64>> {
        let i = c(0.0, 0.5);
        let r = c(0.5, 0.0);
        let s3 = 1.0 / (2.0 * 3f64.sqrt());
        vec![
            mat(3, &[(0, 1, i), (1, 0, i)]),
            mat(3, &[(0, 1, r), (1, 0, -r)]),
            mat(3, &[(0, 0, i), (1, 1, -i)]),
            mat(3, &[(0, 2, i), (2, 0, i)]),
            mat(3, &[(0, 2, r), (2, 0, -r)]),
            mat(3, &[(1, 2, i), (2, 1, i)]),
            mat(3, &[(1, 2, r), (2, 1, -r)]),
            mat(3, &[(0, 0, c(0.0, s3)), (1, 1, c(0.0, s3)), (2, 2, c(0.0, -2.0 * s3))]),
        ]
    }

    /// Indices (0-based) of the real, skew-symmetric generators `X_2, X_5, X_7`.
    pub const SU3_K: [usize; 3] = [1, 4, 6];
    /// Indices of the imaginary symmetric generators `X_1, X_3, X_4, X_6, X_8`.
    pub const SU3_P: [usize; 5] = [0, 2, 3, 5, 7];

    /// Outcome of one Killing-form fixture.
    #[derive(Debug, Clone, PartialEq)]
    pub struct FixtureCheck {
        pub name: &'static str,
        /// Largest entrywise deviation from the expected form.
        pub max_error: f64,
        pub passed: bool,
    }

    fn check(name: &'static str, g: &DMatrix<f64>, diag: [f64; 3], extra: bool) -> FixtureCheck {
        let want = DMatrix::from_fn(3, 3, |i, j| if i == j { diag[i] } else { 0.0 });
        let max_error = (g - want).abs().max();
        FixtureCheck {
            name,
            max_error,
            passed: max_error < 1e-12 && extra,
        }
    }

    /// The five Killing forms checked to `1e−12`: so(3) in both
    /// normalizations, so(2,1) in display order, and e(2) in both, whose
    /// signature must be one negative direction and two null ones.
    pub fn killing_fixture_checks() -> Vec<FixtureCheck> {
        let e2_sig = |kf: &KillingForm| {
            kf.signature
                == Signature {
                    plus: 0,
                    minus: 1,
                    zero: 2,
                }
        };
        let so21 = killing_form(&so21());
        let e2 = killing_form(&e2());
        let e2n = killing_form(&e2_normalized());
        vec![
            check("so3", &killing_form(&so3()).g, [-0.5; 3], true),
            check("so3_normalized", &killing_form(&so3_normalized()).g, [-1.0; 3], true),
            check("so21", &so21.permuted(&SO21_DISPLAY_ORDER), [1.0, 1.0, -1.0], true),
            check("e2", &e2.g, [-2.0, 0.0, 0.0], e2_sig(&e2)),
            check("e2_normalized", &e2n.g, [-1.0, 0.0, 0.0], e2_sig(&e2n)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn assert_mat(g: &DMatrix<f64>, want: &[f64], tol: f64) {
        let d = g.nrows();
        for i in 0..d {
            for j in 0..d {
                assert!(
                    (g[(i, j)] - want[i * d + j]).abs() < tol,
                    "entry ({i},{j}) = {} want {}",
                    g[(i, j)],
                    want[i * d + j]
                );
            }
        }
    }

    #[test]
    fn all_killing_fixtures_pass() {
        let checks = killing_fixture_checks();
        assert_eq!(checks.len(), 5);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn so3_forms() {
        let g = killing_form(&so3());
        assert_mat(&g.g, &[-0.5, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, -0.5], 1e-12);
        assert_eq!(is_compact(&g), Ok(true));
        let g = killing_form(&so3_normalized());
        assert_mat(&g.g, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0], 1e-12);
    }

    #[test]
    fn so21_form_and_weyl_trick() {
        let kf = killing_form(&so21());
        let shown = kf.permuted(&SO21_DISPLAY_ORDER);
        assert_mat(&shown, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0], 1e-12);
        assert_eq!(is_compact(&kf), Ok(false));
        let compact = so21().weyl_trick(&SO21_NONCOMPACT).unwrap();
        let g = killing_form(&compact);
        assert_mat(&g.g, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0], 1e-12);
        assert!(so21().weyl_trick(&[true, false, false]).is_err());
    }

    #[test]
    fn e2_is_degenerate() {
        let g = killing_form(&e2());
        assert_mat(&g.g, &[-2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12);
        let g = killing_form(&e2_normalized());
        assert_mat(&g.g, &[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12);
        assert_eq!(
            g.signature,
            Signature {
                plus: 0,
                minus: 1,
                zero: 2
            }
        );
        assert!(matches!(is_compact(&g), Err(LieError::NonSemisimple { zeros: 2 })));
    }

    #[test]
    fn representation_round_trip() {
        let sc = StructureConstants::from_representation(&so3_defining()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((sc.get(i, j, k) - so3().get(i, j, k)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn su3_cartan_split() {
        let rep = su3_gell_mann();
        let sc = StructureConstants::from_representation(&rep).unwrap();
        let in_k = |k: usize| SU3_K.contains(&k);
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let v = sc.get(i, j, k).abs();
                    if v < 1e-12 {
                        continue;
                    }
                    // [K,K] ⊂ K, [K,P] ⊂ P, [P,P] ⊂ K.
                    assert_eq!(in_k(i) == in_k(j), in_k(k), "[{i},{j}] -> {k}");
                }
            }
        }
        let kf = killing_form(&sc);
        assert_eq!(
            kf.signature,
            Signature {
                plus: 0,
                minus: 8,
                zero: 0
            }
        );
        let mut mask = [false; 8];
        for p in SU3_P {
            mask[p] = true;
        }
        let split = killing_form(&sc.weyl_trick(&mask).unwrap());
        assert_eq!(
            split.signature,
            Signature {
                plus: 5,
                minus: 3,
                zero: 0
            }
        );
    }

    #[test]
    fn secular_so3() {
        let t = [0.3, -1.2, 0.7];
        let phi = secular_casimir_coefficients(&so3_defining(), &t).unwrap();
        let t2: f64 = t.iter().map(|x| x * x).sum();
        assert!((phi[0] - 1.0).norm() < 1e-12);
        assert!(phi[1].norm() < 1e-12);
        assert!((phi[2] - 0.25 * t2).norm() < 1e-12);
        assert!(phi[3].norm() < 1e-12);
        assert_eq!(secular_functional_rank(&so3_defining(), &t).unwrap(), 1);
        let zero = secular_casimir_coefficients(&so3_defining(), &[0.0; 3]).unwrap();
        assert!((zero[0] - 1.0).norm() < 1e-14);
        assert!(zero[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn secular_su2_and_su3_rank() {
        let t = [0.4, 0.9, -0.2];
        let phi = secular_casimir_coefficients(&su2_defining(), &t).unwrap();
        let t2: f64 = t.iter().map(|x| x * x).sum();
        assert!((phi[2] - 0.25 * t2).norm() < 1e-12);
        assert!(phi[1].norm() < 1e-12);
        let t8 = [0.3, -0.1, 0.5, 0.2, -0.7, 0.4, 0.1, -0.6];
        assert_eq!(secular_functional_rank(&su3_gell_mann(), &t8).unwrap(), 2);
        assert!(secular_casimir_coefficients(&su2_defining(), &[1.0]).is_err());
    }

    #[test]
    fn casimirs() {
        let (c, r) = quadratic_casimir(&so3(), &so3_defining()).unwrap();
        assert!(r < 1e-12);
        // C = g^{ij} L_i L_j = −2 Σ L_i² ∝ identity on the defining rep.
        let l2: DMatrix<Complex64> = so3_defining()
            .iter()
            .map(|l| l * l)
            .fold(DMatrix::zeros(3, 3), |a, b| a + b);
        assert!((c - l2 * Complex64::new(-2.0, 0.0)).camax() < 1e-12);
        let su2 = StructureConstants::from_representation(&su2_defining()).unwrap();
        assert!(quadratic_casimir_check(&su2, &su2_spin1()).unwrap() < 1e-10);
        let ab = abelian1();
        let one = vec![DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0))];
        assert!(matches!(
            quadratic_casimir_check(&ab, &one),
            Err(LieError::NonSemisimple { .. })
        ));
    }

    #[test]
    fn invalid_constants_rejected() {
        let mut c = so3().c.clone();
        // Entry (0, 1, 2) of the row-major 3x3x3 tensor.
        c[5] = 0.7;
        assert!(matches!(
            StructureConstants::new(3, c),
            Err(LieError::NotAntisymmetric { .. })
        ));
        // Antisymmetric but violating Jacobi.
        let bad =
            StructureConstants::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 2.0), (0, 1, 0, 1.0)]);
        assert!(matches!(bad, Err(LieError::Jacobi(_))));
    }
}
