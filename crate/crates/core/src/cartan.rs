//! Cartan's classification of irreducible symmetric spaces as catalog data,
//! plus the curvature-dependent radial Jacobians and the radial
//! Laplace–Beltrami operator on tensor grids.
//!
//! Each class yields a triplet of spaces (positive, zero and negative
//! curvature) sharing one restricted root system. With `q^α = q·α` and scale
//! `a`, the radial Jacobians are
//!
//! - zero curvature: `J = ∏ |q^α|^{m_α}`
//! - negative curvature: `J = ∏ |sinh(a q^α)/a|^{m_α}`
//! - positive curvature: `J = ∏ (sin(a q^α)/a)^{m_α}`, with `0 < a q^α < π`.

use crate::roots::{build_root_system, Family, Multiplicities, RootError, RootSystem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CartanError {
    #[error("unknown Cartan class '{0}'")]
    UnknownClass(String),
    #[error("class {class} takes {expected}")]
    WrongParameters { class: CartanClass, expected: &'static str },
    #[error("invalid parameters for class {class}: {reason}")]
    InvalidParameters { class: CartanClass, reason: String },
    #[error("point lies on a chamber wall (q·α = 0 for α = {0:?})")]
    Boundary(Vec<i64>),
    #[error("point outside the positive-curvature domain 0 < a q·α < π (α = {alpha:?}, a q·α = {value})")]
    Domain { alpha: Vec<i64>, value: f64 },
    #[error("scale a must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CartanClass {
    A,
    AI,
    AII,
    AIII,
    B,
    C,
    CI,
    CII,
    D,
    DIIIEven,
    DIIIOdd,
    BDI,
}

impl CartanClass {
    pub const ALL: [CartanClass; 12] = [
        CartanClass::A,
        CartanClass::AI,
        CartanClass::AII,
        CartanClass::AIII,
        CartanClass::B,
        CartanClass::C,
        CartanClass::CI,
        CartanClass::CII,
        CartanClass::D,
        CartanClass::DIIIEven,
        CartanClass::DIIIOdd,
        CartanClass::BDI,
    ];

    pub fn label(self) -> &'static str {
        self.row().class
    }

    /// Classes parametrized by a split `(p, q)` rather than a size `N`.
    pub fn takes_split(self) -> bool {
        matches!(self, CartanClass::AIII | CartanClass::CII | CartanClass::BDI)
    }

    /// The symbolic Table-1 row of this class.
    pub fn row(self) -> &'static CatalogRow {
        &CATALOG[self as usize]
    }
}

impl fmt::Display for CartanClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CartanClass {
    type Err = CartanError;
    fn from_str(s: &str) -> Result<Self, CartanError> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        CartanClass::ALL
            .iter()
            .copied()
            .find(|c| c.label().to_ascii_uppercase() == norm)
            .ok_or_else(|| CartanError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Positive,
    Zero,
    Negative,
}

impl Curvature {
    pub fn symbol(self) -> char {
        match self {
            Curvature::Positive => '+',
            Curvature::Zero => '0',
            Curvature::Negative => '-',
        }
    }
}

/// One symbolic row of the classification table, with `N` or `(p, q)` left
/// as parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogRow {
    pub class: &'static str,
    pub compact: &'static str,
    pub noncompact: &'static str,
    pub restricted: &'static str,
    pub m_o: &'static str,
    pub m_l: &'static str,
    pub m_s: &'static str,
    /// Ensemble tags for curvature `+`, `0`, `−`; empty when none is known.
    pub tags: [&'static str; 3],
}

/// The twelve rows in fixed order.
pub const CATALOG: [CatalogRow; 12] = [
    CatalogRow {
        class: "A",
        compact: "SU(N)",
        noncompact: "SL(N,C)/SU(N)",
        restricted: "A_{N-1}",
        m_o: "2",
        m_l: "0",
        m_s: "0",
        tags: ["C+_{2,0,0}", "G0_{2,0,0}", "T-_{2,0,0}"],
    },
    CatalogRow {
        class: "AI",
        compact: "SU(N)/SO(N)",
        noncompact: "SL(N,R)/SO(N)",
        restricted: "A_{N-1}",
        m_o: "1",
        m_l: "0",
        m_s: "0",
        tags: ["C+_{1,0,0}", "G0_{1,0,0}", "T-_{1,0,0}"],
    },
    CatalogRow {
        class: "AII",
        compact: "SU(2N)/USp(2N)",
        noncompact: "SU*(2N)/USp(2N)",
        restricted: "A_{N-1}",
        m_o: "4",
        m_l: "0",
        m_s: "0",
        tags: ["C+_{4,0,0}", "G0_{4,0,0}", "T-_{4,0,0}"],
    },
    CatalogRow {
        class: "AIII",
        compact: "SU(p+q)/SU(p)xSU(q)xU(1)",
        noncompact: "SU(p,q)/SU(p)xSU(q)xU(1)",
        restricted: "BC_q (p>q); C_q (p=q)",
        m_o: "2",
        m_l: "1",
        m_s: "2(p-q)",
        tags: ["S+_{2,1,0} (p=q)", "chi0_{2,1,2nu}", "T-_{2,1,0} (p=q)"],
    },
    CatalogRow {
        class: "B",
        compact: "SO(2N+1)",
        noncompact: "SO(2N+1,C)/SO(2N+1)",
        restricted: "B_N",
        m_o: "2",
        m_l: "0",
        m_s: "2",
        tags: ["", "P0_{2,0,2}", ""],
    },
    CatalogRow {
        class: "C",
        compact: "USp(2N)",
        noncompact: "Sp(2N,C)/USp(2N)",
        restricted: "C_N",
        m_o: "2",
        m_l: "2",
        m_s: "0",
        tags: ["B+_{2,2,0}", "B0_{2,2,0}", "T-_{2,2,0}"],
    },
    CatalogRow {
        class: "CI",
        compact: "USp(2N)/SU(N)xU(1)",
        noncompact: "Sp(2N,R)/SU(N)xU(1)",
        restricted: "C_N",
        m_o: "1",
        m_l: "1",
        m_s: "0",
        tags: ["B+_{1,1,0}", "B0_{1,1,0}", "T-_{1,1,0}"],
    },
    CatalogRow {
        class: "CII",
        compact: "USp(2p+2q)/USp(2p)xUSp(2q)",
        noncompact: "USp(2p,2q)/USp(2p)xUSp(2q)",
        restricted: "BC_q (p>q); C_q (p=q)",
        m_o: "4",
        m_l: "3",
        m_s: "4(p-q)",
        tags: ["", "chi0_{4,3,4nu}", "T-_{4,3,0} (p=q)"],
    },
    CatalogRow {
        class: "D",
        compact: "SO(2N)",
        noncompact: "SO(2N,C)/SO(2N)",
        restricted: "D_N",
        m_o: "2",
        m_l: "0",
        m_s: "0",
        tags: ["B+_{2,0,0}", "B0_{2,0,0}", "T-_{2,0,0}"],
    },
    CatalogRow {
        class: "DIII-even",
        compact: "SO(4N)/SU(2N)xU(1)",
        noncompact: "SO*(4N)/SU(2N)xU(1)",
        restricted: "C_N",
        m_o: "4",
        m_l: "1",
        m_s: "0",
        tags: ["B+_{4,1,0}", "B0_{4,1,0}", "T-_{4,1,0}"],
    },
    CatalogRow {
        class: "DIII-odd",
        compact: "SO(4N+2)/SU(2N+1)xU(1)",
        noncompact: "SO*(4N+2)/SU(2N+1)xU(1)",
        restricted: "BC_N",
        m_o: "4",
        m_l: "1",
        m_s: "4",
        tags: ["", "P0_{4,1,4}", ""],
    },
    CatalogRow {
        class: "BDI",
        compact: "SO(p+q)/SO(p)xSO(q)",
        noncompact: "SO(p,q)/SO(p)xSO(q)",
        restricted: "B_q (p>q); D_q (p=q)",
        m_o: "1",
        m_l: "0",
        m_s: "p-q",
        tags: ["", "chi0_{1,0,nu}", "T-_{1,0,0} (p=q)"],
    },
];

/// Size parameter of a class: `N` or the split `(p, q)` with `p ≥ q ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassParams {
    Size(usize),
    Split { p: usize, q: usize },
}

/// One member of a curvature triplet with concrete rank and multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricSpaceEntry {
    pub cartan_class: CartanClass,
    pub compact_name: String,
    pub noncompact_name: String,
    pub restricted_family: Family,
    pub rank: usize,
    pub multiplicities: Multiplicities,
    pub curvature: Curvature,
    /// Display-only ensemble tag; `None` where no realization is listed.
    pub ensemble_tag: Option<String>,
}

/// Laguerre/Jacobi weight parameters of a boundary ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParameters {
    /// `α = m_s + m_l`.
    pub boundary_index: f64,
    /// `λ = ρ = (m_s + m_l − 1)/2`.
    pub lambda: f64,
    /// `σ = (m_l − 1)/2`.
    pub sigma: f64,
}

impl SymmetricSpaceEntry {
    pub fn root_system(&self) -> Result<RootSystem, CartanError> {
        Ok(build_root_system(
            self.restricted_family,
            self.rank,
            self.multiplicities,
        )?)
    }

    /// The name of the space itself at this curvature.
    pub fn space_name(&self) -> String {
        match self.curvature {
            Curvature::Positive => self.compact_name.clone(),
            Curvature::Negative => self.noncompact_name.clone(),
            Curvature::Zero => format!("tangent space of {}", self.compact_name),
        }
    }

    pub fn boundary_parameters(&self) -> BoundaryParameters {
        let m = self.multiplicities;
        let a = f64::from(m.short + m.long);
        BoundaryParameters {
            boundary_index: a,
            lambda: 0.5 * (a - 1.0),
            sigma: 0.5 * (f64::from(m.long) - 1.0),
        }
    }
}

/// Returns the `{+, 0, −}` triplet for a class at the given size.
pub fn catalog_lookup(class: CartanClass, params: ClassParams) -> Result<[SymmetricSpaceEntry; 3], CartanError> {
    use CartanClass as K;
    let row = class.row();
    let (family, rank, mult, equal) = match (class, params) {
        (K::AIII | K::CII | K::BDI, ClassParams::Split { p, q }) => {
            if q == 0 || p < q {
                return Err(CartanError::InvalidParameters {
                    class,
                    reason: format!("need p >= q >= 1, got (p,q) = ({p},{q})"),
                });
            }
            let nu = (p - q) as u32;
            let eq = p == q;
            let (fam, m) = match class {
                K::AIII => (
                    if eq { Family::C } else { Family::BC },
                    Multiplicities::new(2, 1, 2 * nu),
                ),
                K::CII => (
                    if eq { Family::C } else { Family::BC },
                    Multiplicities::new(4, 3, 4 * nu),
                ),
                _ => (if eq { Family::D } else { Family::B }, Multiplicities::new(1, 0, nu)),
            };
            (fam, q, m, eq)
        }
        (K::AIII | K::CII | K::BDI, ClassParams::Size(_)) => {
            return Err(CartanError::WrongParameters {
                class,
                expected: "a split (p, q)",
            })
        }
        (_, ClassParams::Split { .. }) => {
            return Err(CartanError::WrongParameters {
                class,
                expected: "a size N",
            })
        }
        (_, ClassParams::Size(n)) => {
            let min = match class {
                K::A | K::AI | K::AII | K::D => 2,
                _ => 1,
            };
            if n < min {
                return Err(CartanError::InvalidParameters {
                    class,
                    reason: format!("need N >= {min}, got {n}"),
                });
            }
            let (fam, rank, m) = match class {
                K::A => (Family::A, n - 1, Multiplicities::new(2, 0, 0)),
                K::AI => (Family::A, n - 1, Multiplicities::new(1, 0, 0)),
                K::AII => (Family::A, n - 1, Multiplicities::new(4, 0, 0)),
                K::B => (Family::B, n, Multiplicities::new(2, 0, 2)),
                K::C => (Family::C, n, Multiplicities::new(2, 2, 0)),
                K::CI => (Family::C, n, Multiplicities::new(1, 1, 0)),
                K::D => (Family::D, n, Multiplicities::new(2, 0, 0)),
                K::DIIIEven => (Family::C, n, Multiplicities::new(4, 1, 0)),
                K::DIIIOdd => (Family::BC, n, Multiplicities::new(4, 1, 4)),
                _ => unreachable!("split classes handled above"),
            };
            (fam, rank, m, true)
        }
    };
    build_root_system(family, rank, mult)?;
    let tag = |i: usize| -> Option<String> {
        let t = row.tags[i];
        if t.is_empty() {
            return None;
        }
        match t.strip_suffix(" (p=q)") {
            Some(base) => equal.then(|| base.to_string()),
            None => Some(t.to_string()),
        }
    };
    let entry = |curvature: Curvature, i: usize| SymmetricSpaceEntry {
        cartan_class: class,
        compact_name: row.compact.to_string(),
        noncompact_name: row.noncompact.to_string(),
        restricted_family: family,
        rank,
        multiplicities: mult,
        curvature,
        ensemble_tag: tag(i),
    };
    Ok([
        entry(Curvature::Positive, 0),
        entry(Curvature::Zero, 1),
        entry(Curvature::Negative, 2),
    ])
}

/// `ln |sinh y|` without overflow.
fn ln_sinh(y: f64) -> f64 {
    let y = y.abs();
    if y > 20.0 {
        y - std::f64::consts::LN_2 + (-2.0 * y).exp().ln_1p()
    } else {
        y.sinh().ln()
    }
}

/// A root system with a curvature sign and scale: everything needed for the
/// radial Jacobian.
#[derive(Debug, Clone)]
pub struct RadialGeometry {
    pub roots: RootSystem,
    pub curvature: Curvature,
    pub scale: f64,
}

impl RadialGeometry {
    pub fn new(roots: RootSystem, curvature: Curvature, scale: f64) -> Result<Self, CartanError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(CartanError::BadScale(scale));
        }
        Ok(RadialGeometry {
            roots,
            curvature,
            scale,
        })
    }

    pub fn from_entry(entry: &SymmetricSpaceEntry, scale: f64) -> Result<Self, CartanError> {
        Self::new(entry.root_system()?, entry.curvature, scale)
    }

    pub fn dim(&self) -> usize {
        self.roots.dim()
    }

    /// `ln J(q)`. Zero and negative curvature use `|q^α|`, so the value is
    /// Weyl invariant; positive curvature requires `0 < a q^α < π`.
    pub fn log_jacobian(&self, q: &[f64]) -> Result<f64, CartanError> {
        if q.len() != self.dim() {
            return Err(RootError::Dimension {
                expected: self.dim(),
                got: q.len(),
            }
            .into());
        }
        let a = self.scale;
        let mut acc = 0.0;
        for r in self.roots.positive_roots() {
            let x: f64 = q.iter().zip(&r.vector).map(|(qi, ai)| qi * *ai as f64).sum();
            if x == 0.0 {
                return Err(CartanError::Boundary(r.vector.clone()));
            }
            if self.curvature == Curvature::Positive {
                let y = a * x;
                if !(y > 0.0 && y < PI) {
                    return Err(CartanError::Domain {
                        alpha: r.vector.clone(),
                        value: y,
                    });
                }
            }
            if r.multiplicity == 0 {
                continue;
            }
            let m = f64::from(r.multiplicity);
            let term = match self.curvature {
                Curvature::Zero => x.abs().ln(),
                Curvature::Negative => ln_sinh(a * x) - a.ln(),
                Curvature::Positive => (a * x).sin().ln() - a.ln(),
            };
            acc += m * term;
        }
        Ok(acc)
    }

    pub fn jacobian(&self, q: &[f64]) -> Result<f64, CartanError> {
        self.log_jacobian(q).map(f64::exp)
    }

    /// Whether `q` is inside the open chamber (and the positive-curvature cell).
    pub fn contains(&self, q: &[f64]) -> bool {
        self.roots.positive_roots().iter().all(|r| {
            let x: f64 = q.iter().zip(&r.vector).map(|(qi, ai)| qi * *ai as f64).sum();
            x > 0.0 && (self.curvature != Curvature::Positive || self.scale * x < PI)
        })
    }
}

/// `J(q)` for a catalog entry at scale `a`.
pub fn radial_jacobian(entry: &SymmetricSpaceEntry, q: &[f64], a: f64) -> Result<f64, CartanError> {
    RadialGeometry::from_entry(entry, a)?.jacobian(q)
}

/// A uniform tensor grid: node `k` on axis `i` sits at `lo_i + k h_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    lo: Vec<f64>,
    h: Vec<f64>,
    shape: Vec<usize>,
}

impl RadialGrid {
    pub fn new(lo: Vec<f64>, h: Vec<f64>, shape: Vec<usize>) -> Result<Self, CartanError> {
        if lo.is_empty() || lo.len() != h.len() || lo.len() != shape.len() {
            return Err(CartanError::Grid(
                "lo, h and shape must have equal non-zero length".into(),
            ));
        }
        if h.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || lo.iter().any(|x| !x.is_finite()) {
            return Err(CartanError::Grid("spacings must be positive and finite".into()));
        }
        if shape.iter().any(|n| *n < 3) {
            return Err(CartanError::Grid("need at least 3 nodes per axis".into()));
        }
        Ok(RadialGrid { lo, h, shape })
    }

    /// Grid spanning `[lo_i, hi_i]` with spacing as close to `h` as the
    /// box allows (hi is hit exactly).
    pub fn spanning(lo: &[f64], hi: &[f64], h: f64) -> Result<Self, CartanError> {
        let mut hs = Vec::with_capacity(lo.len());
        let mut shape = Vec::with_capacity(lo.len());
        for (a, b) in lo.iter().zip(hi) {
            let n = ((b - a) / h).round().max(2.0) as usize;
            hs.push((b - a) / n as f64);
            shape.push(n + 1);
        }
        Self::new(lo.to_vec(), hs, shape)
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.ndim()];
        for i in (0..self.ndim().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.shape[i + 1];
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for i in (0..self.ndim()).rev() {
            idx[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(i, k)| self.lo[i] + *k as f64 * self.h[i])
            .collect()
    }

    /// The grid with one node removed at both ends of every axis.
    pub fn shrink(&self) -> Result<RadialGrid, CartanError> {
        RadialGrid::new(
            self.lo.iter().zip(&self.h).map(|(l, h)| l + h).collect(),
            self.h.clone(),
            self.shape.iter().map(|n| n.saturating_sub(2)).collect(),
        )
    }

    /// The `2^n` corners of the box.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.ndim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        let k = if mask >> i & 1 == 1 { self.shape[i] - 1 } else { 0 };
                        self.lo[i] + k as f64 * self.h[i]
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGridFunction {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialGridFunction {
    pub fn from_fn<F: Fn(&[f64]) -> f64 + Sync>(grid: RadialGrid, f: F) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|k| f(&grid.point(k))).collect();
        RadialGridFunction { grid, values }
    }

    /// Values restricted to the shrunken grid.
    pub fn interior(&self) -> Result<RadialGridFunction, CartanError> {
        let inner = self.grid.shrink()?;
        let strides = self.grid.strides();
        let values = (0..inner.len())
            .map(|k| {
                let idx = inner.multi_index(k);
                idx.iter().zip(&strides).map(|(i, s)| (i + 1) * s).sum::<usize>()
            })
            .map(|flat| self.values[flat])
            .collect();
        Ok(RadialGridFunction { grid: inner, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn check_box(geom: &RadialGeometry, grid: &RadialGrid) -> Result<(), CartanError> {
    if grid.ndim() != geom.dim() {
        return Err(CartanError::Grid(format!(
            "grid has {} axes, geometry needs {}",
            grid.ndim(),
            geom.dim()
        )));
    }
    // The chamber (and the positive-curvature cell) is convex, so checking
    // the corners covers every node and stencil midpoint.
    for c in grid.corners() {
        if !geom.contains(&c) {
            return Err(CartanError::Grid(format!(
                "box corner {c:?} touches or leaves the open Weyl chamber"
            )));
        }
    }
    Ok(())
}

/// `Σ_i J⁻¹ ∂_i (J ∂_i f)` by the conservative central stencil with `J` at
/// half-integer nodes. The result lives on the shrunken grid.
pub fn radial_laplace_beltrami(
    geom: &RadialGeometry,
    f: &RadialGridFunction,
) -> Result<RadialGridFunction, CartanError> {
    let grid = &f.grid;
    check_box(geom, grid)?;
    let inner = grid.shrink()?;
    let strides = grid.strides();
    let n = grid.ndim();
    let values: Result<Vec<f64>, CartanError> = (0..inner.len())
        .into_par_iter()
        .map(|k| {
            let idx: Vec<usize> = inner.multi_index(k).iter().map(|i| i + 1).collect();
            let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
            let q: Vec<f64> = (0..n).map(|i| grid.lo[i] + idx[i] as f64 * grid.h[i]).collect();
            let lj0 = geom.log_jacobian(&q)?;
            let f0 = f.values[flat];
            let mut acc = 0.0;
            let mut qm = q.clone();
            for i in 0..n {
                let h = grid.h[i];
                qm[i] = q[i] + 0.5 * h;
                let jp = (geom.log_jacobian(&qm)? - lj0).exp();
                qm[i] = q[i] - 0.5 * h;
                let jm = (geom.log_jacobian(&qm)? - lj0).exp();
                qm[i] = q[i];
                let fp = f.values[flat + strides[i]];
                let fm = f.values[flat - strides[i]];
                acc += (jp * (fp - f0) - jm * (f0 - fm)) / (h * h);
            }
            Ok(acc)
        })
        .collect();
    Ok(RadialGridFunction {
        grid: inner,
        values: values?,
    })
}

/// `Σ_i ∂_i² f` by the plain central stencil on the shrunken grid.
pub fn flat_laplacian(f: &RadialGridFunction) -> Result<RadialGridFunction, CartanError> {
    let grid = &f.grid;
    let inner = grid.shrink()?;
    let strides = grid.strides();
    let values = (0..inner.len())
        .into_par_iter()
        .map(|k| {
            let flat: usize = inner
                .multi_index(k)
                .iter()
                .zip(&strides)
                .map(|(i, s)| (i + 1) * s)
                .sum();
            let f0 = f.values[flat];
            (0..grid.ndim())
                .map(|i| {
                    (f.values[flat + strides[i]] - 2.0 * f0 + f.values[flat - strides[i]]) / (grid.h[i] * grid.h[i])
                })
                .sum()
        })
        .collect();
    Ok(RadialGridFunction { grid: inner, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_examples() {
        let t = catalog_lookup(CartanClass::AIII, ClassParams::Split { p: 5, q: 3 }).unwrap();
        assert_eq!(t[0].restricted_family, Family::BC);
        assert_eq!(t[0].rank, 3);
        assert_eq!(t[0].multiplicities, Multiplicities::new(2, 1, 4));
        assert_eq!(t[1].ensemble_tag.as_deref(), Some("chi0_{2,1,2nu}"));
        assert_eq!(t[0].ensemble_tag, None);
        let t = catalog_lookup(CartanClass::AI, ClassParams::Size(4)).unwrap();
        assert_eq!((t[0].restricted_family, t[0].rank), (Family::A, 3));
        assert_eq!(t[0].multiplicities, Multiplicities::new(1, 0, 0));
        let t = catalog_lookup(CartanClass::CII, ClassParams::Split { p: 2, q: 2 }).unwrap();
        assert_eq!((t[0].restricted_family, t[0].rank), (Family::C, 2));
        assert_eq!(t[0].multiplicities, Multiplicities::new(4, 3, 0));
        assert_eq!(t[2].ensemble_tag.as_deref(), Some("T-_{4,3,0}"));
        let curv: Vec<Curvature> = t.iter().map(|e| e.curvature).collect();
        assert_eq!(curv, vec![Curvature::Positive, Curvature::Zero, Curvature::Negative]);
    }

    #[test]
    fn lookup_errors() {
        assert!(matches!(
            "XYZ".parse::<CartanClass>(),
            Err(CartanError::UnknownClass(_))
        ));
        assert_eq!("diii_even".parse::<CartanClass>().unwrap(), CartanClass::DIIIEven);
        assert!(catalog_lookup(CartanClass::AIII, ClassParams::Split { p: 2, q: 3 }).is_err());
        assert!(catalog_lookup(CartanClass::BDI, ClassParams::Size(3)).is_err());
        assert!(catalog_lookup(CartanClass::C, ClassParams::Split { p: 3, q: 3 }).is_err());
        assert!(catalog_lookup(CartanClass::A, ClassParams::Size(1)).is_err());
    }

    #[test]
    fn ci_boundary_parameters() {
        let t = catalog_lookup(CartanClass::CI, ClassParams::Size(3)).unwrap();
        let b = t[1].boundary_parameters();
        assert_eq!((b.boundary_index, b.lambda, b.sigma), (1.0, 0.0, 0.0));
    }

    #[test]
    fn transfer_jacobian_matches_sinh_squares() {
        let beta = 2u32;
        let rs = build_root_system(Family::C, 3, Multiplicities::new(beta, 1, 0)).unwrap();
        let g = RadialGeometry::new(rs, Curvature::Negative, 1.0).unwrap();
        let q: [f64; 3] = [1.7, 0.9, 0.3];
        let mut want = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d: f64 = q[i].sinh().powi(2) - q[j].sinh().powi(2);
                want += f64::from(beta) * d.abs().ln();
            }
            want += (2.0 * q[i]).sinh().ln();
        }
        assert!((g.log_jacobian(&q).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn flat_a_jacobian() {
        let rs = build_root_system(Family::A, 2, Multiplicities::new(2, 0, 0)).unwrap();
        let g = RadialGeometry::new(rs, Curvature::Zero, 1.0).unwrap();
        let q = [2.0, 0.5, -1.0];
        let want: f64 = (1.5f64 * 3.0 * 1.5).powi(2);
        assert!((g.jacobian(&q).unwrap() - want).abs() < 1e-12 * want);
        assert!(matches!(g.jacobian(&[1.0, 1.0, 0.0]), Err(CartanError::Boundary(_))));
    }

    #[test]
    fn positive_domain_enforced() {
        let rs = build_root_system(Family::B, 1, Multiplicities::new(0, 0, 1)).unwrap();
        let g = RadialGeometry::new(rs, Curvature::Positive, 1.0).unwrap();
        assert!((g.jacobian(&[1.0]).unwrap() - 1f64.sin()).abs() < 1e-15);
        assert!(matches!(g.jacobian(&[3.5]), Err(CartanError::Domain { .. })));
        assert!(RadialGeometry::new(g.roots.clone(), Curvature::Zero, 0.0).is_err());
    }

    #[test]
    fn constant_is_annihilated() {
        let rs = build_root_system(Family::C, 2, Multiplicities::new(2, 1, 0)).unwrap();
        let g = RadialGeometry::new(rs, Curvature::Negative, 1.0).unwrap();
        let grid = RadialGrid::spanning(&[1.0, 0.2], &[1.6, 0.7], 0.05).unwrap();
        let f = RadialGridFunction::from_fn(grid, |_| 3.0);
        let out = radial_laplace_beltrami(&g, &f).unwrap();
        assert!(out.max_abs() < 1e-9);
    }

    #[test]
    fn grid_touching_wall_rejected() {
        let rs = build_root_system(Family::C, 2, Multiplicities::new(2, 1, 0)).unwrap();
        let g = RadialGeometry::new(rs, Curvature::Negative, 1.0).unwrap();
        let grid = RadialGrid::spanning(&[0.5, 0.0], &[1.0, 0.4], 0.05).unwrap();
        let f = RadialGridFunction::from_fn(grid, |_| 1.0);
        assert!(matches!(radial_laplace_beltrami(&g, &f), Err(CartanError::Grid(_))));
    }
}
