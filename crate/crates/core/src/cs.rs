//! Calogero–Sutherland Hamiltonians built on a root system, and a grid check
//! of their identification with radial Laplace–Beltrami operators.
//!
//! `H = −½ Σ ∂_i² + Σ_{α>0} g_α² v(q^α)` with `v(ξ) = ξ⁻²`, `sinh⁻² ξ` or
//! `sin⁻² ξ`. At the root values `g_α² = m_α(m_α + 2m_{2α} − 2)|α|²/8` one has
//!
//! `H = −J^{1/2} · ½(Δ_B + c ρ²) · J^{−1/2}`,
//!
//! where `Δ_B` is the radial Laplace–Beltrami operator at unit scale on the
//! matching curvature (flat for `ξ⁻²`, negative for `sinh⁻²`, positive for
//! `sin⁻²`) and `c = 0, +1, −1` respectively. The leading minus sign makes
//! both sides positive operators. `m_{2α}` is taken as 0 whenever `2α` is not
//! a root, which only matters for BC.

use crate::cartan::{radial_laplace_beltrami, CartanError, Curvature, RadialGeometry, RadialGrid, RadialGridFunction};
use crate::quad::loglog_slope;
use crate::roots::{q_dot_alpha, rho_vector, RootError, RootKind, RootSystem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CsError {
    #[error("potential is singular at {point:?} (root {alpha:?})")]
    Singular { point: Vec<f64>, alpha: Vec<i64> },
    #[error("mapping undefined off root values: {kind} coupling is {given}, root value is {expected}")]
    OffRootValues { kind: RootKind, given: f64, expected: f64 },
    #[error("convergence study: {0}")]
    Convergence(String),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialType {
    /// `ξ⁻²`
    I,
    /// `sinh⁻² ξ`
    II,
    /// `sin⁻² ξ`
    III,
}

impl PotentialType {
    pub fn v(self, xi: f64) -> f64 {
        match self {
            PotentialType::I => xi.powi(-2),
            PotentialType::II => xi.sinh().powi(-2),
            PotentialType::III => xi.sin().powi(-2),
        }
    }

    fn singular(self, xi: f64) -> bool {
        match self {
            PotentialType::I | PotentialType::II => xi.abs() < 1e-12,
            PotentialType::III => xi.sin().abs() < 1e-12,
        }
    }

    pub fn curvature(self) -> Curvature {
        match self {
            PotentialType::I => Curvature::Zero,
            PotentialType::II => Curvature::Negative,
            PotentialType::III => Curvature::Positive,
        }
    }

    /// Sign `c` of the `ρ²` shift.
    pub fn rho_sign(self) -> f64 {
        match self {
            PotentialType::I => 0.0,
            PotentialType::II => 1.0,
            PotentialType::III => -1.0,
        }
    }
}

/// One coupling per root kind; Weyl-equivalent roots share a kind, so the
/// couplings are Weyl invariant by construction. Negative values are valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub ordinary: f64,
    pub long: f64,
    pub short: f64,
}

impl Couplings {
    pub fn of(&self, kind: RootKind) -> f64 {
        match kind {
            RootKind::Ordinary => self.ordinary,
            RootKind::Long => self.long,
            RootKind::Short => self.short,
        }
    }
}

/// `g_α² = m_α(m_α + 2m_{2α} − 2)|α|²/8` per kind; kinds absent from the
/// family get 0.
pub fn root_value_couplings(rs: &RootSystem) -> Couplings {
    let mut g = Couplings {
        ordinary: 0.0,
        long: 0.0,
        short: 0.0,
    };
    for kind in [RootKind::Ordinary, RootKind::Long, RootKind::Short] {
        if let Some(r) = rs.positive_roots().iter().find(|r| r.kind == kind) {
            let m = f64::from(r.multiplicity);
            let m2 = f64::from(rs.doubled_multiplicity(&r.vector));
            let value = m * (m + 2.0 * m2 - 2.0) * r.norm2() as f64 / 8.0;
            match kind {
                RootKind::Ordinary => g.ordinary = value,
                RootKind::Long => g.long = value,
                RootKind::Short => g.short = value,
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsModel {
    pub root_system: RootSystem,
    pub potential: PotentialType,
    pub couplings: Couplings,
}

impl CsModel {
    pub fn new(root_system: RootSystem, potential: PotentialType, couplings: Couplings) -> Self {
        CsModel {
            root_system,
            potential,
            couplings,
        }
    }

    pub fn at_root_values(root_system: RootSystem, potential: PotentialType) -> Self {
        let couplings = root_value_couplings(&root_system);
        Self::new(root_system, potential, couplings)
    }

    /// `Σ_{α>0} g_α² v(q^α)`.
    pub fn potential_at(&self, q: &[f64]) -> Result<f64, CsError> {
        let mut acc = 0.0;
        for r in self.root_system.positive_roots() {
            let xi = q_dot_alpha(q, &r.vector)?;
            if self.potential.singular(xi) {
                return Err(CsError::Singular {
                    point: q.to_vec(),
                    alpha: r.vector.clone(),
                });
            }
            acc += self.couplings.of(r.kind) * self.potential.v(xi);
        }
        Ok(acc)
    }

    /// Error unless every coupling equals its root value (relative 1e−12).
    pub fn check_root_values(&self) -> Result<(), CsError> {
        let expected = root_value_couplings(&self.root_system);
        for kind in [RootKind::Ordinary, RootKind::Long, RootKind::Short] {
            let (g, e) = (self.couplings.of(kind), expected.of(kind));
            if (g - e).abs() > 1e-12 * e.abs().max(1.0) {
                return Err(CsError::OffRootValues {
                    kind,
                    given: g,
                    expected: e,
                });
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<RadialGeometry, CsError> {
        Ok(RadialGeometry::new(
            self.root_system.clone(),
            self.potential.curvature(),
            1.0,
        )?)
    }
}

/// `Hf` on the shrunken grid: central second differences plus the potential.
pub fn cs_apply(model: &CsModel, f: &RadialGridFunction) -> Result<RadialGridFunction, CsError> {
    let lap = crate::cartan::flat_laplacian(f)?;
    let fi = f.interior()?;
    let values: Result<Vec<f64>, CsError> = (0..lap.grid.len())
        .into_par_iter()
        .map(|k| {
            let q = lap.grid.point(k);
            Ok(-0.5 * lap.values[k] + model.potential_at(&q)? * fi.values[k])
        })
        .collect();
    Ok(RadialGridFunction {
        grid: lap.grid,
        values: values?,
    })
}

/// Both sides of the mapping on the shrunken grid.
#[derive(Debug, Clone)]
pub struct MappingSides {
    pub f: RadialGridFunction,
    /// `H f`
    pub lhs: RadialGridFunction,
    /// `−J^{1/2} · ½(Δ_B + c ρ²) · J^{−1/2} f`
    pub rhs: RadialGridFunction,
}

impl MappingSides {
    /// `max |lhs − rhs| / max(max|lhs|, max|f|)`.
    pub fn residual(&self) -> f64 {
        let scale = self.lhs.max_abs().max(self.f.max_abs());
        let diff = self
            .lhs
            .values
            .iter()
            .zip(&self.rhs.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        diff / scale
    }
}

pub fn mapping_sides(model: &CsModel, f: &RadialGridFunction) -> Result<MappingSides, CsError> {
    model.check_root_values()?;
    let geom = model.geometry()?;
    let lhs = cs_apply(model, f)?;
    let ljs: Result<Vec<f64>, CartanError> = (0..f.grid.len())
        .into_par_iter()
        .map(|k| geom.log_jacobian(&f.grid.point(k)))
        .collect();
    let ljs = ljs?;
    let g = RadialGridFunction {
        grid: f.grid.clone(),
        values: f.values.iter().zip(&ljs).map(|(v, l)| v * (-0.5 * l).exp()).collect(),
    };
    let lb = radial_laplace_beltrami(&geom, &g)?;
    let rho2: f64 = rho_vector(&model.root_system).iter().map(|x| x * x).sum();
    let shift = 0.5 * model.potential.rho_sign() * rho2;
    let fi = f.interior()?;
    let values: Result<Vec<f64>, CartanError> = (0..lb.grid.len())
        .into_par_iter()
        .map(|k| {
            let lj = geom.log_jacobian(&lb.grid.point(k))?;
            Ok(-0.5 * (0.5 * lj).exp() * lb.values[k] - shift * fi.values[k])
        })
        .collect();
    let rhs = RadialGridFunction {
        grid: lb.grid,
        values: values?,
    };
    Ok(MappingSides { f: fi, lhs, rhs })
}

/// Max relative difference between `H f` and the conjugated radial operator.
pub fn op_mapping_residual(model: &CsModel, f: &RadialGridFunction) -> Result<f64, CsError> {
    Ok(mapping_sides(model, f)?.residual())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingConvergence {
    pub h: Vec<f64>,
    pub residual: Vec<f64>,
    pub slope: f64,
}

/// Residuals on the box `[lo, hi]` for each spacing in `hs` (coarsest
/// first, each dividing the previous). All residuals are measured at the
/// interior nodes of the coarsest grid, so they compare the same points.
pub fn mapping_convergence<F>(
    model: &CsModel,
    lo: &[f64],
    hi: &[f64],
    hs: &[f64],
    f: F,
) -> Result<MappingConvergence, CsError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if hs.len() < 2 {
        return Err(CsError::Convergence("need at least two spacings".into()));
    }
    let coarse = RadialGrid::spanning(lo, hi, hs[0])?;
    let mut residual = Vec::with_capacity(hs.len());
    let mut h_used = Vec::with_capacity(hs.len());
    for &h in hs {
        let grid = RadialGrid::spanning(lo, hi, h)?;
        let ratios: Vec<usize> = grid
            .shape()
            .iter()
            .zip(coarse.shape())
            .map(|(nf, nc)| (nf - 1) / (nc - 1))
            .collect();
        let nested = grid
            .shape()
            .iter()
            .zip(coarse.shape())
            .zip(&ratios)
            .all(|((nf, nc), r)| *r >= 1 && (nc - 1) * r == nf - 1);
        if !nested {
            return Err(CsError::Convergence(format!("spacing {h} does not nest in {}", hs[0])));
        }
        let sides = mapping_sides(model, &RadialGridFunction::from_fn(grid.clone(), &f))?;
        let inner = coarse.shrink()?;
        let fine_inner = sides.lhs.grid.clone();
        let strides = fine_inner.strides();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..inner.len() {
            // Coarse interior index i maps to fine full index (i + 1)·r, so
            // fine interior index (i + 1)·r − 1.
            let flat: usize = inner
                .multi_index(k)
                .iter()
                .zip(&ratios)
                .zip(&strides)
                .map(|((i, r), s)| ((i + 1) * r - 1) * s)
                .sum();
            diff = diff.max((sides.lhs.values[flat] - sides.rhs.values[flat]).abs());
            scale = scale.max(sides.lhs.values[flat].abs()).max(sides.f.values[flat].abs());
        }
        residual.push(diff / scale);
        h_used.push(grid.spacing().iter().cloned().fold(0.0, f64::max));
    }
    let slope = loglog_slope(&h_used, &residual);
    Ok(MappingConvergence {
        h: h_used,
        residual,
        slope,
    })
}
