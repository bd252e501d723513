//! Classical root systems A, B, C, D and BC with per-kind multiplicities.
//!
//! Roots are stored as exact integer vectors. The ambient dimension equals the
//! rank, except for the A family where `A_{n-1}` lives in `n` coordinates.
//! Positive roots follow the "first non-zero component is positive" convention
//! and the Weyl chamber is the descending one, `q_1 > q_2 > ... (> 0)`.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RootError {
    #[error("rank must be at least 1 (A family needs at least 2 coordinates)")]
    InvalidRank,
    #[error("non-zero multiplicity {value} for {kind} roots, which are absent from family {family}")]
    AbsentKind { family: Family, kind: RootKind, value: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("zero-length root")]
    ZeroRoot,
    #[error("vector {0:?} is not a root of the system")]
    NotARoot(Vec<i64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    BC,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::BC => "BC",
        };
        f.write_str(s)
    }
}

impl Family {
    /// Whether roots of `kind` occur in this family at all.
    pub fn has_kind(self, kind: RootKind) -> bool {
        match kind {
            RootKind::Ordinary => true,
            RootKind::Short => matches!(self, Family::B | Family::BC),
            RootKind::Long => matches!(self, Family::C | Family::BC),
        }
    }

    /// Number of coordinates used for a system of the given rank.
    pub fn ambient_dim(self, rank: usize) -> usize {
        match self {
            Family::A => rank + 1,
            _ => rank,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootKind {
    Short,
    Ordinary,
    Long,
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootKind::Short => "short",
            RootKind::Ordinary => "ordinary",
            RootKind::Long => "long",
        };
        f.write_str(s)
    }
}

impl RootKind {
    /// Kind from the squared length of an integer root: 1, 2 or 4.
    pub fn from_norm2(n2: i64) -> Option<RootKind> {
        match n2 {
            1 => Some(RootKind::Short),
            2 => Some(RootKind::Ordinary),
            4 => Some(RootKind::Long),
            _ => None,
        }
    }
}

/// Multiplicities `(m_o, m_l, m_s)` of ordinary, long and short roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiplicities {
    pub ordinary: u32,
    pub long: u32,
    pub short: u32,
}

impl Multiplicities {
    pub const fn new(ordinary: u32, long: u32, short: u32) -> Self {
        Multiplicities { ordinary, long, short }
    }

    pub fn of(&self, kind: RootKind) -> u32 {
        match kind {
            RootKind::Ordinary => self.ordinary,
            RootKind::Long => self.long,
            RootKind::Short => self.short,
        }
    }
}

impl fmt::Display for Multiplicities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.ordinary, self.long, self.short)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    pub vector: Vec<i64>,
    pub kind: RootKind,
    pub multiplicity: u32,
}

impl Root {
    pub fn norm2(&self) -> i64 {
        self.vector.iter().map(|x| x * x).sum()
    }
}

/// A family, a rank and the explicit list of positive roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RootSystemSpec", try_from = "RootSystemSpec")]
pub struct RootSystem {
    family: Family,
    rank: usize,
    multiplicities: Multiplicities,
    positive_roots: Vec<Root>,
}

/// Serialized form of a [`RootSystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootSystemSpec {
    pub family: Family,
    pub rank: usize,
    pub multiplicities: Multiplicities,
}

impl From<RootSystem> for RootSystemSpec {
    fn from(rs: RootSystem) -> Self {
        RootSystemSpec {
            family: rs.family,
            rank: rs.rank,
            multiplicities: rs.multiplicities,
        }
    }
}

impl TryFrom<RootSystemSpec> for RootSystem {
    type Error = RootError;
    fn try_from(s: RootSystemSpec) -> Result<Self, RootError> {
        build_root_system(s.family, s.rank, s.multiplicities)
    }
}

fn unit(dim: usize, i: usize, scale: i64) -> Vec<i64> {
    let mut v = vec![0; dim];
    v[i] = scale;
    v
}

fn pair(dim: usize, i: usize, j: usize, sign: i64) -> Vec<i64> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v[j] = sign;
    v
}

/// Builds the positive roots of `family` at `rank`, tagging each with its
/// kind's multiplicity.
///
/// A multiplicity must be zero for a kind the family does not contain. The
/// check is per family, so rank-1 B, C and BC systems still accept `m_o`.
pub fn build_root_system(family: Family, rank: usize, multiplicities: Multiplicities) -> Result<RootSystem, RootError> {
    if rank == 0 {
        return Err(RootError::InvalidRank);
    }
    for kind in [RootKind::Ordinary, RootKind::Long, RootKind::Short] {
        let m = multiplicities.of(kind);
        if m != 0 && !family.has_kind(kind) {
            return Err(RootError::AbsentKind { family, kind, value: m });
        }
    }
    let dim = family.ambient_dim(rank);
    let mut vectors = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            vectors.push(pair(dim, i, j, -1));
            if family != Family::A {
                vectors.push(pair(dim, i, j, 1));
            }
        }
    }
    if family.has_kind(RootKind::Short) {
        vectors.extend((0..dim).map(|i| unit(dim, i, 1)));
    }
    if family.has_kind(RootKind::Long) {
        vectors.extend((0..dim).map(|i| unit(dim, i, 2)));
    }
    let positive_roots = vectors
        .into_iter()
        .map(|vector| {
            let n2 = vector.iter().map(|x| x * x).sum();
            let kind = RootKind::from_norm2(n2).expect("classical roots have norm 1, 2 or 4");
            Root {
                vector,
                kind,
                multiplicity: multiplicities.of(kind),
            }
        })
        .collect();
    Ok(RootSystem {
        family,
        rank,
        multiplicities,
        positive_roots,
    })
}

/// Closed-form number of positive roots.
pub fn positive_root_count(family: Family, rank: usize) -> usize {
    let n = rank;
    match family {
        Family::A => (n + 1) * n / 2,
        Family::B | Family::C => n * n,
        Family::D => n * (n - 1),
        Family::BC => n * n + n,
    }
}

impl RootSystem {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.family.ambient_dim(self.rank)
    }

    pub fn multiplicities(&self) -> Multiplicities {
        self.multiplicities
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.positive_roots
    }

    /// True for `±α` with `α` a positive root.
    pub fn is_root(&self, v: &[i64]) -> bool {
        self.positive_roots
            .iter()
            .any(|r| r.vector.as_slice() == v || r.vector.iter().zip(v).all(|(a, b)| *a == -*b))
    }

    /// Multiplicity of `2α` when it is a root, else 0.
    pub fn doubled_multiplicity(&self, alpha: &[i64]) -> u32 {
        let doubled: Vec<i64> = alpha.iter().map(|x| 2 * x).collect();
        self.positive_roots
            .iter()
            .find(|r| r.vector == doubled)
            .map(|r| r.multiplicity)
            .unwrap_or(0)
    }

    /// Every root, positive and negative.
    pub fn all_roots(&self) -> Vec<Vec<i64>> {
        self.positive_roots
            .iter()
            .flat_map(|r| [r.vector.clone(), r.vector.iter().map(|x| -x).collect()])
            .collect()
    }

    /// The Weyl group as integer matrices (row-major, `dim × dim`), generated
    /// by closing the set of root reflections under composition.
    pub fn weyl_group(&self) -> Vec<Vec<i64>> {
        let dim = self.dim();
        let gens: Vec<Vec<i64>> = self
            .positive_roots
            .iter()
            .map(|r| reflection_matrix(&r.vector))
            .collect();
        let mut id = vec![0; dim * dim];
        for i in 0..dim {
            id[i * dim + i] = 1;
        }
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        seen.insert(id.clone());
        let mut frontier = vec![id];
        while let Some(m) = frontier.pop() {
            for g in &gens {
                let p = int_matmul(g, &m, dim);
                if seen.insert(p.clone()) {
                    frontier.push(p);
                }
            }
        }
        let mut out: Vec<_> = seen.into_iter().collect();
        out.sort();
        out
    }
}

fn reflection_matrix(alpha: &[i64]) -> Vec<i64> {
    let dim = alpha.len();
    let n2: i64 = alpha.iter().map(|x| x * x).sum();
    let mut m = vec![0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let num = 2 * alpha[i] * alpha[j];
            debug_assert_eq!(num % n2, 0);
            m[i * dim + j] = i64::from(i == j) - num / n2;
        }
    }
    m
}

fn int_matmul(a: &[i64], b: &[i64], dim: usize) -> Vec<i64> {
    let mut c = vec![0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == 0 {
                continue;
            }
            for j in 0..dim {
                c[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    c
}

/// Applies an integer matrix from [`RootSystem::weyl_group`] to a real vector.
pub fn apply_weyl_element(w: &[i64], q: &[f64]) -> Vec<f64> {
    let dim = q.len();
    (0..dim)
        .map(|i| (0..dim).map(|j| w[i * dim + j] as f64 * q[j]).sum())
        .collect()
}

/// Exact reflection of the integer vector `beta` in the root `alpha`.
///
/// Returns `None` when the Cartan integer `2(α·β)/α²` is not an integer.
pub fn reflect_exact(beta: &[i64], alpha: &[i64]) -> Option<Vec<i64>> {
    let n2: i64 = alpha.iter().map(|x| x * x).sum();
    if n2 == 0 {
        return None;
    }
    let num = 2 * dot_i(alpha, beta);
    if num % n2 != 0 {
        return None;
    }
    let c = num / n2;
    Some(beta.iter().zip(alpha).map(|(b, a)| b - c * a).collect())
}

fn dot_i(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reflection `μ − 2(α·μ)/α² α` of a real vector in a root of the system.
pub fn weyl_reflect(rs: &RootSystem, mu: &[f64], alpha: &[i64]) -> Result<Vec<f64>, RootError> {
    let dim = rs.dim();
    for len in [mu.len(), alpha.len()] {
        if len != dim {
            return Err(RootError::Dimension {
                expected: dim,
                got: len,
            });
        }
    }
    let n2 = dot_i(alpha, alpha);
    if n2 == 0 {
        return Err(RootError::ZeroRoot);
    }
    if !rs.is_root(alpha) {
        return Err(RootError::NotARoot(alpha.to_vec()));
    }
    let am: f64 = alpha.iter().zip(mu).map(|(a, m)| *a as f64 * m).sum();
    let c = 2.0 * am / n2 as f64;
    Ok(mu.iter().zip(alpha).map(|(m, a)| m - c * *a as f64).collect())
}

/// `ρ = ½ Σ_{α>0} m_α α`.
pub fn rho_vector(rs: &RootSystem) -> Vec<f64> {
    let mut rho = vec![0.0; rs.dim()];
    for r in &rs.positive_roots {
        let m = 0.5 * r.multiplicity as f64;
        for (x, a) in rho.iter_mut().zip(&r.vector) {
            *x += m * *a as f64;
        }
    }
    rho
}

/// `q^α = q·α`.
pub fn q_dot_alpha(q: &[f64], alpha: &[i64]) -> Result<f64, RootError> {
    if q.len() != alpha.len() {
        return Err(RootError::Dimension {
            expected: alpha.len(),
            got: q.len(),
        });
    }
    Ok(q.iter().zip(alpha).map(|(x, a)| x * *a as f64).sum())
}

/// Sorts `q` into the descending chamber. Families other than A also take
/// absolute values first, since sign flips are Weyl elements there.
/// D only admits even numbers of sign flips, so a single negative
/// coordinate is kept on the last slot.
pub fn to_chamber(family: Family, q: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = match family {
        Family::A => q.to_vec(),
        _ => q.iter().map(|x| x.abs()).collect(),
    };
    v.sort_by(|a, b| b.total_cmp(a));
    if family == Family::D {
        let negatives = q.iter().filter(|x| **x < 0.0).count();
        if negatives % 2 == 1 {
            if let Some(last) = v.last_mut() {
                *last = -*last;
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c2_roots_and_kinds() {
        let rs = build_root_system(Family::C, 2, Multiplicities::new(1, 1, 0)).unwrap();
        let got: Vec<(Vec<i64>, RootKind)> = rs.positive_roots().iter().map(|r| (r.vector.clone(), r.kind)).collect();
        assert_eq!(
            got,
            vec![
                (vec![1, -1], RootKind::Ordinary),
                (vec![1, 1], RootKind::Ordinary),
                (vec![2, 0], RootKind::Long),
                (vec![0, 2], RootKind::Long),
            ]
        );
    }

    #[test]
    fn a1_single_root() {
        let rs = build_root_system(Family::A, 1, Multiplicities::new(2, 0, 0)).unwrap();
        assert_eq!(rs.positive_roots().len(), 1);
        assert_eq!(rs.positive_roots()[0].vector, vec![1, -1]);
    }

    #[test]
    fn bc3_kind_counts() {
        let rs = build_root_system(Family::BC, 3, Multiplicities::new(4, 3, 4)).unwrap();
        let count = |k| rs.positive_roots().iter().filter(|r| r.kind == k).count();
        assert_eq!(rs.positive_roots().len(), 12);
        assert_eq!(count(RootKind::Short), 3);
        assert_eq!(count(RootKind::Ordinary), 6);
        assert_eq!(count(RootKind::Long), 3);
    }

    #[test]
    fn absent_kind_rejected() {
        let err = build_root_system(Family::D, 3, Multiplicities::new(2, 1, 0)).unwrap_err();
        assert!(matches!(
            err,
            RootError::AbsentKind {
                kind: RootKind::Long,
                ..
            }
        ));
        assert!(build_root_system(Family::A, 0, Multiplicities::new(1, 0, 0)).is_err());
    }

    #[test]
    fn reflections() {
        let rs = build_root_system(Family::B, 2, Multiplicities::new(1, 0, 1)).unwrap();
        let r = weyl_reflect(&rs, &[1.0, 0.0], &[1, -1]).unwrap();
        assert_eq!(r, vec![0.0, 1.0]);
        let r = weyl_reflect(&rs, &[1.0, 1.0], &[1, 1]).unwrap();
        assert_eq!(r, vec![-1.0, -1.0]);
        let r = weyl_reflect(&rs, &[1.0, 1.0], &[1, -1]).unwrap();
        assert_eq!(r, vec![1.0, 1.0]);
        assert!(weyl_reflect(&rs, &[1.0, 1.0], &[0, 0]).is_err());
    }

    #[test]
    fn rho_examples() {
        let rs = build_root_system(Family::A, 1, Multiplicities::new(1, 0, 0)).unwrap();
        assert_eq!(rho_vector(&rs), vec![0.5, -0.5]);
        let rs = build_root_system(Family::BC, 1, Multiplicities::new(0, 3, 4)).unwrap();
        assert_eq!(rho_vector(&rs), vec![0.5 * (4.0 + 6.0)]);
    }

    #[test]
    fn q_dot() {
        assert_eq!(q_dot_alpha(&[1.0, 2.0], &[1, -1]).unwrap(), -1.0);
        assert_eq!(q_dot_alpha(&[0.7, 2.0], &[2, 0]).unwrap(), 1.4);
        assert!(q_dot_alpha(&[1.0], &[1, -1]).is_err());
    }

    #[test]
    fn weyl_group_orders() {
        let m = Multiplicities::new(1, 0, 0);
        let order = |f, n, m| build_root_system(f, n, m).unwrap().weyl_group().len();
        assert_eq!(order(Family::A, 2, m), 6);
        assert_eq!(order(Family::A, 3, m), 24);
        assert_eq!(order(Family::B, 3, Multiplicities::new(1, 0, 1)), 48);
        assert_eq!(order(Family::C, 2, Multiplicities::new(1, 1, 0)), 8);
        assert_eq!(order(Family::D, 3, m), 24);
        assert_eq!(order(Family::BC, 2, Multiplicities::new(1, 1, 1)), 8);
    }

    #[test]
    fn serde_round_trip() {
        let rs = build_root_system(Family::BC, 2, Multiplicities::new(2, 1, 4)).unwrap();
        let json = serde_json::to_string(&rs).unwrap();
        assert_eq!(
            json,
            r#"{"family":"BC","rank":2,"multiplicities":{"ordinary":2,"long":1,"short":4}}"#
        );
        let back: RootSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rs);
    }
}
