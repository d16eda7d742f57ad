//! Finite-dimensional ordered vector spaces `E = ℝⁿ` with a cone `P`.
//!
//! A [`Cone`] is a closed pointed convex cone with nonempty interior. Three
//! kinds are supported:
//!
//! - `Orthant{n}`: `{v : vᵢ ≥ 0}`, normal with constant 1, strongly minihedral.
//! - `Lorentz{n}`: `{v : vₙ ≥ ‖(v₁, …, vₙ₋₁)‖₂}`.
//! - `Polyhedral{A}`: `{v : Av ≥ 0}`, accepted only when `rank(A) = n` and an
//!   interior point has been found.
//!
//! The order is `x ≤ y ⇔ y − x ∈ P` and `x ≪ y ⇔ y − x ∈ int P`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;

/// Relative threshold on singular values used for the rank certificate.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Default number of random directions tried when searching for an interior point.
pub const DEFAULT_INTERIOR_BUDGET: usize = 10_000;

/// A point of `ℝⁿ` with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// Builds a vector without the finiteness check. Callers guarantee the
    /// entries come from finite arithmetic or check [`Vector::is_finite`].
    pub(crate) fn raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Vector(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// `‖v‖_∞`
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Result<Vector> {
        other.check_dim(self.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn abs(&self) -> Vector {
        Vector(self.0.iter().map(|x| x.abs()).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&x| f(x)).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Vector::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Descriptor of a cone as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    Orthant { dim: usize },
    Lorentz { dim: usize },
    Polyhedral { rows: Vec<Vec<f64>> },
}

/// A closed pointed convex cone in `ℝⁿ` with a certified interior point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeKind", into = "ConeKind")]
pub struct Cone {
    kind: ConeKind,
    dim: usize,
    normal_constant: Option<f64>,
    interior_witness: Vector,
}

impl TryFrom<ConeKind> for Cone {
    type Error = Error;

    fn try_from(kind: ConeKind) -> Result<Self> {
        Cone::from_kind(kind)
    }
}

impl From<Cone> for ConeKind {
    fn from(cone: Cone) -> Self {
        cone.kind
    }
}

impl Cone {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("orthant dimension must be positive".into()));
        }
        Ok(Cone {
            kind: ConeKind::Orthant { dim },
            dim,
            normal_constant: Some(1.0),
            interior_witness: Vector::filled(dim, 1.0),
        })
    }

    pub fn lorentz(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("Lorentz cone needs dimension ≥ 2".into()));
        }
        let mut witness = vec![0.0; dim];
        witness[dim - 1] = 1.0;
        Ok(Cone {
            kind: ConeKind::Lorentz { dim },
            dim,
            normal_constant: None,
            interior_witness: Vector(witness),
        })
    }

    pub fn polyhedral(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::polyhedral_with_budget(rows, DEFAULT_INTERIOR_BUDGET, 0)
    }

    /// `{v : Av ≥ 0}`. Fails with [`Error::PointednessUncertified`] when the
    /// numerical rank of `A` is below `n`, and with [`Error::EmptyInterior`]
    /// when no `v` with `Av > 0` turns up within `budget` random directions.
    pub fn polyhedral_with_budget(rows: Vec<Vec<f64>>, budget: usize, seed: u64) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Empty("polyhedral constraint matrix"));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidArgument("polyhedral rows must be nonempty".into()));
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("polyhedral constraint matrix"));
            }
        }
        let rank = numerical_rank(&rows);
        if rank < n {
            return Err(Error::PointednessUncertified { rank, dim: n });
        }
        let witness = find_polyhedral_interior(&rows, budget, seed).ok_or(Error::EmptyInterior)?;
        Ok(Cone {
            kind: ConeKind::Polyhedral { rows },
            dim: n,
            normal_constant: None,
            interior_witness: witness,
        })
    }

    pub fn from_kind(kind: ConeKind) -> Result<Self> {
        match kind {
            ConeKind::Orthant { dim } => Cone::orthant(dim),
            ConeKind::Lorentz { dim } => Cone::lorentz(dim),
            ConeKind::Polyhedral { rows } => Cone::polyhedral(rows),
        }
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normal constant `K` where known (only the orthant, `K = 1`).
    pub fn normal_constant(&self) -> Option<f64> {
        self.normal_constant
    }

    pub fn interior_witness(&self) -> &Vector {
        &self.interior_witness
    }

    pub fn is_orthant(&self) -> bool {
        matches!(self.kind, ConeKind::Orthant { .. })
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ConeKind::Orthant { dim } => format!("orthant{dim}"),
            ConeKind::Lorentz { dim } => format!("lorentz{dim}"),
            ConeKind::Polyhedral { rows } => format!("polyhedral{}x{}", rows.len(), self.dim),
        }
    }

    fn check_vector(&self, v: &Vector) -> Result<()> {
        v.check_dim(self.dim)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("vector"));
        }
        Ok(())
    }

    /// Smallest constraint value of `v`: `min vᵢ` for the orthant,
    /// `vₙ − ‖v'‖` for Lorentz, `min (Av)ᵢ` for polyhedral cones.
    /// `v ∈ P` iff this is `≥ 0`.
    pub fn min_slack(&self, v: &Vector) -> Result<f64> {
        self.check_vector(v)?;
        Ok(self.slack_unchecked(v.as_slice()))
    }

    pub(crate) fn slack_unchecked(&self, v: &[f64]) -> f64 {
        match &self.kind {
            ConeKind::Orthant { .. } => v.iter().copied().fold(f64::INFINITY, f64::min),
            ConeKind::Lorentz { dim } => {
                let head = v[..dim - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
                v[dim - 1] - head
            }
            ConeKind::Polyhedral { rows } => rows
                .iter()
                .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum::<f64>())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `v ∈ P` with every constraint allowed a slack of `−tol`.
    pub fn contains(&self, v: &Vector, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument("tol must be ≥ 0".into()));
        }
        Ok(self.min_slack(v)? >= -tol)
    }

    /// `v ∈ int P`: every constraint exceeds `margin · max(1, ‖v‖_∞)`.
    pub fn strictly_contains(&self, v: &Vector, margin: f64) -> Result<bool> {
        if !(margin > 0.0) {
            return Err(Error::InvalidArgument("margin must be > 0".into()));
        }
        let slack = self.min_slack(v)?;
        Ok(slack > margin * v.max_abs().max(1.0))
    }

    /// `x ≤ y`, i.e. `y − x ∈ P`.
    pub fn leq(&self, x: &Vector, y: &Vector, tol: f64) -> Result<bool> {
        x.check_dim(self.dim)?;
        self.contains(&y.sub(x)?, tol)
    }

    /// `x ≪ y`, i.e. `y − x ∈ int P`.
    pub fn ll(&self, x: &Vector, y: &Vector, margin: f64) -> Result<bool> {
        x.check_dim(self.dim)?;
        self.strictly_contains(&y.sub(x)?, margin)
    }

    /// Least upper bound of a finite set. Only the orthant is strongly
    /// minihedral in this catalog; the bound is the componentwise maximum.
    pub fn least_upper_bound(&self, points: &[Vector]) -> Result<Vector> {
        if !self.is_orthant() {
            return Err(Error::NotStronglyMinihedral);
        }
        let (first, rest) = points.split_first().ok_or(Error::Empty("point list"))?;
        self.check_vector(first)?;
        let mut sup = first.0.clone();
        for p in rest {
            self.check_vector(p)?;
            for (s, &x) in sup.iter_mut().zip(&p.0) {
                *s = s.max(x);
            }
        }
        Ok(Vector(sup))
    }
}

fn numerical_rank(rows: &[Vec<f64>]) -> usize {
    let m = rows.len();
    let n = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let matrix = DMatrix::from_row_slice(m, n, &flat);
    let singular = matrix.svd(false, false).singular_values;
    let largest = singular.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > RANK_THRESHOLD * largest).count()
}

fn find_polyhedral_interior(rows: &[Vec<f64>], budget: usize, seed: u64) -> Option<Vector> {
    let n = rows[0].len();
    let strictly_inside = |v: &[f64]| {
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        rows.iter()
            .all(|row| row.iter().zip(v).map(|(a, x)| a * x).sum::<f64>() > 1e-9 * scale)
    };

    // The sum of normalized constraint rows is interior for most cones met in practice.
    let mut candidate = vec![0.0; n];
    for row in rows {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (c, a) in candidate.iter_mut().zip(row) {
                *c += a / norm;
            }
        }
    }
    if strictly_inside(&candidate) {
        return Some(Vector(candidate));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| sampling::uniform_entries(&mut rng, n, -1.0, 1.0))
        .find(|v| strictly_inside(v))
        .map(Vector)
}

/// A seminorm on `ℝⁿ` from the monotone catalog. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seminorm {
    /// `q(v) = |v_k|`
    Coordinate { k: usize },
    /// `q(v) = Σ_{i≤k} |vᵢ|`
    PartialAbsSum { k: usize },
    /// `q(v) = Σ wᵢ|vᵢ|` with `wᵢ ≥ 0`
    WeightedAbsSum { weights: Vec<f64> },
}

impl Seminorm {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Seminorm::Coordinate { k } | Seminorm::PartialAbsSum { k } => {
                if *k == 0 || *k > dim {
                    return Err(Error::IndexOutOfRange { index: *k, dim });
                }
            }
            Seminorm::WeightedAbsSum { weights } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch { expected: weights.len(), found: dim });
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidArgument(
                        "seminorm weights must be finite and ≥ 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, v: &Vector) -> Result<f64> {
        self.validate(v.dim())?;
        let x = v.as_slice();
        Ok(match self {
            Seminorm::Coordinate { k } => x[k - 1].abs(),
            Seminorm::PartialAbsSum { k } => x[..*k].iter().map(|a| a.abs()).sum(),
            Seminorm::WeightedAbsSum { weights } => {
                weights.iter().zip(x).map(|(w, a)| w * a.abs()).sum()
            }
        })
    }

    /// Monotone on the orthant order: `0 ≤ v ≤ w ⇒ q(v) ≤ q(w)`.
    pub fn is_monotone(&self) -> bool {
        match self {
            Seminorm::Coordinate { .. } | Seminorm::PartialAbsSum { .. } => true,
            Seminorm::WeightedAbsSum { weights } => weights.iter().all(|w| *w >= 0.0),
        }
    }
}

/// Which form of the aggregator `h` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HVariant {
    /// `h(u) = Σₖ 2⁻ᵏ qₖ(u) / (1 + qₖ(u))` over the listed seminorms.
    #[default]
    Family,
    /// `h(u) = Σₖ 2⁻ᵏ |uₖ| / (1 + |uₖ|)` over the coordinates.
    Coordinate,
}

/// An ordered seminorm family `q₁, q₂, …` with the aggregator
/// `h(u) = Σ_{k ≤ K} 2⁻ᵏ qₖ(u) / (1 + qₖ(u))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormFamily {
    seminorms: Vec<Seminorm>,
    monotone: bool,
    truncation: usize,
    variant: HVariant,
}

impl SeminormFamily {
    pub fn new(seminorms: Vec<Seminorm>, truncation: usize) -> Result<Self> {
        if seminorms.is_empty() {
            return Err(Error::Empty("seminorm family"));
        }
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation level must be positive".into()));
        }
        for q in &seminorms {
            if let Seminorm::WeightedAbsSum { weights } = q {
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidArgument(
                        "seminorm weights must be finite and ≥ 0".into(),
                    ));
                }
            }
        }
        let monotone = seminorms.iter().all(Seminorm::is_monotone);
        Ok(SeminormFamily { seminorms, monotone, truncation, variant: HVariant::Family })
    }

    /// The coordinate aggregator `Σ 2⁻ᵏ |uₖ|/(1+|uₖ|)` truncated after `truncation`
    /// terms. Truncation at `N` changes `h` by less than `2⁻ᴺ`.
    pub fn coordinate(truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation level must be positive".into()));
        }
        Ok(SeminormFamily {
            seminorms: Vec::new(),
            monotone: true,
            truncation,
            variant: HVariant::Coordinate,
        })
    }

    /// Marks the family as not known to be monotone; `d_S` then refuses it.
    pub fn declared_non_monotone(mut self) -> Self {
        self.monotone = false;
        self
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn variant(&self) -> HVariant {
        self.variant
    }

    /// The seminorms that enter `h` for vectors of dimension `dim`.
    pub fn active_seminorms(&self, dim: usize) -> Vec<Seminorm> {
        match self.variant {
            HVariant::Family => {
                self.seminorms.iter().take(self.truncation).cloned().collect()
            }
            HVariant::Coordinate => {
                (1..=self.truncation.min(dim)).map(|k| Seminorm::Coordinate { k }).collect()
            }
        }
    }

    pub fn h(&self, u: &Vector) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::NonFinite("vector"));
        }
        let mut total = 0.0;
        let mut weight = 1.0;
        for q in self.active_seminorms(u.dim()) {
            weight *= 0.5;
            let value = q.eval(u)?;
            total += weight * value / (1.0 + value);
        }
        Ok(total)
    }
}

/// Upper bound on the part of the coordinate aggregator dropped by truncating
/// after `n` terms.
pub fn omega_tail_bound(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

/// Outcome of [`validate_cone`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub cone: String,
    pub samples: usize,
    pub additive_closure: bool,
    pub positive_homogeneity: bool,
    pub interior_closure: bool,
    pub pointed: bool,
    pub interior_witness: Vector,
    pub max_violation: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.additive_closure && self.positive_homogeneity && self.interior_closure && self.pointed
    }
}

/// Sampled certification of the cone axioms: `P + P ⊆ P`, `λP ⊆ P`,
/// `int P + int P ⊆ int P`, and pointedness (`v ∈ P, v ≠ 0 ⇒ −v ∉ P`, plus the
/// rank certificate for polyhedral cones).
pub fn validate_cone(cone: &Cone, sample_budget: usize, rng_seed: u64) -> Result<ValidationReport> {
    if sample_budget == 0 {
        return Err(Error::InvalidArgument("sample budget must be ≥ 1".into()));
    }
    const TOL: f64 = 1e-12;
    const MARGIN: f64 = 1e-12;

    let mut pointed = match cone.kind() {
        ConeKind::Polyhedral { rows } => numerical_rank(rows) == cone.dim(),
        _ => true,
    };
    let mut additive = true;
    let mut homogeneous = true;
    let mut interior = cone.strictly_contains(cone.interior_witness(), MARGIN)?;
    let mut max_violation = 0.0f64;

    for index in 0..sample_budget as u64 {
        let mut rng = sampling::stream_rng(rng_seed, "validate_cone", index);
        let v = sampling::cone_point(&mut rng, cone, 10.0);
        let w = sampling::cone_point(&mut rng, cone, 10.0);
        let lambda = sampling::uniform(&mut rng, 0.0, 10.0);

        let sum_slack = cone.min_slack(&v.add(&w)?)?;
        if sum_slack < -TOL {
            additive = false;
            max_violation = max_violation.max(-sum_slack);
        }
        let scaled_slack = cone.min_slack(&v.scale(lambda))?;
        if scaled_slack < -TOL {
            homogeneous = false;
            max_violation = max_violation.max(-scaled_slack);
        }
        if !v.is_zero() && cone.contains(&v.scale(-1.0), 0.0)? && v.max_abs() > TOL {
            pointed = false;
        }

        let a = sampling::interior_point(&mut rng, cone, 10.0);
        let b = sampling::interior_point(&mut rng, cone, 10.0);
        let mu = sampling::uniform(&mut rng, 1e-3, 10.0);
        if !cone.strictly_contains(&a.add(&b)?, MARGIN)?
            || !cone.strictly_contains(&a.scale(mu), MARGIN)?
        {
            interior = false;
        }
    }

    Ok(ValidationReport {
        cone: cone.label(),
        samples: sample_budget,
        additive_closure: additive,
        positive_homogeneity: homogeneous,
        interior_closure: interior,
        pointed,
        interior_witness: cone.interior_witness().clone(),
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[f64]) -> Vector {
        Vector::from_slice(entries).unwrap()
    }

    #[test]
    fn vector_rejects_non_finite_and_empty() {
        assert_eq!(Vector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite("vector")));
        assert_eq!(Vector::new(vec![]), Err(Error::Empty("vector")));
        assert!(serde_json::from_str::<Vector>("[1.0, 2.0]").is_ok());
        assert!(serde_json::from_str::<Vector>("[]").is_err());
    }

    #[test]
    fn membership_examples() {
        let orthant = Cone::orthant(2).unwrap();
        assert!(orthant.contains(&v(&[0.0, 0.0]), 0.0).unwrap());
        assert!(!orthant.contains(&v(&[1.0, -1.0]), 1e-9).unwrap());
        let lorentz = Cone::lorentz(3).unwrap();
        assert!(lorentz.contains(&v(&[3.0, 4.0, 5.0]), 0.0).unwrap());
        assert!(!lorentz.contains(&v(&[3.0, 4.0, 4.999]), 0.0).unwrap());
    }

    #[test]
    fn membership_errors() {
        let orthant = Cone::orthant(2).unwrap();
        assert_eq!(
            orthant.contains(&v(&[1.0, 2.0, 3.0]), 0.0),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
        let bad = Vector::raw(vec![1.0, f64::INFINITY]);
        assert_eq!(orthant.contains(&bad, 0.0), Err(Error::NonFinite("vector")));
        assert!(orthant.strictly_contains(&v(&[1.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn interior_examples() {
        let orthant = Cone::orthant(2).unwrap();
        assert!(orthant.strictly_contains(&v(&[1.0, 1.0]), 1e-9).unwrap());
        assert!(!orthant.strictly_contains(&v(&[1.0, 0.0]), 1e-9).unwrap());
        let lorentz = Cone::lorentz(3).unwrap();
        assert!(lorentz.strictly_contains(&v(&[0.0, 0.0, 1.0]), 1e-9).unwrap());
        assert!(!lorentz.strictly_contains(&v(&[3.0, 4.0, 5.0]), 1e-9).unwrap());
    }

    #[test]
    fn interior_margin_is_relative() {
        let orthant = Cone::orthant(2).unwrap();
        // slack 1e-3 is interior at unit scale but not relative to a 1e7 entry
        assert!(orthant.strictly_contains(&v(&[1e-3, 1.0]), 1e-9).unwrap());
        assert!(!orthant.strictly_contains(&v(&[1e-3, 1e7]), 1e-9).unwrap());
    }

    #[test]
    fn order_examples() {
        let orthant = Cone::orthant(2).unwrap();
        assert!(orthant.leq(&v(&[1.0, 2.0]), &v(&[1.0, 3.0]), 0.0).unwrap());
        assert!(!orthant.ll(&v(&[1.0, 2.0]), &v(&[1.0, 3.0]), 1e-9).unwrap());
        assert!(orthant.ll(&v(&[1.0, 2.0]), &v(&[2.0, 3.0]), 1e-9).unwrap());
    }

    #[test]
    fn lub_examples() {
        let orthant = Cone::orthant(2).unwrap();
        assert_eq!(
            orthant.least_upper_bound(&[v(&[1.0, 3.0]), v(&[2.0, 1.0])]).unwrap(),
            v(&[2.0, 3.0])
        );
        let line = Cone::orthant(1).unwrap();
        assert_eq!(line.least_upper_bound(&[v(&[5.0])]).unwrap(), v(&[5.0]));
        assert_eq!(orthant.least_upper_bound(&[]), Err(Error::Empty("point list")));
        let lorentz = Cone::lorentz(3).unwrap();
        assert_eq!(
            lorentz.least_upper_bound(&[v(&[0.0, 0.0, 1.0])]),
            Err(Error::NotStronglyMinihedral)
        );
    }

    #[test]
    fn h_examples() {
        let family = SeminormFamily::new(
            vec![Seminorm::Coordinate { k: 1 }, Seminorm::Coordinate { k: 2 }],
            2,
        )
        .unwrap();
        assert!((family.h(&v(&[1.0, 1.0])).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(family.h(&v(&[0.0, 0.0])).unwrap(), 0.0);

        let omega = SeminormFamily::coordinate(20).unwrap();
        let mut c = vec![0.0; 20];
        c[0] = 0.1;
        let h_c = omega.h(&v(&c)).unwrap();
        assert!((h_c - 0.5 * 0.1 / 1.1).abs() < 1e-15);
        assert!(h_c < 0.1);
    }

    #[test]
    fn h_truncates_and_reports_index_errors() {
        let family = SeminormFamily::new(
            vec![Seminorm::Coordinate { k: 1 }, Seminorm::Coordinate { k: 3 }],
            1,
        )
        .unwrap();
        // the second seminorm is beyond the truncation level and never evaluated
        assert!((family.h(&v(&[1.0, 0.0])).unwrap() - 0.25).abs() < 1e-15);

        let family = SeminormFamily::new(vec![Seminorm::Coordinate { k: 3 }], 5).unwrap();
        assert_eq!(family.h(&v(&[1.0, 0.0])), Err(Error::IndexOutOfRange { index: 3, dim: 2 }));
    }

    #[test]
    fn seminorm_kinds() {
        let x = v(&[-1.0, 2.0, -3.0]);
        assert_eq!(Seminorm::Coordinate { k: 2 }.eval(&x).unwrap(), 2.0);
        assert_eq!(Seminorm::PartialAbsSum { k: 2 }.eval(&x).unwrap(), 3.0);
        assert_eq!(
            Seminorm::WeightedAbsSum { weights: vec![1.0, 0.0, 2.0] }.eval(&x).unwrap(),
            7.0
        );
        assert!(Seminorm::Coordinate { k: 0 }.eval(&x).is_err());
        assert!(SeminormFamily::new(vec![Seminorm::WeightedAbsSum { weights: vec![-1.0] }], 1)
            .is_err());
    }

    #[test]
    fn omega_tail_bound_halves() {
        assert_eq!(omega_tail_bound(1), 0.5);
        assert_eq!(omega_tail_bound(20), 2f64.powi(-20));
    }

    #[test]
    fn validate_examples() {
        let report = validate_cone(&Cone::orthant(3).unwrap(), 1000, 1).unwrap();
        assert!(report.passed());
        assert_eq!(report.interior_witness, v(&[1.0, 1.0, 1.0]));

        let identity = Cone::polyhedral(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let report = validate_cone(&identity, 100, 1).unwrap();
        assert!(report.passed());

        assert_eq!(
            Cone::polyhedral(vec![vec![1.0, 0.0]]),
            Err(Error::PointednessUncertified { rank: 1, dim: 2 })
        );
        assert!(validate_cone(&identity, 0, 1).is_err());
    }

    #[test]
    fn polyhedral_with_empty_interior_is_rejected() {
        // x ≥ 0 and −x ≥ 0 together with y ≥ 0: rank 2 but the interior is empty
        let rows = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(Cone::polyhedral_with_budget(rows, 500, 3), Err(Error::EmptyInterior));
    }

    #[test]
    fn polyhedral_pyramid_validates() {
        let pyramid = Cone::polyhedral(vec![
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap();
        assert!(pyramid.strictly_contains(pyramid.interior_witness(), 1e-9).unwrap());
        assert!(validate_cone(&pyramid, 500, 9).unwrap().passed());
    }

    #[test]
    fn cone_serde_goes_through_validation() {
        let cone: Cone = serde_json::from_str(r#"{"kind":"lorentz","dim":3}"#).unwrap();
        assert_eq!(cone.dim(), 3);
        assert!(serde_json::from_str::<Cone>(r#"{"kind":"polyhedral","rows":[[1.0,0.0]]}"#)
            .is_err());
    }
}
