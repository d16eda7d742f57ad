//! Cone metric spaces `(X, p)` with `p : X × X → P` and the scalar metrics
//! built on top of them:
//!
//! - `d_p(x, y) = ξ_e(p(x, y))`
//! - `d_S(x, y) = inf{h(u) : u ∈ P, p(x, y) ≤ u}`, which equals `h(p(x, y))`
//!   whenever `h` is monotone on the order. Only that case is supported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered_space::{Cone, SeminormFamily, Vector};
use crate::scalarization::ScalarizationContext;

/// Slack for `≤` in the value cone.
pub const ORDER_TOL: f64 = 1e-12;
/// Relative margin for `≪` in the value cone.
pub const ORDER_MARGIN: f64 = 1e-12;

/// Vector metric on a finite point set given by an explicit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteTable {
    pub points: Vec<Vector>,
    /// `table[i][j] = p(points[i], points[j])`
    pub table: Vec<Vec<Vector>>,
}

impl FiniteTable {
    fn index_of(&self, x: &Vector) -> Result<usize> {
        self.points.iter().position(|p| p == x).ok_or(Error::UnknownPoint)
    }

    /// Exhaustive check of the cone metric axioms over all pairs and triples.
    pub fn validate(&self, cone: &Cone) -> Result<()> {
        let n = self.points.len();
        if n == 0 {
            return Err(Error::Empty("finite table points"));
        }
        let point_dim = self.points[0].dim();
        for p in &self.points {
            p.check_dim(point_dim)?;
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.points[i] == self.points[j] {
                    return Err(Error::InvalidTable(format!("points {i} and {j} coincide")));
                }
            }
        }
        if self.table.len() != n || self.table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidTable(format!("table must be {n}×{n}")));
        }
        for (i, row) in self.table.iter().enumerate() {
            for (j, value) in row.iter().enumerate() {
                value.check_dim(cone.dim())?;
                if !cone.contains(value, ORDER_TOL)? {
                    return Err(Error::InvalidTable(format!("p({i},{j}) not in the cone")));
                }
                if (i == j) != value.is_zero() {
                    return Err(Error::InvalidTable(format!("p({i},{j}) = 0 does not match i = j")));
                }
                if *value != self.table[j][i] {
                    return Err(Error::InvalidTable(format!("p({i},{j}) ≠ p({j},{i})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let detour = self.table[i][k].add(&self.table[k][j])?;
                    if !cone.leq(&self.table[i][j], &detour, ORDER_TOL)? {
                        return Err(Error::InvalidTable(format!(
                            "triangle inequality: p({i},{j}) ≰ p({i},{k}) + p({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    /// `p(x, y)ᵢ = |xᵢ − yᵢ|`
    ComponentwiseAbs,
    /// `p(x, y)ᵢ = wᵢ |xᵢ − yᵢ|`, `wᵢ > 0`
    WeightedComponentwise { weights: Vec<f64> },
    FiniteTable(FiniteTable),
}

/// A set `X ⊆ ℝᵐ` with a vector-valued metric into `(ℝⁿ, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeMetricSpace {
    point_dim: usize,
    value_cone: Cone,
    kind: MetricKind,
}

impl ConeMetricSpace {
    /// `ℝᵐ` with `p(x,y) = |x − y|` into the orthant of `ℝᵐ`.
    pub fn componentwise_abs(dim: usize) -> Result<Self> {
        Ok(ConeMetricSpace {
            point_dim: dim,
            value_cone: Cone::orthant(dim)?,
            kind: MetricKind::ComponentwiseAbs,
        })
    }

    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("metric weights"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("metric weights must be finite and > 0".into()));
        }
        let dim = weights.len();
        Ok(ConeMetricSpace {
            point_dim: dim,
            value_cone: Cone::orthant(dim)?,
            kind: MetricKind::WeightedComponentwise { weights },
        })
    }

    pub fn finite_table(table: FiniteTable, value_cone: Cone) -> Result<Self> {
        table.validate(&value_cone)?;
        Ok(ConeMetricSpace {
            point_dim: table.points[0].dim(),
            value_cone,
            kind: MetricKind::FiniteTable(table),
        })
    }

    /// Builds a space from a descriptor; the value cone is the orthant except
    /// for finite tables, where `value_cone` is used.
    pub fn from_kind(point_dim: usize, kind: MetricKind, value_cone: Option<Cone>) -> Result<Self> {
        match kind {
            MetricKind::ComponentwiseAbs => Self::componentwise_abs(point_dim),
            MetricKind::WeightedComponentwise { weights } => {
                if weights.len() != point_dim {
                    return Err(Error::DimensionMismatch { expected: point_dim, found: weights.len() });
                }
                Self::weighted(weights)
            }
            MetricKind::FiniteTable(table) => {
                let cone = match value_cone {
                    Some(cone) => cone,
                    None => {
                        let dim = table
                            .table
                            .first()
                            .and_then(|row| row.first())
                            .map(Vector::dim)
                            .ok_or(Error::Empty("finite table"))?;
                        Cone::orthant(dim)?
                    }
                };
                Self::finite_table(table, cone)
            }
        }
    }

    pub fn point_dim(&self) -> usize {
        self.point_dim
    }

    pub fn value_cone(&self) -> &Cone {
        &self.value_cone
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Points of a finite space; `None` for continuous spaces.
    pub fn finite_points(&self) -> Option<&[Vector]> {
        match &self.kind {
            MetricKind::FiniteTable(t) => Some(&t.points),
            _ => None,
        }
    }

    pub fn p(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        x.check_dim(self.point_dim)?;
        y.check_dim(self.point_dim)?;
        match &self.kind {
            MetricKind::ComponentwiseAbs => Ok(x.sub(y)?.abs()),
            MetricKind::WeightedComponentwise { weights } => Ok(Vector::raw(
                x.iter().zip(y.iter()).zip(weights).map(|((a, b), w)| w * (a - b).abs()).collect(),
            )),
            MetricKind::FiniteTable(t) => Ok(t.table[t.index_of(x)?][t.index_of(y)?].clone()),
        }
    }

    /// `p(x, y)` from the difference `x − y`, for metrics that only depend on it.
    pub(crate) fn p_from_difference(&self, d: &Vector) -> Option<Vector> {
        match &self.kind {
            MetricKind::ComponentwiseAbs => Some(d.abs()),
            MetricKind::WeightedComponentwise { weights } => {
                Some(Vector::raw(d.iter().zip(weights).map(|(di, w)| w * di.abs()).collect()))
            }
            MetricKind::FiniteTable(_) => None,
        }
    }

    /// `d_p(x, y) = ξ_e(p(x, y))`.
    pub fn dp(&self, ctx: &ScalarizationContext, x: &Vector, y: &Vector) -> Result<f64> {
        if ctx.cone() != &self.value_cone {
            return Err(Error::ConeMismatch);
        }
        ctx.xi(&self.p(x, y)?)
    }

    /// `d_S(x, y) = h(p(x, y))`. The family must be monotone and the order
    /// the orthant, so that the infimum over `u ≥ p(x, y)` sits at `u = p(x, y)`.
    pub fn ds(&self, family: &SeminormFamily, x: &Vector, y: &Vector) -> Result<f64> {
        if !family.is_monotone() {
            return Err(Error::MonotonicityRequired);
        }
        if !self.value_cone.is_orthant() {
            return Err(Error::UnsupportedOrder);
        }
        family.h(&self.p(x, y)?)
    }

    fn check_probes(&self, probes: &[Vector]) -> Result<()> {
        if probes.is_empty() {
            return Err(Error::Empty("probe family"));
        }
        for c in probes {
            if !self.value_cone.strictly_contains(c, ORDER_MARGIN)? {
                return Err(Error::NotInterior("probe"));
            }
        }
        Ok(())
    }

    /// Finite proxy for `xₙ → x`: `p(xₙ, x) ≪ c` for every probe `c` and every
    /// `n ≥ tail_index`.
    pub fn detect_cone_convergence(
        &self,
        sequence: &[Vector],
        limit: &Vector,
        probes: &[Vector],
        tail_index: usize,
    ) -> Result<bool> {
        self.check_probes(probes)?;
        if tail_index >= sequence.len() {
            return Err(Error::InvalidArgument(format!(
                "tail index {tail_index} must be below the sequence length {}",
                sequence.len()
            )));
        }
        for x in &sequence[tail_index..] {
            let d = self.p(x, limit)?;
            for c in probes {
                if !self.value_cone.ll(&d, c, ORDER_MARGIN)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Finite proxy for the Cauchy property: `p(xₙ, xₘ) ≪ c` for every probe
    /// and all `n, m ≥ tail_index`.
    pub fn detect_cone_cauchy(&self, sequence: &[Vector], probes: &[Vector], tail_index: usize) -> Result<bool> {
        self.check_probes(probes)?;
        if tail_index >= sequence.len() {
            return Err(Error::InvalidArgument(format!(
                "tail index {tail_index} must be below the sequence length {}",
                sequence.len()
            )));
        }
        let tail = &sequence[tail_index..];
        for (i, x) in tail.iter().enumerate() {
            for y in &tail[i + 1..] {
                let d = self.p(x, y)?;
                for c in probes {
                    if !self.value_cone.ll(&d, c, ORDER_MARGIN)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Pairwise diameter data of a finite set `A`.
    pub fn diameter(&self, points: &[Vector], family: &SeminormFamily) -> Result<DiameterReport> {
        if points.is_empty() {
            return Err(Error::Empty("point set"));
        }
        let mut values = Vec::with_capacity(points.len() * points.len());
        for x in points {
            for y in points {
                values.push(self.p(x, y)?);
            }
        }
        let seminorms = family.active_seminorms(self.value_cone.dim());
        let mut delta_q = vec![0.0f64; seminorms.len()];
        for value in &values {
            for (slot, q) in delta_q.iter_mut().zip(&seminorms) {
                *slot = slot.max(q.eval(value)?);
            }
        }
        let (delta, witness) = if self.value_cone.is_orthant() {
            let delta = self.value_cone.least_upper_bound(&values)?;
            let witness = delta.map(|x| x + 1.0);
            (Some(delta), witness)
        } else {
            // Every p-value is dominated by the sum of all of them.
            let mut sum = Vector::zeros(self.value_cone.dim());
            for value in &values {
                sum = sum.add(value)?;
            }
            (None, sum.add(self.value_cone.interior_witness())?)
        };
        Ok(DiameterReport { delta, delta_q, bounded_above: true, witness_bound: Some(witness) })
    }

    /// Membership in the closed ball `{y : p(x, y) ≤ c₀}` or the open ball
    /// `{y : p(x, y) ≪ c₀}`.
    pub fn ball_membership(&self, center: &Vector, radius: &Vector, point: &Vector, closed: bool) -> Result<bool> {
        if !self.value_cone.strictly_contains(radius, ORDER_MARGIN)? {
            return Err(Error::NotInterior("radius"));
        }
        let d = self.p(center, point)?;
        if closed {
            self.value_cone.leq(&d, radius, ORDER_TOL)
        } else {
            self.value_cone.ll(&d, radius, ORDER_MARGIN)
        }
    }
}

/// `true` iff `values[n] < threshold` for every `n ≥ tail_index`.
pub fn tail_below(values: &[f64], threshold: f64, tail_index: usize) -> bool {
    tail_index < values.len() && values[tail_index..].iter().all(|&v| v < threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    /// `sup p(x, y)`, present when the cone is strongly minihedral.
    pub delta: Option<Vector>,
    /// `δ_q(A) = max q(p(x, y))` per active seminorm.
    pub delta_q: Vec<f64>,
    pub bounded_above: bool,
    pub witness_bound: Option<Vector>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered_space::Seminorm;

    fn v(entries: &[f64]) -> Vector {
        Vector::from_slice(entries).unwrap()
    }

    fn three_point_table() -> FiniteTable {
        let z = v(&[0.0, 0.0]);
        let ab = v(&[1.0, 0.0]);
        let bc = v(&[0.0, 1.0]);
        let ac = v(&[1.0, 1.0]);
        FiniteTable {
            points: vec![v(&[0.0]), v(&[1.0]), v(&[2.0])],
            table: vec![
                vec![z.clone(), ab.clone(), ac.clone()],
                vec![ab, z.clone(), bc.clone()],
                vec![ac, bc, z],
            ],
        }
    }

    #[test]
    fn p_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        assert_eq!(space.p(&v(&[1.0, 2.0]), &v(&[3.0, 1.0])).unwrap(), v(&[2.0, 1.0]));
        assert!(space.p(&v(&[1.5, 2.0]), &v(&[1.5, 2.0])).unwrap().is_zero());
        let weighted = ConeMetricSpace::weighted(vec![2.0, 1.0]).unwrap();
        assert_eq!(weighted.p(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap(), v(&[2.0, 1.0]));
    }

    #[test]
    fn finite_table_lookup_and_validation() {
        let space = ConeMetricSpace::finite_table(three_point_table(), Cone::orthant(2).unwrap()).unwrap();
        assert_eq!(space.p(&v(&[0.0]), &v(&[2.0])).unwrap(), v(&[1.0, 1.0]));
        assert_eq!(space.p(&v(&[0.0]), &v(&[7.0])), Err(Error::UnknownPoint));

        let mut broken = three_point_table();
        broken.table[0][2] = v(&[2.0, 1.0]);
        broken.table[2][0] = v(&[2.0, 1.0]);
        assert!(matches!(
            ConeMetricSpace::finite_table(broken, Cone::orthant(2).unwrap()),
            Err(Error::InvalidTable(msg)) if msg.starts_with("triangle inequality")
        ));

        let mut asymmetric = three_point_table();
        asymmetric.table[0][1] = v(&[0.5, 0.0]);
        assert!(ConeMetricSpace::finite_table(asymmetric, Cone::orthant(2).unwrap()).is_err());
    }

    #[test]
    fn dp_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        let cone = space.value_cone().clone();
        let unit = ScalarizationContext::new(cone.clone(), v(&[1.0, 1.0]), 1e-9).unwrap();
        assert_eq!(space.dp(&unit, &v(&[0.0, 0.0]), &v(&[2.0, 3.0])).unwrap(), 3.0);
        assert_eq!(space.dp(&unit, &v(&[4.0, 4.0]), &v(&[4.0, 4.0])).unwrap(), 0.0);
        let skew = ScalarizationContext::new(cone, v(&[1.0, 2.0]), 1e-9).unwrap();
        assert_eq!(space.dp(&skew, &v(&[0.0, 0.0]), &v(&[2.0, 3.0])).unwrap(), 2.0);

        let other = ScalarizationContext::new(Cone::lorentz(2).unwrap(), v(&[0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(space.dp(&other, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])), Err(Error::ConeMismatch));
    }

    #[test]
    fn ds_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        let family = SeminormFamily::new(
            vec![Seminorm::Coordinate { k: 1 }, Seminorm::Coordinate { k: 2 }],
            2,
        )
        .unwrap();
        assert!((space.ds(&family, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(space.ds(&family, &v(&[1.0, 1.0]), &v(&[1.0, 1.0])).unwrap(), 0.0);

        let omega = ConeMetricSpace::componentwise_abs(20).unwrap();
        let mut y = vec![0.0; 20];
        y[0] = 0.1;
        let d = omega
            .ds(&SeminormFamily::coordinate(20).unwrap(), &Vector::zeros(20), &v(&y))
            .unwrap();
        assert!((d - 0.05 / 1.1).abs() < 1e-15);

        assert_eq!(
            space.ds(&family.clone().declared_non_monotone(), &v(&[0.0, 0.0]), &v(&[1.0, 1.0])),
            Err(Error::MonotonicityRequired)
        );
        let table_space = ConeMetricSpace::finite_table(
            FiniteTable {
                points: vec![v(&[0.0]), v(&[1.0])],
                table: vec![vec![v(&[0.0, 0.0]), v(&[0.0, 1.0])], vec![v(&[0.0, 1.0]), v(&[0.0, 0.0])]],
            },
            Cone::lorentz(2).unwrap(),
        )
        .unwrap();
        assert_eq!(table_space.ds(&family, &v(&[0.0]), &v(&[1.0])), Err(Error::UnsupportedOrder));
    }

    #[test]
    fn convergence_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        let seq: Vec<Vector> = (1..=20).map(|n| v(&[1.0 / n as f64, 1.0 / n as f64])).collect();
        let origin = v(&[0.0, 0.0]);
        let half = v(&[0.5, 0.5]);
        // index 2 holds n = 3
        assert!(space.detect_cone_convergence(&seq, &origin, &[half.clone()], 2).unwrap());
        assert!(!space.detect_cone_convergence(&seq, &origin, &[half.clone()], 1).unwrap());

        let constant = vec![v(&[3.0, 1.0]); 5];
        assert!(space.detect_cone_convergence(&constant, &v(&[3.0, 1.0]), &[half.clone()], 1).unwrap());
        let ones = vec![v(&[1.0, 1.0]); 5];
        assert!(!space.detect_cone_convergence(&ones, &origin, &[half.clone()], 1).unwrap());

        assert_eq!(
            space.detect_cone_convergence(&seq, &origin, &[v(&[0.5, 0.0])], 2),
            Err(Error::NotInterior("probe"))
        );
        assert!(space.detect_cone_convergence(&seq, &origin, &[half], 20).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        let seq: Vec<Vector> = (1..=20).map(|n| v(&[1.0 / n as f64, 1.0 / n as f64])).collect();
        assert!(space.detect_cone_cauchy(&seq, &[v(&[1.0, 1.0])], 1).unwrap());
        assert!(space.detect_cone_cauchy(&vec![v(&[2.0, 2.0]); 4], &[v(&[1e-3, 1e-3])], 0).unwrap());
        let alternating: Vec<Vector> =
            (0..10).map(|i| if i % 2 == 0 { v(&[0.0, 0.0]) } else { v(&[1.0, 1.0]) }).collect();
        assert!(!space.detect_cone_cauchy(&alternating, &[v(&[0.5, 0.5])], 0).unwrap());
    }

    #[test]
    fn diameter_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        let family = SeminormFamily::new(
            vec![Seminorm::Coordinate { k: 1 }, Seminorm::Coordinate { k: 2 }],
            2,
        )
        .unwrap();
        let set = [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 2.0])];
        let report = space.diameter(&set, &family).unwrap();
        assert_eq!(report.delta, Some(v(&[1.0, 2.0])));
        assert_eq!(report.delta_q, vec![1.0, 2.0]);
        assert_eq!(report.witness_bound, Some(v(&[2.0, 3.0])));

        let single = space.diameter(&[v(&[4.0, 4.0])], &family).unwrap();
        assert_eq!(single.delta, Some(v(&[0.0, 0.0])));
        assert_eq!(single.delta_q, vec![0.0, 0.0]);
    }

    #[test]
    fn ball_examples() {
        let space = ConeMetricSpace::componentwise_abs(2).unwrap();
        let center = v(&[0.0, 0.0]);
        let radius = v(&[1.0, 1.0]);
        assert!(space.ball_membership(&center, &radius, &v(&[1.0, 1.0]), true).unwrap());
        assert!(!space.ball_membership(&center, &radius, &v(&[1.0, 1.0]), false).unwrap());
        assert!(space.ball_membership(&center, &radius, &v(&[0.5, 0.5]), false).unwrap());
        assert_eq!(
            space.ball_membership(&center, &v(&[1.0, 0.0]), &center, true),
            Err(Error::NotInterior("radius"))
        );
    }

    #[test]
    fn tail_below_requires_a_tail() {
        assert!(tail_below(&[5.0, 0.1, 0.01], 0.5, 1));
        assert!(!tail_below(&[5.0, 0.1, 0.01], 0.05, 1));
        assert!(!tail_below(&[0.0], 1.0, 1));
    }
}
