//! Fixed-point iteration on cone metric spaces.
//!
//! Three solvers share the iteration loop `xₙ₊₁ = T xₙ` and differ in the
//! hypotheses they check and in their stopping rule:
//!
//! - [`banach_solve`]: `p(Tx, Ty) ≤ k·p(x, y)`, stops on the a-posteriori
//!   bound `k/(1−k)·d_p(xₙ, xₙ₋₁) ≤ tol`.
//! - [`boyd_wong_solve`]: `p(Tx, Ty) ≤ φ(p(x, y))` for an order map `φ` from a
//!   closed catalog. Scalarizing `φ` gives a real function `φ̂` with
//!   `d_p(Tx, Ty) ≤ φ̂(d_p(x, y))`; with `φ̂(r) < r` the Boyd–Wong theorem applies.
//! - [`weak_contraction_iterate`]: `p(Tx, Ty) ≤ p(x, y) − φ(p(x, y))` checked
//!   along the orbit only. Never certifies convergence.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cone_metric::{ConeMetricSpace, ORDER_MARGIN, ORDER_TOL};
use crate::error::{Error, Result};
use crate::ordered_space::{SeminormFamily, Vector};
use crate::report::{run_checks, Check, Outcome, PropertyReport};
use crate::sampling::{self, SampleSpec};
use crate::scalarization::ScalarizationContext;

pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Self-maps `T : X → X` from a closed catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDescriptor {
    /// `Tx = a ⊙ x + b`
    DiagonalAffine { diag: Vector, shift: Vector },
    /// `(Tx)ᵢ = xᵢ / (1 + xᵢ)` on the nonnegative orthant.
    CoordinateRatio,
    /// `(Tx)ᵢ = clamp(xᵢ − xᵢ²/2, 0, 1)`
    QuadraticDecrement,
    /// Applies `maps` in order, first to last.
    Composite { maps: Vec<MapDescriptor> },
}

impl MapDescriptor {
    pub fn identity(dim: usize) -> Self {
        MapDescriptor::DiagonalAffine { diag: Vector::filled(dim, 1.0), shift: Vector::zeros(dim) }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        match self {
            MapDescriptor::DiagonalAffine { diag, shift } => {
                diag.check_dim(x.dim())?;
                shift.check_dim(x.dim())?;
                x.hadamard(diag)?.add(shift)
            }
            MapDescriptor::CoordinateRatio => {
                if x.iter().any(|&s| s < 0.0) {
                    return Err(Error::InvalidArgument(
                        "coordinate ratio map is defined on x ≥ 0".into(),
                    ));
                }
                Ok(x.map(|s| s / (1.0 + s)))
            }
            MapDescriptor::QuadraticDecrement => Ok(x.map(|s| (s - 0.5 * s * s).clamp(0.0, 1.0))),
            MapDescriptor::Composite { maps } => {
                maps.iter().try_fold(x.clone(), |acc, map| map.apply(&acc))
            }
        }
    }

    /// Whether `x` lies in the region the map is analysed on.
    pub fn in_domain(&self, x: &Vector) -> bool {
        match self {
            MapDescriptor::CoordinateRatio => x.iter().all(|&s| s >= 0.0),
            MapDescriptor::QuadraticDecrement => x.iter().all(|&s| (0.0..=1.0).contains(&s)),
            MapDescriptor::Composite { maps } => maps.first().is_none_or(|m| m.in_domain(x)),
            MapDescriptor::DiagonalAffine { .. } => true,
        }
    }

    /// `max |aᵢ|` for diagonal affine maps (the componentwise contraction constant).
    pub fn diagonal_modulus(&self) -> Option<f64> {
        match self {
            MapDescriptor::DiagonalAffine { diag, .. } => Some(diag.max_abs()),
            _ => None,
        }
    }

    /// Samples a point of the map's domain inside the sampling box.
    fn sample_point(&self, rng: &mut rand_chacha::ChaCha8Rng, dim: usize, spec: &SampleSpec) -> Vector {
        match self {
            MapDescriptor::CoordinateRatio => {
                sampling::uniform_vector(rng, dim, spec.lo().max(0.0), spec.hi().max(1.0))
            }
            MapDescriptor::QuadraticDecrement => sampling::uniform_vector(rng, dim, 0.0, 1.0),
            MapDescriptor::Composite { maps } => match maps.first() {
                Some(first) => first.sample_point(rng, dim, spec),
                None => sampling::uniform_vector(rng, dim, spec.lo(), spec.hi()),
            },
            MapDescriptor::DiagonalAffine { .. } => sampling::uniform_vector(rng, dim, spec.lo(), spec.hi()),
        }
    }
}

/// Order maps `φ : P → P` from a closed catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarphiDescriptor {
    /// `φ(u) = αu`
    Scale { alpha: f64 },
    /// `φ(u)ᵢ = uᵢ / (1 + uᵢ)`
    CoordinateRatio,
    /// `φ(u)ᵢ = uᵢ² / 2`
    HalfSquare,
}

impl VarphiDescriptor {
    pub fn apply(&self, u: &Vector) -> Result<Vector> {
        match *self {
            VarphiDescriptor::Scale { alpha } => {
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return Err(Error::InvalidArgument("scale factor must be finite and ≥ 0".into()));
                }
                Ok(u.scale(alpha))
            }
            VarphiDescriptor::CoordinateRatio => {
                if u.iter().any(|&s| s < 0.0) {
                    return Err(Error::InvalidArgument("coordinate ratio φ is defined on u ≥ 0".into()));
                }
                Ok(u.map(|s| s / (1.0 + s)))
            }
            VarphiDescriptor::HalfSquare => Ok(u.map(|s| 0.5 * s * s)),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            VarphiDescriptor::Scale { .. } => "scale",
            VarphiDescriptor::CoordinateRatio => "coordinate_ratio",
            VarphiDescriptor::HalfSquare => "half_square",
        }
    }
}

/// Scalarized comparison function: `ξ_e(φ(e))·r` for `Scale` (linear), and
/// `ξ_e(φ(re))` otherwise.
pub fn scalarize_varphi(ctx: &ScalarizationContext, varphi: &VarphiDescriptor, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("r must be finite and ≥ 0".into()));
    }
    match varphi {
        VarphiDescriptor::Scale { .. } => Ok(ctx.xi(&varphi.apply(ctx.e())?)? * r),
        _ => ctx.xi(&varphi.apply(&ctx.e().scale(r))?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    BanachVerified,
    BoydWongVerified,
    WeakContractionMonotone,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_point: Vector,
    /// `d_p(xₙ₊₁, xₙ)` per step.
    pub residual_history: Vec<f64>,
    /// Largest ratio of successive residuals.
    pub contraction_estimate: f64,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_failure: Option<String>,
    /// `p(xₙ, xₙ₊₁)` per step.
    #[serde(skip)]
    pub residual_vectors: Vec<Vector>,
}

impl FixedPointReport {
    /// `d_S(xₙ₊₁, xₙ) = h(p(xₙ, xₙ₊₁))` per step.
    pub fn residual_ds(&self, family: &SeminormFamily) -> Result<Vec<f64>> {
        self.residual_vectors.iter().map(|r| family.h(r)).collect()
    }

    /// CSV trace with columns `n,residual_dp,residual_dS`; the last column is
    /// empty when no family is given.
    pub fn write_trace_csv<W: Write>(&self, writer: W, family: Option<&SeminormFamily>) -> Result<()> {
        let ds = match family {
            Some(f) => Some(self.residual_ds(f)?),
            None => None,
        };
        let io_err = |e: csv::Error| Error::InvalidArgument(format!("trace write failed: {e}"));
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["n", "residual_dp", "residual_dS"]).map_err(io_err)?;
        for (n, dp) in self.residual_history.iter().enumerate() {
            let ds_field = ds.as_ref().map(|v| format!("{:?}", v[n])).unwrap_or_default();
            out.write_record([(n + 1).to_string(), format!("{dp:?}"), ds_field]).map_err(io_err)?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("trace write failed: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: DEFAULT_MAX_ITER }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument("solver tol must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// How a solver establishes its hypotheses before iterating.
#[derive(Debug, Clone, PartialEq)]
pub enum Verification {
    Sampled(SampleSpec),
    /// Skip the sampled checks; the run is reported as `Unverified`.
    Skip,
}

fn pair_json(x: &Vector, y: &Vector) -> serde_json::Value {
    json!({ "x": x.as_slice(), "y": y.as_slice() })
}

/// Samples `(x, y)` and checks `p(Tx, Ty) ≤ k·p(x, y)` in the cone order.
pub fn verify_contraction(space: &ConeMetricSpace, map: &MapDescriptor, k: f64, spec: &SampleSpec) -> Result<PropertyReport> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidArgument("contraction constant must lie in [0, 1)".into()));
    }
    spec.validate()?;
    Ok(run_checks(&[contraction_check(space, map, k, spec)], spec.seed))
}

pub fn contraction_check<'a>(space: &'a ConeMetricSpace, map: &'a MapDescriptor, k: f64, spec: &'a SampleSpec) -> Check<'a> {
    let cone = space.value_cone();
    let dim = space.point_dim();
    Check::new("p(Tx,Ty) <= k p(x,y)", spec.count, move |rng, _| {
        let (x, y) = sample_pair(space, map, rng, dim, spec);
        let evaluated = (|| {
            let lhs = space.p(&map.apply(&x)?, &map.apply(&y)?)?;
            let rhs = space.p(&x, &y)?.scale(k);
            let slack = cone.min_slack(&rhs.sub(&lhs)?)?;
            Ok::<_, Error>(slack)
        })();
        match evaluated {
            Ok(slack) => Outcome::check(slack >= -ORDER_TOL, -slack, || pair_json(&x, &y)),
            Err(err) => Outcome::error(err, pair_json(&x, &y)),
        }
    })
}

fn sample_pair(
    space: &ConeMetricSpace,
    map: &MapDescriptor,
    rng: &mut rand_chacha::ChaCha8Rng,
    dim: usize,
    spec: &SampleSpec,
) -> (Vector, Vector) {
    match space.finite_points() {
        Some(points) => {
            use rand::Rng;
            let i = rng.gen_range(0..points.len());
            let j = rng.gen_range(0..points.len());
            (points[i].clone(), points[j].clone())
        }
        None => (map.sample_point(rng, dim, spec), map.sample_point(rng, dim, spec)),
    }
}

struct Iteration {
    points_seen: usize,
    final_point: Vector,
    residuals: Vec<f64>,
    residual_vectors: Vec<Vector>,
    converged: bool,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// One step of `x ↦ a ⊙ x + b` on iterates stored as unevaluated sums
/// `hi + lo`. Returns the new `hi` and the difference `xₙ − xₙ₊₁`, both
/// accurate far below `ulp(x)`; `lo` is updated in place.
fn compensated_affine_step(diag: &Vector, shift: &Vector, hi: &Vector, lo: &mut [f64]) -> (Vector, Vector) {
    let mut next = Vec::with_capacity(hi.dim());
    let mut diff = Vec::with_capacity(hi.dim());
    for i in 0..hi.dim() {
        let (a, b) = (diag[i], shift[i]);
        let p = a * hi[i];
        let p_err = a.mul_add(hi[i], -p) + a * lo[i];
        let (s, s_err) = two_sum(p, b);
        let (h, l) = two_sum(s, s_err + p_err);
        let (d, d_err) = two_sum(hi[i], -h);
        diff.push(d + (d_err + (lo[i] - l)));
        next.push(h);
        lo[i] = l;
    }
    (Vector::raw(next), Vector::raw(diff))
}

/// Runs `xₙ₊₁ = T xₙ` until `stop(residuals, next_residual)` holds or
/// `max_iter` steps are taken. Diagonal affine maps on translation-invariant
/// metrics are iterated in compensated arithmetic.
fn iterate(
    space: &ConeMetricSpace,
    ctx: &ScalarizationContext,
    map: &MapDescriptor,
    x0: &Vector,
    opts: &SolveOptions,
    mut stop: impl FnMut(&[f64], &Vector, &Vector) -> Result<bool>,
) -> Result<Iteration> {
    x0.check_dim(space.point_dim())?;
    if ctx.cone() != space.value_cone() {
        return Err(Error::ConeMismatch);
    }
    map.apply(x0)?;
    let mut compensated = match map {
        MapDescriptor::DiagonalAffine { diag, shift } if space.p_from_difference(x0).is_some() => {
            Some((diag, shift, vec![0.0; x0.dim()]))
        }
        _ => None,
    };
    let mut x = x0.clone();
    let mut residuals = Vec::new();
    let mut residual_vectors = Vec::new();
    let mut converged = false;
    let mut steps = 0;
    while steps < opts.max_iter {
        let (next, p) = match &mut compensated {
            Some((diag, shift, lo)) => {
                let (next, diff) = compensated_affine_step(diag, shift, &x, lo);
                let p = space.p_from_difference(&diff).expect("translation-invariant metric");
                (next, p)
            }
            None => {
                let next = map.apply(&x)?;
                let p = if next.is_finite() { space.p(&x, &next)? } else { next.clone() };
                (next, p)
            }
        };
        steps += 1;
        if !next.is_finite() || !p.is_finite() {
            return Err(Error::Divergence(steps));
        }
        residuals.push(ctx.xi(&p)?);
        residual_vectors.push(p);
        x = next;
        if stop(&residuals, &x, residual_vectors.last().expect("just pushed"))? {
            converged = true;
            break;
        }
    }
    Ok(Iteration { points_seen: steps, final_point: x, residuals, residual_vectors, converged })
}

/// Largest `rₙ₊₁ / rₙ` over steps with `rₙ > 0`.
fn max_ratio(residuals: &[f64]) -> f64 {
    residuals
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Banach iteration. With [`Verification::Sampled`] the contraction
/// inequality is checked first and a failure is an error.
pub fn banach_solve(
    space: &ConeMetricSpace,
    ctx: &ScalarizationContext,
    map: &MapDescriptor,
    k: f64,
    x0: &Vector,
    opts: &SolveOptions,
    verification: &Verification,
) -> Result<FixedPointReport> {
    opts.validate()?;
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidArgument("contraction constant must lie in [0, 1)".into()));
    }
    let certificate = match verification {
        Verification::Sampled(spec) => {
            let report = verify_contraction(space, map, k, spec)?;
            if let Some(failure) = report.failures().next() {
                return Err(Error::HypothesisViolated(format!(
                    "{} (counterexample {})",
                    failure.name,
                    failure.counterexample.as_ref().map(|c| c.inputs.to_string()).unwrap_or_default()
                )));
            }
            Certificate::BanachVerified
        }
        Verification::Skip => Certificate::Unverified,
    };
    let factor = k / (1.0 - k);
    let run = iterate(space, ctx, map, x0, opts, |residuals, _, _| {
        Ok(factor * residuals.last().copied().unwrap_or(f64::INFINITY) <= opts.tol)
    })?;
    Ok(FixedPointReport {
        converged: run.converged,
        iterations: run.points_seen,
        final_point: run.final_point,
        contraction_estimate: max_ratio(&run.residuals),
        residual_history: run.residuals,
        certificate,
        hypothesis_failure: None,
        residual_vectors: run.residual_vectors,
    })
}

/// Sampled side conditions of `φ`:
///
/// - `φ(0) = 0` and `φ` increasing on `P`;
/// - `Scale`: `φ(re) ≤ rφ(e)` for `r ≥ 0` and `ξ_e(φ(e)) < 1`;
/// - `CoordinateRatio`: `φ(re) ≪ re` for `r > 0`.
pub fn check_varphi_hypotheses(ctx: &ScalarizationContext, varphi: &VarphiDescriptor, spec: &SampleSpec) -> Result<PropertyReport> {
    spec.validate()?;
    Ok(run_checks(&varphi_checks(ctx, varphi, spec), spec.seed))
}

fn varphi_checks<'a>(ctx: &'a ScalarizationContext, varphi: &'a VarphiDescriptor, spec: &'a SampleSpec) -> Vec<Check<'a>> {
    let cone = ctx.cone();
    let radius = spec.radius();
    let e = ctx.e();
    let mut checks = vec![
        Check::new("varphi(0) = 0", 1, move |_, _| match varphi.apply(&Vector::zeros(cone.dim())) {
            Ok(v) => Outcome::check(v.is_zero(), v.max_abs(), || json!({ "varphi_0": v.as_slice() })),
            Err(err) => Outcome::error(err, json!(null)),
        }),
        Check::new("varphi increasing", spec.count, move |rng, _| {
            let u = sampling::cone_point(rng, cone, radius);
            let w = u.add(&sampling::cone_point(rng, cone, radius)).expect("same dimension");
            match (varphi.apply(&u), varphi.apply(&w)) {
                (Ok(a), Ok(b)) => {
                    let slack = cone.min_slack(&b.sub(&a).expect("same dimension")).unwrap_or(f64::NEG_INFINITY);
                    Outcome::check(slack >= -ORDER_TOL, -slack, || json!({ "u": u.as_slice(), "w": w.as_slice() }))
                }
                (Err(err), _) | (_, Err(err)) => Outcome::error(err, json!({ "u": u.as_slice() })),
            }
        }),
    ];
    match varphi {
        VarphiDescriptor::Scale { .. } => {
            checks.push(Check::new("varphi(re) <= r varphi(e)", spec.count, move |rng, _| {
                let r = sampling::uniform(rng, 0.0, radius);
                match (varphi.apply(&e.scale(r)), varphi.apply(e)) {
                    (Ok(a), Ok(b)) => {
                        let slack = cone.min_slack(&b.scale(r).sub(&a).expect("same dimension")).unwrap_or(f64::NEG_INFINITY);
                        Outcome::check(slack >= -ORDER_TOL, -slack, || json!({ "r": r }))
                    }
                    (Err(err), _) | (_, Err(err)) => Outcome::error(err, json!({ "r": r })),
                }
            }));
            checks.push(Check::new("xi_e(varphi(e)) < 1", 1, move |_, _| {
                match varphi.apply(e).and_then(|v| ctx.xi(&v)) {
                    Ok(value) => Outcome::check(value < 1.0, value - 1.0, || json!({ "xi_varphi_e": value })),
                    Err(err) => Outcome::error(err, json!(null)),
                }
            }));
        }
        VarphiDescriptor::CoordinateRatio | VarphiDescriptor::HalfSquare => {
            checks.push(Check::new("varphi(re) << re", spec.count, move |rng, _| {
                let r = sampling::log_uniform(rng, 1e-3, 1e3);
                let re = e.scale(r);
                match varphi.apply(&re) {
                    Ok(v) => {
                        let ok = cone.ll(&v, &re, ORDER_MARGIN).unwrap_or(false);
                        Outcome::check(ok, 0.0, || json!({ "r": r, "varphi_re": v.as_slice() }))
                    }
                    Err(err) => Outcome::error(err, json!({ "r": r })),
                }
            }));
        }
    }
    checks
}

/// Samples `(x, y)` and checks `p(Tx, Ty) ≤ φ(p(x, y))`.
pub fn domination_check<'a>(
    space: &'a ConeMetricSpace,
    map: &'a MapDescriptor,
    varphi: &'a VarphiDescriptor,
    spec: &'a SampleSpec,
) -> Check<'a> {
    let cone = space.value_cone();
    let dim = space.point_dim();
    Check::new("p(Tx,Ty) <= varphi(p(x,y))", spec.count, move |rng, _| {
        let (x, y) = sample_pair(space, map, rng, dim, spec);
        let evaluated = (|| {
            let lhs = space.p(&map.apply(&x)?, &map.apply(&y)?)?;
            let rhs = varphi.apply(&space.p(&x, &y)?)?;
            cone.min_slack(&rhs.sub(&lhs)?)
        })();
        match evaluated {
            Ok(slack) => Outcome::check(slack >= -ORDER_TOL, -slack, || pair_json(&x, &y)),
            Err(err) => Outcome::error(err, pair_json(&x, &y)),
        }
    })
}

/// Iteration under a `φ`-contraction. All sampled hypotheses must pass,
/// otherwise [`Error::HypothesisViolated`] names the failing ones.
///
/// `Scale{α}` reduces to a Banach iteration with `k = ξ_e(φ(e))` and uses the
/// a-posteriori stop; other kinds stop once `d_p(xₙ₊₁, xₙ) ≤ tol` and
/// `d_p(Txₙ₊₁, xₙ₊₁) ≤ tol`.
#[allow(clippy::too_many_arguments)]
pub fn boyd_wong_solve(
    space: &ConeMetricSpace,
    map: &MapDescriptor,
    varphi: &VarphiDescriptor,
    ctx: &ScalarizationContext,
    x0: &Vector,
    opts: &SolveOptions,
    spec: &SampleSpec,
) -> Result<FixedPointReport> {
    opts.validate()?;
    spec.validate()?;
    if matches!(varphi, VarphiDescriptor::HalfSquare) {
        return Err(Error::HypothesisViolated(
            "half_square φ only supports the weak-contraction iteration".into(),
        ));
    }
    let mut checks = varphi_checks(ctx, varphi, spec);
    checks.push(domination_check(space, map, varphi, spec));
    let report = run_checks(&checks, spec.seed);
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::HypothesisViolated(format!("{} φ: {}", varphi.name(), failed.join(", "))));
    }

    let run = match varphi {
        VarphiDescriptor::Scale { .. } => {
            let k = scalarize_varphi(ctx, varphi, 1.0)?;
            let factor = k / (1.0 - k);
            iterate(space, ctx, map, x0, opts, |residuals, _, _| {
                Ok(factor * residuals.last().copied().unwrap_or(f64::INFINITY) <= opts.tol)
            })?
        }
        _ => iterate(space, ctx, map, x0, opts, |residuals, x, _| {
            let step = residuals.last().copied().unwrap_or(f64::INFINITY);
            if step > opts.tol {
                return Ok(false);
            }
            let next = map.apply(x)?;
            Ok(space.dp(ctx, &next, x)? <= opts.tol)
        })?,
    };
    Ok(FixedPointReport {
        converged: run.converged,
        iterations: run.points_seen,
        final_point: run.final_point,
        contraction_estimate: max_ratio(&run.residuals),
        residual_history: run.residuals,
        certificate: Certificate::BoydWongVerified,
        hypothesis_failure: None,
        residual_vectors: run.residual_vectors,
    })
}

/// `p(Tx, Ty) ≤ p(x, y) − φ(p(x, y))` in the cone order.
pub fn weak_contraction_holds(
    space: &ConeMetricSpace,
    map: &MapDescriptor,
    varphi: &VarphiDescriptor,
    x: &Vector,
    y: &Vector,
) -> Result<bool> {
    let d = space.p(x, y)?;
    let rhs = d.sub(&varphi.apply(&d)?)?;
    let lhs = space.p(&map.apply(x)?, &map.apply(y)?)?;
    space.value_cone().leq(&lhs, &rhs, ORDER_TOL)
}

/// Iterates `T` for up to `opts.max_iter` steps, checking along the orbit that
/// each step satisfies the weak-contraction inequality and that the residual
/// vectors `p(xₙ, xₙ₊₁)` decrease in the cone order. Stops early once
/// `d_p(xₙ, xₙ₊₁) ≤ opts.tol`.
pub fn weak_contraction_iterate(
    space: &ConeMetricSpace,
    ctx: &ScalarizationContext,
    map: &MapDescriptor,
    varphi: &VarphiDescriptor,
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<FixedPointReport> {
    opts.validate()?;
    let zero = Vector::zeros(space.value_cone().dim());
    if !varphi.apply(&zero)?.is_zero() {
        return Err(Error::HypothesisViolated("φ(0) ≠ 0".into()));
    }
    let cone = space.value_cone();
    let mut failure: Option<String> = None;
    let run = iterate(space, ctx, map, x0, opts, |residuals, _, _| {
        Ok(residuals.last().is_some_and(|&r| r <= opts.tol))
    })?;

    for (n, pair) in run.residual_vectors.windows(2).enumerate() {
        let (previous, current) = (&pair[0], &pair[1]);
        let bound = previous.sub(&varphi.apply(previous)?)?;
        if !cone.leq(current, &bound, ORDER_TOL)? {
            failure = Some(format!("weak contraction inequality fails at step {}", n + 1));
            break;
        }
        if !cone.leq(current, previous, ORDER_TOL)? {
            failure = Some(format!("residual chain increases at step {}", n + 1));
            break;
        }
    }
    let certificate = if failure.is_none() {
        Certificate::WeakContractionMonotone
    } else {
        Certificate::Unverified
    };
    Ok(FixedPointReport {
        converged: run.converged,
        iterations: run.points_seen,
        final_point: run.final_point,
        contraction_estimate: max_ratio(&run.residuals),
        residual_history: run.residuals,
        certificate,
        hypothesis_failure: failure,
        residual_vectors: run.residual_vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[f64]) -> Vector {
        Vector::from_slice(entries).unwrap()
    }

    fn affine(a: &[f64], b: &[f64]) -> MapDescriptor {
        MapDescriptor::DiagonalAffine { diag: v(a), shift: v(b) }
    }

    fn setup(e: &[f64]) -> (ConeMetricSpace, ScalarizationContext) {
        let space = ConeMetricSpace::componentwise_abs(e.len()).unwrap();
        let ctx = ScalarizationContext::new(space.value_cone().clone(), v(e), 1e-9).unwrap();
        (space, ctx)
    }

    fn spec() -> SampleSpec {
        SampleSpec::new(2000, 3)
    }

    #[test]
    fn verify_contraction_examples() {
        let (space, _) = setup(&[1.0, 1.0]);
        assert!(verify_contraction(&space, &affine(&[0.5, 0.5], &[0.0, 0.0]), 0.5, &spec()).unwrap().passed());
        let bad = verify_contraction(&space, &affine(&[0.9, 0.2], &[0.0, 0.0]), 0.5, &spec()).unwrap();
        assert!(!bad.passed());
        assert!(bad.checks[0].counterexample.is_some());
        assert!(!verify_contraction(&space, &MapDescriptor::identity(2), 0.99, &spec()).unwrap().passed());
        assert!(verify_contraction(&space, &MapDescriptor::identity(2), 1.0, &spec()).is_err());
    }

    #[test]
    fn banach_examples() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let opts = SolveOptions { tol: 1e-10, max_iter: 1000 };
        let verify = Verification::Sampled(spec());

        let r = banach_solve(&space, &ctx, &affine(&[0.5, 0.5], &[1.0, 1.0]), 0.5, &v(&[0.0, 0.0]), &opts, &verify).unwrap();
        assert!(r.converged);
        assert_eq!(r.certificate, Certificate::BanachVerified);
        assert!(r.final_point.sub(&v(&[2.0, 2.0])).unwrap().max_abs() <= 1e-10);

        let r = banach_solve(&space, &ctx, &affine(&[0.0, 0.0], &[3.0, -1.0]), 0.0, &v(&[7.0, 7.0]), &opts, &verify).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.final_point, v(&[3.0, -1.0]));

        let map = affine(&[0.9, 0.9], &[0.1, 0.2]);
        let r = banach_solve(&space, &ctx, &map, 0.9, &v(&[5.0, 5.0]), &opts, &verify).unwrap();
        assert!(r.converged);
        assert!(r.final_point.sub(&v(&[1.0, 2.0])).unwrap().max_abs() <= 1e-9);
        let residual = map.apply(&r.final_point).unwrap().sub(&r.final_point).unwrap().max_abs();
        assert!(residual <= 1e-9);
    }

    #[test]
    fn banach_rejects_unverified_contraction_unless_skipped() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let map = affine(&[0.9, 0.2], &[0.0, 0.0]);
        let opts = SolveOptions { tol: 1e-10, max_iter: 1000 };
        let err = banach_solve(&space, &ctx, &map, 0.5, &v(&[1.0, 1.0]), &opts, &Verification::Sampled(spec()));
        assert!(matches!(err, Err(Error::HypothesisViolated(_))));
        let r = banach_solve(&space, &ctx, &map, 0.5, &v(&[1.0, 1.0]), &opts, &Verification::Skip).unwrap();
        assert_eq!(r.certificate, Certificate::Unverified);
    }

    #[test]
    fn banach_reports_non_convergence_and_divergence() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let opts = SolveOptions { tol: 1e-12, max_iter: 5 };
        let r = banach_solve(&space, &ctx, &affine(&[0.9, 0.9], &[1.0, 1.0]), 0.9, &v(&[0.0, 0.0]), &opts, &Verification::Skip).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);

        let blowup = affine(&[1e300, 1e300], &[0.0, 0.0]);
        let opts = SolveOptions { tol: 1e-12, max_iter: 10 };
        let err = banach_solve(&space, &ctx, &blowup, 0.5, &v(&[1.0, 1.0]), &opts, &Verification::Skip);
        assert_eq!(err.unwrap_err(), Error::Divergence(2));
    }

    #[test]
    fn scalarize_varphi_examples() {
        let (_, ctx) = setup(&[1.0, 1.0]);
        let scale = VarphiDescriptor::Scale { alpha: 0.5 };
        assert!((scalarize_varphi(&ctx, &scale, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(scalarize_varphi(&ctx, &scale, 0.0).unwrap(), 0.0);
        assert_eq!(scalarize_varphi(&ctx, &VarphiDescriptor::CoordinateRatio, 0.0).unwrap(), 0.0);
        assert_eq!(scalarize_varphi(&ctx, &VarphiDescriptor::CoordinateRatio, 1.0).unwrap(), 0.5);
        assert!(scalarize_varphi(&ctx, &scale, -1.0).is_err());

        let (_, skew) = setup(&[1.0, 2.0]);
        assert!((scalarize_varphi(&skew, &scale, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boyd_wong_examples() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let opts = SolveOptions { tol: 1e-8, max_iter: DEFAULT_MAX_ITER };
        let r = boyd_wong_solve(
            &space,
            &MapDescriptor::CoordinateRatio,
            &VarphiDescriptor::CoordinateRatio,
            &ctx,
            &v(&[1.0, 1.0]),
            &opts,
            &spec(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.certificate, Certificate::BoydWongVerified);
        assert!(r.final_point.max_abs() <= 1.01 * opts.tol.sqrt() + opts.tol);

        let r = boyd_wong_solve(
            &space,
            &affine(&[0.5, 0.5], &[0.0, 0.0]),
            &VarphiDescriptor::Scale { alpha: 0.5 },
            &ctx,
            &v(&[3.0, 4.0]),
            &opts,
            &spec(),
        )
        .unwrap();
        assert!(r.converged);
        assert!(r.final_point.max_abs() <= 1e-8);

        let err = boyd_wong_solve(
            &space,
            &affine(&[0.5, 0.5], &[0.0, 0.0]),
            &VarphiDescriptor::Scale { alpha: 1.0 },
            &ctx,
            &v(&[3.0, 4.0]),
            &opts,
            &spec(),
        );
        assert!(matches!(err, Err(Error::HypothesisViolated(msg)) if msg.contains("xi_e(varphi(e)) < 1")));
    }

    #[test]
    fn boyd_wong_detects_map_not_dominated() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let err = boyd_wong_solve(
            &space,
            &affine(&[0.9, 0.9], &[0.0, 0.0]),
            &VarphiDescriptor::Scale { alpha: 0.5 },
            &ctx,
            &v(&[1.0, 1.0]),
            &SolveOptions::default(),
            &spec(),
        );
        assert!(matches!(err, Err(Error::HypothesisViolated(msg)) if msg.contains("p(Tx,Ty)")));
    }

    #[test]
    fn weak_contraction_examples() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let opts = SolveOptions { tol: 1e-6, max_iter: DEFAULT_MAX_ITER };
        let r = weak_contraction_iterate(
            &space,
            &ctx,
            &MapDescriptor::QuadraticDecrement,
            &VarphiDescriptor::HalfSquare,
            &v(&[0.5, 0.5]),
            &opts,
        )
        .unwrap();
        assert_eq!(r.certificate, Certificate::WeakContractionMonotone);
        assert!(r.converged);
        assert!(r.residual_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));

        // identity: (w1) fails for any x ≠ y
        let identity = MapDescriptor::identity(2);
        assert!(!weak_contraction_holds(&space, &identity, &VarphiDescriptor::HalfSquare, &v(&[0.0, 0.0]), &v(&[0.5, 0.1])).unwrap());

        // already fixed: zero residuals, certificate granted
        let r = weak_contraction_iterate(&space, &ctx, &MapDescriptor::QuadraticDecrement, &VarphiDescriptor::HalfSquare, &v(&[0.0, 0.0]), &opts).unwrap();
        assert_eq!(r.residual_history, vec![0.0]);
        assert_eq!(r.certificate, Certificate::WeakContractionMonotone);
    }

    #[test]
    fn weak_contraction_flags_violations() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        // s ↦ 1.5 s grows residuals
        let r = weak_contraction_iterate(
            &space,
            &ctx,
            &affine(&[1.5, 1.5], &[0.0, 0.0]),
            &VarphiDescriptor::HalfSquare,
            &v(&[0.1, 0.1]),
            &SolveOptions { tol: 1e-6, max_iter: 10 },
        )
        .unwrap();
        assert_eq!(r.certificate, Certificate::Unverified);
        assert!(r.hypothesis_failure.unwrap().contains("step 1"));
    }

    #[test]
    fn trace_csv_columns() {
        let (space, ctx) = setup(&[1.0, 1.0]);
        let r = banach_solve(&space, &ctx, &affine(&[0.5, 0.5], &[1.0, 1.0]), 0.5, &v(&[0.0, 0.0]), &SolveOptions { tol: 1e-3, max_iter: 100 }, &Verification::Skip).unwrap();
        let family = SeminormFamily::coordinate(2).unwrap();
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf, Some(&family)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,residual_dp,residual_dS"));
        assert_eq!(lines.next(), Some("1,1.0,0.375"));
        assert_eq!(text.lines().count(), r.residual_history.len() + 1);
    }

    #[test]
    fn composite_and_domain() {
        let map = MapDescriptor::Composite { maps: vec![affine(&[2.0], &[0.0]), MapDescriptor::CoordinateRatio] };
        assert_eq!(map.apply(&v(&[1.0])).unwrap(), v(&[2.0 / 3.0]));
        assert!(MapDescriptor::CoordinateRatio.apply(&v(&[-1.0])).is_err());
        assert!(!MapDescriptor::CoordinateRatio.in_domain(&v(&[-1.0])));
        assert_eq!(affine(&[0.9, -0.95], &[0.0, 0.0]).diagonal_modulus(), Some(0.95));
    }
}
