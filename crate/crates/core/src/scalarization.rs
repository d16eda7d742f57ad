//! Nonlinear scalarization `ξ_e(y) = inf{t ∈ ℝ : y ∈ te − P}` for `e ∈ int P`.
//!
//! [`ScalarizationContext::xi`] uses closed forms:
//!
//! - orthant: `max_i yᵢ / eᵢ`
//! - polyhedral `{Av ≥ 0}`: `max_i (Ay)ᵢ / (Ae)ᵢ` (every `(Ae)ᵢ > 0` since `e` is interior)
//! - Lorentz: the larger root of `(t eₙ − yₙ)² = ‖t e' − y'‖²`, checked by
//!   substitution and replaced by bisection when the check fails.
//!
//! [`ScalarizationContext::xi_bisection`] only uses cone membership, so it
//! serves as an oracle for the closed forms.

use serde_json::json;

use crate::error::{Error, Result};
use crate::ordered_space::{Cone, ConeKind, Vector};
use crate::report::{run_checks, Check, CheckResult, Outcome, PropertyReport};
use crate::sampling::{self, SampleSpec};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Relative interior margin used when checking `y ∈ te − int P`.
pub const INTERIOR_MARGIN: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizationContext {
    cone: Cone,
    e: Vector,
    tol: f64,
}

impl ScalarizationContext {
    pub fn new(cone: Cone, e: Vector, tol: f64) -> Result<Self> {
        e.check_dim(cone.dim())?;
        if !cone.strictly_contains(&e, 1e-9)? {
            return Err(Error::NotInterior("e"));
        }
        if !(tol > 0.0 && tol <= 1e-3) {
            return Err(Error::InvalidArgument("scalarization tol must lie in (0, 1e-3]".into()));
        }
        Ok(ScalarizationContext { cone, e, tol })
    }

    /// Context with `e` set to the cone's interior witness and the default tolerance.
    pub fn with_witness(cone: Cone) -> Self {
        let e = cone.interior_witness().clone();
        ScalarizationContext { cone, e, tol: DEFAULT_TOL }
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn e(&self) -> &Vector {
        &self.e
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn check_input(&self, y: &Vector) -> Result<()> {
        y.check_dim(self.cone.dim())?;
        if !y.is_finite() {
            return Err(Error::NonFinite("vector"));
        }
        Ok(())
    }

    /// Constraint slack of `te − y`; nonnegative iff `y ∈ te − P`.
    pub fn slack_at(&self, t: f64, y: &Vector) -> f64 {
        let shifted: Vec<f64> =
            self.e.iter().zip(y.iter()).map(|(ei, yi)| t * ei - yi).collect();
        self.cone.slack_unchecked(&shifted)
    }

    /// `y ∈ te − P` up to slack `tol`.
    pub fn member_at(&self, t: f64, y: &Vector, tol: f64) -> bool {
        self.slack_at(t, y) >= -tol
    }

    /// `y ∈ te − int P` with relative margin.
    pub fn interior_member_at(&self, t: f64, y: &Vector, margin: f64) -> bool {
        let shifted = Vector::raw(self.e.iter().zip(y.iter()).map(|(ei, yi)| t * ei - yi).collect());
        self.cone.slack_unchecked(shifted.as_slice()) > margin * shifted.max_abs().max(1.0)
    }

    pub fn xi(&self, y: &Vector) -> Result<f64> {
        self.check_input(y)?;
        let e = self.e.as_slice();
        let y_s = y.as_slice();
        match self.cone.kind() {
            ConeKind::Orthant { .. } => {
                Ok(y_s.iter().zip(e).map(|(yi, ei)| yi / ei).fold(f64::NEG_INFINITY, f64::max))
            }
            ConeKind::Polyhedral { rows } => Ok(rows
                .iter()
                .map(|row| {
                    let ay: f64 = row.iter().zip(y_s).map(|(a, x)| a * x).sum();
                    let ae: f64 = row.iter().zip(e).map(|(a, x)| a * x).sum();
                    ay / ae
                })
                .fold(f64::NEG_INFINITY, f64::max)),
            ConeKind::Lorentz { dim } => match self.lorentz_root(y, *dim) {
                Some(t) => Ok(t),
                None => self.xi_bisection(y),
            },
        }
    }

    fn lorentz_root(&self, y: &Vector, n: usize) -> Option<f64> {
        let (e_head, e_n) = (&self.e.as_slice()[..n - 1], self.e[n - 1]);
        let (y_head, y_n) = (&y.as_slice()[..n - 1], y[n - 1]);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, z)| x * z).sum::<f64>();

        // a t² − 2 b t + c = 0 with a > 0 because e is interior.
        let a = e_n * e_n - dot(e_head, e_head);
        let b = e_n * y_n - dot(e_head, y_head);
        let c = y_n * y_n - dot(y_head, y_head);
        let disc = (b * b - a * c).max(0.0);
        let root = disc.sqrt();
        let t = if b >= 0.0 { (b + root) / a } else { c / (b - root) };
        if !t.is_finite() {
            return None;
        }

        let scale = 1.0f64.max(y.max_abs()).max(t.abs() * self.e.max_abs());
        let slack = self.slack_at(t, y);
        let step = self.tol * scale;
        let valid = slack.abs() <= 1e-10 * scale
            && self.slack_at(t - 10.0 * step, y) < 0.0
            && self.slack_at(t + 10.0 * step, y) >= 0.0;
        valid.then_some(t)
    }

    /// Membership-only computation: bracket by doubling from `t = 0`, then
    /// bisect down to width `tol`.
    pub fn xi_bisection(&self, y: &Vector) -> Result<f64> {
        self.check_input(y)?;
        let member = |t: f64| self.slack_at(t, y) >= 0.0;

        let (mut lo, mut hi);
        let mut step = 1.0;
        let mut doublings = 0;
        if member(0.0) {
            hi = 0.0;
            lo = -step;
            while member(lo) {
                doublings += 1;
                if doublings > MAX_DOUBLINGS {
                    return Err(Error::BracketNotFound(MAX_DOUBLINGS));
                }
                hi = lo;
                step *= 2.0;
                lo = -step;
            }
        } else {
            lo = 0.0;
            hi = step;
            while !member(hi) {
                doublings += 1;
                if doublings > MAX_DOUBLINGS {
                    return Err(Error::BracketNotFound(MAX_DOUBLINGS));
                }
                lo = hi;
                step *= 2.0;
                hi = step;
            }
        }

        while hi - lo > self.tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if member(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Relative scale used for the `10·tol` offsets around `ξ`.
fn offset_scale(xi: f64) -> f64 {
    1.0 + xi.abs()
}

fn sample_y(rng: &mut rand_chacha::ChaCha8Rng, ctx: &ScalarizationContext, spec: &SampleSpec) -> Vector {
    sampling::uniform_vector(rng, ctx.cone().dim(), spec.lo(), spec.hi())
}

fn vec_json(v: &Vector) -> serde_json::Value {
    json!(v.as_slice())
}

/// Sampled check of the scalarization properties:
///
/// - sublevel sets: `y ∈ te − P` for `t ≥ ξ + δ`, `y ∉ te − P` for `t ≤ ξ − δ`
/// - strict sublevel sets: `y ∉ te − int P` for `t ≤ ξ`, `y ∈ te − int P` for `t ≥ ξ + δ`
/// - homogeneity: `ξ(λy) = λξ(y)` and local stability `|ξ(y+z) − ξ(y)| ≤ max(ξ(z), ξ(−z))`
/// - monotonicity: `y₁ ∈ y₂ + P ⇒ ξ(y₂) ≤ ξ(y₁)`
/// - subadditivity: `ξ(y₁ + y₂) ≤ ξ(y₁) + ξ(y₂)`
/// - strict monotonicity: `y₁ ∈ y₂ + int P ⇒ ξ(y₂) < ξ(y₁)`
///
/// where `δ = 10·tol·(1 + |ξ|)`.
pub fn check_scalarization_properties(ctx: &ScalarizationContext, spec: &SampleSpec) -> Result<PropertyReport> {
    spec.validate()?;
    let checks = property_checks(ctx, spec, "");
    Ok(run_checks(&checks, spec.seed))
}

/// The individual property checks, with names prefixed by `prefix`.
pub fn property_checks<'a>(ctx: &'a ScalarizationContext, spec: &'a SampleSpec, prefix: &str) -> Vec<Check<'a>> {
    let tol = ctx.tol();
    let count = spec.count;
    let name = |id: &str| format!("{prefix}{id}");
    let radius = spec.radius();

    vec![
        Check::new(name("i_le_iff_member"), count, move |rng, _| {
            let y = sample_y(rng, ctx, spec);
            let xi = match ctx.xi(&y) {
                Ok(v) => v,
                Err(err) => return Outcome::error(err, vec_json(&y)),
            };
            let delta = 10.0 * tol * offset_scale(xi);
            let t = xi + delta + sampling::uniform(rng, 0.0, 1.0) * sampling::uniform(rng, 0.0, radius);
            let near = ctx.slack_at(xi + delta, &y);
            let far = ctx.slack_at(t, &y);
            let worst = near.min(far);
            Outcome::check(worst >= -tol, -worst, || json!({ "y": vec_json(&y), "xi": xi, "t": t }))
        }),
        Check::new(name("ii_gt_iff_not_member"), count, move |rng, _| {
            let y = sample_y(rng, ctx, spec);
            let xi = match ctx.xi(&y) {
                Ok(v) => v,
                Err(err) => return Outcome::error(err, vec_json(&y)),
            };
            let delta = 10.0 * tol * offset_scale(xi);
            let t = xi - delta - sampling::uniform(rng, 0.0, 1.0) * sampling::uniform(rng, 0.0, radius);
            let near = ctx.slack_at(xi - delta, &y);
            let far = ctx.slack_at(t, &y);
            let worst = near.max(far);
            Outcome::check(worst < 0.0, worst, || json!({ "y": vec_json(&y), "xi": xi, "t": t }))
        }),
        Check::new(name("iii_ge_iff_not_interior"), count, move |rng, _| {
            let y = sample_y(rng, ctx, spec);
            let xi = match ctx.xi(&y) {
                Ok(v) => v,
                Err(err) => return Outcome::error(err, vec_json(&y)),
            };
            let t = xi - sampling::uniform(rng, 0.0, radius);
            let ok = !ctx.interior_member_at(xi, &y, INTERIOR_MARGIN)
                && !ctx.interior_member_at(t, &y, INTERIOR_MARGIN);
            Outcome::check(ok, 0.0, || json!({ "y": vec_json(&y), "xi": xi, "t": t }))
        }),
        Check::new(name("iv_lt_iff_interior"), count, move |rng, _| {
            let y = sample_y(rng, ctx, spec);
            let xi = match ctx.xi(&y) {
                Ok(v) => v,
                Err(err) => return Outcome::error(err, vec_json(&y)),
            };
            let delta = 10.0 * tol * offset_scale(xi);
            let t = xi + delta + sampling::uniform(rng, 0.0, radius);
            let ok = ctx.interior_member_at(xi + delta, &y, INTERIOR_MARGIN)
                && ctx.interior_member_at(t, &y, INTERIOR_MARGIN);
            Outcome::check(ok, 0.0, || json!({ "y": vec_json(&y), "xi": xi, "t": t }))
        }),
        Check::new(name("v_positive_homogeneity"), count, move |rng, index| {
            let y = sample_y(rng, ctx, spec);
            // index 0 pins λ = 1, where equality must be exact
            let lambda = if index == 0 { 1.0 } else { sampling::log_uniform(rng, 1e-3, 1e3) };
            let (xi, xi_scaled) = match (ctx.xi(&y), ctx.xi(&y.scale(lambda))) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(err), _) | (_, Err(err)) => return Outcome::error(err, vec_json(&y)),
            };
            let normalized = (xi_scaled - lambda * xi).abs() / ((1.0 + lambda) * (1.0 + xi.abs()));
            let exact_ok = index != 0 || xi_scaled == xi;
            Outcome::check(normalized <= tol && exact_ok, normalized, || {
                json!({ "y": vec_json(&y), "lambda": lambda, "xi": xi, "xi_scaled": xi_scaled })
            })
        }),
        Check::new(name("v_continuity"), count, move |rng, _| {
            let y = sample_y(rng, ctx, spec);
            let direction = sampling::unit_direction(rng, ctx.cone().dim());
            let step = sampling::log_uniform(rng, 1e-6, 1.0);
            let z = direction.scale(step);
            let moved = y.add(&z).expect("same dimension");
            let values = (ctx.xi(&y), ctx.xi(&moved), ctx.xi(&z), ctx.xi(&z.scale(-1.0)));
            let (a, b, up, down) = match values {
                (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
                _ => return Outcome::error("xi evaluation failed", vec_json(&y)),
            };
            let bound = up.max(down);
            let slack = 10.0 * tol * (1.0 + a.abs().max(b.abs()));
            Outcome::leq((b - a).abs(), bound, slack, || {
                json!({ "y": vec_json(&y), "z": vec_json(&z), "xi_y": a, "xi_y_plus_z": b })
            })
        }),
        Check::new(name("vi_monotone"), count, move |rng, _| {
            let y2 = sample_y(rng, ctx, spec);
            let p = sampling::cone_point(rng, ctx.cone(), radius);
            let y1 = y2.add(&p).expect("same dimension");
            let (a, b) = match (ctx.xi(&y2), ctx.xi(&y1)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Outcome::error("xi evaluation failed", vec_json(&y2)),
            };
            Outcome::leq(a, b, tol, || {
                json!({ "y1": vec_json(&y1), "y2": vec_json(&y2), "xi_y1": b, "xi_y2": a })
            })
        }),
        Check::new(name("vii_subadditive"), count, move |rng, _| {
            let y1 = sample_y(rng, ctx, spec);
            let y2 = sample_y(rng, ctx, spec);
            let sum = y1.add(&y2).expect("same dimension");
            let (a, b, c) = match (ctx.xi(&sum), ctx.xi(&y1), ctx.xi(&y2)) {
                (Ok(a), Ok(b), Ok(c)) => (a, b, c),
                _ => return Outcome::error("xi evaluation failed", vec_json(&y1)),
            };
            Outcome::leq(a, b + c, tol, || {
                json!({ "y1": vec_json(&y1), "y2": vec_json(&y2), "xi_sum": a, "xi_y1": b, "xi_y2": c })
            })
        }),
        Check::new(name("viii_strict_monotone"), count, move |rng, _| {
            let y2 = sample_y(rng, ctx, spec);
            let p = sampling::interior_point(rng, ctx.cone(), radius);
            let y1 = y2.add(&p).expect("same dimension");
            let (a, b) = match (ctx.xi(&y2), ctx.xi(&y1)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Outcome::error("xi evaluation failed", vec_json(&y2)),
            };
            Outcome::check(a < b, a - b, || {
                json!({ "y1": vec_json(&y1), "y2": vec_json(&y2), "xi_y1": b, "xi_y2": a })
            })
        }),
    ]
}

/// Closed form against the bisection oracle: `|ξ − ξ_bisect| ≤ 10·tol`.
pub fn agreement_check<'a>(ctx: &'a ScalarizationContext, spec: &'a SampleSpec, name: String) -> Check<'a> {
    let tol = ctx.tol();
    Check::new(name, spec.count, move |rng, _| {
        let y = sample_y(rng, ctx, spec);
        match (ctx.xi(&y), ctx.xi_bisection(&y)) {
            (Ok(closed), Ok(oracle)) => Outcome::leq((closed - oracle).abs(), 10.0 * tol, 0.0, || {
                json!({ "y": vec_json(&y), "closed_form": closed, "bisection": oracle })
            }),
            (Err(err), _) | (_, Err(err)) => Outcome::error(err, vec_json(&y)),
        }
    })
}

pub fn check_closed_form_agreement(ctx: &ScalarizationContext, spec: &SampleSpec) -> Result<CheckResult> {
    spec.validate()?;
    Ok(agreement_check(ctx, spec, "closed_form_vs_bisection".into()).run(spec.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[f64]) -> Vector {
        Vector::from_slice(entries).unwrap()
    }

    fn ctx(cone: Cone, e: &[f64]) -> ScalarizationContext {
        ScalarizationContext::new(cone, v(e), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn orthant_closed_form() {
        let c = ctx(Cone::orthant(2).unwrap(), &[1.0, 2.0]);
        assert_eq!(c.xi(&v(&[3.0, 4.0])).unwrap(), 3.0);
        let oracle = c.xi_bisection(&v(&[3.0, 4.0])).unwrap();
        assert!((oracle - 3.0).abs() <= 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn zero_and_e_map_to_zero_and_one() {
        let cones = [
            (Cone::orthant(3).unwrap(), vec![1.0, 2.0, 0.5]),
            (Cone::lorentz(3).unwrap(), vec![0.3, -0.2, 1.5]),
            (
                Cone::polyhedral(vec![vec![1.0, 0.0, 1.0], vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]])
                    .unwrap(),
                vec![0.1, 0.2, 1.0],
            ),
        ];
        for (cone, e) in cones {
            let c = ctx(cone, &e);
            assert!(c.xi(&Vector::zeros(3)).unwrap().abs() < 1e-15);
            assert!((c.xi(&v(&e)).unwrap() - 1.0).abs() < 1e-12);
            assert!((c.xi_bisection(&v(&e)).unwrap() - 1.0).abs() <= 10.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn bisection_examples() {
        let c = ctx(Cone::orthant(1).unwrap(), &[2.0]);
        assert!((c.xi_bisection(&v(&[5.0])).unwrap() - 2.5).abs() <= DEFAULT_TOL);
        assert!((c.xi_bisection(&v(&[-2.0])).unwrap() + 1.0).abs() <= DEFAULT_TOL);

        let l = ctx(Cone::lorentz(3).unwrap(), &[0.0, 0.0, 1.0]);
        assert!((l.xi_bisection(&v(&[3.0, 4.0, 0.0])).unwrap() - 5.0).abs() <= DEFAULT_TOL);
        assert!((l.xi(&v(&[3.0, 4.0, 0.0])).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lorentz_matches_bisection_off_axis() {
        let l = ctx(Cone::lorentz(3).unwrap(), &[0.4, -0.3, 2.0]);
        for y in [[1.0, 2.0, -3.0], [-5.0, 0.5, 7.0], [0.0, 0.0, -1.0], [2.0, -1.0, 0.1]] {
            let y = v(&y);
            let closed = l.xi(&y).unwrap();
            let oracle = l.xi_bisection(&y).unwrap();
            assert!((closed - oracle).abs() <= 10.0 * DEFAULT_TOL, "{closed} vs {oracle}");
        }
    }

    #[test]
    fn context_validation() {
        let cone = Cone::orthant(2).unwrap();
        assert_eq!(
            ScalarizationContext::new(cone.clone(), v(&[1.0, 0.0]), 1e-9),
            Err(Error::NotInterior("e"))
        );
        assert!(ScalarizationContext::new(cone.clone(), v(&[1.0, 1.0]), 0.0).is_err());
        assert!(ScalarizationContext::new(cone.clone(), v(&[1.0, 1.0]), 1e-2).is_err());
        let c = ctx(cone, &[1.0, 1.0]);
        assert!(matches!(c.xi(&v(&[1.0])), Err(Error::DimensionMismatch { .. })));
        assert_eq!(c.xi(&Vector::raw(vec![f64::NAN, 0.0])), Err(Error::NonFinite("vector")));
    }

    #[test]
    fn not_strongly_monotone_on_orthant() {
        let c = ctx(Cone::orthant(2).unwrap(), &[1.0, 1.0]);
        let y2 = v(&[1.0, 0.0]);
        let y1 = v(&[1.0, 1.0]);
        assert!(Cone::orthant(2).unwrap().leq(&y2, &y1, 0.0).unwrap());
        assert_eq!(c.xi(&y1).unwrap(), 1.0);
        assert_eq!(c.xi(&y2).unwrap(), 1.0);
    }

    #[test]
    fn properties_hold_on_small_samples() {
        let spec = SampleSpec::new(300, 11);
        for (cone, e) in [
            (Cone::orthant(3).unwrap(), vec![1.0, 0.5, 2.0]),
            (Cone::lorentz(4).unwrap(), vec![0.1, 0.2, -0.3, 1.0]),
        ] {
            let c = ctx(cone, &e);
            let report = check_scalarization_properties(&c, &spec).unwrap();
            assert!(report.passed(), "{:#?}", report.failures().collect::<Vec<_>>());
            assert!(check_closed_form_agreement(&c, &spec).unwrap().passed);
        }
    }
}
