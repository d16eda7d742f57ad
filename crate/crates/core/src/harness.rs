//! Seeded property suites.
//!
//! Each suite owns its instances (cones, spaces, maps) and exposes a list of
//! [`Check`]s. Every check draws sample `i` from the stream keyed by
//! `(seed, check name, i)`, so a reported counterexample can be replayed with
//! [`replay`] and reports are identical across runs with the same config.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cone_metric::{tail_below, ConeMetricSpace, FiniteTable, ORDER_MARGIN, ORDER_TOL};
use crate::error::{Error, Result};
use crate::fixed_point::{
    banach_solve, boyd_wong_solve, scalarize_varphi, weak_contraction_iterate, Certificate,
    MapDescriptor, SolveOptions, VarphiDescriptor, Verification,
};
use crate::ordered_space::{omega_tail_bound, validate_cone, Cone, Seminorm, SeminormFamily, Vector};
use crate::report::{run_checks, Check, CheckResult, Outcome};
use crate::sampling::{self, SampleSpec};
use crate::scalarization::{agreement_check, property_checks, ScalarizationContext, DEFAULT_TOL};

/// Registered suite ids.
pub const SUITES: &[&str] = &[
    "cone-axioms",
    "scalarization",
    "metric-axioms",
    "convergence-transfer",
    "topology-compare",
    "continuity",
    "closed-ball",
    "boundedness",
    "fixed-point",
    "omega-example",
];

/// Every result with computational content and the suite exercising it.
pub const COVERED_RESULTS: &[(&str, &str)] = &[
    ("cone axioms, order and interior closure", "cone-axioms"),
    ("least upper bounds in strongly minihedral cones", "cone-axioms"),
    ("seminorm aggregator h is subadditive and monotone", "cone-axioms"),
    ("scalarization monotonicity, homogeneity, translation and sublinearity", "scalarization"),
    ("scalarization is not strongly monotone", "scalarization"),
    ("cone metric positivity, symmetry and triangle inequality", "metric-axioms"),
    ("d_p = xi_e o p is a metric", "metric-axioms"),
    ("d_S = inf h(u) over u >= p is a metric", "metric-axioms"),
    ("cone convergence implies d_p convergence, and conversely", "convergence-transfer"),
    ("cone Cauchy implies d_p Cauchy, and conversely", "convergence-transfer"),
    ("d_S topology is finer than the cone topology", "topology-compare"),
    ("d_S and cone topologies agree over a normed space", "topology-compare"),
    ("cone convergence iff seminorm convergence over a normal cone", "continuity"),
    ("joint continuity of the cone metric", "continuity"),
    ("open balls form a first countable base", "closed-ball"),
    ("closed balls are sequentially closed", "closed-ball"),
    ("bounded sets, diameter and delta_q", "boundedness"),
    ("Banach contraction principle", "fixed-point"),
    ("linear scalarized contraction", "fixed-point"),
    ("nonlinear scalarized contraction", "fixed-point"),
    ("Boyd-Wong fixed point theorem", "fixed-point"),
    ("weak contraction iteration", "fixed-point"),
    ("omega sequence space: h(c) < epsilon", "omega-example"),
];

/// Budgets and instances for the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub sample: SampleSpec,
    /// Scalarization tolerance.
    pub tol: f64,
    pub sequences_per_rate: usize,
    /// Minimum sequence length; slow rates get longer sequences.
    pub sequence_length: usize,
    pub rates: Vec<f64>,
    /// Probes `e / 2ʲ` for `j = 0..probe_levels`.
    pub probe_levels: usize,
    pub epsilon: f64,
    pub truncation: usize,
    pub finite_table: Option<FiniteTable>,
    pub oracle_pairs: usize,
    pub contraction_runs: usize,
    pub boyd_wong_starts: usize,
    pub weak_orbits: usize,
    pub random_sets: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            sample: SampleSpec::default(),
            tol: DEFAULT_TOL,
            sequences_per_rate: 100,
            sequence_length: 64,
            rates: vec![0.5, 0.9, 0.99],
            probe_levels: 5,
            epsilon: 0.1,
            truncation: 20,
            finite_table: None,
            oracle_pairs: 100,
            contraction_runs: 50,
            boyd_wong_starts: 20,
            weak_orbits: 20,
            random_sets: 50,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.sample.validate()?;
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(Error::InvalidArgument("tol must lie in (0, 1e-3]".into()));
        }
        if self.rates.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::InvalidArgument("rates must lie in (0, 1)".into()));
        }
        if self.sequence_length < 4 || self.probe_levels == 0 {
            return Err(Error::InvalidArgument(
                "sequence_length must be ≥ 4 and probe_levels ≥ 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) || self.truncation == 0 {
            return Err(Error::InvalidArgument("epsilon must be > 0 and truncation ≥ 1".into()));
        }
        let counts = [
            self.sequences_per_rate,
            self.oracle_pairs,
            self.contraction_runs,
            self.boyd_wong_starts,
            self.weak_orbits,
            self.random_sets,
        ];
        if counts.contains(&0) {
            return Err(Error::InvalidArgument("suite budgets must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Length of a constructed sequence with contraction rate `rate`: long
    /// enough that `rateⁿ ≤ 1e-4` on the last quarter.
    pub fn length_for_rate(&self, rate: f64) -> usize {
        let needed = ((1e-4f64).ln() / rate.ln()).ceil() as usize;
        self.sequence_length.max(needed * 4 / 3 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub count: usize,
    pub sequences_per_rate: usize,
    pub sequence_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite_id: String,
    pub seed: u64,
    pub budgets: Budgets,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub wall_time: f64,
}

impl SuiteReport {
    /// JSON payload without `wall_time`, the part that is deterministic.
    pub fn payload(&self) -> Value {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut value {
            map.remove("wall_time");
        }
        value
    }
}

trait Suite: Sync {
    fn checks(&self) -> Vec<Check<'_>>;
}

fn build_suite(id: &str, cfg: &SuiteConfig) -> Result<Box<dyn Suite>> {
    Ok(match id {
        "cone-axioms" => Box::new(ConeAxiomsSuite::new(cfg)?),
        "scalarization" => Box::new(ScalarizationSuite::new(cfg)?),
        "metric-axioms" => Box::new(MetricAxiomsSuite::new(cfg)?),
        "convergence-transfer" => Box::new(ConvergenceSuite::new(cfg)),
        "topology-compare" => Box::new(TopologySuite::new(cfg)),
        "continuity" => Box::new(ContinuitySuite::new(cfg)),
        "closed-ball" => Box::new(ClosedBallSuite::new(cfg)),
        "boundedness" => Box::new(BoundednessSuite::new(cfg)),
        "fixed-point" => Box::new(FixedPointSuite::new(cfg)),
        "omega-example" => Box::new(OmegaSuite::new(cfg)),
        other => {
            return Err(Error::UnknownSuite { name: other.to_string(), available: SUITES.join(", ") })
        }
    })
}

pub fn run_suite(suite_id: &str, config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let suite = build_suite(suite_id, config)?;
    let start = Instant::now();
    let checks = suite.checks();
    let report = run_checks(&checks, config.sample.seed);
    Ok(SuiteReport {
        suite_id: suite_id.to_string(),
        seed: config.sample.seed,
        budgets: Budgets {
            count: config.sample.count,
            sequences_per_rate: config.sequences_per_rate,
            sequence_length: config.sequence_length,
        },
        passed: report.passed(),
        checks: report.checks,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(config: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|id| run_suite(id, config)).collect()
}

/// Re-evaluates sample `index` of the named check.
pub fn replay(suite_id: &str, config: &SuiteConfig, check_name: &str, index: u64) -> Result<Outcome> {
    config.validate()?;
    let suite = build_suite(suite_id, config)?;
    let checks = suite.checks();
    let check = checks
        .iter()
        .find(|c| c.name == check_name)
        .ok_or_else(|| Error::InvalidArgument(format!("suite {suite_id} has no check `{check_name}`")))?;
    Ok(check.replay(config.sample.seed, index))
}

fn vj(v: &Vector) -> Value {
    json!(v.as_slice())
}

/// Cones exercised by the scalarization and axiom suites: orthants of
/// dimension 1–8, Lorentz cones of dimension 2–5 and two polyhedral cones.
pub fn cone_catalog() -> Vec<Cone> {
    let mut cones: Vec<Cone> = (1..=8).map(|n| Cone::orthant(n).expect("valid")).collect();
    cones.extend((2..=5).map(|n| Cone::lorentz(n).expect("valid")));
    cones.push(Cone::polyhedral(vec![vec![-0.5, 1.0], vec![0.5, 1.0]]).expect("wedge is certified"));
    cones.push(
        Cone::polyhedral(vec![
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .expect("pyramid is certified"),
    );
    cones
}

/// Orthant `ℝ²` with a random interior `e ∈ [0.5, 2]²`.
fn orthant_context(rng: &mut ChaCha8Rng, dim: usize) -> ScalarizationContext {
    let e = sampling::uniform_vector(rng, dim, 0.5, 2.0);
    ScalarizationContext::new(Cone::orthant(dim).expect("valid"), e, DEFAULT_TOL).expect("interior e")
}

// ---------------------------------------------------------------------------
// cone-axioms

struct ConeAxiomsSuite {
    cones: Vec<Cone>,
    families: Vec<SeminormFamily>,
    spec: SampleSpec,
}

impl ConeAxiomsSuite {
    fn new(cfg: &SuiteConfig) -> Result<Self> {
        Ok(ConeAxiomsSuite { cones: cone_catalog(), families: Vec::new(), spec: cfg.sample.clone() })
            .map(|mut s| {
                s.families = (1..=8).map(omega_families).collect();
                s
            })
    }
}

/// The coordinate aggregator and the partial-sum family `qₖ = Σ_{i≤k}|xᵢ|`.
fn omega_families(dim: usize) -> SeminormFamily {
    SeminormFamily::new((1..=dim).map(|k| Seminorm::PartialAbsSum { k }).collect(), dim).expect("valid")
}

impl Suite for ConeAxiomsSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let count = self.spec.count;
        let seed = self.spec.seed;
        let mut checks = Vec::new();
        for cone in &self.cones {
            let label = cone.label();
            checks.push(Check::new(format!("{label}/validate_cone"), 1, move |_, _| {
                match validate_cone(cone, count, seed) {
                    Ok(report) => Outcome::check(report.passed(), report.max_violation, || json!(report)),
                    Err(err) => Outcome::error(err, json!(null)),
                }
            }));
            checks.push(Check::new(format!("{label}/order_reflexive_transitive"), count, move |rng, _| {
                let x = sampling::uniform_vector(rng, cone.dim(), -10.0, 10.0);
                let y = x.add(&sampling::cone_point(rng, cone, 10.0)).expect("dim");
                let z = y.add(&sampling::cone_point(rng, cone, 10.0)).expect("dim");
                let ok = cone.leq(&x, &x, 0.0).unwrap_or(false)
                    && cone.leq(&x, &y, ORDER_TOL).unwrap_or(false)
                    && cone.leq(&y, &z, ORDER_TOL).unwrap_or(false)
                    && cone.leq(&x, &z, ORDER_TOL).unwrap_or(false);
                Outcome::check(ok, 0.0, || json!({ "x": vj(&x), "y": vj(&y), "z": vj(&z) }))
            }));
            checks.push(Check::new(format!("{label}/ll_implies_leq"), count, move |rng, _| {
                let x = sampling::uniform_vector(rng, cone.dim(), -10.0, 10.0);
                let y = x.add(&sampling::interior_point(rng, cone, 10.0)).expect("dim");
                let ll = cone.ll(&x, &y, ORDER_MARGIN).unwrap_or(false);
                let leq = cone.leq(&x, &y, 0.0).unwrap_or(false);
                Outcome::check(ll && leq, 0.0, || json!({ "x": vj(&x), "y": vj(&y) }))
            }));
            if cone.is_orthant() {
                let family = &self.families[cone.dim() - 1];
                checks.push(Check::new(format!("{label}/h_subadditive"), count, move |rng, _| {
                    let u1 = sampling::cone_point(rng, cone, 10.0);
                    let u2 = sampling::cone_point(rng, cone, 10.0);
                    let lhs = family.h(&u1.add(&u2).expect("dim")).unwrap_or(f64::INFINITY);
                    let rhs = family.h(&u1).unwrap_or(0.0) + family.h(&u2).unwrap_or(0.0);
                    Outcome::leq(lhs, rhs, 1e-15, || json!({ "u1": vj(&u1), "u2": vj(&u2) }))
                }));
                checks.push(Check::new(format!("{label}/h_monotone"), count, move |rng, _| {
                    let u = sampling::cone_point(rng, cone, 10.0);
                    let v = u.add(&sampling::cone_point(rng, cone, 10.0)).expect("dim");
                    let (a, b) = (family.h(&u).unwrap_or(f64::INFINITY), family.h(&v).unwrap_or(0.0));
                    Outcome::leq(a, b, 1e-15, || json!({ "u": vj(&u), "v": vj(&v) }))
                }));
                checks.push(Check::new(format!("{label}/lub_least_upper_bound"), count, move |rng, _| {
                    let size = rng.gen_range(1..=8);
                    let points: Vec<Vector> =
                        (0..size).map(|_| sampling::uniform_vector(rng, cone.dim(), -10.0, 10.0)).collect();
                    let sup = match cone.least_upper_bound(&points) {
                        Ok(s) => s,
                        Err(err) => return Outcome::error(err, json!(null)),
                    };
                    let upper = points.iter().all(|p| cone.leq(p, &sup, 0.0).unwrap_or(false));
                    // any upper bound u dominates every point, hence each coordinate max
                    let u = sup.add(&sampling::cone_point(rng, cone, 1.0)).expect("dim");
                    let least = cone.leq(&sup, &u, 0.0).unwrap_or(false)
                        && (0..cone.dim()).all(|i| points.iter().any(|p| p[i] == sup[i]));
                    Outcome::check(upper && least, 0.0, || json!({ "points": points.iter().map(vj).collect::<Vec<_>>() }))
                }));
            }
        }
        checks
    }
}

// ---------------------------------------------------------------------------
// scalarization

struct ScalarizationSuite {
    contexts: Vec<(String, ScalarizationContext)>,
    spec: SampleSpec,
}

impl ScalarizationSuite {
    fn new(cfg: &SuiteConfig) -> Result<Self> {
        let contexts = cone_catalog()
            .into_iter()
            .map(|cone| {
                let label = cone.label();
                let mut rng = sampling::stream_rng(cfg.sample.seed, &format!("e/{label}"), 0);
                let e = sampling::interior_point(&mut rng, &cone, 1.0);
                ScalarizationContext::new(cone, e, cfg.tol).map(|ctx| (label, ctx))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScalarizationSuite { contexts, spec: cfg.sample.clone() })
    }
}

/// `y₂ = (1,0) ≤ y₁ = (1,1)`, `y₁ ≠ y₂`, yet `ξ_e(y₁) = ξ_e(y₂) = 1` for `e = (1,1)`.
pub fn non_strong_monotonicity_witness() -> Result<Outcome> {
    let cone = Cone::orthant(2)?;
    let ctx = ScalarizationContext::new(cone.clone(), Vector::from_slice(&[1.0, 1.0])?, DEFAULT_TOL)?;
    let y2 = Vector::from_slice(&[1.0, 0.0])?;
    let y1 = Vector::from_slice(&[1.0, 1.0])?;
    let (a, b) = (ctx.xi(&y1)?, ctx.xi(&y2)?);
    let ordered = cone.leq(&y2, &y1, 0.0)? && y1 != y2 && !cone.ll(&y2, &y1, ORDER_MARGIN)?;
    Ok(Outcome::check(ordered && a == b, (a - b).abs(), || {
        json!({ "y1": vj(&y1), "y2": vj(&y2), "xi_y1": a, "xi_y2": b })
    }))
}

impl Suite for ScalarizationSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let mut checks = Vec::new();
        for (label, ctx) in &self.contexts {
            checks.extend(property_checks(ctx, &self.spec, &format!("{label}/")));
            checks.push(agreement_check(ctx, &self.spec, format!("{label}/closed_form_vs_bisection")));
        }
        checks.push(Check::new("non_strong_monotonicity_witness", 1, |_, _| {
            non_strong_monotonicity_witness().unwrap_or_else(|err| Outcome::error(err, json!(null)))
        }));
        checks
    }
}

// ---------------------------------------------------------------------------
// metric-axioms

#[derive(Clone, Copy)]
enum ScalarMetric<'a> {
    Dp(&'a ScalarizationContext),
    Ds(&'a SeminormFamily),
}

impl ScalarMetric<'_> {
    fn eval(&self, space: &ConeMetricSpace, x: &Vector, y: &Vector) -> Result<f64> {
        match self {
            ScalarMetric::Dp(ctx) => space.dp(ctx, x, y),
            ScalarMetric::Ds(family) => space.ds(family, x, y),
        }
    }
}

/// Identity, symmetry and triangle inequality on one triple, with relative
/// tolerance `1e-12`. Returns the largest raw violation and whether all hold.
fn metric_triple(metric: ScalarMetric<'_>, space: &ConeMetricSpace, x: &Vector, y: &Vector, z: &Vector) -> Result<(f64, bool)> {
    let dxy = metric.eval(space, x, y)?;
    let dyx = metric.eval(space, y, x)?;
    let dxz = metric.eval(space, x, z)?;
    let dzy = metric.eval(space, z, y)?;
    let dxx = metric.eval(space, x, x)?;
    let identity = dxx == 0.0 && ((x == y) == (dxy == 0.0)) && dxy >= 0.0;
    let symmetry = (dxy - dyx).abs() <= 1e-12 * (1.0 + dxy.abs());
    let triangle_excess = dxy - (dxz + dzy);
    let triangle = triangle_excess <= 1e-12 * (1.0 + dxz + dzy);
    Ok(((dxy - dyx).abs().max(triangle_excess).max(dxx.abs()), identity && symmetry && triangle))
}

/// Cone metric axioms on one triple.
fn p_axioms(space: &ConeMetricSpace, x: &Vector, y: &Vector, z: &Vector) -> Result<(f64, bool)> {
    let cone = space.value_cone();
    let pxy = space.p(x, y)?;
    let m1 = cone.min_slack(&pxy)?;
    let m2 = space.p(x, x)?.is_zero() && ((x == y) == pxy.is_zero());
    let m3 = pxy == space.p(y, x)?;
    let detour = space.p(x, z)?.add(&space.p(z, y)?)?;
    let m4 = cone.min_slack(&detour.sub(&pxy)?)?;
    Ok(((-m1).max(-m4).max(0.0), m1 >= -ORDER_TOL && m2 && m3 && m4 >= -ORDER_TOL))
}

/// Brute-force `inf{h(u) : u ≥ p}` over a grid anchored at `p` covering `[p, p + 3]`.
fn grid_infimum(family: &SeminormFamily, p: &Vector, steps: usize) -> Result<(f64, Vector)> {
    let dim = p.dim();
    let step = 3.0 / steps as f64;
    let mut best = (f64::INFINITY, p.clone());
    let total = (steps + 1).pow(dim as u32);
    for flat in 0..total {
        let mut offset = Vec::with_capacity(dim);
        let mut rest = flat;
        for _ in 0..dim {
            offset.push((rest % (steps + 1)) as f64 * step);
            rest /= steps + 1;
        }
        let u = p.add(&Vector::new(offset)?)?;
        let value = family.h(&u)?;
        if value < best.0 {
            best = (value, u);
        }
    }
    Ok(best)
}

fn three_point_table() -> FiniteTable {
    let v = |a: f64, b: f64| Vector::from_slice(&[a, b]).expect("finite");
    FiniteTable {
        points: vec![Vector::from_slice(&[0.0]).expect("finite"), Vector::from_slice(&[1.0]).expect("finite"), Vector::from_slice(&[2.0]).expect("finite")],
        table: vec![
            vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0)],
            vec![v(1.0, 0.0), v(0.0, 0.0), v(0.0, 1.0)],
            vec![v(1.0, 1.0), v(0.0, 1.0), v(0.0, 0.0)],
        ],
    }
}

struct MetricAxiomsSuite {
    spaces: Vec<(String, ConeMetricSpace, ScalarizationContext, Vec<SeminormFamily>)>,
    table_space: ConeMetricSpace,
    table_ctx: ScalarizationContext,
    table_families: Vec<SeminormFamily>,
    spec: SampleSpec,
    oracle_pairs: usize,
}

impl MetricAxiomsSuite {
    fn new(cfg: &SuiteConfig) -> Result<Self> {
        let mut spaces = Vec::new();
        let mut rng = sampling::stream_rng(cfg.sample.seed, "metric-axioms/instances", 0);
        for &dim in &cfg.sample.dims {
            let space = ConeMetricSpace::componentwise_abs(dim)?;
            let ctx = orthant_context(&mut rng, dim);
            let families = vec![SeminormFamily::coordinate(dim)?, omega_families(dim)];
            spaces.push((format!("abs{dim}"), space, ctx, families));
        }
        let weights = sampling::uniform_entries(&mut rng, 3, 0.5, 3.0);
        let weighted = ConeMetricSpace::weighted(weights)?;
        let ctx = orthant_context(&mut rng, 3);
        spaces.push(("weighted3".into(), weighted, ctx, vec![SeminormFamily::coordinate(3)?, omega_families(3)]));

        let table = cfg.finite_table.clone().unwrap_or_else(three_point_table);
        let value_dim = table.table.first().and_then(|r| r.first()).map(Vector::dim).ok_or(Error::Empty("finite table"))?;
        let table_space = ConeMetricSpace::finite_table(table, Cone::orthant(value_dim)?)?;
        let table_ctx = ScalarizationContext::with_witness(table_space.value_cone().clone());
        let table_families = vec![SeminormFamily::coordinate(value_dim)?, omega_families(value_dim)];
        Ok(MetricAxiomsSuite {
            spaces,
            table_space,
            table_ctx,
            table_families,
            spec: cfg.sample.clone(),
            oracle_pairs: cfg.oracle_pairs,
        })
    }
}

fn sample_triple(rng: &mut ChaCha8Rng, dim: usize, spec: &SampleSpec) -> (Vector, Vector, Vector) {
    let x = sampling::uniform_vector(rng, dim, spec.lo(), spec.hi());
    // occasionally repeat a point so identity of indiscernibles sees x = y
    let y = if rng.gen_bool(0.05) { x.clone() } else { sampling::uniform_vector(rng, dim, spec.lo(), spec.hi()) };
    let z = sampling::uniform_vector(rng, dim, spec.lo(), spec.hi());
    (x, y, z)
}

impl Suite for MetricAxiomsSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let spec = &self.spec;
        let mut checks = Vec::new();
        for (label, space, ctx, families) in &self.spaces {
            let dim = space.point_dim();
            checks.push(Check::new(format!("{label}/p_axioms"), spec.count, move |rng, _| {
                let (x, y, z) = sample_triple(rng, dim, spec);
                match p_axioms(space, &x, &y, &z) {
                    Ok((excess, ok)) => Outcome::check(ok, excess, || json!({ "x": vj(&x), "y": vj(&y), "z": vj(&z) })),
                    Err(err) => Outcome::error(err, json!({ "x": vj(&x) })),
                }
            }));
            let mut metrics = vec![("d_p".to_string(), ScalarMetric::Dp(ctx))];
            for (i, family) in families.iter().enumerate() {
                metrics.push((format!("d_S{i}"), ScalarMetric::Ds(family)));
            }
            for (name, metric) in metrics {
                checks.push(Check::new(format!("{label}/{name}/metric_axioms"), spec.count, move |rng, _| {
                    let (x, y, z) = sample_triple(rng, dim, spec);
                    match metric_triple(metric, space, &x, &y, &z) {
                        Ok((excess, ok)) => Outcome::check(ok, excess, || json!({ "x": vj(&x), "y": vj(&y), "z": vj(&z) })),
                        Err(err) => Outcome::error(err, json!({ "x": vj(&x) })),
                    }
                }));
            }
        }

        let points = self.table_space.finite_points().expect("finite space");
        let n = points.len();
        let triple = move |index: u64| {
            let i = index as usize;
            (&points[i % n], &points[(i / n) % n], &points[i / (n * n)])
        };
        let table_space = &self.table_space;
        checks.push(Check::new("table/p_axioms_exhaustive", n * n * n, move |_, index| {
            let (x, y, z) = triple(index);
            match p_axioms(table_space, x, y, z) {
                Ok((excess, ok)) => Outcome::check(ok, excess, || json!({ "triple": index })),
                Err(err) => Outcome::error(err, json!({ "triple": index })),
            }
        }));
        let mut table_metrics = vec![("d_p".to_string(), ScalarMetric::Dp(&self.table_ctx))];
        for (i, family) in self.table_families.iter().enumerate() {
            table_metrics.push((format!("d_S{i}"), ScalarMetric::Ds(family)));
        }
        for (name, metric) in table_metrics {
            checks.push(Check::new(format!("table/{name}/metric_axioms_exhaustive"), n * n * n, move |_, index| {
                let (x, y, z) = triple(index);
                match metric_triple(metric, table_space, x, y, z) {
                    Ok((excess, ok)) => Outcome::check(ok, excess, || json!({ "triple": index })),
                    Err(err) => Outcome::error(err, json!({ "triple": index })),
                }
            }));
        }

        let (_, oracle_space, _, oracle_families) = &self.spaces[0];
        let family = &oracle_families[0];
        let dim = oracle_space.point_dim();
        // keep the grid around 10⁴ points whatever the dimension
        let steps = ((1e4f64).powf(1.0 / dim as f64).floor() as usize).clamp(2, 100) - 1;
        checks.push(Check::new("d_S_vs_grid_infimum", self.oracle_pairs, move |rng, _| {
            let x = sampling::uniform_vector(rng, dim, spec.lo(), spec.hi());
            let y = sampling::uniform_vector(rng, dim, spec.lo(), spec.hi());
            let evaluated = (|| {
                let ds = oracle_space.ds(family, &x, &y)?;
                let (oracle, _) = grid_infimum(family, &oracle_space.p(&x, &y)?, steps)?;
                Ok::<_, Error>((ds, oracle))
            })();
            match evaluated {
                Ok((ds, oracle)) => Outcome::leq((ds - oracle).abs(), 1e-6, 0.0, || {
                    json!({ "x": vj(&x), "y": vj(&y), "d_S": ds, "grid": oracle })
                }),
                Err(err) => Outcome::error(err, json!({ "x": vj(&x), "y": vj(&y) })),
            }
        }));
        checks
    }
}

// ---------------------------------------------------------------------------
// convergence-transfer

/// A constructed sequence `xₙ = x + w + rateⁿ v` with claimed limit `x`;
/// `w = 0` for convergent sequences and `ξ_e(|w|) ≥ 2` otherwise.
struct Constructed {
    sequence: Vec<Vector>,
    limit: Vector,
    convergent: bool,
    ctx: ScalarizationContext,
}

fn construct_sequence(rng: &mut ChaCha8Rng, dim: usize, rate: f64, length: usize, convergent: bool) -> Constructed {
    let ctx = orthant_context(rng, dim);
    let x = sampling::uniform_vector(rng, dim, -10.0, 10.0);
    let v = sampling::uniform_vector(rng, dim, -1.0, 1.0);
    let w = if convergent {
        Vector::zeros(dim)
    } else {
        let mut w = sampling::uniform_entries(rng, dim, -0.1, 0.1);
        let k = rng.gen_range(0..dim);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        w[k] = sign * sampling::uniform(rng, 2.0, 4.0) * ctx.e()[k];
        Vector::raw(w)
    };
    let base = x.add(&w).expect("dim");
    let sequence = (0..length).map(|n| base.add(&v.scale(rate.powi(n as i32))).expect("dim")).collect();
    Constructed { sequence, limit: x, convergent, ctx }
}

fn probes(ctx: &ScalarizationContext, levels: usize) -> Vec<Vector> {
    (0..levels).map(|j| ctx.e().scale(0.5f64.powi(j as i32))).collect()
}

struct Detection {
    cone: bool,
    dp: bool,
    ds: bool,
}

fn detect_all(space: &ConeMetricSpace, family: &SeminormFamily, c: &Constructed, levels: usize) -> Result<Detection> {
    let probes = probes(&c.ctx, levels);
    let tail = c.sequence.len() * 3 / 4;
    let cone = space.detect_cone_convergence(&c.sequence, &c.limit, &probes, tail)?;
    let dps: Vec<f64> = c.sequence.iter().map(|x| space.dp(&c.ctx, x, &c.limit)).collect::<Result<_>>()?;
    let dss: Vec<f64> = c.sequence.iter().map(|x| space.ds(family, x, &c.limit)).collect::<Result<_>>()?;
    let mut dp = true;
    let mut ds = true;
    for probe in &probes {
        dp &= tail_below(&dps, c.ctx.xi(probe)?, tail);
        ds &= tail_below(&dss, family.h(probe)?, tail);
    }
    Ok(Detection { cone, dp, ds })
}

fn detect_cauchy(space: &ConeMetricSpace, c: &Constructed, levels: usize) -> Result<(bool, bool)> {
    let probes = probes(&c.ctx, levels);
    let tail = c.sequence.len() * 3 / 4;
    let cone = space.detect_cone_cauchy(&c.sequence, &probes, tail)?;
    let thresholds: Vec<f64> = probes.iter().map(|p| c.ctx.xi(p)).collect::<Result<_>>()?;
    let smallest = thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_seq = &c.sequence[tail..];
    let mut dp = true;
    'outer: for (i, x) in tail_seq.iter().enumerate() {
        for y in &tail_seq[i + 1..] {
            if space.dp(&c.ctx, x, y)? >= smallest {
                dp = false;
                break 'outer;
            }
        }
    }
    Ok((cone, dp))
}

struct ConvergenceSuite {
    space: ConeMetricSpace,
    family: SeminormFamily,
    rates: Vec<(f64, usize)>,
    sequences: usize,
    levels: usize,
    spec: SampleSpec,
}

impl ConvergenceSuite {
    fn new(cfg: &SuiteConfig) -> Self {
        ConvergenceSuite {
            space: ConeMetricSpace::componentwise_abs(2).expect("valid"),
            family: SeminormFamily::coordinate(2).expect("valid"),
            rates: cfg.rates.iter().map(|&r| (r, cfg.length_for_rate(r))).collect(),
            sequences: cfg.sequences_per_rate,
            levels: cfg.probe_levels,
            spec: cfg.sample.clone(),
        }
    }
}

impl Suite for ConvergenceSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (space, family, levels) = (&self.space, &self.family, self.levels);
        let mut checks = Vec::new();
        for &(rate, length) in &self.rates {
            checks.push(Check::new(format!("rate{rate}/cone_iff_d_p_iff_d_S"), self.sequences, move |rng, index| {
                let c = construct_sequence(rng, 2, rate, length, index % 2 == 0);
                match detect_all(space, family, &c, levels) {
                    Ok(d) => Outcome::check(
                        d.cone == d.dp && d.cone == d.ds && d.cone == c.convergent,
                        0.0,
                        || json!({ "convergent": c.convergent, "cone": d.cone, "d_p": d.dp, "d_S": d.ds }),
                    ),
                    Err(err) => Outcome::error(err, json!({ "index": index })),
                }
            }));
            checks.push(Check::new(format!("rate{rate}/cone_cauchy_iff_d_p_cauchy"), self.sequences, move |rng, index| {
                let c = construct_sequence(rng, 2, rate, length, index % 2 == 0);
                match detect_cauchy(space, &c, levels) {
                    Ok((cone, dp)) => Outcome::check(cone == dp && cone, 0.0, || json!({ "cone": cone, "d_p": dp })),
                    Err(err) => Outcome::error(err, json!({ "index": index })),
                }
            }));
        }
        let spec = &self.spec;
        checks.push(Check::new("p_ll_c_implies_d_p_below_xi_c", spec.count, move |rng, _| {
            let ctx = orthant_context(rng, 2);
            let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
            let c = sampling::interior_point(rng, space.value_cone(), 1.0);
            let y = x.add(&c.hadamard(&sampling::uniform_vector(rng, 2, -0.999, 0.999)).expect("dim")).expect("dim");
            match (space.dp(&ctx, &x, &y), ctx.xi(&c)) {
                (Ok(d), Ok(bound)) => Outcome::check(d < bound, d - bound, || json!({ "x": vj(&x), "y": vj(&y), "c": vj(&c) })),
                _ => Outcome::error("evaluation failed", json!({ "x": vj(&x) })),
            }
        }));
        checks.push(Check::new("d_p_below_eps_implies_p_ll_eps_e", spec.count, move |rng, _| {
            let ctx = orthant_context(rng, 2);
            let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
            let y = x.add(&sampling::unit_direction(rng, 2).scale(sampling::log_uniform(rng, 1e-6, 10.0))).expect("dim");
            let eps = sampling::log_uniform(rng, 1e-6, 10.0);
            let evaluated = space.dp(&ctx, &x, &y).and_then(|d| {
                let p = space.p(&x, &y)?;
                Ok((d, space.value_cone().ll(&p, &ctx.e().scale(eps), ORDER_MARGIN)?))
            });
            match evaluated {
                Ok((d, ll)) => Outcome::check(d >= eps || ll, 0.0, || json!({ "x": vj(&x), "y": vj(&y), "eps": eps })),
                Err(err) => Outcome::error(err, json!({ "x": vj(&x) })),
            }
        }));
        checks
    }
}

// ---------------------------------------------------------------------------
// topology-compare

struct TopologySuite {
    space: ConeMetricSpace,
    family: SeminormFamily,
    spec: SampleSpec,
}

impl TopologySuite {
    fn new(cfg: &SuiteConfig) -> Self {
        TopologySuite {
            space: ConeMetricSpace::componentwise_abs(2).expect("valid"),
            family: SeminormFamily::coordinate(2).expect("valid"),
            spec: cfg.sample.clone(),
        }
    }
}

/// `t·1` with `h(t·1) < η`, halving `t` from 1.
fn small_interior(family: &SeminormFamily, dim: usize, eta: f64) -> Result<Vector> {
    let mut t = 1.0;
    for _ in 0..1100 {
        let c = Vector::filled(dim, t);
        if family.h(&c)? < eta {
            return Ok(c);
        }
        t *= 0.5;
    }
    Err(Error::InvalidArgument(format!("no interior point with h < {eta}")))
}

impl Suite for TopologySuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (space, family, spec) = (&self.space, &self.family, &self.spec);
        let cone = space.value_cone();
        vec![
            // Every cone ball B(x, c) contains a d_S ball of radius η(c).
            Check::new("d_S_topology_finer_than_cone", spec.count, move |rng, _| {
                let c = sampling::interior_point(rng, cone, 1.0);
                let eta = c.iter().enumerate().map(|(k, &ck)| 0.5f64.powi(k as i32 + 1) * ck / (1.0 + ck)).fold(f64::INFINITY, f64::min);
                let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let y = x.add(&sampling::unit_direction(rng, 2).scale(sampling::log_uniform(rng, 1e-4, 10.0))).expect("dim");
                let evaluated = space.ds(family, &x, &y).and_then(|d| Ok((d, cone.ll(&space.p(&x, &y)?, &c, ORDER_MARGIN)?)));
                match evaluated {
                    Ok((d, ll)) => Outcome::check(d >= eta || ll, 0.0, || json!({ "x": vj(&x), "y": vj(&y), "c": vj(&c) })),
                    Err(err) => Outcome::error(err, json!({ "x": vj(&x) })),
                }
            }),
            // Every d_S ball of radius η contains a cone ball B(x, c).
            Check::new("cone_topology_finer_than_d_S", spec.count, move |rng, _| {
                let eta = sampling::log_uniform(rng, 1e-4, 0.74);
                let c = match small_interior(family, 2, eta) {
                    Ok(c) => c,
                    Err(err) => return Outcome::error(err, json!({ "eta": eta })),
                };
                let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let y = x.add(&c.hadamard(&sampling::uniform_vector(rng, 2, -0.999, 0.999)).expect("dim")).expect("dim");
                match space.ds(family, &x, &y) {
                    Ok(d) => Outcome::check(d < eta, d - eta, || json!({ "x": vj(&x), "y": vj(&y), "eta": eta })),
                    Err(err) => Outcome::error(err, json!({ "x": vj(&x) })),
                }
            }),
        ]
    }
}

// ---------------------------------------------------------------------------
// continuity

struct ContinuitySuite {
    space: ConeMetricSpace,
    seminorms: Vec<Seminorm>,
    spec: SampleSpec,
    length: usize,
}

impl ContinuitySuite {
    fn new(cfg: &SuiteConfig) -> Self {
        ContinuitySuite {
            space: ConeMetricSpace::componentwise_abs(3).expect("valid"),
            seminorms: vec![
                Seminorm::Coordinate { k: 1 },
                Seminorm::Coordinate { k: 2 },
                Seminorm::Coordinate { k: 3 },
                Seminorm::PartialAbsSum { k: 2 },
                Seminorm::PartialAbsSum { k: 3 },
                Seminorm::WeightedAbsSum { weights: vec![0.5, 2.0, 1.0] },
            ],
            spec: cfg.sample.clone(),
            length: cfg.sequence_length,
        }
    }
}

impl Suite for ContinuitySuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (space, seminorms, spec, length) = (&self.space, &self.seminorms, &self.spec, self.length);
        let cone = space.value_cone();
        let sequences = (spec.count / 100).max(1);
        vec![
            // p ≪ c forces q(p) ≤ q(c) for monotone seminorms.
            Check::new("cone_small_implies_seminorm_small", spec.count, move |rng, _| {
                let b = sampling::cone_point(rng, cone, 5.0);
                let c = b.add(&sampling::interior_point(rng, cone, 1.0)).expect("dim");
                let ok = cone.ll(&b, &c, ORDER_MARGIN).unwrap_or(false)
                    && seminorms.iter().all(|q| q.eval(&b).unwrap_or(f64::INFINITY) <= q.eval(&c).unwrap_or(0.0));
                Outcome::check(ok, 0.0, || json!({ "b": vj(&b), "c": vj(&c) }))
            }),
            // Σ|bᵢ| < min cᵢ forces b ≪ c.
            Check::new("seminorm_small_implies_cone_small", spec.count, move |rng, _| {
                let c = sampling::interior_point(rng, cone, 1.0);
                let delta = c.iter().copied().fold(f64::INFINITY, f64::min);
                let b = sampling::unit_direction(rng, 3).scale(sampling::uniform(rng, 0.0, 1.5) * delta);
                let q = Seminorm::PartialAbsSum { k: 3 }.eval(&b).unwrap_or(f64::INFINITY);
                let ll = cone.ll(&b, &c, ORDER_MARGIN).unwrap_or(false);
                Outcome::check(q >= delta || ll, 0.0, || json!({ "b": vj(&b), "c": vj(&c) }))
            }),
            // q(p(xₙ,yₙ) − p(x,y)) ≤ rateⁿ·q(|v| + |w|) along xₙ = x + rateⁿv, yₙ = y + rateⁿw.
            Check::new("joint_continuity_of_p", sequences, move |rng, _| {
                let rate: f64 = [0.5, 0.9, 0.99][rng.gen_range(0..3)];
                let x = sampling::uniform_vector(rng, 3, spec.lo(), spec.hi());
                let y = sampling::uniform_vector(rng, 3, spec.lo(), spec.hi());
                let v = sampling::uniform_vector(rng, 3, -1.0, 1.0);
                let w = sampling::uniform_vector(rng, 3, -1.0, 1.0);
                let envelope = v.abs().add(&w.abs()).expect("dim");
                let target = space.p(&x, &y).expect("dim");
                let mut worst = 0.0f64;
                let mut ok = true;
                for n in 0..length {
                    let r = rate.powi(n as i32);
                    let xn = x.add(&v.scale(r)).expect("dim");
                    let yn = y.add(&w.scale(r)).expect("dim");
                    let diff = space.p(&xn, &yn).and_then(|p| p.sub(&target)).expect("dim");
                    for q in seminorms {
                        let lhs = q.eval(&diff).unwrap_or(f64::INFINITY);
                        let rhs = r * q.eval(&envelope).unwrap_or(0.0);
                        worst = worst.max(lhs - rhs);
                        ok &= lhs <= rhs + 1e-12;
                    }
                }
                Outcome::check(ok, worst, || json!({ "x": vj(&x), "y": vj(&y), "v": vj(&v), "w": vj(&w), "rate": rate }))
            }),
        ]
    }
}

// ---------------------------------------------------------------------------
// closed-ball

struct ClosedBallSuite {
    space: ConeMetricSpace,
    spec: SampleSpec,
    length: usize,
    levels: usize,
}

impl ClosedBallSuite {
    fn new(cfg: &SuiteConfig) -> Self {
        ClosedBallSuite {
            space: ConeMetricSpace::componentwise_abs(2).expect("valid"),
            spec: cfg.sample.clone(),
            length: cfg.length_for_rate(0.9),
            levels: cfg.probe_levels,
        }
    }
}

impl Suite for ClosedBallSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (space, spec, length, levels) = (&self.space, &self.spec, self.length, self.levels);
        let cone = space.value_cone();
        vec![
            Check::new("closed_ball_sequentially_closed", (spec.count / 10).max(1), move |rng, _| {
                let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let c0 = sampling::interior_point(rng, cone, 2.0);
                // limit on the sphere in one coordinate, sequence from inside the ball
                let mut s = sampling::uniform_entries(rng, 2, -1.0, 1.0);
                s[rng.gen_range(0..2)] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let y = x.add(&c0.hadamard(&Vector::raw(s)).expect("dim")).expect("dim");
                let z = x.add(&c0.hadamard(&sampling::uniform_vector(rng, 2, -1.0, 1.0)).expect("dim")).expect("dim");
                let rate = sampling::uniform(rng, 0.5, 0.9);
                let sequence: Vec<Vector> = (0..length)
                    .map(|n| {
                        let r = rate.powi(n as i32);
                        Vector::raw(y.iter().zip(z.iter()).map(|(a, b)| (1.0 - r) * a + r * b).collect())
                    })
                    .collect();
                let probes: Vec<Vector> = (0..levels).map(|j| c0.scale(0.5f64.powi(j as i32))).collect();
                let evaluated = (|| {
                    let inside = sequence
                        .iter()
                        .map(|yn| space.ball_membership(&x, &c0, yn, true))
                        .collect::<Result<Vec<bool>>>()?
                        .into_iter()
                        .all(|b| b);
                    let converges = space.detect_cone_convergence(&sequence, &y, &probes, length * 3 / 4)?;
                    let limit_inside = space.ball_membership(&x, &c0, &y, true)?;
                    Ok::<_, Error>(!(inside && converges) || limit_inside)
                })();
                match evaluated {
                    Ok(ok) => Outcome::check(ok, 0.0, || json!({ "center": vj(&x), "radius": vj(&c0), "limit": vj(&y) })),
                    Err(err) => Outcome::error(err, json!({ "center": vj(&x) })),
                }
            }),
            // z ∈ B(x, c) ⇒ B(z, c − p(x, z)) ⊆ B(x, c)
            Check::new("open_balls_form_a_base", spec.count, move |rng, _| {
                let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let c = sampling::interior_point(rng, cone, 2.0);
                let z = x.add(&c.hadamard(&sampling::uniform_vector(rng, 2, -0.99, 0.99)).expect("dim")).expect("dim");
                let evaluated = (|| {
                    let inner = c.sub(&space.p(&x, &z)?)?;
                    let w = z.add(&inner.hadamard(&sampling::uniform_vector(rng, 2, -0.99, 0.99))?)?;
                    let ok = space.ball_membership(&x, &c, &z, false)?
                        && space.ball_membership(&z, &inner, &w, false)?
                        && space.ball_membership(&x, &c, &w, false)?;
                    Ok::<_, Error>(ok)
                })();
                match evaluated {
                    Ok(ok) => Outcome::check(ok, 0.0, || json!({ "x": vj(&x), "c": vj(&c), "z": vj(&z) })),
                    Err(err) => Outcome::error(err, json!({ "x": vj(&x), "c": vj(&c), "z": vj(&z) })),
                }
            }),
            // For c₀, c ≫ 0 some c₀/2ⁿ ≪ c: the balls B(x, c₀/2ⁿ) form a countable local base.
            Check::new("countable_local_base", spec.count, move |rng, _| {
                let c0 = sampling::interior_point(rng, cone, 10.0);
                let c = sampling::interior_point(rng, cone, 1e-3);
                let found = (0..200).any(|n| cone.ll(&c0.scale(0.5f64.powi(n)), &c, ORDER_MARGIN).unwrap_or(false));
                Outcome::check(found, 0.0, || json!({ "c0": vj(&c0), "c": vj(&c) }))
            }),
        ]
    }
}

// ---------------------------------------------------------------------------
// boundedness

struct BoundednessSuite {
    space: ConeMetricSpace,
    sets: usize,
    spec: SampleSpec,
}

impl BoundednessSuite {
    fn new(cfg: &SuiteConfig) -> Self {
        BoundednessSuite {
            space: ConeMetricSpace::componentwise_abs(2).expect("valid"),
            sets: cfg.random_sets,
            spec: cfg.sample.clone(),
        }
    }
}

impl Suite for BoundednessSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (space, spec) = (&self.space, &self.spec);
        let cone = space.value_cone();
        vec![Check::new("diameter_bounds", self.sets, move |rng, _| {
            let size = rng.gen_range(1..=12);
            let points: Vec<Vector> = (0..size).map(|_| sampling::uniform_vector(rng, 2, spec.lo(), spec.hi())).collect();
            let weights = sampling::uniform_entries(rng, 2, 0.0, 3.0);
            let seminorms = vec![
                Seminorm::Coordinate { k: 1 },
                Seminorm::Coordinate { k: 2 },
                Seminorm::PartialAbsSum { k: 1 },
                Seminorm::PartialAbsSum { k: 2 },
                Seminorm::WeightedAbsSum { weights },
            ];
            let family = SeminormFamily::new(seminorms.clone(), seminorms.len()).expect("valid");
            let evaluated = (|| {
                let report = space.diameter(&points, &family)?;
                let delta = report.delta.clone().ok_or(Error::NotStronglyMinihedral)?;
                let witness = report.witness_bound.clone().ok_or(Error::NotStronglyMinihedral)?;
                let mut worst = 0.0f64;
                let mut ok = report.bounded_above;
                let mut attained = vec![false; 2];
                for x in &points {
                    for y in &points {
                        let p = space.p(x, y)?;
                        let slack = cone.min_slack(&delta.sub(&p)?)?;
                        worst = worst.max(-slack);
                        ok &= slack >= -ORDER_TOL;
                        for (i, hit) in attained.iter_mut().enumerate() {
                            *hit |= p[i] == delta[i];
                        }
                    }
                }
                ok &= attained.iter().all(|&a| a);
                ok &= cone.ll(&delta, &witness, ORDER_MARGIN)?;
                for (dq, q) in report.delta_q.iter().zip(&seminorms) {
                    let q_delta = q.eval(&delta)?;
                    worst = worst.max(dq - q_delta);
                    ok &= *dq <= q_delta + ORDER_TOL && *dq <= q.eval(&witness)? + ORDER_TOL;
                }
                Ok::<_, Error>((worst, ok))
            })();
            match evaluated {
                Ok((worst, ok)) => Outcome::check(ok, worst, || json!({ "points": points.iter().map(vj).collect::<Vec<_>>() })),
                Err(err) => Outcome::error(err, json!({ "points": points.iter().map(vj).collect::<Vec<_>>() })),
            }
        })]
    }
}

// ---------------------------------------------------------------------------
// fixed-point

pub const BANACH_TOL: f64 = 1e-10;
pub const BOYD_WONG_TOL: f64 = 1e-8;
pub const WEAK_TOL: f64 = 1e-6;

struct FixedPointSuite {
    space: ConeMetricSpace,
    ctx: ScalarizationContext,
    cfg: SuiteConfig,
    verify_spec: SampleSpec,
}

impl FixedPointSuite {
    fn new(cfg: &SuiteConfig) -> Self {
        let space = ConeMetricSpace::componentwise_abs(2).expect("valid");
        let ctx = ScalarizationContext::new(
            space.value_cone().clone(),
            Vector::filled(2, 1.0),
            cfg.tol,
        )
        .expect("interior e");
        let verify_spec = SampleSpec { count: (cfg.sample.count / 10).max(1), ..cfg.sample.clone() };
        FixedPointSuite { space, ctx, cfg: cfg.clone(), verify_spec }
    }
}

/// Random `Tx = a ⊙ x + b` with `max |aᵢ| ≤ 0.9`; returns the map, `k` and `b/(1−a)`.
fn random_affine(rng: &mut ChaCha8Rng) -> (MapDescriptor, f64, Vector) {
    let a = sampling::uniform_vector(rng, 2, -0.9, 0.9);
    let b = sampling::uniform_vector(rng, 2, -1.0, 1.0);
    let fixed = Vector::raw(a.iter().zip(b.iter()).map(|(ai, bi)| bi / (1.0 - ai)).collect());
    let k = a.max_abs();
    (MapDescriptor::DiagonalAffine { diag: a, shift: b }, k, fixed)
}

impl Suite for FixedPointSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (space, ctx, cfg, verify) = (&self.space, &self.ctx, &self.cfg, &self.verify_spec);
        let spec = &cfg.sample;
        vec![
            Check::new("banach_random_affine", cfg.contraction_runs, move |rng, _| {
                let (map, k, fixed) = random_affine(rng);
                let x0 = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let opts = SolveOptions { tol: BANACH_TOL, max_iter: 500 };
                let inputs = || json!({ "map": map, "k": k, "x0": vj(&x0) });
                match banach_solve(space, ctx, &map, k, &x0, &opts, &Verification::Sampled(verify.clone())) {
                    Ok(report) => {
                        let error = report.final_point.sub(&fixed).expect("dim").max_abs();
                        let ratio_excess = report.contraction_estimate - (k + 1e-6);
                        let ok = report.converged
                            && report.certificate == Certificate::BanachVerified
                            && report.iterations <= 500
                            && error <= 1e-9
                            && ratio_excess <= 0.0;
                        Outcome::check(ok, error.max(ratio_excess), inputs)
                    }
                    Err(err) => Outcome::error(err, inputs()),
                }
            }),
            Check::new("banach_a_posteriori_bound", cfg.contraction_runs, move |rng, _| {
                let (map, k, fixed) = random_affine(rng);
                let mut x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let mut worst = f64::NEG_INFINITY;
                for _ in 0..200 {
                    let next = map.apply(&x).expect("dim");
                    let bound = k / (1.0 - k) * space.dp(ctx, &next, &x).expect("dim");
                    let actual = space.dp(ctx, &next, &fixed).expect("dim");
                    worst = worst.max(actual - bound);
                    x = next;
                }
                Outcome::leq(worst, 0.0, 1e-12, || json!({ "map": map, "k": k }))
            }),
            Check::new("banach_unique_fixed_point", cfg.contraction_runs, move |rng, _| {
                let (map, k, _) = random_affine(rng);
                let starts = [
                    sampling::uniform_vector(rng, 2, spec.lo(), spec.hi()),
                    sampling::uniform_vector(rng, 2, spec.lo(), spec.hi()),
                ];
                let opts = SolveOptions { tol: BANACH_TOL, max_iter: 500 };
                let finals: Result<Vec<Vector>> = starts
                    .iter()
                    .map(|x0| banach_solve(space, ctx, &map, k, x0, &opts, &Verification::Skip).map(|r| r.final_point))
                    .collect();
                match finals {
                    Ok(f) => {
                        let gap = space.dp(ctx, &f[0], &f[1]).expect("dim");
                        Outcome::leq(gap, 2.0 * BANACH_TOL, 0.0, || json!({ "map": map }))
                    }
                    Err(err) => Outcome::error(err, json!({ "map": map })),
                }
            }),
            Check::new("linear_scalarized_bridge", spec.count, move |rng, _| {
                let (map, k, _) = random_affine(rng);
                let local = orthant_context(rng, 2);
                let varphi = VarphiDescriptor::Scale { alpha: k };
                let x = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let y = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let evaluated = (|| {
                    let lhs = space.dp(&local, &map.apply(&x)?, &map.apply(&y)?)?;
                    let rhs = scalarize_varphi(&local, &varphi, space.dp(&local, &x, &y)?)?;
                    Ok::<_, Error>((lhs, rhs))
                })();
                match evaluated {
                    Ok((lhs, rhs)) => Outcome::leq(lhs, rhs, 1e-9, || json!({ "x": vj(&x), "y": vj(&y), "map": map })),
                    Err(err) => Outcome::error(err, json!({ "x": vj(&x), "y": vj(&y) })),
                }
            }),
            Check::new("boyd_wong_scale_path", cfg.boyd_wong_starts, move |rng, _| {
                let b = sampling::uniform_vector(rng, 2, -1.0, 1.0);
                let map = MapDescriptor::DiagonalAffine { diag: Vector::filled(2, 0.5), shift: b.clone() };
                let x0 = sampling::uniform_vector(rng, 2, spec.lo(), spec.hi());
                let opts = SolveOptions { tol: BANACH_TOL, max_iter: 10_000 };
                match boyd_wong_solve(space, &map, &VarphiDescriptor::Scale { alpha: 0.5 }, ctx, &x0, &opts, verify) {
                    Ok(report) => {
                        let error = report.final_point.sub(&b.scale(2.0)).expect("dim").max_abs();
                        Outcome::check(report.converged && error <= 1e-9, error, || json!({ "b": vj(&b), "x0": vj(&x0) }))
                    }
                    Err(err) => Outcome::error(err, json!({ "b": vj(&b), "x0": vj(&x0) })),
                }
            }),
            Check::new("boyd_wong_coordinate_ratio", cfg.boyd_wong_starts, move |rng, _| {
                let x0 = sampling::uniform_vector(rng, 2, 0.0, 10.0);
                let opts = SolveOptions { tol: BOYD_WONG_TOL, max_iter: 100_000 };
                let bound = 1.01 * BOYD_WONG_TOL.sqrt() + BOYD_WONG_TOL;
                match boyd_wong_solve(space, &MapDescriptor::CoordinateRatio, &VarphiDescriptor::CoordinateRatio, ctx, &x0, &opts, verify) {
                    Ok(report) => {
                        let distance = report.final_point.max_abs();
                        let ok = report.converged
                            && report.certificate == Certificate::BoydWongVerified
                            && distance <= bound;
                        Outcome::check(ok, (distance - bound).max(0.0), || json!({ "x0": vj(&x0), "final": vj(&report.final_point) }))
                    }
                    Err(err) => Outcome::error(err, json!({ "x0": vj(&x0) })),
                }
            }),
            Check::new("phi_hat_below_identity_on_log_grid", 61, move |_, index| {
                let r = 10f64.powf(-3.0 + 0.1 * index as f64);
                match scalarize_varphi(ctx, &VarphiDescriptor::CoordinateRatio, r) {
                    Ok(value) => Outcome::check(value < r, value - r, || json!({ "r": r, "phi_hat": value })),
                    Err(err) => Outcome::error(err, json!({ "r": r })),
                }
            }),
            Check::new("phi_hat_monotone_subadditive", spec.count, move |rng, _| {
                let local = orthant_context(rng, 2);
                let r = sampling::log_uniform(rng, 1e-3, 1e3);
                let s = sampling::log_uniform(rng, 1e-3, 1e3);
                let phi = |t: f64| scalarize_varphi(&local, &VarphiDescriptor::CoordinateRatio, t);
                match (phi(r), phi(s), phi(r + s)) {
                    (Ok(a), Ok(b), Ok(sum)) => {
                        let excess = (a - sum).max(sum - a - b);
                        Outcome::check(a <= sum + 1e-12 && sum <= a + b + 1e-12, excess, || json!({ "r": r, "s": s }))
                    }
                    _ => Outcome::error("evaluation failed", json!({ "r": r, "s": s })),
                }
            }),
            Check::new("nonlinear_scalarized_bridge", spec.count, move |rng, _| {
                let local = orthant_context(rng, 2);
                let map = MapDescriptor::CoordinateRatio;
                let x = sampling::uniform_vector(rng, 2, 0.0, 10.0);
                let y = sampling::uniform_vector(rng, 2, 0.0, 10.0);
                let evaluated = (|| {
                    let lhs = space.dp(&local, &map.apply(&x)?, &map.apply(&y)?)?;
                    let rhs = scalarize_varphi(&local, &VarphiDescriptor::CoordinateRatio, space.dp(&local, &x, &y)?)?;
                    Ok::<_, Error>((lhs, rhs))
                })();
                match evaluated {
                    Ok((lhs, rhs)) => Outcome::leq(lhs, rhs, 1e-9, || json!({ "x": vj(&x), "y": vj(&y), "e": vj(local.e()) })),
                    Err(err) => Outcome::error(err, json!({ "x": vj(&x), "y": vj(&y) })),
                }
            }),
            Check::new("weak_contraction_orbits", cfg.weak_orbits, move |rng, _| {
                let x0 = sampling::uniform_vector(rng, 2, 0.0, 1.0);
                let opts = SolveOptions { tol: WEAK_TOL, max_iter: 100_000 };
                match weak_contraction_iterate(space, ctx, &MapDescriptor::QuadraticDecrement, &VarphiDescriptor::HalfSquare, &x0, &opts) {
                    Ok(report) => {
                        let chain = report.residual_vectors.windows(2).all(|w| {
                            space.value_cone().leq(&w[1], &w[0], 1e-12).unwrap_or(false)
                        });
                        let last = report.residual_history.last().copied().unwrap_or(f64::INFINITY);
                        let ok = chain
                            && report.certificate == Certificate::WeakContractionMonotone
                            && report.converged
                            && last <= WEAK_TOL;
                        Outcome::check(ok, (last - WEAK_TOL).max(0.0), || json!({ "x0": vj(&x0), "iterations": report.iterations }))
                    }
                    Err(err) => Outcome::error(err, json!({ "x0": vj(&x0) })),
                }
            }),
        ]
    }
}

// ---------------------------------------------------------------------------
// omega-example

/// `h(c)` for `c = (ε, 0, …, 0)` in the sequence space truncated to `truncate` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaDemo {
    pub h_c: f64,
    pub epsilon: f64,
    pub truncate: usize,
    pub tail_bound: f64,
    pub pass: bool,
}

pub fn omega_demo(epsilon: f64, truncate: usize) -> Result<OmegaDemo> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument("epsilon must be > 0".into()));
    }
    let family = SeminormFamily::coordinate(truncate)?;
    let mut c = vec![0.0; truncate];
    c[0] = epsilon;
    let h_c = family.h(&Vector::new(c)?)?;
    Ok(OmegaDemo { h_c, epsilon, truncate, tail_bound: omega_tail_bound(truncate), pass: h_c < epsilon })
}

struct OmegaSuite {
    epsilon: f64,
    truncation: usize,
    spec: SampleSpec,
}

impl OmegaSuite {
    fn new(cfg: &SuiteConfig) -> Self {
        OmegaSuite { epsilon: cfg.epsilon, truncation: cfg.truncation, spec: cfg.sample.clone() }
    }
}

impl Suite for OmegaSuite {
    fn checks(&self) -> Vec<Check<'_>> {
        let (epsilon, n) = (self.epsilon, self.truncation);
        vec![
            Check::new("h_c_below_epsilon", 1, move |_, _| match omega_demo(epsilon, n) {
                Ok(demo) => Outcome::check(demo.pass, demo.h_c - epsilon, || json!(demo)),
                Err(err) => Outcome::error(err, json!({ "epsilon": epsilon })),
            }),
            Check::new("h_c_below_epsilon_for_sampled_epsilon", self.spec.count, move |rng, _| {
                let eps = sampling::log_uniform(rng, 1e-8, 1e3);
                match omega_demo(eps, n) {
                    Ok(demo) => Outcome::check(demo.pass, demo.h_c - eps, || json!(demo)),
                    Err(err) => Outcome::error(err, json!({ "epsilon": eps })),
                }
            }),
            // Truncating after n terms moves h by less than 2⁻ⁿ.
            Check::new("truncation_tail_bound", self.spec.count, move |rng, _| {
                let u = sampling::uniform_vector(rng, 2 * n, -10.0, 10.0);
                let short = SeminormFamily::coordinate(n).and_then(|f| f.h(&u));
                let long = SeminormFamily::coordinate(2 * n).and_then(|f| f.h(&u));
                match (short, long) {
                    (Ok(a), Ok(b)) => Outcome::leq(b - a, omega_tail_bound(n), 0.0, || json!({ "u": vj(&u) })),
                    _ => Outcome::error("evaluation failed", json!({ "u": vj(&u) })),
                }
            }),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            sample: SampleSpec::new(200, 17),
            sequences_per_rate: 10,
            oracle_pairs: 5,
            contraction_runs: 5,
            boyd_wong_starts: 3,
            weak_orbits: 3,
            random_sets: 10,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn every_suite_passes_on_a_small_budget() {
        let cfg = small();
        for id in SUITES {
            let report = run_suite(id, &cfg).unwrap();
            let failures: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
            assert!(report.passed, "{id}: {failures:#?}");
        }
    }

    #[test]
    fn registry_covers_every_result() {
        for (result, suite) in COVERED_RESULTS {
            assert!(SUITES.contains(suite), "{result} maps to unregistered suite {suite}");
        }
        for suite in SUITES {
            assert!(COVERED_RESULTS.iter().any(|(_, s)| s == suite), "{suite} covers nothing");
        }
    }

    #[test]
    fn unknown_suite_lists_available() {
        match run_suite("nope", &small()) {
            Err(Error::UnknownSuite { available, .. }) => assert!(available.contains("omega-example")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_count_is_rejected() {
        let mut cfg = small();
        cfg.sample.count = 0;
        assert!(matches!(run_suite("scalarization", &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn omega_demo_value() {
        let demo = omega_demo(0.1, 20).unwrap();
        assert!((demo.h_c - 0.1 / 2.2).abs() < 1e-15);
        assert!(demo.pass);
        assert!(omega_demo(0.0, 20).is_err());
    }

    #[test]
    fn grid_infimum_sits_at_the_corner() {
        let family = SeminormFamily::new(vec![Seminorm::Coordinate { k: 1 }, Seminorm::Coordinate { k: 2 }], 2).unwrap();
        let p = Vector::from_slice(&[1.0, 1.0]).unwrap();
        let (value, argmin) = grid_infimum(&family, &p, 30).unwrap();
        assert!((value - 0.375).abs() < 1e-15);
        assert_eq!(argmin, p);
    }

    #[test]
    fn sequence_lengths_cover_slow_rates() {
        let cfg = SuiteConfig::default();
        assert_eq!(cfg.length_for_rate(0.5), 64);
        let slow = cfg.length_for_rate(0.99);
        assert!(0.99f64.powi((slow * 3 / 4) as i32) <= 1e-4);
    }
}
