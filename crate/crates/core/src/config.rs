//! TOML instance configuration.
//!
//! A config file describes one concrete instance: the value cone, the
//! interior point `e`, a seminorm family, a cone metric space, optionally a
//! self-map with its comparison function, solver settings, probes and sample
//! budgets. Every section except `[cone]` is optional; `[suite]` and
//! `[sample]` alone are enough for running suites.
//!
//! ```toml
//! [cone]
//! kind = "orthant"
//! dim = 2
//!
//! [scalarization]
//! e = [1.0, 2.0]
//!
//! [map]
//! kind = "diagonal_affine"
//! diag = [0.5, 0.5]
//! shift = [1.0, 1.0]
//!
//! [solver]
//! x0 = [0.0, 0.0]
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::cone_metric::{ConeMetricSpace, MetricKind};
use crate::fixed_point::{MapDescriptor, SolveOptions, VarphiDescriptor, DEFAULT_MAX_ITER};
use crate::harness::SuiteConfig;
use crate::ordered_space::{Cone, ConeKind, HVariant, Seminorm, SeminormFamily, Vector};
use crate::sampling::SampleSpec;
use crate::scalarization::{ScalarizationContext, DEFAULT_TOL, INTERIOR_MARGIN};

/// A configuration problem, tied to the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError { field: field.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error in `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScalarization {
    e: Option<Vec<f64>>,
    tol: Option<f64>,
    margin: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(default)]
    variant: HVariant,
    truncation: Option<usize>,
    #[serde(default)]
    seminorms: Vec<Seminorm>,
    monotone: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawSpace {
    dim: Option<usize>,
    #[serde(flatten)]
    kind: MetricKind,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    k: Option<f64>,
    x0: Option<Vec<f64>>,
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbes {
    levels: Option<usize>,
    vectors: Option<Vec<Vec<f64>>>,
    tail_index: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    cone: Option<ConeKind>,
    #[serde(default)]
    scalarization: RawScalarization,
    family: Option<RawFamily>,
    space: Option<RawSpace>,
    map: Option<MapDescriptor>,
    varphi: Option<VarphiDescriptor>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    probes: RawProbes,
    sample: Option<SampleSpec>,
    suite: Option<SuiteConfig>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Replaces every `tol` field: scalarization, solver and suite.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// A parsed but not yet validated configuration file.
#[derive(Debug, Clone)]
pub struct InstanceConfig {
    raw: RawConfig,
    digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub k: Option<f64>,
    pub x0: Option<Vector>,
    pub options: SolveOptions,
}

/// A validated instance with all cross-references checked.
#[derive(Debug, Clone)]
pub struct Instance {
    pub ctx: ScalarizationContext,
    pub margin: f64,
    pub family: SeminormFamily,
    /// Absent when no `[space]` is given and the cone is not an orthant.
    pub space: Option<ConeMetricSpace>,
    pub map: Option<MapDescriptor>,
    pub varphi: Option<VarphiDescriptor>,
    pub solver: SolverSettings,
    pub probes: Vec<Vector>,
    pub tail_index: Option<usize>,
    pub sample: SampleSpec,
}

impl Instance {
    pub fn cone(&self) -> &Cone {
        self.ctx.cone()
    }

    pub fn require_space(&self) -> ConfigResult<&ConeMetricSpace> {
        self.space.as_ref().ok_or_else(|| ConfigError::new("space", "a [space] section is required for non-orthant cones"))
    }

    pub fn require_map(&self) -> ConfigResult<&MapDescriptor> {
        self.map.as_ref().ok_or_else(|| ConfigError::new("map", "a [map] section is required"))
    }

    pub fn require_varphi(&self) -> ConfigResult<&VarphiDescriptor> {
        self.varphi.as_ref().ok_or_else(|| ConfigError::new("varphi", "a [varphi] section is required"))
    }

    pub fn require_x0(&self) -> ConfigResult<&Vector> {
        self.solver.x0.as_ref().ok_or_else(|| ConfigError::new("solver.x0", "a starting point is required"))
    }
}

fn vector(field: &str, entries: Vec<f64>, dim: usize) -> ConfigResult<Vector> {
    let v = Vector::new(entries).map_err(|e| ConfigError::new(field, e))?;
    v.check_dim(dim).map_err(|e| ConfigError::new(field, e))?;
    Ok(v)
}

impl InstanceConfig {
    pub fn from_toml_str(text: &str) -> ConfigResult<Self> {
        let deserializer = toml::de::Deserializer::parse(text).map_err(|e| ConfigError::new("", e.to_string().trim_end()))?;
        let raw: RawConfig = serde_path_to_error::deserialize(deserializer).map_err(|e| {
            let field = e.path().to_string();
            let field = if field == "." { String::new() } else { field };
            ConfigError::new(field, e.into_inner().message().trim_end())
        })?;
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(InstanceConfig { raw, digest })
    }

    pub fn from_path(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// SHA-256 of the file contents, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    fn sample(&self, overrides: &Overrides) -> ConfigResult<SampleSpec> {
        let mut sample = self.raw.sample.clone().unwrap_or_default();
        if let Some(seed) = overrides.seed {
            sample.seed = seed;
        }
        sample.validate().map_err(|e| ConfigError::new("sample", e))?;
        Ok(sample)
    }

    /// Suite budgets: `[suite]` with `[sample]` folded in.
    pub fn suite_config(&self, overrides: &Overrides) -> ConfigResult<SuiteConfig> {
        let mut cfg = self.raw.suite.clone().unwrap_or_default();
        if self.raw.sample.is_some() {
            cfg.sample = self.sample(overrides)?;
        } else if let Some(seed) = overrides.seed {
            cfg.sample.seed = seed;
        }
        if let Some(tol) = overrides.tol {
            cfg.tol = tol;
        }
        cfg.validate().map_err(|e| ConfigError::new("suite", e))?;
        Ok(cfg)
    }

    pub fn instance(&self, overrides: &Overrides) -> ConfigResult<Instance> {
        let raw = &self.raw;
        let kind = raw.cone.clone().ok_or_else(|| ConfigError::new("cone", "a [cone] section is required"))?;
        let cone = Cone::from_kind(kind).map_err(|e| ConfigError::new("cone", e))?;
        let n = cone.dim();

        let sc = &raw.scalarization;
        let e = match &sc.e {
            Some(entries) => vector("scalarization.e", entries.clone(), n)?,
            None => cone.interior_witness().clone(),
        };
        let margin = sc.margin.unwrap_or(INTERIOR_MARGIN);
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(ConfigError::new("scalarization.margin", "must be a positive finite number"));
        }
        let interior = cone.strictly_contains(&e, margin).map_err(|err| ConfigError::new("scalarization.e", err))?;
        if !interior {
            return Err(ConfigError::new("scalarization.e", "e must be a strictly interior point of the cone"));
        }
        let tol = overrides.tol.or(sc.tol).unwrap_or(DEFAULT_TOL);
        let ctx = ScalarizationContext::new(cone.clone(), e, tol).map_err(|err| {
            let field = if matches!(err, crate::Error::InvalidArgument(_)) { "scalarization.tol" } else { "scalarization.e" };
            ConfigError::new(field, err)
        })?;

        let family = match &raw.family {
            None => SeminormFamily::coordinate(n).map_err(|e| ConfigError::new("family", e))?,
            Some(f) => family_from_raw(f, n)?,
        };

        let space = match &raw.space {
            Some(s) => Some(space_from_raw(s, &cone)?),
            None if cone.is_orthant() => Some(ConeMetricSpace::componentwise_abs(n).map_err(|e| ConfigError::new("space", e))?),
            None => None,
        };
        let point_dim = space.as_ref().map(ConeMetricSpace::point_dim).unwrap_or(n);

        if let Some(map) = &raw.map {
            validate_map(map, point_dim)?;
        }

        let solver = &raw.solver;
        if let Some(k) = solver.k {
            if !(0.0..1.0).contains(&k) {
                return Err(ConfigError::new("solver.k", "contraction constant must lie in [0, 1)"));
            }
        }
        let x0 = solver.x0.clone().map(|x| vector("solver.x0", x, point_dim)).transpose()?;
        let options = SolveOptions {
            tol: overrides.tol.or(solver.tol).unwrap_or(SolveOptions::default().tol),
            max_iter: overrides.max_iter.or(solver.max_iter).unwrap_or(DEFAULT_MAX_ITER),
        };
        if !(options.tol > 0.0 && options.tol.is_finite()) {
            return Err(ConfigError::new("solver.tol", "must be a positive finite number"));
        }
        if options.max_iter == 0 {
            return Err(ConfigError::new("solver.max_iter", "must be ≥ 1"));
        }

        let probes = match (&raw.probes.vectors, raw.probes.levels) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new("probes", "give either `levels` or `vectors`, not both"));
            }
            (Some(vectors), None) => vectors
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let field = format!("probes.vectors[{j}]");
                    let probe = vector(&field, v.clone(), n)?;
                    match cone.strictly_contains(&probe, margin) {
                        Ok(true) => Ok(probe),
                        _ => Err(ConfigError::new(field, "probes must be strictly interior")),
                    }
                })
                .collect::<ConfigResult<Vec<_>>>()?,
            (None, levels) => {
                let levels = levels.unwrap_or(5);
                if levels == 0 {
                    return Err(ConfigError::new("probes.levels", "must be ≥ 1"));
                }
                (0..levels).map(|j| ctx.e().scale(0.5f64.powi(j as i32))).collect()
            }
        };

        Ok(Instance {
            ctx,
            margin,
            family,
            space,
            map: raw.map.clone(),
            varphi: raw.varphi,
            solver: SolverSettings { k: solver.k, x0, options },
            probes,
            tail_index: raw.probes.tail_index,
            sample: self.sample(overrides)?,
        })
    }
}

fn family_from_raw(raw: &RawFamily, n: usize) -> ConfigResult<SeminormFamily> {
    let truncation = raw.truncation.unwrap_or(match raw.variant {
        HVariant::Coordinate => n,
        HVariant::Family => raw.seminorms.len().max(1),
    });
    let family = match raw.variant {
        HVariant::Coordinate => {
            if !raw.seminorms.is_empty() {
                return Err(ConfigError::new("family.seminorms", "the coordinate variant takes no seminorm list"));
            }
            SeminormFamily::coordinate(truncation).map_err(|e| ConfigError::new("family.truncation", e))?
        }
        HVariant::Family => {
            for (i, q) in raw.seminorms.iter().enumerate() {
                q.validate(n).map_err(|e| ConfigError::new(format!("family.seminorms[{i}]"), e))?;
            }
            SeminormFamily::new(raw.seminorms.clone(), truncation).map_err(|e| ConfigError::new("family", e))?
        }
    };
    Ok(match raw.monotone {
        Some(false) => family.declared_non_monotone(),
        _ => family,
    })
}

fn space_from_raw(raw: &RawSpace, cone: &Cone) -> ConfigResult<ConeMetricSpace> {
    match &raw.kind {
        MetricKind::FiniteTable(table) => {
            ConeMetricSpace::from_kind(0, MetricKind::FiniteTable(table.clone()), Some(cone.clone()))
                .map_err(|e| ConfigError::new("space.table", e))
        }
        kind => {
            if !cone.is_orthant() {
                return Err(ConfigError::new("cone", "componentwise metrics take values in the orthant"));
            }
            let dim = raw.dim.unwrap_or(cone.dim());
            if dim != cone.dim() {
                return Err(ConfigError::new(
                    "space.dim",
                    format!("space dimension {dim} differs from cone dimension {}", cone.dim()),
                ));
            }
            let field = if matches!(kind, MetricKind::WeightedComponentwise { .. }) { "space.weights" } else { "space" };
            ConeMetricSpace::from_kind(dim, kind.clone(), None).map_err(|e| ConfigError::new(field, e))
        }
    }
}

fn validate_map(map: &MapDescriptor, point_dim: usize) -> ConfigResult<()> {
    if let MapDescriptor::Composite { maps } = map {
        for (i, inner) in maps.iter().enumerate() {
            validate_map(inner, point_dim).map_err(|e| ConfigError::new(format!("map.maps[{i}]"), e.message))?;
        }
        return Ok(());
    }
    if let MapDescriptor::DiagonalAffine { diag, shift } = map {
        if diag.dim() != point_dim || shift.dim() != point_dim {
            return Err(ConfigError::new(
                "map",
                format!("diag and shift must have dimension {point_dim}"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const AFFINE: &str = r#"
[cone]
kind = "orthant"
dim = 2

[scalarization]
e = [1.0, 2.0]

[map]
kind = "diagonal_affine"
diag = [0.5, 0.5]
shift = [1.0, 1.0]

[solver]
x0 = [0.0, 0.0]
"#;

    fn load(text: &str) -> ConfigResult<Instance> {
        InstanceConfig::from_toml_str(text)?.instance(&Overrides::default())
    }

    #[test]
    fn loads_affine_instance() {
        let inst = load(AFFINE).unwrap();
        assert_eq!(inst.ctx.e().as_slice(), &[1.0, 2.0]);
        assert_eq!(inst.space.unwrap().point_dim(), 2);
        assert_eq!(inst.probes.len(), 5);
        assert_eq!(inst.probes[4].as_slice(), &[1.0 / 16.0, 2.0 / 16.0]);
        assert_eq!(inst.solver.options.max_iter, DEFAULT_MAX_ITER);
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = InstanceConfig::from_toml_str(AFFINE).unwrap();
        let o = Overrides { seed: Some(5), tol: Some(1e-6), max_iter: Some(10) };
        let inst = cfg.instance(&o).unwrap();
        assert_eq!(inst.sample.seed, 5);
        assert_eq!(inst.ctx.tol(), 1e-6);
        assert_eq!(inst.solver.options, SolveOptions { tol: 1e-6, max_iter: 10 });
        assert_eq!(cfg.suite_config(&o).unwrap().sample.seed, 5);
    }

    #[test]
    fn boundary_e_is_rejected_by_field() {
        let err = load(&AFFINE.replace("e = [1.0, 2.0]", "e = [0.0, 2.0]")).unwrap_err();
        assert_eq!(err.field, "scalarization.e");
    }

    #[test]
    fn dimension_mismatches_name_the_field() {
        assert_eq!(load(&AFFINE.replace("e = [1.0, 2.0]", "e = [1.0, 2.0, 3.0]")).unwrap_err().field, "scalarization.e");
        assert_eq!(load(&AFFINE.replace("x0 = [0.0, 0.0]", "x0 = [0.0]")).unwrap_err().field, "solver.x0");
        assert_eq!(load(&AFFINE.replace("shift = [1.0, 1.0]", "shift = [1.0]")).unwrap_err().field, "map");
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = load(&AFFINE.replace("dim = 2", "dim = \"two\"")).unwrap_err();
        assert_eq!(err.field, "cone");
        assert!(err.message.contains("invalid type"));
        let err = load(&format!("{AFFINE}\n[sample]\ncount = -1\n")).unwrap_err();
        assert_eq!(err.field, "sample.count");
        let err = load(&AFFINE.replace("[solver]", "[solver]\nspeed = 3")).unwrap_err();
        assert_eq!(err.field, "solver.speed");
        assert!(err.message.contains("speed"));
    }

    #[test]
    fn lorentz_without_space_has_no_space() {
        let inst = load("[cone]\nkind = \"lorentz\"\ndim = 3\n[scalarization]\ne = [0.0, 0.0, 1.0]\n").unwrap();
        assert!(inst.space.is_none());
        assert_eq!(inst.require_space().unwrap_err().field, "space");
    }

    #[test]
    fn componentwise_space_on_lorentz_is_rejected() {
        let err = load("[cone]\nkind = \"lorentz\"\ndim = 2\n[space]\nkind = \"componentwise_abs\"\n").unwrap_err();
        assert_eq!(err.field, "cone");
    }

    #[test]
    fn finite_table_is_validated_at_load() {
        let table = r#"
[cone]
kind = "orthant"
dim = 2

[space]
kind = "finite_table"
points = [[0.0], [1.0], [2.0]]
table = [
  [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
  [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]],
  [[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
]
"#;
        assert!(load(table).is_ok());
        let broken = table.replace("[[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]", "[[3.0, 3.0], [0.0, 1.0], [0.0, 0.0]]");
        assert_eq!(load(&broken).unwrap_err().field, "space.table");
    }

    #[test]
    fn family_section() {
        let text = format!("{AFFINE}\n[family]\nseminorms = [{{ kind = \"coordinate\", k = 3 }}]\n");
        assert_eq!(load(&text).unwrap_err().field, "family.seminorms[0]");
        let text = format!("{AFFINE}\n[family]\nvariant = \"coordinate\"\ntruncation = 20\n");
        let fam = load(&text).unwrap().family;
        assert_eq!((fam.variant(), fam.truncation()), (HVariant::Coordinate, 20));
    }

    #[test]
    fn digest_tracks_contents() {
        let a = InstanceConfig::from_toml_str(AFFINE).unwrap();
        let b = InstanceConfig::from_toml_str(&format!("{AFFINE}\n")).unwrap();
        assert_eq!(a.digest().len(), 64);
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn suite_only_config() {
        let cfg = InstanceConfig::from_toml_str("[sample]\ncount = 50\nseed = 3\n[suite]\nrates = [0.5]\n").unwrap();
        let suite = cfg.suite_config(&Overrides::default()).unwrap();
        assert_eq!((suite.sample.count, suite.sample.seed, suite.rates.clone()), (50, 3, vec![0.5]));
        assert_eq!(cfg.instance(&Overrides::default()).unwrap_err().field, "cone");
        let bad = InstanceConfig::from_toml_str("[suite]\nrates = [1.5]\n").unwrap();
        assert_eq!(bad.suite_config(&Overrides::default()).unwrap_err().field, "suite");
    }
}
