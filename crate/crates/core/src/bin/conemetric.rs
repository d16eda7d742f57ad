use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use conemetric::config::{ConfigError, Instance, InstanceConfig, Overrides};
use conemetric::fixed_point::{banach_solve, boyd_wong_solve, weak_contraction_iterate, Verification};
use conemetric::harness::{self, SuiteConfig, SUITES};
use conemetric::ordered_space::validate_cone;
use conemetric::{Certificate, Vector};

#[derive(Parser)]
#[command(name = "conemetric", version, about = "Cone metrics, scalarization and fixed-point iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override every tolerance in the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the solver iteration cap.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ξ_e at a vector.
    Xi {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Cone distance p and the scalar metrics d_p and d_S between two points.
    Dist {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Run a fixed-point iteration.
    Solve {
        method: Method,
        #[command(flatten)]
        config: ConfigArg,
        /// Write the residual trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a property suite, or `all`.
    Suite {
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replay one sample of the named check instead of running the suite.
        #[arg(long, requires = "index")]
        check: Option<String>,
        #[arg(long, requires = "check")]
        index: Option<u64>,
    },
    /// h(c) for c = (ε, 0, 0, …) in the truncated sequence space.
    DemoOmega {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 20)]
        truncate: usize,
    },
    /// Validate the cone, interior point, family and space of a config.
    Validate {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Banach,
    BoydWong,
    Weak,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<conemetric::Error> for Failure {
    fn from(e: conemetric::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn parse_vector(flag: &str, text: &str) -> Result<Vector, Failure> {
    let entries = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Config(format!("--{flag}: expected comma-separated decimals ({e})")))?;
    Vector::new(entries).map_err(|e| Failure::Config(format!("--{flag}: {e}")))
}

fn load(path: &Path, overrides: &Overrides) -> Result<(InstanceConfig, Instance), Failure> {
    let cfg = InstanceConfig::from_path(path)?;
    let instance = cfg.instance(overrides)?;
    Ok((cfg, instance))
}

fn check_dim(flag: &str, v: &Vector, dim: usize) -> Result<(), Failure> {
    v.check_dim(dim).map_err(|e| Failure::Config(format!("--{flag}: {e}")))
}

fn xi(config: &Path, point: &str, overrides: &Overrides) -> Outcome {
    let (_, inst) = load(config, overrides)?;
    let y = parse_vector("point", point)?;
    check_dim("point", &y, inst.cone().dim())?;
    Ok((json!({ "xi": inst.ctx.xi(&y)? }), true))
}

fn dist(config: &Path, x: &str, y: &str, overrides: &Overrides) -> Outcome {
    let (_, inst) = load(config, overrides)?;
    let space = inst.require_space()?;
    let (x, y) = (parse_vector("x", x)?, parse_vector("y", y)?);
    check_dim("x", &x, space.point_dim())?;
    check_dim("y", &y, space.point_dim())?;
    let p = space.p(&x, &y)?;
    let d_s = match space.ds(&inst.family, &x, &y) {
        Ok(v) => json!(v),
        Err(_) => Value::Null,
    };
    Ok((json!({ "p": p, "d_p": space.dp(&inst.ctx, &x, &y)?, "d_S": d_s }), true))
}

fn solve(method: Method, config: &Path, trace: Option<&Path>, overrides: &Overrides) -> Outcome {
    let (cfg, inst) = load(config, overrides)?;
    let space = inst.require_space()?;
    let map = inst.require_map()?;
    let x0 = inst.require_x0()?;
    let opts = &inst.solver.options;
    let (name, report) = match method {
        Method::Banach => {
            let k = inst.solver.k.or_else(|| map.diagonal_modulus()).ok_or_else(|| {
                Failure::Config("config error in `solver.k`: required unless the map is diagonal affine".into())
            })?;
            ("banach", banach_solve(space, &inst.ctx, map, k, x0, opts, &Verification::Sampled(inst.sample.clone()))?)
        }
        Method::BoydWong => {
            let varphi = inst.require_varphi()?;
            ("boyd-wong", boyd_wong_solve(space, map, varphi, &inst.ctx, x0, opts, &inst.sample)?)
        }
        Method::Weak => {
            let varphi = inst.require_varphi()?;
            ("weak", weak_contraction_iterate(space, &inst.ctx, map, varphi, x0, opts)?)
        }
    };
    if let Some(path) = trace {
        let file = File::create(path).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))?;
        let family = inst.family.is_monotone().then_some(&inst.family);
        report.write_trace_csv(BufWriter::new(file), family)?;
    }
    let ok = report.converged && report.certificate != Certificate::Unverified;
    let mut value = serde_json::to_value(&report).expect("report serializes");
    if let Value::Object(map) = &mut value {
        map.insert("method".into(), json!(name));
        map.insert("seed".into(), json!(inst.sample.seed));
        map.insert("config_digest".into(), json!(cfg.digest()));
    }
    Ok((value, ok))
}

fn suite_config(config: Option<&Path>, overrides: &Overrides) -> Result<(SuiteConfig, Option<String>), Failure> {
    match config {
        Some(path) => {
            let cfg = InstanceConfig::from_path(path)?;
            Ok((cfg.suite_config(overrides)?, Some(cfg.digest().to_string())))
        }
        None => {
            let mut cfg = SuiteConfig::default();
            if let Some(seed) = overrides.seed {
                cfg.sample.seed = seed;
            }
            if let Some(tol) = overrides.tol {
                cfg.tol = tol;
            }
            cfg.validate().map_err(|e| Failure::Config(format!("config error in `suite`: {e}")))?;
            Ok((cfg, None))
        }
    }
}

fn runtime_or_config(e: conemetric::Error) -> Failure {
    match e {
        conemetric::Error::UnknownSuite { .. } | conemetric::Error::InvalidArgument(_) => Failure::Config(e.to_string()),
        other => Failure::Runtime(other.to_string()),
    }
}

fn suite(id: &str, config: Option<&Path>, out: Option<&Path>, replay: Option<(&str, u64)>, overrides: &Overrides) -> Outcome {
    let (cfg, digest) = suite_config(config, overrides)?;
    if let Some((check, index)) = replay {
        let outcome = harness::replay(id, &cfg, check, index).map_err(runtime_or_config)?;
        let value = json!({
            "suite_id": id,
            "check": check,
            "index": index,
            "seed": cfg.sample.seed,
            "passed": !outcome.failed,
            "excess": outcome.excess,
            "inputs": outcome.inputs,
        });
        return Ok((value, !outcome.failed));
    }
    let (mut value, passed) = if id == "all" {
        let reports = harness::run_all(&cfg).map_err(runtime_or_config)?;
        let passed = reports.iter().all(|r| r.passed);
        (json!({ "seed": cfg.sample.seed, "passed": passed, "suites": reports }), passed)
    } else {
        if !SUITES.contains(&id) {
            return Err(Failure::Config(format!("unknown suite `{id}`; available: all, {}", SUITES.join(", "))));
        }
        let report = harness::run_suite(id, &cfg).map_err(runtime_or_config)?;
        let passed = report.passed;
        (serde_json::to_value(&report).expect("report serializes"), passed)
    };
    if let (Value::Object(map), Some(digest)) = (&mut value, digest) {
        map.insert("config_digest".into(), json!(digest));
    }
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&value).expect("report serializes");
        std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok((value, passed))
}

fn demo_omega(epsilon: f64, truncate: usize) -> Outcome {
    let demo = harness::omega_demo(epsilon, truncate).map_err(|e| Failure::Config(e.to_string()))?;
    let pass = demo.pass;
    Ok((serde_json::to_value(demo).expect("demo serializes"), pass))
}

fn validate(config: &Path, overrides: &Overrides) -> Outcome {
    let (cfg, inst) = load(config, overrides)?;
    let report = validate_cone(inst.cone(), inst.sample.count, inst.sample.seed)?;
    let e_interior = inst.cone().strictly_contains(inst.ctx.e(), inst.margin)?;
    let passed = report.passed() && e_interior;
    let space = inst.space.as_ref().map(|s| {
        json!({ "point_dim": s.point_dim(), "value_dim": s.value_cone().dim(), "finite": s.finite_points().is_some() })
    });
    Ok((
        json!({
            "passed": passed,
            "cone": report,
            "e_interior": e_interior,
            "family_monotone": inst.family.is_monotone(),
            "space": space,
            "seed": inst.sample.seed,
            "config_digest": cfg.digest(),
        }),
        passed,
    ))
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides { seed: cli.seed, tol: cli.tol, max_iter: cli.max_iter };
    let outcome = match &cli.command {
        Command::Xi { config, point } => xi(&config.config, point, &overrides),
        Command::Dist { config, x, y } => dist(&config.config, x, y, &overrides),
        Command::Solve { method, config, trace } => solve(*method, &config.config, trace.as_deref(), &overrides),
        Command::Suite { id, config, out, check, index } => {
            let replay = check.as_deref().zip(*index);
            suite(id, config.as_deref(), out.as_deref(), replay, &overrides)
        }
        Command::DemoOmega { epsilon, truncate } => demo_omega(*epsilon, *truncate),
        Command::Validate { config } => validate(&config.config, &overrides),
    };
    match outcome {
        Ok((value, passed)) => {
            emit(&serde_json::to_string_pretty(&value).expect("output serializes"));
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(message)) => {
            eprintln!("{message}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(message)) => {
            emit(&json!({ "error": message }).to_string());
            ExitCode::from(1)
        }
    }
}
