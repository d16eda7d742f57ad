//! Sampled checks and their reports.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::sampling::stream_rng;

/// Result of evaluating one check on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Raw amount by which the checked relation is violated before any slack
    /// is applied; `0` when it holds outright.
    pub excess: f64,
    pub failed: bool,
    pub inputs: Option<Value>,
}

impl Outcome {
    pub fn pass(excess: f64) -> Self {
        Outcome { excess: excess.max(0.0), failed: false, inputs: None }
    }

    pub fn fail(excess: f64, inputs: Value) -> Self {
        Outcome { excess: excess.max(0.0), failed: true, inputs: Some(inputs) }
    }

    /// Passes iff `ok`; `inputs` is only built on failure.
    pub fn check(ok: bool, excess: f64, inputs: impl FnOnce() -> Value) -> Self {
        if ok {
            Outcome::pass(excess)
        } else {
            Outcome::fail(excess, inputs())
        }
    }

    /// `lhs ≤ rhs + slack`, reporting `lhs − rhs` as the excess.
    pub fn leq(lhs: f64, rhs: f64, slack: f64, inputs: impl FnOnce() -> Value) -> Self {
        Outcome::check(lhs <= rhs + slack, lhs - rhs, inputs)
    }

    /// Failure from an evaluation error.
    pub fn error(message: impl std::fmt::Display, inputs: Value) -> Self {
        Outcome {
            excess: 0.0,
            failed: true,
            inputs: Some(serde_json::json!({ "error": message.to_string(), "inputs": inputs })),
        }
    }
}

/// First failing sample of a check, replayable by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: u64,
    pub inputs: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    /// A check decided without sampling.
    pub fn single(name: impl Into<String>, outcome: Outcome) -> Self {
        CheckResult {
            name: name.into(),
            passed: !outcome.failed,
            samples: 1,
            max_violation: outcome.excess,
            counterexample: outcome.inputs.filter(|_| outcome.failed).map(|inputs| Counterexample {
                index: 0,
                inputs,
            }),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Pass/fail per named property.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub checks: Vec<CheckResult>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: PropertyReport) {
        self.checks.extend(other.checks);
    }
}

type Eval<'a> = Box<dyn Fn(&mut ChaCha8Rng, u64) -> Outcome + Send + Sync + 'a>;

/// A named property evaluated on `count` independent samples.
pub struct Check<'a> {
    pub name: String,
    pub count: usize,
    eval: Eval<'a>,
}

impl<'a> Check<'a> {
    pub fn new(
        name: impl Into<String>,
        count: usize,
        eval: impl Fn(&mut ChaCha8Rng, u64) -> Outcome + Send + Sync + 'a,
    ) -> Self {
        Check { name: name.into(), count, eval: Box::new(eval) }
    }

    /// Re-evaluates a single sample.
    pub fn replay(&self, seed: u64, index: u64) -> Outcome {
        let mut rng = stream_rng(seed, &self.name, index);
        (self.eval)(&mut rng, index)
    }

    pub fn run(&self, seed: u64) -> CheckResult {
        let mut max_violation = 0.0f64;
        let mut counterexample = None;
        for index in 0..self.count as u64 {
            let outcome = self.replay(seed, index);
            max_violation = max_violation.max(outcome.excess);
            if outcome.failed && counterexample.is_none() {
                counterexample = Some(Counterexample {
                    index,
                    inputs: outcome.inputs.unwrap_or(Value::Null),
                });
            }
        }
        CheckResult {
            name: self.name.clone(),
            passed: counterexample.is_none(),
            samples: self.count,
            max_violation,
            counterexample,
            note: None,
        }
    }
}

/// Runs checks concurrently; results keep the order of `checks`.
pub fn run_checks(checks: &[Check<'_>], seed: u64) -> PropertyReport {
    PropertyReport { checks: checks.par_iter().map(|c| c.run(seed)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use serde_json::json;

    #[test]
    fn run_records_first_failure_and_replays_it() {
        let check = Check::new("threshold", 200, |rng, _| {
            let x: f64 = rng.gen_range(0.0..1.0);
            Outcome::leq(x, 0.9, 0.0, || json!({ "x": x }))
        });
        let result = check.run(5);
        assert!(!result.passed);
        let cx = result.counterexample.clone().unwrap();
        let replayed = check.replay(5, cx.index);
        assert!(replayed.failed);
        assert_eq!(replayed.inputs.unwrap(), cx.inputs);
        assert!(result.max_violation > 0.0 && result.max_violation <= 0.1);
    }

    #[test]
    fn parallel_run_is_order_stable() {
        let checks: Vec<Check> = (0..8)
            .map(|i| Check::new(format!("c{i}"), 50, move |rng, _| Outcome::pass(rng.gen::<f64>() * i as f64)))
            .collect();
        let a = run_checks(&checks, 1);
        let b = run_checks(&checks, 1);
        assert_eq!(a, b);
        assert_eq!(a.checks[3].name, "c3");
    }
}
