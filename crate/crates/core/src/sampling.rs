//! Reproducible sample streams.
//!
//! Every sample is drawn from its own ChaCha8 stream keyed by
//! `(seed, check name, index)`, so the value of sample `i` of one check never
//! depends on how many other checks exist or in which order they run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered_space::{Cone, ConeKind, Vector};

/// Budget and domain for a sampled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    /// `[lo, hi]` for sampled coordinates.
    pub range: [f64; 2],
    pub dims: Vec<usize>,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { count: 10_000, seed: 20_240_901, range: [-10.0, 10.0], dims: vec![2] }
    }
}

impl SampleSpec {
    pub fn new(count: usize, seed: u64) -> Self {
        SampleSpec { count, seed, ..SampleSpec::default() }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = [lo, hi];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
        }
        let [lo, hi] = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument("sample range must satisfy lo < hi".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidArgument("sample dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn lo(&self) -> f64 {
        self.range[0]
    }

    pub fn hi(&self) -> f64 {
        self.range[1]
    }

    /// Largest absolute coordinate of the sampling box.
    pub fn radius(&self) -> f64 {
        self.range[0].abs().max(self.range[1].abs())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// The generator for sample `index` of the check called `name`.
pub fn stream_rng(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(name.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&(name.len() as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..=hi)
}

pub fn uniform_entries<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..=hi)).collect()
}

pub fn uniform_vector<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Vector {
    Vector::raw(uniform_entries(rng, dim, lo, hi))
}

/// A direction with `‖v‖₂ = 1`.
pub fn unit_direction<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = uniform_vector(rng, dim, -1.0, 1.0);
        let norm = v.norm2();
        if norm > 1e-3 {
            return v.scale(1.0 / norm);
        }
    }
}

/// Log-uniform value in `[lo, hi]`, `0 < lo < hi`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo.ln(), hi.ln()).exp()
}

/// A point of `P` with coordinates of order `scale`. Boundary points occur
/// with positive probability for the orthant (zeroed coordinates).
pub fn cone_point<R: Rng>(rng: &mut R, cone: &Cone, scale: f64) -> Vector {
    shifted_point(rng, cone, scale, 0.0)
}

/// A point of `int P` whose constraint slack is at least `0.05·scale`-ish.
pub fn interior_point<R: Rng>(rng: &mut R, cone: &Cone, scale: f64) -> Vector {
    shifted_point(rng, cone, scale, 0.1)
}

fn shifted_point<R: Rng>(rng: &mut R, cone: &Cone, scale: f64, min_depth: f64) -> Vector {
    let n = cone.dim();
    match cone.kind() {
        ConeKind::Orthant { .. } => {
            let entries = (0..n)
                .map(|_| {
                    if min_depth == 0.0 && rng.gen_bool(0.1) {
                        0.0
                    } else {
                        rng.gen_range(min_depth * scale..=scale)
                    }
                })
                .collect();
            Vector::raw(entries)
        }
        ConeKind::Lorentz { .. } => {
            let mut entries = uniform_entries(rng, n - 1, -scale, scale);
            let head = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
            let depth = if min_depth == 0.0 && rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(min_depth * scale..=scale)
            };
            entries.push(head + depth);
            Vector::raw(entries)
        }
        ConeKind::Polyhedral { rows } => {
            // Push a box sample along the interior witness w until Av ≥ 0.
            let u = uniform_entries(rng, n, -scale, scale);
            let w = cone.interior_witness().as_slice();
            let ratio = rows
                .iter()
                .map(|row| {
                    let au: f64 = row.iter().zip(&u).map(|(a, x)| a * x).sum();
                    let aw: f64 = row.iter().zip(w).map(|(a, x)| a * x).sum();
                    au / aw
                })
                .fold(f64::INFINITY, f64::min);
            let w_scale = cone.interior_witness().max_abs();
            let depth = if min_depth == 0.0 && rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(min_depth..=1.0) * scale / w_scale
            };
            let shift = (-ratio).max(0.0) + depth;
            Vector::raw(u.iter().zip(w).map(|(x, wi)| x + shift * wi).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let a: Vec<u64> = (0..4).map(|_| stream_rng(7, "check", 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b = stream_rng(7, "check", 4).next_u64();
        let c = stream_rng(7, "other", 3).next_u64();
        let d = stream_rng(8, "check", 3).next_u64();
        assert_ne!(a[0], b);
        assert_ne!(a[0], c);
        assert_ne!(a[0], d);
    }

    #[test]
    fn spec_validation() {
        assert!(SampleSpec::default().validate().is_ok());
        assert!(SampleSpec::new(0, 1).validate().is_err());
        assert!(SampleSpec::new(1, 1).with_range(1.0, 1.0).validate().is_err());
    }

    #[test]
    fn sampled_points_lie_in_cone() {
        let cones = [
            Cone::orthant(4).unwrap(),
            Cone::lorentz(3).unwrap(),
            Cone::polyhedral(vec![vec![1.0, 1.0], vec![1.0, -0.5]]).unwrap(),
        ];
        for cone in &cones {
            for i in 0..500 {
                let mut rng = stream_rng(1, "cone", i);
                let p = cone_point(&mut rng, cone, 5.0);
                assert!(cone.contains(&p, 1e-12).unwrap(), "{} {:?}", cone.label(), p);
                let q = interior_point(&mut rng, cone, 5.0);
                assert!(cone.strictly_contains(&q, 1e-6).unwrap(), "{} {:?}", cone.label(), q);
            }
        }
    }
}
