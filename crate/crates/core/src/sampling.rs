//! Random draws used by the Monte-Carlo estimators and property checks.
//!
//! Monte-Carlo work is split into fixed-size shards. Shard `s` draws from a
//! ChaCha8 stream keyed by `(seed, s)`, so results depend only on the seed and
//! the sample count, never on the number of worker threads.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix3, Matrix4, Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bloch::{BlochVector, DensityMatrix4, Rotation, TwoQubitFano};
use crate::error::Result;
use crate::mpp::{Povm, PovmElement};
use crate::par::Exec;

/// Samples per Monte-Carlo shard.
pub const SHARD_SIZE: usize = 1 << 14;

/// Independent generator for shard `shard` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Haar-uniform pure state: z uniform on [-1, 1], azimuth uniform on [0, 2 pi).
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    BlochVector::from_polar(z, phi)
}

/// Uniform point in the Bloch ball.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let u: f64 = rng.random();
    uniform_sphere(rng).scaled(u.cbrt())
}

/// Haar-random rotation from a normalised Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    let q = Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    let m: Matrix3<f64> = UnitQuaternion::from_quaternion(q)
        .to_rotation_matrix()
        .into_inner();
    Rotation::new(m).expect("unit quaternion yields a rotation")
}

/// Random two-qubit state G G^dagger / Tr from a complex Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix4 {
    let g = Matrix4::<Complex<f64>>::from_fn(|_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = g * g.adjoint();
    let tr = rho.trace().re;
    rho /= Complex::new(tr, 0.0);
    // exact Hermitian symmetrisation against roundoff
    let rho = (rho + rho.adjoint()) * Complex::new(0.5, 0.0);
    DensityMatrix4::new(rho).expect("Ginibre construction is a density matrix")
}

/// Random physical resource in Fano form.
pub fn random_resource<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitFano {
    TwoQubitFano::from_density(&random_density(rng))
}

/// Random valid POVM with `n >= 2` elements.
///
/// The first n - 1 elements are random; the last one cancels their weighted
/// Bloch sum with a weight large enough to keep its vector in the ball, and
/// all weights are then rescaled to sum to 2.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Povm> {
    assert!(n >= 2, "a random POVM needs at least two elements");
    let mut elems: Vec<(f64, Vector3<f64>)> = (0..n - 1)
        .map(|_| {
            let w: f64 = rng.random_range(0.05..1.0);
            let s = if rng.random_bool(0.5) {
                uniform_sphere(rng)
            } else {
                uniform_ball(rng)
            };
            (w, s.into_inner())
        })
        .collect();
    let sum: Vector3<f64> = elems.iter().map(|(w, s)| *s * *w).sum();
    let extra: f64 = rng.random_range(0.0..0.5);
    let w_last = sum.norm().max(0.05) * (1.0 + extra);
    elems.push((w_last, -sum / w_last));
    let total: f64 = elems.iter().map(|(w, _)| w).sum();
    Povm::new(
        elems
            .into_iter()
            .map(|(w, s)| PovmElement::new(2.0 * w / total, BlochVector::from(s)))
            .collect(),
    )
}

/// Streaming mean and variance (Welford), mergeable across shards.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Runs `samples` draws of `draw` over independent shards and merges the
/// shard moments in shard order.
pub fn sharded_mean<F>(exec: Exec, samples: usize, seed: u64, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts = exec.map(shards, |s| {
        let mut rng = shard_rng(seed, s as u64);
        let n = SHARD_SIZE.min(samples - s * SHARD_SIZE);
        let mut m = Moments::default();
        for _ in 0..n {
            m.push(draw(&mut rng));
        }
        m
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Estimate {
        mean: total.mean,
        std_error: total.std_error(),
        samples: total.count,
    }
}
