//! The eight qubit distinguishability measures.
//!
//! Each measure has a pairwise form `d(r, s)` on two Bloch vectors and a
//! reduced form `g_d(z, r)` for a pure state against a state of Bloch norm `r`
//! at angle `acos(z)`. Fidelity-derived quantities are evaluated through
//! `1 - F = ((r - s)^2 + (sqrt(1 - r^2) - sqrt(1 - s^2))^2) / 4`, which has no
//! cancellation when the two states are close.

use std::fmt;
use std::str::FromStr;

use crate::bloch::{BlochVector, NORM_TOL};
use crate::error::{check_range, Error, Result};

/// Slack allowed on z and r before the reduced form rejects them.
pub const DOMAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Zero for identical states, larger is worse.
    DistanceLike,
    /// Maximal for identical states, larger is better.
    OverlapLike,
}

impl Orientation {
    /// True if `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::DistanceLike => a < b,
            Orientation::OverlapLike => a > b,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::DistanceLike => Orientation::OverlapLike,
            Orientation::OverlapLike => Orientation::DistanceLike,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Trace,
    Fidelity,
    Wootters,
    Bures,
    Affinity,
    Hellinger,
    Qjsd,
    Transmission,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::Trace,
        Measure::Fidelity,
        Measure::Wootters,
        Measure::Bures,
        Measure::Affinity,
        Measure::Hellinger,
        Measure::Qjsd,
        Measure::Transmission,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Measure::Trace => "trace",
            Measure::Fidelity => "fidelity",
            Measure::Wootters => "wootters",
            Measure::Bures => "bures",
            Measure::Affinity => "affinity",
            Measure::Hellinger => "hellinger",
            Measure::Qjsd => "qjsd",
            Measure::Transmission => "transmission",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Measure::Fidelity | Measure::Affinity => Orientation::OverlapLike,
            _ => Orientation::DistanceLike,
        }
    }

    /// d(r, s) for two physical Bloch vectors.
    pub fn pair_value(self, r: &BlochVector, s: &BlochVector) -> Result<f64> {
        let r = r.check_physical()?;
        let s = s.check_physical()?;
        Ok(self.pair(&r, &s))
    }

    /// g_d(z, r) for z in [-1, 1] and r in [0, 1].
    pub fn g_value(self, z: f64, r: f64) -> Result<f64> {
        let z = check_range("z", z, -1.0 - DOMAIN_TOL, 1.0 + DOMAIN_TOL)?.clamp(-1.0, 1.0);
        let r = check_range("r", r, -DOMAIN_TOL, 1.0 + DOMAIN_TOL)?.clamp(0.0, 1.0);
        Ok(self.g(z, r))
    }

    /// Unchecked pairwise form; callers guarantee norms <= 1 up to roundoff.
    pub(crate) fn pair(self, r: &BlochVector, s: &BlochVector) -> f64 {
        match self {
            Measure::Trace => 0.5 * (**r - **s).norm(),
            Measure::Fidelity => 1.0 - infidelity(r, s),
            Measure::Wootters => {
                let q = infidelity(r, s);
                q.sqrt().atan2((1.0 - q).sqrt())
            }
            Measure::Bures => bures_from_infidelity(infidelity(r, s)),
            Measure::Affinity => affinity(r, s),
            Measure::Hellinger => 2.0 - 2.0 * affinity(r, s),
            Measure::Qjsd => qjsd(r, s),
            Measure::Transmission => qjsd(r, s).sqrt(),
        }
    }

    /// Unchecked reduced form; z and r already clamped to their domains.
    pub(crate) fn g(self, z: f64, r: f64) -> f64 {
        // 1 - F for a pure state against norm r at cosine z
        let q = 0.5 * (1.0 - r * z);
        match self {
            Measure::Trace => 0.5 * (1.0 - 2.0 * r * z + r * r).max(0.0).sqrt(),
            Measure::Fidelity => 0.5 * (1.0 + r * z),
            Measure::Wootters => q.sqrt().atan2((1.0 - q).sqrt()),
            Measure::Bures => bures_from_infidelity(q),
            Measure::Affinity => affinity_g(z, r),
            Measure::Hellinger => 2.0 - 2.0 * affinity_g(z, r),
            Measure::Qjsd => qjsd_g(z, r),
            Measure::Transmission => qjsd_g(z, r).sqrt(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Measure::ALL
            .into_iter()
            .find(|m| m.id() == key)
            .ok_or_else(|| Error::Unknown {
                kind: "measure",
                name: s.to_string(),
            })
    }
}

fn purity_root(v: &BlochVector) -> f64 {
    (1.0 - v.norm_squared()).max(0.0).sqrt()
}

/// 1 - F(r, s) without cancellation.
fn infidelity(r: &BlochVector, s: &BlochVector) -> f64 {
    let a = purity_root(r);
    let b = purity_root(s);
    let gap = if a + b > 0.0 {
        (s.norm_squared() - r.norm_squared()) / (a + b)
    } else {
        0.0
    };
    (0.25 * ((**r - **s).norm_squared() + gap * gap)).clamp(0.0, 1.0)
}

/// sqrt(2 (1 - sqrt F)) written as sqrt(2 (1 - F) / (1 + sqrt F)).
fn bures_from_infidelity(q: f64) -> f64 {
    (2.0 * q / (1.0 + (1.0 - q).max(0.0).sqrt())).sqrt()
}

fn affinity(r: &BlochVector, s: &BlochVector) -> f64 {
    let nr = r.norm().min(1.0);
    let ns = s.norm().min(1.0);
    let num = r.dot(s) + (1.0 + purity_root(r)) * (1.0 + purity_root(s));
    let den = ((1.0 + nr).sqrt() + (1.0 - nr).sqrt()) * ((1.0 + ns).sqrt() + (1.0 - ns).sqrt());
    (num / den).clamp(0.0, 1.0)
}

fn affinity_g(z: f64, r: f64) -> f64 {
    let a = (1.0 + r * z + (1.0 - r * r).sqrt())
        / (std::f64::consts::SQRT_2 * ((1.0 + r).sqrt() + (1.0 - r).sqrt()));
    a.clamp(0.0, 1.0)
}

fn qjsd(r: &BlochVector, s: &BlochVector) -> f64 {
    let mid = (0.5 * (**r + **s)).norm();
    let v = entropy(mid) - 0.5 * entropy(r.norm()) - 0.5 * entropy(s.norm());
    v.max(0.0)
}

fn qjsd_g(z: f64, r: f64) -> f64 {
    let mid = 0.5 * (1.0 + 2.0 * r * z + r * r).max(0.0).sqrt();
    (entropy(mid) - 0.5 * entropy(r)).max(0.0)
}

/// Binary entropy in bits of the eigenvalues (1 +- t) / 2, with 0 log 0 = 0.
fn entropy(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(0.5 * (1.0 + t)) + term(0.5 * (1.0 - t))
}

/// H2 of a Bloch norm `t`, in bits.
pub fn binary_entropy(t: f64) -> Result<f64> {
    let t = check_range("Bloch norm", t, -NORM_TOL, 1.0 + NORM_TOL)?;
    Ok(entropy(t))
}
