//! Qubit channels in affine form and the noisy resource families built from them.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, Matrix2, Matrix3, Vector3};

use crate::bloch::{
    bell_correlation_matrix, pauli, BellIndex, BlochVector, CorrelationMatrix, TwoQubitFano,
};
use crate::error::{check_range, Error, Result};
use crate::sampling::{shard_rng, uniform_sphere};

/// Tolerance for Kraus completeness and Kraus/affine agreement.
pub const KRAUS_TOL: f64 = 1e-12;
/// Pure states sampled when checking that a channel keeps the ball in place.
pub const BALL_CHECK_SAMPLES: usize = 1000;

type C2 = Matrix2<Complex<f64>>;

/// t -> A t + b, optionally carrying a Kraus representation.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineChannel {
    matrix: Matrix3<f64>,
    shift: BlochVector,
    kraus: Option<Vec<C2>>,
}

impl AffineChannel {
    /// Validated channel. With Kraus operators, completeness and agreement with
    /// the affine pair on the six axis states are checked; in all cases the image
    /// of sampled pure states must stay in the Bloch ball.
    pub fn new(matrix: Matrix3<f64>, shift: BlochVector, kraus: Option<Vec<C2>>) -> Result<Self> {
        let ch = Self {
            matrix,
            shift,
            kraus,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
            shift: BlochVector::zero(),
            kraus: Some(vec![C2::identity()]),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn shift(&self) -> &BlochVector {
        &self.shift
    }

    pub fn kraus(&self) -> Option<&[C2]> {
        self.kraus.as_deref()
    }

    pub fn apply(&self, t: &BlochVector) -> BlochVector {
        BlochVector::from(self.matrix * t.into_inner() + self.shift.into_inner())
    }

    /// Output Bloch vector computed from the Kraus operators.
    pub fn apply_kraus(&self, t: &BlochVector) -> Option<BlochVector> {
        self.kraus.as_ref().map(|ks| kraus_action(ks, t))
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.iter().any(|v| !v.is_finite()) || !self.shift.is_finite() {
            return Err(Error::NonFinite("channel"));
        }
        if let Some(ks) = &self.kraus {
            let sum: C2 = ks.iter().map(|k| k.adjoint() * k).sum();
            let dev = (sum - C2::identity())
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            if dev > KRAUS_TOL {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operators are not complete (deviation {dev:e})"
                )));
            }
            for axis in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut v = Vector3::zeros();
                    v[axis] = sign;
                    let t = BlochVector::from(v);
                    let diff =
                        (self.apply(&t).into_inner() - kraus_action(ks, &t).into_inner()).amax();
                    if diff > KRAUS_TOL {
                        return Err(Error::InvalidChannel(format!(
                            "affine form disagrees with Kraus action by {diff:e}"
                        )));
                    }
                }
            }
        }
        let mut rng = shard_rng(0, 0);
        for _ in 0..BALL_CHECK_SAMPLES {
            let out = self.apply(&uniform_sphere(&mut rng));
            if !out.is_physical() {
                return Err(Error::InvalidChannel(format!(
                    "maps a pure state outside the Bloch ball (norm {})",
                    out.norm()
                )));
            }
        }
        Ok(())
    }
}

fn real(m: [[f64; 2]; 2]) -> C2 {
    C2::new(
        Complex::new(m[0][0], 0.0),
        Complex::new(m[0][1], 0.0),
        Complex::new(m[1][0], 0.0),
        Complex::new(m[1][1], 0.0),
    )
}

fn kraus_action(ks: &[C2], t: &BlochVector) -> BlochVector {
    let half = Complex::new(0.5, 0.0);
    let mut rho = C2::identity() * half;
    for i in 0..3 {
        rho += pauli(i + 1) * Complex::new(0.5 * t[i], 0.0);
    }
    let out: C2 = ks.iter().map(|k| k * rho * k.adjoint()).sum();
    BlochVector::new(
        (out * pauli(1)).trace().re,
        (out * pauli(2)).trace().re,
        (out * pauli(3)).trace().re,
    )
}

/// Shrinks every Bloch vector by q.
pub fn depolarizing(q: f64) -> Result<AffineChannel> {
    let q = check_range("q", q, 0.0, 1.0)?;
    let a = ((1.0 + 3.0 * q) / 4.0).sqrt();
    let b = ((1.0 - q) / 4.0).sqrt();
    let mut kraus = vec![C2::identity() * Complex::new(a, 0.0)];
    kraus.extend((1..4).map(|i| pauli(i) * Complex::new(b, 0.0)));
    AffineChannel::new(
        Matrix3::from_diagonal_element(q),
        BlochVector::zero(),
        Some(kraus),
    )
}

/// Decay towards |0>, with q the surviving excited-state population.
pub fn amplitude_damping(q: f64) -> Result<AffineChannel> {
    let q = check_range("q", q, 0.0, 1.0)?;
    let s = q.sqrt();
    let kraus = vec![
        real([[1.0, 0.0], [0.0, s]]),
        real([[0.0, (1.0 - q).sqrt()], [0.0, 0.0]]),
    ];
    AffineChannel::new(
        Matrix3::from_diagonal(&Vector3::new(s, s, q)),
        BlochVector::new(0.0, 0.0, 1.0 - q),
        Some(kraus),
    )
}

/// Decay towards |1>.
pub fn mirrored_amplitude_damping(q: f64) -> Result<AffineChannel> {
    let q = check_range("q", q, 0.0, 1.0)?;
    let s = q.sqrt();
    let kraus = vec![
        real([[s, 0.0], [0.0, 1.0]]),
        real([[0.0, 0.0], [(1.0 - q).sqrt(), 0.0]]),
    ];
    AffineChannel::new(
        Matrix3::from_diagonal(&Vector3::new(s, s, q)),
        BlochVector::new(0.0, 0.0, -(1.0 - q)),
        Some(kraus),
    )
}

/// Fano form of (E (x) F) applied to the Bell state Phi_k.
pub fn resource_from_local_noises(
    e: &AffineChannel,
    f: &AffineChannel,
    k: BellIndex,
) -> TwoQubitFano {
    let w = bell_correlation_matrix(k).into_inner();
    let corr = e.shift.into_inner() * f.shift.into_inner().transpose()
        + e.matrix * w * f.matrix.transpose();
    TwoQubitFano::new(e.shift, f.shift, CorrelationMatrix::new(corr))
}

/// One-parameter resource families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResourceFamily {
    /// p |Phi_k><Phi_k| + (1 - p) 1/4
    Werner(BellIndex),
    /// Amplitude damping on A, mirrored amplitude damping on B, both with q = p.
    AdMad,
    /// Amplitude damping with q = p on both qubits.
    TwoAd,
}

impl ResourceFamily {
    pub fn id(&self) -> &'static str {
        match self {
            ResourceFamily::Werner(_) => "werner",
            ResourceFamily::AdMad => "ad-mad",
            ResourceFamily::TwoAd => "two-ad",
        }
    }

    /// Bell state the noise acts on.
    pub fn bell_index(&self) -> BellIndex {
        match self {
            ResourceFamily::Werner(k) => *k,
            _ => BellIndex::ALL[0],
        }
    }

    pub fn build(&self, p: f64) -> Result<TwoQubitFano> {
        let p = check_range("p", p, 0.0, 1.0)?;
        let kz = BlochVector::new(0.0, 0.0, 1.0 - p);
        Ok(match self {
            ResourceFamily::Werner(k) => TwoQubitFano::new(
                BlochVector::zero(),
                BlochVector::zero(),
                bell_correlation_matrix(*k).scaled(p),
            ),
            ResourceFamily::AdMad => TwoQubitFano::new(
                kz,
                kz.scaled(-1.0),
                CorrelationMatrix::diag(p, -p, 2.0 * p - 1.0),
            ),
            ResourceFamily::TwoAd => TwoQubitFano::new(
                kz,
                kz,
                CorrelationMatrix::diag(p, -p, p * p + (1.0 - p) * (1.0 - p)),
            ),
        })
    }

    /// The local channels (on A, on B) that produce the family at parameter p.
    pub fn local_noises(&self, p: f64) -> Result<(AffineChannel, AffineChannel)> {
        let p = check_range("p", p, 0.0, 1.0)?;
        Ok(match self {
            ResourceFamily::Werner(_) => (depolarizing(p.sqrt())?, depolarizing(p.sqrt())?),
            ResourceFamily::AdMad => (amplitude_damping(p)?, mirrored_amplitude_damping(p)?),
            ResourceFamily::TwoAd => (amplitude_damping(p)?, amplitude_damping(p)?),
        })
    }
}

impl fmt::Display for ResourceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Accepts `werner` (Bell index 1), `werner:k`, `ad-mad` and `two-ad`.
impl FromStr for ResourceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let unknown = || Error::Unknown {
            kind: "resource",
            name: s.to_string(),
        };
        match t.as_str() {
            "werner" => Ok(ResourceFamily::Werner(BellIndex::ALL[0])),
            "ad-mad" | "admad" => Ok(ResourceFamily::AdMad),
            "two-ad" | "twoad" => Ok(ResourceFamily::TwoAd),
            _ => {
                let k = t
                    .strip_prefix("werner:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(unknown)?;
                Ok(ResourceFamily::Werner(BellIndex::new(k)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &BlochVector, b: [f64; 3]) -> bool {
        (a.into_inner() - Vector3::from(b)).amax() < 1e-12
    }

    #[test]
    fn channel_examples() {
        let z = BlochVector::unit_z();
        assert!(close(
            &depolarizing(0.5).unwrap().apply(&z),
            [0.0, 0.0, 0.5]
        ));
        assert!(close(&depolarizing(0.0).unwrap().apply(&z), [0.0; 3]));
        let ad = amplitude_damping(0.25).unwrap();
        assert!(close(&ad.apply(&z.scaled(-1.0)), [0.0, 0.0, 0.5]));
        let mad = mirrored_amplitude_damping(0.25).unwrap();
        assert!(close(&mad.apply(&z), [0.0, 0.0, -0.5]));
        let x = BlochVector::new(1.0, 0.0, 0.0);
        assert!(close(
            &amplitude_damping(0.0).unwrap().apply(&x),
            [0.0, 0.0, 1.0]
        ));
        assert!(close(
            &mirrored_amplitude_damping(0.0).unwrap().apply(&x),
            [0.0, 0.0, -1.0]
        ));
        for q in [0.0, 0.3, 1.0] {
            for ch in [
                depolarizing(q).unwrap(),
                amplitude_damping(q).unwrap(),
                mirrored_amplitude_damping(q).unwrap(),
            ] {
                let t = BlochVector::from_polar(0.2, 0.7);
                let k = ch.apply_kraus(&t).unwrap();
                assert!((ch.apply(&t).into_inner() - k.into_inner()).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(depolarizing(1.1).is_err());
        assert!(amplitude_damping(-0.1).is_err());
        assert!(mirrored_amplitude_damping(f64::NAN).is_err());
    }

    #[test]
    fn rejects_inconsistent_channels() {
        // affine map pushing states out of the ball
        let grow = AffineChannel::new(Matrix3::identity() * 1.5, BlochVector::zero(), None);
        assert!(matches!(grow, Err(Error::InvalidChannel(_))));
        // Kraus set that does not match the affine pair
        let wrong = AffineChannel::new(
            Matrix3::identity() * 0.5,
            BlochVector::zero(),
            Some(vec![C2::identity()]),
        );
        assert!(matches!(wrong, Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn local_noise_examples() {
        let id = AffineChannel::identity();
        let k1 = BellIndex::new(1).unwrap();
        assert_eq!(
            resource_from_local_noises(&id, &id, k1),
            TwoQubitFano::bell(k1)
        );
        for fam in [ResourceFamily::AdMad, ResourceFamily::TwoAd]
            .into_iter()
            .chain(BellIndex::ALL.map(ResourceFamily::Werner))
        {
            for p in [0.0, 0.37, 1.0] {
                let (e, f) = fam.local_noises(p).unwrap();
                let via = resource_from_local_noises(&e, &f, fam.bell_index());
                let direct = fam.build(p).unwrap();
                assert!((via.corr.into_inner() - direct.corr.into_inner()).amax() < 1e-12);
                assert!(close(&via.bloch_a, direct.bloch_a.into_inner().into()));
                assert!(close(&via.bloch_b, direct.bloch_b.into_inner().into()));
            }
        }
    }

    #[test]
    fn family_examples() {
        let r = ResourceFamily::AdMad.build(0.0).unwrap();
        assert!(close(&r.bloch_a, [0.0, 0.0, 1.0]));
        assert!(close(&r.bloch_b, [0.0, 0.0, -1.0]));
        assert_eq!(
            r.corr.into_inner(),
            Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, -1.0))
        );
        let r = ResourceFamily::TwoAd.build(0.5).unwrap();
        assert_eq!(
            r.corr.into_inner(),
            Matrix3::from_diagonal(&Vector3::new(0.5, -0.5, 0.5))
        );
        assert!(ResourceFamily::TwoAd.build(1.5).is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(
            "werner".parse::<ResourceFamily>().unwrap(),
            ResourceFamily::Werner(BellIndex::new(1).unwrap())
        );
        assert_eq!(
            "Werner:3".parse::<ResourceFamily>().unwrap(),
            ResourceFamily::Werner(BellIndex::new(3).unwrap())
        );
        assert_eq!(
            " ad-mad ".parse::<ResourceFamily>().unwrap(),
            ResourceFamily::AdMad
        );
        assert_eq!(ResourceFamily::TwoAd.to_string(), "two-ad");
        assert!("werner:7".parse::<ResourceFamily>().is_err());
        assert!(matches!(
            "bogus".parse::<ResourceFamily>(),
            Err(Error::Unknown { .. })
        ));
    }
}
