//! Measure-and-prepare (MPP) protocols and the classical thresholds they set.
//!
//! A qubit POVM is written E_i = (c_i^2 / 2)(1 + s_i . sigma). Averaged over
//! Haar-uniform pure inputs, an MPP with preparations r_i scores
//!
//! ```text
//! <d>_MPP = sum_i (c_i^2 / 4) [A_d(r_i) + (r_i . s_i / |r_i|) B_d(r_i)]
//! ```
//!
//! with A_d(r) = int g_d(z, r) dz and B_d(r) = int g_d(z, r) z dz over
//! [-1, 1]. The optimum is a projective measurement followed by preparing the
//! measured axis shrunk to the norm r_opt that optimises A_d + B_d.

use std::sync::OnceLock;

use crate::bloch::{BlochVector, NORM_TOL};
use crate::error::{check_range, Error, Result};
use crate::measures::{Measure, Orientation};
use crate::optimize::golden_section_min;
use crate::par::Exec;
use crate::protocol::pure_input_coords;
use crate::quadrature::{integrate_moments, QuadOptions};
use crate::sampling::{sharded_mean, uniform_sphere, Estimate};

/// Slack on the POVM completeness conditions.
pub const POVM_TOL: f64 = 1e-10;
/// Spacing of the coarse r grid scanned before golden-section refinement.
pub const R_GRID_STEP: f64 = 1e-3;
/// Width of the final golden-section bracket on r.
pub const R_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovmElement {
    /// c_i^2
    pub weight: f64,
    /// s_i
    pub axis: BlochVector,
}

impl PovmElement {
    pub fn new(weight: f64, axis: BlochVector) -> Self {
        Self { weight, axis }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    /// Checks c_i^2 >= 0, |s_i| <= 1, sum c_i^2 = 2 and sum c_i^2 s_i = 0.
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let mut total = 0.0;
        let mut moment = nalgebra::Vector3::zeros();
        for (i, e) in elements.iter().enumerate() {
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has weight {}",
                    e.weight
                )));
            }
            e.axis
                .check_physical()
                .map_err(|err| Error::InvalidPovm(format!("element {i}: {err}")))?;
            total += e.weight;
            moment += e.axis.into_inner() * e.weight;
        }
        if (total - 2.0).abs() > POVM_TOL {
            return Err(Error::InvalidPovm(format!("weights sum to {total}, not 2")));
        }
        if moment.norm() > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "weighted axes sum to norm {:e}, not 0",
                moment.norm()
            )));
        }
        Ok(Self { elements })
    }

    /// Projective measurement along the unit vector `axis`.
    pub fn projective(axis: BlochVector) -> Result<Self> {
        let n = axis.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotPure(n));
        }
        Self::new(vec![
            PovmElement::new(1.0, axis),
            PovmElement::new(1.0, axis.scaled(-1.0)),
        ])
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Outcome probabilities (c_i^2 / 2)(1 + t . s_i) for a pure input t.
    pub fn probabilities(&self, t: &BlochVector) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| 0.5 * e.weight * (1.0 + t.dot(&e.axis)))
            .collect()
    }
}

/// Bob's guess r_i for each POVM outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparationStrategy {
    outputs: Vec<BlochVector>,
}

impl PreparationStrategy {
    pub fn new(outputs: Vec<BlochVector>) -> Result<Self> {
        for o in &outputs {
            o.check_physical()?;
        }
        Ok(Self { outputs })
    }

    /// Prepares each measured axis direction with Bloch norm `r`.
    pub fn aligned(povm: &Povm, r: f64) -> Result<Self> {
        check_range("r", r, 0.0, 1.0)?;
        Self::new(
            povm.elements
                .iter()
                .map(|e| {
                    let n = e.axis.norm();
                    if n > 0.0 {
                        e.axis.scaled(r / n)
                    } else {
                        BlochVector::zero()
                    }
                })
                .collect(),
        )
    }

    pub fn outputs(&self) -> &[BlochVector] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    pub measure: Measure,
    pub r_opt: f64,
    pub threshold: f64,
}

/// (A_d(r), B_d(r)) from one quadrature pass.
pub fn ab_integrals(m: Measure, r: f64, opts: &QuadOptions) -> Result<(f64, f64)> {
    let r = check_range("r", r, 0.0, 1.0)?;
    let [a, b] = integrate_moments(opts, |z| m.g(z, r))?;
    Ok((a, b))
}

pub fn a_integral(m: Measure, r: f64) -> Result<f64> {
    ab_integrals(m, r, &QuadOptions::default()).map(|(a, _)| a)
}

pub fn b_integral(m: Measure, r: f64) -> Result<f64> {
    ab_integrals(m, r, &QuadOptions::default()).map(|(_, b)| b)
}

/// Average score of an arbitrary measure-and-prepare protocol.
pub fn mpp_average(m: Measure, povm: &Povm, prep: &PreparationStrategy) -> Result<f64> {
    mpp_average_with(m, povm, prep, &QuadOptions::default())
}

pub fn mpp_average_with(
    m: Measure,
    povm: &Povm,
    prep: &PreparationStrategy,
    opts: &QuadOptions,
) -> Result<f64> {
    if povm.len() != prep.len() {
        return Err(Error::LengthMismatch(povm.len(), prep.len()));
    }
    let mut total = 0.0;
    for (e, r) in povm.elements.iter().zip(&prep.outputs) {
        let norm = r.norm().min(1.0);
        let (a, b) = ab_integrals(m, norm, opts)?;
        // a maximally mixed guess has no direction, so the B term drops
        let cos = if norm > 0.0 {
            r.dot(&e.axis) / norm
        } else {
            0.0
        };
        total += 0.25 * e.weight * (a + cos * b);
    }
    Ok(total)
}

/// A_d(r) + B_d(r), the quantity r_opt optimises.
fn objective(m: Measure, r: f64, opts: &QuadOptions) -> Result<f64> {
    let (a, b) = ab_integrals(m, r, opts)?;
    Ok(a + b)
}

pub fn optimal_r(m: Measure) -> Result<f64> {
    classical_threshold(m).map(|t| t.r_opt)
}

pub fn optimal_r_with(m: Measure, opts: &QuadOptions) -> Result<f64> {
    // minimise the sign-adjusted objective so overlap-like measures are maximised
    let sign = match m.orientation() {
        Orientation::DistanceLike => 1.0,
        Orientation::OverlapLike => -1.0,
    };
    let n = (1.0 / R_GRID_STEP).round() as usize;
    let grid = Exec::default().map(n, |i| {
        let r = (i + 1) as f64 * R_GRID_STEP;
        objective(m, r, opts).map(|v| sign * v)
    });
    let grid: Vec<f64> = grid.into_iter().collect::<Result<_>>()?;
    let best = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let lo = (best as f64 * R_GRID_STEP).max(R_GRID_STEP * 0.5);
    let hi = ((best + 2) as f64 * R_GRID_STEP).min(1.0);

    let mut failure = None;
    let (x, fx) = golden_section_min(
        |r| match objective(m, r, opts) {
            Ok(v) => sign * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        R_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if best == n - 1 && (x >= 1.0 - 2.0 * R_TOL || grid[n - 1] <= fx) {
        return Ok(1.0);
    }
    Ok(x)
}

/// Classical threshold with the default quadrature settings, computed once
/// per measure.
pub fn classical_threshold(m: Measure) -> Result<ThresholdResult> {
    static CACHE: [OnceLock<Result<ThresholdResult>>; 8] = [const { OnceLock::new() }; 8];
    CACHE[m.index()]
        .get_or_init(|| classical_threshold_with(m, &QuadOptions::default()))
        .clone()
}

/// Half of A_d + B_d at r_opt.
pub fn classical_threshold_with(m: Measure, opts: &QuadOptions) -> Result<ThresholdResult> {
    let r_opt = optimal_r_with(m, opts)?;
    let threshold = 0.5 * objective(m, r_opt, opts)?;
    Ok(ThresholdResult {
        measure: m,
        r_opt,
        threshold,
    })
}

/// The optimal protocol: measure along z, prepare +-r_opt z.
pub fn optimal_protocol(m: Measure) -> Result<(Povm, PreparationStrategy)> {
    let r = optimal_r(m)?;
    let povm = Povm::projective(BlochVector::unit_z())?;
    let prep = PreparationStrategy::aligned(&povm, r)?;
    Ok((povm, prep))
}

/// Monte-Carlo estimate of the MPP average over Haar-random inputs.
pub fn simulate_mpp(
    m: Measure,
    povm: &Povm,
    prep: &PreparationStrategy,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    simulate_mpp_in(Exec::default(), m, povm, prep, samples, seed)
}

pub fn simulate_mpp_in(
    exec: Exec,
    m: Measure,
    povm: &Povm,
    prep: &PreparationStrategy,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    if povm.len() != prep.len() {
        return Err(Error::LengthMismatch(povm.len(), prep.len()));
    }
    let elems = povm.elements();
    let outs = prep.outputs();
    Ok(sharded_mean(exec, samples, seed, |rng| {
        use rand::Rng;
        let t = uniform_sphere(rng);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = elems.len() - 1;
        for (i, e) in elems.iter().enumerate() {
            acc += 0.5 * e.weight * (1.0 + t.dot(&e.axis));
            if u < acc {
                pick = i;
                break;
            }
        }
        let (z, r) = pure_input_coords(&t, &outs[pick]);
        m.g(z, r)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_povm() -> Povm {
        Povm::projective(BlochVector::unit_z()).unwrap()
    }

    #[test]
    fn a_and_b_examples() {
        for r in [0.0, 0.3, 1.0] {
            assert!((a_integral(Measure::Fidelity, r).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((a_integral(Measure::Trace, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((a_integral(Measure::Trace, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((b_integral(Measure::Fidelity, 0.6).unwrap() - 0.2).abs() < 1e-12);
        // closed form of the z-moment of sqrt((1 - z)/2)
        assert!((b_integral(Measure::Trace, 1.0).unwrap() + 4.0 / 15.0).abs() < 1e-12);
        for m in Measure::ALL {
            assert!(b_integral(m, 0.0).unwrap().abs() < 1e-12, "{m}");
        }
    }

    #[test]
    fn rejects_bad_r() {
        assert!(a_integral(Measure::Trace, 1.5).is_err());
        assert!(b_integral(Measure::Trace, -0.5).is_err());
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(vec![]).is_err());
        // single outcome along an axis violates sum c^2 s = 0
        let single = Povm::new(vec![PovmElement::new(2.0, BlochVector::unit_z())]);
        assert!(matches!(single, Err(Error::InvalidPovm(_))));
        let bad_weight = Povm::new(vec![
            PovmElement::new(1.5, BlochVector::unit_z()),
            PovmElement::new(1.0, BlochVector::unit_z().scaled(-1.0)),
        ]);
        assert!(bad_weight.is_err());
        // the trivial POVM is valid
        assert!(Povm::new(vec![PovmElement::new(2.0, BlochVector::zero())]).is_ok());
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = z_povm().probabilities(&BlochVector::from_polar(0.3, 1.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mpp_examples() {
        let povm = z_povm();
        let aligned = PreparationStrategy::aligned(&povm, 1.0).unwrap();
        let f = mpp_average(Measure::Fidelity, &povm, &aligned).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12);

        let mixed = PreparationStrategy::aligned(&povm, 0.0).unwrap();
        let t = mpp_average(Measure::Trace, &povm, &mixed).unwrap();
        assert!((t - 0.5).abs() < 1e-12);

        let short = PreparationStrategy::new(vec![BlochVector::zero()]).unwrap();
        assert!(matches!(
            mpp_average(Measure::Trace, &povm, &short),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn optimal_norms() {
        let trace = optimal_r(Measure::Trace).unwrap();
        assert!((trace - (2.0 * 10f64.sqrt() - 5.0) / 3.0).abs() < R_TOL);
        let aff = optimal_r(Measure::Affinity).unwrap();
        assert!((aff - 0.6).abs() < R_TOL);
        assert_eq!(optimal_r(Measure::Bures).unwrap(), 1.0);
        assert_eq!(optimal_r(Measure::Fidelity).unwrap(), 1.0);
        assert_eq!(optimal_r(Measure::Wootters).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_thresholds() {
        let s10 = 10f64.sqrt();
        let s5 = 5f64.sqrt();
        let cases = [
            (Measure::Trace, 8.0 * (11.0 - 2.0 * s10) / 81.0),
            (Measure::Fidelity, 2.0 / 3.0),
            (Measure::Bures, 128.0 * 2f64.sqrt() / 315.0),
            (Measure::Affinity, s5 / 3.0),
            (Measure::Hellinger, 2.0 - 2.0 * s5 / 3.0),
        ];
        for (m, want) in cases {
            let got = classical_threshold(m).unwrap().threshold;
            assert!((got - want).abs() < 1e-9, "{m}: {got} vs {want}");
        }
    }

    #[test]
    fn simulate_is_deterministic_and_validates() {
        let povm = z_povm();
        let prep = PreparationStrategy::aligned(&povm, 0.5).unwrap();
        let a = simulate_mpp(Measure::Trace, &povm, &prep, 10_000, 9).unwrap();
        let b = simulate_mpp(Measure::Trace, &povm, &prep, 10_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            simulate_mpp(Measure::Trace, &povm, &prep, 0, 9),
            Err(Error::NoSamples)
        ));
    }
}
