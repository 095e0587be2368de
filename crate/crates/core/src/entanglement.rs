//! Negativity of two-qubit resources.

use std::sync::OnceLock;

use crate::bloch::TwoQubitFano;
use crate::channels::ResourceFamily;
use crate::error::{check_range, Result};

/// Negativities below this are reported as exactly zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;
/// Spacing of the p grid used to find each family's maximum negativity.
pub const NORMALIZER_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityResult {
    pub value: f64,
    pub normalized: f64,
}

/// (||rho^{T_A}||_1 - 1) / 2 from the eigenvalues of the partial transpose.
pub fn negativity(res: &TwoQubitFano) -> Result<f64> {
    res.check_physical()?;
    let ev = res.density()?.partial_transpose_a().eigenvalues()?;
    let n = 0.5 * ev.iter().map(|v| v.abs()).sum::<f64>() - 0.5;
    Ok(if n < NEGATIVITY_FLOOR { 0.0 } else { n })
}

pub fn negativity_closed_form(fam: ResourceFamily, p: f64) -> Result<f64> {
    let p = check_range("p", p, 0.0, 1.0)?;
    Ok(match fam {
        ResourceFamily::Werner(_) => {
            if p <= 1.0 / 3.0 {
                0.0
            } else {
                (3.0 * p - 1.0) / 4.0
            }
        }
        ResourceFamily::AdMad => (1.0 - p - (1.0 - 2.0 * p + 2.0 * p * p).sqrt()).abs() / 2.0,
        ResourceFamily::TwoAd => p * p / 2.0,
    })
}

/// Maximum numeric negativity of the family over a p grid on [0, 1].
pub fn negativity_normalizer(fam: ResourceFamily) -> Result<f64> {
    static CACHE: [OnceLock<Result<f64>>; 3] = [const { OnceLock::new() }; 3];
    let slot = match fam {
        ResourceFamily::Werner(_) => 0,
        ResourceFamily::AdMad => 1,
        ResourceFamily::TwoAd => 2,
    };
    CACHE[slot]
        .get_or_init(|| {
            let n = (1.0 / NORMALIZER_STEP).round() as usize;
            let mut best: f64 = 0.0;
            for i in 0..=n {
                let p = i as f64 / n as f64;
                best = best.max(negativity(&fam.build(p)?)?);
            }
            Ok(best)
        })
        .clone()
}

pub fn normalized_negativity(fam: ResourceFamily, p: f64) -> Result<f64> {
    negativity_result(fam, p).map(|r| r.normalized)
}

pub fn negativity_result(fam: ResourceFamily, p: f64) -> Result<NegativityResult> {
    let value = negativity(&fam.build(p)?)?;
    let max = negativity_normalizer(fam)?;
    let normalized = if max > 0.0 { value / max } else { 0.0 };
    Ok(NegativityResult { value, normalized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BellIndex;

    const W: ResourceFamily = ResourceFamily::Werner(BellIndex::ALL[0]);

    #[test]
    fn examples() {
        assert!((negativity(&W.build(1.0).unwrap()).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(negativity(&W.build(0.3).unwrap()).unwrap(), 0.0);
        let two = ResourceFamily::TwoAd.build(0.5).unwrap();
        assert!((negativity(&two).unwrap() - 0.125).abs() < 1e-12);
        assert_eq!(
            negativity_closed_form(ResourceFamily::AdMad, 0.0).unwrap(),
            0.0
        );
        assert!((negativity_closed_form(ResourceFamily::AdMad, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((negativity_closed_form(W, 2.0 / 3.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        for fam in [W, ResourceFamily::AdMad, ResourceFamily::TwoAd] {
            assert!((normalized_negativity(fam, 1.0).unwrap() - 1.0).abs() < 1e-10);
        }
        assert_eq!(normalized_negativity(W, 1.0 / 3.0).unwrap(), 0.0);
        assert!((normalized_negativity(ResourceFamily::TwoAd, 0.5).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(negativity_closed_form(W, 1.2).is_err());
        assert!(normalized_negativity(W, -0.1).is_err());
    }
}
