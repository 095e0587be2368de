//! Quantum/classical verdicts, parameter sweeps and verdict transitions.

use std::fmt;
use std::str::FromStr;

use crate::bloch::TwoQubitFano;
use crate::channels::ResourceFamily;
use crate::entanglement::normalized_negativity;
use crate::error::{check_range, Error, Result};
use crate::measures::{Measure, Orientation};
use crate::mpp::classical_threshold;
use crate::optimize::bisect;
use crate::par::Exec;
use crate::protocol::{average_distances_in, optimal_rotations_fidelity, BobStrategy};

/// An average must beat the threshold by more than this to count as quantum.
pub const VERDICT_TIE_TOL: f64 = 1e-9;
/// Spacing of the p grid scanned for verdict flips.
pub const SCAN_STEP: f64 = 1e-3;
/// Finest bisection tolerance accepted for transition points.
pub const MIN_TRANSITION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Quantum,
    Classical,
}

impl Verdict {
    /// Quantum iff `average` is strictly better than `threshold` by more than
    /// [`VERDICT_TIE_TOL`]. Ties are classical.
    pub fn from_scores(orientation: Orientation, average: f64, threshold: f64) -> Self {
        let quantum = match orientation {
            Orientation::DistanceLike => average < threshold - VERDICT_TIE_TOL,
            Orientation::OverlapLike => average > threshold + VERDICT_TIE_TOL,
        };
        if quantum {
            Verdict::Quantum
        } else {
            Verdict::Classical
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Verdict::Quantum => "quantum",
            Verdict::Classical => "classical",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificationVerdict {
    pub measure: Measure,
    pub p: f64,
    pub average: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// How Bob's rotations are chosen for a resource.
#[derive(Clone, Copy, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum StrategyRule {
    /// Rotations maximising the average fidelity for the resource at hand.
    OptimalFidelity,
    /// R_i = w_i w_k; only meaningful for Werner resources.
    WernerOptimal,
    Explicit(BobStrategy),
}

impl StrategyRule {
    pub fn id(&self) -> &'static str {
        match self {
            StrategyRule::OptimalFidelity => "optimal-fidelity",
            StrategyRule::WernerOptimal => "werner-optimal",
            StrategyRule::Explicit(_) => "explicit",
        }
    }

    pub fn resolve(&self, fam: ResourceFamily, res: &TwoQubitFano) -> Result<BobStrategy> {
        match self {
            StrategyRule::OptimalFidelity => optimal_rotations_fidelity(res),
            StrategyRule::WernerOptimal => match fam {
                ResourceFamily::Werner(k) => Ok(BobStrategy::matched(k)),
                _ => Err(Error::StrategyMismatch {
                    rule: self.id().to_string(),
                    family: fam.id().to_string(),
                }),
            },
            StrategyRule::Explicit(s) => Ok(*s),
        }
    }
}

impl FromStr for StrategyRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimal-fidelity" => Ok(StrategyRule::OptimalFidelity),
            "werner-optimal" => Ok(StrategyRule::WernerOptimal),
            _ => Err(Error::Unknown {
                kind: "strategy",
                name: s.to_string(),
            }),
        }
    }
}

fn thresholds(measures: &[Measure]) -> Result<Vec<f64>> {
    measures
        .iter()
        .map(|&m| classical_threshold(m).map(|t| t.threshold))
        .collect()
}

fn verdicts_at(
    exec: Exec,
    measures: &[Measure],
    thresholds: &[f64],
    fam: ResourceFamily,
    p: f64,
    rule: &StrategyRule,
) -> Result<Vec<CertificationVerdict>> {
    let res = fam.build(p)?;
    let strategy = rule.resolve(fam, &res)?;
    let avgs = average_distances_in(exec, measures, &res, &strategy)?;
    Ok(measures
        .iter()
        .zip(thresholds)
        .zip(avgs)
        .map(|((&m, &threshold), average)| CertificationVerdict {
            measure: m,
            p,
            average,
            threshold,
            verdict: Verdict::from_scores(m.orientation(), average, threshold),
        })
        .collect())
}

pub fn certify(
    m: Measure,
    fam: ResourceFamily,
    p: f64,
    rule: &StrategyRule,
) -> Result<CertificationVerdict> {
    certify_all(&[m], fam, p, rule).map(|v| v[0])
}

/// Verdicts for several measures at one p, sharing the sphere quadrature.
pub fn certify_all(
    measures: &[Measure],
    fam: ResourceFamily,
    p: f64,
    rule: &StrategyRule,
) -> Result<Vec<CertificationVerdict>> {
    let p = check_range("p", p, 0.0, 1.0)?;
    verdicts_at(
        Exec::default(),
        measures,
        &thresholds(measures)?,
        fam,
        p,
        rule,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub resource: ResourceFamily,
    pub measure: Measure,
    pub p: f64,
    pub average: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub negativity_normalized: f64,
}

/// `steps` equally spaced points from `p_min` to `p_max` inclusive.
pub fn p_grid(p_min: f64, p_max: f64, steps: usize) -> Result<Vec<f64>> {
    let p_min = check_range("p_min", p_min, 0.0, 1.0)?;
    let p_max = check_range("p_max", p_max, 0.0, 1.0)?;
    if p_min >= p_max {
        return Err(Error::InvalidSweep(format!(
            "p_min {p_min} must be below p_max {p_max}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidSweep(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                p_max
            } else {
                p_min + (p_max - p_min) * i as f64 / last
            }
        })
        .collect())
}

/// One row per (measure, p), grouped by measure in the order given.
pub fn sweep(
    fam: ResourceFamily,
    measures: &[Measure],
    p_min: f64,
    p_max: f64,
    steps: usize,
    rule: &StrategyRule,
) -> Result<Vec<SweepRow>> {
    sweep_in(Exec::default(), fam, measures, p_min, p_max, steps, rule)
}

pub fn sweep_in(
    exec: Exec,
    fam: ResourceFamily,
    measures: &[Measure],
    p_min: f64,
    p_max: f64,
    steps: usize,
    rule: &StrategyRule,
) -> Result<Vec<SweepRow>> {
    let grid = p_grid(p_min, p_max, steps)?;
    let thr = thresholds(measures)?;
    let columns = exec.map(grid.len(), |i| -> Result<_> {
        let p = grid[i];
        let v = verdicts_at(Exec::Sequential, measures, &thr, fam, p, rule)?;
        Ok((v, normalized_negativity(fam, p)?))
    });
    let columns: Vec<_> = columns.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(grid.len() * measures.len());
    for j in 0..measures.len() {
        for (v, neg) in &columns {
            let c = v[j];
            rows.push(SweepRow {
                resource: fam,
                measure: c.measure,
                p: c.p,
                average: c.average,
                threshold: c.threshold,
                verdict: c.verdict,
                negativity_normalized: *neg,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub p: f64,
    /// Verdict on the high-p side of the flip.
    pub to: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionReport {
    pub measure: Measure,
    pub transitions: Vec<Transition>,
    pub tol: f64,
}

impl TransitionReport {
    /// Smallest p at which the verdict turns quantum.
    pub fn first_quantum(&self) -> Option<f64> {
        self.transitions
            .iter()
            .find(|t| t.to == Verdict::Quantum)
            .map(|t| t.p)
    }
}

pub fn transition_points(
    m: Measure,
    fam: ResourceFamily,
    rule: &StrategyRule,
    tol: f64,
) -> Result<TransitionReport> {
    transition_points_all(&[m], fam, rule, tol).map(|mut v| v.remove(0))
}

/// Scans p in steps of [`SCAN_STEP`] for all measures at once, then bisects
/// every verdict flip to `tol`.
pub fn transition_points_all(
    measures: &[Measure],
    fam: ResourceFamily,
    rule: &StrategyRule,
    tol: f64,
) -> Result<Vec<TransitionReport>> {
    transition_points_in(Exec::default(), measures, fam, rule, tol)
}

pub fn transition_points_in(
    exec: Exec,
    measures: &[Measure],
    fam: ResourceFamily,
    rule: &StrategyRule,
    tol: f64,
) -> Result<Vec<TransitionReport>> {
    let tol = check_range("tol", tol, MIN_TRANSITION_TOL, 1.0)?;
    let thr = thresholds(measures)?;
    let n = (1.0 / SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let scan = exec.map(grid.len(), |i| {
        verdicts_at(Exec::Sequential, measures, &thr, fam, grid[i], rule)
            .map(|v| v.into_iter().map(|c| c.verdict).collect::<Vec<_>>())
    });
    let scan: Vec<Vec<Verdict>> = scan.into_iter().collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(measures.len());
    for (j, &m) in measures.iter().enumerate() {
        let brackets: Vec<(usize, Verdict)> = (1..grid.len())
            .filter(|&i| scan[i][j] != scan[i - 1][j])
            .map(|i| (i, scan[i][j]))
            .collect();
        let refined = exec.map(brackets.len(), |b| {
            let (i, to) = brackets[b];
            let quantum_at = |p: f64| -> Result<bool> {
                let v = verdicts_at(Exec::Sequential, &[m], &thr[j..=j], fam, p, rule)?;
                Ok(v[0].verdict == Verdict::Quantum)
            };
            bisect(quantum_at, grid[i - 1], grid[i], tol).map(|p| Transition { p, to })
        });
        reports.push(TransitionReport {
            measure: m,
            transitions: refined.into_iter().collect::<Result<_>>()?,
            tol,
        });
    }
    Ok(reports)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    /// Largest gap between first classical-to-quantum transitions, if at
    /// least two measures have one.
    pub interval: Option<f64>,
    /// Measures attaining the gap (earliest first).
    pub pair: Option<(Measure, Measure)>,
    /// Measures that never turn quantum and were left out.
    pub excluded: Vec<Measure>,
    pub reports: Vec<TransitionReport>,
}

pub fn discrepancy_interval(
    fam: ResourceFamily,
    measures: &[Measure],
    rule: &StrategyRule,
    tol: f64,
) -> Result<Discrepancy> {
    if measures.len() < 2 {
        return Err(Error::TooFewMeasures(measures.len()));
    }
    let reports = transition_points_all(measures, fam, rule, tol)?;
    Ok(discrepancy_from_reports(reports))
}

pub fn discrepancy_from_reports(reports: Vec<TransitionReport>) -> Discrepancy {
    let mut excluded = Vec::new();
    let mut firsts = Vec::new();
    for r in &reports {
        match r.first_quantum() {
            Some(p) => firsts.push((r.measure, p)),
            None => excluded.push(r.measure),
        }
    }
    let lo = firsts.iter().min_by(|a, b| a.1.total_cmp(&b.1));
    let hi = firsts.iter().max_by(|a, b| a.1.total_cmp(&b.1));
    let (interval, pair) = match (lo, hi) {
        (Some(lo), Some(hi)) if firsts.len() >= 2 => (Some(hi.1 - lo.1), Some((lo.0, hi.0))),
        _ => (None, None),
    };
    Discrepancy {
        interval,
        pair,
        excluded,
        reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BellIndex;

    const W: ResourceFamily = ResourceFamily::Werner(BellIndex::ALL[0]);

    #[test]
    fn verdict_orientation() {
        use Orientation::*;
        assert_eq!(
            Verdict::from_scores(DistanceLike, 0.4, 0.5),
            Verdict::Quantum
        );
        assert_eq!(
            Verdict::from_scores(OverlapLike, 0.4, 0.5),
            Verdict::Classical
        );
        assert_eq!(
            Verdict::from_scores(DistanceLike, 0.5, 0.5),
            Verdict::Classical
        );
        assert_eq!(
            Verdict::from_scores(OverlapLike, 0.5, 0.5),
            Verdict::Classical
        );
    }

    #[test]
    fn certify_examples() {
        let rule = StrategyRule::WernerOptimal;
        let v = certify(Measure::Fidelity, W, 0.5, &rule).unwrap();
        assert!((v.average - 0.75).abs() < 1e-9);
        assert_eq!(v.verdict, Verdict::Quantum);
        let v = certify(Measure::Trace, W, 0.05, &rule).unwrap();
        assert!((v.average - 0.475).abs() < 1e-9);
        assert_eq!(v.verdict, Verdict::Classical);
        let v = certify(Measure::Trace, W, 0.2, &rule).unwrap();
        assert_eq!(v.verdict, Verdict::Quantum);
    }

    #[test]
    fn werner_rule_needs_werner() {
        let r = certify(
            Measure::Trace,
            ResourceFamily::AdMad,
            0.5,
            &StrategyRule::WernerOptimal,
        );
        assert!(matches!(r, Err(Error::StrategyMismatch { .. })));
    }

    #[test]
    fn grid_validation() {
        assert_eq!(p_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(p_grid(0.5, 0.5, 3).is_err());
        assert!(p_grid(0.0, 1.0, 1).is_err());
        assert!(p_grid(-0.1, 1.0, 3).is_err());
    }

    #[test]
    fn small_sweep() {
        let rows = sweep(
            W,
            &[Measure::Fidelity],
            0.0,
            1.0,
            3,
            &StrategyRule::OptimalFidelity,
        )
        .unwrap();
        let avgs: Vec<f64> = rows.iter().map(|r| r.average).collect();
        for (a, want) in avgs.iter().zip([0.5, 0.75, 1.0]) {
            assert!((a - want).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_werner_transition() {
        let r =
            transition_points(Measure::Fidelity, W, &StrategyRule::WernerOptimal, 1e-8).unwrap();
        assert_eq!(r.transitions.len(), 1);
        assert!((r.transitions[0].p - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(r.transitions[0].to, Verdict::Quantum);
        assert!(
            transition_points(Measure::Fidelity, W, &StrategyRule::WernerOptimal, 1e-9).is_err()
        );
    }

    #[test]
    fn discrepancy_needs_two_measures() {
        let r = discrepancy_interval(W, &[Measure::Trace], &StrategyRule::WernerOptimal, 1e-6);
        assert!(matches!(r, Err(Error::TooFewMeasures(1))));
    }
}
