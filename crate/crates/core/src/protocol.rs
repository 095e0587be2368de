//! The standard teleportation protocol over a noisy two-qubit resource.
//!
//! Alice performs a Bell measurement on the input and her half of the resource;
//! on outcome i (probability p_i) Bob holds t^{B|i} and applies the rotation R_i.

use nalgebra::{Matrix3, Vector3};

use crate::bloch::{bell_correlation_matrix, BellIndex, BlochVector, Rotation, TwoQubitFano};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::par::Exec;
use crate::quadrature::{rule_for, QuadOptions};
use crate::sampling::{sharded_mean, uniform_sphere, Estimate};

/// Slack on the unit norm of a pure input.
pub const PURE_TOL: f64 = 1e-10;
/// Outcomes with probability at or below this carry no output direction.
pub const PROB_FLOOR: f64 = 1e-15;
/// Convergence threshold of the sphere quadrature.
pub const SPHERE_TOL: f64 = 1e-7;
/// Closed-form fidelities closer than this count as tied.
pub const STRATEGY_TIE_TOL: f64 = 1e-12;
/// Order in which tied Bell labels l are preferred.
const TIE_PREFERENCE: [usize; 4] = [1, 4, 3, 2];

/// Sphere quadrature settings: GL order in z, twice as many azimuthal points.
pub fn sphere_options() -> QuadOptions {
    QuadOptions {
        tol: SPHERE_TOL,
        min_order: 64,
        max_order: 1024,
    }
}

/// Bob's rotation for each Bell outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BobStrategy {
    pub rotations: [Rotation; 4],
}

impl BobStrategy {
    pub fn new(rotations: [Rotation; 4]) -> Self {
        Self { rotations }
    }

    /// R_i = w_i w_k, the correction matched to the Bell state Phi_k.
    pub fn matched(k: BellIndex) -> Self {
        Self::new(BellIndex::ALL.map(|i| Rotation::bell_product(i, k)))
    }

    pub fn rotation(&self, i: BellIndex) -> &Rotation {
        &self.rotations[i.get() - 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolOutcome {
    pub probability: f64,
    /// Bob's corrected Bloch vector; zero when the outcome never occurs.
    pub output: BlochVector,
    pub defined: bool,
}

fn check_pure(t: &BlochVector) -> Result<()> {
    let n = t.norm();
    if !n.is_finite() {
        return Err(Error::NonFinite("input state"));
    }
    if (n - 1.0).abs() > PURE_TOL {
        return Err(Error::NotPure(n));
    }
    Ok(())
}

/// The four (p_i, t_i) for a pure input t.
pub fn protocol_outcomes(
    res: &TwoQubitFano,
    strategy: &BobStrategy,
    input: &BlochVector,
) -> Result<[ProtocolOutcome; 4]> {
    check_pure(input)?;
    Ok(Kernel::new(res, strategy).outcomes(input))
}

/// Per-outcome linear maps, precomputed once per (resource, strategy).
struct Kernel {
    /// w_i r_A
    alice: [Vector3<f64>; 4],
    /// R_i r_B
    offset: [Vector3<f64>; 4],
    /// R_i (w_i r)^T
    linear: [Matrix3<f64>; 4],
}

impl Kernel {
    fn new(res: &TwoQubitFano, strategy: &BobStrategy) -> Self {
        let r = res.corr.into_inner();
        let ra = res.bloch_a.into_inner();
        let rb = res.bloch_b.into_inner();
        let mut k = Kernel {
            alice: [Vector3::zeros(); 4],
            offset: [Vector3::zeros(); 4],
            linear: [Matrix3::zeros(); 4],
        };
        for (n, i) in BellIndex::ALL.into_iter().enumerate() {
            let w = bell_correlation_matrix(i).into_inner();
            let rot = strategy.rotations[n].matrix();
            k.alice[n] = w * ra;
            k.offset[n] = rot * rb;
            k.linear[n] = rot * (w * r).transpose();
        }
        k
    }

    fn outcomes(&self, t: &BlochVector) -> [ProtocolOutcome; 4] {
        let t = t.into_inner();
        std::array::from_fn(|n| {
            let p = 0.25 * (1.0 + t.dot(&self.alice[n]));
            if p <= PROB_FLOOR {
                return ProtocolOutcome {
                    probability: p.max(0.0),
                    output: BlochVector::zero(),
                    defined: false,
                };
            }
            let out = (self.offset[n] + self.linear[n] * t) / (4.0 * p);
            ProtocolOutcome {
                probability: p,
                output: BlochVector::from(out),
                defined: true,
            }
        })
    }

    /// sum_i p_i d(t, t_i) for each measure, written into `acc`.
    fn score(&self, measures: &[Measure], t: &BlochVector, acc: &mut [f64]) {
        let outs = self.outcomes(t);
        // t is pure, so each term is the reduced form at (cos angle, |t_i|)
        let reduced = outs.map(|o| pure_input_coords(t, &o.output));
        for (m, a) in measures.iter().zip(acc.iter_mut()) {
            *a = outs
                .iter()
                .zip(&reduced)
                .filter(|(o, _)| o.defined)
                .map(|(o, &(z, r))| o.probability * m.g(z, r))
                .sum();
        }
    }
}

/// (z, r) with r = |s| and z the cosine between the pure state t and s.
pub(crate) fn pure_input_coords(t: &BlochVector, s: &BlochVector) -> (f64, f64) {
    let r = s.norm().min(1.0);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    ((t.dot(s) / (t.norm() * r)).clamp(-1.0, 1.0), r)
}

/// Sphere-averaged score of the protocol under one measure.
pub fn average_distance(m: Measure, res: &TwoQubitFano, strategy: &BobStrategy) -> Result<f64> {
    average_distances_in(Exec::default(), &[m], res, strategy).map(|v| v[0])
}

/// Sphere averages for several measures sharing one set of quadrature nodes.
pub fn average_distances(
    measures: &[Measure],
    res: &TwoQubitFano,
    strategy: &BobStrategy,
) -> Result<Vec<f64>> {
    average_distances_in(Exec::default(), measures, res, strategy)
}

pub fn average_distances_in(
    exec: Exec,
    measures: &[Measure],
    res: &TwoQubitFano,
    strategy: &BobStrategy,
) -> Result<Vec<f64>> {
    average_distances_with(exec, &sphere_options(), measures, res, strategy)
}

pub fn average_distances_with(
    exec: Exec,
    opts: &QuadOptions,
    measures: &[Measure],
    res: &TwoQubitFano,
    strategy: &BobStrategy,
) -> Result<Vec<f64>> {
    if !res.is_finite() {
        return Err(Error::NonFinite("resource"));
    }
    let kernel = Kernel::new(res, strategy);
    let estimate = |order: usize| sphere_estimate(exec, &kernel, measures, order);

    let mut order = opts.min_order.max(1);
    let mut prev = estimate(order);
    let mut change = f64::INFINITY;
    while order * 2 <= opts.max_order {
        order *= 2;
        let next = estimate(order);
        change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change.is_nan() {
            return Err(Error::NonFinite("sphere quadrature"));
        }
        if change < opts.tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { order, change })
}

/// GL in z at `order` nodes times a 2 * order point trapezoid in azimuth.
fn sphere_estimate(exec: Exec, kernel: &Kernel, measures: &[Measure], order: usize) -> Vec<f64> {
    let rule = rule_for(order);
    let n_phi = 2 * order;
    let dphi = std::f64::consts::TAU / n_phi as f64;
    let (sin_phi, cos_phi): (Vec<f64>, Vec<f64>) =
        (0..n_phi).map(|j| (j as f64 * dphi).sin_cos()).unzip();
    let k = measures.len();
    let rows = exec.map(order, |zi| {
        let z = rule.nodes()[zi];
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let mut row = vec![0.0; k];
        let mut acc = vec![0.0; k];
        for j in 0..n_phi {
            let t = BlochVector::new(rho * cos_phi[j], rho * sin_phi[j], z);
            kernel.score(measures, &t, &mut acc);
            for (r, a) in row.iter_mut().zip(&acc) {
                *r += a;
            }
        }
        row
    });
    let mut total = vec![0.0; k];
    for (row, w) in rows.iter().zip(rule.weights()) {
        for (t, r) in total.iter_mut().zip(row) {
            *t += w * r;
        }
    }
    // (1 / 4 pi) dS = (1/2) dz (1 / 2 pi) dphi
    let scale = 0.5 / n_phi as f64;
    total.iter_mut().for_each(|t| *t *= scale);
    total
}

/// (1 + Tr A / 3) / 2 with A = (1/4) sum_i R_i r^T w_i.
pub fn avg_fidelity_closed(res: &TwoQubitFano, strategy: &BobStrategy) -> f64 {
    let rt = res.corr.transpose();
    let trace: f64 = BellIndex::ALL
        .into_iter()
        .zip(&strategy.rotations)
        .map(|(i, rot)| (rot.matrix() * rt * bell_correlation_matrix(i).into_inner()).trace())
        .sum();
    0.5 * (1.0 + 0.25 * trace / 3.0)
}

/// Candidate strategies R_i = w_i O1 w_l O2^T from r = O1 r_d O2^T, with the
/// label l whose closed-form fidelity is largest.
pub fn optimal_rotations_fidelity(res: &TwoQubitFano) -> Result<BobStrategy> {
    let (o1, o2) = proper_svd(res.corr.into_inner())?;
    let candidate = |l: usize| -> Result<BobStrategy> {
        let wl = bell_correlation_matrix(BellIndex::new(l)?).into_inner();
        let mut rots = [Rotation::identity(); 4];
        for (n, i) in BellIndex::ALL.into_iter().enumerate() {
            let wi = bell_correlation_matrix(i).into_inner();
            rots[n] = Rotation::new(wi * o1 * wl * o2.transpose())?;
        }
        Ok(BobStrategy::new(rots))
    };
    let mut best = candidate(TIE_PREFERENCE[0])?;
    let mut best_f = avg_fidelity_closed(res, &best);
    for &l in &TIE_PREFERENCE[1..] {
        let s = candidate(l)?;
        let f = avg_fidelity_closed(res, &s);
        if f > best_f + STRATEGY_TIE_TOL {
            best = s;
            best_f = f;
        }
    }
    Ok(best)
}

/// Proper rotations O1, O2 with r = O1 D O2^T. Diagonal r keeps O1 = O2 = 1.
fn proper_svd(r: Matrix3<f64>) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let off: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| r[(i, j)].abs())
        .fold(0.0, f64::max);
    if off == 0.0 {
        return Ok((Matrix3::identity(), Matrix3::identity()));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation matrix"));
    }
    let svd = r.svd(true, true);
    let mut u = svd.u.expect("requested U");
    let mut v = svd.v_t.expect("requested V^T").transpose();
    // a reflection in either factor is moved onto the third singular value
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
    }
    Ok((u, v))
}

/// R_i = w_i w_k: optimal for every measure on a Werner resource.
pub fn werner_optimal_rotations(k: BellIndex) -> BobStrategy {
    BobStrategy::matched(k)
}

/// Monte-Carlo estimate of the sphere average, averaging exactly over the
/// four outcomes for each sampled input.
pub fn simulate_protocol(
    m: Measure,
    res: &TwoQubitFano,
    strategy: &BobStrategy,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    simulate_protocol_in(Exec::default(), m, res, strategy, samples, seed)
}

pub fn simulate_protocol_in(
    exec: Exec,
    m: Measure,
    res: &TwoQubitFano,
    strategy: &BobStrategy,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    if !res.is_finite() {
        return Err(Error::NonFinite("resource"));
    }
    let kernel = Kernel::new(res, strategy);
    let ms = [m];
    Ok(sharded_mean(exec, samples, seed, |rng| {
        let t = uniform_sphere(rng);
        let mut acc = [0.0];
        kernel.score(&ms, &t, &mut acc);
        acc[0]
    }))
}
