//! Qubit and two-qubit building blocks: Bloch vectors, correlation matrices,
//! the Fano form of a two-qubit state, and its explicit 4x4 density matrix.
//!
//! Pauli matrices follow the (X, Y, Z) convention and the two-qubit basis is
//! ordered |00>, |01>, |10>, |11>, with the first factor the A system.

use std::ops::Deref;

use nalgebra::{Complex, Matrix2, Matrix3, Matrix4, Vector3};

use crate::eigen;
use crate::error::{Error, Result};

/// Slack on |t| <= 1 for a vector to count as a physical state.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues above -POSITIVITY_TOL count as non-negative.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Tolerance for M M^T = 1 and for Hermiticity / trace of density matrices.
pub const MATRIX_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn unit_z() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    /// Pure state with polar cosine `z` and azimuth `phi`.
    pub fn from_polar(z: f64, phi: f64) -> Self {
        let s = (1.0 - z * z).max(0.0).sqrt();
        Self::new(s * phi.cos(), s * phi.sin(), z)
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0 * k)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_physical(&self) -> bool {
        self.is_finite() && self.0.norm() <= 1.0 + NORM_TOL
    }

    pub fn check_physical(self) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NonFinite("Bloch vector"));
        }
        let n = self.0.norm();
        if n > 1.0 + NORM_TOL {
            return Err(Error::Unphysical(n));
        }
        Ok(self)
    }
}

impl Deref for BlochVector {
    type Target = Vector3<f64>;

    fn deref(&self) -> &Vector3<f64> {
        &self.0
    }
}

impl From<Vector3<f64>> for BlochVector {
    fn from(v: Vector3<f64>) -> Self {
        Self(v)
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// The 3x3 matrix of two-qubit correlations Tr(rho sigma_i (x) sigma_j).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationMatrix(Matrix3<f64>);

impl CorrelationMatrix {
    pub fn new(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn zero() -> Self {
        Self(Matrix3::zeros())
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self(Matrix3::from_diagonal(&Vector3::new(a, b, c)))
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0 * k)
    }
}

impl Deref for CorrelationMatrix {
    type Target = Matrix3<f64>;

    fn deref(&self) -> &Matrix3<f64> {
        &self.0
    }
}

impl From<Matrix3<f64>> for CorrelationMatrix {
    fn from(m: Matrix3<f64>) -> Self {
        Self(m)
    }
}

/// Label of one of the four Bell states, 1..=4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellIndex(u8);

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [BellIndex(1), BellIndex(2), BellIndex(3), BellIndex(4)];

    pub fn new(i: usize) -> Result<Self> {
        if (1..=4).contains(&i) {
            Ok(Self(i as u8))
        } else {
            Err(Error::BellIndex(i))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Diagonal of the Bell correlation matrix.
    pub fn signs(self) -> [f64; 3] {
        match self.0 {
            1 => [1.0, -1.0, 1.0],
            2 => [-1.0, 1.0, 1.0],
            3 => [1.0, 1.0, -1.0],
            _ => [-1.0, -1.0, -1.0],
        }
    }

    /// Amplitudes of |Phi_k> in the computational basis.
    pub fn ket(self) -> [f64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self.0 {
            1 => [h, 0.0, 0.0, h],
            2 => [h, 0.0, 0.0, -h],
            3 => [0.0, h, h, 0.0],
            _ => [0.0, h, -h, 0.0],
        }
    }
}

impl std::fmt::Display for BellIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Correlation matrix of the Bell projector |Phi_k><Phi_k|.
pub fn bell_correlation_matrix(k: BellIndex) -> CorrelationMatrix {
    let [a, b, c] = k.signs();
    CorrelationMatrix::diag(a, b, c)
}

fn orthogonality_deviation(m: &Matrix3<f64>) -> f64 {
    (m * m.transpose() - Matrix3::identity()).amax()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthogonalMatrix3(Matrix3<f64>);

impl OrthogonalMatrix3 {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let dev = orthogonality_deviation(&m);
        if !dev.is_finite() || dev > MATRIX_TOL {
            return Err(Error::NotOrthogonal(dev));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn is_proper(&self) -> bool {
        self.determinant() > 0.0
    }

    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        BlochVector(self.0 * v.0)
    }
}

/// Proper rotation of the Bloch ball (orthogonal, determinant +1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let o = OrthogonalMatrix3::new(m)?;
        let det = o.determinant();
        if det < 0.0 {
            return Err(Error::ImproperRotation(det));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// The product w_i w_k of two Bell correlation matrices.
    pub fn bell_product(i: BellIndex, k: BellIndex) -> Self {
        let a = i.signs();
        let b = k.signs();
        Self(Matrix3::from_diagonal(&Vector3::new(
            a[0] * b[0],
            a[1] * b[1],
            a[2] * b[2],
        )))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        BlochVector(self.0 * v.0)
    }
}

impl From<Rotation> for OrthogonalMatrix3 {
    fn from(r: Rotation) -> Self {
        OrthogonalMatrix3(r.0)
    }
}

/// Two-qubit state in Fano form: local Bloch vectors and correlation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitFano {
    pub bloch_a: BlochVector,
    pub bloch_b: BlochVector,
    pub corr: CorrelationMatrix,
}

impl TwoQubitFano {
    pub fn new(bloch_a: BlochVector, bloch_b: BlochVector, corr: CorrelationMatrix) -> Self {
        Self {
            bloch_a,
            bloch_b,
            corr,
        }
    }

    pub fn bell(k: BellIndex) -> Self {
        Self::new(
            BlochVector::zero(),
            BlochVector::zero(),
            bell_correlation_matrix(k),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.bloch_a.is_finite()
            && self.bloch_b.is_finite()
            && self.corr.iter().all(|v| v.is_finite())
    }

    pub fn density(&self) -> Result<DensityMatrix4> {
        assemble_density(self)
    }

    /// Checks that the assembled density matrix is positive semidefinite.
    pub fn check_physical(&self) -> Result<()> {
        let ev = self.density()?.eigenvalues()?;
        if ev[0] < -POSITIVITY_TOL {
            return Err(Error::NotPositive(ev[0]));
        }
        Ok(())
    }

    /// Reads the Fano parameters back from a density matrix.
    pub fn from_density(rho: &DensityMatrix4) -> Self {
        let a = BlochVector::new(
            rho.pauli_expectation(1, 0),
            rho.pauli_expectation(2, 0),
            rho.pauli_expectation(3, 0),
        );
        let b = BlochVector::new(
            rho.pauli_expectation(0, 1),
            rho.pauli_expectation(0, 2),
            rho.pauli_expectation(0, 3),
        );
        let corr = Matrix3::from_fn(|i, j| rho.pauli_expectation(i + 1, j + 1));
        Self::new(a, b, CorrelationMatrix(corr))
    }
}

/// Pauli matrix sigma_i, with i = 0 the identity.
pub fn pauli(i: usize) -> Matrix2<Complex<f64>> {
    let o = Complex::new(0.0, 0.0);
    let l = Complex::new(1.0, 0.0);
    let j = Complex::new(0.0, 1.0);
    match i {
        0 => Matrix2::new(l, o, o, l),
        1 => Matrix2::new(o, l, l, o),
        2 => Matrix2::new(o, -j, j, o),
        3 => Matrix2::new(l, o, o, -l),
        _ => panic!("Pauli index {i} out of range"),
    }
}

pub fn kron2(a: &Matrix2<Complex<f64>>, b: &Matrix2<Complex<f64>>) -> Matrix4<Complex<f64>> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Explicit two-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix4(Matrix4<Complex<f64>>);

impl DensityMatrix4 {
    /// Validates Hermiticity and unit trace.
    pub fn new(m: Matrix4<Complex<f64>>) -> Result<Self> {
        let dev = eigen::hermitian_deviation(&m);
        if !dev.is_finite() {
            return Err(Error::NonFinite("density matrix"));
        }
        if dev > MATRIX_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > MATRIX_TOL {
            return Err(Error::Trace(tr));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * Complex::new(0.25, 0.0))
    }

    /// |psi><psi| for a normalised real or complex amplitude vector.
    pub fn projector(psi: [Complex<f64>; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|r, c| psi[r] * psi[c].conj()))
    }

    pub fn bell(k: BellIndex) -> Self {
        let amp = k.ket().map(|a| Complex::new(a, 0.0));
        Self(Matrix4::from_fn(|r, c| amp[r] * amp[c].conj()))
    }

    pub fn product(a: &BlochVector, b: &BlochVector) -> Self {
        let rho = |v: &BlochVector| {
            (pauli(0)
                + pauli(1) * Complex::new(v.x, 0.0)
                + pauli(2) * Complex::new(v.y, 0.0)
                + pauli(3) * Complex::new(v.z, 0.0))
                * Complex::new(0.5, 0.0)
        };
        Self(kron2(&rho(a), &rho(b)))
    }

    pub fn matrix(&self) -> &Matrix4<Complex<f64>> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Tr(rho sigma_i (x) sigma_j), with index 0 the identity.
    pub fn pauli_expectation(&self, i: usize, j: usize) -> f64 {
        (self.0 * kron2(&pauli(i), &pauli(j))).trace().re
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        hermitian_eigenvalues(self)
    }

    pub fn partial_transpose_a(&self) -> Self {
        partial_transpose_a(self)
    }

    /// Applies K (x) L for every pair of Kraus operators.
    pub fn apply_local_kraus(
        &self,
        kraus_a: &[Matrix2<Complex<f64>>],
        kraus_b: &[Matrix2<Complex<f64>>],
    ) -> Self {
        let mut out = Matrix4::zeros();
        for ka in kraus_a {
            for kb in kraus_b {
                let k = kron2(ka, kb);
                out += k * self.0 * k.adjoint();
            }
        }
        Self(out)
    }
}

/// Fano assembly: rho = (1/4) sum T_{mu nu} sigma_mu (x) sigma_nu with T_00 = 1.
pub fn assemble_density(fano: &TwoQubitFano) -> Result<DensityMatrix4> {
    if !fano.is_finite() {
        return Err(Error::NonFinite("Fano parameters"));
    }
    let coeff = |mu: usize, nu: usize| -> f64 {
        match (mu, nu) {
            (0, 0) => 1.0,
            (m, 0) => fano.bloch_a[m - 1],
            (0, n) => fano.bloch_b[n - 1],
            (m, n) => fano.corr[(m - 1, n - 1)],
        }
    };
    let mut rho = Matrix4::zeros();
    for mu in 0..4 {
        for nu in 0..4 {
            let c = coeff(mu, nu);
            if c != 0.0 {
                rho += kron2(&pauli(mu), &pauli(nu)) * Complex::new(0.25 * c, 0.0);
            }
        }
    }
    Ok(DensityMatrix4(rho))
}

/// Transposes the A factor: rho^{T_A}[(a,b),(a',b')] = rho[(a',b),(a,b')].
pub fn partial_transpose_a(rho: &DensityMatrix4) -> DensityMatrix4 {
    let m = &rho.0;
    DensityMatrix4(Matrix4::from_fn(|r, c| {
        let (a, b) = (r / 2, r % 2);
        let (a2, b2) = (c / 2, c % 2);
        m[(a2 * 2 + b, a * 2 + b2)]
    }))
}

pub fn hermitian_eigenvalues(m: &DensityMatrix4) -> Result<[f64; 4]> {
    eigen::hermitian_eigenvalues(&m.0)
}
