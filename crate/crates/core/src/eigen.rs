//! Cyclic Jacobi eigenvalues for small symmetric and Hermitian matrices.

use nalgebra::{Complex, Matrix4};

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at which the iteration stops.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Largest |A - A^dagger| entry accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

fn off_norm<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a real symmetric matrix, ascending.
///
/// Classic cyclic-by-row Jacobi with the Rutishauser rotation formulas.
pub fn symmetric_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> Result<[f64; N]> {
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) < JACOBI_TOL {
            let mut ev = [0.0; N];
            for (i, e) in ev.iter_mut().enumerate() {
                *e = a[i][i];
            }
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        #[allow(clippy::needless_range_loop)]
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::EigenNotConverged(JACOBI_MAX_SWEEPS))
}

pub fn hermitian_deviation(m: &Matrix4<Complex<f64>>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of a 4x4 Hermitian matrix, ascending.
///
/// The matrix H = X + iY is embedded as the real symmetric block matrix
/// [[X, -Y], [Y, X]], whose spectrum is that of H with every eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &Matrix4<Complex<f64>>) -> Result<[f64; 4]> {
    let dev = hermitian_deviation(m);
    if !dev.is_finite() {
        return Err(Error::NonFinite("Hermitian matrix"));
    }
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let mut big = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            // symmetrise so roundoff-level skew does not leak into the embedding
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            big[i][j] = z.re;
            big[i + 4][j + 4] = z.re;
            big[i][j + 4] = -z.im;
            big[i + 4][j] = z.im;
        }
    }
    let ev = symmetric_eigenvalues(big)?;
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        *o = 0.5 * (ev[2 * k] + ev[2 * k + 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_quarter() {
        let m = Matrix4::<Complex<f64>>::identity() * c(0.25, 0.0);
        let ev = hermitian_eigenvalues(&m).unwrap();
        for e in ev {
            assert!((e - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_is_sorted() {
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            c(0.4, 0.0),
            c(0.3, 0.0),
            c(0.2, 0.0),
            c(0.1, 0.0),
        ));
        let ev = hermitian_eigenvalues(&m).unwrap();
        let want = [0.1, 0.2, 0.3, 0.4];
        for (e, w) in ev.iter().zip(want) {
            assert!((e - w).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_two_by_two_block() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let mut m = Matrix4::<Complex<f64>>::zeros();
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, -1.0);
        m[(2, 2)] = c(3.0, 0.0);
        m[(3, 3)] = c(-1.0, 0.0);
        let ev = hermitian_eigenvalues(&m).unwrap();
        let want = [-1.0, 0.0, 2.0, 3.0];
        for (e, w) in ev.iter().zip(want) {
            assert!((e - w).abs() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Matrix4::<Complex<f64>>::identity();
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn real_symmetric_three_by_three() {
        // tridiagonal (2,-1) matrix: eigenvalues 2 - sqrt2, 2, 2 + sqrt2
        let a = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        let ev = symmetric_eigenvalues(a).unwrap();
        let r2 = 2f64.sqrt();
        for (e, w) in ev.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((e - w).abs() < 1e-13);
        }
    }
}
