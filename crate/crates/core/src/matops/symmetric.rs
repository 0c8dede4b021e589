use super::{LinalgError, Matrix};
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Extreme eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSpectrum<T> {
    pub lambda_min: T,
    pub lambda_max: T,
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues<T: Scalar>(p: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    let mut a = p.require_symmetric()?;
    let n = a.rows();
    let eps = T::epsilon();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[(i, i)] * a[(i, i)];
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::of(2.0) * apq);
                let t = sign_of(theta) / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence)
}

fn sign_of<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

pub fn symmetric_spectrum<T: Scalar>(p: &Matrix<T>) -> Result<SymmetricSpectrum<T>, LinalgError> {
    let ev = symmetric_eigenvalues(p)?;
    Ok(SymmetricSpectrum { lambda_min: ev[0], lambda_max: ev[ev.len() - 1] })
}

/// Lower-triangular `L` with `L Lᵀ = P`.
pub fn cholesky<T: Scalar>(p: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let a = p.require_symmetric()?;
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
fn lower_inverse<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = T::one() / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = T::zero();
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// `λ_max(Pq Pp⁻¹)`, the tightest `μ` with `ξᵀPqξ ≤ μ ξᵀPpξ`. Computed on the
/// symmetric matrix `L⁻¹ Pq L⁻ᵀ` where `Pp = L Lᵀ`.
pub fn max_generalized_eigenvalue<T: Scalar>(pq: &Matrix<T>, pp: &Matrix<T>) -> Result<T, LinalgError> {
    if pq.shape() != pp.shape() {
        return Err(LinalgError::DimensionMismatch {
            op: "max_generalized_eigenvalue",
            left: pq.shape(),
            right: pp.shape(),
        });
    }
    let pq = pq.require_symmetric()?;
    cholesky(&pq)?;
    let l = cholesky(pp)?;
    let li = lower_inverse(&l);
    let c = li.matmul(&pq)?.matmul(&li.transpose())?.symmetrized()?;
    Ok(symmetric_spectrum(&c)?.lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_identity_spectra() {
        let d = Matrix::from_diagonal(&[3.0f64, 1.0]);
        assert_eq!(symmetric_spectrum(&d).unwrap(), SymmetricSpectrum { lambda_min: 1.0, lambda_max: 3.0 });
        let i = Matrix::<f64>::identity(4);
        assert_eq!(symmetric_spectrum(&i).unwrap(), SymmetricSpectrum { lambda_min: 1.0, lambda_max: 1.0 });
    }

    #[test]
    fn known_2x2_spectrum() {
        let p = Matrix::from_rows(&[[2.0f64, 1.0], [1.0, 2.0]]).unwrap();
        let s = symmetric_spectrum(&p).unwrap();
        assert!((s.lambda_min - 1.0).abs() < 1e-14 && (s.lambda_max - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_reconstructs() {
        let p = Matrix::from_rows(&[[4.0f64, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]]).unwrap();
        let l = cholesky(&p).unwrap();
        assert!(l.matmul(&l.transpose()).unwrap().sub(&p).unwrap().max_abs() < 1e-14);
        let indefinite = Matrix::from_rows(&[[1.0f64, 2.0], [2.0, 1.0]]).unwrap();
        assert_eq!(cholesky(&indefinite), Err(LinalgError::NotPositiveDefinite));
    }

    #[test]
    fn generalized_eigenvalue_scaling() {
        let p = Matrix::from_rows(&[[2.0f64, 0.3], [0.3, 1.0]]).unwrap();
        assert!((max_generalized_eigenvalue(&p, &p).unwrap() - 1.0).abs() < 1e-14);
        assert!((max_generalized_eigenvalue(&p.scale(2.0), &p).unwrap() - 2.0).abs() < 1e-14);
        assert!(max_generalized_eigenvalue(&p, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = Matrix::from_rows(&[[1.0f64, 0.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(symmetric_spectrum(&a), Err(LinalgError::NotSymmetric { .. })));
    }
}
