use super::{cholesky, spectral_radius, LinalgError, LuDecomposition, Matrix};
use crate::scalar::Scalar;

/// Solves `AᵀPA − P + Q = 0` for symmetric positive definite `P`.
///
/// The equation is vectorized as `(I − Aᵀ⊗Aᵀ) vec(P) = vec(Q)` and solved by
/// LU with partial pivoting, followed by one step of iterative refinement.
pub fn solve_discrete_lyapunov<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let n = a.require_square()?;
    if q.shape() != (n, n) {
        return Err(LinalgError::DimensionMismatch { op: "lyapunov", left: a.shape(), right: q.shape() });
    }
    let q = q.require_symmetric()?;
    cholesky(&q)?;
    let rho = spectral_radius(a)?;
    if rho >= T::one() {
        return Err(LinalgError::NotSchurStable { radius: rho.to_f64_lossy() });
    }

    let at = a.transpose();
    let mut system = at.kron(&at).scale(-T::one());
    for i in 0..n * n {
        system[(i, i)] += T::one();
    }
    let lu = LuDecomposition::new(&system)?;
    let p = Matrix::new(n, n, lu.solve(q.as_slice())?)?;
    let mut p = p.symmetrized()?;

    let residual = lyapunov_residual(a, &p, &q)?;
    let correction = Matrix::new(n, n, lu.solve(residual.as_slice())?)?;
    let refined = p.add(&correction)?.symmetrized()?;
    if lyapunov_residual(a, &refined, &q)?.max_abs() <= residual.max_abs() {
        p = refined;
    }
    if !p.is_finite() {
        return Err(LinalgError::Singular);
    }
    Ok(p)
}

/// `AᵀPA − P + Q`.
pub(crate) fn lyapunov_residual<T: Scalar>(a: &Matrix<T>, p: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    a.transpose().matmul(p)?.matmul(a)?.sub(p)?.add(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_identity_is_geometric_series() {
        let a = Matrix::<f64>::identity(2).scale(0.5);
        let p = solve_discrete_lyapunov(&a, &Matrix::identity(2)).unwrap();
        assert!(p.sub(&Matrix::identity(2).scale(4.0 / 3.0)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn zero_dynamics_give_q() {
        let q = Matrix::from_rows(&[[2.0f64, 0.5], [0.5, 1.0]]).unwrap();
        let p = solve_discrete_lyapunov(&Matrix::zeros(2, 2), &q).unwrap();
        assert!(p.sub(&q).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn rejects_unstable_and_indefinite() {
        let a = Matrix::<f64>::identity(2).scale(1.1);
        assert!(matches!(
            solve_discrete_lyapunov(&a, &Matrix::identity(2)),
            Err(LinalgError::NotSchurStable { .. })
        ));
        let q = Matrix::from_diagonal(&[1.0f64, -1.0]);
        assert_eq!(
            solve_discrete_lyapunov(&Matrix::zeros(2, 2), &q),
            Err(LinalgError::NotPositiveDefinite)
        );
    }

    #[test]
    fn residual_small_for_nonnormal_matrix() {
        let a = Matrix::from_rows(&[[0.9f64, 5.0, 0.0], [0.0, 0.8, 3.0], [0.0, 0.0, -0.7]]).unwrap();
        let q = Matrix::identity(3);
        let p = solve_discrete_lyapunov(&a, &q).unwrap();
        assert!(lyapunov_residual(&a, &p, &q).unwrap().max_abs() <= 1e-10);
    }
}
