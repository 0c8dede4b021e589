use super::{LinalgError, LuDecomposition, Matrix};
use crate::scalar::Scalar;

/// Stopping rules for the Riccati fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub max_iterations: usize,
    /// Converged when `max|P_{k+1} − P_k| ≤ tolerance · max(1, max|P_k|)`.
    pub tolerance: f64,
    /// Entries beyond this magnitude are treated as divergence.
    pub divergence_bound: f64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self { max_iterations: 100_000, tolerance: 1e-12, divergence_bound: 1e15 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DareSolution<T> {
    /// Stabilizing solution of the Riccati equation.
    pub p: Matrix<T>,
    /// Feedback gain for `u = K x`.
    pub k: Matrix<T>,
    pub iterations: usize,
}

/// `K = −(R + BᵀPB)⁻¹ BᵀPA`.
fn gain<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, r: &Matrix<T>, p: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let btp = b.transpose().matmul(p)?;
    let s = r.add(&btp.matmul(b)?)?;
    let rhs = btp.matmul(a)?;
    let lu = LuDecomposition::new(&s)?;
    let m = rhs.rows();
    let n = rhs.cols();
    let mut k = Matrix::zeros(m, n);
    let mut col = vec![T::zero(); m];
    for j in 0..n {
        for i in 0..m {
            col[i] = rhs[(i, j)];
        }
        let x = lu.solve(&col)?;
        for i in 0..m {
            k[(i, j)] = -x[i];
        }
    }
    Ok(k)
}

/// Solves the discrete algebraic Riccati equation by fixed-point iteration
/// `P ← AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q`, starting from `P = Q`.
pub fn solve_dare<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    opts: RiccatiOptions,
) -> Result<DareSolution<T>, LinalgError> {
    let n = a.require_square()?;
    if b.rows() != n {
        return Err(LinalgError::DimensionMismatch { op: "dare(B)", left: a.shape(), right: b.shape() });
    }
    if q.shape() != (n, n) {
        return Err(LinalgError::DimensionMismatch { op: "dare(Q)", left: a.shape(), right: q.shape() });
    }
    if r.shape() != (b.cols(), b.cols()) {
        return Err(LinalgError::DimensionMismatch { op: "dare(R)", left: b.shape(), right: r.shape() });
    }
    let q = q.require_symmetric()?;
    let r = r.require_symmetric()?;
    super::cholesky(&q)?;
    super::cholesky(&r)?;

    let tol = T::of(opts.tolerance.max(100.0 * T::epsilon().to_f64_lossy()));
    let bound = T::of(opts.divergence_bound);
    let at = a.transpose();
    let mut p = q.clone();
    for it in 1..=opts.max_iterations {
        // With K the current gain, AᵀPA − AᵀPB(R+BᵀPB)⁻¹BᵀPA = AᵀPA + AᵀPB K.
        let k = gain(a, b, &r, &p)?;
        let atp = at.matmul(&p)?;
        let next = atp.matmul(a)?.add(&atp.matmul(b)?.matmul(&k)?)?.add(&q)?.symmetrized()?;
        if !next.is_finite() || next.max_abs() > bound {
            return Err(LinalgError::RiccatiDiverged { iterations: it });
        }
        let step = next.sub(&p)?.max_abs();
        let scale = T::one().max(p.max_abs());
        p = next;
        if step <= tol * scale {
            let k = gain(a, b, &r, &p)?;
            return Ok(DareSolution { p, k, iterations: it });
        }
    }
    Err(LinalgError::RiccatiMaxIterations { iterations: opts.max_iterations })
}

/// LQR gain for `x⁺ = Ax + Bu` with weights `Q`, `R`, so that `A + BK` is
/// Schur stable whenever the pair is stabilizable.
pub fn solve_dare_lqr<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<Matrix<T>, LinalgError> {
    Ok(solve_dare(a, b, q, r, RiccatiOptions::default())?.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::spectral_radius;

    #[test]
    fn scalar_dare_closed_form() {
        // a = 2, b = 1, q = 1, r = 1: p² − 4p − 1 = 0 ⇒ p = 2 + √5.
        let a = Matrix::from_rows(&[[2.0f64]]).unwrap();
        let one = Matrix::from_rows(&[[1.0f64]]).unwrap();
        let sol = solve_dare(&a, &one, &one, &one, RiccatiOptions::default()).unwrap();
        let p = 2.0 + 5f64.sqrt();
        assert!((sol.p[(0, 0)] - p).abs() < 1e-10);
        assert!((sol.k[(0, 0)] + 2.0 * p / (1.0 + p)).abs() < 1e-10);
    }

    #[test]
    fn no_control_authority_on_stable_plant() {
        let a = Matrix::from_rows(&[[0.5f64, 0.1], [0.0, 0.3]]).unwrap();
        let b = Matrix::zeros(2, 1);
        let k = solve_dare_lqr(&a, &b, &Matrix::identity(2), &Matrix::identity(1)).unwrap();
        assert_eq!(k.max_abs(), 0.0);
    }

    #[test]
    fn unstabilizable_pair_diverges() {
        let a = Matrix::from_rows(&[[1.5f64, 0.0], [0.0, 0.5]]).unwrap();
        let b = Matrix::column(&[0.0f64, 1.0]);
        assert!(matches!(
            solve_dare_lqr(&a, &b, &Matrix::identity(2), &Matrix::identity(1)),
            Err(LinalgError::RiccatiDiverged { .. })
        ));
    }

    #[test]
    fn closed_loop_is_schur() {
        let a = Matrix::from_rows(&[[1.2f64, 1.0, 0.0], [0.0, 0.9, 1.0], [0.3, 0.0, 1.1]]).unwrap();
        let b = Matrix::from_rows(&[[0.0f64, 1.0], [1.0, 0.0], [0.0, 0.0]]).unwrap();
        let k = solve_dare_lqr(&a, &b, &Matrix::identity(3), &Matrix::identity(2)).unwrap();
        let cl = a.add(&b.matmul(&k).unwrap()).unwrap();
        assert!(spectral_radius(&cl).unwrap() < 1.0);
    }
}
