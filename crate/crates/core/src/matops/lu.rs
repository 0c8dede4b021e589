use super::{LinalgError, Matrix};
use crate::scalar::Scalar;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuDecomposition<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self, LinalgError> {
        let n = a.require_square()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        let tiny = T::epsilon() * scale * T::of(n as f64);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "lu_solve",
                left: self.lu.shape(),
                right: (b.len(), 1),
            });
        }
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let yj = y[j];
                y[i] -= l * yj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[(i, j)];
                let yj = y[j];
                y[i] -= u * yj;
            }
            y[i] /= self.lu[(i, i)];
        }
        Ok(y)
    }

    pub fn inverse(&self) -> Result<Matrix<T>, LinalgError> {
        let n = self.lu.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pivoting_system() {
        let a = Matrix::<f64>::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]).unwrap();
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x).unwrap();
        let got = LuDecomposition::new(&a).unwrap().solve(&b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_singularity() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_eq!(LuDecomposition::new(&a).err(), Some(LinalgError::Singular));
    }

    #[test]
    fn inverse_round_trip() {
        let a = Matrix::<f64>::from_rows(&[[4.0, 1.0], [2.0, 3.0]]).unwrap();
        let inv = LuDecomposition::new(&a).unwrap().inverse().unwrap();
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-15);
    }
}
