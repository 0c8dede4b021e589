use std::fmt;
use std::ops::{Index, IndexMut};

use super::LinalgError;
use crate::scalar::Scalar;

/// Dense matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Builds a matrix from row-major entries. Rejects empty shapes, a wrong
    /// entry count and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::InvalidShape { rows, cols, len: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(LinalgError::InvalidShape { rows: r, cols: c, len: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    /// Convenience constructor from `f64` rows, converting each entry.
    pub fn from_f64_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let converted: Vec<Vec<T>> = rows
            .iter()
            .map(|row| row.as_ref().iter().map(|&x| T::of(x)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Column vector with the given entries.
    pub fn column(entries: &[T]) -> Self {
        Self { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * x`.
    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Quadratic form `xᵀ self x`.
    pub fn quadratic_form(&self, x: &[T]) -> Result<T, LinalgError> {
        let y = self.mul_vec(x)?;
        Ok(x.iter().zip(&y).map(|(&a, &b)| a * b).sum())
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Self, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch { op, left: self.shape(), right: rhs.shape() });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Largest `|m_ij - m_ji|`; zero for symmetric matrices.
    pub fn max_asymmetry(&self) -> Result<T, LinalgError> {
        let n = self.require_square()?;
        let mut worst = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        Ok(worst)
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Result<Self, LinalgError> {
        let n = self.require_square()?;
        let half = T::of(0.5);
        let mut s = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        Ok(s)
    }

    /// Symmetrizes after checking the asymmetry is within `SYMMETRY_TOL`
    /// relative to the matrix scale.
    pub fn require_symmetric(&self) -> Result<Self, LinalgError> {
        let asym = self.max_asymmetry()?;
        let scale = T::one().max(self.max_abs());
        if asym > T::of(super::SYMMETRY_TOL) * scale {
            return Err(LinalgError::NotSymmetric { asymmetry: asym.to_f64_lossy() });
        }
        self.symmetrized()
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Result<Self, LinalgError> {
        let n = self.require_square()?;
        let mut result = Self::identity(n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.matmul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(result)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Converts to `f64` entries (used for reporting and serialization).
    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.to_f64_lossy()).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(Matrix::<f64>::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::<f64>::new(0, 2, vec![]).is_err());
        assert_eq!(Matrix::new(1, 1, vec![f64::NAN]), Err(LinalgError::NonFinite));
        assert!(Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn matmul_and_transpose() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::<f64>::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab.to_rows(), vec![vec![2.0, 1.0], vec![4.0, 3.0]]);
        assert_eq!(a.transpose()[(0, 1)], 3.0);
        assert!(a.matmul(&Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let a = Matrix::<f64>::from_rows(&[[0.5, 1.0], [-0.25, 0.3]]).unwrap();
        let mut expect = Matrix::identity(2);
        for _ in 0..7 {
            expect = expect.matmul(&a).unwrap();
        }
        let got = a.pow(7).unwrap();
        assert!(got.sub(&expect).unwrap().max_abs() < 1e-14);
        assert_eq!(a.pow(0).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 2.0]]).unwrap();
        let b = Matrix::<f64>::from_rows(&[[1.0], [10.0]]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.shape(), (2, 2));
        assert_eq!(k.to_rows(), vec![vec![1.0, 2.0], vec![10.0, 20.0]]);
    }

    #[test]
    fn symmetry_helpers() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 2.0], [2.0 + 1e-12, 1.0]]).unwrap();
        assert!(a.require_symmetric().is_ok());
        let b = Matrix::<f64>::from_rows(&[[1.0, 2.0], [3.0, 1.0]]).unwrap();
        assert!(matches!(b.require_symmetric(), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_f64_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(a.quadratic_form(&[1.0, 1.0]).unwrap(), 10.0);
    }
}
