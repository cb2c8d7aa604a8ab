use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Fixed-size column vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector<const N: usize>(pub [f64; N]);

pub type Vec3 = Vector<3>;
pub type Vec4 = Vector<4>;
pub type Vec6 = Vector<6>;

impl<const N: usize> Default for Vector<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Vector<N> {
    pub const fn zeros() -> Self {
        Vector([0.0; N])
    }

    pub fn from_fn(f: impl FnMut(usize) -> f64) -> Self {
        Vector(std::array::from_fn(f))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn outer<const M: usize>(&self, other: &Vector<M>) -> Matrix<N, M> {
        Matrix::from_fn(|i, j| self.0[i] * other.0[j])
    }
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vector([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Vector([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    /// Cross-product matrix `[v×]` with `[v×]·u = v × u`.
    pub fn cross_matrix(&self) -> Mat3 {
        let [x, y, z] = self.0;
        Matrix([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    }
}

impl<const N: usize> Index<usize> for Vector<N> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const N: usize> IndexMut<usize> for Vector<N> {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const N: usize> Add for Vector<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vector::from_fn(|i| self.0[i] + o.0[i])
    }
}

impl<const N: usize> AddAssign for Vector<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const N: usize> Sub for Vector<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vector::from_fn(|i| self.0[i] - o.0[i])
    }
}

impl<const N: usize> Neg for Vector<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Vector::from_fn(|i| -self.0[i])
    }
}

impl<const N: usize> Mul<f64> for Vector<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Vector::from_fn(|i| self.0[i] * s)
    }
}

impl<const N: usize> Serialize for Vector<N> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de, const N: usize> Deserialize<'de> for Vector<N> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let arr: [f64; N] = v.try_into().map_err(|v: Vec<f64>| {
            serde::de::Error::invalid_length(v.len(), &format!("{N} components").as_str())
        })?;
        Ok(Vector(arr))
    }
}

/// Fixed-size row-major matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix<const R: usize, const C: usize>(pub [[f64; C]; R]);

pub type Mat3 = Matrix<3, 3>;
pub type Mat4 = Matrix<4, 4>;
pub type Mat6 = Matrix<6, 6>;

impl<const R: usize, const C: usize> Default for Matrix<R, C> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const R: usize, const C: usize> Matrix<R, C> {
    pub const fn zeros() -> Self {
        Matrix([[0.0; C]; R])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Matrix(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn from_columns(cols: &[Vector<R>; C]) -> Self {
        Self::from_fn(|i, j| cols[j].0[i])
    }

    pub fn from_rows(rows: &[Vector<C>; R]) -> Self {
        Self::from_fn(|i, j| rows[i].0[j])
    }

    pub fn transpose(&self) -> Matrix<C, R> {
        Matrix::from_fn(|i, j| self.0[j][i])
    }

    pub fn column(&self, j: usize) -> Vector<R> {
        Vector::from_fn(|i| self.0[i][j])
    }

    pub fn row(&self, i: usize) -> Vector<C> {
        Vector(self.0[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    /// Copy of the `BR × BC` block whose top-left corner is at `(r0, c0)`.
    pub fn block<const BR: usize, const BC: usize>(&self, r0: usize, c0: usize) -> Matrix<BR, BC> {
        Matrix::from_fn(|i, j| self.0[r0 + i][c0 + j])
    }

    pub fn set_block<const BR: usize, const BC: usize>(
        &mut self,
        r0: usize,
        c0: usize,
        b: &Matrix<BR, BC>,
    ) {
        for i in 0..BR {
            for j in 0..BC {
                self.0[r0 + i][c0 + j] = b.0[i][j];
            }
        }
    }
}

impl<const N: usize> Matrix<N, N> {
    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(d: &Vector<N>) -> Self {
        Self::from_fn(|i, j| if i == j { d.0[i] } else { 0.0 })
    }

    pub fn diagonal(&self) -> Vector<N> {
        Vector::from_fn(|i| self.0[i][i])
    }

    pub fn trace(&self) -> f64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// `‖M − Mᵀ‖_max ≤ 1e-9·‖M‖_max`.
    pub fn is_symmetric(&self) -> bool {
        self.asymmetry() <= 1e-9 * self.max_abs()
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..N {
            for j in (i + 1)..N {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(|i, j| 0.5 * (self.0[i][j] + self.0[j][i]))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting. Returns
    /// `None` when a pivot falls below `1e-14` relative to the largest entry.
    pub fn inverse(&self) -> Option<Self> {
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut a = self.0;
        let mut inv = Self::identity().0;
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap_or(col);
            if a[pivot][col].abs() <= 1e-14 * scale {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let d = 1.0 / a[col][col];
            for j in 0..N {
                a[col][j] *= d;
                inv[col][j] *= d;
            }
            for row in 0..N {
                if row != col {
                    let f = a[row][col];
                    if f != 0.0 {
                        for j in 0..N {
                            a[row][j] -= f * a[col][j];
                            inv[row][j] -= f * inv[col][j];
                        }
                    }
                }
            }
        }
        Some(Matrix(inv))
    }
}

impl Mat3 {
    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

impl<const R: usize, const C: usize> Index<(usize, usize)> for Matrix<R, C> {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl<const R: usize, const C: usize> IndexMut<(usize, usize)> for Matrix<R, C> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl<const R: usize, const C: usize> Add for Matrix<R, C> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl<const R: usize, const C: usize> AddAssign for Matrix<R, C> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const R: usize, const C: usize> Sub for Matrix<R, C> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

impl<const R: usize, const C: usize> SubAssign for Matrix<R, C> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<const R: usize, const C: usize> Neg for Matrix<R, C> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const R: usize, const K: usize, const C: usize> Mul<Matrix<K, C>> for Matrix<R, K> {
    type Output = Matrix<R, C>;
    fn mul(self, o: Matrix<K, C>) -> Matrix<R, C> {
        Matrix::from_fn(|i, j| (0..K).map(|k| self.0[i][k] * o.0[k][j]).sum())
    }
}

impl<const R: usize, const C: usize> Mul<Vector<C>> for Matrix<R, C> {
    type Output = Vector<R>;
    fn mul(self, v: Vector<C>) -> Vector<R> {
        Vector::from_fn(|i| (0..C).map(|k| self.0[i][k] * v.0[k]).sum())
    }
}

impl<const R: usize, const C: usize> Mul<f64> for Matrix<R, C> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}
