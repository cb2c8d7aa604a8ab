use super::matrix::{Matrix, Vector};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricEigen<const N: usize> {
    pub values: Vector<N>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: [Vector<N>; N],
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N, N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a.0[i][j] * a.0[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for small symmetric matrices.
pub fn jacobi_eigen_sym<const N: usize>(m: &Matrix<N, N>) -> Result<SymmetricEigen<N>> {
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if !m.is_symmetric() {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (asymmetry {:e})",
            m.asymmetry()
        )));
    }
    let mut a = m.symmetrized();
    let mut v = Matrix::<N, N>::identity();
    let tol = OFF_DIAGONAL_TOL * m.frobenius_norm();

    let mut converged = off_diagonal_norm(&a) <= tol;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.0[q][q] - a.0[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..N {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = c * akp - s * akq;
                    a.0[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = c * apk - s * aqk;
                    a.0[q][k] = s * apk + c * aqk;
                }
                a.0[p][q] = 0.0;
                a.0[q][p] = 0.0;
                for k in 0..N {
                    let vkp = v.0[k][p];
                    let vkq = v.0[k][q];
                    v.0[k][p] = c * vkp - s * vkq;
                    v.0[k][q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= tol;
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a.0[j][j].total_cmp(&a.0[i][i]));
    let values = Vector::from_fn(|k| a.0[order[k]][order[k]]);
    let vectors = std::array::from_fn(|k| v.column(order[k]));
    Ok(SymmetricEigen { values, vectors })
}

impl<const N: usize> SymmetricEigen<N> {
    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.values.max_abs()
    }

    /// `|λ|max / |λ|min`; `f64::INFINITY` when `|λ|min < 1e-300`.
    pub fn condition_number(&self) -> f64 {
        let (lo, hi) = self
            .values
            .0
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), l| {
                (lo.min(l.abs()), hi.max(l.abs()))
            });
        if lo < 1e-300 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// `|λ|max / |λ|min`; `f64::INFINITY` when `|λ|min < 1e-300`.
pub fn condition_number<const N: usize>(m: &Matrix<N, N>) -> Result<f64> {
    Ok(jacobi_eigen_sym(m)?.condition_number())
}

/// Spectral 2-norm of a symmetric matrix (largest eigenvalue magnitude).
pub fn spectral_norm<const N: usize>(m: &Matrix<N, N>) -> Result<f64> {
    Ok(jacobi_eigen_sym(m)?.spectral_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Mat3, Mat4, Mat6, RngStream, Vec3};

    fn random_symmetric<const N: usize>(rng: &mut RngStream) -> Matrix<N, N> {
        let mut m = Matrix::<N, N>::zeros();
        for i in 0..N {
            for j in i..N {
                let x = rng.gaussian(1.0).unwrap();
                m.0[i][j] = x;
                m.0[j][i] = x;
            }
        }
        m
    }

    fn check_decomposition<const N: usize>(m: &Matrix<N, N>) {
        let eig = jacobi_eigen_sym(m).unwrap();
        let scale = m.frobenius_norm().max(1.0);
        for k in 0..N {
            let v = eig.vectors[k];
            let r = *m * v - v * eig.values[k];
            assert!(r.norm() <= 1e-10 * scale, "residual {}", r.norm());
            for l in 0..N {
                let expected = if k == l { 1.0 } else { 0.0 };
                assert!((v.dot(&eig.vectors[l]) - expected).abs() <= 1e-9);
            }
        }
        for k in 1..N {
            assert!(eig.values[k - 1] >= eig.values[k]);
        }
        let sum: f64 = eig.values.0.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-9 * scale);
    }

    /// det(M − xI) by Gaussian elimination; independent of the Jacobi path.
    fn char_poly<const N: usize>(m: &Matrix<N, N>, x: f64) -> f64 {
        let mut a = (*m - Matrix::<N, N>::identity().scale(x)).0;
        let mut det = 1.0;
        for c in 0..N {
            let p = (c..N)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= a[c][c];
            for r in (c + 1)..N {
                let f = a[r][c] / a[c][c];
                let pivot = a[c];
                for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * p;
                }
            }
        }
        det
    }

    fn bisect_roots<const N: usize>(m: &Matrix<N, N>) -> Vec<f64> {
        // Gershgorin bound on the spectrum.
        let bound = (0..N)
            .map(|i| m.0[i].iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
            + 1.0;
        let steps = 20_000;
        let mut roots = Vec::new();
        let mut x0 = -bound;
        let mut f0 = char_poly(m, x0);
        for k in 1..=steps {
            let x1 = -bound + 2.0 * bound * k as f64 / steps as f64;
            let f1 = char_poly(m, x1);
            if f0 == 0.0 || f0.signum() != f1.signum() {
                let (mut lo, mut hi, mut flo) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = char_poly(m, mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    #[test]
    fn diagonal_matrix() {
        let m = Mat3::from_diagonal(&Vec3::new(3.0, 2.0, 1.0));
        let eig = jacobi_eigen_sym(&m).unwrap();
        assert_eq!(eig.values.0, [3.0, 2.0, 1.0]);
        for k in 0..3 {
            assert_eq!(eig.vectors[k][k].abs(), 1.0);
        }
    }

    #[test]
    fn embedded_two_by_two() {
        let m = Matrix([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
        let eig = jacobi_eigen_sym(&m).unwrap();
        for (got, want) in eig.values.0.iter().zip([5.0, 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn random_four_by_four_matches_characteristic_roots() {
        let mut rng = RngStream::new(42);
        for _ in 0..20 {
            let m: Mat4 = random_symmetric(&mut rng);
            check_decomposition(&m);
            let eig = jacobi_eigen_sym(&m).unwrap();
            let roots = bisect_roots(&m);
            assert_eq!(roots.len(), 4);
            for (l, r) in eig.values.0.iter().zip(&roots) {
                assert!((l - r).abs() < 1e-9, "{l} vs {r}");
            }
        }
    }

    #[test]
    fn random_decompositions_all_sizes() {
        let mut rng = RngStream::new(7);
        for _ in 0..200 {
            check_decomposition(&random_symmetric::<3>(&mut rng));
            check_decomposition(&random_symmetric::<4>(&mut rng));
            check_decomposition(&random_symmetric::<6>(&mut rng));
        }
    }

    #[test]
    fn determinant_sign_matches_eigen_product() {
        let mut rng = RngStream::new(3);
        for _ in 0..100 {
            let m: Mat3 = random_symmetric(&mut rng);
            let eig = jacobi_eigen_sym(&m).unwrap();
            let prod: f64 = eig.values.0.iter().product();
            let det = m.determinant();
            assert!((prod - det).abs() <= 1e-9 * m.frobenius_norm().powi(3).max(1.0));
            if det.abs() > 1e-6 {
                assert_eq!(prod.signum(), det.signum());
            }
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let eig = jacobi_eigen_sym(&Mat6::identity().scale(2.5)).unwrap();
        assert!(eig.values.0.iter().all(|&l| l == 2.5));
        let zero = jacobi_eigen_sym(&Mat4::zeros()).unwrap();
        assert_eq!(zero.values.0, [0.0; 4]);
    }

    #[test]
    fn rejects_non_symmetric() {
        let mut m = Mat3::identity();
        m.0[0][1] = 0.5;
        assert!(matches!(jacobi_eigen_sym(&m), Err(Error::InvalidInput(_))));
        assert!(matches!(condition_number(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(condition_number(&Mat4::identity()).unwrap(), 1.0);
        let d = Mat4::from_diagonal(&Vector([10.0, 1.0, 1.0, 1.0]));
        assert_eq!(condition_number(&d).unwrap(), 10.0);
        let s = Mat4::from_diagonal(&Vector([1.0, 1.0, 1.0, 0.0]));
        assert_eq!(condition_number(&s).unwrap(), f64::INFINITY);
    }

    #[test]
    fn spectral_norm_of_indefinite_matrix() {
        let d = Mat3::from_diagonal(&Vec3::new(1.0, -4.0, 2.0));
        assert_eq!(spectral_norm(&d).unwrap(), 4.0);
    }
}
