//! Dense complex matrices and the Hermitian eigensolver.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cre<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `<a|b>`, conjugating the first argument.
pub fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T = f64> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![czero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = cre(T::one());
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = cre(v);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Config("matrix must be square and non-empty".into()));
        }
        Ok(Matrix { dim, data: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex<T>) {
        self.data[i * self.dim + j] = z;
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).fold(czero(), |acc, (a, b)| acc + *a * b))
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == czero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|z| *z * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| *a + b).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm_sqr().sqrt()))
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> T {
        let n = self.dim;
        let mut e = T::zero();
        for i in 0..n {
            for j in i..n {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm_sqr().sqrt());
            }
        }
        e
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| Complex::new(U::lit(z.re.to_f64()), U::lit(z.im.to_f64()))).collect(),
        }
    }
}

/// Eigenvalues (ascending) with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen<T = f64> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }

    /// `V f(Λ) V^†`.
    pub fn map(&self, f: impl Fn(T) -> Complex<T>) -> Matrix<T> {
        let n = self.values.len();
        let mut out = Matrix::zeros(n);
        let fv: Vec<Complex<T>> = self.values.iter().map(|&l| f(l)).collect();
        for i in 0..n {
            for j in 0..n {
                let mut acc = czero();
                for (k, &v) in fv.iter().enumerate() {
                    acc = acc + self.vectors.get(i, k) * v * self.vectors.get(j, k).conj();
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
pub fn hermitian_eigen<T: Real>(m: &Matrix<T>) -> Result<Eigen<T>> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let scale = a.max_abs().max(T::epsilon());
    let tol = T::epsilon() * scale;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).norm_sqr().sqrt());
            }
        }
        if off <= tol {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a.get(i, i).re.partial_cmp(&a.get(j, j).re).unwrap_or(std::cmp::Ordering::Equal));
            let values = order.iter().map(|&i| a.get(i, i).re).collect();
            let mut vectors = Matrix::zeros(n);
            for (new, &old) in order.iter().enumerate() {
                for i in 0..n {
                    vectors.set(i, new, v.get(i, old));
                }
            }
            return Ok(Eigen { values, vectors });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let r = apq.norm_sqr().sqrt();
                if r <= tol * T::lit(1e-3) {
                    continue;
                }
                // phase that makes the pivot real, then a real rotation
                let ph = apq / r;
                let phc = ph.conj();
                let tau = (a.get(q, q).re - a.get(p, p).re) / (T::two() * r);
                let sgn = if tau < T::zero() { -T::one() } else { T::one() };
                let t = sgn / (tau.fabs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let (upp, upq, uqp, uqq) = (cre(c), cre(s), phc * (-s), phc * c);
                for k in 0..n {
                    let (akp, akq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, akp * upp + akq * uqp);
                    a.set(k, q, akp * upq + akq * uqq);
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, vkp * upp + vkq * uqp);
                    v.set(k, q, vkp * upq + vkq * uqq);
                }
                for k in 0..n {
                    let (apk, aqk) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, upp.conj() * apk + uqp.conj() * aqk);
                    a.set(q, k, upq.conj() * apk + uqq.conj() * aqk);
                }
                a.set(p, q, czero());
                a.set(q, p, czero());
                let (dp, dq) = (a.get(p, p).re, a.get(q, q).re);
                a.set(p, p, cre(dp));
                a.set(q, q, cre(dq));
            }
        }
    }
    Err(Error::Domain("Jacobi iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::f256;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_hermitian(n: usize, vals: &[f64]) -> Matrix<f64> {
        let mut m = Matrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                if i == j {
                    m.set(i, i, c(vals[k % vals.len()], 0.0));
                    k += 1;
                } else {
                    let z = c(vals[k % vals.len()], vals[(k + 1) % vals.len()]);
                    k += 2;
                    m.set(i, j, z);
                    m.set(j, i, z.conj());
                }
            }
        }
        m
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = Matrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap();
        let e = hermitian_eigen(&y).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let v = e.vector(1);
        let yv = y.apply(&v);
        for (a, b) in yv.iter().zip(&v) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn f256_eigen_is_accurate_far_beyond_f64() {
        let m = Matrix::<f256>::from_rows(vec![
            vec![cre(f256::from(2.0)), Complex::new(f256::from(1.0), f256::from(1.0))],
            vec![Complex::new(f256::from(1.0), f256::from(-1.0)), cre(f256::from(-1.0))],
        ])
        .unwrap();
        let e = hermitian_eigen(&m).unwrap();
        // eigenvalues (1 ± sqrt(17)) / 2
        let s17 = Real::sqrt(f256::from(17.0));
        let half = <f256 as Real>::half();
        let d0 = e.values[0] - (f256::from(1.0) - s17) * half;
        let d1 = e.values[1] - (f256::from(1.0) + s17) * half;
        assert!(d0.fabs().to_f64() < 1e-60 && d1.fabs().to_f64() < 1e-60);
    }

    proptest! {
        #[test]
        fn decomposition_reconstructs(vals in proptest::collection::vec(-3.0f64..3.0, 40), n in 1usize..7) {
            let m = random_hermitian(n, &vals);
            let e = hermitian_eigen(&m).unwrap();
            let back = e.map(cre);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((back.get(i, j) - m.get(i, j)).norm() < 1e-12);
                }
            }
            let vv = e.vectors.adjoint().matmul(&e.vectors);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((vv.get(i, j) - c(want, 0.0)).norm() < 1e-12);
                }
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
