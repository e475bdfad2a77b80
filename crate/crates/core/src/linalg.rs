//! Small dense complex matrices for few-qubit density operators.
//!
//! Qubit `k` of an `n`-qubit register is bit `n - 1 - k` of the basis index,
//! so qubit 0 is the most significant. Within each qubit, index 0 is `|1>`
//! (sigma_3 = +1) and index 1 is `|0>`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// `|v><v|`
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        let n = other.dim;
        Self::from_fn(self.dim * n, |i, j| {
            self[(i / n, j / n)] * other[(i % n, j % n)]
        })
    }

    /// `<v| self |v>`
    pub fn expectation(&self, v: &[Complex<T>]) -> Complex<T> {
        assert_eq!(v.len(), self.dim);
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += v[i].conj() * self[(i, j)] * v[j];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Removes qubit `k` of an `n`-qubit operator, either by projecting it on
    /// `v` (`<v|_k X |v>_k`) or by tracing it out.
    pub fn reduce_qubit(&self, n: usize, k: usize, action: QubitReduction<'_, T>) -> Self {
        assert_eq!(self.dim, 1 << n, "operator is not on {n} qubits");
        assert!(k < n);
        let shift = n - 1 - k;
        let low_mask = (1usize << shift) - 1;
        // Insert bit `b` at position `shift` of a reduced index.
        let expand = |r: usize, b: usize| ((r & !low_mask) << 1) | (b << shift) | (r & low_mask);
        let zero = Complex::new(T::zero(), T::zero());
        Self::from_fn(self.dim / 2, |r, c| {
            let mut acc = zero;
            for s in 0..2 {
                for t in 0..2 {
                    let weight = match action {
                        QubitReduction::Project(v) => v[s].conj() * v[t],
                        QubitReduction::Trace => {
                            if s == t {
                                Complex::new(T::one(), T::zero())
                            } else {
                                zero
                            }
                        }
                    };
                    if weight != zero {
                        acc += weight * self[(expand(r, s), expand(c, t))];
                    }
                }
            }
            acc
        })
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        let (vals, _) = symmetric_eigen(&self.real_embedding());
        // Each eigenvalue of H appears twice in the real embedding.
        let mut sorted = vals;
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
        sorted.into_iter().step_by(2).collect()
    }

    /// Principal square root of a positive semidefinite Hermitian matrix;
    /// negative round-off eigenvalues are clamped to zero.
    pub fn psd_sqrt(&self) -> Self {
        let m = self.real_embedding();
        let (vals, vecs) = symmetric_eigen(&m);
        let n2 = 2 * self.dim;
        // Eigenvalues at round-off level are treated as exact zeros so the
        // root does not pick up sqrt(eps) components along null directions.
        let scale = vals.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
        let noise = T::lit(16.0) * T::epsilon() * scale;
        let roots: Vec<T> = vals
            .iter()
            .map(|&l| if l <= noise { T::zero() } else { l.sqrt() })
            .collect();
        let mut root = vec![T::zero(); n2 * n2];
        for i in 0..n2 {
            for j in 0..n2 {
                let mut acc = T::zero();
                for k in 0..n2 {
                    acc += vecs[i * n2 + k] * roots[k] * vecs[j * n2 + k];
                }
                root[i * n2 + j] = acc;
            }
        }
        let n = self.dim;
        Self::from_fn(n, |i, j| Complex::new(root[i * n2 + j], root[(i + n) * n2 + j]))
    }

    /// Singular values, descending. Taken as the positive eigenvalues of the
    /// symmetric augmentation `[[0, A], [A^T, 0]]` of the real embedding so
    /// small values keep full absolute accuracy.
    pub fn singular_values(&self) -> Vec<T> {
        let e = self.real_embedding();
        let n2 = 2 * self.dim;
        let n4 = 2 * n2;
        let mut aug = vec![T::zero(); n4 * n4];
        for i in 0..n2 {
            for j in 0..n2 {
                aug[i * n4 + (j + n2)] = e[i * n2 + j];
                aug[(j + n2) * n4 + i] = e[i * n2 + j];
            }
        }
        let (mut vals, _) = symmetric_eigen(&aug);
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite singular value"));
        vals.into_iter()
            .take(n2)
            .step_by(2)
            .map(|s| s.max(T::zero()))
            .collect()
    }

    /// Real `2n x 2n` matrix `[[A, -B], [B, A]]` for `M = A + iB`; symmetric
    /// when `M` is Hermitian.
    fn real_embedding(&self) -> Vec<T> {
        let n = self.dim;
        let n2 = 2 * n;
        let mut m = vec![T::zero(); n2 * n2];
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                m[i * n2 + j] = z.re;
                m[(i + n) * n2 + (j + n)] = z.re;
                m[(i + n) * n2 + j] = z.im;
                m[i * n2 + (j + n)] = -z.im;
            }
        }
        m
    }
}

/// How a qubit is removed from an operator.
#[derive(Debug, Clone, Copy)]
pub enum QubitReduction<'a, T> {
    Project(&'a [Complex<T>; 2]),
    Trace,
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        CMatrix::from_fn(n, |i, j| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + self[(i, k)] * rhs[(k, j)]
            })
        })
    }
}

/// Pauli matrices in the `(|1>, |0>)` ordering; index 0 is the identity.
pub fn pauli<T: Real>(j: usize) -> CMatrix<T> {
    let o = T::zero();
    let l = T::one();
    let c = |re: T, im: T| Complex::new(re, im);
    let entries = match j {
        0 => [c(l, o), c(o, o), c(o, o), c(l, o)],
        1 => [c(o, o), c(l, o), c(l, o), c(o, o)],
        2 => [c(o, o), c(o, -l), c(o, l), c(o, o)],
        3 => [c(l, o), c(o, o), c(o, o), c(-l, o)],
        _ => panic!("pauli index {j} out of range"),
    };
    CMatrix::from_fn(2, |i, k| entries[2 * i + k])
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric row-major matrix.
/// Returns eigenvalues and the eigenvector matrix (eigenvectors in columns).
pub fn symmetric_eigen<T: Real>(m: &[T]) -> (Vec<T>, Vec<T>) {
    let n = (m.len() as f64).sqrt() as usize;
    assert_eq!(n * n, m.len(), "matrix is not square");
    let mut a = m.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    if scale == T::zero() {
        return (vec![T::zero(); n], v);
    }
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= T::epsilon() * scale * T::lit(1e-2) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}
