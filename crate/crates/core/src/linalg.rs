//! Dense complex matrices, Hermitian eigendecomposition and functions of
//! Hermitian matrices.
//!
//! Everything here targets desk-scale Hilbert spaces (a few hundred states at
//! most). Products skip zero entries of the left factor, which keeps the
//! nearly-diagonal operators of the Otto protocol cheap without a separate
//! sparse type.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{QottoError, Result};
use crate::scalar::Real;

/// Largest dimension a dense Kronecker product may produce.
pub const MAX_DENSE_DIM: usize = 10_000;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = &self.data[i * self.dim + j];
                    format!("{:?}{:+?}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
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

    /// Builds from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_rows(entries: Vec<Complex<T>>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() {
            return Err(QottoError::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Real parts of the diagonal.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = Complex::zero();
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                acc += a * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest modulus among off-diagonal entries.
    pub fn max_off_diagonal(&self) -> T {
        let n = self.dim;
        let mut m = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.data[i * n + j].norm());
                }
            }
        }
        m
    }

    /// `max|M - M†|`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim;
        let mut m = T::zero();
        for i in 0..n {
            for j in i..n {
                m = m.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        m
    }

    /// `max|U†U - 1|`.
    pub fn unitarity_defect(&self) -> T {
        let product = &self.adjoint() * self;
        (&product - &Self::identity(self.dim)).max_abs()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Conjugation `U · self · U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Self {
        &(unitary * self) * &unitary.adjoint()
    }

    pub fn checked_hermitian(self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        let scale = T::one().max(self.max_abs());
        if defect > T::tol(1e-12) * scale {
            return Err(QottoError::NotHermitian { defect: defect.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(self)
    }

    /// Permutation matrix sending basis state `j` to `targets[j]`.
    pub fn permutation(targets: &[usize]) -> Self {
        let mut m = Self::zeros(targets.len());
        for (j, &i) in targets.iter().enumerate() {
            m[(i, j)] = Complex::one();
        }
        m
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`; the left factor indexes the most significant digit.
pub fn tensor_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DENSE_DIM {
        return Err(QottoError::DimensionTooLarge { dim, limit: MAX_DENSE_DIM });
    }
    let nb = b.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let aij = a[(i, j)];
            if aij.is_zero() {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// `a ⊗ a ⊗ … ⊗ a` with `copies` factors.
pub fn tensor_power<T: Real>(a: &ComplexMatrix<T>, copies: usize) -> Result<ComplexMatrix<T>> {
    let mut out = ComplexMatrix::identity(1);
    for _ in 0..copies {
        out = tensor_product(&out, a)?;
    }
    Ok(out)
}

/// Eigendecomposition `H = V Λ V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V†` for a complex-valued spectral function.
    pub fn map(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let fvals: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_eigenvalues(&fvals)
    }

    /// `V diag(values) V†`.
    pub fn with_eigenvalues(&self, fvals: &[Complex<T>]) -> ComplexMatrix<T> {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut scaled = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let z = v[(i, k)];
                if !z.is_zero() {
                    scaled[(i, k)] = z * fvals[k];
                }
            }
        }
        &scaled * &v.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.map(|l| Complex::new(l, T::zero()))
    }

    /// `exp(-i H t)`.
    pub fn evolution(&self, t: T) -> ComplexMatrix<T> {
        self.map(|l| Complex::new(T::zero(), -l * t).exp())
    }

    /// Diagonal of `V† ρ V`: weights of `rho` on each eigenvector.
    pub fn weights_of(&self, rho: &ComplexMatrix<T>) -> Vec<T> {
        let rotated = rho.conjugate_by(&self.eigenvectors.adjoint());
        rotated.diagonal()
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Eigenvalues are ascending. Within a degenerate cluster, eigenvectors are
/// ordered by the index of their dominant basis component, and every
/// eigenvector is phased so its dominant component is real and positive, so
/// repeated calls are bit-identical.
pub fn eig_hermitian<T: Real>(h: &ComplexMatrix<T>) -> Result<Spectrum<T>> {
    let scale = T::one().max(h.max_abs());
    let defect = h.hermiticity_defect();
    if defect > T::tol(1e-12) * scale {
        return Err(QottoError::NotHermitian { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }
    let n = h.dim();
    let mut a = h.clone();
    // symmetrize exactly so rotations act on a Hermitian matrix
    for i in 0..n {
        a[(i, i)] = Complex::new(a[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()).scale(T::lit(0.5));
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let off: T = {
            let mut s = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    s += a[(i, j)].norm_sqr();
                }
            }
            s.sqrt()
        };
        let diag_scale = (0..n).fold(T::zero(), |m, i| m.max(a[(i, i)].re.abs()));
        if off <= eps * eps.sqrt() * diag_scale.max(T::min_positive_value().sqrt()) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if r <= eps * T::lit(0.01) * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    continue;
                }
                let phase = apq.unscale(r);
                let tau = (aqq - app) / (r + r);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let cz = Complex::new(c, T::zero());
                let g_pq = phase.scale(s);
                let g_qp = -phase.conj().scale(s);
                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cz + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * cz;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cz + aqk * g_qp.conj();
                    a[(q, k)] = apk * g_pq.conj() + aqk * cz;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cz + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * cz;
                }
            }
        }
    }

    let values: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(ordered_spectrum(values, v, scale))
}

fn dominant_index<T: Real>(v: &ComplexMatrix<T>, col: usize) -> usize {
    let mut best = 0;
    let mut best_norm = T::neg_infinity();
    for i in 0..v.dim() {
        let m = v[(i, col)].norm_sqr();
        // strict comparison keeps the lowest index among exact ties
        if m > best_norm * (T::one() + T::tol(1e-12)) {
            best = i;
            best_norm = m;
        }
    }
    best
}

fn ordered_spectrum<T: Real>(values: Vec<T>, v: ComplexMatrix<T>, scale: T) -> Spectrum<T> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite eigenvalues"));

    // within numerically degenerate clusters, order by dominant component
    let tie = T::tol(1e-12) * scale;
    let dominant: Vec<usize> = (0..n).map(|k| dominant_index(&v, k)).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] <= tie {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| dominant[k]);
        start = end;
    }

    let eigenvalues: Vec<T> = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (new_col, &k) in order.iter().enumerate() {
        let d = v[(dominant[k], k)];
        let norm = d.norm();
        let phase = if norm > T::zero() { d.conj().unscale(norm) } else { Complex::one() };
        for i in 0..n {
            eigenvectors[(i, new_col)] = v[(i, k)] * phase;
        }
    }
    Spectrum { eigenvalues, eigenvectors }
}

/// `exp(-i H t)` through the eigendecomposition of `H`.
pub fn expm_hermitian<T: Real>(h: &ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>> {
    Ok(eig_hermitian(h)?.evolution(t))
}
