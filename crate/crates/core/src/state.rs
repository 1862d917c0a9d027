//! Density matrices, Gibbs states and von Neumann entropy.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{QottoError, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, Spectrum};
use crate::scalar::Real;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates trace, hermiticity and positivity.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let invalid = |reason: String| QottoError::InvalidDensityMatrix { reason };
        let matrix = matrix.checked_hermitian().map_err(|e| invalid(e.to_string()))?;
        let trace = matrix.trace();
        if (trace - Complex::new(T::one(), T::zero())).norm() > T::tol(1e-12) {
            return Err(invalid(format!("trace {trace} differs from 1")));
        }
        let spectrum = eig_hermitian(&matrix)?;
        let lowest = spectrum.eigenvalues.first().copied().unwrap_or_else(T::zero);
        if lowest < -T::tol(1e-12) {
            return Err(invalid(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(Self { matrix })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(populations: &[T]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(populations))
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix<T>) -> Self {
        Self { matrix }
    }

    /// Pure state `|ψ⟩⟨ψ|` of a normalized vector.
    pub fn pure(amplitudes: &[Complex<T>]) -> Result<Self> {
        let n = amplitudes.len();
        Self::new(ComplexMatrix::from_fn(n, |i, j| amplitudes[i] * amplitudes[j].conj()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = T::one() / T::from_usize(dim).expect("dimension");
        Self { matrix: ComplexMatrix::from_real_diagonal(&vec![p; dim]) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// Diagonal in the computational basis.
    pub fn populations(&self) -> Vec<T> {
        self.matrix.diagonal()
    }

    /// `Tr[H ρ]`.
    pub fn expectation(&self, observable: &ComplexMatrix<T>) -> T {
        observable.trace_product(&self.matrix).re
    }

    /// `U ρ U†`.
    pub fn evolve(&self, unitary: &ComplexMatrix<T>) -> Self {
        Self { matrix: self.matrix.conjugate_by(unitary) }
    }

    /// Convex combination `α ρ + (1 - α) σ`.
    pub fn mix(&self, other: &Self, alpha: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(QottoError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let m = &self.matrix.scale_real(alpha) + &other.matrix.scale_real(T::one() - alpha);
        Ok(Self { matrix: m })
    }
}

/// Boltzmann populations `e^{-βE_n}/Z` for a list of energies.
///
/// The exponent is shifted by the lowest energy so large `β` cannot overflow.
/// `β = +∞` gives the uniform distribution over the ground level(s).
pub fn boltzmann_populations<T: Real>(energies: &[T], beta: T) -> Result<Vec<T>> {
    check_beta(beta)?;
    if energies.is_empty() {
        return Ok(Vec::new());
    }
    let ground = energies.iter().copied().fold(T::infinity(), T::min);
    if beta.is_infinite() {
        let spread = energies.iter().fold(T::zero(), |m, &e| m.max((e - ground).abs()));
        let tie = T::tol(1e-12) * T::one().max(spread);
        let ground_count = energies.iter().filter(|&&e| e - ground <= tie).count();
        let p = T::one() / T::from_usize(ground_count).expect("count");
        return Ok(energies.iter().map(|&e| if e - ground <= tie { p } else { T::zero() }).collect());
    }
    let weights: Vec<T> = energies.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
    let z: T = weights.iter().fold(T::zero(), |s, &w| s + w);
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// `ln Z(β) = ln Σ e^{-βE_n}`, evaluated stably.
pub fn log_partition<T: Real>(energies: &[T], beta: T) -> T {
    let ground = energies.iter().copied().fold(T::infinity(), T::min);
    let shifted = energies.iter().fold(T::zero(), |s, &e| s + (-beta * (e - ground)).exp());
    shifted.ln() - beta * ground
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if beta.is_nan() || beta < T::zero() || beta == T::neg_infinity() {
        return Err(QottoError::InvalidBeta { beta: beta.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// Gibbs state `e^{-βH}/Tr e^{-βH}` of a Hermitian matrix.
pub fn gibbs_state<T: Real>(h: &ComplexMatrix<T>, beta: T) -> Result<DensityMatrix<T>> {
    let spectrum = eig_hermitian(h)?;
    gibbs_state_from_spectrum(&spectrum, beta)
}

pub fn gibbs_state_from_spectrum<T: Real>(spectrum: &Spectrum<T>, beta: T) -> Result<DensityMatrix<T>> {
    let p = boltzmann_populations(&spectrum.eigenvalues, beta)?;
    let values: Vec<Complex<T>> = p.iter().map(|&x| Complex::new(x, T::zero())).collect();
    let m = spectrum.with_eigenvalues(&values);
    Ok(DensityMatrix::from_trusted(m))
}

/// `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy<T: Real>(populations: &[T]) -> T {
    populations
        .iter()
        .filter(|&&p| p > T::zero())
        .fold(T::zero(), |s, &p| s - p * p.ln())
}

/// Entropy together with the largest clamp applied to push eigenvalues into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClampedEntropy<T> {
    pub entropy: T,
    pub clamp: T,
}

pub fn entropy_with_clamp<T: Real>(rho: &DensityMatrix<T>) -> Result<ClampedEntropy<T>> {
    let spectrum = eig_hermitian(rho.matrix())?;
    let mut clamp = T::zero();
    let clamped: Vec<T> = spectrum
        .eigenvalues
        .iter()
        .map(|&l| {
            let c = l.max(T::zero()).min(T::one());
            clamp = clamp.max((c - l).abs());
            c
        })
        .collect();
    Ok(ClampedEntropy { entropy: shannon_entropy(&clamped), clamp })
}

/// Von Neumann entropy `-Tr ρ ln ρ`; an eigenvalue clamp beyond `1e-9` is an error.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let ClampedEntropy { entropy, clamp } = entropy_with_clamp(rho)?;
    if clamp > T::tol(1e-9) {
        return Err(QottoError::ClampTooLarge { clamp: clamp.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(entropy)
}

/// `ln ρ` restricted to the support of `ρ` (zero eigenvalues map to zero).
pub(crate) fn support_log<T: Real>(spectrum: &Spectrum<T>) -> ComplexMatrix<T> {
    spectrum.map(|l| if l > T::zero() { Complex::new(l.ln(), T::zero()) } else { Complex::zero() })
}
