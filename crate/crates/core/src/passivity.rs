//! Passive states, ergotropy, entropy-matched thermal reference states and
//! quantum relative entropy.

use num_complex::Complex;

use crate::error::{QottoError, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, Spectrum};
use crate::scalar::Real;
use crate::state::{
    boltzmann_populations, gibbs_state, gibbs_state_from_spectrum, log_partition, shannon_entropy, support_log,
    von_neumann_entropy, DensityMatrix,
};

/// Outcome of [`make_passive`].
#[derive(Clone, Debug)]
pub struct PassivizationResult<T> {
    pub passive_state: DensityMatrix<T>,
    /// `permutation[k]` is the energy level (ascending order) whose population
    /// ends up on level `k`.
    pub permutation: Vec<usize>,
    pub ergotropy: T,
    /// Level energies in ascending order.
    pub energies: Vec<T>,
    /// Passive populations on `energies`.
    pub populations: Vec<T>,
}

/// Sort `populations` descending onto `energies` ascending.
///
/// Returns `source` with `source[k]` the index whose population moves to
/// level `k`. Both sorts are stable, so equal energies keep their index
/// order and equal populations keep theirs.
pub fn passivizing_assignment<T: Real>(populations: &[T], energies: &[T]) -> Vec<usize> {
    assert_eq!(populations.len(), energies.len());
    let n = populations.len();
    let mut by_population: Vec<usize> = (0..n).collect();
    by_population.sort_by(|&a, &b| populations[b].partial_cmp(&populations[a]).expect("finite population"));
    let mut by_energy: Vec<usize> = (0..n).collect();
    by_energy.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).expect("finite energy"));
    let mut source = vec![0; n];
    for (&level, &from) in by_energy.iter().zip(&by_population) {
        source[level] = from;
    }
    source
}

/// Applies a passivizing assignment to a population vector.
pub fn apply_assignment<T: Real>(populations: &[T], source: &[usize]) -> Vec<T> {
    source.iter().map(|&s| populations[s]).collect()
}

fn diagonal_weights<T: Real>(rho: &DensityMatrix<T>, spectrum: &Spectrum<T>) -> Result<Vec<T>> {
    let rotated = rho.matrix().conjugate_by(&spectrum.eigenvectors.adjoint());
    let off = rotated.max_off_diagonal();
    if off > T::tol(1e-10) {
        return Err(QottoError::NotDiagonal { off_diagonal: off.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(rotated.diagonal())
}

/// Passive state reachable from a state diagonal in the eigenbasis of `h`.
pub fn make_passive<T: Real>(rho: &DensityMatrix<T>, h: &ComplexMatrix<T>) -> Result<PassivizationResult<T>> {
    if rho.dim() != h.dim() {
        return Err(QottoError::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    let spectrum = eig_hermitian(h)?;
    let weights = diagonal_weights(rho, &spectrum)?;
    let energies = spectrum.eigenvalues.clone();
    let permutation = passivizing_assignment(&weights, &energies);
    let populations = apply_assignment(&weights, &permutation);
    let ergotropy = energies
        .iter()
        .zip(weights.iter().zip(&populations))
        .fold(T::zero(), |acc, (&e, (&p, &q))| acc + e * (p - q));
    let values: Vec<Complex<T>> = populations.iter().map(|&p| Complex::new(p, T::zero())).collect();
    let passive_state = DensityMatrix::from_trusted(spectrum.with_eigenvalues(&values));
    Ok(PassivizationResult { passive_state, permutation, ergotropy, energies, populations })
}

/// Populations non-increasing in energy, comparing distinct energy shells
/// only, with slack `tol`.
pub fn populations_are_passive<T: Real>(populations: &[T], energies: &[T], tol: T) -> bool {
    let n = populations.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).expect("finite energy"));
    let scale = energies.iter().fold(T::one(), |m, e| m.max(e.abs()));
    let shell_tie = T::tol(1e-12) * scale;

    // walk shells from the top, tracking the largest population above
    let mut max_above = T::neg_infinity();
    let mut end = n;
    while end > 0 {
        let mut start = end - 1;
        while start > 0 && energies[order[end - 1]] - energies[order[start - 1]] <= shell_tie {
            start -= 1;
        }
        let shell = &order[start..end];
        let shell_min = shell.iter().fold(T::infinity(), |m, &k| m.min(populations[k]));
        let shell_max = shell.iter().fold(T::neg_infinity(), |m, &k| m.max(populations[k]));
        if shell_min < max_above - tol {
            return false;
        }
        max_above = max_above.max(shell_max);
        end = start;
    }
    true
}

/// True when `rho` commutes with `h` and its populations decrease with energy.
pub fn is_passive<T: Real>(rho: &DensityMatrix<T>, h: &ComplexMatrix<T>, tol: T) -> bool {
    if rho.dim() != h.dim() {
        return false;
    }
    if rho.matrix().commutator(h).max_abs() >= tol {
        return false;
    }
    let Ok(spectrum) = eig_hermitian(h) else {
        return false;
    };
    let weights = spectrum.weights_of(rho.matrix());
    populations_are_passive(&weights, &spectrum.eigenvalues, tol)
}

/// Gibbs state whose entropy matches a target entropy.
#[derive(Clone, Debug)]
pub struct ThermalReference<T> {
    pub beta_ref: T,
    pub omega: DensityMatrix<T>,
    /// Caller-supplied label of the Hamiltonian the reference belongs to.
    pub hamiltonian_tag: String,
    pub target_entropy: T,
}

/// Entropy of the Gibbs distribution on `energies` at inverse temperature `beta`.
pub fn thermal_entropy<T: Real>(energies: &[T], beta: T) -> T {
    let p = boltzmann_populations(energies, beta).expect("non-negative beta");
    shannon_entropy(&p)
}

/// Mean energy of the Gibbs distribution.
pub fn thermal_energy<T: Real>(energies: &[T], beta: T) -> T {
    let p = boltzmann_populations(energies, beta).expect("non-negative beta");
    p.iter().zip(energies).fold(T::zero(), |s, (&p, &e)| s + p * e)
}

/// Attainable entropy range `[ln g_0, ln d]` of Gibbs states on `energies`.
pub fn entropy_range<T: Real>(energies: &[T]) -> (T, T) {
    let p = boltzmann_populations(energies, T::infinity()).expect("infinite beta");
    let ground = p.iter().filter(|&&x| x > T::zero()).count();
    (
        T::from_usize(ground).expect("count").ln(),
        T::from_usize(energies.len()).expect("dim").ln(),
    )
}

/// Solves `S(gibbs(E, β)) = target` for `β ≥ 0` on a list of energies.
///
/// `S(β)` decreases strictly for a non-degenerate spectrum, so the root is
/// bracketed by doubling from `β = 1` and refined by bisection down to
/// adjacent floating-point values.
pub fn reference_beta<T: Real>(energies: &[T], target: T) -> Result<T> {
    let (s_min, s_max) = entropy_range(energies);
    let slack = T::tol(1e-12);
    let unattainable = || QottoError::UnattainableEntropy {
        target: target.to_f64().unwrap_or(f64::NAN),
        min: s_min.to_f64().unwrap_or(f64::NAN),
        max: s_max.to_f64().unwrap_or(f64::NAN),
    };
    if target.is_nan() || target > s_max + slack {
        return Err(unattainable());
    }
    if target >= s_max {
        return Ok(T::zero());
    }
    if target <= s_min + slack {
        return Err(unattainable());
    }
    let entropy = |b: T| thermal_entropy(energies, b);
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut doublings = 0;
    while entropy(hi) > target {
        lo = hi;
        hi = hi + hi;
        doublings += 1;
        if doublings > 2000 || hi.is_infinite() {
            return Err(unattainable());
        }
    }
    for _ in 0..400 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (s_lo, s_hi) = (entropy(lo), entropy(hi));
    Ok(if (s_lo - target).abs() <= (s_hi - target).abs() { lo } else { hi })
}

/// Thermal reference state of `h` at entropy `target`.
pub fn reference_temperature<T: Real>(h: &ComplexMatrix<T>, target: T) -> Result<ThermalReference<T>> {
    reference_temperature_tagged(h, target, "H")
}

pub fn reference_temperature_tagged<T: Real>(
    h: &ComplexMatrix<T>,
    target: T,
    tag: &str,
) -> Result<ThermalReference<T>> {
    let spectrum = eig_hermitian(h)?;
    let beta_ref = reference_beta(&spectrum.eigenvalues, target)?;
    let omega = gibbs_state_from_spectrum(&spectrum, beta_ref)?;
    Ok(ThermalReference { beta_ref, omega, hamiltonian_tag: tag.to_owned(), target_entropy: target })
}

/// `D(ρ‖ω) = Tr ρ ln ρ - Tr ρ ln ω`, computed spectrally.
///
/// Returns `+∞` when `ρ` has weight outside the support of `ω`.
pub fn relative_entropy<T: Real>(rho: &DensityMatrix<T>, omega: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != omega.dim() {
        return Err(QottoError::DimensionMismatch { expected: omega.dim(), found: rho.dim() });
    }
    let rho_spec = eig_hermitian(rho.matrix())?;
    let omega_spec = eig_hermitian(omega.matrix())?;
    let weights = omega_spec.weights_of(rho.matrix());
    let support = T::tol(1e-300).max(T::min_positive_value());
    let mut cross = T::zero();
    for (&lambda, &w) in omega_spec.eigenvalues.iter().zip(&weights) {
        if lambda <= support {
            if w > T::tol(1e-14) {
                return Ok(T::infinity());
            }
            continue;
        }
        cross += w * lambda.ln();
    }
    let self_term = rho.matrix().trace_product(&support_log(&rho_spec)).re;
    Ok((self_term - cross).max(T::zero()))
}

/// `D(ρ‖ω_β)` against the Gibbs state of `h` at `β`, from
/// `ln ω_β = -βH - ln Z`: `D = β Tr[Hρ] + ln Z - S(ρ)`.
///
/// Unlike [`relative_entropy`] this never takes the logarithm of a small
/// reconstructed eigenvalue of `ω`, so it stays accurate for cold references.
/// `β = +∞` falls back to the spectral form.
pub fn relative_entropy_to_gibbs<T: Real>(rho: &DensityMatrix<T>, h: &ComplexMatrix<T>, beta: T) -> Result<T> {
    if rho.dim() != h.dim() {
        return Err(QottoError::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    if beta.is_infinite() {
        return relative_entropy(rho, &gibbs_state(h, beta)?);
    }
    let energies = eig_hermitian(h)?.eigenvalues;
    let d = beta * rho.expectation(h) + log_partition(&energies, beta) - von_neumann_entropy(rho)?;
    Ok(d.max(T::zero()))
}

/// `D(p‖q)` for population vectors (diagonal states in a shared basis).
pub fn classical_relative_entropy<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).fold(T::zero(), |acc, (&pi, &qi)| {
        if pi <= T::zero() {
            acc
        } else if qi <= T::zero() {
            T::infinity()
        } else {
            acc + pi * (pi.ln() - qi.ln())
        }
    })
}

/// `D(p‖gibbs(E, β))` using `ln ω = -βE - ln Z` directly.
pub fn relative_entropy_to_thermal<T: Real>(p: &[T], energies: &[T], beta: T) -> T {
    let log_z = log_partition(energies, beta);
    p.iter().zip(energies).fold(T::zero(), |acc, (&pi, &e)| {
        if pi <= T::zero() {
            acc
        } else {
            acc + pi * (pi.ln() + beta * e + log_z)
        }
    })
}
