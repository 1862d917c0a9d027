//! Exact-step unitary propagation under a time-dependent Hamiltonian.
//!
//! Each step uses `exp(-i H(t_mid) Δt)` evaluated through the eigendecomposition
//! of the midpoint Hamiltonian, so the only error is the time-ordering error,
//! which is second order in `Δt`.

use crate::error::{QottoError, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::scalar::Real;
use crate::state::DensityMatrix;

/// Hamiltonian family `H(t)` on a fixed Hilbert space.
pub trait TimeDependentHamiltonian<T: Real> {
    fn dim(&self) -> usize;

    fn hamiltonian_at(&self, t: T) -> Result<ComplexMatrix<T>>;
}

impl<T: Real, F> TimeDependentHamiltonian<T> for (usize, F)
where
    F: Fn(T) -> ComplexMatrix<T>,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn hamiltonian_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        Ok((self.1)(t))
    }
}

/// Time-reversed family `H(t0 + t1 - t)` on `[t0, t1]`.
pub struct Mirrored<'a, H, T> {
    pub inner: &'a H,
    pub t0: T,
    pub t1: T,
}

impl<T: Real, H: TimeDependentHamiltonian<T>> TimeDependentHamiltonian<T> for Mirrored<'_, H, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn hamiltonian_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        self.inner.hamiltonian_at(self.t0 + self.t1 - t)
    }
}

/// Ordered product of midpoint exponentials over `[t0, t1]` in `steps` steps.
pub fn propagator<T: Real>(
    h: &impl TimeDependentHamiltonian<T>,
    t0: T,
    t1: T,
    steps: usize,
) -> Result<ComplexMatrix<T>> {
    if steps == 0 {
        return Err(QottoError::InvalidSchedule("step count must be positive".into()));
    }
    if t1 <= t0 || t0.is_nan() || t1.is_nan() {
        return Err(QottoError::InvalidSchedule(format!(
            "propagation interval [{t0}, {t1}] is empty"
        )));
    }
    let dt = (t1 - t0) / T::from_usize(steps).expect("steps");
    let mut u = ComplexMatrix::identity(h.dim());
    for k in 0..steps {
        let mid = t0 + dt * (T::from_usize(k).expect("k") + T::lit(0.5));
        let hk = h.hamiltonian_at(mid)?;
        if hk.dim() != h.dim() {
            return Err(QottoError::DimensionMismatch { expected: h.dim(), found: hk.dim() });
        }
        let step = eig_hermitian(&hk)?.evolution(dt);
        u = &step * &u;
    }
    Ok(u)
}

/// Step-doubling policy: start at `initial_steps`, double until two successive
/// results agree on every population within `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub initial_steps: usize,
    pub max_steps: usize,
    pub tolerance: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { initial_steps: 2000, max_steps: 1 << 20, tolerance: 1e-9 }
    }
}

impl StepControl {
    /// A single convergence check at `steps` versus `2 * steps`.
    pub fn fixed(steps: usize) -> Self {
        Self { initial_steps: steps, max_steps: 2 * steps, ..Self::default() }
    }
}

/// Converged propagator and the step count that produced it.
#[derive(Clone, Debug)]
pub struct Propagation<T> {
    pub unitary: ComplexMatrix<T>,
    pub steps: usize,
    /// Largest population change between the last two step counts.
    pub change: f64,
}

fn max_population_change<T: Real>(rho: &DensityMatrix<T>, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> f64 {
    let pa = rho.evolve(a).populations();
    let pb = rho.evolve(b).populations();
    pa.iter()
        .zip(&pb)
        .map(|(x, y)| (*x - *y).abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Propagator for `rho` with automatic step doubling.
///
/// Convergence is judged on the populations of `rho` after evolution.
pub fn converged_propagator<T: Real>(
    rho: &DensityMatrix<T>,
    h: &impl TimeDependentHamiltonian<T>,
    t0: T,
    t1: T,
    control: StepControl,
) -> Result<Propagation<T>> {
    let mut steps = control.initial_steps.max(1);
    let mut previous = propagator(h, t0, t1, steps)?;
    let mut change = f64::INFINITY;
    while 2 * steps <= control.max_steps {
        steps *= 2;
        let next = propagator(h, t0, t1, steps)?;
        change = max_population_change(rho, &previous, &next);
        previous = next;
        if change <= control.tolerance {
            return Ok(Propagation { unitary: previous, steps, change });
        }
    }
    Err(QottoError::NonConvergence { steps, change })
}

/// `ρ(t1) = U ρ(t0) U†`, checked by comparing `steps` with `2 * steps`.
pub fn propagate<T: Real>(
    rho: &DensityMatrix<T>,
    h: &impl TimeDependentHamiltonian<T>,
    t0: T,
    t1: T,
    steps: usize,
) -> Result<DensityMatrix<T>> {
    if rho.dim() != h.dim() {
        return Err(QottoError::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    let p = converged_propagator(rho, h, t0, t1, StepControl::fixed(steps))?;
    Ok(rho.evolve(&p.unitary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{gibbs_state, von_neumann_entropy};
    use num_complex::Complex;

    fn two_level(detuning: f64, coupling: f64) -> ComplexMatrix<f64> {
        ComplexMatrix::from_rows(vec![
            Complex::new(0.0, 0.0),
            Complex::new(coupling, 0.0),
            Complex::new(coupling, 0.0),
            Complex::new(detuning, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn commuting_diagonal_family_keeps_populations() {
        let h = (3usize, |t: f64| ComplexMatrix::from_real_diagonal(&[0.0, 0.3 + 0.4 * t, 1.0]));
        let rho = DensityMatrix::from_populations(&[0.6, 0.3, 0.1]).unwrap();
        let out = propagate(&rho, &h, 0.0, 5.0, 50).unwrap();
        for (a, b) in out.populations().iter().zip(rho.populations()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_hamiltonian_is_exact_in_one_step() {
        let h0 = two_level(0.3, 0.7);
        let h = (2usize, |_t: f64| h0.clone());
        let one = propagator(&h, 0.0, 2.0, 1).unwrap();
        let many = propagator(&h, 0.0, 2.0, 64).unwrap();
        assert!((&one - &many).max_abs() < 1e-13);
    }

    #[test]
    fn resonant_pulse_matches_rabi_formula() {
        // zero detuning: populations follow sin^2 of the pulse area
        let tau = 0.5;
        let h = (2usize, move |t: f64| {
            let f = std::f64::consts::PI.powi(2) / (4.0 * tau) * (std::f64::consts::PI * t / tau).sin();
            two_level(0.0, f)
        });
        let rho = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        let out = propagate(&rho, &h, 0.0, tau, 400).unwrap();
        assert!((out.populations()[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unitarity_and_entropy_preserved() {
        let h = (3usize, |t: f64| {
            let mut m = ComplexMatrix::from_real_diagonal(&[0.0, 0.5 + t, 1.0]);
            m[(0, 2)] = Complex::new(0.3 * t.sin(), 0.1);
            m[(2, 0)] = Complex::new(0.3 * t.sin(), -0.1);
            m
        });
        let u = propagator(&h, 0.0, 3.0, 800).unwrap();
        assert!(u.unitarity_defect() < 1e-9);
        let rho = gibbs_state(&ComplexMatrix::from_real_diagonal(&[0.0, 0.5, 1.0]), 1.3).unwrap();
        let out = rho.evolve(&u);
        let drift = von_neumann_entropy(&out).unwrap() - von_neumann_entropy(&rho).unwrap();
        assert!(drift.abs() < 1e-8);
    }

    #[test]
    fn step_halving_is_second_order() {
        let h = (2usize, |t: f64| two_level(1.0, 0.8 * (2.0 * t).sin()));
        let rho = DensityMatrix::from_populations(&[0.9, 0.1]).unwrap();
        let pop = |n| rho.evolve(&propagator(&h, 0.0, 2.0, n).unwrap()).populations()[1];
        let (p1, p2, p4) = (pop(40), pop(80), pop(160));
        let ratio = (p1 - p2).abs() / (p2 - p4).abs();
        assert!(ratio > 3.0, "ratio {ratio}");
    }

    #[test]
    fn mirrored_family_reverses_time() {
        let h = (3usize, |t: f64| ComplexMatrix::from_real_diagonal(&[0.0, t, 1.0]));
        let m = Mirrored { inner: &h, t0: 0.0, t1: 1.0 };
        assert_eq!(m.hamiltonian_at(0.25).unwrap(), h.hamiltonian_at(0.75).unwrap());
    }

    #[test]
    fn empty_interval_rejected() {
        let h = (2usize, |_t: f64| two_level(0.0, 1.0));
        assert!(propagator(&h, 1.0, 1.0, 10).is_err());
        assert!(propagator(&h, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn non_convergence_reported() {
        let h = (2usize, |t: f64| two_level(5.0, 40.0 * (9.0 * t).sin()));
        let rho = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            propagate(&rho, &h, 0.0, 3.0, 4),
            Err(QottoError::NonConvergence { steps: 8, .. })
        ));
    }
}
