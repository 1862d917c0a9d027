//! The four-stroke Otto cycle: stroke composition, work and heats, the
//! relative-entropy efficiency decomposition, and Carnot / second-law checks.
//!
//! Sign convention: energy flowing into the working fluid is positive.
//! `W = E_B - E_A + E_D - E_C`, `Q_h = E_C - E_B`, `Q_c = E_A - E_D`, where
//! `E_ν = Tr[H_ν ρ_ν]`.

use std::fmt;

use serde::Serialize;

use crate::error::{QottoError, Result};
use crate::linalg::ComplexMatrix;
use crate::passivity::{passivizing_assignment, reference_temperature_tagged, relative_entropy_to_gibbs};
use crate::propagate::{converged_propagator, Mirrored, StepControl};
use crate::protocol::{
    collective_energies, crossed_indices, detect_crossings, perfect_swap, HamiltonianSchedule, PulseMode,
    QutritParams,
};
use crate::propagate::TimeDependentHamiltonian;
use crate::scalar::Real;
use crate::state::{boltzmann_populations, gibbs_state, von_neumann_entropy, DensityMatrix};

/// Corner of the cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PointLabel {
    A,
    B,
    C,
    D,
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Hamiltonian and state at one corner of the cycle.
#[derive(Clone, Debug)]
pub struct CyclePoint<T> {
    pub label: PointLabel,
    pub hamiltonian: ComplexMatrix<T>,
    pub state: DensityMatrix<T>,
    pub energy: T,
    pub entropy: T,
}

impl<T: Real> CyclePoint<T> {
    pub fn new(label: PointLabel, hamiltonian: ComplexMatrix<T>, state: DensityMatrix<T>) -> Result<Self> {
        if hamiltonian.dim() != state.dim() {
            return Err(QottoError::DimensionMismatch { expected: hamiltonian.dim(), found: state.dim() });
        }
        let energy = state.expectation(&hamiltonian);
        let entropy = von_neumann_entropy(&state)?;
        Ok(Self { label, hamiltonian, state, energy, entropy })
    }
}

/// Thermal reference state data at `B` or `D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ReferencePoint<T> {
    pub beta: T,
    /// `Tr[H ω]`.
    pub energy: T,
    /// `D(ρ‖ω)`.
    pub relative_entropy: T,
}

/// Raw stroke-end quantities shared by the dense, level-resolved and
/// class-resolved cycle implementations.
pub(crate) struct StrokeLedger<T> {
    pub copies: usize,
    pub beta_c: T,
    pub beta_h: T,
    pub energies: [T; 4],
    pub entropies: [T; 4],
    pub reference_b: ReferencePoint<T>,
    pub reference_d: ReferencePoint<T>,
    pub stroke_time: Option<T>,
}

impl<T: Real> StrokeLedger<T> {
    pub fn finish(self) -> CycleResult<T> {
        let [ea, eb, ec, ed] = self.energies;
        let w = eb - ea + ed - ec;
        let q_h = ec - eb;
        let q_c = ea - ed;
        let engine = w < T::zero() && q_h > T::zero();
        let q_h_ref = ec - self.reference_b.energy;
        let q_c_ref = ea - self.reference_d.energy;
        let power = match (engine, self.stroke_time) {
            (true, Some(t)) if t > T::zero() => Some(-w / t),
            _ => None,
        };
        CycleResult {
            copies: self.copies,
            beta_c: self.beta_c,
            beta_h: self.beta_h,
            energies: self.energies,
            entropies: self.entropies,
            w,
            q_h,
            q_c,
            engine,
            eta: engine.then(|| -w / q_h),
            eta_carnot: T::one() - self.beta_h / self.beta_c,
            q_h_ref,
            q_c_ref,
            d_b: self.reference_b.relative_entropy,
            d_d: self.reference_d.relative_entropy,
            beta_b_ref: self.reference_b.beta,
            beta_d_ref: self.reference_d.beta,
            eta_manybody: T::one() + q_c_ref / q_h_ref,
            stroke_time: self.stroke_time,
            power,
        }
    }
}

/// Work, heats and reference-state quantities of one cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleResult<T> {
    pub copies: usize,
    pub beta_c: T,
    pub beta_h: T,
    /// `Tr[H_ν ρ_ν]` for `ν = A, B, C, D`.
    pub energies: [T; 4],
    /// `S(ρ_ν)` for `ν = A, B, C, D`.
    pub entropies: [T; 4],
    pub w: T,
    pub q_h: T,
    pub q_c: T,
    /// `W < 0` and `Q_h > 0`.
    pub engine: bool,
    /// `-W / Q_h`, only in the engine regime.
    pub eta: Option<T>,
    pub eta_carnot: T,
    /// `Tr[H_B ω_C] - Tr[H_B ω_B]`.
    pub q_h_ref: T,
    /// `Tr[H_A ω_A] - Tr[H_A ω_D]`.
    pub q_c_ref: T,
    /// `D(ρ_B‖ω_B)`.
    pub d_b: T,
    /// `D(ρ_D‖ω_D)`.
    pub d_d: T,
    pub beta_b_ref: T,
    pub beta_d_ref: T,
    /// `1 + Q_c^(ω)/Q_h^(ω)`; independent of the copy number.
    pub eta_manybody: T,
    /// Total duration of both unitary strokes (dense simulations only).
    pub stroke_time: Option<T>,
    /// `-W / stroke_time` in the engine regime; a convenience figure.
    pub power: Option<T>,
}

impl<T: Real> CycleResult<T> {
    /// `|W + Q_h + Q_c|`.
    pub fn first_law_defect(&self) -> T {
        (self.w + self.q_h + self.q_c).abs()
    }

    /// `D(ρ_B‖ω_B) / (β_B^(ω) Q_h^(ω))`, the distance of the compressed
    /// state from its reference relative to the reference heat.
    pub fn d_b_ratio(&self) -> T {
        self.d_b / (self.beta_b_ref * self.q_h_ref)
    }

    pub fn eta_over_carnot(&self) -> Option<T> {
        self.eta.map(|e| e / self.eta_carnot)
    }

    /// Largest absolute difference over all physical fields (metadata such
    /// as stroke time is ignored). Disagreeing regimes give `+∞`.
    pub fn max_deviation(&self, other: &Self) -> T {
        if self.copies != other.copies || self.engine != other.engine {
            return T::infinity();
        }
        let eta = match (self.eta, other.eta) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => T::zero(),
            _ => return T::infinity(),
        };
        let pairs = [
            (self.w, other.w),
            (self.q_h, other.q_h),
            (self.q_c, other.q_c),
            (self.eta_carnot, other.eta_carnot),
            (self.q_h_ref, other.q_h_ref),
            (self.q_c_ref, other.q_c_ref),
            (self.d_b, other.d_b),
            (self.d_d, other.d_d),
            (self.beta_b_ref, other.beta_b_ref),
            (self.beta_d_ref, other.beta_d_ref),
            (self.eta_manybody, other.eta_manybody),
        ];
        let mut m = eta;
        for (a, b) in pairs.iter().chain(self.energies.iter().zip(&other.energies).map(|(a, b)| (*a, *b)).collect::<Vec<_>>().iter()) {
            m = m.max((*a - *b).abs());
        }
        for (a, b) in self.entropies.iter().zip(&other.entropies) {
            m = m.max((*a - *b).abs());
        }
        m
    }
}

/// Corners and summary of a dense simulation.
#[derive(Clone, Debug)]
pub struct CycleOutcome<T> {
    pub points: [CyclePoint<T>; 4],
    pub result: CycleResult<T>,
    /// Integrator steps of the converged pulse propagation, if any.
    pub steps: Option<usize>,
}

pub(crate) fn check_betas<T: Real>(beta_c: T, beta_h: T) -> Result<()> {
    let ok = |b: T| b.is_finite() && b > T::zero();
    if !ok(beta_c) || !ok(beta_h) {
        return Err(QottoError::InvalidParams(format!(
            "bath inverse temperatures must be finite and positive, got beta_c = {beta_c}, beta_h = {beta_h}"
        )));
    }
    if beta_h > beta_c {
        return Err(QottoError::InvalidParams(format!(
            "the hot bath must not be colder than the cold bath: beta_h = {beta_h} > beta_c = {beta_c}"
        )));
    }
    Ok(())
}

/// Dense simulation of the cycle.
///
/// The ramp substroke is carried out analytically: the bare Hamiltonians
/// commute at all times and the thermal state is diagonal, so the ramp only
/// changes energies. The pulse substroke is integrated with automatic step
/// doubling; the expansion stroke runs the time-mirrored schedule.
pub fn run_cycle<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    beta_c: T,
    beta_h: T,
    control: StepControl,
) -> Result<CycleOutcome<T>> {
    check_betas(beta_c, beta_h)?;
    let h_a = schedule.hamiltonian_a();
    let h_b = schedule.hamiltonian_b();
    let endpoint_tol = T::tol(1e-12);
    let start = (&schedule.hamiltonian_at(schedule.t_a)? - &h_a).max_abs();
    let end = (&schedule.hamiltonian_at(schedule.t_b)? - &h_b).max_abs();
    if start > endpoint_tol || end > endpoint_tol {
        return Err(QottoError::InvalidSchedule(format!(
            "schedule endpoints deviate from the bare Hamiltonians by {start:e} at A and {end:e} at B"
        )));
    }
    let ea = h_a.diagonal();
    let eb = h_b.diagonal();

    let rho_a = gibbs_state(&h_a, beta_c)?;
    let rho_c = gibbs_state(&h_b, beta_h)?;
    let mut steps = None;
    let (rho_b, rho_d) = match schedule.pulse {
        PulseMode::None => (rho_a.clone(), rho_c.clone()),
        PulseMode::Perfect => {
            let crossings = schedule.crossings()?;
            (perfect_swap(&rho_a, &crossings, &eb)?, perfect_swap(&rho_c, &crossings, &ea)?)
        }
        PulseMode::FiniteTau(_) => {
            let forward = converged_propagator(&rho_a, schedule, schedule.t_ab, schedule.t_b, control)?;
            let mirror = Mirrored { inner: schedule, t0: schedule.t_ab, t1: schedule.t_b };
            let backward = converged_propagator(&rho_c, &mirror, schedule.t_ab, schedule.t_b, control)?;
            steps = Some(forward.steps.max(backward.steps));
            (rho_a.evolve(&forward.unitary), rho_c.evolve(&backward.unitary))
        }
    };

    let points = [
        CyclePoint::new(PointLabel::A, h_a.clone(), rho_a)?,
        CyclePoint::new(PointLabel::B, h_b.clone(), rho_b)?,
        CyclePoint::new(PointLabel::C, h_b, rho_c)?,
        CyclePoint::new(PointLabel::D, h_a, rho_d)?,
    ];
    let reference_b = dense_reference(&points[1])?;
    let reference_d = dense_reference(&points[3])?;
    let result = StrokeLedger {
        copies: schedule.copies,
        beta_c,
        beta_h,
        energies: [points[0].energy, points[1].energy, points[2].energy, points[3].energy],
        entropies: [points[0].entropy, points[1].entropy, points[2].entropy, points[3].entropy],
        reference_b,
        reference_d,
        stroke_time: Some(schedule.stroke_time()),
    }
    .finish();
    Ok(CycleOutcome { points, result, steps })
}

fn dense_reference<T: Real>(point: &CyclePoint<T>) -> Result<ReferencePoint<T>> {
    let r = reference_temperature_tagged(&point.hamiltonian, point.entropy, &point.label.to_string())?;
    Ok(ReferencePoint {
        beta: r.beta_ref,
        energy: r.omega.expectation(&point.hamiltonian),
        relative_entropy: relative_entropy_to_gibbs(&point.state, &point.hamiltonian, r.beta_ref)?,
    })
}

/// Thermal-reference decomposition of the efficiency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition<T> {
    /// `β_ν^(ω)` for `ν = A, B, C, D`.
    pub beta_ref: [T; 4],
    /// `D(ρ_ν‖ω_ν)` for `ν = A, B, C, D`.
    pub relative_entropy: [T; 4],
    pub q_h_ref: T,
    pub q_c_ref: T,
    /// `(D_B/β_B - D_C/β_C) / Q_h^(ω)`, the ratio of the geometric series.
    pub series_ratio: T,
    /// The geometric series converges (`|ratio| < 1`).
    pub series_valid: bool,
    /// Closed-form efficiency from reference heats and relative entropies.
    pub eta_closed: T,
    /// Geometric series truncated after [`SERIES_TERMS`] terms, when valid.
    pub eta_series: Option<T>,
    /// `-W / Q_h` from the actual stroke energies.
    pub eta_direct: T,
    /// `|eta_closed - eta_direct|`.
    pub agreement: T,
    /// Agreement within `1e-9`.
    pub agrees: bool,
}

/// Number of retained terms (`n = 0..=20`) of the truncated series.
pub const SERIES_TERMS: usize = 21;

/// Decomposes the efficiency of a cycle into reference-state heats and
/// relative entropies:
///
/// `η = 1 - [1 + D_D/(β_D(-Q_c^ω)) - D_A/(β_A(-Q_c^ω))]
///        / [1 - D_B/(β_B Q_h^ω) + D_C/(β_C Q_h^ω)] · (-Q_c^ω / Q_h^ω)`.
///
/// With thermal `ρ_A`, `ρ_C` the `A` and `C` terms vanish and the
/// denominator can be expanded as a geometric series in `D_B/(β_B Q_h^ω)`.
pub fn efficiency_decomposition<T: Real>(points: &[CyclePoint<T>; 4]) -> Result<Decomposition<T>> {
    let [a, b, c, d] = points;
    let ab = (b.entropy - a.entropy).abs();
    let cd = (d.entropy - c.entropy).abs();
    if ab > T::lit(1e-6) || cd > T::lit(1e-6) {
        return Err(QottoError::EntropyMismatch { ab: ab.to_f64().unwrap_or(f64::NAN), cd: cd.to_f64().unwrap_or(f64::NAN) });
    }
    let mut beta_ref = [T::zero(); 4];
    let mut rel = [T::zero(); 4];
    let mut omega_energy = [T::zero(); 4];
    // D/β, taken as the energy excess when the reference is at infinite temperature
    let mut excess = [T::zero(); 4];
    for (k, p) in points.iter().enumerate() {
        let r = reference_temperature_tagged(&p.hamiltonian, p.entropy, &p.label.to_string())?;
        beta_ref[k] = r.beta_ref;
        rel[k] = relative_entropy_to_gibbs(&p.state, &p.hamiltonian, r.beta_ref)?;
        omega_energy[k] = r.omega.expectation(&p.hamiltonian);
        excess[k] = if r.beta_ref > T::zero() { rel[k] / r.beta_ref } else { p.energy - omega_energy[k] };
    }
    // ω_C and ω_B both belong to H_B; ω_A and ω_D to H_A
    let q_h_ref = omega_energy[2] - omega_energy[1];
    let q_c_ref = omega_energy[0] - omega_energy[3];
    let cold = -q_c_ref;
    let numerator = T::one() + excess[3] / cold - excess[0] / cold;
    let series_ratio = (excess[1] - excess[2]) / q_h_ref;
    let denominator = T::one() - series_ratio;
    let eta_closed = T::one() - numerator / denominator * (cold / q_h_ref);
    let series_valid = series_ratio.abs() < T::one();
    let eta_series = series_valid.then(|| {
        let mut sum = T::zero();
        let mut term = T::one();
        for _ in 0..SERIES_TERMS {
            sum += term;
            term *= series_ratio;
        }
        T::one() - numerator * sum * (cold / q_h_ref)
    });
    let w = b.energy - a.energy + d.energy - c.energy;
    let q_h = c.energy - b.energy;
    let eta_direct = -w / q_h;
    let agreement = (eta_closed - eta_direct).abs();
    Ok(Decomposition {
        beta_ref,
        relative_entropy: rel,
        q_h_ref,
        q_c_ref,
        series_ratio,
        series_valid,
        eta_closed,
        eta_series,
        eta_direct,
        agreement,
        agrees: agreement <= T::tol(1e-9),
    })
}

/// Level-resolved work and heat of a cycle whose strokes permute populations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarnotCheck<T> {
    /// `Σ A_nm`.
    pub w: T,
    /// `Σ B_nm`.
    pub q_h: T,
    pub q_c: T,
    pub engine: bool,
    pub eta: Option<T>,
    pub eta_carnot: T,
    /// `η ≤ η_C + 1e-12` (vacuous outside the engine regime).
    pub within_bound: bool,
}

/// Work and hot heat of a permutation cycle from the level sums
///
/// `A_nm = (E_n(A) - E_m(B)) (p^h_m - p^c_n)`, `B_nm = E_m(B) (p^h_m - p^c_n)`,
///
/// summed over `m = permutation[n]`: the compression stroke carries the
/// population of `A`-level `n` to `B`-level `m`, the expansion stroke back.
pub fn carnot_swap_check<T: Real>(
    energies_a: &[T],
    energies_b: &[T],
    permutation: &[usize],
    beta_c: T,
    beta_h: T,
) -> Result<CarnotCheck<T>> {
    check_betas(beta_c, beta_h)?;
    let n = energies_a.len();
    if energies_b.len() != n || permutation.len() != n {
        return Err(QottoError::DimensionMismatch { expected: n, found: energies_b.len().max(permutation.len()) });
    }
    let mut seen = vec![false; n];
    for &m in permutation {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return Err(QottoError::InvalidParams(format!("{permutation:?} is not a permutation of 0..{n}")));
        }
    }
    let pc = boltzmann_populations(energies_a, beta_c)?;
    let ph = boltzmann_populations(energies_b, beta_h)?;
    let mut w = T::zero();
    let mut q_h = T::zero();
    for (k, &m) in permutation.iter().enumerate() {
        let flow = ph[m] - pc[k];
        w += (energies_a[k] - energies_b[m]) * flow;
        q_h += energies_b[m] * flow;
    }
    let engine = w < T::zero() && q_h > T::zero();
    let eta = engine.then(|| -w / q_h);
    let eta_carnot = T::one() - beta_h / beta_c;
    Ok(CarnotCheck {
        w,
        q_h,
        q_c: -w - q_h,
        engine,
        eta,
        eta_carnot,
        within_bound: eta.is_none_or(|e| e <= eta_carnot + T::tol(1e-12)),
    })
}

/// Level map of the perfect-swap compression stroke: `A`-level `n` ends on
/// `B`-level `map[n]`.
pub fn perfect_swap_permutation<T: Real>(params: &QutritParams<T>, copies: usize, beta_c: T) -> Result<Vec<usize>> {
    let crossed = crossed_indices(&detect_crossings(params, copies)?);
    let ea = collective_energies(&params.energies_a(), copies);
    let eb = collective_energies(&params.energies_b(), copies);
    let pa = boltzmann_populations(&ea, beta_c)?;
    let sub_p: Vec<T> = crossed.iter().map(|&i| pa[i]).collect();
    let sub_e: Vec<T> = crossed.iter().map(|&i| eb[i]).collect();
    let mut map: Vec<usize> = (0..ea.len()).collect();
    for (k, &s) in passivizing_assignment(&sub_p, &sub_e).iter().enumerate() {
        map[crossed[s]] = crossed[k];
    }
    Ok(map)
}

/// Entropy-balance margins of the second law for both equilibration strokes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondLawCheck<T> {
    /// `S_C - S_B`.
    pub delta_s_bc: T,
    /// `S_A - S_D`.
    pub delta_s_da: T,
    /// `ΔS_BC - β_h Q_h`.
    pub margin_hot: T,
    /// `ΔS_DA - β_c Q_c`.
    pub margin_cold: T,
    /// `ΔS_BC + ΔS_DA`, zero for a closed cycle with isentropic strokes.
    pub cyclicity: T,
    /// Both margins `≥ -1e-9` and `|cyclicity| ≤ 1e-9`.
    pub holds: bool,
}

fn second_law_from<T: Real>(result: &CycleResult<T>, q_h: T, q_c: T) -> SecondLawCheck<T> {
    let [sa, sb, sc, sd] = result.entropies;
    let delta_s_bc = sc - sb;
    let delta_s_da = sa - sd;
    let margin_hot = delta_s_bc - result.beta_h * q_h;
    let margin_cold = delta_s_da - result.beta_c * q_c;
    let cyclicity = delta_s_bc + delta_s_da;
    let tol = T::tol(1e-9);
    SecondLawCheck {
        delta_s_bc,
        delta_s_da,
        margin_hot,
        margin_cold,
        cyclicity,
        holds: margin_hot >= -tol && margin_cold >= -tol && cyclicity.abs() <= tol,
    }
}

/// `ΔS_BC - β_h Q_h ≥ 0` and `ΔS_DA - β_c Q_c ≥ 0`.
pub fn second_law_check<T: Real>(result: &CycleResult<T>) -> SecondLawCheck<T> {
    second_law_from(result, result.q_h, result.q_c)
}

/// The same inequalities with the reference heats `Q^(ω)` in place of `Q`.
pub fn reference_second_law_check<T: Real>(result: &CycleResult<T>) -> SecondLawCheck<T> {
    second_law_from(result, result.q_h_ref, result.q_c_ref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{diagonal_cycle, StrokeMode};

    fn fig2ab() -> QutritParams<f64> {
        QutritParams::new(0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0).unwrap()
    }

    fn dense(copies: usize, pulse: PulseMode<f64>) -> CycleOutcome<f64> {
        let s = HamiltonianSchedule::with_default_swaps(fig2ab(), copies, 1.0, pulse).unwrap();
        run_cycle(&s, 6.66, 3.28, StepControl::default()).unwrap()
    }

    #[test]
    fn single_copy_reference_values() {
        let r = dense(1, PulseMode::None).result;
        assert!((r.w - 6.83215e-5).abs() < 1e-9, "{}", r.w);
        assert!(!r.engine && r.eta.is_none());
        assert!(r.first_law_defect() < 1e-15);
    }

    #[test]
    fn two_copy_perfect_swap_reference_values() {
        let r = dense(2, PulseMode::Perfect).result;
        assert!((r.w / 2.0 + 0.00450775).abs() < 1e-8, "{}", r.w);
        assert!((r.eta.unwrap() - 0.13720473).abs() < 1e-7);
    }

    #[test]
    fn equal_temperatures_give_no_engine() {
        let s = HamiltonianSchedule::with_default_swaps(fig2ab(), 2, 1.0, PulseMode::Perfect).unwrap();
        let r = run_cycle(&s, 3.0, 3.0, StepControl::default()).unwrap().result;
        assert!(r.w >= 0.0);
        assert_eq!(r.eta_carnot, 0.0);
        let second = second_law_check(&r);
        assert!(second.holds);
        // margins are the relative entropies to the common bath state
        assert!(second.margin_hot >= 0.0 && second.margin_cold >= 0.0);
    }

    #[test]
    fn hot_colder_than_cold_rejected() {
        let s = HamiltonianSchedule::with_default_swaps(fig2ab(), 1, 1.0, PulseMode::None).unwrap();
        assert!(run_cycle(&s, 1.0, 2.0, StepControl::default()).is_err());
        assert!(run_cycle(&s, f64::NAN, 1.0, StepControl::default()).is_err());
    }

    #[test]
    fn decomposition_of_perfect_swap_cycle() {
        let out = dense(2, PulseMode::Perfect);
        let d = efficiency_decomposition(&out.points).unwrap();
        assert!(d.agrees, "{}", d.agreement);
        assert!(d.relative_entropy[0] < 1e-12 && d.relative_entropy[2] < 1e-12);
        assert!((d.q_h_ref - out.result.q_h_ref).abs() < 1e-12);
        assert!(d.series_valid);
    }

    #[test]
    fn all_thermal_points_decompose_to_reference_efficiency() {
        let h_a = ComplexMatrix::from_real_diagonal(&[0.0, 0.3, 1.0]);
        let h_b = ComplexMatrix::from_real_diagonal(&[0.0, 0.6, 1.0]);
        let pt = |l, h: &ComplexMatrix<f64>, beta| CyclePoint::new(l, h.clone(), gibbs_state(h, beta).unwrap()).unwrap();
        let a = pt(PointLabel::A, &h_a, 4.0);
        let s_a = a.entropy;
        let b_ref = reference_temperature_tagged(&h_b, s_a, "B").unwrap();
        let c = pt(PointLabel::C, &h_b, 2.0);
        let d_ref = reference_temperature_tagged(&h_a, c.entropy, "D").unwrap();
        let b = CyclePoint::new(PointLabel::B, h_b.clone(), b_ref.omega).unwrap();
        let d = CyclePoint::new(PointLabel::D, h_a.clone(), d_ref.omega).unwrap();
        let dec = efficiency_decomposition(&[a, b, c, d]).unwrap();
        assert!(dec.relative_entropy.iter().all(|&x| x < 1e-12));
        assert!((dec.eta_closed - (1.0 + dec.q_c_ref / dec.q_h_ref)).abs() < 1e-12);
        assert!(dec.agrees);
    }

    #[test]
    fn carnot_boundary_for_matched_ratio() {
        // E_A / E_B = β_h / β_c: both strokes leave populations thermal
        let (bc, bh) = (2.0, 1.0);
        let check = carnot_swap_check(&[0.0f64, 0.5], &[0.0, 1.0], &[0, 1], bc, bh).unwrap();
        assert!(check.w.abs() < 1e-15 && check.q_h.abs() < 1e-15);
        let near = carnot_swap_check(&[0.0f64, 0.51], &[0.0, 1.0], &[0, 1], bc, bh).unwrap();
        assert!(near.engine);
        let eta = near.eta.unwrap();
        assert!((eta - 0.49).abs() < 1e-12 && eta < near.eta_carnot);
    }

    #[test]
    fn carnot_sums_match_diagonal_cycle() {
        let p = fig2ab();
        let map = perfect_swap_permutation(&p, 2, 6.66).unwrap();
        let ea = collective_energies(&p.energies_a(), 2);
        let eb = collective_energies(&p.energies_b(), 2);
        let check = carnot_swap_check(&ea, &eb, &map, 6.66, 3.28).unwrap();
        let r = diagonal_cycle(&p, 2, 6.66, 3.28, StrokeMode::PerfectSwap).unwrap();
        assert!((check.w - r.w).abs() < 1e-12);
        assert!((check.q_h - r.q_h).abs() < 1e-12);
        assert!(check.within_bound);
    }

    #[test]
    fn non_permutation_rejected() {
        assert!(carnot_swap_check(&[0.0, 1.0], &[0.0, 1.0], &[0, 0], 2.0, 1.0).is_err());
    }
}
