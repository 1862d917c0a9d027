//! The qutrit many-copy protocol: single-copy and collective Hamiltonians,
//! the energy ramp and swap pulse, collective level crossings, perfect swaps
//! and the level-resolved diagonal cycle.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cycle::{check_betas, CycleResult, ReferencePoint, StrokeLedger};
use crate::error::{QottoError, Result};
use crate::linalg::ComplexMatrix;
use crate::occupation::{class_energy, class_gap_sign, energy_scale, occupation_classes, occupation_of, Occupation};
use crate::passivity::{
    apply_assignment, passivizing_assignment, reference_beta, relative_entropy_to_thermal, thermal_energy,
    thermal_entropy,
};
use crate::propagate::TimeDependentHamiltonian;
use crate::scalar::{Field, Real};
use crate::state::{boltzmann_populations, shannon_entropy, DensityMatrix};

/// Largest copy number for dense `3^N × 3^N` Hamiltonians.
pub const MAX_DENSE_COPIES: usize = 3;
/// Largest copy number for `3^N` population vectors.
pub const MAX_DIAGONAL_COPIES: usize = 13;

/// Single-copy energies `E0 < E1(t) < E2`, with `E1` ramped linearly from
/// `e1_initial` to `e1_initial + e1_shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QutritParams<T> {
    pub e0: T,
    pub e1_initial: T,
    pub e1_shift: T,
    pub e2: T,
}

impl<T: Field> QutritParams<T> {
    /// Validated parameters; `E1` must stay strictly inside `(E0, E2)`.
    pub fn new(e0: T, e1_initial: T, e1_shift: T, e2: T) -> Result<Self> {
        let p = Self { e0, e1_initial, e1_shift, e2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let e1_final = self.e1_final();
        let inside = |e1: &T| self.e0 < *e1 && *e1 < self.e2;
        if !inside(&self.e1_initial) || !inside(&e1_final) {
            return Err(QottoError::InvalidParams(format!(
                "E0 < E1(t) < E2 violated: E0 = {}, E1 from {} to {}, E2 = {}",
                self.e0, self.e1_initial, e1_final, self.e2
            )));
        }
        Ok(())
    }

    pub fn e1_final(&self) -> T {
        self.e1_initial.clone() + self.e1_shift.clone()
    }

    /// `E1` at ramp fraction `s ∈ [0, 1]`.
    pub fn e1_at(&self, s: T) -> T {
        self.e1_initial.clone() + self.e1_shift.clone() * s
    }

    pub fn energies_at(&self, s: T) -> [T; 3] {
        [self.e0.clone(), self.e1_at(s), self.e2.clone()]
    }

    /// Single-copy energies at `A` (start of the ramp).
    pub fn energies_a(&self) -> [T; 3] {
        [self.e0.clone(), self.e1_initial.clone(), self.e2.clone()]
    }

    /// Single-copy energies at `B` (end of the ramp).
    pub fn energies_b(&self) -> [T; 3] {
        [self.e0.clone(), self.e1_final(), self.e2.clone()]
    }

    /// Ramp fraction at which `E1` takes the value `e1`.
    pub fn fraction_of(&self, e1: T) -> T {
        (e1 - self.e1_initial.clone()) / self.e1_shift.clone()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> QutritParams<U> {
        QutritParams { e0: f(&self.e0), e1_initial: f(&self.e1_initial), e1_shift: f(&self.e1_shift), e2: f(&self.e2) }
    }

    pub fn to_f64(&self) -> QutritParams<f64> {
        self.map(Field::approx_f64)
    }
}

/// Collective basis label `|n_1, …, n_N⟩`, left digit most significant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LevelWord(Vec<u8>);

impl LevelWord {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if digits.is_empty() || digits.iter().any(|&d| d > 2) {
            return Err(QottoError::InvalidParams(format!("level word {digits:?} must be a non-empty word over {{0,1,2}}")));
        }
        Ok(Self(digits))
    }

    pub fn from_index(mut index: usize, copies: usize) -> Self {
        let mut digits = vec![0; copies];
        for d in digits.iter_mut().rev() {
            *d = (index % 3) as u8;
            index /= 3;
        }
        Self(digits)
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn copies(&self) -> usize {
        self.0.len()
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &d| 3 * acc + d as usize)
    }

    pub fn occupation(&self) -> Occupation {
        occupation_of(&self.0)
    }

    pub fn energy<T: Field>(&self, single: &[T; 3]) -> T {
        class_energy(&self.occupation(), single)
    }
}

impl fmt::Display for LevelWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All words of one occupation class, in ascending lexicographic order.
pub fn words_of_class(class: &Occupation) -> Vec<LevelWord> {
    fn fill(left: [usize; 3], prefix: &mut Vec<u8>, out: &mut Vec<LevelWord>) {
        if left.iter().all(|&k| k == 0) {
            out.push(LevelWord(prefix.clone()));
            return;
        }
        for d in 0..3 {
            if left[d] > 0 {
                let mut next = left;
                next[d] -= 1;
                prefix.push(d as u8);
                fill(next, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    fill(*class, &mut Vec::new(), &mut out);
    out
}

/// The pair of collective levels coupled by the swap pulse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapSpec {
    pub first: LevelWord,
    pub second: LevelWord,
}

impl SwapSpec {
    pub fn new(first: LevelWord, second: LevelWord) -> Result<Self> {
        if first == second || first.copies() != second.copies() {
            return Err(QottoError::InvalidSchedule(format!("swap pair {first} <-> {second} is not two distinct levels")));
        }
        Ok(Self { first, second })
    }
}

/// How the swap substroke is executed in the dense simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseMode<T> {
    /// No pulse: a quantum-adiabatic stroke.
    None,
    /// The sinusoidal pulse of duration `tau`, integrated in time.
    FiniteTau(T),
    /// The `τ → 0` limit: an exact population permutation.
    Perfect,
}

/// Stroke type of the population-only cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrokeMode {
    #[serde(alias = "qa")]
    QuantumAdiabatic,
    #[serde(alias = "perfect")]
    PerfectSwap,
}

/// Two occupation classes whose collective levels cross during the ramp.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingGroup<T> {
    /// Class lying lower at `A` (and higher at `B`).
    pub lower_at_a: Occupation,
    /// Class lying higher at `A` (and lower at `B`).
    pub upper_at_a: Occupation,
    pub lower_words: Vec<LevelWord>,
    pub upper_words: Vec<LevelWord>,
    /// Value of `E1` at the crossing.
    pub e1_crossing: T,
    /// Ramp fraction `(t - t_A) / (t_AB - t_A)` of the crossing.
    pub ramp_fraction: T,
}

impl<T> CrossingGroup<T> {
    /// Default coupled pair: the lexicographically smallest word of each class.
    pub fn default_swap(&self) -> SwapSpec {
        let a = self.lower_words[0].clone();
        let b = self.upper_words[0].clone();
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        SwapSpec { first, second }
    }

    pub fn words(&self) -> impl Iterator<Item = &LevelWord> {
        self.lower_words.iter().chain(&self.upper_words)
    }
}

/// Pairs of occupation classes whose energy order strictly flips between
/// `A` and `B`, without enumerating words. Valid for any copy number.
pub fn crossing_class_pairs<T: Field>(params: &QutritParams<T>, copies: usize) -> Vec<(Occupation, Occupation, T)> {
    let at_a = params.energies_a();
    let at_b = params.energies_b();
    let scale_a = energy_scale(copies, &at_a);
    let scale_b = energy_scale(copies, &at_b);
    let classes = occupation_classes(copies);
    let mut out = Vec::new();
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            let sa = class_gap_sign(a, b, &at_a, &scale_a);
            let sb = class_gap_sign(a, b, &at_b, &scale_b);
            if sa == Ordering::Equal || sb == Ordering::Equal || sa == sb {
                continue;
            }
            let (lower, upper) = if sa == Ordering::Less { (*a, *b) } else { (*b, *a) };
            // E_lower - E_upper = Δk1 (E1 - E0) + Δk2 (E2 - E0) vanishes at the crossing
            let dk1 = lower[1] as i64 - upper[1] as i64;
            let dk2 = lower[2] as i64 - upper[2] as i64;
            let to_t = |k: i64| {
                let mut acc = T::zero();
                for _ in 0..k.unsigned_abs() {
                    acc = acc + T::one();
                }
                if k < 0 {
                    -acc
                } else {
                    acc
                }
            };
            let e1 = params.e0.clone() - to_t(dk2) * (params.e2.clone() - params.e0.clone()) / to_t(dk1);
            out.push((lower, upper, e1));
        }
    }
    out.sort_by(|x, y| x.2.partial_cmp(&y.2).unwrap_or(Ordering::Equal).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    out
}

/// Collective level crossings of the bare additive spectrum during the ramp.
///
/// Each group collects the words of two occupation classes; words related
/// by permuting copies always share a class. Groups are sorted by crossing
/// time.
pub fn detect_crossings<T: Field>(params: &QutritParams<T>, copies: usize) -> Result<Vec<CrossingGroup<T>>> {
    check_copies(copies, MAX_DIAGONAL_COPIES)?;
    Ok(crossing_class_pairs(params, copies)
        .into_iter()
        .map(|(lower, upper, e1)| CrossingGroup {
            lower_at_a: lower,
            upper_at_a: upper,
            lower_words: words_of_class(&lower),
            upper_words: words_of_class(&upper),
            ramp_fraction: params.fraction_of(e1.clone()),
            e1_crossing: e1,
        })
        .collect())
}

fn check_copies(copies: usize, limit: usize) -> Result<()> {
    if copies == 0 {
        return Err(QottoError::InvalidParams("at least one copy is required".into()));
    }
    if copies > limit {
        return Err(QottoError::DimensionTooLarge { dim: 3usize.saturating_pow(copies as u32), limit: 3usize.pow(limit as u32) });
    }
    Ok(())
}

/// Sorted, de-duplicated collective indices of all words in `groups`.
pub fn crossed_indices<T>(groups: &[CrossingGroup<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = groups.iter().flat_map(|g| g.words().map(LevelWord::index)).collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Collective energies `E_n = Σ_i E_{n_i}` of all `3^N` words.
pub fn collective_energies<T: Real>(single: &[T; 3], copies: usize) -> Vec<T> {
    let mut energies = vec![T::zero()];
    for _ in 0..copies {
        energies = energies.iter().flat_map(|&e| single.iter().map(move |&s| e + s)).collect();
    }
    energies
}

/// Product populations `Π_i p_{n_i}` of all `3^N` words.
pub fn product_populations<T: Real>(single: &[T], copies: usize) -> Vec<T> {
    let mut pops = vec![T::one()];
    for _ in 0..copies {
        pops = pops.iter().flat_map(|&p| single.iter().map(move |&s| p * s)).collect();
    }
    pops
}

/// Passivizes `populations` over the levels in `subset` only.
pub fn passivize_subset<T: Real>(populations: &[T], energies: &[T], subset: &[usize]) -> Vec<T> {
    let sub_p: Vec<T> = subset.iter().map(|&i| populations[i]).collect();
    let sub_e: Vec<T> = subset.iter().map(|&i| energies[i]).collect();
    let moved = apply_assignment(&sub_p, &passivizing_assignment(&sub_p, &sub_e));
    let mut out = populations.to_vec();
    for (&i, p) in subset.iter().zip(moved) {
        out[i] = p;
    }
    out
}

/// Exchanges the populations of each default pair, pair by pair.
pub fn pairwise_swap<T: Real>(populations: &[T], swaps: &[SwapSpec]) -> Vec<T> {
    let mut out = populations.to_vec();
    for s in swaps {
        out.swap(s.first.index(), s.second.index());
    }
    out
}

/// Perfect swap of a state diagonal in the collective product basis:
/// passivization with respect to `energies` over every crossed level.
pub fn perfect_swap<T: Real>(
    rho: &DensityMatrix<T>,
    crossings: &[CrossingGroup<T>],
    energies: &[T],
) -> Result<DensityMatrix<T>> {
    if rho.dim() != energies.len() {
        return Err(QottoError::DimensionMismatch { expected: energies.len(), found: rho.dim() });
    }
    let off = rho.matrix().max_off_diagonal();
    if off > T::tol(1e-10) {
        return Err(QottoError::NotDiagonal { off_diagonal: off.to_f64().unwrap_or(f64::NAN) });
    }
    let pops = passivize_subset(&rho.populations(), energies, &crossed_indices(crossings));
    DensityMatrix::from_populations(&pops)
}

/// `f(t) = π²/(4τ) sin(π (t - t_AB)/τ)` on `[t_AB, t_AB + τ]`, zero elsewhere.
pub fn pulse_amplitude<T: Real>(t: T, t_ab: T, tau: T) -> T {
    let x = (t - t_ab) / tau;
    // compare absolute times too: t_ab + τ need not round back to x = 1
    if x <= T::zero() || x >= T::one() || t >= t_ab + tau {
        return T::zero();
    }
    T::PI() * T::PI() / (T::lit(4.0) * tau) * (T::PI() * x).sin()
}

/// Piecewise Hamiltonian `H_N(t)` of the compression stroke: a linear `E1`
/// ramp on `[t_A, t_AB]` followed by the swap pulse on `[t_AB, t_B]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSchedule<T> {
    pub params: QutritParams<T>,
    pub copies: usize,
    pub t_a: T,
    pub t_ab: T,
    pub t_b: T,
    pub pulse: PulseMode<T>,
    pub swaps: Vec<SwapSpec>,
}

impl<T: Real> HamiltonianSchedule<T> {
    /// Schedule with explicit swap pairs.
    pub fn new(
        params: QutritParams<T>,
        copies: usize,
        ramp_duration: T,
        pulse: PulseMode<T>,
        swaps: Vec<SwapSpec>,
    ) -> Result<Self> {
        params.validate()?;
        check_copies(copies, MAX_DENSE_COPIES)?;
        if ramp_duration < T::zero() || !ramp_duration.is_finite() {
            return Err(QottoError::InvalidSchedule(format!("ramp duration must be finite and >= 0, got {ramp_duration}")));
        }
        let window = match pulse {
            PulseMode::FiniteTau(tau) => {
                if tau <= T::zero() || !tau.is_finite() {
                    return Err(QottoError::InvalidSchedule(format!("pulse duration must be positive, got {tau}")));
                }
                tau
            }
            _ => T::zero(),
        };
        for s in &swaps {
            if s.first.copies() != copies || s.second.copies() != copies {
                return Err(QottoError::InvalidSchedule(format!(
                    "swap pair {} <-> {} does not match {copies} copies",
                    s.first, s.second
                )));
            }
            if s.first == s.second {
                return Err(QottoError::InvalidSchedule(format!("swap pair {} couples a level to itself", s.first)));
            }
        }
        if matches!(pulse, PulseMode::FiniteTau(_)) && swaps.is_empty() {
            return Err(QottoError::InvalidSchedule("finite-tau pulse without a swap pair".into()));
        }
        Ok(Self { params, copies, t_a: T::zero(), t_ab: ramp_duration, t_b: ramp_duration + window, pulse, swaps })
    }

    /// Schedule coupling the default pair of every detected crossing group.
    pub fn with_default_swaps(params: QutritParams<T>, copies: usize, ramp_duration: T, pulse: PulseMode<T>) -> Result<Self> {
        let swaps = match pulse {
            PulseMode::None => Vec::new(),
            _ => detect_crossings(&params, copies)?.iter().map(CrossingGroup::default_swap).collect(),
        };
        // without crossings a pulse has nothing to do
        let pulse = if swaps.is_empty() { PulseMode::None } else { pulse };
        Self::new(params, copies, ramp_duration, pulse, swaps)
    }

    pub fn crossings(&self) -> Result<Vec<CrossingGroup<T>>> {
        detect_crossings(&self.params, self.copies)
    }

    /// Time at ramp fraction `s`.
    pub fn time_at_fraction(&self, s: T) -> T {
        self.t_a + (self.t_ab - self.t_a) * s
    }

    /// Ramp fraction at time `t`, clamped to `[0, 1]`.
    pub fn ramp_fraction(&self, t: T) -> T {
        let span = self.t_ab - self.t_a;
        if span <= T::zero() {
            return if t > self.t_ab { T::one() } else { T::zero() };
        }
        ((t - self.t_a) / span).max(T::zero()).min(T::one())
    }

    pub fn pulse_at(&self, t: T) -> T {
        match self.pulse {
            PulseMode::FiniteTau(tau) => pulse_amplitude(t, self.t_ab, tau),
            _ => T::zero(),
        }
    }

    /// Collective energies (diagonal of `H_N`) at ramp fraction `s`.
    pub fn energies_at_fraction(&self, s: T) -> Vec<T> {
        collective_energies(&self.params.energies_at(s), self.copies)
    }

    /// Bare collective Hamiltonian at `A`.
    pub fn hamiltonian_a(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_real_diagonal(&self.energies_at_fraction(T::zero()))
    }

    /// Bare collective Hamiltonian at `B`.
    pub fn hamiltonian_b(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_real_diagonal(&self.energies_at_fraction(T::one()))
    }

    /// Total duration of both unitary strokes.
    pub fn stroke_time(&self) -> T {
        (self.t_b - self.t_a) * T::lit(2.0)
    }
}

impl<T: Real> TimeDependentHamiltonian<T> for HamiltonianSchedule<T> {
    fn dim(&self) -> usize {
        3usize.pow(self.copies as u32)
    }

    fn hamiltonian_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        collective_hamiltonian(self, t)
    }
}

/// `H_N(t) = Σ_i H_QT^i(t) + f(t) Σ_pairs (|n⟩⟨m| + |m⟩⟨n|)`.
pub fn collective_hamiltonian<T: Real>(schedule: &HamiltonianSchedule<T>, t: T) -> Result<ComplexMatrix<T>> {
    check_copies(schedule.copies, MAX_DENSE_COPIES)?;
    let mut h = ComplexMatrix::from_real_diagonal(&schedule.energies_at_fraction(schedule.ramp_fraction(t)));
    let f = schedule.pulse_at(t);
    if f != T::zero() {
        for s in &schedule.swaps {
            let (n, m) = (s.first.index(), s.second.index());
            h[(n, m)] += Complex::new(f, T::zero());
            h[(m, n)] += Complex::new(f, T::zero());
        }
    }
    Ok(h)
}

/// Perfect-swap or quantum-adiabatic cycle on the `3^N` population vector.
pub fn diagonal_cycle<T: Real>(
    params: &QutritParams<T>,
    copies: usize,
    beta_c: T,
    beta_h: T,
    mode: StrokeMode,
) -> Result<CycleResult<T>> {
    params.validate()?;
    check_copies(copies, MAX_DIAGONAL_COPIES)?;
    check_betas(beta_c, beta_h)?;
    let ea = collective_energies(&params.energies_a(), copies);
    let eb = collective_energies(&params.energies_b(), copies);
    let pa = product_populations(&boltzmann_populations(&params.energies_a(), beta_c)?, copies);
    let pc = product_populations(&boltzmann_populations(&params.energies_b(), beta_h)?, copies);
    let (pb, pd) = match mode {
        StrokeMode::QuantumAdiabatic => (pa.clone(), pc.clone()),
        StrokeMode::PerfectSwap => {
            let crossed = crossed_indices(&detect_crossings(params, copies)?);
            (passivize_subset(&pa, &eb, &crossed), passivize_subset(&pc, &ea, &crossed))
        }
    };
    let mean = |p: &[T], e: &[T]| p.iter().zip(e).fold(T::zero(), |s, (&p, &e)| s + p * e);
    let reference = |p: &[T], e: &[T]| -> Result<ReferencePoint<T>> {
        let beta = reference_beta(e, shannon_entropy(p))?;
        Ok(ReferencePoint {
            beta,
            energy: thermal_energy(e, beta),
            relative_entropy: relative_entropy_to_thermal(p, e, beta).max(T::zero()),
        })
    };
    Ok(StrokeLedger {
        copies,
        beta_c,
        beta_h,
        energies: [mean(&pa, &ea), mean(&pb, &eb), mean(&pc, &eb), mean(&pd, &ea)],
        entropies: [&pa, &pb, &pc, &pd].map(|p| shannon_entropy(p)),
        reference_b: reference(&pb, &eb)?,
        reference_d: reference(&pd, &ea)?,
        stroke_time: None,
    }
    .finish())
}

/// Per-copy reference quantities of the `N → ∞` cooperative limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManyBodyLimit<T> {
    pub eta: T,
    pub beta_b_ref: T,
    pub beta_d_ref: T,
    /// Per-copy reference heats.
    pub q_h_ref: T,
    pub q_c_ref: T,
    /// `Q_h^(ω) > 0` and `Q_c^(ω) < 0`: the limit describes an engine.
    pub engine: bool,
}

/// `1 + Q_c^(ω)/Q_h^(ω)` from per-copy reference states (the reference heats
/// are extensive, so one copy suffices).
pub fn many_body_limit<T: Real>(params: &QutritParams<T>, beta_c: T, beta_h: T) -> Result<ManyBodyLimit<T>> {
    params.validate()?;
    check_betas(beta_c, beta_h)?;
    let ea = params.energies_a();
    let eb = params.energies_b();
    let beta_b_ref = reference_beta(&eb, thermal_entropy(&ea, beta_c))?;
    let beta_d_ref = reference_beta(&ea, thermal_entropy(&eb, beta_h))?;
    let q_h_ref = thermal_energy(&eb, beta_h) - thermal_energy(&eb, beta_b_ref);
    let q_c_ref = thermal_energy(&ea, beta_c) - thermal_energy(&ea, beta_d_ref);
    let engine = q_h_ref > T::zero() && q_c_ref < T::zero() && q_h_ref + q_c_ref > T::zero();
    let eta = if q_h_ref.abs() > T::min_positive_value() { T::one() + q_c_ref / q_h_ref } else { T::zero() };
    Ok(ManyBodyLimit { eta, beta_b_ref, beta_d_ref, q_h_ref, q_c_ref, engine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn fig2ab() -> QutritParams<f64> {
        QutritParams::new(0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0).unwrap()
    }

    fn fig2d() -> QutritParams<f64> {
        QutritParams::new(0.0, 0.57, 0.35, 1.0).unwrap()
    }

    fn word(d: &[u8]) -> LevelWord {
        LevelWord::new(d.to_vec()).unwrap()
    }

    #[test]
    fn params_window_enforced() {
        assert!(QutritParams::new(0.0, 0.5, 0.6, 1.0).is_err());
        assert!(QutritParams::new(0.0, 0.0, 0.2, 1.0).is_err());
        assert!(QutritParams::new(0.0, 0.2, 0.2, 1.0).is_ok());
    }

    #[test]
    fn word_index_round_trip() {
        for i in 0..27 {
            assert_eq!(LevelWord::from_index(i, 3).index(), i);
        }
        assert_eq!(word(&[1, 1]).index(), 4);
        assert_eq!(word(&[0, 2]).to_string(), "(0,2)");
        assert!(LevelWord::new(vec![3]).is_err());
    }

    #[test]
    fn single_copy_hamiltonian_is_the_qutrit() {
        let s = HamiltonianSchedule::new(fig2ab(), 1, 1.0, PulseMode::None, vec![]).unwrap();
        let h = collective_hamiltonian(&s, 0.5).unwrap();
        assert_eq!(h.diagonal(), vec![0.0, 0.5, 1.0]);
        assert_eq!(h.max_off_diagonal(), 0.0);
    }

    #[test]
    fn two_copy_pulse_couples_only_the_pair() {
        let s = HamiltonianSchedule::with_default_swaps(fig2ab(), 2, 1.0, PulseMode::FiniteTau(0.2)).unwrap();
        assert_eq!(s.swaps, vec![SwapSpec::new(word(&[0, 2]), word(&[1, 1])).unwrap()]);
        let h = collective_hamiltonian(&s, 1.1).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let coupled = (i, j) == (2, 4) || (i, j) == (4, 2);
                if i != j {
                    assert_eq!(h[(i, j)].norm() > 0.0, coupled, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn pulse_area_is_half_pi() {
        let tau = 0.37;
        let n = 20_000;
        let dt = tau / n as f64;
        // Simpson's rule on the smooth window
        let mut sum = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * pulse_amplitude(2.0 + k as f64 * dt, 2.0, tau);
        }
        let area = sum * dt / 3.0;
        assert!((area - std::f64::consts::FRAC_PI_2).abs() < 1e-10, "{area}");
        assert_eq!(pulse_amplitude(2.0, 2.0, tau), 0.0);
        assert_eq!(pulse_amplitude(2.0 + tau, 2.0, tau), 0.0);
    }

    #[test]
    fn dense_guard() {
        assert!(HamiltonianSchedule::new(fig2ab(), 4, 1.0, PulseMode::None, vec![]).is_err());
    }

    #[test]
    fn crossings_fig2ab_two_copies() {
        let g = detect_crossings(&fig2ab(), 2).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].lower_words, vec![word(&[1, 1])]);
        assert_eq!(g[0].upper_words, vec![word(&[0, 2]), word(&[2, 0])]);
        assert!((g[0].e1_crossing - 0.5).abs() < 1e-15);
        assert!((g[0].ramp_fraction - 0.5).abs() < 1e-15);
    }

    #[test]
    fn crossings_exact_with_rationals() {
        let p = QutritParams::new(
            Rational64::from_integer(0),
            Rational64::new(57, 100),
            Rational64::new(35, 100),
            Rational64::from_integer(1),
        )
        .unwrap();
        assert!(detect_crossings(&p, 2).unwrap().is_empty());
        let g = detect_crossings(&p, 3).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].e1_crossing, Rational64::new(2, 3));
        assert_eq!(g[0].lower_words, vec![word(&[1, 1, 1])]);
        assert_eq!(g[0].upper_words, vec![word(&[0, 2, 2]), word(&[2, 0, 2]), word(&[2, 2, 0])]);
    }

    #[test]
    fn crossings_fig2d_float_match_rational() {
        assert!(detect_crossings(&fig2d(), 2).unwrap().is_empty());
        let g = detect_crossings(&fig2d(), 3).unwrap();
        assert_eq!(g.len(), 1);
        assert!((g[0].e1_crossing - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_swap_exchanges_pair_populations() {
        let p = fig2ab();
        let groups = detect_crossings(&p, 2).unwrap();
        let pa = product_populations(&boltzmann_populations(&p.energies_a(), 6.66).unwrap(), 2);
        let rho = DensityMatrix::from_populations(&pa).unwrap();
        let eb = collective_energies(&p.energies_b(), 2);
        let out = perfect_swap(&rho, &groups, &eb).unwrap().populations();
        assert_eq!(out[2], pa[4]);
        assert_eq!(out[4], pa[2]);
        let swaps: Vec<SwapSpec> = groups.iter().map(CrossingGroup::default_swap).collect();
        assert_eq!(pairwise_swap(&pa, &swaps), out);
    }

    #[test]
    fn perfect_swap_rejects_coherences() {
        let p = fig2ab();
        let groups = detect_crossings(&p, 1).unwrap();
        let plus = DensityMatrix::pure(&[Complex::new(0.6, 0.0), Complex::new(0.8, 0.0), Complex::new(0.0, 0.0)]).unwrap();
        let e = collective_energies(&p.energies_b(), 1);
        assert!(perfect_swap(&plus, &groups, &e).is_err());
    }

    #[test]
    fn qa_cycle_efficiency_is_copy_independent() {
        let p = fig2d();
        let one = diagonal_cycle(&p, 1, 2.22, 1.09, StrokeMode::QuantumAdiabatic).unwrap();
        for n in 2..=4 {
            let r = diagonal_cycle(&p, n, 2.22, 1.09, StrokeMode::QuantumAdiabatic).unwrap();
            assert!((r.eta.unwrap() - one.eta.unwrap()).abs() < 1e-12);
            assert!((r.w - n as f64 * one.w).abs() < 1e-12);
        }
    }

    #[test]
    fn many_body_limit_degenerate_case() {
        let p = QutritParams::new(0.0, 0.4, 1e-9, 1.0).unwrap();
        let l = many_body_limit(&p, 2.0, 2.0).unwrap();
        assert!(!l.engine);
    }

    #[test]
    fn many_body_limit_reference_values() {
        let l = many_body_limit(&fig2ab(), 6.66, 3.28).unwrap();
        assert!((l.eta - 0.381_100_798_314_201_85).abs() < 1e-9);
        let p = QutritParams::new(0.0f64, 0.595, 0.125, 1.0).unwrap();
        let l = many_body_limit(&p, 1.85, 1.71).unwrap();
        assert!((l.eta - 0.072_478_252_656_635_43).abs() < 1e-9);
    }
}
