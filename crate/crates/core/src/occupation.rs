//! Occupation classes of `N` identical qutrits and the class-resolved
//! perfect-swap cycle.
//!
//! Every collective product level `|n_1 … n_N⟩` belongs to the class
//! `(k0, k1, k2)` counting how many copies sit on each single-copy level.
//! Energies and thermal populations of product states depend on the class
//! only, so a perfect-swap cycle, which permutes populations, can be run on
//! the `(N+1)(N+2)/2` classes with exact multinomial multiplicities instead
//! of the `3^N` levels. This makes copy numbers in the hundreds cheap.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::cycle::{CycleResult, ReferencePoint, StrokeLedger};
use crate::error::{QottoError, Result};
use crate::passivity::{reference_beta, thermal_energy};
use crate::protocol::{QutritParams, StrokeMode};
use crate::scalar::{Field, Real};
use crate::state::{boltzmann_populations, log_partition};

/// Copies per single-copy level: `[k0, k1, k2]`.
pub type Occupation = [usize; 3];

/// Largest copy number accepted by the class-resolved cycle.
pub const MAX_CLASS_COPIES: usize = 600;

/// All classes of `copies` qutrits, ordered by `(k1, k2)` ascending.
pub fn occupation_classes(copies: usize) -> Vec<Occupation> {
    let mut out = Vec::with_capacity((copies + 1) * (copies + 2) / 2);
    for k1 in 0..=copies {
        for k2 in 0..=(copies - k1) {
            out.push([copies - k1 - k2, k1, k2]);
        }
    }
    out
}

/// Class of a word over `{0, 1, 2}`.
pub fn occupation_of(digits: &[u8]) -> Occupation {
    let mut k = [0; 3];
    for &d in digits {
        k[d as usize] += 1;
    }
    k
}

/// `k0 E0 + k1 E1 + k2 E2`.
pub fn class_energy<T: Field>(class: &Occupation, energies: &[T; 3]) -> T {
    class.iter().zip(energies).fold(T::zero(), |acc, (&k, e)| acc + scale_by_count(e, k))
}

fn scale_by_count<T: Field>(e: &T, k: usize) -> T {
    // repeated addition keeps this exact for rationals without a cast
    let mut acc = T::zero();
    let mut base = e.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        k >>= 1;
    }
    acc
}

/// Number of words in a class, `N! / (k0! k1! k2!)`.
pub fn multiplicity(class: &Occupation) -> BigUint {
    let n: usize = class.iter().sum();
    // C(n, k1) * C(n - k1, k2)
    binomial(n, class[1]) * binomial(n - class[1], class[2])
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Natural logarithm of a (possibly astronomically large) count.
pub fn ln_count(k: &BigUint) -> f64 {
    let bits = k.bits();
    if bits <= 1000 {
        k.to_f64().expect("below f64 range").ln()
    } else {
        let shift = bits - 1000;
        (k >> shift).to_f64().expect("below f64 range").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Sign of `E_a - E_b` with roundoff slack for floating-point energies.
pub(crate) fn class_gap_sign<T: Field>(a: &Occupation, b: &Occupation, energies: &[T; 3], scale: &T) -> Ordering {
    let gap = class_energy(a, energies) - class_energy(b, energies);
    T::sign_with_slack(&gap, scale)
}

/// Magnitude used to decide when an energy difference is roundoff.
pub(crate) fn energy_scale<T: Field>(copies: usize, energies: &[T; 3]) -> T {
    let abs = |x: &T| if *x < T::zero() { -x.clone() } else { x.clone() };
    let mut m = abs(&energies[0]);
    for e in &energies[1..] {
        if abs(e) > m {
            m = abs(e);
        }
    }
    scale_by_count(&m, copies.max(1))
}

/// Flags the classes that take part in at least one strict level crossing
/// between the endpoint energies `at_a` and `at_b`.
///
/// Class `c` is crossed when some class lies strictly below it at one end
/// and strictly above it at the other. Classes are swept in order of their
/// energy at `A` with running extrema of the energy at `B`, so the cost is
/// `O(C log C)` in the number of classes `C`.
pub fn crossed_classes<T: Field>(classes: &[Occupation], at_a: &[T; 3], at_b: &[T; 3]) -> Vec<bool> {
    let copies = classes.first().map_or(0, |c| c.iter().sum());
    let scale_a = energy_scale(copies, at_a);
    let scale_b = energy_scale(copies, at_b);
    let ea: Vec<T> = classes.iter().map(|c| class_energy(c, at_a)).collect();
    let eb: Vec<T> = classes.iter().map(|c| class_energy(c, at_b)).collect();
    let below = |x: &T, y: &T, s: &T| T::sign_with_slack(&(x.clone() - y.clone()), s) == Ordering::Less;
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&i, &j| ea[i].partial_cmp(&ea[j]).unwrap_or(Ordering::Equal));

    let mut crossed = vec![false; classes.len()];
    // partners strictly below at A and strictly above at B
    let mut prefix_max: Option<T> = None;
    let mut j = 0;
    for &c in &order {
        while j < order.len() && below(&ea[order[j]], &ea[c], &scale_a) {
            let e = &eb[order[j]];
            if prefix_max.as_ref().is_none_or(|m| e > m) {
                prefix_max = Some(e.clone());
            }
            j += 1;
        }
        if prefix_max.as_ref().is_some_and(|m| below(&eb[c], m, &scale_b)) {
            crossed[c] = true;
        }
    }
    // partners strictly above at A and strictly below at B
    let mut suffix_min: Option<T> = None;
    let mut j = order.len();
    for &c in order.iter().rev() {
        while j > 0 && below(&ea[c], &ea[order[j - 1]], &scale_a) {
            let e = &eb[order[j - 1]];
            if suffix_min.as_ref().is_none_or(|m| e < m) {
                suffix_min = Some(e.clone());
            }
            j -= 1;
        }
        if suffix_min.as_ref().is_some_and(|m| below(m, &eb[c], &scale_b)) {
            crossed[c] = true;
        }
    }
    crossed
}

/// A run of `count` words sharing one population and one energy.
#[derive(Clone, Debug)]
struct Segment<T> {
    count: BigUint,
    ln_population: T,
    energy: T,
}

/// Passivizes class populations over the flagged classes.
///
/// Each flagged class contributes `multiplicity` words of equal population.
/// Populations sorted descending are poured onto energies sorted ascending,
/// splitting classes where a population run straddles two energy classes.
fn passivize_segments<T: Real>(
    classes: &[Occupation],
    counts: &[BigUint],
    ln_populations: &[T],
    energies: &[T],
    flagged: &[bool],
) -> Vec<Segment<T>> {
    let mut out = Vec::with_capacity(classes.len());
    let mut pops: Vec<usize> = Vec::new();
    for c in 0..classes.len() {
        if flagged[c] {
            pops.push(c);
        } else {
            out.push(Segment {
                count: counts[c].clone(),
                ln_population: ln_populations[c],
                energy: energies[c],
            });
        }
    }
    let mut levels = pops.clone();
    pops.sort_by(|&a, &b| ln_populations[b].partial_cmp(&ln_populations[a]).expect("finite"));
    levels.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).expect("finite"));

    let (mut i, mut j) = (0, 0);
    let mut left_pop = pops.first().map(|&c| counts[c].clone()).unwrap_or_default();
    let mut left_level = levels.first().map(|&c| counts[c].clone()).unwrap_or_default();
    while i < pops.len() && j < levels.len() {
        let take = if left_pop < left_level { left_pop.clone() } else { left_level.clone() };
        out.push(Segment {
            count: take.clone(),
            ln_population: ln_populations[pops[i]],
            energy: energies[levels[j]],
        });
        left_pop -= &take;
        left_level -= &take;
        if left_pop.is_zero() {
            i += 1;
            if i < pops.len() {
                left_pop = counts[pops[i]].clone();
            }
        }
        if left_level.is_zero() {
            j += 1;
            if j < levels.len() {
                left_level = counts[levels[j]].clone();
            }
        }
    }
    out
}

/// Mean energy, entropy and relative entropy to `gibbs(E, β_ref)` of a
/// segment list; `log_z_ref` is the collective `ln Z(β_ref)`.
struct SegmentStats<T> {
    energy: T,
    entropy: T,
    norm: T,
}

fn segment_stats<T: Real>(segments: &[Segment<T>]) -> SegmentStats<T> {
    let mut energy = T::zero();
    let mut entropy = T::zero();
    let mut norm = T::zero();
    for s in segments {
        let w = (T::lit(ln_count(&s.count)) + s.ln_population).exp();
        norm += w;
        energy += w * s.energy;
        entropy -= w * s.ln_population;
    }
    SegmentStats { energy, entropy, norm }
}

fn relative_entropy_segments<T: Real>(segments: &[Segment<T>], beta: T, log_z: T) -> T {
    segments.iter().fold(T::zero(), |acc, s| {
        let w = (T::lit(ln_count(&s.count)) + s.ln_population).exp();
        acc + w * (s.ln_population + beta * s.energy + log_z)
    })
}

/// Perfect-swap or quantum-adiabatic cycle for `copies` qutrits, computed on
/// occupation classes. Agrees with the level-resolved diagonal cycle.
pub fn class_cycle<T: Real>(
    params: &QutritParams<T>,
    copies: usize,
    beta_c: T,
    beta_h: T,
    mode: StrokeMode,
) -> Result<CycleResult<T>> {
    if copies == 0 || copies > MAX_CLASS_COPIES {
        return Err(QottoError::InvalidParams(format!(
            "class-resolved cycle needs 1 <= copies <= {MAX_CLASS_COPIES}, got {copies}"
        )));
    }
    crate::cycle::check_betas(beta_c, beta_h)?;
    let at_a = params.energies_a();
    let at_b = params.energies_b();
    let classes = occupation_classes(copies);
    let counts: Vec<BigUint> = classes.iter().map(multiplicity).collect();
    let ea: Vec<T> = classes.iter().map(|c| class_energy(c, &at_a)).collect();
    let eb: Vec<T> = classes.iter().map(|c| class_energy(c, &at_b)).collect();
    let flagged = match mode {
        StrokeMode::QuantumAdiabatic => vec![false; classes.len()],
        StrokeMode::PerfectSwap => crossed_classes(&classes, &at_a, &at_b),
    };

    let ln_class_pop = |single: &[T]| -> Vec<T> {
        let ln: Vec<T> = single.iter().map(|p| p.ln()).collect();
        classes
            .iter()
            .map(|c| {
                c.iter().zip(&ln).fold(T::zero(), |acc, (&k, &l)| {
                    if k == 0 {
                        acc
                    } else {
                        acc + T::from_usize(k).expect("count") * l
                    }
                })
            })
            .collect()
    };
    let pa = ln_class_pop(&boltzmann_populations(&at_a, beta_c)?);
    let pc = ln_class_pop(&boltzmann_populations(&at_b, beta_h)?);

    let plain = |ln_pop: &[T], energies: &[T]| -> Vec<Segment<T>> {
        (0..classes.len())
            .map(|c| Segment { count: counts[c].clone(), ln_population: ln_pop[c], energy: energies[c] })
            .collect()
    };
    let seg_a = plain(&pa, &ea);
    let seg_b = passivize_segments(&classes, &counts, &pa, &eb, &flagged);
    let seg_c = plain(&pc, &eb);
    let seg_d = passivize_segments(&classes, &counts, &pc, &ea, &flagged);

    let stats = [&seg_a, &seg_b, &seg_c, &seg_d].map(|s| segment_stats(s));
    for s in &stats {
        if (s.norm - T::one()).abs() > T::tol(1e-9) {
            return Err(QottoError::InvalidDensityMatrix {
                reason: format!("class populations sum to {}", s.norm),
            });
        }
    }

    // the reference states are products of single-copy Gibbs states
    let n = T::from_usize(copies).expect("copies");
    let reference = |segments: &[Segment<T>], single: &[T; 3], entropy: T| -> Result<ReferencePoint<T>> {
        let beta = reference_beta(single, entropy / n)?;
        let log_z = n * log_partition(single, beta);
        Ok(ReferencePoint {
            beta,
            energy: n * thermal_energy(single, beta),
            relative_entropy: relative_entropy_segments(segments, beta, log_z).max(T::zero()),
        })
    };
    let reference_b = reference(&seg_b, &at_b, stats[1].entropy)?;
    let reference_d = reference(&seg_d, &at_a, stats[3].entropy)?;

    Ok(StrokeLedger {
        copies,
        beta_c,
        beta_h,
        energies: [stats[0].energy, stats[1].energy, stats[2].energy, stats[3].energy],
        entropies: [stats[0].entropy, stats[1].entropy, stats[2].entropy, stats[3].entropy],
        reference_b,
        reference_d,
        stroke_time: None,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn class_counts_cover_all_words() {
        for n in 1..=8usize {
            let total = occupation_classes(n).iter().map(multiplicity).fold(BigUint::zero(), |a, b| a + b);
            assert_eq!(total, BigUint::from(3usize.pow(n as u32)));
        }
    }

    #[test]
    fn ln_count_matches_direct_for_small_and_large() {
        assert!((ln_count(&BigUint::from(720u32)) - 720f64.ln()).abs() < 1e-13);
        let big = BigUint::from(3u32).pow(1000);
        assert!((ln_count(&big) - 1000.0 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn exact_crossing_flags_for_two_copies() {
        let third = Rational64::new(1, 3);
        let a = [Rational64::from_integer(0), third, Rational64::from_integer(1)];
        let b = [Rational64::from_integer(0), third + third, Rational64::from_integer(1)];
        let classes = occupation_classes(2);
        let flags = crossed_classes(&classes, &a, &b);
        let crossed: Vec<Occupation> = classes.iter().zip(&flags).filter(|(_, &f)| f).map(|(c, _)| *c).collect();
        assert_eq!(crossed, vec![[1, 0, 1], [0, 2, 0]]);
    }

    #[test]
    fn touching_levels_are_not_crossed() {
        // at B, 2 E1 meets E0 + E2 only up to roundoff: (0,2,0) touches (1,0,1)
        let a = [0.0, 0.25, 1.0];
        let b = [0.0, 3.0 * (1.0f64 / 6.0), 1.0];
        let classes = occupation_classes(2);
        let flags = crossed_classes(&classes, &a, &b);
        assert!(flags.iter().all(|f| !f));
    }

    #[test]
    fn sweep_matches_pairwise_definition() {
        let a = [0.0, 0.595, 1.0];
        let b = [0.0, 0.72, 1.0];
        for n in 1..=9 {
            let classes = occupation_classes(n);
            let fast = crossed_classes(&classes, &a, &b);
            for (i, ci) in classes.iter().enumerate() {
                let slow = classes.iter().any(|cj| {
                    let sa = class_gap_sign(ci, cj, &a, &(n as f64));
                    let sb = class_gap_sign(ci, cj, &b, &(n as f64));
                    sa != Ordering::Equal && sb != Ordering::Equal && sa != sb
                });
                assert_eq!(fast[i], slow, "n = {n}, class {ci:?}");
            }
        }
    }
}
