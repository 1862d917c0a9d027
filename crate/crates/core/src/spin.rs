//! Qutrits realized as spin-1 blocks of qubit pairs.
//!
//! Large-spin operators `J_α = ½ Σ_i σ_α^i` are built on `n` qubits. The
//! quench Hamiltonian `Ω[J_z + b(J_z² - 1)]` moves only the `m = 0` level of
//! a spin-1 block, so its propagator is diagonal for any `b(t)`. The swap
//! unitary `S = exp(-iπ H_sw)` on two spin-1 blocks exchanges the levels
//! `|0, 0⟩` and `|-1, +1⟩`, which are the qutrit words `(1,1)` and `(0,2)`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cycle::check_betas;
use crate::error::{QottoError, Result};
use crate::linalg::{eig_hermitian, tensor_product, ComplexMatrix};
use crate::propagate::propagator;
use crate::protocol::{detect_crossings, QutritParams};
use crate::scalar::Real;
use crate::state::{gibbs_state, DensityMatrix};

/// Largest qubit number for dense spin operators.
pub const MAX_SPIN_QUBITS: usize = 10;

/// `J_z`, `J_+`, `J_-` on either the full `2^n` qubit space or the
/// `(n+1)`-dimensional symmetric block (basis ordered by ascending `m`).
#[derive(Clone, Debug)]
pub struct SpinOperators<T> {
    pub jz: ComplexMatrix<T>,
    pub jplus: ComplexMatrix<T>,
    pub jminus: ComplexMatrix<T>,
    pub qubits: usize,
    pub projected: bool,
}

impl<T: Real> SpinOperators<T> {
    pub fn dim(&self) -> usize {
        self.jz.dim()
    }

    /// `[J_-, J_+] + 2 J_z`, which vanishes for spin operators.
    pub fn commutator_defect(&self) -> T {
        let comm = &(&self.jminus * &self.jplus) - &(&self.jplus * &self.jminus);
        (&comm + &self.jz.scale_real(T::lit(2.0))).max_abs()
    }

    fn jz_squared(&self) -> ComplexMatrix<T> {
        &self.jz * &self.jz
    }
}

fn c<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Qubit `i` (most significant first) is up when its bit is 0.
fn is_up(state: usize, i: usize, n: usize) -> bool {
    state >> (n - 1 - i) & 1 == 0
}

/// Normalized symmetric (Dicke) states with `j = 0..=n` up spins, i.e.
/// `m = j - n/2` ascending, as vectors on the `2^n` qubit space.
pub fn symmetric_basis<T: Real>(n: usize) -> Vec<Vec<Complex<T>>> {
    let dim = 1usize << n;
    (0..=n)
        .map(|j| {
            let members: Vec<usize> = (0..dim).filter(|&s| (0..n).filter(|&i| is_up(s, i, n)).count() == j).collect();
            let amp = T::one() / T::from_usize(members.len()).expect("count").sqrt();
            let mut v = vec![Complex::zero(); dim];
            for s in members {
                v[s] = c(amp);
            }
            v
        })
        .collect()
}

fn project<T: Real>(op: &ComplexMatrix<T>, basis: &[Vec<Complex<T>>]) -> ComplexMatrix<T> {
    let images: Vec<Vec<Complex<T>>> = basis
        .iter()
        .map(|v| {
            (0..op.dim())
                .map(|r| (0..op.dim()).fold(Complex::zero(), |acc, k| acc + op[(r, k)] * v[k]))
                .collect()
        })
        .collect();
    ComplexMatrix::from_fn(basis.len(), |j, k| {
        basis[j].iter().zip(&images[k]).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    })
}

/// Spin operators of `n` qubits, optionally restricted to the maximal-spin
/// (fully symmetric) block.
pub fn build_spin_ops<T: Real>(n: usize, project_symmetric: bool) -> Result<SpinOperators<T>> {
    if n == 0 {
        return Err(QottoError::InvalidParams("at least one qubit is required".into()));
    }
    if n > MAX_SPIN_QUBITS {
        return Err(QottoError::DimensionTooLarge { dim: 1 << n, limit: 1 << MAX_SPIN_QUBITS });
    }
    let dim = 1usize << n;
    let half = T::lit(0.5);
    let jz = ComplexMatrix::from_fn(dim, |r, k| {
        if r != k {
            return Complex::zero();
        }
        let ups = (0..n).filter(|&i| is_up(r, i, n)).count();
        c((T::from_usize(2 * ups).expect("count") - T::from_usize(n).expect("count")) * half)
    });
    // σ_+ on qubit i flips it from down (bit 1) to up (bit 0)
    let jplus = ComplexMatrix::from_fn(dim, |r, k| {
        let diff = r ^ k;
        if diff.count_ones() == 1 && k & diff != 0 {
            Complex::one()
        } else {
            Complex::zero()
        }
    });
    let jminus = jplus.adjoint();
    let ops = SpinOperators { jz, jplus, jminus, qubits: n, projected: false };
    if !project_symmetric {
        return Ok(ops);
    }
    let basis = symmetric_basis::<T>(n);
    Ok(SpinOperators {
        jz: project(&ops.jz, &basis),
        jplus: project(&ops.jplus, &basis),
        jminus: project(&ops.jminus, &basis),
        qubits: n,
        projected: true,
    })
}

/// `Ω [J_z + b (J_z² - 1)]`.
pub fn quench_hamiltonian<T: Real>(ops: &SpinOperators<T>, omega: T, b: T) -> ComplexMatrix<T> {
    let jz2 = ops.jz_squared();
    let shifted = &jz2 - &ComplexMatrix::identity(ops.dim());
    (&ops.jz + &shifted.scale_real(b)).scale_real(omega)
}

/// Quench of two identical blocks, `H_1 ⊗ 1 + 1 ⊗ H_2`.
pub fn two_block_quench<T: Real>(ops: &SpinOperators<T>, omega: T, b: T) -> Result<ComplexMatrix<T>> {
    let h = quench_hamiltonian(ops, omega, b);
    let id = ComplexMatrix::identity(ops.dim());
    Ok(&tensor_product(&h, &id)? + &tensor_product(&id, &h)?)
}

/// Closed-form spin-1 quench propagator
/// `diag(e^{iΩt}, e^{iΩ∫b}, e^{-iΩt})` for `∫_0^t b(t') dt' = b_integral`.
pub fn quench_propagator<T: Real>(omega: T, b_integral: T, t: T) -> ComplexMatrix<T> {
    let phase = |x: T| Complex::new(x.cos(), x.sin());
    let mut u = ComplexMatrix::zeros(3);
    u[(0, 0)] = phase(omega * t);
    u[(1, 1)] = phase(omega * b_integral);
    u[(2, 2)] = phase(-omega * t);
    u
}

/// Affine map between qutrit energies and the spin-1 quench:
/// `(E0, E1, E2) = (-Ω, -bΩ, Ω) + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuenchMapping<T> {
    pub omega: T,
    pub b: T,
    pub offset: T,
}

impl<T: Real> QuenchMapping<T> {
    pub fn from_energies(energies: &[T; 3]) -> Self {
        let [e0, e1, e2] = *energies;
        let omega = (e2 - e0) * T::lit(0.5);
        let offset = (e0 + e2) * T::lit(0.5);
        Self { omega, b: (offset - e1) / omega, offset }
    }

    /// The qutrit energies this quench reproduces.
    pub fn energies(&self) -> [T; 3] {
        [-self.omega + self.offset, -self.b * self.omega + self.offset, self.omega + self.offset]
    }
}

/// The four-term swap generator on two spin blocks:
///
/// `H_sw = ¼ [J_-(1-J_z²)]_1 ⊗ [J_+(1-J_z²)]_2 + ¼ [(1-J_z²)J_+]_1 ⊗ [(1-J_z²)J_-]_2
///        - ½ [1-J_z²]_1 ⊗ [1-J_z²]_2 - ⅛ [J_z²-J_z]_1 ⊗ [J_z²+J_z]_2`.
pub fn swap_hamiltonian<T: Real>(ops: &SpinOperators<T>) -> Result<ComplexMatrix<T>> {
    let id = ComplexMatrix::identity(ops.dim());
    let jz2 = ops.jz_squared();
    let gap = &id - &jz2;
    let t1 = tensor_product(&(&ops.jminus * &gap), &(&ops.jplus * &gap))?.scale_real(T::lit(0.25));
    let t2 = tensor_product(&(&gap * &ops.jplus), &(&gap * &ops.jminus))?.scale_real(T::lit(0.25));
    let t3 = tensor_product(&gap, &gap)?.scale_real(T::lit(0.5));
    let t4 = tensor_product(&(&jz2 - &ops.jz), &(&jz2 + &ops.jz))?.scale_real(T::lit(0.125));
    Ok(&(&(&t1 + &t2) - &t3) - &t4)
}

/// `S = exp(-iπ H_sw)`.
pub fn swap_unitary<T: Real>(ops: &SpinOperators<T>) -> Result<ComplexMatrix<T>> {
    Ok(eig_hermitian(&swap_hamiltonian(ops)?)?.evolution(T::PI()))
}

/// Action of `S` outside the symmetric ⊗ symmetric sector of two qubit pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectorReport<T> {
    /// `max|P⊥ (S - 1) P⊥|`: how strongly `S` acts on the other sectors.
    pub off_sector_action: T,
    /// `max|P⊥ S P|`: leakage out of the symmetric sector (zero).
    pub leakage: T,
}

/// Projector onto `sym ⊗ sym` for two blocks of `n` qubits.
pub fn symmetric_pair_projector<T: Real>(n: usize) -> Result<ComplexMatrix<T>> {
    let basis = symmetric_basis::<T>(n);
    let dim = 1usize << n;
    let mut p = ComplexMatrix::zeros(dim * dim);
    for u in &basis {
        for v in &basis {
            let w: Vec<Complex<T>> = u.iter().flat_map(|a| v.iter().map(move |b| *a * *b)).collect();
            for r in 0..w.len() {
                for k in 0..w.len() {
                    p[(r, k)] += w[r] * w[k].conj();
                }
            }
        }
    }
    Ok(p)
}

/// Reports the action of the swap unitary built from unprojected qubit-pair
/// operators on the sectors outside `sym ⊗ sym`.
pub fn off_sector_report<T: Real>(n: usize) -> Result<SectorReport<T>> {
    let ops = build_spin_ops::<T>(n, false)?;
    let s = swap_unitary(&ops)?;
    let p = symmetric_pair_projector::<T>(n)?;
    let id = ComplexMatrix::identity(p.dim());
    let perp = &id - &p;
    let off = &(&perp * &(&s - &id)) * &perp;
    let leak = &(&perp * &s) * &p;
    Ok(SectorReport { off_sector_action: off.max_abs(), leakage: leak.max_abs() })
}

/// Work and heats of the two-copy perfect-swap cycle run on four qubits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddedCycle<T> {
    pub w: T,
    pub q_h: T,
    pub q_c: T,
    pub eta: Option<T>,
    /// Populations at `B` on the two-qutrit words, `index = 3 n_1 + n_2`.
    pub populations_b: Vec<T>,
    /// Largest off-diagonal element of the ramp propagator.
    pub ramp_off_diagonal: T,
}

/// Two qutrits, each the symmetric block of a qubit pair, cycled with the
/// quench ramp and, when the ramp crosses `(1,1)` and `(0,2)`, the swap
/// unitary `S` on the full 16-dimensional space.
/// States are prepared in the symmetric sector only.
pub fn qubit_embedded_cycle<T: Real>(params: &QutritParams<T>, beta_c: T, beta_h: T) -> Result<EmbeddedCycle<T>> {
    params.validate()?;
    check_betas(beta_c, beta_h)?;
    let ops = build_spin_ops::<T>(2, false)?;
    let map_a = QuenchMapping::from_energies(&params.energies_a());
    let map_b = QuenchMapping::from_energies(&params.energies_b());
    let offset = ComplexMatrix::identity(16).scale_real(map_a.offset * T::lit(2.0));
    let hamiltonian = |b: T| -> Result<ComplexMatrix<T>> { Ok(&two_block_quench(&ops, map_a.omega, b)? + &offset) };
    let h_a = hamiltonian(map_a.b)?;
    let h_b = hamiltonian(map_b.b)?;

    let sector = symmetric_pair_projector::<T>(2)?;
    let prepare = |h: &ComplexMatrix<T>, beta: T| -> Result<DensityMatrix<T>> {
        let full = gibbs_state(h, beta)?;
        let m = &(&sector * full.matrix()) * &sector;
        let norm = m.trace().re;
        DensityMatrix::new(m.scale_real(T::one() / norm))
    };

    // linear ramp of b over a unit time; the family commutes, so it is QA
    let ramp = (16usize, |t: T| {
        let b = map_a.b + (map_b.b - map_a.b) * t;
        hamiltonian(b).expect("fixed dimensions")
    });
    let u_ramp = propagator(&ramp, T::zero(), T::one(), 64)?;
    let ramp_off_diagonal = u_ramp.max_off_diagonal();
    // the only two-copy crossing is 2 E1 against E0 + E2; without it the
    // perfect swap is the identity
    let s = if detect_crossings(params, 2)?.is_empty() { ComplexMatrix::identity(16) } else { swap_unitary(&ops)? };

    let rho_a = prepare(&h_a, beta_c)?;
    let rho_b = rho_a.evolve(&u_ramp).evolve(&s);
    let rho_c = prepare(&h_b, beta_h)?;
    let rho_d = rho_c.evolve(&s).evolve(&u_ramp.adjoint());

    let [ea, eb, ec, ed] = [(&rho_a, &h_a), (&rho_b, &h_b), (&rho_c, &h_b), (&rho_d, &h_a)].map(|(r, h)| r.expectation(h));
    let w = eb - ea + ed - ec;
    let q_h = ec - eb;
    let q_c = ea - ed;
    let eta = (w < T::zero() && q_h > T::zero()).then(|| -w / q_h);

    let basis = symmetric_basis::<T>(2);
    let mut populations_b = Vec::with_capacity(9);
    for u in &basis {
        for v in &basis {
            let word: Vec<Complex<T>> = u.iter().flat_map(|a| v.iter().map(move |b| *a * *b)).collect();
            let mut acc = Complex::zero();
            for r in 0..16 {
                for k in 0..16 {
                    acc += word[r].conj() * rho_b.matrix()[(r, k)] * word[k];
                }
            }
            populations_b.push(acc.re);
        }
    }
    Ok(EmbeddedCycle { w, q_h, q_c, eta, populations_b, ramp_off_diagonal })
}
