//! Cooperative many-copy quantum Otto cycles.
//!
//! The crate simulates Otto engines whose working fluid is made of `N`
//! identical qutrits, compares quantum-adiabatic strokes with strokes that
//! swap populations across collective level crossings, and provides the
//! passive-state and thermal-reference-state accounting used to analyse them.
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); level-crossing analysis
//! is generic over [`Field`], which also covers exact rationals. The `*64`
//! aliases below fix the common double-precision case.

pub mod cycle;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod occupation;
pub mod passivity;
pub mod propagate;
pub mod protocol;
pub mod scalar;
pub mod spin;
pub mod state;

pub use error::{QottoError, Result};
pub use scalar::{Field, Real};

pub use cycle::{
    carnot_swap_check, efficiency_decomposition, run_cycle, second_law_check, CarnotCheck, CycleOutcome,
    CyclePoint, CycleResult, Decomposition, PointLabel, SecondLawCheck,
};
pub use linalg::{eig_hermitian, tensor_product, ComplexMatrix, Spectrum};
pub use passivity::{is_passive, make_passive, reference_temperature, relative_entropy, PassivizationResult, ThermalReference};
pub use propagate::{propagate, StepControl};
pub use protocol::{
    collective_hamiltonian, detect_crossings, diagonal_cycle, many_body_limit, perfect_swap, CrossingGroup,
    HamiltonianSchedule, LevelWord, PulseMode, QutritParams, StrokeMode, SwapSpec,
};
pub use state::{gibbs_state, von_neumann_entropy, DensityMatrix};

pub type Matrix64 = ComplexMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type Density64 = DensityMatrix<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Params64 = QutritParams<f64>;
pub type ExactParams = QutritParams<num_rational::Rational64>;
pub type Schedule64 = HamiltonianSchedule<f64>;
pub type CycleResult64 = CycleResult<f64>;
