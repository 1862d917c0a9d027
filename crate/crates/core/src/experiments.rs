//! Reproduction harness: named parameter sets, τ sweeps, copy-number sweeps,
//! the many-body limit, crossing reports, tabular output and a self-test.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{
    carnot_swap_check, efficiency_decomposition, perfect_swap_permutation, reference_second_law_check, run_cycle,
    second_law_check, CycleResult,
};
use crate::error::{QottoError, Result};
use crate::linalg::ComplexMatrix;
use crate::occupation::class_cycle;
use crate::passivity::{is_passive, make_passive};
use crate::propagate::StepControl;
use crate::protocol::{
    detect_crossings, diagonal_cycle, many_body_limit, CrossingGroup, HamiltonianSchedule, ManyBodyLimit, PulseMode,
    QutritParams, StrokeMode,
};
use crate::spin::{build_spin_ops, qubit_embedded_cycle, swap_unitary};
use crate::state::{gibbs_state, DensityMatrix};

/// Parameter sets of the published figures (energies in units of `E2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Two copies, `E1: 1/3 → 2/3`, `β_h = 3.28`, `β_c = 6.66`.
    Fig2ab,
    /// Three copies, `E1: 0.57 → 0.92`, `β_h = 1.09`, `β_c = 2.22`.
    /// `E0` is not stated for this set; `E0 = 0` as for the others.
    Fig2d,
    /// Copy-number scaling, `E1: 0.595 → 0.72`, `β_h = 1.71`, `β_c = 1.85`.
    Fig3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2ab, Preset::Fig2d, Preset::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2ab => "fig2ab",
            Preset::Fig2d => "fig2d",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn params(self) -> QutritParams<f64> {
        let (e1, shift) = match self {
            Preset::Fig2ab => (1.0 / 3.0, 1.0 / 3.0),
            Preset::Fig2d => (0.57, 0.35),
            Preset::Fig3 => (0.595, 0.125),
        };
        QutritParams { e0: 0.0, e1_initial: e1, e1_shift: shift, e2: 1.0 }
    }

    /// `(β_c, β_h)`.
    pub fn betas(self) -> (f64, f64) {
        match self {
            Preset::Fig2ab => (6.66, 3.28),
            Preset::Fig2d => (2.22, 1.09),
            Preset::Fig3 => (1.85, 1.71),
        }
    }

    pub fn default_copies(self) -> usize {
        match self {
            Preset::Fig2ab => 2,
            Preset::Fig2d => 3,
            Preset::Fig3 => 10,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = QottoError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| QottoError::InvalidParams(format!("unknown preset '{s}' (expected fig2ab, fig2d or fig3)")))
    }
}

/// Logarithmic τ grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self { min: 1e-3, max: 1e3, points: 61 }
    }
}

impl TauGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.log10(), self.max.log10());
        let step = (b - a) / (self.points - 1) as f64;
        (0..self.points).map(|k| 10f64.powf(a + step * k as f64)).collect()
    }
}

/// Full description of one experiment run. Unknown JSON keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: QutritParams<f64>,
    pub beta_c: f64,
    pub beta_h: f64,
    /// Copy number for single-cycle and τ-sweep runs.
    #[serde(default = "default_copies")]
    pub copies: usize,
    /// Copy range of the N sweep.
    #[serde(default = "one")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub tau: TauGrid,
    #[serde(default = "default_mode")]
    pub mode: StrokeMode,
    /// Initial integrator steps per pulse window (doubled until converged).
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Step budget of the doubling; exceeding it is a convergence failure.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Duration of the `E1` ramp; it only enters the stroke-time metadata.
    #[serde(default = "one_f64")]
    pub ramp_duration: f64,
    /// Seed of the randomized self-test sweeps.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_copies() -> usize {
    2
}
fn one() -> usize {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn default_n_max() -> usize {
    10
}
fn default_mode() -> StrokeMode {
    StrokeMode::PerfectSwap
}
fn default_steps() -> usize {
    StepControl::default().initial_steps
}
fn default_max_steps() -> usize {
    StepControl::default().max_steps
}

impl ExperimentConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let (beta_c, beta_h) = preset.betas();
        Self {
            params: preset.params(),
            beta_c,
            beta_h,
            copies: preset.default_copies().min(3),
            n_min: 1,
            n_max: default_n_max(),
            tau: TauGrid::default(),
            mode: default_mode(),
            steps: default_steps(),
            max_steps: default_max_steps(),
            ramp_duration: 1.0,
            seed: 0,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| QottoError::InvalidParams(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: String| Err(QottoError::InvalidParams(msg));
        if !(self.beta_h > 0.0 && self.beta_c > self.beta_h && self.beta_c.is_finite()) {
            return bad(format!("beta_c > beta_h > 0 violated: beta_c = {}, beta_h = {}", self.beta_c, self.beta_h));
        }
        if !(self.tau.min > 0.0 && self.tau.max >= self.tau.min && self.tau.max.is_finite() && self.tau.points >= 1) {
            return bad(format!("tau grid must be positive and ordered, got {:?}", self.tau));
        }
        if self.copies == 0 || self.n_min == 0 || self.n_max < self.n_min {
            return bad(format!("copy numbers must satisfy 1 <= n_min <= n_max, got {}..={}", self.n_min, self.n_max));
        }
        if self.steps == 0 || self.max_steps < self.steps {
            return bad(format!("steps must satisfy 0 < steps <= max_steps, got {} and {}", self.steps, self.max_steps));
        }
        if !(self.ramp_duration >= 0.0 && self.ramp_duration.is_finite()) {
            return bad(format!("ramp duration must be finite and >= 0, got {}", self.ramp_duration));
        }
        Ok(())
    }

    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.beta_h / self.beta_c
    }

    pub fn step_control(&self) -> StepControl {
        StepControl { initial_steps: self.steps, max_steps: self.max_steps, ..StepControl::default() }
    }
}

/// One table cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(usize),
    Num(Option<f64>),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Num(Some(x)) => format_number(*x),
            Cell::Num(None) => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(n) => Some(*n as f64),
            Cell::Num(x) => *x,
            Cell::Text(_) => None,
        }
    }
}

/// 12 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// Column-labelled result table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Output format of tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column (empty cells become `None`).
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        let k = self.column(name).expect("known column");
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn write_csv(&self, out: impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    pub fn write_json(&self, mut out: impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn write(&self, format: Format, out: impl Write) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Worker count: explicit value, else `QOTTO_WORKERS`, else all cores.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("QOTTO_WORKERS").ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn parallel_map<I: Sync, O: Send>(items: &[I], workers: usize, f: impl Fn(&I) -> O + Sync + Send) -> Vec<O> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    // indexed parallel iterators collect in input order
    pool.install(|| items.par_iter().map(&f).collect())
}

fn num(x: f64) -> Cell {
    Cell::Num(Some(x))
}

fn opt(x: Option<f64>) -> Cell {
    Cell::Num(x)
}

/// Dense single cycle for the configured copies and pulse.
pub fn single_cycle(config: &ExperimentConfig, pulse: PulseMode<f64>) -> Result<CycleResult<f64>> {
    config.validate()?;
    let schedule = HamiltonianSchedule::with_default_swaps(config.params.clone(), config.copies, config.ramp_duration, pulse)?;
    Ok(run_cycle(&schedule, config.beta_c, config.beta_h, config.step_control())?.result)
}

pub const TAU_COLUMNS: [&str; 12] =
    ["tau", "p_n_B", "p_m_B", "delta_E_B", "W", "Q_h", "Q_c", "eta", "eta_over_carnot", "engine", "steps", "status"];

/// Finite-τ cycles on a logarithmic τ grid (two or three copies).
///
/// `p_n_B`, `p_m_B` are the populations at `B` of the coupled pair and
/// `delta_E_B` is `Tr[H_B ρ_B]` minus its quantum-adiabatic value. Failed
/// rows keep their τ and report the error in `status`.
pub fn sweep_tau(config: &ExperimentConfig, workers: usize) -> Result<(Table, Vec<QottoError>)> {
    config.validate()?;
    if !(2..=3).contains(&config.copies) {
        return Err(QottoError::InvalidParams(format!("the tau sweep needs 2 or 3 copies, got {}", config.copies)));
    }
    let groups = detect_crossings(&config.params, config.copies)?;
    let Some(pair) = groups.first().map(CrossingGroup::default_swap) else {
        return Err(QottoError::InvalidParams(format!(
            "no collective level crossing for {} copies: the pulse has no pair to couple",
            config.copies
        )));
    };
    let qa = single_cycle(config, PulseMode::None)?;
    let eta_c = config.eta_carnot();
    let taus = config.tau.values();
    let rows = parallel_map(&taus, workers, |&tau| -> (Vec<Cell>, Option<QottoError>) {
        let outcome = HamiltonianSchedule::with_default_swaps(
            config.params.clone(),
            config.copies,
            config.ramp_duration,
            PulseMode::FiniteTau(tau),
        )
        .and_then(|s| run_cycle(&s, config.beta_c, config.beta_h, config.step_control()));
        match outcome {
            Ok(o) => {
                let r = &o.result;
                let pops = o.points[1].state.populations();
                (
                    vec![
                        num(tau),
                        num(pops[pair.first.index()]),
                        num(pops[pair.second.index()]),
                        num(r.energies[1] - qa.energies[1]),
                        num(r.w),
                        num(r.q_h),
                        num(r.q_c),
                        opt(r.eta),
                        opt(r.eta.map(|e| e / eta_c)),
                        Cell::Int(r.engine as usize),
                        Cell::Int(o.steps.unwrap_or(0)),
                        Cell::Text("ok".into()),
                    ],
                    None,
                )
            }
            Err(e) => {
                let mut row = vec![num(tau)];
                row.extend((1..TAU_COLUMNS.len() - 1).map(|_| Cell::Num(None)));
                row.push(Cell::Text(e.to_string()));
                (row, Some(e))
            }
        }
    });
    let mut table = Table::new(&TAU_COLUMNS);
    let mut errors = Vec::new();
    for (row, err) in rows {
        table.rows.push(row);
        errors.extend(err);
    }
    Ok((table, errors))
}

pub const COPY_COLUMNS: [&str; 14] = [
    "N",
    "W",
    "W_per_copy",
    "Q_h",
    "Q_c",
    "Q_h_per_copy",
    "Q_c_per_copy",
    "eta",
    "eta_over_carnot",
    "eta_manybody",
    "D_B_over_betaQ",
    "D_B",
    "beta_B_ref",
    "engine",
];

/// Copy-number sweep of perfect-swap (or quantum-adiabatic) cycles on the
/// class-resolved population path.
pub fn sweep_copies(config: &ExperimentConfig, workers: usize) -> Result<Table> {
    config.validate()?;
    let limit = many_body_limit(&config.params, config.beta_c, config.beta_h)?;
    let copies: Vec<usize> = (config.n_min..=config.n_max).collect();
    let results = parallel_map(&copies, workers, |&n| class_cycle(&config.params, n, config.beta_c, config.beta_h, config.mode));
    let mut table = Table::new(&COPY_COLUMNS);
    for r in results {
        let r = r?;
        let n = r.copies as f64;
        table.rows.push(vec![
            Cell::Int(r.copies),
            num(r.w),
            num(r.w / n),
            num(r.q_h),
            num(r.q_c),
            num(r.q_h / n),
            num(r.q_c / n),
            opt(r.eta),
            opt(r.eta_over_carnot()),
            num(limit.eta),
            num(r.d_b_ratio()),
            num(r.d_b),
            num(r.beta_b_ref),
            Cell::Int(r.engine as usize),
        ]);
    }
    Ok(table)
}

pub const LIMIT_COLUMNS: [&str; 8] =
    ["eta_manybody", "eta_carnot", "eta_over_carnot", "beta_B_ref", "beta_D_ref", "Q_h_ref_per_copy", "Q_c_ref_per_copy", "engine"];

pub fn limit_table(config: &ExperimentConfig) -> Result<(ManyBodyLimit<f64>, Table)> {
    config.validate()?;
    let l = many_body_limit(&config.params, config.beta_c, config.beta_h)?;
    let mut table = Table::new(&LIMIT_COLUMNS);
    let eta_c = config.eta_carnot();
    table.rows.push(vec![
        num(l.eta),
        num(eta_c),
        num(l.eta / eta_c),
        num(l.beta_b_ref),
        num(l.beta_d_ref),
        num(l.q_h_ref),
        num(l.q_c_ref),
        Cell::Int(l.engine as usize),
    ]);
    Ok((l, table))
}

pub const CROSSING_COLUMNS: [&str; 6] = ["lower_at_A", "upper_at_A", "E1_crossing", "ramp_fraction", "lower_words", "upper_words"];

pub fn crossings_table(config: &ExperimentConfig) -> Result<Table> {
    config.validate()?;
    let mut table = Table::new(&CROSSING_COLUMNS);
    let join = |words: &[crate::protocol::LevelWord]| words.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    for g in detect_crossings(&config.params, config.copies)? {
        let class = |c: [usize; 3]| format!("k=({},{},{})", c[0], c[1], c[2]);
        table.rows.push(vec![
            Cell::Text(class(g.lower_at_a)),
            Cell::Text(class(g.upper_at_a)),
            num(g.e1_crossing),
            num(g.ramp_fraction),
            Cell::Text(join(&g.lower_words)),
            Cell::Text(join(&g.upper_words)),
        ]);
    }
    Ok(table)
}

pub const CYCLE_COLUMNS: [&str; 17] = [
    "N", "mode", "W", "Q_h", "Q_c", "eta", "eta_carnot", "eta_over_carnot", "Q_h_ref", "Q_c_ref", "D_B", "D_D",
    "beta_B_ref", "beta_D_ref", "eta_manybody", "stroke_time", "engine",
];

/// One cycle as a single-row table; `pulse` selects the dense path, `None`
/// the population path in `config.mode`.
pub fn cycle_table(config: &ExperimentConfig, pulse: Option<PulseMode<f64>>) -> Result<Table> {
    config.validate()?;
    let (label, r) = match pulse {
        Some(p) => {
            let label = match p {
                PulseMode::None => "qa".to_string(),
                PulseMode::Perfect => "perfect".to_string(),
                PulseMode::FiniteTau(t) => format!("tau={}", format_number(t)),
            };
            (label, single_cycle(config, p)?)
        }
        None => {
            let label = match config.mode {
                StrokeMode::QuantumAdiabatic => "qa",
                StrokeMode::PerfectSwap => "perfect",
            };
            (label.to_string(), class_cycle(&config.params, config.copies, config.beta_c, config.beta_h, config.mode)?)
        }
    };
    let mut table = Table::new(&CYCLE_COLUMNS);
    table.rows.push(vec![
        Cell::Int(r.copies),
        Cell::Text(label),
        num(r.w),
        num(r.q_h),
        num(r.q_c),
        opt(r.eta),
        num(r.eta_carnot),
        opt(r.eta_over_carnot()),
        num(r.q_h_ref),
        num(r.q_c_ref),
        num(r.d_b),
        num(r.d_d),
        num(r.beta_b_ref),
        num(r.beta_d_ref),
        num(r.eta_manybody),
        opt(r.stroke_time),
        Cell::Int(r.engine as usize),
    ]);
    Ok(table)
}

/// Outcome of one self-test invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Runs the invariant suite (fast subset) on every preset plus randomized
/// permutation cycles drawn from `seed`.
pub fn selftest(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |c: Result<Check>, name: &str| {
        checks.push(c.unwrap_or_else(|e| check(name, false, format!("error: {e}"))));
    };
    for preset in Preset::ALL {
        let (bc, bh) = preset.betas();
        let p = preset.params();
        let eta_c = 1.0 - bh / bc;
        push(
            (|| {
                let mut worst_first = 0f64;
                let mut carnot_ok = true;
                let mut second_ok = true;
                for n in 1..=3 {
                    for mode in [StrokeMode::QuantumAdiabatic, StrokeMode::PerfectSwap] {
                        let r = diagonal_cycle(&p, n, bc, bh, mode)?;
                        worst_first = worst_first.max(r.first_law_defect());
                        carnot_ok &= r.eta.is_none_or(|e| e <= eta_c + 1e-12);
                        second_ok &= second_law_check(&r).holds && reference_second_law_check(&r).holds;
                    }
                }
                Ok(check(
                    &format!("{preset}: first law, Carnot bound, second law"),
                    worst_first < 1e-10 && carnot_ok && second_ok,
                    format!("max |W+Qh+Qc| = {worst_first:.2e}"),
                ))
            })(),
            "laws",
        );
        push(
            (|| {
                let mut worst = 0f64;
                for n in 2..=3 {
                    for (mode, pulse) in
                        [(StrokeMode::QuantumAdiabatic, PulseMode::None), (StrokeMode::PerfectSwap, PulseMode::Perfect)]
                    {
                        let s = HamiltonianSchedule::with_default_swaps(p.clone(), n, 1.0, pulse)?;
                        let dense = run_cycle(&s, bc, bh, StepControl::default())?.result;
                        worst = worst.max(dense.max_deviation(&diagonal_cycle(&p, n, bc, bh, mode)?));
                    }
                }
                Ok(check(&format!("{preset}: dense and diagonal paths agree"), worst < 1e-10, format!("max deviation {worst:.2e}")))
            })(),
            "equivalence",
        );
        push(
            (|| {
                let s = HamiltonianSchedule::with_default_swaps(p.clone(), 2, 1.0, PulseMode::Perfect)?;
                let out = run_cycle(&s, bc, bh, StepControl::default())?;
                let d = efficiency_decomposition(&out.points)?;
                Ok(check(&format!("{preset}: efficiency decomposition"), d.agrees, format!("|closed - direct| = {:.2e}", d.agreement)))
            })(),
            "decomposition",
        );
        push(
            (|| {
                let mut worst = 0f64;
                for n in 1..=6 {
                    for mode in [StrokeMode::QuantumAdiabatic, StrokeMode::PerfectSwap] {
                        worst = worst.max(class_cycle(&p, n, bc, bh, mode)?.max_deviation(&diagonal_cycle(&p, n, bc, bh, mode)?));
                    }
                }
                Ok(check(&format!("{preset}: class and level paths agree"), worst < 1e-10, format!("max deviation {worst:.2e}")))
            })(),
            "classes",
        );
    }

    push(
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut violations = 0;
            for _ in 0..200 {
                let dim = rng.gen_range(2..=27);
                let ea: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                let eb: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                let mut perm: Vec<usize> = (0..dim).collect();
                perm.shuffle(&mut rng);
                let bh = rng.gen_range(0.1..5.0);
                let bc = bh + rng.gen_range(0.0..5.0);
                if !carnot_swap_check(&ea, &eb, &perm, bc, bh)?.within_bound {
                    violations += 1;
                }
            }
            Ok(check("random permutation cycles obey the Carnot bound", violations == 0, format!("{violations} violations in 200")))
        })(),
        "carnot",
    );
    push(
        (|| {
            let p = Preset::Fig2ab.params();
            let map = perfect_swap_permutation(&p, 2, 6.66)?;
            let ea = crate::protocol::collective_energies(&p.energies_a(), 2);
            let eb = crate::protocol::collective_energies(&p.energies_b(), 2);
            let sums = carnot_swap_check(&ea, &eb, &map, 6.66, 3.28)?;
            let r = diagonal_cycle(&p, 2, 6.66, 3.28, StrokeMode::PerfectSwap)?;
            let diff = (sums.w - r.w).abs().max((sums.q_h - r.q_h).abs());
            Ok(check("level sums reproduce the perfect-swap cycle", diff < 1e-9, format!("max difference {diff:.2e}")))
        })(),
        "sums",
    );
    push(
        (|| {
            let p = Preset::Fig2ab.params();
            let h = ComplexMatrix::from_real_diagonal(&crate::protocol::collective_energies(&p.energies_b(), 2));
            let single = gibbs_state(&ComplexMatrix::from_real_diagonal(&p.energies_a()), 6.66)?;
            let rho = DensityMatrix::from_populations(&crate::protocol::product_populations(&single.populations(), 2))?;
            let passive_single = is_passive(&single, &ComplexMatrix::from_real_diagonal(&p.energies_b()), 1e-12);
            let r = make_passive(&rho, &h)?;
            Ok(check(
                "passive copies can form a non-passive product",
                passive_single && !is_passive(&rho, &h, 1e-12) && r.ergotropy > 0.0,
                format!("ergotropy {:.3e}", r.ergotropy),
            ))
        })(),
        "passivity",
    );
    push(
        (|| {
            let ops = build_spin_ops::<f64>(2, true)?;
            let s = swap_unitary(&ops)?;
            let err = (s[(2, 4)].norm() - 1.0).abs().max((s[(4, 2)].norm() - 1.0).abs()).max(s.unitarity_defect());
            let p = Preset::Fig2ab.params();
            let e = qubit_embedded_cycle(&p, 6.66, 3.28)?;
            let r = diagonal_cycle(&p, 2, 6.66, 3.28, StrokeMode::PerfectSwap)?;
            let dev = (e.w - r.w).abs().max((e.q_h - r.q_h).abs()).max((e.q_c - r.q_c).abs());
            Ok(check(
                "qubit realization of the swap",
                err < 1e-10 && dev < 1e-9,
                format!("swap error {err:.2e}, cycle deviation {dev:.2e}"),
            ))
        })(),
        "spin",
    );
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_literals() {
        let p = Preset::Fig2ab.params();
        assert_eq!((p.e0, p.e1_initial, p.e1_shift, p.e2), (0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0));
        assert_eq!(Preset::Fig2ab.betas(), (6.66, 3.28));
        let p = Preset::Fig2d.params();
        assert_eq!((p.e0, p.e1_initial, p.e1_shift, p.e2), (0.0, 0.57, 0.35, 1.0));
        assert_eq!(Preset::Fig2d.betas(), (2.22, 1.09));
        let p = Preset::Fig3.params();
        assert_eq!((p.e0, p.e1_initial, p.e1_shift, p.e2), (0.0, 0.595, 0.125, 1.0));
        assert_eq!(Preset::Fig3.betas(), (1.85, 1.71));
        for preset in Preset::ALL {
            preset.params().validate().unwrap();
            assert_eq!(preset.name().parse::<Preset>().unwrap(), preset);
        }
        assert!("fig4".parse::<Preset>().is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = TauGrid::default().values();
        assert_eq!(g.len(), 61);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[60] - 1e3).abs() < 1e-9);
        assert!((g[30] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let good = serde_json::to_string(&ExperimentConfig::from_preset(Preset::Fig3)).unwrap();
        assert!(ExperimentConfig::from_json(&good).is_ok());
        let bad = good.replacen("\"beta_c\"", "\"beta_cold\"", 1);
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let minimal = r#"{"params": {"e0": 0, "e1_initial": 0.5, "e1_shift": 0.1, "e2": 1}, "beta_c": 2, "beta_h": 1}"#;
        let c = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(c.tau, TauGrid::default());
        let inverted = minimal.replace("\"beta_h\": 1", "\"beta_h\": 3");
        assert!(ExperimentConfig::from_json(&inverted).is_err());
    }

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(format_number(0.1), "1.00000000000e-1");
        assert_eq!(format_number(-1234.5), "-1.23450000000e3");
    }

    #[test]
    fn copy_sweep_table_shape() {
        let mut c = ExperimentConfig::from_preset(Preset::Fig3);
        c.n_max = 4;
        let t = sweep_copies(&c, 2).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.columns.len(), COPY_COLUMNS.len());
        let csv = t.to_csv_string();
        assert_eq!(csv.lines().count(), 5);
        // identical input, identical bytes
        assert_eq!(csv, sweep_copies(&c, 1).unwrap().to_csv_string());
    }
}
