//! End-to-end PAE: schedules, per-step shifter synthesis, circuit execution,
//! RPE post-processing and query/depth accounting.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::circuit_sim::{
    ghz_depth, sample_counts, setting_probability, statevector_probability, MeasurementSetting,
    ParallelCircuit, Shifter,
};
use crate::core_model::{AmplitudeInstance, OracleStyle};
use crate::error::{PaeError, Result};
use crate::qsp_synthesis::{select_l, select_l_empirical, PhaseShifterSpec, SolveMethod};
use crate::rpe::{estimate_from_frequencies, schedule_nu, NuVariant, PhaseEstimate, BETA_MAX};

/// Calibrated full-parallel L for the X-parity setting, k = 1..9.
pub const S5_PLUS_TABLE: [usize; 9] = [10, 12, 12, 14, 16, 16, 18, 20, 20];
/// Calibrated full-parallel L for the PLUS_I setting, k = 1..9.
pub const S5_PLUS_I_TABLE: [usize; 9] = [12, 14, 14, 14, 16, 16, 18, 20, 20];
/// Largest T synthesized directly in general mode; beyond it V is repeated S times.
pub const DEFAULT_T_CAP: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    FullParallel,
    FullSequential,
    General { p: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LMode {
    /// select_l_empirical(T_k).
    Empirical,
    /// select_l(T_k, β/(√2 P_k S_k)).
    Certified { beta: f64 },
    /// Calibrated full-parallel table; each step takes the larger of the
    /// two settings' entries so one shifter serves both.
    S5,
    /// Explicit L_k, one per step.
    Table(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleOptions {
    pub strategy: Strategy,
    pub nu: NuVariant,
    pub l_mode: LMode,
    /// None disables the T/S split (general mode defaults to DEFAULT_T_CAP).
    pub t_cap: Option<u64>,
}

impl ScheduleOptions {
    pub fn new(strategy: Strategy, nu: NuVariant, l_mode: LMode) -> Self {
        let t_cap = match strategy {
            Strategy::General { .. } => Some(DEFAULT_T_CAP),
            _ => None,
        };
        ScheduleOptions {
            strategy,
            nu,
            l_mode,
            t_cap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepPlan {
    pub k: u32,
    pub m: u64,
    pub p: u64,
    pub t: u64,
    pub s: u64,
    pub nu: u64,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub k_max: u32,
    pub strategy: Strategy,
    pub steps: Vec<StepPlan>,
}

impl Schedule {
    pub fn nu(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.nu).collect()
    }

    pub fn total_queries(&self) -> u64 {
        self.steps
            .iter()
            .map(|s| 2 * s.nu * s.p * s.s * s.l as u64)
            .sum()
    }

    pub fn check(&self) -> Result<()> {
        for st in &self.steps {
            if st.p * st.t * st.s != 1u64 << (st.k - 1) || st.m != 1u64 << (st.k - 1) {
                return Err(PaeError::Contract(format!(
                    "step {} violates P·T·S = 2^(k-1)",
                    st.k
                )));
            }
        }
        Ok(())
    }
}

/// K = ⌈log₂(1/ε)⌉ + 6.
pub fn proof_k(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PaeError::Domain(format!("eps = {eps} outside (0, 1)")));
    }
    Ok((1.0 / eps).log2().ceil() as u32 + 6)
}

pub fn build_schedule(eps: f64, opts: &ScheduleOptions) -> Result<Schedule> {
    build_schedule_k(proof_k(eps)?, opts)
}

/// Schedule with K given directly (experiment mode).
pub fn build_schedule_k(k_max: u32, opts: &ScheduleOptions) -> Result<Schedule> {
    if !(1..=62).contains(&k_max) {
        return Err(PaeError::Config(format!("K = {k_max} outside 1..=62")));
    }
    if let NuVariant::Theoretical { beta } = opts.nu {
        if !(beta > 0.0 && beta < BETA_MAX) {
            return Err(PaeError::Config(format!("beta = {beta} outside (0, √6/8)")));
        }
    }
    let top = 1u64 << (k_max - 1);
    let p_max = match opts.strategy {
        Strategy::FullParallel => top,
        Strategy::FullSequential => 1,
        Strategy::General { p } => {
            if p == 0 || !p.is_power_of_two() || p > top {
                return Err(PaeError::Config(format!(
                    "P = {p} is not a power-of-two divisor of 2^(K-1) = {top}"
                )));
            }
            p
        }
    };
    if let Some(0) = opts.t_cap {
        return Err(PaeError::Config("t_cap must be positive".into()));
    }
    if let Some(c) = opts.t_cap {
        if !c.is_power_of_two() {
            return Err(PaeError::Config(format!(
                "t_cap = {c} is not a power of two"
            )));
        }
    }
    let mut steps = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let m = 1u64 << (k - 1);
        let ts = m.min(top / p_max);
        let p = m / ts;
        let (t, s) = match opts.t_cap {
            Some(c) if ts > c => (c, ts / c),
            _ => (ts, 1),
        };
        let l = match &opts.l_mode {
            LMode::Empirical => select_l_empirical(t as f64),
            LMode::Certified { beta } => select_l(t as f64, beta / (2f64.sqrt() * (p * s) as f64))?,
            LMode::S5 => {
                let i = (k - 1) as usize;
                if i >= S5_PLUS_TABLE.len() {
                    return Err(PaeError::Config(format!(
                        "the S5 table covers K <= 9, got {k_max}"
                    )));
                }
                S5_PLUS_TABLE[i].max(S5_PLUS_I_TABLE[i])
            }
            LMode::Table(v) => *v.get((k - 1) as usize).ok_or_else(|| {
                PaeError::Config(format!("L table has {} entries, K = {k_max}", v.len()))
            })?,
        };
        if l == 0 || l % 2 == 1 {
            return Err(PaeError::Config(format!(
                "L_{k} = {l} must be a positive even integer"
            )));
        }
        let nu = schedule_nu(k_max, k, opts.nu);
        steps.push(StepPlan {
            k,
            m,
            p,
            t,
            s,
            nu,
            l,
        });
    }
    let sched = Schedule {
        k_max,
        strategy: opts.strategy,
        steps,
    };
    sched.check()?;
    Ok(sched)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Exact parity probability from per-branch 4x4 contraction.
    Analytic,
    /// Dense statevector over all P(n+1) qubits.
    Statevector(OracleStyle),
    /// Ṽ substituted for the synthesized shifter.
    Ideal,
}

type Slot = Arc<OnceLock<std::result::Result<Arc<PhaseShifterSpec>, String>>>;

/// Synthesized shifters shared across steps, trials and threads.
#[derive(Default)]
pub struct ShifterCache {
    map: Mutex<HashMap<(u64, usize), Slot>>,
}

impl ShifterCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, t: u64, l: usize) -> Result<Arc<PhaseShifterSpec>> {
        let cell = {
            let mut m = self.map.lock().expect("cache lock");
            m.entry((t, l)).or_default().clone()
        };
        cell.get_or_init(|| {
            PhaseShifterSpec::synthesize(t as f64, l, &SolveMethod::LayerPeel)
                .map(Arc::new)
                .map_err(|e| e.to_string())
        })
        .clone()
        .map_err(|msg| PaeError::Synthesis {
            msg: format!("T={t} L={l}: {msg}"),
            at: f64::NAN,
            value: f64::NAN,
        })
    }

    /// Inserts a pre-solved shifter (e.g. loaded from an angle file).
    pub fn insert(&self, spec: PhaseShifterSpec) {
        let key = (spec.t as u64, spec.l);
        let cell = OnceLock::new();
        let _ = cell.set(Ok(Arc::new(spec)));
        self.map
            .lock()
            .expect("cache lock")
            .insert(key, Arc::new(cell));
    }
}

fn circuit_for(
    step: &StepPlan,
    inst: &AmplitudeInstance,
    backend: Backend,
    cache: &ShifterCache,
) -> Result<ParallelCircuit> {
    let shifter = match backend {
        Backend::Ideal => Shifter::Ideal { t: step.t as f64 },
        _ => Shifter::Synthesized(cache.get(step.t, step.l)?),
    };
    Ok(ParallelCircuit::new(
        step.p as usize,
        shifter,
        step.s as u32,
        *inst,
    ))
}

/// Exact even-parity probabilities (PLUS, PLUS_I) of one step.
pub fn step_probabilities(
    step: &StepPlan,
    inst: &AmplitudeInstance,
    backend: Backend,
    cache: &ShifterCache,
) -> Result<(f64, f64)> {
    let c = circuit_for(step, inst, backend, cache)?;
    let prob = |setting| match backend {
        Backend::Statevector(style) => statevector_probability(&c, setting, style),
        _ => Ok(setting_probability(&c, setting)),
    };
    Ok((
        prob(MeasurementSetting::Plus)?,
        prob(MeasurementSetting::PlusI)?,
    ))
}

/// Derived seed for one (step, setting) stream.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z ^= p
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(z << 6)
            .wrapping_add(z >> 2);
        z = splitmix(z);
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub plan: StepPlan,
    pub p_plus: f64,
    pub p_i: f64,
    pub h_plus: u64,
    pub h_i: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceReport {
    pub n: u64,
    pub oracle_depth: u64,
    pub ghz_layers: u32,
    pub width: u64,
}

impl ResourceReport {
    pub fn from_records(records: &[StepRecord], n_qubits: usize) -> Self {
        resources(records.iter().map(|r| &r.plan), n_qubits)
    }
}

pub fn resources<'a>(steps: impl Iterator<Item = &'a StepPlan>, n_qubits: usize) -> ResourceReport {
    let mut r = ResourceReport {
        n: 0,
        oracle_depth: 0,
        ghz_layers: 0,
        width: 0,
    };
    for st in steps {
        r.n += 2 * st.nu * st.p * st.s * st.l as u64;
        r.oracle_depth = r.oracle_depth.max(st.s * st.l as u64);
        r.ghz_layers = r.ghz_layers.max(ghz_depth(st.p as usize));
        r.width = r.width.max(st.p * (n_qubits as u64 + 1));
    }
    r
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub estimate: PhaseEstimate,
    pub report: ResourceReport,
    pub records: Vec<StepRecord>,
}

/// Runs every step (concurrently), samples ν_k shots per setting and feeds RPE.
pub fn run(
    inst: &AmplitudeInstance,
    schedule: &Schedule,
    backend: Backend,
    seed: u64,
    cache: &ShifterCache,
) -> Result<RunOutput> {
    let records = schedule
        .steps
        .par_iter()
        .map(|st| {
            let (p_plus, p_i) = step_probabilities(st, inst, backend, cache)?;
            let h_plus = sample_counts(p_plus, st.nu, mix_seed(seed, &[st.k as u64, 0]));
            let h_i = sample_counts(p_i, st.nu, mix_seed(seed, &[st.k as u64, 1]));
            Ok(StepRecord {
                plan: *st,
                p_plus,
                p_i,
                h_plus,
                h_i,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let freqs: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            (
                r.h_plus as f64 / r.plan.nu as f64,
                r.h_i as f64 / r.plan.nu as f64,
            )
        })
        .collect();
    let estimate = estimate_from_frequencies(&freqs)?;
    let report = ResourceReport::from_records(&records, inst.n);
    Ok(RunOutput {
        estimate,
        report,
        records,
    })
}

/// RPE on exact probabilities (no shot noise).
pub fn run_exact(
    inst: &AmplitudeInstance,
    schedule: &Schedule,
    backend: Backend,
    cache: &ShifterCache,
) -> Result<PhaseEstimate> {
    let freqs = schedule
        .steps
        .iter()
        .map(|st| step_probabilities(st, inst, backend, cache))
        .collect::<Result<Vec<_>>>()?;
    estimate_from_frequencies(&freqs)
}

/// Heisenberg-limit reference ε = π/(2(N−1)).
pub fn hl_reference(n: u64) -> Result<f64> {
    if n <= 1 {
        return Err(PaeError::Domain(format!("N = {n} must exceed 1")));
    }
    Ok(PI / (2.0 * (n - 1) as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremResources {
    pub k_max: u32,
    pub n: u64,
    pub oracle_depth: u64,
    pub ghz_layers: u32,
    /// oracle_depth + ⌈log₂ P⌉.
    pub depth: u64,
}

/// Concrete sums behind the asymptotic claims for a proof-mode schedule
/// with the theoretical ν at bias β.
pub fn theorem_resources(eps: f64, p: u64, beta: f64, l_mode: LMode) -> Result<TheoremResources> {
    let k_max = proof_k(eps)?;
    let opts = ScheduleOptions {
        strategy: Strategy::General { p },
        nu: NuVariant::Theoretical { beta },
        l_mode,
        t_cap: None,
    };
    let sched = build_schedule_k(k_max, &opts)?;
    Ok(theorem_resources_for(&sched))
}

pub fn theorem_resources_for(sched: &Schedule) -> TheoremResources {
    let r = resources(sched.steps.iter(), 0);
    TheoremResources {
        k_max: sched.k_max,
        n: r.n,
        oracle_depth: r.oracle_depth,
        ghz_layers: r.ghz_layers,
        depth: r.oracle_depth + r.ghz_layers as u64,
    }
}
