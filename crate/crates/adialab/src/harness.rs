//! End-to-end solver, experiment sweeps, and the validation driver.
//!
//! `solve` runs the two-phase algorithm: a discrete adiabatic evolution to
//! constant error (step count from the second-theorem bound unless pinned),
//! then Dolph-Chebyshev filtering to the target error, with a
//! repeat-until-success loop sampled from the measured success probability.
//! `sweep` evaluates bounds (and optionally measured errors) over a
//! `(kappa, p, T)` grid. `validate` drives the operator-identity, lemma-bound
//! and filter-equivalence suites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adiabatic::{
    lemma_run_options, proof_operator_suite, run_adiabatic, AdiabaticError, AdiabaticRun,
    RunOptions,
};
use crate::bounds::{
    asymptotic_constants, lemma_bound_suite, theorem1_bound, theorem2_bound, BoundInputs,
    BoundReport, SweepRow,
};
use crate::filter::{
    apply_filter_lcu, apply_filter_spectral, chebyshev_order, window_weights, FilterError,
    FilterPlan,
};
use crate::problem::{
    exact_solution, random_instance, read_instance, HamiltonianFamily, ProblemError, QlspInstance,
    Variant,
};
use crate::schedule::{CMode, DiffCoeffs, GapModel, GapProfile, Schedule, ScheduleError};
use crate::spectral::{C64, CMat, CVec};
use crate::walk::{alpha_at_f, block_encode_h_at_f, reference_walk, walk_step_at_f, WalkError};

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("auto-T search exceeded the step cap {cap} (bound {bound:.3} at T = {t})")]
    AutoTExceedsCap { cap: usize, t: usize, bound: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Adiabatic(#[from] AdiabaticError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which walk construction an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkKind {
    /// Full circuit-level block encoding (dimension `32N` for `general`).
    AppendixE,
    /// One-ancilla dilation of the encoded Hamiltonian (dimension `8N`).
    Reference,
}

impl WalkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WalkKind::AppendixE => "appendix-e",
            WalkKind::Reference => "reference",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "appendix-e" => Some(WalkKind::AppendixE),
            "reference" => Some(WalkKind::Reference),
            _ => None,
        }
    }
}

/// Hard step caps keeping runs at desk scale.
pub const APPENDIX_E_T_CAP: usize = 1 << 14;
pub const REFERENCE_T_CAP: usize = 1 << 22;

fn default_epsilon() -> f64 {
    1e-3
}
fn default_adiabatic_target() -> f64 {
    0.5
}
fn default_trials() -> usize {
    200
}
fn default_n() -> usize {
    2
}
fn default_kappa() -> f64 {
    4.0
}
fn default_p() -> f64 {
    1.5
}
fn default_variant() -> Variant {
    Variant::General
}
fn default_gap_model() -> GapModel {
    GapModel::LinearOverSqrt2
}
fn default_c_mode() -> CMode {
    CMode::Analytic
}
fn default_walk() -> WalkKind {
    WalkKind::Reference
}

/// Configuration of a single solve or evolution run. Deserialises from JSON;
/// every field has a default so partial configs are fine.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub seed: u64,
    /// Load the instance from a JSON file instead of generating it.
    #[serde(default)]
    pub instance_path: Option<std::path::PathBuf>,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Walk steps; `None` selects the smallest even T whose second-theorem
    /// bound is at most `adiabatic_target`.
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_gap_model")]
    pub gap_model: GapModel,
    #[serde(default = "default_c_mode")]
    pub c_mode: CMode,
    #[serde(default = "default_walk")]
    pub walk: WalkKind,
    #[serde(default = "default_adiabatic_target")]
    pub adiabatic_target: f64,
    /// Trials for the repeat-until-success statistics.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub out: Option<std::path::PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl RunConfig {
    pub fn load_instance(&self) -> Result<QlspInstance, HarnessError> {
        match &self.instance_path {
            Some(path) => Ok(read_instance(path)?),
            None => Ok(random_instance(self.n, self.kappa, self.variant, self.seed)?),
        }
    }

    fn t_cap(&self) -> usize {
        match self.walk {
            WalkKind::AppendixE => APPENDIX_E_T_CAP,
            WalkKind::Reference => REFERENCE_T_CAP,
        }
    }
}

/// The solve outcome, serialisable as the run's JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub t: usize,
    pub auto_t: bool,
    /// Which theorem produced the stopping bound ("second-theorem" or
    /// "first-theorem" when the former's precondition failed).
    pub stopping_rule: String,
    /// The bound value guaranteeing the adiabatic phase.
    pub adiabatic_error_bound: f64,
    pub filter_order: usize,
    pub success_probability: f64,
    /// Squared overlap with the exact solution state.
    pub fidelity: f64,
    /// `|| |x~> - |x> ||` minimised over the global phase.
    pub state_error: f64,
    pub repetitions: usize,
    pub mean_repetitions: f64,
    /// Walk applications: `T + repetitions * ell`, exactly.
    pub oracle_calls: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Final state as `[re, im]` pairs.
    pub final_state: Vec<[f64; 2]>,
}

/// Walk unitary for step `n` of `T` under the configured construction.
pub fn walk_matrix(
    inst: &QlspInstance,
    fam: &HamiltonianFamily,
    sch: &Schedule,
    kind: WalkKind,
    n: usize,
) -> Result<CMat, HarnessError> {
    let s = n as f64 / sch.t as f64;
    let (f, _, _) = sch.f_df_ddf(s)?;
    match kind {
        WalkKind::AppendixE => Ok(walk_step_at_f(inst, f, s)?.w),
        WalkKind::Reference => {
            let h = fam.h_at(f)? * C64::new(alpha_at_f(f), 0.0);
            Ok(reference_walk(&h, s)?.w)
        }
    }
}

/// Embed a Hamiltonian-space vector into the walk space (flagged ancillas in
/// the all-zero state).
pub fn embed_state(
    inst: &QlspInstance,
    fam: &HamiltonianFamily,
    kind: WalkKind,
    v: &CVec,
) -> Result<CVec, HarnessError> {
    match kind {
        WalkKind::Reference => {
            let mut out = CVec::zeros(2 * fam.dim);
            for i in 0..fam.dim {
                out[i] = v[i];
            }
            Ok(out)
        }
        WalkKind::AppendixE => {
            let be = block_encode_h_at_f(inst, 0.0)?;
            let idx = be.flag_indices();
            let mut out = CVec::zeros(be.total_dim);
            for (sys, &glob) in idx.iter().enumerate() {
                out[glob] = v[sys];
            }
            Ok(out)
        }
    }
}

/// Smallest even `T` within `cap` whose stopping bound is at most `target`.
/// Returns `(T, bound, rule)`.
pub fn auto_t(
    p: f64,
    kappa: f64,
    gap_model: GapModel,
    target: f64,
    cap: usize,
) -> Result<(usize, f64, &'static str), HarnessError> {
    let eval = |t: usize| -> Result<(f64, &'static str), HarnessError> {
        let sch = Schedule::new(p, kappa, t, gap_model)?;
        let coeffs = sch.diff_coeffs(CMode::Analytic)?;
        let profile = sch.gap_profile()?;
        let r2 = theorem2_bound(&profile, &coeffs, t);
        if r2.precondition_ok {
            Ok((r2.total, "second-theorem"))
        } else {
            let r1 = theorem1_bound(&profile, &coeffs, t);
            Ok((r1.total, "first-theorem"))
        }
    };
    let mut hi = 128usize;
    loop {
        let (b, _) = eval(hi)?;
        if b <= target {
            break;
        }
        if hi >= cap {
            return Err(HarnessError::AutoTExceedsCap { cap, t: hi, bound: b });
        }
        hi = (hi * 2).min(cap.next_multiple_of(2));
    }
    // bisect down to the smallest even T
    let mut lo = (hi / 2).max(2);
    while lo + 2 < hi {
        let mid = ((lo + hi) / 2 + 1) & !1usize; // even midpoint
        let (b, _) = eval(mid)?;
        if b <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (bound, rule) = eval(hi)?;
    Ok((hi, bound, rule))
}

/// End-to-end solve.
pub fn solve(config: &RunConfig) -> Result<SolveReport, HarnessError> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(HarnessError::Config(format!("epsilon {} outside (0,1)", config.epsilon)));
    }
    let inst = config.load_instance()?;
    let fam = HamiltonianFamily::new(&inst);
    let cap = config.t_cap();
    let (t, bound, rule, auto) = match config.t {
        Some(t) => {
            if t == 0 || t % 2 != 0 {
                return Err(HarnessError::Config(format!("T must be even and positive, got {t}")));
            }
            if t > cap {
                return Err(HarnessError::AutoTExceedsCap { cap, t, bound: f64::NAN });
            }
            let sch = Schedule::new(config.p, inst.kappa, t, config.gap_model)?;
            let coeffs = sch.diff_coeffs(CMode::Analytic)?;
            let profile = sch.gap_profile()?;
            let r = theorem2_bound(&profile, &coeffs, t);
            (t, r.total, "second-theorem", false)
        }
        None => {
            let (t, b, rule) = auto_t(config.p, inst.kappa, config.gap_model, config.adiabatic_target, cap)?;
            (t, b, rule, true)
        }
    };
    let sch = Schedule::new(config.p, inst.kappa, t, config.gap_model)?;

    // adiabatic phase: evolve the embedded b-state through the walk sequence
    let psi0 = embed_state(&inst, &fam, config.walk, &fam.initial_state())?;
    let mut psi = psi0;
    for n in 0..t {
        let w = walk_matrix(&inst, &fam, &sch, config.walk, n)?;
        psi = &w * psi;
    }
    let w_final = walk_matrix(&inst, &fam, &sch, config.walk, t)?;

    // filtering phase
    let ell = chebyshev_order(inst.kappa, config.epsilon)?;
    let plan = window_weights(ell, config.epsilon)?;
    let (filtered, success_probability, _trace) = apply_filter_lcu(&psi, &w_final, &plan)?;
    let norm = filtered.norm();
    let out_state = if norm > 0.0 { &filtered / C64::new(norm, 0.0) } else { filtered.clone() };

    // repeat-until-success statistics, sampled from the measured probability
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x51f7_ee15_u64);
    let mut repetitions = 0usize;
    let mut total_reps = 0usize;
    for trial in 0..config.trials.max(1) {
        let mut reps = 1usize;
        while rng.gen::<f64>() > success_probability && reps < 10_000 {
            reps += 1;
        }
        if trial == 0 {
            repetitions = reps;
        }
        total_reps += reps;
    }
    let mean_repetitions = total_reps as f64 / config.trials.max(1) as f64;

    // compare against the exact solution embedded in the walk space
    let sol = embed_state(&inst, &fam, config.walk, &fam.solution_state()?)?;
    let overlap = sol.dotc(&out_state).norm();
    let fidelity = overlap * overlap;
    let state_error = (2.0 - 2.0 * overlap).max(0.0).sqrt();
    let _ = exact_solution(&inst)?; // instance must be solvable

    let final_state: Vec<[f64; 2]> = (0..out_state.len()).map(|i| [out_state[i].re, out_state[i].im]).collect();
    Ok(SolveReport {
        t,
        auto_t: auto,
        stopping_rule: rule.to_string(),
        adiabatic_error_bound: bound,
        filter_order: ell,
        success_probability,
        fidelity,
        state_error,
        repetitions,
        mean_repetitions,
        oracle_calls: t + repetitions * ell,
        epsilon: config.epsilon,
        seed: config.seed,
        final_state,
    })
}

/// Operator-level adiabatic run with measured coefficients and gaps, plus
/// both theorem bounds evaluated on the measured profile.
pub struct MeasuredRun {
    pub run: AdiabaticRun,
    pub coeffs: DiffCoeffs,
    pub profile: GapProfile,
    pub bound_thm1: BoundReport,
    pub bound_thm2: BoundReport,
}

/// Execute a full operator-level run and assemble the measured profile.
pub fn measured_run(
    inst: &QlspInstance,
    sch: &Schedule,
    kind: WalkKind,
    opts: &RunOptions,
) -> Result<MeasuredRun, HarnessError> {
    let fam = HamiltonianFamily::new(inst);
    let t = sch.t;
    let mut failure: Option<HarnessError> = None;
    let run = run_adiabatic(
        |n| match walk_matrix(inst, &fam, sch, kind, n) {
            Ok(w) => w,
            Err(e) => {
                failure = Some(e);
                CMat::identity(1, 1)
            }
        },
        t,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let run = run?;
    let c1: Vec<f64> = (0..t).map(|n| run.steps[n].c1.unwrap()).collect();
    let mut c2: Vec<f64> = (0..t - 1).map(|n| run.steps[n].c2.unwrap()).collect();
    c2.push(*c2.last().unwrap());
    let coeffs = DiffCoeffs::from_measured_arrays(c1, c2);
    let gaps: Vec<f64> = run.steps.iter().map(|d| d.gap).collect();
    let profile = GapProfile::from_measured(&gaps, t);
    let inputs = BoundInputs::measured(inst.kappa, sch.p, t);
    let bound_thm1 = theorem1_bound(&profile, &coeffs, t).with_inputs(inputs.clone());
    let bound_thm2 = theorem2_bound(&profile, &coeffs, t).with_inputs(inputs);
    Ok(MeasuredRun { run, coeffs, profile, bound_thm1, bound_thm2 })
}

/// Grid specification for a bound (and optionally measured-error) sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kappas: Vec<f64>,
    pub ps: Vec<f64>,
    pub ts: Vec<usize>,
    #[serde(default = "default_gap_model")]
    pub gap_model: GapModel,
    #[serde(default = "default_c_mode")]
    pub c_mode: CMode,
    /// When set, also run measured-error evolutions (reference walk) for
    /// cells with `T <= measure_cap`.
    #[serde(default)]
    pub measure: Option<SweepMeasure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMeasure {
    pub n: usize,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub seed: u64,
    pub measure_cap: usize,
}

/// One sweep cell result.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub row: SweepRow,
    pub measured_error: Option<f64>,
    pub status: String,
}

/// Evaluate the sweep grid (cells in deterministic kappa-major order; cells
/// run in parallel, failures recorded in-row).
pub fn sweep(config: &SweepConfig) -> Vec<SweepCell> {
    let mut cells: Vec<(f64, f64, usize)> = Vec::new();
    for &k in &config.kappas {
        for &p in &config.ps {
            for &t in &config.ts {
                cells.push((k, p, t));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(kappa, p, t)| {
            let mut status = "ok".to_string();
            let (b1, b2, pre) = match Schedule::new(p, kappa, t, config.gap_model) {
                Ok(sch) => match (sch.diff_coeffs(config.c_mode), sch.gap_profile()) {
                    (Ok(coeffs), Ok(profile)) => {
                        let r1 = theorem1_bound(&profile, &coeffs, t);
                        let r2 = theorem2_bound(&profile, &coeffs, t);
                        let pre = r1.precondition_ok && r2.precondition_ok;
                        (r1.total, r2.total, pre)
                    }
                    _ => {
                        status = "profile-error".into();
                        (f64::NAN, f64::NAN, false)
                    }
                },
                Err(e) => {
                    status = format!("config-error: {e}");
                    (f64::NAN, f64::NAN, false)
                }
            };
            let asym = asymptotic_constants(kappa, t, p, false);
            let measured_error = match &config.measure {
                Some(m) if t <= m.measure_cap => {
                    let res = (|| -> Result<f64, HarnessError> {
                        let inst = random_instance(m.n, kappa, m.variant, m.seed)?;
                        let sch = Schedule::new(p, kappa, t, config.gap_model)?;
                        let mr = measured_run(&inst, &sch, WalkKind::Reference, &RunOptions::default())?;
                        Ok(mr.run.error)
                    })();
                    match res {
                        Ok(e) => Some(e),
                        Err(e) => {
                            status = format!("measure-error: {e}");
                            None
                        }
                    }
                }
                Some(_) => {
                    status = "skipped".into();
                    None
                }
                None => None,
            };
            SweepCell {
                row: SweepRow {
                    kappa,
                    p,
                    t,
                    gap_model: config.gap_model.as_str().into(),
                    c_mode: config.c_mode.as_str().into(),
                    bound_thm1: b1,
                    bound_thm2: b2,
                    bound_asymptotic: asym.value,
                    precondition_ok: pre,
                },
                measured_error,
                status,
            }
        })
        .collect()
}

/// CSV for sweeps that include measured errors.
pub fn sweep_measured_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from(
        "kappa,p,T,gap_model,c_mode,bound_thm15,bound_thm3,bound_thm16,precondition_ok,measured_error,status\n",
    );
    for c in cells {
        let m = c.measured_error.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.row.kappa,
            c.row.p,
            c.row.t,
            c.row.gap_model,
            c.row.c_mode,
            c.row.bound_thm1,
            c.row.bound_thm2,
            c.row.bound_asymptotic,
            c.row.precondition_ok,
            m,
            c.status,
        ));
    }
    out
}

/// One validation suite outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub pass: bool,
    pub detail: String,
}

/// Run the selected validation suites ("identities", "lemma-bounds",
/// "filter", or "all").
pub fn validate(selector: &str, seed: u64) -> Result<Vec<SuiteResult>, HarnessError> {
    let mut out = Vec::new();
    let want = |name: &str| selector == "all" || selector == name;
    if !["all", "identities", "lemma-bounds", "filter"].contains(&selector) {
        return Err(HarnessError::Config(format!("unknown validation suite '{selector}'")));
    }

    if want("identities") {
        let inst = random_instance(2, 4.0, Variant::General, seed)?;
        let t = 32usize;
        let sch = Schedule::new(1.5, 4.0, t, GapModel::LinearOverSqrt2)?;
        let mr = measured_run(
            &inst,
            &sch,
            WalkKind::Reference,
            &RunOptions { keep_operators: true, proof_diagnostics: true, track_cumulative_error: false },
        )?;
        let report = proof_operator_suite(mr.run.operators.as_ref().unwrap(), t)?;
        let pass = report.max_residual() <= 1e-8;
        out.push(SuiteResult {
            suite: "identities".into(),
            pass,
            detail: format!(
                "volterra {:.2e}, ripple {:.2e}, transport-identity {:.2e}, block-relation {:.2e}, summation-by-parts {:.2e}",
                report.volterra, report.theta_relation, report.v_identity, report.main_eq, report.sum_by_parts
            ),
        });
    }

    if want("lemma-bounds") {
        let mut worst_margin = f64::INFINITY;
        let mut failures = 0usize;
        let mut checks = 0usize;
        for &kappa in &[2.0, 6.0] {
            let inst = random_instance(2, kappa, Variant::General, seed + 1)?;
            let sch = Schedule::new(1.5, kappa, 64, GapModel::LinearOverSqrt2)?;
            let mr = measured_run(&inst, &sch, WalkKind::Reference, &lemma_run_options())?;
            let rep = lemma_bound_suite(&mr.run);
            worst_margin = worst_margin.min(rep.min_margin);
            failures += rep.failures.len();
            checks += rep.checks;
        }
        out.push(SuiteResult {
            suite: "lemma-bounds".into(),
            pass: failures == 0,
            detail: format!("{checks} checks, {failures} failures, min bound/measured margin {worst_margin:.3}"),
        });
    }

    if want("filter") {
        let inst = random_instance(2, 4.0, Variant::General, seed + 2)?;
        let fam = HamiltonianFamily::new(&inst);
        let h = fam.h_at(1.0)? * C64::new(alpha_at_f(1.0), 0.0);
        let w = reference_walk(&h, 1.0)?.w;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 3);
        let mut worst = 0.0f64;
        for &ell in &[2usize, 4, 8, 16] {
            let plan = window_weights(ell, 1e-2)?;
            for _ in 0..5 {
                let mut st = CVec::from_fn(w.nrows(), |_, _| {
                    C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                let norm = st.norm();
                st /= C64::new(norm, 0.0);
                let (a, pa) = apply_filter_spectral(&st, &w, &plan)?;
                let (b, pb, _) = apply_filter_lcu(&st, &w, &plan)?;
                worst = worst.max((&a - &b).norm()).max((pa - pb).abs());
            }
        }
        out.push(SuiteResult {
            suite: "filter".into(),
            pass: worst <= 1e-8,
            detail: format!("max circuit-vs-spectral deviation {worst:.2e}"),
        });
    }

    Ok(out)
}

/// A degenerate plan used by tests and the CLI filter dump.
pub fn plan_for(kappa: f64, epsilon: f64) -> Result<FilterPlan, HarnessError> {
    let ell = chebyshev_order(kappa, epsilon)?;
    Ok(window_weights(ell, epsilon)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_t_monotone_in_kappa() {
        let (t2, b2, _) = auto_t(1.5, 2.0, GapModel::LinearOverSqrt2, 0.5, REFERENCE_T_CAP).unwrap();
        let (t4, b4, _) = auto_t(1.5, 4.0, GapModel::LinearOverSqrt2, 0.5, REFERENCE_T_CAP).unwrap();
        assert!(t2 < t4);
        assert!(b2 <= 0.5 && b4 <= 0.5);
        assert_eq!(t2 % 2, 0);
        assert_eq!(t4 % 2, 0);
        // smallest even: two fewer steps must violate the target
        let sch = Schedule::new(1.5, 2.0, t2 - 2, GapModel::LinearOverSqrt2).unwrap();
        let r = theorem2_bound(&sch.gap_profile().unwrap(), &sch.diff_coeffs(CMode::Analytic).unwrap(), t2 - 2);
        assert!(r.total > 0.5 || !r.precondition_ok);
    }

    #[test]
    fn auto_t_cap_refused() {
        match auto_t(1.5, 50.0, GapModel::LinearOverSqrt2, 0.5, 1 << 10) {
            Err(HarnessError::AutoTExceedsCap { .. }) => {}
            other => panic!("expected cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn solve_identity_like_instance() {
        // trivial evolution: fixed small T on an easy instance
        let config = RunConfig {
            n: 2,
            kappa: 2.0,
            seed: 1,
            t: None,
            epsilon: 1e-2,
            trials: 50,
            ..RunConfig::default()
        };
        let report = solve(&config).unwrap();
        assert!(report.state_error <= 1e-2, "error {}", report.state_error);
        assert!(report.success_probability >= 0.5);
        assert!(report.mean_repetitions <= 2.5);
        assert_eq!(report.oracle_calls, report.t + report.repetitions * report.filter_order);
        assert!(report.adiabatic_error_bound <= 0.5);
    }

    #[test]
    fn solve_is_deterministic() {
        let config = RunConfig { n: 2, kappa: 2.0, seed: 9, epsilon: 1e-2, trials: 20, ..RunConfig::default() };
        let a = solve(&config).unwrap();
        let b = solve(&config).unwrap();
        assert_eq!(a.state_error, b.state_error);
        assert_eq!(a.repetitions, b.repetitions);
        assert_eq!(a.t, b.t);
    }

    #[test]
    fn sweep_grid_shapes() {
        let cfg = SweepConfig {
            kappas: vec![2.0, 4.0],
            ps: vec![1.5],
            ts: vec![128, 256],
            gap_model: GapModel::Linear,
            c_mode: CMode::Analytic,
            measure: Some(SweepMeasure { n: 2, variant: Variant::General, seed: 0, measure_cap: 128 }),
        };
        let cells = sweep(&cfg);
        assert_eq!(cells.len(), 4);
        let skipped = cells.iter().filter(|c| c.status == "skipped").count();
        assert_eq!(skipped, 2); // the T = 256 cells exceed the measure cap
        let measured = cells.iter().filter(|c| c.measured_error.is_some()).count();
        assert_eq!(measured, 2);
        let csv = sweep_measured_csv(&cells);
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn validate_all_passes() {
        let results = validate("all", 7).unwrap();
        assert_eq!(results.len(), 3);
        for r in &results {
            assert!(r.pass, "{}: {}", r.suite, r.detail);
        }
        assert!(validate("bogus", 0).is_err());
    }
}
