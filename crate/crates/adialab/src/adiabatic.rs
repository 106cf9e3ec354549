//! Discrete adiabatic evolution and its exact ideal counterpart.
//!
//! A run consumes the walk operators `W(n/T)` in order. At each step the
//! spectrum is split into the arcs around phases 0 and pi (the protected
//! eigenspace `P`) and everything else (`Q`); the ideal step
//!
//! ```text
//! V(s) = [I - (DP)^2]^{-1/2} (P(s+1/T) P(s) + Q(s+1/T) Q(s)),
//! W_A(s) = V(s) W(s)
//! ```
//!
//! maps eigenspaces exactly, and the accumulated products `U` and `U_A`
//! yield the adiabatic error `||U(1) - U_A(1)||`. The run also streams the
//! measured quantities every operator bound in [`crate::bounds`] consumes:
//! walk-difference norms, projector-difference norms, and the norms of the
//! proof operators (wave, ripple, kernel, and the summation-by-parts
//! family).

use thiserror::Error;

use crate::spectral::{
    circle_distance, eye, inv_sqrt_psd, spectral_norm, sqrt_psd, unitary_eig, Arc, C64, CMat,
    CVec, EigenSystem, SpectralError,
};

#[derive(Error, Debug)]
pub enum AdiabaticError {
    #[error("projector rank changed from {expected} to {found} at step {step}: eigenvalue crossing")]
    RankChange { step: usize, expected: usize, found: usize },
    #[error("eigenphase gap {gap:.3e} at step {step} is below 1e-8; split is ill-defined")]
    GapCollapse { step: usize, gap: f64 },
    #[error("||DP|| = {norm:.6} >= 1 at step {step}; adiabatic decomposition undefined")]
    DpTooLarge { step: usize, norm: f64 },
    #[error("walk dimension changed from {expected} to {found} at step {step}")]
    DimensionMismatch { step: usize, expected: usize, found: usize },
    #[error("step count must be even, got {0}")]
    OddT(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Split of a walk spectrum into the protected arcs around 0 and pi and the
/// complementary spectrum.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Projector onto the protected eigenspace.
    pub projector: CMat,
    pub rank: usize,
    /// Minimum angular distance from {0, pi} to the complementary phases.
    pub gap: f64,
    /// The protected arcs (around 0 and around pi).
    pub arcs: (Arc, Arc),
    pub eigen: EigenSystem,
    /// Membership of each eigenvector (by `eigen` column) in the protected set.
    pub in_p: Vec<bool>,
}

/// Phases within this distance of {0, pi} are assigned to the protected set.
const P_MEMBERSHIP_TOL: f64 = 1e-8;

/// Split a walk unitary. If `prev` is given the rank must match, otherwise an
/// eigenvalue has crossed between the groups and the evolution is invalid.
pub fn spectral_split(w: &CMat, prev: Option<&SpectralSplit>) -> Result<SpectralSplit, AdiabaticError> {
    spectral_split_at(w, prev, 0)
}

fn spectral_split_at(
    w: &CMat,
    prev: Option<&SpectralSplit>,
    step: usize,
) -> Result<SpectralSplit, AdiabaticError> {
    let es = unitary_eig(w, 1e-8)?;
    let pi = std::f64::consts::PI;
    let dist = |phi: f64| circle_distance(phi, 0.0).min(circle_distance(phi, pi));
    let in_p: Vec<bool> = es.phases.iter().map(|&p| dist(p) <= P_MEMBERSHIP_TOL).collect();
    let mut gap = f64::INFINITY;
    for (k, &phi) in es.phases.iter().enumerate() {
        if !in_p[k] {
            gap = gap.min(dist(phi));
        }
    }
    if !gap.is_finite() {
        gap = pi;
    }
    if gap <= 1e-8 {
        return Err(AdiabaticError::GapCollapse { step, gap });
    }
    let half = gap / 2.0;
    let n = es.dimension;
    let mut p = CMat::zeros(n, n);
    let mut rank = 0usize;
    for k in 0..n {
        if in_p[k] {
            let v = es.vectors.column(k);
            p += v * v.adjoint();
            rank += 1;
        }
    }
    if let Some(prev) = prev {
        if prev.rank != rank {
            return Err(AdiabaticError::RankChange { step, expected: prev.rank, found: rank });
        }
    }
    Ok(SpectralSplit {
        projector: p,
        rank,
        gap,
        arcs: (Arc::new(0.0, half), Arc::new(pi, half)),
        eigen: es,
        in_p,
    })
}

/// The exact eigenspace-transport operators for one step.
#[derive(Debug, Clone)]
pub struct IdealStep {
    /// `S = P' P + Q' Q`.
    pub s_op: CMat,
    /// The unitary `V = [I - (DP)^2]^{-1/2} S`.
    pub v_op: CMat,
    /// The ideal walk `W_A = V W`.
    pub w_ideal: CMat,
    pub norm_dp: f64,
}

/// Build `(S, v, V, W_A)` from two consecutive splits and the walk at the
/// earlier time. Fails when `||DP|| >= 1`.
pub fn ideal_step(
    now: &SpectralSplit,
    next: &SpectralSplit,
    w_now: &CMat,
) -> Result<IdealStep, AdiabaticError> {
    ideal_step_at(now, next, w_now, 0)
}

fn ideal_step_at(
    now: &SpectralSplit,
    next: &SpectralSplit,
    w_now: &CMat,
    step: usize,
) -> Result<IdealStep, AdiabaticError> {
    let n = w_now.nrows();
    let dp = &next.projector - &now.projector;
    let norm_dp = spectral_norm(&dp);
    if norm_dp >= 1.0 {
        return Err(AdiabaticError::DpTooLarge { step, norm: norm_dp });
    }
    let q_now = eye(n) - &now.projector;
    let q_next = eye(n) - &next.projector;
    let s_op = &next.projector * &now.projector + q_next * q_now;
    let f_op = inv_sqrt_psd(&(eye(n) - &dp * &dp), 1e-14)?;
    let v_op = &f_op * &s_op;
    let w_ideal = &v_op * w_now;
    Ok(IdealStep { s_op, v_op, w_ideal, norm_dp })
}

/// Per-step measured diagnostics. Quantities that need a step beyond the end
/// of the run are `None`.
#[derive(Debug, Clone, Default)]
pub struct StepDiag {
    pub n: usize,
    pub s: f64,
    /// Measured angular gap at this step.
    pub gap: f64,
    /// `T ||W(s+1/T) - W(s)||`.
    pub c1: Option<f64>,
    /// `T^2 ||W(s+2/T) - 2 W(s+1/T) + W(s)||`.
    pub c2: Option<f64>,
    pub norm_dp: Option<f64>,
    pub norm_d2p: Option<f64>,
    pub norm_f: Option<f64>,
    pub norm_f_minus_i: Option<f64>,
    pub norm_v_minus_i: Option<f64>,
    pub norm_dv: Option<f64>,
    pub norm_dwa: Option<f64>,
    pub norm_domega: Option<f64>,
    /// `||X(n)|| = T ||I - V(n-1)^dag||`.
    pub norm_x: Option<f64>,
    pub norm_xt: Option<f64>,
    pub norm_dxt: Option<f64>,
    pub norm_a: Option<f64>,
    pub norm_b: Option<f64>,
    pub norm_z: Option<f64>,
    /// `||U(n) - U_A(n)||` after this step.
    pub cumulative_error: Option<f64>,
}

/// Full operator history of a run (small runs only).
#[derive(Debug, Clone)]
pub struct RunOperators {
    pub walks: Vec<CMat>,
    pub splits: Vec<SpectralSplit>,
    pub v_ops: Vec<CMat>,
    pub ideal_walks: Vec<CMat>,
    /// Cumulative products, `u_cum[n] = W(n-1/T) ... W(0)`, length T+1.
    pub u_cum: Vec<CMat>,
    pub ua_cum: Vec<CMat>,
}

/// The result of a discrete adiabatic run.
#[derive(Debug, Clone)]
pub struct AdiabaticRun {
    pub t: usize,
    pub dim: usize,
    /// `||U(1) - U_A(1)||`.
    pub error: f64,
    pub steps: Vec<StepDiag>,
    pub operators: Option<RunOperators>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep every per-step operator (memory scales with `T dim^2`).
    pub keep_operators: bool,
    /// Record `||U(n) - U_A(n)||` after every step (one extra norm per step).
    pub track_cumulative_error: bool,
    /// Measure the proof-operator norms (X, X-tilde, A, B, Z, Omega).
    pub proof_diagnostics: bool,
}

/// Options preset for runs feeding the lemma-bound suite.
pub fn lemma_run_options() -> RunOptions {
    RunOptions { keep_operators: false, track_cumulative_error: false, proof_diagnostics: true }
}

/// Ordered product of walk steps: `U = W((T-1)/T) ... W(1/T) W(0)`.
pub fn evolve(steps: &[CMat]) -> Result<CMat, AdiabaticError> {
    assert!(!steps.is_empty(), "need at least one step");
    let dim = steps[0].nrows();
    let mut u = eye(dim);
    for (n, w) in steps.iter().enumerate() {
        if w.nrows() != dim || w.ncols() != dim {
            return Err(AdiabaticError::DimensionMismatch { step: n, expected: dim, found: w.nrows() });
        }
        u = w * u;
    }
    Ok(u)
}

/// Run the discrete adiabatic evolution for a walk family `walk_at(n) =
/// W(n/T)`, `n = 0..=T`, collecting diagnostics.
pub fn run_adiabatic<F>(mut walk_at: F, t: usize, opts: &RunOptions) -> Result<AdiabaticRun, AdiabaticError>
where
    F: FnMut(usize) -> CMat,
{
    if t == 0 || t % 2 != 0 {
        return Err(AdiabaticError::OddT(t));
    }
    let tf = t as f64;
    let w0 = walk_at(0);
    let dim = w0.nrows();
    let mut steps: Vec<StepDiag> = (0..=t)
        .map(|n| StepDiag { n, s: n as f64 / tf, ..StepDiag::default() })
        .collect();

    let mut ops = if opts.keep_operators {
        Some(RunOperators {
            walks: Vec::with_capacity(t + 1),
            splits: Vec::with_capacity(t + 1),
            v_ops: Vec::with_capacity(t),
            ideal_walks: Vec::with_capacity(t),
            u_cum: vec![eye(dim)],
            ua_cum: vec![eye(dim)],
        })
    } else {
        None
    };

    // sliding windows (index = step n of the newest entry)
    let mut w_win: Vec<CMat> = vec![w0.clone()];
    let mut split_win: Vec<SpectralSplit> = vec![spectral_split_at(&w0, None, 0)?];
    steps[0].gap = split_win[0].gap;
    let mut v_win: Vec<CMat> = Vec::new();
    let mut f_win: Vec<(f64, f64)> = Vec::new(); // (||F||, ||F - I||)
    let mut wa_win: Vec<CMat> = Vec::new();
    let mut xt_win: Vec<Option<CMat>> = vec![None]; // X-tilde at step n
    let mut u = eye(dim);
    let mut ua = eye(dim);
    let mut omega_prev = eye(dim);

    for n in 0..t {
        let w_next = walk_at(n + 1);
        if w_next.nrows() != dim {
            return Err(AdiabaticError::DimensionMismatch { step: n + 1, expected: dim, found: w_next.nrows() });
        }
        let split_next = spectral_split_at(&w_next, Some(&split_win[0]), n + 1)?;
        steps[n + 1].gap = split_next.gap;

        let w_now = w_win.last().unwrap().clone();
        let split_now = split_win.last().unwrap();
        steps[n].c1 = Some(tf * spectral_norm(&(&w_next - &w_now)));
        if w_win.len() >= 2 {
            // second difference centered at n-1
            let w_prev = &w_win[w_win.len() - 2];
            let d2 = &w_next - &w_now * C64::new(2.0, 0.0) + w_prev;
            steps[n - 1].c2 = Some(tf * tf * spectral_norm(&d2));
            let dp2 = &split_next.projector - &split_now.projector * C64::new(2.0, 0.0)
                + &split_win[split_win.len() - 2].projector;
            steps[n - 1].norm_d2p = Some(spectral_norm(&dp2));
        }

        let ideal = ideal_step_at(split_now, &split_next, &w_now, n)?;
        steps[n].norm_dp = Some(ideal.norm_dp);
        steps[n].norm_v_minus_i = Some(spectral_norm(&(&ideal.v_op - eye(dim))));
        if opts.proof_diagnostics {
            let f_op = inv_sqrt_psd(
                &(eye(dim) - (&split_next.projector - &split_now.projector)
                    * (&split_next.projector - &split_now.projector)),
                1e-14,
            )?;
            f_win.push((spectral_norm(&f_op), spectral_norm(&(&f_op - eye(dim)))));
            steps[n].norm_f = Some(f_win.last().unwrap().0);
            steps[n].norm_f_minus_i = Some(f_win.last().unwrap().1);
            if f_win.len() > 3 {
                f_win.remove(0);
            }
        }
        if v_win.len() >= 1 {
            steps[n - 1].norm_dv = Some(spectral_norm(&(&ideal.v_op - v_win.last().unwrap())));
        }
        if wa_win.len() >= 1 {
            steps[n - 1].norm_dwa = Some(spectral_norm(&(&ideal.w_ideal - wa_win.last().unwrap())));
        }

        u = &w_now * u;
        ua = &ideal.w_ideal * ua;
        if opts.track_cumulative_error || n == t - 1 {
            steps[n].cumulative_error = Some(spectral_norm(&(&u - &ua)));
        }

        if opts.proof_diagnostics {
            // Omega(n+1) = U_A(n+1)^dag U(n+1)
            let omega = ua.adjoint() * &u;
            steps[n].norm_domega = Some(spectral_norm(&(&omega - &omega_prev)));
            omega_prev = omega;
            // X(n+1) = T (I - V(n)^dag); contour image against W(n+1)
            let x = (eye(dim) - ideal.v_op.adjoint()) * C64::new(tf, 0.0);
            steps[n + 1].norm_x = Some(spectral_norm(&x));
            let xt = xtilde(&split_next.eigen, &split_next.in_p, &x);
            steps[n + 1].norm_xt = Some(spectral_norm(&xt));
            if let Some(Some(xt_prev)) = xt_win.last() {
                // DXt(n) = Xt(n+1) - Xt(n)
                steps[n].norm_dxt = Some(spectral_norm(&(&xt - xt_prev)));
            }
            // A(n) = (V(n)^dag - I) W_A(n)
            let a_op = (ideal.v_op.adjoint() - eye(dim)) * &ideal.w_ideal;
            steps[n].norm_a = Some(spectral_norm(&a_op));
            // B(n) and Z(n) need DXt(n) and DW_A(n-1)
            if n >= 1 {
                if let (Some(Some(xt_n)), Some(wa_prev)) = (xt_win.last(), wa_win.last()) {
                    let dxt = &xt - xt_n;
                    let dwa = &ideal.w_ideal - wa_prev;
                    let b_op = &dxt * &ideal.w_ideal + &dwa * xt_n;
                    steps[n].norm_b = Some(spectral_norm(&b_op));
                    let z_op = ((&a_op * xt_n - xt_n * &a_op) + &b_op) * C64::new(tf, 0.0);
                    steps[n].norm_z = Some(spectral_norm(&z_op));
                }
            }
            xt_win.push(Some(xt));
            if xt_win.len() > 3 {
                xt_win.remove(0);
            }
        }

        if let Some(ops) = ops.as_mut() {
            ops.walks.push(w_now.clone());
            ops.splits.push(split_win.last().unwrap().clone());
            ops.v_ops.push(ideal.v_op.clone());
            ops.ideal_walks.push(ideal.w_ideal.clone());
            ops.u_cum.push(u.clone());
            ops.ua_cum.push(ua.clone());
        }

        v_win.push(ideal.v_op);
        wa_win.push(ideal.w_ideal);
        if v_win.len() > 2 {
            v_win.remove(0);
        }
        if wa_win.len() > 2 {
            wa_win.remove(0);
        }
        w_win.push(w_next.clone());
        split_win.push(split_next);
        if w_win.len() > 3 {
            w_win.remove(0);
        }
        if split_win.len() > 3 {
            split_win.remove(0);
        }
    }

    if let Some(ops) = ops.as_mut() {
        ops.walks.push(w_win.last().unwrap().clone());
        ops.splits.push(split_win.last().unwrap().clone());
    }

    let error = steps[t - 1].cumulative_error.expect("final error always recorded");
    Ok(AdiabaticRun { t, dim, error, steps, operators: ops })
}

/// The block-off-diagonal image of `X` under the resolvent double integral of
/// the walk, computed in the walk eigenbasis: entries `(a, b)` with `a` in P,
/// `b` outside become `-X_ab / (lambda_b - lambda_a)`, the mirrored block
/// gets the opposite sign, and the diagonal blocks vanish.
pub fn xtilde(es: &EigenSystem, in_p: &[bool], x: &CMat) -> CMat {
    let n = es.dimension;
    let lam: Vec<C64> = es.eigenvalues();
    let xe = es.vectors.adjoint() * x * &es.vectors;
    let mut m = CMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if in_p[a] && !in_p[b] {
                m[(a, b)] = -xe[(a, b)] / (lam[b] - lam[a]);
            } else if !in_p[a] && in_p[b] {
                m[(a, b)] = xe[(a, b)] / (lam[b] - lam[a]);
            }
        }
    }
    &es.vectors * m * es.vectors.adjoint()
}

/// Residuals of the operator identities, assembled from a stored run.
#[derive(Debug, Clone)]
pub struct ProofOperatorReport {
    /// Volterra equation: `Omega(n) = I - (1/T) sum K(m) Omega(m)`.
    pub volterra: f64,
    /// Ripple relation `Theta(n) = U_A(n+1)^dag V(n)^dag U_A(n+1)`.
    pub theta_relation: f64,
    /// `V = [I - (DP)^2]^{-1/2} [I + DP (2P - I)]`.
    pub v_identity: f64,
    /// Block relations `P' W P = P' v W_A P` and the Q analogue.
    pub main_eq: f64,
    /// Summation by parts with `X = T(I - V^dag(s - 1/T))`, `Y = Omega(s - 1/T)`.
    pub sum_by_parts: f64,
}

impl ProofOperatorReport {
    pub fn max_residual(&self) -> f64 {
        self.volterra
            .max(self.theta_relation)
            .max(self.v_identity)
            .max(self.main_eq)
            .max(self.sum_by_parts)
    }
}

/// Assemble the wave/ripple/kernel operators and the summation-by-parts
/// identity for the first `upto` steps of a stored run, returning residuals.
pub fn proof_operator_suite(ops: &RunOperators, upto: usize) -> Result<ProofOperatorReport, AdiabaticError> {
    let t = ops.v_ops.len();
    let n_max = upto.min(t);
    let dim = ops.walks[0].nrows();
    let tf = t as f64;
    let id = eye(dim);

    let omega: Vec<CMat> = (0..=n_max).map(|n| ops.ua_cum[n].adjoint() * &ops.u_cum[n]).collect();
    let mut volterra = 0.0f64;
    let mut acc = CMat::zeros(dim, dim);
    for n in 1..=n_max {
        // K(m) Omega(m) = T (I - Theta(m)) Omega(m)
        let theta = &omega[n] * omega[n - 1].adjoint();
        let k = (&id - &theta) * C64::new(tf, 0.0);
        acc += k * &omega[n - 1];
        volterra = volterra.max(spectral_norm(&(&omega[n] - (&id - &acc * C64::new(1.0 / tf, 0.0)))));
    }

    let mut theta_rel = 0.0f64;
    let mut v_identity = 0.0f64;
    let mut main_eq = 0.0f64;
    for n in 0..n_max {
        let theta = &omega[n + 1] * omega[n].adjoint();
        let rhs = ops.ua_cum[n + 1].adjoint() * ops.v_ops[n].adjoint() * &ops.ua_cum[n + 1];
        theta_rel = theta_rel.max(spectral_norm(&(&theta - rhs)));

        let p_now = &ops.splits[n].projector;
        let p_next = &ops.splits[n + 1].projector;
        let dp = p_next - p_now;
        let f_op = inv_sqrt_psd(&(&id - &dp * &dp), 1e-14)?;
        let refl = p_now * C64::new(2.0, 0.0) - &id;
        let rhs = &f_op * (&id + &dp * refl);
        v_identity = v_identity.max(spectral_norm(&(&ops.v_ops[n] - rhs)));

        let v_small = sqrt_psd(&(&id - &dp * &dp))?;
        let q_now = &id - p_now;
        let q_next = &id - p_next;
        let lhs_p = p_next * &ops.walks[n] * p_now;
        let rhs_p = p_next * &v_small * &ops.ideal_walks[n] * p_now;
        main_eq = main_eq.max(spectral_norm(&(lhs_p - rhs_p)));
        let lhs_q = &q_next * &ops.walks[n] * &q_now;
        let rhs_q = &q_next * &v_small * &ops.ideal_walks[n] * &q_now;
        main_eq = main_eq.max(spectral_norm(&(lhs_q - rhs_q)));
    }

    // Summation by parts over n = 1..=l with l = n_max - 1.
    let l = n_max.saturating_sub(1);
    let mut sum_by_parts = 0.0;
    if l >= 1 {
        let p0 = &ops.splits[0].projector;
        let q0 = &id - p0;
        let x_at = |n: usize| (&id - ops.v_ops[n - 1].adjoint()) * C64::new(tf, 0.0);
        let xt_at = |n: usize| {
            let x = x_at(n);
            xtilde(&ops.splits[n].eigen, &ops.splits[n].in_p, &x)
        };
        let y_at = |n: usize| omega[n - 1].clone();
        let mut lhs = CMat::zeros(dim, dim);
        let mut s_sum = CMat::zeros(dim, dim);
        for n in 1..=l {
            lhs += &q0 * ops.ua_cum[n].adjoint() * x_at(n) * &ops.ua_cum[n] * p0 * y_at(n);
            let a_op = (ops.v_ops[n].adjoint() - &id) * &ops.ideal_walks[n];
            let xt_n = xt_at(n);
            let xt_n1 = xt_at(n + 1);
            let dxt = &xt_n1 - &xt_n;
            let dwa = &ops.ideal_walks[n] - &ops.ideal_walks[n - 1];
            let b_op = dxt * &ops.ideal_walks[n] + dwa * &xt_n;
            let z_op = ((&a_op * &xt_n - &xt_n * &a_op) + b_op) * C64::new(tf, 0.0);
            let dy = y_at(n + 1) - y_at(n);
            s_sum += &q0
                * ops.ua_cum[n].adjoint()
                * (z_op * &ops.ua_cum[n] * p0 * y_at(n)
                    + xt_n1 * &ops.ideal_walks[n] * &ops.ua_cum[n] * p0 * dy * C64::new(tf, 0.0));
        }
        let boundary = &q0 * ops.ua_cum[l].adjoint() * xt_at(l + 1) * &ops.ua_cum[l + 1] * p0 * y_at(l + 1)
            - &q0 * ops.ua_cum[0].adjoint() * xt_at(1) * &ops.ua_cum[1] * p0 * y_at(1);
        sum_by_parts = spectral_norm(&(lhs - (boundary - s_sum * C64::new(1.0 / tf, 0.0))));
    }

    Ok(ProofOperatorReport {
        volterra,
        theta_relation: theta_rel,
        v_identity,
        main_eq,
        sum_by_parts,
    })
}

/// Result of the +-1 eigenstate phase-consistency verification.
#[derive(Debug, Clone)]
pub struct PhaseReport {
    /// Largest deviation between the +1 and -1 pair inner products across steps.
    pub max_pair_mismatch: f64,
    /// `|<solution | psi_out>|` for the evolved positive superposition.
    pub final_solution_overlap: f64,
    /// Overlap with the orthogonal companion state at s = 1.
    pub final_perp_overlap: f64,
}

/// Verify that the adiabatic evolution introduces no relative phase between
/// the +1 and -1 walk eigenstates built on the zero-eigenvalue family.
///
/// `kernel_at(n)` must return the (normalised) zero-eigenvector of the
/// encoded Hamiltonian at step `n` whose family carries the solution;
/// `walk_at(n)` the walk unitary. The +-1 pair at step `n` is
/// `(|0,k> +- i W-companion)/sqrt(2)` with the companion `U |0,k>` read off
/// the self-inverse encoding.
pub fn phase_consistency<FW, FK>(
    mut walk_at: FW,
    mut kernel_at: FK,
    t: usize,
) -> Result<PhaseReport, AdiabaticError>
where
    FW: FnMut(usize) -> CMat,
    FK: FnMut(usize) -> CVec,
{
    if t % 2 != 0 {
        return Err(AdiabaticError::OddT(t));
    }
    let w0 = walk_at(0);
    let dim = w0.nrows();
    let half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    // W = i (2 Pi - I) U, so U |psi> = -i (2 Pi - I) W... easier: companion
    // from the walk itself: for a zero-mode |psi> (flagged, P-supported),
    // W |psi> = i (2Pi - I) U |psi> = -i U |psi>, so U|psi> = i W |psi>.
    let companion = |w: &CMat, psi: &CVec| -> CVec {
        let wp = w * psi;
        CVec::from_fn(dim, |i, _| C64::new(0.0, 1.0) * wp[i])
    };
    let pair = |w: &CMat, k: &CVec| -> (CVec, CVec) {
        let comp = companion(w, k);
        let plus = CVec::from_fn(dim, |i, _| (k[i] + C64::new(0.0, 1.0) * comp[i]) * half);
        let minus = CVec::from_fn(dim, |i, _| (k[i] - C64::new(0.0, 1.0) * comp[i]) * half);
        (plus, minus)
    };

    let mut max_mismatch = 0.0f64;
    let mut u = eye(dim);
    let mut w_prev = w0;
    let k0 = kernel_at(0);
    let (mut plus_prev, mut minus_prev) = pair(&w_prev, &k0);
    for n in 0..t {
        u = &w_prev * u;
        let w_next = walk_at(n + 1);
        let k_next = kernel_at(n + 1);
        let (plus_next, minus_next) = pair(&w_next, &k_next);
        let ip_plus = plus_next.dotc(&plus_prev);
        let ip_minus = minus_next.dotc(&minus_prev);
        max_mismatch = max_mismatch.max((ip_plus - ip_minus).norm());
        w_prev = w_next;
        plus_prev = plus_next;
        minus_prev = minus_next;
    }
    // evolved positive superposition vs the final pair
    let mut psi0 = kernel_at(0);
    let norm = psi0.norm();
    psi0 /= C64::new(norm, 0.0);
    let psi_out = &u * &psi0;
    let k_final = kernel_at(t);
    let comp_final = companion(&w_prev, &k_final);
    let sol_overlap = k_final.dotc(&psi_out).norm();
    let perp_overlap = comp_final.dotc(&psi_out).norm();
    Ok(PhaseReport {
        max_pair_mismatch: max_mismatch,
        final_solution_overlap: sol_overlap,
        final_perp_overlap: perp_overlap,
    })
}

/// CSV trace of a run with the fixed column set.
pub fn run_csv(run: &AdiabaticRun) -> String {
    let mut out = String::from("n,s,gap_measured,c1_exact,normDP,normV_minus_I,cumulative_error_estimate\n");
    for n in 0..run.t {
        let d = &run.steps[n];
        let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.n,
            d.s,
            d.gap,
            fmt(d.c1),
            fmt(d.norm_dp),
            fmt(d.norm_v_minus_i),
            fmt(d.cumulative_error),
        ));
    }
    out
}
