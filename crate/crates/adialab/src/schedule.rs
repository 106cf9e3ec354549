//! The schedule function `f(s)`, its derivatives, gap profiles, and the
//! walk-difference coefficients `c_1`, `c_2` and their neighbourhood maxima.
//!
//! The schedule solves `f'(s) = d_p * Delta_lin(f(s))^p` with
//! `Delta_lin(y) = 1 - y + y/kappa`, giving the closed form
//!
//! ```text
//! f(s) = kappa/(kappa-1) * [1 - (1 + s (kappa^{p-1} - 1))^{1/(1-p)}]
//! ```
//!
//! A useful identity: `Delta_lin(f(s)) = (1 + s (kappa^{p-1} - 1))^{1/(1-p)}`.
//! Evolutions slow down exactly where the gap closes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::spectral_norm;
use crate::walk::rotation_r_at_f;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("schedule exponent p must lie in (1, 2), got {0}")]
    InvalidP(f64),
    #[error("condition number must exceed 1, got {0}")]
    InvalidKappa(f64),
    #[error("step count must be a positive even integer, got {0}")]
    OddT(usize),
    #[error("schedule argument {0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("gap order k must be 0, 1 or 2, got {0}")]
    BadGapOrder(usize),
    #[error("gap model '{0}' needs measured walk phases; use GapProfile::from_measured")]
    NeedsMeasuredGaps(String),
}

/// How spectral gaps are modelled when evaluating bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapModel {
    /// `Delta_lin(f) = 1 - f + f/kappa` (Hermitian positive definite case).
    Linear,
    /// `Delta_lin / sqrt(2)` (general / non-definite matrices).
    LinearOverSqrt2,
    /// `arcsin(Delta_lin)`: the walk-operator phase gap for the PD case.
    ArcsinAdjusted,
    /// Gaps measured from the walk's eigenphases during a run.
    ExactFromWalk,
}

impl GapModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapModel::Linear => "linear",
            GapModel::LinearOverSqrt2 => "linear-over-sqrt2",
            GapModel::ArcsinAdjusted => "arcsin-adjusted",
            GapModel::ExactFromWalk => "exact-from-walk",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(GapModel::Linear),
            "linear-over-sqrt2" => Some(GapModel::LinearOverSqrt2),
            "arcsin-adjusted" => Some(GapModel::ArcsinAdjusted),
            "exact-from-walk" => Some(GapModel::ExactFromWalk),
            _ => None,
        }
    }
}

impl std::fmt::Display for GapModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the difference coefficients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CMode {
    /// Closed-form upper bounds: `c_1 = 2T(f(s+1/T) - f(s))` and the
    /// two-derivative expression for `c_2`.
    Analytic,
    /// Exact norms of the first and second differences of the 2x2 rotation
    /// `R(s)`, scaled by `T` and `T^2`.
    Exact,
}

impl CMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CMode::Analytic => "analytic",
            CMode::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(CMode::Analytic),
            "exact" => Some(CMode::Exact),
            _ => None,
        }
    }
}

impl std::fmt::Display for CMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Schedule parameters for one evolution.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub p: f64,
    pub kappa: f64,
    /// Number of walk steps; required even so the +1/-1 eigenvalue signs
    /// cancel over the full evolution.
    pub t: usize,
    pub gap_model: GapModel,
}

impl Schedule {
    pub fn new(p: f64, kappa: f64, t: usize, gap_model: GapModel) -> Result<Self, ScheduleError> {
        if !(p > 1.0 && p < 2.0) {
            return Err(ScheduleError::InvalidP(p));
        }
        if kappa <= 1.0 {
            return Err(ScheduleError::InvalidKappa(kappa));
        }
        if t == 0 || t % 2 != 0 {
            return Err(ScheduleError::OddT(t));
        }
        Ok(Schedule { p, kappa, t, gap_model })
    }

    /// `Delta_lin(f(s))` in closed form.
    pub fn delta_lin(&self, s: f64) -> f64 {
        let kp = self.kappa.powf(self.p - 1.0) - 1.0;
        (1.0 + s * kp).powf(1.0 / (1.0 - self.p))
    }

    /// `(f, f', f'')` at `s`.
    pub fn f_df_ddf(&self, s: f64) -> Result<(f64, f64, f64), ScheduleError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(ScheduleError::OutOfDomain(s));
        }
        let g = self.delta_lin(s);
        let dp = self.dp_linear();
        let f = self.kappa / (self.kappa - 1.0) * (1.0 - g);
        let fp = dp * g.powf(self.p);
        let fpp = -dp * dp * self.p * (1.0 - 1.0 / self.kappa) * g.powf(2.0 * self.p - 1.0);
        Ok((f, fp, fpp))
    }

    /// Normalisation constant for the plain linear gap,
    /// `d_p = kappa (kappa^{p-1} - 1) / ((kappa - 1)(p - 1))`.
    pub fn dp_linear(&self) -> f64 {
        dp_constant(self.p, self.kappa, GapModel::Linear)
    }

    /// Gap `Delta_k(s)` for `k` in {0, 1, 2} under an analytic gap model.
    pub fn gap(&self, s: f64, k: usize) -> Result<f64, ScheduleError> {
        if k > 2 {
            return Err(ScheduleError::BadGapOrder(k));
        }
        let sk = s + k as f64 / self.t as f64;
        if sk > 1.0 + 1e-12 {
            return Err(ScheduleError::OutOfDomain(sk));
        }
        Ok(self.gap_value(sk.min(1.0))?)
    }

    fn gap_value(&self, s: f64) -> Result<f64, ScheduleError> {
        let lin = self.delta_lin(s);
        match self.gap_model {
            GapModel::Linear => Ok(lin),
            GapModel::LinearOverSqrt2 => Ok(lin / std::f64::consts::SQRT_2),
            GapModel::ArcsinAdjusted => Ok(lin.asin()),
            GapModel::ExactFromWalk => {
                Err(ScheduleError::NeedsMeasuredGaps(self.gap_model.as_str().into()))
            }
        }
    }

    /// Analytic gap profile over the full step grid.
    pub fn gap_profile(&self) -> Result<GapProfile, ScheduleError> {
        let t = self.t;
        let val = |n: usize| self.gap_value((n.min(t)) as f64 / t as f64);
        let mut delta = [Vec::with_capacity(t + 1), Vec::with_capacity(t + 1), Vec::with_capacity(t + 1)];
        for n in 0..=t {
            // Delta_k(n/T) clamps s + k/T at 1; the gap is nonincreasing so
            // this matches the boundary cases of the three-step minimum.
            for (k, col) in delta.iter_mut().enumerate() {
                col.push(val(n + k)?);
            }
        }
        Ok(GapProfile::from_delta_arrays(delta, t))
    }

    /// Difference coefficients under `mode`, with the neighbourhood maxima.
    pub fn diff_coeffs(&self, mode: CMode) -> Result<DiffCoeffs, ScheduleError> {
        let t = self.t;
        let tf = t as f64;
        let mut c1 = Vec::with_capacity(t);
        let mut c2 = Vec::with_capacity(t);
        match mode {
            CMode::Analytic => {
                let mut f_prev = self.f_df_ddf(0.0)?.0;
                for n in 0..t {
                    let f_next = self.f_df_ddf((n + 1) as f64 / tf)?.0;
                    c1.push(2.0 * tf * (f_next - f_prev));
                    f_prev = f_next;
                }
                for n in 0..t {
                    // three-point max, two-point at the boundary step
                    let last = if n == t - 1 { n + 1 } else { n + 2 };
                    let mut m = 0.0f64;
                    for j in n..=last {
                        let (_, fp, fpp) = self.f_df_ddf(j as f64 / tf)?;
                        m = m.max(2.0 * fp * fp + fpp.abs());
                    }
                    c2.push(2.0 * m);
                }
            }
            CMode::Exact => {
                let rot: Vec<_> = (0..=t)
                    .map(|n| {
                        let f = self.f_df_ddf(n as f64 / tf)?.0;
                        Ok(rotation_r_at_f(f))
                    })
                    .collect::<Result<Vec<_>, ScheduleError>>()?;
                for n in 0..t {
                    c1.push(tf * spectral_norm(&(&rot[n + 1] - &rot[n])));
                }
                for n in 0..t - 1 {
                    let d2 = &rot[n + 2] - &rot[n + 1] * num_complex::Complex::new(2.0, 0.0) + &rot[n];
                    c2.push(tf * tf * spectral_norm(&d2));
                }
                // the second difference needs s + 2/T <= 1; the last entry
                // falls back to the analytic two-point maximum
                let mut m = 0.0f64;
                for j in (t - 1)..=t {
                    let (_, fp, fpp) = self.f_df_ddf(j as f64 / tf)?;
                    m = m.max(2.0 * fp * fp + fpp.abs());
                }
                c2.push(2.0 * m);
            }
        }
        Ok(DiffCoeffs::from_arrays(c1, c2, mode))
    }

    /// Checks `T >= max_s 4 c1hat(s) / Delta_check(s)` for the given inputs.
    pub fn meets_second_theorem_precondition(
        &self,
        coeffs: &DiffCoeffs,
        profile: &GapProfile,
    ) -> bool {
        let t = self.t;
        (0..=t).all(|n| 4.0 * coeffs.c1_hat[n] / profile.delta_check[n] <= t as f64)
    }
}

/// The schedule normalisation `d_p`.
///
/// The plain linear gap gives `int_0^1 Delta_lin(u)^{-p} du`; halving the gap
/// model by `sqrt(2)` multiplies the integral by `2^{p/2}`. The arcsin
/// adjustment does not change the schedule itself, so it maps to the model
/// it adjusts.
pub fn dp_constant(p: f64, kappa: f64, gap_model: GapModel) -> f64 {
    let base = kappa / (kappa - 1.0) * (kappa.powf(p - 1.0) - 1.0) / (p - 1.0);
    match gap_model {
        GapModel::Linear | GapModel::ArcsinAdjusted | GapModel::ExactFromWalk => base,
        GapModel::LinearOverSqrt2 => 2.0f64.powf(p / 2.0) * base,
    }
}

/// Gap arrays over the step grid `n = 0..T`.
#[derive(Debug, Clone)]
pub struct GapProfile {
    /// `Delta_k(n/T)` for `k = 0, 1, 2`.
    pub delta: [Vec<f64>; 3],
    /// `Delta(n/T)`: the three-step minimum with its boundary cases.
    pub delta_min: Vec<f64>,
    /// `Delta_check(n/T)`: minimum of `Delta` over neighbouring steps.
    pub delta_check: Vec<f64>,
    pub t: usize,
}

impl GapProfile {
    fn from_delta_arrays(delta: [Vec<f64>; 3], t: usize) -> Self {
        let delta_min: Vec<f64> = (0..=t)
            .map(|n| {
                if n + 2 <= t {
                    delta[2][n]
                } else if n + 1 <= t {
                    delta[1][n]
                } else {
                    delta[0][n]
                }
            })
            .collect();
        let delta_check: Vec<f64> = (0..=t)
            .map(|n| {
                let lo = n.saturating_sub(1);
                let hi = (n + 1).min(t);
                (lo..=hi).map(|m| delta_min[m]).fold(f64::INFINITY, f64::min)
            })
            .collect();
        GapProfile { delta, delta_min, delta_check, t }
    }

    /// Build a profile from per-step measured gaps `d(n/T)` (the minimum
    /// angular distance from the open arcs to the complementary spectrum at
    /// step n). `Delta_k` is then the window minimum over k+1 steps.
    pub fn from_measured(gaps: &[f64], t: usize) -> Self {
        assert_eq!(gaps.len(), t + 1, "need one measured gap per grid point");
        let windowed = |k: usize| -> Vec<f64> {
            (0..=t)
                .map(|n| (n..=(n + k).min(t)).map(|m| gaps[m]).fold(f64::INFINITY, f64::min))
                .collect()
        };
        Self::from_delta_arrays([windowed(0), windowed(1), windowed(2)], t)
    }
}

/// Difference-coefficient arrays over the step grid.
#[derive(Debug, Clone)]
pub struct DiffCoeffs {
    /// `c_1(n/T)` for `n = 0..T-1`.
    pub c1: Vec<f64>,
    /// `c_2(n/T)` for `n = 0..T-1` (final entry via the two-point rule).
    pub c2: Vec<f64>,
    /// `c1hat(n/T)` for `n = 0..T`: max of `c_1` over the step and its
    /// neighbours, clipped to the domain of `c_1`.
    pub c1_hat: Vec<f64>,
    /// `c2hat(n/T)` likewise, clipped to `n <= T-2`.
    pub c2_hat: Vec<f64>,
    pub mode: Option<CMode>,
}

impl DiffCoeffs {
    fn from_arrays(c1: Vec<f64>, c2: Vec<f64>, mode: CMode) -> Self {
        let mut out = Self::from_measured_arrays(c1, c2);
        out.mode = Some(mode);
        out
    }

    /// Build from externally measured `||D W||`-derived arrays (`c1[n]` for
    /// `n < T`, `c2[n]` for `n < T-1`; a trailing `c2` entry is tolerated).
    pub fn from_measured_arrays(c1: Vec<f64>, c2: Vec<f64>) -> Self {
        let t = c1.len();
        let c2_domain = t.saturating_sub(1).max(1); // c2 valid on 0..T-2
        let c1_hat: Vec<f64> = (0..=t)
            .map(|n| {
                let lo = n.saturating_sub(1);
                let hi = (n + 1).min(t - 1);
                (lo..=hi.max(lo)).map(|m| c1[m.min(t - 1)]).fold(0.0f64, f64::max)
            })
            .collect();
        let c2_hat: Vec<f64> = (0..=t)
            .map(|n| {
                let lo = n.saturating_sub(1).min(c2_domain - 1);
                let hi = (n + 1).min(c2_domain - 1);
                (lo..=hi).map(|m| c2[m]).fold(0.0f64, f64::max)
            })
            .collect();
        DiffCoeffs { c1, c2, c1_hat, c2_hat, mode: None }
    }
}

/// Dump the profile as CSV with the fixed column set.
pub fn profile_csv(sch: &Schedule, coeffs: &DiffCoeffs, profile: &GapProfile) -> String {
    let mut out = String::from("n,s,f,fprime,c1,c2,c1hat,c2hat,delta0,delta1,delta2,delta_check\n");
    let t = sch.t;
    for n in 0..=t {
        let s = n as f64 / t as f64;
        let (f, fp, _) = sch.f_df_ddf(s).expect("grid point in domain");
        let c1 = if n < t { format!("{}", coeffs.c1[n]) } else { String::new() };
        let c2 = if n < t { format!("{}", coeffs.c2[n]) } else { String::new() };
        out.push_str(&format!(
            "{n},{s},{f},{fp},{c1},{c2},{},{},{},{},{},{}\n",
            coeffs.c1_hat[n],
            coeffs.c2_hat[n],
            profile.delta[0][n],
            profile.delta[1][n],
            profile.delta[2][n],
            profile.delta_check[n],
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sch(p: f64, kappa: f64, t: usize) -> Schedule {
        Schedule::new(p, kappa, t, GapModel::Linear).unwrap()
    }

    #[test]
    fn boundaries() {
        let s = sch(1.5, 10.0, 100);
        let (f0, _, _) = s.f_df_ddf(0.0).unwrap();
        let (f1, _, _) = s.f_df_ddf(1.0).unwrap();
        assert!(f0.abs() < 1e-12);
        assert!((f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_values() {
        // independent high-precision evaluation of (1 + 0.5 (sqrt(10)-1))^{-2}
        let s = sch(1.5, 10.0, 100);
        let (f, _, _) = s.f_df_ddf(0.5).unwrap();
        assert!((f - 0.8545709366439923).abs() < 1e-12);
        assert!((s.delta_lin(0.5) - 0.2308861570204069).abs() < 1e-12);
    }

    #[test]
    fn gap_condition_holds_on_grid() {
        // f'(s) / Delta_lin(f(s))^p is the constant d_p
        let s = sch(1.5, 10.0, 100);
        let dp = s.dp_linear();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let (_, fp, _) = s.f_df_ddf(x).unwrap();
            let ratio = fp / s.delta_lin(x).powf(1.5);
            assert!((ratio - dp).abs() <= 1e-9 * dp);
        }
        // cross-check f' against a central finite difference
        let h = 1e-6;
        let (fm, _, _) = s.f_df_ddf(0.4 - h).unwrap();
        let (fp_, _, _) = s.f_df_ddf(0.4 + h).unwrap();
        let (_, d, _) = s.f_df_ddf(0.4).unwrap();
        assert!(((fp_ - fm) / (2.0 * h) - d).abs() < 1e-6);
    }

    #[test]
    fn dp_examples() {
        // numerical quadrature oracle evaluated offline:
        // int_0^1 (1 - u + u/10)^{-3/2} du = 4.805061467040844
        assert!((dp_constant(1.5, 10.0, GapModel::Linear) - 4.805061467040844).abs() < 1e-10);
        assert!(
            (dp_constant(1.5, 10.0, GapModel::LinearOverSqrt2) - 8.0811179254168).abs() < 1e-9
        );
        // kappa -> 1+ limit stays finite (-> 1)
        let near_one = dp_constant(1.5, 1.0 + 1e-6, GapModel::Linear);
        assert!((near_one - 1.0).abs() < 1e-5);
    }

    #[test]
    fn monotonicity() {
        let s = sch(1.3, 20.0, 200);
        let mut prev_f = -1.0;
        let mut prev_fp = f64::INFINITY;
        for n in 0..=200 {
            let (f, fp, _) = s.f_df_ddf(n as f64 / 200.0).unwrap();
            assert!(f > prev_f);
            assert!(fp < prev_fp || n == 0);
            prev_f = f;
            prev_fp = fp;
        }
    }

    #[test]
    fn gap_values() {
        let s = sch(1.5, 10.0, 1000);
        assert!((s.gap(0.0, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.gap(1.0, 0).unwrap() - 0.1).abs() < 1e-12);
        // Delta_2 at s composes the schedule at s + 2/T
        let g = s.gap(0.5, 2).unwrap();
        assert!((g - s.delta_lin(0.502)).abs() < 1e-12);
        assert!(s.gap(1.0, 1).is_err());
        assert!(s.gap(0.0, 3).is_err());
    }

    #[test]
    fn closed_form_cross_check() {
        let s = sch(1.7, 30.0, 64);
        let kp = 30.0f64.powf(0.7) - 1.0;
        for i in 0..=32 {
            let x = i as f64 / 32.0;
            let expect = (1.0 + x * kp).powf(1.0 / (1.0 - 1.7));
            assert!((s.delta_lin(x) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_t_rejected() {
        assert!(matches!(Schedule::new(1.5, 4.0, 63, GapModel::Linear), Err(ScheduleError::OddT(_))));
        assert!(Schedule::new(1.5, 4.0, 64, GapModel::Linear).is_ok());
        assert!(Schedule::new(2.0, 4.0, 64, GapModel::Linear).is_err());
        assert!(Schedule::new(1.5, 0.9, 64, GapModel::Linear).is_err());
    }

    #[test]
    fn exact_at_most_analytic() {
        let s = sch(1.5, 10.0, 128);
        let ana = s.diff_coeffs(CMode::Analytic).unwrap();
        let exa = s.diff_coeffs(CMode::Exact).unwrap();
        for n in 0..128 {
            assert!(
                exa.c1[n] <= ana.c1[n] + 1e-12,
                "c1 exact {} > analytic {} at n={n}",
                exa.c1[n],
                ana.c1[n]
            );
        }
        for n in 0..127 {
            assert!(exa.c2[n] <= ana.c2[n] + 1e-12, "c2 at n={n}");
        }
        // c1 analytic is nonincreasing (f' decreasing)
        for n in 1..128 {
            assert!(ana.c1[n] <= ana.c1[n - 1] + 1e-12);
        }
    }

    #[test]
    fn second_theorem_precondition_example() {
        let s = Schedule::new(1.5, 10.0, 10_000, GapModel::Linear).unwrap();
        let coeffs = s.diff_coeffs(CMode::Analytic).unwrap();
        let profile = s.gap_profile().unwrap();
        assert!(s.meets_second_theorem_precondition(&coeffs, &profile));
    }

    #[test]
    fn constant_schedule_gives_zero_coeffs() {
        // a frozen schedule is modelled by zero difference arrays
        let c = DiffCoeffs::from_measured_arrays(vec![0.0; 8], vec![0.0; 7]);
        assert!(c.c1_hat.iter().all(|&x| x == 0.0));
        assert!(c.c2_hat.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gap_ratio_under_step_shifts() {
        // Delta_0(s) <= 4/3 Delta_0(s') for s' in [s, s+4/T] once T clears
        // the stated threshold
        for &(p, kappa) in &[(1.2, 5.0), (1.5, 10.0), (1.8, 40.0)] {
            let tmin = 16.0 * 2.0f64.powf(p / 2.0) * (kappa.powf(p - 1.0) - 1.0) / (p - 1.0);
            let t = ((tmin.ceil() as usize) + 2).next_multiple_of(2);
            let s = Schedule::new(p, kappa, t, GapModel::Linear).unwrap();
            for n in 0..=(t - 4) {
                let base = s.delta_lin(n as f64 / t as f64);
                for j in 1..=4 {
                    let shifted = s.delta_lin((n + j) as f64 / t as f64);
                    assert!(base <= 4.0 / 3.0 * shifted + 1e-12);
                }
            }
        }
    }

    #[test]
    fn profile_csv_shape() {
        let s = sch(1.5, 4.0, 8);
        let coeffs = s.diff_coeffs(CMode::Exact).unwrap();
        let profile = s.gap_profile().unwrap();
        let csv = profile_csv(&s, &coeffs, &profile);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 10);
        assert!(lines[0].starts_with("n,s,f,fprime"));
        assert_eq!(lines[1].split(',').count(), 12);
    }
}
