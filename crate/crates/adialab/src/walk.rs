//! Qubitised walk operators.
//!
//! Two constructions are provided:
//!
//! * [`block_encode_h`] / [`walk_step`]: the full circuit-level block
//!   encoding of `H(s)` built from a selection rotation `R(s)`, two
//!   controlled `Q_b` reflections sandwiched by Hadamards, and a selected
//!   oracle for the `f = 1` operator, followed by the qubitisation
//!   reflection over the encoding ancillas. The sequence is self-inverse by
//!   construction and encodes `alpha(s) H(s)` with
//!   `alpha(s) = 1 / sqrt(2 [(1-f)^2 + f^2])`.
//! * [`reference_walk`]: a one-ancilla exact dilation of a Hermitian matrix,
//!   qubitised the same way. Much smaller, used as a cross-check oracle for
//!   the circuit walk and as the workhorse for long evolutions.
//!
//! Either way, a Hamiltonian eigenvalue `lambda` shows up in the walk as the
//! eigenphase pair `{arcsin(lambda), pi - arcsin(lambda)}`; the zero
//! eigenvalue lands exactly on `{0, pi}`.

use thiserror::Error;

use crate::problem::{HamiltonianFamily, QlspInstance, Variant};
use crate::schedule::Schedule;
use crate::spectral::{eye, hermitian_eig, kron, spectral_norm, C64, CMat, CVec};

#[derive(Error, Debug)]
pub enum WalkError {
    #[error("operator norm {0} exceeds 1; cannot dilate")]
    NormAboveOne(f64),
    #[error("schedule error: {0}")]
    Schedule(#[from] crate::schedule::ScheduleError),
    #[error("spectral error: {0}")]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error("problem error: {0}")]
    Problem(#[from] crate::problem::ProblemError),
}

/// One step of the walk: the unitary and its time parameter.
#[derive(Debug, Clone)]
pub struct WalkStep {
    pub s: f64,
    pub w: CMat,
    pub dim: usize,
}

/// The selection rotation at interpolation value `f`:
/// `[[1-f, f], [f, -(1-f)]] / sqrt((1-f)^2 + f^2)`.
pub fn rotation_r_at_f(f: f64) -> CMat {
    let d = ((1.0 - f).powi(2) + f * f).sqrt();
    CMat::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 - f) / d, 0.0),
            C64::new(f / d, 0.0),
            C64::new(f / d, 0.0),
            C64::new(-(1.0 - f) / d, 0.0),
        ],
    )
}

/// The selection rotation at schedule time `s`.
pub fn rotation_r(sch: &Schedule, s: f64) -> Result<CMat, WalkError> {
    let (f, _, _) = sch.f_df_ddf(s)?;
    Ok(rotation_r_at_f(f))
}

/// Sub-normalisation of the encoded block at interpolation value `f`.
pub fn alpha_at_f(f: f64) -> f64 {
    1.0 / (2.0 * ((1.0 - f).powi(2) + f * f)).sqrt()
}

/// A circuit-level block encoding of `H(s)`.
///
/// Register order is `(a2, a3, a4, top, a, N)`: `a2` selects between the
/// `f = 0` and `f = 1` operators, `a3` drives the `Q_b` linear combination,
/// `a4` labels the two blocks of `H`, `top` is the block label inside `M(f)`
/// (absent for `hermitian-pd`), and `a` is the dilation ancilla of the `A`
/// oracle. The flagged ancillas are `(a2, a3, a)`.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    pub u: CMat,
    /// Combined dimension of the flagged ancillas (2^3).
    pub ancilla_dim: usize,
    /// Dimension `H(s)` acts on.
    pub system_dim: usize,
    pub total_dim: usize,
    /// Sub-normalisation of the encoded block.
    pub alpha: f64,
    top_dim: usize,
    n: usize,
}

fn proj0() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))
}

fn proj1() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))
}

fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0), C64::new(1.0, 0.0),
        C64::new(1.0, 0.0), C64::new(0.0, 0.0),
    ])
}

fn sigma_z() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]))
}

fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[
        C64::new(h, 0.0), C64::new(h, 0.0),
        C64::new(h, 0.0), C64::new(-h, 0.0),
    ])
}

/// Exact unitary dilation of a contraction: `[[A, S], [S', -A^dag]]` with
/// `S = sqrt(I - A A^dag)`, `S' = sqrt(I - A^dag A)`. Self-inverse when `A`
/// is Hermitian.
pub fn dilation_unitary(a: &CMat) -> Result<CMat, WalkError> {
    let n = a.nrows();
    let norm = spectral_norm(a);
    if norm > 1.0 + 1e-10 {
        return Err(WalkError::NormAboveOne(norm));
    }
    let clamp_sqrt = |m: CMat| -> Result<CMat, WalkError> {
        let (vals, vecs) = hermitian_eig(&m, 1e-9)?;
        let d: Vec<C64> = vals.iter().map(|&l| C64::new(l.clamp(0.0, 1.0).sqrt(), 0.0)).collect();
        Ok(&vecs * CMat::from_diagonal(&CVec::from_vec(d)) * vecs.adjoint())
    };
    let s_left = clamp_sqrt(eye(n) - a * a.adjoint())?;
    let s_right = clamp_sqrt(eye(n) - a.adjoint() * a)?;
    let mut u = CMat::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(a);
    u.view_mut((0, n), (n, n)).copy_from(&s_left);
    u.view_mut((n, 0), (n, n)).copy_from(&s_right);
    u.view_mut((n, n), (n, n)).copy_from(&(-a.adjoint()));
    Ok(u)
}

struct EncodingParts {
    top_dim: usize,
    n: usize,
    /// `f = 0` operator on `(top, a, N)`.
    u_zero: CMat,
    /// Selected `f = 1` oracle on `(top, a, N)`, self-inverse.
    u_one: CMat,
    /// `Q_b` reflection on `(top, a, N)`.
    refl_b: CMat,
}

fn encoding_parts(inst: &QlspInstance, _fam: &HamiltonianFamily) -> Result<EncodingParts, WalkError> {
    let n = inst.dim;
    let bb = &inst.b * inst.b.adjoint();
    match inst.variant {
        Variant::General => {
            // u_one = |0><1|_top (x) U_A^dag + |1><0|_top (x) U_A encodes
            // Abold = |0><1| (x) A^dag + |1><0| (x) A.
            let ua = dilation_unitary(&inst.a)?;
            let e01 = CMat::from_fn(2, 2, |i, j| {
                if i == 0 && j == 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            });
            let e10 = e01.transpose();
            let u_one = kron(&e01, &ua.adjoint()) + kron(&e10, &ua);
            let u_zero = kron(&sigma_z(), &eye(2 * n));
            let refl_b = eye(4 * n) - kron(&proj1(), &kron(&eye(2), &bb)) * C64::new(2.0, 0.0);
            Ok(EncodingParts { top_dim: 2, n, u_zero, u_one, refl_b })
        }
        Variant::Hermitian => {
            let ua = dilation_unitary(&inst.a)?;
            let u_one = kron(&sigma_x(), &ua);
            let u_zero = kron(&sigma_z(), &eye(2 * n));
            // q = |+, b>
            let half = C64::new(0.5, 0.0);
            let plus = CMat::from_fn(2, 2, |_, _| half);
            let refl_b = eye(4 * n) - kron(&plus, &kron(&eye(2), &bb)) * C64::new(2.0, 0.0);
            Ok(EncodingParts { top_dim: 2, n, u_zero, u_one, refl_b })
        }
        Variant::HermitianPd => {
            let ua = dilation_unitary(&inst.a)?;
            let u_zero = eye(2 * n);
            let refl_b = eye(2 * n) - kron(&eye(2), &bb) * C64::new(2.0, 0.0);
            Ok(EncodingParts { top_dim: 1, n, u_zero, u_one: ua, refl_b })
        }
    }
}

/// Build the self-inverse block encoding of `H(s)` at schedule time `s`.
///
/// Applied gate order (earliest first): Hadamard on `a3`, the `Q_b`
/// reflection controlled on `a4 = 1`, `R(s)` on `a2` controlled on `a4 = 0`
/// (Hadamard on the other value), the selected oracle on `a2`, the mirrored
/// controlled rotation, the `Q_b` reflection controlled on `a4 = 0`, the
/// closing Hadamard on `a3`, and finally `sigma_x` on `a4`.
pub fn block_encode_h(inst: &QlspInstance, sch: &Schedule, s: f64) -> Result<BlockEncoding, WalkError> {
    let (f, _, _) = sch.f_df_ddf(s)?;
    block_encode_h_at_f(inst, f)
}

/// Same as [`block_encode_h`] but parametrised directly by `f`.
pub fn block_encode_h_at_f(inst: &QlspInstance, f: f64) -> Result<BlockEncoding, WalkError> {
    let fam = HamiltonianFamily::new(inst);
    let parts = encoding_parts(inst, &fam)?;
    let tau = parts.top_dim;
    let n = parts.n;
    let inner = tau * 2 * n; // (top, a, N)
    let total = 8 * inner;

    // operator on the full register from (a2, a3, a4, inner) factors
    let g = |a2: &CMat, a3: &CMat, a4: &CMat, rest: &CMat| -> CMat {
        kron(&kron(&kron(a2, a3), a4), rest)
    };
    let i2 = eye(2);
    let id_inner = eye(inner);

    let r = rotation_r_at_f(f);
    let h = hadamard();
    let cr0 = g(&r, &i2, &proj0(), &id_inner) + g(&h, &i2, &proj1(), &id_inner);
    let cr1 = g(&r, &i2, &proj1(), &id_inner) + g(&h, &i2, &proj0(), &id_inner);
    let h3 = g(&i2, &h, &i2, &id_inner);
    let x4 = g(&i2, &i2, &sigma_x(), &id_inner);
    let u_sel = g(&proj0(), &i2, &i2, &parts.u_zero) + g(&proj1(), &i2, &i2, &parts.u_one);
    let cu1 = g(&i2, &proj0(), &i2, &id_inner)
        + g(&i2, &proj1(), &proj0(), &id_inner)
        + g(&i2, &proj1(), &proj1(), &parts.refl_b);
    let cu0 = g(&i2, &proj0(), &i2, &id_inner)
        + g(&i2, &proj1(), &proj1(), &id_inner)
        + g(&i2, &proj1(), &proj0(), &parts.refl_b);

    let u = x4 * h3.clone() * cu0 * cr1 * u_sel * cr0 * cu1 * h3;
    debug_assert_eq!(u.nrows(), total);
    Ok(BlockEncoding {
        u,
        ancilla_dim: 8,
        system_dim: 2 * tau * n,
        total_dim: total,
        alpha: alpha_at_f(f),
        top_dim: tau,
        n,
    })
}

impl BlockEncoding {
    /// Global index for `(a2, a3, a4, top, a, n)`.
    fn index(&self, a2: usize, a3: usize, a4: usize, top: usize, a: usize, n: usize) -> usize {
        ((((a2 * 2 + a3) * 2 + a4) * self.top_dim + top) * 2 + a) * self.n + n
    }

    /// System index for `(a4, top, n)` within the `H(s)` space.
    fn system_index(&self, a4: usize, top: usize, n: usize) -> usize {
        (a4 * self.top_dim + top) * self.n + n
    }

    /// Rows/columns of the flagged (all ancillas zero) subspace, ordered by
    /// system index.
    pub fn flag_indices(&self) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.system_dim);
        for a4 in 0..2 {
            for top in 0..self.top_dim {
                for n in 0..self.n {
                    debug_assert_eq!(self.system_index(a4, top, n), idx.len());
                    idx.push(self.index(0, 0, a4, top, 0, n));
                }
            }
        }
        idx
    }

    /// The encoded block `<0|_anc U |0>_anc`, an `alpha(s)`-scaled `H(s)`.
    pub fn extract_block(&self) -> CMat {
        let idx = self.flag_indices();
        let d = self.system_dim;
        CMat::from_fn(d, d, |i, j| self.u[(idx[i], idx[j])])
    }

    /// Deviation of `U^2` from the identity.
    pub fn self_inverse_residual(&self) -> f64 {
        spectral_norm(&(&self.u * &self.u - eye(self.total_dim)))
    }
}

/// Qubitisation: `W = i (2 Pi - I) U` with `Pi` projecting onto the flagged
/// ancilla subspace. The `i` fixes the global phase so that a zero
/// Hamiltonian eigenvalue maps to walk eigenvalues +1 and -1.
fn qubitise(u: &CMat, flag: &[bool]) -> CMat {
    let n = u.nrows();
    let mut w = CMat::zeros(n, n);
    for i in 0..n {
        let sign = if flag[i] { 1.0 } else { -1.0 };
        for j in 0..n {
            w[(i, j)] = C64::new(0.0, sign) * u[(i, j)];
        }
    }
    w
}

/// The circuit-level walk step at schedule time `s`.
pub fn walk_step(inst: &QlspInstance, sch: &Schedule, s: f64) -> Result<WalkStep, WalkError> {
    let (f, _, _) = sch.f_df_ddf(s)?;
    walk_step_at_f(inst, f, s)
}

/// The circuit-level walk step at interpolation value `f`.
pub fn walk_step_at_f(inst: &QlspInstance, f: f64, s: f64) -> Result<WalkStep, WalkError> {
    let be = block_encode_h_at_f(inst, f)?;
    let mut flag = vec![false; be.total_dim];
    for idx in be.flag_indices() {
        flag[idx] = true;
    }
    let w = qubitise(&be.u, &flag);
    Ok(WalkStep { s, w, dim: be.total_dim })
}

/// Reference walk from the one-ancilla dilation of a Hermitian `H` with
/// `||H|| <= 1`. Its eigenphase multiset is exactly the qubitisation pattern
/// of `H`'s spectrum.
pub fn reference_walk(h: &CMat, s: f64) -> Result<WalkStep, WalkError> {
    let n = h.nrows();
    let u = dilation_unitary(&crate::spectral::hermitize(h))?;
    let flag: Vec<bool> = (0..2 * n).map(|i| i < n).collect();
    let w = qubitise(&u, &flag);
    Ok(WalkStep { s, w, dim: 2 * n })
}

/// Expected walk eigenphases for a Hermitian spectrum: each eigenvalue
/// `lambda` contributes `arcsin(lambda)` and `pi - arcsin(lambda)`, wrapped
/// to (-pi, pi].
pub fn qubitisation_phases(lambdas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * lambdas.len());
    for &l in lambdas {
        let theta = l.clamp(-1.0, 1.0).asin();
        out.push(theta);
        let mut mirrored = std::f64::consts::PI - theta;
        if mirrored > std::f64::consts::PI {
            mirrored -= 2.0 * std::f64::consts::PI;
        }
        out.push(mirrored);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Serialise a walk unitary as JSON (`[re, im]` entries) for debugging.
pub fn walk_to_json(step: &WalkStep) -> String {
    let rows: Vec<Vec<[f64; 2]>> = (0..step.dim)
        .map(|i| (0..step.dim).map(|j| [step.w[(i, j)].re, step.w[(i, j)].im]).collect())
        .collect();
    serde_json::json!({ "s": step.s, "dim": step.dim, "w": rows }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::random_instance;
    use crate::schedule::GapModel;
    use crate::spectral::unitary_eig;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rotation_special_values() {
        let r0 = rotation_r_at_f(0.0);
        assert!(spectral_norm(&(&r0 - &sigma_z())) < 1e-12);
        let r1 = rotation_r_at_f(1.0);
        assert!(spectral_norm(&(&r1 - &sigma_x())) < 1e-12);
        let rh = rotation_r_at_f(0.5);
        assert!(spectral_norm(&(&rh - &hadamard())) < 1e-12);
        // unitary across the range
        for k in 0..=10 {
            let r = rotation_r_at_f(k as f64 / 10.0);
            assert!(spectral_norm(&(&r * r.adjoint() - eye(2))) < 1e-12);
        }
    }

    #[test]
    fn block_encoding_self_inverse_and_block() {
        for variant in [Variant::General, Variant::Hermitian, Variant::HermitianPd] {
            let inst = random_instance(2, 4.0, variant, 7).unwrap();
            let fam = HamiltonianFamily::new(&inst);
            for &f in &[0.0, 0.3, 0.5, 0.9, 1.0] {
                let be = block_encode_h_at_f(&inst, f).unwrap();
                assert!(be.self_inverse_residual() <= 1e-10, "{variant} f={f}");
                assert!(
                    spectral_norm(&(&be.u * be.u.adjoint() - eye(be.total_dim))) <= 1e-10
                );
                let block = be.extract_block();
                let target = fam.h_at(f).unwrap() * C64::new(be.alpha, 0.0);
                assert!(
                    spectral_norm(&(&block - &target)) <= 1e-10,
                    "{variant} f={f}: block mismatch"
                );
            }
        }
    }

    #[test]
    fn alpha_extremum_at_half() {
        // f = 1/2 gives alpha = 1 and the block equals H(s) exactly
        let inst = random_instance(2, 4.0, Variant::General, 3).unwrap();
        let be = block_encode_h_at_f(&inst, 0.5).unwrap();
        assert!(close(be.alpha, 1.0, 1e-12));
        let fam = HamiltonianFamily::new(&inst);
        let target = fam.h_at(0.5).unwrap();
        assert!(spectral_norm(&(be.extract_block() - target)) <= 1e-10);
    }

    #[test]
    fn walk_difference_equals_rotation_difference() {
        let inst = random_instance(2, 4.0, Variant::General, 5).unwrap();
        let sch = Schedule::new(1.5, 4.0, 64, GapModel::Linear).unwrap();
        for n in [0usize, 10, 31] {
            let s0 = n as f64 / 64.0;
            let s1 = (n + 1) as f64 / 64.0;
            let w0 = walk_step(&inst, &sch, s0).unwrap();
            let w1 = walk_step(&inst, &sch, s1).unwrap();
            let dw = spectral_norm(&(&w1.w - &w0.w));
            let dr = spectral_norm(&(rotation_r(&sch, s1).unwrap() - rotation_r(&sch, s0).unwrap()));
            assert!(close(dw, dr, 1e-10), "n={n}: {dw} vs {dr}");
        }
    }

    #[test]
    fn walk_phases_match_reference_pattern() {
        let inst = random_instance(2, 4.0, Variant::General, 11).unwrap();
        let fam = HamiltonianFamily::new(&inst);
        let f = 0.35;
        let ht = fam.h_at(f).unwrap() * C64::new(alpha_at_f(f), 0.0);
        let (lams, _) = hermitian_eig(&ht, 1e-10).unwrap();
        let expected = qubitisation_phases(&lams);

        // reference walk: phases are exactly the pattern
        let wr = reference_walk(&ht, f).unwrap();
        assert!(spectral_norm(&(&wr.w * wr.w.adjoint() - eye(wr.dim))) <= 1e-10);
        let es = unitary_eig(&wr.w, 1e-9).unwrap();
        let mut measured = es.phases.clone();
        measured.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(measured.len(), expected.len());
        for (m, e) in measured.iter().zip(expected.iter()) {
            assert!(crate::spectral::circle_distance(*m, *e) <= 1e-9, "{m} vs {e}");
        }

        // circuit walk: same pattern plus 6 * dim(H) junk phases at +-pi/2
        let ws = walk_step_at_f(&inst, f, f).unwrap();
        let es = unitary_eig(&ws.w, 1e-9).unwrap();
        let mut phys: Vec<f64> = Vec::new();
        let mut junk = 0usize;
        for &p in &es.phases {
            if crate::spectral::circle_distance(p.abs(), std::f64::consts::FRAC_PI_2) <= 1e-9 {
                junk += 1;
            } else {
                phys.push(p);
            }
        }
        assert_eq!(junk, 6 * fam.dim);
        assert_eq!(phys.len(), expected.len());
        for (m, e) in phys.iter().zip(expected.iter()) {
            assert!(crate::spectral::circle_distance(*m, *e) <= 1e-9, "{m} vs {e}");
        }
    }

    #[test]
    fn reference_walk_trivial_cases() {
        // H = 0: phases {0, pi} each with the full multiplicity
        let z = CMat::zeros(3, 3);
        let w = reference_walk(&z, 0.0).unwrap();
        let es = unitary_eig(&w.w, 1e-10).unwrap();
        let zeros = es.phases.iter().filter(|p| p.abs() < 1e-12).count();
        let pis = es
            .phases
            .iter()
            .filter(|p| (p.abs() - std::f64::consts::PI).abs() < 1e-12)
            .count();
        assert_eq!(zeros, 3);
        assert_eq!(pis, 3);

        // 1x1 H = [1]: arcsin(1) = pi/2 and its mirror coincide
        let one = CMat::from_row_slice(1, 1, &[C64::new(1.0, 0.0)]);
        let w = reference_walk(&one, 0.0).unwrap();
        let es = unitary_eig(&w.w, 1e-10).unwrap();
        for &p in &es.phases {
            assert!(close(p, std::f64::consts::FRAC_PI_2, 1e-12));
        }
        // norm above one is rejected
        let big = CMat::from_row_slice(1, 1, &[C64::new(1.5, 0.0)]);
        assert!(reference_walk(&big, 0.0).is_err());
    }

    #[test]
    fn zero_eigenvalue_lands_on_zero_and_pi() {
        let inst = random_instance(2, 4.0, Variant::General, 13).unwrap();
        let fam = HamiltonianFamily::new(&inst);
        let ht = fam.h_at(0.7).unwrap() * C64::new(alpha_at_f(0.7), 0.0);
        let w = reference_walk(&ht, 0.7).unwrap();
        let es = unitary_eig(&w.w, 1e-9).unwrap();
        let zeros = es.phases.iter().filter(|p| p.abs() <= 1e-10).count();
        let pis = es
            .phases
            .iter()
            .filter(|p| (p.abs() - std::f64::consts::PI).abs() <= 1e-10)
            .count();
        // multiplicity-2 kernel -> two states at each of 0 and pi
        assert_eq!(zeros, 2);
        assert_eq!(pis, 2);
    }
}
