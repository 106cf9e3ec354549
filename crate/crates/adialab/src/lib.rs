//! A simulation laboratory for discrete-adiabatic quantum linear-system
//! solvers.
//!
//! The crate builds qubitised walk operators for the interpolating
//! Hamiltonians of the linear-systems problem, runs the discrete adiabatic
//! evolution against its exact eigenspace-transporting counterpart, evaluates
//! the rigorous error bounds term by term, filters the final state with a
//! Dolph-Chebyshev linear combination of walk powers, and reproduces the
//! condition-number scaling numerics at desk scale (dense matrices,
//! dimensions in the tens).
//!
//! Module map:
//!
//! * [`spectral`] - dense complex eigendecomposition, norms, arc projectors;
//! * [`problem`] - linear-system instances and Hamiltonian families;
//! * [`schedule`] - the schedule function, gaps, difference coefficients;
//! * [`walk`] - circuit-level block encoding and the reference walk;
//! * [`adiabatic`] - evolutions, spectral splits, proof-operator checks;
//! * [`bounds`] - the two adiabatic theorems, asymptotic constants, and the
//!   lemma-level bound suite;
//! * [`filter`] - Dolph-Chebyshev window synthesis and the two-ancilla
//!   linear-combination circuit;
//! * [`harness`] - end-to-end solver, sweeps, and validation driver.
//!
//! ```
//! use adialab::prelude::*;
//!
//! let config = RunConfig { n: 2, kappa: 2.0, epsilon: 1e-2, trials: 10, ..RunConfig::default() };
//! let report = solve(&config).unwrap();
//! assert!(report.state_error <= 1e-2);
//! ```

pub mod adiabatic;
pub mod bounds;
pub mod filter;
pub mod harness;
pub mod problem;
pub mod schedule;
pub mod spectral;
pub mod walk;

/// The commonly used public surface, re-exported.
pub mod prelude {
    pub use crate::adiabatic::{
        evolve, phase_consistency, proof_operator_suite, run_adiabatic, spectral_split,
        AdiabaticRun, RunOptions, SpectralSplit,
    };
    pub use crate::bounds::{
        asymptotic_constants, lemma_bound_suite, theorem1_bound, theorem2_bound, BoundReport,
    };
    pub use crate::filter::{
        apply_filter_lcu, apply_filter_spectral, chebyshev_order, tilde_w, window_weights,
        FilterPlan,
    };
    pub use crate::harness::{
        auto_t, measured_run, solve, sweep, validate, RunConfig, SolveReport, SweepConfig,
        WalkKind,
    };
    pub use crate::problem::{
        exact_solution, hamiltonian, random_instance, HamiltonianFamily, QlspInstance, Variant,
    };
    pub use crate::schedule::{dp_constant, CMode, DiffCoeffs, GapModel, GapProfile, Schedule};
    pub use crate::spectral::{
        arc_projector, inv_sqrt_psd, spectral_norm, unitary_eig, Arc, C64, CMat, CVec, EigenSystem,
    };
    pub use crate::walk::{
        block_encode_h, reference_walk, rotation_r, walk_step, BlockEncoding, WalkStep,
    };
}
