//! Numerical laboratory for two-phase degenerate free boundary energies.
//!
//! Minimizes `∫ |∇u|^p + λ₊(u⁺)^γ + λ₋(u⁻)^γ + f·u` over grid functions
//! with Dirichlet data, for 2 <= p and 0 <= γ <= 1, reaching the
//! discontinuous jet/cavity case γ = 0 by a decreasing-γ continuation.
//! Diagnostics measure what the regularity theory predicts: free boundary
//! growth exponents, flux balance across the interface, nondegeneracy
//! constants, gradient oscillation decay, and moduli of continuity — all
//! checked against closed-form 1-D oracles.
//!
//! Start with the runnable examples (`cargo run --example obstacle_1d`,
//! `--example jet_continuation`, ...) or the `phaselab` binary, which
//! drives the same pipeline from a JSON config.

pub mod config;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod mesh;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod plot;
pub mod report;
pub mod run;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{cell_gradients, integrate, lq_norm, w1p_norm, DiscreteFunction, Domain, Grid};
pub use model::{
    jet_slope, potential_slope, potential_value, predicted_alpha, profile_constant, threshold_q,
    AlphaPrediction, AlphaRegime, BoundarySpec, ExponentInputs, ProblemSpec, SourceFamily,
    SourceSpec,
};
pub use energy::{
    dirichlet_gap, energy_gradient, p_harmonic_replacement, pde_residual, total_energy,
    EnergyBreakdown, EnergyContext, ReplacementOpts, ResidualField,
};
pub use solver::{
    continuation, local_minimality_check, minimize, truncation_audit, ContinuationReport,
    ContinuationSchedule, MinimalityReport, SolveReport, SolverParams, TraceEntry,
};
pub use diagnostics::{
    dyadic_radii, flux_residual, free_boundary, growth_fit, modulus_of_continuity,
    nondegeneracy_check, oscillation_decay_fit, vector_monotonicity_probe, DecayFit, FitResult,
    FluxEntry, FreeBoundary, InterfacePoint, ModulusEstimate, ModulusForm, Nondegeneracy, Phase,
    RegularityReport,
};
pub use oracle::{
    alt_phillips_profile, brute_force_minimizer_1d, two_phase_jet_1d, JetOracle, OracleSolution,
};
