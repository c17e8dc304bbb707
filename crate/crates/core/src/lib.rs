//! Smooth rarefaction waves for viscous scalar conservation laws
//! `∂t u + ∂x(f(u) - σ(∂x u)) = 0` with Carreau or power-law viscosity:
//! wave construction and decay-rate tables, a conservative finite-volume
//! solver, and energy-functional diagnostics of the deviation from the wave.

pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod flux;
pub mod quad;
pub mod solver;
pub mod wave;

pub use diagnostics::{DiagnosticsRecord, NormIndex, RunSummary};
pub use error::{Error, Result};
pub use fit::{decay_rate_fit, DecayFit};
pub use flux::{ConvexFlux, FluxKind, ViscosityForm, ViscosityModel, ViscousFlux};
pub use solver::{
    simulate, ConvectiveScheme, Grid1D, Integrator, Perturbation, SimulationOutput, SolverConfig,
    State,
};
pub use wave::{rate_table, RateField, RateNorm, RateTable, RiemannData, SmoothRarefaction, SmoothWave};
