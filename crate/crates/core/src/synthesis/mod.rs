// SPDX-License-Identifier: Apache-2.0

//! Circuit synthesis: the core unitary coupling the compressed register to
//! the probe, the pairwise compression operators and their cascades, and the
//! assembly of full identification and clone circuit plans.

mod core_unitary;
mod dop;
mod plan;

pub use core_unitary::{
    build_core_isometry, build_core_spectral, success_rotation as probe_rotation,
    CoreConstruction, CoreSpec, CoreUnitary,
};
pub use dop::{build_cascade, build_d_operator, CascadePlan, CascadeStage, DOperator};
pub use plan::{
    assemble_clone, assemble_identification, CircuitPlan, PlanStep, StepOperator, SynthesisOptions,
    WireLayout,
};
