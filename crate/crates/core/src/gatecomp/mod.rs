// SPDX-License-Identifier: Apache-2.0

//! Lowering dense unitaries and conditioned plan steps to netlists of X,
//! CNOT and multi-controlled single-qubit gates.

mod lower;
mod netlist;
mod twolevel;

pub use lower::{lower_plan, pair_network, s_block_netlist};
pub use netlist::{expand_polarities, netlist_matrix, Gate, GateNetlist};
pub use twolevel::{factor_product, two_level_decompose, TwoLevelFactor};
