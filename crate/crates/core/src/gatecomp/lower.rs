// SPDX-License-Identifier: Apache-2.0

//! Lowering two-level factors and plan steps to gates.
//!
//! A two-level unitary on basis positions (i, j) lowers to a conjugation
//! sandwich: CNOTs fold the pair onto two patterns differing in a single
//! bit, a multi-controlled gate applies the 2x2 payload there, and the
//! CNOTs undo in mirror order. Since basis indices are read with wire 0
//! most significant, the greater index carries bit 1 at the first differing
//! position, so the payload rows are oriented low-index first. Shared bits
//! become control polarities instead of literal X conjugations; the
//! normalization pass in [`super::netlist::expand_polarities`] recovers the
//! X-conjugated form.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::synthesis::{CircuitPlan, StepOperator};

use super::netlist::{Gate, GateNetlist};
use super::twolevel::{two_level_decompose, TwoLevelFactor};

/// Gates realizing the two-level unitary `u` on basis positions (i, j) of
/// the register formed by `wires` (most significant first).
pub fn pair_network(i: usize, j: usize, u: [C64; 4], wires: &[usize]) -> Result<Vec<Gate>> {
    let width = wires.len();
    let dim = 1usize << width;
    if i == j {
        return Err(Error::InvalidInput(
            "two-level pair needs distinct basis positions".into(),
        ));
    }
    if i >= dim || j >= dim {
        return Err(Error::InvalidInput(format!(
            "basis positions ({i}, {j}) outside dimension {dim}"
        )));
    }
    // Orient so `hi` holds bit 1 at the first differing position.
    let (lo, hi, u) = if i < j {
        (i, j, u)
    } else {
        (j, i, [u[3], u[2], u[1], u[0]])
    };
    let diff = lo ^ hi;
    // First differing bit, scanning most significant first.
    let kbit = (usize::BITS - 1 - diff.leading_zeros()) as usize;
    let kpos = width - 1 - kbit; // wire list position

    let mut gates: Vec<Gate> = Vec::new();
    let mut dress: Vec<Gate> = Vec::new();
    for pos in 0..width {
        if pos == kpos {
            continue;
        }
        let bit = width - 1 - pos;
        if (diff >> bit) & 1 == 1 {
            dress.push(Gate::Cnot {
                control: wires[kpos],
                target: wires[pos],
            });
        }
    }
    gates.extend(dress.iter().cloned());

    // After the CNOTs the pair differs only at kpos and shares lo's bits
    // elsewhere; those shared bits become control polarities.
    let mut controls = Vec::new();
    for pos in 0..width {
        if pos == kpos {
            continue;
        }
        let bit = width - 1 - pos;
        let val = ((lo >> bit) & 1) as u8;
        controls.push((wires[pos], val));
    }
    gates.push(Gate::canonical(wires[kpos], controls, u));

    for g in dress.iter().rev() {
        gates.push(g.clone());
    }
    Ok(gates)
}

/// Single gate realizing a phase on one basis position of the register.
fn phase_gate(k: usize, value: C64, wires: &[usize]) -> Gate {
    let width = wires.len();
    let tpos = width - 1; // least significant wire carries the payload
    let tbit = k & 1;
    let mut controls = Vec::new();
    for pos in 0..width - 1 {
        let bit = width - 1 - pos;
        controls.push((wires[pos], ((k >> bit) & 1) as u8));
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let u = if tbit == 1 {
        [one, zero, zero, value]
    } else {
        [value, zero, zero, one]
    };
    Gate::canonical(wires[tpos], controls, u)
}

/// Probe rotation block: one multi-controlled gate per spectrum entry,
/// targeting the probe under the register pattern of that entry. Identity
/// rotations are elided.
pub fn s_block_netlist(
    m: &[f64],
    register_wires: &[usize],
    probe_wire: usize,
    conditions: &[(usize, u8)],
    probe_success: u8,
) -> Result<Vec<Gate>> {
    let width = register_wires.len();
    if m.len() > (1usize << width) {
        return Err(Error::Dimension(format!(
            "{} spectrum entries exceed {} register patterns",
            m.len(),
            1usize << width
        )));
    }
    if m.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidInput(
            "spectrum entries must lie in [0, 1]".into(),
        ));
    }
    let mut gates = Vec::new();
    for (i, &mi) in m.iter().enumerate() {
        if mi <= 1e-12 {
            continue; // identity rotation
        }
        let mut controls = Vec::new();
        for pos in 0..width {
            let bit = width - 1 - pos;
            controls.push((register_wires[pos], ((i >> bit) & 1) as u8));
        }
        controls.extend_from_slice(conditions);
        let u = crate::synthesis::probe_rotation(mi, probe_success);
        gates.push(Gate::canonical(probe_wire, controls, u));
    }
    Ok(gates)
}

/// Lower every step of a plan to gates.
pub fn lower_plan(plan: &CircuitPlan) -> Result<GateNetlist> {
    let mut gates: Vec<Gate> = Vec::new();
    for step in &plan.steps {
        match &step.op {
            StepOperator::SBlock { m, probe_success } => {
                let (probe, regs) = step
                    .targets
                    .split_last()
                    .ok_or_else(|| Error::InvalidInput("empty step targets".into()))?;
                gates.extend(s_block_netlist(
                    m,
                    regs,
                    *probe,
                    &step.conditions,
                    *probe_success,
                )?);
            }
            StepOperator::Dense(u) => {
                // Factors multiply left to right as matrices; gates apply to
                // the state right to left, so emit them reversed.
                for factor in two_level_decompose(u)?.into_iter().rev() {
                    match factor {
                        TwoLevelFactor::Rotation { i, j, u } => {
                            for g in pair_network(i, j, u, &step.targets)? {
                                gates.push(g.conditioned(&step.conditions));
                            }
                        }
                        TwoLevelFactor::Phase { k, value } => {
                            gates.push(
                                phase_gate(k, value, &step.targets).conditioned(&step.conditions),
                            );
                        }
                    }
                }
            }
        }
    }
    let netlist = GateNetlist {
        wire_count: plan.wire_count(),
        probe_wire: plan.probe_wire(),
        gates,
        plan_hash: plan.content_hash(),
    };
    netlist.validate()?;
    Ok(netlist)
}
