// SPDX-License-Identifier: Apache-2.0

//! Dense statevector execution of netlists and plans, probe-branch analysis
//! against the synthesis contract, and the blank-register error-adaptation
//! experiment.
//!
//! Gates are applied wire-locally by iterating amplitude pairs; the dense
//! matrix semantics in [`crate::gatecomp::netlist_matrix`] stays available as
//! the small-scale oracle. Probe measurement is branch projection plus
//! renormalization; no randomness is involved anywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{MachineMode, ProbabilityAllocation};
use crate::gatecomp::{Gate, GateNetlist};
use crate::numerics::cmatrix::{vec_kron, vec_norm, C64, CMatrix};
use crate::stateset::StateSet;
use crate::synthesis::CircuitPlan;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateVector {
    wire_count: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(wire_count: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1usize << wire_count {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {wire_count} wires",
                amplitudes.len()
            )));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > crate::tol::STRUCTURAL {
            return Err(Error::InvalidInput(format!(
                "statevector norm {norm} is not 1"
            )));
        }
        Ok(StateVector {
            wire_count,
            amplitudes,
        })
    }

    pub fn basis(wire_count: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << wire_count];
        amplitudes[index] = C64::new(1.0, 0.0);
        StateVector {
            wire_count,
            amplitudes,
        }
    }

    pub fn wire_count(&self) -> usize {
        self.wire_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Apply one gate in place. Scans all basis indices and matches control
/// bits explicitly; wire 0 is the most significant bit.
pub fn apply_gate(amps: &mut [C64], wire_count: usize, gate: &Gate) {
    let tmask = 1usize << (wire_count - 1 - gate.target());
    let mut cmask = 0usize;
    let mut cval = 0usize;
    for (w, p) in gate.controls() {
        let m = 1usize << (wire_count - 1 - w);
        cmask |= m;
        if p == 1 {
            cval |= m;
        }
    }
    let u = gate.payload();
    let dim = amps.len();
    for idx in 0..dim {
        if idx & tmask != 0 {
            continue;
        }
        if idx & cmask != cval {
            continue;
        }
        let partner = idx | tmask;
        let a0 = amps[idx];
        let a1 = amps[partner];
        amps[idx] = u[0] * a0 + u[1] * a1;
        amps[partner] = u[2] * a0 + u[3] * a1;
    }
}

/// Apply a dense operator over the given target wires (most significant
/// first), honoring bit conditions. Gathers each block by bit extraction.
pub fn apply_dense_step(
    amps: &mut [C64],
    wire_count: usize,
    targets: &[usize],
    conditions: &[(usize, u8)],
    u: &CMatrix,
) {
    let k = targets.len();
    let bd = 1usize << k;
    assert_eq!(u.rows(), bd);
    let tmask: Vec<usize> = targets
        .iter()
        .map(|&w| 1usize << (wire_count - 1 - w))
        .collect();
    let union: usize = tmask.iter().fold(0, |a, m| a | m);
    let mut cmask = 0usize;
    let mut cval = 0usize;
    for &(w, p) in conditions {
        let m = 1usize << (wire_count - 1 - w);
        cmask |= m;
        if p == 1 {
            cval |= m;
        }
    }
    let dim = amps.len();
    let mut sub = vec![C64::new(0.0, 0.0); bd];
    for idx in 0..dim {
        if idx & union != 0 || idx & cmask != cval {
            continue;
        }
        for (pat, s) in sub.iter_mut().enumerate() {
            let mut full = idx;
            for (b, m) in tmask.iter().enumerate() {
                if (pat >> (k - 1 - b)) & 1 == 1 {
                    full |= m;
                }
            }
            *s = amps[full];
        }
        for pat in 0..bd {
            let mut acc = C64::new(0.0, 0.0);
            for (cc, s) in sub.iter().enumerate() {
                acc += u[(pat, cc)] * s;
            }
            let mut full = idx;
            for (b, m) in tmask.iter().enumerate() {
                if (pat >> (k - 1 - b)) & 1 == 1 {
                    full |= m;
                }
            }
            amps[full] = acc;
        }
    }
}

fn check_norm(amps: &[C64]) -> Result<()> {
    let norm = vec_norm(amps);
    if (norm - 1.0).abs() > crate::tol::STRUCTURAL {
        return Err(Error::Internal(format!(
            "execution drifted off norm 1 ({norm})"
        )));
    }
    Ok(())
}

pub fn run_netlist(netlist: &GateNetlist, input: &StateVector) -> Result<StateVector> {
    if input.wire_count != netlist.wire_count {
        return Err(Error::Dimension(format!(
            "input has {} wires, netlist {}",
            input.wire_count, netlist.wire_count
        )));
    }
    let mut amps = input.amplitudes.clone();
    for gate in &netlist.gates {
        apply_gate(&mut amps, netlist.wire_count, gate);
    }
    check_norm(&amps)?;
    Ok(StateVector {
        wire_count: netlist.wire_count,
        amplitudes: amps,
    })
}

pub fn run_plan(plan: &CircuitPlan, input: &StateVector) -> Result<StateVector> {
    let w = plan.wire_count();
    if input.wire_count != w {
        return Err(Error::Dimension(format!(
            "input has {} wires, plan {w}",
            input.wire_count
        )));
    }
    let mut amps = input.amplitudes.clone();
    for step in &plan.steps {
        let u = step.op.dense(step.targets.len());
        apply_dense_step(&mut amps, w, &step.targets, &step.conditions, &u);
    }
    check_norm(&amps)?;
    Ok(StateVector {
        wire_count: w,
        amplitudes: amps,
    })
}

/// Encode input state i for a plan: the state on each input copy register,
/// blanks elsewhere, probe on its initial value.
pub fn encode_input(plan: &CircuitPlan, set: &StateSet, i: usize) -> Result<StateVector> {
    if set.qubits() != plan.layout.qubits_per_register {
        return Err(Error::Dimension(
            "state set register width does not match the plan".into(),
        ));
    }
    if set.len() != plan.n_states || i >= set.len() {
        return Err(Error::Dimension("state index outside the plan".into()));
    }
    let psi = set.state(i);
    let blank = {
        let mut b = vec![C64::new(0.0, 0.0); set.dim()];
        b[0] = C64::new(1.0, 0.0);
        b
    };
    let mut reg = vec![C64::new(1.0, 0.0)];
    for r in 0..plan.layout.registers {
        if r < plan.copies_in {
            reg = vec_kron(&reg, &psi);
        } else {
            reg = vec_kron(&reg, &blank);
        }
    }
    let mut probe = vec![C64::new(0.0, 0.0); 2];
    probe[(1 - plan.probe_success) as usize] = C64::new(1.0, 0.0);
    StateVector::new(plan.wire_count(), vec_kron(&reg, &probe))
}

/// Per-state branch statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateBranch {
    pub state: usize,
    pub success_probability: f64,
    pub failure_probability: f64,
    /// Fidelity of the renormalized post-success register state to its
    /// target.
    pub success_fidelity: f64,
    /// Deviation of the success amplitude from sqrt(gamma_i).
    pub success_amplitude_residual: f64,
    /// Failure-branch coordinates on the failure basis, as (re, im) pairs.
    pub failure_coords: Vec<[f64; 2]>,
    /// Max deviation of the failure coordinates from column i of C.
    pub failure_residual: f64,
    pub probability_sum_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchReport {
    pub mode: MachineMode,
    pub gate_count: usize,
    pub per_state: Vec<StateBranch>,
    pub max_gamma_residual: f64,
    pub max_failure_residual: f64,
    pub max_fidelity_deficit: f64,
    pub max_probability_sum_residual: f64,
    /// Contract residual recorded when the core unitary was built.
    pub core_contract_residual: f64,
}

/// Which execution engine carries the dynamics.
pub enum Execution<'a> {
    Plan,
    Netlist(&'a GateNetlist),
}

/// Run every input state and compare the branch statistics against the
/// plan's contract data.
pub fn analyze(
    plan: &CircuitPlan,
    set: &StateSet,
    alloc: &ProbabilityAllocation,
    exec: Execution,
) -> Result<BranchReport> {
    if alloc.len() != plan.n_states {
        return Err(Error::Dimension(
            "allocation size does not match the plan".into(),
        ));
    }
    for (i, g) in alloc.gamma.iter().enumerate() {
        if (g - plan.gamma[i]).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "allocation gamma[{i}]={g} disagrees with the plan ({})",
                plan.gamma[i]
            )));
        }
    }
    let s_bit = plan.probe_success as usize;
    let f_bit = 1 - s_bit;
    let gate_count = match &exec {
        Execution::Plan => plan.steps.len(),
        Execution::Netlist(n) => n.gates.len(),
    };
    let mut per_state = Vec::with_capacity(set.len());
    let mut max_gamma = 0.0f64;
    let mut max_fail = 0.0f64;
    let mut max_deficit = 0.0f64;
    let mut max_sum = 0.0f64;
    for i in 0..set.len() {
        let input = encode_input(plan, set, i)?;
        let out = match &exec {
            Execution::Plan => run_plan(plan, &input)?,
            Execution::Netlist(n) => {
                if n.wire_count != plan.wire_count() {
                    return Err(Error::Dimension(
                        "netlist wires do not match the plan".into(),
                    ));
                }
                run_netlist(n, &input)?
            }
        };
        let amps = out.amplitudes();
        let reg_dim = amps.len() / 2;
        let mut p_success = 0.0f64;
        let mut p_failure = 0.0f64;
        for r in 0..reg_dim {
            p_success += amps[2 * r + s_bit].norm_sqr();
            p_failure += amps[2 * r + f_bit].norm_sqr();
        }
        // Success amplitude on the target register state.
        let target = &plan.success_targets[i];
        let mut overlap = C64::new(0.0, 0.0);
        for r in 0..reg_dim {
            overlap += target[r].conj() * amps[2 * r + s_bit];
        }
        let fidelity = if p_success > 1e-30 {
            overlap.norm_sqr() / p_success
        } else {
            0.0
        };
        let amp_residual = (overlap - C64::new(plan.gamma[i].sqrt(), 0.0)).norm();
        // Failure coordinates against column i of C.
        let mut coords = Vec::with_capacity(plan.failure_basis.len());
        let mut fail_residual = 0.0f64;
        for (j, basis) in plan.failure_basis.iter().enumerate() {
            let mut coord = C64::new(0.0, 0.0);
            for r in 0..reg_dim {
                coord += basis[r].conj() * amps[2 * r + f_bit];
            }
            coords.push([coord.re, coord.im]);
            fail_residual = fail_residual.max((coord - plan.failure_c[(j, i)]).norm());
        }
        let sum_residual = (p_success + p_failure - 1.0).abs();
        max_gamma = max_gamma.max((p_success - plan.gamma[i]).abs());
        max_fail = max_fail.max(fail_residual);
        max_deficit = max_deficit.max(1.0 - fidelity.min(1.0));
        max_sum = max_sum.max(sum_residual);
        per_state.push(StateBranch {
            state: i,
            success_probability: p_success,
            failure_probability: p_failure,
            success_fidelity: fidelity,
            success_amplitude_residual: amp_residual,
            failure_coords: coords,
            failure_residual: fail_residual,
            probability_sum_residual: sum_residual,
        });
    }
    Ok(BranchReport {
        mode: plan.mode,
        gate_count,
        per_state,
        max_gamma_residual: max_gamma,
        max_failure_residual: max_fail,
        max_fidelity_deficit: max_deficit,
        max_probability_sum_residual: max_sum,
        core_contract_residual: plan.core_contract_residual,
    })
}

/// Small perturbation injected on the first blank register: amplitudes
/// delta_k (with phases tau_{k+1}) on the non-blank patterns, the remainder
/// staying on the blank pattern with global phase tau_1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub delta: Vec<f64>,
    pub tau: Vec<f64>,
}

impl PerturbationSpec {
    pub fn weight(&self) -> f64 {
        self.delta.iter().map(|d| d * d).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatePerturbation {
    pub state: usize,
    /// Probability of failure together with a non-blank pattern on the
    /// perturbed register.
    pub detection_probability: f64,
    /// Same statistic from the dense-matrix execution.
    pub oracle_detection_probability: f64,
    pub detection_residual: f64,
    /// Conditional on failure: probability of each non-blank pattern.
    pub pattern_probabilities: Vec<f64>,
    /// Worst-case fidelity of the input registers after a detection event.
    pub recovery_fidelity: f64,
    pub failure_probability: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub injected_weight: f64,
    pub per_state: Vec<StatePerturbation>,
    pub max_detection_residual: f64,
    pub min_recovery_fidelity: f64,
}

/// Run the clone plan with a perturbed first blank register and report the
/// failure-branch detection statistics.
pub fn error_adaptation(
    plan: &CircuitPlan,
    set: &StateSet,
    pert: &PerturbationSpec,
) -> Result<PerturbationReport> {
    if plan.mode != MachineMode::Clone {
        return Err(Error::InvalidInput(
            "error adaptation applies to clone plans".into(),
        ));
    }
    let q = plan.layout.qubits_per_register;
    let reg_dim = 1usize << q;
    if pert.delta.len() > reg_dim - 1 {
        return Err(Error::Dimension(format!(
            "{} perturbation amplitudes for {} non-blank patterns",
            pert.delta.len(),
            reg_dim - 1
        )));
    }
    let weight = pert.weight();
    if weight >= 1.0 {
        return Err(Error::InvalidInput(
            "perturbation weight must stay below 1".into(),
        ));
    }
    if !pert.tau.is_empty() && pert.tau.len() != pert.delta.len() + 1 {
        return Err(Error::Dimension(
            "phase list must have one more entry than the amplitude list".into(),
        ));
    }
    let tau = |k: usize| -> f64 {
        if pert.tau.is_empty() {
            0.0
        } else {
            pert.tau[k]
        }
    };

    // Perturbed register vector.
    let mut blank = vec![C64::new(0.0, 0.0); reg_dim];
    blank[0] = C64::from_polar((1.0 - weight).sqrt(), tau(0));
    for (k, d) in pert.delta.iter().enumerate() {
        blank[k + 1] = C64::from_polar(*d, tau(k + 1));
    }

    let oracle_matrix = plan.compose_matrix()?;
    let s_bit = plan.probe_success as usize;
    let f_bit = 1 - s_bit;
    let m_copies = plan.copies_in;
    let perturbed_register = m_copies; // first blank register
    let regs = plan.layout.registers;
    let reg_wires = plan.layout.register_wire_count();
    let pattern_shift = q * (regs - 1 - perturbed_register);
    let pattern_mask = reg_dim - 1;

    let mut per_state = Vec::with_capacity(set.len());
    let mut max_residual = 0.0f64;
    let mut min_recovery = 1.0f64;
    for i in 0..set.len() {
        // Assemble the perturbed input.
        let psi = set.state(i);
        let zero = {
            let mut z = vec![C64::new(0.0, 0.0); reg_dim];
            z[0] = C64::new(1.0, 0.0);
            z
        };
        let mut reg = vec![C64::new(1.0, 0.0)];
        for r in 0..regs {
            if r < m_copies {
                reg = vec_kron(&reg, &psi);
            } else if r == perturbed_register {
                reg = vec_kron(&reg, &blank);
            } else {
                reg = vec_kron(&reg, &zero);
            }
        }
        let mut probe = vec![C64::new(0.0, 0.0); 2];
        probe[f_bit] = C64::new(1.0, 0.0);
        let input = StateVector::new(plan.wire_count(), vec_kron(&reg, &probe))?;

        let out = run_plan(plan, &input)?;
        let oracle_out = oracle_matrix.mul_vec(input.amplitudes());

        let stats = |amps: &[C64]| -> (f64, f64, Vec<f64>) {
            let mut detection = 0.0f64;
            let mut p_fail = 0.0f64;
            let mut patterns = vec![0.0f64; reg_dim - 1];
            for r in 0..(1usize << reg_wires) {
                let a = amps[2 * r + f_bit].norm_sqr();
                p_fail += a;
                let pat = (r >> pattern_shift) & pattern_mask;
                if pat != 0 {
                    detection += a;
                    patterns[pat - 1] += a;
                }
            }
            (detection, p_fail, patterns)
        };
        let (detection, p_fail, patterns_raw) = stats(out.amplitudes());
        let (oracle_detection, _, _) = stats(&oracle_out);
        let residual = (detection - oracle_detection).abs();

        // Conditional pattern probabilities.
        let patterns: Vec<f64> = patterns_raw
            .iter()
            .map(|p| if p_fail > 1e-30 { p / p_fail } else { 0.0 })
            .collect();

        // Recovery: project on (failure, pattern p), renormalize, compare the
        // input registers against the original state copies.
        let mut recovery = 1.0f64;
        for pat in 1..reg_dim {
            let mut norm_sq = 0.0f64;
            let mut overlap = C64::new(0.0, 0.0);
            // Expected register part: psi^(x)M on the copies, pattern on the
            // perturbed register, blanks elsewhere.
            let mut expected = vec![C64::new(1.0, 0.0)];
            for r in 0..regs {
                if r < m_copies {
                    expected = vec_kron(&expected, &psi);
                } else if r == perturbed_register {
                    let mut e = vec![C64::new(0.0, 0.0); reg_dim];
                    e[pat] = C64::new(1.0, 0.0);
                    expected = vec_kron(&expected, &e);
                } else {
                    expected = vec_kron(&expected, &zero);
                }
            }
            for r in 0..(1usize << reg_wires) {
                if (r >> pattern_shift) & pattern_mask != pat {
                    continue;
                }
                let a = out.amplitudes()[2 * r + f_bit];
                norm_sq += a.norm_sqr();
                overlap += expected[r].conj() * a;
            }
            if norm_sq > 1e-12 {
                recovery = recovery.min(overlap.norm_sqr() / norm_sq);
            }
        }

        max_residual = max_residual.max(residual);
        min_recovery = min_recovery.min(recovery);
        per_state.push(StatePerturbation {
            state: i,
            detection_probability: detection,
            oracle_detection_probability: oracle_detection,
            detection_residual: residual,
            pattern_probabilities: patterns,
            recovery_fidelity: recovery,
            failure_probability: p_fail,
        });
    }
    Ok(PerturbationReport {
        injected_weight: weight,
        per_state,
        max_detection_residual: max_residual,
        min_recovery_fidelity: min_recovery,
    })
}
