// SPDX-License-Identifier: Apache-2.0

//! Circuit plans: ordered conditioned operators over a wire layout, plus
//! the contract data needed to verify executions.
//!
//! Wire layout: copy registers first (register 0 on the lowest wire indices),
//! blank registers next, probe wire last. Basis indices are kron-ordered with
//! wire 0 most significant and the probe least significant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{
    check_clone, check_identification, spectral_data, MachineMode, ProbabilityAllocation,
};
use crate::numerics::cmatrix::{vec_kron, C64, CMatrix};
use crate::stateset::{gram_power, triangularize, StateSet};

use super::core_unitary::{
    build_core_isometry, build_core_spectral, success_rotation, CoreConstruction, CoreSpec,
};
use super::dop::build_cascade;

/// Register geometry of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireLayout {
    pub registers: usize,
    pub qubits_per_register: usize,
}

impl WireLayout {
    pub fn register_wires(&self, r: usize) -> Vec<usize> {
        let q = self.qubits_per_register;
        (r * q..(r + 1) * q).collect()
    }

    pub fn probe_wire(&self) -> usize {
        self.registers * self.qubits_per_register
    }

    pub fn wire_count(&self) -> usize {
        self.registers * self.qubits_per_register + 1
    }

    /// Wire count of the register part alone (probe excluded).
    pub fn register_wire_count(&self) -> usize {
        self.registers * self.qubits_per_register
    }
}

/// Operator payload of one plan step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum StepOperator {
    /// Dense unitary over the step's target wires.
    Dense(CMatrix),
    /// Probe rotation block: pattern i of the register targets rotates the
    /// probe by the i-th spectrum entry; patterns beyond the list idle.
    SBlock { m: Vec<f64>, probe_success: u8 },
}

impl StepOperator {
    /// Dense matrix over the step's target wires.
    pub fn dense(&self, target_count: usize) -> CMatrix {
        match self {
            StepOperator::Dense(u) => u.clone(),
            StepOperator::SBlock { m, probe_success } => {
                let patterns = 1usize << (target_count - 1);
                let blocks: Vec<CMatrix> = (0..patterns)
                    .map(|i| {
                        if i < m.len() {
                            let u = success_rotation(m[i], *probe_success);
                            CMatrix::from_rows(vec![vec![u[0], u[1]], vec![u[2], u[3]]])
                                .expect("2x2 block")
                        } else {
                            CMatrix::identity(2)
                        }
                    })
                    .collect();
                let refs: Vec<&CMatrix> = blocks.iter().collect();
                CMatrix::block_diag(&refs)
            }
        }
    }
}

/// One conditioned operator: applied when every condition wire reads its
/// required bit, identity otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanStep {
    pub name: String,
    pub op: StepOperator,
    /// Target wires, most significant first.
    pub targets: Vec<usize>,
    /// (wire, required bit) pairs, disjoint from the targets.
    pub conditions: Vec<(usize, u8)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitPlan {
    pub mode: MachineMode,
    pub layout: WireLayout,
    /// Physical probe value that flags success.
    pub probe_success: u8,
    pub n_states: usize,
    pub copies_in: usize,
    pub copies_out: usize,
    pub gamma: Vec<f64>,
    /// Hermitian failure-amplitude matrix; column i holds the failure
    /// coordinates of input i on the failure basis.
    pub failure_c: CMatrix,
    /// Per-state register-part success target (probe excluded).
    pub success_targets: Vec<Vec<C64>>,
    /// Register-part failure basis vectors a_j (probe excluded).
    pub failure_basis: Vec<Vec<C64>>,
    pub core_construction: CoreConstruction,
    /// Contract residual recorded while building the core unitary.
    pub core_contract_residual: f64,
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    pub core: CoreConstruction,
    pub probe_success: u8,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            core: CoreConstruction::Isometry,
            probe_success: 1,
        }
    }
}

/// Apply a dense operator over `targets` (most significant first) to a raw
/// amplitude vector of `total_wires` wires, honoring bit conditions.
pub fn apply_dense_to_amps(
    amps: &mut [C64],
    total_wires: usize,
    targets: &[usize],
    conditions: &[(usize, u8)],
    u: &CMatrix,
) {
    let k = targets.len();
    let bd = 1usize << k;
    assert_eq!(u.rows(), bd, "operator does not match target count");
    assert_eq!(amps.len(), 1usize << total_wires);
    let tmask: Vec<usize> = targets
        .iter()
        .map(|&w| 1usize << (total_wires - 1 - w))
        .collect();
    let union: usize = tmask.iter().fold(0, |a, m| a | m);
    let mut cmask = 0usize;
    let mut cval = 0usize;
    for &(w, v) in conditions {
        let m = 1usize << (total_wires - 1 - w);
        cmask |= m;
        if v == 1 {
            cval |= m;
        }
    }
    let offsets: Vec<usize> = (0..bd)
        .map(|pat| {
            let mut o = 0usize;
            for (b, m) in tmask.iter().enumerate() {
                if (pat >> (k - 1 - b)) & 1 == 1 {
                    o |= m;
                }
            }
            o
        })
        .collect();
    let dim = amps.len();
    let mut sub = vec![C64::new(0.0, 0.0); bd];
    let mut out = vec![C64::new(0.0, 0.0); bd];
    for base in 0..dim {
        if base & union != 0 {
            continue;
        }
        if base & cmask != cval {
            continue;
        }
        for (p, off) in offsets.iter().enumerate() {
            sub[p] = amps[base | off];
        }
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (cc, s) in sub.iter().enumerate() {
                acc += u[(r, cc)] * s;
            }
            *o = acc;
        }
        for (p, off) in offsets.iter().enumerate() {
            amps[base | off] = out[p];
        }
    }
}

impl CircuitPlan {
    pub fn wire_count(&self) -> usize {
        self.layout.wire_count()
    }

    pub fn probe_wire(&self) -> usize {
        self.layout.probe_wire()
    }

    /// Dense matrix of the whole plan, wire 0 most significant.
    ///
    /// Serves as the reference composition the lowered netlist is checked
    /// against; bounded to 12 wires.
    pub fn compose_matrix(&self) -> Result<CMatrix> {
        let w = self.wire_count();
        if w > 12 {
            return Err(Error::Dimension(format!(
                "dense composition limited to 12 wires, plan has {w}"
            )));
        }
        let dim = 1usize << w;
        use rayon::prelude::*;
        let cols: Vec<Vec<C64>> = (0..dim)
            .into_par_iter()
            .map(|c| {
                let mut amps = vec![C64::new(0.0, 0.0); dim];
                amps[c] = C64::new(1.0, 0.0);
                for step in &self.steps {
                    let u = step.op.dense(step.targets.len());
                    apply_dense_to_amps(&mut amps, w, &step.targets, &step.conditions, &u);
                }
                amps
            })
            .collect();
        Ok(CMatrix::from_fn(dim, dim, |r, c| cols[c][r]))
    }

    /// Deterministic content hash (FNV-1a over a canonical dump).
    pub fn content_hash(&self) -> String {
        let mut dump = String::new();
        dump.push_str(&format!(
            "{};{};{};{};{};{};{}\n",
            self.mode,
            self.layout.registers,
            self.layout.qubits_per_register,
            self.probe_success,
            self.n_states,
            self.copies_in,
            self.copies_out
        ));
        for g in &self.gamma {
            dump.push_str(&format!("{g:.17e} "));
        }
        for step in &self.steps {
            dump.push_str(&format!("\n{};{:?};{:?};", step.name, step.targets, step.conditions));
            match &step.op {
                StepOperator::Dense(u) => {
                    for r in 0..u.rows() {
                        for c in 0..u.cols() {
                            let z = u[(r, c)];
                            dump.push_str(&format!("{:.17e},{:.17e} ", z.re, z.im));
                        }
                    }
                }
                StepOperator::SBlock { m, probe_success } => {
                    dump.push_str(&format!("S{probe_success}:"));
                    for v in m {
                        dump.push_str(&format!("{v:.17e} "));
                    }
                }
            }
        }
        format!("{:016x}", fnv1a(dump.as_bytes()))
    }

    fn push_step(
        &mut self,
        name: String,
        op: StepOperator,
        targets: Vec<usize>,
        conditions: Vec<(usize, u8)>,
    ) {
        debug_assert!(targets.iter().all(|t| !conditions.iter().any(|(w, _)| w == t)));
        self.steps.push(PlanStep {
            name,
            op,
            targets,
            conditions,
        });
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Embed an operator on the leading patterns of one register.
fn embed_pattern_op(op: &CMatrix, qubits: usize) -> CMatrix {
    op.embed_leading(1usize << qubits)
}

/// Condition list requiring every wire of the given registers to read 0.
fn blank_conditions(layout: &WireLayout, registers: impl Iterator<Item = usize>) -> Vec<(usize, u8)> {
    let mut conds = Vec::new();
    for r in registers {
        for w in layout.register_wires(r) {
            conds.push((w, 0));
        }
    }
    conds
}

struct AssemblyData {
    plan: CircuitPlan,
}

#[allow(clippy::too_many_arguments)]
fn assemble_common(
    set: &StateSet,
    copies_in: usize,
    copies_out: usize,
    mode: MachineMode,
    alloc: &ProbabilityAllocation,
    opts: &SynthesisOptions,
) -> Result<AssemblyData> {
    if alloc.mode != mode {
        return Err(Error::InvalidInput(format!(
            "allocation mode {} does not match requested {mode}",
            alloc.mode
        )));
    }
    if alloc.len() != set.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} states",
            alloc.len(),
            set.len()
        )));
    }
    if copies_in < 1 {
        return Err(Error::InvalidInput("need at least one input copy".into()));
    }
    if opts.probe_success > 1 {
        return Err(Error::InvalidInput("probe success flag must be 0 or 1".into()));
    }
    let n = set.len();
    let q = set.qubits();

    let x = set.gram();
    let xm = gram_power(&x, copies_in as u32)?;
    let (report, t_out_form) = match mode {
        MachineMode::Identification => {
            let report = check_identification(&xm, alloc)?;
            (report, None)
        }
        MachineMode::Clone => {
            let xn = gram_power(&x, copies_out as u32)?;
            let report = check_clone(&xm, &xn, alloc)?;
            (report, Some(xn))
        }
    };
    if !report.feasible {
        return Err(Error::Infeasible {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    let sd = spectral_data(&xm, alloc, &report.slack)?;

    let (theta, u0) = triangularize(set)?;
    let cascade_in = build_cascade(&theta, copies_in)?;
    let t_in = cascade_in.compressed_form().tmat().clone();

    let cascade_out = if mode == MachineMode::Clone {
        Some(build_cascade(&theta, copies_out)?)
    } else {
        None
    };
    let t_out = match (&cascade_out, &t_out_form) {
        (Some(cn), Some(_)) => cn.compressed_form().tmat().clone(),
        _ => CMatrix::identity(n),
    };

    let ps = opts.probe_success;
    let target_tag = match mode {
        MachineMode::Identification => "phi~",
        MachineMode::Clone => "beta",
    };
    let core_spec = CoreSpec {
        t_in: &t_in,
        t_out: &t_out,
        gamma: &alloc.gamma,
        c: &sd.c,
        probe_success: ps,
        target_tag,
    };
    let core = match opts.core {
        CoreConstruction::Isometry => build_core_isometry(&core_spec)?,
        CoreConstruction::Spectral => build_core_spectral(&sd, &core_spec)?,
    };

    let layout = WireLayout {
        registers: copies_out,
        qubits_per_register: q,
    };
    let probe = layout.probe_wire();
    let fail_bit = 1 - ps;

    let mut plan = CircuitPlan {
        mode,
        layout,
        probe_success: ps,
        n_states: n,
        copies_in,
        copies_out,
        gamma: alloc.gamma.clone(),
        failure_c: sd.c.clone(),
        success_targets: Vec::new(),
        failure_basis: Vec::new(),
        core_construction: opts.core,
        core_contract_residual: core.contract_residual,
        steps: Vec::new(),
    };

    // Rotate each input copy onto triangular coordinates.
    for r in 0..copies_in {
        plan.push_step(
            format!("align[{r}]"),
            StepOperator::Dense(u0.clone()),
            layout.register_wires(r),
            vec![],
        );
    }
    // Compress the input copies into register 0, on the initial probe branch.
    for stage in &cascade_in.stages {
        let mut targets = layout.register_wires(stage.upper_register);
        targets.extend(layout.register_wires(stage.lower_register));
        plan.push_step(
            format!("compress[{},{}]", stage.upper_register, stage.lower_register),
            StepOperator::Dense(stage.op.matrix.clone()),
            targets,
            vec![(probe, fail_bit)],
        );
    }
    // Core on (register 0, probe), conditioned on every other register blank.
    let blanks = blank_conditions(&layout, 1..copies_out);
    let mut core_targets = layout.register_wires(0);
    core_targets.push(probe);
    match opts.core {
        CoreConstruction::Isometry => {
            let full = core.matrix.embed_leading(1usize << (q + 1));
            plan.push_step("core".into(), StepOperator::Dense(full), core_targets, blanks);
        }
        CoreConstruction::Spectral => {
            let v_emb = embed_pattern_op(&sd.v, q);
            plan.push_step(
                "core_v_adj".into(),
                StepOperator::Dense(v_emb.adjoint()),
                layout.register_wires(0),
                blanks.clone(),
            );
            plan.push_step(
                "core_s".into(),
                StepOperator::SBlock {
                    m: sd.m.clone(),
                    probe_success: ps,
                },
                core_targets,
                blanks.clone(),
            );
            plan.push_step(
                "core_v".into(),
                StepOperator::Dense(v_emb),
                layout.register_wires(0),
                blanks,
            );
        }
    }

    match mode {
        MachineMode::Identification => {
            // Undo the compression on the failure branch.
            for stage in cascade_in.stages.iter().rev() {
                let mut targets = layout.register_wires(stage.upper_register);
                targets.extend(layout.register_wires(stage.lower_register));
                plan.push_step(
                    format!("uncompress[{},{}]", stage.upper_register, stage.lower_register),
                    StepOperator::Dense(stage.op.matrix.adjoint()),
                    targets,
                    vec![(probe, fail_bit)],
                );
            }
        }
        MachineMode::Clone => {
            let cascade_out = cascade_out.as_ref().expect("clone cascade");
            // Expand register 0 into all output copies on the success branch.
            for stage in cascade_out.stages.iter().rev() {
                let mut targets = layout.register_wires(stage.upper_register);
                targets.extend(layout.register_wires(stage.lower_register));
                plan.push_step(
                    format!("expand[{},{}]", stage.upper_register, stage.lower_register),
                    StepOperator::Dense(stage.op.matrix.adjoint()),
                    targets,
                    vec![(probe, ps)],
                );
            }
            // Undo the input compression on the failure branch.
            for stage in cascade_in.stages.iter().rev() {
                let mut targets = layout.register_wires(stage.upper_register);
                targets.extend(layout.register_wires(stage.lower_register));
                plan.push_step(
                    format!("uncompress[{},{}]", stage.upper_register, stage.lower_register),
                    StepOperator::Dense(stage.op.matrix.adjoint()),
                    targets,
                    vec![(probe, fail_bit)],
                );
            }
            // Back to the original state coordinates: unconditionally on the
            // input registers, success-only on the grown copies.
            let u0_adj = u0.adjoint();
            for r in 0..copies_in {
                plan.push_step(
                    format!("unalign[{r}]"),
                    StepOperator::Dense(u0_adj.clone()),
                    layout.register_wires(r),
                    vec![],
                );
            }
            for r in copies_in..copies_out {
                plan.push_step(
                    format!("unalign[{r}]"),
                    StepOperator::Dense(u0_adj.clone()),
                    layout.register_wires(r),
                    vec![(probe, ps)],
                );
            }
        }
    }

    // Contract data over the register part (probe excluded).
    let reg_wires = plan.layout.register_wire_count();
    let reg_dim = 1usize << reg_wires;
    let shift = q * (copies_out - 1);
    match mode {
        MachineMode::Identification => {
            for i in 0..n {
                let mut t = vec![C64::new(0.0, 0.0); reg_dim];
                t[i << shift] = C64::new(1.0, 0.0);
                plan.success_targets.push(t);
            }
        }
        MachineMode::Clone => {
            for i in 0..n {
                let psi = set.state(i);
                let mut t = vec![C64::new(1.0, 0.0)];
                for _ in 0..copies_out {
                    t = vec_kron(&t, &psi);
                }
                plan.success_targets.push(t);
            }
        }
    }
    for j in 0..n {
        let mut a = vec![C64::new(0.0, 0.0); reg_dim];
        a[j << shift] = C64::new(1.0, 0.0);
        for stage in cascade_in.stages.iter().rev() {
            let mut targets = plan.layout.register_wires(stage.upper_register);
            targets.extend(plan.layout.register_wires(stage.lower_register));
            apply_dense_to_amps(&mut a, reg_wires, &targets, &[], &stage.op.matrix.adjoint());
        }
        if mode == MachineMode::Clone {
            let u0_adj = u0.adjoint();
            for r in 0..copies_in {
                apply_dense_to_amps(
                    &mut a,
                    reg_wires,
                    &plan.layout.register_wires(r),
                    &[],
                    &u0_adj,
                );
            }
        }
        plan.failure_basis.push(a);
    }

    Ok(AssemblyData { plan })
}

/// Assemble the identification circuit for `copies_in` copies per input.
pub fn assemble_identification(
    set: &StateSet,
    copies_in: usize,
    alloc: &ProbabilityAllocation,
    opts: &SynthesisOptions,
) -> Result<CircuitPlan> {
    Ok(assemble_common(
        set,
        copies_in,
        copies_in,
        MachineMode::Identification,
        alloc,
        opts,
    )?
    .plan)
}

/// Assemble the clone circuit growing `copies_in` copies to `copies_out`.
pub fn assemble_clone(
    set: &StateSet,
    copies_in: usize,
    copies_out: usize,
    alloc: &ProbabilityAllocation,
    opts: &SynthesisOptions,
) -> Result<CircuitPlan> {
    if copies_out <= copies_in {
        return Err(Error::InvalidInput(format!(
            "clone needs more output copies than inputs ({copies_out} <= {copies_in})"
        )));
    }
    Ok(assemble_common(
        set,
        copies_in,
        copies_out,
        MachineMode::Clone,
        alloc,
        opts,
    )?
    .plan)
}
