// SPDX-License-Identifier: Apache-2.0

//! File formats: the state-set input, machine-readable reports, and atomic
//! output writing.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use cloneid::feasibility::MachineMode;
use cloneid::simulator::{BranchReport, PerturbationReport};
use cloneid::stateset::StateSet;

/// State-set file: `qubits`, `states` as arrays of [re, im] pairs, optional
/// `priors`. Text JSON, chosen over binary so fixtures diff cleanly.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateSetFile {
    pub qubits: usize,
    pub states: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
}

impl StateSetFile {
    pub fn into_state_set(self) -> cloneid::Result<StateSet> {
        let states: Vec<Vec<C64>> = self
            .states
            .into_iter()
            .map(|s| s.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        StateSet::validate(states, self.qubits, self.priors)
    }
}

pub fn load_state_set(path: &Path) -> Result<StateSet, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: StateSetFile =
        serde_json::from_str(&text).map_err(|e| format!("bad state-set file: {e}"))?;
    file.into_state_set().map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeasReportFile {
    pub mode: MachineMode,
    pub copies_in: usize,
    pub copies_out: usize,
    pub n_states: usize,
    pub gamma: Vec<f64>,
    /// Present when the gamma request was `max-uniform`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub located_max_uniform: Option<f64>,
    pub feasible: bool,
    pub min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SynthReportFile {
    pub mode: MachineMode,
    pub n_states: usize,
    pub copies_in: usize,
    pub copies_out: usize,
    pub wires: usize,
    pub probe_wire: usize,
    pub probe_success: u8,
    pub core_construction: String,
    pub core_contract_residual: f64,
    pub gamma: Vec<f64>,
    pub gate_count: usize,
    pub plan_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyReportFile {
    pub pass: bool,
    pub tolerance: f64,
    pub worst_residual: f64,
    pub branch: BranchReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationReport>,
}

/// Serialize a report deterministically (pretty JSON plus trailing newline).
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

/// Write through a temporary file in the target directory and rename, so an
/// aborted run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| format!("cannot create temporary file in {}: {e}", dir.display()))?;
    use std::io::Write;
    tmp.write_all(bytes)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    tmp.persist(path)
        .map_err(|e| format!("cannot finalize {}: {e}", path.display()))?;
    Ok(())
}

/// Tabular rendering of a verification report for `--human`.
pub fn human_branch_table(report: &BranchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "mode: {}   gates: {}   core residual: {:.3e}\n",
        report.mode, report.gate_count, report.core_contract_residual
    ));
    out.push_str("state  p(success)    p(failure)    fidelity      fail-resid\n");
    for b in &report.per_state {
        out.push_str(&format!(
            "{:>5}  {:<12.9}  {:<12.9}  {:<12.9}  {:.3e}\n",
            b.state,
            b.success_probability,
            b.failure_probability,
            b.success_fidelity,
            b.failure_residual
        ));
    }
    out.push_str(&format!(
        "worst: gamma {:.3e}  fidelity {:.3e}  failure {:.3e}  prob-sum {:.3e}\n",
        report.max_gamma_residual,
        report.max_fidelity_deficit,
        report.max_failure_residual,
        report.max_probability_sum_residual
    ));
    out
}
