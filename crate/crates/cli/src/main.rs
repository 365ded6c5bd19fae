// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for the identification/cloning synthesis pipeline.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when an explicitly
//! requested probability allocation is infeasible, 3 when verification
//! finds a contract violation.

mod formats;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use cloneid::feasibility::{
    check_clone, check_identification, max_uniform_gamma, FeasibilityReport, MachineMode,
    ProbabilityAllocation,
};
use cloneid::gatecomp::{expand_polarities, lower_plan, GateNetlist};
use cloneid::simulator::{analyze, error_adaptation, Execution, PerturbationSpec};
use cloneid::stateset::{gram_power, StateSet};
use cloneid::synthesis::{
    assemble_clone, assemble_identification, CircuitPlan, CoreConstruction, SynthesisOptions,
};

use formats::{
    human_branch_table, load_state_set, to_json, write_atomic, FeasReportFile, SynthReportFile,
    VerifyReportFile,
};

const EXIT_INPUT: i32 = 1;
const EXIT_INFEASIBLE: i32 = 2;
const EXIT_VERIFY: i32 = 3;

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Verification(_) => EXIT_VERIFY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Infeasible(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<cloneid::Error> for Failure {
    fn from(e: cloneid::Error) -> Self {
        match e {
            cloneid::Error::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Input(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Identify,
    Clone,
}

impl ModeArg {
    fn to_mode(self) -> MachineMode {
        match self {
            ModeArg::Identify => MachineMode::Identification,
            ModeArg::Clone => MachineMode::Clone,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoreArg {
    Isometry,
    Spectral,
}

#[derive(Debug, Clone, Args)]
struct JobArgs {
    /// State-set file (JSON with fields qubits, states, optional priors).
    #[arg(long)]
    states: PathBuf,

    /// Machine mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Identify)]
    mode: ModeArg,

    /// Input copies per candidate state (M).
    #[arg(long = "copies-in", default_value_t = 1)]
    copies_in: usize,

    /// Output copies for clone mode (N > M); ignored by identify.
    #[arg(long = "copies-out", default_value_t = 2)]
    copies_out: usize,

    /// Per-state success probabilities "g1,g2,..." or "max-uniform".
    #[arg(long, default_value = "max-uniform")]
    gamma: String,

    /// Probe value flagging success. The published network diagrams
    /// disagree between modes; this toolchain standardizes on probe 1 =
    /// success and offers 0 for the opposite reading.
    #[arg(long = "probe-success", default_value_t = 1)]
    probe_success: u8,

    /// Core construction. The isometry core meets the synthesis contract by
    /// construction; the spectral core reproduces the sandwiched rotation
    /// form and records its contract residual instead.
    #[arg(long, value_enum, default_value_t = CoreArg::Isometry)]
    core: CoreArg,

    /// Verification tolerance on probabilities, fidelities and failure
    /// coordinates.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Debug, Parser)]
#[command(
    name = "cloneid",
    version,
    about = "Compile state sets and success probabilities into verified probabilistic identification and cloning circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check feasibility of a probability allocation (or locate the
    /// max-uniform one) and write a report.
    Feas {
        #[command(flatten)]
        job: JobArgs,
        /// Report output path.
        #[arg(short, long)]
        out: PathBuf,
        /// Also print a table to stdout.
        #[arg(long)]
        human: bool,
    },
    /// Synthesize a circuit and write the netlist plus a synthesis report.
    Synth {
        #[command(flatten)]
        job: JobArgs,
        /// Netlist output path.
        #[arg(short, long)]
        out: PathBuf,
        /// Synthesis report output path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the circuit plan as JSON (consumed by `lower`).
        #[arg(long = "plan-out")]
        plan_out: Option<PathBuf>,
        /// Expand polarity-0 controls into literal X conjugation pairs.
        #[arg(long = "expand-polarities")]
        expand: bool,
    },
    /// Lower a previously exported circuit plan to a netlist.
    Lower {
        /// Plan JSON produced by `synth --plan-out`.
        #[arg(long)]
        plan: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long = "expand-polarities")]
        expand: bool,
    },
    /// Run a netlist against a state set and report branch statistics.
    Simulate {
        #[command(flatten)]
        job: JobArgs,
        /// Netlist file to execute.
        #[arg(long)]
        netlist: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Blank-register perturbation "d1,d2,...[;t1,t2,...]".
        #[arg(long)]
        perturb: Option<String>,
        #[arg(long)]
        human: bool,
    },
    /// Verify a netlist against the synthesis contract; exit 3 on violation.
    Verify {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        netlist: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        perturb: Option<String>,
        #[arg(long)]
        human: bool,
    },
    /// Full pipeline: feasibility, synthesis, lowering and verification.
    Run {
        #[command(flatten)]
        job: JobArgs,
        /// Netlist output path.
        #[arg(short, long)]
        out: PathBuf,
        /// Verification report output path.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        perturb: Option<String>,
        #[arg(long)]
        human: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message());
            std::process::exit(f.code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Feas { job, out, human } => cmd_feas(&job, &out, human),
        Command::Synth {
            job,
            out,
            report,
            plan_out,
            expand,
        } => cmd_synth(&job, &out, report.as_deref(), plan_out.as_deref(), expand),
        Command::Lower { plan, out, expand } => cmd_lower(&plan, &out, expand),
        Command::Simulate {
            job,
            netlist,
            out,
            perturb,
            human,
        } => cmd_verify(&job, &netlist, &out, perturb.as_deref(), human, false),
        Command::Verify {
            job,
            netlist,
            out,
            perturb,
            human,
        } => cmd_verify(&job, &netlist, &out, perturb.as_deref(), human, true),
        Command::Run {
            job,
            out,
            report,
            perturb,
            human,
        } => cmd_run(&job, &out, &report, perturb.as_deref(), human),
    }
}

struct ResolvedJob {
    set: StateSet,
    mode: MachineMode,
    copies_in: usize,
    copies_out: usize,
    alloc: ProbabilityAllocation,
    located: Option<f64>,
    report: FeasibilityReport,
}

fn validate_job(job: &JobArgs) -> Result<(), Failure> {
    if job.copies_in < 1 {
        return Err(Failure::Input("--copies-in must be at least 1".into()));
    }
    if job.mode == ModeArg::Clone && job.copies_out <= job.copies_in {
        return Err(Failure::Input(
            "clone mode needs --copies-out greater than --copies-in".into(),
        ));
    }
    if job.probe_success > 1 {
        return Err(Failure::Input("--probe-success must be 0 or 1".into()));
    }
    if !(job.tolerance > 0.0 && job.tolerance.is_finite()) {
        return Err(Failure::Input("--tolerance must be positive".into()));
    }
    Ok(())
}

/// Resolve the requested allocation and its feasibility report.
fn resolve_job(job: &JobArgs) -> Result<ResolvedJob, Failure> {
    validate_job(job)?;
    let set = load_state_set(&job.states)?;
    let mode = job.mode.to_mode();
    let copies_in = job.copies_in;
    let copies_out = match mode {
        MachineMode::Identification => copies_in,
        MachineMode::Clone => job.copies_out,
    };
    let x = set.gram();
    let xm = gram_power(&x, copies_in as u32)?;
    let xn = match mode {
        MachineMode::Clone => Some(gram_power(&x, copies_out as u32)?),
        MachineMode::Identification => None,
    };
    let (alloc, located) = if job.gamma.trim() == "max-uniform" {
        let alloc = max_uniform_gamma(&xm, xn.as_ref(), mode)?;
        let located = alloc.gamma[0];
        (alloc, Some(located))
    } else {
        let gamma: Vec<f64> = job
            .gamma
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad probability '{t}'"))
            })
            .collect::<Result<_, _>>()?;
        if gamma.len() != set.len() {
            return Err(Failure::Input(format!(
                "{} probabilities for {} states",
                gamma.len(),
                set.len()
            )));
        }
        (ProbabilityAllocation::new(gamma, mode)?, None)
    };
    let report = match mode {
        MachineMode::Identification => check_identification(&xm, &alloc)?,
        MachineMode::Clone => check_clone(&xm, xn.as_ref().expect("clone gram"), &alloc)?,
    };
    Ok(ResolvedJob {
        set,
        mode,
        copies_in,
        copies_out,
        alloc,
        located,
        report,
    })
}

fn cmd_feas(job: &JobArgs, out: &Path, human: bool) -> Result<(), Failure> {
    let resolved = resolve_job(job)?;
    let file = FeasReportFile {
        mode: resolved.mode,
        copies_in: resolved.copies_in,
        copies_out: resolved.copies_out,
        n_states: resolved.set.len(),
        gamma: resolved.alloc.gamma.clone(),
        located_max_uniform: resolved.located,
        feasible: resolved.report.feasible,
        min_eigenvalue: resolved.report.min_eigenvalue,
        priors: resolved.set.priors().map(|p| p.to_vec()),
    };
    write_atomic(out, to_json(&file).as_bytes())?;
    if human {
        println!(
            "{} n={} M={} N={}: feasible={} min_eig={:.6e}{}",
            file.mode,
            file.n_states,
            file.copies_in,
            file.copies_out,
            file.feasible,
            file.min_eigenvalue,
            file.located_max_uniform
                .map(|g| format!(" max-uniform gamma={g:.10}"))
                .unwrap_or_default()
        );
    }
    if !resolved.report.feasible {
        return Err(Failure::Infeasible(format!(
            "allocation infeasible (min eigenvalue {:.3e})",
            resolved.report.min_eigenvalue
        )));
    }
    Ok(())
}

fn build_plan(resolved: &ResolvedJob, job: &JobArgs) -> Result<CircuitPlan, Failure> {
    let opts = SynthesisOptions {
        core: match job.core {
            CoreArg::Isometry => CoreConstruction::Isometry,
            CoreArg::Spectral => CoreConstruction::Spectral,
        },
        probe_success: job.probe_success,
    };
    let plan = match resolved.mode {
        MachineMode::Identification => {
            assemble_identification(&resolved.set, resolved.copies_in, &resolved.alloc, &opts)?
        }
        MachineMode::Clone => assemble_clone(
            &resolved.set,
            resolved.copies_in,
            resolved.copies_out,
            &resolved.alloc,
            &opts,
        )?,
    };
    Ok(plan)
}

fn synth_report(plan: &CircuitPlan, netlist: &GateNetlist) -> SynthReportFile {
    SynthReportFile {
        mode: plan.mode,
        n_states: plan.n_states,
        copies_in: plan.copies_in,
        copies_out: plan.copies_out,
        wires: plan.wire_count(),
        probe_wire: plan.probe_wire(),
        probe_success: plan.probe_success,
        core_construction: plan.core_construction.to_string(),
        core_contract_residual: plan.core_contract_residual,
        gamma: plan.gamma.clone(),
        gate_count: netlist.gates.len(),
        plan_hash: netlist.plan_hash.clone(),
    }
}

fn cmd_synth(
    job: &JobArgs,
    out: &Path,
    report: Option<&Path>,
    plan_out: Option<&Path>,
    expand: bool,
) -> Result<(), Failure> {
    let resolved = resolve_job(job)?;
    if !resolved.report.feasible {
        return Err(Failure::Infeasible(format!(
            "allocation infeasible (min eigenvalue {:.3e})",
            resolved.report.min_eigenvalue
        )));
    }
    let plan = build_plan(&resolved, job)?;
    let mut netlist = lower_plan(&plan)?;
    if expand {
        netlist = expand_polarities(&netlist);
    }
    write_atomic(out, netlist.to_text().as_bytes())?;
    if let Some(rp) = report {
        write_atomic(rp, to_json(&synth_report(&plan, &netlist)).as_bytes())?;
    }
    if let Some(pp) = plan_out {
        let json = serde_json::to_string(&plan).map_err(|e| Failure::Input(e.to_string()))?;
        write_atomic(pp, format!("{json}\n").as_bytes())?;
    }
    Ok(())
}

fn cmd_lower(plan_path: &Path, out: &Path, expand: bool) -> Result<(), Failure> {
    let text = std::fs::read_to_string(plan_path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", plan_path.display())))?;
    let plan: CircuitPlan =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("bad plan file: {e}")))?;
    let mut netlist = lower_plan(&plan)?;
    if expand {
        netlist = expand_polarities(&netlist);
    }
    write_atomic(out, netlist.to_text().as_bytes())?;
    Ok(())
}

fn parse_perturbation(spec: &str) -> Result<PerturbationSpec, Failure> {
    let (deltas, taus) = match spec.split_once(';') {
        Some((d, t)) => (d, Some(t)),
        None => (spec, None),
    };
    let delta: Vec<f64> = deltas
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad perturbation amplitude '{t}'"))
        })
        .collect::<Result<_, _>>()?;
    let tau: Vec<f64> = match taus {
        None => vec![],
        Some(spec) => spec
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad perturbation phase '{t}'"))
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(PerturbationSpec { delta, tau })
}

fn cmd_verify(
    job: &JobArgs,
    netlist_path: &Path,
    out: &Path,
    perturb: Option<&str>,
    human: bool,
    enforce: bool,
) -> Result<(), Failure> {
    let resolved = resolve_job(job)?;
    if !resolved.report.feasible {
        return Err(Failure::Infeasible(format!(
            "allocation infeasible (min eigenvalue {:.3e})",
            resolved.report.min_eigenvalue
        )));
    }
    let plan = build_plan(&resolved, job)?;
    let text = std::fs::read_to_string(netlist_path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", netlist_path.display())))?;
    let netlist = GateNetlist::parse(&text)?;
    let branch = analyze(
        &plan,
        &resolved.set,
        &resolved.alloc,
        Execution::Netlist(&netlist),
    )?;
    let perturbation = match perturb {
        Some(spec) => Some(error_adaptation(
            &plan,
            &resolved.set,
            &parse_perturbation(spec)?,
        )?),
        None => None,
    };
    let tol = job.tolerance;
    let mut worst = branch
        .max_gamma_residual
        .max(branch.max_fidelity_deficit)
        .max(branch.max_failure_residual)
        .max(branch.max_probability_sum_residual);
    let mut pass = branch.max_gamma_residual <= tol
        && branch.max_fidelity_deficit <= tol
        && branch.max_failure_residual <= tol
        && branch.max_probability_sum_residual <= 1e-10;
    if let Some(p) = &perturbation {
        worst = worst
            .max(p.max_detection_residual)
            .max(1.0 - p.min_recovery_fidelity);
        pass = pass
            && p.max_detection_residual <= tol
            && p.min_recovery_fidelity >= 1.0 - tol;
    }
    let file = VerifyReportFile {
        pass,
        tolerance: tol,
        worst_residual: worst,
        branch,
        perturbation,
    };
    write_atomic(out, to_json(&file).as_bytes())?;
    if human {
        print!("{}", human_branch_table(&file.branch));
        println!("pass: {} (worst residual {:.3e})", file.pass, file.worst_residual);
    }
    if enforce && !pass {
        return Err(Failure::Verification(format!(
            "contract violation: worst residual {worst:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    Ok(())
}

fn cmd_run(
    job: &JobArgs,
    out: &Path,
    report: &Path,
    perturb: Option<&str>,
    human: bool,
) -> Result<(), Failure> {
    cmd_synth(job, out, None, None, false)?;
    cmd_verify(job, out, report, perturb, human, true)
}
