// SPDX-License-Identifier: Apache-2.0

//! Gate netlists: the gate model, the bit-exact text format, a polarity
//! normalization pass, and dense matrix semantics.
//!
//! Text format, one gate per line, `#` starts a comment:
//!
//! ```text
//! wires <int> probe <int>
//! X <t>
//! CNOT <c> <t>
//! MCU <t> ctrl <w>:<pol>[,<w>:<pol>...] u <re>,<im> <re>,<im> <re>,<im> <re>,<im>
//! ```
//!
//! The `ctrl` clause is omitted for an MCU without controls. Complex fields
//! carry 17 significant digits, row-major u00 u01 u10 u11, so emitted files
//! re-parse to bit-identical gates.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cmatrix::CMatrix;

const SX: [C64; 4] = [
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(0.0, 0.0),
];

/// Elementary netlist gate. Controls carry per-wire required bits; a
/// polarity-0 control stands for the X-conjugated form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X {
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Mcu {
        target: usize,
        controls: Vec<(usize, u8)>,
        u: [C64; 4],
    },
}

impl Gate {
    /// Build the cheapest gate kind realizing a controlled 2x2 payload.
    pub fn canonical(target: usize, controls: Vec<(usize, u8)>, u: [C64; 4]) -> Gate {
        let is_sx = u == SX;
        if is_sx && controls.is_empty() {
            return Gate::X { target };
        }
        if is_sx && controls.len() == 1 && controls[0].1 == 1 {
            return Gate::Cnot {
                control: controls[0].0,
                target,
            };
        }
        Gate::Mcu {
            target,
            controls,
            u,
        }
    }

    pub fn target(&self) -> usize {
        match self {
            Gate::X { target } => *target,
            Gate::Cnot { target, .. } => *target,
            Gate::Mcu { target, .. } => *target,
        }
    }

    pub fn controls(&self) -> Vec<(usize, u8)> {
        match self {
            Gate::X { .. } => vec![],
            Gate::Cnot { control, .. } => vec![(*control, 1)],
            Gate::Mcu { controls, .. } => controls.clone(),
        }
    }

    pub fn payload(&self) -> [C64; 4] {
        match self {
            Gate::X { .. } | Gate::Cnot { .. } => SX,
            Gate::Mcu { u, .. } => *u,
        }
    }

    /// Same gate with extra conditions appended to the control list.
    pub fn conditioned(&self, extra: &[(usize, u8)]) -> Gate {
        if extra.is_empty() {
            return self.clone();
        }
        let mut controls = self.controls();
        controls.extend_from_slice(extra);
        Gate::canonical(self.target(), controls, self.payload())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateNetlist {
    pub wire_count: usize,
    pub probe_wire: usize,
    pub gates: Vec<Gate>,
    /// Content hash of the source plan.
    pub plan_hash: String,
}

impl GateNetlist {
    pub fn validate(&self) -> Result<()> {
        if self.probe_wire >= self.wire_count {
            return Err(Error::InvalidInput(format!(
                "probe wire {} outside {} wires",
                self.probe_wire, self.wire_count
            )));
        }
        for (idx, g) in self.gates.iter().enumerate() {
            if g.target() >= self.wire_count {
                return Err(Error::InvalidInput(format!(
                    "gate {idx} targets wire {} outside {} wires",
                    g.target(),
                    self.wire_count
                )));
            }
            for (w, pol) in g.controls() {
                if w >= self.wire_count || pol > 1 {
                    return Err(Error::InvalidInput(format!(
                        "gate {idx} has invalid control ({w}:{pol})"
                    )));
                }
                if w == g.target() {
                    return Err(Error::InvalidInput(format!(
                        "gate {idx} controls its own target"
                    )));
                }
            }
            let u = g.payload();
            let m = CMatrix::from_rows(vec![vec![u[0], u[1]], vec![u[2], u[3]]])?;
            if m.unitarity_error() > 1e-9 {
                return Err(Error::NotUnitary {
                    residual: m.unitarity_error(),
                });
            }
        }
        Ok(())
    }

    fn fmt_f(v: f64) -> String {
        format!("{v:.16e}")
    }

    fn fmt_c(z: &C64) -> String {
        format!("{},{}", Self::fmt_f(z.re), Self::fmt_f(z.im))
    }

    /// Emit the bit-exact text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("wires {} probe {}\n", self.wire_count, self.probe_wire));
        if !self.plan_hash.is_empty() {
            out.push_str(&format!("# plan {}\n", self.plan_hash));
        }
        out.push_str(
            "# convention: each two-level pair network puts the greater basis index on control value 1\n",
        );
        for g in &self.gates {
            match g {
                Gate::X { target } => out.push_str(&format!("X {target}\n")),
                Gate::Cnot { control, target } => {
                    out.push_str(&format!("CNOT {control} {target}\n"))
                }
                Gate::Mcu {
                    target,
                    controls,
                    u,
                } => {
                    out.push_str(&format!("MCU {target}"));
                    if !controls.is_empty() {
                        let ctrl: Vec<String> =
                            controls.iter().map(|(w, p)| format!("{w}:{p}")).collect();
                        out.push_str(&format!(" ctrl {}", ctrl.join(",")));
                    }
                    out.push_str(" u");
                    for z in u {
                        out.push(' ');
                        out.push_str(&Self::fmt_c(z));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Parse the text form back into a netlist.
    pub fn parse(text: &str) -> Result<GateNetlist> {
        let mut wire_count = None;
        let mut probe_wire = 0usize;
        let mut plan_hash = String::new();
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.trim();
            if content.is_empty() {
                continue;
            }
            if let Some(comment) = content.strip_prefix('#') {
                let c = comment.trim();
                if let Some(hash) = c.strip_prefix("plan ") {
                    plan_hash = hash.trim().to_string();
                }
                continue;
            }
            let mut tok = content.split_whitespace();
            let head = tok.next().unwrap_or_default();
            let perr = |message: &str| Error::NetlistParse {
                line,
                message: message.to_string(),
            };
            match head {
                "wires" => {
                    let w: usize = tok
                        .next()
                        .ok_or_else(|| perr("missing wire count"))?
                        .parse()
                        .map_err(|_| perr("bad wire count"))?;
                    match tok.next() {
                        Some("probe") => {}
                        _ => return Err(perr("expected 'probe'")),
                    }
                    probe_wire = tok
                        .next()
                        .ok_or_else(|| perr("missing probe wire"))?
                        .parse()
                        .map_err(|_| perr("bad probe wire"))?;
                    wire_count = Some(w);
                }
                "X" => {
                    let target: usize = tok
                        .next()
                        .ok_or_else(|| perr("missing target"))?
                        .parse()
                        .map_err(|_| perr("bad target"))?;
                    gates.push(Gate::X { target });
                }
                "CNOT" => {
                    let control: usize = tok
                        .next()
                        .ok_or_else(|| perr("missing control"))?
                        .parse()
                        .map_err(|_| perr("bad control"))?;
                    let target: usize = tok
                        .next()
                        .ok_or_else(|| perr("missing target"))?
                        .parse()
                        .map_err(|_| perr("bad target"))?;
                    gates.push(Gate::Cnot { control, target });
                }
                "MCU" => {
                    let target: usize = tok
                        .next()
                        .ok_or_else(|| perr("missing target"))?
                        .parse()
                        .map_err(|_| perr("bad target"))?;
                    let mut controls = Vec::new();
                    let mut next = tok.next().ok_or_else(|| perr("truncated MCU"))?;
                    if next == "ctrl" {
                        let spec = tok.next().ok_or_else(|| perr("missing control list"))?;
                        for part in spec.split(',') {
                            let (w, p) = part
                                .split_once(':')
                                .ok_or_else(|| perr("control must be wire:polarity"))?;
                            let w: usize = w.parse().map_err(|_| perr("bad control wire"))?;
                            let p: u8 = p.parse().map_err(|_| perr("bad polarity"))?;
                            if p > 1 {
                                return Err(perr("polarity must be 0 or 1"));
                            }
                            controls.push((w, p));
                        }
                        next = tok.next().ok_or_else(|| perr("truncated MCU"))?;
                    }
                    if next != "u" {
                        return Err(perr("expected 'u'"));
                    }
                    let mut u = [C64::new(0.0, 0.0); 4];
                    for entry in u.iter_mut() {
                        let field = tok.next().ok_or_else(|| perr("missing matrix entry"))?;
                        let (re, im) = field
                            .split_once(',')
                            .ok_or_else(|| perr("matrix entry must be re,im"))?;
                        let re: f64 = re.parse().map_err(|_| perr("bad real part"))?;
                        let im: f64 = im.parse().map_err(|_| perr("bad imaginary part"))?;
                        *entry = C64::new(re, im);
                    }
                    if tok.next().is_some() {
                        return Err(perr("trailing tokens"));
                    }
                    gates.push(Gate::Mcu {
                        target,
                        controls,
                        u,
                    });
                }
                _ => return Err(perr("unknown gate kind")),
            }
        }
        let wire_count = wire_count.ok_or(Error::NetlistParse {
            line: 1,
            message: "missing wires header".into(),
        })?;
        let netlist = GateNetlist {
            wire_count,
            probe_wire,
            gates,
            plan_hash,
        };
        netlist.validate()?;
        Ok(netlist)
    }
}

/// Expand polarity-0 controls into literal X conjugation pairs, leaving
/// a netlist whose controls are all polarity 1.
pub fn expand_polarities(netlist: &GateNetlist) -> GateNetlist {
    let mut gates = Vec::new();
    for g in &netlist.gates {
        let zeros: Vec<usize> = g
            .controls()
            .iter()
            .filter(|(_, p)| *p == 0)
            .map(|(w, _)| *w)
            .collect();
        if zeros.is_empty() {
            gates.push(g.clone());
            continue;
        }
        for w in &zeros {
            gates.push(Gate::X { target: *w });
        }
        let controls: Vec<(usize, u8)> = g.controls().iter().map(|(w, _)| (*w, 1)).collect();
        gates.push(Gate::canonical(g.target(), controls, g.payload()));
        for w in zeros.iter().rev() {
            gates.push(Gate::X { target: *w });
        }
    }
    GateNetlist {
        wire_count: netlist.wire_count,
        probe_wire: netlist.probe_wire,
        gates,
        plan_hash: netlist.plan_hash.clone(),
    }
}

/// Precomputed application data for one gate over a fixed wire count.
struct GateKernel {
    tmask: usize,
    ctrl_val: usize,
    free_masks: Vec<usize>,
    u: [C64; 4],
}

impl GateKernel {
    fn new(gate: &Gate, wires: usize) -> GateKernel {
        let tpos = wires - 1 - gate.target();
        let tmask = 1usize << tpos;
        let mut ctrl_mask = 0usize;
        let mut ctrl_val = 0usize;
        for (w, p) in gate.controls() {
            let m = 1usize << (wires - 1 - w);
            ctrl_mask |= m;
            if p == 1 {
                ctrl_val |= m;
            }
        }
        let mut free_masks = Vec::new();
        for b in 0..wires {
            let m = 1usize << b;
            if m != tmask && m & ctrl_mask == 0 {
                free_masks.push(m);
            }
        }
        GateKernel {
            tmask,
            ctrl_val,
            free_masks,
            u: gate.payload(),
        }
    }

    /// Apply to one amplitude column by scattering over the free bits.
    fn apply(&self, amps: &mut [C64]) {
        let f = self.free_masks.len();
        for g in 0..(1usize << f) {
            let mut base = self.ctrl_val;
            let mut bits = g;
            for m in &self.free_masks {
                if bits & 1 == 1 {
                    base |= m;
                }
                bits >>= 1;
            }
            let i0 = base;
            let i1 = base | self.tmask;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = self.u[0] * a0 + self.u[1] * a1;
            amps[i1] = self.u[2] * a0 + self.u[3] * a1;
        }
    }
}

/// Dense matrix of the composed netlist, wire 0 most significant.
///
/// Columns are built independently (safe to parallelize; the result is
/// bitwise deterministic). Bounded to 12 wires.
pub fn netlist_matrix(netlist: &GateNetlist) -> Result<CMatrix> {
    if netlist.wire_count > 12 {
        return Err(Error::Dimension(format!(
            "dense netlist semantics limited to 12 wires, got {}",
            netlist.wire_count
        )));
    }
    netlist.validate()?;
    let w = netlist.wire_count;
    let dim = 1usize << w;
    let kernels: Vec<GateKernel> = netlist.gates.iter().map(|g| GateKernel::new(g, w)).collect();
    use rayon::prelude::*;
    let cols: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|c| {
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            amps[c] = C64::new(1.0, 0.0);
            for k in &kernels {
                k.apply(&mut amps);
            }
            amps
        })
        .collect();
    Ok(CMatrix::from_fn(dim, dim, |r, c| cols[c][r]))
}
