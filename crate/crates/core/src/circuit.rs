//! Combinational circuits: simulation, CNF encoding, miters and mutations.
//!
//! Variables are dense [`VarId`]s assigned in declaration order, so a
//! circuit's variables can be used directly as formula variables.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{CnfFormula, Lit, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("combinational cycle through {0}")]
    Cycle(String),
    #[error("sequential AIGER (latches) is not supported")]
    LatchUnsupported,
    #[error("circuits have different input or output signatures")]
    SignatureMismatch,
    #[error("variable {0} is out of scope")]
    VarScope(VarId),
    #[error("{op} gate {name} takes {want} fanins, got {got}")]
    Arity { name: String, op: GateOp, want: &'static str, got: usize },
    #[error("gate {0} repeats a fanin")]
    DuplicateFanin(String),
    #[error("signal {0} defined twice")]
    Redefined(String),
    #[error("signal {0} used but never defined")]
    Undefined(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Or,
    Not,
    Xor,
    Nand,
    Nor,
    Xnor,
    Buf,
}

impl GateOp {
    pub const ALL: [GateOp; 8] =
        [GateOp::And, GateOp::Or, GateOp::Not, GateOp::Xor, GateOp::Nand, GateOp::Nor, GateOp::Xnor, GateOp::Buf];

    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Not => "NOT",
            GateOp::Xor => "XOR",
            GateOp::Nand => "NAND",
            GateOp::Nor => "NOR",
            GateOp::Xnor => "XNOR",
            GateOp::Buf => "BUF",
        }
    }

    pub fn from_name(s: &str) -> Option<GateOp> {
        GateOp::ALL.into_iter().find(|op| op.name().eq_ignore_ascii_case(s))
    }

    fn arity_ok(self, n: usize) -> Result<(), &'static str> {
        let ok = match self {
            GateOp::Not | GateOp::Buf => n == 1,
            GateOp::Xor | GateOp::Xnor => n == 2,
            _ => n >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(match self {
                GateOp::Not | GateOp::Buf => "1",
                GateOp::Xor | GateOp::Xnor => "2",
                _ => ">= 2",
            })
        }
    }

    /// Bitwise evaluation, one input pattern per bit.
    pub fn eval_words(self, ins: &[u64]) -> u64 {
        match self {
            GateOp::And => ins.iter().fold(!0, |a, &b| a & b),
            GateOp::Or => ins.iter().fold(0, |a, &b| a | b),
            GateOp::Nand => !ins.iter().fold(!0, |a, &b| a & b),
            GateOp::Nor => !ins.iter().fold(0, |a, &b| a | b),
            GateOp::Xor => ins[0] ^ ins[1],
            GateOp::Xnor => !(ins[0] ^ ins[1]),
            GateOp::Not => !ins[0],
            GateOp::Buf => ins[0],
        }
    }

    /// The type substitution used for bug injection.
    pub fn swapped(self) -> GateOp {
        match self {
            GateOp::And => GateOp::Or,
            GateOp::Or => GateOp::And,
            GateOp::Nand => GateOp::Nor,
            GateOp::Nor => GateOp::Nand,
            GateOp::Xor => GateOp::Xnor,
            GateOp::Xnor => GateOp::Xor,
            GateOp::Not => GateOp::Buf,
            GateOp::Buf => GateOp::Not,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub out: VarId,
    pub op: GateOp,
    pub fanins: Vec<VarId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    names: Vec<String>,
    inputs: Vec<VarId>,
    gates: Vec<Gate>,
    outputs: Vec<VarId>,
    /// Topological rank of each variable: inputs 0, gate i at i + 1.
    defined: Vec<Option<usize>>,
}

impl Circuit {
    pub fn new() -> Circuit {
        Circuit { names: Vec::new(), inputs: Vec::new(), gates: Vec::new(), outputs: Vec::new(), defined: Vec::new() }
    }

    pub fn with_inputs<S: AsRef<str>>(names: &[S]) -> Circuit {
        let mut c = Circuit::new();
        for n in names {
            c.add_input(n.as_ref());
        }
        c
    }

    fn fresh(&mut self, name: &str) -> VarId {
        self.names.push(name.to_string());
        self.defined.push(None);
        VarId::from_idx(self.names.len() - 1)
    }

    pub fn add_input(&mut self, name: &str) -> VarId {
        let v = self.fresh(name);
        self.defined[v.idx()] = Some(0);
        self.inputs.push(v);
        v
    }

    /// Appends a gate whose fanins are already defined.
    pub fn add_gate(&mut self, name: &str, op: GateOp, fanins: &[VarId]) -> Result<VarId, CircuitError> {
        for &f in fanins {
            if f.idx() >= self.names.len() || self.defined[f.idx()].is_none() {
                return Err(CircuitError::VarScope(f));
            }
        }
        check_gate(name, op, fanins)?;
        let out = self.fresh(name);
        self.gates.push(Gate { out, op, fanins: fanins.to_vec() });
        self.defined[out.idx()] = Some(self.gates.len());
        Ok(out)
    }

    pub fn add_output(&mut self, v: VarId) -> Result<(), CircuitError> {
        if v.idx() >= self.names.len() {
            return Err(CircuitError::VarScope(v));
        }
        self.outputs.push(v);
        Ok(())
    }

    pub fn num_vars(&self) -> u32 {
        self.names.len() as u32
    }

    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[VarId] {
        &self.outputs
    }

    /// The single output of a property circuit.
    pub fn output(&self) -> VarId {
        self.outputs[0]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.idx()]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId::from_idx)
    }

    /// Topological rank: 0 for inputs, `i + 1` for the output of gate `i`.
    pub fn rank(&self, v: VarId) -> Option<usize> {
        self.defined.get(v.idx()).copied().flatten()
    }

    /// Values of all variables for 64 input patterns at once; `inputs[i]`
    /// holds the patterns of input `i`.
    pub fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        assert_eq!(inputs.len(), self.inputs.len(), "one word per input");
        let mut val = vec![0u64; self.names.len()];
        for (v, &w) in self.inputs.iter().zip(inputs) {
            val[v.idx()] = w;
        }
        let mut buf = Vec::new();
        for g in &self.gates {
            buf.clear();
            buf.extend(g.fanins.iter().map(|f| val[f.idx()]));
            val[g.out.idx()] = g.op.eval_words(&buf);
        }
        val
    }

    /// The unique consistent assignment extending the input values `x`,
    /// indexed by variable.
    pub fn simulate(&self, x: &[bool]) -> Vec<bool> {
        let words: Vec<u64> = x.iter().map(|&b| if b { !0 } else { 0 }).collect();
        self.simulate_words(&words).into_iter().map(|w| w & 1 == 1).collect()
    }

    /// Value of the first output under `x`.
    pub fn eval(&self, x: &[bool]) -> bool {
        self.simulate(x)[self.output().idx()]
    }

    /// Calls `f(block, values, mask)` for every block of 64 input patterns,
    /// pattern `block * 64 + j` sitting at bit `j`. Input 0 is the most
    /// significant bit of the pattern index.
    pub fn for_each_block(&self, mut f: impl FnMut(u64, &[u64], u64)) {
        let n = self.inputs.len();
        assert!(n <= 30, "exhaustive simulation over {n} inputs");
        let total: u64 = 1 << n;
        let blocks = total.div_ceil(64);
        let mut ins = vec![0u64; n];
        for b in 0..blocks {
            for (i, w) in ins.iter_mut().enumerate() {
                let shift = n - 1 - i;
                let mut word = 0u64;
                for j in 0..64u64 {
                    let idx = b * 64 + j;
                    if idx < total && (idx >> shift) & 1 == 1 {
                        word |= 1 << j;
                    }
                }
                *w = word;
            }
            let mask = if total - b * 64 >= 64 { !0 } else { (1u64 << (total - b * 64)) - 1 };
            let vals = self.simulate_words(&ins);
            f(b, &vals, mask);
        }
    }

    /// Number of input patterns on which the first output is 1.
    pub fn count_ones(&self) -> u64 {
        let z = self.output().idx();
        let mut count = 0;
        self.for_each_block(|_, vals, mask| count += (vals[z] & mask).count_ones() as u64);
        count
    }

    /// Fraction of input patterns on which the first output is 1.
    pub fn density(&self) -> f64 {
        self.count_ones() as f64 / (1u64 << self.inputs.len()) as f64
    }

    /// First input pattern (as a bit vector over inputs) on which the first
    /// output is 1.
    pub fn first_one(&self) -> Option<Vec<bool>> {
        let z = self.output().idx();
        let n = self.inputs.len();
        let mut found = None;
        self.for_each_block(|b, vals, mask| {
            if found.is_none() && vals[z] & mask != 0 {
                let idx = b * 64 + (vals[z] & mask).trailing_zeros() as u64;
                found = Some((0..n).map(|i| (idx >> (n - 1 - i)) & 1 == 1).collect());
            }
        });
        found
    }
}

impl Default for Circuit {
    fn default() -> Self {
        Circuit::new()
    }
}

fn check_gate(name: &str, op: GateOp, fanins: &[VarId]) -> Result<(), CircuitError> {
    if let Err(want) = op.arity_ok(fanins.len()) {
        return Err(CircuitError::Arity { name: name.to_string(), op, want, got: fanins.len() });
    }
    let mut sorted = fanins.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != fanins.len() {
        return Err(CircuitError::DuplicateFanin(name.to_string()));
    }
    Ok(())
}

/// CNF encoding of a circuit. Circuit variables are used as formula
/// variables unchanged.
#[derive(Clone, Debug)]
pub struct EncodedCircuit {
    pub formula: CnfFormula,
    pub var_map: Vec<VarId>,
    pub z: VarId,
}

/// Consistency clauses of one gate, in the order used by [`tseitin`].
pub fn gate_clauses(g: &Gate) -> Vec<Vec<Lit>> {
    let y = g.out;
    let a = &g.fanins;
    // OR-like: (a1 ∨ .. ∨ ak ∨ ¬y), (¬ai ∨ y)
    let or_like = |y: Lit| {
        let mut cs = vec![a.iter().map(|v| v.pos()).chain([!y]).collect::<Vec<_>>()];
        cs.extend(a.iter().map(|v| vec![v.neg(), y]));
        cs
    };
    // AND-like: (¬a1 ∨ .. ∨ ¬ak ∨ y), (ai ∨ ¬y)
    let and_like = |y: Lit| {
        let mut cs = vec![a.iter().map(|v| v.neg()).chain([y]).collect::<Vec<_>>()];
        cs.extend(a.iter().map(|v| vec![v.pos(), !y]));
        cs
    };
    let xor_like = |y: Lit| {
        let (p, q) = (a[0], a[1]);
        vec![
            vec![p.neg(), q.neg(), !y],
            vec![p.pos(), q.pos(), !y],
            vec![p.pos(), q.neg(), y],
            vec![p.neg(), q.pos(), y],
        ]
    };
    match g.op {
        GateOp::Or => or_like(y.pos()),
        GateOp::Nor => or_like(y.neg()),
        GateOp::And => and_like(y.pos()),
        GateOp::Nand => and_like(y.neg()),
        GateOp::Xor => xor_like(y.pos()),
        GateOp::Xnor => xor_like(y.neg()),
        GateOp::Not => vec![vec![a[0].pos(), y.pos()], vec![a[0].neg(), y.neg()]],
        GateOp::Buf => vec![vec![a[0].neg(), y.pos()], vec![a[0].pos(), y.neg()]],
    }
}

/// `F_N`: the conjunction of all gate consistency clauses.
pub fn tseitin(c: &Circuit) -> EncodedCircuit {
    let mut f = CnfFormula::new(c.num_vars());
    for g in c.gates() {
        for cl in gate_clauses(g) {
            f.add_clause(cl).expect("gate clauses are never tautologies");
        }
    }
    EncodedCircuit {
        formula: f,
        var_map: (0..c.num_vars() as usize).map(VarId::from_idx).collect(),
        z: *c.outputs().first().unwrap_or(&VarId::new(1)),
    }
}

/// `F_N ∧ z`: unsatisfiable iff the first output is constant 0.
pub fn encode_property(c: &Circuit) -> EncodedCircuit {
    let mut e = tseitin(c);
    e.formula.add_clause(vec![e.z.pos()]).expect("unit clause");
    e
}

/// Copies the gates of `src` into `dst`, with `src`'s inputs bound to
/// `bind`. Returns the map from `src` variables to `dst` variables.
fn embed(dst: &mut Circuit, src: &Circuit, bind: &[VarId], prefix: &str) -> Vec<VarId> {
    let mut map = vec![VarId::new(1); src.num_vars() as usize];
    for (i, &v) in src.inputs().iter().enumerate() {
        map[v.idx()] = bind[i];
    }
    for g in src.gates() {
        let fanins: Vec<VarId> = g.fanins.iter().map(|f| map[f.idx()]).collect();
        let name = format!("{prefix}{}", src.name(g.out));
        map[g.out.idx()] = dst.add_gate(&name, g.op, &fanins).expect("gates of a valid circuit");
    }
    map
}

/// Single-output circuit that is 1 exactly where `a` and `b` disagree on
/// some output.
pub fn mk_miter(a: &Circuit, b: &Circuit) -> Result<Circuit, CircuitError> {
    if a.inputs().len() != b.inputs().len() || a.outputs().len() != b.outputs().len() || a.outputs().is_empty() {
        return Err(CircuitError::SignatureMismatch);
    }
    let names: Vec<&str> = a.inputs().iter().map(|&v| a.name(v)).collect();
    let mut m = Circuit::with_inputs(&names);
    let bind = m.inputs().to_vec();
    // keep gate names unless the two sides clash
    let mut seen: HashSet<&str> = names.iter().copied().collect();
    let gate_names = a.gates().iter().map(|g| a.name(g.out)).chain(b.gates().iter().map(|g| b.name(g.out)));
    let clash = gate_names.chain(["z"]).any(|n| !seen.insert(n));
    let (pa, pb) = if clash { ("a.", "b.") } else { ("", "") };
    let ma = embed(&mut m, a, &bind, pa);
    let mb = embed(&mut m, b, &bind, pb);
    let mut diffs = Vec::new();
    for (k, (&oa, &ob)) in a.outputs().iter().zip(b.outputs()).enumerate() {
        let (xa, xb) = (ma[oa.idx()], mb[ob.idx()]);
        if xa == xb {
            continue;
        }
        let name = if a.outputs().len() == 1 { "z".to_string() } else { format!("d{k}") };
        diffs.push(m.add_gate(&name, GateOp::Xor, &[xa, xb])?);
    }
    let z = match diffs.len() {
        // identical wiring: z = x1 XOR x1 would repeat a fanin
        0 => {
            let x = bind.first().copied().ok_or(CircuitError::SignatureMismatch)?;
            let nx = m.add_gate("nz", GateOp::Not, &[x])?;
            m.add_gate("z", GateOp::And, &[x, nx])?
        }
        1 => diffs[0],
        _ => m.add_gate("z", GateOp::Or, &diffs)?,
    };
    m.add_output(z)?;
    Ok(m)
}

/// `K = AND(a_1, .., a_{n-1}, out(r))` over fresh inputs `a_i`; `n = 1`
/// returns `r` itself.
pub fn mk_corner_cone(r: &Circuit, n: usize) -> Circuit {
    if n <= 1 {
        return r.clone();
    }
    let mut k = r.clone();
    let mut fanins: Vec<VarId> = (1..n).map(|i| k.add_input(&format!("a{i}"))).collect();
    fanins.push(r.output());
    let out = k.add_gate("k", GateOp::And, &fanins).expect("fresh fanins");
    k.outputs = vec![out];
    k
}

/// Circuit that outputs 1 iff `mt` falsifies the clause `c` over its
/// outputs. The input constraints `p` are checked for scope and returned
/// unchanged for conjunction with the encoding.
pub fn mk_property_circuit(mt: &Circuit, c: &[Lit], p: &[Vec<Lit>]) -> Result<(Circuit, Vec<Vec<Lit>>), CircuitError> {
    for l in c {
        if !mt.outputs().contains(&l.var()) {
            return Err(CircuitError::VarScope(l.var()));
        }
    }
    for l in p.iter().flatten() {
        if !mt.inputs().contains(&l.var()) {
            return Err(CircuitError::VarScope(l.var()));
        }
    }
    let mut n = mt.clone();
    // falsifying literal l means: l's variable takes the opposite value
    let mut fanins = Vec::new();
    for (i, l) in c.iter().enumerate() {
        if l.is_positive() {
            fanins.push(n.add_gate(&format!("nc{i}"), GateOp::Not, &[l.var()])?);
        } else {
            fanins.push(l.var());
        }
    }
    fanins.dedup();
    let out = match fanins.len() {
        0 => {
            let x = *n.inputs().first().ok_or(CircuitError::SignatureMismatch)?;
            let nx = n.add_gate("nz", GateOp::Not, &[x])?;
            // empty clause is always falsified
            n.add_gate("z", GateOp::Or, &[x, nx])?
        }
        1 => n.add_gate("z", GateOp::Buf, &fanins)?,
        _ => n.add_gate("z", GateOp::And, &fanins)?,
    };
    n.outputs = vec![out];
    Ok((n, p.to_vec()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MutationKind {
    TypeSwap { from: GateOp, to: GateOp },
    FaninSwap { slot: usize, from: VarId, to: VarId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutation {
    pub circuit: Circuit,
    pub gate: usize,
    pub kind: MutationKind,
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.circuit.gates()[self.gate];
        let name = self.circuit.name(g.out);
        match &self.kind {
            MutationKind::TypeSwap { from, to } => write!(f, "{name}:{from}->{to}"),
            MutationKind::FaninSwap { slot, from, to } => {
                write!(f, "{name}:fanin{slot}:{}->{}", self.circuit.name(*from), self.circuit.name(*to))
            }
        }
    }
}

/// One seeded single-gate mutation. Picks a gate uniformly and, with equal
/// odds, either substitutes its type or rewires one fanin to another signal
/// defined before the gate; when no rewiring target exists it substitutes
/// the type.
pub fn inject_bug(c: &Circuit, seed: u64) -> Mutation {
    assert!(!c.gates().is_empty(), "inject_bug needs a gate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gi = rng.gen_range(0..c.gates().len());
    let g = &c.gates()[gi];
    let mut m = c.clone();
    if rng.gen_bool(0.5) {
        let slot = rng.gen_range(0..g.fanins.len());
        let rank = gi + 1;
        let targets: Vec<VarId> = (0..c.num_vars() as usize)
            .map(VarId::from_idx)
            .filter(|&v| c.rank(v).is_some_and(|r| r < rank) && !g.fanins.contains(&v))
            .collect();
        if let Some(&to) = targets.choose(&mut rng) {
            let from = g.fanins[slot];
            m.gates[gi].fanins[slot] = to;
            return Mutation { circuit: m, gate: gi, kind: MutationKind::FaninSwap { slot, from, to } };
        }
    }
    let to = g.op.swapped();
    m.gates[gi].op = to;
    Mutation { circuit: m, gate: gi, kind: MutationKind::TypeSwap { from: g.op, to } }
}

/// Widest input vector that exhaustive simulation will enumerate.
pub const EXHAUSTIVE_INPUTS: usize = 24;

/// Whether `a` and `b` compute different functions, decided by exhaustive
/// simulation. `None` above [`EXHAUSTIVE_INPUTS`] inputs.
pub fn functionally_differs(a: &Circuit, b: &Circuit) -> Result<Option<bool>, CircuitError> {
    if a.inputs().len() > EXHAUSTIVE_INPUTS {
        return Ok(None);
    }
    let m = mk_miter(a, b)?;
    Ok(Some(m.count_ones() > 0))
}

/// Seeded random circuit with `n_inputs` inputs and `n_gates` gates of
/// fanin 2..=`max_fanin` (1 for NOT/BUF). Fanins are drawn from all
/// earlier signals, preferring the most recent ones, and the last gate is
/// the single output.
pub fn random_circuit(n_inputs: usize, n_gates: usize, max_fanin: usize, seed: u64) -> Circuit {
    assert!(n_inputs >= 2 && n_gates >= 1 && max_fanin >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n_inputs).map(|i| format!("x{i}")).collect();
    let mut c = Circuit::with_inputs(&names);
    let ops = [GateOp::And, GateOp::Or, GateOp::Nand, GateOp::Nor, GateOp::Xor, GateOp::Xnor, GateOp::Not];
    let mut last = VarId::new(1);
    for i in 0..n_gates {
        let op = *ops.choose(&mut rng).expect("nonempty");
        let k = match op {
            GateOp::Not | GateOp::Buf => 1,
            GateOp::Xor | GateOp::Xnor => 2,
            _ => rng.gen_range(2..=max_fanin),
        };
        let pool = c.num_vars() as usize;
        let mut fanins: Vec<VarId> = Vec::with_capacity(k);
        // the newest signal feeds each gate so that the output cone is deep
        if i > 0 {
            fanins.push(last);
        }
        while fanins.len() < k.min(pool) {
            let v = VarId::from_idx(rng.gen_range(0..pool));
            if !fanins.contains(&v) {
                fanins.push(v);
            }
        }
        fanins.shuffle(&mut rng);
        let op = if fanins.len() < k { GateOp::Buf } else { op };
        last = c.add_gate(&format!("g{}", i + 1), op, &fanins[..op_arity(op, fanins.len())]).expect("valid gate");
    }
    c.add_output(last).expect("defined");
    c
}

fn op_arity(op: GateOp, have: usize) -> usize {
    match op {
        GateOp::Not | GateOp::Buf => 1,
        _ => have,
    }
}

/// Native text format.
pub fn write_circuit(c: &Circuit) -> String {
    let mut s = String::from("inputs");
    for &v in c.inputs() {
        s.push(' ');
        s.push_str(c.name(v));
    }
    s.push('\n');
    for g in c.gates() {
        let args: Vec<&str> = g.fanins.iter().map(|&f| c.name(f)).collect();
        s.push_str(&format!("gate {} = {}({})\n", c.name(g.out), g.op, args.join(",")));
    }
    for &o in c.outputs() {
        s.push_str(&format!("output {}\n", c.name(o)));
    }
    s
}

struct RawGate {
    name: String,
    op: GateOp,
    fanins: Vec<String>,
    line: usize,
}

/// Orders raw gates topologically and builds the circuit. Variables are
/// numbered in declaration order: inputs first, then gates as listed.
fn assemble(inputs: Vec<String>, raw: Vec<RawGate>, outputs: Vec<(String, usize)>) -> Result<Circuit, CircuitError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, n) in inputs.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(CircuitError::Redefined(n.clone()));
        }
    }
    for (j, g) in raw.iter().enumerate() {
        if index.insert(g.name.clone(), inputs.len() + j).is_some() {
            return Err(CircuitError::Redefined(g.name.clone()));
        }
    }
    let resolve = |n: &str, line: usize| {
        index.get(n).copied().ok_or_else(|| CircuitError::Parse { line, msg: format!("undefined signal {n}") })
    };
    let mut fanin_idx = Vec::with_capacity(raw.len());
    for g in &raw {
        let f: Vec<usize> = g.fanins.iter().map(|n| resolve(n, g.line)).collect::<Result<_, _>>()?;
        fanin_idx.push(f);
    }
    // iterative DFS; state 0 new, 1 on stack, 2 done
    let ni = inputs.len();
    let mut state = vec![0u8; raw.len()];
    let mut order = Vec::with_capacity(raw.len());
    for root in 0..raw.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (g, ref mut k)) = stack.last_mut() {
            if let Some(&f) = fanin_idx[g].get(*k) {
                *k += 1;
                if f >= ni {
                    let h = f - ni;
                    match state[h] {
                        0 => {
                            state[h] = 1;
                            stack.push((h, 0));
                        }
                        1 => return Err(CircuitError::Cycle(raw[h].name.clone())),
                        _ => {}
                    }
                }
            } else {
                state[g] = 2;
                order.push(g);
                stack.pop();
            }
        }
    }
    let mut c = Circuit::new();
    for n in &inputs {
        c.add_input(n);
    }
    for g in &raw {
        c.fresh(&g.name);
    }
    for &j in &order {
        let g = &raw[j];
        let fanins: Vec<VarId> = fanin_idx[j].iter().map(|&i| VarId::from_idx(i)).collect();
        check_gate(&g.name, g.op, &fanins)?;
        let out = VarId::from_idx(ni + j);
        c.gates.push(Gate { out, op: g.op, fanins });
        c.defined[out.idx()] = Some(c.gates.len());
    }
    for (o, line) in outputs {
        let v = resolve(&o, line)?;
        c.outputs.push(VarId::from_idx(v));
    }
    Ok(c)
}

/// Parses the native format: `inputs a b ..`, `gate y = OP(a,b,..)`,
/// `output y`, `#` comments.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut inputs = Vec::new();
    let mut raw = Vec::new();
    let mut outputs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| CircuitError::Parse { line: ln, msg: msg.to_string() };
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match kw {
            "inputs" => inputs.extend(rest.split_whitespace().map(str::to_string)),
            "output" | "outputs" => outputs.extend(rest.split_whitespace().map(|s| (s.to_string(), ln))),
            "gate" => {
                let (name, def) = rest.split_once('=').ok_or_else(|| err("expected `gate y = OP(..)`"))?;
                let (op, args) = def.trim().split_once('(').ok_or_else(|| err("expected `(`"))?;
                let args = args.trim_end().strip_suffix(')').ok_or_else(|| err("expected `)`"))?;
                let op =
                    GateOp::from_name(op.trim()).ok_or_else(|| err(&format!("unknown gate type {}", op.trim())))?;
                let fanins: Vec<String> =
                    args.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect();
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(err("bad gate name"));
                }
                raw.push(RawGate { name: name.to_string(), op, fanins, line: ln });
            }
            _ => return Err(err(&format!("unknown keyword {kw}"))),
        }
    }
    assemble(inputs, raw, outputs)
}

/// Imports combinational ASCII AIGER. Inverted edges become NOT gates and
/// constant edges are built from the first input.
pub fn parse_aag(text: &str) -> Result<Circuit, CircuitError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or(CircuitError::Parse { line: 1, msg: "empty file".into() })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let perr = |line: usize, msg: &str| CircuitError::Parse { line, msg: msg.to_string() };
    if h.len() < 6 || h[0] != "aag" {
        return Err(perr(1, "expected `aag M I L O A`"));
    }
    let num = |s: &str, line: usize| s.parse::<usize>().map_err(|_| perr(line, &format!("bad number {s}")));
    let (_m, ni, nl, no, na) = (num(h[1], 1)?, num(h[2], 1)?, num(h[3], 1)?, num(h[4], 1)?, num(h[5], 1)?);
    if nl != 0 {
        return Err(CircuitError::LatchUnsupported);
    }
    let mut next = |what: &str| lines.next().ok_or_else(|| perr(0, &format!("missing {what} line")));
    let mut in_lits = Vec::new();
    for _ in 0..ni {
        let (ln, l) = next("input")?;
        in_lits.push((num(l, ln)?, ln));
    }
    let mut out_lits = Vec::new();
    for _ in 0..no {
        let (ln, l) = next("output")?;
        out_lits.push((num(l, ln)?, ln));
    }
    let mut ands = Vec::new();
    for _ in 0..na {
        let (ln, l) = next("and")?;
        let p: Vec<&str> = l.split_whitespace().collect();
        if p.len() != 3 {
            return Err(perr(ln, "expected `lhs rhs0 rhs1`"));
        }
        ands.push(([num(p[0], ln)?, num(p[1], ln)?, num(p[2], ln)?], ln));
    }
    let mut symbols: HashMap<usize, String> = HashMap::new();
    let mut out_names: HashMap<usize, String> = HashMap::new();
    for (_, l) in lines {
        if l == "c" {
            break;
        }
        if let Some((tag, name)) = l.split_once(' ') {
            if let Some(i) = tag.strip_prefix('i').and_then(|s| s.parse::<usize>().ok()) {
                symbols.insert(i, name.to_string());
            } else if let Some(i) = tag.strip_prefix('o').and_then(|s| s.parse::<usize>().ok()) {
                out_names.insert(i, name.to_string());
            }
        }
    }

    let sig = |v: usize| format!("n{v}");
    let mut inputs = Vec::new();
    let mut var_name: HashMap<usize, String> = HashMap::new();
    for (k, &(lit, ln)) in in_lits.iter().enumerate() {
        if lit < 2 || lit % 2 == 1 {
            return Err(perr(ln, "input literal must be positive and even"));
        }
        let name = symbols.get(&k).cloned().unwrap_or_else(|| format!("i{k}"));
        var_name.insert(lit / 2, name.clone());
        inputs.push(name);
    }
    for &([lhs, _, _], ln) in &ands {
        if lhs < 2 || lhs % 2 == 1 {
            return Err(perr(ln, "and lhs must be positive and even"));
        }
        var_name.insert(lhs / 2, sig(lhs / 2));
    }
    let mut raw: Vec<RawGate> = Vec::new();
    let mut extra: HashMap<usize, String> = HashMap::new();
    let first_input = inputs.first().cloned();
    // name of a signal carrying literal `lit`, creating NOT/constant gates
    let mut signal = |lit: usize, ln: usize, raw: &mut Vec<RawGate>| -> Result<String, CircuitError> {
        if let Some(n) = extra.get(&lit) {
            return Ok(n.clone());
        }
        let name = if lit < 2 {
            let x = first_input.clone().ok_or_else(|| perr(ln, "constant needs at least one input"))?;
            raw.push(RawGate { name: "not_const".into(), op: GateOp::Not, fanins: vec![x.clone()], line: ln });
            let (n, op) = if lit == 0 { ("const0", GateOp::And) } else { ("const1", GateOp::Or) };
            raw.push(RawGate { name: n.into(), op, fanins: vec![x, "not_const".into()], line: ln });
            extra.insert(1 - lit, if lit == 0 { "const1".into() } else { "const0".into() });
            n.to_string()
        } else {
            let base =
                var_name.get(&(lit / 2)).cloned().ok_or_else(|| perr(ln, &format!("undefined literal {lit}")))?;
            if lit.is_multiple_of(2) {
                return Ok(base);
            }
            let n = format!("{base}_n");
            raw.push(RawGate { name: n.clone(), op: GateOp::Not, fanins: vec![base], line: ln });
            n
        };
        extra.insert(lit, name.clone());
        Ok(name)
    };
    for &([lhs, r0, r1], ln) in &ands {
        let a = signal(r0, ln, &mut raw)?;
        let b = signal(r1, ln, &mut raw)?;
        let (op, fanins) = if a == b { (GateOp::Buf, vec![a]) } else { (GateOp::And, vec![a, b]) };
        raw.push(RawGate { name: sig(lhs / 2), op, fanins, line: ln });
    }
    let mut outputs = Vec::new();
    for (k, &(lit, ln)) in out_lits.iter().enumerate() {
        let s = signal(lit, ln, &mut raw)?;
        let s = match out_names.get(&k) {
            Some(name) if !var_name.values().any(|v| v == name) => {
                raw.push(RawGate { name: name.clone(), op: GateOp::Buf, fanins: vec![s], line: ln });
                name.clone()
            }
            _ => s,
        };
        outputs.push((s, ln));
    }
    assemble(inputs, raw, outputs)
}

/// The running example: a miter of `(x1 ∨ x2) ∧ x3` against
/// `(x1 ∧ x3) ∨ (x2 ∧ x3)`, variables x1 x2 x3 y1..y5 z.
pub fn example_circuit() -> Circuit {
    parse_circuit(EXAMPLE_CIRCUIT).expect("valid")
}

pub const EXAMPLE_CIRCUIT: &str = "\
inputs x1 x2 x3
gate y1 = OR(x1,x2)
gate y2 = AND(y1,x3)
gate y3 = AND(x1,x3)
gate y4 = AND(x2,x3)
gate y5 = OR(y3,y4)
gate z = XOR(y2,y5)
output z
";
