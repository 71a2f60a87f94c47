//! AND-Inverter Graphs.
//!
//! Node ids follow the AIGER variable convention: id 0 is constant false,
//! ids `1..=n_inputs` are primary inputs and AND node `k` (0-based) has id
//! `n_inputs + 1 + k`. A well-formed graph only references smaller ids from
//! each AND node, so the node list is already a topological order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::truthtable::{TruthTable, TruthTableError};

pub type NodeId = u32;

/// Id of the constant-false node.
pub const CONST_NODE: NodeId = 0;

#[derive(Debug, Error)]
pub enum AigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cycle through node {0}")]
    Cycle(NodeId),
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("input assignment has {got} values, graph has {expected} inputs")]
    AssignmentWidth { expected: usize, got: usize },
    #[error(transparent)]
    TruthTable(#[from] TruthTableError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, message: impl Into<String>) -> AigError {
    AigError::Parse {
        line,
        message: message.into(),
    }
}

/// A possibly complemented reference to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signal {
    pub node: NodeId,
    pub inverted: bool,
}

impl Signal {
    pub fn new(node: NodeId, inverted: bool) -> Self {
        Signal { node, inverted }
    }

    pub fn from_literal(lit: u32) -> Self {
        Signal {
            node: lit >> 1,
            inverted: lit & 1 == 1,
        }
    }

    pub fn literal(self) -> u32 {
        (self.node << 1) | self.inverted as u32
    }

    pub fn is_const(self) -> bool {
        self.node == CONST_NODE
    }
}

impl std::ops::Not for Signal {
    type Output = Signal;
    fn not(self) -> Signal {
        Signal {
            node: self.node,
            inverted: !self.inverted,
        }
    }
}

/// A two-input AND gate. Fanins are kept ordered by node id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AndNode {
    pub fanin0: Signal,
    pub fanin1: Signal,
}

impl AndNode {
    pub fn new(a: Signal, b: Signal) -> Self {
        if (b.node, b.inverted) < (a.node, a.inverted) {
            AndNode { fanin0: b, fanin1: a }
        } else {
            AndNode { fanin0: a, fanin1: b }
        }
    }

    pub fn fanins(&self) -> [Signal; 2] {
        [self.fanin0, self.fanin1]
    }
}

/// Invariant violations reported by [`Aig::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An AND node references an id that is not smaller than its own.
    ForwardReference {
        node: NodeId,
        fanin: NodeId,
    },
    /// An AND node references an id outside the graph.
    DanglingFanin {
        node: NodeId,
        fanin: NodeId,
    },
    /// An AND node takes a constant fanin.
    ConstantFanin {
        node: NodeId,
    },
    /// Fanins are not ordered by id.
    UnorderedFanins {
        node: NodeId,
    },
    /// An output references an id outside the graph.
    DanglingOutput {
        output: usize,
        driver: NodeId,
    },
    NoOutput,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForwardReference { node, fanin } => {
                write!(f, "node {node}: forward reference to fanin {fanin}")
            }
            Violation::DanglingFanin { node, fanin } => {
                write!(f, "node {node}: dangling fanin {fanin}")
            }
            Violation::ConstantFanin { node } => write!(f, "node {node}: constant fanin"),
            Violation::UnorderedFanins { node } => {
                write!(f, "node {node}: fanins not ordered by id")
            }
            Violation::DanglingOutput { output, driver } => {
                write!(f, "output {output}: dangling driver {driver}")
            }
            Violation::NoOutput => f.write_str("graph has no output"),
        }
    }
}

/// An AND-Inverter Graph with one or more outputs.
///
/// Most of the crate works with single-output graphs; hosts read from
/// multi-output benchmark files keep every output so each can serve as a
/// cut root, and [`Aig::output`] refers to the first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aig {
    n_inputs: usize,
    nodes: Vec<AndNode>,
    outputs: Vec<Signal>,
}

impl Aig {
    /// Checked constructor for a single-output graph.
    pub fn new(n_inputs: usize, nodes: Vec<AndNode>, output: Signal) -> Result<Self, AigError> {
        let g = Self::from_parts(n_inputs, nodes, vec![output]);
        let violations = g.validate();
        if let Some(v) = violations.first() {
            return Err(AigError::Invalid(v.to_string()));
        }
        Ok(g)
    }

    /// Unchecked constructor; use [`Aig::validate`] or
    /// [`Aig::relabel_topological`] before relying on the invariants.
    pub fn from_parts(n_inputs: usize, nodes: Vec<AndNode>, outputs: Vec<Signal>) -> Self {
        Aig {
            n_inputs,
            nodes,
            outputs,
        }
    }

    /// A graph with no AND nodes whose output is `signal`, which must be an
    /// input or the constant.
    pub fn trivial(n_inputs: usize, signal: Signal) -> Self {
        Aig {
            n_inputs,
            nodes: Vec::new(),
            outputs: vec![signal],
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn nodes(&self) -> &[AndNode] {
        &self.nodes
    }

    pub fn and_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of inputs plus AND nodes (the largest valid id).
    pub fn max_id(&self) -> NodeId {
        (self.n_inputs + self.nodes.len()) as NodeId
    }

    pub fn outputs(&self) -> &[Signal] {
        &self.outputs
    }

    pub fn output(&self) -> Signal {
        self.outputs[0]
    }

    pub fn is_input(&self, id: NodeId) -> bool {
        id >= 1 && (id as usize) <= self.n_inputs
    }

    pub fn is_and(&self, id: NodeId) -> bool {
        id as usize > self.n_inputs && id <= self.max_id()
    }

    /// The AND node with the given id.
    pub fn and_node(&self, id: NodeId) -> Option<&AndNode> {
        if self.is_and(id) {
            self.nodes.get(id as usize - self.n_inputs - 1)
        } else {
            None
        }
    }

    /// Ids of all AND nodes in id order.
    pub fn and_ids(&self) -> impl Iterator<Item = NodeId> {
        let first = self.n_inputs as NodeId + 1;
        first..=self.max_id()
    }

    /// Copy of this graph keeping only output `index`.
    pub fn with_single_output(&self, index: usize) -> Self {
        Aig {
            n_inputs: self.n_inputs,
            nodes: self.nodes.clone(),
            outputs: vec![self.outputs[index]],
        }
    }

    /// Random graph with `n_ands` AND nodes. Each node reads two distinct
    /// earlier non-constant nodes with random polarities; the output is the
    /// last node. Panics when `n_inputs < 2`.
    pub fn random<R: Rng + ?Sized>(n_inputs: usize, n_ands: usize, rng: &mut R) -> Aig {
        assert!(n_inputs >= 2, "random AIGs need at least two inputs");
        let mut nodes = Vec::with_capacity(n_ands);
        for k in 0..n_ands {
            let avail = (n_inputs + k) as NodeId;
            let a = rng.random_range(1..=avail);
            let mut b = rng.random_range(1..avail);
            if b >= a {
                b += 1;
            }
            nodes.push(AndNode::new(Signal::new(a, rng.random()), Signal::new(b, rng.random())));
        }
        let out = Signal::new((n_inputs + n_ands) as NodeId, rng.random());
        Aig::from_parts(n_inputs, nodes, vec![out])
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let max = self.max_id();
        for (k, node) in self.nodes.iter().enumerate() {
            let id = (self.n_inputs + 1 + k) as NodeId;
            for s in node.fanins() {
                if s.node > max {
                    out.push(Violation::DanglingFanin {
                        node: id,
                        fanin: s.node,
                    });
                } else if s.node >= id {
                    out.push(Violation::ForwardReference {
                        node: id,
                        fanin: s.node,
                    });
                } else if s.is_const() {
                    out.push(Violation::ConstantFanin { node: id });
                }
            }
            if (node.fanin0.node, node.fanin0.inverted) > (node.fanin1.node, node.fanin1.inverted) {
                out.push(Violation::UnorderedFanins { node: id });
            }
        }
        if self.outputs.is_empty() {
            out.push(Violation::NoOutput);
        }
        for (i, o) in self.outputs.iter().enumerate() {
            if o.node > max {
                out.push(Violation::DanglingOutput {
                    output: i,
                    driver: o.node,
                });
            }
        }
        out
    }

    /// Simulates one input assignment, returning the value of every id
    /// (index 0 is the constant).
    pub fn simulate(&self, assignment: &[bool]) -> Result<Vec<bool>, AigError> {
        if assignment.len() != self.n_inputs {
            return Err(AigError::AssignmentWidth {
                expected: self.n_inputs,
                got: assignment.len(),
            });
        }
        let mut values = Vec::with_capacity(self.max_id() as usize + 1);
        values.push(false);
        values.extend_from_slice(assignment);
        for node in &self.nodes {
            let v = node.fanins().iter().all(|s| values[s.node as usize] ^ s.inverted);
            values.push(v);
        }
        Ok(values)
    }

    /// Value of the first output under `assignment`.
    pub fn eval(&self, assignment: &[bool]) -> Result<bool, AigError> {
        let values = self.simulate(assignment)?;
        let o = self.output();
        Ok(values[o.node as usize] ^ o.inverted)
    }

    /// Truth table of every input and AND node, in id order.
    pub fn node_tables(&self) -> Result<Vec<TruthTable>, AigError> {
        if let Some(v) = self.validate().into_iter().next() {
            return Err(AigError::Invalid(v.to_string()));
        }
        let n = self.n_inputs;
        let mut tables = Vec::with_capacity(self.max_id() as usize);
        for i in 1..=n {
            tables.push(TruthTable::input(i, n)?);
        }
        for node in &self.nodes {
            let (a, b) = (node.fanin0, node.fanin1);
            let ty = crate::truthtable::ConnectionType::from_polarity(a.inverted, b.inverted);
            let t = tables[a.node as usize - 1].and(&tables[b.node as usize - 1], ty)?;
            tables.push(t);
        }
        Ok(tables)
    }

    /// Truth table of `signal` given the output of [`Aig::node_tables`].
    pub fn signal_table(&self, tables: &[TruthTable], signal: Signal) -> Result<TruthTable, AigError> {
        let t = if signal.is_const() {
            TruthTable::zero(self.n_inputs)?
        } else {
            tables[signal.node as usize - 1].clone()
        };
        Ok(if signal.inverted { t.not() } else { t })
    }

    /// Truth table of the first output.
    pub fn output_table(&self) -> Result<TruthTable, AigError> {
        let tables = self.node_tables()?;
        self.signal_table(&tables, self.output())
    }

    /// Kahn ordering of all input and AND ids; among ready nodes the
    /// smallest id is emitted first. Works on graphs whose AND ids are not
    /// topologically numbered.
    pub fn topo_order(&self) -> Result<Vec<NodeId>, AigError> {
        let max = self.max_id() as usize;
        let mut indegree = vec![0usize; max + 1];
        let mut fanouts: Vec<Vec<NodeId>> = vec![Vec::new(); max + 1];
        for id in self.and_ids() {
            let node = &self.nodes[id as usize - self.n_inputs - 1];
            let mut seen = None;
            for s in node.fanins() {
                if s.node as usize > max {
                    return Err(AigError::Invalid(format!("node {id}: dangling fanin {}", s.node)));
                }
                if s.is_const() || seen == Some(s.node) {
                    continue;
                }
                seen = Some(s.node);
                indegree[id as usize] += 1;
                fanouts[s.node as usize].push(id);
            }
        }
        let mut ready: BTreeSet<NodeId> = (1..=max as NodeId).filter(|&id| indegree[id as usize] == 0).collect();
        let mut order = Vec::with_capacity(max);
        while let Some(id) = ready.pop_first() {
            order.push(id);
            for &f in &fanouts[id as usize] {
                indegree[f as usize] -= 1;
                if indegree[f as usize] == 0 {
                    ready.insert(f);
                }
            }
        }
        if order.len() != max {
            let stuck = (1..=max as NodeId).find(|&id| indegree[id as usize] > 0).unwrap_or(0);
            return Err(AigError::Cycle(stuck));
        }
        Ok(order)
    }

    /// Renumbers AND nodes along [`Aig::topo_order`], folds constant fanins
    /// and normalizes fanin order. The result satisfies every invariant.
    pub fn relabel_topological(&self) -> Result<Aig, AigError> {
        let order = self.topo_order()?;
        let max = self.max_id() as usize;
        let mut map: Vec<Signal> = vec![Signal::new(CONST_NODE, false); max + 1];
        for (i, m) in map.iter_mut().enumerate().take(self.n_inputs + 1).skip(1) {
            *m = Signal::new(i as NodeId, false);
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for id in order {
            if !self.is_and(id) {
                continue;
            }
            let node = &self.nodes[id as usize - self.n_inputs - 1];
            let resolve = |s: Signal| {
                let m = map[s.node as usize];
                Signal::new(m.node, m.inverted ^ s.inverted)
            };
            let (a, b) = (resolve(node.fanin0), resolve(node.fanin1));
            map[id as usize] = match (a.is_const(), b.is_const()) {
                (true, _) if !a.inverted => a,
                (_, true) if !b.inverted => b,
                (true, _) => b,
                (_, true) => a,
                _ => {
                    nodes.push(AndNode::new(a, b));
                    Signal::new((self.n_inputs + nodes.len()) as NodeId, false)
                }
            };
        }
        let outputs = self
            .outputs
            .iter()
            .map(|o| {
                if o.node as usize > max {
                    return Err(AigError::Invalid(format!("dangling output driver {}", o.node)));
                }
                let m = map[o.node as usize];
                Ok(Signal::new(m.node, m.inverted ^ o.inverted))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if outputs.iter().all(|o| o.is_const()) {
            nodes.clear();
        }
        Ok(Aig {
            n_inputs: self.n_inputs,
            nodes,
            outputs,
        })
    }

    /// Canonical ASCII AIGER text for the first output.
    pub fn to_aag(&self) -> String {
        let mut s = String::new();
        let m = self.max_id();
        let _ = writeln!(s, "aag {} {} 0 1 {}", m, self.n_inputs, self.nodes.len());
        for i in 1..=self.n_inputs {
            let _ = writeln!(s, "{}", 2 * i);
        }
        let _ = writeln!(s, "{}", self.output().literal());
        for (k, node) in self.nodes.iter().enumerate() {
            let lhs = 2 * (self.n_inputs + 1 + k);
            let _ = writeln!(s, "{} {} {}", lhs, node.fanin0.literal(), node.fanin1.literal());
        }
        s
    }

    /// Parses ASCII AIGER. Multi-output files keep every output; latches are
    /// rejected. Gates may appear in any order and are renumbered
    /// topologically.
    pub fn from_aag(text: &str) -> Result<Aig, AigError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let h = parse_header(header, "aag", hline)?;
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| parse_err(hline, format!("unexpected end of file reading {what}")))
        };

        let mut defs: HashMap<u32, NodeId> = HashMap::new();
        let mut input_vars = Vec::with_capacity(h.inputs);
        for k in 0..h.inputs {
            let (ln, l) = next("inputs")?;
            let lit = parse_lits(l, 1, ln)?[0];
            if lit & 1 == 1 || lit == 0 {
                return Err(parse_err(ln, format!("input literal {lit} must be even and nonzero")));
            }
            check_var(lit, h.max_var, ln)?;
            if defs.insert(lit >> 1, (k + 1) as NodeId).is_some() {
                return Err(parse_err(ln, format!("variable {} defined twice", lit >> 1)));
            }
            input_vars.push(lit >> 1);
        }
        let mut output_lits = Vec::with_capacity(h.outputs);
        for _ in 0..h.outputs {
            let (ln, l) = next("outputs")?;
            let lit = parse_lits(l, 1, ln)?[0];
            check_var(lit, h.max_var, ln)?;
            output_lits.push((ln, lit));
        }
        let mut gates = Vec::with_capacity(h.ands);
        for k in 0..h.ands {
            let (ln, l) = next("and gates")?;
            let lits = parse_lits(l, 3, ln)?;
            for &lit in &lits {
                check_var(lit, h.max_var, ln)?;
            }
            if lits[0] & 1 == 1 || lits[0] == 0 {
                return Err(parse_err(
                    ln,
                    format!("gate literal {} must be even and nonzero", lits[0]),
                ));
            }
            let id = (h.inputs + 1 + k) as NodeId;
            if defs.insert(lits[0] >> 1, id).is_some() {
                return Err(parse_err(ln, format!("variable {} defined twice", lits[0] >> 1)));
            }
            gates.push((ln, lits[1], lits[2]));
        }
        build_from_literals(h.inputs, &defs, &gates, &output_lits)
    }

    /// Parses binary AIGER (`aig` header).
    pub fn from_binary_aiger(bytes: &[u8]) -> Result<Aig, AigError> {
        let mut pos = 0usize;
        let mut line_no = 0usize;
        let mut read_line = |pos: &mut usize| -> Result<(usize, String), AigError> {
            line_no += 1;
            let start = *pos;
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            if *pos >= bytes.len() {
                return Err(parse_err(line_no, "unexpected end of file"));
            }
            let s = String::from_utf8_lossy(&bytes[start..*pos]).trim().to_string();
            *pos += 1;
            Ok((line_no, s))
        };
        let (hline, header) = read_line(&mut pos)?;
        let h = parse_header(&header, "aig", hline)?;
        if h.max_var != h.inputs + h.ands {
            return Err(parse_err(hline, "binary AIGER requires M = I + L + A"));
        }
        let mut defs: HashMap<u32, NodeId> = HashMap::new();
        for k in 0..h.inputs {
            defs.insert((k + 1) as u32, (k + 1) as NodeId);
        }
        let mut output_lits = Vec::with_capacity(h.outputs);
        for _ in 0..h.outputs {
            let (ln, l) = read_line(&mut pos)?;
            let lit = parse_lits(&l, 1, ln)?[0];
            check_var(lit, h.max_var, ln)?;
            output_lits.push((ln, lit));
        }
        let mut gates = Vec::with_capacity(h.ands);
        let decode = |pos: &mut usize| -> Result<u32, AigError> {
            let mut x: u64 = 0;
            let mut shift = 0;
            loop {
                let b = *bytes
                    .get(*pos)
                    .ok_or_else(|| parse_err(hline, "truncated gate section"))?;
                *pos += 1;
                x |= ((b & 0x7f) as u64) << shift;
                if b & 0x80 == 0 {
                    break;
                }
                shift += 7;
                if shift > 35 {
                    return Err(parse_err(hline, "varint overflow"));
                }
            }
            u32::try_from(x).map_err(|_| parse_err(hline, "varint overflow"))
        };
        for k in 0..h.ands {
            let var = (h.inputs + 1 + k) as u32;
            let lhs = 2 * var;
            let d0 = decode(&mut pos)?;
            let d1 = decode(&mut pos)?;
            let rhs0 = lhs
                .checked_sub(d0)
                .ok_or_else(|| parse_err(hline, format!("gate {var}: bad delta")))?;
            let rhs1 = rhs0
                .checked_sub(d1)
                .ok_or_else(|| parse_err(hline, format!("gate {var}: bad delta")))?;
            defs.insert(var, var as NodeId);
            gates.push((hline, rhs0, rhs1));
        }
        build_from_literals(h.inputs, &defs, &gates, &output_lits)
    }

    /// Reads an ASCII or binary AIGER file, chosen by its header.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Aig, AigError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| AigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if bytes.starts_with(b"aag") {
            let text = String::from_utf8(bytes).map_err(|_| parse_err(1, "file is not UTF-8"))?;
            Self::from_aag(&text)
        } else if bytes.starts_with(b"aig") {
            Self::from_binary_aiger(&bytes)
        } else {
            Err(parse_err(1, "missing aag/aig header"))
        }
    }
}

struct Header {
    max_var: usize,
    inputs: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str, magic: &str, ln: usize) -> Result<Header, AigError> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(parse_err(ln, format!("expected '{magic}' header")));
    }
    let nums = parts
        .map(|p| p.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_err(ln, format!("malformed header: {e}")))?;
    if nums.len() < 5 {
        return Err(parse_err(ln, "header needs M I L O A"));
    }
    if nums[2] != 0 {
        return Err(parse_err(
            ln,
            format!("{} latches; only combinational graphs are supported", nums[2]),
        ));
    }
    if nums.len() > 5 && nums[5..].iter().any(|&x| x != 0) {
        return Err(parse_err(
            ln,
            "bad/constraint/justice/fairness sections are not supported",
        ));
    }
    if nums[1] + nums[4] > nums[0] {
        return Err(parse_err(ln, "header has M < I + L + A"));
    }
    Ok(Header {
        max_var: nums[0],
        inputs: nums[1],
        outputs: nums[3],
        ands: nums[4],
    })
}

fn parse_lits(line: &str, count: usize, ln: usize) -> Result<Vec<u32>, AigError> {
    let lits = line
        .split_whitespace()
        .map(|p| p.parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_err(ln, format!("bad literal: {e}")))?;
    if lits.len() != count {
        return Err(parse_err(
            ln,
            format!("expected {count} literal(s), got {}", lits.len()),
        ));
    }
    Ok(lits)
}

fn check_var(lit: u32, max_var: usize, ln: usize) -> Result<(), AigError> {
    if (lit >> 1) as usize > max_var {
        return Err(parse_err(
            ln,
            format!("literal {lit} exceeds maximum variable {max_var}"),
        ));
    }
    Ok(())
}

fn build_from_literals(
    n_inputs: usize,
    defs: &HashMap<u32, NodeId>,
    gates: &[(usize, u32, u32)],
    outputs: &[(usize, u32)],
) -> Result<Aig, AigError> {
    let resolve = |lit: u32, ln: usize| -> Result<Signal, AigError> {
        let var = lit >> 1;
        if var == 0 {
            return Ok(Signal::from_literal(lit));
        }
        let id = defs
            .get(&var)
            .ok_or_else(|| parse_err(ln, format!("dangling literal {lit}")))?;
        Ok(Signal::new(*id, lit & 1 == 1))
    };
    let mut nodes = Vec::with_capacity(gates.len());
    for &(ln, a, b) in gates {
        nodes.push(AndNode::new(resolve(a, ln)?, resolve(b, ln)?));
    }
    let outs = outputs
        .iter()
        .map(|&(ln, lit)| resolve(lit, ln))
        .collect::<Result<Vec<_>, _>>()?;
    if outs.is_empty() {
        return Err(parse_err(1, "file declares no outputs"));
    }
    Aig::from_parts(n_inputs, nodes, outs).relabel_topological()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn s(node: NodeId, inverted: bool) -> Signal {
        Signal::new(node, inverted)
    }

    /// `O = !(!(I1 & I2) & I3)`.
    pub(crate) fn fig1() -> Aig {
        Aig::new(
            3,
            vec![
                AndNode::new(s(1, false), s(2, false)),
                AndNode::new(s(4, true), s(3, false)),
            ],
            s(5, true),
        )
        .unwrap()
    }

    /// Four-input example: 5 = I1 & !I2, 6 = 5 & I3, 7 = !I3 & I4,
    /// 8 = 6 & !7, O = !8.
    pub(crate) fn fig3() -> Aig {
        Aig::new(
            4,
            vec![
                AndNode::new(s(1, false), s(2, true)),
                AndNode::new(s(5, false), s(3, false)),
                AndNode::new(s(3, true), s(4, false)),
                AndNode::new(s(6, false), s(7, true)),
            ],
            s(8, true),
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = fig1();
        assert!(g.eval(&[true, true, false]).unwrap());
        assert!(!g.eval(&[false, false, true]).unwrap());
        let buf = Aig::trivial(1, s(1, true));
        assert!(!buf.eval(&[true]).unwrap());
        assert!(g.eval(&[true]).is_err());
    }

    #[test]
    fn node_tables_examples() {
        let g = fig1();
        let hex: Vec<_> = g.node_tables().unwrap().iter().map(|t| t.to_hex()).collect();
        assert_eq!(hex, ["AA", "CC", "F0", "88", "70"]);
        assert_eq!(g.output_table().unwrap().to_hex(), "8F");

        let empty = Aig::trivial(2, s(1, false));
        let hex: Vec<_> = empty.node_tables().unwrap().iter().map(|t| t.to_hex()).collect();
        assert_eq!(hex, ["A", "C"]);

        let and = Aig::new(2, vec![AndNode::new(s(1, false), s(2, false))], s(3, false)).unwrap();
        assert_eq!(and.node_tables().unwrap().last().unwrap().to_hex(), "8");
    }

    #[test]
    fn topo_order_examples() {
        assert_eq!(fig3().topo_order().unwrap(), vec![1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(fig1().topo_order().unwrap(), vec![1, 2, 3, 4, 5]);

        // Ids 4..6 stored out of order: 4 = 5 & 6, 5 = 6 & I3, 6 = I1 & I2.
        let scrambled = Aig::from_parts(
            3,
            vec![
                AndNode::new(s(5, false), s(6, true)),
                AndNode::new(s(6, false), s(3, false)),
                AndNode::new(s(1, false), s(2, false)),
            ],
            vec![s(4, false)],
        );
        // Kahn by hand: inputs 1,2,3 ready; then 6; then 5; then 4.
        assert_eq!(scrambled.topo_order().unwrap(), vec![1, 2, 3, 6, 5, 4]);
        let fixed = scrambled.relabel_topological().unwrap();
        assert!(fixed.validate().is_empty());
        assert_eq!(
            fixed.nodes(),
            &[
                AndNode::new(s(1, false), s(2, false)),
                AndNode::new(s(3, false), s(4, false)),
                AndNode::new(s(4, true), s(5, false)),
            ]
        );
        assert_eq!(fixed.output(), s(6, false));
        for x in 0..8usize {
            let a: Vec<bool> = (0..3).map(|i| (x >> i) & 1 == 1).collect();
            let v = scrambled_eval(&a);
            assert_eq!(fixed.eval(&a).unwrap(), v);
        }
    }

    fn scrambled_eval(a: &[bool]) -> bool {
        let n6 = a[0] & a[1];
        let n5 = n6 & a[2];
        n5 & !n6
    }

    #[test]
    fn topo_order_detects_cycle() {
        let g = Aig::from_parts(
            2,
            vec![
                AndNode::new(s(1, false), s(4, false)),
                AndNode::new(s(3, false), s(2, false)),
            ],
            vec![s(4, false)],
        );
        assert!(matches!(g.topo_order(), Err(AigError::Cycle(_))));
    }

    #[test]
    fn validate_examples() {
        assert!(fig1().validate().is_empty());
        let fwd = Aig::from_parts(
            3,
            vec![
                AndNode::new(s(1, false), s(2, false)),
                AndNode::new(s(3, false), s(6, false)),
                AndNode::new(s(1, false), s(4, false)),
            ],
            vec![s(6, false)],
        );
        assert_eq!(fwd.validate(), vec![Violation::ForwardReference { node: 5, fanin: 6 }]);
        let dangling = Aig::from_parts(3, fig1().nodes().to_vec(), vec![s(99, false)]);
        assert_eq!(
            dangling.validate(),
            vec![Violation::DanglingOutput { output: 0, driver: 99 }]
        );
    }

    #[test]
    fn aag_fig1_text() {
        let text = fig1().to_aag();
        assert_eq!(text, "aag 5 3 0 1 2\n2\n4\n6\n11\n8 2 4\n10 6 9\n");
        assert_eq!(Aig::from_aag(&text).unwrap(), fig1());
        // File order of gate fanins does not matter.
        let alt = "aag 5 3 0 1 2\n2\n4\n6\n11\n8 2 4\n10 9 6\n";
        assert_eq!(Aig::from_aag(alt).unwrap(), fig1());
    }

    #[test]
    fn aag_empty_graph() {
        let g = Aig::trivial(1, s(1, false));
        assert_eq!(g.to_aag(), "aag 1 1 0 1 0\n2\n2\n");
        assert_eq!(Aig::from_aag(&g.to_aag()).unwrap(), g);
    }

    #[test]
    fn aag_constants_and_duplicates() {
        // Output constant true.
        let g = Aig::from_aag("aag 1 1 0 1 0\n2\n1\n").unwrap();
        assert_eq!(g.output(), s(0, true));
        assert!(g.output_table().unwrap().not().is_zero());
        // Gate with a constant-true fanin folds to its other fanin.
        let g = Aig::from_aag("aag 3 2 0 1 1\n2\n4\n6\n6 1 3\n").unwrap();
        assert_eq!(g.and_count(), 0);
        assert_eq!(g.output(), s(1, true));
        // Duplicate fanins are kept, normalized.
        let g = Aig::from_aag("aag 2 1 0 1 1\n2\n4\n4 2 2\n").unwrap();
        assert_eq!(g.nodes()[0].fanin0, g.nodes()[0].fanin1);
    }

    #[test]
    fn aag_errors() {
        let err = Aig::from_aag("aag 3 2 1 1 0\n2\n4\n6 2\n6\n").unwrap_err();
        assert!(matches!(err, AigError::Parse { line: 1, .. }), "{err}");
        let err = Aig::from_aag("aag 3 2 0 1 1\n2\n4\n6\n6 2 8\n").unwrap_err();
        assert!(matches!(err, AigError::Parse { line: 5, .. }), "{err}");
        let err = Aig::from_aag("aag 4 2 0 1 1\n2\n4\n6\n6 2 8\n").unwrap_err();
        assert!(matches!(err, AigError::Parse { line: 5, .. }), "{err}");
        assert!(Aig::from_aag("aig 3 2 0 1 1\n").is_err());
        assert!(Aig::from_aag("aag x\n").is_err());
        assert!(Aig::from_aag("aag 3 2 0 1 1\n2\n").is_err());
    }

    #[test]
    fn aag_multi_output() {
        let g = Aig::from_aag("aag 4 2 0 2 2\n2\n4\n6\n9\n6 2 4\n8 3 5\n").unwrap();
        assert_eq!(g.outputs().len(), 2);
        assert_eq!(g.and_count(), 2);
        // Writing keeps only the first output.
        assert!(g.to_aag().starts_with("aag 4 2 0 1 2\n"));
    }

    #[test]
    fn binary_aiger_matches_ascii() {
        // Same as fig1: gates 8 = 4 & 2, 10 = 9 & 6 (delta encoded).
        let mut bytes = b"aig 5 3 0 1 2\n11\n".to_vec();
        bytes.extend_from_slice(&[8 - 4, 4 - 2, 10 - 9, 9 - 6]);
        let g = Aig::from_binary_aiger(&bytes).unwrap();
        assert_eq!(g, fig1());
    }
}
