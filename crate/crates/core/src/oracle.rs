//! Exact minimum AND-count synthesis by exhaustive enumeration.
//!
//! Depth `k` enumerates chains of `k` gates over the input projections.
//! Three pruning rules keep this tractable for up to four inputs and each is
//! sound for minimality:
//!
//! * a gate whose table is constant or equal (up to negation) to an existing
//!   node can be replaced by that node, so it never appears in a minimum
//!   chain;
//! * every gate but the last must feed a later gate;
//! * if a gate does not read the gate placed just before it, the two are
//!   independent and could be swapped, so only the order whose
//!   `(p2, p1, type)` key increases is explored. Repeated adjacent swaps
//!   strictly decrease the key sequence lexicographically, so every chain
//!   has an equivalent ordering that satisfies the rule.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{Aig, AndNode, NodeId, Signal, CONST_NODE};
use crate::parallel::{self, Execution};
use crate::truthtable::{ConnectionType, TruthTable};

/// Largest input count accepted by [`exact_minimal`].
pub const MAX_ORACLE_INPUTS: usize = 4;
/// Largest input count accepted by [`minimal_size_table`].
pub const MAX_TABLE_INPUTS: usize = 3;
/// Largest depth bound accepted by either entry point.
pub const MAX_DEPTH: usize = 8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no AIG with at most {k_max} AND nodes realizes {target}")]
    Unsat { target: String, k_max: usize },
    #[error("{n} inputs exceeds the oracle bound of {max}")]
    TooManyInputs { n: usize, max: usize },
    #[error("depth bound {0} exceeds {MAX_DEPTH}")]
    DepthBound(usize),
    #[error("target width {got} does not match {n} inputs")]
    Width { n: usize, got: usize },
    #[error("cache {path}: {message}")]
    Cache { path: String, message: String },
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Minimum AND-node count.
    pub size: usize,
    pub witness: Aig,
    /// Gates placed during the search.
    pub explored: u64,
}

fn norm(t: u64, mask: u64) -> u64 {
    if t & 1 == 1 {
        !t & mask
    } else {
        t
    }
}

#[derive(Clone, Copy, Debug)]
struct Gate {
    ty: ConnectionType,
    p1: u32,
    p2: u32,
}

impl Gate {
    fn key(&self) -> (u32, u32, u8) {
        (self.p2, self.p1, self.ty.index())
    }
}

enum Goal<'a> {
    /// Stop at the first chain whose last gate equals this key.
    Single(u64),
    /// Record every reachable last-gate key not in `known`.
    Batch {
        known: &'a HashSet<u64>,
        found: HashSet<u64>,
    },
}

struct Enumerator<'a> {
    n: usize,
    mask: u64,
    tables: Vec<u64>,
    norms: Vec<u64>,
    gates: Vec<Gate>,
    uses: Vec<u32>,
    unused: usize,
    explored: u64,
    goal: Goal<'a>,
}

impl<'a> Enumerator<'a> {
    fn new(n: usize, goal: Goal<'a>) -> Self {
        let mask = if n >= 6 { u64::MAX } else { (1u64 << (1 << n)) - 1 };
        let tables: Vec<u64> = (1..=n)
            .map(|i| TruthTable::input(i, n).expect("n checked").words()[0])
            .collect();
        let norms = tables.iter().map(|&t| norm(t, mask)).collect();
        Enumerator {
            n,
            mask,
            uses: vec![0; n],
            tables,
            norms,
            gates: Vec::new(),
            unused: 0,
            explored: 0,
            goal,
        }
    }

    fn apply(&mut self, g: Gate, t: u64) {
        for p in [g.p1, g.p2] {
            let i = p as usize - 1;
            if i >= self.n && self.uses[i] == 0 {
                self.unused -= 1;
            }
            self.uses[i] += 1;
        }
        self.tables.push(t);
        self.norms.push(norm(t, self.mask));
        self.uses.push(0);
        self.unused += 1;
        self.gates.push(g);
    }

    fn undo(&mut self) {
        let g = self.gates.pop().expect("undo on empty chain");
        self.tables.pop();
        self.norms.pop();
        self.uses.pop();
        self.unused -= 1;
        for p in [g.p1, g.p2] {
            let i = p as usize - 1;
            self.uses[i] -= 1;
            if i >= self.n && self.uses[i] == 0 {
                self.unused += 1;
            }
        }
    }

    /// Candidate gates admissible as the next gate of the chain, in flat
    /// action-index order.
    fn candidates(&self) -> Vec<(Gate, u64)> {
        let v = self.tables.len();
        let prev = self.gates.last().copied();
        let mut out = Vec::new();
        for ty in ConnectionType::ALL {
            let (i1, i2) = ty.polarity();
            let f1 = if i1 { self.mask } else { 0 };
            let f2 = if i2 { self.mask } else { 0 };
            for p1 in 1..v {
                for p2 in (p1 + 1)..=v {
                    let t = (self.tables[p1 - 1] ^ f1) & (self.tables[p2 - 1] ^ f2);
                    if t == 0 || t == self.mask {
                        continue;
                    }
                    let g = Gate {
                        ty,
                        p1: p1 as u32,
                        p2: p2 as u32,
                    };
                    if let Some(prev) = prev {
                        let uses_prev = p2 == v;
                        if !uses_prev && g.key() <= prev.key() {
                            continue;
                        }
                    }
                    let key = norm(t, self.mask);
                    if self.norms.contains(&key) {
                        continue;
                    }
                    out.push((g, t));
                }
            }
        }
        out
    }

    /// Explores chains with `remaining` more gates. Returns true when a
    /// single-target search has succeeded (the chain is left in place).
    fn dfs(&mut self, remaining: usize) -> bool {
        for (g, t) in self.candidates() {
            self.explored += 1;
            self.apply(g, t);
            if remaining == 1 {
                // Every gate but this one must be used.
                if self.unused == 1 {
                    let key = norm(t, self.mask);
                    match &mut self.goal {
                        Goal::Single(target) => {
                            if key == *target {
                                return true;
                            }
                        }
                        Goal::Batch { known, found } => {
                            if !known.contains(&key) {
                                found.insert(key);
                            }
                        }
                    }
                }
            } else if self.unused <= remaining && self.dfs(remaining - 1) {
                return true;
            }
            self.undo();
        }
        false
    }

    fn witness(&self, target: &TruthTable) -> Aig {
        let nodes = self
            .gates
            .iter()
            .map(|g| {
                let (i1, i2) = g.ty.polarity();
                AndNode::new(Signal::new(g.p1, i1), Signal::new(g.p2, i2))
            })
            .collect();
        let last = *self.tables.last().expect("non-empty chain");
        let out = Signal::new(self.tables.len() as NodeId, last != target.words()[0]);
        Aig::new(self.n, nodes, out).expect("chain references earlier nodes")
    }
}

/// Zero-gate realization of a constant or (possibly inverted) projection.
pub fn trivial_realization(target: &TruthTable) -> Option<Aig> {
    let n = target.num_inputs();
    if target.is_const() {
        return Some(Aig::trivial(n, Signal::new(CONST_NODE, !target.is_zero())));
    }
    (1..=n).find_map(|i| {
        let p = TruthTable::input(i, n).ok()?;
        p.eq_up_to_negation(target)
            .then(|| Aig::trivial(n, Signal::new(i as NodeId, p != *target)))
    })
}

/// Minimum AND-node count for `target`, searching depths `0..=k_max`.
pub fn exact_minimal(target: &TruthTable, n: usize, k_max: usize) -> Result<OracleResult, OracleError> {
    if n > MAX_ORACLE_INPUTS {
        return Err(OracleError::TooManyInputs {
            n,
            max: MAX_ORACLE_INPUTS,
        });
    }
    if k_max > MAX_DEPTH {
        return Err(OracleError::DepthBound(k_max));
    }
    if target.num_inputs() != n {
        return Err(OracleError::Width {
            n,
            got: target.num_inputs(),
        });
    }
    if let Some(witness) = trivial_realization(target) {
        return Ok(OracleResult {
            size: 0,
            witness,
            explored: 0,
        });
    }
    let mut explored = 0;
    let mask_key = {
        let e = Enumerator::new(n, Goal::Single(0));
        norm(target.words()[0], e.mask)
    };
    for k in 1..=k_max {
        let mut e = Enumerator::new(n, Goal::Single(mask_key));
        let hit = e.dfs(k);
        explored += e.explored;
        if hit {
            return Ok(OracleResult {
                size: k,
                witness: e.witness(target),
                explored,
            });
        }
    }
    Err(OracleError::Unsat {
        target: target.to_hex(),
        k_max,
    })
}

/// Minimum sizes of every `n`-input function, keyed by hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeTable {
    pub n: usize,
    pub sizes: BTreeMap<String, usize>,
    /// Functions with no realization within the depth bound.
    pub residual: Vec<String>,
}

impl SizeTable {
    pub fn get(&self, t: &TruthTable) -> Option<usize> {
        self.sizes.get(&t.to_hex()).copied()
    }

    /// Writes the JSON map `hex -> size`.
    pub fn save(&self, path: &Path) -> Result<(), OracleError> {
        let err = |message: String| OracleError::Cache {
            path: path.display().to_string(),
            message,
        };
        let text = serde_json::to_string_pretty(&self.sizes).map_err(|e| err(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| err(e.to_string()))
    }

    pub fn load(path: &Path, n: usize) -> Result<Self, OracleError> {
        let err = |message: String| OracleError::Cache {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let sizes: BTreeMap<String, usize> = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        for k in sizes.keys() {
            TruthTable::from_hex(k, n).map_err(|e| err(e.to_string()))?;
        }
        let expected = 1usize << (1 << n);
        let residual = (0..expected)
            .map(|v| table_from_index(n, v as u64).to_hex())
            .filter(|h| !sizes.contains_key(h))
            .collect();
        Ok(SizeTable { n, sizes, residual })
    }
}

fn table_from_index(n: usize, v: u64) -> TruthTable {
    TruthTable::from_fn(n, |k| (v >> k) & 1 == 1).expect("n checked")
}

/// Exact minimum size of all `2^(2^n)` functions of `n` inputs.
///
/// One enumeration per depth serves every target at once. The first gate
/// choices are distributed over `exec`.
pub fn minimal_size_table(n: usize, k_max: usize, exec: Execution) -> Result<SizeTable, OracleError> {
    if n == 0 || n > MAX_TABLE_INPUTS {
        return Err(OracleError::TooManyInputs {
            n,
            max: MAX_TABLE_INPUTS,
        });
    }
    if k_max > MAX_DEPTH {
        return Err(OracleError::DepthBound(k_max));
    }
    let total = 1u64 << (1 << n);
    let mask = total - 1;
    let mut size_by_key: HashMap<u64, usize> = HashMap::new();
    size_by_key.insert(0, 0);
    for i in 1..=n {
        size_by_key.insert(norm(TruthTable::input(i, n).unwrap().words()[0], mask), 0);
    }
    let all_keys = (total / 2) as usize;
    for k in 1..=k_max {
        if size_by_key.len() == all_keys {
            break;
        }
        let known: HashSet<u64> = size_by_key.keys().copied().collect();
        let root = Enumerator::new(n, Goal::Single(u64::MAX));
        let firsts = root.candidates();
        let found = parallel::map(&firsts, exec, |_, &(g, t)| {
            let mut e = Enumerator::new(
                n,
                Goal::Batch {
                    known: &known,
                    found: HashSet::new(),
                },
            );
            e.apply(g, t);
            if k == 1 {
                if e.unused == 1 && !known.contains(&norm(t, mask)) {
                    return vec![norm(t, mask)];
                }
                return Vec::new();
            }
            e.dfs(k - 1);
            match e.goal {
                Goal::Batch { found, .. } => found.into_iter().collect(),
                Goal::Single(_) => unreachable!(),
            }
        });
        for key in found.into_iter().flatten() {
            size_by_key.entry(key).or_insert(k);
        }
    }
    let mut sizes = BTreeMap::new();
    let mut residual = Vec::new();
    for v in 0..total {
        let t = table_from_index(n, v);
        match size_by_key.get(&norm(v, mask)) {
            Some(&s) => {
                sizes.insert(t.to_hex(), s);
            }
            None => residual.push(t.to_hex()),
        }
    }
    Ok(SizeTable { n, sizes, residual })
}

/// Loads the table from `cache` when present, otherwise computes and stores it.
pub fn cached_size_table(cache: &Path, n: usize, k_max: usize, exec: Execution) -> Result<SizeTable, OracleError> {
    if cache.exists() {
        let t = SizeTable::load(cache, n)?;
        if t.residual.is_empty() {
            return Ok(t);
        }
    }
    let t = minimal_size_table(n, k_max, exec)?;
    if let Some(dir) = cache.parent() {
        let _ = std::fs::create_dir_all(dir);
    }
    t.save(cache)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tt(hex: &str, n: usize) -> TruthTable {
        TruthTable::from_hex(hex, n).unwrap()
    }

    #[test]
    fn exact_examples() {
        let r = exact_minimal(&tt("7", 2), 2, 8).unwrap();
        assert_eq!(r.size, 1);
        assert!(r.witness.output().inverted);
        assert_eq!(r.witness.output_table().unwrap(), tt("7", 2));

        let x = exact_minimal(&tt("6", 2), 2, 8).unwrap();
        assert_eq!(x.size, 3);
        assert_eq!(x.witness.output_table().unwrap(), tt("6", 2));
        assert!(matches!(
            exact_minimal(&tt("6", 2), 2, 2),
            Err(OracleError::Unsat { .. })
        ));

        let f = exact_minimal(&tt("8F", 3), 3, 8).unwrap();
        assert_eq!(f.size, 2);
        assert_eq!(f.witness.output_table().unwrap(), tt("8F", 3));
        assert!(exact_minimal(&tt("8F", 3), 3, 1).is_err());
    }

    #[test]
    fn trivial_targets() {
        let z = exact_minimal(&tt("0", 2), 2, 0).unwrap();
        assert_eq!(z.size, 0);
        assert_eq!(z.witness.output_table().unwrap(), tt("0", 2));
        let o = exact_minimal(&tt("F", 2), 2, 0).unwrap();
        assert_eq!(o.witness.output_table().unwrap(), tt("F", 2));
        let p = exact_minimal(&tt("33", 3), 3, 0).unwrap();
        assert_eq!(p.size, 0);
        assert_eq!(p.witness.output(), Signal::new(2, true));
    }

    #[test]
    fn bounds() {
        let t = TruthTable::input(1, 5).unwrap();
        assert!(matches!(
            exact_minimal(&t, 5, 3),
            Err(OracleError::TooManyInputs { .. })
        ));
        assert!(matches!(
            minimal_size_table(4, 3, Execution::Sequential),
            Err(OracleError::TooManyInputs { .. })
        ));
        assert!(exact_minimal(&tt("6", 2), 2, 9).is_err());
    }

    #[test]
    fn table_n1() {
        let t = minimal_size_table(1, 8, Execution::Sequential).unwrap();
        let expected: BTreeMap<String, usize> = ["0", "1", "2", "3"].iter().map(|h| (h.to_string(), 0)).collect();
        assert_eq!(t.sizes, expected);
    }

    #[test]
    fn table_n2() {
        let t = minimal_size_table(2, 8, Execution::Sequential).unwrap();
        assert_eq!(t.sizes.len(), 16);
        assert!(t.residual.is_empty());
        for (h, &s) in &t.sizes {
            let f = tt(h, 2);
            let expected = match h.as_str() {
                "0" | "F" | "A" | "5" | "C" | "3" => 0,
                "6" | "9" => 3,
                _ => 1,
            };
            assert_eq!(s, expected, "{h}");
            assert_eq!(t.get(&f.not()), Some(s));
            assert_eq!(exact_minimal(&f, 2, 8).unwrap().size, s);
        }
    }

    #[test]
    fn table_n3_agrees_with_single_searches() {
        let t = minimal_size_table(3, 8, Execution::default()).unwrap();
        assert!(t.residual.is_empty(), "{:?}", t.residual);
        assert_eq!(t.sizes["8F"], 2);
        // XOR3
        assert_eq!(t.sizes["96"], 6);
        for h in ["8F", "E8", "CA", "96", "80", "7E", "01", "69"] {
            let f = tt(h, 3);
            assert_eq!(exact_minimal(&f, 3, 8).unwrap().size, t.sizes[h], "{h}");
        }
        for (h, &s) in &t.sizes {
            assert_eq!(t.get(&tt(h, 3).not()), Some(s));
        }
    }

    #[test]
    fn input_relabeling_preserves_size() {
        use crate::truthtable::RowPermutation;
        let t = minimal_size_table(2, 8, Execution::Sequential).unwrap();
        let swap = RowPermutation::from_input_permutation(&[1, 0]).unwrap();
        for (h, &s) in &t.sizes {
            let p = tt(h, 2).permute_rows(&swap).unwrap();
            assert_eq!(t.get(&p), Some(s));
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sizes_n2.json");
        let t = cached_size_table(&path, 2, 8, Execution::Sequential).unwrap();
        assert!(path.exists());
        let again = cached_size_table(&path, 2, 8, Execution::Sequential).unwrap();
        assert_eq!(t, again);
    }
}
