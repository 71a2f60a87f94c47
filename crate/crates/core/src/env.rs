//! The synthesis environment.
//!
//! A state holds the truth table of every node built so far (inputs first),
//! the target table and the action history. An action `(ty, p1, p2)` with
//! `1 <= p1 < p2 <= V` adds the AND node `f(v_p1) & g(v_p2)`, where `f` and
//! `g` are the complements selected by the connection type. Actions are
//! flattened into the `4 x V x V` tensor as
//! `(ty - 1) * V^2 + (p1 - 1) * V + (p2 - 1)`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::aig::{Aig, AndNode, NodeId, Signal};
use crate::truthtable::{ConnectionType, TruthTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("target width {target} does not match input count {n}")]
    Width { n: usize, target: usize },
    #[error("constant target unsupported")]
    ConstantTarget,
    #[error("target equals input I{input} (inverted: {inverted})")]
    TrivialTarget { input: NodeId, inverted: bool },
    #[error("flat index {index} is not a valid action for {nodes} nodes")]
    InvalidIndex { index: usize, nodes: usize },
    #[error("illegal action {0}")]
    IllegalAction(Action),
    #[error("state has no AND nodes")]
    NoGates,
}

/// One AND-node construction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub ty: ConnectionType,
    pub p1: u32,
    pub p2: u32,
}

impl Action {
    pub fn new(ty: ConnectionType, p1: u32, p2: u32) -> Self {
        Action { ty, p1, p2 }
    }

    /// Builds from the `(eps, p1, p2)` triple used in shard files.
    pub fn from_triple(eps: u8, p1: u32, p2: u32) -> Option<Self> {
        let ty = ConnectionType::from_index(eps).ok()?;
        (p1 >= 1 && p1 < p2).then_some(Action { ty, p1, p2 })
    }

    pub fn triple(&self) -> [u32; 3] {
        [self.ty.index() as u32, self.p1, self.p2]
    }

    pub fn encode(&self, nodes: usize) -> usize {
        let v = nodes;
        (self.ty.index() as usize - 1) * v * v + (self.p1 as usize - 1) * v + (self.p2 as usize - 1)
    }

    pub fn decode(index: usize, nodes: usize) -> Result<Self, EnvError> {
        let v = nodes;
        let bad = EnvError::InvalidIndex { index, nodes };
        if v < 2 || index >= 4 * v * v {
            return Err(bad);
        }
        let ty = ConnectionType::from_index((index / (v * v)) as u8 + 1).map_err(|_| bad.clone())?;
        let rem = index % (v * v);
        let p1 = (rem / v) as u32 + 1;
        let p2 = (rem % v) as u32 + 1;
        if p1 >= p2 {
            return Err(bad);
        }
        Ok(Action { ty, p1, p2 })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.ty.index(), self.p1, self.p2)
    }
}

/// A legal action together with the table it would produce.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub index: usize,
    pub action: Action,
    pub table: TruthTable,
}

/// Partial AIG under construction: `(tables, target, actions)`.
///
/// States are snapshots; [`SynthState::step`] returns a new one. The action
/// history is shared between a state and its successors' prefixes only by
/// value, so cloning is proportional to the node count.
#[derive(Clone)]
pub struct SynthState {
    n: usize,
    tables: Vec<TruthTable>,
    target: Arc<TruthTable>,
    actions: Vec<Action>,
    built: HashSet<TruthTable>,
}

impl fmt::Debug for SynthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SynthState")
            .field("n", &self.n)
            .field("tables", &self.tables)
            .field("target", &self.target)
            .field("actions", &self.actions)
            .finish()
    }
}

impl PartialEq for SynthState {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.tables == other.tables && self.target == other.target && self.actions == other.actions
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SynthState,
    pub terminal: bool,
    pub success: bool,
    /// Meaningful only on success: the new node equals the complement of
    /// the target.
    pub output_inverted: bool,
    pub reward: Option<f64>,
}

/// Terminal reward: `1 - 0.5 * gates / max_gates` on success, -1 otherwise.
pub fn reward(gates: usize, max_gates: usize, success: bool) -> f64 {
    if success {
        1.0 - 0.5 * gates as f64 / max_gates.max(1) as f64
    } else {
        -1.0
    }
}

impl SynthState {
    /// Initial state holding only the input projections.
    ///
    /// Fails with [`EnvError::TrivialTarget`] when the target is an input
    /// (possibly inverted); the error carries the zero-gate solution.
    pub fn new(n: usize, target: TruthTable) -> Result<Self, EnvError> {
        if target.num_inputs() != n {
            return Err(EnvError::Width {
                n,
                target: target.num_inputs(),
            });
        }
        if target.is_const() {
            return Err(EnvError::ConstantTarget);
        }
        let tables: Vec<TruthTable> = (1..=n)
            .map(|i| TruthTable::input(i, n).expect("width checked"))
            .collect();
        for (i, t) in tables.iter().enumerate() {
            if t.eq_up_to_negation(&target) {
                return Err(EnvError::TrivialTarget {
                    input: i as NodeId + 1,
                    inverted: *t != target,
                });
            }
        }
        let built = tables.iter().map(|t| t.normalized()).collect();
        Ok(SynthState {
            n,
            tables,
            target: Arc::new(target),
            actions: Vec::new(),
            built,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n
    }

    pub fn tables(&self) -> &[TruthTable] {
        &self.tables
    }

    pub fn target(&self) -> &TruthTable {
        &self.target
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Current node count `V`.
    pub fn node_count(&self) -> usize {
        self.tables.len()
    }

    pub fn gate_count(&self) -> usize {
        self.actions.len()
    }

    /// Table the action would add, without legality checks.
    pub fn candidate_table(&self, a: &Action) -> TruthTable {
        let (p1, p2) = (a.p1 as usize - 1, a.p2 as usize - 1);
        let mut out = self.tables[p1].clone();
        self.tables[p1].and_into(&self.tables[p2], a.ty, &mut out);
        out
    }

    fn is_new(&self, t: &TruthTable) -> bool {
        !t.is_const() && !self.built.contains(&t.normalized())
    }

    /// Legal actions in increasing flat-index order, with their tables.
    ///
    /// An action is legal when its table is neither constant nor equal (up
    /// to negation) to an existing node's table.
    pub fn legal_candidates(&self) -> Vec<Candidate> {
        let v = self.node_count();
        let mut out = Vec::new();
        let mut scratch = self.tables[0].clone();
        for ty in ConnectionType::ALL {
            for p1 in 1..v {
                for p2 in (p1 + 1)..=v {
                    self.tables[p1 - 1].and_into(&self.tables[p2 - 1], ty, &mut scratch);
                    if self.is_new(&scratch) {
                        let action = Action::new(ty, p1 as u32, p2 as u32);
                        out.push(Candidate {
                            index: action.encode(v),
                            action,
                            table: scratch.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Flat indices of the legal actions, ascending.
    pub fn legal_actions(&self) -> Vec<usize> {
        self.legal_candidates().into_iter().map(|c| c.index).collect()
    }

    pub fn is_legal(&self, a: &Action) -> bool {
        a.p1 >= 1 && a.p1 < a.p2 && a.p2 as usize <= self.node_count() && self.is_new(&self.candidate_table(a))
    }

    /// Applies a legal action. `max_gates` only scales the reward.
    pub fn step(&self, a: Action, max_gates: usize) -> Result<StepOutcome, EnvError> {
        if !self.is_legal(&a) {
            return Err(EnvError::IllegalAction(a));
        }
        let table = self.candidate_table(&a);
        Ok(self.push(a, table, max_gates))
    }

    /// Applies a structurally valid action (`p1 < p2 <= V`) even when the
    /// mask would reject it. Used to replay recorded circuits that contain
    /// redundant nodes.
    pub fn step_unchecked(&self, a: Action, max_gates: usize) -> Result<StepOutcome, EnvError> {
        if a.p1 < 1 || a.p1 >= a.p2 || a.p2 as usize > self.node_count() {
            return Err(EnvError::IllegalAction(a));
        }
        let table = self.candidate_table(&a);
        Ok(self.push(a, table, max_gates))
    }

    /// Applies an action whose table was already computed by
    /// [`SynthState::legal_candidates`].
    pub fn step_candidate(&self, c: &Candidate, max_gates: usize) -> StepOutcome {
        self.push(c.action, c.table.clone(), max_gates)
    }

    fn push(&self, a: Action, table: TruthTable, max_gates: usize) -> StepOutcome {
        let success = table.eq_up_to_negation(&self.target);
        let output_inverted = success && table != *self.target;
        let mut next = self.clone();
        next.built.insert(table.normalized());
        next.tables.push(table);
        next.actions.push(a);
        let reward = success.then(|| reward(next.gate_count(), max_gates, true));
        StepOutcome {
            state: next,
            terminal: success,
            success,
            output_inverted,
            reward,
        }
    }

    /// Converts the built nodes into an AIG whose output is the last node.
    pub fn to_aig(&self, output_inverted: bool) -> Result<Aig, EnvError> {
        if self.actions.is_empty() {
            return Err(EnvError::NoGates);
        }
        let nodes = self
            .actions
            .iter()
            .map(|a| {
                let (i1, i2) = a.ty.polarity();
                AndNode::new(Signal::new(a.p1, i1), Signal::new(a.p2, i2))
            })
            .collect();
        let out = Signal::new(self.node_count() as NodeId, output_inverted);
        Ok(Aig::new(self.n, nodes, out).expect("actions reference earlier nodes"))
    }

    /// Applies `sigma` to every table and the target.
    pub fn permute_rows(&self, sigma: &crate::truthtable::RowPermutation) -> SynthState {
        let p = |t: &TruthTable| t.permute_rows(sigma).expect("permutation size");
        let tables: Vec<_> = self.tables.iter().map(p).collect();
        let built = tables.iter().map(|t| t.normalized()).collect();
        SynthState {
            n: self.n,
            tables,
            target: Arc::new(p(&self.target)),
            actions: self.actions.clone(),
            built,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truthtable::RowPermutation;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tt(hex: &str, n: usize) -> TruthTable {
        TruthTable::from_hex(hex, n).unwrap()
    }

    fn act(eps: u8, p1: u32, p2: u32) -> Action {
        Action::from_triple(eps, p1, p2).unwrap()
    }

    #[test]
    fn new_state_examples() {
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let hex: Vec<_> = s.tables().iter().map(|t| t.to_hex()).collect();
        assert_eq!(hex, ["AA", "CC", "F0"]);
        assert!(s.actions().is_empty());
        assert_eq!(
            SynthState::new(3, tt("AA", 3)).unwrap_err(),
            EnvError::TrivialTarget {
                input: 1,
                inverted: false
            }
        );
        assert_eq!(
            SynthState::new(3, tt("33", 3)).unwrap_err(),
            EnvError::TrivialTarget {
                input: 2,
                inverted: true
            }
        );
        assert_eq!(SynthState::new(2, tt("0", 2)).unwrap_err(), EnvError::ConstantTarget);
        assert!(SynthState::new(3, tt("A", 2)).is_err());
    }

    #[test]
    fn encode_examples() {
        assert_eq!(act(3, 3, 4).encode(4), 43);
        assert_eq!(act(1, 1, 2).encode(4), 1);
        assert_eq!(Action::decode(33, 4).unwrap(), act(3, 1, 2));
        assert!(Action::decode(0, 4).is_err());
        assert!(Action::decode(64, 4).is_err());
    }

    #[test]
    fn encode_decode_exhaustive() {
        for v in 2..=40usize {
            let mut valid = 0;
            for idx in 0..4 * v * v {
                if let Ok(a) = Action::decode(idx, v) {
                    assert_eq!(a.encode(v), idx);
                    valid += 1;
                }
            }
            assert_eq!(valid, 4 * v * (v - 1) / 2);
        }
    }

    #[test]
    fn legal_actions_fresh_state() {
        // Every candidate over {AA, CC, F0} is a 2-literal AND with two ones
        // or six ones; none is a projection or constant.
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let legal = s.legal_candidates();
        assert_eq!(legal.len(), 12);
        for c in &legal {
            let ones = c.table.count_ones();
            assert!(ones == 2, "{c:?}");
        }
        let one = SynthState::new(1, tt("2", 1));
        assert!(one.is_err());
    }

    #[test]
    fn single_input_has_no_pairs() {
        // n = 1 has no non-trivial target; build the state by hand.
        let s = SynthState {
            n: 1,
            tables: vec![tt("2", 1)],
            target: Arc::new(tt("2", 1)),
            actions: vec![],
            built: [tt("2", 1)].into_iter().collect(),
        };
        assert!(s.legal_actions().is_empty());
    }

    #[test]
    fn masking_blocks_rebuilds() {
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let s = s.step(act(1, 1, 2), 30).unwrap().state;
        let legal = s.legal_actions();
        assert!(!legal.contains(&act(1, 1, 2).encode(4)));
        // !(I1 & I2) and its complement-producing variants are also masked.
        assert!(s.step(act(1, 1, 2), 30).is_err());
        assert!(legal.contains(&act(3, 3, 4).encode(4)));
    }

    #[test]
    fn step_examples() {
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let o = s.step(act(1, 1, 2), 30).unwrap();
        assert_eq!(o.state.tables()[3].to_hex(), "88");
        assert!(!o.terminal);
        assert!(o.reward.is_none());

        let o2 = o.state.step(act(3, 3, 4), 30).unwrap();
        assert_eq!(o2.state.tables()[4].to_hex(), "70");
        assert!(o2.terminal && o2.success && o2.output_inverted);
        assert!((o2.reward.unwrap() - reward(2, 30, true)).abs() < 1e-12);

        let s70 = SynthState::new(3, tt("70", 3)).unwrap();
        let o3 = s70
            .step(act(1, 1, 2), 30)
            .unwrap()
            .state
            .step(act(3, 3, 4), 30)
            .unwrap();
        assert!(o3.success && !o3.output_inverted);
    }

    #[test]
    fn reward_examples() {
        assert!((reward(2, 30, true) - 0.966_666_666_7).abs() < 1e-9);
        assert_eq!(reward(5, 30, false), -1.0);
        assert_eq!(reward(30, 30, true), 0.5);
    }

    #[test]
    fn to_aig_examples() {
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let s = s.step(act(1, 1, 2), 30).unwrap().state;
        let end = s.step(act(3, 3, 4), 30).unwrap();
        let g = end.state.to_aig(end.output_inverted).unwrap();
        assert_eq!(g, crate::aig::tests::fig1());
        assert_eq!(g.node_tables().unwrap(), end.state.tables());
        assert_eq!(g.output_table().unwrap().to_hex(), "8F");

        let s2 = SynthState::new(2, tt("8", 2)).unwrap();
        let o = s2.step(act(1, 1, 2), 30).unwrap();
        let g2 = o.state.to_aig(false).unwrap();
        assert_eq!(g2.output_table().unwrap().to_hex(), "8");

        assert_eq!(
            SynthState::new(2, tt("8", 2)).unwrap().to_aig(false).unwrap_err(),
            EnvError::NoGates
        );
    }

    fn random_walk(n: usize, target: &TruthTable, steps: usize, seed: u64) -> Vec<SynthState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SynthState::new(n, target.clone()).unwrap();
        let mut out = vec![s.clone()];
        for _ in 0..steps {
            let legal = s.legal_candidates();
            if legal.is_empty() {
                break;
            }
            let c = &legal[rng.random_range(0..legal.len())];
            let o = s.step_candidate(c, 30);
            if o.terminal {
                break;
            }
            s = o.state;
            out.push(s.clone());
        }
        out
    }

    fn nontrivial_target(n: usize, seed: u64) -> TruthTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let t = TruthTable::from_fn(n, |_| rng.random()).unwrap();
            if SynthState::new(n, t.clone()).is_ok() {
                return t;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tables_stay_distinct(n in 2usize..=5, seed in any::<u64>()) {
            let target = nontrivial_target(n, seed);
            for s in random_walk(n, &target, 12, seed ^ 1) {
                let v = s.node_count();
                prop_assert!(s.legal_actions().len() <= 4 * v * (v - 1) / 2);
                for i in 0..v {
                    for j in (i + 1)..v {
                        prop_assert!(!s.tables()[i].eq_up_to_negation(&s.tables()[j]));
                    }
                }
                prop_assert_eq!(s.actions().len(), v - n);
                for (k, a) in s.actions().iter().enumerate() {
                    let (x, y) = (&s.tables()[a.p1 as usize - 1], &s.tables()[a.p2 as usize - 1]);
                    prop_assert_eq!(&x.and(y, a.ty).unwrap(), &s.tables()[n + k]);
                }
            }
        }

        #[test]
        fn row_permutation_equivariance(n in 2usize..=4, seed in any::<u64>()) {
            let target = nontrivial_target(n, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
            let sigma = RowPermutation::random(1 << n, &mut rng);
            for s in random_walk(n, &target, 6, seed ^ 3) {
                let ps = s.permute_rows(&sigma);
                let a = s.legal_candidates();
                let b = ps.legal_candidates();
                prop_assert_eq!(
                    a.iter().map(|c| c.index).collect::<Vec<_>>(),
                    b.iter().map(|c| c.index).collect::<Vec<_>>()
                );
                for (x, y) in a.iter().zip(&b) {
                    prop_assert_eq!(&x.table.permute_rows(&sigma).unwrap(), &y.table);
                    let ox = s.step_candidate(x, 30);
                    let oy = ps.step_candidate(y, 30);
                    prop_assert_eq!(ox.terminal, oy.terminal);
                }
            }
        }

        #[test]
        fn negation_symmetry(n in 2usize..=4, seed in any::<u64>()) {
            let target = nontrivial_target(n, seed);
            let neg = target.not();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = SynthState::new(n, target).unwrap();
            let mut t = SynthState::new(n, neg).unwrap();
            for _ in 0..10 {
                let a = s.legal_actions();
                prop_assert_eq!(&a, &t.legal_actions());
                if a.is_empty() { break; }
                let act = Action::decode(a[rng.random_range(0..a.len())], s.node_count()).unwrap();
                let os = s.step(act, 30).unwrap();
                let ot = t.step(act, 30).unwrap();
                prop_assert_eq!(os.terminal, ot.terminal);
                if os.terminal {
                    prop_assert_ne!(os.output_inverted, ot.output_inverted);
                    break;
                }
                s = os.state;
                t = ot.state;
            }
        }
    }
}
