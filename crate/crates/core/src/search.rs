//! PUCT tree search and the outer synthesis loop.

use std::io::{self, BufRead, Write};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{Aig, NodeId, Signal};
use crate::env::{self, Action, Candidate, EnvError, SynthState};
use crate::evaluator::{EvalError, Evaluator};
use crate::truthtable::TruthTable;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("root has no legal actions")]
    DeadRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Simulations per committed move.
    pub sims: usize,
    pub c_puct: f64,
    /// Dirichlet concentration is `scale / |legal|`.
    pub dirichlet_alpha_scale: f64,
    pub dirichlet_mix: f64,
    /// Gates a single simulation may add below the root.
    pub sim_depth: usize,
    /// Gates an episode may commit.
    pub n_max: usize,
    /// Back up evaluator values; when false only terminal rewards count.
    pub use_value: bool,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            sims: 128,
            c_puct: 1.5,
            dirichlet_alpha_scale: 10.0,
            dirichlet_mix: 0.25,
            sim_depth: 20,
            n_max: 30,
            use_value: true,
            seed: 0,
        }
    }
}

impl SearchConfig {
    /// One simulation without noise: commits the highest-prior action.
    pub fn greedy() -> Self {
        SearchConfig {
            sims: 1,
            dirichlet_mix: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::Config(m));
        if self.sims == 0 {
            return bad("sims must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.dirichlet_mix) {
            return bad(format!("dirichlet_mix {} outside [0, 1]", self.dirichlet_mix));
        }
        if self.dirichlet_alpha_scale.is_nan() || self.dirichlet_alpha_scale <= 0.0 {
            return bad(format!(
                "dirichlet_alpha_scale {} must be positive",
                self.dirichlet_alpha_scale
            ));
        }
        if self.c_puct.is_nan() || self.c_puct < 0.0 {
            return bad(format!("c_puct {} must be non-negative", self.c_puct));
        }
        if self.n_max == 0 {
            return bad("n_max must be at least 1".into());
        }
        if self.sim_depth == 0 || self.sim_depth > self.n_max {
            return bad(format!("sim_depth {} must be in 1..={}", self.sim_depth, self.n_max));
        }
        Ok(())
    }
}

/// `Q + c * P * sqrt(parent_visits) / (N + 1)`.
pub fn puct_score(q: f64, prior: f64, visits: u32, parent_visits: u32, c: f64) -> f64 {
    q + c * prior * (parent_visits as f64).sqrt() / (visits as f64 + 1.0)
}

#[derive(Debug, Clone)]
struct Edge {
    cand: Candidate,
    prior: f64,
    visits: u32,
    total: f64,
    child: Option<usize>,
}

impl Edge {
    fn q(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total / self.visits as f64
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    state: SynthState,
    edges: Vec<Edge>,
    expanded: bool,
    /// Reward when the node completes the target.
    terminal: Option<f64>,
    output_inverted: bool,
    value: f64,
    /// Simulations that continued below this node.
    passes: u32,
}

impl Node {
    fn new(state: SynthState, terminal: Option<f64>, output_inverted: bool) -> Self {
        Node {
            state,
            edges: Vec::new(),
            expanded: false,
            terminal,
            output_inverted,
            value: 0.0,
            passes: 0,
        }
    }
}

/// Replay-buffer row written at every committed move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub n: usize,
    pub tables: Vec<String>,
    pub target: String,
    /// `(flat index, visit count)` for every visited root action.
    pub visits: Vec<(usize, u32)>,
    /// Mean backed-up return over all root visits.
    pub q: f64,
}

pub fn write_records<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parses replay JSONL, skipping blank lines.
pub fn read_records<R: BufRead>(input: R) -> io::Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}

/// Search tree over states reachable from a root.
pub struct Tree {
    nodes: Vec<Node>,
    root: usize,
}

impl Tree {
    pub fn new(state: SynthState) -> Self {
        Tree {
            nodes: vec![Node::new(state, None, false)],
            root: 0,
        }
    }

    pub fn root_state(&self) -> &SynthState {
        &self.nodes[self.root].state
    }

    /// `(action, visits, total)` of every root edge, in flat-index order.
    pub fn root_stats(&self) -> Vec<(Action, u32, f64)> {
        self.nodes[self.root]
            .edges
            .iter()
            .map(|e| (e.cand.action, e.visits, e.total))
            .collect()
    }

    fn expand<E: Evaluator + ?Sized>(&mut self, id: usize, eval: &mut E) -> Result<(), SearchError> {
        let node = &mut self.nodes[id];
        let legal = node.state.legal_candidates();
        if !legal.is_empty() {
            let e = eval.evaluate(&node.state, &legal)?;
            node.value = e.value;
            node.edges = legal
                .into_iter()
                .zip(e.priors())
                .map(|(cand, prior)| Edge {
                    cand,
                    prior,
                    visits: 0,
                    total: 0.0,
                    child: None,
                })
                .collect();
        }
        node.expanded = true;
        Ok(())
    }

    fn select(&self, id: usize, priors: &[f64], c: f64) -> usize {
        let edges = &self.nodes[id].edges;
        let parent: u32 = edges.iter().map(|e| e.visits).sum();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, e) in edges.iter().enumerate() {
            let s = puct_score(e.q(), priors[i], e.visits, parent, c);
            // Equal scores go to the higher prior, then the lower index.
            if s > best_score || (s == best_score && priors[i] > priors[best]) {
                best = i;
                best_score = s;
            }
        }
        best
    }

    fn child(&mut self, id: usize, edge: usize, n_max: usize) -> usize {
        if let Some(c) = self.nodes[id].edges[edge].child {
            return c;
        }
        let out = self.nodes[id]
            .state
            .step_candidate(&self.nodes[id].edges[edge].cand, n_max);
        let terminal = out.success.then(|| env::reward(out.state.gate_count(), n_max, true));
        self.nodes.push(Node::new(out.state, terminal, out.output_inverted));
        let c = self.nodes.len() - 1;
        self.nodes[id].edges[edge].child = Some(c);
        c
    }

    fn simulate<E: Evaluator + ?Sized>(
        &mut self,
        root_priors: &[f64],
        eval: &mut E,
        cfg: &SearchConfig,
    ) -> Result<(), SearchError> {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut id = self.root;
        let value = loop {
            let depth = path.len();
            if let Some(r) = self.nodes[id].terminal {
                break r;
            }
            if self.nodes[id].state.gate_count() >= cfg.n_max {
                break -1.0;
            }
            if !cfg.use_value && depth >= cfg.sim_depth {
                break -1.0;
            }
            if !self.nodes[id].expanded {
                self.expand(id, eval)?;
                if cfg.use_value {
                    break self.nodes[id].value;
                }
            }
            if self.nodes[id].edges.is_empty() {
                break -1.0;
            }
            if depth >= cfg.sim_depth {
                break self.nodes[id].value;
            }
            let edge = if id == self.root {
                self.select(id, root_priors, cfg.c_puct)
            } else {
                let priors: Vec<f64> = self.nodes[id].edges.iter().map(|e| e.prior).collect();
                self.select(id, &priors, cfg.c_puct)
            };
            path.push((id, edge));
            id = self.child(id, edge, cfg.n_max);
        };
        for (node, edge) in path {
            let n = &mut self.nodes[node];
            n.passes += 1;
            n.edges[edge].visits += 1;
            n.edges[edge].total += value;
        }
        Ok(())
    }

    fn noisy_priors<R: Rng>(&self, cfg: &SearchConfig, rng: &mut R) -> Vec<f64> {
        let edges = &self.nodes[self.root].edges;
        let base: Vec<f64> = edges.iter().map(|e| e.prior).collect();
        if cfg.dirichlet_mix == 0.0 || edges.is_empty() {
            return base;
        }
        let alpha = cfg.dirichlet_alpha_scale / edges.len() as f64;
        let gamma = Gamma::new(alpha, 1.0).expect("alpha validated positive");
        let mut noise: Vec<f64> = edges.iter().map(|_| gamma.sample(rng)).collect();
        let sum: f64 = noise.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            noise.iter_mut().for_each(|x| *x /= sum);
        } else {
            let u = 1.0 / noise.len() as f64;
            noise.iter_mut().for_each(|x| *x = u);
        }
        base.iter()
            .zip(noise)
            .map(|(p, e)| (1.0 - cfg.dirichlet_mix) * p + cfg.dirichlet_mix * e)
            .collect()
    }

    /// Runs `cfg.sims` simulations from the root and returns the chosen
    /// root-edge position together with the root record.
    pub fn decide<E: Evaluator + ?Sized, R: Rng>(
        &mut self,
        eval: &mut E,
        cfg: &SearchConfig,
        rng: &mut R,
    ) -> Result<(Action, TrajectoryRecord), SearchError> {
        let root = self.root;
        if !self.nodes[root].expanded {
            self.expand(root, eval)?;
        }
        if self.nodes[root].edges.is_empty() {
            return Err(SearchError::DeadRoot);
        }
        // A reused root keeps its subtree but counts only this move's visits.
        for e in &mut self.nodes[root].edges {
            e.visits = 0;
            e.total = 0.0;
        }
        self.nodes[root].passes = 0;
        let priors = self.noisy_priors(cfg, rng);
        for _ in 0..cfg.sims {
            self.simulate(&priors, eval, cfg)?;
        }
        let node = &self.nodes[root];
        let mut best = 0;
        for (i, e) in node.edges.iter().enumerate() {
            if e.visits > node.edges[best].visits {
                best = i;
            }
        }
        let visits: Vec<(usize, u32)> = node
            .edges
            .iter()
            .filter(|e| e.visits > 0)
            .map(|e| (e.cand.index, e.visits))
            .collect();
        let n: u32 = node.edges.iter().map(|e| e.visits).sum();
        let w: f64 = node.edges.iter().map(|e| e.total).sum();
        let record = TrajectoryRecord {
            n: node.state.n_inputs(),
            tables: node.state.tables().iter().map(|t| t.to_hex()).collect(),
            target: node.state.target().to_hex(),
            visits,
            q: if n == 0 { 0.0 } else { w / n as f64 },
        };
        Ok((node.edges[best].cand.action, record))
    }

    /// Moves the root along `action`, keeping its subtree and discarding
    /// everything else. Returns the new root's terminal flag and output
    /// polarity.
    pub fn advance(&mut self, action: Action, n_max: usize) -> Result<(bool, bool), SearchError> {
        let root = self.root;
        let pos = self.nodes[root]
            .edges
            .iter()
            .position(|e| e.cand.action == action)
            .ok_or(EnvError::IllegalAction(action))?;
        let child = self.child(root, pos, n_max);
        self.compact(child);
        let r = &self.nodes[self.root];
        Ok((r.terminal.is_some(), r.output_inverted))
    }

    fn compact(&mut self, new_root: usize) {
        let mut old: Vec<Option<Node>> = std::mem::take(&mut self.nodes).into_iter().map(Some).collect();
        let mut map = vec![usize::MAX; old.len()];
        let mut order = vec![new_root];
        map[new_root] = 0;
        let mut i = 0;
        while i < order.len() {
            let node = old[order[i]].as_ref().expect("tree nodes have one parent");
            for c in node.edges.iter().filter_map(|e| e.child) {
                map[c] = order.len();
                order.push(c);
            }
            i += 1;
        }
        self.nodes = order
            .iter()
            .map(|&o| {
                let mut n = old[o].take().expect("visited once");
                for e in &mut n.edges {
                    e.child = e.child.map(|c| map[c]);
                }
                n
            })
            .collect();
        self.root = 0;
    }

    /// Checks that every expanded non-root node's edge visits sum to its
    /// pass count.
    pub fn is_consistent(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| {
            let sum: u32 = n.edges.iter().map(|e| e.visits).sum();
            let q_ok = n.edges.iter().all(|e| (-1.0..=1.0).contains(&e.q()));
            q_ok && (i == self.root || sum == n.passes)
        })
    }
}

/// Outcome of one synthesis episode.
#[derive(Debug, Clone)]
pub struct SynthResult {
    pub success: bool,
    pub aig: Option<Aig>,
    pub and_count: usize,
    /// Committed moves.
    pub steps: usize,
    pub runtime: Duration,
    pub records: Vec<TrajectoryRecord>,
}

impl PartialEq for SynthResult {
    /// Ignores `runtime`.
    fn eq(&self, other: &Self) -> bool {
        self.success == other.success
            && self.aig == other.aig
            && self.and_count == other.and_count
            && self.steps == other.steps
            && self.records == other.records
    }
}

/// Grows an AIG for `target` by repeated tree search, committing the most
/// visited action each move, until it matches or `cfg.n_max` gates exist.
pub fn synthesize<E: Evaluator + ?Sized>(
    target: &TruthTable,
    n: usize,
    eval: &mut E,
    cfg: &SearchConfig,
) -> Result<SynthResult, SearchError> {
    cfg.validate()?;
    let start = Instant::now();
    let state = match SynthState::new(n, target.clone()) {
        Ok(s) => s,
        Err(EnvError::TrivialTarget { input, inverted }) => {
            return Ok(SynthResult {
                success: true,
                aig: Some(Aig::trivial(n, Signal::new(input as NodeId, inverted))),
                and_count: 0,
                steps: 0,
                runtime: start.elapsed(),
                records: Vec::new(),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tree = Tree::new(state);
    let mut records = Vec::new();
    let mut aig = None;
    while tree.root_state().gate_count() < cfg.n_max {
        let (action, record) = match tree.decide(eval, cfg, &mut rng) {
            Ok(d) => d,
            Err(SearchError::DeadRoot) => break,
            Err(e) => return Err(e),
        };
        records.push(record);
        let (done, inverted) = tree.advance(action, cfg.n_max)?;
        if done {
            aig = Some(tree.root_state().to_aig(inverted)?);
            break;
        }
    }
    let steps = tree.root_state().gate_count();
    Ok(SynthResult {
        success: aig.is_some(),
        and_count: aig.as_ref().map_or(0, |a| a.and_count()),
        aig,
        steps,
        runtime: start.elapsed(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{Heuristic, Uniform};
    use proptest::prelude::*;

    fn tt(hex: &str, n: usize) -> TruthTable {
        TruthTable::from_hex(hex, n).unwrap()
    }

    #[test]
    fn puct_examples() {
        assert_eq!(puct_score(0.0, 0.5, 0, 4, 1.5), 1.5);
        let s = puct_score(0.9667, 0.1, 3, 4, 1.5);
        assert!((s - 1.0417).abs() < 1e-4);
        assert_eq!(puct_score(0.3, 0.9, 0, 0, 1.5), 0.3);
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        for bad in [
            SearchConfig {
                sims: 0,
                ..Default::default()
            },
            SearchConfig {
                dirichlet_mix: 1.5,
                ..Default::default()
            },
            SearchConfig {
                sim_depth: 31,
                ..Default::default()
            },
            SearchConfig {
                dirichlet_alpha_scale: 0.0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn single_sim_takes_argmax_prior() {
        let s = SynthState::new(3, tt("8F", 3))
            .unwrap()
            .step(Action::from_triple(1, 1, 2).unwrap(), 30)
            .unwrap()
            .state;
        let legal = s.legal_candidates();
        let e = Heuristic::default().evaluate(&s, &legal).unwrap();
        let mut best = 0;
        for (i, &(_, p)) in e.policy.iter().enumerate() {
            if p > e.policy[best].1 {
                best = i;
            }
        }
        let mut tree = Tree::new(s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, rec) = tree
            .decide(&mut Heuristic::default(), &SearchConfig::greedy(), &mut rng)
            .unwrap();
        assert_eq!(a, legal[best].action);
        assert_eq!(a, Action::from_triple(3, 3, 4).unwrap());
        assert_eq!(rec.visits, vec![(legal[best].index, 1)]);
    }

    #[test]
    fn greedy_uniform_picks_lowest_index() {
        let s = SynthState::new(2, tt("6", 2)).unwrap();
        let mut tree = Tree::new(s);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, _) = tree.decide(&mut Uniform, &SearchConfig::greedy(), &mut rng).unwrap();
        assert_eq!(a, Action::from_triple(1, 1, 2).unwrap());
    }

    #[test]
    fn terminal_action_gets_majority() {
        let s = SynthState::new(3, tt("8F", 3))
            .unwrap()
            .step(Action::from_triple(1, 1, 2).unwrap(), 30)
            .unwrap()
            .state;
        let win = Action::from_triple(3, 3, 4).unwrap();
        for seed in 0..5 {
            let mut tree = Tree::new(s.clone());
            let cfg = SearchConfig {
                sims: 64,
                seed,
                ..Default::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, rec) = tree.decide(&mut Heuristic::default(), &cfg, &mut rng).unwrap();
            assert_eq!(a, win);
            let total: u32 = rec.visits.iter().map(|v| v.1).sum();
            assert_eq!(total, 64);
            let stats = tree.root_stats();
            let w = stats.iter().find(|s| s.0 == win).unwrap().1;
            assert!(2 * w > total, "seed {seed}: {w}/{total}");
            assert!(tree.is_consistent());
        }
    }

    #[test]
    fn symmetric_actions_get_balanced_visits() {
        let s = SynthState::new(2, tt("6", 2)).unwrap();
        for seed in 0..4 {
            let mut tree = Tree::new(s.clone());
            let cfg = SearchConfig {
                sims: 64,
                dirichlet_mix: 0.0,
                seed,
                ..Default::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            tree.decide(&mut Uniform, &cfg, &mut rng).unwrap();
            let v: Vec<u32> = tree.root_stats().iter().map(|s| s.1).collect();
            assert_eq!(v.len(), 4);
            let spread = v.iter().max().unwrap() - v.iter().min().unwrap();
            assert!(spread <= 16, "{v:?}");
        }
    }

    #[test]
    fn value_free_backup_arithmetic() {
        // Path root -(a)-> x -(b)-> terminal: one backup of the reward.
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let mut tree = Tree::new(s);
        let cfg = SearchConfig {
            sims: 1,
            dirichlet_mix: 0.0,
            use_value: false,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        tree.decide(&mut Heuristic::default(), &cfg, &mut rng).unwrap();
        let root = &tree.nodes[tree.root];
        let e = root.edges.iter().find(|e| e.visits == 1).unwrap();
        let child = &tree.nodes[e.child.unwrap()];
        let e2 = child.edges.iter().find(|e| e.visits == 1).unwrap();
        assert_eq!(e.total, e2.total);
        assert!(tree.is_consistent());
    }

    #[test]
    fn depth_limit_backs_up_minus_one_without_value() {
        let s = SynthState::new(3, tt("96", 3)).unwrap();
        let mut tree = Tree::new(s);
        let cfg = SearchConfig {
            sims: 8,
            dirichlet_mix: 0.0,
            use_value: false,
            sim_depth: 1,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, rec) = tree.decide(&mut Uniform, &cfg, &mut rng).unwrap();
        assert_eq!(rec.q, -1.0);
    }

    #[test]
    fn synthesize_examples() {
        let cfg = SearchConfig {
            seed: 7,
            ..Default::default()
        };
        let r = synthesize(&tt("8F", 3), 3, &mut Heuristic::default(), &cfg).unwrap();
        assert!(r.success);
        assert!(r.and_count <= 3);
        assert_eq!(r.aig.as_ref().unwrap().output_table().unwrap(), tt("8F", 3));
        assert!(r.aig.as_ref().unwrap().validate().is_empty());
        assert_eq!(r.records.len(), r.steps);

        let x = synthesize(&tt("6", 2), 2, &mut Heuristic::default(), &cfg).unwrap();
        assert!(x.success);
        assert_eq!(x.and_count, 3);

        let p = synthesize(&tt("AA", 3), 3, &mut Heuristic::default(), &cfg).unwrap();
        assert!(p.success);
        assert_eq!(p.and_count, 0);
        assert_eq!(p.aig.unwrap().output_table().unwrap(), tt("AA", 3));

        assert!(matches!(
            synthesize(&tt("00", 3), 3, &mut Heuristic::default(), &cfg),
            Err(SearchError::Env(EnvError::ConstantTarget))
        ));
    }

    #[test]
    fn synthesize_is_deterministic() {
        let cfg = SearchConfig {
            sims: 32,
            seed: 3,
            ..Default::default()
        };
        let t = tt("6A", 3);
        let a = synthesize(&t, 3, &mut Heuristic::default(), &cfg).unwrap();
        let b = synthesize(&t, 3, &mut Heuristic::default(), &cfg).unwrap();
        assert_eq!(a, b);
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        write_records(&mut ja, &a.records).unwrap();
        write_records(&mut jb, &b.records).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn failure_respects_gate_budget() {
        let cfg = SearchConfig {
            sims: 2,
            n_max: 2,
            sim_depth: 2,
            seed: 1,
            ..Default::default()
        };
        let r = synthesize(&tt("96", 3), 3, &mut Uniform, &cfg).unwrap();
        assert!(!r.success);
        assert!(r.aig.is_none());
        assert_eq!(r.steps, 2);
        assert_eq!(r.records.len(), 2);
    }

    #[test]
    fn records_round_trip() {
        let cfg = SearchConfig {
            sims: 16,
            seed: 5,
            ..Default::default()
        };
        let r = synthesize(&tt("E8", 3), 3, &mut Heuristic::default(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &r.records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert!(
            first.starts_with("{\"n\":3,\"tables\":[\"AA\",\"CC\",\"F0\"],\"target\":\"E8\",\"visits\":[["),
            "{first}"
        );
        assert_eq!(read_records(&buf[..]).unwrap(), r.records);
        for rec in &r.records {
            assert_eq!(rec.visits.iter().map(|v| v.1).sum::<u32>(), 16);
            assert!(rec.visits.iter().all(|v| v.1 > 0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn tree_stays_consistent(bits in 1u32..255, seed in any::<u64>(), sims in 1usize..40, use_value in any::<bool>()) {
            let t = TruthTable::from_fn(3, |k| (bits >> k) & 1 == 1).unwrap();
            let Ok(s) = SynthState::new(3, t.clone()) else { return Ok(()); };
            let cfg = SearchConfig { sims, seed, use_value, n_max: 8, sim_depth: 8, ..Default::default() };
            let mut tree = Tree::new(s);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..3 {
                let Ok((a, rec)) = tree.decide(&mut Heuristic::default(), &cfg, &mut rng) else { break };
                prop_assert!(tree.is_consistent());
                prop_assert_eq!(rec.visits.iter().map(|v| v.1 as usize).sum::<usize>(), sims);
                prop_assert!((-1.0..=1.0).contains(&rec.q));
                let (done, _) = tree.advance(a, cfg.n_max).unwrap();
                prop_assert!(tree.is_consistent());
                if done { break; }
            }
            let r = synthesize(&t, 3, &mut Heuristic::default(), &cfg).unwrap();
            if let Some(aig) = &r.aig {
                prop_assert!(aig.validate().is_empty());
                prop_assert_eq!(aig.output_table().unwrap(), t);
            }
        }
    }
}
