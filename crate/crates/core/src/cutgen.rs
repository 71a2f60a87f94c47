//! Random cut extraction from host AIGs and action-sequence datasets.
//!
//! A cut grows from a root AND node by repeatedly replacing a random AND
//! leaf with its fanins, then absorbing any leaf whose fanin is also a leaf
//! (the leaf property). [`cut_to_sample`] turns a cut into the action list
//! that rebuilds it gate by gate.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{Aig, AigError, AndNode, NodeId, Signal};
use crate::env::{Action, EnvError, StepOutcome, SynthState};
use crate::parallel::{self, Execution};
use crate::truthtable::{ConnectionType, RowPermutation, TruthTable};

#[derive(Debug, Error)]
pub enum CutError {
    #[error("node {0} is not an AND node")]
    NotAnd(NodeId),
    #[error("cuts need at least 2 leaves, got {0}")]
    InvalidSize(usize),
    #[error("cone of node {root} has fewer than {n} expandable leaves")]
    Exhausted { root: NodeId, n: usize },
    #[error("node {0} reads the same node twice")]
    Degenerate(NodeId),
    #[error("sample does not replay: {0}")]
    Unreplayable(String),
    #[error(transparent)]
    Aig(#[from] AigError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Shard { path: String, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CutError + '_ {
    move |source| CutError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn fanin_ids(g: &Aig, id: NodeId) -> Option<[NodeId; 2]> {
    g.and_node(id).map(|a| [a.fanin0.node, a.fanin1.node])
}

/// A connected sub-graph rooted at `root` whose function depends only on
/// `leaves`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub root: NodeId,
    pub leaves: BTreeSet<NodeId>,
    /// Includes the root.
    pub internal: BTreeSet<NodeId>,
}

/// Absorbs every leaf that has a fanin in the leaf set, replacing it by its
/// other fanin, until no such leaf remains.
pub fn preserve_leaf_property(leaves: &mut BTreeSet<NodeId>, internal: &mut BTreeSet<NodeId>, g: &Aig) {
    loop {
        let mut changed = false;
        let snapshot: Vec<NodeId> = leaves.iter().copied().collect();
        for leaf in snapshot {
            if !leaves.contains(&leaf) {
                continue;
            }
            let Some([a, b]) = fanin_ids(g, leaf) else {
                continue;
            };
            let other = if leaves.contains(&a) {
                b
            } else if leaves.contains(&b) {
                a
            } else {
                continue;
            };
            leaves.remove(&leaf);
            internal.insert(leaf);
            if !internal.contains(&other) {
                leaves.insert(other);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

impl Cut {
    /// The root with its two fanins as leaves.
    pub fn initial(g: &Aig, root: NodeId) -> Result<Self, CutError> {
        let fanins = fanin_ids(g, root).ok_or(CutError::NotAnd(root))?;
        let mut c = Cut {
            root,
            leaves: fanins.into_iter().collect(),
            internal: BTreeSet::from([root]),
        };
        preserve_leaf_property(&mut c.leaves, &mut c.internal, g);
        Ok(c)
    }

    /// Moves `node` from the leaves into the cut and adds its fanins as
    /// leaves.
    pub fn expand(&mut self, g: &Aig, node: NodeId) {
        self.leaves.remove(&node);
        self.internal.insert(node);
        for f in fanin_ids(g, node).into_iter().flatten() {
            if !self.internal.contains(&f) {
                self.leaves.insert(f);
            }
        }
        preserve_leaf_property(&mut self.leaves, &mut self.internal, g);
    }

    fn expandable(&self, g: &Aig) -> Vec<NodeId> {
        self.leaves.iter().copied().filter(|&l| g.is_and(l)).collect()
    }

    fn grow<R: Rng + ?Sized>(&mut self, g: &Aig, size: usize, rng: &mut R) -> Result<(), CutError> {
        while self.leaves.len() < size {
            let options = self.expandable(g);
            if options.is_empty() {
                return Err(CutError::Exhausted {
                    root: self.root,
                    n: size,
                });
            }
            let pick = options[rng.random_range(0..options.len())];
            self.expand(g, pick);
        }
        Ok(())
    }

    /// Structural check of the cut invariants against its host graph.
    pub fn audit(&self, g: &Aig) -> Result<(), String> {
        if !self.internal.contains(&self.root) {
            return Err(format!("root {} not internal", self.root));
        }
        if let Some(x) = self.leaves.intersection(&self.internal).next() {
            return Err(format!("node {x} is both leaf and internal"));
        }
        for &i in &self.internal {
            let f = fanin_ids(g, i).ok_or(format!("internal node {i} is not an AND"))?;
            for x in f {
                if !self.internal.contains(&x) && !self.leaves.contains(&x) {
                    return Err(format!("fanin {x} of {i} escapes the cut"));
                }
            }
        }
        for &l in &self.leaves {
            if let Some(f) = fanin_ids(g, l) {
                if let Some(x) = f.iter().find(|x| self.leaves.contains(x)) {
                    return Err(format!("leaf {l} has leaf fanin {x}"));
                }
            }
        }
        // Every internal node must feed the root.
        let mut seen = BTreeSet::from([self.root]);
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            for f in fanin_ids(g, x).into_iter().flatten() {
                if self.internal.contains(&f) && seen.insert(f) {
                    stack.push(f);
                }
            }
        }
        if seen.len() != self.internal.len() {
            return Err("internal nodes unreachable from root".into());
        }
        Ok(())
    }

    /// Standalone AIG of the cut. Leaves become inputs `1..=n` in ascending
    /// host id; internal nodes follow in ascending host id, which is a
    /// topological order. The output is the root, uninverted.
    pub fn to_aig(&self, g: &Aig) -> Result<Aig, CutError> {
        let mut map = BTreeMap::new();
        for (k, &l) in self.leaves.iter().enumerate() {
            map.insert(l, k as NodeId + 1);
        }
        let mut nodes = Vec::with_capacity(self.internal.len());
        for (k, &i) in self.internal.iter().enumerate() {
            let a = g.and_node(i).ok_or(CutError::NotAnd(i))?;
            let m = |s: Signal| -> Result<Signal, CutError> {
                let node = *map
                    .get(&s.node)
                    .ok_or_else(|| AigError::Invalid(format!("fanin {} of {i} outside cut", s.node)))?;
                Ok(Signal::new(node, s.inverted))
            };
            nodes.push(AndNode::new(m(a.fanin0)?, m(a.fanin1)?));
            map.insert(i, (self.leaves.len() + k + 1) as NodeId);
        }
        Ok(Aig::new(self.leaves.len(), nodes, Signal::new(map[&self.root], false))?)
    }
}

/// Grows one cut with exactly `n` leaves.
pub fn extract_cut<R: Rng + ?Sized>(g: &Aig, root: NodeId, n: usize, rng: &mut R) -> Result<Cut, CutError> {
    if n < 2 {
        return Err(CutError::InvalidSize(n));
    }
    let mut c = Cut::initial(g, root)?;
    c.grow(g, n, rng)?;
    Ok(c)
}

/// Grows a cut to `n - 1` leaves, then yields one cut per leaf whose
/// expansion lands on exactly `n` leaves (duplicates dropped). When the
/// root's own fanins already give `n` leaves that cut is the only result.
pub fn extract_multi_cuts<R: Rng + ?Sized>(g: &Aig, root: NodeId, n: usize, rng: &mut R) -> Result<Vec<Cut>, CutError> {
    if n < 2 {
        return Err(CutError::InvalidSize(n));
    }
    let mut c = Cut::initial(g, root)?;
    if c.leaves.len() >= n {
        return Ok(if c.leaves.len() == n { vec![c] } else { Vec::new() });
    }
    if c.grow(g, n - 1, rng).is_err() {
        return Ok(Vec::new());
    }
    let mut out: Vec<Cut> = Vec::new();
    for leaf in c.expandable(g) {
        let mut b = c.clone();
        b.expand(g, leaf);
        if b.leaves.len() == n && !out.contains(&b) {
            out.push(b);
        }
    }
    Ok(out)
}

/// A target with the action sequence that builds it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrainingSample {
    pub n: usize,
    pub target: TruthTable,
    pub actions: Vec<Action>,
}

#[derive(Serialize, Deserialize)]
struct ShardLine {
    n: usize,
    target: String,
    actions: Vec<[u32; 3]>,
}

impl TrainingSample {
    /// Non-zero entries `(eps, p1, p2)` of the sparse action tensor.
    pub fn tensor(&self) -> Vec<[u32; 3]> {
        self.actions.iter().map(|a| a.triple()).collect()
    }

    /// Replays the actions from the initial state without masking; the
    /// last table must equal the target up to negation.
    pub fn replay(&self) -> Result<StepOutcome, CutError> {
        let bad = |e: EnvError| CutError::Unreplayable(e.to_string());
        let mut s = SynthState::new(self.n, self.target.clone()).map_err(bad)?;
        let k = self.actions.len();
        let mut last = None;
        for &a in &self.actions {
            let out = s.step_unchecked(a, k).map_err(bad)?;
            s = out.state.clone();
            last = Some(out);
        }
        match last {
            Some(out) if out.success => Ok(out),
            Some(_) => Err(CutError::Unreplayable("last node differs from the target".into())),
            None => Err(CutError::Unreplayable("no actions".into())),
        }
    }

    /// Replays through the masked environment: every action must be legal,
    /// the last one must complete the target and no earlier one may.
    pub fn replay_masked(&self) -> Result<StepOutcome, CutError> {
        let bad = |e: EnvError| CutError::Unreplayable(e.to_string());
        let mut s = SynthState::new(self.n, self.target.clone()).map_err(bad)?;
        let k = self.actions.len();
        for (i, &a) in self.actions.iter().enumerate() {
            let out = s.step(a, k).map_err(bad)?;
            if out.terminal {
                if i + 1 == k {
                    return Ok(out);
                }
                return Err(CutError::Unreplayable(format!(
                    "target reached early at action {}",
                    i + 1
                )));
            }
            s = out.state;
        }
        Err(CutError::Unreplayable("actions end before the target".into()))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&ShardLine {
            n: self.n,
            target: self.target.to_hex(),
            actions: self.tensor(),
        })
        .expect("sample serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, String> {
        let l: ShardLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let target = TruthTable::from_hex(&l.target, l.n).map_err(|e| e.to_string())?;
        let actions = l
            .actions
            .iter()
            .map(|&[e, p1, p2]| {
                u8::try_from(e)
                    .ok()
                    .and_then(|e| Action::from_triple(e, p1, p2))
                    .ok_or_else(|| format!("invalid action [{e},{p1},{p2}]"))
            })
            .collect::<Result<_, _>>()?;
        Ok(TrainingSample {
            n: l.n,
            target,
            actions,
        })
    }
}

/// Converts a cut into its action sequence and checks it with
/// [`TrainingSample::replay`].
///
/// Cuts whose function is constant or a projection are rejected with
/// [`CutError::Unreplayable`]. Redundant cuts (two nodes with the same
/// function up to negation) convert but fail
/// [`TrainingSample::replay_masked`].
pub fn cut_to_sample(g: &Aig, cut: &Cut) -> Result<TrainingSample, CutError> {
    let sub = cut.to_aig(g)?;
    let mut actions = Vec::with_capacity(sub.and_count());
    for (k, node) in sub.nodes().iter().enumerate() {
        let (a, b) = (node.fanin0, node.fanin1);
        if a.node == b.node {
            return Err(CutError::Degenerate((sub.n_inputs() + k + 1) as NodeId));
        }
        actions.push(Action::new(
            ConnectionType::from_polarity(a.inverted, b.inverted),
            a.node,
            b.node,
        ));
    }
    let sample = TrainingSample {
        n: sub.n_inputs(),
        target: sub.output_table()?,
        actions,
    };
    sample.replay()?;
    Ok(sample)
}

/// Same actions for the complemented target.
pub fn augment_negate(s: &TrainingSample) -> TrainingSample {
    TrainingSample {
        target: s.target.not(),
        ..s.clone()
    }
}

/// Row-permuted node tables of a sample, for training input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutedView {
    /// Inputs then one table per action.
    pub tables: Vec<TruthTable>,
    pub target: TruthTable,
}

pub fn augment_permute(s: &TrainingSample, sigma: &RowPermutation) -> Result<PermutedView, CutError> {
    let done = s.replay()?;
    let p = |t: &TruthTable| t.permute_rows(sigma).map_err(|e| CutError::Unreplayable(e.to_string()));
    Ok(PermutedView {
        tables: done.state.tables().iter().map(p).collect::<Result<_, _>>()?,
        target: p(&s.target)?,
    })
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    /// Leaves per cut.
    pub n: usize,
    /// Multi-cut extraction rounds per root.
    pub per_root: usize,
    pub seed: u64,
    /// Lines per shard file.
    pub shard_size: usize,
    /// Stop after this many unique samples.
    pub max_samples: Option<usize>,
    pub exec: Execution,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n: 8,
            per_root: 1,
            seed: 0,
            shard_size: 100_000,
            max_samples: None,
            exec: Execution::default(),
        }
    }
}

/// Samples from one host graph in root order, before deduplication, and the
/// number of cuts rejected because they do not replay through the masked
/// environment.
pub fn collect_samples(g: &Aig, cfg: &DatasetConfig) -> (Vec<TrainingSample>, usize) {
    let roots: Vec<NodeId> = g.and_ids().collect();
    let per_root = parallel::map(&roots, cfg.exec, |_, &root| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(root as u64));
        let mut samples = Vec::new();
        let mut rejected = 0;
        for _ in 0..cfg.per_root {
            let Ok(cuts) = extract_multi_cuts(g, root, cfg.n, &mut rng) else {
                continue;
            };
            for c in cuts {
                match cut_to_sample(g, &c).and_then(|s| s.replay_masked().map(|_| s)) {
                    Ok(s) => samples.push(s),
                    Err(_) => rejected += 1,
                }
            }
        }
        (samples, rejected)
    });
    let mut all = Vec::new();
    let mut rejected = 0;
    for (s, r) in per_root {
        all.extend(s);
        rejected += r;
    }
    (all, rejected)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceError {
    pub path: String,
    pub message: String,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub samples: usize,
    /// `null` when there are no samples.
    pub mean_and_nodes: Option<f64>,
    pub seed: u64,
    pub sources: Vec<String>,
    pub n: usize,
    pub per_root: usize,
    /// Sample count per AND-node count.
    pub by_length: BTreeMap<usize, usize>,
    pub shards: Vec<String>,
    pub duplicates: usize,
    pub rejected: usize,
    pub errors: Vec<SourceError>,
}

/// Mean action count, `None` for an empty set.
pub fn mean_size(samples: &[TrainingSample]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    Some(samples.iter().map(|s| s.actions.len()).sum::<usize>() as f64 / samples.len() as f64)
}

/// Extracts, deduplicates and writes samples from every readable source.
/// Unreadable sources are listed in the manifest and skipped.
pub fn build_dataset(sources: &[PathBuf], cfg: &DatasetConfig, out_dir: &Path) -> Result<Manifest, CutError> {
    if cfg.n < 2 {
        return Err(CutError::InvalidSize(cfg.n));
    }
    let mut seen = HashSet::new();
    let mut unique: Vec<TrainingSample> = Vec::new();
    let mut duplicates = 0;
    let mut rejected = 0;
    let mut errors = Vec::new();
    'files: for path in sources {
        let g = match Aig::read_file(path) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                errors.push(SourceError {
                    path: path.display().to_string(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let (samples, r) = collect_samples(&g, cfg);
        rejected += r;
        for s in samples {
            if cfg.max_samples.is_some_and(|m| unique.len() >= m) {
                break 'files;
            }
            if seen.insert((s.target.to_hex(), s.tensor())) {
                unique.push(s);
            } else {
                duplicates += 1;
            }
        }
    }

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut by_len: BTreeMap<usize, Vec<&TrainingSample>> = BTreeMap::new();
    for s in &unique {
        by_len.entry(s.actions.len()).or_default().push(s);
    }
    let mut shards = Vec::new();
    for (k, group) in &by_len {
        for (j, chunk) in group.chunks(cfg.shard_size.max(1)).enumerate() {
            let name = format!("len{k}_shard{j}.jsonl");
            let path = out_dir.join(&name);
            let mut w = BufWriter::new(fs::File::create(&path).map_err(io_err(&path))?);
            for s in chunk {
                writeln!(w, "{}", s.to_json_line()).map_err(io_err(&path))?;
            }
            w.flush().map_err(io_err(&path))?;
            shards.push(name);
        }
    }
    let manifest = Manifest {
        samples: unique.len(),
        mean_and_nodes: mean_size(&unique),
        seed: cfg.seed,
        sources: sources.iter().map(|p| p.display().to_string()).collect(),
        n: cfg.n,
        per_root: cfg.per_root,
        by_length: by_len.iter().map(|(k, v)| (*k, v.len())).collect(),
        shards,
        duplicates,
        rejected,
        errors,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

/// Reads a shard file.
pub fn read_shard(path: &Path) -> Result<Vec<TrainingSample>, CutError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            TrainingSample::from_json_line(&line).map_err(|message| CutError::Shard {
                path: path.display().to_string(),
                line: i + 1,
                message,
            })?,
        );
    }
    Ok(out)
}
