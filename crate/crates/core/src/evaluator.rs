//! Policy/value evaluators consumed by the search.
//!
//! Built-ins are [`Uniform`] and [`Heuristic`]. [`Remote`] speaks the
//! line-delimited JSON policy-server protocol over TCP or a child process's
//! stdio:
//!
//! ```text
//! -> {"id":7,"n":3,"tables":["AA","CC","F0","88"],"target":"8F","legal":[0,1,...]}
//! <- {"id":7,"policy":[[0,0.25],...],"value":0.0}
//! ```

use std::fmt;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Candidate, SynthState};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluator called with no legal actions")]
    NoLegalActions,
    #[error("evaluator unavailable: {0}")]
    Unavailable(String),
    #[error("invalid evaluator spec {spec:?}: {reason}")]
    Config { spec: String, reason: String },
}

/// Policy over the legal actions plus a state value.
///
/// `policy` lists `(flat index, probability)` in the order of the legal
/// candidates it was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub policy: Vec<(usize, f64)>,
    pub value: f64,
}

impl Evaluation {
    pub fn priors(&self) -> impl Iterator<Item = f64> + '_ {
        self.policy.iter().map(|&(_, p)| p)
    }
}

pub trait Evaluator: Send {
    fn evaluate(&mut self, state: &SynthState, legal: &[Candidate]) -> Result<Evaluation, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&mut self, state: &SynthState, legal: &[Candidate]) -> Result<Evaluation, EvalError> {
        (**self).evaluate(state, legal)
    }
}

/// Equal probability on every legal action, value 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl Evaluator for Uniform {
    fn evaluate(&mut self, _state: &SynthState, legal: &[Candidate]) -> Result<Evaluation, EvalError> {
        if legal.is_empty() {
            return Err(EvalError::NoLegalActions);
        }
        let p = 1.0 / legal.len() as f64;
        Ok(Evaluation {
            policy: legal.iter().map(|c| (c.index, p)).collect(),
            value: 0.0,
        })
    }
}

pub const DEFAULT_BETA: f64 = 8.0;

/// Distance-to-target heuristic.
///
/// Each candidate scores `d(T_a, target) / 2^n` with the negation-aware
/// Hamming distance `d`; the policy is `softmax(-beta * score)`. The value is
/// `1 - 4 * d_min / 2^n` clamped to `[-1, 1]`, where `d_min` is the closest
/// existing node.
#[derive(Debug, Clone, Copy)]
pub struct Heuristic {
    pub beta: f64,
}

impl Default for Heuristic {
    fn default() -> Self {
        Heuristic { beta: DEFAULT_BETA }
    }
}

impl Heuristic {
    pub fn value(state: &SynthState) -> f64 {
        let rows = state.target().num_rows() as f64;
        let d_min = state
            .tables()
            .iter()
            .map(|t| t.neg_aware_distance(state.target()).expect("state widths agree"))
            .min()
            .unwrap_or(0);
        (1.0 - 4.0 * d_min as f64 / rows).clamp(-1.0, 1.0)
    }
}

impl Evaluator for Heuristic {
    fn evaluate(&mut self, state: &SynthState, legal: &[Candidate]) -> Result<Evaluation, EvalError> {
        if legal.is_empty() {
            return Err(EvalError::NoLegalActions);
        }
        let rows = state.target().num_rows() as f64;
        let logits: Vec<f64> = legal
            .iter()
            .map(|c| {
                let d = c.table.neg_aware_distance(state.target()).expect("state widths agree");
                -self.beta * d as f64 / rows
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        Ok(Evaluation {
            policy: legal.iter().zip(&exps).map(|(c, e)| (c.index, e / sum)).collect(),
            value: Self::value(state),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub n: usize,
    pub tables: Vec<String>,
    pub target: String,
    pub legal: Vec<usize>,
}

impl Request {
    pub fn new(id: u64, state: &SynthState, legal: &[Candidate]) -> Self {
        Request {
            id,
            n: state.n_inputs(),
            tables: state.tables().iter().map(|t| t.to_hex()).collect(),
            target: state.target().to_hex(),
            legal: legal.iter().map(|c| c.index).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub policy: Vec<(usize, f64)>,
    pub value: f64,
}

impl Response {
    /// Restricts the policy to `legal` (in its order), renormalizing when
    /// mass falls outside it, and clamps the value.
    pub fn into_evaluation(self, legal: &[usize]) -> Result<Evaluation, EvalError> {
        let bad = |m: String| Err(EvalError::Unavailable(m));
        if !self.value.is_finite() {
            return bad(format!("non-finite value {}", self.value));
        }
        let mut probs = vec![0.0; legal.len()];
        let mut total = 0.0;
        for &(idx, p) in &self.policy {
            if !p.is_finite() || p < 0.0 {
                return bad(format!("invalid probability {p} for action {idx}"));
            }
            total += p;
            if let Ok(pos) = legal.binary_search(&idx) {
                probs[pos] += p;
            }
        }
        let kept: f64 = probs.iter().sum();
        if kept <= 0.0 {
            return bad("policy has no mass on legal actions".into());
        }
        if kept != total || (kept - 1.0).abs() > 1e-9 {
            for p in &mut probs {
                *p /= kept;
            }
        }
        Ok(Evaluation {
            policy: legal.iter().copied().zip(probs).collect(),
            value: self.value.clamp(-1.0, 1.0),
        })
    }
}

/// Where a remote evaluator lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `host:port`
    Tcp(String),
    /// Program and arguments speaking the protocol on stdin/stdout.
    Spawn(Vec<String>),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Tcp(a) => write!(f, "remote:{a}"),
            Endpoint::Spawn(cmd) => write!(f, "spawn:{}", cmd.join(" ")),
        }
    }
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Protocol client holding one connection.
pub struct Remote {
    endpoint: Endpoint,
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    child: Option<Child>,
    timeout: Duration,
    next_id: u64,
}

impl fmt::Debug for Remote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Remote")
            .field("endpoint", &self.endpoint)
            .field("next_id", &self.next_id)
            .finish()
    }
}

fn line_pump<R: BufRead + Send + 'static>(reader: R) -> Receiver<io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in reader.lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

impl Remote {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, EvalError> {
        let unavailable = |e: io::Error| EvalError::Unavailable(format!("{endpoint}: {e}"));
        match endpoint {
            Endpoint::Tcp(addr) => {
                let sock = addr
                    .to_socket_addrs()
                    .map_err(unavailable)?
                    .next()
                    .ok_or_else(|| EvalError::Unavailable(format!("{endpoint}: no address")))?;
                let stream = TcpStream::connect_timeout(&sock, timeout).map_err(unavailable)?;
                stream.set_nodelay(true).map_err(unavailable)?;
                let reader = BufReader::new(stream.try_clone().map_err(unavailable)?);
                Ok(Remote {
                    endpoint: endpoint.clone(),
                    writer: Box::new(stream),
                    lines: line_pump(reader),
                    child: None,
                    timeout,
                    next_id: 0,
                })
            }
            Endpoint::Spawn(cmd) => {
                let (prog, args) = cmd
                    .split_first()
                    .ok_or_else(|| EvalError::Unavailable("empty spawn command".into()))?;
                let mut child = Command::new(prog)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(unavailable)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Remote {
                    endpoint: endpoint.clone(),
                    writer: Box::new(stdin),
                    lines: line_pump(BufReader::new(stdout)),
                    child: Some(child),
                    timeout,
                    next_id: 0,
                })
            }
        }
    }

    fn fail(&self, what: impl fmt::Display) -> EvalError {
        EvalError::Unavailable(format!("{}: {what}", self.endpoint))
    }
}

impl Drop for Remote {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Evaluator for Remote {
    fn evaluate(&mut self, state: &SynthState, legal: &[Candidate]) -> Result<Evaluation, EvalError> {
        if legal.is_empty() {
            return Err(EvalError::NoLegalActions);
        }
        let req = Request::new(self.next_id, state, legal);
        self.next_id += 1;
        let mut line = serde_json::to_string(&req).expect("request serializes");
        line.push('\n');
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(|e| self.fail(e))?;
        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(l)) => l,
            Ok(Err(e)) => return Err(self.fail(e)),
            Err(RecvTimeoutError::Timeout) => return Err(self.fail("timed out")),
            Err(RecvTimeoutError::Disconnected) => return Err(self.fail("connection closed")),
        };
        let resp: Response = serde_json::from_str(&reply).map_err(|e| self.fail(format!("malformed response: {e}")))?;
        if resp.id != req.id {
            return Err(self.fail(format!("response id {} for request {}", resp.id, req.id)));
        }
        resp.into_evaluation(&req.legal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvaluatorKind {
    Uniform,
    Heuristic,
    Remote(Endpoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorConfig {
    pub kind: EvaluatorKind,
    pub beta: f64,
    pub timeout: Duration,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig {
            kind: EvaluatorKind::Heuristic,
            beta: DEFAULT_BETA,
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

impl EvaluatorConfig {
    pub fn new(kind: EvaluatorKind) -> Self {
        EvaluatorConfig {
            kind,
            ..Default::default()
        }
    }

    /// Creates a fresh evaluator; remote kinds open their own connection.
    pub fn build(&self) -> Result<Box<dyn Evaluator>, EvalError> {
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(EvalError::Config {
                spec: self.to_string(),
                reason: format!("beta must be positive, got {}", self.beta),
            });
        }
        Ok(match &self.kind {
            EvaluatorKind::Uniform => Box::new(Uniform),
            EvaluatorKind::Heuristic => Box::new(Heuristic { beta: self.beta }),
            EvaluatorKind::Remote(ep) => Box::new(Remote::connect(ep, self.timeout)?),
        })
    }
}

impl fmt::Display for EvaluatorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EvaluatorKind::Uniform => f.write_str("uniform"),
            EvaluatorKind::Heuristic => f.write_str("heuristic"),
            EvaluatorKind::Remote(ep) => write!(f, "{ep}"),
        }
    }
}

impl FromStr for EvaluatorConfig {
    type Err = EvalError;

    /// Accepts `uniform`, `heuristic`, `remote:HOST:PORT` or
    /// `spawn:PROGRAM ARGS...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| EvalError::Config {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let kind = match s {
            "uniform" => EvaluatorKind::Uniform,
            "heuristic" => EvaluatorKind::Heuristic,
            _ => {
                if let Some(addr) = s.strip_prefix("remote:") {
                    if addr
                        .rsplit_once(':')
                        .is_none_or(|(h, p)| h.is_empty() || p.parse::<u16>().is_err())
                    {
                        return Err(err("expected remote:HOST:PORT"));
                    }
                    EvaluatorKind::Remote(Endpoint::Tcp(addr.to_string()))
                } else if let Some(cmd) = s.strip_prefix("spawn:") {
                    let parts: Vec<String> = cmd.split_whitespace().map(String::from).collect();
                    if parts.is_empty() {
                        return Err(err("expected spawn:PROGRAM [ARGS]"));
                    }
                    EvaluatorKind::Remote(Endpoint::Spawn(parts))
                } else {
                    return Err(err("expected uniform, heuristic, remote:HOST:PORT or spawn:CMD"));
                }
            }
        };
        Ok(EvaluatorConfig::new(kind))
    }
}

/// Answers every request with the uniform policy and value 0, one line per
/// request, until EOF.
pub fn serve_uniform(input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let p = 1.0 / req.legal.len().max(1) as f64;
        let resp = Response {
            id: req.id,
            policy: req.legal.iter().map(|&i| (i, p)).collect(),
            value: 0.0,
        };
        serde_json::to_writer(&mut output, &resp)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

/// Uniform stub server on a local TCP port, one thread per connection.
pub struct StubServer {
    pub addr: String,
    _accept: JoinHandle<()>,
}

impl StubServer {
    pub fn start() -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?.to_string();
        let accept = thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                thread::spawn(move || {
                    let reader = match stream.try_clone() {
                        Ok(s) => BufReader::new(s),
                        Err(_) => return,
                    };
                    let _ = serve_uniform(reader, stream);
                });
            }
        });
        Ok(StubServer { addr, _accept: accept })
    }

    pub fn endpoint(&self) -> Endpoint {
        Endpoint::Tcp(self.addr.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truthtable::{RowPermutation, TruthTable};
    use proptest::prelude::*;

    fn tt(hex: &str, n: usize) -> TruthTable {
        TruthTable::from_hex(hex, n).unwrap()
    }

    fn table2_state() -> SynthState {
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        s.step(crate::Action::from_triple(1, 1, 2).unwrap(), 30).unwrap().state
    }

    fn assert_valid(e: &Evaluation, legal: &[Candidate]) {
        assert_eq!(e.policy.len(), legal.len());
        for ((i, p), c) in e.policy.iter().zip(legal) {
            assert_eq!(*i, c.index);
            assert!(*p >= 0.0);
        }
        assert!((e.priors().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!((-1.0..=1.0).contains(&e.value));
    }

    #[test]
    fn uniform_policy() {
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        let legal = s.legal_candidates();
        assert_eq!(legal.len(), 12);
        let e = Uniform.evaluate(&s, &legal).unwrap();
        assert!(e.priors().all(|p| p == 1.0 / 12.0));
        assert_eq!(e.value, 0.0);
        assert!(matches!(Uniform.evaluate(&s, &[]), Err(EvalError::NoLegalActions)));
    }

    #[test]
    fn heuristic_prefers_terminal_action() {
        let s = table2_state();
        let legal = s.legal_candidates();
        let e = Heuristic::default().evaluate(&s, &legal).unwrap();
        assert_valid(&e, &legal);
        let target = crate::Action::from_triple(3, 3, 4).unwrap().encode(4);
        let best = e
            .policy
            .iter()
            .cloned()
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        assert_eq!(best.0, target);
        // Distance-1 alternatives are at least a factor e less likely.
        for (c, (_, p)) in legal.iter().zip(&e.policy) {
            if c.table.neg_aware_distance(s.target()).unwrap() == 1 {
                assert!(best.1 >= std::f64::consts::E * p * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn heuristic_value() {
        // 8F against AA, CC, F0: distances 3, 3, 1 up to negation.
        let s = SynthState::new(3, tt("8F", 3)).unwrap();
        assert_eq!(Heuristic::value(&s), 1.0 - 4.0 * 1.0 / 8.0);
        let done = s.step(crate::Action::from_triple(1, 1, 2).unwrap(), 30).unwrap().state;
        let done = done
            .step(crate::Action::from_triple(3, 3, 4).unwrap(), 30)
            .unwrap()
            .state;
        assert_eq!(Heuristic::value(&done), 1.0);
    }

    #[test]
    fn request_serialization() {
        let s = table2_state();
        let legal = s.legal_candidates();
        let line = serde_json::to_string(&Request::new(7, &s, &legal)).unwrap();
        let prefix = r#"{"id":7,"n":3,"tables":["AA","CC","F0","88"],"target":"8F","legal":["#;
        assert!(line.starts_with(prefix), "{line}");
    }

    #[test]
    fn response_renormalization_and_clamp() {
        let r = Response {
            id: 0,
            policy: vec![(0, 0.2), (1, 0.2), (5, 0.6)],
            value: 1.7,
        };
        let e = r.into_evaluation(&[0, 1]).unwrap();
        assert_eq!(e.policy, vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(e.value, 1.0);
        let neg = Response {
            id: 0,
            policy: vec![(0, -0.1), (1, 1.1)],
            value: 0.0,
        };
        assert!(neg.into_evaluation(&[0, 1]).is_err());
        let none = Response {
            id: 0,
            policy: vec![(9, 1.0)],
            value: 0.0,
        };
        assert!(none.into_evaluation(&[0, 1]).is_err());
    }

    #[test]
    fn config_parsing() {
        assert_eq!(
            "uniform".parse::<EvaluatorConfig>().unwrap().kind,
            EvaluatorKind::Uniform
        );
        assert_eq!(
            "remote:127.0.0.1:9000".parse::<EvaluatorConfig>().unwrap().kind,
            EvaluatorKind::Remote(Endpoint::Tcp("127.0.0.1:9000".into()))
        );
        assert_eq!(
            "spawn:server --stdio".parse::<EvaluatorConfig>().unwrap().kind,
            EvaluatorKind::Remote(Endpoint::Spawn(vec!["server".into(), "--stdio".into()]))
        );
        for bad in ["", "remote:nope", "remote::1", "spawn:", "neural"] {
            assert!(bad.parse::<EvaluatorConfig>().is_err(), "{bad}");
        }
        let c = EvaluatorConfig {
            beta: 0.0,
            ..Default::default()
        };
        assert!(c.build().is_err());
    }

    #[test]
    fn remote_stub_matches_uniform() {
        let server = StubServer::start().unwrap();
        let mut remote = Remote::connect(&server.endpoint(), DEFAULT_TIMEOUT).unwrap();
        let s = table2_state();
        let legal = s.legal_candidates();
        for _ in 0..3 {
            assert_eq!(
                remote.evaluate(&s, &legal).unwrap(),
                Uniform.evaluate(&s, &legal).unwrap()
            );
        }
    }

    #[test]
    fn remote_failures() {
        // Bind then drop to get a port with nothing listening.
        let addr = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
        assert!(matches!(
            Remote::connect(&Endpoint::Tcp(addr.to_string()), Duration::from_secs(1)),
            Err(EvalError::Unavailable(_))
        ));

        // A server that accepts and never answers.
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let hold = thread::spawn(move || listener.accept().map(|(s, _)| s));
        let mut r = Remote::connect(&Endpoint::Tcp(addr), Duration::from_millis(200)).unwrap();
        let s = table2_state();
        let err = r.evaluate(&s, &s.legal_candidates()).unwrap_err();
        assert!(err.to_string().contains("timed out"), "{err}");
        drop(hold.join());

        // A server that answers garbage.
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut line = String::new();
            BufReader::new(s.try_clone().unwrap()).read_line(&mut line).unwrap();
            s.write_all(b"{\"id\":0,\"policy\":\"x\"}\n").unwrap();
        });
        let mut r = Remote::connect(&Endpoint::Tcp(addr), DEFAULT_TIMEOUT).unwrap();
        let err = r.evaluate(&s, &s.legal_candidates()).unwrap_err();
        assert!(err.to_string().contains("malformed"), "{err}");
    }

    #[test]
    fn serve_uniform_transcript() {
        let input = b"{\"id\":3,\"n\":2,\"tables\":[\"A\",\"C\"],\"target\":\"6\",\"legal\":[0,1,2,3]}\n\n";
        let mut out = Vec::new();
        serve_uniform(&input[..], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"id\":3,\"policy\":[[0,0.25],[1,0.25],[2,0.25],[3,0.25]],\"value\":0.0}\n"
        );
    }

    fn arb_state() -> impl Strategy<Value = SynthState> {
        (2usize..=4, any::<u64>(), proptest::collection::vec(any::<u16>(), 0..5)).prop_filter_map(
            "non-trivial target",
            |(n, bits, picks)| {
                let t = TruthTable::from_fn(n, |k| (bits >> k) & 1 == 1).unwrap();
                let mut s = SynthState::new(n, t).ok()?;
                for p in picks {
                    let legal = s.legal_candidates();
                    if legal.is_empty() {
                        break;
                    }
                    let out = s.step_candidate(&legal[p as usize % legal.len()], 30);
                    if out.terminal {
                        break;
                    }
                    s = out.state;
                }
                (!s.legal_candidates().is_empty()).then_some(s)
            },
        )
    }

    proptest! {
        #[test]
        fn policies_are_distributions_over_legal(s in arb_state(), beta in 0.1f64..50.0) {
            let legal = s.legal_candidates();
            assert_valid(&Uniform.evaluate(&s, &legal).unwrap(), &legal);
            assert_valid(&Heuristic { beta }.evaluate(&s, &legal).unwrap(), &legal);
        }

        #[test]
        fn heuristic_is_permutation_invariant(s in arb_state(), seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sigma = RowPermutation::random(s.target().num_rows(), &mut rng);
            let p = s.permute_rows(&sigma);
            let a = Heuristic::default().evaluate(&s, &s.legal_candidates()).unwrap();
            let b = Heuristic::default().evaluate(&p, &p.legal_candidates()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
