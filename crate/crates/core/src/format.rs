//! Line-oriented JSON files for architectures, automata, word lists and
//! audit reports.
//!
//! Every file starts with a header line giving the format version, the kind
//! of payload and the process and channel names; a process or channel id is
//! its position in these lists. Each following line is one JSON object.
//! Actions are written as text with channels by name and edge labels as
//! numbers, e.g. `c1 swap 1`, `c2 move 3 0`, `c1 conn 1 c2`, `c1 disc 2`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{LockstepTrace, Violation};
use crate::ids::{ChannelId, EdgeLabel, ProcSet, ProcessId, MAX_UNIVERSE};
use crate::reconfig::{Action, Invalid, Op};
use crate::rldfa::{RlDfa, StateId};
use crate::topology::{CommArch, Tca, TopologyError, Tree};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tca,
    Rldfa,
    Word,
    Report,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Tca => "tca",
            Kind::Rldfa => "rldfa",
            Kind::Word => "word",
            Kind::Report => "report",
        };
        f.write_str(s)
    }
}

/// The first line of every file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "format-version")]
    pub version: u32,
    pub kind: Kind,
    pub processes: Vec<String>,
    pub channels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct FormatError {
    /// 1-based line number, if the problem is local to a line.
    pub line: Option<usize>,
    pub message: String,
}

impl FormatError {
    fn at(line: usize, message: impl fmt::Display) -> FormatError {
        FormatError { line: Some(line), message: message.to_string() }
    }

    fn file(message: impl fmt::Display) -> FormatError {
        FormatError { line: None, message: message.to_string() }
    }
}

/// Names of processes and channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    processes: Vec<String>,
    channels: Vec<String>,
    process_ids: HashMap<String, ProcessId>,
    channel_ids: HashMap<String, ChannelId>,
}

impl Universe {
    pub fn new(processes: Vec<String>, channels: Vec<String>) -> Result<Universe, String> {
        if processes.is_empty() || processes.len() > MAX_UNIVERSE {
            return Err(format!("process count {} is outside 1..={MAX_UNIVERSE}", processes.len()));
        }
        if channels.is_empty() || channels.len() > MAX_UNIVERSE {
            return Err(format!("channel count {} is outside 1..={MAX_UNIVERSE}", channels.len()));
        }
        let mut process_ids = HashMap::new();
        for (i, name) in processes.iter().enumerate() {
            check_name(name)?;
            if process_ids.insert(name.clone(), ProcessId::new(i)).is_some() {
                return Err(format!("process name {name:?} is used twice"));
            }
        }
        let mut channel_ids = HashMap::new();
        for (i, name) in channels.iter().enumerate() {
            check_name(name)?;
            if channel_ids.insert(name.clone(), ChannelId::new(i)).is_some() {
                return Err(format!("channel name {name:?} is used twice"));
            }
        }
        Ok(Universe { processes, channels, process_ids, channel_ids })
    }

    /// `p1..pn` and `c1..ck`.
    pub fn numbered(n: usize, k: usize) -> Universe {
        let processes = (1..=n).map(|i| format!("p{i}")).collect();
        let channels = (1..=k).map(|i| format!("c{i}")).collect();
        Universe::new(processes, channels).expect("numbered names are valid")
    }

    pub fn n(&self) -> usize {
        self.processes.len()
    }

    pub fn k(&self) -> usize {
        self.channels.len()
    }

    pub fn process(&self, name: &str) -> Option<ProcessId> {
        self.process_ids.get(name).copied()
    }

    pub fn channel(&self, name: &str) -> Option<ChannelId> {
        self.channel_ids.get(name).copied()
    }

    pub fn process_name(&self, p: ProcessId) -> &str {
        &self.processes[p.index()]
    }

    pub fn channel_name(&self, c: ChannelId) -> &str {
        &self.channels[c.index()]
    }

    pub fn manifest(&self, kind: Kind) -> Manifest {
        Manifest { version: FORMAT_VERSION, kind, processes: self.processes.clone(), channels: self.channels.clone() }
    }

    /// Writes `a` with channel names.
    pub fn action(&self, a: Action) -> String {
        let c = self.channel_name(a.channel);
        match a.op {
            Op::Nop => format!("{c} nop"),
            Op::Swap(e) => format!("{c} swap {}", e.0),
            Op::Move(e, e2) => format!("{c} move {} {}", e.0, e2.0),
            Op::Connect(e, c2) => format!("{c} conn {} {}", e.0, self.channel_name(c2)),
            Op::Disc(e) => format!("{c} disc {}", e.0),
        }
    }

    /// A word as a bracketed action list.
    pub fn word(&self, word: &[Action]) -> String {
        let actions: Vec<String> = word.iter().map(|&a| self.action(a)).collect();
        format!("[{}]", actions.join(", "))
    }

    /// An audit failure, naming its process.
    pub fn violation(&self, v: &Violation) -> String {
        let mut out = format!("step={} invariant={}", v.prefix, v.invariant);
        if let Some(p) = v.process {
            out += &format!(" process={}", self.process_name(p));
        }
        out + " " + &v.detail
    }

    /// [`Invalid`]'s message with file names in place of ids.
    pub fn invalid(&self, why: &Invalid) -> String {
        let p = |p: &ProcessId| self.process_name(*p);
        let c = |c: &ChannelId| self.channel_name(*c);
        match why {
            Invalid::ChannelOutOfRange(_) | Invalid::LabelOutOfRange(_) | Invalid::RootLabel | Invalid::SameLabel => {
                why.to_string()
            }
            Invalid::NotMember { process, channel } => format!("{} does not listen to {}", p(process), c(channel)),
            Invalid::AlreadyMember { process, channel } => format!("{} already listens to {}", p(process), c(channel)),
            Invalid::WouldDisconnect { process, channel, upper, lower } => {
                format!("{} does not listen to {}, shared by {} and {}", p(process), c(channel), p(upper), p(lower))
            }
            Invalid::NotNeighbor { target, parent } => format!("{} is not a neighbor of {}", p(target), p(parent)),
            Invalid::NoInviter { process, channel, joined } => {
                format!("no neighbor of {} shares {} and listens to {}", p(process), c(channel), c(joined))
            }
            Invalid::TooSmall { channel, members } => format!("channel {} has only {members} members", c(channel)),
            Invalid::NotBoundary { process, channel, neighbors } => {
                format!("{} has {neighbors} neighbors on {}, not exactly one", p(process), c(channel))
            }
            Invalid::Uncovered { process, neighbor, channel } => {
                format!("no channel other than {} is shared by {} and {}", c(channel), p(process), p(neighbor))
            }
        }
    }

    /// Reads an action written by [`Universe::action`].
    pub fn parse_action(&self, text: &str) -> Result<Action, String> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let channel = |name: &str| self.channel(name).ok_or_else(|| format!("unknown channel {name:?}"));
        let label = |s: &str| -> Result<EdgeLabel, String> {
            match s.parse::<usize>() {
                Ok(e) if e < self.n() => Ok(EdgeLabel::new(e)),
                _ => Err(format!("bad edge label {s:?}, expected 0..{}", self.n())),
            }
        };
        let (c, op) = match words.as_slice() {
            [c, "nop"] => (c, Op::Nop),
            [c, "swap", e] => (c, Op::Swap(label(e)?)),
            [c, "move", e, e2] => (c, Op::Move(label(e)?, label(e2)?)),
            [c, "conn", e, c2] => (c, Op::Connect(label(e)?, channel(c2)?)),
            [c, "disc", e] => (c, Op::Disc(label(e)?)),
            _ => return Err(format!("cannot read action {text:?}")),
        };
        Ok(Action::new(channel(c)?, op))
    }
}

fn check_name(name: &str) -> Result<(), String> {
    if name.is_empty() || name.chars().any(|ch| ch.is_whitespace()) {
        return Err(format!("bad name {name:?}"));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootLine {
    root: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeLine {
    edge: usize,
    parent: String,
    child: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelLine {
    channel: String,
    members: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonLine {
    states: usize,
    initial: u32,
    accepting: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionLine {
    from: u32,
    action: String,
    to: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordLine {
    word: Vec<String>,
}

#[derive(Serialize)]
struct ViolationLine<'a> {
    word: usize,
    step: usize,
    invariant: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    process: Option<&'a str>,
    detail: &'a str,
}

#[derive(Serialize)]
struct SummaryLine {
    word: usize,
    length: usize,
    stopped: Option<usize>,
    accepted: bool,
    violations: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Root(RootLine),
    Edge(EdgeLine),
    Channel(ChannelLine),
    Automaton(AutomatonLine),
    Transition(TransitionLine),
    Word(WordLine),
}

impl Line {
    fn what(&self) -> &'static str {
        match self {
            Line::Root(_) => "root",
            Line::Edge(_) => "edge",
            Line::Channel(_) => "channel",
            Line::Automaton(_) => "automaton",
            Line::Transition(_) => "transition",
            Line::Word(_) => "word",
        }
    }
}

/// Body lines of a file, with their 1-based numbers.
struct Body {
    universe: Universe,
    lines: Vec<(usize, Line)>,
}

fn read(text: &str, kind: Kind) -> Result<Body, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (no, first) = lines.next().ok_or_else(|| FormatError::file("empty file"))?;
    let manifest: Manifest =
        serde_json::from_str(first).map_err(|e| FormatError::at(no, format!("bad header: {e}")))?;
    if manifest.version != FORMAT_VERSION {
        return Err(FormatError::at(no, format!("unsupported format version {}", manifest.version)));
    }
    if manifest.kind != kind {
        return Err(FormatError::at(no, format!("expected a {kind} file, found {}", manifest.kind)));
    }
    let universe = Universe::new(manifest.processes, manifest.channels).map_err(|e| FormatError::at(no, e))?;
    let mut body = Vec::new();
    for (no, l) in lines {
        let line = serde_json::from_str(l).map_err(|e| FormatError::at(no, format!("unrecognized line: {e}")))?;
        body.push((no, line));
    }
    Ok(Body { universe, lines: body })
}

fn json_line(out: &mut String, value: &impl Serialize) {
    out.push_str(&serde_json::to_string(value).expect("plain data serializes"));
    out.push('\n');
}

/// An architecture as read from a file, before the definition is checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TcaFile {
    pub universe: Universe,
    pub arch: CommArch,
    pub tree: Tree,
}

impl TcaFile {
    pub fn tca(&self) -> Result<Tca, TopologyError> {
        Tca::new(self.arch.clone(), self.tree.clone())
    }
}

fn name_list<T: Copy>(names: &[String], lookup: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, String> {
    names.iter().map(|s| lookup(s).ok_or_else(|| format!("unknown name {s:?}"))).collect()
}

/// Collects the root, edge and channel lines of a body; other lines are
/// returned untouched.
fn take_tca(body: Body) -> Result<(TcaFile, Vec<(usize, Line)>), FormatError> {
    let u = body.universe;
    let n = u.n();
    let mut root = None;
    let mut parent = vec![None; n];
    let mut members: Vec<Option<ProcSet>> = vec![None; u.k()];
    let mut rest = Vec::new();
    for (no, line) in body.lines {
        let err = |m: String| FormatError::at(no, m);
        match line {
            Line::Root(r) => {
                let p = u.process(&r.root).ok_or_else(|| err(format!("unknown process {:?}", r.root)))?;
                if root.replace(p).is_some() {
                    return Err(err("second root line".into()));
                }
            }
            Line::Edge(e) => {
                if e.edge == 0 || e.edge >= n {
                    return Err(err(format!("edge label {} is outside 1..{n}", e.edge)));
                }
                let q = u.process(&e.parent).ok_or_else(|| err(format!("unknown process {:?}", e.parent)))?;
                let p = u.process(&e.child).ok_or_else(|| err(format!("unknown process {:?}", e.child)))?;
                if parent[p.index()].replace((q, EdgeLabel::new(e.edge))).is_some() {
                    return Err(err(format!("{} has two parents", e.child)));
                }
            }
            Line::Channel(c) => {
                let id = u.channel(&c.channel).ok_or_else(|| err(format!("unknown channel {:?}", c.channel)))?;
                let set: ProcSet = name_list(&c.members, |s| u.process(s)).map_err(err)?.into_iter().collect();
                if set.len() != c.members.len() {
                    return Err(err(format!("repeated member of {}", c.channel)));
                }
                if members[id.index()].replace(set).is_some() {
                    return Err(err(format!("second line for {}", c.channel)));
                }
            }
            other => rest.push((no, other)),
        }
    }
    if n == 1 {
        return Err(FormatError::file("a single process cannot carry a channel"));
    }
    let root = root.ok_or_else(|| FormatError::file("no root line"))?;
    let tree = Tree::new(root, parent).map_err(FormatError::file)?;
    let members = members
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            m.ok_or_else(|| FormatError::file(format!("no line for channel {}", u.channel_name(ChannelId::new(i)))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let arch = CommArch::new(members).map_err(FormatError::file)?;
    Ok((TcaFile { universe: u, arch, tree }, rest))
}

fn unexpected(no: usize, line: &Line, kind: Kind) -> FormatError {
    FormatError::at(no, format!("{} line in a {kind} file", line.what()))
}

/// Reads an architecture file; the definition itself is not checked.
pub fn parse_tca(text: &str) -> Result<TcaFile, FormatError> {
    let (file, rest) = take_tca(read(text, Kind::Tca)?)?;
    if let Some((no, line)) = rest.first() {
        return Err(unexpected(*no, line, Kind::Tca));
    }
    Ok(file)
}

fn tca_lines(out: &mut String, u: &Universe, arch: &CommArch, tree: &Tree) {
    json_line(out, &RootLine { root: u.process_name(tree.root()).into() });
    for (p, q, e) in tree.edges() {
        json_line(
            out,
            &EdgeLine { edge: e.index(), parent: u.process_name(q).into(), child: u.process_name(p).into() },
        );
    }
    for c in arch.channels() {
        let members = arch.members(c).iter().map(|p| u.process_name(p).to_string()).collect();
        json_line(out, &ChannelLine { channel: u.channel_name(c).into(), members });
    }
}

/// Writes an architecture; edges in label order, channels and members in id
/// order.
pub fn print_tca(u: &Universe, arch: &CommArch, tree: &Tree) -> String {
    let mut out = String::new();
    json_line(&mut out, &u.manifest(Kind::Tca));
    tca_lines(&mut out, u, arch, tree);
    out
}

/// Reads an automaton file: the initial architecture, one automaton line and
/// the defined transitions.
pub fn parse_rldfa(text: &str) -> Result<(Universe, RlDfa), FormatError> {
    let (file, rest) = take_tca(read(text, Kind::Rldfa)?)?;
    let arch0 = file.tca().map_err(|e| FormatError::file(format!("initial architecture: {e}")))?;
    let u = file.universe;
    let mut header = None;
    let mut transitions = Vec::new();
    for (no, line) in rest {
        match line {
            Line::Automaton(a) => {
                if header.replace(a).is_some() {
                    return Err(FormatError::at(no, "second automaton line"));
                }
            }
            Line::Transition(t) => {
                let a = u.parse_action(&t.action).map_err(|e| FormatError::at(no, e))?;
                transitions.push((StateId(t.from), a, StateId(t.to)));
            }
            other => return Err(unexpected(no, &other, Kind::Rldfa)),
        }
    }
    let header = header.ok_or_else(|| FormatError::file("no automaton line"))?;
    let accepting = header.accepting.into_iter().map(StateId);
    let dfa =
        RlDfa::new(header.states, StateId(header.initial), arch0, transitions, accepting).map_err(FormatError::file)?;
    Ok((u, dfa))
}

/// Writes an automaton; transitions by source state, then action.
pub fn print_rldfa(u: &Universe, dfa: &RlDfa) -> String {
    let mut out = String::new();
    json_line(&mut out, &u.manifest(Kind::Rldfa));
    let arch0 = dfa.arch0();
    tca_lines(&mut out, u, arch0.arch(), arch0.tree());
    let accepting = dfa.accepting().map(|s| s.0).collect();
    json_line(&mut out, &AutomatonLine { states: dfa.state_count(), initial: dfa.initial().0, accepting });
    for s in dfa.states() {
        for &(a, t) in dfa.transitions(s) {
            json_line(&mut out, &TransitionLine { from: s.0, action: u.action(a), to: t.0 });
        }
    }
    out
}

/// Reads a list of words, one per line.
pub fn parse_words(text: &str) -> Result<(Universe, Vec<Vec<Action>>), FormatError> {
    let body = read(text, Kind::Word)?;
    let u = body.universe;
    let mut words = Vec::new();
    for (no, line) in body.lines {
        match line {
            Line::Word(w) => {
                let word = w.word.iter().map(|a| u.parse_action(a)).collect::<Result<_, _>>();
                words.push(word.map_err(|e| FormatError::at(no, e))?);
            }
            other => return Err(unexpected(no, &other, Kind::Word)),
        }
    }
    Ok((u, words))
}

pub fn print_words(u: &Universe, words: &[Vec<Action>]) -> String {
    let mut out = String::new();
    json_line(&mut out, &u.manifest(Kind::Word));
    for w in words {
        json_line(&mut out, &WordLine { word: w.iter().map(|&a| u.action(a)).collect() });
    }
    out
}

/// Writes the lockstep traces of a word list: every violation, then one
/// summary line per word.
pub fn print_report(u: &Universe, words: &[Vec<Action>], traces: &[(LockstepTrace, bool)]) -> String {
    let mut out = String::new();
    json_line(&mut out, &u.manifest(Kind::Report));
    for (i, (w, (trace, accepted))) in words.iter().zip(traces).enumerate() {
        for v in &trace.violations {
            let process = v.process.map(|p| u.process_name(p));
            let line =
                ViolationLine { word: i, step: v.prefix, invariant: v.invariant.name(), process, detail: &v.detail };
            json_line(&mut out, &line);
        }
        let summary = SummaryLine {
            word: i,
            length: w.len(),
            stopped: trace.stopped,
            accepted: *accepted,
            violations: trace.violations.len(),
        };
        json_line(&mut out, &summary);
    }
    out
}
