//! Lockstep simulation of an automaton and its distribution, instance
//! generators, and a parallel suite runner.
//!
//! [`lockstep`] runs both sides on the same word, feeding the distributed side
//! the canonical data, and audits after every prefix that the local states
//! agree with the centralized configuration. Views are recomputed from the
//! recorded trace by [`ViewOracle`], independently of `diamtree`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distribution::{global_sync, state_from_sync_traced, DataValue, DistributedRaa, LocalState};
use crate::ids::{ChannelId, ChannelSet, EdgeLabel, ProcSet, ProcessId};
use crate::raa::{self, GlobalState, Raa};
use crate::reconfig::{apply, Action};
use crate::rldfa::{
    alphabet, check_diamond_in, Cause, Config, ConfigGraph, ConfigId, Diam, DiamCall, LabeledNode, LabeledTree, RlDfa,
    StateId, ViewOracle,
};
use crate::topology::{make_subtree, neighborhoods, CommArch, Tca, Tree};

/// The properties audited after every prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    /// Both runs are defined, or both stop at the same step.
    Defined,
    /// First states equal the view shared with the current parent at their last common step.
    StateParent,
    /// First states equal the views of the actions crossing the parent edge.
    StateCut,
    /// Second states equal the views of single processes.
    State,
    /// Channel members equal the collected listening sets.
    Arch,
    /// The tree equals the one assembled from the neighbourhoods.
    Tree,
    /// `cc` equals the channels shared with each neighbour.
    Connected,
    /// `dc` equals the unheard channels beyond each neighbour.
    Disconnected,
    /// The state decoded from the global data equals the centralized state.
    Decode,
    /// Acceptance agrees on both sides.
    Acceptance,
    /// Every diam evaluation equals the view of the processes it covers.
    Diam,
    /// diamtree over the full tree labeled with views equals the state.
    ViewTree,
    /// Local states encode within the size bound and decode back.
    Size,
}

impl Invariant {
    pub const COUNT: usize = 13;

    pub const ALL: [Invariant; Invariant::COUNT] = [
        Invariant::Defined,
        Invariant::StateParent,
        Invariant::StateCut,
        Invariant::State,
        Invariant::Arch,
        Invariant::Tree,
        Invariant::Connected,
        Invariant::Disconnected,
        Invariant::Decode,
        Invariant::Acceptance,
        Invariant::Diam,
        Invariant::ViewTree,
        Invariant::Size,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::Defined => "defined",
            Invariant::StateParent => "state-parent",
            Invariant::StateCut => "state-cut",
            Invariant::State => "state",
            Invariant::Arch => "arch",
            Invariant::Tree => "tree",
            Invariant::Connected => "cc",
            Invariant::Disconnected => "dc",
            Invariant::Decode => "decode",
            Invariant::Acceptance => "acceptance",
            Invariant::Diam => "diam",
            Invariant::ViewTree => "view-tree",
            Invariant::Size => "size",
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failed audit after `prefix` actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub prefix: usize,
    pub invariant: Invariant,
    /// The process whose local state failed, for per-process invariants.
    pub process: Option<ProcessId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={} invariant={}", self.prefix, self.invariant)?;
        if let Some(p) = self.process {
            write!(f, " process={p}")?;
        }
        write!(f, " {}", self.detail)
    }
}

fn shown(s: Option<StateId>) -> String {
    s.map_or("undefined".to_string(), |s| s.to_string())
}

/// One step of a lockstep run.
#[derive(Clone, Debug)]
pub struct LockstepStep {
    pub action: Action,
    /// The centralized configuration after the step, if defined.
    pub config: Option<Config>,
    pub data: DataValue,
    /// The distributed global state after the step, if defined.
    pub global: Option<GlobalState<LocalState>>,
}

#[derive(Clone, Debug, Default)]
pub struct LockstepTrace {
    pub steps: Vec<LockstepStep>,
    /// Index of the action at which both runs stopped.
    pub stopped: Option<usize>,
    pub violations: Vec<Violation>,
    /// Audits performed, per invariant, in [`Invariant::ALL`] order.
    pub checks: [usize; Invariant::COUNT],
}

impl LockstepTrace {
    pub fn is_green(&self) -> bool {
        self.violations.is_empty()
    }

    /// No violations other than of the listed invariants.
    pub fn is_green_except(&self, ignored: &[Invariant]) -> bool {
        self.violations.iter().all(|v| ignored.contains(&v.invariant))
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn count(&self, inv: Invariant) -> usize {
        self.checks[inv as usize]
    }
}

struct Auditor<'a> {
    raa: &'a DistributedRaa,
    oracle: ViewOracle<'a>,
    trace: LockstepTrace,
    state_count: usize,
}

impl Auditor<'_> {
    fn check(&mut self, prefix: usize, inv: Invariant, ok: bool, detail: impl FnOnce() -> String) {
        self.check_at(prefix, inv, None, ok, detail);
    }

    fn check_at(
        &mut self,
        prefix: usize,
        invariant: Invariant,
        process: Option<ProcessId>,
        ok: bool,
        detail: impl FnOnce() -> String,
    ) {
        self.trace.checks[invariant as usize] += 1;
        if !ok {
            self.trace.violations.push(Violation { prefix, invariant, process, detail: detail() });
        }
    }

    /// Checks every diam evaluation against the view of what it covers.
    fn diam_calls(&mut self, prefix: usize, calls: &[DiamCall], procs: &[ProcessId]) {
        for call in calls {
            let covered: ProcSet = call.covered.iter().map(|&i| procs[i]).collect();
            let want = self.oracle.view(covered, prefix);
            self.check(prefix, Invariant::Diam, want == Some(call.result), || {
                format!(
                    "diam({}, {}, {}, {}) = {} but view of {covered} is {}",
                    call.s,
                    call.s1,
                    call.s2,
                    call.c,
                    call.result,
                    shown(want)
                )
            });
        }
    }

    fn audit(&mut self, prefix: usize, state: StateId, g: &GlobalState<LocalState>) {
        let tca = self.oracle.tca(prefix).clone();
        let n = tca.n();
        let k = tca.channel_count();
        for (i, s) in g.0.iter().enumerate() {
            let p = ProcessId::new(i);
            let at = Some(p);
            let parent_view = self.oracle.parent_view(p, prefix);
            self.check_at(prefix, Invariant::StateParent, at, parent_view == Some(s.s1), || {
                format!("s1={} parent view={}", s.s1, shown(parent_view))
            });
            let cut_view = self.oracle.cut_view(p, prefix);
            self.check_at(prefix, Invariant::StateCut, at, cut_view == Some(s.s1), || {
                format!("s1={} cut view={}", s.s1, shown(cut_view))
            });
            let view = self.oracle.view(ProcSet::singleton(p), prefix);
            self.check_at(prefix, Invariant::State, at, view == Some(s.s2), || {
                format!("s2={} view={}", s.s2, shown(view))
            });
            let want = LocalState::from_tca(&tca, p, s.s1, s.s2);
            let same_edges = s.pcedges() == want.pcedges();
            let cc_ok = same_edges && s.cc == want.cc;
            self.check_at(prefix, Invariant::Connected, at, cc_ok, || format!("have {s}, want {want}"));
            let dc_ok = same_edges && s.dc == want.dc;
            self.check_at(prefix, Invariant::Disconnected, at, dc_ok, || format!("have {s}, want {want}"));
            let bits = s.encode(self.state_count, n, k);
            let size_ok = bits.len() <= LocalState::encoded_bits(self.state_count, n, k)
                && LocalState::decode(&bits, self.state_count, n, k).as_ref() == Some(s);
            self.check_at(prefix, Invariant::Size, at, size_ok, || format!("{s} does not round trip"));
        }
        for c in tca.arch().channels() {
            let collected: ProcSet =
                g.0.iter()
                    .enumerate()
                    .filter(|(_, s)| s.listening.contains(c))
                    .map(|(i, _)| ProcessId::new(i))
                    .collect();
            self.check(prefix, Invariant::Arch, collected == tca.members(c), || {
                format!("{c}: members {} but listeners {collected}", tca.members(c))
            });
        }
        let tree = DistributedRaa::tree(g);
        self.check(prefix, Invariant::Tree, tree.as_ref().ok() == Some(tca.tree()), || {
            format!("assembled tree {tree:?}")
        });

        let mut calls = Vec::new();
        let decoded = global_sync(&g.0).map(|sync| state_from_sync_traced(self.raa.diam(), &sync, &mut calls));
        self.check(prefix, Invariant::Decode, matches!(decoded, Some(Ok(s)) if s == state), || {
            format!("decoded {decoded:?}, centralized {state}")
        });
        if let Ok(t) = &tree {
            let by_pedge: Vec<ProcessId> = (0..n).map(|e| t.proc_from_label(EdgeLabel::new(e))).collect();
            self.diam_calls(prefix, &calls, &by_pedge);
        }
        let accepted = raa::accepts(self.raa, g).is_some();
        let want = self.raa.dfa().is_accepting(state);
        self.check(prefix, Invariant::Acceptance, accepted == want, || {
            format!("distributed accepts={accepted}, centralized accepts={want}")
        });

        let labeled = view_labeled_tree(&self.oracle, prefix);
        let by_view = labeled.as_ref().map(|t| self.raa.diam().diamtree(t));
        self.check(prefix, Invariant::ViewTree, matches!(by_view, Some(Ok(s)) if s == state), || {
            format!("diamtree over views gives {by_view:?}, centralized {state}")
        });
    }
}

/// The full tree of the architecture after `prefix` actions, each node
/// labeled by the view of the actions crossing its parent edge, its own
/// view, and the unheard channels of its parent lying in its subtree. Nodes
/// are ordered by pedge.
pub fn view_labeled_tree(oracle: &ViewOracle<'_>, prefix: usize) -> Option<LabeledTree> {
    view_labeled_tree_with(oracle, prefix, |p| oracle.cut_view(p, prefix))
}

/// [`view_labeled_tree`] with first states given by `first`.
pub fn view_labeled_tree_with(
    oracle: &ViewOracle<'_>,
    prefix: usize,
    first: impl Fn(ProcessId) -> Option<StateId>,
) -> Option<LabeledTree> {
    let tca = oracle.tca(prefix);
    let tree = tca.tree();
    let nbs = neighborhoods(tree);
    let mut order: Vec<ProcessId> = tree.processes().collect();
    order.sort_by_key(|&p| tree.pedge(p));
    let mut nodes = Vec::with_capacity(order.len());
    for &p in &order {
        let c = match tree.parent(p) {
            None => ChannelSet::EMPTY,
            Some(q) => {
                let below = tree.subtree(p);
                tca.arch()
                    .channels()
                    .filter(|&c| !tca.members(c).contains(q) && !tca.members(c).is_disjoint(below))
                    .collect()
            }
        };
        let s1 = first(p)?;
        let s2 = oracle.view(ProcSet::singleton(p), prefix)?;
        nodes.push(LabeledNode { s1, s2, c });
    }
    let family: Vec<_> = order.iter().map(|p| nbs[p.index()]).collect();
    Some(LabeledTree { nodes, shape: make_subtree(&family).ok()? })
}

/// Runs `raa`'s automaton and `raa` side by side on `word`, auditing every
/// prefix.
pub fn lockstep(raa: &DistributedRaa, word: &[Action]) -> LockstepTrace {
    let dfa = raa.dfa();
    let run = dfa.run(word);
    let defined = run.undefined.as_ref().map_or(word.len(), |u| u.0);
    let oracle = ViewOracle::new(dfa, &word[..defined]).expect("prefix is defined");
    let mut au = Auditor { raa, oracle, trace: LockstepTrace::default(), state_count: dfa.state_count() };

    let mut g = raa.initial();
    au.audit(0, dfa.initial(), &g);
    for (i, &a) in word.iter().enumerate() {
        let data = raa.propose(&g, a);
        let central: Result<&Config, &Cause> =
            if i < defined { Ok(&run.configs[i + 1]) } else { Err(&run.undefined.as_ref().unwrap().1) };
        let dist = raa::step(raa, &g, &data, a);
        let both = central.is_ok() == dist.is_ok();
        au.check(i + 1, Invariant::Defined, both, || match (&central, &dist) {
            (Ok(_), Err(e)) => format!("{a}: centralized defined, distributed {e}"),
            (Err(c), _) => format!("{a}: centralized undefined ({c}), distributed defined"),
            _ => unreachable!(),
        });
        if i < defined {
            // The participants' recombination, checked against their views.
            let before = au.oracle.tca(i).clone();
            let mut calls = Vec::new();
            if state_from_sync_traced(raa.diam(), data.sync(), &mut calls).is_ok() {
                let procs: Vec<ProcessId> =
                    data.sync().0.iter().map(|x| before.tree().proc_from_label(x.pedge)).collect();
                au.diam_calls(i, &calls, &procs);
            }
        }
        let step = LockstepStep { action: a, config: central.ok().cloned(), data, global: dist.as_ref().ok().cloned() };
        au.trace.steps.push(step);
        match (central, dist) {
            (Ok(cfg), Ok(next)) => {
                au.audit(i + 1, cfg.state, &next);
                g = next;
            }
            _ => {
                au.trace.stopped = Some(i);
                break;
            }
        }
    }
    au.trace
}

/// Automaton families produced by [`gen_dfa`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// States are the reachable architectures; every state accepts.
    Tracker,
    /// Architecture paired with a mod-2 counter per channel; accepts when
    /// every counter is even.
    Parity,
    /// Like [`Family::Parity`] with counters modulo the given value.
    Modulo(u8),
    /// Counters modulo the given value only, with transitions on every
    /// sampled action regardless of the architecture.
    Counter(u8),
}

impl Family {
    pub fn name(self) -> String {
        match self {
            Family::Tracker => "tracker".into(),
            Family::Parity => "parity".into(),
            Family::Modulo(m) => format!("mod{m}"),
            Family::Counter(m) => format!("counter{m}"),
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "tracker" => Some(Family::Tracker),
            "parity" => Some(Family::Parity),
            _ => {
                let (kind, m) =
                    if let Some(m) = s.strip_prefix("mod") { (0, m) } else { (1, s.strip_prefix("counter")?) };
                let m: u8 = m.parse().ok().filter(|&m| m >= 2)?;
                Some(if kind == 0 { Family::Modulo(m) } else { Family::Counter(m) })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub family: Family,
    pub max_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("need at least two processes and one channel, got n={n} k={k}")]
    Unsatisfiable { n: usize, k: usize },
    #[error("no automaton within {0} states")]
    TooLarge(usize),
}

/// State cap for generated automata.
pub const GEN_STATE_CAP: usize = 3000;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random architecture: a uniformly random labeled tree (Prüfer code) with
/// random root and labels, random connected channels of at least two
/// members, then extended so that every edge is covered.
pub fn gen_tca(n: usize, k: usize, rng: &mut impl Rng) -> Result<Tca, GenError> {
    if n < 2 || k < 1 || n > 64 || k > 64 {
        return Err(GenError::Unsatisfiable { n, k });
    }
    let adj = prufer_tree(n, rng);
    let root = rng.gen_range(0..n);
    let mut labels: Vec<usize> = (1..n).collect();
    labels.shuffle(rng);
    let mut parent: Vec<Option<(ProcessId, EdgeLabel)>> = vec![None; n];
    let mut order = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((ProcessId::new(u), EdgeLabel::new(labels.pop().unwrap())));
                order.push(v);
            }
        }
        i += 1;
    }
    let tree = Tree::new(ProcessId::new(root), parent).expect("generated tree is valid");

    let mut members: Vec<ProcSet> = (0..k)
        .map(|_| {
            let size = rng.gen_range(2..=n);
            let mut set = ProcSet::singleton(ProcessId::new(rng.gen_range(0..n)));
            while set.len() < size {
                let frontier: Vec<usize> = set
                    .iter()
                    .flat_map(|p| adj[p.index()].iter().copied())
                    .filter(|&v| !set.contains(ProcessId::new(v)))
                    .collect();
                set.insert(ProcessId::new(*frontier.choose(rng).unwrap()));
            }
            set
        })
        .collect();
    for (child, par, _) in tree.edges().collect::<Vec<_>>() {
        if members.iter().any(|m| m.contains(child) && m.contains(par)) {
            continue;
        }
        let touching: Vec<usize> = (0..k).filter(|&c| members[c].contains(child) || members[c].contains(par)).collect();
        match touching.choose(rng) {
            Some(&c) => {
                members[c].insert(child);
                members[c].insert(par);
            }
            None => {
                let c = rng.gen_range(0..k);
                let from = members[c].first().unwrap();
                members[c] = members[c].union(path(&tree, from, child)).with(par);
            }
        }
    }
    let arch = CommArch::new(members).expect("channel count checked");
    Ok(Tca::new(arch, tree).expect("generated architecture is valid"))
}

fn prufer_tree(n: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    let link = |adj: &mut Vec<Vec<usize>>, u: usize, v: usize| {
        adj[u].push(v);
        adj[v].push(u);
    };
    if n == 2 {
        link(&mut adj, 0, 1);
        return adj;
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1; n];
    for &x in &code {
        degree[x] += 1;
    }
    for &x in &code {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        link(&mut adj, leaf, x);
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    link(&mut adj, rest[0], rest[1]);
    for list in adj.iter_mut() {
        list.sort();
    }
    adj
}

/// Processes on the tree path between `a` and `b`.
fn path(tree: &Tree, a: ProcessId, b: ProcessId) -> ProcSet {
    let ancestors = |mut p: ProcessId| {
        let mut out = vec![p];
        while let Some(q) = tree.parent(p) {
            out.push(q);
            p = q;
        }
        out
    };
    let (up_a, up_b) = (ancestors(a), ancestors(b));
    let common: HashSet<ProcessId> = up_a.iter().copied().collect();
    let meet = *up_b.iter().find(|p| common.contains(p)).unwrap();
    let upto = |v: &[ProcessId]| v.iter().copied().take_while(|&p| p != meet).collect::<Vec<_>>();
    upto(&up_a).into_iter().chain(upto(&up_b)).chain(std::iter::once(meet)).collect()
}

/// A random automaton of the requested family over a random architecture.
///
/// Every nop is kept; each reconfiguration action of the universe is kept
/// with a probability that is halved until the automaton fits within
/// [`GEN_STATE_CAP`] states.
pub fn gen_dfa(spec: &GenSpec) -> Result<RlDfa, GenError> {
    let mut rng = rng_for(spec.seed);
    let arch0 = gen_tca(spec.n, spec.k, &mut rng)?;
    let universe = alphabet(spec.n, spec.k);
    let reconfig: Vec<Action> = universe.iter().copied().filter(|a| !a.op.is_nop()).collect();
    let mut keep = (10.0 / reconfig.len().max(1) as f64).min(1.0);
    for _ in 0..8 {
        let mut actions: Vec<Action> = universe.iter().copied().filter(|a| a.op.is_nop()).collect();
        actions.extend(reconfig.iter().copied().filter(|_| rng.gen_bool(keep)));
        actions.sort();
        if let Some(dfa) = build_family(&arch0, &actions, spec.family, spec.k) {
            return Ok(dfa);
        }
        keep /= 2.0;
    }
    Err(GenError::TooLarge(GEN_STATE_CAP))
}

/// The automaton of `family` over `actions`, or `None` past the state cap.
pub fn build_family(arch0: &Tca, actions: &[Action], family: Family, k: usize) -> Option<RlDfa> {
    let counters = vec![0u8; k];
    let bump = |m: u8, cs: &[u8], c: ChannelId| {
        let mut cs = cs.to_vec();
        cs[c.index()] = (cs[c.index()] + 1) % m;
        cs
    };
    let built = match family {
        Family::Tracker => {
            RlDfa::materialize(arch0.clone(), arch0.clone(), actions, |t, a| apply(t, a).ok(), |_| true, GEN_STATE_CAP)
                .map(|x| x.0)
        }
        Family::Parity | Family::Modulo(_) => {
            let m = if let Family::Modulo(m) = family { m } else { 2 };
            RlDfa::materialize(
                arch0.clone(),
                (arch0.clone(), counters),
                actions,
                |(t, cs), a| Some((apply(t, a).ok()?, bump(m, cs, a.channel))),
                |(_, cs)| cs.iter().all(|&x| x == 0),
                GEN_STATE_CAP,
            )
            .map(|x| x.0)
        }
        Family::Counter(m) => RlDfa::materialize(
            arch0.clone(),
            counters,
            actions,
            |cs, a| Some(bump(m, cs, a.channel)),
            |cs| cs.iter().all(|&x| x == 0),
            GEN_STATE_CAP,
        )
        .map(|x| x.0),
    };
    built.ok()
}

/// A generated word; `undefined_at` is the index where the run stops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenWord {
    pub word: Vec<Action>,
    pub undefined_at: Option<usize>,
}

/// Words of length at most `max_len`: every defined word when there are at
/// most `budget` of them, seeded random walks otherwise; about a fifth of the
/// random words end with an undefined action at a known index.
pub fn gen_words(dfa: &RlDfa, graph: &ConfigGraph, max_len: usize, budget: usize, rng: &mut impl Rng) -> Vec<GenWord> {
    if let Some(all) = all_defined_words(graph, max_len, budget) {
        return all.into_iter().map(|word| GenWord { word, undefined_at: None }).collect();
    }
    let universe = alphabet(dfa.arch0().n(), dfa.arch0().channel_count());
    let mut out = vec![GenWord { word: Vec::new(), undefined_at: None }];
    while out.len() < budget {
        let len = rng.gen_range(1..=max_len.max(1));
        let broken = rng.gen_bool(0.2);
        let mut word = Vec::with_capacity(len);
        let mut at = ConfigId(0);
        let mut undefined_at = None;
        for i in 0..len {
            if broken && i + 1 == len {
                let defined: HashSet<Action> = graph.successors(at).iter().map(|x| x.0).collect();
                let pick = universe.iter().copied().filter(|a| !defined.contains(a)).collect::<Vec<_>>();
                if let Some(&a) = pick.choose(rng) {
                    word.push(a);
                    undefined_at = Some(i);
                }
                break;
            }
            let Some(&(a, next)) = graph.successors(at).choose(rng) else { break };
            word.push(a);
            at = next;
        }
        out.push(GenWord { word, undefined_at });
    }
    out
}

/// Every defined word up to `max_len`, or `None` if there are more than `budget`.
pub fn all_defined_words(graph: &ConfigGraph, max_len: usize, budget: usize) -> Option<Vec<Vec<Action>>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![(Vec::new(), ConfigId(0))];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, at) in &layer {
            for &(a, to) in graph.successors(*at) {
                let mut w2: Vec<Action> = w.clone();
                w2.push(a);
                next.push((w2, to));
                if out.len() + next.len() > budget {
                    return None;
                }
            }
        }
        out.extend(next.iter().map(|x| x.0.clone()));
        layer = next;
    }
    Some(out)
}

/// Outcome of one generated case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseReport {
    pub spec: GenSpec,
    pub states: usize,
    pub configs: usize,
    pub words: usize,
    pub undefined_words: usize,
    pub steps: usize,
    pub checks: [usize; Invariant::COUNT],
    /// Empty when the automaton was generated and found diamond closed.
    pub skipped: Option<String>,
    /// The first few violations, with their words.
    pub violations: Vec<(Vec<Action>, Violation)>,
    /// Violations per invariant, in [`Invariant::ALL`] order.
    pub violation_counts: [usize; Invariant::COUNT],
}

impl CaseReport {
    pub fn violation_count(&self) -> usize {
        self.violation_counts.iter().sum()
    }

    pub fn is_green_except(&self, ignored: &[Invariant]) -> bool {
        Invariant::ALL.iter().all(|inv| ignored.contains(inv) || self.violation_counts[*inv as usize] == 0)
    }
}

/// Generates the automaton of `spec` and `words` words, and runs them all in
/// lockstep.
pub fn run_case(spec: GenSpec, words: usize) -> CaseReport {
    let mut report = CaseReport {
        spec,
        states: 0,
        configs: 0,
        words: 0,
        undefined_words: 0,
        steps: 0,
        checks: [0; Invariant::COUNT],
        skipped: None,
        violations: Vec::new(),
        violation_counts: [0; Invariant::COUNT],
    };
    let dfa = match gen_dfa(&spec) {
        Ok(dfa) => Arc::new(dfa),
        Err(e) => {
            report.skipped = Some(e.to_string());
            return report;
        }
    };
    let diam = match Diam::new(dfa.clone()) {
        Ok(d) => Arc::new(d),
        Err(e) => {
            report.skipped = Some(e.to_string());
            return report;
        }
    };
    if let Err(cx) = check_diamond_in(diam.graph()) {
        report.skipped = Some(format!("not diamond closed: {cx}"));
        return report;
    }
    report.states = dfa.state_count();
    report.configs = diam.graph().len();
    let raa = DistributedRaa::with_diam(diam, false).expect("checked above");
    let mut rng = rng_for(spec.seed ^ 0x05ee_d0fa_110c);
    let words = gen_words(&dfa, raa.diam().graph(), spec.max_len, words, &mut rng);
    for w in &words {
        let trace = lockstep(&raa, &w.word);
        report.words += 1;
        report.undefined_words += trace.stopped.is_some() as usize;
        report.steps += trace.steps.len();
        for (acc, x) in report.checks.iter_mut().zip(trace.checks) {
            *acc += x;
        }
        for v in &trace.violations {
            report.violation_counts[v.invariant as usize] += 1;
        }
        for v in trace.violations.iter().take(3) {
            if report.violations.len() < 10 {
                report.violations.push((w.word.clone(), v.clone()));
            }
        }
    }
    report
}

/// Runs every spec in parallel; reports come back in input order.
pub fn run_suite(specs: &[GenSpec], words: usize) -> Vec<CaseReport> {
    specs.par_iter().map(|&spec| run_case(spec, words)).collect()
}
