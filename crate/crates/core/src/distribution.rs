//! Compiling a diamond-closed RL-DFA into a reconfigurable asynchronous
//! automaton.
//!
//! Every process keeps a pair of control states (the last one shared with its
//! parent and the newest one it knows), the channels it listens to, its
//! neighbourhood in the tree, and for each neighbour the channels shared with
//! it (`cc`) and the unheard channels lying beyond it (`dc`). On a
//! communication the participants exchange [`SyncData`], rebuild the subtree
//! of participants, recombine their states with `diamtree`, and update their
//! local picture of the architecture according to the operation.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ids::{ChannelId, ChannelSet, EdgeLabel, LabelSet, ProcSet, ProcessId};
use crate::raa::{GlobalState, Raa};
use crate::reconfig::{Action, Op};
use crate::rldfa::{
    check_diamond_in, Counterexample, Diam, DiamCall, DiamError, ExploreError, LabeledNode, LabeledTree, RlDfa, StateId,
};
use crate::topology::{make_subtree, make_tree, Neighborhood, NeighborhoodError, SubTree, Tca, Tree};

/// What one process knows.
///
/// `cc` and `dc` are indexed by edge label; entries outside `pcedges` are
/// empty, and so are both entries for label 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalState {
    pub s1: StateId,
    pub s2: StateId,
    pub listening: ChannelSet,
    pub pedge: EdgeLabel,
    pub cedges: LabelSet,
    pub cc: Vec<ChannelSet>,
    pub dc: Vec<ChannelSet>,
}

impl LocalState {
    /// The state `p` holds in `tca` with control states `s1`, `s2`.
    pub fn from_tca(tca: &Tca, p: ProcessId, s1: StateId, s2: StateId) -> LocalState {
        let tree = tca.tree();
        let n = tca.n();
        let listening = tca.listening(p);
        let unheard = ChannelSet::full(tca.channel_count()).difference(listening);
        let mut cc = vec![ChannelSet::EMPTY; n];
        let mut dc = vec![ChannelSet::EMPTY; n];
        let mut cedges = LabelSet::EMPTY;
        let beyond =
            |side: ProcSet| -> ChannelSet { unheard.iter().filter(|&c| !tca.members(c).is_disjoint(side)).collect() };
        for q in tree.children(p) {
            let e = tree.pedge(q);
            cedges.insert(e);
            cc[e.index()] = tca.arch().shared(p, q);
            dc[e.index()] = beyond(tree.subtree(q));
        }
        if let Some((q, e)) = tree.parent_entry(p) {
            cc[e.index()] = tca.arch().shared(p, q);
            dc[e.index()] = beyond(ProcSet::full(n).difference(tree.subtree(p)));
        }
        LocalState { s1, s2, listening, pedge: tree.pedge(p), cedges, cc, dc }
    }

    pub fn cc(&self, e: EdgeLabel) -> ChannelSet {
        self.cc[e.index()]
    }

    pub fn dc(&self, e: EdgeLabel) -> ChannelSet {
        self.dc[e.index()]
    }

    /// The parent edge (unless root) followed by the child edges.
    pub fn pcedges(&self) -> LabelSet {
        if self.pedge.is_root() {
            self.cedges
        } else {
            self.cedges.with(self.pedge)
        }
    }

    pub fn neighborhood(&self) -> Neighborhood {
        Neighborhood { pedge: self.pedge, cedges: self.cedges }
    }

    /// Child edges along which `c` is shared.
    pub fn cedges_on(&self, c: ChannelId) -> LabelSet {
        self.cedges.iter().filter(|&e| self.cc(e).contains(c)).collect()
    }

    /// Whether the process is the topmost listener of `c`.
    pub fn tops(&self, c: ChannelId) -> bool {
        !self.cc(self.pedge).contains(c)
    }

    fn clear_edge(&mut self, e: EdgeLabel) {
        self.cc[e.index()] = ChannelSet::EMPTY;
        self.dc[e.index()] = ChannelSet::EMPTY;
    }

    /// Number of bits [`LocalState::encode`] uses.
    pub fn encoded_bits(state_count: usize, n: usize, k: usize) -> usize {
        2 * ceil_log2(state_count) + ceil_log2(n) + (n - 1) + k * (1 + 2 * n)
    }

    /// Fixed-width binary encoding: both control states, the parent edge, the
    /// child edges, and per channel whether it is heard and the edges whose
    /// `cc` and `dc` contain it.
    pub fn encode(&self, state_count: usize, n: usize, k: usize) -> Vec<bool> {
        let mut out = Vec::with_capacity(Self::encoded_bits(state_count, n, k));
        let mut push = |v: usize, width: usize| out.extend((0..width).map(|b| v >> b & 1 == 1));
        push(self.s1.index(), ceil_log2(state_count));
        push(self.s2.index(), ceil_log2(state_count));
        push(self.pedge.index(), ceil_log2(n));
        for e in 1..n {
            push(self.cedges.contains(EdgeLabel::new(e)) as usize, 1);
        }
        for c in 0..k {
            let c = ChannelId::new(c);
            push(self.listening.contains(c) as usize, 1);
            for e in 0..n {
                push(self.cc[e].contains(c) as usize, 1);
            }
            for e in 0..n {
                push(self.dc[e].contains(c) as usize, 1);
            }
        }
        out
    }

    pub fn decode(bits: &[bool], state_count: usize, n: usize, k: usize) -> Option<LocalState> {
        if bits.len() != Self::encoded_bits(state_count, n, k) {
            return None;
        }
        let mut pos = 0;
        let mut take = |width: usize| {
            let v = (0..width).fold(0usize, |acc, b| acc | (bits[pos + b] as usize) << b);
            pos += width;
            v
        };
        let s1 = StateId(take(ceil_log2(state_count)) as u32);
        let s2 = StateId(take(ceil_log2(state_count)) as u32);
        let pedge = EdgeLabel::new(take(ceil_log2(n)));
        let cedges = (1..n).filter(|_| take(1) == 1).map(EdgeLabel::new).collect();
        let mut listening = ChannelSet::EMPTY;
        let mut cc = vec![ChannelSet::EMPTY; n];
        let mut dc = vec![ChannelSet::EMPTY; n];
        for c in 0..k {
            let c = ChannelId::new(c);
            if take(1) == 1 {
                listening.insert(c);
            }
            for set in cc.iter_mut() {
                if take(1) == 1 {
                    set.insert(c);
                }
            }
            for set in dc.iter_mut() {
                if take(1) == 1 {
                    set.insert(c);
                }
            }
        }
        Some(LocalState { s1, s2, listening, pedge, cedges, cc, dc })
    }
}

fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

impl fmt::Display for LocalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<({}, {}), {}, ({}, {}), cc[", self.s1, self.s2, self.listening, self.pedge, self.cedges)?;
        for (i, e) in self.pcedges().iter().enumerate() {
            write!(f, "{}{e}:{}", if i > 0 { " " } else { "" }, self.cc(e))?;
        }
        write!(f, "], dc[")?;
        for (i, e) in self.pcedges().iter().enumerate() {
            write!(f, "{}{e}:{}", if i > 0 { " " } else { "" }, self.dc(e))?;
        }
        write!(f, "]>")
    }
}

/// The initial local state of `p`.
pub fn initial_local_state(dfa: &RlDfa, p: ProcessId) -> LocalState {
    LocalState::from_tca(dfa.arch0(), p, dfa.initial(), dfa.initial())
}

/// One participant's contribution to a communication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SyncEntry {
    pub s1: StateId,
    pub s2: StateId,
    pub pedge: EdgeLabel,
    pub cedges: LabelSet,
    /// Unheard channels of the parent found below this entry.
    pub c: ChannelSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SyncData(pub Vec<SyncEntry>);

impl SyncData {
    pub fn position(&self, pedge: EdgeLabel) -> Option<usize> {
        self.0.iter().position(|x| x.pedge == pedge)
    }

    pub fn neighborhoods(&self) -> Vec<Neighborhood> {
        self.0.iter().map(|x| Neighborhood { pedge: x.pedge, cedges: x.cedges }).collect()
    }

    /// The subtree spanned by the entries.
    pub fn treesync(&self) -> Result<SubTree, NeighborhoodError> {
        make_subtree(&self.neighborhoods())
    }

    pub fn labeled(&self, shape: SubTree) -> LabeledTree {
        let nodes = self.0.iter().map(|x| LabeledNode { s1: x.s1, s2: x.s2, c: x.c }).collect();
        LabeledTree { nodes, shape }
    }
}

/// Data attached to a communication.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DataValue {
    /// Nop, disconnect, and acceptance.
    Sync(SyncData),
    /// Swap: channels shared by the parent and grandparent, and the unheard
    /// channels of the parent lying beyond the grandparent.
    SyncCD { sync: SyncData, c: ChannelSet, d: ChannelSet },
    /// Move of a participating process: channels it shares with its parent.
    SyncC { sync: SyncData, c: ChannelSet },
    /// Move of a non-participating process: channels it shares with its
    /// parent, the parent's unheard channels below it, and the parent's pedge.
    SyncCDE { sync: SyncData, c: ChannelSet, d: ChannelSet, origin: EdgeLabel },
    /// Connect: pedge of the inviting neighbour.
    SyncE { sync: SyncData, e: EdgeLabel },
}

impl DataValue {
    pub fn sync(&self) -> &SyncData {
        match self {
            DataValue::Sync(sync)
            | DataValue::SyncCD { sync, .. }
            | DataValue::SyncC { sync, .. }
            | DataValue::SyncCDE { sync, .. }
            | DataValue::SyncE { sync, .. } => sync,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DataValue::Sync(_) => "sync",
            DataValue::SyncCD { .. } => "sync+C+D",
            DataValue::SyncC { .. } => "sync+C",
            DataValue::SyncCDE { .. } => "sync+C+D+e",
            DataValue::SyncE { .. } => "sync+e",
        }
    }
}

/// Why a process refuses a communication.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Block {
    #[error("does not listen to {0}")]
    NotListening(ChannelId),
    #[error("sync data has {0} entries")]
    EntryCount(usize),
    #[error("sync data is not a subtree: {0}")]
    Treesync(NeighborhoodError),
    #[error("no entry matches the local state")]
    NoOwnEntry,
    #[error("child edge {} disagrees with the sync data", .0.0)]
    ChildMismatch(EdgeLabel),
    #[error("{op} expects other data than {got}")]
    DataKind { op: &'static str, got: &'static str },
    #[error("edge {} is not in the communicating subtree", .0.0)]
    NotInSubtree(EdgeLabel),
    #[error("edges {} and {} are not adjacent in the communicating subtree", .0.0, .1.0)]
    NotAdjacent(EdgeLabel, EdgeLabel),
    #[error("bad edge arguments")]
    BadEdges,
    #[error("channel sets in the data disagree with the local state")]
    SideData,
    #[error("does not hear all of {0}")]
    NotHeard(ChannelSet),
    #[error("already listens to {0}")]
    AlreadyListening(ChannelId),
    #[error("inviter does not listen to {0}")]
    NoInvite(ChannelId),
    #[error("process {} is not at the boundary of the subtree", .0.0)]
    NotBoundary(EdgeLabel),
    #[error("no other channel along edge {}", .0.0)]
    NoOtherChannel(EdgeLabel),
    #[error("communicating subtree has {0} members")]
    TooSmall(usize),
    #[error(transparent)]
    Diam(#[from] DiamError),
    #[error("no transition on the recombined state {0}")]
    NoTransition(StateId),
}

/// Checks that `sync` is consistent with `s` for channel `c`.
pub fn check_consistent(sync: &SyncData, s: &LocalState, c: ChannelId) -> Result<SubTree, Block> {
    if !s.listening.contains(c) {
        return Err(Block::NotListening(c));
    }
    if sync.0.len() < 2 {
        return Err(Block::EntryCount(sync.0.len()));
    }
    let shape = sync.treesync().map_err(Block::Treesync)?;
    let own = sync.position(s.pedge).ok_or(Block::NoOwnEntry)?;
    let entry = sync.0[own];
    if (entry.s1, entry.s2) != (s.s1, s.s2) || entry.cedges != s.cedges_on(c) {
        return Err(Block::NoOwnEntry);
    }
    for e in entry.cedges.iter() {
        match sync.position(e) {
            Some(j) if sync.0[j].c == s.dc(e) => {}
            _ => return Err(Block::ChildMismatch(e)),
        }
    }
    Ok(shape)
}

pub fn consistent(sync: &SyncData, s: &LocalState, c: ChannelId) -> bool {
    check_consistent(sync, s, c).is_ok()
}

/// The canonical data of the listeners of `c`: one entry per listener in
/// ascending pedge order, each child-edge set restricted to `c`, and each
/// entry carrying its listening parent's `dc` toward it (empty at the top).
pub fn build_sync(locals: &[LocalState], c: ChannelId) -> SyncData {
    let mut entries: Vec<SyncEntry> = locals
        .iter()
        .filter(|s| s.listening.contains(c))
        .map(|s| SyncEntry { s1: s.s1, s2: s.s2, pedge: s.pedge, cedges: s.cedges_on(c), c: ChannelSet::EMPTY })
        .collect();
    entries.sort_by_key(|x| x.pedge);
    for s in locals.iter().filter(|s| s.listening.contains(c)) {
        for e in s.cedges_on(c).iter() {
            if let Some(x) = entries.iter_mut().find(|x| x.pedge == e) {
                x.c = s.dc(e);
            }
        }
    }
    SyncData(entries)
}

/// The process whose child edges contain `e`.
fn holder(locals: &[LocalState], e: EdgeLabel) -> Option<&LocalState> {
    locals.iter().find(|s| s.cedges.contains(e))
}

/// The data every participant would agree on for `a`, computed from the
/// global state.
pub fn propose_data(locals: &[LocalState], a: Action) -> DataValue {
    let c = a.channel;
    let sync = build_sync(locals, c);
    match a.op {
        Op::Nop | Op::Disc(_) => DataValue::Sync(sync),
        Op::Swap(e) => {
            let (c, d) = match holder(locals, e) {
                Some(q) => (q.cc(q.pedge), q.dc(q.pedge)),
                None => (ChannelSet::EMPTY, ChannelSet::EMPTY),
            };
            DataValue::SyncCD { sync, c, d }
        }
        Op::Move(e, _) => {
            let q2 = holder(locals, e);
            let cs = q2.map_or(ChannelSet::EMPTY, |q| q.cc(e));
            let participates = locals.iter().any(|s| s.pedge == e && s.listening.contains(c));
            if participates {
                DataValue::SyncC { sync, c: cs }
            } else {
                let d = q2.map_or(ChannelSet::EMPTY, |q| q.dc(e));
                let origin = q2.map_or(e, |q| q.pedge);
                DataValue::SyncCDE { sync, c: cs, d, origin }
            }
        }
        Op::Connect(e, joined) => {
            let inviter = locals.iter().find(|s| s.pedge == e).and_then(|p| {
                locals
                    .iter()
                    .filter_map(|q| {
                        let edge = if q.cedges.contains(e) {
                            e
                        } else if p.cedges.contains(q.pedge) {
                            q.pedge
                        } else {
                            return None;
                        };
                        (q.listening.contains(c) && q.listening.contains(joined)).then_some((edge, q.pedge))
                    })
                    .min()
            });
            DataValue::SyncE { sync, e: inviter.map_or(e, |x| x.1) }
        }
    }
}

/// The recombined newest state of the participants.
pub fn state_from_sync(diam: &Diam, sync: &SyncData) -> Result<StateId, DiamError> {
    let shape = sync.treesync().map_err(|_| DiamError::EmptyTree)?;
    diam.diamtree(&sync.labeled(shape))
}

/// [`state_from_sync`], recording each diam evaluation.
pub fn state_from_sync_traced(diam: &Diam, sync: &SyncData, calls: &mut Vec<DiamCall>) -> Result<StateId, DiamError> {
    let shape = sync.treesync().map_err(|_| DiamError::EmptyTree)?;
    diam.diamtree_traced(&sync.labeled(shape), calls)
}

/// The transition of one listener of `a.channel`.
pub fn local_step(diam: &Diam, s: &LocalState, d: &DataValue, a: Action) -> Result<LocalState, Block> {
    let c = a.channel;
    let sync = d.sync();
    let shape = check_consistent(sync, s, c)?;
    let pos = |e: EdgeLabel| sync.position(e);
    let wrong = |op| Err(Block::DataKind { op, got: d.kind() });
    let n = s.cc.len();
    let in_range = |e: EdgeLabel| e.index() < n;

    // Operation-specific conditions, checked before the recombination.
    match (a.op, d) {
        (Op::Nop, DataValue::Sync(_)) => {}
        (Op::Nop, _) => return wrong("nop"),
        (Op::Swap(e), DataValue::SyncCD { c: cs, d: ds, .. }) => {
            if e.is_root() || !in_range(e) {
                return Err(Block::BadEdges);
            }
            match pos(e) {
                Some(i) if shape.parent[i].is_some() => {}
                _ => return Err(Block::NotInSubtree(e)),
            }
            if s.cedges.contains(e) && (*cs != s.cc(s.pedge) || *ds != s.dc(s.pedge)) {
                return Err(Block::SideData);
            }
            if s.pedge == e && !cs.is_subset(s.listening) {
                return Err(Block::NotHeard(*cs));
            }
        }
        (Op::Swap(_), _) => return wrong("swap"),
        (Op::Move(e, e2), DataValue::SyncC { c: cs, .. } | DataValue::SyncCDE { c: cs, .. }) => {
            if e.is_root() || e == e2 || !in_range(e) || !in_range(e2) {
                return Err(Block::BadEdges);
            }
            let q = pos(e2).ok_or(Block::NotInSubtree(e2))?;
            let (old_parent, ds) = match (d, pos(e)) {
                (DataValue::SyncC { .. }, Some(i)) => (shape.parent[i].ok_or(Block::NotInSubtree(e))?, None),
                (DataValue::SyncCDE { d: ds, origin, .. }, None) => {
                    (pos(*origin).ok_or(Block::NotInSubtree(*origin))?, Some(*ds))
                }
                _ => return wrong("move"),
            };
            if old_parent == q || !shape.adjacent(old_parent, q) {
                return Err(Block::NotAdjacent(sync.0[old_parent].pedge, e2));
            }
            let holds = s.cedges.contains(e);
            if holds != (s.pedge == sync.0[old_parent].pedge) {
                return Err(Block::BadEdges);
            }
            if holds && (*cs != s.cc(e) || ds.is_some_and(|ds| ds != s.dc(e))) {
                return Err(Block::SideData);
            }
            if s.pedge == e2 && !cs.is_subset(s.listening) {
                return Err(Block::NotHeard(*cs));
            }
        }
        (Op::Move(..), _) => return wrong("move"),
        (Op::Connect(e, joined), DataValue::SyncE { e: e2, .. }) => {
            if !in_range(e) {
                return Err(Block::BadEdges);
            }
            match (pos(e), pos(*e2)) {
                (Some(i), Some(j)) if shape.adjacent(i, j) => {}
                _ => return Err(Block::NotAdjacent(e, *e2)),
            }
            if s.pedge == e && s.listening.contains(joined) {
                return Err(Block::AlreadyListening(joined));
            }
            if s.pedge == *e2 && !s.listening.contains(joined) {
                return Err(Block::NoInvite(joined));
            }
        }
        (Op::Connect(..), _) => return wrong("connect"),
        (Op::Disc(e), DataValue::Sync(_)) => {
            let i = pos(e).ok_or(Block::NotInSubtree(e))?;
            let epq = disc_edge(sync, &shape, i).ok_or(Block::NotBoundary(e))?;
            if s.pcedges().contains(epq) && s.cc(epq).without(c).is_empty() {
                return Err(Block::NoOtherChannel(epq));
            }
            if sync.0.len() < 3 {
                return Err(Block::TooSmall(sync.0.len()));
            }
        }
        (Op::Disc(_), _) => return wrong("disconnect"),
    }

    let from = diam.diamtree(&sync.labeled(shape.clone()))?;
    let s_new = diam.dfa().delta(from, a).ok_or(Block::NoTransition(from))?;
    let mut next = s.clone();
    next.s1 = if s.tops(c) { s.s1 } else { s_new };
    next.s2 = s_new;

    match (a.op, d) {
        (Op::Swap(e), DataValue::SyncCD { c: cs, d: ds, .. }) => {
            let i = pos(e).unwrap();
            let q = sync.0[shape.parent[i].unwrap()];
            let q_pedge = q.pedge;
            if s.pedge == e {
                // p takes over q's cut toward the grandparent, q now hangs
                // below p which it just talked to.
                if !cs.contains(c) {
                    next.s1 = q.s1;
                }
                next.pedge = q_pedge;
                next.cedges.insert(e);
                next.dc[e.index()] = s.dc(e).difference(*ds);
                if !q_pedge.is_root() {
                    next.cc[q_pedge.index()] = *cs;
                    next.dc[q_pedge.index()] = *ds;
                }
            } else if s.cedges.contains(e) {
                next.s1 = s_new;
                next.clear_edge(s.pedge);
                next.pedge = e;
                next.cedges.remove(e);
                next.dc[e.index()] = s.dc(e).union(*ds);
            }
        }
        (Op::Move(e, e2), DataValue::SyncC { c: cs, .. } | DataValue::SyncCDE { c: cs, .. }) => {
            let moved = match d {
                DataValue::SyncCDE { d: ds, .. } => *ds,
                _ => sync.0[pos(e).unwrap()].c,
            };
            if s.pedge == e2 {
                for set in next.dc.iter_mut() {
                    *set = set.difference(moved);
                }
                next.cedges.insert(e);
                next.cc[e.index()] = *cs;
                next.dc[e.index()] = moved;
            } else if s.cedges.contains(e) {
                let toward = if s.cedges.contains(e2) { e2 } else { s.pedge };
                next.cedges.remove(e);
                next.clear_edge(e);
                next.dc[toward.index()] = s.dc(toward).union(moved);
            }
        }
        (Op::Connect(e, joined), DataValue::SyncE { e: e2, .. }) => {
            let epq = if s.pedge == e {
                if s.cedges.contains(*e2) {
                    *e2
                } else {
                    e
                }
            } else if s.cedges.contains(e) {
                e
            } else {
                *e2
            };
            if s.pedge == e {
                next.listening.insert(joined);
                next.cc[epq.index()].insert(joined);
                next.dc[epq.index()].remove(joined);
            } else if s.pedge == *e2 {
                next.cc[epq.index()].insert(joined);
            }
        }
        (Op::Disc(e), DataValue::Sync(_)) => {
            let i = pos(e).unwrap();
            let epq = disc_edge(sync, &shape, i).unwrap();
            let q = if shape.parent[i].is_some() { shape.parent[i].unwrap() } else { shape.children[i][0] };
            if s.pedge == e {
                next.listening.remove(c);
                next.cc[epq.index()].remove(c);
                next.dc[epq.index()].insert(c);
            } else if s.pedge == sync.0[q].pedge {
                next.cc[epq.index()].remove(c);
            }
        }
        _ => {}
    }
    Ok(next)
}

/// The edge joining the entry at `i` to its only neighbour in the subtree,
/// if it has exactly one.
fn disc_edge(sync: &SyncData, shape: &SubTree, i: usize) -> Option<EdgeLabel> {
    match (shape.parent[i], shape.children[i].as_slice()) {
        (Some(_), []) => Some(sync.0[i].pedge),
        (None, [j]) => Some(sync.0[*j].pedge),
        _ => None,
    }
}

/// The global synchronization data: entry `i` belongs to the process with
/// pedge `i`, with full child edges and its parent's `dc` toward it.
/// `None` if the pedges are not a permutation of `0..n`.
pub fn global_sync(locals: &[LocalState]) -> Option<SyncData> {
    let n = locals.len();
    let mut slots: Vec<Option<SyncEntry>> = vec![None; n];
    for s in locals {
        let slot = slots.get_mut(s.pedge.index())?;
        if slot.is_some() {
            return None;
        }
        *slot = Some(SyncEntry { s1: s.s1, s2: s.s2, pedge: s.pedge, cedges: s.cedges, c: ChannelSet::EMPTY });
    }
    let mut entries: Vec<SyncEntry> = slots.into_iter().collect::<Option<_>>()?;
    for s in locals {
        for e in s.cedges.iter() {
            entries.get_mut(e.index())?.c = s.dc(e);
        }
    }
    Some(SyncData(entries))
}

/// Whether `sync` is the global synchronization data as seen by `s`.
pub fn globally_consistent(sync: &SyncData, s: &LocalState) -> bool {
    let n = sync.0.len();
    if sync.0.iter().enumerate().any(|(i, x)| x.pedge.index() != i) || make_tree(&sync.neighborhoods()).is_err() {
        return false;
    }
    let Some(own) = sync.0.get(s.pedge.index()) else { return false };
    (own.s1, own.s2, own.cedges) == (s.s1, s.s2, s.cedges)
        && s.cedges.iter().all(|e| e.index() < n && sync.0[e.index()].c == s.dc(e))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributeError {
    #[error("not diamond closed: {0}")]
    NotDiamond(Box<Counterexample>),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("transition {0} is not a nop")]
    NotFixed(Action),
}

/// The distributed automaton.
pub struct DistributedRaa {
    diam: Arc<Diam>,
}

/// Builds the distributed automaton, rejecting automata that are not diamond
/// closed when `check` is set.
pub fn distribute(dfa: Arc<RlDfa>, check: bool) -> Result<DistributedRaa, DistributeError> {
    let diam = Arc::new(Diam::new(dfa)?);
    DistributedRaa::with_diam(diam, check)
}

impl DistributedRaa {
    pub fn with_diam(diam: Arc<Diam>, check: bool) -> Result<DistributedRaa, DistributeError> {
        if check {
            check_diamond_in(diam.graph()).map_err(|cx| DistributeError::NotDiamond(Box::new(cx)))?;
        }
        Ok(DistributedRaa { diam })
    }

    pub fn diam(&self) -> &Diam {
        &self.diam
    }

    pub fn dfa(&self) -> &RlDfa {
        self.diam.dfa()
    }

    /// The tree assembled from every process's neighbourhood.
    pub fn tree(g: &GlobalState<LocalState>) -> Result<Tree, NeighborhoodError> {
        make_tree(&g.0.iter().map(LocalState::neighborhood).collect::<Vec<_>>())
    }

    /// The control state the processes jointly know.
    pub fn decode_state(&self, g: &GlobalState<LocalState>) -> Option<StateId> {
        let sync = global_sync(&g.0)?;
        state_from_sync(&self.diam, &sync).ok()
    }

    pub fn propose(&self, g: &GlobalState<LocalState>, a: Action) -> DataValue {
        propose_data(&g.0, a)
    }
}

impl Raa for DistributedRaa {
    type State = LocalState;
    type Data = DataValue;
    type Block = Block;

    fn process_count(&self) -> usize {
        self.dfa().arch0().n()
    }

    fn initial_state(&self, p: ProcessId) -> LocalState {
        initial_local_state(self.dfa(), p)
    }

    fn listening(&self, _: ProcessId, s: &LocalState) -> ChannelSet {
        s.listening
    }

    fn transition(&self, _: ProcessId, s: &LocalState, d: &DataValue, a: Action) -> Result<LocalState, Block> {
        local_step(&self.diam, s, d, a)
    }

    fn accepting(&self, _: ProcessId, s: &LocalState, d: &DataValue) -> bool {
        let DataValue::Sync(sync) = d else { return false };
        globally_consistent(sync, s) && state_from_sync(&self.diam, sync).is_ok_and(|r| self.dfa().is_accepting(r))
    }

    fn acceptance_candidate(&self, g: &GlobalState<LocalState>) -> Option<DataValue> {
        let sync = global_sync(&g.0)?;
        g.0.iter().all(|s| globally_consistent(&sync, s)).then_some(DataValue::Sync(sync))
    }
}

/// The distributed automaton for a fixed architecture: processes keep only
/// their pair of control states.
pub struct FixedRaa {
    inner: DistributedRaa,
    frozen: Vec<LocalState>,
}

/// Builds [`FixedRaa`]; every transition of `dfa` must be a nop.
pub fn specialize_fixed(dfa: Arc<RlDfa>, check: bool) -> Result<FixedRaa, DistributeError> {
    if let Some(&(a, _)) = dfa.states().flat_map(|s| dfa.transitions(s)).find(|(a, _)| !a.op.is_nop()) {
        return Err(DistributeError::NotFixed(a));
    }
    let inner = distribute(dfa, check)?;
    let frozen = (0..inner.process_count()).map(|p| inner.initial_state(ProcessId::new(p))).collect();
    Ok(FixedRaa { inner, frozen })
}

impl FixedRaa {
    fn expand(&self, p: ProcessId, s: (StateId, StateId)) -> LocalState {
        LocalState { s1: s.0, s2: s.1, ..self.frozen[p.index()].clone() }
    }

    fn expand_all(&self, g: &GlobalState<(StateId, StateId)>) -> Vec<LocalState> {
        g.0.iter().enumerate().map(|(i, &s)| self.expand(ProcessId::new(i), s)).collect()
    }

    pub fn diam(&self) -> &Diam {
        self.inner.diam()
    }

    pub fn propose(&self, g: &GlobalState<(StateId, StateId)>, a: Action) -> DataValue {
        propose_data(&self.expand_all(g), a)
    }
}

impl Raa for FixedRaa {
    type State = (StateId, StateId);
    type Data = DataValue;
    type Block = Block;

    fn process_count(&self) -> usize {
        self.frozen.len()
    }

    fn initial_state(&self, p: ProcessId) -> (StateId, StateId) {
        let s = &self.frozen[p.index()];
        (s.s1, s.s2)
    }

    fn listening(&self, p: ProcessId, _: &(StateId, StateId)) -> ChannelSet {
        self.frozen[p.index()].listening
    }

    fn transition(
        &self,
        p: ProcessId,
        s: &(StateId, StateId),
        d: &DataValue,
        a: Action,
    ) -> Result<(StateId, StateId), Block> {
        if !a.op.is_nop() {
            return Err(Block::DataKind { op: a.op.kind(), got: d.kind() });
        }
        let next = local_step(self.inner.diam(), &self.expand(p, *s), d, a)?;
        Ok((next.s1, next.s2))
    }

    fn accepting(&self, p: ProcessId, s: &(StateId, StateId), d: &DataValue) -> bool {
        self.inner.accepting(p, &self.expand(p, *s), d)
    }

    fn acceptance_candidate(&self, g: &GlobalState<(StateId, StateId)>) -> Option<DataValue> {
        self.inner.acceptance_candidate(&GlobalState(self.expand_all(g)))
    }
}

/// Runs a distributed automaton on `word`, proposing canonical data at every
/// step, and reports whether the final global state accepts.
pub fn accepts_word<R, F>(raa: &R, word: &[Action], propose: F) -> bool
where
    R: Raa,
    F: FnMut(&GlobalState<R::State>, Action) -> R::Data,
{
    let mut propose = propose;
    let run = crate::raa::run_with(raa, word.len(), |i, g| (propose(g, word[i]), word[i]));
    run.is_defined() && crate::raa::accepts(raa, run.last()).is_some()
}
