//! Tree-like communication architectures.
//!
//! A [`Tca`] pairs a channel membership map ([`CommArch`]) with a rooted
//! spanning tree whose edges carry the labels `1..n`. Each process sees the
//! tree only through its [`Neighborhood`]: the label of its parent edge and the
//! labels of its child edges. [`make_tree`] and [`make_subtree`] rebuild a tree
//! from such local views.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ids::{ChannelId, ChannelSet, EdgeLabel, LabelSet, ProcSet, ProcessId, MAX_UNIVERSE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("process count {0} is outside 1..={MAX_UNIVERSE}")]
    ProcessCount(usize),
    #[error("channel count {0} is outside 1..={MAX_UNIVERSE}")]
    ChannelCount(usize),
    #[error("root {0} has a parent")]
    RootHasParent(ProcessId),
    #[error("process {0} has no parent and is not the root")]
    MissingParent(ProcessId),
    #[error("{0} is out of range")]
    OutOfRange(String),
    #[error("edge label {0} is used twice")]
    DuplicateLabel(EdgeLabel),
    #[error("parent relation has a cycle through {0}")]
    Cycle(ProcessId),
    #[error("channel membership and tree disagree on the process universe ({arch} vs {tree})")]
    UniverseMismatch { arch: usize, tree: usize },
    #[error("a single process cannot carry a channel")]
    SingleProcess,
    #[error("not a tree-like communication architecture: {0}")]
    Invalid(ValidationReport),
}

/// A rooted tree over `0..n` with edges labeled bijectively by `1..n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tree {
    root: ProcessId,
    parent: Vec<Option<(ProcessId, EdgeLabel)>>,
    by_label: Vec<ProcessId>,
}

impl Tree {
    /// Builds a tree from its parent map. `parent[p]` is `None` exactly for the root.
    pub fn new(root: ProcessId, parent: Vec<Option<(ProcessId, EdgeLabel)>>) -> Result<Tree, TopologyError> {
        let n = parent.len();
        if n == 0 || n > MAX_UNIVERSE {
            return Err(TopologyError::ProcessCount(n));
        }
        if root.index() >= n {
            return Err(TopologyError::OutOfRange(format!("root {root}")));
        }
        let mut by_label = vec![None; n];
        by_label[0] = Some(root);
        for (i, entry) in parent.iter().enumerate() {
            let p = ProcessId::new(i);
            match *entry {
                None if p != root => return Err(TopologyError::MissingParent(p)),
                Some(_) if p == root => return Err(TopologyError::RootHasParent(p)),
                None => {}
                Some((q, e)) => {
                    if q.index() >= n {
                        return Err(TopologyError::OutOfRange(format!("parent {q} of {p}")));
                    }
                    if e.is_root() || e.index() >= n {
                        return Err(TopologyError::OutOfRange(format!("edge label {} of {p}", e.0)));
                    }
                    if by_label[e.index()].replace(p).is_some() {
                        return Err(TopologyError::DuplicateLabel(e));
                    }
                }
            }
        }
        for start in 0..n {
            let mut p = ProcessId::new(start);
            let mut steps = 0;
            while let Some((q, _)) = parent[p.index()] {
                p = q;
                steps += 1;
                if steps > n {
                    return Err(TopologyError::Cycle(ProcessId::new(start)));
                }
            }
        }
        let by_label = by_label.into_iter().map(|p| p.expect("labels are a bijection")).collect();
        Ok(Tree { root, parent, by_label })
    }

    /// The single-node tree.
    pub fn singleton() -> Tree {
        Tree { root: ProcessId(0), parent: vec![None], by_label: vec![ProcessId(0)] }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> ProcessId {
        self.root
    }

    pub fn parent(&self, p: ProcessId) -> Option<ProcessId> {
        self.parent[p.index()].map(|(q, _)| q)
    }

    /// Label of the edge to the parent, `0` for the root.
    pub fn pedge(&self, p: ProcessId) -> EdgeLabel {
        self.parent[p.index()].map_or(EdgeLabel::ROOT, |(_, e)| e)
    }

    pub fn parent_entry(&self, p: ProcessId) -> Option<(ProcessId, EdgeLabel)> {
        self.parent[p.index()]
    }

    pub fn processes(&self) -> impl Iterator<Item = ProcessId> {
        (0..self.n()).map(ProcessId::new)
    }

    /// Children of `p` in ascending order of their edge label.
    pub fn children(&self, p: ProcessId) -> Vec<ProcessId> {
        (1..self.n()).map(|e| self.by_label[e]).filter(|&x| self.parent(x) == Some(p)).collect()
    }

    /// Tree neighbours of `p` (parent first, then children by label).
    pub fn neighbors(&self, p: ProcessId) -> Vec<ProcessId> {
        let mut out: Vec<ProcessId> = self.parent(p).into_iter().collect();
        out.extend(self.children(p));
        out
    }

    /// The label of the edge between `p` and `q`, if they are adjacent.
    pub fn edge_between(&self, p: ProcessId, q: ProcessId) -> Option<EdgeLabel> {
        match (self.parent[p.index()], self.parent[q.index()]) {
            (Some((pp, e)), _) if pp == q => Some(e),
            (_, Some((qp, e))) if qp == p => Some(e),
            _ => None,
        }
    }

    /// The process whose parent edge carries `e`; the root for `e = 0`.
    pub fn proc_from_label(&self, e: EdgeLabel) -> ProcessId {
        self.by_label[e.index()]
    }

    /// Iterates `(child, parent, label)` over all edges in label order.
    pub fn edges(&self) -> impl Iterator<Item = (ProcessId, ProcessId, EdgeLabel)> + '_ {
        (1..self.n()).map(move |e| {
            let child = self.by_label[e];
            (child, self.parent(child).unwrap(), EdgeLabel::new(e))
        })
    }

    /// Processes in the subtree rooted at `p` (including `p`).
    pub fn subtree(&self, p: ProcessId) -> ProcSet {
        let mut set = ProcSet::EMPTY;
        for x in self.processes() {
            let mut y = x;
            loop {
                if y == p {
                    set.insert(x);
                    break;
                }
                match self.parent(y) {
                    Some(z) => y = z,
                    None => break,
                }
            }
        }
        set
    }

    /// Whether the processes of `set` induce a connected subgraph.
    pub fn is_connected(&self, set: ProcSet) -> bool {
        match set.first() {
            None => true,
            Some(start) => self.component(set, start) == set,
        }
    }

    /// The connected component of `start` in the subgraph induced by `set`.
    pub fn component(&self, set: ProcSet, start: ProcessId) -> ProcSet {
        let mut seen = ProcSet::singleton(start);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if set.contains(y) && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub(crate) fn set_parent(&mut self, p: ProcessId, entry: Option<(ProcessId, EdgeLabel)>) {
        self.parent[p.index()] = entry;
        match entry {
            Some((_, e)) => self.by_label[e.index()] = p,
            None => {
                self.root = p;
                self.by_label[0] = p;
            }
        }
    }
}

/// Channel membership: for every channel, the processes listening to it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CommArch {
    members: Vec<ProcSet>,
}

impl CommArch {
    pub fn new(members: Vec<ProcSet>) -> Result<CommArch, TopologyError> {
        if members.is_empty() || members.len() > MAX_UNIVERSE {
            return Err(TopologyError::ChannelCount(members.len()));
        }
        Ok(CommArch { members })
    }

    pub fn channel_count(&self) -> usize {
        self.members.len()
    }

    pub fn channels(&self) -> impl Iterator<Item = ChannelId> {
        (0..self.members.len()).map(ChannelId::new)
    }

    pub fn members(&self, c: ChannelId) -> ProcSet {
        self.members[c.index()]
    }

    /// Channels `p` listens to.
    pub fn listening(&self, p: ProcessId) -> ChannelSet {
        self.channels().filter(|&c| self.members(c).contains(p)).collect()
    }

    /// Channels both `p` and `q` listen to.
    pub fn shared(&self, p: ProcessId, q: ProcessId) -> ChannelSet {
        self.channels().filter(|&c| self.members(c).contains(p) && self.members(c).contains(q)).collect()
    }

    pub(crate) fn members_mut(&mut self, c: ChannelId) -> &mut ProcSet {
        &mut self.members[c.index()]
    }
}

/// A violated condition of the tree-like architecture definition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    /// Channel with fewer than two members.
    TooFewMembers { channel: ChannelId, members: usize },
    /// Channel whose members are not connected in the tree; `between` are
    /// two members lying in different components.
    Disconnected { channel: ChannelId, between: (ProcessId, ProcessId) },
    /// Tree edge shared by no channel.
    Uncovered { edge: EdgeLabel, parent: ProcessId, child: ProcessId },
}

impl Violation {
    /// The condition number (1, 2 or 3).
    pub fn condition(&self) -> u8 {
        match self {
            Violation::TooFewMembers { .. } => 1,
            Violation::Disconnected { .. } => 2,
            Violation::Uncovered { .. } => 3,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewMembers { channel, members } => {
                write!(f, "channel {channel} has {members} member(s)")
            }
            Violation::Disconnected { channel, between: (p, q) } => {
                write!(f, "channel {channel} is disconnected between {p} and {q}")
            }
            Violation::Uncovered { edge, parent, child } => {
                write!(f, "edge {} ({parent},{child}) is covered by no channel", edge.0)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the three conditions: every channel has at least two members, every
/// channel's members are connected in the tree, and every tree edge is shared
/// by some channel. Violations are listed by condition, then channel or edge.
pub fn validate_tca(arch: &CommArch, tree: &Tree) -> Result<ValidationReport, TopologyError> {
    let n = tree.n();
    let all = ProcSet::full(n);
    for c in arch.channels() {
        if !arch.members(c).is_subset(all) {
            let top = arch.members(c).iter().last().unwrap().index() + 1;
            return Err(TopologyError::UniverseMismatch { arch: top, tree: n });
        }
    }
    let mut violations = Vec::new();
    for c in arch.channels() {
        let m = arch.members(c).len();
        if m < 2 {
            violations.push(Violation::TooFewMembers { channel: c, members: m });
        }
    }
    for c in arch.channels() {
        let members = arch.members(c);
        if let Some(p) = members.first() {
            let reach = tree.component(members, p);
            if let Some(q) = members.difference(reach).first() {
                violations.push(Violation::Disconnected { channel: c, between: (p, q) });
            }
        }
    }
    for (child, parent, edge) in tree.edges() {
        if arch.shared(child, parent).is_empty() {
            violations.push(Violation::Uncovered { edge, parent, child });
        }
    }
    Ok(ValidationReport { violations })
}

/// A valid tree-like communication architecture.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tca {
    arch: CommArch,
    tree: Tree,
}

impl Tca {
    pub fn new(arch: CommArch, tree: Tree) -> Result<Tca, TopologyError> {
        if tree.n() == 1 {
            return Err(TopologyError::SingleProcess);
        }
        let report = validate_tca(&arch, &tree)?;
        if !report.is_ok() {
            return Err(TopologyError::Invalid(report));
        }
        Ok(Tca { arch, tree })
    }

    /// Pairs the two parts without checking the definition.
    pub fn new_unchecked(arch: CommArch, tree: Tree) -> Tca {
        Tca { arch, tree }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_tca(&self.arch, &self.tree).expect("universes agree")
    }

    pub fn arch(&self) -> &CommArch {
        &self.arch
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn channel_count(&self) -> usize {
        self.arch.channel_count()
    }

    pub fn members(&self, c: ChannelId) -> ProcSet {
        self.arch.members(c)
    }

    pub fn listening(&self, p: ProcessId) -> ChannelSet {
        self.arch.listening(p)
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut CommArch, &mut Tree) {
        (&mut self.arch, &mut self.tree)
    }
}

/// A process's local view of the tree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Neighborhood {
    pub pedge: EdgeLabel,
    pub cedges: LabelSet,
}

/// The neighbourhood of every process, indexed by process.
pub fn neighborhoods(tree: &Tree) -> Vec<Neighborhood> {
    let mut out: Vec<Neighborhood> =
        tree.processes().map(|p| Neighborhood { pedge: tree.pedge(p), cedges: LabelSet::EMPTY }).collect();
    for (_, parent, e) in tree.edges() {
        out[parent.index()].cedges.insert(e);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeighborhoodError {
    #[error("empty family")]
    Empty,
    #[error("no root")]
    NoRoot,
    #[error("multiple roots")]
    MultipleRoots,
    #[error("duplicated pedge {}", .0.0)]
    DuplicatePedge(EdgeLabel),
    #[error("pedge {} appears in several cedges", .0.0)]
    SharedChild(EdgeLabel),
    #[error("cedge {} is nobody's pedge", .0.0)]
    DanglingChild(EdgeLabel),
    #[error("entry {0} lists its own pedge as a child edge")]
    SelfLoop(usize),
    #[error("cycle not reachable from the root")]
    Cycle,
    #[error("root pedge must be 0")]
    RootLabel,
    #[error("label {} out of range", .0.0)]
    LabelOutOfRange(EdgeLabel),
}

/// A tree over the positions of a neighbourhood family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubTree {
    pub root: usize,
    /// Parent position for every non-root entry.
    pub parent: Vec<Option<usize>>,
    /// Child positions in ascending order of their pedge.
    pub children: Vec<Vec<usize>>,
}

impl SubTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Whether positions `i` and `j` are adjacent.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.parent[i] == Some(j) || self.parent[j] == Some(i)
    }

    /// Positions of the subtree rooted at `i`, in preorder.
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.children[out[k]].iter().copied());
            k += 1;
        }
        out
    }
}

/// Rebuilds a tree from neighbourhoods of an arbitrary set of nodes.
///
/// Consistency: pedges are pairwise distinct, exactly one entry (the root) has
/// a pedge listed in no other entry's cedges, every other pedge is listed in
/// exactly one cedges, every listed cedge is some entry's pedge, and every
/// entry is reachable from the root.
pub fn make_subtree(family: &[Neighborhood]) -> Result<SubTree, NeighborhoodError> {
    if family.is_empty() {
        return Err(NeighborhoodError::Empty);
    }
    let mut by_pedge: HashMap<EdgeLabel, usize> = HashMap::with_capacity(family.len());
    for (i, nb) in family.iter().enumerate() {
        if by_pedge.insert(nb.pedge, i).is_some() {
            return Err(NeighborhoodError::DuplicatePedge(nb.pedge));
        }
        if nb.cedges.contains(nb.pedge) {
            return Err(NeighborhoodError::SelfLoop(i));
        }
    }
    let mut parent = vec![None; family.len()];
    for (i, nb) in family.iter().enumerate() {
        for e in nb.cedges.iter() {
            let Some(&j) = by_pedge.get(&e) else {
                return Err(NeighborhoodError::DanglingChild(e));
            };
            if parent[j].replace(i).is_some() {
                return Err(NeighborhoodError::SharedChild(e));
            }
        }
    }
    let mut roots = (0..family.len()).filter(|&i| parent[i].is_none());
    let root = roots.next().ok_or(NeighborhoodError::NoRoot)?;
    if roots.next().is_some() {
        return Err(NeighborhoodError::MultipleRoots);
    }
    let mut children = vec![Vec::new(); family.len()];
    for (i, nb) in family.iter().enumerate() {
        children[i] = nb.cedges.iter().map(|e| by_pedge[&e]).collect();
    }
    let tree = SubTree { root, parent, children };
    if tree.descendants(root).len() != family.len() {
        return Err(NeighborhoodError::Cycle);
    }
    Ok(tree)
}

/// Rebuilds the full tree over `0..family.len()` from every process's neighbourhood.
pub fn make_tree(family: &[Neighborhood]) -> Result<Tree, NeighborhoodError> {
    let n = family.len();
    for nb in family {
        for e in nb.cedges.iter().chain(std::iter::once(nb.pedge)) {
            if e.index() >= n {
                return Err(NeighborhoodError::LabelOutOfRange(e));
            }
        }
        if nb.cedges.contains(EdgeLabel::ROOT) {
            return Err(NeighborhoodError::SelfLoop(0));
        }
    }
    if family.iter().filter(|nb| nb.pedge.is_root()).count() > 1 {
        return Err(NeighborhoodError::MultipleRoots);
    }
    let sub = make_subtree(family)?;
    if !family[sub.root].pedge.is_root() {
        return Err(NeighborhoodError::RootLabel);
    }
    let parent = (0..n).map(|i| sub.parent[i].map(|j| (ProcessId::new(j), family[i].pedge))).collect();
    Ok(Tree::new(ProcessId::new(sub.root), parent).expect("consistent family yields a tree"))
}

/// The process whose parent edge carries `e` (the root for `e = 0`).
pub fn proc_from_label(tree: &Tree, e: EdgeLabel) -> ProcessId {
    tree.proc_from_label(e)
}
