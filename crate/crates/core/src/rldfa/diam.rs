//! Recombining the states of two independent parts of a run.
//!
//! `diam(s, s1, s2, C)` is the state reached from `s` after two independent
//! words, the first leading to `s1` and the second, over channels `C`,
//! leading to `s2`. It is computed by searching for witness words: a
//! reachable configuration with state `s`, a tree edge separating the two
//! parts, a word over `C` on one side reaching `s2` and a word on the other
//! side reaching `s1`. The answer is then `s1` followed by the `C`-word.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use super::explore::{ConfigGraph, ConfigId, ExploreError, DEFAULT_CONFIG_CAP};
use super::{RlDfa, StateId};
use crate::ids::{ChannelSet, ProcSet};
use crate::reconfig::Action;
use crate::topology::{SubTree, Tca};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiamError {
    #[error("no witness for diam({s}, {s1}, {s2}, {c})")]
    NotRealizable { s: StateId, s1: StateId, s2: StateId, c: ChannelSet },
    #[error("empty labeled tree")]
    EmptyTree,
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabeledNode {
    pub s1: StateId,
    pub s2: StateId,
    pub c: ChannelSet,
}

/// A tree whose nodes carry a pair of states and a channel set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTree {
    pub nodes: Vec<LabeledNode>,
    pub shape: SubTree,
}

/// One diam evaluation inside [`Diam::diamtree_traced`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiamCall {
    pub s: StateId,
    pub s1: StateId,
    pub s2: StateId,
    pub c: ChannelSet,
    pub result: StateId,
    /// Node positions whose joint state the call computes.
    pub covered: Vec<usize>,
}

/// Breadth-first reachability on one side of a split.
struct SideReach {
    prev: HashMap<ConfigId, (ConfigId, Action)>,
    first: HashMap<StateId, ConfigId>,
}

impl SideReach {
    fn word_to(&self, s: StateId) -> Option<Vec<Action>> {
        let mut id = *self.first.get(&s)?;
        let mut word = Vec::new();
        while let Some(&(from, a)) = self.prev.get(&id) {
            word.push(a);
            id = from;
        }
        word.reverse();
        Some(word)
    }
}

type Query = (StateId, StateId, StateId, ChannelSet);

/// diam evaluator over the reachable configurations of one automaton.
/// Results are memoized; the memo tables may be shared between threads.
pub struct Diam {
    dfa: Arc<RlDfa>,
    graph: ConfigGraph,
    memo: RwLock<HashMap<Query, Option<StateId>>>,
    sides: RwLock<HashMap<(ConfigId, ProcSet, ChannelSet), Arc<SideReach>>>,
}

impl Diam {
    pub fn new(dfa: Arc<RlDfa>) -> Result<Diam, ExploreError> {
        let graph = ConfigGraph::explore(&dfa, DEFAULT_CONFIG_CAP)?;
        Ok(Diam::with_graph(dfa, graph))
    }

    pub fn with_graph(dfa: Arc<RlDfa>, graph: ConfigGraph) -> Diam {
        Diam { dfa, graph, memo: RwLock::new(HashMap::new()), sides: RwLock::new(HashMap::new()) }
    }

    pub fn dfa(&self) -> &RlDfa {
        &self.dfa
    }

    pub fn dfa_arc(&self) -> &Arc<RlDfa> {
        &self.dfa
    }

    pub fn graph(&self) -> &ConfigGraph {
        &self.graph
    }

    pub fn diam(&self, s: StateId, s1: StateId, s2: StateId, c: ChannelSet) -> Result<StateId, DiamError> {
        if s2 == s {
            return Ok(s1);
        }
        if s1 == s {
            return Ok(s2);
        }
        let key = (s, s1, s2, c);
        if let Some(&hit) = self.memo.read().unwrap().get(&key) {
            return hit.ok_or(DiamError::NotRealizable { s, s1, s2, c });
        }
        let found = self.search(s, s1, s2, c);
        self.memo.write().unwrap().insert(key, found);
        found.ok_or(DiamError::NotRealizable { s, s1, s2, c })
    }

    fn search(&self, s: StateId, s1: StateId, s2: StateId, c: ChannelSet) -> Option<StateId> {
        for &id in self.graph.with_state(s) {
            let tca = self.graph.tca(id);
            let all = ProcSet::full(tca.n());
            for (child, _, _) in tca.tree().edges() {
                let below = tca.tree().subtree(child);
                for side in [below, all.difference(below)] {
                    let other = all.difference(side);
                    if !c.iter().all(|ch| tca.members(ch).is_subset(side)) {
                        continue;
                    }
                    let Some(w2) = self.side(id, side, c).word_to(s2) else { continue };
                    let located = located_in(tca, other);
                    if !self.side(id, other, located).first.contains_key(&s1) {
                        continue;
                    }
                    if let Some(r) = self.dfa.delta_word(s1, &w2) {
                        return Some(r);
                    }
                }
            }
        }
        None
    }

    fn side(&self, start: ConfigId, side: ProcSet, allowed: ChannelSet) -> Arc<SideReach> {
        let key = (start, side, allowed);
        if let Some(hit) = self.sides.read().unwrap().get(&key) {
            return hit.clone();
        }
        let mut prev = HashMap::new();
        let mut first = HashMap::from([(self.graph.state(start), start)]);
        let mut seen = std::collections::HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            let tca = self.graph.tca(id);
            for &(a, next) in self.graph.successors(id) {
                if !allowed.contains(a.channel)
                    || !tca.members(a.channel).is_subset(side)
                    || !self.graph.tca(next).members(a.channel).is_subset(side)
                {
                    continue;
                }
                if seen.insert(next) {
                    prev.insert(next, (id, a));
                    first.entry(self.graph.state(next)).or_insert(next);
                    queue.push_back(next);
                }
            }
        }
        let reach = Arc::new(SideReach { prev, first });
        self.sides.write().unwrap().insert(key, reach.clone());
        reach
    }

    /// Folds diam over a labeled tree: a node's value starts at its own
    /// second state, and each child (last to first) is merged in with its
    /// own first state as common origin and its channel set.
    pub fn diamtree(&self, t: &LabeledTree) -> Result<StateId, DiamError> {
        self.diamtree_traced(t, &mut Vec::new())
    }

    /// [`Diam::diamtree`], recording every diam evaluation.
    pub fn diamtree_traced(&self, t: &LabeledTree, calls: &mut Vec<DiamCall>) -> Result<StateId, DiamError> {
        self.diamtree_ordered(t, calls, &|children: &[usize]| children.iter().rev().copied().collect())
    }

    /// [`Diam::diamtree_traced`] with a caller-chosen order of merging children.
    pub fn diamtree_ordered(
        &self,
        t: &LabeledTree,
        calls: &mut Vec<DiamCall>,
        order: &dyn Fn(&[usize]) -> Vec<usize>,
    ) -> Result<StateId, DiamError> {
        if t.nodes.is_empty() {
            return Err(DiamError::EmptyTree);
        }
        self.node(t, t.shape.root, calls, order)
    }

    fn node(
        &self,
        t: &LabeledTree,
        i: usize,
        calls: &mut Vec<DiamCall>,
        order: &dyn Fn(&[usize]) -> Vec<usize>,
    ) -> Result<StateId, DiamError> {
        let mut acc = t.nodes[i].s2;
        let mut covered = vec![i];
        for j in order(&t.shape.children[i]) {
            let sub = self.node(t, j, calls, order)?;
            let child = t.nodes[j];
            let result = self.diam(child.s1, acc, sub, child.c)?;
            covered.extend(t.shape.descendants(j));
            calls.push(DiamCall { s: child.s1, s1: acc, s2: sub, c: child.c, result, covered: covered.clone() });
            acc = result;
        }
        Ok(acc)
    }
}

/// Channels whose members all lie in `side`.
fn located_in(tca: &Tca, side: ProcSet) -> ChannelSet {
    tca.arch().channels().filter(|&c| tca.members(c).is_subset(side)).collect()
}

/// [`Diam::diamtree`] as a free function.
pub fn diamtree(diam: &Diam, t: &LabeledTree) -> Result<StateId, DiamError> {
    diam.diamtree(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::ChannelId;
    use crate::rldfa::ViewOracle;
    use crate::samples::{c, chain4, p};
    use crate::topology::{make_subtree, neighborhoods};

    /// Per-channel action counters modulo 2 over the fixed chain architecture.
    fn parity_chain() -> RlDfa {
        let arch0 = chain4();
        let actions: Vec<Action> = (0..3).map(|i| Action::nop(ChannelId(i))).collect();
        RlDfa::materialize(
            arch0,
            [0u8; 3],
            &actions,
            |s, a| {
                let mut t = *s;
                t[a.channel.index()] ^= 1;
                Some(t)
            },
            |s| *s == [0; 3],
            1000,
        )
        .unwrap()
        .0
    }

    #[test]
    fn trivial_cases() {
        let d = Diam::new(Arc::new(parity_chain())).unwrap();
        let (s0, s1) = (StateId(0), StateId(1));
        assert_eq!(d.diam(s0, s1, s0, ChannelSet::EMPTY), Ok(s1));
        assert_eq!(d.diam(s0, s0, s1, ChannelSet::singleton(c(1))), Ok(s1));
    }

    #[test]
    fn combines_independent_counters() {
        let dfa = Arc::new(parity_chain());
        let d = Diam::new(dfa.clone()).unwrap();
        let s0 = dfa.initial();
        let a = dfa.delta(s0, Action::nop(c(1))).unwrap();
        let b = dfa.delta(s0, Action::nop(c(2))).unwrap();
        let ab = dfa.delta(a, Action::nop(c(2))).unwrap();
        assert_eq!(d.diam(s0, a, b, ChannelSet::singleton(c(2))), Ok(ab));
        assert_eq!(d.diam(s0, b, a, ChannelSet::singleton(c(1))), Ok(ab));
        // c3 joins p2 and p3, so it never sits on one side of a split with c1.
        let x = dfa.delta(s0, Action::nop(c(3))).unwrap();
        assert!(matches!(d.diam(s0, a, x, ChannelSet::singleton(c(3))), Err(DiamError::NotRealizable { .. })));
    }

    #[test]
    fn diamtree_matches_views() {
        let dfa = Arc::new(parity_chain());
        let d = Diam::new(dfa.clone()).unwrap();
        let tca = dfa.arch0().clone();
        let word = [Action::nop(c(1)), Action::nop(c(2)), Action::nop(c(3)), Action::nop(c(1)), Action::nop(c(2))];
        let oracle = ViewOracle::new(&dfa, &word).unwrap();
        let shape = make_subtree(&neighborhoods(tca.tree())).unwrap();
        let nodes = (0..4)
            .map(|i| {
                let q = p(i + 1);
                // Channels beyond q's parent edge that the parent does not hear.
                let below = tca.tree().subtree(q);
                let parent = tca.tree().parent(q);
                let c = tca
                    .arch()
                    .channels()
                    .filter(|&ch| {
                        tca.members(ch).is_subset(below) && parent.is_some_and(|r| !tca.members(ch).contains(r))
                    })
                    .collect();
                LabeledNode {
                    s1: oracle.parent_view(q, word.len()).unwrap(),
                    s2: oracle.view(ProcSet::singleton(q), word.len()).unwrap(),
                    c,
                }
            })
            .collect();
        let t = LabeledTree { nodes, shape };
        let mut calls = Vec::new();
        assert_eq!(d.diamtree_traced(&t, &mut calls), Ok(dfa.run(&word).last().state));
        for call in &calls {
            let covered: ProcSet = call.covered.iter().map(|&i| p(i + 1)).collect();
            assert_eq!(Some(call.result), oracle.view(covered, word.len()));
        }
        assert_eq!(d.diamtree(&LabeledTree { nodes: vec![], shape: t.shape.clone() }), Err(DiamError::EmptyTree));
    }
}
