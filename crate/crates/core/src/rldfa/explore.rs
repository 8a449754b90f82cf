//! Reachable configuration graphs and the diamond check.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use super::{RlDfa, StateId};
use crate::ids::ProcSet;
use crate::reconfig::{apply_unchecked, check_valid, Action};
use crate::topology::Tca;

/// Default bound on explored configurations.
pub const DEFAULT_CONFIG_CAP: usize = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigId(pub u32);

impl ConfigId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("more than {0} reachable configurations")]
    TooManyConfigs(usize),
}

/// All configurations reachable from the initial one, with architectures
/// interned. Successor lists are sorted by action.
#[derive(Debug)]
pub struct ConfigGraph {
    tcas: Vec<Tca>,
    configs: Vec<(StateId, u32)>,
    index: HashMap<(StateId, u32), ConfigId>,
    tca_index: HashMap<Tca, u32>,
    succ: Vec<Vec<(Action, ConfigId)>>,
    by_state: Vec<Vec<ConfigId>>,
}

impl ConfigGraph {
    pub fn explore(dfa: &RlDfa, cap: usize) -> Result<ConfigGraph, ExploreError> {
        let mut g = ConfigGraph {
            tcas: Vec::new(),
            configs: Vec::new(),
            index: HashMap::new(),
            tca_index: HashMap::new(),
            succ: Vec::new(),
            by_state: vec![Vec::new(); dfa.state_count()],
        };
        let start = g.intern(dfa.initial(), dfa.arch0().clone());
        let mut queue = VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            let (s, t) = g.configs[id.index()];
            let mut out = Vec::new();
            for &(a, s2) in dfa.transitions(s) {
                let tca = &g.tcas[t as usize];
                if check_valid(tca, a).is_err() {
                    continue;
                }
                let next_tca = apply_unchecked(tca, a);
                let before = g.configs.len();
                let next = g.intern(s2, next_tca);
                if g.configs.len() > before {
                    if g.configs.len() > cap {
                        return Err(ExploreError::TooManyConfigs(cap));
                    }
                    queue.push_back(next);
                }
                out.push((a, next));
            }
            g.succ[id.index()] = out;
        }
        Ok(g)
    }

    fn intern(&mut self, s: StateId, tca: Tca) -> ConfigId {
        let t = match self.tca_index.get(&tca) {
            Some(&t) => t,
            None => {
                let t = self.tcas.len() as u32;
                self.tca_index.insert(tca.clone(), t);
                self.tcas.push(tca);
                t
            }
        };
        if let Some(&id) = self.index.get(&(s, t)) {
            return id;
        }
        let id = ConfigId(self.configs.len() as u32);
        self.configs.push((s, t));
        self.index.insert((s, t), id);
        self.succ.push(Vec::new());
        self.by_state[s.index()].push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ConfigId> {
        (0..self.configs.len() as u32).map(ConfigId)
    }

    pub fn state(&self, id: ConfigId) -> StateId {
        self.configs[id.index()].0
    }

    pub fn tca(&self, id: ConfigId) -> &Tca {
        &self.tcas[self.configs[id.index()].1 as usize]
    }

    pub fn tca_count(&self) -> usize {
        self.tcas.len()
    }

    /// Defined, valid steps out of `id`, sorted by action.
    pub fn successors(&self, id: ConfigId) -> &[(Action, ConfigId)] {
        &self.succ[id.index()]
    }

    pub fn step(&self, id: ConfigId, a: Action) -> Option<ConfigId> {
        let row = &self.succ[id.index()];
        row.binary_search_by(|(b, _)| b.cmp(&a)).ok().map(|i| row[i].1)
    }

    /// Reachable configurations whose control state is `s`.
    pub fn with_state(&self, s: StateId) -> &[ConfigId] {
        &self.by_state[s.index()]
    }

    pub fn find(&self, s: StateId, tca: &Tca) -> Option<ConfigId> {
        let t = *self.tca_index.get(tca)?;
        self.index.get(&(s, t)).copied()
    }
}

/// Two independent actions whose orders disagree at a reachable configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub state: StateId,
    pub tca: Tca,
    pub a1: Action,
    pub a2: Action,
    /// Control state after `a1 a2`, if defined.
    pub first: Option<StateId>,
    /// Control state after `a2 a1`, if defined.
    pub second: Option<StateId>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: Option<StateId>| s.map_or("undefined".to_string(), |s| s.to_string());
        write!(
            f,
            "at state {}: {} then {} gives {}, {} then {} gives {}",
            self.state,
            self.a1,
            self.a2,
            show(self.first),
            self.a2,
            self.a1,
            show(self.second)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiamondError {
    #[error("not diamond closed: {0}")]
    Counterexample(Box<Counterexample>),
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

/// Checks that every pair of independent actions commutes, definedness
/// included, at every reachable configuration. Configurations are visited in
/// breadth-first order, pairs in action order; the first violation is returned.
pub fn check_diamond(dfa: &RlDfa) -> Result<(), DiamondError> {
    let graph = ConfigGraph::explore(dfa, DEFAULT_CONFIG_CAP)?;
    check_diamond_in(&graph).map_err(|cx| DiamondError::Counterexample(Box::new(cx)))
}

/// [`check_diamond`] over an already explored graph.
pub fn check_diamond_in(graph: &ConfigGraph) -> Result<(), Counterexample> {
    for id in graph.ids() {
        let tca = graph.tca(id);
        let mut after_cache: HashMap<Action, ProcSet> = HashMap::new();
        let mut listeners = |a: Action, after: Option<&Tca>| -> ProcSet {
            let after = match after {
                Some(t) => t.members(a.channel),
                None => *after_cache.entry(a).or_insert_with(|| apply_unchecked(tca, a).members(a.channel)),
            };
            tca.members(a.channel).union(after)
        };
        for &(a1, c1) in graph.successors(id) {
            let l1 = listeners(a1, Some(graph.tca(c1)));
            let mut candidates: Vec<Action> = graph.successors(id).iter().map(|x| x.0).collect();
            candidates.extend(graph.successors(c1).iter().map(|x| x.0));
            candidates.sort();
            candidates.dedup();
            for a2 in candidates {
                if a2 == a1 || !l1.is_disjoint(tca.members(a2.channel)) {
                    continue;
                }
                let direct = graph.step(id, a2);
                if direct.is_none() && check_valid(tca, a2).is_err() {
                    continue;
                }
                let l2 = listeners(a2, direct.map(|c2| graph.tca(c2)));
                if !l1.is_disjoint(l2) {
                    continue;
                }
                let first = graph.step(c1, a2).map(|x| graph.state(x));
                let second = direct.and_then(|c2| graph.step(c2, a1)).map(|x| graph.state(x));
                if first != second {
                    return Err(Counterexample { state: graph.state(id), tca: tca.clone(), a1, a2, first, second });
                }
            }
        }
    }
    Ok(())
}
