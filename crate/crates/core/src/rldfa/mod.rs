//! Reconfiguration automata: deterministic automata over actions whose
//! configurations pair a control state with the current architecture.

mod diam;
mod explore;
mod view;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::ids::{ChannelId, EdgeLabel, ProcSet};
use crate::reconfig::{apply_unchecked, check_valid, Action, Invalid, Op};
use crate::topology::Tca;

pub use diam::{diamtree, Diam, DiamCall, DiamError, LabeledNode, LabeledTree};
pub use explore::{
    check_diamond, check_diamond_in, ConfigGraph, ConfigId, Counterexample, DiamondError, ExploreError,
    DEFAULT_CONFIG_CAP,
};
pub use view::{words_independent, ViewOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DfaError {
    #[error("state {0} is out of range")]
    StateOutOfRange(StateId),
    #[error("action {0} is outside the architecture's universe")]
    ActionOutOfRange(Action),
    #[error("two transitions from {0} on {1}")]
    Nondeterministic(StateId, Action),
    #[error("more than {0} states")]
    TooManyStates(usize),
    #[error("no states")]
    Empty,
}

/// An explicit reconfiguration automaton with a partial transition function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlDfa {
    initial: StateId,
    arch0: Tca,
    delta: Vec<Vec<(Action, StateId)>>,
    accepting: Vec<bool>,
}

/// Whether `a` only mentions channels and labels of `tca`'s universe.
pub fn in_universe(tca: &Tca, a: Action) -> bool {
    let k = tca.channel_count();
    let n = tca.n();
    let label = |e: EdgeLabel| e.index() < n;
    a.channel.index() < k
        && match a.op {
            Op::Nop => true,
            Op::Swap(e) | Op::Disc(e) => label(e),
            Op::Move(e, e2) => label(e) && label(e2),
            Op::Connect(e, c) => label(e) && c.index() < k,
        }
}

/// All actions over `n` processes and `k` channels, in ascending order.
/// Swaps and moves of the root, and moves onto the moved process itself,
/// are left out since they can never fire.
pub fn alphabet(n: usize, k: usize) -> Vec<Action> {
    let mut out = Vec::new();
    for c in 0..k {
        let c = ChannelId::new(c);
        out.push(Action::nop(c));
        for e in 1..n {
            out.push(Action::new(c, Op::Swap(EdgeLabel::new(e))));
        }
        for e in 1..n {
            for e2 in 0..n {
                if e != e2 {
                    out.push(Action::new(c, Op::Move(EdgeLabel::new(e), EdgeLabel::new(e2))));
                }
            }
        }
        for e in 0..n {
            for c2 in 0..k {
                if c2 != c.index() {
                    out.push(Action::new(c, Op::Connect(EdgeLabel::new(e), ChannelId::new(c2))));
                }
            }
        }
        for e in 0..n {
            out.push(Action::new(c, Op::Disc(EdgeLabel::new(e))));
        }
    }
    out.sort();
    out
}

impl RlDfa {
    /// Builds an automaton with states `0..state_count`.
    pub fn new(
        state_count: usize,
        initial: StateId,
        arch0: Tca,
        transitions: impl IntoIterator<Item = (StateId, Action, StateId)>,
        accepting: impl IntoIterator<Item = StateId>,
    ) -> Result<RlDfa, DfaError> {
        if state_count == 0 {
            return Err(DfaError::Empty);
        }
        let check = |s: StateId| if s.index() < state_count { Ok(s) } else { Err(DfaError::StateOutOfRange(s)) };
        check(initial)?;
        let mut delta = vec![Vec::new(); state_count];
        for (s, a, t) in transitions {
            check(s)?;
            check(t)?;
            if !in_universe(&arch0, a) {
                return Err(DfaError::ActionOutOfRange(a));
            }
            delta[s.index()].push((a, t));
        }
        for (i, row) in delta.iter_mut().enumerate() {
            row.sort();
            row.dedup();
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(DfaError::Nondeterministic(StateId(i as u32), w[0].0));
            }
        }
        let mut acc = vec![false; state_count];
        for s in accepting {
            acc[check(s)?.index()] = true;
        }
        Ok(RlDfa { initial, arch0, delta, accepting: acc })
    }

    /// Explores the states reachable from `init` under `step` over the given
    /// actions and numbers them in breadth-first order. Fails once more than
    /// `cap` states are found.
    pub fn materialize<S: Clone + Eq + Hash>(
        arch0: Tca,
        init: S,
        actions: &[Action],
        mut step: impl FnMut(&S, Action) -> Option<S>,
        mut accept: impl FnMut(&S) -> bool,
        cap: usize,
    ) -> Result<(RlDfa, Vec<S>), DfaError> {
        let mut ids: HashMap<S, StateId> = HashMap::new();
        let mut states = vec![init.clone()];
        ids.insert(init, StateId(0));
        let mut transitions = Vec::new();
        let mut queue = VecDeque::from([StateId(0)]);
        while let Some(s) = queue.pop_front() {
            for &a in actions {
                let Some(next) = step(&states[s.index()], a) else { continue };
                let t = match ids.get(&next) {
                    Some(&t) => t,
                    None => {
                        if states.len() >= cap {
                            return Err(DfaError::TooManyStates(cap));
                        }
                        let t = StateId(states.len() as u32);
                        ids.insert(next.clone(), t);
                        states.push(next);
                        queue.push_back(t);
                        t
                    }
                };
                transitions.push((s, a, t));
            }
        }
        let accepting: Vec<StateId> =
            (0..states.len()).filter(|&i| accept(&states[i])).map(|i| StateId(i as u32)).collect();
        let dfa = RlDfa::new(states.len(), StateId(0), arch0, transitions, accepting)?;
        Ok((dfa, states))
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.delta.len() as u32).map(StateId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn arch0(&self) -> &Tca {
        &self.arch0
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting[s.index()]
    }

    pub fn accepting(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(|&s| self.is_accepting(s))
    }

    /// The transition function; `None` where undefined.
    pub fn delta(&self, s: StateId, a: Action) -> Option<StateId> {
        let row = &self.delta[s.index()];
        row.binary_search_by(|(b, _)| b.cmp(&a)).ok().map(|i| row[i].1)
    }

    /// Defined transitions out of `s`, sorted by action.
    pub fn transitions(&self, s: StateId) -> &[(Action, StateId)] {
        &self.delta[s.index()]
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    /// Folds the transition function over `word`, ignoring the architecture.
    pub fn delta_word(&self, s: StateId, word: &[Action]) -> Option<StateId> {
        word.iter().try_fold(s, |s, &a| self.delta(s, a))
    }

    /// Whether every transition carries a `nop`.
    pub fn is_nop_only(&self) -> bool {
        self.delta.iter().flatten().all(|(a, _)| a.op.is_nop())
    }

    /// Runs the automaton on `word` from its initial configuration.
    pub fn run(&self, word: &[Action]) -> Run {
        let mut configs = vec![Config { state: self.initial, tca: self.arch0.clone() }];
        for (i, &a) in word.iter().enumerate() {
            let cur = configs.last().unwrap();
            match self.step(cur, a) {
                Ok(next) => configs.push(next),
                Err(cause) => return Run { configs, undefined: Some((i, cause)) },
            }
        }
        Run { configs, undefined: None }
    }

    /// One step of the run semantics: the transition must be defined and
    /// the operation valid on the current architecture.
    pub fn step(&self, cur: &Config, a: Action) -> Result<Config, Cause> {
        check_valid(&cur.tca, a).map_err(Cause::InvalidOperation)?;
        let state = self.delta(cur.state, a).ok_or(Cause::MissingTransition)?;
        Ok(Config { state, tca: apply_unchecked(&cur.tca, a) })
    }

    /// Whether the run on `word` is defined and ends in an accepting state.
    pub fn accepts(&self, word: &[Action]) -> bool {
        let run = self.run(word);
        run.undefined.is_none() && self.is_accepting(run.last().state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub state: StateId,
    pub tca: Tca,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cause {
    MissingTransition,
    InvalidOperation(Invalid),
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cause::MissingTransition => write!(f, "missing transition"),
            Cause::InvalidOperation(err) => write!(f, "invalid operation: {err}"),
        }
    }
}

/// The configurations visited by a run; on failure, the index of the
/// offending action and why it could not fire.
#[derive(Clone, Debug)]
pub struct Run {
    pub configs: Vec<Config>,
    pub undefined: Option<(usize, Cause)>,
}

impl Run {
    pub fn is_defined(&self) -> bool {
        self.undefined.is_none()
    }

    pub fn last(&self) -> &Config {
        self.configs.last().unwrap()
    }
}

/// Processes listening to `a`'s channel before or after `a` fires.
fn listeners(tca: &Tca, a: Action) -> ProcSet {
    tca.members(a.channel).union(apply_unchecked(tca, a).members(a.channel))
}

/// Whether no process listens, before or after its own action, to the
/// channels of both `a1` and `a2`. Both actions must be valid on `tca`.
pub fn independent(tca: &Tca, a1: Action, a2: Action) -> Result<bool, Invalid> {
    check_valid(tca, a1)?;
    check_valid(tca, a2)?;
    Ok(listeners(tca, a1).is_disjoint(listeners(tca, a2)))
}
