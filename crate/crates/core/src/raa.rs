//! Reconfigurable asynchronous automata.
//!
//! Each process has its own states, a listening function and a partial
//! transition function reading a data value and an action. A communication on
//! channel `c` fires when somebody listens to `c` and every listener has a
//! transition for it; non-listeners keep their state.

use std::collections::HashMap;
use std::fmt;

use crate::ids::{ChannelId, ChannelSet, ProcessId};
use crate::reconfig::Action;

/// A reconfigurable asynchronous automaton given by per-process functions.
pub trait Raa {
    type State: Clone + PartialEq + fmt::Debug;
    type Data: Clone + fmt::Debug;
    type Block: Clone + fmt::Debug + fmt::Display;

    fn process_count(&self) -> usize;

    fn initial_state(&self, p: ProcessId) -> Self::State;

    fn listening(&self, p: ProcessId, s: &Self::State) -> ChannelSet;

    /// Local transition of listener `p`; an error blocks the communication.
    fn transition(&self, p: ProcessId, s: &Self::State, d: &Self::Data, a: Action) -> Result<Self::State, Self::Block>;

    fn accepting(&self, p: ProcessId, s: &Self::State, d: &Self::Data) -> bool;

    /// The data value on which acceptance of `g` is decided, if any.
    fn acceptance_candidate(&self, g: &GlobalState<Self::State>) -> Option<Self::Data>;

    fn initial(&self) -> GlobalState<Self::State> {
        GlobalState((0..self.process_count()).map(|p| self.initial_state(ProcessId::new(p))).collect())
    }
}

/// One local state per process.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalState<S>(pub Vec<S>);

impl<S> GlobalState<S> {
    pub fn get(&self, p: ProcessId) -> &S {
        &self.0[p.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepError<B> {
    /// Nobody listens to the channel.
    ChannelDead(ChannelId),
    /// Listeners without a transition, with their reasons.
    Blocked(Vec<(ProcessId, B)>),
}

impl<B: fmt::Display> fmt::Display for StepError<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::ChannelDead(c) => write!(f, "nobody listens to {c}"),
            StepError::Blocked(blockers) => {
                write!(f, "blocked by")?;
                for (i, (p, why)) in blockers.iter().enumerate() {
                    write!(f, "{} {p} ({why})", if i > 0 { "," } else { "" })?;
                }
                Ok(())
            }
        }
    }
}

/// Fires one communication with data `d`.
pub fn step<R: Raa + ?Sized>(
    raa: &R,
    g: &GlobalState<R::State>,
    d: &R::Data,
    a: Action,
) -> Result<GlobalState<R::State>, StepError<R::Block>> {
    let mut next = g.clone();
    let mut blocked = Vec::new();
    let mut heard = false;
    for (i, s) in g.0.iter().enumerate() {
        let p = ProcessId::new(i);
        if !raa.listening(p, s).contains(a.channel) {
            continue;
        }
        heard = true;
        match raa.transition(p, s, d, a) {
            Ok(t) => next.0[i] = t,
            Err(why) => blocked.push((p, why)),
        }
    }
    if !heard {
        return Err(StepError::ChannelDead(a.channel));
    }
    if !blocked.is_empty() {
        return Err(StepError::Blocked(blocked));
    }
    Ok(next)
}

/// Global states visited by a run; on failure, where and why it stopped.
#[derive(Clone, Debug)]
pub struct RaaRun<S, B> {
    pub states: Vec<GlobalState<S>>,
    pub undefined: Option<(usize, StepError<B>)>,
}

impl<S, B> RaaRun<S, B> {
    pub fn is_defined(&self) -> bool {
        self.undefined.is_none()
    }

    pub fn last(&self) -> &GlobalState<S> {
        self.states.last().unwrap()
    }
}

/// Runs on a word of (data, action) pairs.
pub fn run_with_data<R: Raa + ?Sized>(raa: &R, word: &[(R::Data, Action)]) -> RaaRun<R::State, R::Block> {
    run_with(raa, word.len(), |i, _| word[i].clone())
}

/// Runs on `len` communications, asking `propose` for the data and action
/// of each step given the index and the current global state.
pub fn run_with<R, F>(raa: &R, len: usize, mut propose: F) -> RaaRun<R::State, R::Block>
where
    R: Raa + ?Sized,
    F: FnMut(usize, &GlobalState<R::State>) -> (R::Data, Action),
{
    let mut states = vec![raa.initial()];
    for i in 0..len {
        let g = states.last().unwrap();
        let (d, a) = propose(i, g);
        match step(raa, g, &d, a) {
            Ok(next) => states.push(next),
            Err(err) => return RaaRun { states, undefined: Some((i, err)) },
        }
    }
    RaaRun { states, undefined: None }
}

/// The agreed data value if every process accepts `g` with it.
pub fn accepts<R: Raa + ?Sized>(raa: &R, g: &GlobalState<R::State>) -> Option<R::Data> {
    let d = raa.acceptance_candidate(g)?;
    let all = g.0.iter().enumerate().all(|(i, s)| raa.accepting(ProcessId::new(i), s, &d));
    all.then_some(d)
}

/// A finite RAA with a single data value, listed state by state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitRaa {
    pub processes: Vec<ExplicitProcess>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitProcess {
    pub initial: usize,
    pub listening: Vec<ChannelSet>,
    pub delta: HashMap<(usize, ChannelId), usize>,
    pub accepting: Vec<bool>,
}

impl Raa for ExplicitRaa {
    type State = usize;
    type Data = ();
    type Block = String;

    fn process_count(&self) -> usize {
        self.processes.len()
    }

    fn initial_state(&self, p: ProcessId) -> usize {
        self.processes[p.index()].initial
    }

    fn listening(&self, p: ProcessId, s: &usize) -> ChannelSet {
        self.processes[p.index()].listening[*s]
    }

    fn transition(&self, p: ProcessId, s: &usize, _: &(), a: Action) -> Result<usize, String> {
        self.processes[p.index()]
            .delta
            .get(&(*s, a.channel))
            .copied()
            .ok_or_else(|| format!("no {} transition from state {s}", a.channel))
    }

    fn accepting(&self, p: ProcessId, s: &usize, _: &()) -> bool {
        self.processes[p.index()].accepting[*s]
    }

    fn acceptance_candidate(&self, _: &GlobalState<usize>) -> Option<()> {
        Some(())
    }
}
