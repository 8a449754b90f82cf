//! Views of process sets on a run, computed directly from the recorded trace.

use super::{independent, Cause, RlDfa, StateId};
use crate::ids::{ProcSet, ProcessId};
use crate::reconfig::{apply_unchecked, Action};
use crate::topology::Tca;

/// Recomputes views from a defined run.
///
/// The view of `X` on a prefix keeps the actions some member of `X` took
/// part in, closing `X` under every such communication going backwards, and
/// replays the kept actions from the initial state.
pub struct ViewOracle<'a> {
    dfa: &'a RlDfa,
    word: Vec<Action>,
    tcas: Vec<Tca>,
}

impl<'a> ViewOracle<'a> {
    /// Runs `dfa` on `word`; fails where the run is undefined.
    pub fn new(dfa: &'a RlDfa, word: &[Action]) -> Result<ViewOracle<'a>, (usize, Cause)> {
        let run = dfa.run(word);
        if let Some(err) = run.undefined {
            return Err(err);
        }
        let tcas = run.configs.into_iter().map(|c| c.tca).collect();
        Ok(ViewOracle { dfa, word: word.to_vec(), tcas })
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// The architecture after the first `i` actions.
    pub fn tca(&self, i: usize) -> &Tca {
        &self.tcas[i]
    }

    /// Indices (0-based) of the actions kept by the view of `x` on the first
    /// `prefix` actions, in order.
    pub fn kept(&self, x: ProcSet, prefix: usize) -> Vec<usize> {
        let mut x = x;
        let mut kept = Vec::new();
        for j in (0..prefix).rev() {
            let members = self.tcas[j].members(self.word[j].channel);
            if !x.is_disjoint(members) {
                x = x.union(members);
                kept.push(j);
            }
        }
        kept.reverse();
        kept
    }

    /// The view of `x` on the first `prefix` actions; `None` if replaying
    /// the kept actions leaves the transition function.
    pub fn view(&self, x: ProcSet, prefix: usize) -> Option<StateId> {
        self.kept(x, prefix).into_iter().try_fold(self.dfa.initial(), |s, j| self.dfa.delta(s, self.word[j]))
    }

    /// The state of the actions in the causal past of both `side` and its
    /// complement within the first `prefix` actions: the closure of every
    /// action whose listeners meet both parts.
    pub fn meet_view(&self, side: ProcSet, prefix: usize) -> Option<StateId> {
        let rest = ProcSet::full(self.tcas[0].n()).difference(side);
        let mut x = ProcSet::EMPTY;
        let mut kept = Vec::new();
        for j in (0..prefix).rev() {
            let members = self.tcas[j].members(self.word[j].channel);
            let crossing = !members.is_disjoint(side) && !members.is_disjoint(rest);
            if crossing || !x.is_disjoint(members) {
                x = x.union(members);
                kept.push(j);
            }
        }
        kept.into_iter().rev().try_fold(self.dfa.initial(), |s, j| self.dfa.delta(s, self.word[j]))
    }

    /// [`ViewOracle::meet_view`] of the subtree of `p` after `prefix` actions.
    pub fn cut_view(&self, p: ProcessId, prefix: usize) -> Option<StateId> {
        self.meet_view(self.tcas[prefix].tree().subtree(p), prefix)
    }

    /// The last step (1-based count of actions) at which `p` and its parent
    /// after `prefix` actions both listened to the channel, with that parent.
    pub fn last_common(&self, p: ProcessId, prefix: usize) -> Option<(usize, ProcessId)> {
        let q = self.tcas[prefix].tree().parent(p)?;
        let both = |i: usize| {
            let members = self.tcas[i - 1].members(self.word[i - 1].channel);
            members.contains(p) && members.contains(q)
        };
        (1..=prefix).rev().find(|&i| both(i)).map(|i| (i, q))
    }

    /// The shared parent view of `p`: the view of `p` and its parent at their
    /// last common communication, or the initial state if there was none.
    pub fn parent_view(&self, p: ProcessId, prefix: usize) -> Option<StateId> {
        match self.last_common(p, prefix) {
            None => Some(self.dfa.initial()),
            Some((i, q)) => self.view(ProcSet::singleton(p).with(q), i),
        }
    }
}

/// Whether `w1` and `w2` are independent from `tca`: their first actions are
/// independent, and so are the remainders after either first action fires.
pub fn words_independent(tca: &Tca, w1: &[Action], w2: &[Action]) -> bool {
    let (Some(&a1), Some(&a2)) = (w1.first(), w2.first()) else { return true };
    independent(tca, a1, a2) == Ok(true)
        && words_independent(&apply_unchecked(tca, a1), &w1[1..], w2)
        && words_independent(&apply_unchecked(tca, a2), w1, &w2[1..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconfig::{apply, Op};
    use crate::rldfa::alphabet;
    use crate::samples::{c, p, sample};
    use crate::EdgeLabel;

    fn tracker(arch0: Tca, actions: &[Action]) -> RlDfa {
        RlDfa::materialize(arch0.clone(), arch0, actions, |t, a| apply(t, a).ok(), |_| true, 100_000).unwrap().0
    }

    #[test]
    fn base_cases() {
        let t = sample();
        let actions: Vec<Action> = alphabet(5, 3).into_iter().filter(|a| a.op.is_nop()).collect();
        let dfa = tracker(t.clone(), &actions);
        let word = [Action::nop(c(1)), Action::nop(c(3)), Action::nop(c(1))];
        let oracle = ViewOracle::new(&dfa, &word).unwrap();
        let all = ProcSet::full(5);
        assert_eq!(oracle.view(ProcSet::singleton(p(4)), 0), Some(dfa.initial()));
        assert_eq!(oracle.view(all, 3), Some(dfa.run(&word).last().state));
        // p4 never communicates.
        assert_eq!(oracle.view(ProcSet::singleton(p(4)), 3), Some(dfa.initial()));
        assert_eq!(oracle.kept(ProcSet::singleton(p(2)), 3), vec![0, 1, 2]);
        assert_eq!(oracle.kept(ProcSet::singleton(p(5)), 2), vec![0, 1]);
        assert_eq!(oracle.last_common(p(5), 3), Some((2, p(3))));
        assert_eq!(oracle.parent_view(p(2), 3), oracle.view(ProcSet::singleton(p(2)), 3));
        assert_eq!(oracle.parent_view(p(4), 3), Some(dfa.initial()));
        assert_eq!(oracle.parent_view(p(1), 3), Some(dfa.initial()));
    }

    #[test]
    fn word_independence() {
        let t = crate::samples::sample_left();
        let w1 = [Action::nop(c(1)), Action::nop(c(1))];
        let w2 = [Action::nop(c(3))];
        assert!(words_independent(&t, &w1, &w2));
        assert!(words_independent(&t, &[], &w2));
        assert!(!words_independent(&sample(), &w1, &w2));
        // p1 listens to c1 and c2; an invalid first action is never independent.
        assert!(!words_independent(&t, &w1, &[Action::nop(c(2))]));
        let invalid = [Action::new(c(2), Op::Connect(EdgeLabel(1), c(3)))];
        assert!(!words_independent(&t, &invalid, &w2));
    }
}
