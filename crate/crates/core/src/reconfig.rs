//! Reconfiguration operations on tree-like architectures.
//!
//! Every [`Action`] is sent on a channel and carries an [`Op`]. Edge labels
//! name processes: label `e` stands for the process whose parent edge carries
//! `e`, and `0` for the root. [`check_valid`] decides whether the operation may
//! fire; [`apply`] performs it. [`plan`] builds a valid action sequence between
//! any two architectures over the same processes and channels.

use std::fmt;

use thiserror::Error;

use crate::ids::{ChannelId, EdgeLabel, ProcSet, ProcessId};
use crate::topology::{Tca, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Nop,
    /// Exchange the process labeled `e` with its parent.
    Swap(EdgeLabel),
    /// Re-parent the process labeled `e` (first field) under the process
    /// labeled `e'` (second field), keeping its edge label.
    Move(EdgeLabel, EdgeLabel),
    /// The process labeled `e` joins the given channel.
    Connect(EdgeLabel, ChannelId),
    /// The process labeled `e` leaves the action's channel.
    Disc(EdgeLabel),
}

impl Op {
    pub fn is_nop(self) -> bool {
        self == Op::Nop
    }

    pub fn kind(self) -> &'static str {
        match self {
            Op::Nop => "nop",
            Op::Swap(..) => "swap",
            Op::Move(..) => "move",
            Op::Connect(..) => "conn",
            Op::Disc(..) => "disc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub channel: ChannelId,
    pub op: Op,
}

impl Action {
    pub fn new(channel: ChannelId, op: Op) -> Action {
        Action { channel, op }
    }

    pub fn nop(channel: ChannelId) -> Action {
        Action { channel, op: Op::Nop }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.channel;
        match self.op {
            Op::Nop => write!(f, "{c} nop"),
            Op::Swap(e) => write!(f, "{c} swap {}", e.0),
            Op::Move(e, e2) => write!(f, "{c} move {} {}", e.0, e2.0),
            Op::Connect(e, c2) => write!(f, "{c} conn {} {c2}", e.0),
            Op::Disc(e) => write!(f, "{c} disc {}", e.0),
        }
    }
}

/// Why an action cannot fire on a given architecture.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Invalid {
    #[error("channel {0} does not exist")]
    ChannelOutOfRange(ChannelId),
    #[error("edge label {} does not exist", .0.0)]
    LabelOutOfRange(EdgeLabel),
    #[error("the root cannot be swapped or moved")]
    RootLabel,
    #[error("move source and target labels coincide")]
    SameLabel,
    #[error("{process} does not listen to {channel}")]
    NotMember { process: ProcessId, channel: ChannelId },
    #[error("{process} already listens to {channel}")]
    AlreadyMember { process: ProcessId, channel: ChannelId },
    #[error("{process} does not listen to {channel}, shared by {upper} and {lower}")]
    WouldDisconnect { process: ProcessId, channel: ChannelId, upper: ProcessId, lower: ProcessId },
    #[error("{target} is not a neighbor of {parent}")]
    NotNeighbor { target: ProcessId, parent: ProcessId },
    #[error("no neighbor of {process} shares {channel} and listens to {joined}")]
    NoInviter { process: ProcessId, channel: ChannelId, joined: ChannelId },
    #[error("channel {channel} has only {members} members")]
    TooSmall { channel: ChannelId, members: usize },
    #[error("{process} has {neighbors} neighbors on {channel}, not exactly one")]
    NotBoundary { process: ProcessId, channel: ChannelId, neighbors: usize },
    #[error("no channel other than {channel} is shared by {process} and {neighbor}")]
    Uncovered { process: ProcessId, neighbor: ProcessId, channel: ChannelId },
}

fn label_in_range(tca: &Tca, e: EdgeLabel) -> Result<ProcessId, Invalid> {
    if e.index() >= tca.n() {
        return Err(Invalid::LabelOutOfRange(e));
    }
    Ok(tca.tree().proc_from_label(e))
}

fn require(tca: &Tca, p: ProcessId, c: ChannelId) -> Result<(), Invalid> {
    if tca.members(c).contains(p) {
        Ok(())
    } else {
        Err(Invalid::NotMember { process: p, channel: c })
    }
}

/// The neighbour that invites the joining process in a connect action:
/// among the neighbours of `p` listening to both `c` and `joined`, the one
/// reached over the smallest edge label.
pub fn connect_witness(tca: &Tca, p: ProcessId, c: ChannelId, joined: ChannelId) -> Option<ProcessId> {
    let tree = tca.tree();
    let mut best: Option<(EdgeLabel, ProcessId)> = None;
    for q in tree.neighbors(p) {
        if tca.members(c).contains(q) && tca.members(joined).contains(q) {
            let e = tree.edge_between(p, q).unwrap();
            if best.is_none_or(|(b, _)| e < b) {
                best = Some((e, q));
            }
        }
    }
    best.map(|(_, q)| q)
}

/// Decides whether `a` may fire on `tca`.
pub fn check_valid(tca: &Tca, a: Action) -> Result<(), Invalid> {
    let c = a.channel;
    if c.index() >= tca.channel_count() {
        return Err(Invalid::ChannelOutOfRange(c));
    }
    let tree = tca.tree();
    match a.op {
        Op::Nop => Ok(()),
        Op::Swap(e) => {
            let p = label_in_range(tca, e)?;
            if e.is_root() {
                return Err(Invalid::RootLabel);
            }
            let q = tree.parent(p).unwrap();
            require(tca, p, c)?;
            require(tca, q, c)?;
            if let Some(q2) = tree.parent(q) {
                for c2 in tca.arch().shared(q, q2).iter() {
                    if !tca.members(c2).contains(p) {
                        return Err(Invalid::WouldDisconnect { process: p, channel: c2, upper: q2, lower: q });
                    }
                }
            }
            Ok(())
        }
        Op::Move(e, e2) => {
            let p = label_in_range(tca, e)?;
            let q = label_in_range(tca, e2)?;
            if e.is_root() {
                return Err(Invalid::RootLabel);
            }
            if e == e2 {
                return Err(Invalid::SameLabel);
            }
            let q2 = tree.parent(p).unwrap();
            if tree.edge_between(q, q2).is_none() {
                return Err(Invalid::NotNeighbor { target: q, parent: q2 });
            }
            require(tca, q, c)?;
            require(tca, q2, c)?;
            for c2 in tca.arch().shared(p, q2).iter() {
                if !tca.members(c2).contains(q) {
                    return Err(Invalid::WouldDisconnect { process: q, channel: c2, upper: q2, lower: p });
                }
            }
            Ok(())
        }
        Op::Connect(e, joined) => {
            let p = label_in_range(tca, e)?;
            if joined.index() >= tca.channel_count() {
                return Err(Invalid::ChannelOutOfRange(joined));
            }
            if tca.members(joined).contains(p) {
                return Err(Invalid::AlreadyMember { process: p, channel: joined });
            }
            require(tca, p, c)?;
            match connect_witness(tca, p, c, joined) {
                Some(_) => Ok(()),
                None => Err(Invalid::NoInviter { process: p, channel: c, joined }),
            }
        }
        Op::Disc(e) => {
            let p = label_in_range(tca, e)?;
            let members = tca.members(c);
            if members.len() < 3 {
                return Err(Invalid::TooSmall { channel: c, members: members.len() });
            }
            require(tca, p, c)?;
            let inside: Vec<ProcessId> = tree.neighbors(p).into_iter().filter(|&q| members.contains(q)).collect();
            if inside.len() != 1 {
                return Err(Invalid::NotBoundary { process: p, channel: c, neighbors: inside.len() });
            }
            let q = inside[0];
            if tca.arch().shared(p, q).without(c).is_empty() {
                return Err(Invalid::Uncovered { process: p, neighbor: q, channel: c });
            }
            Ok(())
        }
    }
}

/// Applies `a` to `tca`, or reports why it cannot fire.
pub fn apply(tca: &Tca, a: Action) -> Result<Tca, Invalid> {
    check_valid(tca, a)?;
    Ok(apply_unchecked(tca, a))
}

/// Applies an action already known to be valid.
pub fn apply_unchecked(tca: &Tca, a: Action) -> Tca {
    let mut out = tca.clone();
    let (arch, tree) = out.parts_mut();
    match a.op {
        Op::Nop => {}
        Op::Swap(e) => {
            let p = tree.proc_from_label(e);
            let q = tree.parent(p).unwrap();
            let above = tree.parent_entry(q);
            tree.set_parent(p, above);
            tree.set_parent(q, Some((p, e)));
        }
        Op::Move(e, e2) => {
            let p = tree.proc_from_label(e);
            let q = tree.proc_from_label(e2);
            tree.set_parent(p, Some((q, e)));
        }
        Op::Connect(e, joined) => {
            let p = tree.proc_from_label(e);
            arch.members_mut(joined).insert(p);
        }
        Op::Disc(e) => {
            let p = tree.proc_from_label(e);
            arch.members_mut(a.channel).remove(p);
        }
    }
    out
}

/// Folds [`apply`] over a word; on failure reports the index of the first
/// invalid action.
pub fn replay(tca: &Tca, word: &[Action]) -> Result<Tca, (usize, Invalid)> {
    let mut cur = tca.clone();
    for (i, &a) in word.iter().enumerate() {
        cur = apply(&cur, a).map_err(|err| (i, err))?;
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("architectures differ in size: {from_n} processes/{from_k} channels vs {to_n}/{to_k}")]
    UniverseMismatch { from_n: usize, from_k: usize, to_n: usize, to_k: usize },
}

/// Builds a word of valid actions turning `from` into `to`.
///
/// The plan first connects every process to every channel, which lifts all
/// channel side conditions on swaps and moves. It then swaps the target root
/// to the top, flattens the tree into a star under it, permutes the edge
/// labels into their target positions, rebuilds the target tree level by
/// level, and finally disconnects surplus members from the outside in.
/// Ties are always broken by ascending edge label.
pub fn plan(from: &Tca, to: &Tca) -> Result<Vec<Action>, PlanError> {
    if from.n() != to.n() || from.channel_count() != to.channel_count() {
        return Err(PlanError::UniverseMismatch {
            from_n: from.n(),
            from_k: from.channel_count(),
            to_n: to.n(),
            to_k: to.channel_count(),
        });
    }
    let mut planner = Planner { cur: from.clone(), word: Vec::new() };
    planner.connect_all();
    planner.raise_root(to.tree().root());
    planner.flatten();
    planner.permute_labels(to.tree());
    planner.rebuild(to.tree());
    planner.trim(to);
    debug_assert_eq!(planner.cur, *to);
    Ok(planner.word)
}

struct Planner {
    cur: Tca,
    word: Vec<Action>,
}

const ANY: ChannelId = ChannelId(0);

impl Planner {
    fn push(&mut self, a: Action) {
        self.cur = apply(&self.cur, a).unwrap_or_else(|err| panic!("planner produced invalid {a}: {err}"));
        self.word.push(a);
    }

    fn by_label(&self) -> impl Iterator<Item = (EdgeLabel, ProcessId)> + '_ {
        let tree = self.cur.tree();
        (0..tree.n()).map(move |e| (EdgeLabel::new(e), tree.proc_from_label(EdgeLabel::new(e))))
    }

    fn connect_all(&mut self) {
        let all = ProcSet::full(self.cur.n());
        for joined in self.cur.arch().channels().collect::<Vec<_>>() {
            while self.cur.members(joined) != all {
                let step = self.by_label().find_map(|(e, p)| {
                    if self.cur.members(joined).contains(p) {
                        return None;
                    }
                    let via = self
                        .cur
                        .tree()
                        .neighbors(p)
                        .into_iter()
                        .filter(|&q| self.cur.members(joined).contains(q))
                        .filter_map(|q| self.cur.arch().shared(p, q).first())
                        .min()?;
                    Some(Action::new(via, Op::Connect(e, joined)))
                });
                self.push(step.expect("a frontier process exists"));
            }
        }
    }

    fn raise_root(&mut self, target: ProcessId) {
        while self.cur.tree().root() != target {
            let e = self.cur.tree().pedge(target);
            self.push(Action::new(ANY, Op::Swap(e)));
        }
    }

    fn flatten(&mut self) {
        loop {
            let tree = self.cur.tree();
            let deep = self.by_label().find_map(|(e, p)| {
                let grand = tree.parent(tree.parent(p)?)?;
                Some((e, tree.pedge(grand)))
            });
            match deep {
                Some((e, up)) => self.push(Action::new(ANY, Op::Move(e, up))),
                None => break,
            }
        }
    }

    /// In a star, exchanges the labels of two leaves carrying `a` and `b`.
    fn exchange(&mut self, a: EdgeLabel, b: EdgeLabel) {
        self.push(Action::new(ANY, Op::Move(b, a)));
        self.push(Action::new(ANY, Op::Swap(b)));
        self.push(Action::new(ANY, Op::Move(b, EdgeLabel::ROOT)));
    }

    fn permute_labels(&mut self, target: &Tree) {
        for e in 1..target.n() {
            let e = EdgeLabel::new(e);
            let want = target.proc_from_label(e);
            let have = self.cur.tree().pedge(want);
            if have != e {
                self.exchange(have, e);
            }
        }
    }

    fn rebuild(&mut self, target: &Tree) {
        let mut order = vec![target.root()];
        let mut i = 0;
        while i < order.len() {
            order.extend(target.children(order[i]));
            i += 1;
        }
        for &x in &order[1..] {
            let mut path = Vec::new();
            let mut y = target.parent(x).unwrap();
            while y != target.root() {
                path.push(y);
                y = target.parent(y).unwrap();
            }
            let e = target.pedge(x);
            for &step in path.iter().rev() {
                self.push(Action::new(ANY, Op::Move(e, target.pedge(step))));
            }
        }
    }

    fn trim(&mut self, target: &Tca) {
        for c in target.arch().channels() {
            let keep = target.members(c);
            loop {
                let members = self.cur.members(c);
                let tree = self.cur.tree();
                let leaf = self.by_label().find(|&(_, p)| {
                    members.contains(p)
                        && !keep.contains(p)
                        && tree.neighbors(p).into_iter().filter(|&q| members.contains(q)).count() == 1
                });
                match leaf {
                    Some((e, _)) => self.push(Action::new(c, Op::Disc(e))),
                    None => break,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{c, p, sample, sample_joined, sample_left};

    fn e(x: u8) -> EdgeLabel {
        EdgeLabel(x)
    }

    #[test]
    fn sample_swaps() {
        let t = sample();
        assert_eq!(check_valid(&t, Action::new(c(1), Op::Swap(e(1)))), Ok(()));
        assert!(matches!(
            check_valid(&t, Action::new(c(3), Op::Swap(e(4)))),
            Err(Invalid::WouldDisconnect { process, .. }) if process == p(5)
        ));
        let swapped = apply(&t, Action::new(c(1), Op::Swap(e(1)))).unwrap();
        assert_eq!(swapped.tree().root(), p(2));
        assert_eq!(swapped.tree().parent_entry(p(1)), Some((p(2), e(1))));
        assert!(swapped.validate().is_ok());
        assert_eq!(check_valid(&t, Action::new(c(1), Op::Swap(e(2)))), Ok(()));
        // p4 would have to listen to c1, which p3 shares with p1.
        assert!(matches!(
            check_valid(&t, Action::new(c(2), Op::Swap(e(3)))),
            Err(Invalid::WouldDisconnect { channel, .. }) if channel == c(1)
        ));
    }

    #[test]
    fn non_root_swap_relabels() {
        // p4 takes p3's place under p1; p3 hangs below p4 on edge 3.
        let t = apply(&sample(), Action::new(c(3), Op::Connect(e(3), c(3)))).unwrap_err();
        assert!(matches!(t, Invalid::NotMember { .. }));
        let t = apply(&sample(), Action::new(c(2), Op::Connect(e(3), c(1)))).unwrap();
        let t = apply(&t, Action::new(c(2), Op::Swap(e(3)))).unwrap();
        assert_eq!(t.tree().parent_entry(p(4)), Some((p(1), e(2))));
        assert_eq!(t.tree().parent_entry(p(3)), Some((p(4), e(3))));
        assert!(t.validate().is_ok());
    }

    #[test]
    fn sample_moves() {
        let t = sample();
        assert!(check_valid(&t, Action::new(c(3), Op::Move(e(3), e(4)))).is_err());
        // p4 is already a child of p3, so the only moves of p4 lead to p1 or p5.
        assert!(matches!(check_valid(&t, Action::new(c(1), Op::Move(e(3), e(2)))), Err(Invalid::NotNeighbor { .. })));
        assert_eq!(check_valid(&t, Action::new(c(2), Op::Move(e(3), e(0)))), Ok(()));
        let moved = apply(&t, Action::new(c(2), Op::Move(e(3), e(0)))).unwrap();
        assert_eq!(moved.tree().parent_entry(p(4)), Some((p(1), e(3))));
        assert!(moved.validate().is_ok());
    }

    #[test]
    fn sample_connect_and_disc() {
        let t = sample();
        let left = apply(&t, Action::new(c(1), Op::Connect(e(1), c(2)))).unwrap();
        assert_eq!(left, sample_joined());
        assert!(check_valid(&t, Action::new(c(1), Op::Connect(e(1), c(3)))).is_err());
        assert!(check_valid(&t, Action::new(c(2), Op::Disc(e(3)))).is_err());
        assert_eq!(check_valid(&t, Action::new(c(2), Op::Disc(e(0)))), Ok(()));
        let right = apply(&t, Action::new(c(1), Op::Disc(e(2)))).unwrap();
        assert_eq!(right, sample_left());
        // c3 has two members, c1 can only lose p3.
        for label in 0..5 {
            assert!(check_valid(&t, Action::new(c(3), Op::Disc(e(label)))).is_err());
            let ok = check_valid(&t, Action::new(c(1), Op::Disc(e(label)))).is_ok();
            assert_eq!(ok, label == 2);
        }
    }

    #[test]
    fn nop_is_identity() {
        let t = sample();
        assert_eq!(apply(&t, Action::nop(c(3))).unwrap(), t);
    }

    #[test]
    fn out_of_range_arguments() {
        let t = sample();
        assert_eq!(check_valid(&t, Action::nop(c(4))), Err(Invalid::ChannelOutOfRange(c(4))));
        assert_eq!(check_valid(&t, Action::new(c(1), Op::Swap(e(5)))), Err(Invalid::LabelOutOfRange(e(5))));
        assert_eq!(check_valid(&t, Action::new(c(1), Op::Swap(e(0)))), Err(Invalid::RootLabel));
        assert_eq!(check_valid(&t, Action::new(c(1), Op::Move(e(1), e(1)))), Err(Invalid::SameLabel));
    }

    #[test]
    fn plans_between_samples() {
        for (a, b) in [
            (sample(), sample_left()),
            (sample_left(), sample()),
            (sample(), sample()),
            (sample_joined(), sample_left()),
        ] {
            let word = plan(&a, &b).unwrap();
            assert_eq!(replay(&a, &word).unwrap(), b);
        }
    }
}
