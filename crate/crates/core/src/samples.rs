//! Small fixed instances used by tests, examples and benchmarks.
//!
//! Process `p(i)` and channel `c(i)` are numbered from 1 so that the
//! instances match the names used in files; internally they are `i - 1`.

use std::collections::HashMap;

use crate::ids::{ChannelId, ChannelSet, EdgeLabel, ProcSet, ProcessId};
use crate::raa::{ExplicitProcess, ExplicitRaa};
use crate::topology::{CommArch, Tca, Tree};

/// Process `p<i>` (1-based).
pub fn p(i: usize) -> ProcessId {
    ProcessId::new(i - 1)
}

/// Channel `c<i>` (1-based).
pub fn c(i: usize) -> ChannelId {
    ChannelId::new(i - 1)
}

fn procs(ids: &[usize]) -> ProcSet {
    ids.iter().map(|&i| p(i)).collect()
}

/// Five processes, three channels: `c1 = {p1,p2,p3}`, `c2 = {p1,p3,p4}`,
/// `c3 = {p3,p5}`; the tree is rooted at `p1` with edges `(p1,p2):1`,
/// `(p1,p3):2`, `(p3,p4):3`, `(p3,p5):4`.
pub fn sample() -> Tca {
    five_process_tca(&[&[1, 2, 3], &[1, 3, 4], &[3, 5]])
}

/// [`sample`] after `p2` joins `c2`.
pub fn sample_joined() -> Tca {
    five_process_tca(&[&[1, 2, 3], &[1, 2, 3, 4], &[3, 5]])
}

/// [`sample`] after `p3` leaves `c1`.
pub fn sample_left() -> Tca {
    five_process_tca(&[&[1, 2], &[1, 3, 4], &[3, 5]])
}

fn five_process_tca(channels: &[&[usize]]) -> Tca {
    let e = EdgeLabel;
    let tree =
        Tree::new(p(1), vec![None, Some((p(1), e(1))), Some((p(1), e(2))), Some((p(3), e(3))), Some((p(3), e(4)))])
            .expect("valid tree");
    let arch = CommArch::new(channels.iter().map(|m| procs(m)).collect()).expect("valid arch");
    Tca::new(arch, tree).expect("valid architecture")
}

/// A chain `p1 - p2 - p3 - p4` rooted at `p1` (edge `i` joins `p_i` and
/// `p_{i+1}`) with `c1 = {p1,p2}`, `c2 = {p3,p4}`, `c3 = {p2,p3}`.
pub fn chain4() -> Tca {
    let e = EdgeLabel;
    let tree =
        Tree::new(p(1), vec![None, Some((p(1), e(1))), Some((p(2), e(2))), Some((p(3), e(3)))]).expect("valid tree");
    let arch = CommArch::new(vec![procs(&[1, 2]), procs(&[3, 4]), procs(&[2, 3])]).expect("valid arch");
    Tca::new(arch, tree).expect("valid architecture")
}

/// Two processes sharing a single channel.
pub fn pair() -> Tca {
    let tree = Tree::new(p(1), vec![None, Some((p(1), EdgeLabel(1)))]).expect("valid tree");
    let arch = CommArch::new(vec![procs(&[1, 2])]).expect("valid arch");
    Tca::new(arch, tree).expect("valid architecture")
}

/// Three processes over channels `c1`, `c2`, `c3` (read `a`, `b`, `c`).
/// `p1` toggles between a state hearing `a` and one hearing `a` and `c`,
/// `p2` likewise with `b`, and `p3` always hears `c` and loops on it. A
/// communication on `c` is thus possible exactly when `a` and `b` were both
/// heard an even number of times. One data value; every state accepts.
pub fn parity_raa() -> ExplicitRaa {
    let toggler = |own: ChannelId| ExplicitProcess {
        initial: 0,
        listening: vec![ChannelSet::singleton(own), ChannelSet::singleton(own).with(c(3))],
        delta: HashMap::from([((0, own), 1), ((1, own), 0)]),
        accepting: vec![true, true],
    };
    let looper = ExplicitProcess {
        initial: 0,
        listening: vec![ChannelSet::singleton(c(3))],
        delta: HashMap::from([((0, c(3)), 0)]),
        accepting: vec![true],
    };
    ExplicitRaa { processes: vec![toggler(c(1)), toggler(c(2)), looper] }
}
