//! Tree-like communication architectures, reconfiguration languages over
//! them, and the distribution of diamond-closed reconfiguration automata into
//! reconfigurable asynchronous automata.

pub mod distribution;
pub mod format;
pub mod harness;
pub mod ids;
pub mod raa;
pub mod reconfig;
pub mod rldfa;
pub mod samples;
pub mod topology;

pub use distribution::{
    build_sync, consistent, distribute, initial_local_state, local_step, specialize_fixed, state_from_sync, DataValue,
    DistributedRaa, FixedRaa, LocalState, SyncData, SyncEntry,
};
pub use ids::{ChannelId, ChannelSet, EdgeLabel, LabelSet, ProcSet, ProcessId};
pub use raa::{GlobalState, Raa};
pub use reconfig::{apply, check_valid, plan, Action, Invalid, Op};
pub use rldfa::{check_diamond, independent, Diam, RlDfa, StateId};
pub use topology::{
    make_subtree, make_tree, neighborhoods, proc_from_label, validate_tca, CommArch, Neighborhood, SubTree, Tca,
    TopologyError, Tree, ValidationReport, Violation,
};
