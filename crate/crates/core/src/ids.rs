//! Dense identifiers and small bit sets over them.
//!
//! Every universe in this crate (processes, channels, edge labels) is capped
//! at 64 elements so that sets fit in a single machine word.

use std::fmt;

/// Upper bound on the number of processes and on the number of channels.
pub const MAX_UNIVERSE: usize = 64;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u8);

        impl $name {
            pub fn new(index: usize) -> Self {
                assert!(index < MAX_UNIVERSE, "{} index {} out of range", stringify!($name), index);
                $name(index as u8)
            }

            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

dense_id!(
    /// A process, identified by its position in `0..n`.
    ProcessId,
    "p"
);
dense_id!(
    /// A communication channel, identified by its position in `0..|CH|`.
    ChannelId,
    "c"
);
dense_id!(
    /// Label of a tree edge. Labels `1..n` are in bijection with the edges;
    /// `0` stands for the root (which has no parent edge).
    EdgeLabel,
    "e"
);

impl EdgeLabel {
    pub const ROOT: EdgeLabel = EdgeLabel(0);

    pub fn is_root(self) -> bool {
        self.0 == 0
    }
}

macro_rules! bit_set {
    ($(#[$meta:meta])* $name:ident, $elem:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u64);

        impl $name {
            pub const EMPTY: $name = $name(0);

            pub fn from_bits(bits: u64) -> Self {
                $name(bits)
            }

            pub fn bits(self) -> u64 {
                self.0
            }

            /// The set `{0, .., len-1}`.
            pub fn full(len: usize) -> Self {
                assert!(len <= MAX_UNIVERSE);
                if len == 64 { $name(u64::MAX) } else { $name((1u64 << len) - 1) }
            }

            pub fn singleton(x: $elem) -> Self {
                $name(1u64 << x.0)
            }

            #[inline]
            pub fn contains(self, x: $elem) -> bool {
                self.0 & (1u64 << x.0) != 0
            }

            #[inline]
            pub fn insert(&mut self, x: $elem) -> bool {
                let fresh = !self.contains(x);
                self.0 |= 1u64 << x.0;
                fresh
            }

            #[inline]
            pub fn remove(&mut self, x: $elem) -> bool {
                let present = self.contains(x);
                self.0 &= !(1u64 << x.0);
                present
            }

            pub fn with(mut self, x: $elem) -> Self {
                self.insert(x);
                self
            }

            pub fn without(mut self, x: $elem) -> Self {
                self.remove(x);
                self
            }

            #[inline]
            pub fn union(self, other: Self) -> Self {
                $name(self.0 | other.0)
            }

            #[inline]
            pub fn intersection(self, other: Self) -> Self {
                $name(self.0 & other.0)
            }

            #[inline]
            pub fn difference(self, other: Self) -> Self {
                $name(self.0 & !other.0)
            }

            #[inline]
            pub fn is_disjoint(self, other: Self) -> bool {
                self.0 & other.0 == 0
            }

            #[inline]
            pub fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            #[inline]
            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            #[inline]
            pub fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            pub fn first(self) -> Option<$elem> {
                if self.0 == 0 { None } else { Some($elem(self.0.trailing_zeros() as u8)) }
            }

            /// Elements in ascending order.
            pub fn iter(self) -> impl Iterator<Item = $elem> {
                let mut rest = self.0;
                std::iter::from_fn(move || {
                    if rest == 0 {
                        return None;
                    }
                    let i = rest.trailing_zeros();
                    rest &= rest - 1;
                    Some($elem(i as u8))
                })
            }
        }

        impl FromIterator<$elem> for $name {
            fn from_iter<I: IntoIterator<Item = $elem>>(iter: I) -> Self {
                let mut s = $name::EMPTY;
                for x in iter {
                    s.insert(x);
                }
                s
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{{")?;
                for (i, x) in self.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, "}}")
            }
        }
    };
}

bit_set!(
    /// A set of processes.
    ProcSet,
    ProcessId
);
bit_set!(
    /// A set of channels.
    ChannelSet,
    ChannelId
);
bit_set!(
    /// A set of edge labels.
    LabelSet,
    EdgeLabel
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_basics() {
        let mut s = ChannelSet::EMPTY;
        assert!(s.insert(ChannelId(3)));
        assert!(!s.insert(ChannelId(3)));
        s.insert(ChannelId(0));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![ChannelId(0), ChannelId(3)]);
        assert_eq!(s.len(), 2);
        assert!(s.remove(ChannelId(0)));
        assert_eq!(s.first(), Some(ChannelId(3)));
        assert_eq!(ChannelSet::full(64).len(), 64);
        assert_eq!(format!("{}", ProcSet::full(3)), "{p0,p1,p2}");
    }
}
