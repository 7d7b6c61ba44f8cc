//! Operation tallies keyed by operation kind and operand data class.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use thiserror::Error;

/// Kind of arithmetic or logical operation counted by the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Add,
    Mul,
    Div,
    Xor,
    And,
    Shift,
    Cmp,
    Lookup,
    Set,
    Log,
    /// Generic floating-point operation, costed as one `Add` plus one `Mul`.
    Flop,
}

impl OpKind {
    pub const ALL: [OpKind; 11] = [
        OpKind::Add,
        OpKind::Mul,
        OpKind::Div,
        OpKind::Xor,
        OpKind::And,
        OpKind::Shift,
        OpKind::Cmp,
        OpKind::Lookup,
        OpKind::Set,
        OpKind::Log,
        OpKind::Flop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Add => "ADD",
            OpKind::Mul => "MUL",
            OpKind::Div => "DIV",
            OpKind::Xor => "XOR",
            OpKind::And => "AND",
            OpKind::Shift => "SHIFT",
            OpKind::Cmp => "CMP",
            OpKind::Lookup => "LOOKUP",
            OpKind::Set => "SET",
            OpKind::Log => "LOG",
            OpKind::Flop => "FLOP",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown operation kind '{0}'")]
pub struct UnknownOpKind(pub String);

impl FromStr for OpKind {
    type Err = UnknownOpKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        OpKind::ALL
            .into_iter()
            .find(|k| k.as_str() == upper)
            .ok_or_else(|| UnknownOpKind(s.to_string()))
    }
}

/// Operand data class. Logical, int32 and double in scalar and vector form, plus struct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataClass {
    LogicalScalar,
    LogicalVector,
    IntScalar,
    IntVector,
    DoubleScalar,
    DoubleVector,
    Struct,
}

impl DataClass {
    pub const ALL: [DataClass; 7] = [
        DataClass::LogicalScalar,
        DataClass::LogicalVector,
        DataClass::IntScalar,
        DataClass::IntVector,
        DataClass::DoubleScalar,
        DataClass::DoubleVector,
        DataClass::Struct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DataClass::LogicalScalar => "logical_scalar",
            DataClass::LogicalVector => "logical_vector",
            DataClass::IntScalar => "int_scalar",
            DataClass::IntVector => "int_vector",
            DataClass::DoubleScalar => "double_scalar",
            DataClass::DoubleVector => "double_vector",
            DataClass::Struct => "struct",
        }
    }

    pub fn is_vector(self) -> bool {
        matches!(
            self,
            DataClass::LogicalVector | DataClass::IntVector | DataClass::DoubleVector
        )
    }
}

impl fmt::Display for DataClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown data class '{0}'")]
pub struct UnknownDataClass(pub String);

impl FromStr for DataClass {
    type Err = UnknownDataClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        DataClass::ALL
            .into_iter()
            .find(|c| c.as_str() == lower)
            .ok_or_else(|| UnknownDataClass(s.to_string()))
    }
}

/// Non-negative operation counts keyed by `(kind, class)`.
///
/// Tallies form a commutative monoid under [`merge`](Self::merge) with the
/// empty tally as identity. Zero counts are never stored, so two tallies
/// compare equal iff every key has the same count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperationTally {
    counts: BTreeMap<(OpKind, DataClass), u64>,
}

impl OperationTally {
    pub const EMPTY: OperationTally = OperationTally {
        counts: BTreeMap::new(),
    };

    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(kind: OpKind, class: DataClass, count: u64) -> Self {
        let mut t = Self::new();
        t.record(kind, class, count);
        t
    }

    pub fn record(&mut self, kind: OpKind, class: DataClass, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry((kind, class)).or_insert(0) += count;
    }

    pub fn get(&self, kind: OpKind, class: DataClass) -> u64 {
        self.counts.get(&(kind, class)).copied().unwrap_or(0)
    }

    /// Count of `kind` summed over every data class.
    pub fn kind_total(&self, kind: OpKind) -> u64 {
        self.counts
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn merge(&mut self, other: &OperationTally) {
        for (&(kind, class), &n) in &other.counts {
            self.record(kind, class, n);
        }
    }

    pub fn merged(mut self, other: &OperationTally) -> Self {
        self.merge(other);
        self
    }

    pub fn scaled(&self, factor: u64) -> Self {
        let mut out = Self::new();
        for (&(kind, class), &n) in &self.counts {
            out.record(kind, class, n * factor);
        }
        out
    }

    /// Replaces every `Flop` by one `Add` and one `Mul` of the same class.
    pub fn expanded(&self) -> Self {
        let mut out = Self::new();
        for (&(kind, class), &n) in &self.counts {
            if kind == OpKind::Flop {
                out.record(OpKind::Add, class, n);
                out.record(OpKind::Mul, class, n);
            } else {
                out.record(kind, class, n);
            }
        }
        out
    }

    /// Sum of all counts, with `Flop` counted once.
    pub fn total_ops(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OpKind, DataClass, u64)> + '_ {
        self.counts.iter().map(|(&(k, c), &n)| (k, c, n))
    }

    pub fn keys(&self) -> impl Iterator<Item = (OpKind, DataClass)> + '_ {
        self.counts.keys().copied()
    }
}

impl AddAssign<&OperationTally> for OperationTally {
    fn add_assign(&mut self, rhs: &OperationTally) {
        self.merge(rhs);
    }
}

impl Add for OperationTally {
    type Output = OperationTally;

    fn add(self, rhs: OperationTally) -> OperationTally {
        self.merged(&rhs)
    }
}

impl<'a> std::iter::Sum<&'a OperationTally> for OperationTally {
    fn sum<I: Iterator<Item = &'a OperationTally>>(iter: I) -> Self {
        iter.fold(OperationTally::new(), |acc, t| acc.merged(t))
    }
}

impl std::iter::Sum for OperationTally {
    fn sum<I: Iterator<Item = OperationTally>>(iter: I) -> Self {
        iter.fold(OperationTally::new(), |acc, t| acc + t)
    }
}
