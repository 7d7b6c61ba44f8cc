//! Instruction cost tables and the cycle / energy conversion.
//!
//! Counts are converted by looking up `(kind, class, location)` in a table
//! of micro-op and cycle costs, where the operand location is a function of
//! the data class. Cycles accumulate as exact rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::path::Path;

use num_rational::Ratio;
use thiserror::Error;

use crate::tally::{DataClass, OpKind, OperationTally};

/// Exact cycle count.
pub type Cycles = Ratio<u128>;

/// Environment variable naming a cost table to use instead of the bundled one.
pub const COST_TABLE_ENV: &str = "NR_ENERGY_COST_TABLE";

const DEFAULT_TABLE: &str = include_str!("../data/default_costs.csv");
const HEADER: [&str; 5] = [
    "op_kind",
    "data_class",
    "operand_location",
    "micro_ops",
    "cycles",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperandLocation {
    Register,
    Mmx,
    Xmm,
    Memory,
}

impl OperandLocation {
    pub const ALL: [OperandLocation; 4] = [
        OperandLocation::Register,
        OperandLocation::Mmx,
        OperandLocation::Xmm,
        OperandLocation::Memory,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperandLocation::Register => "register",
            OperandLocation::Mmx => "mmx",
            OperandLocation::Xmm => "xmm",
            OperandLocation::Memory => "memory",
        }
    }
}

impl fmt::Display for OperandLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OperandLocation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        OperandLocation::ALL
            .into_iter()
            .find(|l| l.as_str() == lower)
            .ok_or_else(|| format!("unknown operand location '{s}'"))
    }
}

/// Scalars live in registers, logical and integer vectors in mmx registers,
/// double vectors in xmm registers, structs in memory.
pub fn assign_location(class: DataClass) -> OperandLocation {
    match class {
        DataClass::LogicalScalar | DataClass::IntScalar | DataClass::DoubleScalar => {
            OperandLocation::Register
        }
        DataClass::LogicalVector | DataClass::IntVector => OperandLocation::Mmx,
        DataClass::DoubleVector => OperandLocation::Xmm,
        DataClass::Struct => OperandLocation::Memory,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostEntry {
    pub micro_ops: u64,
    pub cycles: Cycles,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableMetadata {
    pub source: Option<String>,
    pub date: Option<String>,
}

pub type CostKey = (OpKind, DataClass, OperandLocation);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstructionCostTable {
    entries: BTreeMap<CostKey, CostEntry>,
    pub metadata: TableMetadata,
}

#[derive(Debug, Error)]
pub enum CostError {
    #[error("cannot read cost table '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cost table is empty")]
    Empty,
    #[error("cost table line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("cost table line {line}: duplicate entry {kind},{class},{location}")]
    Duplicate {
        line: u64,
        kind: OpKind,
        class: DataClass,
        location: OperandLocation,
    },
    #[error("cost table has no entry for {kind},{class},{location}")]
    Uncovered {
        kind: OpKind,
        class: DataClass,
        location: OperandLocation,
    },
    #[error("energy parameter {name} must be positive and finite, got {value}")]
    Energy { name: &'static str, value: f64 },
}

/// Parses `12`, `0.25` or `1/3` as an exact non-negative rational.
pub fn parse_cycles(text: &str) -> Option<Cycles> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: u128 = n.trim().parse().ok()?;
        let d: u128 = d.trim().parse().ok()?;
        return (d != 0).then(|| Ratio::new(n, d));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 18
    {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: u128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    Some(Ratio::new(num, 10u128.pow(frac.len() as u32)))
}

fn parse_metadata(text: &str) -> TableMetadata {
    let mut meta = TableMetadata::default();
    for line in text.lines() {
        let Some(comment) = line.trim().strip_prefix('#') else {
            continue;
        };
        if let Some((key, value)) = comment.split_once(':') {
            let value = value.trim().to_string();
            match key.trim().to_ascii_lowercase().as_str() {
                "source" if meta.source.is_none() => meta.source = Some(value),
                "date" if meta.date.is_none() => meta.date = Some(value),
                _ => {}
            }
        }
    }
    meta
}

impl InstructionCostTable {
    pub fn parse(text: &str) -> Result<Self, CostError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| CostError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if header.is_empty() || header.iter().all(str::is_empty) {
            return Err(CostError::Empty);
        }
        if header.iter().ne(HEADER) {
            return Err(CostError::Parse {
                line: header.position().map_or(1, |p| p.line()),
                message: format!("header must be '{}'", HEADER.join(",")),
            });
        }

        let mut entries = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| CostError::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |message: String| CostError::Parse { line, message };
            if record.len() != HEADER.len() {
                return Err(bad(format!(
                    "expected {} columns, found {}",
                    HEADER.len(),
                    record.len()
                )));
            }
            let kind: OpKind = record[0].parse().map_err(|e| bad(format!("{e}")))?;
            let class: DataClass = record[1].parse().map_err(|e| bad(format!("{e}")))?;
            let location: OperandLocation = record[2].parse().map_err(bad)?;
            let micro_ops: u64 = record[3].parse().map_err(|_| {
                bad(format!(
                    "micro_ops '{}' is not a non-negative integer",
                    &record[3]
                ))
            })?;
            let cycles = parse_cycles(&record[4]).ok_or_else(|| {
                bad(format!(
                    "cycles '{}' is not a non-negative number",
                    &record[4]
                ))
            })?;
            if entries
                .insert((kind, class, location), CostEntry { micro_ops, cycles })
                .is_some()
            {
                return Err(CostError::Duplicate {
                    line,
                    kind,
                    class,
                    location,
                });
            }
        }
        if entries.is_empty() {
            return Err(CostError::Empty);
        }
        Ok(InstructionCostTable {
            entries,
            metadata: parse_metadata(text),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CostError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CostError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled cost table is well-formed")
    }

    pub fn bundled_text() -> &'static str {
        DEFAULT_TABLE
    }

    /// The table named by [`COST_TABLE_ENV`], or the bundled one.
    pub fn default_table() -> Result<Self, CostError> {
        match std::env::var_os(COST_TABLE_ENV) {
            Some(p) if !p.is_empty() => Self::load(p),
            _ => Ok(Self::bundled()),
        }
    }

    /// Same cost for every non-FLOP kind and every data class.
    pub fn uniform(micro_ops: u64, cycles: Cycles) -> Self {
        let mut entries = BTreeMap::new();
        for kind in OpKind::ALL.into_iter().filter(|&k| k != OpKind::Flop) {
            for class in DataClass::ALL {
                entries.insert(
                    (kind, class, assign_location(class)),
                    CostEntry { micro_ops, cycles },
                );
            }
        }
        InstructionCostTable {
            entries,
            metadata: TableMetadata {
                source: Some(format!("uniform {micro_ops} uop / {cycles} cycle")),
                date: None,
            },
        }
    }

    pub fn insert(
        &mut self,
        kind: OpKind,
        class: DataClass,
        location: OperandLocation,
        entry: CostEntry,
    ) {
        self.entries.insert((kind, class, location), entry);
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let f = u128::from(factor);
        InstructionCostTable {
            entries: self
                .entries
                .iter()
                .map(|(&k, e)| {
                    (
                        k,
                        CostEntry {
                            micro_ops: e.micro_ops * factor,
                            cycles: e.cycles * f,
                        },
                    )
                })
                .collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn get(&self, key: &CostKey) -> Option<&CostEntry> {
        self.entries.get(key)
    }

    /// Entry for `(kind, class)` at the location the class is assigned to.
    pub fn lookup(&self, kind: OpKind, class: DataClass) -> Result<&CostEntry, CostError> {
        let location = assign_location(class);
        self.entries
            .get(&(kind, class, location))
            .ok_or(CostError::Uncovered {
                kind,
                class,
                location,
            })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CostKey, &CostEntry)> {
        self.entries.iter()
    }

    /// Writes the table back in its file format.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(s) = &self.metadata.source {
            out.push_str(&format!("# source: {s}\n"));
        }
        if let Some(d) = &self.metadata.date {
            out.push_str(&format!("# date: {d}\n"));
        }
        out.push_str(&HEADER.join(","));
        out.push('\n');
        for (&(k, c, l), e) in &self.entries {
            out.push_str(&format!("{k},{c},{l},{},{}\n", e.micro_ops, e.cycles));
        }
        out
    }
}

/// Micro-ops and exact cycles of some workload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleCount {
    pub micro_ops: u128,
    pub cycles: Cycles,
}

impl Default for CycleCount {
    fn default() -> Self {
        CycleCount {
            micro_ops: 0,
            cycles: Cycles::from_integer(0),
        }
    }
}

impl Add for CycleCount {
    type Output = CycleCount;

    fn add(self, rhs: CycleCount) -> CycleCount {
        CycleCount {
            micro_ops: self.micro_ops + rhs.micro_ops,
            cycles: self.cycles + rhs.cycles,
        }
    }
}

impl AddAssign for CycleCount {
    fn add_assign(&mut self, rhs: CycleCount) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for CycleCount {
    fn sum<I: Iterator<Item = CycleCount>>(iter: I) -> Self {
        iter.fold(CycleCount::default(), Add::add)
    }
}

/// Costs a tally. `Flop` counts are expanded to `Add + Mul` before lookup.
pub fn cycles_for(
    tally: &OperationTally,
    table: &InstructionCostTable,
) -> Result<CycleCount, CostError> {
    let mut acc = CycleCount::default();
    for (kind, class, n) in tally.expanded().iter() {
        let e = table.lookup(kind, class)?;
        let n = u128::from(n);
        acc.micro_ops += n * u128::from(e.micro_ops);
        acc.cycles += e.cycles * n;
    }
    Ok(acc)
}

/// Energy per cycle `kappa * f^2`, in joules.
pub fn energy_per_cycle(kappa: f64, clock_hz: f64) -> f64 {
    kappa * clock_hz * clock_hz
}

pub fn cycles_to_f64(c: &Cycles) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    /// J*s^2
    pub kappa: f64,
    pub clock_hz: f64,
}

impl EnergyParams {
    pub fn new(kappa: f64, clock_hz: f64) -> Result<Self, CostError> {
        for (name, value) in [("kappa", kappa), ("clock_hz", clock_hz)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CostError::Energy { name, value });
            }
        }
        Ok(EnergyParams { kappa, clock_hz })
    }

    pub fn epsilon(&self) -> f64 {
        energy_per_cycle(self.kappa, self.clock_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one() -> Cycles {
        Cycles::from_integer(1)
    }

    #[test]
    fn location_rule() {
        assert_eq!(
            assign_location(DataClass::DoubleScalar),
            OperandLocation::Register
        );
        assert_eq!(
            assign_location(DataClass::LogicalScalar),
            OperandLocation::Register
        );
        assert_eq!(assign_location(DataClass::IntVector), OperandLocation::Mmx);
        assert_eq!(
            assign_location(DataClass::LogicalVector),
            OperandLocation::Mmx
        );
        assert_eq!(
            assign_location(DataClass::DoubleVector),
            OperandLocation::Xmm
        );
        assert_eq!(assign_location(DataClass::Struct), OperandLocation::Memory);
    }

    #[test]
    fn bundled_table_covers_every_kind_and_class() {
        let t = InstructionCostTable::bundled();
        for kind in OpKind::ALL.into_iter().filter(|&k| k != OpKind::Flop) {
            for class in DataClass::ALL {
                t.lookup(kind, class).unwrap();
            }
        }
        assert_eq!(t.len(), 70);
        assert!(t.metadata.source.as_deref().unwrap().contains("Fog"));
        assert_eq!(t.metadata.date.as_deref(), Some("2022-11"));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            InstructionCostTable::parse(""),
            Err(CostError::Empty)
        ));
        assert!(matches!(
            InstructionCostTable::parse("# only comments\n"),
            Err(CostError::Empty)
        ));
        let header = HEADER.join(",");
        assert!(matches!(
            InstructionCostTable::parse(&format!("{header}\n")),
            Err(CostError::Empty)
        ));
        let dup = format!("{header}\nMUL,double_vector,xmm,1,0.5\nMUL,double_vector,xmm,1,1\n");
        assert!(matches!(
            InstructionCostTable::parse(&dup),
            Err(CostError::Duplicate { line: 3, .. })
        ));
        let bad = format!("# c\n{header}\nMUL,double_vector,xmm,1,0.5\nMUL,float,xmm,1,1\n");
        match InstructionCostTable::parse(&bad) {
            Err(CostError::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("float"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let neg = format!("{header}\nADD,struct,memory,1,-1\n");
        assert!(matches!(
            InstructionCostTable::parse(&neg),
            Err(CostError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            InstructionCostTable::parse("a,b,c\nADD,struct,memory,1,1\n"),
            Err(CostError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn cycles_parsing() {
        assert_eq!(parse_cycles("0.25"), Some(Ratio::new(1, 4)));
        assert_eq!(parse_cycles("1/3"), Some(Ratio::new(1, 3)));
        assert_eq!(parse_cycles("6"), Some(Ratio::from_integer(6)));
        assert_eq!(parse_cycles(".5"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_cycles("1/0"), None);
        assert_eq!(parse_cycles("-1"), None);
        assert_eq!(parse_cycles("x"), None);
        assert_eq!(parse_cycles("."), None);
    }

    #[test]
    fn csv_round_trip() {
        let t = InstructionCostTable::bundled();
        assert_eq!(InstructionCostTable::parse(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn uniform_cycles_example() {
        let table = InstructionCostTable::uniform(1, one());
        let mut t = OperationTally::new();
        t.record(OpKind::Xor, DataClass::LogicalVector, 6000);
        t.record(OpKind::Lookup, DataClass::IntVector, 250);
        t.record(OpKind::Shift, DataClass::IntVector, 250);
        let c = cycles_for(&t, &table).unwrap();
        assert_eq!(c.cycles, Cycles::from_integer(6500));
        assert_eq!(c.micro_ops, 6500);
        assert_eq!(
            cycles_for(&OperationTally::new(), &table).unwrap(),
            CycleCount::default()
        );
    }

    #[test]
    fn flop_expansion_costs_add_and_mul() {
        let mut table = InstructionCostTable::uniform(1, one());
        table.insert(
            OpKind::Mul,
            DataClass::DoubleVector,
            OperandLocation::Xmm,
            CostEntry {
                micro_ops: 1,
                cycles: Cycles::from_integer(2),
            },
        );
        let t = OperationTally::with(OpKind::Flop, DataClass::DoubleVector, 10);
        assert_eq!(
            cycles_for(&t, &table).unwrap().cycles,
            Cycles::from_integer(30)
        );
    }

    #[test]
    fn uncovered_key_is_an_error() {
        let header = HEADER.join(",");
        let table =
            InstructionCostTable::parse(&format!("{header}\nADD,double_vector,xmm,1,1\n")).unwrap();
        let t = OperationTally::with(OpKind::Flop, DataClass::DoubleVector, 1);
        match cycles_for(&t, &table) {
            Err(CostError::Uncovered {
                kind,
                class,
                location,
            }) => {
                assert_eq!(
                    (kind, class, location),
                    (OpKind::Mul, DataClass::DoubleVector, OperandLocation::Xmm)
                );
            }
            other => panic!("unexpected {other:?}"),
        }
        // A row at the wrong location does not count as coverage.
        let table =
            InstructionCostTable::parse(&format!("{header}\nXOR,double_vector,memory,1,1\n"))
                .unwrap();
        let t = OperationTally::with(OpKind::Xor, DataClass::DoubleVector, 1);
        assert!(cycles_for(&t, &table).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let eps = energy_per_cycle(1e-25, 2.1e9);
        assert!((eps - 4.41e-7).abs() <= 1e-12 * 4.41e-7);
        assert_eq!(energy_per_cycle(1e-25, 0.0), 0.0);
        assert_eq!(energy_per_cycle(2e-25, 2.1e9), 2.0 * eps);
        assert!(EnergyParams::new(0.0, 1.0).is_err());
        assert!(EnergyParams::new(1e-25, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn raising_an_entry_never_lowers_cycles(
            counts in prop::collection::vec((0usize..11, 0usize..7, 0u64..10_000), 1..10),
            pick in 0usize..70,
            bump in 1u64..50,
        ) {
            let mut t = OperationTally::new();
            for (k, c, n) in counts {
                t.record(OpKind::ALL[k], DataClass::ALL[c], n);
            }
            let base = InstructionCostTable::bundled();
            let before = cycles_for(&t, &base).unwrap().cycles;
            let (&key, entry) = base.iter().nth(pick).unwrap();
            let mut raised = base.clone();
            raised.insert(key.0, key.1, key.2, CostEntry {
                micro_ops: entry.micro_ops,
                cycles: entry.cycles + Cycles::from_integer(u128::from(bump)),
            });
            prop_assert!(cycles_for(&t, &raised).unwrap().cycles >= before);
        }
    }
}
