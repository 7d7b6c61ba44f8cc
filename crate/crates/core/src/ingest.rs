//! Measured operator-count reports and model-versus-measurement comparison.
//!
//! A report is delimited text with the header
//! `function_path,block,operator,data_type,shape,count`, one row per
//! operator record. Rows are filtered by path prefix, attributed to a
//! block (explicit column first, then the longest matching prefix in a
//! path-to-block map), and costed through the same table as the model.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::cost::{cycles_for, cycles_to_f64, CostError, CycleCount, Cycles, InstructionCostTable};
use crate::opcount::{BlockId, PipelineTallies};
use crate::report::EnergyReport;
use crate::tally::{DataClass, OpKind, OperationTally};

pub const MEASUREMENT_HEADER: [&str; 6] = [
    "function_path",
    "block",
    "operator",
    "data_type",
    "shape",
    "count",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("measurement line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("filter config error: {0}")]
    Config(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Path-prefix allowlist and blocklist. An empty allowlist admits every path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathFilter {
    pub allow: Vec<String>,
    pub deny: Vec<String>,
}

impl PathFilter {
    pub fn admits(&self, path: &str) -> bool {
        let allowed =
            self.allow.is_empty() || self.allow.iter().any(|p| path.starts_with(p.as_str()));
        allowed && !self.deny.iter().any(|p| path.starts_with(p.as_str()))
    }

    pub fn apply(&self, report: &MeasuredReport) -> MeasuredReport {
        let kept: Vec<_> = report
            .rows
            .iter()
            .filter(|r| self.admits(&r.function_path))
            .cloned()
            .collect();
        MeasuredReport {
            filtered_out: report.filtered_out + (report.rows.len() - kept.len()),
            rows: kept,
            source: report.source.clone(),
        }
    }
}

/// Path prefix to block attribution; the longest matching prefix wins.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockMap {
    pub prefixes: BTreeMap<String, BlockId>,
}

impl BlockMap {
    pub fn resolve(&self, path: &str) -> Option<BlockId> {
        self.prefixes
            .iter()
            .filter(|(p, _)| path.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, &b)| b)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilterConfig {
    #[serde(default)]
    allow: Vec<String>,
    #[serde(default)]
    deny: Vec<String>,
    #[serde(default)]
    block_map: BTreeMap<String, String>,
}

/// Filter file: `allow` and `deny` prefix lists plus a `[block_map]` table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterConfig {
    pub filter: PathFilter,
    pub blocks: BlockMap,
}

impl FilterConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, IngestError> {
        let raw: RawFilterConfig = toml::from_str(text)
            .map_err(|e| IngestError::Config(e.to_string().trim().replace('\n', " ")))?;
        let mut prefixes = BTreeMap::new();
        for (prefix, block) in raw.block_map {
            let b = block.parse::<BlockId>().map_err(IngestError::Config)?;
            prefixes.insert(prefix, b);
        }
        Ok(FilterConfig {
            filter: PathFilter {
                allow: raw.allow,
                deny: raw.deny,
            },
            blocks: BlockMap { prefixes },
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        Self::from_toml_str(&read(path.as_ref())?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredRow {
    pub function_path: String,
    pub block: Option<BlockId>,
    pub operator: OpKind,
    pub data_type: DataClass,
    pub shape: String,
    pub count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasuredReport {
    pub rows: Vec<MeasuredRow>,
    /// Rows dropped by the path filter.
    pub filtered_out: usize,
    pub source: Option<String>,
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl MeasuredReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Warning text when nothing survived filtering.
    pub fn warning(&self) -> Option<String> {
        self.is_empty().then(|| {
            format!(
                "measurement report is empty after filtering ({} rows removed)",
                self.filtered_out
            )
        })
    }

    pub fn unattributed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.block.is_none()).count()
    }

    pub fn parse_str(
        text: &str,
        filter: &PathFilter,
        blocks: &BlockMap,
    ) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| IngestError::Row {
            line: 1,
            message: e.to_string(),
        })?;
        if header.iter().ne(MEASUREMENT_HEADER) {
            return Err(IngestError::Row {
                line: header.position().map_or(1, |p| p.line()),
                message: format!("header must be '{}'", MEASUREMENT_HEADER.join(",")),
            });
        }
        let mut report = MeasuredReport::default();
        for record in reader.records() {
            let record = record.map_err(|e| IngestError::Row {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |message: String| IngestError::Row { line, message };
            if record.len() != MEASUREMENT_HEADER.len() {
                return Err(bad(format!(
                    "expected {} columns, found {}",
                    MEASUREMENT_HEADER.len(),
                    record.len()
                )));
            }
            let function_path = record[0].to_string();
            let block = match &record[1] {
                "" => None,
                b => Some(b.parse::<BlockId>().map_err(bad)?),
            };
            let operator: OpKind = record[2].parse().map_err(|e| bad(format!("{e}")))?;
            let data_type: DataClass = record[3].parse().map_err(|e| bad(format!("{e}")))?;
            let count: u64 = record[5].parse().map_err(|_| {
                bad(format!(
                    "count '{}' is not a non-negative integer",
                    &record[5]
                ))
            })?;
            if !filter.admits(&function_path) {
                report.filtered_out += 1;
                continue;
            }
            let block = block.or_else(|| blocks.resolve(&function_path));
            report.rows.push(MeasuredRow {
                function_path,
                block,
                operator,
                data_type,
                shape: record[4].to_string(),
                count,
            });
        }
        Ok(report)
    }

    pub fn load(
        path: impl AsRef<Path>,
        filter: &PathFilter,
        blocks: &BlockMap,
    ) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let mut report = Self::parse_str(&read(path)?, filter, blocks)?;
        report.source = Some(path.display().to_string());
        Ok(report)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(MEASUREMENT_HEADER).expect("in-memory write");
        for r in &self.rows {
            let block = r.block.map(|b| b.to_string()).unwrap_or_default();
            let count = r.count.to_string();
            w.write_record([
                r.function_path.as_str(),
                &block,
                r.operator.as_str(),
                r.data_type.as_str(),
                &r.shape,
                &count,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Per-block operation tallies and the tally of rows without a block.
    pub fn tallies(&self) -> (BTreeMap<BlockId, OperationTally>, OperationTally) {
        let mut per_block: BTreeMap<BlockId, OperationTally> = BlockId::ALL
            .into_iter()
            .map(|b| (b, OperationTally::new()))
            .collect();
        let mut unattributed = OperationTally::new();
        for r in &self.rows {
            let target = match r.block {
                Some(b) => per_block.get_mut(&b).expect("all blocks present"),
                None => &mut unattributed,
            };
            target.record(r.operator, r.data_type, r.count);
        }
        (per_block, unattributed)
    }
}

pub fn parse_measurement(
    path: impl AsRef<Path>,
    filter: &PathFilter,
    blocks: &BlockMap,
) -> Result<MeasuredReport, IngestError> {
    MeasuredReport::load(path, filter, blocks)
}

/// Renders model tallies as a measurement report, one row per
/// `(block, operator, data type)`.
pub fn synthesize_report(tallies: &PipelineTallies) -> MeasuredReport {
    let mut rows = Vec::new();
    for (&block, tally) in &tallies.per_block {
        for (operator, data_type, count) in tally.iter() {
            rows.push(MeasuredRow {
                function_path: format!("model/block_{}", block.letter().to_ascii_lowercase()),
                block: Some(block),
                operator,
                data_type,
                shape: if data_type.is_vector() { "1xN" } else { "1x1" }.to_string(),
                count,
            });
        }
    }
    MeasuredReport {
        rows,
        filtered_out: 0,
        source: Some("synthesized from model tallies".to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredCycles {
    pub per_block: BTreeMap<BlockId, CycleCount>,
    pub unattributed: CycleCount,
}

/// Costs a measured report with the model's cost path.
pub fn measured_cycles(
    report: &MeasuredReport,
    table: &InstructionCostTable,
) -> Result<MeasuredCycles, CostError> {
    let (tallies, unattributed) = report.tallies();
    let mut per_block = BTreeMap::new();
    for (b, t) in tallies {
        per_block.insert(b, cycles_for(&t, table)?);
    }
    Ok(MeasuredCycles {
        per_block,
        unattributed: cycles_for(&unattributed, table)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Over,
    Under,
    Match,
    /// Nothing measured for this block; the ratio is undefined.
    Unmeasured,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Over => "over",
            Verdict::Under => "under",
            Verdict::Match => "match",
            Verdict::Unmeasured => "unmeasured",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockComparison {
    pub modeled: Cycles,
    pub measured: Cycles,
    /// `modeled / measured`, exact; `None` when nothing was measured.
    pub ratio: Option<Cycles>,
    /// `(modeled - measured) / measured`.
    pub signed_relative_error: Option<f64>,
    pub verdict: Verdict,
}

impl BlockComparison {
    pub fn new(modeled: Cycles, measured: Cycles) -> Self {
        let zero = Cycles::from_integer(0);
        if measured == zero {
            return BlockComparison {
                modeled,
                measured,
                ratio: None,
                signed_relative_error: None,
                verdict: Verdict::Unmeasured,
            };
        }
        let ratio = modeled / measured;
        let verdict = match modeled.cmp(&measured) {
            std::cmp::Ordering::Greater => Verdict::Over,
            std::cmp::Ordering::Less => Verdict::Under,
            std::cmp::Ordering::Equal => Verdict::Match,
        };
        BlockComparison {
            modeled,
            measured,
            ratio: Some(ratio),
            signed_relative_error: Some(cycles_to_f64(&ratio) - 1.0),
            verdict,
        }
    }

    pub fn ratio_f64(&self) -> Option<f64> {
        self.ratio.as_ref().map(cycles_to_f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub per_block: BTreeMap<BlockId, BlockComparison>,
    pub total: BlockComparison,
    pub unattributed: Cycles,
}

impl ComparisonReport {
    pub fn blocks_with(&self, verdict: Verdict) -> Vec<BlockId> {
        self.per_block
            .iter()
            .filter(|(_, c)| c.verdict == verdict)
            .map(|(&b, _)| b)
            .collect()
    }
}

pub fn compare(modeled: &EnergyReport, measured: &MeasuredCycles) -> ComparisonReport {
    let zero = CycleCount::default();
    let mut per_block = BTreeMap::new();
    let mut measured_total = Cycles::from_integer(0);
    for id in BlockId::ALL {
        let m = measured.per_block.get(&id).unwrap_or(&zero).cycles;
        measured_total += m;
        per_block.insert(id, BlockComparison::new(modeled.block(id).cycles, m));
    }
    ComparisonReport {
        per_block,
        total: BlockComparison::new(modeled.total.cycles, measured_total),
        unattributed: measured.unattributed.cycles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::EnergyParams;
    use crate::opcount::tally_pipeline;
    use crate::report::build_report;
    use crate::scenario::Scenario;
    use proptest::prelude::*;

    const SAMPLE: &str = "\
function_path,block,operator,data_type,shape,count
/5g/nrCRCEncode,A,XOR,logical_vector,1x32,100
/5g/nrCRCEncode,A,AND,logical_vector,1x32,50
/5g/nrOFDMModulate,,FLOP,double_vector,1024x14,10
/coder/aux/emlrtHelper,,ADD,int_scalar,1x1,999
";

    fn uniform() -> InstructionCostTable {
        InstructionCostTable::uniform(1, Cycles::from_integer(1))
    }

    fn map() -> BlockMap {
        BlockMap {
            prefixes: [
                ("/5g/nrOFDM".to_string(), BlockId::D),
                ("/5g/".to_string(), BlockId::B),
            ]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn filter_drops_auxiliary_rows() {
        let filter = PathFilter {
            allow: vec!["/5g/".into()],
            deny: vec!["/coder/aux".into()],
        };
        let r = MeasuredReport::parse_str(SAMPLE, &filter, &map()).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.filtered_out, 1);
        assert_eq!(r.rows[2].block, Some(BlockId::D));
        assert_eq!(r.rows[0].block, Some(BlockId::A));
    }

    #[test]
    fn unknown_operator_names_the_line() {
        let text = SAMPLE.replace("AND", "FOO");
        match MeasuredReport::parse_str(&text, &PathFilter::default(), &BlockMap::default()) {
            Err(IngestError::Row { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("FOO"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = SAMPLE.replace("int_scalar", "int64");
        assert!(matches!(
            MeasuredReport::parse_str(&text, &PathFilter::default(), &BlockMap::default()),
            Err(IngestError::Row { line: 5, .. })
        ));
        let text = SAMPLE.replace(",10\n", ",-10\n");
        assert!(matches!(
            MeasuredReport::parse_str(&text, &PathFilter::default(), &BlockMap::default()),
            Err(IngestError::Row { line: 4, .. })
        ));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(
            MeasuredReport::parse_str("a,b\n", &PathFilter::default(), &BlockMap::default())
                .is_err()
        );
    }

    #[test]
    fn unmapped_rows_are_unattributed() {
        let r = MeasuredReport::parse_str(SAMPLE, &PathFilter::default(), &BlockMap::default())
            .unwrap();
        assert_eq!(r.unattributed_rows(), 2);
        let c = measured_cycles(&r, &uniform()).unwrap();
        assert_eq!(c.unattributed.cycles, Cycles::from_integer(20 + 999));
        assert_eq!(c.per_block[&BlockId::A].cycles, Cycles::from_integer(150));
    }

    #[test]
    fn measured_cycle_examples() {
        let single = MeasuredReport {
            rows: vec![MeasuredRow {
                function_path: "x".into(),
                block: Some(BlockId::A),
                operator: OpKind::Xor,
                data_type: DataClass::LogicalVector,
                shape: String::new(),
                count: 100,
            }],
            ..Default::default()
        };
        let c = measured_cycles(&single, &uniform()).unwrap();
        assert_eq!(c.per_block[&BlockId::A].cycles, Cycles::from_integer(100));

        let empty = measured_cycles(&MeasuredReport::default(), &uniform()).unwrap();
        assert_eq!(empty.per_block.len(), 8);
        assert!(empty
            .per_block
            .values()
            .all(|c| *c == CycleCount::default()));

        let mut twice = single.clone();
        twice.rows.push(single.rows[0].clone());
        let c2 = measured_cycles(&twice, &uniform()).unwrap();
        assert_eq!(c2.per_block[&BlockId::A].cycles, Cycles::from_integer(200));
    }

    #[test]
    fn uncovered_measurement_is_an_error() {
        let header =
            "op_kind,data_class,operand_location,micro_ops,cycles\nXOR,logical_vector,mmx,1,1\n";
        let table = InstructionCostTable::parse(header).unwrap();
        let r = MeasuredReport::parse_str(SAMPLE, &PathFilter::default(), &map()).unwrap();
        let err = measured_cycles(&r, &table).unwrap_err();
        assert!(err.to_string().contains("AND,logical_vector,mmx"), "{err}");
    }

    fn model_report() -> (EnergyReport, PipelineTallies) {
        let tallies = tally_pipeline(&Scenario::reference()).unwrap();
        let r = build_report(
            &tallies,
            &InstructionCostTable::bundled(),
            EnergyParams::new(1e-25, 2.1e9).unwrap(),
        )
        .unwrap();
        (r, tallies)
    }

    #[test]
    fn self_comparison_is_exact() {
        let (model, tallies) = model_report();
        let measured = measured_cycles(
            &synthesize_report(&tallies),
            &InstructionCostTable::bundled(),
        )
        .unwrap();
        let cmp = compare(&model, &measured);
        for c in cmp.per_block.values() {
            assert_eq!(c.ratio, Some(Cycles::from_integer(1)));
            assert_eq!(c.signed_relative_error, Some(0.0));
            assert_eq!(c.verdict, Verdict::Match);
        }
    }

    #[test]
    fn missing_block_is_unmeasured() {
        let (model, tallies) = model_report();
        let mut synth = synthesize_report(&tallies);
        synth.rows.retain(|r| r.block != Some(BlockId::D));
        let cmp = compare(
            &model,
            &measured_cycles(&synth, &InstructionCostTable::bundled()).unwrap(),
        );
        let d = &cmp.per_block[&BlockId::D];
        assert_eq!(d.verdict, Verdict::Unmeasured);
        assert!(d.ratio.is_none() && d.signed_relative_error.is_none());
        assert_eq!(cmp.blocks_with(Verdict::Unmeasured), vec![BlockId::D]);
        assert_eq!(cmp.total.verdict, Verdict::Over);
    }

    #[test]
    fn filter_config_from_toml() {
        let cfg = FilterConfig::from_toml_str(
            "allow = [\"/5g/\"]\ndeny = [\"/5g/aux\"]\n[block_map]\n\"/5g/nrCRC\" = \"A\"\n\"/5g/nrCRCDecode\" = \"h\"\n",
        )
        .unwrap();
        assert!(cfg.filter.admits("/5g/nrLDPC"));
        assert!(!cfg.filter.admits("/5g/aux/x"));
        assert!(!cfg.filter.admits("/other"));
        assert_eq!(cfg.blocks.resolve("/5g/nrCRCEncode"), Some(BlockId::A));
        assert_eq!(cfg.blocks.resolve("/5g/nrCRCDecode/x"), Some(BlockId::H));
        assert_eq!(cfg.blocks.resolve("/elsewhere"), None);
        assert!(FilterConfig::from_toml_str("[block_map]\n\"/x\" = \"Q\"\n").is_err());
        assert!(FilterConfig::from_toml_str("allowlist = []\n").is_err());
    }

    #[test]
    fn empty_after_filter_warns() {
        let filter = PathFilter {
            allow: vec!["/nothing".into()],
            deny: vec![],
        };
        let r = MeasuredReport::parse_str(SAMPLE, &filter, &BlockMap::default()).unwrap();
        assert!(r.is_empty());
        assert!(r.warning().unwrap().contains("4 rows"));
    }

    fn arb_row() -> impl Strategy<Value = MeasuredRow> {
        (
            "[a-z/_]{1,12}",
            prop::option::of(0usize..8),
            0usize..11,
            0usize..7,
            "[0-9x]{0,5}",
            any::<u64>(),
        )
            .prop_map(|(path, b, k, c, shape, count)| MeasuredRow {
                function_path: format!("/{path}"),
                block: b.map(|i| BlockId::ALL[i]),
                operator: OpKind::ALL[k],
                data_type: DataClass::ALL[c],
                shape,
                count,
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(arb_row(), 0..20)) {
            let r = MeasuredReport { rows, ..Default::default() };
            let back = MeasuredReport::parse_str(&r.to_csv(), &PathFilter::default(), &BlockMap::default()).unwrap();
            prop_assert_eq!(back.rows, r.rows);
        }

        #[test]
        fn filtering_is_idempotent(
            rows in prop::collection::vec(arb_row(), 0..20),
            allow in prop::collection::vec("/[a-z]{0,2}", 0..3),
            deny in prop::collection::vec("/[a-z]{1,2}", 0..3),
        ) {
            let f = PathFilter { allow, deny };
            let r = MeasuredReport { rows, ..Default::default() };
            let once = f.apply(&r);
            let twice = f.apply(&once);
            prop_assert_eq!(&once.rows, &twice.rows);
        }

        #[test]
        fn measured_cycles_additive_over_concatenation(
            a in prop::collection::vec(arb_row(), 0..10),
            b in prop::collection::vec(arb_row(), 0..10),
        ) {
            let cap = |mut v: Vec<MeasuredRow>| { v.iter_mut().for_each(|r| r.count %= 1 << 40); v };
            let (a, b) = (cap(a), cap(b));
            let table = InstructionCostTable::bundled();
            let ra = MeasuredReport { rows: a.clone(), ..Default::default() };
            let rb = MeasuredReport { rows: b.clone(), ..Default::default() };
            let rab = MeasuredReport { rows: [a, b].concat(), ..Default::default() };
            let (ca, cb, cab) = (
                measured_cycles(&ra, &table).unwrap(),
                measured_cycles(&rb, &table).unwrap(),
                measured_cycles(&rab, &table).unwrap(),
            );
            for id in BlockId::ALL {
                prop_assert_eq!(cab.per_block[&id], ca.per_block[&id] + cb.per_block[&id]);
            }
            prop_assert_eq!(cab.unattributed, ca.unattributed + cb.unattributed);
        }

        #[test]
        fn ratios_survive_table_scaling(factor in 1u64..1000) {
            let (_, tallies) = model_report();
            let table = InstructionCostTable::bundled();
            let energy = EnergyParams::new(1e-25, 2.1e9).unwrap();
            let mut synth = synthesize_report(&tallies);
            for r in synth.rows.iter_mut() {
                r.count = r.count / 3 + 1;
            }
            let base = compare(
                &build_report(&tallies, &table, energy).unwrap(),
                &measured_cycles(&synth, &table).unwrap(),
            );
            let scaled_table = table.scaled(factor);
            let scaled = compare(
                &build_report(&tallies, &scaled_table, energy).unwrap(),
                &measured_cycles(&synth, &scaled_table).unwrap(),
            );
            for id in BlockId::ALL {
                prop_assert_eq!(base.per_block[&id].ratio, scaled.per_block[&id].ratio);
            }
        }
    }
}
