//! LDPC base graphs and the base-graph / lifting-size selection rules.
//!
//! The two NR base graphs ship as plain-text descriptors with one non-null
//! entry per line (`row col shift`). Only the structure (dimensions and the
//! number of non-null entries) feeds the operation counts; the shift values
//! are kept so the descriptor stays a faithful copy of the standard table.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::scenario::CodeRate;

const BG1_DATA: &str = include_str!("../data/bg1.txt");
const BG2_DATA: &str = include_str!("../data/bg2.txt");

/// Largest code-block size (information bits incl. CB-CRC) for BG1 and BG2.
pub const BG1_MAX_CB: u64 = 8448;
pub const BG2_MAX_CB: u64 = 3840;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseGraphId {
    Bg1,
    Bg2,
}

impl BaseGraphId {
    pub fn number(self) -> u8 {
        match self {
            BaseGraphId::Bg1 => 1,
            BaseGraphId::Bg2 => 2,
        }
    }

    pub fn dims(self) -> (u64, u64) {
        match self {
            BaseGraphId::Bg1 => (46, 68),
            BaseGraphId::Bg2 => (42, 52),
        }
    }

    /// Number of systematic columns `K_b`, so that `K = info_cols * Z`.
    pub fn info_cols(self) -> u64 {
        match self {
            BaseGraphId::Bg1 => 22,
            BaseGraphId::Bg2 => 10,
        }
    }

    pub fn max_code_block(self) -> u64 {
        match self {
            BaseGraphId::Bg1 => BG1_MAX_CB,
            BaseGraphId::Bg2 => BG2_MAX_CB,
        }
    }
}

impl fmt::Display for BaseGraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BG{}", self.number())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseGraphEntry {
    pub row: u32,
    pub col: u32,
    pub shift: u32,
}

/// Structure of one base graph as consumed by the LDPC encoder count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGraphSpec {
    pub id: BaseGraphId,
    pub rows: u64,
    pub cols: u64,
    /// Number of non-null entries (`n1`).
    pub nonnull: u64,
    pub info_cols: u64,
    pub entries: Vec<BaseGraphEntry>,
}

#[derive(Debug, Error)]
pub enum BaseGraphError {
    #[error("cannot read base-graph file '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("base-graph line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("base graph has no non-null entries")]
    Empty,
}

impl BaseGraphSpec {
    /// Parses a descriptor. Blank lines and `#` comments are skipped.
    pub fn parse(id: BaseGraphId, text: &str) -> Result<Self, BaseGraphError> {
        let (rows, cols) = id.dims();
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(BaseGraphError::Parse {
                    line,
                    message: format!("expected 'row col shift', found {} fields", fields.len()),
                });
            }
            let mut nums = [0u32; 3];
            for (slot, f) in nums.iter_mut().zip(&fields) {
                *slot = f.parse().map_err(|_| BaseGraphError::Parse {
                    line,
                    message: format!("'{f}' is not a non-negative integer"),
                })?;
            }
            let [row, col, shift] = nums;
            if u64::from(row) >= rows || u64::from(col) >= cols {
                return Err(BaseGraphError::Parse {
                    line,
                    message: format!("entry ({row}, {col}) outside {rows}x{cols} graph"),
                });
            }
            if !seen.insert((row, col)) {
                return Err(BaseGraphError::Parse {
                    line,
                    message: format!("duplicate entry ({row}, {col})"),
                });
            }
            entries.push(BaseGraphEntry { row, col, shift });
        }
        if entries.is_empty() {
            return Err(BaseGraphError::Empty);
        }
        Ok(BaseGraphSpec {
            id,
            rows,
            cols,
            nonnull: entries.len() as u64,
            info_cols: id.info_cols(),
            entries,
        })
    }

    pub fn load(id: BaseGraphId, path: impl AsRef<Path>) -> Result<Self, BaseGraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BaseGraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(id, &text)
    }

    /// The descriptor compiled into the crate.
    pub fn bundled(id: BaseGraphId) -> &'static BaseGraphSpec {
        static BG1: OnceLock<BaseGraphSpec> = OnceLock::new();
        static BG2: OnceLock<BaseGraphSpec> = OnceLock::new();
        let (cell, text) = match id {
            BaseGraphId::Bg1 => (&BG1, BG1_DATA),
            BaseGraphId::Bg2 => (&BG2, BG2_DATA),
        };
        cell.get_or_init(|| {
            BaseGraphSpec::parse(id, text).expect("bundled base graph is well-formed")
        })
    }

    pub fn bundled_text(id: BaseGraphId) -> &'static str {
        match id {
            BaseGraphId::Bg1 => BG1_DATA,
            BaseGraphId::Bg2 => BG2_DATA,
        }
    }
}

/// Picks the base graph: BG2 for small blocks, low rates, or mid-size blocks
/// at rate <= 2/3; BG1 otherwise.
pub fn select_base_graph_id(tb_bits: u64, rate: CodeRate) -> BaseGraphId {
    let num = u64::from(rate.numerator());
    let den = CodeRate::DENOMINATOR;
    let at_most_two_thirds = 3 * num <= 2 * den;
    let at_most_quarter = 4 * num <= den;
    if tb_bits <= 292 || (tb_bits <= 3824 && at_most_two_thirds) || at_most_quarter {
        BaseGraphId::Bg2
    } else {
        BaseGraphId::Bg1
    }
}

pub fn select_base_graph(tb_bits: u64, rate: CodeRate) -> &'static BaseGraphSpec {
    BaseGraphSpec::bundled(select_base_graph_id(tb_bits, rate))
}

/// All NR lifting sizes `a * 2^j <= 384`, ascending.
pub fn lifting_sizes() -> &'static [u64] {
    static SIZES: OnceLock<Vec<u64>> = OnceLock::new();
    SIZES.get_or_init(|| {
        let mut z: Vec<u64> = [2u64, 3, 5, 7, 9, 11, 13, 15]
            .iter()
            .flat_map(|&a| (0..8).map(move |j| a << j))
            .filter(|&z| z <= 384)
            .collect();
        z.sort_unstable();
        z
    })
}

/// Smallest lifting size with `info_cols * Z >= needed_bits`.
pub fn select_lifting_size(info_cols: u64, needed_bits: u64) -> Option<u64> {
    lifting_sizes()
        .iter()
        .copied()
        .find(|&z| info_cols * z >= needed_bits)
}
