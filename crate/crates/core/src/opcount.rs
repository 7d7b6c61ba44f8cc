//! Closed-form operation counts for the eight downlink processing blocks.
//!
//! Blocks A-D run on the base station, E-H on the user equipment. Every
//! count is an exact integer. Counts follow schoolbook algorithms: an
//! `(m x k) * (k x n)` product costs `m n (2k - 1)` operations, and the
//! radix-2 FFT costs 10 real operations per butterfly.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::basegraph::BaseGraphSpec;
use crate::scenario::{derive, DecoderConfig, DerivedParams, Scenario, ScenarioError};
use crate::tally::{DataClass, OpKind, OperationTally};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Base station (transmitter).
    Bs,
    /// User equipment (receiver).
    Ue,
}

impl BlockId {
    pub const ALL: [BlockId; 8] = [
        BlockId::A,
        BlockId::B,
        BlockId::C,
        BlockId::D,
        BlockId::E,
        BlockId::F,
        BlockId::G,
        BlockId::H,
    ];

    pub fn side(self) -> Side {
        match self {
            BlockId::A | BlockId::B | BlockId::C | BlockId::D => Side::Bs,
            _ => Side::Ue,
        }
    }

    pub fn letter(self) -> char {
        match self {
            BlockId::A => 'A',
            BlockId::B => 'B',
            BlockId::C => 'C',
            BlockId::D => 'D',
            BlockId::E => 'E',
            BlockId::F => 'F',
            BlockId::G => 'G',
            BlockId::H => 'H',
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            BlockId::A => "CRC, segmentation, LDPC encoding",
            BlockId::B => "scrambling, modulation, layer mapping",
            BlockId::C => "antenna port mapping",
            BlockId::D => "OFDM modulation",
            BlockId::E => "OFDM demodulation",
            BlockId::F => "channel estimation, MMSE equalization",
            BlockId::G => "layer demapping, demodulation, descrambling",
            BlockId::H => "LDPC decoding, desegmentation, CRC check",
        }
    }
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bs => "BS",
            Side::Ue => "UE",
        }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl std::str::FromStr for BlockId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix("block_")
            .or_else(|| t.strip_prefix("block"))
            .unwrap_or(t)
            .trim();
        BlockId::ALL
            .into_iter()
            .find(|b| t.len() == 1 && t.eq_ignore_ascii_case(&b.letter().to_string()))
            .ok_or_else(|| format!("unknown block '{s}' (expected A-H)"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpCountError {
    #[error("LDPC encoder needs K >= 2Z (K={info_bits}, Z={lifting})")]
    InfoBelowPunctured { info_bits: u64, lifting: u64 },
    #[error("LDPC encoder needs N_cCB + 2Z >= K (N_cCB={coded_bits}, Z={lifting}, K={info_bits})")]
    CodedTooShort {
        coded_bits: u64,
        lifting: u64,
        info_bits: u64,
    },
    #[error("FFT size {0} is not a power of two")]
    FftSize(u64),
}

/// `k` multiplies and `k - 1` adds for one inner product of length `k`.
fn dot_cost(k: u64) -> u64 {
    (2 * k).saturating_sub(1)
}

/// CRC over `bits` with `step_bits` consumed per step: AND, XOR and SHIFT
/// each occur `5 * floor(bits / step) + 1` times.
///
/// # Panics
/// If `step_bits` is zero.
pub fn count_crc(bits: u64, step_bits: u64) -> OperationTally {
    assert!(step_bits >= 1, "CRC step width must be at least one bit");
    let n = 5 * (bits / step_bits) + 1;
    let mut t = OperationTally::new();
    for kind in [OpKind::And, OpKind::Xor, OpKind::Shift] {
        t.record(kind, DataClass::LogicalScalar, n);
    }
    t
}

/// Segmentation costs nine generic integer operations per transport block.
pub fn count_segmentation(_code_blocks: u64) -> OperationTally {
    OperationTally::with(OpKind::Flop, DataClass::IntScalar, 9)
}

/// Inputs of the LDPC encoder count for one code block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LdpcEncodeDims {
    /// `K`
    pub info_bits: u64,
    /// `Z`
    pub lifting: u64,
    /// Non-null base-graph entries `n1`.
    pub nonnull: u64,
    pub rows: u64,
    pub cols: u64,
    /// `N_cCB`
    pub coded_bits: u64,
    pub code_blocks: u64,
}

impl LdpcEncodeDims {
    pub fn new(d: &DerivedParams, bg: &BaseGraphSpec) -> Self {
        LdpcEncodeDims {
            info_bits: d.cb_bits,
            lifting: d.lifting,
            nonnull: bg.nonnull,
            rows: bg.rows,
            cols: bg.cols,
            coded_bits: d.coded_cb_bits,
            code_blocks: d.code_blocks,
        }
    }
}

/// Per-component LDPC encoder counts, already multiplied by `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LdpcEncodeCount {
    /// Validation of non-null input bits, `2(K - 2Z)`.
    pub validation: u64,
    /// Base-graph replacements, `rows * cols`.
    pub replacement: u64,
    /// Shift-modulo operations, one division per non-null entry.
    pub modulo: u64,
    pub product_mul: u64,
    pub product_add: u64,
    /// Output writes, `N_cCB + 2Z - K`.
    pub set: u64,
}

impl LdpcEncodeCount {
    /// Matrix-product term `rows * Z * (2 cols Z - 1)`.
    pub fn product(&self) -> u64 {
        self.product_mul + self.product_add
    }

    pub fn total(&self) -> u64 {
        self.validation + self.replacement + self.modulo + self.product() + self.set
    }

    pub fn tally(&self) -> OperationTally {
        let mut t = OperationTally::new();
        t.record(OpKind::Cmp, DataClass::LogicalVector, self.validation);
        t.record(OpKind::Set, DataClass::IntVector, self.replacement);
        t.record(OpKind::Div, DataClass::IntScalar, self.modulo);
        t.record(OpKind::Mul, DataClass::IntVector, self.product_mul);
        t.record(OpKind::Add, DataClass::IntVector, self.product_add);
        t.record(OpKind::Set, DataClass::LogicalVector, self.set);
        t
    }
}

pub fn count_ldpc_encode(dims: &LdpcEncodeDims) -> Result<LdpcEncodeCount, OpCountError> {
    let &LdpcEncodeDims {
        info_bits: k,
        lifting: z,
        nonnull,
        rows,
        cols,
        coded_bits,
        code_blocks: c,
    } = dims;
    if k < 2 * z {
        return Err(OpCountError::InfoBelowPunctured {
            info_bits: k,
            lifting: z,
        });
    }
    if coded_bits + 2 * z < k {
        return Err(OpCountError::CodedTooShort {
            coded_bits,
            lifting: z,
            info_bits: k,
        });
    }
    let outputs = rows * z;
    let inner = cols * z;
    Ok(LdpcEncodeCount {
        validation: c * 2 * (k - 2 * z),
        replacement: c * rows * cols,
        modulo: c * nonnull,
        product_mul: c * outputs * inner,
        product_add: c * outputs * inner.saturating_sub(1),
        set: c * (coded_bits + 2 * z - k),
    })
}

/// CRC attachment on the TB and on every CB, segmentation, and LDPC encoding.
/// Rate matching and concatenation are not counted.
pub fn count_block_a(
    d: &DerivedParams,
    bg: &BaseGraphSpec,
    crc_step_bits: u64,
) -> Result<OperationTally, OpCountError> {
    let ldpc = count_ldpc_encode(&LdpcEncodeDims::new(d, bg))?;
    Ok(count_crc(d.tb_bits, crc_step_bits)
        .merged(&count_segmentation(d.code_blocks))
        .merged(&count_crc(d.cb_bits_total, crc_step_bits))
        .merged(&ldpc.tally()))
}

/// Scrambling (`6 M_cw` XOR), modulation (one lookup per symbol) and layer
/// mapping (one shift per symbol).
pub fn count_block_b(codeword_bits: u64, n_symbols: u64) -> OperationTally {
    let mut t = OperationTally::new();
    t.record(OpKind::Xor, DataClass::LogicalVector, 6 * codeword_bits);
    t.record(OpKind::Lookup, DataClass::IntVector, n_symbols);
    t.record(OpKind::Shift, DataClass::IntVector, n_symbols);
    t
}

/// Per-symbol flops of antenna-port mapping: precoder SVD
/// `2Pv^2 + v^3 + v + Pv` plus the `P x v` by `v x 1` product `2Pv - P`.
pub fn apm_flops_per_symbol(ports: u64, layers: u64) -> u64 {
    let (p, v) = (ports, layers);
    2 * p * v * v + v * v * v + v + p * v + p * dot_cost(v)
}

pub fn count_block_c(ports: u64, layers: u64, symbols_per_layer: u64) -> OperationTally {
    OperationTally::with(
        OpKind::Flop,
        DataClass::DoubleVector,
        symbols_per_layer * apm_flops_per_symbol(ports, layers),
    )
}

/// Radix-2 (i)FFT flops: `5 g n_ant N log2 N`.
pub fn fft_flops(symbols: u64, antennas: u64, fft_size: u64) -> Result<u64, OpCountError> {
    if !fft_size.is_power_of_two() {
        return Err(OpCountError::FftSize(fft_size));
    }
    let log2 = u64::from(fft_size.trailing_zeros());
    Ok(5 * symbols * antennas * fft_size * log2)
}

/// OFDM (de)modulation. Used for block D and, with the receiver antenna
/// count, for block E.
pub fn count_block_d(
    symbols: u64,
    antennas: u64,
    fft_size: u64,
) -> Result<OperationTally, OpCountError> {
    Ok(OperationTally::with(
        OpKind::Flop,
        DataClass::DoubleVector,
        fft_flops(symbols, antennas, fft_size)?,
    ))
}

/// Least-squares flops for one (layer, receive antenna) pair: Gram product,
/// inversion, and the final product of the pseudo-inverse.
pub fn ls_flops_per_pair(tx: u64, channel_len: u64, symbols: u64, pilots: u64) -> u64 {
    let n = channel_len * tx;
    let samples = symbols * pilots;
    n * n * dot_cost(samples) + n * n * n + samples * n * dot_cost(n)
}

pub fn count_ls(
    layers: u64,
    rx: u64,
    tx: u64,
    channel_len: u64,
    symbols: u64,
    pilots: u64,
) -> OperationTally {
    OperationTally::with(
        OpKind::Flop,
        DataClass::DoubleVector,
        layers * rx * ls_flops_per_pair(tx, channel_len, symbols, pilots),
    )
}

/// MMSE equalization flops. The SVD head `2 N_r N_t^2 + N_r^3 + N_r + N_r N_t`
/// is counted once; the bracket (shrinkage plus three products) once per
/// subcarrier.
pub fn mmse_flops(rx: u64, tx: u64, subcarriers: u64, symbols: u64) -> u64 {
    let (nr, nt) = (rx, tx);
    let head = 2 * nr * nt * nt + nr * nr * nr + nr + nr * nt;
    let per_subcarrier =
        3 * nt + nt * nr * dot_cost(nt) + nt * nr * dot_cost(nr) + nt * symbols * dot_cost(nr);
    head + subcarriers * per_subcarrier
}

pub fn count_mmse(rx: u64, tx: u64, subcarriers: u64, symbols: u64) -> OperationTally {
    OperationTally::with(
        OpKind::Flop,
        DataClass::DoubleVector,
        mmse_flops(rx, tx, subcarriers, symbols),
    )
}

pub fn count_block_f(d: &DerivedParams, s: &Scenario) -> OperationTally {
    count_ls(
        s.n_layers,
        s.n_rx,
        s.n_tx,
        s.channel_len,
        d.symbols_per_slot,
        d.pilot_subcarriers,
    )
    .merged(&count_mmse(
        s.n_rx,
        s.n_tx,
        d.subcarriers,
        d.symbols_per_slot,
    ))
}

/// Inverse of block B: same formulas and classes.
pub fn count_block_g(codeword_bits: u64, n_symbols: u64) -> OperationTally {
    count_block_b(codeword_bits, n_symbols)
}

/// Min-sum LDPC decoding over `C` code blocks.
///
/// Initialization: `N` divisions and `N` logs. Per iteration: `W |N(w)|`
/// products, `N |W(n)|` additions, then `N (|W(n)| + 1)` additions and
/// `W |N(w)|` XORs for the decision.
pub fn count_ldpc_decode(
    variable_nodes: u64,
    check_nodes: u64,
    cfg: &DecoderConfig,
    code_blocks: u64,
) -> OperationTally {
    let n = variable_nodes;
    let edges_cn = check_nodes * cfg.check_degree;
    let edges_vn = n * cfg.variable_degree;
    let it = cfg.iterations;
    let mut t = OperationTally::new();
    t.record(OpKind::Div, DataClass::DoubleVector, n);
    t.record(OpKind::Log, DataClass::DoubleVector, n);
    t.record(OpKind::Mul, DataClass::DoubleVector, it * edges_cn);
    t.record(
        OpKind::Add,
        DataClass::DoubleVector,
        it * (edges_vn + n * (cfg.variable_degree + 1)),
    );
    t.record(OpKind::Xor, DataClass::LogicalVector, it * edges_cn);
    t.scaled(code_blocks)
}

/// CRC check: the encoder count plus one comparison.
pub fn count_crc_decode(bits: u64, step_bits: u64) -> OperationTally {
    count_crc(bits, step_bits).merged(&OperationTally::with(
        OpKind::Cmp,
        DataClass::LogicalScalar,
        1,
    ))
}

pub fn count_block_h(d: &DerivedParams, cfg: &DecoderConfig, crc_step_bits: u64) -> OperationTally {
    let check_nodes = d.coded_cb_bits.saturating_sub(d.cb_bits);
    count_ldpc_decode(d.coded_cb_bits, check_nodes, cfg, d.code_blocks)
        .merged(&count_crc_decode(d.cb_bits_total, crc_step_bits))
        .merged(&count_crc_decode(d.tb_bits, crc_step_bits))
}

/// Per-block tallies for a whole transmission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineTallies {
    pub per_block: BTreeMap<BlockId, OperationTally>,
    /// Information bits sent, `A * n_slots`.
    pub bits_transmitted: u64,
}

impl PipelineTallies {
    pub fn total(&self) -> OperationTally {
        self.per_block.values().sum()
    }

    pub fn block(&self, id: BlockId) -> &OperationTally {
        static EMPTY: OperationTally = OperationTally::EMPTY;
        self.per_block.get(&id).unwrap_or(&EMPTY)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Count(#[from] OpCountError),
}

/// Single-slot tallies for every block, from already derived parameters.
pub fn tally_slot(
    s: &Scenario,
    d: &DerivedParams,
) -> Result<BTreeMap<BlockId, OperationTally>, OpCountError> {
    let bg = BaseGraphSpec::bundled(d.base_graph);
    let step = s.model.crc_step_bits;
    let rx_antennas = s.model.fft_rx_antennas.unwrap_or(s.n_tx);
    let g = d.symbols_per_slot;
    let mut out = BTreeMap::new();
    out.insert(BlockId::A, count_block_a(d, bg, step)?);
    out.insert(BlockId::B, count_block_b(d.codeword_bits, d.n_symbols));
    out.insert(
        BlockId::C,
        count_block_c(s.n_ports, s.n_layers, d.symbols_per_layer),
    );
    out.insert(BlockId::D, count_block_d(g, s.n_tx, d.fft_size)?);
    out.insert(BlockId::E, count_block_d(g, rx_antennas, d.fft_size)?);
    out.insert(BlockId::F, count_block_f(d, s));
    out.insert(BlockId::G, count_block_g(d.codeword_bits, d.n_symbols));
    out.insert(BlockId::H, count_block_h(d, &s.decoder, step));
    Ok(out)
}

pub fn tally_pipeline(s: &Scenario) -> Result<PipelineTallies, PipelineError> {
    let d = derive(s)?;
    let per_block = tally_slot(s, &d)?
        .into_iter()
        .map(|(id, t)| (id, t.scaled(s.n_slots)))
        .collect();
    Ok(PipelineTallies {
        per_block,
        bits_transmitted: d.tb_bits * s.n_slots,
    })
}
