//! Transmission scenarios and the NR transport parameters derived from them.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basegraph::{select_base_graph_id, select_lifting_size, BaseGraphId};

/// OFDM symbols per slot with normal cyclic prefix.
pub const SYMBOLS_PER_SLOT: u64 = 14;
/// CRC length attached to the transport block and to every code block.
pub const CRC_BITS: u64 = 24;
pub const MIN_FFT_SIZE: u64 = 128;
pub const SUPPORTED_SCS_KHZ: [u32; 4] = [15, 30, 60, 120];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "16QAM", alias = "QAM16")]
    Qam16,
    #[serde(rename = "64QAM", alias = "QAM64")]
    Qam64,
    #[serde(rename = "256QAM", alias = "QAM256")]
    Qam256,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
        Modulation::Qam256,
    ];

    /// Bits per modulation symbol (`Qm`).
    pub fn bits_per_symbol(self) -> u64 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
            Modulation::Qam256 => "256QAM",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', '_', ' '], "");
        match norm.as_str() {
            "QPSK" => Ok(Modulation::Qpsk),
            "16QAM" | "QAM16" => Ok(Modulation::Qam16),
            "64QAM" | "QAM64" => Ok(Modulation::Qam64),
            "256QAM" | "QAM256" => Ok(Modulation::Qam256),
            _ => Err(format!(
                "unknown modulation '{s}' (expected QPSK, 16QAM, 64QAM or 256QAM)"
            )),
        }
    }
}

/// Code rate `numerator / 1024` with numerator in `1..=1023`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodeRate(u16);

impl CodeRate {
    pub const DENOMINATOR: u64 = 1024;

    pub fn new(numerator: u32) -> Option<Self> {
        (1..=1023)
            .contains(&numerator)
            .then_some(CodeRate(numerator as u16))
    }

    pub fn numerator(self) -> u16 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / Self::DENOMINATOR as f64
    }
}

/// Min-sum decoder constants: node degrees and iteration budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderConfig {
    /// Variable nodes per check node, `|N(w)|`.
    pub check_degree: u64,
    /// Check nodes per variable node, `|W(n)|`.
    pub variable_degree: u64,
    pub iterations: u64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            check_degree: 19,
            variable_degree: 3,
            iterations: 8,
        }
    }
}

/// Model knobs that are not part of the radio configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Bits consumed per CRC step (`p`); 32 for slice-by-4.
    pub crc_step_bits: u64,
    /// OFDM symbols per slot carrying pilots.
    pub pilot_symbols: u64,
    /// Transport block size override, in bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tbs_bits: Option<u64>,
    /// Antenna count used for the receiver FFT; defaults to `n_tx`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fft_rx_antennas: Option<u64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            crc_step_bits: 32,
            pilot_symbols: 1,
            tbs_bits: None,
            fft_rx_antennas: None,
        }
    }
}

fn default_slots() -> u64 {
    1
}

fn default_channel_len() -> u64 {
    8
}

fn default_pilot_density() -> u64 {
    6
}

/// A downlink transmission to be costed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_slots")]
    pub n_slots: u64,
    /// Carried through to reports only.
    #[serde(default)]
    pub snr_db: f64,
    pub scs_khz: u32,
    pub n_prb: u64,
    pub modulation: Modulation,
    /// Code rate numerator over 1024.
    pub code_rate: u32,
    pub n_tx: u64,
    pub n_rx: u64,
    pub n_layers: u64,
    pub n_ports: u64,
    pub clock_hz: f64,
    /// Energy coefficient in J*s^2.
    pub kappa: f64,
    /// Maximum channel length in taps.
    #[serde(default = "default_channel_len")]
    pub channel_len: u64,
    #[serde(default = "default_pilot_density")]
    pub pilot_sc_per_prb: u64,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub model: ModelConfig,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("configuration error: {0}")]
    Config(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A broken scenario invariant. The message starts with the field name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Scenario {
    /// One slot, one codeword, 15 kHz, 16-QAM at 490/1024, 4x4 antennas, two
    /// layers, 2.1 GHz clock, kappa = 1e-25 J*s^2, on a 52-PRB grid.
    pub fn reference() -> Self {
        Scenario {
            n_slots: 1,
            snr_db: 10.0,
            scs_khz: 15,
            n_prb: 52,
            modulation: Modulation::Qam16,
            code_rate: 490,
            n_tx: 4,
            n_rx: 4,
            n_layers: 2,
            n_ports: 4,
            clock_hz: 2.1e9,
            kappa: 1e-25,
            channel_len: default_channel_len(),
            pilot_sc_per_prb: default_pilot_density(),
            decoder: DecoderConfig::default(),
            model: ModelConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text)
            .map_err(|e| ScenarioError::Parse(e.to_string().trim().replace('\n', " ")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn rate(&self) -> Option<CodeRate> {
        CodeRate::new(self.code_rate)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn derive(&self) -> Result<DerivedParams, ScenarioError> {
        derive(self)
    }
}

/// Lists every broken invariant; empty means the scenario is valid.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, message: String| {
        if !ok {
            out.push(Violation { field, message });
        }
    };

    for (field, value) in [
        ("n_slots", s.n_slots),
        ("n_prb", s.n_prb),
        ("n_tx", s.n_tx),
        ("n_rx", s.n_rx),
        ("n_layers", s.n_layers),
        ("n_ports", s.n_ports),
        ("channel_len", s.channel_len),
        ("pilot_sc_per_prb", s.pilot_sc_per_prb),
    ] {
        check(value >= 1, field, format!("{field} must be at least 1"));
    }
    check(
        SUPPORTED_SCS_KHZ.contains(&s.scs_khz),
        "scs_khz",
        format!("scs_khz {} not in {{15, 30, 60, 120}}", s.scs_khz),
    );
    check(
        CodeRate::new(s.code_rate).is_some(),
        "code_rate",
        "code_rate out of range".to_string(),
    );
    check(
        s.n_layers <= s.n_tx.min(s.n_rx),
        "n_layers",
        "n_layers exceeds min(n_tx,n_rx)".to_string(),
    );
    check(
        s.n_ports >= s.n_layers,
        "n_ports",
        "n_ports below n_layers".to_string(),
    );
    check(
        s.pilot_sc_per_prb <= 12,
        "pilot_sc_per_prb",
        "pilot_sc_per_prb exceeds 12 subcarriers per PRB".to_string(),
    );
    check(
        s.clock_hz.is_finite() && s.clock_hz > 0.0,
        "clock_hz",
        "clock_hz must be positive".to_string(),
    );
    check(
        s.kappa.is_finite() && s.kappa > 0.0,
        "kappa",
        "kappa must be positive".to_string(),
    );
    check(
        s.snr_db.is_finite(),
        "snr_db",
        "snr_db must be finite".to_string(),
    );
    check(
        s.decoder.check_degree >= 1 && s.decoder.variable_degree >= 1,
        "decoder",
        "decoder node degrees must be at least 1".to_string(),
    );
    check(
        s.model.crc_step_bits >= 1,
        "model.crc_step_bits",
        "model.crc_step_bits must be at least 1".to_string(),
    );
    check(
        (1..SYMBOLS_PER_SLOT).contains(&s.model.pilot_symbols),
        "model.pilot_symbols",
        format!("model.pilot_symbols must lie in 1..{SYMBOLS_PER_SLOT}"),
    );
    check(
        s.model.tbs_bits != Some(0),
        "model.tbs_bits",
        "model.tbs_bits must be at least 1".to_string(),
    );
    check(
        s.model.fft_rx_antennas != Some(0),
        "model.fft_rx_antennas",
        "model.fft_rx_antennas must be at least 1".to_string(),
    );
    out
}

/// NR quantities the operation counters consume.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivedParams {
    /// Subcarriers `N_f = 12 * n_prb`.
    pub subcarriers: u64,
    /// OFDM symbols per slot `g`.
    pub symbols_per_slot: u64,
    pub fft_size: u64,
    /// Data resource elements per slot and layer.
    pub data_res: u64,
    pub bits_per_symbol: u64,
    pub layers: u64,
    /// Modulation symbols per codeword.
    pub n_symbols: u64,
    /// Codeword bits after rate matching (`M_cw`).
    pub codeword_bits: u64,
    /// Transport block size `A`.
    pub tb_bits: u64,
    /// Number of code blocks `C`.
    pub code_blocks: u64,
    /// Code-block size `K` after lifting, incl. CB-CRC and filler.
    pub cb_bits: u64,
    /// Lifting size `Z`.
    pub lifting: u64,
    /// Sum of code-block sizes `B = A + L_crc * C`.
    pub cb_bits_total: u64,
    /// Coded code-block length `N_cCB`.
    pub coded_cb_bits: u64,
    pub symbols_per_layer: u64,
    /// Pilot subcarriers `K_p` per pilot symbol.
    pub pilot_subcarriers: u64,
    pub crc_bits: u64,
    pub base_graph: BaseGraphId,
}

/// Smallest power of two strictly above `n_f`, floored at [`MIN_FFT_SIZE`].
pub fn fft_size_for(n_f: u64) -> u64 {
    (n_f + 1).next_power_of_two().max(MIN_FFT_SIZE)
}

/// Number of code blocks for a transport block of `tb_bits`.
pub fn code_block_count(tb_bits: u64, max_cb: u64) -> u64 {
    if tb_bits + CRC_BITS <= max_cb {
        1
    } else {
        (tb_bits + CRC_BITS).div_ceil(max_cb - CRC_BITS)
    }
}

pub fn derive(s: &Scenario) -> Result<DerivedParams, ScenarioError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(ScenarioError::Invalid(violations));
    }
    let rate = s
        .rate()
        .ok_or_else(|| ScenarioError::Config("code_rate out of range".into()))?;
    let qm = s.modulation.bits_per_symbol();
    let layers = s.n_layers;

    let subcarriers = 12 * s.n_prb;
    let g = SYMBOLS_PER_SLOT;
    let fft_size = fft_size_for(subcarriers);
    let pilot_subcarriers = s.pilot_sc_per_prb * s.n_prb;
    let data_res = subcarriers * g - pilot_subcarriers * s.model.pilot_symbols;
    let n_symbols = data_res * layers;
    let codeword_bits = n_symbols * qm;

    let tb_bits = match s.model.tbs_bits {
        Some(a) => a,
        None => {
            let raw = u128::from(codeword_bits) * u128::from(rate.numerator())
                / u128::from(CodeRate::DENOMINATOR);
            (raw / 8 * 8) as u64
        }
    };
    if tb_bits == 0 {
        return Err(ScenarioError::Config(
            "transport block size is zero for this grid and code rate".into(),
        ));
    }

    let base_graph = select_base_graph_id(tb_bits, rate);
    let code_blocks = code_block_count(tb_bits, base_graph.max_code_block());
    let cb_bits_total = tb_bits + CRC_BITS * code_blocks;
    let per_block = cb_bits_total.div_ceil(code_blocks);
    let lifting = select_lifting_size(base_graph.info_cols(), per_block).ok_or_else(|| {
        ScenarioError::Config(format!(
            "no lifting size fits {per_block} bits per code block"
        ))
    })?;
    let cb_bits = base_graph.info_cols() * lifting;
    let (_, cols) = base_graph.dims();
    let coded_cb_bits = (cols - 2) * lifting;

    Ok(DerivedParams {
        subcarriers,
        symbols_per_slot: g,
        fft_size,
        data_res,
        bits_per_symbol: qm,
        layers,
        n_symbols,
        codeword_bits,
        tb_bits,
        code_blocks,
        cb_bits,
        lifting,
        cb_bits_total,
        coded_cb_bits,
        symbols_per_layer: n_symbols / layers,
        pilot_subcarriers,
        crc_bits: CRC_BITS,
        base_graph,
    })
}
