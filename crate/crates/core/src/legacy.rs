//! End-to-end RAN power models from the literature, for side-by-side
//! comparison with the block-level estimate.
//!
//! All powers are in watts, energies in joules, workloads in GOPS and the
//! technology factor `rho` in GOPS per watt.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LegacyError {
    #[error("{0}")]
    Domain(String),
    #[error("unknown model '{0}' (valid: {names})", names = MODEL_NAMES.join(", "))]
    UnknownModel(String),
    #[error("cannot read parameter file '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parameter parse error: {0}")]
    Parse(String),
}

fn non_negative(name: &str, v: f64) -> Result<(), LegacyError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(LegacyError::Domain(format!(
            "{name} must be a non-negative number, got {v}"
        )))
    }
}

/// EARTH linear base-station model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuerParams {
    pub n_trx: u32,
    /// Power at minimum non-zero output.
    pub p0_w: f64,
    /// Load-dependent slope.
    pub delta_p: f64,
    pub p_out_w: f64,
    pub p_max_w: f64,
    pub p_sleep_w: f64,
}

/// `N_TRX (P0 + dP P_out)` while transmitting, `N_TRX P_sleep` at zero output.
/// `P_out = P_max` counts as transmitting.
pub fn auer_power(p: &AuerParams) -> Result<f64, LegacyError> {
    non_negative("p0_w", p.p0_w)?;
    non_negative("delta_p", p.delta_p)?;
    non_negative("p_out_w", p.p_out_w)?;
    non_negative("p_max_w", p.p_max_w)?;
    non_negative("p_sleep_w", p.p_sleep_w)?;
    if p.p_out_w > p.p_max_w {
        return Err(LegacyError::Domain(format!(
            "p_out_w {} exceeds p_max_w {}",
            p.p_out_w, p.p_max_w
        )));
    }
    let n = f64::from(p.n_trx);
    Ok(if p.p_out_w == 0.0 {
        n * p.p_sleep_w
    } else {
        n * (p.p0_w + p.delta_p * p.p_out_w)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DessetComponents {
    pub p_bbu_w: f64,
    pub p_rf_w: f64,
    pub p_pa_w: f64,
    pub p_oh_w: f64,
}

pub fn desset_power(c: &DessetComponents) -> f64 {
    c.p_bbu_w + c.p_rf_w + c.p_pa_w + c.p_oh_w
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YanSegments {
    pub e_ue_j: f64,
    pub e_bs_j: f64,
    pub e_wireline_j: f64,
    pub e_dc_j: f64,
}

pub fn yan_energy(s: &YanSegments) -> f64 {
    s.e_ue_j + s.e_bs_j + s.e_wireline_j + s.e_dc_j
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentCarrier {
    pub p_tx_w: f64,
    pub bandwidth_mhz: f64,
    pub p_cp_var_w_per_mhz: f64,
}

/// Carrier-aggregation model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YuParams {
    #[serde(default)]
    pub carriers: Vec<ComponentCarrier>,
    pub p_cp_static_w: f64,
}

pub fn yu_power(p: &YuParams) -> f64 {
    p.carriers
        .iter()
        .map(|cc| cc.p_tx_w + cc.bandwidth_mhz * cc.p_cp_var_w_per_mhz)
        .sum::<f64>()
        + p.p_cp_static_w
}

/// Massive-MIMO model with optional cell DTX.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TombazParams {
    pub n_sectors: u32,
    pub p_tx_sector_w: f64,
    pub eta_pa: f64,
    pub n_rf_chains: u32,
    /// Digital and RF processing per chain.
    pub p_c_w: f64,
    /// Baseline per sector.
    pub p_b_w: f64,
    #[serde(default)]
    pub dtx_enabled: bool,
    /// DTX factor applied to the baseline when idle.
    #[serde(default = "one")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}

pub fn tombaz_power(p: &TombazParams) -> Result<f64, LegacyError> {
    if !(p.eta_pa > 0.0 && p.eta_pa <= 1.0) {
        return Err(LegacyError::Domain(format!(
            "eta_pa {} not in (0, 1]",
            p.eta_pa
        )));
    }
    if !(0.0..=1.0).contains(&p.delta) {
        return Err(LegacyError::Domain(format!(
            "delta {} not in [0, 1]",
            p.delta
        )));
    }
    non_negative("p_tx_sector_w", p.p_tx_sector_w)?;
    non_negative("p_c_w", p.p_c_w)?;
    non_negative("p_b_w", p.p_b_w)?;
    let per_sector = if p.p_tx_sector_w > 0.0 {
        p.p_tx_sector_w / p.eta_pa + f64::from(p.n_rf_chains) * p.p_c_w + p.p_b_w
    } else if p.dtx_enabled {
        p.delta * p.p_b_w
    } else {
        p.p_b_w
    };
    Ok(f64::from(p.n_sectors) * per_sector)
}

/// GOPS-driven baseband model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuBasebandParams {
    pub l_beams: u32,
    pub q_enc: f64,
    pub q_net: f64,
    pub q_ctrl: f64,
    pub rho: f64,
}

/// GOPS-driven RF model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuRadioParams {
    pub m_antennas: u32,
    pub q_mod: f64,
    pub q_mix: f64,
    pub q_vga: f64,
    pub q_lna: f64,
    pub q_adc: f64,
    pub q_clk: f64,
    pub rho: f64,
}

fn positive_rho(rho: f64) -> Result<(), LegacyError> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        Err(LegacyError::Domain(format!(
            "rho must be positive, got {rho}"
        )))
    }
}

pub fn fu_bb_power(p: &FuBasebandParams) -> Result<f64, LegacyError> {
    positive_rho(p.rho)?;
    Ok(f64::from(p.l_beams) * (p.q_enc + p.q_net + p.q_ctrl) / p.rho)
}

pub fn fu_rf_power(p: &FuRadioParams) -> Result<f64, LegacyError> {
    positive_rho(p.rho)?;
    let m = f64::from(p.m_antennas);
    let chain = p.q_mod + p.q_mix + p.q_vga + p.q_lna + p.q_adc;
    Ok(m * chain / p.rho + m.sqrt() * p.q_clk / p.rho)
}

pub const MODEL_NAMES: [&str; 7] = ["auer", "desset", "yan", "yu", "tombaz", "fu-bb", "fu-rf"];

/// Result of evaluating one model from a parameter file.
#[derive(Clone, Debug, PartialEq)]
pub struct LegacyOutput {
    pub model: &'static str,
    pub value: f64,
    pub unit: &'static str,
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, LegacyError> {
    toml::from_str(text).map_err(|e| LegacyError::Parse(e.to_string().trim().replace('\n', " ")))
}

/// Evaluates `model` on TOML parameters.
pub fn evaluate(model: &str, params: &str) -> Result<LegacyOutput, LegacyError> {
    let name = MODEL_NAMES
        .into_iter()
        .find(|n| n.eq_ignore_ascii_case(model.trim()))
        .ok_or_else(|| LegacyError::UnknownModel(model.to_string()))?;
    let (value, unit) = match name {
        "auer" => (auer_power(&parse(params)?)?, "W"),
        "desset" => (desset_power(&parse(params)?), "W"),
        "yan" => (yan_energy(&parse(params)?), "J"),
        "yu" => (yu_power(&parse(params)?), "W"),
        "tombaz" => (tombaz_power(&parse(params)?)?, "W"),
        "fu-bb" => (fu_bb_power(&parse(params)?)?, "W"),
        "fu-rf" => (fu_rf_power(&parse(params)?)?, "W"),
        _ => unreachable!(),
    };
    Ok(LegacyOutput {
        model: name,
        value,
        unit,
    })
}

pub fn evaluate_file(model: &str, path: impl AsRef<Path>) -> Result<LegacyOutput, LegacyError> {
    // Reject bad names before touching the filesystem.
    if !MODEL_NAMES
        .iter()
        .any(|n| n.eq_ignore_ascii_case(model.trim()))
    {
        return Err(LegacyError::UnknownModel(model.to_string()));
    }
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LegacyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    evaluate(model, &text)
}
