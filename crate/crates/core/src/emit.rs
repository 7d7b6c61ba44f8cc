//! Text renderings of reports: structured text (TOML) and delimited tables (CSV).
//!
//! Floating quantities are printed with six significant digits, counts as
//! exact integers and cycles as exact rationals, so identical inputs give
//! byte-identical output.

use std::fmt::Write as _;

use crate::cost::Cycles;
use crate::ingest::{BlockComparison, ComparisonReport};
use crate::legacy::LegacyOutput;
use crate::opcount::BlockId;
use crate::report::{BlockEnergy, EnergyReport};

pub const UNDEFINED: &str = "undefined";

pub const ESTIMATE_HEADER: &str =
    "block,side,micro_ops,cycles,energy_j,cycles_per_bit,energy_nj_per_bit";
pub const SWEEP_HEADER: &str =
    "param,value,block,side,micro_ops,cycles,energy_j,cycles_per_bit,energy_nj_per_bit";
pub const COMPARE_HEADER: &str =
    "block,modeled_cycles,measured_cycles,ratio,signed_relative_error,verdict";
pub const LEGACY_HEADER: &str = "model,value,unit";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    StructuredText,
    DelimitedTable,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::StructuredText => "structured-text",
            Format::DelimitedTable => "delimited-table",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structured-text" => Ok(Format::StructuredText),
            "delimited-table" => Ok(Format::DelimitedTable),
            other => Err(format!(
                "unknown format '{other}' (valid: structured-text, delimited-table)"
            )),
        }
    }
}

/// Six significant digits in exponent form, e.g. `4.41000e-7`.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

pub fn sig6_opt(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), sig6)
}

/// Exact decimal when the denominator allows it, `n/d` otherwise.
pub fn exact(c: &Cycles) -> String {
    let (n, d) = (*c.numer(), *c.denom());
    if d == 1 {
        return n.to_string();
    }
    let (mut rest, mut twos, mut fives) = (d, 0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{n}/{d}");
    }
    let digits = twos.max(fives);
    let Some(scaled) = 10u128
        .checked_pow(digits)
        .and_then(|p| n.checked_mul(p / d))
    else {
        return format!("{n}/{d}");
    };
    let p = 10u128.pow(digits);
    format!(
        "{}.{:0width$}",
        scaled / p,
        scaled % p,
        width = digits as usize
    )
}

fn toml_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn toml_float(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => sig6(v),
        _ => toml_str(UNDEFINED),
    }
}

fn block_fields(out: &mut String, b: &BlockEnergy, epsilon: f64) {
    let _ = writeln!(out, "micro_ops = {}", b.micro_ops);
    let _ = writeln!(out, "cycles = {}", toml_str(&exact(&b.cycles)));
    let _ = writeln!(out, "energy_j = {}", toml_float(Some(b.energy_j)));
    let _ = writeln!(out, "cycles_per_bit = {}", toml_float(b.cycles_per_bit));
    let _ = writeln!(
        out,
        "energy_nj_per_bit = {}",
        toml_float(b.energy_nj_per_bit(epsilon))
    );
}

pub fn estimate_structured(r: &EnergyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bits_transmitted = {}", r.bits_transmitted);
    let _ = writeln!(out, "kappa = {}", sig6(r.energy.kappa));
    let _ = writeln!(out, "clock_hz = {}", sig6(r.energy.clock_hz));
    let _ = writeln!(out, "epsilon_j_per_cycle = {}", sig6(r.epsilon));
    out.push_str("\n[cost_table]\n");
    if let Some(s) = &r.table.source {
        let _ = writeln!(out, "source = {}", toml_str(s));
    }
    if let Some(d) = &r.table.date {
        let _ = writeln!(out, "date = {}", toml_str(d));
    }
    for (id, b) in &r.per_block {
        let _ = writeln!(out, "\n[blocks.{id}]");
        let _ = writeln!(out, "side = {}", toml_str(id.side().as_str()));
        let _ = writeln!(out, "description = {}", toml_str(id.description()));
        block_fields(&mut out, b, r.epsilon);
    }
    out.push_str("\n[total]\n");
    block_fields(&mut out, &r.total, r.epsilon);
    out
}

fn estimate_row(label: &str, side: &str, b: &BlockEnergy, epsilon: f64) -> String {
    format!(
        "{label},{side},{},{},{},{},{}",
        b.micro_ops,
        exact(&b.cycles),
        sig6(b.energy_j),
        sig6_opt(b.cycles_per_bit),
        sig6_opt(b.energy_nj_per_bit(epsilon)),
    )
}

pub fn estimate_table(r: &EnergyReport) -> String {
    let mut out = String::new();
    out.push_str(ESTIMATE_HEADER);
    out.push('\n');
    for (id, b) in &r.per_block {
        out.push_str(&estimate_row(
            &id.to_string(),
            id.side().as_str(),
            b,
            r.epsilon,
        ));
        out.push('\n');
    }
    out.push_str(&estimate_row("total", "all", &r.total, r.epsilon));
    out.push('\n');
    out
}

pub fn estimate(r: &EnergyReport, format: Format) -> String {
    match format {
        Format::StructuredText => estimate_structured(r),
        Format::DelimitedTable => estimate_table(r),
    }
}

fn block_rows(r: &EnergyReport) -> impl Iterator<Item = (String, &'static str, &BlockEnergy)> {
    r.per_block
        .iter()
        .map(|(id, b)| (id.to_string(), id.side().as_str(), b))
        .chain(std::iter::once(("total".to_string(), "all", &r.total)))
}

/// One row per (value, block) plus a total row per value.
pub fn sweep(param: &str, runs: &[(String, EnergyReport)], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::DelimitedTable => {
            out.push_str(SWEEP_HEADER);
            out.push('\n');
            for (value, r) in runs {
                for (label, side, b) in block_rows(r) {
                    let _ = writeln!(
                        out,
                        "{param},{value},{}",
                        estimate_row(&label, side, b, r.epsilon)
                    );
                }
            }
        }
        Format::StructuredText => {
            let _ = writeln!(out, "param = {}", toml_str(param));
            for (value, r) in runs {
                for (label, side, b) in block_rows(r) {
                    out.push_str("\n[[rows]]\n");
                    let _ = writeln!(out, "value = {}", toml_str(value));
                    let _ = writeln!(out, "block = {}", toml_str(&label));
                    let _ = writeln!(out, "side = {}", toml_str(side));
                    block_fields(&mut out, b, r.epsilon);
                }
            }
        }
    }
    out
}

fn comparison_fields(out: &mut String, c: &BlockComparison) {
    let _ = writeln!(out, "modeled_cycles = {}", toml_str(&exact(&c.modeled)));
    let _ = writeln!(out, "measured_cycles = {}", toml_str(&exact(&c.measured)));
    let _ = writeln!(out, "ratio = {}", toml_float(c.ratio_f64()));
    let _ = writeln!(
        out,
        "signed_relative_error = {}",
        toml_float(c.signed_relative_error)
    );
    let _ = writeln!(out, "verdict = {}", toml_str(c.verdict.as_str()));
}

fn comparison_row(label: &str, c: &BlockComparison) -> String {
    format!(
        "{label},{},{},{},{},{}",
        exact(&c.modeled),
        exact(&c.measured),
        sig6_opt(c.ratio_f64()),
        sig6_opt(c.signed_relative_error),
        c.verdict.as_str()
    )
}

pub fn comparison(r: &ComparisonReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::DelimitedTable => {
            out.push_str(COMPARE_HEADER);
            out.push('\n');
            for (id, c) in &r.per_block {
                out.push_str(&comparison_row(&id.to_string(), c));
                out.push('\n');
            }
            out.push_str(&comparison_row("total", &r.total));
            out.push('\n');
            let _ = writeln!(
                out,
                "unattributed,,{},{UNDEFINED},{UNDEFINED},unattributed",
                exact(&r.unattributed)
            );
        }
        Format::StructuredText => {
            let _ = writeln!(
                out,
                "unattributed_cycles = {}",
                toml_str(&exact(&r.unattributed))
            );
            let join = |ids: Vec<BlockId>| {
                ids.iter()
                    .map(|b| toml_str(&b.to_string()))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let _ = writeln!(
                out,
                "over = [{}]",
                join(r.blocks_with(crate::ingest::Verdict::Over))
            );
            let _ = writeln!(
                out,
                "under = [{}]",
                join(r.blocks_with(crate::ingest::Verdict::Under))
            );
            let _ = writeln!(
                out,
                "unmeasured = [{}]",
                join(r.blocks_with(crate::ingest::Verdict::Unmeasured))
            );
            for (id, c) in &r.per_block {
                let _ = writeln!(out, "\n[blocks.{id}]");
                comparison_fields(&mut out, c);
            }
            out.push_str("\n[total]\n");
            comparison_fields(&mut out, &r.total);
        }
    }
    out
}

pub fn legacy(o: &LegacyOutput, format: Format) -> String {
    match format {
        Format::DelimitedTable => format!(
            "{LEGACY_HEADER}\n{},{},{}\n",
            o.model,
            sig6(o.value),
            o.unit
        ),
        Format::StructuredText => format!(
            "model = {}\nvalue = {}\nunit = {}\n",
            toml_str(o.model),
            sig6(o.value),
            toml_str(o.unit)
        ),
    }
}
