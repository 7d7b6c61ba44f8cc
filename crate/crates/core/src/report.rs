//! Per-block energy reports.

use std::collections::BTreeMap;

use crate::cost::{
    cycles_for, cycles_to_f64, CostError, CycleCount, Cycles, EnergyParams, InstructionCostTable,
    TableMetadata,
};
use crate::opcount::{tally_pipeline, BlockId, PipelineTallies};
use crate::scenario::Scenario;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockEnergy {
    pub micro_ops: u128,
    pub cycles: Cycles,
    pub energy_j: f64,
    /// `None` when no bits were transmitted.
    pub cycles_per_bit: Option<f64>,
}

impl BlockEnergy {
    fn new(count: CycleCount, epsilon: f64, bits: u64) -> Self {
        let cycles = count.cycles;
        let cycles_per_bit = (bits > 0).then(|| cycles_to_f64(&(cycles / u128::from(bits))));
        BlockEnergy {
            micro_ops: count.micro_ops,
            cycles,
            energy_j: cycles_to_f64(&cycles) * epsilon,
            cycles_per_bit,
        }
    }

    pub fn cycles_f64(&self) -> f64 {
        cycles_to_f64(&self.cycles)
    }

    /// Energy per transmitted bit in nanojoules.
    pub fn energy_nj_per_bit(&self, epsilon: f64) -> Option<f64> {
        self.cycles_per_bit.map(|c| c * epsilon * 1e9)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub per_block: BTreeMap<BlockId, BlockEnergy>,
    pub total: BlockEnergy,
    pub bits_transmitted: u64,
    pub energy: EnergyParams,
    pub epsilon: f64,
    pub scenario: Option<Scenario>,
    pub table: TableMetadata,
}

impl EnergyReport {
    pub fn block(&self, id: BlockId) -> &BlockEnergy {
        &self.per_block[&id]
    }
}

/// Costs every block of `tallies`. Totals are exact sums of block cycles.
pub fn build_report(
    tallies: &PipelineTallies,
    table: &InstructionCostTable,
    energy: EnergyParams,
) -> Result<EnergyReport, CostError> {
    let epsilon = energy.epsilon();
    let bits = tallies.bits_transmitted;
    let mut per_block = BTreeMap::new();
    let mut total = CycleCount::default();
    for id in BlockId::ALL {
        let count = cycles_for(tallies.block(id), table)?;
        total += count;
        per_block.insert(id, BlockEnergy::new(count, epsilon, bits));
    }
    Ok(EnergyReport {
        per_block,
        total: BlockEnergy::new(total, epsilon, bits),
        bits_transmitted: bits,
        energy,
        epsilon,
        scenario: None,
        table: table.metadata.clone(),
    })
}

/// Tallies, costs and reports one scenario using its own kappa and clock.
pub fn estimate(scenario: &Scenario, table: &InstructionCostTable) -> Result<EnergyReport, Error> {
    let energy = EnergyParams::new(scenario.kappa, scenario.clock_hz)?;
    estimate_with(scenario, table, energy)
}

pub fn estimate_with(
    scenario: &Scenario,
    table: &InstructionCostTable,
    energy: EnergyParams,
) -> Result<EnergyReport, Error> {
    let tallies = tally_pipeline(scenario)?;
    let mut report = build_report(&tallies, table, energy)?;
    report.scenario = Some(scenario.clone());
    Ok(report)
}
