//! Analytical energy estimation for 5G NR downlink physical-layer processing.
//!
//! Each processing block (A-D at the base station, E-H at the UE) is
//! reduced to a tally of arithmetic and logical operations per data class.
//! Tallies are costed through an instruction table into micro-ops and
//! cycles, and cycles become joules through `epsilon = kappa * f^2`.
//!
//! ```
//! use nr_energy_core::{estimate, InstructionCostTable, Scenario};
//!
//! let report = estimate(&Scenario::reference(), &InstructionCostTable::bundled()).unwrap();
//! assert_eq!(report.per_block.len(), 8);
//! assert!(report.total.energy_j > 0.0);
//! ```

pub mod basegraph;
pub mod cli;
pub mod cost;
pub mod emit;
pub mod ingest;
pub mod legacy;
pub mod opcount;
pub mod report;
pub mod scenario;
pub mod tally;

pub use basegraph::{BaseGraphError, BaseGraphId, BaseGraphSpec};
pub use cost::{CostError, CycleCount, Cycles, EnergyParams, InstructionCostTable};
pub use ingest::{compare, measured_cycles, ComparisonReport, IngestError, MeasuredReport};
pub use legacy::LegacyError;
pub use opcount::{tally_pipeline, BlockId, OpCountError, PipelineError, PipelineTallies};
pub use report::{build_report, estimate, estimate_with, EnergyReport};
pub use scenario::{DerivedParams, Modulation, Scenario, ScenarioError};
pub use tally::{DataClass, OpKind, OperationTally};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Count(#[from] OpCountError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Legacy(#[from] LegacyError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    BaseGraph(#[from] BaseGraphError),
}
