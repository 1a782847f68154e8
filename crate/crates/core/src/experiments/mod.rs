//! Monte Carlo campaigns, the Mecke and FKG suites, and the command line.

mod checks;
pub mod cli;
mod cluster;
mod lemma;
mod output;

pub use checks::{verify_fkg, verify_mecke, CheckReport, CheckRow, CHECK_SIGMAS};
pub use cluster::{
    adjacent_lower_bound, capacity_first_order, cluster_size_histogram, expected_cluster_capacity, one_arm_scan,
    two_point_scan, ClusterCapacity, FirstOrder, ScanSettings, MAX_TOUCH_RATE,
};
pub use lemma::{lemma_scan, weighted_slope, LemmaKind, LemmaParams};
pub use output::{num, software_version, Format, Record, ScanResult, ScanRow, BASE_COLUMNS, SCAN_SCHEMA, SCAN_SCHEMA_VERSION};
