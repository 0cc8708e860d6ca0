//! The sinker benchmark campaign: heterogeneous viscosity fields, the
//! experiment matrix and its reports.

pub mod config;
pub mod experiment;
pub mod report;
pub mod sinker;
pub mod svg;

pub use config::{ExperimentConfig, MeshFamily};
pub use experiment::{build_mesh, build_problem, run_experiment_matrix, ReportRow, ReportTable, RowStatus};
pub use report::{parse_csv, to_csv, to_structured_text, write_text, CsvRow, CSV_HEADER};
pub use sinker::{chi, place_sinkers, SinkerField, SinkerParams};
pub use svg::{partition_svg, speed_svg, viscosity_classes, viscosity_svg, SvgField};
