mod energy;
mod flow;
mod metric;
mod scan;
mod solve;

use crate::cli::{RunConfig, Task};
use crate::{Outcome, Result};

pub use scan::{scan_rows, ScanRow};

pub fn dispatch(config: &RunConfig) -> Result<Outcome> {
    let out = &config.output;
    match &config.task {
        Task::Solve(t) => solve::run(t, out),
        Task::Energy(t) => energy::run(t, out),
        Task::Scan(t) => scan::run(t, out),
        Task::Flow(t) => flow::run(t, out),
        Task::Metric(t) => metric::run(t, out),
    }
}
