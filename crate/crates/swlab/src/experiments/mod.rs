//! One runner per subcommand. Each parses its own parameter map, computes
//! and returns a table plus a JSON summary; the driver writes the files.

mod field;
mod neck;
mod sflow;
mod torus;

use serde_json::{Map, Value};

use crate::config::Fields;
use crate::error::CliResult;
use crate::output::ExperimentOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Badpoints,
    Spectrum,
    Gaps,
    Flow,
    CsdDescent,
    Chi,
    NeckSweep,
    DeltaL,
    MasSf,
    Intersect,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Badpoints,
        Experiment::Spectrum,
        Experiment::Gaps,
        Experiment::Flow,
        Experiment::CsdDescent,
        Experiment::Chi,
        Experiment::NeckSweep,
        Experiment::DeltaL,
        Experiment::MasSf,
        Experiment::Intersect,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Badpoints => "badpoints",
            Experiment::Spectrum => "spectrum",
            Experiment::Gaps => "gaps",
            Experiment::Flow => "flow",
            Experiment::CsdDescent => "csd-descent",
            Experiment::Chi => "chi",
            Experiment::NeckSweep => "neck-sweep",
            Experiment::DeltaL => "delta-L",
            Experiment::MasSf => "mas-sf",
            Experiment::Intersect => "intersect",
        }
    }

    pub fn from_name(name: &str) -> Option<Experiment> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

/// Runs `experiment` on the current rayon pool.
pub fn execute(experiment: Experiment, parameters: Map<String, Value>, seed: u64) -> CliResult<ExperimentOutput> {
    let f = Fields::new(parameters);
    match experiment {
        Experiment::Badpoints => torus::badpoints(f),
        Experiment::Spectrum => torus::spectrum(f),
        Experiment::Gaps => torus::gaps(f),
        Experiment::Flow => sflow::flow(f, seed),
        Experiment::CsdDescent => field::csd_descent(f, seed),
        Experiment::Chi => sflow::chi(f, seed),
        Experiment::NeckSweep => neck::neck_sweep(f),
        Experiment::DeltaL => neck::delta_l(f),
        Experiment::MasSf => neck::mas_sf(f),
        Experiment::Intersect => sflow::intersect(f),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("parameter records serialize")
}
