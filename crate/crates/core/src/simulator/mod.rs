//! Deterministic execution of schedules and algorithm programs.

mod engine;
mod metrics;
mod program;
mod store;

pub use engine::{run_schedule, Engine};
pub use metrics::RoundMetrics;
pub use program::{Action, LocalFn, Program, Source};
pub use store::{Buffer, CloudStore, Store, WriteRecord};

use crate::bits::Bits;
use crate::error::Result;
use crate::model::NetworkGraph;
use crate::operators::Operator;

/// What an algorithm hands to the engine: a program plus the files each
/// node starts with.
#[derive(Clone, Debug, Default)]
pub struct Plan {
    pub program: Program,
    pub initial: Vec<(usize, String, Bits)>,
    pub initial_cloud: Vec<(String, Bits)>,
    pub operator: Option<Operator>,
}

/// An algorithm that precomputes its program offline and reads its output
/// back from the final engine state.
pub trait Driver {
    type Output;

    fn plan(&self, graph: &NetworkGraph) -> Result<Plan>;

    fn collect(&self, engine: &Engine) -> Result<Self::Output>;
}

/// Executes a plan on a fresh engine.
pub fn execute<'g>(graph: &'g NetworkGraph, plan: &Plan, trace: bool) -> Result<Engine<'g>> {
    let mut e = Engine::new(graph);
    if let Some(op) = &plan.operator {
        e = e.with_operator(op.clone());
    }
    if trace {
        e = e.with_trace();
    }
    for (node, file, bits) in &plan.initial {
        e.load(*node, file, bits);
    }
    for (file, bits) in &plan.initial_cloud {
        e.load_cloud(0, file, bits);
    }
    e.run(&plan.program)?;
    Ok(e)
}

/// Runs a driver to completion.
pub fn run_algorithm<D: Driver>(driver: &D, graph: &NetworkGraph) -> Result<(D::Output, RoundMetrics)> {
    let plan = driver.plan(graph)?;
    let engine = execute(graph, &plan, false)?;
    let out = driver.collect(&engine)?;
    Ok((out, engine.metrics().clone()))
}
