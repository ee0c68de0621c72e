//! Networks, topology views and scenario documents.

mod graph;
mod scenario;
mod views;

pub use graph::{NetworkGraph, NodeId, Violation};
pub use scenario::{
    load_scenario, save_scenario, scenario, Algorithm, DedupParams, FlParams, Scenario, Task,
};
pub use views::{
    build_path_with_cloud, build_uniform_wheel, build_wheel, FatLinksView, WheelView,
};

/// `validate` as a free function, mirroring the scenario loader.
pub fn validate(graph: &NetworkGraph) -> Vec<Violation> {
    graph.validate()
}
