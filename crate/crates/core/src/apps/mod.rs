//! Applications built on combining: masked federated aggregation and
//! deduplication of files across nodes.

mod dedup;
mod fl;

pub use dedup::{dedup, file_hash, DedupConfig, DedupOutcome};
pub use fl::{
    check_wheel, fl_plan, fl_privacy_check, fl_round, fl_wheel_bound, local_edges, mask, masked_inputs, FlConfig, FlPath,
    PrivacyReport,
};
