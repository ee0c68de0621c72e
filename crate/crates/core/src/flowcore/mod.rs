//! Dynamic flows and the schedules they induce.
//!
//! A schedule of bit transfers and an integral flow over the time-expanded
//! graph are two views of the same thing. Optimal cW/cR/cAW/cAR schedules
//! come from quickest flows; reads are obtained by reversing time.

mod dynamic;
mod expanded;
pub mod maxflow;
mod schedule;

pub use dynamic::{evacuation_flow, max_flow_over_time, quickest_flow, DynamicFlow, FlowEntry};
pub use expanded::{ExpandedArc, TimeExpandedGraph};
pub use schedule::{
    car_schedule, caw_schedule, cr_schedule, cw_schedule, flow_to_schedule, schedule_to_flow,
    Direction, Op, Schedule, ScheduleEntry, Transfer,
};
