#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod graph;
pub mod splitters;
pub mod td;
pub mod bisection;
pub mod decompose;
pub mod multicut;
pub mod oracle;
