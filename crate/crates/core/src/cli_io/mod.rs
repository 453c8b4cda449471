//! File formats, run configuration and the command drivers behind the
//! `hypdel` binary.

pub mod commands;
pub mod format;
pub mod render;

pub use commands::{
    cmd_inner, cmd_optimize, cmd_render, load_problem, trailer_value, InitSpec, OptimizeOutcome, Problem, RepSource,
    RunConfig, WeightSpec,
};
pub use format::{
    parse_key_values, parse_mesh, parse_rep, parse_state, parse_table, write_mesh, write_rep, write_state,
    SolverState,
};
pub use render::render_svg;
