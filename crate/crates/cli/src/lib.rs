//! Library side of the `mobgossip` command-line tool: result rows, sweeps,
//! SVG plots and oracle dispatch. The binary in `main.rs` only parses
//! arguments and maps outcomes to exit codes.

pub mod oracle;
pub mod plot;
pub mod row;
pub mod sweep;

pub use row::{ResultRow, SCHEMA_VERSION};
pub use sweep::{ExperimentSpec, SweepAxes};

/// Seed of replicate `replicate` of sweep point `point` under `root`.
///
/// Every `(point, replicate)` pair reads a distinct derived stream.
pub fn replicate_seed(root: u64, point: usize, replicate: usize) -> u64 {
    use rand::RngCore;
    mobgossip::derive_stream(root, &format!("{point}.{replicate}")).next_u64()
}
