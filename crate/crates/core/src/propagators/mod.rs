//! Segment propagators of the delay-plus-pulse protocol.
//!
//! Two independent routes produce the same Bloch-vector maps: closed-form
//! relaxation and rotation maps, and exact exponentials of the Lindblad
//! generator in Liouville space.

mod expm;
mod maps;
mod superop;

pub use expm::{expm, expm_eigen, expm_scaling_squaring, ExpmMethod, MAX_EIGENBASIS_CONDITION};
pub(crate) use maps::rotation_by;
pub use maps::{
    cycle_map, exact_propagator, exact_segment_map, free_evolution_map, liouville_to_affine, pulse_map, rotation_map,
    PulseSpec,
};
pub use superop::{lindblad_superoperator, rotation_generator, Axis, Superoperator};
