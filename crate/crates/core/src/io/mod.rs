//! Rate-matrix construction, synthetic instances and file formats.

mod canonical;
mod formats;
mod synth;

pub use canonical::{build_canonical, build_from_laplacian, CanonicalSystem, BOLTZMANN, GAS_CONSTANT, PLANCK};
pub use formats::{
    read_matrix, read_network, read_vector, write_error_report, write_matrix, write_network, write_trajectory,
    write_vector, EnergyUnit,
};
pub use synth::{synthesize, SynthParams};
