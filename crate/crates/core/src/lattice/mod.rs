//! Lattice boxes, edge-weight laws and weight configurations.

mod config;
mod dump;
mod lattice_box;
mod law;

pub use config::{sample_configuration, sample_configuration_with, truncate_law, Provenance, WeightConfiguration};
pub use dump::{read_configuration, write_configuration};
pub use lattice_box::{EdgeId, LatticeBox};
pub use law::{Atom, BoundedLaw, EdgeSampler, LawKind, TiltedLaw, UniformPart};
