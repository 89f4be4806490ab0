//! Error generators for quantum process matrices.
//!
//! A gate `G` with ideal target `T` has post-gate error process
//! `E = G T^-1` and error generator `L = log E` (or `E - I`). `L` is
//! decomposed into Hamiltonian (H), Pauli-stochastic (S),
//! Pauli-correlation (C) and active (A) elementary generators, from which
//! Jamiolkowski metrics and reduced models follow.

pub mod channels;
pub mod error;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod pauli;
pub mod report;
pub mod superop;

pub use channels::{ideal_target, make_channel, random_small, ChannelKind, ChannelSpec};
pub use error::{Error, Result};
pub use generators::{
    all_labels, decompose, dual_generator, elementary_generator, extract_error_generator, process_from_rates,
    reconstruct, sector_split, stochastic_constraints, Convention, ErrorGeneratorRates, GeneratorLabel, Sector,
};
pub use metrics::{entanglement_fidelity, j_amplitude, j_probability, MetricsReport};
pub use models::{labels_of, parameter_count, project, validate_model_fit, ModelSpec};
pub use pauli::{PauliString, PhasedPauli};
pub use superop::{check_process, jamiolkowski, ProcessMatrix};
