//! Coherent and squeezed states of a minimal-length deformed harmonic
//! oscillator, their entanglement after a beam splitter, and the parameter
//! sweeps that map it out.
//!
//! The pipeline for one parameter point is
//!
//! 1. build a normalized, truncated Fock vector ([`state`]),
//! 2. mix it with vacuum on a beam splitter ([`beam_splitter`]),
//! 3. trace out one output mode and measure the linear entropy ([`entanglement`]).
//!
//! [`sweep`] evaluates that pipeline over grids and writes CSV or JSON.
//!
//! ```
//! use ncsq::prelude::*;
//!
//! let spec = StateSpec::squeezed(Family::NcSqueezed, 1.0, 0.5, 0.5)?;
//! let state = build(&spec, 10)?;
//! let result = output_entropy(&state, &BeamSplitterConfig::balanced(), true, false)?;
//! assert!(result.linear_entropy > 0.0 && result.linear_entropy < 1.0);
//! # Ok::<(), ncsq::Error>(())
//! ```

pub mod beam_splitter;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod numerics;
pub mod selftest;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::beam_splitter::{make_config, mix_with_vacuum, BeamSplitterConfig, BipartiteAmplitudes};
    pub use crate::entanglement::{
        entropy_quadruple_sum_oracle, linear_entropy, output_entropy, reduce_over_d, von_neumann_entropy,
        DensityMatrix, EntropyResult,
    };
    pub use crate::model::DeformedOscillator;
    pub use crate::state::{
        build, converge_truncation, ho_coherent, ho_squeezed, nc_coherent, nc_squeezed, normalize, Family, FockVector,
        StateSpec,
    };
    pub use num_complex::Complex64;
}
