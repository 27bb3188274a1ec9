//! Simulation, training and Fourier-expressivity analysis of data
//! re-uploading quantum neural networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: dense complex matrices and pure states,
//! - [`circuit`]: layers, entanglers, observables and the network output,
//! - [`spectrum`]: partial Fourier series of the output, counted symbolically
//!   (superoperator recursion) and numerically (DFT),
//! - [`trainer`]: squared-error regression by gradient descent with restarts,
//! - [`bench`]: teacher-student benchmarks and prediction maps,
//! - [`io`]: CSV/JSON emission shared by the command-line tool.
//!
//! The guide in `book/` walks through the same material with runnable snippets.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod io;
pub mod rng;
pub mod spectrum;
pub mod tensor;
pub mod trainer;

pub use circuit::{
    Architecture, Entanglement, EntanglerOrder, LayerKind, LayerParams, Observable,
    ObservableSpec, ParameterSet,
};
pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, Pauli, QuantumState, C64};

/// Version string echoed into run outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
