//! Compiles and runs the Rust listings in `book/src` as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/deformed-oscillator.md")]
pub mod deformed_oscillator {}

#[doc = include_str!("../../../book/src/squeezed-states.md")]
pub mod squeezed_states {}

#[doc = include_str!("../../../book/src/beam-splitter.md")]
pub mod beam_splitter {}

#[doc = include_str!("../../../book/src/entropy.md")]
pub mod entropy {}

#[doc = include_str!("../../../book/src/convergence.md")]
pub mod convergence {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
