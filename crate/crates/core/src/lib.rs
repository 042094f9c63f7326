//! Multicarrier modulation as one explicit pipeline of structured linear
//! operators.
//!
//! A single synthesis chain covers cyclic-prefix OFDM, FBMC-OQAM, and
//! SC-FDMA: data frames pass through cyclic extension, commutator routing,
//! a generalized filtering stage (upsample, zero-stuff to a circular
//! period, circular-filter, modulate to subchannel frequencies, decimate),
//! windowing, subchannel multiplexing with an optional transpose, a second
//! filtering stage, another extension tier, subchannel summation, stream
//! combining, and frame overlap-add. Choosing the parameters of these
//! blocks selects the waveform; the code path never changes.
//!
//! The crate is `no_std` (with `alloc`): it holds the operator
//! definitions, the configuration model, the execution engine, and the
//! three classic presets. File formats, oracles, and the command-line
//! front end live in the companion `mcmod-tools` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod config;
pub mod engine;
pub mod frame;
pub mod mat;
pub mod operators;
pub mod presets;

pub use num_complex::Complex64;
