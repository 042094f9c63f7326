//! Companion tooling for the `mcmod-core` modulation engine.
//!
//! This crate carries everything that needs the standard library or third
//! party services: independent reference implementations used to
//! cross-check the engine, binary IQ file handling, a reproducible PRBS
//! source, PSD and PAPR metrics, and the JSON configuration document
//! format consumed by the `mcmod` command line front-end.

pub mod config_doc;
pub mod iq;
pub mod metrics;
pub mod oracles;
pub mod prbs;
