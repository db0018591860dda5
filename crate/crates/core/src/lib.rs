//! Network-layer API quality auditing over HAR captures.
//!
//! Pipeline: [`har`] parses archives, [`classify`] picks out API calls,
//! [`detect`] runs the eight anti-pattern detectors, [`scoring`] folds them
//! into a 0-100 composite per capture and site, [`report`] writes the
//! published tables and per-site documents, and [`validate`] re-audits a
//! finished batch from files alone.

pub mod classify;
pub mod config;
pub mod detect;
pub mod domain;
pub mod har;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod synth;
pub mod validate;
