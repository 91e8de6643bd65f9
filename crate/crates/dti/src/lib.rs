//! Digital transformation index toolkit.
//!
//! End-to-end pipeline for scoring the digital maturity of organizations
//! from structured survey data and from their public web presence:
//!
//! - [`survey`] — schema + survey ingestion and feature scaling
//! - [`score`] — the two-layer weighted index (dimension scores + composite)
//! - [`crawl`] / [`html`] / [`clean`] / [`corpus`] — polite site crawling,
//!   text extraction, cleaning/anonymization, corpus assembly
//! - [`features`] — hashed TF-IDF text vectors
//! - [`mlp`] — from-scratch feedforward regressor (forward, backprop, SGD)
//! - [`eval`] — k-fold cross-validation and holdout evaluation
//! - [`kpi`] / [`readiness`] / [`report`] — KPI suites, sensor-readiness
//!   gap scoring, and the static HTML report bundle
//! - [`config`] / [`pipeline`] — the declarative config and the CLI phases
//!
//! The `examples/` directory has one runnable example per capability;
//! the `dti` binary chains them behind subcommands.

pub mod clean;
pub mod config;
pub mod corpus;
pub mod crawl;
pub mod defaults;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixture;
pub mod html;
mod jsonfmt;
pub mod kpi;
pub mod mlp;
pub mod pipeline;
pub mod readiness;
pub mod report;
pub mod score;
pub mod survey;

pub use error::{Error, Result};
