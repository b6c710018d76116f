//! File formats, pipeline stages and the command line for
//! [`trackmend_core`].
//!
//! | module | contents |
//! |---|---|
//! | [`zone_xml`] | zone files (`<Zone>` / `<Property>` / `<Point>`) |
//! | [`trajectory_csv`] | trajectory record files and ground-truth tables |
//! | [`weights_file`] | learned weights with their normalization statistics |
//! | [`triplet_table`] | the prioritized triplet table |
//! | [`report`] | before/after evaluation report and fusion log |
//! | [`config`] | the TOML run configuration |
//! | [`stages`], [`commands`] | pipeline stages in memory and on files |
//! | [`cli`] | the `trackmend` command |

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod seeds;
pub mod stages;
pub mod trajectory_csv;
pub mod triplet_table;
pub mod weights_file;
pub mod zone_xml;

pub use error::FormatError;
