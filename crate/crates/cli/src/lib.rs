//! Command-line front end for `dsmimo`: configuration parsing, sweep drivers
//! and CSV output.

pub mod commands;
pub mod config;
pub mod csv;
