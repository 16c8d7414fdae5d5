pub mod archive;
pub mod cli;
pub mod config;
pub mod digest;
pub mod formats;
pub mod inputs;
pub mod manifest;
pub mod report;
pub mod runner;
