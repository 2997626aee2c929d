//! Standard-library companion to the core crate: the JSON file formats,
//! output schemas, and the subcommand implementations behind the `lmms`
//! binary.

pub mod commands;
pub mod format;
pub mod schema;
