//! Builds a machine-readable dictionary from Wiktionary dumps.

pub mod analyze;
pub mod dump;
pub mod entry;
pub mod lookup;
pub mod pipeline;
pub mod registry;
pub mod relations;
pub mod stats;
pub mod store;
pub mod translations;
pub mod wikitext;
