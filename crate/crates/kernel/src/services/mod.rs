//! Kernel services: the public surface plugins program against.

pub mod context;
pub mod log;
pub mod params;
pub mod plugin;
pub mod properties;
pub mod registry;
pub mod report;
