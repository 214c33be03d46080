//! Kernel internals: the lifecycle engine and the option parser. Plugins
//! must not depend on anything in here; only [`crate::Kernel`] uses it.

pub(crate) mod cli;
pub(crate) mod lifecycle;
