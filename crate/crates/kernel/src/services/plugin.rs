//! Plugin descriptors, lifecycle stages and hook points.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use super::context::KernelContext;
use super::params::ParameterSpec;
use super::properties::PropertyError;
use super::registry::RegistryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Boot,
    Configure,
    Load,
    Mains,
    Report,
    AtExit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HookPoint {
    AfterLoad,
    BeforeMains,
    AfterPluginMain(String),
    AtExit,
}

impl fmt::Display for HookPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HookPoint::AfterPluginMain(p) => write!(f, "AfterPluginMain({p})"),
            other => fmt::Debug::fmt(other, f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("plugin `{0}` is already registered")]
    DuplicatePlugin(String),
    #[error("`{0}` is not a valid plugin name")]
    InvalidName(String),
    #[error("{operation} is not allowed during the {stage} stage")]
    StageViolation { operation: String, stage: Stage },
    #[error("option `{0}` is already defined")]
    ParameterCollision(String),
    #[error("option `{key}` of plugin `{plugin}` must be spelled `-{plugin}-...`")]
    UnprefixedParameter { plugin: String, key: String },
    #[error("default of option `{0}` does not match its kind")]
    BadDefault(String),
}

/// Failure of a plugin main or hook.
#[derive(Debug, Error)]
pub enum PluginError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

pub type Callback = Rc<dyn Fn(&mut KernelContext<'_>) -> Result<(), PluginError>>;

/// Everything the kernel needs to know about a plugin.
#[derive(Clone)]
pub struct PluginDescriptor {
    pub name: String,
    pub version: String,
    pub help: String,
    /// Plugin options, excluding the enabling flag `-<name>` which the
    /// kernel adds itself.
    pub parameters: Vec<ParameterSpec>,
    /// Runs during Configure when the plugin is enabled.
    pub configure: Option<Callback>,
    pub main: Callback,
    pub hooks: Vec<(HookPoint, Callback)>,
}

impl fmt::Debug for PluginDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PluginDescriptor")
            .field("name", &self.name)
            .field("version", &self.version)
            .field("parameters", &self.parameters)
            .field("hooks", &self.hooks.iter().map(|(p, _)| p).collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl PluginDescriptor {
    pub fn new(name: &str, version: &str, help: &str) -> PluginDescriptor {
        PluginDescriptor {
            name: name.into(),
            version: version.into(),
            help: help.into(),
            parameters: Vec::new(),
            configure: None,
            main: Rc::new(|_| Ok(())),
            hooks: Vec::new(),
        }
    }

    pub fn parameter(mut self, spec: ParameterSpec) -> Self {
        self.parameters.push(spec);
        self
    }

    pub fn configure(mut self, f: impl Fn(&mut KernelContext<'_>) -> Result<(), PluginError> + 'static) -> Self {
        self.configure = Some(Rc::new(f));
        self
    }

    pub fn main(mut self, f: impl Fn(&mut KernelContext<'_>) -> Result<(), PluginError> + 'static) -> Self {
        self.main = Rc::new(f);
        self
    }

    pub fn hook(
        mut self,
        point: HookPoint,
        f: impl Fn(&mut KernelContext<'_>) -> Result<(), PluginError> + 'static,
    ) -> Self {
        self.hooks.push((point, Rc::new(f)));
        self
    }
}

pub(crate) fn valid_plugin_name(name: &str) -> bool {
    let mut c = name.chars();
    matches!(c.next(), Some('a'..='z')) && c.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}
