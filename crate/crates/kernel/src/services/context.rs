//! The handle through which plugin code talks to the kernel.

use std::any::Any;
use std::collections::BTreeSet;
use std::rc::Rc;

use frontend::{Annotation, Location, NodeId, TypedAst};

use super::log::{LogEvent, Logger, Severity};
use super::params::Config;
use super::plugin::{Callback, HookPoint, KernelError, Stage};
use super::properties::{Emitted, LocalStatus, PropertyDb, PropertyError, PropertyId, PropertyKind};
use super::registry::{Registry, RegistryError, TypeWitness, Witnessed};

pub(crate) struct Hook {
    pub point: HookPoint,
    pub owner: String,
    pub callback: Callback,
}

/// Mutable session state shared by all plugins.
pub(crate) struct State {
    pub stage: Stage,
    pub config: Config,
    pub log: Logger,
    pub registry: Registry,
    pub properties: PropertyDb,
    pub ast: Option<Rc<TypedAst>>,
    pub hooks: Vec<Hook>,
}

impl State {
    pub fn new() -> State {
        State {
            stage: Stage::Boot,
            config: Config::default(),
            log: Logger::default(),
            registry: Registry::new(),
            properties: PropertyDb::default(),
            ast: None,
            hooks: Vec::new(),
        }
    }

    pub fn add_hook(&mut self, point: HookPoint, owner: &str, callback: Callback) -> Result<(), KernelError> {
        if !matches!(self.stage, Stage::Boot | Stage::Configure) {
            return Err(KernelError::StageViolation {
                operation: format!("registering a hook at {point}"),
                stage: self.stage,
            });
        }
        self.hooks.push(Hook {
            point,
            owner: owner.to_string(),
            callback,
        });
        Ok(())
    }
}

/// Passed to configure callbacks, mains and hooks. Every call is made on
/// behalf of one plugin, whose name tags log lines, emissions and
/// registered values.
pub struct KernelContext<'k> {
    pub(crate) state: &'k mut State,
    pub(crate) plugin: &'k str,
}

impl<'k> KernelContext<'k> {
    pub fn plugin_name(&self) -> &str {
        self.plugin
    }

    pub fn stage(&self) -> Stage {
        self.state.stage
    }

    /// The loaded unit. Available from the Load stage on.
    pub fn try_ast(&self) -> Option<Rc<TypedAst>> {
        self.state.ast.clone()
    }

    /// The loaded unit; panics before Load.
    pub fn ast(&self) -> Rc<TypedAst> {
        self.try_ast().expect("the AST is only available after the Load stage")
    }

    pub fn config(&self) -> &Config {
        &self.state.config
    }

    /// Integer width selected by `-machdep`.
    pub fn machdep(&self) -> u32 {
        self.state.config.text("-machdep").and_then(|t| t.parse().ok()).unwrap_or(32)
    }

    pub fn log(&mut self, severity: Severity, message: impl Into<String>) {
        self.state.log.log(LogEvent::new(severity, self.plugin, message));
    }

    pub fn log_at(&mut self, severity: Severity, loc: &Location, message: impl Into<String>) {
        self.state.log.log(LogEvent::new(severity, self.plugin, message).at(loc));
    }

    pub fn debug(&mut self, message: impl Into<String>) {
        self.log(Severity::Debug, message);
    }

    pub fn info(&mut self, message: impl Into<String>) {
        self.log(Severity::Info, message);
    }

    pub fn warning(&mut self, message: impl Into<String>) {
        self.log(Severity::Warning, message);
    }

    pub fn error(&mut self, message: impl Into<String>) {
        self.log(Severity::Error, message);
    }

    pub fn properties(&self) -> &PropertyDb {
        &self.state.properties
    }

    pub fn register_property(
        &mut self,
        annotation: Annotation,
        kind: PropertyKind,
        attach: NodeId,
    ) -> Result<PropertyId, PropertyError> {
        self.state.properties.register(annotation, kind, attach)
    }

    /// Records this plugin's status on `property`. Re-emission replaces the
    /// previous status and logs a warning.
    pub fn emit(
        &mut self,
        property: PropertyId,
        local: LocalStatus,
        hypotheses: BTreeSet<PropertyId>,
    ) -> Result<(), PropertyError> {
        if self.state.properties.emit(property, self.plugin, local, hypotheses)? == Emitted::Replaced {
            let msg = format!("status of {property} emitted twice; keeping the last one");
            self.warning(msg);
        }
        Ok(())
    }

    pub fn register_value<T: Witnessed>(&mut self, name: &str, value: T) -> Result<(), RegistryError> {
        self.state.registry.register_typed(self.plugin, name, value)
    }

    pub fn register_raw(&mut self, name: &str, witness: TypeWitness, value: Rc<dyn Any>) -> Result<(), RegistryError> {
        self.state.registry.register(self.plugin, name, witness, value)
    }

    /// Typed lookup. `NotFound` means the providing plugin is absent.
    pub fn get_value<T: Witnessed>(&self, name: &str) -> Result<T, RegistryError> {
        self.state.registry.get_typed(name)
    }

    pub fn get_raw(&self, name: &str, expected: &TypeWitness) -> Result<Rc<dyn Any>, RegistryError> {
        self.state.registry.get(name, expected)
    }

    pub fn registry(&self) -> &Registry {
        &self.state.registry
    }

    /// Allowed during Boot and Configure only.
    pub fn register_hook(
        &mut self,
        point: HookPoint,
        f: impl Fn(&mut KernelContext<'_>) -> Result<(), super::plugin::PluginError> + 'static,
    ) -> Result<(), KernelError> {
        let owner = self.plugin.to_string();
        self.state.add_hook(point, &owner, Rc::new(f))
    }
}
