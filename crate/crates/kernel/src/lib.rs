//! Kernel of the miniverif analysis framework.
//!
//! The kernel owns the whole session. Plugins register themselves during
//! Boot with a [`PluginDescriptor`]; the kernel then parses the command
//! line, loads the sources, runs the enabled plugins in flag order and
//! consolidates every status they emitted into one report. Plugins never
//! call each other: they exchange annotations through the property
//! database and functions through the typed value [`Registry`].
//!
//! The kernel knows no plugin by name.
//!
//! ```
//! use kernel::{Command, Kernel, PluginDescriptor, SourceFile};
//!
//! let mut k = Kernel::new();
//! k.register_plugin(PluginDescriptor::new("hello", "1.0", "says hello").main(|ctx| {
//!     ctx.info("hello");
//!     Ok(())
//! }))
//! .unwrap();
//! let Command::Run(config) = k.parse_command_line(&["-hello", "a.mc"]).unwrap() else { panic!() };
//! let out = k.run_sources(&config, vec![SourceFile::new("a.mc", "int main() { return 0; }")]);
//! assert_eq!(out.exit_code, 0);
//! assert_eq!(out.logs, ["[hello] info: hello"]);
//! ```

pub mod internals;
pub mod services;

use std::rc::Rc;

pub use frontend::SourceFile;
pub use internals::cli::{CliError, Command};
pub use services::context::KernelContext;
pub use services::log::{LogEvent, Severity, LINE_PATTERN};
pub use services::params::{Config, ParamKind, ParameterSpec, Scope, Value};
pub use services::plugin::{Callback, HookPoint, KernelError, PluginDescriptor, PluginError, Stage};
pub use services::properties::{
    Consolidated, EmittedStatus, LocalStatus, Property, PropertyDb, PropertyError, PropertyId, PropertyKind,
};
pub use services::registry::{Func, Func2, Registry, RegistryError, TypeWitness, Witnessed};
pub use services::report::{Report, ReportEntry, ReportFormat, Summary};

use services::context::State;
use services::plugin::valid_plugin_name;

/// Process exit codes.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const LOAD_FAILURE: i32 = 2;
    pub const FAILURE: i32 = 3;
    pub const UNPROVED: i32 = 4;
}

/// Everything observable about one session.
#[derive(Clone, Debug, Default)]
pub struct ExitReport {
    pub exit_code: i32,
    /// Stages entered after Boot.
    pub stages: Vec<Stage>,
    pub executed_mains: Vec<String>,
    /// Hook points reached, whether or not any hook was registered there.
    pub hook_trace: Vec<HookPoint>,
    /// Rendered log lines that passed the verbosity filter.
    pub logs: Vec<String>,
    /// Absent when loading failed.
    pub report: Option<Report>,
    /// The report rendered in the configured format.
    pub output: String,
}

pub struct Kernel {
    plugins: Vec<PluginDescriptor>,
    options: Vec<ParameterSpec>,
    state: State,
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::new()
    }
}

impl Kernel {
    pub fn new() -> Kernel {
        let options = vec![
            ParameterSpec::choice("-machdep", &["16", "32", "64"], "32", "integer width in bits"),
            ParameterSpec::flag("-quiet", "only show warnings and errors"),
            ParameterSpec::flag("-verbose", "also show debug messages"),
            ParameterSpec::choice("-report-format", &["text", "json"], "text", "report format"),
            ParameterSpec::flag("-report-unproved-exit", "exit with code 4 if properties remain unproved"),
        ];
        Kernel {
            plugins: Vec::new(),
            options,
            state: State::new(),
        }
    }

    fn kernel_keys(&self) -> impl Iterator<Item = &str> {
        self.options.iter().filter(|o| o.scope == Scope::Kernel).map(|o| o.key.as_str())
    }

    /// Adds a plugin and merges its options. Boot stage only.
    pub fn register_plugin(&mut self, desc: PluginDescriptor) -> Result<usize, KernelError> {
        if self.state.stage != Stage::Boot {
            return Err(KernelError::StageViolation {
                operation: format!("registering plugin `{}`", desc.name),
                stage: self.state.stage,
            });
        }
        let name = desc.name.clone();
        if !valid_plugin_name(&name) || name == "kernel" {
            return Err(KernelError::InvalidName(name));
        }
        if self.plugins.iter().any(|p| p.name == name) {
            return Err(KernelError::DuplicatePlugin(name));
        }
        let enable = format!("-{name}");
        let prefix = format!("-{name}-");
        if let Some(k) = self.kernel_keys().find(|k| *k == enable || k.starts_with(&prefix)) {
            return Err(KernelError::ParameterCollision(k.to_string()));
        }
        let mut specs = vec![ParameterSpec {
            scope: Scope::Plugin(name.clone()),
            ..ParameterSpec::flag(&enable, &format!("enable {name}"))
        }];
        for p in &desc.parameters {
            if self.options.iter().chain(&specs).any(|o| o.key == p.key) {
                return Err(KernelError::ParameterCollision(p.key.clone()));
            }
            if !p.key.starts_with(&prefix) || p.key.len() == prefix.len() {
                return Err(KernelError::UnprefixedParameter {
                    plugin: name,
                    key: p.key.clone(),
                });
            }
            if !p.accepts(&p.default) {
                return Err(KernelError::BadDefault(p.key.clone()));
            }
            specs.push(ParameterSpec {
                scope: Scope::Plugin(name.clone()),
                ..p.clone()
            });
        }
        for (point, cb) in &desc.hooks {
            self.state.add_hook(point.clone(), &name, Rc::clone(cb))?;
        }
        self.options.extend(specs);
        self.plugins.push(desc);
        Ok(self.plugins.len() - 1)
    }

    /// Plugin names in registration order.
    pub fn list_plugins(&self) -> Vec<&str> {
        self.plugins.iter().map(|p| p.name.as_str()).collect()
    }

    /// The merged option table: kernel options, then each plugin's.
    pub fn options(&self) -> &[ParameterSpec] {
        &self.options
    }

    pub fn stage(&self) -> Stage {
        self.state.stage
    }

    /// Registers a hook on behalf of `owner`. Boot stage only; plugins
    /// register later hooks through their context during Configure.
    pub fn register_hook(
        &mut self,
        point: HookPoint,
        owner: &str,
        f: impl Fn(&mut KernelContext<'_>) -> Result<(), PluginError> + 'static,
    ) -> Result<(), KernelError> {
        self.state.add_hook(point, owner, Rc::new(f))
    }

    pub fn parse_command_line<S: AsRef<str>>(&self, args: &[S]) -> Result<Command, CliError> {
        let args: Vec<String> = args.iter().map(|a| a.as_ref().to_string()).collect();
        internals::cli::parse(&args, &self.options)
    }

    pub fn help_text(&self, program: &str) -> String {
        let plugins: Vec<(String, String, String)> = self
            .plugins
            .iter()
            .map(|p| (p.name.clone(), p.version.clone(), p.help.clone()))
            .collect();
        internals::cli::help_text(program, &self.options, &plugins)
    }

    /// Also print log lines to stderr as they are produced.
    pub fn set_log_echo(&mut self, echo: bool) {
        self.state.log.set_echo(echo);
    }

    /// Runs the session on the files named in `config`.
    pub fn run(&mut self, config: &Config) -> ExitReport {
        let sources = config
            .files
            .iter()
            .map(|f| {
                std::fs::read_to_string(f)
                    .map(|text| SourceFile::new(f.clone(), text))
                    .map_err(|e| format!("cannot read {f}: {e}"))
            })
            .collect();
        self.start(config, sources)
    }

    /// Runs the session on in-memory sources; `config.files` is ignored.
    pub fn run_sources(&mut self, config: &Config, sources: Vec<SourceFile>) -> ExitReport {
        self.start(config, sources.into_iter().map(Ok).collect())
    }

    fn start(&mut self, config: &Config, sources: Vec<Result<SourceFile, String>>) -> ExitReport {
        if self.state.stage != Stage::Boot {
            let line = LogEvent::new(Severity::Fatal, "kernel", "a kernel runs only one session").render();
            return ExitReport {
                exit_code: exit_code::FAILURE,
                logs: vec![line],
                ..ExitReport::default()
            };
        }
        self.state.config = config.clone();
        internals::lifecycle::run(&self.plugins, &mut self.state, sources)
    }
}
