//! Command-line front of miniverif.
//!
//! Registers the bundled plugins and hands everything else to the kernel.
//! Each plugin sits behind a cargo feature of the same name so the tool
//! can be built without it.

use std::io::Write;

use kernel::{exit_code, Command, Kernel, PluginDescriptor};

pub const PROGRAM: &str = "miniverif";

/// The compiled-in plugins, sorted by name.
pub fn bundled() -> Vec<PluginDescriptor> {
    #[allow(unused_mut)]
    let mut v: Vec<PluginDescriptor> = Vec::new();
    #[cfg(feature = "cg")]
    v.push(plugin_callgraph::descriptor());
    #[cfg(feature = "const")]
    v.push(plugin_const::descriptor());
    #[cfg(feature = "eva")]
    v.push(plugin_eva::descriptor());
    #[cfg(feature = "rte")]
    v.push(plugin_rte::descriptor());
    v
}

pub fn kernel_with(plugins: Vec<PluginDescriptor>) -> Kernel {
    let mut k = Kernel::new();
    for p in plugins {
        let name = p.name.clone();
        if let Err(e) = k.register_plugin(p) {
            panic!("bundled plugin {name} rejected: {e}");
        }
    }
    k
}

/// Runs one invocation. The report goes to `out`, logs to `err`.
pub fn run<S: AsRef<str>>(args: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut k = kernel_with(bundled());
    let config = match k.parse_command_line(args) {
        Ok(Command::Help) => {
            let _ = write!(out, "{}", k.help_text(PROGRAM));
            return exit_code::SUCCESS;
        }
        Ok(Command::Run(c)) => c,
        Err(e) => {
            let _ = writeln!(err, "{PROGRAM}: {e}");
            let _ = writeln!(err, "try `{PROGRAM} -help`");
            return exit_code::USAGE;
        }
    };
    let report = k.run(&config);
    for line in &report.logs {
        let _ = writeln!(err, "{line}");
    }
    let _ = write!(out, "{}", report.output);
    report.exit_code
}
