//! Uniform message rendering shared by the kernel and every plugin.
//!
//! Every line has the shape `[source] severity: message`, where a location,
//! when present, is prepended to the message as `file:line: `.

use std::fmt;

use frontend::Location;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Debug,
    Info,
    Warning,
    Error,
    Fatal,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Debug => "debug",
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
            Severity::Fatal => "fatal",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regular expression every rendered line matches.
pub const LINE_PATTERN: &str = r"^\[[a-z][a-z0-9_]*\] (debug|info|warning|error|fatal): .*$";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEvent {
    pub severity: Severity,
    /// Plugin name or `kernel`.
    pub source: String,
    pub message: String,
    pub location: Option<Location>,
}

impl LogEvent {
    pub fn new(severity: Severity, source: &str, message: impl Into<String>) -> LogEvent {
        LogEvent {
            severity,
            source: source.to_string(),
            message: message.into(),
            location: None,
        }
    }

    pub fn at(mut self, loc: &Location) -> LogEvent {
        self.location = Some(loc.clone());
        self
    }

    /// Single-line rendering; embedded newlines are flattened.
    pub fn render(&self) -> String {
        let msg = self.message.replace('\n', " ");
        match &self.location {
            Some(l) => format!("[{}] {}: {}:{}: {}", self.source, self.severity, l.file, l.line, msg),
            None => format!("[{}] {}: {}", self.source, self.severity, msg),
        }
    }
}

/// Collects rendered lines above the verbosity threshold and remembers
/// whether anything fatal happened.
#[derive(Debug)]
pub struct Logger {
    verbosity: Severity,
    echo: bool,
    lines: Vec<String>,
    failed: bool,
}

impl Default for Logger {
    fn default() -> Self {
        Logger::new(Severity::Info)
    }
}

impl Logger {
    pub fn new(verbosity: Severity) -> Logger {
        Logger {
            verbosity,
            echo: false,
            lines: Vec::new(),
            failed: false,
        }
    }

    pub fn set_verbosity(&mut self, v: Severity) {
        self.verbosity = v;
    }

    pub fn verbosity(&self) -> Severity {
        self.verbosity
    }

    /// Also write each kept line to stderr as it is logged.
    pub fn set_echo(&mut self, echo: bool) {
        self.echo = echo;
    }

    pub fn log(&mut self, event: LogEvent) {
        if event.severity == Severity::Fatal {
            self.failed = true;
        }
        if event.severity < self.verbosity {
            return;
        }
        let line = event.render();
        if self.echo {
            eprintln!("{line}");
        }
        self.lines.push(line);
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub(crate) fn mark_failed(&mut self) {
        self.failed = true;
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub(crate) fn take_lines(&mut self) -> Vec<String> {
        std::mem::take(&mut self.lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn info_is_suppressed_at_warning() {
        let mut l = Logger::new(Severity::Warning);
        l.log(LogEvent::new(Severity::Info, "kernel", "hello"));
        assert!(l.lines().is_empty());
        l.log(LogEvent::new(Severity::Warning, "kernel", "hello"));
        assert_eq!(l.lines(), ["[kernel] warning: hello"]);
    }

    #[test]
    fn plugin_error_prefix() {
        let e = LogEvent::new(Severity::Error, "ana", "boom");
        assert!(e.render().starts_with("[ana] error:"));
    }

    #[test]
    fn fatal_sets_failure_even_when_hidden() {
        let mut l = Logger::new(Severity::Fatal);
        l.log(LogEvent::new(Severity::Error, "x", "e"));
        assert!(!l.failed());
        l.log(LogEvent::new(Severity::Fatal, "x", "f"));
        assert!(l.failed());
    }

    #[test]
    fn location_goes_into_message() {
        let file: std::sync::Arc<str> = "a.mc".into();
        let e = LogEvent::new(Severity::Warning, "ana", "two\nlines").at(&Location::new(&file, 3, 9));
        assert_eq!(e.render(), "[ana] warning: a.mc:3: two lines");
    }
}
