//! Scoped command-line parameters.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamKind {
    /// Present or absent; takes no value.
    Flag,
    Int { min: i64, max: i64 },
    Text,
    Enum(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Flag(bool),
    Int(i64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Flag(b) => write!(f, "{b}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Kernel,
    Plugin(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterSpec {
    /// Full spelling including the leading dash.
    pub key: String,
    pub kind: ParamKind,
    pub default: Value,
    pub scope: Scope,
    pub help: String,
}

impl ParameterSpec {
    /// A flag defaulting to off. The scope is fixed when the owning plugin
    /// is registered.
    pub fn flag(key: &str, help: &str) -> ParameterSpec {
        ParameterSpec::new(key, ParamKind::Flag, Value::Flag(false), help)
    }

    pub fn int(key: &str, min: i64, max: i64, default: i64, help: &str) -> ParameterSpec {
        ParameterSpec::new(key, ParamKind::Int { min, max }, Value::Int(default), help)
    }

    pub fn text(key: &str, default: &str, help: &str) -> ParameterSpec {
        ParameterSpec::new(key, ParamKind::Text, Value::Text(default.into()), help)
    }

    pub fn choice(key: &str, values: &[&str], default: &str, help: &str) -> ParameterSpec {
        ParameterSpec::new(
            key,
            ParamKind::Enum(values.iter().map(|v| v.to_string()).collect()),
            Value::Text(default.into()),
            help,
        )
    }

    /// `on`/`off` switch.
    pub fn switch(key: &str, default_on: bool, help: &str) -> ParameterSpec {
        ParameterSpec::choice(key, &["on", "off"], if default_on { "on" } else { "off" }, help)
    }

    fn new(key: &str, kind: ParamKind, default: Value, help: &str) -> ParameterSpec {
        ParameterSpec {
            key: key.into(),
            kind,
            default,
            scope: Scope::Kernel,
            help: help.into(),
        }
    }

    pub fn takes_value(&self) -> bool {
        self.kind != ParamKind::Flag
    }

    /// Whether `v` is a legal value for this parameter.
    pub fn accepts(&self, v: &Value) -> bool {
        match (&self.kind, v) {
            (ParamKind::Flag, Value::Flag(_)) | (ParamKind::Text, Value::Text(_)) => true,
            (ParamKind::Int { min, max }, Value::Int(i)) => min <= i && i <= max,
            (ParamKind::Enum(vals), Value::Text(s)) => vals.contains(s),
            _ => false,
        }
    }

    /// Converts command-line text to a value of this kind.
    pub fn parse_value(&self, text: &str) -> Option<Value> {
        let v = match self.kind {
            ParamKind::Flag => return None,
            ParamKind::Int { .. } => Value::Int(text.parse().ok()?),
            ParamKind::Text | ParamKind::Enum(_) => Value::Text(text.to_string()),
        };
        self.accepts(&v).then_some(v)
    }

    pub(crate) fn value_hint(&self) -> String {
        match &self.kind {
            ParamKind::Flag => String::new(),
            ParamKind::Int { min, max } => format!(" <{min}..{max}>"),
            ParamKind::Text => " <text>".into(),
            ParamKind::Enum(v) => format!(" {{{}}}", v.join("|")),
        }
    }
}

/// Values for every registered parameter plus the enabled plugins and the
/// input files.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub values: BTreeMap<String, Value>,
    /// Plugins in the order their enabling flags appeared.
    pub enabled: Vec<String>,
    pub files: Vec<String>,
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.values.get(key), Some(Value::Flag(true)))
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.values.get(key) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    /// `true` for an `on`/`off` parameter set to `on`.
    pub fn is_on(&self, key: &str) -> bool {
        self.text(key) == Some("on")
    }

    pub fn is_enabled(&self, plugin: &str) -> bool {
        self.enabled.iter().any(|p| p == plugin)
    }
}
