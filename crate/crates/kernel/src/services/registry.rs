//! Plugin database: named values tagged with a structural type witness.
//!
//! Values are stored type-erased next to a [`TypeWitness`]. A lookup must
//! state the witness it expects and only succeeds on structural equality,
//! so two plugins agree on an API's shape without sharing Rust types.

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use frontend::NodeId;
use interval::Interval;
use thiserror::Error;

/// Runtime description of a monomorphic value shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeWitness {
    Int,
    Bool,
    Text,
    NodeId,
    Interval,
    List(Box<TypeWitness>),
    Pair(Box<TypeWitness>, Box<TypeWitness>),
    Function(Vec<TypeWitness>, Box<TypeWitness>),
}

impl TypeWitness {
    pub fn list(w: TypeWitness) -> TypeWitness {
        TypeWitness::List(Box::new(w))
    }

    pub fn pair(a: TypeWitness, b: TypeWitness) -> TypeWitness {
        TypeWitness::Pair(Box::new(a), Box::new(b))
    }

    pub fn function(args: Vec<TypeWitness>, ret: TypeWitness) -> TypeWitness {
        TypeWitness::Function(args, Box::new(ret))
    }
}

impl fmt::Display for TypeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeWitness::Int => f.write_str("int"),
            TypeWitness::Bool => f.write_str("bool"),
            TypeWitness::Text => f.write_str("text"),
            TypeWitness::NodeId => f.write_str("node-id"),
            TypeWitness::Interval => f.write_str("interval"),
            TypeWitness::List(w) => write!(f, "list-of({w})"),
            TypeWitness::Pair(a, b) => write!(f, "pair({a}, {b})"),
            TypeWitness::Function(args, r) => {
                f.write_str("function(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, " -> {r})")
            }
        }
    }
}

/// A one-argument function value.
pub struct Func<A, R>(pub Rc<dyn Fn(A) -> R>);

impl<A, R> Clone for Func<A, R> {
    fn clone(&self) -> Self {
        Func(Rc::clone(&self.0))
    }
}

impl<A, R> Func<A, R> {
    pub fn new(f: impl Fn(A) -> R + 'static) -> Func<A, R> {
        Func(Rc::new(f))
    }

    pub fn call(&self, a: A) -> R {
        (self.0)(a)
    }
}

impl<A, R> fmt::Debug for Func<A, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Func(..)")
    }
}

/// A two-argument function value.
pub struct Func2<A, B, R>(pub Rc<dyn Fn(A, B) -> R>);

impl<A, B, R> Clone for Func2<A, B, R> {
    fn clone(&self) -> Self {
        Func2(Rc::clone(&self.0))
    }
}

impl<A, B, R> Func2<A, B, R> {
    pub fn new(f: impl Fn(A, B) -> R + 'static) -> Func2<A, B, R> {
        Func2(Rc::new(f))
    }

    pub fn call(&self, a: A, b: B) -> R {
        (self.0)(a, b)
    }
}

impl<A, B, R> fmt::Debug for Func2<A, B, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Func2(..)")
    }
}

/// Rust types with a fixed witness.
pub trait Witnessed: Clone + 'static {
    fn witness() -> TypeWitness;
}

macro_rules! base_witness {
    ($($t:ty => $w:ident),*) => {
        $(impl Witnessed for $t {
            fn witness() -> TypeWitness {
                TypeWitness::$w
            }
        })*
    };
}

base_witness!(i64 => Int, bool => Bool, String => Text, NodeId => NodeId, Interval => Interval);

impl<T: Witnessed> Witnessed for Vec<T> {
    fn witness() -> TypeWitness {
        TypeWitness::list(T::witness())
    }
}

impl<A: Witnessed, B: Witnessed> Witnessed for (A, B) {
    fn witness() -> TypeWitness {
        TypeWitness::pair(A::witness(), B::witness())
    }
}

impl<A: Witnessed, R: Witnessed> Witnessed for Func<A, R> {
    fn witness() -> TypeWitness {
        TypeWitness::function(vec![A::witness()], R::witness())
    }
}

impl<A: Witnessed, B: Witnessed, R: Witnessed> Witnessed for Func2<A, B, R> {
    fn witness() -> TypeWitness {
        TypeWitness::function(vec![A::witness(), B::witness()], R::witness())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("value `{0}` is already registered")]
    DuplicateValue(String),
    #[error("plugin `{owner}` cannot register `{name}` outside its own prefix")]
    ForeignPrefix { owner: String, name: String },
    #[error("`{0}` is not a qualified name of the form plugin.item")]
    InvalidName(String),
    #[error("no value named `{0}`")]
    NotFound(String),
    #[error("type mismatch: stored {stored}, expected {expected}")]
    TypeMismatch { stored: TypeWitness, expected: TypeWitness },
}

/// A registered value.
#[derive(Clone)]
pub struct RegisteredValue {
    pub name: String,
    pub witness: TypeWitness,
    pub value: Rc<dyn Any>,
}

impl fmt::Debug for RegisteredValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.name, self.witness)
    }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some('a'..='z')) && c.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

/// Validates `plugin.item` and returns the plugin part.
fn prefix_of(name: &str) -> Option<&str> {
    let (p, item) = name.split_once('.')?;
    let item_ok = item.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && item.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    (is_ident(p) && item_ok).then_some(p)
}

#[derive(Debug, Default)]
pub struct Registry {
    values: BTreeMap<String, RegisteredValue>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// Stores `value` under `name`, which must start with `owner.`.
    pub fn register(
        &mut self,
        owner: &str,
        name: &str,
        witness: TypeWitness,
        value: Rc<dyn Any>,
    ) -> Result<(), RegistryError> {
        let prefix = prefix_of(name).ok_or_else(|| RegistryError::InvalidName(name.into()))?;
        if prefix != owner {
            return Err(RegistryError::ForeignPrefix {
                owner: owner.into(),
                name: name.into(),
            });
        }
        if self.values.contains_key(name) {
            return Err(RegistryError::DuplicateValue(name.into()));
        }
        self.values.insert(
            name.into(),
            RegisteredValue {
                name: name.into(),
                witness,
                value,
            },
        );
        Ok(())
    }

    /// Returns the payload iff `expected` equals the stored witness.
    pub fn get(&self, name: &str, expected: &TypeWitness) -> Result<Rc<dyn Any>, RegistryError> {
        let v = self.values.get(name).ok_or_else(|| RegistryError::NotFound(name.into()))?;
        if &v.witness != expected {
            return Err(RegistryError::TypeMismatch {
                stored: v.witness.clone(),
                expected: expected.clone(),
            });
        }
        Ok(Rc::clone(&v.value))
    }

    pub fn register_typed<T: Witnessed>(&mut self, owner: &str, name: &str, value: T) -> Result<(), RegistryError> {
        self.register(owner, name, T::witness(), Rc::new(value))
    }

    /// Typed lookup. A payload whose Rust type disagrees with a matching
    /// witness is reported as a mismatch as well.
    pub fn get_typed<T: Witnessed>(&self, name: &str) -> Result<T, RegistryError> {
        let expected = T::witness();
        let any = self.get(name, &expected)?;
        any.downcast_ref::<T>().cloned().ok_or_else(|| RegistryError::TypeMismatch {
            stored: expected.clone(),
            expected,
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn entry(&self, name: &str) -> Option<&RegisteredValue> {
        self.values.get(name)
    }
}
