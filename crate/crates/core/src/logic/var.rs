use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A propositional variable. Cheap to clone; ordered by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    /// Any well-formed name, including the reserved `_`-prefixed ones that
    /// gadgets generate.
    pub fn new(name: &str) -> Result<Var> {
        if is_identifier(name) && name != "true" && name != "false" {
            Ok(Var(Arc::from(name)))
        } else {
            Err(Error::InvalidName(name.to_string()))
        }
    }

    /// A name as written by a user: reserved names are rejected.
    pub fn user(name: &str) -> Result<Var> {
        let v = Var::new(name)?;
        if v.is_reserved() {
            return Err(Error::ReservedName(name.to_string()));
        }
        Ok(v)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('_')
    }

    /// `name` with `suffix` appended (e.g. `x` -> `x+`).
    pub(crate) fn suffixed(&self, suffix: &str) -> Var {
        Var(Arc::from(format!("{}{}", self.0, suffix)))
    }

    /// Reserved gadget variable `_<tag><k>`.
    pub(crate) fn gadget(tag: char, k: usize) -> Var {
        Var(Arc::from(format!("_{tag}{k}")))
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '+' | '^' | '-')
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => chars.all(is_ident_continue),
        _ => false,
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Borrow<str> for Var {
    fn borrow(&self) -> &str {
        &self.0
    }
}
