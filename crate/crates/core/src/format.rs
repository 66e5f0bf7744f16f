//! Shared helpers for the line-oriented instance formats.

use crate::error::Error;

/// Non-blank lines with their 1-based numbers; `#` comments stripped.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        (!line.trim().is_empty()).then_some((i + 1, line))
    })
}

/// Splits `key: rest` when the line starts with `key` followed by `:`.
/// Returns the rest and its 1-based starting column.
pub(crate) fn keyed<'a>(line: &'a str, key: &str) -> Option<(&'a str, usize)> {
    let rest = line.trim_start().strip_prefix(key)?.trim_start();
    let rest = rest.strip_prefix(':')?;
    Some((rest, line.len() - rest.len() + 1))
}

pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}
