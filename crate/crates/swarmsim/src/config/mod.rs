//! Configuration surface: the line-based setup-file parser, random scenario
//! generation, and the command-line entry point.
//!
//! A setup file is a sequence of task invocations, one per line:
//!
//! ```text
//! # comments run to end of line, blank lines are ignored
//! set seed=42
//! rect_world count=100 width=10 height=10
//! simulation max_rounds=380
//! report timing=false
//! ```
//!
//! Values parse as integers (`/^-?[0-9]+$/`), reals (decimal or scientific
//! literals), booleans (`true`/`false`), and otherwise as strings.

mod cli;
mod scenario;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::world::TagValue;

pub use cli::cli_main;
pub use scenario::{density, generate_rect_world, ScenarioSpec};

/// One `taskname key=value ...` line.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskInvocation {
    pub name: String,
    pub params: BTreeMap<String, TagValue>,
    /// 1-based source line, for error reporting.
    pub line: u32,
}

/// A parsed setup file: task invocations in source order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigProgram {
    pub invocations: Vec<TaskInvocation>,
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {reason}")]
pub struct ConfigParseError {
    pub line: u32,
    pub reason: String,
}

fn error(line: u32, reason: impl Into<String>) -> ConfigParseError {
    ConfigParseError {
        line,
        reason: reason.into(),
    }
}

fn is_int_literal(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_real_literal(s: &str) -> bool {
    // Excludes words like "inf" and "nan" that f64::from_str would accept.
    s.bytes().any(|b| b.is_ascii_digit())
        && s.bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
}

/// Typing rules for configuration values: int, then real, then bool, else
/// string.
pub fn parse_value(raw: &str) -> TagValue {
    if is_int_literal(raw) {
        if let Ok(v) = raw.parse::<i64>() {
            return TagValue::Int(v);
        }
    }
    if is_real_literal(raw) {
        if let Ok(v) = raw.parse::<f64>() {
            return TagValue::Real(v);
        }
    }
    match raw {
        "true" => TagValue::Bool(true),
        "false" => TagValue::Bool(false),
        _ => TagValue::Str(raw.to_string()),
    }
}

/// Formats a value so that [`parse_value`] reads the same type back. Reals
/// always carry a decimal point or exponent.
pub fn format_value(value: &TagValue) -> String {
    match value {
        TagValue::Int(v) => v.to_string(),
        TagValue::Real(v) => {
            let s = v.to_string();
            if s.contains('.')
                || s.contains('e')
                || s.contains('E')
                || s.contains("inf")
                || s.contains("NaN")
            {
                s
            } else {
                format!("{s}.0")
            }
        }
        TagValue::Bool(v) => v.to_string(),
        TagValue::Str(v) => v.clone(),
    }
}

/// Parses a setup file.
pub fn parse_config(text: &str) -> Result<ConfigProgram, ConfigParseError> {
    let mut invocations = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index as u32 + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = content.split_whitespace();
        let name = match tokens.next() {
            None => continue,
            Some(name) => name,
        };
        if name.contains('=') {
            return Err(error(line_no, "expected a task name before parameters"));
        }
        let mut params = BTreeMap::new();
        for token in tokens {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                error(
                    line_no,
                    format!("malformed parameter {token:?}, expected key=value"),
                )
            })?;
            if key.is_empty() {
                return Err(error(line_no, format!("empty key in {token:?}")));
            }
            if params.contains_key(key) {
                return Err(error(line_no, format!("duplicate key {key:?}")));
            }
            params.insert(key.to_string(), parse_value(value));
        }
        invocations.push(TaskInvocation {
            name: name.to_string(),
            params,
            line: line_no,
        });
    }
    Ok(ConfigProgram { invocations })
}

/// Pretty-prints a program; reparsing the output yields an equal program
/// (up to source line numbers).
pub fn format_program(program: &ConfigProgram) -> String {
    let mut out = String::new();
    for invocation in &program.invocations {
        out.push_str(&invocation.name);
        for (key, value) in &invocation.params {
            out.push(' ');
            out.push_str(key);
            out.push('=');
            out.push_str(&format_value(value));
        }
        out.push('\n');
    }
    out
}

/// Fixed-width decimal formatting with 6 significant digits, for the
/// metrics CSV.
pub fn format_sig6(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value:.5}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    format!("{value:.decimals$}")
}
