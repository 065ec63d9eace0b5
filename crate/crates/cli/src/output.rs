//! Diff-stable emission helpers.
//!
//! Every floating-point value is written with 17 significant digits so that
//! reruns with the same seed produce byte-identical artifacts and values
//! round-trip exactly through text.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Full round-trip form: one leading digit plus 16 decimals, e.g. `1.05e2`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Flat JSON object builder with a fixed key order.
///
/// Numbers go in as emitted by [`fmt_f64`], which is valid JSON number
/// syntax; strings here never need escaping beyond quotes and backslashes.
pub struct JsonObject {
    body: String,
}

impl JsonObject {
    pub fn new() -> Self {
        JsonObject { body: String::from("{") }
    }

    fn key(&mut self, key: &str) {
        if self.body.len() > 1 {
            self.body.push(',');
        }
        let _ = write!(self.body, "\"{key}\":");
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        self.key(key);
        self.body.push_str(&fmt_f64(x));
        self
    }

    pub fn int(mut self, key: &str, v: u64) -> Self {
        self.key(key);
        let _ = write!(self.body, "{v}");
        self
    }

    pub fn text(mut self, key: &str, s: &str) -> Self {
        self.key(key);
        self.body.push('"');
        for c in s.chars() {
            match c {
                '"' => self.body.push_str("\\\""),
                '\\' => self.body.push_str("\\\\"),
                _ => self.body.push(c),
            }
        }
        self.body.push('"');
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.key(key);
        self.body.push_str(if v { "true" } else { "false" });
        self
    }

    pub fn null(mut self, key: &str) -> Self {
        self.key(key);
        self.body.push_str("null");
        self
    }

    /// Pre-rendered JSON fragment (nested array or object).
    pub fn raw(mut self, key: &str, fragment: &str) -> Self {
        self.key(key);
        self.body.push_str(fragment);
        self
    }

    pub fn finish(mut self) -> String {
        self.body.push('}');
        self.body
    }
}
