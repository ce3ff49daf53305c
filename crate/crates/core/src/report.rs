//! Plain-text run reports: a schema line followed by `key = value` lines in
//! insertion order. Keys may repeat.

use std::fmt::Display;

use crate::error::{Error, Result};

pub const SCHEMA: &str = "dgkit-report/1";

/// Key under which the wall time is recorded; left out of deterministic
/// reports.
pub const WALL_TIME_KEY: &str = "wall_time_ms";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Report {
        assert!(is_key(key), "invalid report key `{key}`");
        let value = value.to_string().replace('\\', "\\\\").replace('\n', "\\n");
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// The first value stored under `key`, unescaped.
    pub fn get(&self, key: &str) -> Option<String> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| unescape(v))
    }

    pub fn get_all(&self, key: &str) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| unescape(v))
            .collect()
    }

    pub fn without_wall_time(mut self) -> Report {
        self.entries.retain(|(k, _)| k != WALL_TIME_KEY);
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("schema = {SCHEMA}\n");
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse(src: &str) -> Result<Report> {
        let mut lines = src.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l == format!("schema = {SCHEMA}") => {}
            _ => return Err(Error::parse(1, format!("missing `schema = {SCHEMA}`"))),
        }
        let mut entries = Vec::new();
        for (n, line) in lines {
            let (k, v) = line
                .split_once(" = ")
                .filter(|(k, _)| is_key(k))
                .ok_or_else(|| Error::parse(n + 1, "expected `key = value`"))?;
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Report { entries })
    }
}

fn is_key(k: &str) -> bool {
    !k.is_empty()
        && k
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '/'))
}

fn unescape(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    let mut chars = v.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}
