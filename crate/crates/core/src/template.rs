//! `{name}` placeholder substitution for prompt templates.
//!
//! Braces that do not enclose a plain identifier (JSON examples, Lean
//! binders) are copied through untouched.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template placeholder {{{0}}} has no value")]
    MissingPlaceholder(String),
    #[error("value {0:?} is not used by the template")]
    UnusedValue(String),
}

fn placeholder_at(template: &str, open: usize) -> Option<&str> {
    let rest = &template[open + 1..];
    let close = rest.find('}')?;
    let name = &rest[..close];
    let ok = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_');
    ok.then_some(name)
}

/// Placeholder names in first-appearance order, without duplicates.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for (i, _) in template.match_indices('{') {
        if let Some(name) = placeholder_at(template, i) {
            if !out.contains(&name) {
                out.push(name);
            }
        }
    }
    out
}

/// Substitutes every placeholder. Values are inserted verbatim and never
/// re-scanned. Every placeholder needs a value and every value a placeholder.
pub fn render(template: &str, values: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let names = placeholders(template);
    if let Some(unused) = values.keys().find(|k| !names.contains(k)) {
        return Err(TemplateError::UnusedValue(unused.to_string()));
    }
    let mut out = String::with_capacity(template.len());
    let mut i = 0;
    while let Some(off) = template[i..].find('{') {
        let open = i + off;
        out.push_str(&template[i..open]);
        match placeholder_at(template, open) {
            Some(name) => {
                let v = values
                    .get(name)
                    .ok_or_else(|| TemplateError::MissingPlaceholder(name.to_string()))?;
                out.push_str(v);
                i = open + name.len() + 2;
            }
            None => {
                out.push('{');
                i = open + 1;
            }
        }
    }
    out.push_str(&template[i..]);
    Ok(out)
}
