//! `{{name}}` placeholder substitution shared by prompt and code templates.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template `{template}` uses unknown placeholder `{{{{{name}}}}}`")]
    UnknownPlaceholder { template: String, name: String },
    #[error("template `{template}` is missing placeholder `{{{{{name}}}}}`")]
    MissingPlaceholder { template: String, name: String },
}

/// Placeholder names in order of first appearance.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (_, name, _) in scan(template) {
        if seen.insert(name) {
            out.push(name);
        }
    }
    out
}

/// Rejects placeholders outside `allowed` and missing `required` ones.
pub fn check(label: &str, template: &str, allowed: &[&str], required: &[&str]) -> Result<(), TemplateError> {
    let used = placeholders(template);
    if let Some(name) = used.iter().find(|n| !allowed.contains(n)) {
        return Err(TemplateError::UnknownPlaceholder { template: label.to_string(), name: name.to_string() });
    }
    if let Some(name) = required.iter().find(|n| !used.contains(n)) {
        return Err(TemplateError::MissingPlaceholder { template: label.to_string(), name: name.to_string() });
    }
    Ok(())
}

/// Single-pass substitution: inserted values are never rescanned, so a
/// value may itself contain `{{...}}`.
pub fn render(label: &str, template: &str, vars: &[(&str, &str)]) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut last = 0;
    for (start, name, end) in scan(template) {
        let Some((_, value)) = vars.iter().find(|(k, _)| *k == name) else {
            return Err(TemplateError::UnknownPlaceholder { template: label.to_string(), name: name.to_string() });
        };
        out.push_str(&template[last..start]);
        out.push_str(value);
        last = end;
    }
    out.push_str(&template[last..]);
    Ok(out)
}

fn scan(template: &str) -> Vec<(usize, &str, usize)> {
    let mut found = Vec::new();
    let mut rest = 0;
    while let Some(open) = template[rest..].find("{{") {
        let start = rest + open;
        let Some(close) = template[start + 2..].find("}}") else {
            break;
        };
        let name = &template[start + 2..start + 2 + close];
        let end = start + 2 + close + 2;
        if !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
            found.push((start, name, end));
            rest = end;
        } else {
            rest = start + 2;
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_once() {
        let out = render("t", "a {{x}} b {{y}}", &[("x", "{{y}}"), ("y", "2")]).unwrap();
        assert_eq!(out, "a {{y}} b 2");
    }

    #[test]
    fn unknown_and_missing() {
        assert_eq!(
            check("t", "{{openapi}} {{colour}}", &["openapi"], &[]),
            Err(TemplateError::UnknownPlaceholder { template: "t".into(), name: "colour".into() })
        );
        assert_eq!(
            check("t", "nothing", &["tsl"], &["tsl"]),
            Err(TemplateError::MissingPlaceholder { template: "t".into(), name: "tsl".into() })
        );
        assert!(render("t", "{{nope}}", &[]).is_err());
    }

    #[test]
    fn non_names_are_text() {
        assert_eq!(placeholders("{{ x }} {{A}} {{}} {{ok}}"), vec!["ok"]);
        assert_eq!(render("t", "{{ x }}", &[]).unwrap(), "{{ x }}");
    }
}
