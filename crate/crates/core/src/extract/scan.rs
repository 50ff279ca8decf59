//! Line-oriented import scanners for Python, Java and Ruby.

use serde::Serialize;

use crate::model::Language;

/// One imported module path in dotted form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Import {
    pub path: String,
    /// Relative imports (`from . import x`, `require_relative`) are internal
    /// regardless of the project module index.
    pub internal: bool,
}

impl Import {
    fn external(path: String) -> Self {
        Import {
            path,
            internal: false,
        }
    }
}

/// Every imported module path in `source`, in source order, duplicates kept.
pub fn extract_imports(source: &str, language: Language) -> Vec<Import> {
    match language {
        Language::Python => scan_python(source),
        Language::Java => scan_java(source),
        Language::Ruby => scan_ruby(source),
        Language::Other => Vec::new(),
    }
}

/// Like [`extract_imports`] over raw bytes; undecodable input yields `Err`
/// with a description instead of imports.
pub fn extract_imports_bytes(bytes: &[u8], language: Language) -> Result<Vec<Import>, String> {
    match std::str::from_utf8(bytes) {
        Ok(text) => Ok(extract_imports(text, language)),
        Err(e) => Err(format!("not valid UTF-8 ({e})")),
    }
}

/// Dotted paths only, for callers that do not need the internal marker.
pub fn import_paths(source: &str, language: Language) -> Vec<String> {
    extract_imports(source, language)
        .into_iter()
        .map(|i| i.path)
        .collect()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn is_dotted(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(is_identifier)
}

fn strip_keyword<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(keyword)?;
    match rest.chars().next() {
        Some(c) if c.is_whitespace() || c == '(' => Some(rest.trim_start()),
        _ => None,
    }
}

fn strip_alias(item: &str) -> &str {
    item.split_whitespace().next().unwrap_or("")
}

fn scan_python(source: &str) -> Vec<Import> {
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    let mut depth = 0i32;

    for raw in source.lines() {
        let line = raw.split('#').next().unwrap_or("");
        let logical = match pending.take() {
            Some(mut acc) => {
                acc.push(' ');
                acc.push_str(line.trim());
                acc
            }
            None => {
                let t = line.trim();
                if strip_keyword(t, "import").is_none() && strip_keyword(t, "from").is_none() {
                    continue;
                }
                depth = 0;
                t.to_string()
            }
        };
        depth += line.matches('(').count() as i32 - line.matches(')').count() as i32;
        if let Some(stripped) = logical.strip_suffix('\\') {
            pending = Some(stripped.trim_end().to_string());
            continue;
        }
        if depth > 0 {
            pending = Some(logical);
            continue;
        }
        for stmt in logical.split(';') {
            python_statement(stmt.trim(), &mut out);
        }
    }
    if let Some(rest) = pending {
        for stmt in rest.split(';') {
            python_statement(stmt.trim(), &mut out);
        }
    }
    out
}

fn python_statement(stmt: &str, out: &mut Vec<Import>) {
    if let Some(rest) = strip_keyword(stmt, "import") {
        for item in rest.split(',') {
            let name = strip_alias(item.trim());
            if is_dotted(name) {
                out.push(Import::external(name.to_string()));
            }
        }
    } else if let Some(rest) = strip_keyword(stmt, "from") {
        let Some((module, names)) = rest.split_once(" import") else {
            return;
        };
        let module = module.trim();
        let relative = module.starts_with('.');
        let module = module.trim_start_matches('.');
        if !(module.is_empty() && relative) && !is_dotted(module) {
            return;
        }
        let push = |out: &mut Vec<Import>, path: String| {
            out.push(Import {
                path,
                internal: relative,
            })
        };
        if !module.is_empty() {
            push(out, module.to_string());
        }
        let names = names.trim().trim_start_matches('(').trim_end_matches(')');
        for item in names.split(',') {
            let name = strip_alias(item.trim());
            if name == "*" || !is_identifier(name) {
                continue;
            }
            let path = if module.is_empty() {
                name.to_string()
            } else {
                format!("{module}.{name}")
            };
            push(out, path);
        }
    }
}

fn scan_java(source: &str) -> Vec<Import> {
    let mut out = Vec::new();
    for raw in source.lines() {
        let line = raw.split("//").next().unwrap_or("");
        for stmt in line.split(';') {
            let Some(rest) = strip_keyword(stmt.trim(), "import") else {
                continue;
            };
            let (is_static, rest) = match strip_keyword(rest, "static") {
                Some(r) => (true, r),
                None => (false, rest),
            };
            let mut path: String = rest.chars().filter(|c| !c.is_whitespace()).collect();
            if let Some(p) = path.strip_suffix(".*") {
                path = p.to_string();
            } else if is_static {
                // static member import: keep the owning class
                match path.rsplit_once('.') {
                    Some((owner, _)) => path = owner.to_string(),
                    None => continue,
                }
            }
            if is_dotted(&path) {
                out.push(Import::external(path));
            }
        }
    }
    out
}

fn quoted_argument(rest: &str) -> Option<&str> {
    let rest = rest.trim_start_matches('(').trim_start();
    let quote = rest.chars().next().filter(|c| *c == '\'' || *c == '"')?;
    let body = &rest[1..];
    body.find(quote).map(|end| &body[..end])
}

fn ruby_module_path(target: &str) -> Option<String> {
    let target = target.strip_suffix(".rb").unwrap_or(target);
    let segments: Vec<&str> = target
        .split('/')
        .filter(|s| !s.is_empty() && *s != "." && *s != "..")
        .collect();
    if segments.is_empty() || segments.iter().any(|s| s.contains('.')) {
        return None;
    }
    Some(segments.join("."))
}

fn scan_ruby(source: &str) -> Vec<Import> {
    let mut out = Vec::new();
    for raw in source.lines() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        let (rest, internal) = if let Some(r) = strip_keyword(line, "require_relative") {
            (r, true)
        } else if let Some(r) = strip_keyword(line, "require") {
            (r, false)
        } else {
            continue;
        };
        if let Some(path) = quoted_argument(rest).and_then(ruby_module_path) {
            out.push(Import { path, internal });
        }
    }
    out
}
