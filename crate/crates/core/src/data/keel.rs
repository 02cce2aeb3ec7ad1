use std::fmt::Write as _;
use std::path::Path;

use super::RawDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug)]
struct Attribute {
    name: String,
    numeric: bool,
}

/// Reads and parses a KEEL `.dat` file.
pub fn read_keel(path: impl AsRef<Path>) -> Result<RawDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keel(&text)
}

fn keyword(line: &str) -> Option<(String, &str)> {
    let rest = line.strip_prefix('@')?;
    let end = rest
        .find(|c: char| c.is_whitespace())
        .unwrap_or(rest.len());
    Some((rest[..end].to_ascii_lowercase(), rest[end..].trim()))
}

fn parse_attribute(spec: &str, line: usize) -> Result<Attribute> {
    let end = spec
        .find(|c: char| c.is_whitespace() || c == '{' || c == '[')
        .unwrap_or(spec.len());
    let name = spec[..end].trim();
    if name.is_empty() {
        return Err(Error::parse(line, "attribute without a name"));
    }
    let kind = spec[end..].trim();
    let numeric = {
        let lower = kind.to_ascii_lowercase();
        lower.starts_with("real") || lower.starts_with("integer") || lower.starts_with("numeric")
    };
    if !numeric && !kind.starts_with('{') {
        return Err(Error::parse(
            line,
            format!("attribute {name}: unsupported type {kind:?}"),
        ));
    }
    Ok(Attribute {
        name: name.to_string(),
        numeric,
    })
}

fn check_declared(names: &str, attributes: &[Attribute], line: usize) -> Result<()> {
    for n in names.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        if !attributes.iter().any(|a| a.name == n) {
            return Err(Error::parse(line, format!("undeclared attribute {n:?}")));
        }
    }
    Ok(())
}

/// Parses KEEL `.dat` text. The class is the last declared attribute and every
/// other attribute must be numeric. Keywords are case-insensitive; `%` lines
/// are comments.
pub fn parse_keel(content: &str) -> Result<RawDataset> {
    let mut relation = None;
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut lines = content.lines().enumerate();
    let mut saw_data = false;

    for (idx, line) in lines.by_ref() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let Some((kw, rest)) = keyword(line) else {
            return Err(Error::parse(
                lineno,
                format!("expected a header keyword, found {line:?}"),
            ));
        };
        match kw.as_str() {
            "relation" => {
                if rest.is_empty() {
                    return Err(Error::parse(lineno, "@relation without a name"));
                }
                relation = Some(rest.to_string());
            }
            "attribute" => attributes.push(parse_attribute(rest, lineno)?),
            "inputs" | "outputs" | "input" | "output" => {
                check_declared(rest, &attributes, lineno)?
            }
            "data" => {
                saw_data = true;
                break;
            }
            other => {
                return Err(Error::parse(lineno, format!("unknown keyword @{other}")));
            }
        }
    }

    let name = relation.ok_or_else(|| Error::parse(1, "missing @relation"))?;
    if !saw_data {
        return Err(Error::parse(content.lines().count().max(1), "missing @data"));
    }
    if attributes.len() < 2 {
        return Err(Error::parse(
            1,
            "need at least one feature attribute and a class attribute",
        ));
    }
    let n_features = attributes.len() - 1;
    if let Some(bad) = attributes[..n_features].iter().find(|a| !a.numeric) {
        return Err(Error::parse(
            1,
            format!("feature attribute {} is not numeric", bad.name),
        ));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != attributes.len() {
            return Err(Error::parse(
                lineno,
                format!(
                    "row has {} values, header declares {}",
                    tokens.len(),
                    attributes.len()
                ),
            ));
        }
        for (tok, attr) in tokens[..n_features].iter().zip(&attributes) {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(
                    lineno,
                    format!("attribute {}: {tok:?} is not a number", attr.name),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    lineno,
                    format!("attribute {}: non-finite value {tok:?}", attr.name),
                ));
            }
            values.push(v);
        }
        let class = tokens[n_features];
        if class.is_empty() || class == "?" || class.eq_ignore_ascii_case("<null>") {
            return Err(Error::parse(lineno, "missing class value"));
        }
        labels.push(class.to_string());
    }

    let features = Matrix::from_vec(labels.len(), n_features, values)?;
    Ok(RawDataset {
        name,
        feature_names: attributes[..n_features]
            .iter()
            .map(|a| a.name.clone())
            .collect(),
        features,
        labels,
    })
}

/// Serializes a dataset back to KEEL text; `parse_keel` recovers identical values.
pub fn to_keel_string(raw: &RawDataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", raw.name);
    for name in &raw.feature_names {
        let _ = writeln!(out, "@attribute {name} real");
    }
    let classes: Vec<&str> = raw.class_counts().into_keys().collect();
    let _ = writeln!(out, "@attribute Class {{{}}}", classes.join(", "));
    let _ = writeln!(out, "@inputs {}", raw.feature_names.join(", "));
    let _ = writeln!(out, "@outputs Class");
    let _ = writeln!(out, "@data");
    for (row, label) in raw.features.iter_rows().zip(&raw.labels) {
        for v in row {
            // Display for f64 is the shortest string that round-trips
            let _ = write!(out, "{v}, ");
        }
        let _ = writeln!(out, "{label}");
    }
    out
}
