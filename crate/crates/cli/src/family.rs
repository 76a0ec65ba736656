//! Coefficient family files.
//!
//! One `k j value` triple per line; `#` starts a comment. Weights and
//! indices without a line are zero, so an empty file is the zero family.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use arczero::arith::m_of;
use arczero::forms::CoefficientFamily;

use crate::error::{CliError, CliResult};

pub fn load_family(path: &Path) -> CliResult<CoefficientFamily> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "family".to_string());
    parse_family(&text, &label, path)
}

pub fn parse_family(text: &str, label: &str, path: &Path) -> CliResult<CoefficientFamily> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut seen: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut entries: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [k, j, v] = fields[..] else {
            return Err(err(lineno, format!("expected `k j value`, got {} fields", fields.len())));
        };
        let k: u32 = k.parse().map_err(|_| err(lineno, format!("weight `{k}` is not an integer")))?;
        let j: u32 = j.parse().map_err(|_| err(lineno, format!("index `{j}` is not an integer")))?;
        let v: f64 = v.parse().map_err(|_| err(lineno, format!("value `{v}` is not a number")))?;
        if k % 2 == 1 || k < 12 {
            return Err(err(lineno, format!("weight {k} must be even and at least 12")));
        }
        if !v.is_finite() {
            return Err(err(lineno, format!("value {v} is not finite")));
        }
        let m = m_of(k).map_err(|e| err(lineno, e.to_string()))?;
        if j == 0 || j > m {
            return Err(err(
                lineno,
                format!("length mismatch: weight {k} takes indices 1..={m}, got {j}"),
            ));
        }
        if let Some(prev) = seen.insert((k, j), lineno) {
            return Err(err(lineno, format!("duplicate entry for k = {k}, j = {j} (first on line {prev})")));
        }
        entries.entry(k).or_insert_with(|| vec![0.0; m as usize])[j as usize - 1] = v;
    }
    let family = CoefficientFamily::new(label, entries)
        .map_err(|e| err(0, e.to_string()))?
        .with_implicit_zero(true);
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<CoefficientFamily> {
        parse_family(text, "t", Path::new("t.txt"))
    }

    #[test]
    fn single_entry() {
        let f = parse("# header\n24 1 0.001  # a_1\n").unwrap();
        assert_eq!(f.entries.len(), 1);
        assert_eq!(f.entries[&24], vec![0.001, 0.0]);
        assert_eq!(f.coefficients(36).unwrap().len(), 3);
    }

    #[test]
    fn empty_is_zero_family() {
        let f = parse("\n# nothing\n").unwrap();
        assert!(f.entries.is_empty());
        assert!(f.is_zero_at(120));
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in [
            "24 3 0.1",
            "24 1",
            "24 1 0.1 4",
            "25 1 0.1",
            "10 1 0.1",
            "24 0 0.1",
            "24 1 nan",
            "24 1 inf",
            "24 1 x",
            "24 1 0.1\n24 1 0.2",
            "14 1 0.1",
        ] {
            assert!(matches!(parse(bad), Err(CliError::Parse { .. })), "{bad}");
        }
        match parse("\n\n24 1 1\n24 3 1") {
            Err(CliError::Parse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("length mismatch"));
            }
            other => panic!("{other:?}"),
        }
    }
}
