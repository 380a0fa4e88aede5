//! Shared helpers for the small line-oriented text formats used by the
//! persistence layer: tagged float-matrix files and `word<TAB>label` lists.

use std::io::{BufRead, Write};

/// Error raised by the text helpers; callers map it into their own error type.
#[derive(Debug)]
pub(crate) struct TextError {
    pub line: usize,
    pub message: String,
}

impl TextError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// A float matrix read back from a tagged container file.
#[derive(Debug)]
pub(crate) struct TaggedMatrix {
    pub dim: usize,
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

/// Writes a tagged matrix container: a header `<tag> v1 <dim>`, optional
/// `# key value` metadata lines, then one line of `dim` floats per row.
pub(crate) fn write_tagged_matrix<W: Write>(
    mut w: W,
    tag: &str,
    dim: usize,
    metadata: &[(&str, String)],
    rows: &[&[f64]],
) -> std::io::Result<()> {
    writeln!(w, "{tag} v1 {dim}")?;
    for (key, value) in metadata {
        writeln!(w, "# {key} {value}")?;
    }
    for row in rows {
        debug_assert_eq!(row.len(), dim);
        let mut first = true;
        for value in row.iter() {
            if first {
                write!(w, "{value}")?;
                first = false;
            } else {
                write!(w, " {value}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub(crate) fn read_tagged_matrix<R: BufRead>(
    r: R,
    expected_tag: &str,
) -> Result<TaggedMatrix, TextError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| TextError::new(1, "empty file"))?;
    let header = header.map_err(|e| TextError::new(1, e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[1] != "v1" {
        return Err(TextError::new(
            1,
            format!("expected header `{expected_tag} v1 <dim>`, got `{header}`"),
        ));
    }
    if fields[0] != expected_tag {
        return Err(TextError::new(
            1,
            format!("expected tag `{expected_tag}`, got `{}`", fields[0]),
        ));
    }
    let dim: usize = fields[2]
        .parse()
        .map_err(|_| TextError::new(1, format!("bad dimension `{}`", fields[2])))?;
    if dim == 0 {
        return Err(TextError::new(1, "dimension must be positive"));
    }

    let mut metadata = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| TextError::new(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut parts = rest.trim().splitn(2, ' ');
            if let Some(key) = parts.next() {
                metadata.push((key.to_string(), parts.next().unwrap_or("").to_string()));
            }
            continue;
        }
        let row = parse_float_row(trimmed, dim, lineno)?;
        rows.push(row);
    }
    Ok(TaggedMatrix {
        dim,
        metadata,
        rows,
    })
}

fn parse_float_row(line: &str, dim: usize, lineno: usize) -> Result<Vec<f64>, TextError> {
    let mut row = Vec::with_capacity(dim);
    for field in line.split_whitespace() {
        let value: f64 = field
            .parse()
            .map_err(|_| TextError::new(lineno, format!("bad float `{field}`")))?;
        if !value.is_finite() {
            return Err(TextError::new(lineno, format!("non-finite value `{field}`")));
        }
        row.push(value);
    }
    if row.len() != dim {
        return Err(TextError::new(
            lineno,
            format!("expected {dim} values, got {}", row.len()),
        ));
    }
    Ok(row)
}

/// Parses `word<TAB>label` lines with labels `pos` / `neg`. Returns words in
/// file order paired with `true` for positive. Blank lines are skipped.
pub(crate) fn parse_labeled_words<R: BufRead>(r: R) -> Result<Vec<(String, bool)>, TextError> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| TextError::new(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split('\t');
        let word = parts.next().unwrap_or("").trim();
        let label = parts.next().unwrap_or("").trim();
        if word.is_empty() {
            return Err(TextError::new(lineno, "empty word"));
        }
        let positive = match label {
            "pos" => true,
            "neg" => false,
            other => {
                return Err(TextError::new(
                    lineno,
                    format!("label must be `pos` or `neg`, got `{other}`"),
                ))
            }
        };
        out.push((word.to_string(), positive));
    }
    Ok(out)
}
