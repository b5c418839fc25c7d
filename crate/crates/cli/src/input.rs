//! Target ingestion: a positional string, a line-oriented text file, or a
//! FASTA file.  Every record is validated independently.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use templated_assembly::TargetString;

/// One target with the identifier used in reports.
pub struct Ingested {
    pub id: String,
    pub target: TargetString,
}

pub fn load(
    target: Option<&str>,
    file: Option<&Path>,
    fasta: Option<&Path>,
) -> Result<Vec<Ingested>> {
    let entries = match (target, file, fasta) {
        (Some(s), None, None) => vec![(s.to_string(), s.to_string())],
        (None, Some(path), None) => from_lines(path)?,
        (None, None, Some(path)) => from_fasta(path)?,
        (None, None, None) => bail!("no input: pass a target string, --file, or --fasta"),
        _ => unreachable!("inputs are mutually exclusive"),
    };
    if entries.is_empty() {
        bail!("input contains no targets");
    }
    entries
        .into_iter()
        .map(|(id, text)| {
            let target =
                TargetString::new(&text).with_context(|| format!("{id}: invalid target"))?;
            Ok(Ingested { id, target })
        })
        .collect()
}

/// One target per line; blank lines and `#` comment lines are skipped.
fn from_lines(path: &Path) -> Result<Vec<(String, String)>> {
    let name = path.display();
    let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push((format!("{name}:{}", i + 1), line.to_string()));
    }
    Ok(out)
}

/// Minimal FASTA: `>` starts a record, its first word is the identifier,
/// and the sequence is the concatenation of the following lines.
fn from_fasta(path: &Path) -> Result<Vec<(String, String)>> {
    let name = path.display();
    let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                bail!("{name}:{}: FASTA record without an identifier", i + 1);
            }
            out.push((id, String::new()));
        } else {
            match out.last_mut() {
                Some((_, seq)) => seq.push_str(line),
                None => bail!("{name}:{}: sequence data before the first `>` header", i + 1),
            }
        }
    }
    Ok(out)
}
