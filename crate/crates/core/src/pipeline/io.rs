//! Text formats.
//!
//! Loops: a `loop <name> <n>` header followed by `n` rows of `n`
//! whitespace-separated entries in `1..=n`, element 1 neutral. Loops are
//! separated by blank lines; lines starting with `#` are comments, except
//! that `#@ provenance <text>` attaches `<text>` to the next loop.
//!
//! Triples: one `d=<d> P=<bits> C=<bits> A=<bits>` per line.

use std::fs;
use std::path::Path;

use crate::codeloops::PolarTriple;
use crate::loopcore::validate_loop;

use super::db::{check_name, LoopDatabase, LoopEntry};
use super::{PipelineError, Result};

const PROVENANCE: &str = "#@ provenance ";

fn parse_err(line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::Parse { line, message: message.into() }
}

pub fn parse_loops(text: &str) -> Result<LoopDatabase> {
    let mut db = LoopDatabase::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut provenance: Option<String> = None;
    while let Some((no, line)) = lines.next() {
        let trimmed = line.trim();
        if let Some(p) = line.strip_prefix(PROVENANCE) {
            provenance = Some(p.to_string());
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let (name, n) = match fields.as_slice() {
            ["loop", name, n] => {
                let n: usize = n.parse().map_err(|_| parse_err(no, format!("bad order {n:?}")))?;
                (name.to_string(), n)
            }
            _ => return Err(parse_err(no, format!("expected `loop <name> <n>`, got {trimmed:?}"))),
        };
        check_name(&name).map_err(|_| parse_err(no, format!("bad loop name {name:?}")))?;
        if n == 0 {
            return Err(parse_err(no, "loop of order 0"));
        }
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let (rno, row) = lines.next().ok_or_else(|| parse_err(no, format!("loop {name}: missing row {}", r + 1)))?;
            let row: Vec<usize> = row
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(rno, format!("bad entry {t:?}"))))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let table = validate_loop(&rows).map_err(|source| PipelineError::InvalidTable { line: no, name: name.clone(), source })?;
        let entry = LoopEntry::new(name, table, provenance.take().unwrap_or_default())?;
        db.push(entry).map_err(|e| parse_err(no, e.to_string()))?;
    }
    Ok(db)
}

pub fn render_loops(db: &LoopDatabase) -> String {
    let mut out = String::new();
    for (i, e) in db.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if !e.provenance.is_empty() {
            out.push_str(PROVENANCE);
            out.push_str(&e.provenance);
            out.push('\n');
        }
        out.push_str(&format!("loop {} {}\n", e.name, e.table.order()));
        for row in e.table.rows_one_based() {
            let row: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

pub fn read_loops_file(path: impl AsRef<Path>) -> Result<LoopDatabase> {
    parse_loops(&read(path.as_ref())?)
}

pub fn write_loops_file(db: &LoopDatabase, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &render_loops(db))
}

pub fn parse_triples(text: &str) -> Result<Vec<PolarTriple>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| l.parse::<PolarTriple>().map_err(|e| parse_err(i + 1, e.to_string())))
        .collect()
}

pub fn render_triples(triples: &[PolarTriple]) -> String {
    triples.iter().map(|t| format!("{t}\n")).collect()
}

pub fn read_triples_file(path: impl AsRef<Path>) -> Result<Vec<PolarTriple>> {
    parse_triples(&read(path.as_ref())?)
}

pub fn write_triples_file(triples: &[PolarTriple], path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &render_triples(triples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopcore::LoopTable;

    #[test]
    fn round_trip() {
        let mut db = LoopDatabase::new();
        db.push(LoopEntry::new("C4", LoopTable::cyclic(4), "").unwrap()).unwrap();
        db.push(LoopEntry::new("E4", LoopTable::elementary_abelian(2, 2), "M2_1 cocycle 2").unwrap()).unwrap();
        let text = render_loops(&db);
        let back = parse_loops(&text).unwrap();
        assert_eq!(back, db);
        assert_eq!(render_loops(&back), text);
        assert!(text.contains("#@ provenance M2_1 cocycle 2\nloop E4 4\n1 2 3 4\n"));
    }

    #[test]
    fn empty_and_comments() {
        assert!(parse_loops("").unwrap().is_empty());
        let db = parse_loops("# header\n\nloop A 1\n1\n# trailing\n").unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(db.entries()[0].provenance, "");
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_loops("loop A 2\n1 2\n2 2\n").unwrap_err();
        assert!(matches!(err, PipelineError::InvalidTable { line: 1, .. }), "{err}");
        let err = parse_loops("\nloop A 2\n1 2\n").unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 2, .. }), "{err}");
        let err = parse_loops("lop A 2\n").unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 1, .. }));
        let err = parse_loops("loop A 2\n1 x\n2 1\n").unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 2, .. }));
        let err = parse_loops("loop A 1\n1\n\nloop A 1\n1\n").unwrap_err();
        assert!(matches!(err, PipelineError::Parse { line: 4, .. }));
    }

    #[test]
    fn triples_round_trip() {
        let ts: Vec<PolarTriple> = vec!["d=3 P=101 C=011 A=1".parse().unwrap(), PolarTriple::zero(4).unwrap()];
        assert_eq!(parse_triples(&render_triples(&ts)).unwrap(), ts);
        assert!(matches!(parse_triples("d=3 P=1\n"), Err(PipelineError::Parse { line: 1, .. })));
    }
}
