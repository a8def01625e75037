use std::collections::HashMap;

use crate::autiso::{AnalyzedLoop, Fingerprint};
use crate::loopcore::LoopTable;

use super::{PipelineError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopEntry {
    pub name: String,
    pub table: LoopTable,
    pub fingerprint: Fingerprint,
    pub provenance: String,
}

pub(crate) fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '#') {
        return Err(PipelineError::InvalidName(name.to_string()));
    }
    Ok(())
}

impl LoopEntry {
    pub fn new(name: impl Into<String>, table: LoopTable, provenance: impl Into<String>) -> Result<Self> {
        let name = name.into();
        check_name(&name)?;
        let provenance = provenance.into();
        if provenance.contains('\n') {
            return Err(PipelineError::Config("provenance must be a single line".into()));
        }
        let fingerprint = crate::autiso::fingerprint(&table);
        Ok(LoopEntry { name, table, fingerprint, provenance })
    }
}

/// An ordered list of named loops.
///
/// Databases produced by enumeration are pairwise nonisomorphic; databases
/// read from files are taken as given, see [`LoopDatabase::find_isomorphic_pair`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoopDatabase {
    entries: Vec<LoopEntry>,
}

impl LoopDatabase {
    pub fn new() -> Self {
        LoopDatabase::default()
    }

    pub fn from_entries(entries: Vec<LoopEntry>) -> Result<Self> {
        let mut db = LoopDatabase::new();
        for e in entries {
            db.push(e)?;
        }
        Ok(db)
    }

    /// Appends an entry; names must be unique.
    pub fn push(&mut self, entry: LoopEntry) -> Result<()> {
        if self.get(&entry.name).is_some() {
            return Err(PipelineError::Config(format!("duplicate loop name {}", entry.name)));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LoopEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<LoopEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&LoopEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LoopEntry> {
        self.entries.iter()
    }

    /// Keeps the entries satisfying `keep`, in order.
    pub fn filtered<F: FnMut(&LoopEntry) -> bool>(&self, mut keep: F) -> LoopDatabase {
        LoopDatabase { entries: self.entries.iter().filter(|e| keep(e)).cloned().collect() }
    }

    /// Two positions holding isomorphic loops, if any.
    pub fn find_isomorphic_pair(&self) -> Option<(usize, usize)> {
        let mut index = IsoIndex::new();
        for (i, e) in self.entries.iter().enumerate() {
            let (j, fresh) = index.insert(AnalyzedLoop::new(e.table.clone()));
            if !fresh {
                return Some((j, i));
            }
        }
        None
    }
}

impl<'a> IntoIterator for &'a LoopDatabase {
    type Item = &'a LoopEntry;
    type IntoIter = std::slice::Iter<'a, LoopEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Isomorphism classes: loops bucketed by fingerprint, membership confirmed
/// by an explicit isomorphism.
#[derive(Default)]
pub struct IsoIndex {
    buckets: HashMap<Fingerprint, Vec<usize>>,
    loops: Vec<AnalyzedLoop>,
}

impl IsoIndex {
    pub fn new() -> Self {
        IsoIndex::default()
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn find(&self, q: &AnalyzedLoop) -> Option<usize> {
        self.buckets
            .get(q.fingerprint())?
            .iter()
            .copied()
            .find(|&i| q.isomorphism_to(&self.loops[i]).is_some())
    }

    /// Index of the class of `q`, and whether it is new.
    pub fn insert(&mut self, q: AnalyzedLoop) -> (usize, bool) {
        if let Some(i) = self.find(&q) {
            return (i, false);
        }
        let i = self.loops.len();
        self.buckets.entry(q.fingerprint().clone()).or_default().push(i);
        self.loops.push(q);
        (i, true)
    }

    pub fn loops(&self) -> &[AnalyzedLoop] {
        &self.loops
    }

    pub fn into_loops(self) -> Vec<AnalyzedLoop> {
        self.loops
    }
}
