//! Bottom-up enumeration: every Moufang loop of order `p^{k+1}` is a central
//! extension of one of order `p^k` by GF(p).

use rayon::prelude::*;

use crate::autiso::{automorphism_group, representative_cocycles, AnalyzedLoop};
use crate::cocycles::build_spaces;
use crate::codeloops::{self, MAX_SWEEP_DIM};
use crate::extend::{central_extension, is_prunable_base, ExtensionSpec};
use crate::gfla;
use crate::loopcore::LoopTable;

use super::db::{IsoIndex, LoopDatabase, LoopEntry};
use super::{PipelineError, Result};

/// Largest complement, in elements, enumerated directly.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    AllLoops,
    NonassociativeOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub prime: u8,
    pub mode: Mode,
    /// Worker threads; 0 uses the default pool.
    pub jobs: usize,
    pub budget: u128,
}

impl RunConfig {
    pub fn new(prime: u8, mode: Mode) -> Result<Self> {
        let cfg = RunConfig { prime, mode, jobs: 0, budget: DEFAULT_BUDGET };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        gfla::check_prime(self.prime).map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.budget == 0 {
            return Err(PipelineError::Config("budget must be at least 1".into()));
        }
        Ok(())
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        if self.jobs == 0 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(pool.install(f))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceDims {
    pub mcoc: usize,
    pub cob: usize,
    pub comp: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    /// Generated by at most two elements: only groups arise.
    Pruned,
    Cocycles,
    CodeLoops,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseReport {
    pub name: String,
    pub route: Route,
    pub dims: Option<SpaceDims>,
    /// Extensions built: `|X|`, or the number of triples on the code-loop route.
    pub candidates: usize,
    /// Pairwise nonisomorphic extensions kept from this base.
    pub kept: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub bases: Vec<BaseReport>,
    /// Sum over bases of the kept extensions.
    pub hits: usize,
    pub unique: usize,
    /// Largest number of bases producing the same loop.
    pub max_multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub database: LoopDatabase,
    pub stats: EnumerationStats,
}

struct BaseResult {
    report: BaseReport,
    loops: Vec<(AnalyzedLoop, String)>,
}

fn prime_power_exponent(n: usize, p: usize) -> Option<u32> {
    let (mut m, mut e) = (n, 0);
    while m > 1 && m % p == 0 {
        m /= p;
        e += 1;
    }
    (m == 1).then_some(e)
}

fn extend_base(entry: &LoopEntry, cfg: &RunConfig) -> Result<BaseResult> {
    let k = &entry.table;
    let p = cfg.prime;
    let name = entry.name.clone();
    if cfg.mode == Mode::NonassociativeOnly && is_prunable_base(k) {
        let report = BaseReport { name, route: Route::Pruned, dims: None, candidates: 0, kept: 0 };
        return Ok(BaseResult { report, loops: Vec::new() });
    }
    let spaces = build_spaces(k, p)?;
    let dims = SpaceDims { mcoc: spaces.mcoc.dim(), cob: spaces.cob.dim(), comp: spaces.comp.dim() };
    let size = (p as u128).checked_pow(dims.comp as u32).unwrap_or(u128::MAX);

    let (route, candidates): (Route, Vec<(LoopTable, String)>) = if size <= cfg.budget {
        let aut = automorphism_group(k);
        let reps = representative_cocycles(k, &spaces, &aut, cfg.budget)?;
        let built = reps
            .into_par_iter()
            .enumerate()
            .map(|(i, f)| {
                let q = central_extension(&ExtensionSpec::new(k.clone(), p, f)?)?;
                Ok((q, format!("{name} cocycle {}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        (Route::Cocycles, built)
    } else {
        let d = prime_power_exponent(k.order(), 2);
        match d {
            Some(d) if p == 2 && d as usize <= MAX_SWEEP_DIM && k.is_elementary_abelian(2) => {
                let triples = match cfg.mode {
                    Mode::NonassociativeOnly => codeloops::triple_orbit_representatives(d as usize)?,
                    Mode::AllLoops => codeloops::all_triple_orbit_representatives(d as usize)?,
                };
                let built = triples
                    .into_par_iter()
                    .map(|t| Ok((codeloops::realize_code_loop(&t)?, format!("{name} triple {t}"))))
                    .collect::<Result<Vec<_>>>()?;
                (Route::CodeLoops, built)
            }
            _ => return Err(PipelineError::BudgetExceeded { base: name, size, budget: cfg.budget }),
        }
    };

    let count = candidates.len();
    let analyzed = candidates
        .into_par_iter()
        .enumerate()
        .map(|(i, (q, prov))| {
            if !q.is_moufang() {
                return Err(PipelineError::NotMoufang { base: name.clone(), index: i + 1 });
            }
            if cfg.mode == Mode::NonassociativeOnly && q.is_associative() {
                return Ok(None);
            }
            Ok(Some((AnalyzedLoop::new(q), prov)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut index = IsoIndex::new();
    let mut provenance = Vec::new();
    for (q, prov) in analyzed.into_iter().flatten() {
        if index.insert(q).1 {
            provenance.push(prov);
        }
    }
    let loops: Vec<(AnalyzedLoop, String)> = index.into_loops().into_iter().zip(provenance).collect();
    let report = BaseReport { name, route, dims: Some(dims), candidates: count, kept: loops.len() };
    Ok(BaseResult { report, loops })
}

/// All central extensions by GF(p) of the given bases, up to isomorphism.
///
/// In nonassociative-only mode, bases generated by two elements are skipped
/// and groups are discarded. The result is sorted by fingerprint, ties
/// broken by discovery order (bases in input order, extensions in
/// representative order), and named `M<order>_<i>`.
pub fn enumerate_order(bases: &LoopDatabase, cfg: &RunConfig) -> Result<Enumeration> {
    cfg.validate()?;
    let p = cfg.prime as usize;
    let orders: Vec<usize> = bases.iter().map(|e| e.table.order()).collect();
    if let Some(&n) = orders.first() {
        if orders.iter().any(|&m| m != n) {
            return Err(PipelineError::Config("bases have different orders".into()));
        }
        if prime_power_exponent(n, p).is_none() {
            return Err(PipelineError::Config(format!("order {n} is not a power of {p}")));
        }
        if n * p > crate::loopcore::MAX_ORDER {
            return Err(PipelineError::Config(format!("extensions of order {} are too large", n * p)));
        }
    }
    let results = cfg.run(|| bases.entries().par_iter().map(|e| extend_base(e, cfg)).collect::<Result<Vec<_>>>())??;

    let mut index = IsoIndex::new();
    let mut found: Vec<(String, usize)> = Vec::new();
    let mut multiplicity: Vec<usize> = Vec::new();
    let mut stats = EnumerationStats::default();
    for r in results {
        stats.hits += r.loops.len();
        for (q, prov) in r.loops {
            let (i, fresh) = index.insert(q);
            if fresh {
                found.push((prov, found.len()));
                multiplicity.push(1);
            } else {
                multiplicity[i] += 1;
            }
        }
        stats.bases.push(r.report);
    }
    stats.unique = index.len();
    stats.max_multiplicity = multiplicity.iter().copied().max().unwrap_or(0);

    let mut loops: Vec<(AnalyzedLoop, String, usize)> =
        index.into_loops().into_iter().zip(found).map(|(q, (prov, i))| (q, prov, i)).collect();
    loops.sort_by(|a, b| a.0.fingerprint().cmp(b.0.fingerprint()).then(a.2.cmp(&b.2)));
    let order = orders.first().map_or(p, |n| n * p);
    let mut database = LoopDatabase::new();
    for (i, (q, prov, _)) in loops.into_iter().enumerate() {
        let fingerprint = q.fingerprint().clone();
        let entry = LoopEntry { name: format!("M{order}_{}", i + 1), table: q.into_table(), fingerprint, provenance: prov };
        database.push(entry)?;
    }
    Ok(Enumeration { database, stats })
}

/// All Moufang loops of orders `p, p², …, p^upto`, each obtained from the
/// previous order in all-loops mode, starting from the trivial loop.
pub fn bootstrap(cfg: &RunConfig, upto: u32) -> Result<Vec<Enumeration>> {
    let cfg = RunConfig { mode: Mode::AllLoops, ..cfg.clone() };
    cfg.validate()?;
    let mut bases = LoopDatabase::new();
    bases.push(LoopEntry::new("M1_1", LoopTable::trivial(), "")?)?;
    let mut out = Vec::new();
    for _ in 0..upto {
        let e = enumerate_order(&bases, &cfg)?;
        bases = e.database.clone();
        out.push(e);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimsRow {
    pub name: String,
    pub dims: SpaceDims,
    /// `|X|`; `None` when the complement exceeds the budget.
    pub x_size: Option<usize>,
}

/// Cocycle space dimensions of every base and, within the budget, the number
/// of representative cocycles.
pub fn dims_report(bases: &LoopDatabase, p: u8, budget: u128) -> Result<Vec<DimsRow>> {
    gfla::check_prime(p).map_err(|e| PipelineError::Config(e.to_string()))?;
    bases
        .entries()
        .par_iter()
        .map(|e| {
            let k = &e.table;
            let s = build_spaces(k, p)?;
            let dims = SpaceDims { mcoc: s.mcoc.dim(), cob: s.cob.dim(), comp: s.comp.dim() };
            let size = (p as u128).checked_pow(dims.comp as u32).unwrap_or(u128::MAX);
            let x_size = if size <= budget {
                let aut = automorphism_group(k);
                Some(representative_cocycles(k, &s, &aut, budget)?.len())
            } else {
                None
            };
            Ok(DimsRow { name: e.name.clone(), dims, x_size })
        })
        .collect()
}

pub fn dims_tsv(rows: &[DimsRow]) -> String {
    let mut out = String::from("name\tdim_mcoc\tdim_cob\tdim_comp\tx_size\n");
    for r in rows {
        let x = r.x_size.map_or_else(|| "-".to_string(), |x| x.to_string());
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", r.name, r.dims.mcoc, r.dims.cob, r.dims.comp, x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(loops: Vec<(&str, LoopTable)>) -> LoopDatabase {
        LoopDatabase::from_entries(loops.into_iter().map(|(n, t)| LoopEntry::new(n, t, "").unwrap()).collect()).unwrap()
    }

    #[test]
    fn small_orders() {
        let cfg = RunConfig::new(2, Mode::AllLoops).unwrap();
        let counts: Vec<usize> = bootstrap(&cfg, 3).unwrap().iter().map(|e| e.database.len()).collect();
        assert_eq!(counts, vec![1, 2, 5]);
        let cfg3 = RunConfig::new(3, Mode::AllLoops).unwrap();
        let counts: Vec<usize> = bootstrap(&cfg3, 2).unwrap().iter().map(|e| e.database.len()).collect();
        assert_eq!(counts, vec![1, 2]);
    }

    #[test]
    fn names_and_provenance() {
        let cfg = RunConfig::new(2, Mode::AllLoops).unwrap();
        let e = enumerate_order(&db(vec![("C2", LoopTable::cyclic(2))]), &cfg).unwrap();
        let names: Vec<&str> = e.database.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, vec!["M4_1", "M4_2"]);
        assert!(e.database.iter().all(|e| e.provenance.starts_with("C2 cocycle ")));
        assert_eq!(e.stats.hits, 2);
        assert_eq!(e.stats.max_multiplicity, 1);
    }

    #[test]
    fn pruning_and_budget() {
        let cfg = RunConfig::new(2, Mode::NonassociativeOnly).unwrap();
        let e = enumerate_order(&db(vec![("C8", LoopTable::cyclic(8))]), &cfg).unwrap();
        assert!(e.database.is_empty());
        assert_eq!(e.stats.bases[0].route, Route::Pruned);
        let tight = RunConfig::new(2, Mode::AllLoops).unwrap().with_budget(2);
        let d8 = crate::loopcore::tests::dihedral(4);
        let err = enumerate_order(&db(vec![("D8", d8)]), &tight).unwrap_err();
        assert!(matches!(err, PipelineError::BudgetExceeded { .. }));
        // elementary abelian bases fall back to code loops
        let e = enumerate_order(&db(vec![("E8", LoopTable::elementary_abelian(2, 3))]), &tight).unwrap();
        assert_eq!(e.stats.bases[0].route, Route::CodeLoops);
        assert_eq!(e.database.iter().filter(|x| !x.fingerprint.associative).count(), 5);
    }

    #[test]
    fn config_errors() {
        assert!(RunConfig::new(5, Mode::AllLoops).is_err());
        assert!(RunConfig::new(2, Mode::AllLoops).unwrap().with_budget(0).validate().is_err());
        let cfg = RunConfig::new(3, Mode::AllLoops).unwrap();
        assert!(enumerate_order(&db(vec![("C4", LoopTable::cyclic(4))]), &cfg).is_err());
        assert!(enumerate_order(&db(vec![("C3", LoopTable::cyclic(3)), ("C9", LoopTable::cyclic(9))]), &cfg).is_err());
    }

    #[test]
    fn dims_rows() {
        let rows = dims_report(&db(vec![("C4", LoopTable::cyclic(4))]), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(rows[0].dims.cob, 2);
        assert!(dims_tsv(&rows).starts_with("name\tdim_mcoc\tdim_cob\tdim_comp\tx_size\nC4\t"));
    }
}
