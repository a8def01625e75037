use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use moufang::autiso::{are_isomorphic, are_isotopic};
use moufang::codeloops::triple_orbit_representatives;
use moufang::pipeline::{
    self, bootstrap, dims_report, dims_tsv, enumerate_order, order_filter, read_loops_file, render_loops,
    render_triples, LoopEntry, Mode, PipelineError, RunConfig, Verdict, DEFAULT_BUDGET,
};

#[derive(Parser)]
#[command(name = "moufang", version, about = "Enumerate Moufang p-loops by central extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Central extensions of every loop in a file, up to isomorphism.
    Enumerate {
        #[arg(long)]
        prime: u8,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nonassociative_only: bool,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// All Moufang loops of orders p, p², …, p^upto.
    Bootstrap {
        #[arg(long)]
        prime: u8,
        #[arg(long)]
        upto: u32,
        /// Directory for one `moufang_<order>.txt` per order.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Cocycle space dimensions and representative counts, as TSV.
    Dims {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Inequivalent triples of nonassociative code loops over GF(2)^dim.
    Codeloops {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Isomorphism test between two loops given as FILE#NAME.
    Iso {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Isotopy test between two loops given as FILE#NAME.
    Isotopy {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Whether nonassociative Moufang loops of order N exist.
    OrderFilter { n: u64 },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(e) if !e.is_input_error() => 1,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn load_named(spec: &str) -> Result<LoopEntry, CliError> {
    let (file, name) =
        spec.rsplit_once('#').ok_or_else(|| CliError::Usage(format!("expected FILE#NAME, got {spec:?}")))?;
    let db = read_loops_file(file)?;
    db.get(name).cloned().ok_or_else(|| CliError::Usage(format!("no loop named {name:?} in {file}")))
}

fn infer_prime(db: &pipeline::LoopDatabase) -> Result<u8, CliError> {
    let n = db.entries().first().map_or(1, |e| e.table.order()) as u64;
    match pipeline::factorize(n).as_slice() {
        [(p, _)] if *p <= 3 => Ok(*p as u8),
        [] => Ok(2),
        _ => Err(CliError::Usage(format!("order {n} is not a power of 2 or 3"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Enumerate { prime, input, out, nonassociative_only, jobs, budget } => {
            let mode = if nonassociative_only { Mode::NonassociativeOnly } else { Mode::AllLoops };
            let cfg = RunConfig::new(prime, mode)?.with_jobs(jobs).with_budget(budget);
            cfg.validate()?;
            let bases = read_loops_file(&input)?;
            let e = enumerate_order(&bases, &cfg)?;
            pipeline::write_loops_file(&e.database, &out)?;
            eprintln!(
                "{} loops written to {} (hits {}, max multiplicity {})",
                e.stats.unique,
                out.display(),
                e.stats.hits,
                e.stats.max_multiplicity
            );
        }
        Command::Bootstrap { prime, upto, out, jobs, budget } => {
            let cfg = RunConfig::new(prime, Mode::AllLoops)?.with_jobs(jobs).with_budget(budget);
            cfg.validate()?;
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            }
            println!("order\tloops\tgroups\tnonassociative");
            for e in bootstrap(&cfg, upto)? {
                let order = e.database.entries().first().map_or(0, |x| x.table.order());
                let groups = e.database.iter().filter(|x| x.fingerprint.associative).count();
                println!("{order}\t{}\t{groups}\t{}", e.database.len(), e.database.len() - groups);
                if let Some(dir) = &out {
                    let path = dir.join(format!("moufang_{order}.txt"));
                    write_out(Some(&path), &render_loops(&e.database))?;
                }
            }
        }
        Command::Dims { input, out, budget } => {
            let db = read_loops_file(&input)?;
            let p = infer_prime(&db)?;
            let rows = dims_report(&db, p, budget)?;
            write_out(out.as_deref(), &dims_tsv(&rows))?;
        }
        Command::Codeloops { dim, out } => {
            let reps = triple_orbit_representatives(dim).map_err(PipelineError::from)?;
            write_out(Some(&out), &render_triples(&reps))?;
            eprintln!("{} triples written to {}", reps.len(), out.display());
        }
        Command::Iso { a, b } => {
            let (x, y) = (load_named(&a)?, load_named(&b)?);
            match are_isomorphic(&x.table, &y.table) {
                Some(phi) => {
                    let images: Vec<String> = phi.iter().map(|v| (v + 1).to_string()).collect();
                    println!("isomorphic\n{}", images.join(" "));
                }
                None => println!("not isomorphic"),
            }
        }
        Command::Isotopy { a, b } => {
            let (x, y) = (load_named(&a)?, load_named(&b)?);
            let verdict = if are_isotopic(&x.table, &y.table) { "isotopic" } else { "not isotopic" };
            println!("{verdict}");
        }
        Command::OrderFilter { n } => {
            if n == 0 {
                return Err(CliError::Usage("order must be positive".into()));
            }
            let text = match order_filter(n) {
                Verdict::AllAssociative => "all-associative",
                Verdict::NonassociativeExists => "nonassociative-exists",
                Verdict::Unknown => "unknown",
            };
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
