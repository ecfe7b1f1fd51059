//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 internal cross-check
//! failure, 3 verification mismatch or undecodable run.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decode::{census_from_table, write_census_csv, DecodabilityTable};
use crate::error::{Error, Result};
use crate::reliability::{
    curve, default_grid, exhaustive_profile, log_grid, p_fail_theoretical, replication_profile, write_curves_csv,
    write_fc_csv, FailureCurve, ReliabilityProfile,
};
use crate::scheme::{FailurePattern, Scheme, SchemeKind};
use crate::search::{count_report, verify_relation, ParityMode, SearchConfig};
use crate::sim::{batch, random_inputs, run_with_pattern, sampled_pattern, write_batch_csv, Decoder, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CROSS_CHECK: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ftsmm", version, about = "Fault-tolerant Strassen-like matrix multiplication toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate local relations and parity candidates of a scheme.
    Search(SearchArgs),
    /// Exact failure counts and theoretical failure probability.
    Analyze(AnalyzeArgs),
    /// Theory and Monte Carlo failure curves.
    Simulate(SimulateArgs),
    /// End-to-end multiplication with failure injection.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    RankOne,
    Elementary,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Scheme id, e.g. hybrid_sw, strassen_2copy, hybrid_sw_2psmm.
    #[arg(long, default_value = "hybrid_sw")]
    pub scheme: String,
    /// Largest relation support visited (default: all terms).
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_enum, default_value = "rank-one")]
    pub parity_mode: ParityArg,
    /// Single-threaded enumeration.
    #[arg(long)]
    pub serial: bool,
    /// Relation set destination.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Single node failure probability.
    #[arg(long, conflicts_with = "pe_grid")]
    pub pe: Option<f64>,
    /// Log-spaced grid `min:max:points` (default 0.001:0.5:21).
    #[arg(long)]
    pub pe_grid: Option<String>,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        match (&self.pe, &self.pe_grid) {
            (Some(p), _) if *p > 0.0 && *p < 1.0 => Ok(vec![*p]),
            (Some(p), _) => Err(Error::InvalidArgument(format!("--pe {p} outside (0, 1)"))),
            (None, Some(text)) => parse_grid(text),
            (None, None) => Ok(default_grid()),
        }
    }
}

/// Parses `min:max:points`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("grid `{text}` is not min:max:points"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    log_grid(lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?)
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Comma-separated scheme ids (default: the comparison set).
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// FC table (csv) or full analysis document (json).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Theoretical curve CSV `scheme,M,p_e,p_f_theory`.
    #[arg(long)]
    pub curve_output: Option<PathBuf>,
    /// Census CSV `scheme,k,total_patterns,undecodable_count`.
    #[arg(long)]
    pub census_output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Comma-separated scheme ids (default: the comparison set).
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Curve destination (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, default_value = "hybrid_sw_2psmm")]
    pub scheme: String,
    /// Node failure probability used when no --fail list is given.
    #[arg(long, default_value_t = 0.0)]
    pub pe: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Forced failures, e.g. S2,S5,W2,W5.
    #[arg(long, value_delimiter = ',', conflicts_with = "trials")]
    pub fail: Option<Vec<String>>,
    /// Matrix dimension (even).
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub decoder: Decoder,
    /// Floating-point inputs instead of integers.
    #[arg(long)]
    pub float: bool,
    /// Exit 0 when the pattern is undecodable.
    #[arg(long)]
    pub allow_undecodable: bool,
    /// Run a batch of this many trials (CSV per trial).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CrossCheck(_) | Error::Inexact => EXIT_CROSS_CHECK,
        _ => EXIT_USAGE,
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Search(a) => cmd_search(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Run(a) => cmd_run(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn schemes(ids: &[String]) -> Result<Vec<Scheme>> {
    if ids.is_empty() {
        return SchemeKind::default_comparison().into_iter().map(crate::scheme::build_scheme).collect();
    }
    ids.iter().map(|s| Scheme::parse(s)).collect()
}

pub fn cmd_search(args: &SearchArgs) -> Result<i32> {
    let config = SearchConfig {
        k_max: args.k_max,
        parity_mode: match args.parity_mode {
            ParityArg::RankOne => ParityMode::RankOne,
            ParityArg::Elementary => ParityMode::Elementary,
        },
        parallel: !args.serial,
    };
    let scheme = Scheme::parse(&args.scheme)?.with_relations(&config)?;
    let set = scheme.relations().expect("attached above");
    if let Some(bad) = set.locals.iter().chain(&set.parities).find(|r| !verify_relation(&scheme.terms, r)) {
        return Err(Error::CrossCheck(format!("relation {} does not verify", bad.expression(&set.names))));
    }

    if args.output.is_some() {
        match args.format {
            Format::Json => write_json(&args.output, &set.to_document())?,
            Format::Csv => set.write_csv(sink(&args.output)?)?,
        }
    }
    let mut out = io::stdout().lock();
    writeln!(out, "scheme {} (M = {}, k_max = {})", scheme.id, scheme.m(), set.k_max)?;
    for (t, n) in set.local_counts() {
        writeln!(out, "  {t}: {n} local relations")?;
    }
    let r = count_report(set);
    writeln!(
        out,
        "  locals: {} distinct, {} mixing algorithms, augmented rank {}",
        r.distinct_locals, r.cross_locals, r.augmented_rank
    )?;
    writeln!(out, "  parities: {} relations over {} rank-1 forms", r.parity_relations, r.parity_forms)?;
    if args.output.is_none() {
        match args.format {
            Format::Json => {
                drop(out);
                write_json(&None, &set.to_document())?;
            }
            Format::Csv => set.write_csv(out)?,
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AnalyzeEntry {
    scheme: String,
    m: usize,
    psmm_count: usize,
    profile: ReliabilityProfile,
    p_f_theory: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct AnalyzeDocument {
    version: u32,
    schemes: Vec<AnalyzeEntry>,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32> {
    let grid = args.grid.grid()?;
    let mut entries = Vec::new();
    let mut censuses = Vec::new();
    for s in schemes(&args.scheme)? {
        let table = DecodabilityTable::new(&s)?;
        let census = census_from_table(&s.id, &table);
        let profile = match s.kind {
            SchemeKind::Replication { copies, .. } => {
                let closed = replication_profile(&s.id, u32::from(copies));
                if closed.fc != census.undecodable {
                    return Err(Error::CrossCheck(format!(
                        "{}: closed form {:?} disagrees with census {:?}",
                        s.id, closed.fc, census.undecodable
                    )));
                }
                closed
            }
            _ => exhaustive_profile(&s.id, &table),
        };
        let curve = grid.iter().map(|&p| (p, p_fail_theoretical(&profile, p))).collect();
        entries.push(AnalyzeEntry {
            scheme: s.id.clone(),
            m: s.m(),
            psmm_count: s.psmm_count,
            profile,
            p_f_theory: curve,
        });
        censuses.push(census);
    }

    let mut out = io::stdout().lock();
    for e in &entries {
        writeln!(out, "{}: M = {} ({} parity nodes), FC = {:?}", e.scheme, e.m, e.psmm_count, e.profile.fc)?;
        if let [(p, pf)] = e.p_f_theory.as_slice() {
            writeln!(out, "  p_f_theory({p}) = {pf:.6}")?;
        }
    }
    drop(out);

    if let Some(p) = &args.curve_output {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(p)?));
        w.write_record(["scheme", "M", "p_e", "p_f_theory"])?;
        for e in &entries {
            for (pe, pf) in &e.p_f_theory {
                w.write_record([e.scheme.clone(), e.m.to_string(), format!("{pe:e}"), format!("{pf:e}")])?;
            }
        }
        w.flush()?;
    }
    if args.census_output.is_some() {
        write_census_csv(sink(&args.census_output)?, &censuses)?;
    }
    match (args.format, &args.output) {
        (Format::Json, path) => {
            write_json(path, &AnalyzeDocument { version: crate::SCHEMA_VERSION, schemes: entries })?
        }
        (Format::Csv, Some(_)) => {
            let profiles: Vec<_> = entries.iter().map(|e| e.profile.clone()).collect();
            write_fc_csv(sink(&args.output)?, &profiles)?;
        }
        (Format::Csv, None) => {}
    }
    Ok(EXIT_OK)
}

/// Footer lines comparing curves; `false` when the 2psmm ≤ 2-copy ordering fails.
pub fn ordering_footer(curves: &[FailureCurve]) -> (Vec<String>, bool) {
    let find = |id: &str| curves.iter().find(|c| c.scheme == id);
    let mut lines = Vec::new();
    let mut ok = true;
    if let (Some(h), Some(r2)) = (find("hybrid_sw_2psmm"), find("strassen_2copy")) {
        let holds = h.rows.iter().zip(&r2.rows).all(|(a, b)| a.p_f_theory <= b.p_f_theory);
        ok &= holds;
        lines.push(format!(
            "# ordering hybrid_sw_2psmm <= strassen_2copy at every grid point: {}",
            if holds { "holds" } else { "VIOLATED" }
        ));
    }
    if let (Some(h), Some(r3)) = (find("hybrid_sw_2psmm"), find("strassen_3copy")) {
        let gap = h
            .rows
            .iter()
            .zip(&r3.rows)
            .filter(|(a, b)| a.p_f_theory > 0.0 && b.p_f_theory > 0.0)
            .map(|(a, b)| (a.p_f_theory.log10() - b.p_f_theory.log10()).abs())
            .fold(0.0f64, f64::max);
        lines.push(format!("# max |log10 P_f(hybrid_sw_2psmm) - log10 P_f(strassen_3copy)| = {gap:.3}"));
    }
    (lines, ok)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    if args.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let grid = args.grid.grid()?;
    let curves = curve(&schemes(&args.scheme)?, &grid, args.trials, args.seed)?;
    match args.format {
        Format::Csv => write_curves_csv(sink(&args.output)?, &curves)?,
        Format::Json => {
            write_json(&args.output, &serde_json::json!({ "version": crate::SCHEMA_VERSION, "curves": curves }))?
        }
    }
    let (lines, ok) = ordering_footer(&curves);
    for l in lines {
        if args.output.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_CROSS_CHECK })
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let mut scheme = Scheme::parse(&args.scheme)?;
    if args.decoder == Decoder::Peel {
        scheme = scheme.with_relations(&SearchConfig::default())?;
    }
    if let Some(trials) = args.trials {
        if args.decoder != Decoder::Linear || args.float {
            return Err(Error::InvalidArgument("batch runs use integer inputs and the linear decoder".into()));
        }
        let summary = batch(&scheme, args.size, args.pe, trials, args.seed)?;
        match args.format {
            Format::Csv => write_batch_csv(sink(&args.output)?, &summary)?,
            Format::Json => write_json(&args.output, &summary)?,
        }
        eprintln!(
            "{}: {} of {} trials undecodable ({:.6}), {} verification mismatches",
            summary.scheme, summary.undecoded, summary.trials, summary.failure_fraction, summary.mismatches
        );
        return Ok(if summary.mismatches == 0 { EXIT_OK } else { EXIT_VERIFY });
    }
    if args.format == Format::Csv {
        return Err(Error::InvalidArgument("single runs report JSON; use --trials for CSV".into()));
    }
    let pattern = match &args.fail {
        Some(names) => FailurePattern::from_names(&scheme, names)?,
        None => sampled_pattern(&scheme, args.pe, args.seed),
    };
    let (a, b) = random_inputs(args.size, args.seed, 0);
    let report: RunReport = if args.float {
        run_with_pattern(&scheme, &a.to_float(), &b.to_float(), pattern, args.pe, args.seed, args.decoder)?
    } else {
        run_with_pattern::<i64>(&scheme, &a, &b, pattern, args.pe, args.seed, args.decoder)?
    };
    write_json(&args.output, &report)?;
    let t = report.timings;
    eprintln!("timings: encode {} us, compute {} us, decode {} us", t.encode_us, t.compute_us, t.decode_us);
    Ok(if report.succeeded() || (!report.decoded && args.allow_undecodable) { EXIT_OK } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.01:0.1:2").unwrap().len(), 2);
        assert!(parse_grid("0.01:0.1").is_err());
        assert!(parse_grid("a:0.1:3").is_err());
        assert!(parse_grid("0:0.1:3").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["ftsmm", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["ftsmm", "run", "--scheme", "nope"]), EXIT_USAGE);
        assert_eq!(main_with_args(["ftsmm", "run", "--size", "3"]), EXIT_USAGE);
        assert_eq!(main_with_args(["ftsmm", "--help"]), EXIT_OK);
    }
}
