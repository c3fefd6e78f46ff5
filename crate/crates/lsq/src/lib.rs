//! Command-line front end for `lsq-core`: curve tables, a disk cache and JSON reports.
//!
//! Exit codes: 0 every check passed, 1 some check failed, 2 inconclusive or a search
//! bound was reached, 64 bad usage or unreadable input.

pub mod store;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lsq_core::arith;
use lsq_core::characters::QuadDirichletChar;
use lsq_core::ellcurve::EllipticCurveQ;
use lsq_core::verify::{
    self, check_degree_class_with, check_identity_suite, check_square_value_with, run_pipeline, search_deltas, search_pair,
    Config, Manin, MemoryStore, ReportBundle, Store, VerificationReport, Verdict, SCHEMA_VERSION,
};
use serde::Serialize;

pub use store::DiskStore;
pub use table::CurveTable;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "lsq", version, about = "Square-class checks for L-values of elliptic curves")]
pub struct Cli {
    /// Cache directory for class sets and modular symbol spaces.
    #[arg(long, global = true, env = "LSQ_CACHE", default_value = "./.lsq-cache")]
    pub cache_dir: PathBuf,
    /// Keep everything in memory.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Correct digits required of numerically computed L-values.
    #[arg(long, global = true, default_value_t = 8)]
    pub precision: u32,
    #[arg(long, global = true, value_enum, default_value = "1")]
    pub manin: ManinArg,
    /// Extra CSV table of curves (label,a1,a2,a3,a4,a6,conductor).
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ManinArg {
    #[value(name = "1")]
    One,
    Assume,
}

#[derive(Debug, Subcommand)]
#[command(allow_negative_numbers = true)]
pub enum Command {
    /// Modular degree against Tamagawa data and the Petersson norm, mod squares.
    #[command(name = "degree-class", visible_alias = "check-318", allow_negative_numbers = true)]
    DegreeClass {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        q: u64,
    },
    /// Rational-square test of the normalized central value over the real quadratic field.
    #[command(name = "square-value", visible_alias = "check-thm32", allow_negative_numbers = true)]
    SquareValue {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        chi1: i64,
        #[arg(long)]
        chi2: Option<i64>,
        /// Defaults to the product of the primes exactly dividing N.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 50)]
        delta_height: i64,
        #[arg(long, default_value_t = 10_000)]
        height_bound: u64,
        /// Number of characters delta to test.
        #[arg(long, default_value_t = 2)]
        deltas: usize,
    },
    /// Conductor, Gauss sum and genus identities for three quadratic characters.
    #[command(name = "identity-suite", allow_negative_numbers = true)]
    IdentitySuite {
        #[arg(long)]
        chi1: i64,
        #[arg(long)]
        chi2: i64,
        #[arg(long)]
        chi3: i64,
    },
    /// Tate's algorithm at one prime.
    #[command(name = "local-data", allow_negative_numbers = true)]
    LocalData {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        prime: u64,
    },
    /// Character searches followed by every check.
    #[command(allow_negative_numbers = true)]
    Pipeline {
        #[arg(long)]
        curve: String,
        /// The Q-part of the conductor (a prime, or an odd number of primes).
        #[arg(long, alias = "q")]
        p: u64,
        #[arg(long)]
        chi1: Option<i64>,
    },
}

#[derive(Debug, Serialize)]
struct LocalDataReport {
    schema_version: u32,
    curve: String,
    conductor: u64,
    prime: u64,
    kodaira: String,
    conductor_exponent: u32,
    ord_disc: u32,
    tamagawa: u32,
    reduction: String,
    ogg: bool,
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    schema_version: u32,
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    partial: Option<&'a ReportBundle>,
    verdict: Verdict,
}

/// Pretty JSON with a trailing newline; key order is fixed by the types.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn error_verdict(e: &lsq_core::Error) -> Verdict {
    use lsq_core::Error::*;
    match e {
        Inconclusive(_)
        | SearchExhausted(_)
        | BoundExceeded(_)
        | FactorizationBudgetExceeded(_)
        | InsufficientCoefficients { .. } => Verdict::Inconclusive,
        _ => Verdict::Fail,
    }
}

struct Out<'a> {
    json: Option<PathBuf>,
    stdout: &'a mut dyn Write,
}

impl Out<'_> {
    fn emit<T: Serialize>(&mut self, value: &T) -> Result<()> {
        match &self.json {
            None => Ok(()),
            Some(p) if p.as_os_str() == "-" => Ok(self.stdout.write_all(to_json(value).as_bytes())?),
            Some(p) => std::fs::write(p, to_json(value)).with_context(|| format!("writing {}", p.display())),
        }
    }

    fn say(&mut self, line: impl AsRef<str>) {
        let quiet = matches!(&self.json, Some(p) if p.as_os_str() == "-");
        if !quiet {
            let _ = writeln!(self.stdout, "{}", line.as_ref());
        }
    }

    fn report(&mut self, r: &VerificationReport) {
        self.say(format!("{}: {:?}", r.check, r.verdict));
        for l in &r.lines {
            self.say(format!("  [{:?}] {}: {}", l.verdict, l.name, l.detail));
        }
    }

    fn bundle(&mut self, b: &ReportBundle) {
        for (k, v) in &b.characters {
            self.say(format!("{k} = {v}"));
        }
        for d in &b.deltas {
            self.say(format!("delta: {d}"));
        }
        for r in &b.reports {
            self.report(r);
        }
        for e in &b.errors {
            self.say(format!("error: {e}"));
        }
        self.say(format!("verdict: {:?}", b.verdict));
    }

    fn failure(&mut self, e: &lsq_core::Error, partial: Option<&ReportBundle>) -> Result<i32> {
        if let Some(b) = partial {
            self.bundle(b);
        }
        let verdict = error_verdict(e);
        self.say(format!("error: {e}"));
        self.emit(&ErrorReport { schema_version: SCHEMA_VERSION, error: e.to_string(), partial, verdict })?;
        Ok(verdict_code(verdict))
    }
}

/// Product of the primes exactly dividing the conductor, when there are an odd number of them.
fn default_q(e: &EllipticCurveQ) -> Result<u64> {
    let n = e.minimal_model()?.conductor()?;
    let ps: Vec<u64> = arith::prime_divisors(n).into_iter().filter(|&p| (n / p) % p != 0).collect();
    if ps.len() % 2 == 0 {
        bail!("conductor {n} has an even number of primes of multiplicative reduction; pass --q");
    }
    Ok(ps.iter().product())
}

/// Runs one command; returns the exit code. Errors are usage or input problems.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let mut curves = CurveTable::bundled();
    if let Some(t) = &cli.table {
        curves.ingest_file(t)?;
    }
    let mut store: Box<dyn Store> =
        if cli.no_cache { Box::new(MemoryStore::new()) } else { Box::new(DiskStore::new(&cli.cache_dir)) };
    let mut cfg = Config {
        manin: match cli.manin {
            ManinArg::One => Manin::One,
            ManinArg::Assume => Manin::Assume,
        },
        precision: cli.precision,
        ..Config::default()
    };
    let mut out = Out { json: cli.json.clone(), stdout };

    match &cli.command {
        Command::DegreeClass { curve, q } => {
            let e = curves.parse(curve)?;
            match check_degree_class_with(&e, *q, &cfg, store.as_mut()) {
                Ok(r) => {
                    out.report(&r);
                    out.emit(&r)?;
                    Ok(verdict_code(r.verdict))
                }
                Err(err) => out.failure(&err, None),
            }
        }
        Command::SquareValue { curve, chi1, chi2, q, delta_height, height_bound, deltas } => {
            let e = curves.parse(curve)?;
            cfg.delta_height = *delta_height;
            cfg.height_bound = *height_bound;
            cfg.deltas = *deltas;
            cfg.chi1 = Some(*chi1);
            let c1 = QuadDirichletChar::new(*chi1)?;
            let pair = match chi2 {
                Some(d) => {
                    let c2 = QuadDirichletChar::new(*d)?;
                    verify::q_part_of(&e, &c1, &c2).map(|q| (q, c2))
                }
                None => {
                    let q = match q {
                        Some(q) => *q,
                        None => default_q(&e)?,
                    };
                    search_pair(&e, q, &cfg, store.as_mut()).map(|[_, c2]| (q, c2))
                }
            };
            let (q, c2) = match pair {
                Ok(p) => p,
                Err(err) => return out.failure(&err, None),
            };
            let mut b = ReportBundle::new(verify::curve_text(&e.minimal_model()?), q);
            b.characters.insert("chi1".into(), c1.disc());
            b.characters.insert("chi2".into(), c2.disc());
            b.characters.insert("D_F".into(), c1.product(&c2).disc());
            let ds = match search_deltas(&e, &c1, &c2, &cfg) {
                Ok(ds) => ds,
                Err(err) => return out.failure(&err, Some(&b)),
            };
            for d in &ds {
                b.deltas.push(verify::delta_text(d));
                match check_square_value_with(&e, &c1, &c2, d, &cfg) {
                    Ok(r) => b.push(r),
                    Err(err) => b.error(&format!("square_value for {}", verify::delta_text(d)), &err),
                }
            }
            if ds.len() < cfg.deltas {
                let err = lsq_core::Error::SearchExhausted(format!(
                    "found {} of {} characters delta with height <= {}",
                    ds.len(),
                    cfg.deltas,
                    cfg.delta_height
                ));
                b.error("delta search", &err);
            }
            out.bundle(&b);
            out.emit(&b)?;
            Ok(verdict_code(b.verdict))
        }
        Command::IdentitySuite { chi1, chi2, chi3 } => {
            let cs = [*chi1, *chi2, *chi3].map(QuadDirichletChar::new);
            let [c1, c2, c3] = match cs {
                [Ok(a), Ok(b), Ok(c)] => [a, b, c],
                [a, b, c] => return out.failure(&a.and(b).and(c).unwrap_err(), None),
            };
            match check_identity_suite(&c1, &c2, &c3, None) {
                Ok(r) => {
                    out.report(&r);
                    out.emit(&r)?;
                    Ok(verdict_code(r.verdict))
                }
                Err(err) => out.failure(&err, None),
            }
        }
        Command::LocalData { curve, prime } => {
            let e = curves.parse(curve)?;
            if !arith::is_prime(*prime) {
                bail!("{prime} is not prime");
            }
            let m = e.minimal_model()?;
            let ld = m.local_data(*prime);
            let r = LocalDataReport {
                schema_version: SCHEMA_VERSION,
                curve: verify::curve_text(&m),
                conductor: m.conductor()?,
                prime: *prime,
                kodaira: ld.kodaira.to_string(),
                conductor_exponent: ld.conductor_exponent,
                ord_disc: ld.ord_disc,
                tamagawa: ld.tamagawa,
                reduction: format!("{:?}", ld.reduction),
                ogg: ld.satisfies_ogg(),
            };
            out.say(format!(
                "p = {}: {} f = {} ord(disc) = {} c = {} {} (Ogg {})",
                r.prime,
                r.kodaira,
                r.conductor_exponent,
                r.ord_disc,
                r.tamagawa,
                r.reduction,
                if r.ogg { "holds" } else { "FAILS" }
            ));
            out.emit(&r)?;
            Ok(if r.ogg { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Pipeline { curve, p, chi1 } => {
            let e = curves.parse(curve)?;
            cfg.chi1 = *chi1;
            match run_pipeline(&e, *p, &cfg, store.as_mut()) {
                Ok(b) => {
                    out.bundle(&b);
                    out.emit(&b)?;
                    Ok(verdict_code(b.verdict))
                }
                Err(f) => out.failure(&f.error, Some(&f.partial)),
            }
        }
    }
}

/// Parses `args` and runs; prints usage and input errors to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
