mod bench;
mod gen;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use approx_stable::gda::{certified_alpha, run_gda, GdaOptions, TieBreak};
use approx_stable::json::{
    enumeration_to_json, matching_to_json, packing_to_json, pretty, read_market, read_matching, report_to_json,
    trace_to_json,
};
use approx_stable::packing::{solve_exact, PackingInstance};
use approx_stable::stability::{exists_stable_bruteforce, min_alpha, Enumeration, StabilityReport};
use approx_stable::{alpha_stability_check, AlgorithmKind, DoctorSet, Market, Matching};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "approx-stable", version, about = "Approximately stable matching under packing constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Run generalized deferred acceptance and print the matching.
    Solve {
        #[arg(long)]
        market: PathBuf,
        /// One algorithm for every hospital, or a comma-separated list with one entry per hospital.
        #[arg(long, default_value = "greedy_matroid")]
        alg: String,
        /// fifo, lifo or seeded:<n>.
        #[arg(long, default_value = "fifo")]
        tie_break: TieBreak,
        /// Also write the proposal and arrival trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Check a matching for alpha-stability. Exits 3 when a blocking coalition exists.
    Check {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Print the smallest alpha at which a matching is stable.
    MinAlpha {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        matching: PathBuf,
    },
    /// Search all feasible matchings for an alpha-stable one. Exits 3 when none exists.
    Enumerate {
        #[arg(long)]
        market: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Generate a market from a named family.
    Gen {
        #[arg(long)]
        family: gen::Family,
        /// Comma-separated key=value pairs, e.g. k=2 or seed=3,n=8,m=3.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one hospital's packing problem exactly.
    Pack {
        #[arg(long)]
        market: PathBuf,
        /// Hospital name.
        #[arg(long)]
        hospital: String,
        /// Comma-separated doctor names; defaults to the doctors who find the hospital acceptable.
        #[arg(long)]
        ground: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run seeded random ensembles and write a CSV summary.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let limit = e
                .chain()
                .any(|c| c.downcast_ref::<approx_stable::Error>().is_some_and(|x| x.is_limit()));
            ExitCode::from(if limit { EXIT_LIMIT } else { EXIT_USAGE })
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Solve {
            market,
            alg,
            tie_break,
            trace,
            out,
            format,
        } => {
            let market = load_market(&market)?;
            let kinds = parse_algorithms(&alg, market.num_hospitals())?;
            let opts = GdaOptions {
                tie_break,
                ..GdaOptions::default()
            };
            let (mu, tr) = run_gda(&market, &kinds, opts)?;
            if let Some(path) = trace {
                write_file(&path, &pretty(&trace_to_json(&market, &tr, &mu)))?;
            }
            let text = match format {
                Format::Json => pretty(&matching_to_json(&market, &mu)),
                Format::Table => {
                    let mut s = matching_table(&market, &mu);
                    match certified_alpha(&market, &kinds) {
                        Some(a) => s.push_str(&format!("certified alpha: {a}\n")),
                        None => s.push_str("certified alpha: none\n"),
                    }
                    s
                }
            };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Check {
            market,
            matching,
            alpha,
            format,
        } => {
            let market = load_market(&market)?;
            let mu = load_matching(&market, &matching)?;
            let report = alpha_stability_check(&market, &mu, alpha)?;
            let text = match format {
                Format::Json => pretty(&report_to_json(&market, &report)),
                Format::Table => report_table(&market, &report),
            };
            emit(None, &text)?;
            Ok(if report.is_stable() { 0 } else { EXIT_UNSTABLE })
        }
        Command::MinAlpha { market, matching } => {
            let market = load_market(&market)?;
            let mu = load_matching(&market, &matching)?;
            println!("{}", min_alpha(&market, &mu)?);
            Ok(0)
        }
        Command::Enumerate { market, alpha, format } => {
            let market = load_market(&market)?;
            let e = exists_stable_bruteforce(&market, alpha)?;
            let text = match format {
                Format::Json => pretty(&enumeration_to_json(&market, &e)),
                Format::Table => enumeration_table(&market, &e),
            };
            emit(None, &text)?;
            Ok(if e.stable.is_some() { 0 } else { EXIT_UNSTABLE })
        }
        Command::Gen { family, params, out } => {
            let market = gen::generate(family, &params)?;
            emit(out.as_deref(), &approx_stable::json::write_market(&market))?;
            Ok(0)
        }
        Command::Pack {
            market,
            hospital,
            ground,
            format,
        } => {
            let market = load_market(&market)?;
            let h = market
                .hospital_by_name(&hospital)
                .with_context(|| format!("unknown hospital {hospital:?}"))?;
            let ground = match ground {
                Some(list) => parse_doctors(&market, &list)?,
                None => market.applicants(h),
            };
            let sol = solve_exact(&PackingInstance::new(ground, market.utility(h), market.constraint(h)))?;
            let text = match format {
                Format::Json => pretty(&packing_to_json(&market, &sol)),
                Format::Table => format!("value {}: {}\n", sol.value, names(&market, sol.chosen).join(" ")),
            };
            emit(None, &text)?;
            Ok(0)
        }
        Command::Bench(args) => {
            bench::run(&args)?;
            Ok(0)
        }
    }
}

fn load_market(path: &Path) -> anyhow::Result<Market> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_market(&text).with_context(|| format!("parsing market {}", path.display()))
}

fn load_matching(market: &Market, path: &Path) -> anyhow::Result<Matching> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_matching(market, &text).with_context(|| format!("parsing matching {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn parse_algorithms(spec: &str, hospitals: usize) -> anyhow::Result<Vec<AlgorithmKind>> {
    let kinds = spec
        .split(',')
        .map(|s| s.trim().parse::<AlgorithmKind>())
        .collect::<Result<Vec<_>, _>>()?;
    match kinds.len() {
        1 => Ok(vec![kinds[0]; hospitals]),
        n if n == hospitals => Ok(kinds),
        n => bail!("--alg lists {n} algorithms for {hospitals} hospitals"),
    }
}

fn parse_doctors(market: &Market, list: &str) -> anyhow::Result<DoctorSet> {
    let mut set = DoctorSet::EMPTY;
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let d = market
            .doctor_by_name(name)
            .with_context(|| format!("unknown doctor {name:?}"))?;
        set.insert(d.0);
    }
    Ok(set)
}

fn names(market: &Market, set: DoctorSet) -> Vec<&str> {
    set.iter().map(|d| market.doctor_name(approx_stable::DoctorId(d))).collect()
}

fn matching_table(market: &Market, mu: &Matching) -> String {
    let mut s = String::new();
    for h in market.hospitals() {
        let assigned = names(market, mu.assigned_set(h));
        s.push_str(&format!("{}: {}\n", market.hospital_name(h), assigned.join(" ")));
    }
    let unmatched: Vec<&str> = market
        .doctors()
        .filter(|&d| mu.assigned_hospital(d).is_none())
        .map(|d| market.doctor_name(d))
        .collect();
    s.push_str(&format!("unmatched: {}\n", unmatched.join(" ")));
    s
}

fn report_table(market: &Market, r: &StabilityReport) -> String {
    let verdict = if r.is_stable() { "stable" } else { "blocked" };
    let mut s = format!("alpha {}: {verdict}\n", r.alpha);
    s.push_str("hospital  current  best  coalition\n");
    for x in &r.hospitals {
        s.push_str(&format!(
            "{}  {}  {}  {}\n",
            market.hospital_name(x.hospital),
            x.current_value,
            x.best_value,
            names(market, x.best).join(" ")
        ));
    }
    s
}

fn enumeration_table(market: &Market, e: &Enumeration) -> String {
    let mut s = format!("feasible matchings: {}\nbest alpha: {}\n", e.feasible, e.best_alpha);
    match &e.stable {
        Some(mu) => {
            s.push_str(&format!("{}-stable matching:\n", e.alpha));
            s.push_str(&matching_table(market, mu));
        }
        None => s.push_str(&format!("{}-stable matching: none\n", e.alpha)),
    }
    s
}
