use std::fs::File;
use std::io;
use std::path::PathBuf;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use approx_stable::gda::{certified_alpha, run_gda, GdaOptions, TieBreak};
use approx_stable::instances::{gen_random, ConstraintClass, RandomParams, UtilityClass};
use approx_stable::stability::min_alpha;
use approx_stable::AlgorithmKind;
use rayon::prelude::*;
use serde::Serialize;

#[derive(clap::Args)]
pub struct BenchArgs {
    /// Seeds per cell.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 8)]
    doctors: usize,
    #[arg(long, default_value_t = 3)]
    hospitals: usize,
    /// Wall-clock cap per instance; slower instances are recorded as timeouts.
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = "fifo")]
    tie_break: TieBreak,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct Cell {
    utility: UtilityClass,
    constraint: ConstraintClass,
    algorithm: AlgorithmKind,
}

fn cells() -> Vec<Cell> {
    let mut v: Vec<Cell> = (1..=3)
        .map(|k| Cell {
            utility: UtilityClass::Cardinality,
            constraint: ConstraintClass::KMatroid { k },
            algorithm: AlgorithmKind::GreedyMatroid,
        })
        .collect();
    for utility in [UtilityClass::Cardinality, UtilityClass::Additive] {
        for rho in 1..=2 {
            for eps in [0.1, 0.3, 0.5] {
                v.push(Cell {
                    utility,
                    constraint: ConstraintClass::Knapsack { rho, eps },
                    algorithm: AlgorithmKind::GreedyKnapsack,
                });
            }
        }
    }
    v
}

#[derive(Serialize)]
struct Row {
    instance: String,
    algorithm: &'static str,
    certified_alpha: Option<f64>,
    min_alpha: Option<f64>,
    runtime_ms: Option<f64>,
    status: String,
}

/// What a worker thread needs to rebuild and solve one instance.
#[derive(Clone, Copy)]
struct Setup {
    doctors: usize,
    hospitals: usize,
    tie_break: TieBreak,
}

struct Outcome {
    certified: Option<f64>,
    achieved: f64,
    runtime: Duration,
}

fn solve(cell: Cell, seed: u64, setup: Setup) -> anyhow::Result<Outcome> {
    let params = RandomParams::new(setup.doctors, setup.hospitals, cell.utility, cell.constraint);
    let market = gen_random(seed, &params)?;
    let kinds = vec![cell.algorithm; market.num_hospitals()];
    let opts = GdaOptions {
        tie_break: setup.tie_break,
        ..GdaOptions::default()
    };
    let start = Instant::now();
    let (mu, _) = run_gda(&market, &kinds, opts)?;
    let runtime = start.elapsed();
    Ok(Outcome {
        certified: certified_alpha(&market, &kinds),
        achieved: min_alpha(&market, &mu)?,
        runtime,
    })
}

fn bench_one(cell: Cell, seed: u64, args: &BenchArgs) -> Row {
    let instance = format!("{:?}/{}/seed={seed}", cell.utility, cell.constraint).to_lowercase();
    let mut row = Row {
        instance,
        algorithm: cell.algorithm.as_str(),
        certified_alpha: None,
        min_alpha: None,
        runtime_ms: None,
        status: String::new(),
    };
    // The worker is detached on timeout; it finishes in the background and its result is dropped.
    let (tx, rx) = mpsc::channel();
    let setup = Setup {
        doctors: args.doctors,
        hospitals: args.hospitals,
        tie_break: args.tie_break,
    };
    thread::spawn(move || {
        let _ = tx.send(solve(cell, seed, setup));
    });
    match rx.recv_timeout(Duration::from_millis(args.timeout_ms)) {
        Ok(Ok(o)) => {
            row.certified_alpha = o.certified;
            row.min_alpha = Some(o.achieved);
            row.runtime_ms = Some(o.runtime.as_secs_f64() * 1e3);
            row.status = "ok".into();
        }
        Ok(Err(e)) => row.status = format!("error: {e}"),
        Err(_) => row.status = "timeout".into(),
    }
    row
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    let jobs: Vec<(Cell, u64)> = cells()
        .into_iter()
        .flat_map(|c| (0..args.seeds).map(move |s| (c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .context("building worker pool")?;
    let rows: Vec<Row> = pool.install(|| jobs.par_iter().map(|&(c, s)| bench_one(c, s, args)).collect());

    let sink: Box<dyn io::Write> = match &args.out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
