//! `bench-growth`: one solve per (parameter, order) cell.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use obddlab::obdd::node_cap_from_env;
use obddlab::solver::{bucket_schedule, choose_order, random_order, solve, Status};

use crate::{parse_heuristic, FamilyArg};

pub const HEADER: [&str; 6] = ["family", "param", "order", "proof_size", "peak_nodes", "seconds"];

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
    /// Random orders per parameter.
    #[arg(long, default_value_t = 20)]
    orders: usize,
    /// Comma-separated heuristic orders run besides the random ones.
    #[arg(long, default_value = "natural,degree,roles")]
    heuristics: String,
    #[arg(long, required = true)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Defaults to $OBDD_NODE_CAP or 2^24.
    #[arg(long)]
    node_cap: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write 0 in the seconds column so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

struct Cell {
    param: usize,
    order: String,
    status: Status,
    proof_size: usize,
    peak_nodes: usize,
    seconds: f64,
}

enum OrderSpec {
    Heuristic(String),
    Random(u64),
}

pub fn run(a: BenchArgs) -> Result<()> {
    if a.from > a.to {
        bail!("--from {} exceeds --to {}", a.from, a.to);
    }
    let seed = a.seed.expect("clap enforces --seed");
    let cap = a.node_cap.unwrap_or_else(node_cap_from_env);
    let heuristics: Vec<String> =
        a.heuristics.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    for h in &heuristics {
        parse_heuristic(h)?;
    }
    // Validate every parameter before any solving.
    for p in a.from..=a.to {
        a.family.generate(p).with_context(|| format!("{} {p}", a.family.name()))?;
    }
    let mut cells = Vec::new();
    for p in a.from..=a.to {
        for h in &heuristics {
            cells.push((p, OrderSpec::Heuristic(h.clone())));
        }
        for r in 0..a.orders as u64 {
            cells.push((p, OrderSpec::Random(r)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs.max(1)).build()?;
    let results: Vec<Cell> = pool.install(|| {
        cells
            .par_iter()
            .map(|(p, spec)| -> Result<Cell> {
                let cnf = a.family.generate(*p)?;
                let (name, order) = match spec {
                    OrderSpec::Heuristic(h) => (h.clone(), choose_order(&cnf, &parse_heuristic(h)?)?),
                    OrderSpec::Random(r) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream((*p as u64) << 32 | r);
                        (format!("random-{}", r + 1), random_order(cnf.num_vars, &mut rng))
                    }
                };
                let out = solve(&cnf, &order, &bucket_schedule(&cnf, &order), cap)?;
                Ok(Cell {
                    param: *p,
                    order: name,
                    status: out.status,
                    proof_size: out.proof_size,
                    peak_nodes: out.peak_nodes,
                    seconds: out.seconds,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    let fam = a.family.name();
    let secs = |s: f64| if a.no_timing { "0".to_string() } else { format!("{s:.3}") };
    for p in a.from..=a.to {
        let row: Vec<&Cell> = results.iter().filter(|c| c.param == p).collect();
        for c in &row {
            let size = match c.status {
                Status::Budget => "budget".to_string(),
                _ => c.proof_size.to_string(),
            };
            w.write_record([fam, &p.to_string(), &c.order, &size, &c.peak_nodes.to_string(), &secs(c.seconds)])?;
        }
        // Summaries over all orders; budget runs count as larger than any
        // finished one.
        let key = |c: &&Cell, size: bool| match (c.status, size) {
            (Status::Budget, _) => usize::MAX,
            (_, true) => c.proof_size,
            (_, false) => c.peak_nodes,
        };
        let show = |v: usize| if v == usize::MAX { "budget".to_string() } else { v.to_string() };
        let mut sizes: Vec<usize> = row.iter().map(|c| key(c, true)).collect();
        let mut peaks: Vec<usize> = row.iter().map(|c| key(c, false)).collect();
        sizes.sort_unstable();
        peaks.sort_unstable();
        let total: f64 = row.iter().map(|c| c.seconds).sum();
        if !sizes.is_empty() {
            let mid = (sizes.len() - 1) / 2;
            w.write_record([fam, &p.to_string(), "min", &show(sizes[0]), &show(peaks[0]), &secs(total)])?;
            w.write_record([fam, &p.to_string(), "median", &show(sizes[mid]), &show(peaks[mid]), &secs(total)])?;
        }
    }
    w.flush()?;
    Ok(())
}
