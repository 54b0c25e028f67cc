//! The `obddlab` command line: generation, solving, checking and the
//! reduction experiments.
//!
//! Exit codes: `solve` 10 SAT, 20 UNSAT, 30 budget; `check` 0 pass, 1 fail;
//! any usage or input error 2.

pub mod bench;
pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use obddlab::cnf::{gen_indmatch, gen_match, gen_php, parse_dimacs, parse_name_map, write_dimacs, write_name_map, Cnf};
use obddlab::obdd::node_cap_from_env;
use obddlab::proof::{check_derivation, check_refutation, parse_log, write_log};
use obddlab::solver::{bucket_schedule, choose_order, solve, Heuristic, Status};

#[derive(Parser)]
#[command(name = "obddlab", version, about = "OBDD refutations and the matching-principle lab")]
struct Cli {
    /// `key = value` lines applied as flags of the chosen verb; explicit
    /// flags win. Must come before the verb.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Match,
    Indmatch,
    Php,
}

impl FamilyArg {
    pub fn name(self) -> &'static str {
        match self {
            FamilyArg::Match => "match",
            FamilyArg::Indmatch => "indmatch",
            FamilyArg::Php => "php",
        }
    }

    pub fn generate(self, param: usize) -> Result<Cnf> {
        Ok(match self {
            FamilyArg::Match => gen_match(param)?,
            FamilyArg::Indmatch => gen_indmatch(param)?,
            FamilyArg::Php => gen_php(param)?,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write `<family>_<param>.cnf` and its `.map` name file.
    #[command(args_override_self = true)]
    Gen {
        family: FamilyArg,
        param: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Decide a CNF by bucketed quantifier elimination.
    #[command(args_override_self = true)]
    Solve {
        #[arg(long)]
        cnf: PathBuf,
        /// Name map; defaults to the `.map` file next to the CNF if present.
        #[arg(long)]
        map: Option<PathBuf>,
        /// natural | degree | roles | @file (variable names, top first)
        #[arg(long, default_value = "natural")]
        order: String,
        #[arg(long)]
        emit_proof: Option<PathBuf>,
        /// Defaults to $OBDD_NODE_CAP or 2^24.
        #[arg(long)]
        node_cap: Option<usize>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a proof log against a CNF.
    #[command(args_override_self = true)]
    Check {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        proof: PathBuf,
        /// Accept any sound derivation, not only one ending in FALSE.
        #[arg(long)]
        derivation: bool,
    },
    /// Proof size and peak nodes over heuristic and random orders.
    #[command(args_override_self = true)]
    BenchGrowth(bench::BenchArgs),
    /// Exact and Monte Carlo partition densities and the size of G.
    #[command(args_override_self = true)]
    Density(experiments::DensityArgs),
    /// The set-disjointness reduction on random instances.
    #[command(args_override_self = true)]
    ReduceSim(experiments::ReduceArgs),
    /// Random-instance checks of the counting and DDWB inequalities.
    #[command(args_override_self = true)]
    LemmaSuite(experiments::LemmaArgs),
}

fn load_cnf(path: &Path, map: Option<&Path>) -> Result<Cnf> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cnf = parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
    let sidecar = path.with_extension("map");
    let map = match map {
        Some(m) => Some(m.to_path_buf()),
        None => sidecar.exists().then_some(sidecar),
    };
    if let Some(m) = map {
        let text = fs::read_to_string(&m).with_context(|| format!("reading {}", m.display()))?;
        parse_name_map(&mut cnf, &text).with_context(|| format!("parsing {}", m.display()))?;
    }
    Ok(cnf)
}

pub fn parse_heuristic(spec: &str) -> Result<Heuristic> {
    Ok(match spec {
        "natural" => Heuristic::Natural,
        "degree" => Heuristic::Degree,
        "roles" => Heuristic::RoleBlocks,
        s if s.starts_with('@') => {
            let text = fs::read_to_string(&s[1..]).with_context(|| format!("reading order file {}", &s[1..]))?;
            obddlab::solver::parse_order_text(&text)
        }
        s => bail!("unknown order {s:?} (natural, degree, roles or @file)"),
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Gen { family, param, out_dir } => {
            let cnf = family.generate(param)?;
            fs::create_dir_all(&out_dir)?;
            let base = out_dir.join(format!("{}_{param}", family.name()));
            let (c, m) = (base.with_extension("cnf"), base.with_extension("map"));
            fs::write(&c, write_dimacs(&cnf))?;
            fs::write(&m, write_name_map(&cnf))?;
            println!("{}\n{}", c.display(), m.display());
            Ok(0)
        }
        Cmd::Solve { cnf, map, order, emit_proof, node_cap, no_timing } => {
            let cnf = load_cnf(&cnf, map.as_deref())?;
            let order = choose_order(&cnf, &parse_heuristic(&order)?)?;
            let cap = node_cap.unwrap_or_else(node_cap_from_env);
            let out = solve(&cnf, &order, &bucket_schedule(&cnf, &order), cap)?;
            let (name, code) = match out.status {
                Status::Sat => ("SAT", 10),
                Status::Unsat => ("UNSAT", 20),
                Status::Budget => ("BUDGET", 30),
            };
            let seconds = if no_timing { 0.0 } else { out.seconds };
            println!(
                "status={name} lines={} proof_size={} peak_nodes={} seconds={seconds:.3}",
                out.derivation.lines.len(),
                out.proof_size,
                out.peak_nodes
            );
            if let Some(p) = emit_proof {
                fs::write(&p, write_log(&out.derivation)).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(code)
        }
        Cmd::Check { cnf, map, proof, derivation } => {
            let cnf = load_cnf(&cnf, map.as_deref())?;
            let text = fs::read_to_string(&proof).with_context(|| format!("reading {}", proof.display()))?;
            let d = parse_log(&text)?;
            let v = if derivation { check_derivation(&cnf, &d) } else { check_refutation(&cnf, &d) };
            println!("{v}");
            Ok(if v.ok { 0 } else { 1 })
        }
        Cmd::BenchGrowth(a) => bench::run(a).map(|_| 0),
        Cmd::Density(a) => experiments::density(a).map(|_| 0),
        Cmd::ReduceSim(a) => experiments::reduce(a).map(|_| 0),
        Cmd::LemmaSuite(a) => experiments::lemmas(a).map(|_| 0),
    }
}

/// Runs one command line (program name first) and returns the exit code.
/// Errors are printed to stderr.
pub fn run_args(args: Vec<OsString>) -> u8 {
    let args = match config::expand_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
