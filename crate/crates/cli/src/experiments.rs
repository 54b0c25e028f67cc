//! `density`, `reduce-sim` and `lemma-suite`.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use obddlab::reduction::density::EXACT_MAX_M;
use obddlab::reduction::ddwb::ddwb_check_suite;
use obddlab::reduction::lemmas::{convexity_suite, supersaturation_suite};
use obddlab::reduction::sim::ReductionError;
use obddlab::reduction::{
    density as density_of, density_profile, n_guard, run_reduction, BroadcastProtocol, DensityMode, Partition, SampleError,
    SetDisjInstance, MAX_M,
};

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad list entry {x:?}")))
        .collect()
}

fn writer(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// One generator per (purpose, m, index) so rows do not depend on each other.
fn stream(seed: u64, purpose: u64, m: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose << 56 | (m as u64) << 32 | k as u64);
    rng
}

fn load_partition(path: &PathBuf, m: usize) -> Result<Partition> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Partition::parse(m, &text)?)
}

fn check_ms(ms: &[usize]) -> Result<()> {
    for &m in ms {
        if m == 0 || m > MAX_M {
            bail!("m = {m} is outside 1..={MAX_M}");
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct DensityArgs {
    /// Comma-separated values of m.
    #[arg(long, default_value = "2")]
    m: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, required = true)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Probability that an edge variable goes to I and a vertex variable to II.
    #[arg(long, default_value_t = 0.5)]
    bias: f64,
    /// Use this partition (one m only) instead of random ones.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn density(a: DensityArgs) -> Result<()> {
    let seed = a.seed.expect("clap enforces --seed");
    let ms = parse_list(&a.m)?;
    check_ms(&ms)?;
    if !(0.0..=1.0).contains(&a.bias) {
        bail!("--bias must lie in [0, 1]");
    }
    if a.samples < 2 {
        bail!("--samples must be at least 2");
    }
    if a.partition.is_some() && ms.len() != 1 {
        bail!("--partition needs exactly one m");
    }
    let mut w = writer(&a.out)?;
    w.write_record([
        "m", "trial", "delta_exact", "delta_mc", "std_err", "z", "delta_used", "g_size", "g_bound", "g_ok",
    ])?;
    for &m in &ms {
        let trials = if a.partition.is_some() { 1 } else { a.trials };
        for t in 0..trials {
            let p = match &a.partition {
                Some(path) => load_partition(path, m)?,
                None => Partition::random(m, a.bias, &mut stream(seed, 1, m, t))?,
            };
            let mc = density_of(&p, DensityMode::MonteCarlo { samples: a.samples, seed: stream(seed, 2, m, t).gen() })?;
            let exact = (m <= EXACT_MAX_M).then(|| density_of(&p, DensityMode::Exact)).transpose()?;
            let prof = density_profile(&p);
            let (ex, z) = match exact {
                Some(d) => {
                    let z = if mc.std_err() > 0.0 { (mc.value() - d.value()) / mc.std_err() } else { 0.0 };
                    (format!("{:.9}", d.value()), format!("{z:.3}"))
                }
                None => (String::new(), String::new()),
            };
            let bound = prof.delta.value() / 12.0 * m as f64;
            w.write_record([
                m.to_string(),
                t.to_string(),
                ex,
                format!("{:.9}", mc.value()),
                format!("{:.9}", mc.std_err()),
                z,
                format!("{:.9}", prof.delta.value()),
                prof.g.len().to_string(),
                format!("{bound:.6}"),
                prof.delta.reaches(prof.g.len() as u64, 12, m as u64).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Args)]
pub struct ReduceArgs {
    /// Comma-separated values of m.
    #[arg(long, default_value = "6")]
    m: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, required = true)]
    seed: Option<u64>,
    /// Instance length; defaults to the guaranteed-unstuck length (at least 1).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated repetition counts.
    #[arg(long, default_value = "1")]
    reps: String,
    #[arg(long, default_value_t = 0.97)]
    bias: f64,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn reduce(a: ReduceArgs) -> Result<()> {
    let seed = a.seed.expect("clap enforces --seed");
    let ms = parse_list(&a.m)?;
    check_ms(&ms)?;
    let reps = parse_list(&a.reps)?;
    if !(0.0..=1.0).contains(&a.bias) {
        bail!("--bias must lie in [0, 1]");
    }
    if a.partition.is_some() && ms.len() != 1 {
        bail!("--partition needs exactly one m");
    }
    let mut w = writer(&a.out)?;
    w.write_record(["m", "n", "delta", "kind", "reps", "trials", "answered_1", "rate", "stuck", "bits_mean"])?;
    for &m in &ms {
        let p = match &a.partition {
            Some(path) => load_partition(path, m)?,
            None => Partition::random(m, a.bias, &mut stream(seed, 3, m, 0))?,
        };
        let prof = density_profile(&p);
        let n = match a.n {
            Some(n) => n,
            None => n_guard(&prof).context("no instance length is guaranteed for this partition")?.max(1),
        };
        if n + 1 > m {
            bail!("n = {n} needs m > n");
        }
        let proto = BroadcastProtocol::new(&p);
        for (kind, purpose) in [("disjoint", 4), ("intersecting", 5)] {
            for &r in &reps {
                let mut rng = stream(seed, purpose, m, r);
                let (mut ones, mut stuck, mut bits) = (0usize, 0usize, 0usize);
                for _ in 0..a.trials {
                    let mut inst = SetDisjInstance::random_disjoint(n, &mut rng);
                    if kind == "intersecting" {
                        let k = rng.gen_range(0..n);
                        inst.x[k] = true;
                        inst.y[k] = true;
                    }
                    match run_reduction(&prof, &proto, &inst, &mut rng, r) {
                        Ok(run) => {
                            ones += run.output as usize;
                            bits += run.bits;
                        }
                        Err(ReductionError::Sample(SampleError::Stuck { .. })) => stuck += 1,
                        Err(e) => return Err(e.into()),
                    }
                }
                let done = (a.trials - stuck).max(1);
                w.write_record([
                    m.to_string(),
                    n.to_string(),
                    format!("{:.6}", prof.delta.value()),
                    kind.to_string(),
                    r.to_string(),
                    a.trials.to_string(),
                    ones.to_string(),
                    format!("{:.6}", ones as f64 / done as f64),
                    stuck.to_string(),
                    format!("{:.1}", bits as f64 / done as f64),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Args)]
pub struct LemmaArgs {
    #[arg(long, required = true)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    convexity: usize,
    #[arg(long, default_value_t = 200)]
    supersaturation: usize,
    #[arg(long, default_value_t = 500)]
    ddwb: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn lemmas(a: LemmaArgs) -> Result<()> {
    let seed = a.seed.expect("clap enforces --seed");
    let mut w = writer(&a.out)?;
    w.write_record(["lemma", "instances", "failures", "min_slack"])?;
    let c = convexity_suite(a.convexity, &mut stream(seed, 6, 0, 0));
    let (star, bic) = supersaturation_suite(a.supersaturation, &mut stream(seed, 7, 0, 0));
    let d = ddwb_check_suite(a.ddwb, &mut stream(seed, 8, 0, 0));
    let rows = [
        ("convexity", c.instances, c.failures, c.min_slack),
        ("supersaturation-star", star.instances, star.failures, star.min_slack),
        ("supersaturation-biclique", bic.instances, bic.failures, bic.min_slack),
        ("ddwb-loss", d.loss_checks, d.loss_failures, d.min_loss_slack),
        ("ddwb-ratio", d.ratio_pairs, d.ratio_failures, 1.0 - d.worst_ratio),
    ];
    for (name, n, f, s) in rows {
        let s = if s.abs() < 5e-7 { 0.0 } else { s };
        w.write_record([name.to_string(), n.to_string(), f.to_string(), format!("{s:.6}")])?;
    }
    w.flush()?;
    Ok(())
}
