use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use tmsep::hierarchy::{run_hierarchy, HierarchyOptions, Verdict};
use tmsep::quantum::{ppt_check, DensityMatrix, PartitionSpec};
use tmsep::randgen::{default_mixture_size, haar_random_symmetric, random_separable_symmetric, rng_from_seed};
use tmsep::semialgebraic::for_partition;
use tmsep::tms::state_to_tms;

use crate::Format;

#[derive(Args, Clone)]
pub struct BenchArgs {
    /// Qubit counts to run, e.g. 2,3,4.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub n: Vec<usize>,
    /// Haar-random symmetric states per N.
    #[arg(long, default_value_t = 20)]
    pub haar: usize,
    /// Random separable symmetric mixtures per N.
    #[arg(long, default_value_t = 20)]
    pub separable: usize,
    /// Separable samples per N for the minimal-rank search (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub min_r: usize,
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long, default_value_t = 6)]
    pub objectives: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Serialize)]
struct Run {
    verdict: Verdict,
    order: Option<u32>,
    rank: Option<usize>,
    seconds: f64,
    ppt: bool,
}

#[derive(Serialize)]
struct Row {
    n: usize,
    kind: &'static str,
    samples: usize,
    entangled: usize,
    separable: usize,
    inconclusive: usize,
    /// Verdicts that contradict the partial-transpose test where it is exact (N ≤ 3).
    ppt_disagreements: Option<usize>,
    orders: BTreeMap<u32, usize>,
    min_r: Option<usize>,
    min_r_count: usize,
    mean_seconds: f64,
    max_seconds: f64,
}

fn sample_state(kind: &str, n: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = rng_from_seed(seed);
    Ok(match kind {
        "haar" => haar_random_symmetric(n, n + 1, &mut rng)?,
        _ => random_separable_symmetric(n, default_mixture_size(n), &mut rng)?,
    })
}

fn run_batch(args: &BenchArgs, n: usize, kind: &'static str, samples: usize) -> Result<Row> {
    let spec = PartitionSpec::symmetric_qubits(n, true)?;
    let k_set = for_partition(&spec)?;
    let base = args.seed ^ ((n as u64) << 32) ^ (kind.len() as u64) << 48;
    let runs: Vec<Run> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Run> {
            let seed = base.wrapping_add(i as u64);
            let rho = sample_state(kind, n, seed)?;
            let y = state_to_tms(&rho, &spec)?;
            let opts = HierarchyOptions {
                k_max: args.kmax,
                objectives_per_order: args.objectives.max(1),
                seed,
                ..Default::default()
            };
            let start = Instant::now();
            let cert = run_hierarchy(&y, &k_set, &opts)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(Run {
                verdict: cert.verdict,
                order: cert.order,
                rank: cert.decomposition.as_ref().map(|d| d.len()),
                seconds,
                ppt: ppt_check(&rho, &[0])?.0,
            })
        })
        .collect::<Result<_>>()?;
    let count = |v: Verdict| runs.iter().filter(|r| r.verdict == v).count();
    let mut orders = BTreeMap::new();
    for k in runs.iter().filter_map(|r| r.order) {
        *orders.entry(k).or_insert(0) += 1;
    }
    let min_r = runs.iter().filter_map(|r| r.rank).min();
    let disagreements = runs
        .iter()
        .filter(|r| r.verdict != Verdict::Inconclusive && (r.verdict == Verdict::Separable) != r.ppt)
        .count();
    Ok(Row {
        n,
        kind,
        samples,
        entangled: count(Verdict::Entangled),
        separable: count(Verdict::Separable),
        inconclusive: count(Verdict::Inconclusive),
        ppt_disagreements: (n <= 3).then_some(disagreements),
        orders,
        min_r,
        min_r_count: runs.iter().filter(|r| r.rank.is_some() && r.rank == min_r).count(),
        mean_seconds: runs.iter().map(|r| r.seconds).sum::<f64>() / samples.max(1) as f64,
        max_seconds: runs.iter().map(|r| r.seconds).fold(0.0, f64::max),
    })
}

fn human(rows: &[Row]) -> String {
    let mut out = vec![format!(
        "{:>3} {:<10} {:>7} {:>5} {:>5} {:>5} {:>6} {:>9} {:>10} {:>10}",
        "N", "kind", "samples", "ent", "sep", "inc", "min r", "#min r", "mean s", "max s"
    )];
    for r in rows {
        out.push(format!(
            "{:>3} {:<10} {:>7} {:>5} {:>5} {:>5} {:>6} {:>9} {:>10.4} {:>10.4}",
            r.n,
            r.kind,
            r.samples,
            r.entangled,
            r.separable,
            r.inconclusive,
            r.min_r.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
            r.min_r_count,
            r.mean_seconds,
            r.max_seconds
        ));
    }
    out.join("\n")
}

pub fn run(args: &BenchArgs) -> Result<u8> {
    let mut rows = Vec::new();
    for &n in &args.n {
        for (kind, samples) in [("haar", args.haar), ("separable", args.separable), ("min-r", args.min_r)] {
            if samples > 0 {
                rows.push(run_batch(args, n, kind, samples)?);
            }
        }
    }
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows)?,
        Format::Human => human(&rows),
    };
    match &args.out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(0)
}
