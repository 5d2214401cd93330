use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde_json::Value;
use tmsep::quantum::{
    dicke_state, state_to_tensor, symmetric_projector, DensityMatrix, PartitionSpec, StateTensor,
};
use tmsep::randgen::{
    default_mixture_size, haar_random_state, haar_random_symmetric, random_product_state,
    random_separable_symmetric, rng_from_seed,
};
use tmsep::semialgebraic::{for_partition, unit_sphere, SemialgebraicSet};
use tmsep::tms::{tensor_to_tms, MultiIndex, Tms};

use crate::InputArgs;

/// Moment data together with the set K it must live on.
/// The state and partition are kept when the input provides them.
pub struct Problem {
    pub tms: Tms,
    pub k_set: SemialgebraicSet,
    pub spec: Option<PartitionSpec>,
    pub state: Option<DensityMatrix>,
    pub notes: Vec<String>,
}

impl Problem {
    /// Symmetric qubit count when the partition is a single symmetric qubit class.
    pub fn symmetric_qubits(&self) -> Option<usize> {
        self.spec
            .as_ref()
            .filter(|s| s.is_symmetric_qubits())
            .map(|s| s.num_parties())
    }

    /// True when no moment has been removed by a partial-knowledge pattern.
    pub fn is_full(&self) -> bool {
        self.tms.is_full()
    }
}

enum Source {
    State(DensityMatrix),
    Tensor(StateTensor),
    Moments(Tms),
}

pub fn load(args: &InputArgs) -> Result<Problem> {
    let (source, generated_spec) = match (&args.input, &args.gen) {
        (Some(path), None) => (read_source(path)?, None),
        (None, Some(spec)) => generate(spec, args)?,
        (Some(_), Some(_)) => bail!("give either --input or --gen, not both"),
        (None, None) => bail!("no input: give --input PATH or --gen SPEC"),
    };
    let explicit_spec = partition_from_args(args, &source)?;
    let mut notes = Vec::new();
    let (tms, spec, state) = match source {
        Source::State(rho) => {
            let spec = explicit_spec
                .or(generated_spec)
                .map(Ok)
                .unwrap_or_else(|| default_spec(rho.dims().to_vec(), args))?;
            let conv = state_to_tensor(&rho, &spec)?;
            if conv.projected {
                notes.push("input projected onto the symmetric subspace".to_string());
                eprintln!("warning: input state is not symmetric; projected onto the symmetric subspace");
            }
            (tensor_to_tms(&conv.tensor)?, Some(spec), Some(rho))
        }
        Source::Tensor(x) => {
            let spec = explicit_spec.unwrap_or_else(|| x.partition().clone());
            (tensor_to_tms(&x)?, Some(spec), None)
        }
        Source::Moments(y) => (y, explicit_spec, None),
    };
    let k_set = match &spec {
        Some(s) => for_partition(s)?,
        None if tms.nvars() == 3 => unit_sphere(),
        None => bail!(
            "moment input with n = {} needs --partition or --symmetric to define K",
            tms.nvars()
        ),
    };
    if k_set.nvars() != tms.nvars() {
        bail!("moments have n = {} but the partition has {} variables", tms.nvars(), k_set.nvars());
    }
    let tms = match &args.partial {
        Some(pattern) => {
            notes.push(format!("partial knowledge: {pattern}"));
            restrict(&tms, pattern, spec.as_ref())?
        }
        None => tms,
    };
    Ok(Problem {
        tms,
        k_set,
        spec,
        state,
        notes,
    })
}

fn read_source(path: &Path) -> Result<Source> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    source_from_json(value).with_context(|| format!("interpreting {}", path.display()))
}

fn source_from_json(value: Value) -> Result<Source> {
    if value.get("re").is_some() {
        Ok(Source::State(serde_json::from_value(value)?))
    } else if value.get("coords").is_some() {
        Ok(Source::Tensor(serde_json::from_value(value)?))
    } else if value.get("moments").is_some() {
        Ok(Source::Moments(serde_json::from_value(value)?))
    } else {
        bail!("expected a density matrix (dims/re/im), a tensor (partition/coords) or a tms (n/degree/moments)")
    }
}

fn parse_json_or_file(text: &str) -> Result<Value> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(serde_json::from_str(text)?)
    } else {
        let body = std::fs::read_to_string(text).with_context(|| format!("reading {text}"))?;
        Ok(serde_json::from_str(&body)?)
    }
}

fn purity(args: &InputArgs, dims: &[usize]) -> bool {
    if args.mixed {
        false
    } else if args.pure {
        true
    } else {
        dims.iter().all(|&d| d == 2)
    }
}

fn default_spec(dims: Vec<usize>, args: &InputArgs) -> Result<PartitionSpec> {
    let pure = purity(args, &dims);
    Ok(PartitionSpec::independent(dims, pure)?)
}

fn partition_from_args(args: &InputArgs, source: &Source) -> Result<Option<PartitionSpec>> {
    if let Some(text) = &args.partition {
        let spec: PartitionSpec = serde_json::from_value(parse_json_or_file(text)?).context("parsing --partition")?;
        return Ok(Some(spec));
    }
    if let Some(n) = args.symmetric {
        return Ok(Some(PartitionSpec::symmetric_qubits(n, purity(args, &[2]))?));
    }
    if let Source::Tensor(x) = source {
        if args.pure || args.mixed {
            let p = x.partition();
            let flags = vec![args.pure; p.symmetry_classes().len()];
            let spec = PartitionSpec::new(
                p.parties().to_vec(),
                p.symmetry_classes().to_vec(),
                flags,
                p.known_support().map(|s| s.to_vec()),
            )?;
            return Ok(Some(spec));
        }
    }
    Ok(None)
}

/// Keep only the moments selected by `pattern`: `local` (single-party
/// moments), `degree:K` (|α| ≤ K) or a JSON list of exponent vectors.
fn restrict(y: &Tms, pattern: &str, spec: Option<&PartitionSpec>) -> Result<Tms> {
    if pattern == "local" {
        let blocks: Vec<(usize, usize)> = match spec {
            Some(s) if !s.is_symmetric_qubits() => (0..s.symmetry_classes().len())
                .map(|c| (s.class_offset(c), s.class_t(c)))
                .collect(),
            _ => vec![],
        };
        if blocks.is_empty() {
            return Ok(y.restricted(|a| a.degree() <= 1));
        }
        return Ok(y.restricted(|a| {
            let e = a.exponents();
            blocks
                .iter()
                .filter(|&&(off, t)| e[off..off + t].iter().any(|&v| v > 0))
                .count()
                <= 1
        }));
    }
    if let Some(k) = pattern.strip_prefix("degree:") {
        let k: u32 = k.parse().context("degree in --partial degree:K")?;
        return Ok(y.restricted(|a| a.degree() <= k));
    }
    let list: Vec<Vec<u32>> = serde_json::from_value(parse_json_or_file(pattern)?)
        .context("--partial expects `local`, `degree:K`, or a JSON list of exponent vectors")?;
    let keep: Vec<MultiIndex> = list.into_iter().map(MultiIndex::new).collect();
    if !keep.iter().any(|a| a.is_zero()) {
        bail!("--partial must keep the zeroth moment");
    }
    Ok(y.restricted(|a| keep.contains(a)))
}

fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|d| d.parse::<usize>().map_err(|_| anyhow!("bad dimension list {s:?}")))
        .collect()
}

/// Generator specs:
/// `dicke:N:K`, `coherent:N`, `projector:N`, `haar-sym:N[:RANK]`,
/// `sep-sym:N[:M]`, `haar:D1xD2..[:RANK]`, `product:D1xD2..`.
fn generate(text: &str, args: &InputArgs) -> Result<(Source, Option<PartitionSpec>)> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .ok_or_else(|| anyhow!("generator {text:?} is missing field {i}"))?
            .parse::<usize>()
            .map_err(|_| anyhow!("generator {text:?}: field {i} is not an integer"))
    };
    let opt = |i: usize| -> Result<Option<usize>> { if parts.len() > i { num(i).map(Some) } else { Ok(None) } };
    let mut rng = rng_from_seed(args.seed);
    let sym = |n: usize| PartitionSpec::symmetric_qubits(n, purity(args, &[2]));
    let (rho, spec) = match parts[0] {
        "dicke" => {
            let n = num(1)?;
            (DensityMatrix::pure(&dicke_state(n, num(2)?)?, vec![2; n])?, Some(sym(n)?))
        }
        "coherent" => {
            let n = num(1)?;
            (DensityMatrix::pure(&dicke_state(n, n)?, vec![2; n])?, Some(sym(n)?))
        }
        "projector" => {
            let n = num(1)?;
            let p = symmetric_projector(n)? / Complex64::new((n + 1) as f64, 0.0);
            (DensityMatrix::new(p, vec![2; n])?, Some(sym(n)?))
        }
        "haar-sym" => {
            let n = num(1)?;
            let rank = opt(2)?.unwrap_or(n + 1);
            (haar_random_symmetric(n, rank, &mut rng)?, Some(sym(n)?))
        }
        "sep-sym" => {
            let n = num(1)?;
            let m = opt(2)?.unwrap_or(default_mixture_size(n));
            (random_separable_symmetric(n, m, &mut rng)?, Some(sym(n)?))
        }
        "haar" => {
            let dims = parse_dims(parts.get(1).ok_or_else(|| anyhow!("haar needs dimensions"))?)?;
            let full: usize = dims.iter().product();
            let rank = opt(2)?.unwrap_or(full);
            (haar_random_state(&dims, rank, &mut rng)?, None)
        }
        "product" => {
            let dims = parse_dims(parts.get(1).ok_or_else(|| anyhow!("product needs dimensions"))?)?;
            let spec = default_spec(dims, args)?;
            (random_product_state(&spec, &mut rng)?, Some(spec))
        }
        other => bail!("unknown generator {other:?}"),
    };
    Ok((Source::State(rho), spec))
}
