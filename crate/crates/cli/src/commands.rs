use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use tmsep::criteria::{ppt_rank_sufficient, three_qubit_sym_nsc, two_qubit_four_atom_decomposition, two_qubit_sym_nsc};
use tmsep::hierarchy::{
    build_relaxation, decomposition_to_states, mixture_of, run_hierarchy, verify_decomposition, Decomposition,
    Diagnostics, HierarchyOptions, SeparabilityCertificate, Verdict,
};
use tmsep::linalg::cmax_abs;
use tmsep::sdp::verify_infeasibility_certificate;

use crate::input::{load, Problem};
use crate::{Format, RunArgs, WitnessArgs};

pub fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Separable => 0,
        Verdict::Entangled => 2,
        Verdict::Inconclusive => 3,
    }
}

fn emit(args: &RunArgs, json: &impl Serialize, human: &str) -> Result<()> {
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(json)?,
        Format::Human => human.to_string(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => writeln!(std::io::stdout(), "{text}")?,
    }
    Ok(())
}

fn options(args: &RunArgs) -> HierarchyOptions {
    HierarchyOptions {
        k_max: args.kmax,
        objectives_per_order: args.objectives.max(1),
        seed: args.input.seed,
        verify_tol: args.tol,
        ..Default::default()
    }
}

/// Outcome of the closed-form criteria, when one applies.
struct Shortcut {
    criterion: &'static str,
    verdict: Verdict,
    decomposition: Option<Decomposition>,
}

fn shortcut_for(p: &Problem) -> Result<Option<Shortcut>> {
    if !p.is_full() {
        return Ok(None);
    }
    match p.symmetric_qubits() {
        Some(2) => {
            let sep = two_qubit_sym_nsc(&p.tms)?;
            let decomposition = if sep { Some(two_qubit_four_atom_decomposition(&p.tms)?) } else { None };
            Ok(Some(Shortcut {
                criterion: "two-qubit symmetric NSC",
                verdict: if sep { Verdict::Separable } else { Verdict::Entangled },
                decomposition,
            }))
        }
        Some(3) => {
            let sep = three_qubit_sym_nsc(&p.tms)?;
            Ok(Some(Shortcut {
                criterion: "three-qubit symmetric NSC",
                verdict: if sep { Verdict::Separable } else { Verdict::Entangled },
                decomposition: None,
            }))
        }
        Some(_) => match &p.state {
            Some(rho) => Ok(ppt_rank_sufficient(rho)?.map(|verdict| Shortcut {
                criterion: "PPT with rank at most N",
                verdict,
                decomposition: None,
            })),
            None => Ok(None),
        },
        None => Ok(None),
    }
}

/// Shortcuts first; the hierarchy supplies witnesses and decompositions the
/// closed forms do not produce.
fn certify_problem(p: &Problem, args: &RunArgs) -> Result<SeparabilityCertificate> {
    let opts = options(args);
    let shortcut = if args.no_shortcut { None } else { shortcut_for(p)? };
    let Some(sc) = shortcut else {
        let mut cert = run_hierarchy(&p.tms, &p.k_set, &opts)?;
        cert.diagnostics.notes.extend(p.notes.iter().cloned());
        return Ok(cert);
    };
    let mut notes = p.notes.clone();
    notes.push(format!("{}: {:?}", sc.criterion, sc.verdict));
    if let Some(dec) = sc.decomposition {
        let (ok, err) = verify_decomposition(&dec, &p.tms, &p.k_set, args.tol);
        if ok {
            let dec = match &p.spec {
                Some(s) => dec.with_partition(s.clone()),
                None => dec,
            };
            return Ok(SeparabilityCertificate {
                verdict: Verdict::Separable,
                order: None,
                witness: None,
                decomposition: Some(dec),
                diagnostics: Diagnostics {
                    rank: None,
                    reconstruction_error: Some(err),
                    notes,
                    ..Default::default()
                },
            });
        }
        notes.push(format!("closed-form decomposition rejected (error {err:.2e})"));
    }
    let mut cert = run_hierarchy(&p.tms, &p.k_set, &opts)?;
    if cert.verdict != sc.verdict {
        if cert.verdict == Verdict::Inconclusive {
            notes.push(format!("hierarchy inconclusive; verdict from {}", sc.criterion));
            cert.verdict = sc.verdict;
        } else {
            notes.push(format!("hierarchy reports {:?}, which disagrees with {}", cert.verdict, sc.criterion));
        }
    }
    cert.diagnostics.notes.splice(0..0, notes);
    Ok(cert)
}

fn human_certificate(cert: &SeparabilityCertificate) -> String {
    let mut lines = vec![format!("verdict: {:?}", cert.verdict)];
    if let Some(k) = cert.order {
        lines.push(format!("order: {k}"));
    }
    if cert.witness.is_some() {
        lines.push("witness: verified infeasibility certificate".into());
    }
    if let Some(dec) = &cert.decomposition {
        lines.push(format!("atoms: {}", dec.len()));
        for a in &dec.atoms {
            let pt: Vec<String> = a.point.iter().map(|x| format!("{x:+.6}")).collect();
            lines.push(format!("  w = {:.6}  x = ({})", a.weight, pt.join(", ")));
        }
    }
    if let Some(e) = cert.diagnostics.reconstruction_error {
        lines.push(format!("reconstruction error: {e:.3e}"));
    }
    for n in &cert.diagnostics.notes {
        lines.push(format!("note: {n}"));
    }
    lines.join("\n")
}

pub fn certify(args: &RunArgs) -> Result<u8> {
    let p = load(&args.input)?;
    let cert = certify_problem(&p, args)?;
    emit(args, &cert, &human_certificate(&cert))?;
    Ok(exit_code(cert.verdict))
}

pub fn decompose(args: &RunArgs) -> Result<u8> {
    let p = load(&args.input)?;
    let cert = certify_problem(&p, args)?;
    let Some(dec) = cert.decomposition.clone() else {
        let msg = format!("no decomposition: verdict {:?}", cert.verdict);
        emit(args, &json!({ "verdict": cert.verdict, "atoms": null, "message": msg }), &msg)?;
        return Ok(exit_code(cert.verdict));
    };
    let (_, err) = verify_decomposition(&dec, &p.tms, &p.k_set, args.tol);
    let mut atoms = Vec::new();
    let mut state_error = None;
    if let Some(spec) = &p.spec {
        let terms = decomposition_to_states(&dec, spec)?;
        if let (Some(rho), Ok(mix)) = (&p.state, mixture_of(&terms)) {
            state_error = Some(cmax_abs(&(mix.matrix() - rho.matrix())));
        }
        for (a, t) in dec.atoms.iter().zip(&terms) {
            atoms.push(json!({ "w": a.weight, "point": a.point, "locals": t.locals, "projected": t.projected }));
        }
    } else {
        for a in &dec.atoms {
            atoms.push(json!({ "w": a.weight, "point": a.point }));
        }
    }
    let out = json!({
        "verdict": cert.verdict,
        "order": cert.order,
        "atoms": atoms,
        "reconstruction_error": err,
        "state_error": state_error,
        "notes": cert.diagnostics.notes,
    });
    let mut human = human_certificate(&cert);
    if let Some(e) = state_error {
        human.push_str(&format!("\nstate reconstruction error: {e:.3e}"));
    }
    emit(args, &out, &human)?;
    Ok(exit_code(cert.verdict))
}

pub fn shortcut(args: &RunArgs) -> Result<u8> {
    let p = load(&args.input)?;
    let (criterion, verdict) = match shortcut_for(&p)? {
        Some(s) => (Some(s.criterion), s.verdict),
        None => (None, Verdict::Inconclusive),
    };
    let human = match criterion {
        Some(c) => format!("{c}: {verdict:?}"),
        None => "no closed-form criterion applies".to_string(),
    };
    emit(args, &json!({ "criterion": criterion, "verdict": verdict }), &human)?;
    Ok(exit_code(verdict))
}

pub fn witness_verify(args: &WitnessArgs) -> Result<u8> {
    let p = load(&args.input)?;
    let text = std::fs::read_to_string(&args.certificate)
        .with_context(|| format!("reading {}", args.certificate.display()))?;
    let cert: SeparabilityCertificate = serde_json::from_str(&text).context("parsing certificate")?;
    let Some(w) = cert.witness else {
        bail!("certificate carries no witness");
    };
    let relax = build_relaxation(&p.tms, &p.k_set, w.order, None)?;
    if verify_infeasibility_certificate(&relax.problem, &w.certificate)? {
        println!("witness valid at order {}", w.order);
        Ok(0)
    } else {
        println!("witness invalid");
        Ok(1)
    }
}
