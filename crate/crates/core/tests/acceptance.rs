//! End-to-end acceptance run. Each criterion prints one PASS or FAIL line;
//! the process exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use tmsep::criteria::*;
use tmsep::hierarchy::*;
use tmsep::linalg::is_psd;
use tmsep::quantum::*;
use tmsep::randgen::*;
use tmsep::sdp::verify_infeasibility_certificate;
use tmsep::semialgebraic::*;
use tmsep::tms::*;

type Outcome = Result<String, String>;

fn sym(n: usize) -> (PartitionSpec, SemialgebraicSet) {
    let spec = PartitionSpec::symmetric_qubits(n, true).unwrap();
    let k = for_partition(&spec).unwrap();
    (spec, k)
}

fn opts(seed: u64) -> HierarchyOptions {
    HierarchyOptions { seed, ..Default::default() }
}

fn on_sphere(p: &[f64], tol: f64) -> bool {
    (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= tol
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {:.2}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()))
    }
}

fn nsc_ppt_hierarchy_agree() -> Outcome {
    let (spec, k) = sym(2);
    let mut rng = rng_from_seed(1001);
    let start = Instant::now();
    let mut entangled = 0;
    for i in 0..200 {
        let rho = haar_random_symmetric(2, 3, &mut rng).unwrap();
        let y = state_to_tms(&rho, &spec).unwrap();
        let nsc = two_qubit_sym_nsc(&y).unwrap();
        let (ppt, _) = ppt_check(&rho, &[0]).unwrap();
        let cert = run_hierarchy(&y, &k, &opts(i)).unwrap();
        let expected = if nsc { Verdict::Separable } else { Verdict::Entangled };
        if nsc != ppt || cert.verdict != expected {
            return Err(format!("instance {i}: nsc {nsc}, ppt {ppt}, hierarchy {:?}", cert.verdict));
        }
        entangled += usize::from(!nsc);
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!("200/200 agree ({entangled} entangled) in {:.2}s", start.elapsed().as_secs_f64()))
}

fn dicke_certificates() -> Outcome {
    let mut parts = Vec::new();
    for n in 2..=4 {
        let (spec, k) = sym(n);
        let rho = DensityMatrix::pure(&dicke_state(n, 1).unwrap(), vec![2; n]).unwrap();
        let y = state_to_tms(&rho, &spec).unwrap();
        let start = Instant::now();
        let cert = run_hierarchy(&y, &k, &opts(0)).unwrap();
        let elapsed = start.elapsed();
        within(Duration::from_secs(10), elapsed)?;
        let k0 = k0_of(&y);
        let witness = cert.witness.ok_or(format!("N={n}: verdict {:?}, no witness", cert.verdict))?;
        if cert.verdict != Verdict::Entangled || witness.order != k0 {
            return Err(format!("N={n}: {:?} at order {}", cert.verdict, witness.order));
        }
        let relax = build_relaxation(&y, &k, k0, None).unwrap();
        if !verify_infeasibility_certificate(&relax.problem, &witness.certificate).unwrap() {
            return Err(format!("N={n}: witness does not verify"));
        }
        parts.push(format!("N={n} k={k0} {:.2}s", elapsed.as_secs_f64()));
    }
    Ok(parts.join(", "))
}

fn separable_recovery() -> Outcome {
    let mut parts = Vec::new();
    for n in 2..=4 {
        let (spec, k) = sym(n);
        let mut rng = rng_from_seed(3000 + n as u64);
        let mut good = 0;
        for i in 0..50 {
            let rho = random_separable_symmetric(n, default_mixture_size(n), &mut rng).unwrap();
            let y = state_to_tms(&rho, &spec).unwrap();
            let cert = run_hierarchy(&y, &k, &opts(i)).unwrap();
            if cert.verdict == Verdict::Entangled {
                return Err(format!("N={n} instance {i}: separable state reported ENTANGLED"));
            }
            let Some(dec) = cert.decomposition else { continue };
            let (ok, err) = verify_decomposition(&dec, &y, &k, 1e-6);
            if ok && err <= 1e-6 && dec.atoms.iter().all(|a| on_sphere(&a.point, 1e-6)) {
                good += 1;
            }
        }
        if good < 48 {
            return Err(format!("N={n}: only {good}/50 recovered"));
        }
        parts.push(format!("N={n} {good}/50"));
    }
    Ok(parts.join(", "))
}

fn four_atom_decompositions() -> Outcome {
    let (spec, _) = sym(2);
    let mut rng = rng_from_seed(4004);
    let states: Vec<Tms> = (0..500)
        .map(|_| {
            let rho = random_separable_symmetric(2, default_mixture_size(2), &mut rng).unwrap();
            state_to_tms(&rho, &spec).unwrap()
        })
        .collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (i, y) in states.iter().enumerate() {
        let dec = two_qubit_four_atom_decomposition(y).map_err(|e| format!("instance {i}: {e}"))?;
        if dec.len() > 4 || !dec.atoms.iter().all(|a| on_sphere(&a.point, 1e-8)) {
            return Err(format!("instance {i}: {} atoms or atom off the sphere", dec.len()));
        }
        let m1 = moment_matrix(y, 1).unwrap().entries;
        let rebuilt = moment_matrix(&Tms::from_atoms(3, 2, &dec.as_pairs()), 1).unwrap().entries;
        worst = worst.max((m1 - rebuilt).amax());
    }
    within(Duration::from_secs(10), start.elapsed())?;
    if worst > 1e-8 {
        return Err(format!("M_1 reconstruction error {worst:.2e}"));
    }
    Ok(format!("500 states, max M_1 error {worst:.1e}, {:.3}s", start.elapsed().as_secs_f64()))
}

fn min_rank(n: usize, samples: usize, seed: u64) -> Result<usize, String> {
    let (spec, k) = sym(n);
    let mut rng = rng_from_seed(seed);
    let mut best = usize::MAX;
    for i in 0..samples {
        let rho = random_separable_symmetric(n, default_mixture_size(n), &mut rng).unwrap();
        let y = state_to_tms(&rho, &spec).unwrap();
        let cert = run_hierarchy(&y, &k, &opts(i as u64)).unwrap();
        if let Some(dec) = cert.decomposition {
            best = best.min(dec.len());
        }
    }
    Ok(best)
}

fn min_rank_search() -> Outcome {
    let r2 = min_rank(2, 2000, 5002)?;
    let r3 = min_rank(3, 500, 5003)?;
    let msg = format!("N=2 min r {r2} (want 4), N=3 min r {r3} (want ≤ 6)");
    if r2 == 4 && r3 <= 6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn three_qubit_nsc_equals_ppt() -> Outcome {
    let (spec, _) = sym(3);
    let mut rng = rng_from_seed(6006);
    let mut npt = 0;
    for i in 0..300 {
        let rho = if i % 2 == 0 {
            haar_random_symmetric(3, 1 + (i / 2) % 4, &mut rng).unwrap()
        } else {
            random_separable_symmetric(3, 1 + (i / 2) % default_mixture_size(3), &mut rng).unwrap()
        };
        let nsc = three_qubit_sym_nsc(&state_to_tms(&rho, &spec).unwrap()).unwrap();
        let (ppt, _) = ppt_check(&rho, &[0]).unwrap();
        if nsc != ppt {
            return Err(format!("instance {i}: nsc {nsc}, ppt {ppt}"));
        }
        npt += usize::from(!ppt);
    }
    Ok(format!("300/300 agree ({npt} NPT)"))
}

fn moments_psd_iff_ppt() -> Outcome {
    let mut rng = rng_from_seed(7007);
    let mut counts = [0usize; 2];
    for i in 0..200 {
        let n = if i < 100 { 2 } else { 4 };
        let rho = if i % 4 == 3 {
            random_separable_symmetric(n, default_mixture_size(n), &mut rng).unwrap()
        } else {
            haar_random_symmetric(n, 1 + i % (n + 1), &mut rng).unwrap()
        };
        let x = state_to_tensor(&rho, &sym(n).0).unwrap().tensor;
        let (moments, ppt) = moment_ppt_equivalence(&x).unwrap();
        if moments != ppt {
            return Err(format!("instance {i} (N={n}): moments {moments}, ppt {ppt}"));
        }
        counts[usize::from(ppt)] += 1;
    }
    Ok(format!("200/200 agree ({} PSD, {} not)", counts[1], counts[0]))
}

fn atomic_measure_positivity() -> Outcome {
    let mut rng = rng_from_seed(8008);
    let sphere = unit_sphere();
    let g = &sphere.constraints()[0].poly;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let r = rng.random_range(1..=10);
        let atoms: Vec<(f64, Vec<f64>)> = dirichlet_weights(r, &mut rng)
            .into_iter()
            .map(|w| (w, random_bloch_vector(&mut rng).to_vec()))
            .collect();
        let z = Tms::from_atoms(3, 6, &atoms);
        for k in 1..=3 {
            if !is_psd(&moment_matrix(&z, k).unwrap().entries) {
                return Err(format!("measure {i}: M_{k} not PSD"));
            }
            worst = worst.max(localizing_matrix(g, &z, k).unwrap().entries.amax());
        }
    }
    if worst > 1e-10 {
        return Err(format!("sphere localizer entry {worst:.2e}"));
    }
    Ok(format!("1000 measures, max localizer entry {worst:.1e}"))
}

fn extraction_oracle() -> Outcome {
    let mut rng = rng_from_seed(9009);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let r = 1 + i % 6;
        let atoms: Vec<(f64, Vec<f64>)> = dirichlet_weights(r, &mut rng)
            .into_iter()
            .map(|w| (w, random_bloch_vector(&mut rng).to_vec()))
            .collect();
        let z = Tms::from_atoms(3, 6, &atoms);
        let dec = extract_atoms(&z, 3, 1e-8, &mut rng).map_err(|e| format!("instance {i}: {e}"))?;
        if dec.len() != r {
            return Err(format!("instance {i}: {} atoms, expected {r}", dec.len()));
        }
        let mut used = vec![false; r];
        for (w, p) in &atoms {
            let (j, d) = dec
                .atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, a)| (j, a.point.iter().zip(p).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[j] = true;
            worst = worst.max(d).max((dec.atoms[j].weight - w).abs());
        }
    }
    if worst > 1e-6 {
        return Err(format!("max deviation {worst:.2e}"));
    }
    Ok(format!("200 measures, max deviation {worst:.1e}"))
}

fn partial_knowledge() -> Outcome {
    let mut rng = rng_from_seed(10010);
    let mut verdicts = [0usize; 3];
    for i in 0..100u64 {
        let (y, k) = if i < 60 {
            let n = 2 + (i % 2) as usize;
            let rho = match i % 5 {
                0 => DensityMatrix::pure(&dicke_state(n, 1).unwrap(), vec![2; n]).unwrap(),
                _ => haar_random_symmetric(n, 1 + (i as usize) % (n + 1), &mut rng).unwrap(),
            };
            let (spec, k) = sym(n);
            (state_to_tms(&rho, &spec).unwrap().restricted(|a| a.degree() <= 1), k)
        } else {
            let spec = PartitionSpec::independent(vec![2, 2], false).unwrap();
            let rho = if i % 4 == 0 {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                DensityMatrix::pure(&[s, 0.0, 0.0, s].map(|v| Complex64::new(v, 0.0)), vec![2, 2]).unwrap()
            } else {
                haar_random_state(&[2, 2], 1 + (i as usize) % 4, &mut rng).unwrap()
            };
            let y = state_to_tms(&rho, &spec).unwrap();
            let local = y.restricted(|a| a.exponents()[..3].iter().all(|&e| e == 0) || a.exponents()[3..].iter().all(|&e| e == 0));
            (local, for_partition(&spec).unwrap())
        };
        let cert = run_hierarchy(&y, &k, &opts(i)).unwrap();
        match cert.verdict {
            Verdict::Entangled => return Err(format!("instance {i}: ENTANGLED from local moments")),
            Verdict::Separable => verdicts[0] += 1,
            Verdict::Inconclusive => verdicts[1] += 1,
        }
    }
    Ok(format!("100 states: {} SEPARABLE, {} INCONCLUSIVE, 0 ENTANGLED", verdicts[0], verdicts[1]))
}

fn sdp_suite() -> Outcome {
    common::check_off_diagonal_example().map_err(|e| format!("off-diagonal example: {e}"))?;
    common::check_infeasible_example().map_err(|e| format!("infeasible example: {e}"))?;
    common::check_fixed_variable_example().map_err(|e| format!("fixed-variable example: {e}"))?;
    for seed in 0..100 {
        common::check_weak_duality(seed).map_err(|e| format!("weak duality, instance {seed}: {e}"))?;
        common::check_certificate_soundness(seed).map_err(|e| format!("soundness, instance {seed}: {e}"))?;
    }
    Ok("3 worked examples, 100 weak-duality and 100 soundness instances".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("two-qubit NSC, PPT and hierarchy agree", nsc_ppt_hierarchy_agree),
        ("Dicke states certified entangled at k0", dicke_certificates),
        ("separable states recovered", separable_recovery),
        ("four-atom decompositions", four_atom_decompositions),
        ("minimal rank search", min_rank_search),
        ("three-qubit NSC equals PPT", three_qubit_nsc_equals_ppt),
        ("moment positivity equals PPT", moments_psd_iff_ppt),
        ("atomic measures give PSD moments", atomic_measure_positivity),
        ("extraction recovers known atoms", extraction_oracle),
        ("local moments never entangled", partial_knowledge),
        ("SDP solver suite", sdp_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
