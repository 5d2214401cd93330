//! Moment relaxations of the separability problem, flat-extension
//! detection and atom extraction.

mod extraction;
mod relaxation;
mod run;

pub use extraction::{
    decomposition_to_states, extract_atoms, fit_weights, mixture_of, polish_decomposition,
    verify_decomposition, Atom, Decomposition, ProductTerm, WEIGHT_CLIP,
};
pub use relaxation::{build_relaxation, k0_of, random_sos_objective, Relaxation};
pub use run::{
    run_hierarchy, Attempt, Diagnostics, HierarchyOptions, RankCheck, SeparabilityCertificate,
    Verdict, Witness,
};
