//! Multi-indices, polynomials, truncated moment sequences and the matrices
//! built from them.

mod mapping;
mod moments;
mod multi_index;
mod polynomial;

pub use mapping::{mu_to_alpha, state_to_tms, tensor_to_tms};
pub use moments::{
    flatness_check, flatness_ranks, localizing_matrix, moment_matrix, numerical_rank,
    shifted_tms, MomentMatrix, Tms, DEFAULT_RANK_TOL,
};
pub use multi_index::{basis_size, monomial_basis, monomials_of_degree, MultiIndex};
pub use polynomial::Polynomial;
