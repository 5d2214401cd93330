//! Density matrices and their local-basis tensor coordinates.
//! Symmetric subspaces get their own projection helpers.

mod basis;
mod constraints;
pub(crate) mod ops;
mod partition;
mod state;
mod tensor;

pub use basis::{standard_basis, LocalBasis};
pub use constraints::local_constraint_polynomials;
pub use ops::{dicke_state, partial_transpose, partial_transpose_matrix, ppt_check, symmetric_projector};
pub use partition::PartitionSpec;
pub use state::{DensityMatrix, EIGEN_FLOOR, HERMITIAN_TOL, TRACE_TOL};
pub use tensor::{
    class_symmetrizer, state_to_tensor, t_matrix, tensor_to_state, StateTensor, TensorConversion,
};
