//! Separability certification of finite-dimensional multipartite quantum
//! states through truncated moment sequences and a hierarchy of
//! semidefinite relaxations.

pub mod criteria;
pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod quantum;
pub mod randgen;
pub mod sdp;
pub mod semialgebraic;
pub mod tms;

pub use error::{Error, Result};
