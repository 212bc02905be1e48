//! Gap-free cluster recovery in unbalanced stochastic block models via a
//! trace-regularized semidefinite program.

pub mod linalg;
pub mod model;
pub mod sdp;
pub mod recovery;
pub mod oracle;
pub mod io;
pub mod harness;
