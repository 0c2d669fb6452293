//! Dense complex linear algebra over tensor-product spaces.

pub mod decomp;
pub mod operator;
pub mod random;
pub mod state;
pub mod tol;

pub use decomp::{herm_eig, polar_unitary, psd_sqrt, svd, HermEig, Svd};
pub use operator::{basis_vector, inner, norm, tensor, tensor_vec, Operator, C64, ONE, ZERO};
pub use random::{haar_unitary, stream_rng};
pub use state::{
    apply_local, partial_trace, permute_operator, permute_vector, purify, reduced_state, uhlmann_overlap,
    DensityMatrix, PureState, SubsystemShape,
};
